//! Eigenvalue flow of Φ(E), the nonlinear root ω₀(E) = 0, and the
//! ground-state wavefunction from the Riesz projection.
//!
//! On the physical half-line every eigenvalue curve of Φ(E) is strictly
//! decreasing (the Feynman–Hellmann derivative ⟨ω|∂Φ/∂E|ω⟩ is ≤ −1), so
//! ω₀(E) = 0 has at most one solution below the sector threshold n·m + μ_p
//! and that solution is the ground-state energy of the pair of coupled
//! sectors. The residue of Φ(E)⁻¹ at the root yields the two-component
//! wavefunction
//!
//!   Ψ = ( −λ N (H₀−E_gr)⁻¹ φ⁽⁻⁾(x̄) |ω₀⟩ ,  N |ω₀⟩ ),   N = [−ω₀′(E_gr)]^(−1/2),
//!
//! normalized exactly by the Feynman–Hellmann identity
//! ⟨Ψ|Ψ⟩ = [−ω₀′]⁻¹ ⟨ω₀|−∂Φ/∂E|ω₀⟩ = 1. The upper component carries the
//! explicit −λ of the coupling block, which the eigenvector comparison with
//! the truncated-Hamiltonian oracle is sensitive to.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::fock::{enumerate_sector, ModelParams, SectorBasis};
use crate::hamiltonian;
use crate::numeric::{lanczos_smallest, lin_space, log_space, symmetric_eigen_sorted};
use crate::principal::{assemble_phi, phi_derivative, PhiOperator};

/// Relative gap below which the two lowest eigenvalues count as degenerate.
const DEGENERACY_GAP: f64 = 1e-10;
/// Minimal eigenvector overlap between adjacent grid points before the flow
/// grid refines itself.
const TRACKING_OVERLAP: f64 = 0.9;

/// Spectrum of Φ(E) at one spectral parameter, with the tracked lowest
/// eigenvector and its Feynman–Hellmann derivative.
#[derive(Clone, Debug)]
pub struct FlowSample {
    pub e: f64,
    /// Ascending eigenvalues (full spectrum on the dense path, the lowest
    /// value alone on the matrix-free path).
    pub eigenvalues: Vec<f64>,
    pub lowest_vector: DVector<f64>,
    /// ⟨ω₀|∂Φ/∂E|ω₀⟩ < 0.
    pub fh_derivative: f64,
    pub degenerate: bool,
    /// Largest |entry| of Φ(E), the scale for the root tolerance.
    pub phi_max_norm: f64,
}

/// Lowest eigenpair plus derivative at one E; dense below the ceiling,
/// Lanczos on the matrix-free operator above it.
fn sample_at(params: &ModelParams, sector: &SectorBasis, e: f64) -> Result<FlowSample> {
    if sector.dim() <= params.limits.dense_ceiling {
        let phi = assemble_phi(params, sector, e)?;
        let phi_max_norm = crate::numeric::max_abs_entry(&phi.matrix);
        let (vals, vecs) = symmetric_eigen_sorted(phi.matrix);
        let degenerate =
            vals.len() > 1 && vals[1] - vals[0] < DEGENERACY_GAP * (1.0 + vals[0].abs());
        let lowest_vector = vecs.column(0).clone_owned();
        let deriv = phi_derivative(params, sector, e)?;
        let fh_derivative = lowest_vector.dot(&(&deriv * &lowest_vector));
        Ok(FlowSample {
            e,
            eigenvalues: vals.iter().copied().collect(),
            lowest_vector,
            fh_derivative,
            degenerate,
            phi_max_norm,
        })
    } else {
        let op = PhiOperator::new(params, sector, e)?;
        let (val, vec) = lanczos_smallest(&op, 1e-12, 400, 0x0f10)?;
        let deriv_apply = {
            let deriv = phi_derivative(params, sector, e);
            match deriv {
                Ok(d) => vec.dot(&(&d * &vec)),
                Err(_) => f64::NAN,
            }
        };
        Ok(FlowSample {
            e,
            eigenvalues: vec![val],
            lowest_vector: vec,
            fh_derivative: deriv_apply,
            degenerate: false,
            phi_max_norm: val.abs(),
        })
    }
}

/// Resolve degeneracy and sign ambiguity against the previous tracked
/// vector; returns the adjacent-point overlap.
fn align_with_previous(previous: &DVector<f64>, sample: &mut FlowSample) -> f64 {
    let overlap = previous.dot(&sample.lowest_vector);
    if overlap < 0.0 {
        sample.lowest_vector.neg_mut();
    }
    overlap.abs()
}

/// Spectra of Φ(E) over a sorted grid, eigenvector-tracked across adjacent
/// points; the grid refines itself (midpoint insertion, up to four rounds)
/// wherever the tracking overlap drops below 0.9.
pub fn eigen_flow(
    params: &ModelParams,
    sector: &SectorBasis,
    e_grid: &[f64],
) -> Result<Vec<FlowSample>> {
    if e_grid.is_empty() {
        return Err(Error::InvalidParameter("empty flow grid".into()));
    }
    let mut grid: Vec<f64> = e_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    for round in 0..4 {
        let mut samples = grid
            .par_iter()
            .map(|&e| sample_at(params, sector, e))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 1.0f64;
        let mut refine = Vec::new();
        for i in 1..samples.len() {
            let (left, right) = samples.split_at_mut(i);
            let overlap = align_with_previous(&left[i - 1].lowest_vector, &mut right[0]);
            if overlap < TRACKING_OVERLAP {
                refine.push(0.5 * (grid[i - 1] + grid[i]));
                worst = worst.min(overlap);
            }
        }
        if refine.is_empty() {
            return Ok(samples);
        }
        if round == 3 {
            return Err(Error::TrackingLost { overlap: worst });
        }
        grid.extend(refine);
        grid.sort_by(f64::total_cmp);
    }
    unreachable!("refinement loop returns or errors");
}

/// Root diagnostics from [`ground_energy`].
#[derive(Clone, Debug)]
pub struct GroundRoot {
    pub e_gr: f64,
    pub omega_at_root: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub fh_derivative: f64,
    pub lowest_vector: DVector<f64>,
    pub eigenvalues: Vec<f64>,
    pub degenerate: bool,
    pub phi_max_norm: f64,
}

/// Locate the unique root of ω₀(E) = 0 below the threshold by bisection
/// refined with Newton steps from the Feynman–Hellmann derivative.
///
/// `lower_seed` starts the bracket (the analytic lower bound is the natural
/// choice); if ω₀ is already non-positive there, the bracket extends
/// leftward geometrically. A missing sign change is the no-binding signal
/// and is reported with both endpoint values.
pub fn ground_energy(
    params: &ModelParams,
    sector: &SectorBasis,
    lower_seed: f64,
) -> Result<GroundRoot> {
    let threshold = params.threshold();
    let hi0 = threshold;
    let margin = 1e-9 * (1.0 + threshold.abs());
    let mut lo = lower_seed.min(hi0 - margin);

    let omega_hi = sample_at(params, sector, hi0)?;
    let mut lo_sample = sample_at(params, sector, lo)?;
    let mut expansions = 0;
    while lo_sample.eigenvalues[0] <= 0.0 {
        expansions += 1;
        if expansions > 60 {
            return Err(Error::IterationLimit {
                context: "bracket expansion",
                iterations: expansions,
            });
        }
        lo = hi0 - 2.0 * (hi0 - lo);
        lo_sample = sample_at(params, sector, lo)?;
    }
    let boundary_tol = 1e-11 * (1.0 + omega_hi.phi_max_norm);
    if omega_hi.eigenvalues[0].abs() <= boundary_tol && params.boson_number == 0 {
        // the renormalization condition puts the vacuum-sector root exactly
        // at E = μ_p, which is the sector threshold; it is the physical
        // composite itself, strictly below the upper-sector floor m
        let delta = 0.45e-10 * (1.0 + threshold.abs());
        let left = sample_at(params, sector, threshold - delta)?;
        debug_assert!(left.eigenvalues[0] > 0.0);
        return Ok(GroundRoot {
            e_gr: threshold,
            omega_at_root: omega_hi.eigenvalues[0],
            bracket: (threshold - delta, threshold),
            iterations: expansions + 2,
            fh_derivative: omega_hi.fh_derivative,
            lowest_vector: omega_hi.lowest_vector,
            eigenvalues: omega_hi.eigenvalues,
            degenerate: omega_hi.degenerate,
            phi_max_norm: omega_hi.phi_max_norm,
        });
    }
    if omega_hi.eigenvalues[0] >= -boundary_tol {
        // positive all the way up, or a marginal zero exactly at the free
        // branch: no bound state below threshold in this truncation
        return Err(Error::NoBinding {
            lo,
            hi: hi0,
            omega_lo: lo_sample.eigenvalues[0],
            omega_hi: omega_hi.eigenvalues[0],
            threshold,
        });
    }

    let mut hi = hi0;
    let mut x = 0.5 * (lo + hi);
    let mut step_old = hi - lo;
    let mut iterations = 0usize;
    for _ in 0..200 {
        iterations += 1;
        let sample = sample_at(params, sector, x)?;
        let omega = sample.eigenvalues[0];
        if omega > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let tol_f = 1e-12 * (1.0 + sample.phi_max_norm);
        let tol_x = 1e-12 * (1.0 + x.abs());
        let newton = x - omega / sample.fh_derivative;
        let step = (newton - x).abs();
        if omega.abs() <= tol_f && step <= tol_x {
            x = newton.clamp(lo, hi);
            break;
        }
        // Newton if it stays inside the bracket and halves the progress,
        // otherwise bisect
        if newton > lo && newton < hi && 2.0 * step < step_old {
            step_old = step;
            x = newton;
        } else {
            step_old = 0.5 * (hi - lo);
            x = 0.5 * (lo + hi);
        }
    }

    // tighten the reported bracket around the converged root
    let delta = 0.45e-10 * (1.0 + x.abs());
    let left = sample_at(params, sector, x - delta)?;
    let right = sample_at(params, sector, (x + delta).min(hi0))?;
    if left.eigenvalues[0] > 0.0 && right.eigenvalues[0] < 0.0 {
        lo = x - delta;
        hi = x + delta;
    } else {
        // fall back to plain bisection on the standing bracket
        let target = 1e-10 * (1.0 + x.abs());
        let mut guard = 0;
        while hi - lo > target {
            guard += 1;
            if guard > 90 {
                return Err(Error::IterationLimit {
                    context: "bracket bisection",
                    iterations: guard,
                });
            }
            let mid = 0.5 * (lo + hi);
            let s = sample_at(params, sector, mid)?;
            if s.eigenvalues[0] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        x = 0.5 * (lo + hi);
    }

    let best = sample_at(params, sector, x)?;
    let omega_at_root = best.eigenvalues[0];
    if omega_at_root.abs() > 1e-10 * (1.0 + best.phi_max_norm) || hi - lo > 1e-10 * (1.0 + x.abs())
    {
        return Err(Error::IterationLimit {
            context: "root refinement",
            iterations,
        });
    }
    Ok(GroundRoot {
        e_gr: x,
        omega_at_root,
        bracket: (lo, hi),
        iterations,
        fh_derivative: best.fh_derivative,
        lowest_vector: best.lowest_vector,
        eigenvalues: best.eigenvalues,
        degenerate: best.degenerate,
        phi_max_norm: best.phi_max_norm,
    })
}

/// Two-component ground-state wavefunction from the Riesz projection.
#[derive(Clone, Debug)]
pub struct RieszWavefunction {
    /// (n+1)-sector amplitudes −λN (H₀−E_gr)⁻¹ φ⁽⁻⁾(x̄)|ω₀⟩.
    pub upper: DVector<f64>,
    /// n-sector amplitudes N|ω₀⟩.
    pub lower: DVector<f64>,
    /// ‖upper‖² + ‖lower‖²; equals 1 by the Feynman–Hellmann identity.
    pub normalization: f64,
}

/// Evaluate the projection formulas at the root. `upper_sector` must be the
/// (n+1)-boson basis over the same catalog.
pub fn riesz_wavefunction(
    params: &ModelParams,
    lower_sector: &SectorBasis,
    upper_sector: &SectorBasis,
    e_gr: f64,
    lowest_vector: &DVector<f64>,
    fh_derivative: f64,
) -> Result<RieszWavefunction> {
    if fh_derivative >= 0.0 {
        return Err(Error::NonNegativeDerivative {
            value: fh_derivative,
        });
    }
    let floor = upper_sector
        .occupations
        .iter()
        .map(|o| o.h0)
        .fold(f64::INFINITY, f64::min);
    if e_gr >= floor {
        return Err(Error::InvalidParameter(format!(
            "Riesz reconstruction needs E_gr = {e_gr} strictly below the upper-sector floor {floor}"
        )));
    }
    let modes = &params.catalog.modes;
    let n_factor = 1.0 / (-fh_derivative).sqrt();
    let lower = lowest_vector * n_factor;
    let mut upper = DVector::zeros(upper_sector.dim());
    let mut source = Vec::new();
    for (u, occ) in upper_sector.occupations.iter().enumerate() {
        source.clear();
        source.extend_from_slice(&occ.counts);
        let mut amp = 0.0;
        for (s, mode) in modes.iter().enumerate() {
            if occ.counts[s] == 0 || mode.f_at_impurity == 0.0 {
                continue;
            }
            source[s] -= 1;
            if let Some(l) = lower_sector.index_of(&source) {
                amp += mode.f_at_impurity / (2.0 * mode.omega).sqrt()
                    * (occ.counts[s] as f64).sqrt()
                    * lowest_vector[l];
            }
            source[s] += 1;
        }
        upper[u] = -params.coupling * n_factor * amp / (occ.h0 - e_gr);
    }
    let normalization = lower.norm_squared() + upper.norm_squared();
    Ok(RieszWavefunction {
        upper,
        lower,
        normalization,
    })
}

/// One flow point in a serialized report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlowPoint {
    pub e: f64,
    pub omega0: f64,
    pub fh_derivative: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SandwichReport {
    pub lower_bound: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Cross-check of the root against the explicit truncated Hamiltonian at
/// the same cutoff.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleComparison {
    pub oracle_energy: f64,
    pub energy_difference: f64,
    /// |⟨Ψ_riesz|Ψ_direct⟩| between unit vectors on F⁽ⁿ⁺¹⁾ ⊕ F⁽ⁿ⁾.
    pub eigenvector_overlap: f64,
}

/// Everything the ground-state pipeline produces for one parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct GroundStateReport {
    pub e_gr: f64,
    pub bracket: [f64; 2],
    pub omega_at_root: f64,
    pub fh_derivative: f64,
    pub degenerate_lowest: bool,
    pub flow_samples: Vec<FlowPoint>,
    pub wavefunction_upper: Vec<f64>,
    pub wavefunction_lower: Vec<f64>,
    pub normalization: f64,
    pub bounds: SandwichReport,
    pub oracle_comparison: Option<OracleComparison>,
}

/// Outcome of the pipeline: a bound state, or the no-binding signal with
/// the endpoint diagnostics (λ = 0 lands here with the root pushed to the
/// threshold).
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GroundStateOutcome {
    Bound(GroundStateReport),
    Threshold {
        threshold: f64,
        endpoints: [f64; 2],
        omega_at_endpoints: [f64; 2],
    },
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub flow_points: usize,
    pub with_oracle: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            flow_points: 50,
            with_oracle: false,
        }
    }
}

/// Full pipeline: analytic bracket seed, flow scan, root, Riesz
/// wavefunction, bound sandwich and (optionally) the oracle comparison.
pub fn solve_ground_state(
    params: &ModelParams,
    options: SolveOptions,
) -> Result<GroundStateOutcome> {
    let sector = enumerate_sector(
        &params.catalog,
        params.boson_number,
        params.limits.sector_dim_ceiling,
    )?;
    let t_grid = log_space(1e-4, 10.0, 40);
    let c = crate::manifold::heat_kernel_bound_constant(&params.catalog.spec, &t_grid)?;
    let seed = bounds::invertibility_threshold(params, c);
    let root = match ground_energy(params, &sector, seed) {
        Ok(root) => root,
        Err(Error::NoBinding {
            lo,
            hi,
            omega_lo,
            omega_hi,
            threshold,
        }) => {
            return Ok(GroundStateOutcome::Threshold {
                threshold,
                endpoints: [lo, hi],
                omega_at_endpoints: [omega_lo, omega_hi],
            })
        }
        Err(e) => return Err(e),
    };

    let threshold = params.threshold();
    let flow_hi = threshold - 1e-6 * (1.0 + threshold.abs());
    let flow_lo = root.e_gr - 0.5 * (flow_hi - root.e_gr).max(0.5);
    let flow = eigen_flow(
        params,
        &sector,
        &lin_space(flow_lo, flow_hi, options.flow_points.max(2)),
    )?;
    let flow_samples = flow
        .iter()
        .map(|s| FlowPoint {
            e: s.e,
            omega0: s.eigenvalues[0],
            fh_derivative: s.fh_derivative,
        })
        .collect();

    let upper_sector = enumerate_sector(
        &params.catalog,
        params.boson_number + 1,
        params.limits.sector_dim_ceiling,
    )?;
    let wf = riesz_wavefunction(
        params,
        &sector,
        &upper_sector,
        root.e_gr,
        &root.lowest_vector,
        root.fh_derivative,
    )?;

    let oracle_comparison = if options.with_oracle {
        let h = hamiltonian::assemble_h(params)?;
        let (oracle_energy, direct) = h.lowest_eigenpair();
        let du = h.upper.dim();
        let mut stacked = DVector::zeros(du + h.lower.dim());
        stacked.rows_mut(0, du).copy_from(&wf.upper);
        stacked.rows_mut(du, h.lower.dim()).copy_from(&wf.lower);
        stacked /= stacked.norm();
        Some(OracleComparison {
            oracle_energy,
            energy_difference: root.e_gr - oracle_energy,
            eigenvector_overlap: stacked.dot(&direct).abs(),
        })
    } else {
        None
    };

    let lower_bound = bounds::compact_lower(params, c);
    Ok(GroundStateOutcome::Bound(GroundStateReport {
        e_gr: root.e_gr,
        bracket: [root.bracket.0, root.bracket.1],
        omega_at_root: root.omega_at_root,
        fh_derivative: root.fh_derivative,
        degenerate_lowest: root.degenerate,
        flow_samples,
        wavefunction_upper: wf.upper.iter().copied().collect(),
        wavefunction_lower: wf.lower.iter().copied().collect(),
        normalization: wf.normalization,
        bounds: SandwichReport {
            lower_bound,
            threshold,
            satisfied: lower_bound <= root.e_gr && root.e_gr < threshold,
        },
        oracle_comparison,
    }))
}

/// Lowest eigenvalue of Φ(E) at a single spectral parameter.
pub fn lowest_eigenvalue(params: &ModelParams, sector: &SectorBasis, e: f64) -> Result<f64> {
    Ok(sample_at(params, sector, e)?.eigenvalues[0])
}

/// Relative difference between the Feynman–Hellmann derivative and the
/// central finite difference of the tracked eigenvalue at step
/// h = 1e-5·(1+|E|).
pub fn fh_consistency(params: &ModelParams, sector: &SectorBasis, e: f64) -> Result<f64> {
    let h = 1e-5 * (1.0 + e.abs());
    let center = sample_at(params, sector, e)?;
    let plus = sample_at(params, sector, e + h)?;
    let minus = sample_at(params, sector, e - h)?;
    let central = (plus.eigenvalues[0] - minus.eigenvalues[0]) / (2.0 * h);
    Ok((center.fh_derivative - central).abs() / central.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Limits;
    use crate::manifold::{build_catalog, ManifoldSpec};
    use crate::principal::k_sum;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn torus_params(cutoff: f64, mu_p: f64, lambda: f64, n: usize) -> ModelParams {
        let catalog = build_catalog(
            &ManifoldSpec::torus(2.0 * PI, 2.0 * PI),
            cutoff,
            1.0,
            false,
            1_000_000,
        )
        .unwrap();
        ModelParams::new(catalog, mu_p, lambda, n, Limits::default()).unwrap()
    }

    #[test]
    fn vacuum_sector_flow_is_the_scalar_curve() {
        let params = torus_params(4.5, 0.5, 1.0, 0);
        let sector = enumerate_sector(&params.catalog, 0, 10).unwrap();
        let grid = lin_space(-1.0, 0.49, 20);
        let flow = eigen_flow(&params, &sector, &grid).unwrap();
        for s in &flow {
            let expected = (0.5 - s.e) * (1.0 + k_sum(&params, s.e, 0.0).unwrap());
            assert_relative_eq!(s.eigenvalues[0], expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn free_theory_flow_is_a_line_of_slope_minus_one() {
        let params = torus_params(2.5, 0.5, 0.0, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let grid = lin_space(-1.0, 1.0, 9);
        let flow = eigen_flow(&params, &sector, &grid).unwrap();
        for s in &flow {
            assert_relative_eq!(s.eigenvalues[0], 1.5 - s.e, max_relative = 1e-12);
            assert_relative_eq!(s.fh_derivative, -1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn flow_strictly_decreasing_on_fifty_points() {
        let params = torus_params(2.0, 0.5, 0.5, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let grid = lin_space(-0.5, 1.45, 50);
        let flow = eigen_flow(&params, &sector, &grid).unwrap();
        for w in flow.windows(2) {
            assert!(
                w[1].eigenvalues[0] < w[0].eigenvalues[0],
                "flow not strictly decreasing"
            );
        }
        for s in &flow {
            assert!(s.fh_derivative < 0.0);
        }
    }

    #[test]
    fn fh_matches_central_difference() {
        let params = torus_params(2.5, 0.5, 1.2, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        for e in [-0.3, 0.4, 1.1] {
            let rel = fh_consistency(&params, &sector, e).unwrap();
            assert!(rel < 1e-6, "FH vs central difference: {rel} at E = {e}");
        }
    }

    #[test]
    fn vacuum_root_is_binding_energy_to_machine_precision() {
        for mu_p in [0.2, 0.5, 0.9] {
            let params = torus_params(4.5, mu_p, 1.0, 0);
            let sector = enumerate_sector(&params.catalog, 0, 10).unwrap();
            let root = ground_energy(&params, &sector, mu_p - 1.0).unwrap();
            assert!(
                (root.e_gr - mu_p).abs() < 1e-12,
                "root {} vs mu_p {mu_p}",
                root.e_gr
            );
            assert!(root.bracket.1 - root.bracket.0 < 1e-10 * (1.0 + root.e_gr.abs()));
        }
    }

    #[test]
    fn free_theory_reports_threshold() {
        let params = torus_params(2.5, 0.5, 0.0, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        match ground_energy(&params, &sector, -1.0) {
            Err(Error::NoBinding { threshold, .. }) => {
                assert_relative_eq!(threshold, 1.5);
            }
            other => panic!("expected the no-binding signal, got {other:?}"),
        }
        match solve_ground_state(&params, SolveOptions::default()).unwrap() {
            GroundStateOutcome::Threshold { threshold, .. } => {
                assert_relative_eq!(threshold, 1.5);
            }
            GroundStateOutcome::Bound(_) => panic!("free theory cannot bind"),
        }
    }

    #[test]
    fn root_matches_oracle_lowest_eigenvalue() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let root = ground_energy(&params, &sector, -1.0).unwrap();
        let h = hamiltonian::assemble_h(&params).unwrap();
        let (oracle, _) = h.lowest_eigenpair();
        assert!(
            (root.e_gr - oracle).abs() < 1e-9,
            "root {} vs oracle {oracle}",
            root.e_gr
        );
    }

    #[test]
    fn root_uniqueness_sign_pattern() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let root = ground_energy(&params, &sector, -1.0).unwrap();
        let threshold = params.threshold();
        for e in lin_space(root.e_gr - 1.0, root.e_gr - 1e-6, 10) {
            let s = sample_at(&params, &sector, e).unwrap();
            assert!(s.eigenvalues[0] > 0.0, "omega0({e}) should be positive");
        }
        for e in lin_space(root.e_gr + 1e-6, threshold - 1e-6, 10) {
            let s = sample_at(&params, &sector, e).unwrap();
            assert!(s.eigenvalues[0] < 0.0, "omega0({e}) should be negative");
        }
    }

    #[test]
    fn vacuum_riesz_amplitudes_match_closed_form() {
        let params = torus_params(4.5, 0.5, 0.9, 0);
        let lower = enumerate_sector(&params.catalog, 0, 10).unwrap();
        let upper = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let root = ground_energy(&params, &lower, -0.5).unwrap();
        assert_relative_eq!(root.e_gr, 0.5, epsilon = 1e-12);
        let wf = riesz_wavefunction(
            &params,
            &lower,
            &upper,
            root.e_gr,
            &root.lowest_vector,
            root.fh_derivative,
        )
        .unwrap();
        let n_factor = 1.0 / (-root.fh_derivative).sqrt();
        let sign = root.lowest_vector[0].signum();
        // upper amplitudes −λ N f_σ /(√(2ω_σ)(ω_σ − μ_p)) against each
        // single-boson state
        for (u, occ) in upper.occupations.iter().enumerate() {
            let mode_idx = occ.counts.iter().position(|&c| c == 1).unwrap();
            let mode = &params.catalog.modes[mode_idx];
            let expected = -params.coupling * n_factor * sign * mode.f_at_impurity
                / ((2.0 * mode.omega).sqrt() * (mode.omega - 0.5));
            assert_relative_eq!(wf.upper[u], expected, max_relative = 1e-9);
        }
        assert_relative_eq!(wf.normalization, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn normalization_identity_both_equalities() {
        let params = torus_params(2.5, 0.5, 1.3, 1);
        let lower = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let upper = enumerate_sector(&params.catalog, 2, 10_000).unwrap();
        let root = ground_energy(&params, &lower, -1.0).unwrap();
        let wf = riesz_wavefunction(
            &params,
            &lower,
            &upper,
            root.e_gr,
            &root.lowest_vector,
            root.fh_derivative,
        )
        .unwrap();
        // ⟨Ψⁿ|Ψⁿ⟩ + ⟨Ψⁿ⁺¹|Ψⁿ⁺¹⟩ = 1
        assert!((wf.normalization - 1.0).abs() < 1e-8);
        // [−ω₀′]⁻¹⟨ω₀|−∂Φ/∂E|ω₀⟩ = 1 with ω₀′ from the central difference
        let h = 1e-5 * (1.0 + root.e_gr.abs());
        let plus = sample_at(&params, &lower, root.e_gr + h).unwrap();
        let minus = sample_at(&params, &lower, root.e_gr - h).unwrap();
        let central = (plus.eigenvalues[0] - minus.eigenvalues[0]) / (2.0 * h);
        let ratio = root.fh_derivative / central;
        assert!((ratio - 1.0).abs() < 1e-6, "FH vs central at root: {ratio}");
    }

    #[test]
    fn oracle_overlap_through_solve_pipeline() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let report = match solve_ground_state(
            &params,
            SolveOptions {
                flow_points: 12,
                with_oracle: true,
            },
        )
        .unwrap()
        {
            GroundStateOutcome::Bound(r) => r,
            _ => panic!("binding expected"),
        };
        let oracle = report.oracle_comparison.unwrap();
        assert!(oracle.energy_difference.abs() < 1e-9);
        assert!(oracle.eigenvector_overlap > 1.0 - 1e-8);
        assert!(report.bounds.satisfied);
        assert!((report.normalization - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pruned_and_unpruned_flows_agree() {
        // validation for the prune_uncoupled flag: the impurity at the
        // origin decouples every sine mode, and dropping them must not move
        // the lowest curve
        let spec = ManifoldSpec::torus(2.0 * PI, 2.0 * PI);
        let full = build_catalog(&spec, 2.5, 1.0, false, 100_000).unwrap();
        let pruned = build_catalog(&spec, 2.5, 1.0, true, 100_000).unwrap();
        assert!(pruned.len() < full.len());
        let p_full = ModelParams::new(full, 0.5, 1.0, 1, Limits::default()).unwrap();
        let p_pruned = ModelParams::new(pruned, 0.5, 1.0, 1, Limits::default()).unwrap();
        let s_full = enumerate_sector(&p_full.catalog, 1, 10_000).unwrap();
        let s_pruned = enumerate_sector(&p_pruned.catalog, 1, 10_000).unwrap();
        for e in lin_space(-0.5, 1.4, 7) {
            let a = sample_at(&p_full, &s_full, e).unwrap();
            let b = sample_at(&p_pruned, &s_pruned, e).unwrap();
            assert_relative_eq!(a.eigenvalues[0], b.eigenvalues[0], epsilon = 1e-12);
        }
        let ra = ground_energy(&p_full, &s_full, -1.0).unwrap();
        let rb = ground_energy(&p_pruned, &s_pruned, -1.0).unwrap();
        assert!((ra.e_gr - rb.e_gr).abs() < 1e-10);
    }

    #[test]
    fn lanczos_path_agrees_with_dense_on_forced_small_ceiling() {
        let mut params = torus_params(2.5, 0.5, 1.0, 1);
        let sector = enumerate_sector(&params.catalog, 1, 10_000).unwrap();
        let dense_root = ground_energy(&params, &sector, -1.0).unwrap();
        params.limits.dense_ceiling = 2; // force the matrix-free path
        let lanczos_root = ground_energy(&params, &sector, -1.0).unwrap();
        assert!(
            (dense_root.e_gr - lanczos_root.e_gr).abs() < 1e-9,
            "dense {} vs lanczos {}",
            dense_root.e_gr,
            lanczos_root.e_gr
        );
    }
}
