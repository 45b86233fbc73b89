//! The ground-truth oracle: an explicit truncated Hamiltonian on the sector
//! pair F⁽ⁿ⁺¹⁾ ⊕ F⁽ⁿ⁾ with the bare mass μ(Λ), its block resolvent, and the
//! pseudo-resolvent/decay property checks.
//!
//! In 2×2 block form,
//!
//!   H − E = [ H₀ − E          λ φ⁽⁻⁾(x̄) ]      [ a   b† ]
//!           [ λ φ⁽⁺⁾(x̄)   H₀ − E + μ(Λ) ]  =:  [ b   d  ]
//!
//! and the resolvent blocks are α = a⁻¹ + a⁻¹b†Φ⁻¹ba⁻¹, β = −Φ⁻¹ba⁻¹,
//! γ = −a⁻¹b†Φ⁻¹, δ = Φ⁻¹ with the principal operator Φ = d − b a⁻¹ b†.
//! The oracle exists only at finite Λ; every comparison against the
//! renormalized operator fixes the same catalog on both sides.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{enumerate_sector, ModelParams, SectorBasis};
use crate::numeric::{symmetric_eigen_sorted, KahanSum};
use crate::principal::bare_mass;

/// Explicit truncated Hamiltonian on F⁽ⁿ⁺¹⁾ ⊕ F⁽ⁿ⁾ (upper block first).
#[derive(Clone, Debug)]
pub struct BlockHamiltonian {
    /// (n+1)-boson sector carried by the atom-down state.
    pub upper: SectorBasis,
    /// n-boson sector carried by the atom-up state.
    pub lower: SectorBasis,
    pub mu_bare: f64,
    /// Coupling block b† = λ φ⁽⁻⁾(x̄) as a dim(n+1) × dim(n) matrix.
    pub coupling: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
}

impl BlockHamiltonian {
    pub fn dim(&self) -> usize {
        self.upper.dim() + self.lower.dim()
    }

    /// Lowest eigenvalue and eigenvector of the full symmetric matrix.
    pub fn lowest_eigenpair(&self) -> (f64, DVector<f64>) {
        let (vals, vecs) = symmetric_eigen_sorted(self.matrix.clone());
        (vals[0], vecs.column(0).clone_owned())
    }
}

/// The creation coupling b† between the sectors: entries
/// λ f_σ(x̄) √(n_σ(U)) / √(2 ω_σ) wherever the upper state U is the lower
/// state L with one boson added in σ.
fn coupling_block(params: &ModelParams, upper: &SectorBasis, lower: &SectorBasis) -> DMatrix<f64> {
    let modes = &params.catalog.modes;
    let lambda = params.coupling;
    let mut b = DMatrix::zeros(upper.dim(), lower.dim());
    let mut target = Vec::new();
    for (l, occ) in lower.occupations.iter().enumerate() {
        target.clear();
        target.extend_from_slice(&occ.counts);
        for (s, mode) in modes.iter().enumerate() {
            if mode.f_at_impurity == 0.0 {
                continue;
            }
            target[s] += 1;
            let u = upper
                .index_of(&target)
                .expect("raising lands in the upper sector");
            let amp = (target[s] as f64).sqrt();
            target[s] -= 1;
            b[(u, l)] = lambda * mode.f_at_impurity * amp / (2.0 * mode.omega).sqrt();
        }
    }
    b
}

/// Assemble the truncated H at the catalog cutoff, with +μ(Λ) on the lower
/// block.
pub fn assemble_h(params: &ModelParams) -> Result<BlockHamiltonian> {
    let n = params.boson_number;
    let upper = enumerate_sector(&params.catalog, n + 1, params.limits.sector_dim_ceiling)?;
    let lower = enumerate_sector(&params.catalog, n, params.limits.sector_dim_ceiling)?;
    let mu_bare = bare_mass(params).mu_bare;
    let (du, dl) = (upper.dim(), lower.dim());
    if du + dl > params.limits.sector_dim_ceiling {
        return Err(Error::DimensionCeiling {
            dim: du + dl,
            ceiling: params.limits.sector_dim_ceiling,
        });
    }
    let coupling = coupling_block(params, &upper, &lower);
    let mut matrix = DMatrix::zeros(du + dl, du + dl);
    for (u, occ) in upper.occupations.iter().enumerate() {
        matrix[(u, u)] = occ.h0;
    }
    for (l, occ) in lower.occupations.iter().enumerate() {
        matrix[(du + l, du + l)] = occ.h0 + mu_bare;
    }
    for u in 0..du {
        for l in 0..dl {
            matrix[(u, du + l)] = coupling[(u, l)];
            matrix[(du + l, u)] = coupling[(u, l)];
        }
    }
    Ok(BlockHamiltonian {
        upper,
        lower,
        mu_bare,
        coupling,
        matrix,
    })
}

/// The normal-ordered cutoff principal operator Φ_Λ(E) with μ(Λ)
/// substituted, assembled term by term:
///
///   H₀ − E + μ(Λ) − Σ_σ λ²f_σ²/(2ω_σ) (H₀−E+ω_σ)⁻¹ − hopping.
///
/// This is the independent oracle for the renormalized assembly in
/// [`crate::principal::assemble_phi`]; the two are algebraically equal at
/// any finite cutoff.
pub fn phi_lambda_cutoff(
    params: &ModelParams,
    sector: &SectorBasis,
    e: f64,
    mu_bare: f64,
) -> DMatrix<f64> {
    let modes = &params.catalog.modes;
    let lambda_sq = params.coupling * params.coupling;
    let dim = sector.dim();
    let mut phi = DMatrix::zeros(dim, dim);
    for (j, occ) in sector.occupations.iter().enumerate() {
        let mut diag = KahanSum::new();
        diag.add(occ.h0 - e + mu_bare);
        for m in modes {
            diag.add(
                -lambda_sq * m.f_at_impurity * m.f_at_impurity
                    / (2.0 * m.omega * (occ.h0 - e + m.omega)),
            );
        }
        phi[(j, j)] = diag.value();
    }
    // hopping, written out independently of the renormalized assembly
    let mut target = Vec::new();
    for (j, occ) in sector.occupations.iter().enumerate() {
        target.clear();
        target.extend_from_slice(&occ.counts);
        for tau in 0..modes.len() {
            if occ.counts[tau] == 0 || modes[tau].f_at_impurity == 0.0 {
                continue;
            }
            let amp_tau = (occ.counts[tau] as f64).sqrt();
            let h_intermediate = occ.h0 - modes[tau].omega;
            target[tau] -= 1;
            for sigma in 0..modes.len() {
                if modes[sigma].f_at_impurity == 0.0 {
                    continue;
                }
                target[sigma] += 1;
                let i = sector.index_of(&target).expect("within sector");
                target[sigma] -= 1;
                let amp_sigma = (sector.occupation(i).counts[sigma] as f64).sqrt();
                phi[(i, j)] -= lambda_sq
                    * modes[sigma].f_at_impurity
                    * modes[tau].f_at_impurity
                    * amp_tau
                    * amp_sigma
                    / (2.0 * (modes[sigma].omega * modes[tau].omega).sqrt())
                    / (h_intermediate - e + modes[sigma].omega + modes[tau].omega);
            }
            target[tau] += 1;
        }
    }
    phi
}

/// Φ(E) built directly as the Schur complement d − b a⁻¹ b† of the block
/// matrix; a third route that exercises the normal-ordering identity itself.
pub fn phi_from_schur<S>(h: &BlockHamiltonian, e: S) -> Result<DMatrix<S>>
where
    S: ComplexField<RealField = f64>,
{
    let du = h.upper.dim();
    let dl = h.lower.dim();
    let a_inv = upper_free_inverse(h, e.clone())?;
    let b_s = h.coupling.map(S::from_real);
    let mut phi = DMatrix::<S>::zeros(dl, dl);
    for l in 0..dl {
        phi[(l, l)] = S::from_real(h.lower.occupation(l).h0 + h.mu_bare) - e.clone();
    }
    // b a⁻¹ b†: contract through the diagonal upper block
    for l1 in 0..dl {
        for l2 in 0..dl {
            let mut acc = S::zero();
            for u in 0..du {
                acc += b_s[(u, l1)].clone() * a_inv[u].clone() * b_s[(u, l2)].clone();
            }
            phi[(l1, l2)] -= acc;
        }
    }
    Ok(phi)
}

fn upper_free_inverse<S>(h: &BlockHamiltonian, e: S) -> Result<Vec<S>>
where
    S: ComplexField<RealField = f64>,
{
    h.upper
        .occupations
        .iter()
        .map(|occ| {
            let d = S::from_real(occ.h0) - e.clone();
            if d.clone().abs() < 1e-13 * (1.0 + occ.h0.abs()) {
                Err(Error::SingularAt {
                    re_e: e.clone().real(),
                })
            } else {
                Ok(S::one() / d)
            }
        })
        .collect()
}

/// The four resolvent blocks at a spectral parameter off the spectrum.
#[derive(Clone, Debug)]
pub struct BlockResolvent<S: ComplexField<RealField = f64>> {
    pub e: S,
    pub alpha: DMatrix<S>,
    pub beta: DMatrix<S>,
    pub gamma: DMatrix<S>,
    pub delta: DMatrix<S>,
}

impl<S: ComplexField<RealField = f64>> BlockResolvent<S> {
    /// Assemble the full (du+dl)² matrix [[α, γ], [β, δ]].
    pub fn full(&self) -> DMatrix<S> {
        let du = self.alpha.nrows();
        let dl = self.delta.nrows();
        let mut r = DMatrix::zeros(du + dl, du + dl);
        r.view_mut((0, 0), (du, du)).copy_from(&self.alpha);
        r.view_mut((0, du), (du, dl)).copy_from(&self.gamma);
        r.view_mut((du, 0), (dl, du)).copy_from(&self.beta);
        r.view_mut((du, du), (dl, dl)).copy_from(&self.delta);
        r
    }
}

/// Build R(E) from the block formulas (never from a direct dense inverse).
pub fn block_resolvent<S>(h: &BlockHamiltonian, e: S) -> Result<BlockResolvent<S>>
where
    S: ComplexField<RealField = f64>,
{
    let du = h.upper.dim();
    let dl = h.lower.dim();
    let a_inv = upper_free_inverse(h, e.clone())?;
    let phi = phi_from_schur(h, e.clone())?;
    let delta = phi.lu().try_inverse().ok_or(Error::SingularAt {
        re_e: e.clone().real(),
    })?;
    let b_s = h.coupling.map(S::from_real);
    // b a⁻¹ as a dl × du matrix
    let mut b_ainv = DMatrix::<S>::zeros(dl, du);
    for l in 0..dl {
        for u in 0..du {
            b_ainv[(l, u)] = b_s[(u, l)].clone() * a_inv[u].clone();
        }
    }
    let beta = -(&delta * &b_ainv);
    let gamma = beta.transpose();
    let mut alpha = -(&b_ainv.transpose() * &beta);
    for u in 0..du {
        alpha[(u, u)] += a_inv[u].clone();
    }
    Ok(BlockResolvent {
        e,
        alpha,
        beta,
        gamma,
        delta,
    })
}

/// ‖R(E₁) − R(E₂) − (E₁−E₂)·R(E₁)R(E₂)‖_max with both resolvents built from
/// the block formulas. Zero (to rounding) iff the family obeys the first
/// resolvent identity.
pub fn pseudo_resolvent_residual<S>(h: &BlockHamiltonian, e1: S, e2: S) -> Result<f64>
where
    S: ComplexField<RealField = f64>,
{
    let r1 = block_resolvent(h, e1.clone())?.full();
    let r2 = block_resolvent(h, e2.clone())?.full();
    let residual = &r1 - &r2 - (&r1 * &r2) * (e1 - e2);
    Ok(crate::numeric::max_abs_entry(&residual))
}

/// Deterministic probe states: every canonical basis vector plus
/// `extra_random` fixed-seed random unit vectors.
pub fn deterministic_probes(dim: usize, extra_random: usize, seed: u64) -> Vec<DVector<f64>> {
    use rand::{Rng, SeedableRng};
    let mut probes: Vec<DVector<f64>> = (0..dim)
        .map(|i| {
            let mut v = DVector::zeros(dim);
            v[i] = 1.0;
            v
        })
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra_random {
        let mut v = DVector::from_iterator(dim, (0..dim).map(|_| rng.gen_range(-1.0..1.0)));
        v /= v.norm();
        probes.push(v);
    }
    probes
}

/// One decay-check measurement ‖ |λ_k| R(−|λ_k|) x − x ‖.
#[derive(Clone, Copy, Debug)]
pub struct DecaySample {
    pub lambda_k: f64,
    pub probe: usize,
    pub norm: f64,
}

/// Evaluate the decay condition ‖|λ_k| R(−|λ_k|) x − x‖ on a grid of
/// magnitudes; on a truncation the norms fall like 1/|λ_k|.
pub fn decay_check(
    h: &BlockHamiltonian,
    magnitudes: &[f64],
    probes: &[DVector<f64>],
) -> Result<Vec<DecaySample>> {
    let mut out = Vec::with_capacity(magnitudes.len() * probes.len());
    for &lk in magnitudes {
        if !(lk > 0.0) {
            return Err(Error::InvalidParameter(
                "decay-check magnitudes must be positive".into(),
            ));
        }
        let r = block_resolvent(h, -lk)?.full();
        for (p, x) in probes.iter().enumerate() {
            let norm = (&r * x * lk - x).norm();
            out.push(DecaySample {
                lambda_k: lk,
                probe: p,
                norm,
            });
        }
    }
    Ok(out)
}

/// ‖ |λ_k| β(−|λ_k|) x ‖ for upper-sector probes; the β-block decays at
/// least like |λ_k|^{-1/2}.
pub fn beta_block_decay(
    h: &BlockHamiltonian,
    magnitudes: &[f64],
    probes: &[DVector<f64>],
) -> Result<Vec<DecaySample>> {
    let mut out = Vec::with_capacity(magnitudes.len() * probes.len());
    for &lk in magnitudes {
        let r = block_resolvent(h, -lk)?;
        for (p, x) in probes.iter().enumerate() {
            let norm = (&r.beta * x * lk).norm();
            out.push(DecaySample {
                lambda_k: lk,
                probe: p,
                norm,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Limits;
    use crate::manifold::{build_catalog, ManifoldSpec};
    use crate::numeric::max_abs_entry;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
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
    fn free_theory_block_diagonal_spectrum() {
        let params = torus_params(1.5, 0.5, 0.0, 1);
        let h = assemble_h(&params).unwrap();
        assert_relative_eq!(h.mu_bare, 0.5, epsilon = 1e-15);
        assert_eq!(max_abs_entry(&h.coupling), 0.0);
        let (vals, _) = symmetric_eigen_sorted(h.matrix.clone());
        // spectrum is the union of upper free energies and lower + μ_p
        let mut expected: Vec<f64> = h
            .upper
            .occupations
            .iter()
            .map(|o| o.h0)
            .chain(h.lower.occupations.iter().map(|o| o.h0 + 0.5))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in vals.iter().zip(&expected) {
            assert_relative_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_zero_mode_two_by_two() {
        let params = torus_params(0.0, 0.5, 0.8, 0);
        let h = assemble_h(&params).unwrap();
        assert_eq!(h.dim(), 2);
        let v = 4.0 * PI * PI;
        let c = 0.8 / (2.0f64 * v).sqrt();
        assert_relative_eq!(h.matrix[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(h.matrix[(0, 1)], c, max_relative = 1e-14);
        assert_relative_eq!(h.matrix[(1, 1)], h.mu_bare, max_relative = 1e-14);
    }

    #[test]
    fn block_resolvent_equals_direct_inverse() {
        let params = torus_params(2.5, 0.5, 1.2, 1);
        let h = assemble_h(&params).unwrap();
        let e = params.binding_energy - 1.0;
        let r = block_resolvent(&h, e).unwrap().full();
        let mut shifted = h.matrix.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] -= e;
        }
        let direct = shifted.lu().try_inverse().unwrap();
        let diff = max_abs_entry(&(&r - &direct));
        assert!(diff < 1e-10, "block vs direct inverse differ by {diff}");
    }

    #[test]
    fn free_resolvent_blocks_are_diagonal() {
        let params = torus_params(1.5, 0.5, 0.0, 1);
        let h = assemble_h(&params).unwrap();
        let e = -0.7;
        let r = block_resolvent(&h, e).unwrap();
        assert_eq!(max_abs_entry(&r.beta), 0.0);
        assert_eq!(max_abs_entry(&r.gamma), 0.0);
        for (u, occ) in h.upper.occupations.iter().enumerate() {
            assert_relative_eq!(r.alpha[(u, u)], 1.0 / (occ.h0 - e), max_relative = 1e-14);
        }
        for (l, occ) in h.lower.occupations.iter().enumerate() {
            assert_relative_eq!(
                r.delta[(l, l)],
                1.0 / (occ.h0 + 0.5 - e),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn pseudo_resolvent_identity() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let h = assemble_h(&params).unwrap();
        assert_eq!(pseudo_resolvent_residual(&h, -1.0, -1.0).unwrap(), 0.0);
        let res = pseudo_resolvent_residual(&h, -1.0, -2.0).unwrap();
        assert!(res < 1e-10, "real-pair residual {res}");

        let e1 = Complex64::new(-1.0, 1.0);
        let e2 = Complex64::new(-1.0, -1.0);
        let res = pseudo_resolvent_residual(&h, e1, e2).unwrap();
        assert!(res < 1e-10, "conjugate-pair residual {res}");
    }

    #[test]
    fn adjoint_symmetry_for_complex_parameters() {
        let params = torus_params(2.5, 0.5, 0.9, 1);
        let h = assemble_h(&params).unwrap();
        let e = Complex64::new(0.2, 0.8);
        let r = block_resolvent(&h, e).unwrap().full();
        let r_conj = block_resolvent(&h, e.conj()).unwrap().full();
        let diff = max_abs_entry(&(&r_conj - &r.adjoint()));
        assert!(diff < 1e-10, "R(conj E) vs R(E)† differ by {diff}");
    }

    #[test]
    fn delta_block_diverges_first_order_at_ground_state() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let h = assemble_h(&params).unwrap();
        let (e_gr, _) = h.lowest_eigenpair();
        let gaps: Vec<f64> = (2..=5).map(|k| 10f64.powi(-k)).collect();
        let norms: Vec<f64> = gaps
            .iter()
            .map(|&g| {
                let r = block_resolvent(&h, e_gr - g).unwrap();
                max_abs_entry(&r.delta)
            })
            .collect();
        let slope = crate::numeric::log_log_slope(&gaps, &norms).unwrap();
        assert!(
            (slope + 1.0).abs() < 0.05,
            "pole-order exponent {} should be -1.00 ± 0.05",
            slope
        );
    }

    #[test]
    fn decay_condition_closed_form_at_zero_coupling() {
        let params = torus_params(1.5, 0.5, 0.0, 1);
        let h = assemble_h(&params).unwrap();
        let dim = h.dim();
        let probes = deterministic_probes(dim, 0, 0);
        let samples = decay_check(&h, &[1e3, 1e5], &probes).unwrap();
        for s in samples {
            let shifted = if s.probe < h.upper.dim() {
                h.upper.occupation(s.probe).h0
            } else {
                h.lower.occupation(s.probe - h.upper.dim()).h0 + 0.5
            };
            assert_relative_eq!(
                s.norm,
                shifted / (shifted + s.lambda_k),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn decay_norms_small_at_large_magnitudes() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let h = assemble_h(&params).unwrap();
        let probes = deterministic_probes(h.dim(), 10, 0x5eed);
        let samples = decay_check(&h, &[1e6], &probes).unwrap();
        for s in samples {
            assert!(
                s.norm < 1e-4,
                "norm {} at 1e6 for probe {}",
                s.norm,
                s.probe
            );
        }
    }

    #[test]
    fn decay_slope_is_minus_one_over_top_decade() {
        let params = torus_params(2.5, 0.5, 1.3, 1);
        let h = assemble_h(&params).unwrap();
        let probes = deterministic_probes(h.dim(), 10, 0x5eed);
        let grid = crate::numeric::log_space(1e5, 1e6, 5);
        let samples = decay_check(&h, &grid, &probes).unwrap();
        for p in 0..probes.len() {
            let norms: Vec<f64> = samples
                .iter()
                .filter(|s| s.probe == p)
                .map(|s| s.norm)
                .collect();
            let slope = crate::numeric::log_log_slope(&grid, &norms).unwrap();
            assert!(
                (-1.2..=-0.8).contains(&slope),
                "probe {p}: slope {slope} outside [-1.2, -0.8]"
            );
        }
    }

    #[test]
    fn beta_block_decays_at_least_sqrt() {
        let params = torus_params(2.5, 0.5, 1.0, 1);
        let h = assemble_h(&params).unwrap();
        let probes = deterministic_probes(h.upper.dim(), 5, 0x5eed);
        let grid = crate::numeric::log_space(1e2, 1e6, 9);
        let samples = beta_block_decay(&h, &grid, &probes).unwrap();
        for p in 0..probes.len() {
            let norms: Vec<f64> = samples
                .iter()
                .filter(|s| s.probe == p)
                .map(|s| s.norm)
                .collect();
            if norms.iter().any(|&n| n < 1e-14) {
                continue; // probe annihilated by the coupling block
            }
            let slope = crate::numeric::log_log_slope(&grid, &norms).unwrap();
            assert!(slope <= -0.5 + 1e-6, "probe {p}: beta slope {slope}");
        }
    }

    #[test]
    fn creation_coupling_norm_inequality() {
        // ‖φ⁽⁺⁾(g) f⁽ⁿ⁺¹⁾‖ ≤ (n+1)‖g‖‖f‖ as stated, with the sharper
        // empirical constant √(n+1)
        for n in [0usize, 1, 2] {
            let params = torus_params(2.5, 0.5, 1.0, n);
            let h = assemble_h(&params).unwrap();
            let g_norm_sq: f64 = params
                .catalog
                .modes
                .iter()
                .map(|m| m.f_at_impurity * m.f_at_impurity / (2.0 * m.omega))
                .sum();
            let g_norm = g_norm_sq.sqrt();
            let op_norm = h.coupling.clone().singular_values().max();
            let stated = (n as f64 + 1.0) * params.coupling * g_norm;
            let sharper = ((n as f64 + 1.0).sqrt()) * params.coupling * g_norm;
            assert!(op_norm <= stated + 1e-12, "stated inequality violated");
            assert!(
                op_norm <= sharper + 1e-10,
                "empirical constant {} above sqrt(n+1) bound {}",
                op_norm / (params.coupling * g_norm),
                (n as f64 + 1.0).sqrt()
            );
        }
    }

    #[test]
    fn schur_complement_matches_cutoff_phi() {
        let params = torus_params(2.5, 0.5, 1.1, 1);
        let h = assemble_h(&params).unwrap();
        let e = 0.4;
        let schur = phi_from_schur(&h, e).unwrap();
        let cutoff = phi_lambda_cutoff(&params, &h.lower, e, h.mu_bare);
        let scale = max_abs_entry(&cutoff);
        let diff = max_abs_entry(&(&schur - &cutoff));
        assert!(diff < 1e-12 * scale.max(1.0), "schur vs cutoff {diff}");
    }
}
