//! The renormalized principal operator Φ(E) on an n-boson sector.
//!
//! After the physical-mass condition fixes the bare level splitting
//!
//!   μ(Λ) = μ_p + Σ_{σ≤Λ} λ² f_σ(x̄)² / (2 ω_σ (ω_σ − μ_p)),
//!
//! the operator takes the normal-ordered form
//!
//!   Φ(E) = (H₀ − E + μ_p) · [ 1 + Σ_σ λ² f_σ² / (2 ω_σ (ω_σ−μ_p)(H₀−E+ω_σ)) ]
//!          − Σ_{σ,τ} λ² f_σ f_τ / (2 √(ω_σ ω_τ)) ·
//!            a†_σ (H₀ − E + ω_σ + ω_τ)⁻¹ a_τ ,
//!
//! which at any finite cutoff is algebraically identical to the cutoff form
//! H₀ − E + μ(Λ) − Σ_σ λ²f_σ²/(2ω_σ) (H₀−E+ω_σ)⁻¹ − (same hopping term).
//! That identity is the module's master correctness check and is assembled
//! independently in [`crate::hamiltonian`].
//!
//! Everything is generic over the spectral parameter: real E for the flow
//! and root-finding, complex E for the resolvent identities. The admissible
//! half-plane is Re(E) ≤ n·m + μ_p (the closed boundary is included because
//! the variational bound evaluates there, and all truncated denominators
//! remain positive up to (n+1)·m).

use nalgebra::{ComplexField, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{ModelParams, SectorBasis};
use crate::numeric::{compensated_sum, KahanSum, SymOp};

/// Bare mass at the catalog cutoff, with divergence diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct RenormResult {
    pub cutoff: f64,
    /// μ(Λ) = μ_p + Σ_{σ≤Λ} λ² f_σ²/(2ω_σ(ω_σ−μ_p)).
    pub mu_bare: f64,
    /// Weyl-density estimate of the further shift from raising the cutoff by
    /// one e-fold. The dropped sum itself grows logarithmically without
    /// bound, so only this rate is meaningful.
    pub tail_next_efold: f64,
    /// Running μ after each completed degenerate level (σ, μ-so-far).
    pub level_partial_sums: Vec<(f64, f64)>,
}

/// Evaluate μ(Λ) over the catalog of `params`.
pub fn bare_mass(params: &ModelParams) -> RenormResult {
    let mu_p = params.binding_energy;
    let lambda_sq = params.coupling * params.coupling;
    let mut acc = KahanSum::new();
    acc.add(mu_p);
    let mut levels = Vec::new();
    let modes = &params.catalog.modes;
    let mut i = 0;
    while i < modes.len() {
        let sigma = modes[i].sigma;
        let mut j = i;
        while j < modes.len() && modes[j].sigma - sigma <= 1e-9 * sigma.max(1.0) {
            let m = &modes[j];
            acc.add(
                lambda_sq * m.f_at_impurity * m.f_at_impurity / (2.0 * m.omega * (m.omega - mu_p)),
            );
            j += 1;
        }
        levels.push((sigma, acc.value()));
        i = j;
    }
    RenormResult {
        cutoff: params.catalog.cutoff,
        mu_bare: acc.value(),
        tail_next_efold: bare_mass_tail_next_efold(params),
        level_partial_sums: levels,
    }
}

fn bare_mass_tail_next_efold(params: &ModelParams) -> f64 {
    let m = params.boson_mass;
    let mu_p = params.binding_energy;
    let lambda_sq = params.coupling * params.coupling;
    if lambda_sq == 0.0 {
        return 0.0;
    }
    let lo = params.catalog.cutoff;
    let hi = std::f64::consts::E * lo.max(m * m);
    // density of σ-eigenvalues times the mean level weight is 1/4π in d = 2
    let density = 1.0 / (4.0 * std::f64::consts::PI);
    crate::quad::integrate(
        |sigma| {
            let omega = (sigma + m * m).sqrt();
            density * lambda_sq / (2.0 * omega * (omega - mu_p))
        },
        lo,
        hi,
        1e-12,
    )
    .map(|r| r.value)
    .unwrap_or(f64::NAN)
}

/// Reject spectral parameters above the sector threshold n·m + μ_p.
pub fn check_domain(params: &ModelParams, re_e: f64) -> Result<()> {
    let threshold = params.threshold();
    if re_e > threshold + 1e-12 * (1.0 + threshold.abs()) {
        return Err(Error::DomainViolation { re_e, threshold });
    }
    Ok(())
}

/// The convergent renormalization sum at a single free energy h₀:
/// Σ_σ λ² f_σ² / (2 ω_σ (ω_σ − μ_p)(h₀ − E + ω_σ)), over the catalog modes.
pub fn k_sum<S>(params: &ModelParams, e: S, h0: f64) -> Result<S>
where
    S: ComplexField<RealField = f64>,
{
    check_domain(params, e.clone().real())?;
    let mu_p = params.binding_energy;
    let lambda_sq = params.coupling * params.coupling;
    Ok(compensated_sum(params.catalog.modes.iter().map(|m| {
        let weight =
            lambda_sq * m.f_at_impurity * m.f_at_impurity / (2.0 * m.omega * (m.omega - mu_p));
        S::from_real(weight) / (S::from_real(h0 + m.omega) - e.clone())
    })))
}

/// Integral bound on the part of [`k_sum`] dropped above the catalog cutoff;
/// used by the cutoff-stability diagnostics.
pub fn k_sum_tail_bound(params: &ModelParams, re_e: f64, h0: f64) -> f64 {
    let m = params.boson_mass;
    let mu_p = params.binding_energy;
    let lambda_sq = params.coupling * params.coupling;
    if lambda_sq == 0.0 {
        return 0.0;
    }
    let omega_cut = (params.catalog.cutoff + m * m).sqrt();
    let b = h0 - re_e;
    let pref = lambda_sq / (4.0 * std::f64::consts::PI);
    // ∫_{ω_Λ}^∞ 2 dω / ((ω−μ_p)(ω+b)) in closed form
    if (mu_p + b).abs() > 1e-12 {
        pref / (mu_p + b) * ((omega_cut + b) / (omega_cut - mu_p)).ln()
    } else {
        pref / (omega_cut - mu_p)
    }
}

/// Dense Hermitian representation of Φ(E) on a sector.
#[derive(Clone, Debug)]
pub struct PrincipalMatrix<S: ComplexField<RealField = f64>> {
    pub e: S,
    pub matrix: DMatrix<S>,
    pub cutoff: f64,
    pub assembly_seconds: f64,
}

/// Assemble Φ(E) on `sector`: the diagonal contribution
/// (h₀ − E + μ_p)(1 + k_sum(E, h₀)) plus the one-boson hopping term with the
/// intermediate-state denominator (h_int − E + ω_σ + ω_τ), where h_int is the
/// free energy after the annihilator acts.
pub fn assemble_phi<S>(
    params: &ModelParams,
    sector: &SectorBasis,
    e: S,
) -> Result<PrincipalMatrix<S>>
where
    S: ComplexField<RealField = f64>,
{
    check_domain(params, e.clone().real())?;
    let dim = sector.dim();
    if dim > params.limits.dense_ceiling {
        return Err(Error::DimensionCeiling {
            dim,
            ceiling: params.limits.dense_ceiling,
        });
    }
    let start = std::time::Instant::now();
    let mu_p = params.binding_energy;
    let mut matrix = DMatrix::<S>::zeros(dim, dim);
    for (j, occ) in sector.occupations.iter().enumerate() {
        let k = k_sum(params, e.clone(), occ.h0)?;
        matrix[(j, j)] = (S::from_real(occ.h0 + mu_p) - e.clone()) * (S::one() + k);
    }
    add_hopping(params, sector, e.clone(), 1, &mut matrix, -1.0);
    Ok(PrincipalMatrix {
        e,
        matrix,
        cutoff: params.catalog.cutoff,
        assembly_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Add `sign` times the positive hopping operator
/// Σ_{σ,τ} λ² f_σ f_τ/(2√(ω_σω_τ)) a†_σ (H₀−E+ω_σ+ω_τ)^{-power} a_τ
/// into `matrix`. Shared by Φ, ∂Φ/∂E (power = 2) and the bound machinery.
pub(crate) fn add_hopping<S>(
    params: &ModelParams,
    sector: &SectorBasis,
    e: S,
    power: u32,
    matrix: &mut DMatrix<S>,
    sign: f64,
) where
    S: ComplexField<RealField = f64>,
{
    let modes = &params.catalog.modes;
    let lambda_sq = params.coupling * params.coupling;
    if lambda_sq == 0.0 {
        return;
    }
    let mut target = Vec::new();
    for (j, occ) in sector.occupations.iter().enumerate() {
        target.clear();
        target.extend_from_slice(&occ.counts);
        for tau in 0..modes.len() {
            let n_tau = occ.counts[tau];
            if n_tau == 0 || modes[tau].f_at_impurity == 0.0 {
                continue;
            }
            let amp_tau = (n_tau as f64).sqrt();
            let h_int = occ.h0 - modes[tau].omega;
            target[tau] -= 1;
            for sigma in 0..modes.len() {
                if modes[sigma].f_at_impurity == 0.0 {
                    continue;
                }
                target[sigma] += 1;
                let i = sector
                    .index_of(&target)
                    .expect("raising within an enumerated sector");
                target[sigma] -= 1;
                let amp_sigma = (sector.occupation(i).counts[sigma] as f64).sqrt();
                let coupling = lambda_sq * modes[sigma].f_at_impurity * modes[tau].f_at_impurity
                    / (2.0 * (modes[sigma].omega * modes[tau].omega).sqrt());
                let denom = S::from_real(h_int + modes[sigma].omega + modes[tau].omega) - e.clone();
                let denom_pow = if power == 1 {
                    denom
                } else {
                    denom.clone() * denom
                };
                matrix[(i, j)] += S::from_real(sign * coupling * amp_tau * amp_sigma) / denom_pow;
            }
            target[tau] += 1;
        }
    }
}

/// ∂Φ/∂E assembled analytically: every denominator differentiated, giving
/// −1 − Σ_σ λ²f_σ²/(2ω_σ(H₀−E+ω_σ)²) on the diagonal and the hopping term
/// with squared denominators. Symmetric and ≤ −1 as an operator on the real
/// axis.
pub fn phi_derivative(params: &ModelParams, sector: &SectorBasis, e: f64) -> Result<DMatrix<f64>> {
    check_domain(params, e)?;
    let dim = sector.dim();
    if dim > params.limits.dense_ceiling {
        return Err(Error::DimensionCeiling {
            dim,
            ceiling: params.limits.dense_ceiling,
        });
    }
    let lambda_sq = params.coupling * params.coupling;
    let mut matrix = DMatrix::<f64>::zeros(dim, dim);
    for (j, occ) in sector.occupations.iter().enumerate() {
        let mut acc = KahanSum::new();
        acc.add(-1.0);
        for m in &params.catalog.modes {
            let denom = occ.h0 - e + m.omega;
            acc.add(
                -lambda_sq * m.f_at_impurity * m.f_at_impurity / (2.0 * m.omega * denom * denom),
            );
        }
        matrix[(j, j)] = acc.value();
    }
    add_hopping(params, sector, e, 2, &mut matrix, -1.0);
    Ok(matrix)
}

/// Matrix-free Φ(E) application for sectors above the dense ceiling: the
/// diagonal is precomputed, the hopping term is applied mode-pair by
/// mode-pair.
pub struct PhiOperator<'a> {
    params: &'a ModelParams,
    sector: &'a SectorBasis,
    e: f64,
    diag_no_hop: DVector<f64>,
}

impl<'a> PhiOperator<'a> {
    pub fn new(params: &'a ModelParams, sector: &'a SectorBasis, e: f64) -> Result<Self> {
        check_domain(params, e)?;
        let mu_p = params.binding_energy;
        let mut diag = DVector::zeros(sector.dim());
        for (j, occ) in sector.occupations.iter().enumerate() {
            diag[j] = (occ.h0 - e + mu_p) * (1.0 + k_sum(params, e, occ.h0)?);
        }
        Ok(Self {
            params,
            sector,
            e,
            diag_no_hop: diag,
        })
    }
}

impl SymOp for PhiOperator<'_> {
    fn dim(&self) -> usize {
        self.sector.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let modes = &self.params.catalog.modes;
        let lambda_sq = self.params.coupling * self.params.coupling;
        let mut w = self.diag_no_hop.component_mul(v);
        if lambda_sq == 0.0 {
            return w;
        }
        let mut target = Vec::new();
        for (j, occ) in self.sector.occupations.iter().enumerate() {
            if v[j] == 0.0 {
                continue;
            }
            target.clear();
            target.extend_from_slice(&occ.counts);
            for tau in 0..modes.len() {
                let n_tau = occ.counts[tau];
                if n_tau == 0 || modes[tau].f_at_impurity == 0.0 {
                    continue;
                }
                let amp_tau = (n_tau as f64).sqrt();
                let h_int = occ.h0 - modes[tau].omega;
                target[tau] -= 1;
                for sigma in 0..modes.len() {
                    if modes[sigma].f_at_impurity == 0.0 {
                        continue;
                    }
                    target[sigma] += 1;
                    let i = self
                        .sector
                        .index_of(&target)
                        .expect("raising within an enumerated sector");
                    target[sigma] -= 1;
                    let amp_sigma = (self.sector.occupation(i).counts[sigma] as f64).sqrt();
                    let coupling =
                        lambda_sq * modes[sigma].f_at_impurity * modes[tau].f_at_impurity
                            / (2.0 * (modes[sigma].omega * modes[tau].omega).sqrt());
                    let denom = h_int + modes[sigma].omega + modes[tau].omega - self.e;
                    w[i] -= coupling * amp_tau * amp_sigma / denom * v[j];
                }
                target[tau] += 1;
            }
        }
        w
    }
}
