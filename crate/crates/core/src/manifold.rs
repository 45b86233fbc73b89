//! Laplace–Beltrami spectra, eigenfunction values at the impurity point, and
//! heat-kernel diagonals for the two supported compact surfaces.
//!
//! Both surfaces have closed-form spectra, which is what makes the truncated
//! Hamiltonian an exact oracle:
//!
//! * flat rectangular torus: σ = (2πk₁/L₁)² + (2πk₂/L₂)² over integer pairs,
//!   with the real cosine/sine eigenbasis √(2/V)·cos(k·x), √(2/V)·sin(k·x)
//!   and the constant mode 1/√V;
//! * round sphere of radius r: σ = l(l+1)/r² with degeneracy 2l+1 and real
//!   spherical harmonics Y_{lm}/r.
//!
//! The heat-kernel diagonal K_t(x̄,x̄) = Σ_σ e^{-σt} f_σ(x̄)² drives the
//! norm estimates; on the torus it is also evaluated as a Poisson-resummed
//! image sum (1/4πt)·Σ_n e^{-|nL|²/4t} and the two routes must agree.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Relative tail target for heat-kernel spectral sums: truncate once the
/// geometric-envelope tail bound drops below this fraction of the partial sum.
const HEAT_TAIL_REL: f64 = 1e-14;

/// Modes whose |f(x̄)|·√V falls below this are treated as uncoupled.
const UNCOUPLED_REL: f64 = 1e-12;

/// Geometry of the compact surface carrying the boson field, plus the fixed
/// location of the two-level system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ManifoldSpec {
    Torus {
        l1: f64,
        l2: f64,
        /// Impurity coordinates, reduced mod (L₁, L₂) on load.
        #[serde(default)]
        impurity: [f64; 2],
    },
    Sphere {
        radius: f64,
        /// Impurity polar angle; the default 0 puts it at the pole, where
        /// only m = 0 harmonics couple.
        #[serde(default)]
        impurity_polar: f64,
        #[serde(default)]
        impurity_azimuth: f64,
    },
}

impl ManifoldSpec {
    /// Torus with the impurity at the origin.
    pub fn torus(l1: f64, l2: f64) -> Self {
        Self::Torus {
            l1,
            l2,
            impurity: [0.0, 0.0],
        }
    }

    /// Sphere with the impurity at the north pole.
    pub fn sphere(radius: f64) -> Self {
        Self::Sphere {
            radius,
            impurity_polar: 0.0,
            impurity_azimuth: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Torus { l1, l2, impurity } => {
                if !(l1.is_finite() && *l1 > 0.0 && l2.is_finite() && *l2 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "torus side lengths must be positive, got L1 = {l1}, L2 = {l2}"
                    )));
                }
                if !impurity.iter().all(|x| x.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "torus impurity coordinates must be finite".into(),
                    ));
                }
            }
            Self::Sphere {
                radius,
                impurity_polar,
                impurity_azimuth,
            } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
                if !(impurity_polar.is_finite()
                    && impurity_azimuth.is_finite()
                    && (0.0..=PI).contains(impurity_polar))
                {
                    return Err(Error::InvalidParameter(
                        "sphere impurity angles must be finite with polar angle in [0, pi]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Surface area: L₁·L₂ or 4πr².
    pub fn volume(&self) -> f64 {
        match self {
            Self::Torus { l1, l2, .. } => l1 * l2,
            Self::Sphere { radius, .. } => 4.0 * PI * radius * radius,
        }
    }
}

/// One Laplacian eigenmode retained in a catalog.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Mode {
    pub index: usize,
    /// Laplace–Beltrami eigenvalue σ ≥ 0.
    pub sigma: f64,
    /// Eigenfunction evaluated at the impurity point.
    pub f_at_impurity: f64,
    /// Relativistic single-boson energy ω = √(σ + m²).
    pub omega: f64,
}

/// All eigenmodes with σ ≤ Λ, sorted by σ with the constant mode first.
#[derive(Clone, Debug, Serialize)]
pub struct ModeCatalog {
    pub spec: ManifoldSpec,
    pub cutoff: f64,
    pub boson_mass: f64,
    pub volume: f64,
    pub prune_uncoupled: bool,
    pub modes: Vec<Mode>,
}

impl ModeCatalog {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// CSV export with columns (index, sigma, omega, f_at_impurity).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,sigma,omega,f_at_impurity\n");
        for m in &self.modes {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e}\n",
                m.index, m.sigma, m.omega, m.f_at_impurity
            ));
        }
        out
    }
}

/// Enumerate every mode with σ ≤ `cutoff`, attach ω = √(σ+m²) and the
/// impurity amplitudes, optionally dropping modes with f(x̄) = 0.
pub fn build_catalog(
    spec: &ManifoldSpec,
    cutoff: f64,
    boson_mass: f64,
    prune_uncoupled: bool,
    mode_ceiling: usize,
) -> Result<ModeCatalog> {
    spec.validate()?;
    if !(boson_mass.is_finite() && boson_mass > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "boson mass must be positive, got {boson_mass}"
        )));
    }
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue cutoff must be non-negative, got {cutoff}"
        )));
    }
    let tol = 1e-12 * cutoff.max(1.0);
    let volume = spec.volume();
    let mut raw: Vec<(f64, f64)> = Vec::new(); // (sigma, f)

    match spec {
        ManifoldSpec::Torus { l1, l2, impurity } => {
            let x1 = impurity[0].rem_euclid(*l1);
            let x2 = impurity[1].rem_euclid(*l2);
            let k1_max = (cutoff.sqrt() * l1 / (2.0 * PI)).floor() as i64 + 1;
            let k2_max = (cutoff.sqrt() * l2 / (2.0 * PI)).floor() as i64 + 1;
            let amp = (2.0 / volume).sqrt();
            raw.push((0.0, 1.0 / volume.sqrt()));
            // half lattice: each {k, -k} pair yields one cosine and one sine mode
            for k1 in 0..=k1_max {
                let k2_range = if k1 == 0 {
                    1..=k2_max
                } else {
                    -k2_max..=k2_max
                };
                for k2 in k2_range {
                    let q1 = 2.0 * PI * k1 as f64 / l1;
                    let q2 = 2.0 * PI * k2 as f64 / l2;
                    let sigma = q1 * q1 + q2 * q2;
                    if sigma > cutoff + tol {
                        continue;
                    }
                    let phase = q1 * x1 + q2 * x2;
                    raw.push((sigma, amp * phase.cos()));
                    raw.push((sigma, amp * phase.sin()));
                    if raw.len() > mode_ceiling.saturating_mul(2) + 2 {
                        return Err(Error::ModeCeiling {
                            needed: raw.len(),
                            ceiling: mode_ceiling,
                        });
                    }
                }
            }
        }
        ManifoldSpec::Sphere {
            radius,
            impurity_polar,
            impurity_azimuth,
        } => {
            let r2 = radius * radius;
            let mut l = 0u32;
            loop {
                let sigma = (l as f64) * (l as f64 + 1.0) / r2;
                if sigma > cutoff + tol {
                    break;
                }
                for m in -(l as i64)..=(l as i64) {
                    let y = real_spherical_harmonic(l, m, *impurity_polar, *impurity_azimuth);
                    raw.push((sigma, y / radius));
                }
                if raw.len() > mode_ceiling.saturating_mul(2) + 2 {
                    return Err(Error::ModeCeiling {
                        needed: raw.len(),
                        ceiling: mode_ceiling,
                    });
                }
                l += 1;
            }
        }
    }

    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    if prune_uncoupled {
        raw.retain(|&(_, f)| f.abs() * volume.sqrt() >= UNCOUPLED_REL);
    }
    if raw.len() > mode_ceiling {
        return Err(Error::ModeCeiling {
            needed: raw.len(),
            ceiling: mode_ceiling,
        });
    }
    let modes = raw
        .into_iter()
        .enumerate()
        .map(|(index, (sigma, f))| Mode {
            index,
            sigma,
            f_at_impurity: f,
            omega: (sigma + boson_mass * boson_mass).sqrt(),
        })
        .collect();
    Ok(ModeCatalog {
        spec: spec.clone(),
        cutoff,
        boson_mass,
        volume,
        prune_uncoupled,
        modes,
    })
}

/// Real orthonormal spherical harmonic Y_{lm}(θ, φ) on the unit sphere,
/// through the fully normalized associated Legendre recurrence (no
/// factorials, stable to high l).
pub fn real_spherical_harmonic(l: u32, m: i64, theta: f64, phi: f64) -> f64 {
    let m_abs = m.unsigned_abs() as u32;
    debug_assert!(m_abs <= l);
    let q = normalized_assoc_legendre(l, m_abs, theta.cos(), theta.sin());
    if m == 0 {
        q
    } else if m > 0 {
        std::f64::consts::SQRT_2 * q * (m_abs as f64 * phi).cos()
    } else {
        std::f64::consts::SQRT_2 * q * (m_abs as f64 * phi).sin()
    }
}

/// N_lm·P_l^m(cosθ) with N_lm = √((2l+1)/4π · (l-m)!/(l+m)!), m ≥ 0.
fn normalized_assoc_legendre(l: u32, m: u32, cos_t: f64, sin_t: f64) -> f64 {
    // seed: fully normalized P_m^m
    let mut q_prev = {
        let mut ratio = 1.0; // Π (2k-1)/(2k)
        for k in 1..=m {
            ratio *= (2.0 * k as f64 - 1.0) / (2.0 * k as f64);
        }
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * ((2.0 * m as f64 + 1.0) / (4.0 * PI) * ratio).sqrt() * sin_t.powi(m as i32)
    };
    if l == m {
        return q_prev;
    }
    let mut q = (2.0 * m as f64 + 3.0).sqrt() * cos_t * q_prev;
    if l == m + 1 {
        return q;
    }
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b =
            (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (cos_t * q - b * q_prev);
        q_prev = q;
        q = next;
    }
    q
}

/// 1D theta-type sum Σ_{k ∈ ℤ} e^{-a k²} with a rigorous geometric tail cut.
fn theta_sum(a: f64) -> Result<f64> {
    debug_assert!(a > 0.0);
    let mut acc = KahanSum::new();
    acc.add(1.0);
    let mut k = 1u64;
    loop {
        let term = (-a * (k as f64) * (k as f64)).exp();
        acc.add(2.0 * term);
        // k'² ≥ k² + 2k(k'-k) for k' ≥ k, so the tail is geometric
        let q = (-2.0 * a * k as f64).exp();
        let tail = 2.0 * term * q / (1.0 - q);
        if tail <= HEAT_TAIL_REL * acc.value() {
            return Ok(acc.value());
        }
        k += 1;
        if k > 50_000_000 {
            return Err(Error::SpectralSumTail { tail });
        }
    }
}

/// Diagonal heat kernel K_t(x̄, x̄) by the Sturm–Liouville spectral sum.
///
/// Both surfaces are homogeneous, so the diagonal does not depend on x̄;
/// the full (degenerate) spectrum enters regardless of pruning because the
/// level sums of f² equal degeneracy/V.
pub fn heat_kernel_diag(spec: &ManifoldSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "heat kernel time must be positive, got {t}"
        )));
    }
    match spec {
        ManifoldSpec::Torus { l1, l2, .. } => {
            let a1 = t * (2.0 * PI / l1) * (2.0 * PI / l1);
            let a2 = t * (2.0 * PI / l2) * (2.0 * PI / l2);
            Ok(theta_sum(a1)? * theta_sum(a2)? / (l1 * l2))
        }
        ManifoldSpec::Sphere { radius, .. } => {
            let tau = t / (radius * radius);
            let mut acc = KahanSum::new();
            let mut l = 0u64;
            loop {
                let lf = l as f64;
                acc.add((2.0 * lf + 1.0) * (-lf * (lf + 1.0) * tau).exp());
                let next = (2.0 * lf + 3.0) * (-(lf + 1.0) * (lf + 2.0) * tau).exp();
                let q = (2.0 * lf + 5.0) / (2.0 * lf + 3.0) * (-2.0 * (lf + 2.0) * tau).exp();
                if q < 1.0 {
                    let tail = next / (1.0 - q);
                    if tail <= HEAT_TAIL_REL * acc.value() {
                        break;
                    }
                }
                l += 1;
                if l > 50_000_000 {
                    return Err(Error::SpectralSumTail { tail: next });
                }
            }
            Ok(acc.value() / (4.0 * PI * radius * radius))
        }
    }
}

/// Torus diagonal heat kernel by the Poisson-resummed image sum
/// (1/4πt)·Σ_{n∈ℤ²} e^{-(n₁²L₁²+n₂²L₂²)/4t}; the independent cross-check
/// for [`heat_kernel_diag`].
pub fn torus_image_sum(spec: &ManifoldSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "heat kernel time must be positive, got {t}"
        )));
    }
    match spec {
        ManifoldSpec::Torus { l1, l2, .. } => {
            let b1 = l1 * l1 / (4.0 * t);
            let b2 = l2 * l2 / (4.0 * t);
            Ok(theta_sum(b1)? * theta_sum(b2)? / (4.0 * PI * t))
        }
        ManifoldSpec::Sphere { .. } => Err(Error::InvalidParameter(
            "image sum is defined for the flat torus only".into(),
        )),
    }
}

/// Smallest C with K_t(x̄,x̄) ≤ 1/V + C/t on the given grid (d = 2), i.e.
/// the grid maximum of t·(K_t − 1/V), clamped at 0.
pub fn heat_kernel_bound_constant(spec: &ManifoldSpec, t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "heat-kernel bound needs a non-empty t grid".into(),
        ));
    }
    let inv_v = 1.0 / spec.volume();
    let mut c = 0.0f64;
    for &t in t_grid {
        let k = heat_kernel_diag(spec, t)?;
        c = c.max(t * (k - inv_v));
    }
    Ok(c)
}
