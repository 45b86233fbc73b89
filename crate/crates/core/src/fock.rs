//! Occupation-number bases over a mode catalog, ladder matrix elements and
//! free energies.
//!
//! The model conserves a combined charge, so only the pair of sectors
//! (n bosons, atom up) ⊕ (n+1 bosons, atom down) ever couples; everything
//! here works with one boson number at a time. States are the standard
//! orthonormal occupation basis; every 1/√(2ω) factor of the invariant-norm
//! description lives inside the operator couplings instead.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::manifold::ModeCatalog;

/// Ceilings protecting desk-scale runs.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Largest admissible sector dimension C(M+n-1, n).
    pub sector_dim_ceiling: usize,
    /// Above this dimension eigenproblems switch to the matrix-free path.
    pub dense_ceiling: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            sector_dim_ceiling: 200_000,
            dense_ceiling: 5_000,
        }
    }
}

/// Physical and truncation parameters of one model instance.
///
/// The boson mass is the catalog's: ω values are attached at catalog build
/// time, and every operator below reads them from there.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub boson_mass: f64,
    /// Physical binding energy μ_p of the one-boson/atom-down composite.
    pub binding_energy: f64,
    /// Coupling λ ≥ 0.
    pub coupling: f64,
    /// Boson number n of the lower sector.
    pub boson_number: usize,
    pub catalog: ModeCatalog,
    pub limits: Limits,
}

impl ModelParams {
    pub fn new(
        catalog: ModeCatalog,
        binding_energy: f64,
        coupling: f64,
        boson_number: usize,
        limits: Limits,
    ) -> Result<Self> {
        let boson_mass = catalog.boson_mass;
        if !(binding_energy.is_finite() && 0.0 < binding_energy && binding_energy < boson_mass) {
            return Err(Error::InvalidParameter(format!(
                "binding energy must satisfy 0 < mu_p < m, got mu_p = {binding_energy}, m = {boson_mass}"
            )));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be non-negative, got {coupling}"
            )));
        }
        if catalog.is_empty() {
            return Err(Error::InvalidParameter("catalog holds no modes".into()));
        }
        Ok(Self {
            boson_mass,
            binding_energy,
            coupling,
            boson_number,
            catalog,
            limits,
        })
    }

    /// Threshold n·m + μ_p of the lower sector; the spectral parameter must
    /// stay at or below it.
    pub fn threshold(&self) -> f64 {
        self.boson_number as f64 * self.boson_mass + self.binding_energy
    }
}

/// One occupation-number basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct Occupation {
    /// Per-mode boson counts, indexed like the catalog.
    pub counts: Vec<u32>,
    pub total: u32,
    /// Free energy Σ_σ n_σ ω_σ.
    pub h0: f64,
}

impl Occupation {
    pub fn from_counts(counts: Vec<u32>, catalog: &ModeCatalog) -> Self {
        let total = counts.iter().sum();
        let h0 = h0_energy(&counts, catalog);
        Self { counts, total, h0 }
    }
}

/// Free energy Σ_σ n_σ ω_σ of a raw counts vector.
pub fn h0_energy(counts: &[u32], catalog: &ModeCatalog) -> f64 {
    counts
        .iter()
        .zip(&catalog.modes)
        .map(|(&n, mode)| n as f64 * mode.omega)
        .sum()
}

/// Annihilation matrix element: amplitude √(n_σ) and the occupation with one
/// boson removed; amplitude 0 (and no state) when the mode is empty.
pub fn lower_element(
    occ: &Occupation,
    mode: usize,
    catalog: &ModeCatalog,
) -> (f64, Option<Occupation>) {
    if occ.counts[mode] == 0 {
        return (0.0, None);
    }
    let mut counts = occ.counts.clone();
    counts[mode] -= 1;
    let amp = (occ.counts[mode] as f64).sqrt();
    (amp, Some(Occupation::from_counts(counts, catalog)))
}

/// Creation matrix element: amplitude √(n_σ + 1) and the occupation with one
/// boson added.
pub fn raise_element(occ: &Occupation, mode: usize, catalog: &ModeCatalog) -> (f64, Occupation) {
    let mut counts = occ.counts.clone();
    counts[mode] += 1;
    let amp = (counts[mode] as f64).sqrt();
    (amp, Occupation::from_counts(counts, catalog))
}

/// The complete n-boson occupation basis over a catalog, in ascending
/// lexicographic order of the counts vector, with constant-time index lookup.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub boson_number: usize,
    pub occupations: Vec<Occupation>,
    index: HashMap<Vec<u32>, usize>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn occupation(&self, i: usize) -> &Occupation {
        &self.occupations[i]
    }
}

/// C(a+b-1, b) with overflow detection, for the stars-and-bars dimension.
pub fn sector_dimension(modes: usize, bosons: usize) -> Option<u128> {
    binomial((modes + bosons).checked_sub(1)?, bosons)
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// Enumerate the full n-boson basis over `catalog`, erroring out when the
/// stars-and-bars dimension exceeds `ceiling`.
pub fn enumerate_sector(
    catalog: &ModeCatalog,
    bosons: usize,
    ceiling: usize,
) -> Result<SectorBasis> {
    let modes = catalog.len();
    if modes == 0 {
        return Err(Error::InvalidParameter("catalog holds no modes".into()));
    }
    let dim = sector_dimension(modes, bosons)
        .ok_or_else(|| Error::InvalidParameter("sector dimension overflows u128".into()))?;
    if dim > ceiling as u128 {
        return Err(Error::DimensionCeiling {
            dim: dim.min(usize::MAX as u128) as usize,
            ceiling,
        });
    }
    let dim = dim as usize;
    let mut occupations = Vec::with_capacity(dim);
    let mut counts = vec![0u32; modes];
    fill(&mut occupations, &mut counts, 0, bosons as u32, catalog);
    debug_assert_eq!(occupations.len(), dim);
    let index = occupations
        .iter()
        .enumerate()
        .map(|(i, occ)| (occ.counts.clone(), i))
        .collect();
    Ok(SectorBasis {
        boson_number: bosons,
        occupations,
        index,
    })
}

fn fill(
    out: &mut Vec<Occupation>,
    counts: &mut Vec<u32>,
    mode: usize,
    remaining: u32,
    catalog: &ModeCatalog,
) {
    if mode == counts.len() - 1 {
        counts[mode] = remaining;
        out.push(Occupation::from_counts(counts.clone(), catalog));
        counts[mode] = 0;
        return;
    }
    for c in 0..=remaining {
        counts[mode] = c;
        fill(out, counts, mode + 1, remaining - c, catalog);
    }
    counts[mode] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{build_catalog, ManifoldSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn torus_catalog(cutoff: f64, mass: f64) -> ModeCatalog {
        build_catalog(
            &ManifoldSpec::torus(2.0 * PI, 2.0 * PI),
            cutoff,
            mass,
            false,
            1_000_000,
        )
        .unwrap()
    }

    #[test]
    fn sector_dimensions() {
        let cat = torus_catalog(4.5, 1.0); // 13 modes
        assert_eq!(enumerate_sector(&cat, 0, 10).unwrap().dim(), 1);
        assert_eq!(sector_dimension(3, 2), Some(6));
        assert_eq!(sector_dimension(10, 3), Some(220));
        let dim2 = enumerate_sector(&cat, 2, 1_000_000).unwrap().dim();
        assert_eq!(dim2 as u128, sector_dimension(13, 2).unwrap());
    }

    #[test]
    fn ceiling_is_enforced() {
        let cat = torus_catalog(4.5, 1.0);
        assert!(matches!(
            enumerate_sector(&cat, 3, 100),
            Err(Error::DimensionCeiling { .. })
        ));
    }

    #[test]
    fn free_energies() {
        let cat = torus_catalog(1.5, 1.0); // zero mode + four σ=1 modes
        let vacuum = enumerate_sector(&cat, 0, 10).unwrap();
        assert_eq!(vacuum.occupation(0).h0, 0.0);

        let sector = enumerate_sector(&cat, 3, 10_000).unwrap();
        let all_zero = sector.index_of(&[3, 0, 0, 0, 0]).unwrap();
        assert_relative_eq!(sector.occupation(all_zero).h0, 3.0, epsilon = 1e-15);

        let one = enumerate_sector(&cat, 1, 10_000).unwrap();
        let in_sigma_one = one.index_of(&[0, 1, 0, 0, 0]).unwrap();
        assert_relative_eq!(
            one.occupation(in_sigma_one).h0,
            2.0f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn ladder_amplitudes() {
        let cat = torus_catalog(0.0, 1.0);
        let occ = Occupation::from_counts(vec![4], &cat);
        let (amp, lowered) = lower_element(&occ, 0, &cat);
        assert_relative_eq!(amp, 2.0, epsilon = 1e-15);
        assert_eq!(lowered.unwrap().counts, vec![3]);

        let empty = Occupation::from_counts(vec![0], &cat);
        let (amp, state) = lower_element(&empty, 0, &cat);
        assert_eq!(amp, 0.0);
        assert!(state.is_none());

        let one = Occupation::from_counts(vec![1], &cat);
        assert_relative_eq!(lower_element(&one, 0, &cat).0, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn raise_then_lower_is_number_plus_one() {
        let cat = torus_catalog(1.5, 1.0);
        let occ = Occupation::from_counts(vec![2, 1, 0, 0, 0], &cat);
        for mode in 0..cat.len() {
            let (up, raised) = raise_element(&occ, mode, &cat);
            let (down, back) = lower_element(&raised, mode, &cat);
            assert_relative_eq!(up * down, occ.counts[mode] as f64 + 1.0, epsilon = 1e-12);
            assert_eq!(back.unwrap(), occ);
        }
    }

    #[test]
    fn h0_additive_over_disjoint_modes() {
        let cat = torus_catalog(1.5, 1.0);
        let a = Occupation::from_counts(vec![2, 0, 0, 0, 0], &cat);
        let b = Occupation::from_counts(vec![0, 0, 1, 1, 0], &cat);
        let joined = Occupation::from_counts(vec![2, 0, 1, 1, 0], &cat);
        assert_relative_eq!(a.h0 + b.h0, joined.h0, epsilon = 1e-12);
    }

    #[test]
    fn raising_map_reproduces_next_sector() {
        let cat = torus_catalog(1.5, 1.0);
        for n in 0..3usize {
            let lower = enumerate_sector(&cat, n, 100_000).unwrap();
            let upper = enumerate_sector(&cat, n + 1, 100_000).unwrap();
            let mut reached: std::collections::HashSet<Vec<u32>> = Default::default();
            for occ in &lower.occupations {
                for mode in 0..cat.len() {
                    let (_, raised) = raise_element(occ, mode, &cat);
                    assert!(upper.index_of(&raised.counts).is_some());
                    reached.insert(raised.counts);
                }
            }
            assert_eq!(reached.len(), upper.dim());
        }
    }

    #[test]
    fn lexicographic_order_and_lookup() {
        let cat = torus_catalog(1.5, 1.0);
        let sector = enumerate_sector(&cat, 2, 10_000).unwrap();
        for w in sector.occupations.windows(2) {
            assert!(w[0].counts < w[1].counts, "not lexicographically sorted");
        }
        for (i, occ) in sector.occupations.iter().enumerate() {
            assert_eq!(sector.index_of(&occ.counts), Some(i));
        }
    }

    #[test]
    fn params_validation() {
        let cat = torus_catalog(1.5, 1.0);
        assert!(ModelParams::new(cat.clone(), 0.5, 1.0, 1, Limits::default()).is_ok());
        assert!(ModelParams::new(cat.clone(), 1.5, 1.0, 1, Limits::default()).is_err());
        assert!(ModelParams::new(cat.clone(), 0.0, 1.0, 1, Limits::default()).is_err());
        assert!(ModelParams::new(cat, 0.5, -0.1, 1, Limits::default()).is_err());
    }
}
