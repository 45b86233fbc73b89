//! Randomized invariants over the geometry, combinatorics and assembly
//! layers.

use proptest::prelude::*;
use std::f64::consts::PI;

use leelab::fock::{enumerate_sector, raise_element, sector_dimension, Limits, ModelParams};
use leelab::manifold::{build_catalog, heat_kernel_diag, torus_image_sum, ManifoldSpec};
use leelab::principal::{assemble_phi, k_sum};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The two heat-kernel routes agree on arbitrary rectangular tori.
    #[test]
    fn torus_heat_kernel_routes_agree(
        l1 in 2.0f64..10.0,
        l2 in 2.0f64..10.0,
        t in 0.05f64..5.0,
    ) {
        let spec = ManifoldSpec::torus(l1, l2);
        let spectral = heat_kernel_diag(&spec, t).unwrap();
        let image = torus_image_sum(&spec, t).unwrap();
        prop_assert!((spectral - image).abs() <= 1e-10 * spectral);
    }

    /// Orthonormality seen through the impurity: each degenerate level's
    /// f² values add up to degeneracy over volume, wherever the impurity
    /// sits.
    #[test]
    fn level_sums_match_degeneracy(
        polar in 0.0f64..PI,
        azimuth in 0.0f64..(2.0 * PI),
        radius in 0.5f64..3.0,
    ) {
        let spec = ManifoldSpec::Sphere {
            radius,
            impurity_polar: polar,
            impurity_azimuth: azimuth,
        };
        let catalog = build_catalog(&spec, 12.0 / (radius * radius), 1.0, false, 100_000).unwrap();
        let volume = catalog.volume;
        let mut by_level: std::collections::BTreeMap<i64, (f64, usize)> = Default::default();
        for m in &catalog.modes {
            let key = (m.sigma * radius * radius).round() as i64;
            let e = by_level.entry(key).or_insert((0.0, 0));
            e.0 += m.f_at_impurity * m.f_at_impurity;
            e.1 += 1;
        }
        for (_, (sum, deg)) in by_level {
            prop_assert!((sum - deg as f64 / volume).abs() <= 1e-10 * (deg as f64 / volume));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Stars-and-bars dimensions and closure of the raising map between
    /// adjacent sectors.
    #[test]
    fn sector_enumeration_is_complete(cutoff in 0.5f64..2.2, n in 0usize..4) {
        let spec = ManifoldSpec::torus(2.0 * PI, 2.0 * PI);
        let catalog = build_catalog(&spec, cutoff, 1.0, false, 100_000).unwrap();
        let lower = enumerate_sector(&catalog, n, 1_000_000).unwrap();
        prop_assert_eq!(
            lower.dim() as u128,
            sector_dimension(catalog.len(), n).unwrap()
        );
        let upper = enumerate_sector(&catalog, n + 1, 1_000_000).unwrap();
        let mut reached = std::collections::HashSet::new();
        for occ in &lower.occupations {
            for mode in 0..catalog.len() {
                let (amp, raised) = raise_element(occ, mode, &catalog);
                prop_assert!(amp > 0.0);
                prop_assert!(upper.index_of(&raised.counts).is_some());
                reached.insert(raised.counts);
            }
        }
        prop_assert_eq!(reached.len(), upper.dim());
    }

    /// Φ(E) stays symmetric and its diagonal strictly decreasing in E for
    /// arbitrary couplings below the threshold.
    #[test]
    fn phi_symmetric_with_decreasing_diagonal(
        lambda in 0.0f64..2.5,
        e1 in -3.0f64..1.2,
        de in 0.01f64..1.0,
    ) {
        let spec = ManifoldSpec::torus(2.0 * PI, 2.0 * PI);
        let catalog = build_catalog(&spec, 1.5, 1.0, false, 100_000).unwrap();
        let params = ModelParams::new(catalog, 0.5, lambda, 1, Limits::default()).unwrap();
        let sector = enumerate_sector(&params.catalog, 1, 100_000).unwrap();
        let e2 = (e1 + de).min(1.45);
        let a = assemble_phi(&params, &sector, e1).unwrap().matrix;
        let b = assemble_phi(&params, &sector, e2).unwrap().matrix;
        let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for i in 0..a.nrows() {
            for j in 0..i {
                prop_assert!((a[(i, j)] - a[(j, i)]).abs() <= 1e-12 * scale);
            }
            prop_assert!(b[(i, i)] < a[(i, i)]);
        }
    }

    /// The renormalization sum is positive and shrinks when the free energy
    /// grows.
    #[test]
    fn k_sum_positive_and_decreasing_in_h0(
        lambda in 0.01f64..2.0,
        e in -3.0f64..0.4,
        h0 in 0.0f64..4.0,
        dh in 0.1f64..2.0,
    ) {
        let spec = ManifoldSpec::torus(2.0 * PI, 2.0 * PI);
        let catalog = build_catalog(&spec, 2.5, 1.0, false, 100_000).unwrap();
        let params = ModelParams::new(catalog, 0.5, lambda, 0, Limits::default()).unwrap();
        let low = k_sum(&params, e, h0).unwrap();
        let high = k_sum(&params, e, h0 + dh).unwrap();
        prop_assert!(low > 0.0);
        prop_assert!(high > 0.0);
        prop_assert!(high < low);
    }
}
