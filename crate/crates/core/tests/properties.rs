use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use unconditional::fibers::{is_generated_by, quad_generation_check, PointConfiguration};
use unconditional::lattice::{reflect, LatticeVector, SignVector};
use unconditional::polytope::{
    build_anti_blocking, build_unconditional, find_decomposition, idp_check, merge_decomposition,
    LocallyAntiBlockingPolytope,
};

fn generators() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0i64..=2, n), 1..=3)
            .prop_filter("every direction reached", move |g| {
                (0..n).all(|k| g.iter().any(|x| x[k] > 0))
            })
    })
}

fn lv(x: &[i64]) -> LatticeVector {
    LatticeVector::from(x)
}

/// Coordinate projections of the generators; the vertices of the polytope lie among them.
fn projections(gens: &[Vec<i64>]) -> Vec<LatticeVector> {
    let n = gens[0].len();
    let mut out = BTreeSet::new();
    for g in gens {
        for mask in 0u32..1 << n {
            let x: Vec<i64> = (0..n)
                .map(|k| if mask >> k & 1 == 1 { g[k] } else { 0 })
                .collect();
            out.insert(lv(&x));
        }
    }
    out.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_points_are_down_closed(gens in generators()) {
        let p = build_anti_blocking(&gens.iter().map(|g| lv(g)).collect::<Vec<_>>()).unwrap();
        let pts: BTreeSet<&LatticeVector> = p.lattice_points().iter().collect();
        for x in p.lattice_points() {
            for k in 0..p.dim() {
                if x.coords()[k] > BigInt::from(0) {
                    let mut y = x.clone();
                    y.add_unit(k, -1);
                    prop_assert!(pts.contains(&y));
                }
            }
        }
        for q in projections(&gens) {
            prop_assert!(pts.contains(&q));
        }
    }

    #[test]
    fn facets_are_supported_by_generator_projections(gens in generators()) {
        let p = build_anti_blocking(&gens.iter().map(|g| lv(g)).collect::<Vec<_>>()).unwrap();
        let candidates = projections(&gens);
        for h in p.hrep().inequalities() {
            let best = candidates.iter().map(|x| h.value(x)).max().unwrap();
            prop_assert_eq!(&best, h.offset());
        }
    }

    #[test]
    fn reflection_has_every_sign_image(gens in generators()) {
        let p = build_anti_blocking(&gens.iter().map(|g| lv(g)).collect::<Vec<_>>()).unwrap();
        let pm = build_unconditional(&p).unwrap();
        let mut expected = BTreeSet::new();
        for x in p.lattice_points() {
            for e in SignVector::all(p.dim()) {
                expected.insert(reflect(x, &e).unwrap());
            }
        }
        let got: BTreeSet<LatticeVector> = pm.lattice_points().iter().cloned().collect();
        prop_assert_eq!(got, expected);
        for x in pm.lattice_points() {
            prop_assert!(p.contains_lattice_point(&x.abs()));
        }
    }

    #[test]
    fn idp_check_matches_decomposition_search(gens in generators()) {
        let p = build_anti_blocking(&gens.iter().map(|g| lv(g)).collect::<Vec<_>>()).unwrap();
        let report = idp_check(p.lattice_points(), p.hrep(), 3).unwrap();
        for t in 1..=3u32 {
            for x in unconditional::polytope::dilate_lattice_points(p.hrep(), t).unwrap() {
                let decomposes = find_decomposition(p.lattice_points(), &x, t).is_some();
                let listed = report.failures.iter().any(|f| f.t == t && f.point == x);
                prop_assert_eq!(decomposes, !listed);
            }
        }
    }

    #[test]
    fn quadratic_check_matches_literal_move_sweep(gens in generators()) {
        let p = build_anti_blocking(&gens.iter().map(|g| lv(g)).collect::<Vec<_>>()).unwrap();
        let a = PointConfiguration::from_anti_blocking(&p).unwrap();
        let cert = quad_generation_check(&a, 3).unwrap();
        let literal = is_generated_by(&a, &a.all_quadratic_moves(), 3).unwrap();
        prop_assert_eq!(cert.is_quadratic(), literal);
    }

    #[test]
    fn merged_decompositions_are_sign_consistent(
        gens in generators(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 2..=3),
    ) {
        let p = build_anti_blocking(&gens.iter().map(|g| lv(g)).collect::<Vec<_>>()).unwrap();
        let pm = build_unconditional(&p).unwrap();
        let lab = LocallyAntiBlockingPolytope::from_unconditional(&pm);
        let summands: Vec<LatticeVector> = picks.iter().map(|i| i.get(pm.lattice_points()).clone()).collect();
        let target = summands.iter().fold(LatticeVector::zeros(p.dim()), |s, x| s.add(x).unwrap());
        prop_assume!(target.is_nonnegative());
        let merged = merge_decomposition(&summands, &target, &lab).unwrap();
        let total = merged.iter().fold(LatticeVector::zeros(p.dim()), |s, x| s.add(x).unwrap());
        prop_assert_eq!(total, target);
        prop_assert_eq!(merged.len(), summands.len());
        for y in &merged {
            prop_assert!(lab.contains(y));
        }
        for k in 0..p.dim() {
            let pos = merged.iter().any(|y| y.coords()[k] > BigInt::from(0));
            let neg = merged.iter().any(|y| y.coords()[k] < BigInt::from(0));
            prop_assert!(!(pos && neg));
        }
    }
}
