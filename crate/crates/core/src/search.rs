//! Seeded random instances and fixture searches. Every search is driven by a
//! `ChaCha8Rng` seeded from a `u64` and reports the attempt that hit, so a
//! fixture can be regenerated from its seed alone.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibers::{quad_generation_check, PointConfiguration, QuadGenCertificate};
use crate::lattice::{LatticeVector, OrderedList, SignVector, SignedPoint};
use crate::polytope::{
    build_anti_blocking, build_unconditional, idp_check, validate_locally_anti_blocking,
    AntiBlockingPolytope, IdpReport,
};
use crate::stable_sets::{nonisomorphic_graphs, stable_set_polytope, Graph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` random generators in `{0..=max_coord}^n`, patched so that every
/// coordinate direction is reached.
pub fn random_generators(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_coord: i64,
    count: usize,
) -> Vec<LatticeVector> {
    let mut gens: Vec<Vec<i64>> = (0..count.max(1))
        .map(|_| (0..n).map(|_| rng.gen_range(0..=max_coord)).collect())
        .collect();
    for k in 0..n {
        if gens.iter().all(|g| g[k] == 0) {
            let i = rng.gen_range(0..gens.len());
            gens[i][k] = rng.gen_range(1..=max_coord.max(1));
        }
    }
    gens.into_iter().map(LatticeVector::from).collect()
}

/// A random anti-blocking polytope with dimension in `dims` and generator
/// coordinates at most `max_coord`.
pub fn random_anti_blocking(
    rng: &mut ChaCha8Rng,
    dims: std::ops::RangeInclusive<usize>,
    max_coord: i64,
    max_generators: usize,
) -> Result<AntiBlockingPolytope> {
    let n = rng.gen_range(dims);
    let count = rng.gen_range(1..=max_generators.max(1));
    build_anti_blocking(&random_generators(rng, n, max_coord, count))
}

/// A random anti-blocking polytope with at most `max_points` lattice
/// points, redrawing until one fits.
pub fn random_configuration(
    rng: &mut ChaCha8Rng,
    dims: std::ops::RangeInclusive<usize>,
    max_coord: i64,
    max_points: usize,
) -> Result<AntiBlockingPolytope> {
    for _ in 0..10_000 {
        let p = random_anti_blocking(rng, dims.clone(), max_coord, 4)?;
        if p.lattice_points().len() <= max_points {
            return Ok(p);
        }
    }
    Err(Error::BudgetExceeded {
        what: "random draws",
        limit: 10_000,
    })
}

/// A random ordered list of `r` entries over `A^±` with nonnegative `ω`,
/// drawn by rejection with a bias towards positive signs.
pub fn random_ordered_list(
    rng: &mut ChaCha8Rng,
    base: &[LatticeVector],
    r: usize,
) -> Result<OrderedList> {
    let n = base.first().ok_or(Error::Empty("base points"))?.dim();
    for _ in 0..100_000 {
        let entries: Vec<SignedPoint> = (0..r)
            .map(|_| {
                let a = base[rng.gen_range(0..base.len())].clone();
                let s = SignVector::new(
                    (0..n)
                        .map(|_| if rng.gen_bool(0.7) { 1 } else { -1 })
                        .collect(),
                )
                .expect("signs are ±1");
                SignedPoint::new(a, s).expect("base points are nonnegative")
            })
            .collect();
        let l = OrderedList::new(entries)?;
        if crate::transfer::omega(&l).is_nonnegative() {
            return Ok(l);
        }
    }
    Err(Error::BudgetExceeded {
        what: "list draws",
        limit: 100_000,
    })
}

/// The hit of a seeded search: the seed, the 0-based attempt at which the
/// hit occurred, and what was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit<T> {
    pub seed: u64,
    pub attempt: usize,
    pub found: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonIdpFixture {
    pub generators: Vec<LatticeVector>,
    pub base: IdpReport,
    pub unconditional: IdpReport,
}

/// Draws anti-blocking polytopes until one fails the IDP check up to
/// `t_max`; the reflection is checked alongside.
pub fn find_non_idp(
    seed: u64,
    dims: std::ops::RangeInclusive<usize>,
    max_coord: i64,
    attempts: usize,
    t_max: u32,
) -> Result<Option<SearchHit<NonIdpFixture>>> {
    let mut r = rng(seed);
    for attempt in 0..attempts {
        let p = random_anti_blocking(&mut r, dims.clone(), max_coord, 4)?;
        let base = idp_check(p.lattice_points(), p.hrep(), t_max)?;
        if !base.is_idp() {
            let pm = build_unconditional(&p)?;
            let unconditional = idp_check(pm.lattice_points(), pm.hrep(), t_max)?;
            return Ok(Some(SearchHit {
                seed,
                attempt,
                found: NonIdpFixture {
                    generators: p.generators().to_vec(),
                    base,
                    unconditional,
                },
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonQuadraticGraph {
    pub graph: Graph,
    pub certificate: QuadGenCertificate,
}

/// The first graph, in the order of [`nonisomorphic_graphs`], whose stable
/// set ideal fails the quadratic-generation check up to `d_max`.
pub fn find_non_quadratic_graph(
    max_n: usize,
    d_max: usize,
) -> Result<Option<(usize, NonQuadraticGraph)>> {
    for (i, g) in nonisomorphic_graphs(max_n).into_iter().enumerate() {
        let a = PointConfiguration::from_anti_blocking(&stable_set_polytope(&g)?)?;
        let certificate = quad_generation_check(&a, d_max)?;
        if !certificate.is_quadratic() {
            return Ok(Some((
                i,
                NonQuadraticGraph {
                    graph: g,
                    certificate,
                },
            )));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonConvexPieces {
    pub generators: BTreeMap<SignVector, Vec<LatticeVector>>,
    pub witness: LatticeVector,
}

/// Random planar orthant pieces that agree on the axes, drawn until their
/// union fails the convexity check.
pub fn find_non_convex_pieces(
    seed: u64,
    max_coord: i64,
    attempts: usize,
) -> Result<Option<SearchHit<NonConvexPieces>>> {
    let mut r = rng(seed);
    for attempt in 0..attempts {
        let mut extent = [[0i64; 2]; 2];
        for row in &mut extent {
            for e in row.iter_mut() {
                *e = r.gen_range(1..=max_coord);
            }
        }
        let mut generators = BTreeMap::new();
        for e in SignVector::all(2) {
            let side = |k: usize| usize::from(e.get(k) < 0);
            let (x, y) = (extent[0][side(0)], extent[1][side(1)]);
            let mut gens = vec![LatticeVector::from([x, 0]), LatticeVector::from([0, y])];
            for _ in 0..r.gen_range(0..=2) {
                gens.push(LatticeVector::from([
                    r.gen_range(1..=x),
                    r.gen_range(1..=y),
                ]));
            }
            generators.insert(e, gens);
        }
        let pieces = generators
            .iter()
            .map(|(e, g)| build_anti_blocking(g).map(|p| (e.clone(), p)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        match validate_locally_anti_blocking(pieces) {
            Err(Error::NotConvex(witness)) => {
                return Ok(Some(SearchHit {
                    seed,
                    attempt,
                    found: NonConvexPieces {
                        generators,
                        witness,
                    },
                }))
            }
            Err(Error::InvalidPieces(_)) | Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}
