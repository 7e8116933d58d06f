//! Anti-blocking, unconditional and locally anti-blocking lattice polytopes,
//! lattice points of their dilates, and the integer decomposition property.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{small_contains, HRepresentation, Inequality};
use crate::lattice::{canonical_sign, reflect, LatticeVector, SignVector};

/// Largest number of integer points a dilation scan will visit.
pub const SCAN_LIMIT: u64 = 1 << 26;

#[derive(Clone, Debug)]
pub struct AntiBlockingPolytope {
    dim: usize,
    generators: Vec<LatticeVector>,
    lattice_points: Vec<LatticeVector>,
    hrep: HRepresentation,
}

impl AntiBlockingPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    /// `A = P ∩ Z^n`, sorted lexicographically.
    pub fn lattice_points(&self) -> &[LatticeVector] {
        &self.lattice_points
    }

    pub fn hrep(&self) -> &HRepresentation {
        &self.hrep
    }

    pub fn contains_lattice_point(&self, x: &LatticeVector) -> bool {
        self.lattice_points.binary_search(x).is_ok()
    }

    pub fn summary(&self) -> PolytopeSummary {
        PolytopeSummary::new(self.dim, &self.lattice_points, &self.hrep)
    }
}

/// Builds the anti-blocking hull of `generators`: every point lying
/// componentwise between the origin and a point of their convex hull.
pub fn build_anti_blocking(generators: &[LatticeVector]) -> Result<AntiBlockingPolytope> {
    let first = generators.first().ok_or(Error::Empty("generator set"))?;
    let dim = first.dim();
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        if !g.is_nonnegative() {
            return Err(Error::NegativeCoordinate(g.clone()));
        }
    }
    let missing: Vec<usize> = (0..dim)
        .filter(|&k| generators.iter().all(|g| g.coords()[k].is_zero()))
        .collect();
    if !missing.is_empty() || dim == 0 {
        return Err(Error::NotFullDimensional { missing });
    }
    if dim > 16 {
        return Err(Error::TooLarge(format!("dimension {dim}")));
    }
    let generators: Vec<LatticeVector> = generators
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // conv of the coordinate projections of the generators is the anti-blocking hull
    let mut candidates = BTreeSet::new();
    for g in &generators {
        for mask in 0u64..1 << dim {
            let coords = g
                .coords()
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    if mask >> k & 1 == 1 {
                        BigInt::zero()
                    } else {
                        c.clone()
                    }
                })
                .collect();
            candidates.insert(LatticeVector::new(coords));
        }
    }
    let candidates: Vec<LatticeVector> = candidates.into_iter().collect();
    let hrep = HRepresentation::hull(&candidates)?;
    for h in hrep.inequalities() {
        let negatives: Vec<usize> = (0..dim)
            .filter(|&k| h.normal().coords()[k].is_negative())
            .collect();
        let is_coordinate_facet = negatives.len() == 1
            && h.offset().is_zero()
            && h.normal().coords().iter().filter(|c| !c.is_zero()).count() == 1;
        if !negatives.is_empty() && !is_coordinate_facet {
            return Err(Error::Invariant(format!(
                "facet {:?} <= {} of an anti-blocking hull has a mixed-sign normal",
                h.normal().to_string(),
                h.offset()
            )));
        }
    }
    let lattice_points = dilate_lattice_points(&hrep, 1)?;
    let polytope = AntiBlockingPolytope {
        dim,
        generators,
        lattice_points,
        hrep,
    };
    check_anti_blocking(&polytope)?;
    Ok(polytope)
}

fn check_anti_blocking(p: &AntiBlockingPolytope) -> Result<()> {
    let set: BTreeSet<&LatticeVector> = p.lattice_points.iter().collect();
    if !set.contains(&LatticeVector::zeros(p.dim)) {
        return Err(Error::Invariant(
            "origin missing from an anti-blocking polytope".into(),
        ));
    }
    for x in &p.lattice_points {
        for k in 0..p.dim {
            if x.coords()[k].is_positive() {
                let mut y = x.clone();
                y.add_unit(k, -1);
                if !set.contains(&y) {
                    return Err(Error::Invariant(format!(
                        "lattice points not down-closed at {x}"
                    )));
                }
            }
        }
    }
    for g in &p.generators {
        if !p.hrep.contains_dilated(g, 1) {
            return Err(Error::Invariant(format!(
                "generator {g} violates the H-representation"
            )));
        }
    }
    Ok(())
}

/// The reflection `P^±` of an anti-blocking polytope through every
/// coordinate hyperplane.
#[derive(Clone, Debug)]
pub struct UnconditionalPolytope {
    base: AntiBlockingPolytope,
    lattice_points: Vec<LatticeVector>,
    hrep: HRepresentation,
}

impl UnconditionalPolytope {
    pub fn base(&self) -> &AntiBlockingPolytope {
        &self.base
    }

    pub fn lattice_points(&self) -> &[LatticeVector] {
        &self.lattice_points
    }

    pub fn hrep(&self) -> &HRepresentation {
        &self.hrep
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn summary(&self) -> PolytopeSummary {
        PolytopeSummary::new(self.dim(), &self.lattice_points, &self.hrep)
    }
}

pub fn build_unconditional(p: &AntiBlockingPolytope) -> Result<UnconditionalPolytope> {
    let n = p.dim;
    let lattice_points = reflect_all(&p.lattice_points, n);
    // the facets x_k >= 0 disappear; every other facet has a nonnegative normal
    let mut rows = Vec::new();
    for h in p.hrep.inequalities() {
        if h.normal().is_nonnegative() {
            if !h.offset().is_positive() {
                return Err(Error::Invariant("origin is not interior to P^±".into()));
            }
            rows.extend(SignVector::all(n).map(|e| h.reflected(&e)));
        }
    }
    let upper = p.hrep.upper().to_vec();
    let lower = upper.iter().map(|q| -q).collect();
    let hrep = HRepresentation::from_parts(n, rows, lower, upper);
    Ok(UnconditionalPolytope {
        base: p.clone(),
        lattice_points,
        hrep,
    })
}

/// `{ e·a : a in points, e in {-1,1}^n }`, deduplicated and sorted.
pub fn reflect_all(points: &[LatticeVector], n: usize) -> Vec<LatticeVector> {
    let mut out = BTreeSet::new();
    for a in points {
        for e in SignVector::all(n) {
            out.insert(reflect(a, &e).expect("uniform dimension"));
        }
    }
    out.into_iter().collect()
}

pub fn contains(h: &HRepresentation, x: &[BigRational]) -> Result<bool> {
    h.contains(x)
}

/// All lattice points of the `t`-th dilate, sorted lexicographically.
pub fn dilate_lattice_points(h: &HRepresentation, t: u32) -> Result<Vec<LatticeVector>> {
    let (lo, hi) = h.dilated_box(t);
    if lo.iter().zip(&hi).any(|(l, u)| l > u) {
        return Ok(Vec::new());
    }
    lo.iter()
        .zip(&hi)
        .try_fold(1u64, |acc, (l, u)| acc.checked_mul((u - l + 1) as u64))
        .filter(|c| *c <= SCAN_LIMIT)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "dilate {t} spans more than {SCAN_LIMIT} box points"
            ))
        })?;
    let rows = h.small_rows();
    let n = h.dim();
    let first: Vec<i64> = (lo[0]..=hi[0]).collect();
    let chunks: Vec<Vec<LatticeVector>> = first
        .par_iter()
        .map(|&x0| {
            let mut found = Vec::new();
            let mut x = lo.clone();
            x[0] = x0;
            loop {
                let inside = rows
                    .as_ref()
                    .and_then(|r| small_contains(r, &x, t as i64))
                    .unwrap_or_else(|| h.contains_dilated(&LatticeVector::from(x.clone()), t));
                if inside {
                    found.push(LatticeVector::from(x.clone()));
                }
                // odometer over coordinates 1..n
                let mut k = n;
                loop {
                    if k == 1 {
                        return found;
                    }
                    k -= 1;
                    if x[k] < hi[k] {
                        x[k] += 1;
                        break;
                    }
                    x[k] = lo[k];
                }
            }
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdpFailure {
    pub t: u32,
    pub point: LatticeVector,
}

/// Outcome of a bounded IDP check: `certified_up_to` is the largest `t`
/// through which every dilate decomposed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdpReport {
    pub certified_up_to: u32,
    pub failures: Vec<IdpFailure>,
}

impl IdpReport {
    pub fn is_idp(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Dense or hashed set of points inside a fixed integer box.
pub(crate) struct BoxIndex {
    lo: Vec<i64>,
    strides: Vec<u64>,
    size: u64,
}

impl BoxIndex {
    pub(crate) fn new(lo: Vec<i64>, hi: &[i64]) -> Option<Self> {
        let n = lo.len();
        let mut strides = vec![0u64; n];
        let mut size = 1u64;
        for k in (0..n).rev() {
            strides[k] = size;
            size = size.checked_mul((hi[k] - lo[k] + 1).max(1) as u64)?;
        }
        Some(Self { lo, strides, size })
    }

    pub(crate) fn key(&self, x: &[i64]) -> u64 {
        x.iter()
            .zip(&self.lo)
            .zip(&self.strides)
            .map(|((xi, li), s)| (xi - li) as u64 * s)
            .sum()
    }
}

enum PointSet {
    Dense(Vec<u64>),
    Sparse(std::collections::HashSet<u64>),
}

impl PointSet {
    fn new(size: u64) -> Self {
        if size <= SCAN_LIMIT {
            PointSet::Dense(vec![0; (size as usize).div_ceil(64)])
        } else {
            PointSet::Sparse(Default::default())
        }
    }
    fn insert(&mut self, k: u64) {
        match self {
            PointSet::Dense(b) => b[(k / 64) as usize] |= 1 << (k % 64),
            PointSet::Sparse(s) => {
                s.insert(k);
            }
        }
    }
    fn contains(&self, k: u64) -> bool {
        match self {
            PointSet::Dense(b) => b[(k / 64) as usize] >> (k % 64) & 1 == 1,
            PointSet::Sparse(s) => s.contains(&k),
        }
    }
}

fn to_small(points: &[LatticeVector]) -> Result<Vec<Vec<i64>>> {
    points
        .iter()
        .map(|p| {
            p.to_i64s()
                .filter(|v| v.iter().all(|c| c.unsigned_abs() < 1 << 30))
                .ok_or_else(|| Error::TooLarge(format!("coordinates of {p}")))
        })
        .collect()
}

/// Checks, for every `t` in `2..=t_max`, that each lattice point of `tP` is a
/// sum of `t` points of `lattice_points`. The sums are built bottom-up as the
/// iterated sumsets `S_t = S_{t-1} + A`.
pub fn idp_check(
    lattice_points: &[LatticeVector],
    h: &HRepresentation,
    t_max: u32,
) -> Result<IdpReport> {
    let n = h.dim();
    if lattice_points.is_empty() {
        return Err(Error::Empty("lattice point set"));
    }
    let pts = to_small(lattice_points)?;
    let (lo1, hi1) = h.dilated_box(1);
    let (lot, hit) = h.dilated_box(t_max.max(1));
    let lo: Vec<i64> = (0..n).map(|k| lo1[k].min(lot[k]).min(0)).collect();
    let hi: Vec<i64> = (0..n).map(|k| hi1[k].max(hit[k]).max(0)).collect();
    let index = BoxIndex::new(lo, &hi).ok_or_else(|| Error::TooLarge("dilation box".into()))?;

    let mut current: Vec<Vec<i64>> = pts.clone();
    let mut failures = Vec::new();
    let mut certified_up_to = t_max.min(1);
    let mut broken = false;
    for t in 2..=t_max {
        let mut next = PointSet::new(index.size);
        let mut next_pts = Vec::new();
        for s in &current {
            for a in &pts {
                let x: Vec<i64> = s.iter().zip(a).map(|(u, v)| u + v).collect();
                let k = index.key(&x);
                if !next.contains(k) {
                    next.insert(k);
                    next_pts.push(x);
                }
            }
        }
        let targets = dilate_lattice_points(h, t)?;
        let mut failed_here = false;
        for x in targets {
            let xs = x.to_i64s().expect("box coordinates fit");
            if !next.contains(index.key(&xs)) {
                failures.push(IdpFailure { t, point: x });
                failed_here = true;
            }
        }
        if failed_here {
            broken = true;
        }
        if !broken {
            certified_up_to = t;
        }
        current = next_pts;
    }
    Ok(IdpReport {
        certified_up_to,
        failures,
    })
}

/// Memoized top-down search for `x = x_1 + ... + x_t` with `x_i` in `points`,
/// trying first summands in order of decreasing coordinate sum.
pub fn find_decomposition(
    points: &[LatticeVector],
    x: &LatticeVector,
    t: u32,
) -> Option<Vec<LatticeVector>> {
    let mut order: Vec<&LatticeVector> = points.iter().collect();
    order.sort_by(|a, b| {
        let sa: BigInt = a.coords().iter().sum();
        let sb: BigInt = b.coords().iter().sum();
        sb.cmp(&sa).then_with(|| a.cmp(b))
    });
    let members: BTreeSet<&LatticeVector> = points.iter().collect();
    let mut memo: HashMap<(u32, LatticeVector), bool> = HashMap::new();

    fn go(
        x: &LatticeVector,
        t: u32,
        order: &[&LatticeVector],
        members: &BTreeSet<&LatticeVector>,
        memo: &mut HashMap<(u32, LatticeVector), bool>,
        out: &mut Vec<LatticeVector>,
    ) -> bool {
        if t == 1 {
            if members.contains(x) {
                out.push(x.clone());
                return true;
            }
            return false;
        }
        if memo.get(&(t, x.clone())) == Some(&false) {
            return false;
        }
        for p in order {
            let rest = x.sub(p).expect("uniform dimension");
            out.push((*p).clone());
            if go(&rest, t - 1, order, members, memo, out) {
                return true;
            }
            out.pop();
        }
        memo.insert((t, x.clone()), false);
        false
    }

    if t == 0 {
        return x.is_zero().then(Vec::new);
    }
    let mut out = Vec::new();
    go(x, t, &order, &members, &mut memo, &mut out).then_some(out)
}

/// A polytope whose restriction to each closed orthant is the reflected
/// restriction of an anti-blocking piece.
#[derive(Clone, Debug)]
pub struct LocallyAntiBlockingPolytope {
    dim: usize,
    pieces: BTreeMap<SignVector, AntiBlockingPolytope>,
    lattice_points: Vec<LatticeVector>,
    hull: HRepresentation,
}

impl LocallyAntiBlockingPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &BTreeMap<SignVector, AntiBlockingPolytope> {
        &self.pieces
    }

    pub fn lattice_points(&self) -> &[LatticeVector] {
        &self.lattice_points
    }

    pub fn hrep(&self) -> &HRepresentation {
        &self.hull
    }

    pub fn summary(&self) -> PolytopeSummary {
        PolytopeSummary::new(self.dim, &self.lattice_points, &self.hull)
    }

    /// Lattice membership in `t` times the polytope, decided in the orthant
    /// of `x` by the corresponding piece.
    pub fn contains_dilated(&self, x: &LatticeVector, t: u32) -> bool {
        let e = canonical_sign(x);
        self.pieces[&e].hrep().contains_dilated(&x.abs(), t)
    }

    pub fn contains(&self, x: &LatticeVector) -> bool {
        x.dim() == self.dim && self.contains_dilated(x, 1)
    }

    /// The unconditional polytope `P^±` seen as locally anti-blocking with
    /// every piece equal to `P`.
    pub fn from_unconditional(p: &UnconditionalPolytope) -> Self {
        let n = p.dim();
        Self {
            dim: n,
            pieces: SignVector::all(n).map(|e| (e, p.base().clone())).collect(),
            lattice_points: p.lattice_points().to_vec(),
            hull: p.hrep().clone(),
        }
    }
}

/// Checks the orthant pieces for consistency on shared coordinate hyperplanes
/// and checks convexity of their union on the lattice points of the hull and
/// of its 2-dilate. This is a lattice-level check, not a convexity proof.
pub fn validate_locally_anti_blocking(
    pieces: BTreeMap<SignVector, AntiBlockingPolytope>,
) -> Result<LocallyAntiBlockingPolytope> {
    let n = pieces
        .values()
        .next()
        .map(AntiBlockingPolytope::dim)
        .ok_or(Error::Empty("piece map"))?;
    for (e, p) in &pieces {
        if e.dim() != n || p.dim() != n {
            return Err(Error::InvalidPieces(format!(
                "piece {e} has dimension {} instead of {n}",
                p.dim()
            )));
        }
    }
    if pieces.len() != 1 << n {
        let missing: Vec<String> = SignVector::all(n)
            .filter(|e| !pieces.contains_key(e))
            .map(|e| e.to_string())
            .collect();
        return Err(Error::InvalidPieces(format!(
            "missing orthant pieces {missing:?}"
        )));
    }
    let mut union = BTreeSet::new();
    for (e, p) in &pieces {
        for a in p.lattice_points() {
            union.insert(reflect(a, e)?);
        }
    }
    for u in &union {
        let abs = u.abs();
        for (e, p) in &pieces {
            if e.orthant_contains(u) && !p.contains_lattice_point(&abs) {
                return Err(Error::InvalidPieces(format!(
                    "{u} lies in the piece of another orthant but not in piece {e}"
                )));
            }
        }
    }
    let lattice_points: Vec<LatticeVector> = union.into_iter().collect();
    let hull = HRepresentation::hull(&lattice_points)?;
    let lab = LocallyAntiBlockingPolytope {
        dim: n,
        pieces,
        lattice_points,
        hull,
    };
    for t in 1..=2 {
        for x in dilate_lattice_points(&lab.hull, t)? {
            if !lab.contains_dilated(&x, t) {
                return Err(Error::NotConvex(x));
            }
        }
    }
    Ok(lab)
}

/// Rewrites a decomposition `target = Σ summands` inside a locally
/// anti-blocking polytope until no coordinate carries both signs, moving one
/// unit at a time from a positive entry to a negative one.
pub fn merge_decomposition(
    summands: &[LatticeVector],
    target: &LatticeVector,
    lab: &LocallyAntiBlockingPolytope,
) -> Result<Vec<LatticeVector>> {
    let n = lab.dim();
    if target.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.dim(),
        });
    }
    if !target.is_nonnegative() {
        return Err(Error::NegativeCoordinate(target.clone()));
    }
    let mut sum = LatticeVector::zeros(n);
    for y in summands {
        sum = sum.add(y)?;
        if !lab.contains(y) {
            return Err(Error::LeavesPolytope(y.clone()));
        }
    }
    if &sum != target {
        return Err(Error::Invariant(format!(
            "summands add up to {sum}, not {target}"
        )));
    }
    let mut ys = summands.to_vec();
    loop {
        let step = (0..ys.len()).find_map(|i| {
            (0..ys.len()).find_map(|j| {
                (0..n)
                    .find(|&k| ys[i].coords()[k].is_positive() && ys[j].coords()[k].is_negative())
                    .map(|k| (i, j, k))
            })
        });
        let Some((i, j, k)) = step else {
            return Ok(ys);
        };
        ys[i].add_unit(k, -1);
        ys[j].add_unit(k, 1);
        for idx in [i, j] {
            if !lab.contains(&ys[idx]) {
                return Err(Error::LeavesPolytope(ys[idx].clone()));
            }
        }
    }
}

/// JSON input for an anti-blocking polytope.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntiBlockingInput {
    pub dim: usize,
    pub generators: Vec<LatticeVector>,
}

impl AntiBlockingInput {
    pub fn build(&self) -> Result<AntiBlockingPolytope> {
        if let Some(bad) = self.generators.iter().find(|g| g.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: bad.dim(),
            });
        }
        build_anti_blocking(&self.generators)
    }
}

/// JSON input for a locally anti-blocking polytope, keyed by sign strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocallyAntiBlockingInput {
    pub pieces: BTreeMap<SignVector, AntiBlockingInput>,
}

impl LocallyAntiBlockingInput {
    pub fn build(&self) -> Result<LocallyAntiBlockingPolytope> {
        let pieces = self
            .pieces
            .iter()
            .map(|(e, p)| Ok((e.clone(), p.build()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        validate_locally_anti_blocking(pieces)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolytopeSummary {
    pub dim: usize,
    pub num_lattice_points: usize,
    pub lattice_points: Vec<LatticeVector>,
    pub hrep: Vec<Inequality>,
}

impl PolytopeSummary {
    fn new(dim: usize, points: &[LatticeVector], h: &HRepresentation) -> Self {
        Self {
            dim,
            num_lattice_points: points.len(),
            lattice_points: points.to_vec(),
            hrep: h.inequalities().to_vec(),
        }
    }
}
