//! Toric ideals of point configurations, handled through their fibers: the
//! sets of degree-`r` monomials with a fixed weight. A set of moves generates
//! the ideal up to degree `d` exactly when every fiber of degree at most `d`
//! is connected under those moves.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BinomialMove, LatticeVector, Monomial};
use crate::polytope::{AntiBlockingPolytope, UnconditionalPolytope};

/// A finite set of distinct lattice points, stored in lexicographic order so
/// that index order and monomial order agree.
#[derive(Clone, Debug)]
pub struct PointConfiguration {
    dim: usize,
    points: Vec<LatticeVector>,
    small: Vec<Vec<i64>>,
    index: HashMap<LatticeVector, u32>,
    small_index: HashMap<Vec<i64>, u32>,
    pairs: HashMap<Vec<i64>, Vec<(u32, u32)>>,
    max_abs: i64,
    symmetric: bool,
}

const COORD_LIMIT: i64 = 1 << 20;

impl PointConfiguration {
    pub fn new(points: Vec<LatticeVector>) -> Result<Self> {
        let dim = points
            .first()
            .ok_or(Error::Empty("point configuration"))?
            .dim();
        let mut sorted = points;
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invariant(format!("point {} listed twice", w[0])));
            }
        }
        let mut small = Vec::with_capacity(sorted.len());
        for p in &sorted {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            let s = p
                .to_i64s()
                .filter(|s| s.iter().all(|c| c.abs() < COORD_LIMIT))
                .ok_or_else(|| Error::TooLarge(format!("coordinates of {p}")))?;
            small.push(s);
        }
        if sorted.len() >= u32::MAX as usize {
            return Err(Error::TooLarge("configuration size".into()));
        }
        let index = sorted
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let small_index: HashMap<Vec<i64>, u32> = small
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let mut pairs: HashMap<Vec<i64>, Vec<(u32, u32)>> = HashMap::new();
        for i in 0..small.len() {
            for j in i..small.len() {
                let s: Vec<i64> = small[i].iter().zip(&small[j]).map(|(a, b)| a + b).collect();
                pairs.entry(s).or_default().push((i as u32, j as u32));
            }
        }
        let max_abs = small
            .iter()
            .flatten()
            .map(|c| c.abs())
            .max()
            .unwrap_or(0)
            .max(1);
        let symmetric = small.iter().all(|p| {
            (0..dim).all(|k| {
                let mut q = p.clone();
                q[k] = -q[k];
                small_index.contains_key(&q)
            })
        });
        Ok(Self {
            dim,
            points: sorted,
            small,
            index,
            small_index,
            pairs,
            max_abs,
            symmetric,
        })
    }

    pub fn from_anti_blocking(p: &AntiBlockingPolytope) -> Result<Self> {
        Self::new(p.lattice_points().to_vec())
    }

    pub fn from_unconditional(p: &UnconditionalPolytope) -> Result<Self> {
        Self::new(p.lattice_points().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[LatticeVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &LatticeVector) -> Option<u32> {
        self.index.get(p).copied()
    }

    /// Whether the configuration is closed under every coordinate sign flip.
    pub fn is_sign_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn monomial(&self, idx: &[u32]) -> Monomial {
        Monomial::from_factors_unchecked(
            self.dim,
            idx.iter()
                .map(|&i| self.points[i as usize].clone())
                .collect(),
        )
    }

    /// Sorted factor indices of a monomial over this configuration.
    pub fn indices(&self, m: &Monomial) -> Result<Vec<u32>> {
        let mut out = m
            .factors()
            .iter()
            .map(|f| {
                self.index_of(f)
                    .ok_or_else(|| Error::PointOutsideConfiguration(f.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(out)
    }

    fn sum_small(&self, idx: &[u32]) -> Vec<i64> {
        let mut acc = vec![0i64; self.dim];
        for &i in idx {
            for (a, c) in acc.iter_mut().zip(&self.small[i as usize]) {
                *a += c;
            }
        }
        acc
    }

    /// All degree-2 monomials `{c, d}` with `c + d = s`.
    fn pairs_summing_to(&self, s: &[i64]) -> &[(u32, u32)] {
        self.pairs.get(s).map_or(&[], Vec::as_slice)
    }

    /// Every quadratic move `x_a x_b - x_c x_d` with `a + b = c + d`, in
    /// canonical orientation.
    pub fn all_quadratic_moves(&self) -> Vec<BinomialMove> {
        let mut sums: Vec<&Vec<(u32, u32)>> = self.pairs.values().filter(|v| v.len() > 1).collect();
        sums.sort();
        let mut out = Vec::new();
        for group in sums {
            for x in 0..group.len() {
                for y in x + 1..group.len() {
                    let (a, b) = group[x];
                    let (c, d) = group[y];
                    out.push(
                        BinomialMove::new(self.monomial(&[a, b]), self.monomial(&[c, d]))
                            .expect("equal sums")
                            .canonical(),
                    );
                }
            }
        }
        out.sort();
        out
    }
}

/// Linear, injective packing of the integer box `[-R, R]^n` into `i64`, with
/// the first coordinate most significant so that key order is lex order.
#[derive(Clone, Debug)]
struct Packing {
    strides: Vec<i64>,
    radius: i64,
}

impl Packing {
    fn new(dim: usize, radius: i64) -> Result<Self> {
        let width = 2 * radius + 1;
        let mut strides = vec![0i64; dim];
        let mut s: i64 = 1;
        for k in (0..dim).rev() {
            strides[k] = s;
            s = s.checked_mul(width).ok_or_else(|| {
                Error::TooLarge(format!("packed box of radius {radius} in dimension {dim}"))
            })?;
        }
        Ok(Self { strides, radius })
    }

    fn key(&self, x: &[i64]) -> i64 {
        x.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    fn unpack(&self, mut key: i64) -> Vec<i64> {
        let width = 2 * self.radius + 1;
        let n = self.strides.len();
        let mut out = vec![0i64; n];
        for k in (0..n).rev() {
            let digit = (key + self.radius).rem_euclid(width) - self.radius;
            out[k] = digit;
            key = (key - digit) / width;
        }
        out
    }

    fn cells(&self) -> Option<u64> {
        let width = (2 * self.radius + 1) as u64;
        width.checked_pow(self.strides.len() as u32)
    }

    fn offset(&self) -> i64 {
        self.strides.iter().map(|s| s * self.radius).sum()
    }
}

enum KeySet {
    Dense { bits: Vec<u64>, offset: i64 },
    Sparse(HashSet<i64>),
}

impl KeySet {
    fn new(p: &Packing) -> Self {
        match p.cells() {
            Some(c) if c <= 1 << 30 => KeySet::Dense {
                bits: vec![0; (c as usize).div_ceil(64)],
                offset: p.offset(),
            },
            _ => KeySet::Sparse(HashSet::new()),
        }
    }

    fn insert(&mut self, k: i64) -> bool {
        match self {
            KeySet::Dense { bits, offset } => {
                let i = (k + *offset) as usize;
                let fresh = bits[i / 64] >> (i % 64) & 1 == 0;
                bits[i / 64] |= 1 << (i % 64);
                fresh
            }
            KeySet::Sparse(s) => s.insert(k),
        }
    }

    fn contains(&self, k: i64) -> bool {
        match self {
            KeySet::Dense { bits, offset } => {
                let i = k + *offset;
                i >= 0
                    && (i as usize) < bits.len() * 64
                    && bits[i as usize / 64] >> (i as usize % 64) & 1 == 1
            }
            KeySet::Sparse(s) => s.contains(&k),
        }
    }
}

/// Iterated sumsets `S_0 = {0}, S_k = S_{k-1} + A` of a configuration, in
/// packed form, with the degree-2 decompositions indexed by their sum.
struct Sumsets<'a> {
    config: &'a PointConfiguration,
    packing: Packing,
    keys: Vec<i64>,
    key_index: HashMap<i64, u32>,
    levels: Vec<KeySet>,
    lists: Vec<Vec<i64>>,
    pairs: HashMap<i64, Vec<(u32, u32)>>,
}

impl<'a> Sumsets<'a> {
    fn new(config: &'a PointConfiguration, degree: usize) -> Result<Self> {
        let radius = config
            .max_abs
            .checked_mul(degree.max(2) as i64)
            .ok_or_else(|| Error::TooLarge("degree".into()))?;
        let packing = Packing::new(config.dim, radius)?;
        let keys: Vec<i64> = config.small.iter().map(|p| packing.key(p)).collect();
        let key_index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (*k, i as u32))
            .collect();
        let mut levels = vec![KeySet::new(&packing)];
        levels[0].insert(0);
        let mut lists = vec![vec![0i64]];
        for k in 1..=degree {
            let mut set = KeySet::new(&packing);
            let mut list = Vec::new();
            for s in &lists[k - 1] {
                for a in &keys {
                    if set.insert(s + a) {
                        list.push(s + a);
                    }
                }
            }
            list.sort_unstable();
            levels.push(set);
            lists.push(list);
        }
        let mut pairs: HashMap<i64, Vec<(u32, u32)>> = HashMap::new();
        for i in 0..keys.len() {
            for j in i..keys.len() {
                pairs
                    .entry(keys[i] + keys[j])
                    .or_default()
                    .push((i as u32, j as u32));
            }
        }
        Ok(Self {
            config,
            packing,
            keys,
            key_index,
            levels,
            lists,
            pairs,
        })
    }

    fn targets(&self, r: usize, nonnegative_only: bool) -> Vec<i64> {
        self.lists[r]
            .iter()
            .copied()
            .filter(|&k| !nonnegative_only || self.packing.unpack(k).iter().all(|c| *c >= 0))
            .collect()
    }

    /// Shared-factor connectivity of a fiber, decided on the points that
    /// occur in it: `p` occurs iff `b - p ∈ S_{r-1}`, and `p ≠ q` occur
    /// together iff `b - p - q ∈ S_{r-2}`.
    fn shares_factors_connected(&self, r: usize, b: i64) -> bool {
        let occurring: Vec<usize> = (0..self.keys.len())
            .filter(|&i| self.levels[r - 1].contains(b - self.keys[i]))
            .collect();
        if occurring.len() <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(occurring.len());
        let mut parts = occurring.len();
        for x in 0..occurring.len() {
            for y in x + 1..occurring.len() {
                if uf.find(x) == uf.find(y) {
                    continue;
                }
                let rest = b - self.keys[occurring[x]] - self.keys[occurring[y]];
                if self.levels[r - 2].contains(rest) {
                    uf.union(x, y);
                    parts -= 1;
                    if parts == 1 {
                        return true;
                    }
                }
            }
        }
        parts == 1
    }

    /// All sorted index tuples of length `r` summing to `b`, lexicographically.
    fn enumerate(&self, r: usize, b: i64) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(r);
        self.enumerate_rec(0, b, r, &mut prefix, &mut out);
        out
    }

    fn enumerate_rec(
        &self,
        start: u32,
        rem: i64,
        depth: usize,
        prefix: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        match depth {
            0 => {
                if rem == 0 {
                    out.push(prefix.clone());
                }
            }
            1 => {
                if let Some(&j) = self.key_index.get(&rem) {
                    if j >= start {
                        let mut e = prefix.clone();
                        e.push(j);
                        out.push(e);
                    }
                }
            }
            2 => {
                if let Some(list) = self.pairs.get(&rem) {
                    for &(i, j) in list {
                        if i >= start {
                            let mut e = prefix.clone();
                            e.push(i);
                            e.push(j);
                            out.push(e);
                        }
                    }
                }
            }
            _ => {
                for i in start..self.keys.len() as u32 {
                    let next = rem - self.keys[i as usize];
                    if self.levels[depth - 1].contains(next) {
                        prefix.push(i);
                        self.enumerate_rec(i, next, depth - 1, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
    }

    fn fiber(&self, r: usize, b: i64) -> Fiber<'a> {
        let target = LatticeVector::from(self.packing.unpack(b));
        Fiber::new(self.config, r, target, self.enumerate(r, b))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// All degree-`r` monomials over a configuration with weight `target`,
/// stored as sorted index tuples in lexicographic order.
#[derive(Clone, Debug)]
pub struct Fiber<'a> {
    config: &'a PointConfiguration,
    degree: usize,
    target: LatticeVector,
    elements: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl<'a> Fiber<'a> {
    fn new(
        config: &'a PointConfiguration,
        degree: usize,
        target: LatticeVector,
        elements: Vec<Vec<u32>>,
    ) -> Self {
        let lookup = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let f = Self {
            config,
            degree,
            target,
            elements,
            lookup,
        };
        debug_assert!(f
            .elements
            .iter()
            .all(|e| e.len() == degree && LatticeVector::from(config.sum_small(e)) == f.target));
        f
    }

    pub fn config(&self) -> &PointConfiguration {
        self.config
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn target(&self) -> &LatticeVector {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element_indices(&self) -> &[Vec<u32>] {
        &self.elements
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.elements
            .iter()
            .map(|e| self.config.monomial(e))
            .collect()
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        let idx = self.config.indices(m).ok()?;
        self.lookup.get(&idx).copied()
    }

    /// Elements reachable from element `i` by one quadratic move.
    fn quadratic_neighbors(&self, i: usize) -> Vec<usize> {
        let u = &self.elements[i];
        let mut out = BTreeSet::new();
        for p in 0..u.len() {
            if p > 0 && u[p] == u[p - 1] && p >= 2 && u[p - 1] == u[p - 2] {
                continue;
            }
            for q in p + 1..u.len() {
                if q > p + 1 && u[q] == u[q - 1] {
                    continue;
                }
                let s = self.config.sum_small(&[u[p], u[q]]);
                for &(c, d) in self.config.pairs_summing_to(&s) {
                    let mut v: Vec<u32> = u
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != p && *k != q)
                        .map(|(_, x)| *x)
                        .collect();
                    v.push(c);
                    v.push(d);
                    v.sort_unstable();
                    if let Some(&j) = self.lookup.get(&v) {
                        if j != i {
                            out.insert(j);
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Breadth-first search under quadratic moves from element `root`;
    /// returns the parent of every reached element (the root is its own parent).
    pub fn quadratic_bfs(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.elements.len()];
        parent[root] = Some(root);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for j in self.quadratic_neighbors(i) {
                if parent[j].is_none() {
                    parent[j] = Some(i);
                    queue.push_back(j);
                }
            }
        }
        parent
    }

    /// The element path `root = i_0, …, i_t = target` from a BFS parent table.
    pub fn path_to(parents: &[Option<usize>], target: usize) -> Option<Vec<usize>> {
        let mut path = vec![target];
        let mut cur = target;
        loop {
            let p = parents[cur]?;
            if p == cur {
                break;
            }
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    fn components_by<F>(&self, neighbors: F) -> Vec<Vec<usize>>
    where
        F: Fn(usize) -> Vec<usize>,
    {
        let mut comp = vec![usize::MAX; self.elements.len()];
        let mut parts = Vec::new();
        for s in 0..self.elements.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = parts.len();
            comp[s] = id;
            let mut members = vec![s];
            let mut stack = vec![s];
            while let Some(i) = stack.pop() {
                for j in neighbors(i) {
                    if comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(j);
                        stack.push(j);
                    }
                }
            }
            members.sort_unstable();
            parts.push(members);
        }
        parts
    }

    fn quadratic_components(&self) -> Vec<Vec<usize>> {
        self.components_by(|i| self.quadratic_neighbors(i))
    }
}

/// Degree-`r` fiber of weight `b`.
pub fn enumerate_fiber<'a>(
    config: &'a PointConfiguration,
    r: usize,
    b: &LatticeVector,
) -> Result<Fiber<'a>> {
    if b.dim() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            found: b.dim(),
        });
    }
    let sums = Sumsets::new(config, r.max(2))?;
    let small = b.to_i64s();
    let in_range = small
        .as_ref()
        .is_some_and(|s| s.iter().all(|c| c.abs() <= sums.packing.radius));
    if !in_range {
        return Ok(Fiber::new(config, r, b.clone(), Vec::new()));
    }
    let key = sums.packing.key(&small.expect("checked"));
    if !sums.levels[r].contains(key) {
        return Ok(Fiber::new(config, r, b.clone(), Vec::new()));
    }
    Ok(sums.fiber(r, key))
}

/// Connectivity of a fiber under quadratic moves, with its components as
/// sorted monomial lists ordered by their least element.
pub fn fiber_connected_under_quadratic_moves(f: &Fiber) -> (bool, Vec<Vec<Monomial>>) {
    let parts = f.quadratic_components();
    let comps: Vec<Vec<Monomial>> = parts
        .iter()
        .map(|c| {
            c.iter()
                .map(|&i| f.config.monomial(&f.elements[i]))
                .collect()
        })
        .collect();
    (comps.len() <= 1, comps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedQuadratic,
    Counterexample,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberWitness {
    pub degree: usize,
    pub target: LatticeVector,
    pub components: Vec<Vec<Monomial>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadGenCertificate {
    pub checked_up_to: usize,
    pub verdict: Verdict,
    pub witness: Option<FiberWitness>,
}

impl QuadGenCertificate {
    pub fn is_quadratic(&self) -> bool {
        self.verdict == Verdict::CertifiedQuadratic
    }

    /// Recomputes the witness fiber and confirms it is disconnected under
    /// quadratic moves with the recorded components.
    pub fn recheck(&self, config: &PointConfiguration) -> Result<bool> {
        let Some(w) = &self.witness else {
            return Ok(self.verdict == Verdict::CertifiedQuadratic);
        };
        let f = enumerate_fiber(config, w.degree, &w.target)?;
        let (connected, comps) = fiber_connected_under_quadratic_moves(&f);
        Ok(!connected && comps == w.components)
    }
}

/// Degree-bounded test of quadratic generation. Degrees `3..=d_max` are
/// swept in order; a fiber of degree `r` whose lower-degree fibers are all
/// quadratically connected is itself quadratically connected iff any two of
/// its elements are joined by a chain of elements sharing a factor, which is
/// what is tested per fiber. For sign-symmetric configurations only targets
/// in the nonnegative orthant are visited, since reflecting every factor maps
/// the fiber of `b` onto the fiber of `e·b` and preserves moves.
pub fn quad_generation_check(
    config: &PointConfiguration,
    d_max: usize,
) -> Result<QuadGenCertificate> {
    let sums = Sumsets::new(config, d_max.max(2))?;
    for r in 3..=d_max {
        let targets = sums.targets(r, config.symmetric);
        let bad = targets
            .par_iter()
            .find_first(|&&b| !sums.shares_factors_connected(r, b))
            .copied();
        if let Some(b) = bad {
            let fiber = sums.fiber(r, b);
            let (connected, components) = fiber_connected_under_quadratic_moves(&fiber);
            if connected {
                return Err(Error::Invariant(format!(
                    "fiber of degree {r} at {} is quadratically connected but shares no factors",
                    fiber.target
                )));
            }
            return Ok(QuadGenCertificate {
                checked_up_to: d_max,
                verdict: Verdict::Counterexample,
                witness: Some(FiberWitness {
                    degree: r,
                    target: fiber.target.clone(),
                    components,
                }),
            });
        }
    }
    Ok(QuadGenCertificate {
        checked_up_to: d_max,
        verdict: Verdict::CertifiedQuadratic,
        witness: None,
    })
}

/// A move set indexed by the factor tuples of its sides, both orientations.
struct MoveIndex {
    by_side: HashMap<Vec<u32>, Vec<Vec<u32>>>,
    degrees: BTreeSet<usize>,
}

impl MoveIndex {
    fn new(config: &PointConfiguration, moves: &[BinomialMove]) -> Result<Self> {
        let mut by_side: HashMap<Vec<u32>, BTreeSet<Vec<u32>>> = HashMap::new();
        let mut degrees = BTreeSet::new();
        for mv in moves {
            let l = config.indices(mv.lhs())?;
            let r = config.indices(mv.rhs())?;
            if l == r {
                continue;
            }
            degrees.insert(l.len());
            by_side.entry(l.clone()).or_default().insert(r.clone());
            by_side.entry(r).or_default().insert(l);
        }
        Ok(Self {
            by_side: by_side
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
            degrees,
        })
    }

    /// Whether reflecting every move through any coordinate flip gives a
    /// move of the set again.
    fn sign_symmetric(&self, config: &PointConfiguration) -> bool {
        let flip = |idx: &[u32], k: usize| -> Option<Vec<u32>> {
            let mut out = Vec::with_capacity(idx.len());
            for &i in idx {
                let mut p = config.small[i as usize].clone();
                p[k] = -p[k];
                out.push(*config.small_index.get(&p)?);
            }
            out.sort_unstable();
            Some(out)
        };
        self.by_side.iter().all(|(side, others)| {
            (0..config.dim).all(|k| {
                let Some(fs) = flip(side, k) else {
                    return false;
                };
                let Some(targets) = self.by_side.get(&fs) else {
                    return false;
                };
                others
                    .iter()
                    .all(|o| flip(o, k).is_some_and(|fo| targets.contains(&fo)))
            })
        })
    }

    fn neighbors(&self, f: &Fiber, i: usize) -> Vec<usize> {
        let u = &f.elements[i];
        let r = u.len();
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        for mask in 1u32..1 << r {
            let size = mask.count_ones() as usize;
            if !self.degrees.contains(&size) {
                continue;
            }
            let sub: Vec<u32> = (0..r)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| u[k])
                .collect();
            if !seen.insert(sub.clone()) {
                continue;
            }
            let Some(reps) = self.by_side.get(&sub) else {
                continue;
            };
            let rest: Vec<u32> = {
                let mut rest = Vec::with_capacity(r - size);
                for k in 0..r {
                    if mask >> k & 1 == 0 {
                        rest.push(u[k]);
                    }
                }
                rest
            };
            for rep in reps {
                let mut v = rest.clone();
                v.extend_from_slice(rep);
                v.sort_unstable();
                if let Some(&j) = f.lookup.get(&v) {
                    out.insert(j);
                }
            }
        }
        out.into_iter().collect()
    }
}

/// First fiber (in `(degree, target)` order) that is disconnected under
/// `moves`, if any, among degrees `1..=d_max`.
pub fn first_disconnected_fiber(
    config: &PointConfiguration,
    moves: &[BinomialMove],
    d_max: usize,
) -> Result<Option<FiberWitness>> {
    let index = MoveIndex::new(config, moves)?;
    let symmetric = config.symmetric && index.sign_symmetric(config);
    let sums = Sumsets::new(config, d_max.max(2))?;
    for r in 1..=d_max {
        let targets = sums.targets(r, symmetric);
        let bad = targets
            .par_iter()
            .map(|&b| {
                let fiber = sums.fiber(r, b);
                let parts = fiber.components_by(|i| index.neighbors(&fiber, i));
                (parts.len() > 1).then(|| FiberWitness {
                    degree: r,
                    target: fiber.target.clone(),
                    components: parts
                        .iter()
                        .map(|c| {
                            c.iter()
                                .map(|&i| config.monomial(&fiber.elements[i]))
                                .collect()
                        })
                        .collect(),
                })
            })
            .find_first(Option::is_some)
            .flatten();
        if bad.is_some() {
            return Ok(bad);
        }
    }
    Ok(None)
}

/// Whether `moves` connect every fiber of degree at most `d_max`.
pub fn is_generated_by(
    config: &PointConfiguration,
    moves: &[BinomialMove],
    d_max: usize,
) -> Result<bool> {
    Ok(first_disconnected_fiber(config, moves, d_max)?.is_none())
}

/// Shortest chain of quadratic moves from `u` to `v` inside their fiber.
pub fn shortest_quadratic_path(
    config: &PointConfiguration,
    u: &Monomial,
    v: &Monomial,
) -> Result<Option<Vec<Monomial>>> {
    if u.degree() != v.degree() || u.weight() != v.weight() {
        return Err(Error::Unbalanced(format!(
            "{u} and {v} lie in different fibers"
        )));
    }
    config.indices(u)?;
    config.indices(v)?;
    let f = enumerate_fiber(config, u.degree(), &u.weight())?;
    let (s, t) = (
        f.position(u).expect("in fiber"),
        f.position(v).expect("in fiber"),
    );
    let parents = f.quadratic_bfs(s);
    Ok(Fiber::path_to(&parents, t).map(|p| {
        p.into_iter()
            .map(|i| config.monomial(&f.elements[i]))
            .collect()
    }))
}

/// Number of fibers per degree, used for reporting.
pub fn fiber_counts(config: &PointConfiguration, d_max: usize) -> Result<BTreeMap<usize, usize>> {
    let sums = Sumsets::new(config, d_max.max(2))?;
    Ok((1..=d_max).map(|r| (r, sums.lists[r].len())).collect())
}
