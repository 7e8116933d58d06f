//! Graphs, stable set polytopes, replication graphs, and Kempe equivalence of
//! colorings, together with a harness that evaluates quadratic generation of
//! the two stable set ideals against Kempe connectivity of replications.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibers::{quad_generation_check, PointConfiguration, QuadGenCertificate};
use crate::lattice::LatticeVector;
use crate::polytope::{build_anti_blocking, build_unconditional, AntiBlockingPolytope};

const MAX_VERTICES: usize = 64;
const MAX_STABLE_VERTICES: usize = 20;
const MAX_CHROMATIC_VERTICES: usize = 12;
pub const COLORING_LIMIT: usize = 2_000_000;

/// A simple graph on vertices `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    /// Builds a graph from 1-based edges.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::TooLarge(format!("{n} vertices")));
        }
        let mut adj = vec![0u64; n];
        for (i, j) in edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{i}, {j}}} leaves vertex range 1..={n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("loop at vertex {i}")));
            }
            if adj[i - 1] >> (j - 1) & 1 == 1 {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{i}, {j}}}")));
            }
            adj[i - 1] |= 1 << (j - 1);
            adj[j - 1] |= 1 << (i - 1);
        }
        Ok(Self { n, adj })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, []).expect("no edges")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j)))).expect("simple")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i, i + 1))).expect("simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        Self::new(n, (1..=n).map(|i| (i, i % n + 1))).expect("simple")
    }

    pub fn petersen() -> Self {
        let outer = (1..=5).map(|i| (i, i % 5 + 1));
        let spokes = (1..=5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (6 + i, 6 + (i + 2) % 5));
        Self::new(10, outer.chain(spokes).chain(inner)).expect("simple")
    }

    /// Two triangles `1 2 3` and `4 5 6` joined by the matching `i ~ i + 3`.
    pub fn prism() -> Self {
        Self::new(
            6,
            [
                (1, 2),
                (2, 3),
                (1, 3),
                (4, 5),
                (5, 6),
                (4, 6),
                (1, 4),
                (2, 5),
                (3, 6),
            ],
        )
        .expect("simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i <= self.n && j <= self.n && self.adj[i - 1] >> (j - 1) & 1 == 1
    }

    /// Sorted 1-based edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| {
                (i + 1..self.n)
                    .filter(move |&j| self.adj[i] >> j & 1 == 1)
                    .map(move |j| (i + 1, j + 1))
            })
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adj
            .iter()
            .map(|m| m.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Parses an edge list: a header `n m` (or `p edge n m`) followed by `m`
    /// lines `i j` (or `e i j`). Blank lines and lines starting with `c` or
    /// `#` are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('c'));
        let parse_nums = |lineno: usize, l: &str, prefix: &str| -> Result<Vec<usize>> {
            let body = l.strip_prefix(prefix).unwrap_or(l);
            body.split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::Parse(format!(
                            "line {}: expected an integer, found {t:?}",
                            lineno + 1
                        ))
                    })
                })
                .collect()
        };
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let head = parse_nums(hl, header, "p edge")?;
        let [n, m] = head[..] else {
            return Err(Error::Parse(format!(
                "line {}: header must be `n m`",
                hl + 1
            )));
        };
        let mut edges = Vec::with_capacity(m);
        for (ln, l) in lines {
            let nums = parse_nums(ln, l, "e")?;
            let [i, j] = nums[..] else {
                return Err(Error::Parse(format!("line {}: edge must be `i j`", ln + 1)));
            };
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Self::new(n, edges).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut s = format!("{} {}\n", self.n, edges.len());
        for (i, j) in edges {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }

    /// The induced subgraph on a 1-based vertex list, relabeled in list order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut edges = Vec::new();
        for (x, &i) in vertices.iter().enumerate() {
            for (y, &j) in vertices.iter().enumerate().skip(x + 1) {
                if self.has_edge(i, j) {
                    edges.push((x + 1, y + 1));
                }
            }
        }
        Self::new(vertices.len(), edges)
    }

    /// Adjacency bit string minimised over all relabelings; equal for
    /// isomorphic graphs. Exhaustive, so limited to eight vertices.
    pub fn canonical_form(&self) -> Option<u64> {
        if self.n > 8 {
            return None;
        }
        let pairs: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .collect();
        let mut perm: Vec<usize> = (0..self.n).collect();
        let mut best = u64::MAX;
        loop {
            let mut code = 0u64;
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if self.adj[perm[i]] >> perm[j] & 1 == 1 {
                    code |= 1 << b;
                }
            }
            best = best.min(code);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        Some(best)
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len())
        .rev()
        .find(|&j| p[j] > p[i])
        .expect("exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawGraph {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGraph::deserialize(d)?;
        Graph::new(raw.n, raw.edges).map_err(serde::de::Error::custom)
    }
}

/// One representative of every isomorphism class of graphs on `1..=max_n`
/// vertices, ordered by vertex count and then by canonical form.
pub fn nonisomorphic_graphs(max_n: usize) -> Vec<Graph> {
    assert!(
        max_n <= 7,
        "exhaustive enumeration is limited to seven vertices"
    );
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
            .collect();
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        let mut reps = Vec::new();
        for mask in 0u64..1 << pairs.len() {
            let g = Graph::new(
                n,
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, e)| *e),
            )
            .expect("simple");
            let code = g.canonical_form().expect("small");
            if seen.insert(code) {
                reps.push((code, g));
            }
        }
        reps.sort_by_key(|(c, _)| *c);
        out.extend(reps.into_iter().map(|(_, g)| g));
    }
    out
}

/// All stable sets as sorted 1-based vertex lists, in the order of their
/// bitmask.
pub fn stable_sets(g: &Graph) -> Result<Vec<Vec<usize>>> {
    Ok(stable_set_masks(g)?
        .into_iter()
        .map(|m| {
            (0..g.n)
                .filter(|v| m >> v & 1 == 1)
                .map(|v| v + 1)
                .collect()
        })
        .collect())
}

fn stable_set_masks(g: &Graph) -> Result<Vec<u64>> {
    if g.n > MAX_STABLE_VERTICES {
        return Err(Error::TooLarge(format!(
            "{} vertices for stable set enumeration",
            g.n
        )));
    }
    fn grow(g: &Graph, v: usize, set: u64, blocked: u64, out: &mut Vec<u64>) {
        if v == g.n {
            out.push(set);
            return;
        }
        grow(g, v + 1, set, blocked, out);
        if blocked >> v & 1 == 0 {
            grow(g, v + 1, set | 1 << v, blocked | g.adj[v], out);
        }
    }
    let mut out = Vec::new();
    grow(g, 0, 0, 0, &mut out);
    out.sort_unstable();
    Ok(out)
}

/// Indicator vectors `ρ(S)` of all stable sets.
pub fn stable_set_points(g: &Graph) -> Result<Vec<LatticeVector>> {
    let mut pts: Vec<LatticeVector> = stable_set_masks(g)?
        .into_iter()
        .map(|m| LatticeVector::from((0..g.n).map(|v| (m >> v & 1) as i64).collect::<Vec<_>>()))
        .collect();
    pts.sort();
    Ok(pts)
}

/// The stable set polytope `conv{ρ(S)}`.
pub fn stable_set_polytope(g: &Graph) -> Result<AntiBlockingPolytope> {
    if g.n == 0 {
        return Err(Error::Empty("stable set polytope of the null graph"));
    }
    build_anti_blocking(&stable_set_points(g)?)
}

/// Number of copies `a_i` of every vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReplicationVector(Vec<usize>);

impl ReplicationVector {
    pub fn new(a: Vec<usize>) -> Self {
        Self(a)
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// All vectors of length `n` with entry sum at most `budget`, in lex order.
    pub fn all_up_to(n: usize, budget: usize) -> Vec<ReplicationVector> {
        fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<ReplicationVector>) {
            if cur.len() == n {
                out.push(ReplicationVector(cur.clone()));
                return;
            }
            for x in 0..=left {
                cur.push(x);
                rec(n, left - x, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, budget, &mut Vec::new(), &mut out);
        out
    }
}

impl TryFrom<&LatticeVector> for ReplicationVector {
    type Error = Error;

    fn try_from(v: &LatticeVector) -> Result<Self> {
        if !v.is_nonnegative() {
            return Err(Error::NegativeCoordinate(v.clone()));
        }
        v.coords()
            .iter()
            .map(|c| {
                usize::try_from(c).map_err(|_| Error::TooLarge(format!("replication entry {c}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ReplicationVector)
    }
}

/// The replication graph `G_a`: vertex `i` becomes a clique on `a_i`
/// consecutive labels, and blobs of adjacent vertices are completely joined.
pub fn replication(g: &Graph, a: &ReplicationVector) -> Result<Graph> {
    if a.0.len() != g.n {
        return Err(Error::DimensionMismatch {
            expected: g.n,
            found: a.0.len(),
        });
    }
    let mut start = Vec::with_capacity(g.n);
    let mut next = 1;
    for &ai in &a.0 {
        start.push(next);
        next += ai;
    }
    let total = next - 1;
    if total > MAX_VERTICES {
        return Err(Error::TooLarge(format!(
            "replication graph with {total} vertices"
        )));
    }
    let blob = |i: usize| start[i]..start[i] + a.0[i];
    let mut edges = Vec::new();
    for i in 0..g.n {
        for x in blob(i) {
            for y in x + 1..start[i] + a.0[i] {
                edges.push((x, y));
            }
        }
        for j in i + 1..g.n {
            if g.adj[i] >> j & 1 == 1 {
                for x in blob(i) {
                    for y in blob(j) {
                        edges.push((x, y));
                    }
                }
            }
        }
    }
    Graph::new(total, edges)
}

fn colorable(g: &Graph, k: usize) -> bool {
    fn go(
        g: &Graph,
        order: &[usize],
        pos: usize,
        colors: &mut [usize],
        k: usize,
        used: usize,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        // Colors beyond the first unused one are symmetric, so try at most one of them.
        for c in 0..k.min(used + 1) {
            if (0..g.n).all(|u| g.adj[v] >> u & 1 == 0 || colors[u] != c) {
                colors[v] = c;
                if go(g, order, pos + 1, colors, k, used.max(c + 1)) {
                    return true;
                }
                colors[v] = usize::MAX;
            }
        }
        false
    }
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.adj[v].count_ones()));
    let mut colors = vec![usize::MAX; g.n];
    go(g, &order, 0, &mut colors, k, 0)
}

fn clique_number(g: &Graph) -> usize {
    fn grow(g: &Graph, cand: u64, size: usize, best: &mut usize) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        grow(g, cand & g.adj[v], size + 1, best);
        grow(g, cand & !(1 << v), size, best);
    }
    let all = if g.n == 64 {
        u64::MAX
    } else {
        (1u64 << g.n) - 1
    };
    let mut best = 0;
    grow(g, all, 0, &mut best);
    best
}

/// Exact chromatic number; 0 for the null graph.
pub fn chromatic_number(g: &Graph) -> Result<usize> {
    if g.n > MAX_CHROMATIC_VERTICES {
        return Err(Error::TooLarge(format!(
            "{} vertices for exact coloring",
            g.n
        )));
    }
    let mut k = clique_number(g);
    while !colorable(g, k) {
        k += 1;
    }
    Ok(k)
}

/// A proper coloring with colors `1..=k`; `colors[v - 1]` is the color of
/// vertex `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    k: usize,
    colors: Vec<usize>,
}

impl Coloring {
    pub fn new(g: &Graph, k: usize, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != g.n {
            return Err(Error::InvalidColoring(format!(
                "{} colors given for {} vertices",
                colors.len(),
                g.n
            )));
        }
        if let Some(v) = colors.iter().position(|&c| c == 0 || c > k) {
            return Err(Error::InvalidColoring(format!(
                "vertex {} has color {} outside 1..={k}",
                v + 1,
                colors[v]
            )));
        }
        if let Some((i, j)) = g
            .edges()
            .into_iter()
            .find(|&(i, j)| colors[i - 1] == colors[j - 1])
        {
            return Err(Error::InvalidColoring(format!(
                "edge {{{i}, {j}}} is monochromatic"
            )));
        }
        Ok(Self { k, colors })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color_of(&self, v: usize) -> usize {
        self.colors[v - 1]
    }
}

fn two_color_component(adj: &[u64], colors: &[usize], i: usize, j: usize, seed: usize) -> u64 {
    let allowed: u64 = colors
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == i || c == j)
        .fold(0, |m, (v, _)| m | 1 << v);
    let mut comp = 1u64 << seed;
    let mut frontier = comp;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & allowed & !comp;
        comp |= fresh;
        frontier |= fresh;
    }
    comp
}

/// Swaps colors `i` and `j` on the component of `rep` in the subgraph induced
/// by the vertices colored `i` or `j`.
pub fn kempe_switch(g: &Graph, f: &Coloring, i: usize, j: usize, rep: usize) -> Result<Coloring> {
    if f.colors.len() != g.n {
        return Err(Error::InvalidColoring(
            "coloring belongs to another graph".into(),
        ));
    }
    if i == j || i == 0 || j == 0 || i > f.k || j > f.k {
        return Err(Error::InvalidColoring(format!(
            "cannot switch colors {i} and {j} of {}",
            f.k
        )));
    }
    if rep == 0 || rep > g.n {
        return Err(Error::InvalidColoring(format!("vertex {rep} out of range")));
    }
    let c = f.colors[rep - 1];
    if c != i && c != j {
        return Err(Error::NotSwitchable { vertex: rep });
    }
    let comp = two_color_component(&g.adj, &f.colors, i, j, rep - 1);
    let mut colors = f.colors.clone();
    for (v, col) in colors.iter_mut().enumerate() {
        if comp >> v & 1 == 1 {
            *col = if *col == i { j } else { i };
        }
    }
    let out = Coloring { k: f.k, colors };
    debug_assert!(Coloring::new(g, out.k, out.colors.clone()).is_ok());
    Ok(out)
}

/// Rejects `(g, k)` when the coloring space is certainly over `limit` or
/// does not fit the packed representation.
fn check_coloring_space(g: &Graph, k: usize, limit: usize) -> Result<()> {
    if g.n > 16 || k > 16 {
        return Err(Error::TooLarge(format!("{} vertices with {k} colors", g.n)));
    }
    // every vertex has at least k minus its earlier-neighbour count choices
    let lower = (0..g.n).try_fold(1usize, |acc, v| {
        let back = (g.adj[v] & ((1u64 << v) - 1)).count_ones() as usize;
        acc.checked_mul(k.saturating_sub(back))
    });
    if lower.is_none_or(|c| c > limit) {
        return Err(Error::BudgetExceeded {
            what: "colorings",
            limit,
        });
    }
    Ok(())
}

/// Every proper coloring of `g` with colors `0..k`, packed four bits per
/// vertex with vertex 1 most significant, in increasing order.
fn all_colorings(g: &Graph, k: usize, limit: usize) -> Result<Vec<u64>> {
    check_coloring_space(g, k, limit)?;
    fn go(
        g: &Graph,
        v: usize,
        k: usize,
        colors: &mut [usize],
        code: u64,
        out: &mut Vec<u64>,
        limit: usize,
    ) -> bool {
        if v == g.n {
            out.push(code);
            return out.len() <= limit;
        }
        for c in 0..k {
            if (0..v).all(|u| g.adj[v] >> u & 1 == 0 || colors[u] != c) {
                colors[v] = c;
                if !go(g, v + 1, k, colors, code << 4 | c as u64, out, limit) {
                    return false;
                }
            }
        }
        true
    }
    let mut out = Vec::new();
    let mut colors = vec![0; g.n];
    if !go(g, 0, k, &mut colors, 0, &mut out, limit) {
        return Err(Error::BudgetExceeded {
            what: "colorings",
            limit,
        });
    }
    Ok(out)
}

fn unpack(code: u64, n: usize) -> Vec<usize> {
    (0..n)
        .map(|v| (code >> (4 * (n - 1 - v)) & 15) as usize)
        .collect()
}

fn pack(colors: &[usize]) -> u64 {
    colors.iter().fold(0, |acc, &c| acc << 4 | c as u64)
}

/// Size of the coloring state space and its Kempe classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KempeSummary {
    pub k: usize,
    pub colorings: usize,
    pub classes: usize,
    /// Two colorings in different classes, when there is more than one.
    pub witness: Option<(Coloring, Coloring)>,
}

impl KempeSummary {
    pub fn connected(&self) -> bool {
        self.classes <= 1
    }
}

/// Enumerates the proper `k`-colorings of `g` and splits them into Kempe
/// equivalence classes by breadth-first search over switchings.
pub fn kempe_classes(g: &Graph, k: usize, limit: usize) -> Result<KempeSummary> {
    let states = all_colorings(g, k, limit)?;
    if states.is_empty() {
        return Err(Error::NotColorable {
            k,
            chi: chromatic_number(g)?,
        });
    }
    let mut class = vec![u32::MAX; states.len()];
    let mut classes = 0u32;
    let mut second = None;
    for s in 0..states.len() {
        if class[s] != u32::MAX {
            continue;
        }
        if classes == 1 {
            second = Some(s);
        }
        class[s] = classes;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            let colors = unpack(states[x], g.n);
            for i in 0..k {
                for j in i + 1..k {
                    let mut todo: u64 = colors
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c == i || c == j)
                        .fold(0, |m, (v, _)| m | 1 << v);
                    while todo != 0 {
                        let v = todo.trailing_zeros() as usize;
                        let comp = two_color_component(&g.adj, &colors, i, j, v);
                        todo &= !comp;
                        let mut next = colors.clone();
                        for (u, c) in next.iter_mut().enumerate() {
                            if comp >> u & 1 == 1 {
                                *c = if *c == i { j } else { i };
                            }
                        }
                        let y = states.binary_search(&pack(&next)).map_err(|_| {
                            Error::Invariant("Kempe switch produced an improper coloring".into())
                        })?;
                        if class[y] == u32::MAX {
                            class[y] = classes;
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
        classes += 1;
    }
    let to_coloring = |s: usize| Coloring {
        k,
        colors: unpack(states[s], g.n).into_iter().map(|c| c + 1).collect(),
    };
    Ok(KempeSummary {
        k,
        colorings: states.len(),
        classes: classes as usize,
        witness: second.map(|s| (to_coloring(0), to_coloring(s))),
    })
}

/// Whether all `k`-colorings of `g` are Kempe equivalent.
pub fn kempe_equivalent_all(g: &Graph, k: usize) -> Result<bool> {
    if g.n == 0 {
        return Ok(true);
    }
    let chi = chromatic_number(g)?;
    if k < chi {
        return Err(Error::NotColorable { k, chi });
    }
    Ok(kempe_classes(g, k, COLORING_LIMIT)?.connected())
}

/// Memo of `(colorings, classes)` keyed by isomorphism class and color count.
#[derive(Default)]
pub struct KempeCache {
    map: Mutex<HashMap<CacheKey, Option<(usize, usize)>>>,
}

/// `(vertices, canonical form, colors)`.
type CacheKey = (usize, u64, usize);

impl KempeCache {
    pub fn new() -> Self {
        Self::default()
    }

    // `None` records a class whose coloring space is over the limit
    fn classes(&self, g: &Graph, k: usize) -> Result<(usize, usize)> {
        let over = || Error::BudgetExceeded {
            what: "colorings",
            limit: COLORING_LIMIT,
        };
        let key = g.canonical_form().map(|c| (g.n, c, k));
        if let Some(key) = key {
            if let Some(hit) = self.map.lock().expect("not poisoned").get(&key) {
                return hit.ok_or_else(over);
            }
        }
        let found = match kempe_classes(g, k, COLORING_LIMIT) {
            Ok(s) => Some((s.colorings, s.classes)),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        if let Some(key) = key {
            self.map.lock().expect("not poisoned").insert(key, found);
        }
        found.ok_or_else(over)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KempeVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KempeCell {
    pub a: ReplicationVector,
    pub k: usize,
    pub colorings: usize,
    pub classes: usize,
    pub witness: Option<(Coloring, Coloring)>,
}

/// One row of the sweep table: `(a, k)` and the size of its coloring space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KempeRow {
    pub a: ReplicationVector,
    pub k: usize,
    pub colorings: usize,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub a: ReplicationVector,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KempeSweep {
    pub verdict: KempeVerdict,
    pub cells_checked: usize,
    pub table: Vec<KempeRow>,
    pub failures: Vec<KempeCell>,
    pub skipped: Vec<SkippedCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

/// The three conditions evaluated on one graph within explicit bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub graph: Graph,
    pub a_budget: usize,
    pub k_extra: usize,
    pub d_max: usize,
    pub unconditional_quadratic: QuadGenCertificate,
    pub base_quadratic: QuadGenCertificate,
    pub kempe: KempeSweep,
    pub agreement: Agreement,
}

/// Kempe connectivity of `G_a` for every `a` with `Σa ≤ a_budget` and every
/// `k` from `χ(G_a)` to `χ(G_a) + k_extra`.
pub fn kempe_sweep(g: &Graph, a_budget: usize, k_extra: usize, cache: &KempeCache) -> KempeSweep {
    let cells: Vec<_> = ReplicationVector::all_up_to(g.n, a_budget)
        .into_par_iter()
        .map(
            |a| -> std::result::Result<(Vec<KempeRow>, Vec<KempeCell>), SkippedCell> {
                let skip = |e: Error| SkippedCell {
                    a: a.clone(),
                    reason: e.to_string(),
                };
                let ga = replication(g, &a).map_err(skip)?;
                if ga.n == 0 {
                    return Ok((Vec::new(), Vec::new()));
                }
                let chi = chromatic_number(&ga).map_err(skip)?;
                check_coloring_space(&ga, chi + k_extra, COLORING_LIMIT).map_err(skip)?;
                let mut rows = Vec::new();
                let mut bad = Vec::new();
                for k in chi..=chi + k_extra {
                    let (colorings, classes) = cache.classes(&ga, k).map_err(skip)?;
                    rows.push(KempeRow {
                        a: a.clone(),
                        k,
                        colorings,
                        classes,
                    });
                    if classes > 1 {
                        let s = kempe_classes(&ga, k, COLORING_LIMIT).map_err(skip)?;
                        bad.push(KempeCell {
                            a: a.clone(),
                            k,
                            colorings,
                            classes,
                            witness: s.witness,
                        });
                    }
                }
                Ok((rows, bad))
            },
        )
        .collect();
    let mut sweep = KempeSweep {
        verdict: KempeVerdict::Holds,
        cells_checked: 0,
        table: Vec::new(),
        failures: Vec::new(),
        skipped: Vec::new(),
    };
    for c in cells {
        match c {
            Ok((rows, bad)) => {
                sweep.cells_checked += rows.len();
                sweep.table.extend(rows);
                sweep.failures.extend(bad);
            }
            Err(s) => sweep.skipped.push(s),
        }
    }
    sweep.verdict = if !sweep.failures.is_empty() {
        KempeVerdict::Fails
    } else if !sweep.skipped.is_empty() {
        KempeVerdict::Inconclusive
    } else {
        KempeVerdict::Holds
    };
    sweep
}

/// Evaluates quadratic generation of the ideals of `A^±` and `A` (for the
/// stable set polytope of `g`) up to degree `d_max`, and Kempe connectivity
/// of replications within the given budget, then compares the verdicts.
pub fn theorem_equivalence_harness(
    g: &Graph,
    a_budget: usize,
    k_extra: usize,
    d_max: usize,
    cache: &KempeCache,
) -> Result<HarnessReport> {
    let p = stable_set_polytope(g)?;
    let pm = build_unconditional(&p)?;
    let base = PointConfiguration::from_anti_blocking(&p)?;
    let unc = PointConfiguration::from_unconditional(&pm)?;
    let (unconditional_quadratic, base_quadratic) = rayon::join(
        || quad_generation_check(&unc, d_max),
        || quad_generation_check(&base, d_max),
    );
    let (unconditional_quadratic, base_quadratic) = (unconditional_quadratic?, base_quadratic?);
    let kempe = kempe_sweep(g, a_budget, k_extra, cache);
    let (i, ii) = (
        unconditional_quadratic.is_quadratic(),
        base_quadratic.is_quadratic(),
    );
    let agreement = match kempe.verdict {
        _ if i != ii => Agreement::Disagree,
        KempeVerdict::Inconclusive => Agreement::Inconclusive,
        KempeVerdict::Holds if i => Agreement::Agree,
        KempeVerdict::Fails if !i => Agreement::Agree,
        _ => Agreement::Disagree,
    };
    Ok(HarnessReport {
        graph: g.clone(),
        a_budget,
        k_extra,
        d_max,
        unconditional_quadratic,
        base_quadratic,
        kempe,
        agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn oversized_coloring_spaces_are_rejected_before_enumeration() {
        // 8^8 colorings of the empty graph
        assert!(matches!(
            kempe_classes(&Graph::empty(8), 8, COLORING_LIMIT),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            kempe_classes(&Graph::empty(2), 17, COLORING_LIMIT),
            Err(Error::TooLarge(_))
        ));
        assert_eq!(
            kempe_classes(&Graph::complete(4), 5, COLORING_LIMIT)
                .unwrap()
                .colorings,
            120
        );
    }

    fn brute_stable(g: &Graph) -> Vec<u64> {
        (0u64..1 << g.n())
            .filter(|&m| {
                g.edges()
                    .iter()
                    .all(|&(i, j)| m >> (i - 1) & 1 == 0 || m >> (j - 1) & 1 == 0)
            })
            .collect()
    }

    fn brute_chromatic(g: &Graph) -> usize {
        (0..=g.n())
            .find(|&k| {
                let total = k.pow(g.n() as u32);
                (0..total).any(|code| {
                    let c: Vec<usize> = (0..g.n()).map(|v| code / k.pow(v as u32) % k).collect();
                    g.edges().iter().all(|&(i, j)| c[i - 1] != c[j - 1])
                })
            })
            .unwrap()
    }

    #[test]
    fn stable_set_examples() {
        assert_eq!(stable_sets(&Graph::empty(3)).unwrap().len(), 8);
        assert_eq!(
            stable_sets(&Graph::complete(3)).unwrap(),
            vec![vec![], vec![1], vec![2], vec![3]]
        );
        let path: BTreeSet<Vec<usize>> =
            stable_sets(&Graph::path(3)).unwrap().into_iter().collect();
        let expected: BTreeSet<Vec<usize>> = [vec![], vec![1], vec![2], vec![3], vec![1, 3]]
            .into_iter()
            .collect();
        assert_eq!(path, expected);
        assert_eq!(stable_sets(&Graph::cycle(5)).unwrap().len(), 11);
        for g in [Graph::cycle(5), Graph::petersen(), Graph::prism()] {
            assert_eq!(stable_set_masks(&g).unwrap(), brute_stable(&g));
        }
    }

    #[test]
    fn stable_set_polytopes() {
        let cube = stable_set_polytope(&Graph::empty(3)).unwrap();
        assert_eq!(cube.lattice_points().len(), 8);
        assert_eq!(cube.hrep().inequalities().len(), 6);
        let simplex = stable_set_polytope(&Graph::complete(4)).unwrap();
        assert_eq!(simplex.lattice_points().len(), 5);
        let c5 = stable_set_polytope(&Graph::cycle(5)).unwrap();
        assert_eq!(
            c5.lattice_points(),
            stable_set_points(&Graph::cycle(5)).unwrap().as_slice()
        );
        assert_eq!(c5.lattice_points().len(), 11);
    }

    #[test]
    fn replication_examples() {
        let g = Graph::cycle(5);
        assert_eq!(replication(&g, &ReplicationVector::ones(5)).unwrap(), g);
        assert_eq!(
            replication(&g, &ReplicationVector::new(vec![0; 5]))
                .unwrap()
                .n(),
            0
        );
        assert_eq!(
            replication(&Graph::empty(1), &ReplicationVector::new(vec![3])).unwrap(),
            Graph::complete(3)
        );
        let sub = replication(&g, &ReplicationVector::new(vec![1, 0, 1, 1, 0])).unwrap();
        assert_eq!(sub, g.induced(&[1, 3, 4]).unwrap());
        let blown = replication(&Graph::path(2), &ReplicationVector::new(vec![2, 1])).unwrap();
        assert_eq!(blown, Graph::complete(3));
        assert!(replication(&g, &ReplicationVector::new(vec![1])).is_err());
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(chromatic_number(&Graph::empty(0)).unwrap(), 0);
        assert_eq!(chromatic_number(&Graph::empty(4)).unwrap(), 1);
        assert_eq!(chromatic_number(&Graph::complete(5)).unwrap(), 5);
        assert_eq!(chromatic_number(&Graph::cycle(5)).unwrap(), 3);
        assert_eq!(chromatic_number(&Graph::cycle(6)).unwrap(), 2);
        assert_eq!(chromatic_number(&Graph::petersen()).unwrap(), 3);
        assert_eq!(brute_chromatic(&Graph::petersen()), 3);
        assert_eq!(chromatic_number(&Graph::prism()).unwrap(), 3);
    }

    #[test]
    fn kempe_switch_examples() {
        let g = Graph::path(2);
        let f = Coloring::new(&g, 2, vec![1, 2]).unwrap();
        assert_eq!(kempe_switch(&g, &f, 1, 2, 1).unwrap().colors(), &[2, 1]);
        let g = Graph::empty(2);
        let f = Coloring::new(&g, 3, vec![1, 1]).unwrap();
        let h = kempe_switch(&g, &f, 1, 3, 2).unwrap();
        assert_eq!(h.colors(), &[1, 3]);
        assert_eq!(kempe_switch(&g, &h, 1, 3, 2).unwrap(), f);
        assert_eq!(
            kempe_switch(&g, &f, 2, 3, 1).unwrap_err(),
            Error::NotSwitchable { vertex: 1 }
        );
        assert!(Coloring::new(&Graph::path(2), 2, vec![1, 1]).is_err());
    }

    #[test]
    fn kempe_connectivity_examples() {
        for n in 1..=4 {
            assert!(kempe_equivalent_all(&Graph::complete(n), n).unwrap());
        }
        assert!(kempe_equivalent_all(&Graph::empty(0), 3).unwrap());
        assert!(kempe_equivalent_all(&Graph::path(4), 2).unwrap());
        assert_eq!(
            kempe_classes(&Graph::path(4), 2, COLORING_LIMIT)
                .unwrap()
                .colorings,
            2
        );
        assert_eq!(
            kempe_equivalent_all(&Graph::cycle(5), 2).unwrap_err(),
            Error::NotColorable { k: 2, chi: 3 }
        );
        let s = kempe_classes(&Graph::prism(), 3, COLORING_LIMIT).unwrap();
        assert!(!s.connected());
        let (f, g) = s.witness.unwrap();
        assert!(Coloring::new(&Graph::prism(), 3, f.colors().to_vec()).is_ok());
        assert!(Coloring::new(&Graph::prism(), 3, g.colors().to_vec()).is_ok());
    }

    #[test]
    fn coloring_budget_is_enforced() {
        assert_eq!(
            kempe_classes(&Graph::empty(8), 4, 1000).unwrap_err(),
            Error::BudgetExceeded {
                what: "colorings",
                limit: 1000
            }
        );
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::petersen();
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        let dimacs = "c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n";
        assert_eq!(Graph::parse_edge_list(dimacs).unwrap(), Graph::complete(3));
        assert!(matches!(
            Graph::parse_edge_list("3 2\n1 2\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            Graph::parse_edge_list("3 1\n1 1\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            Graph::parse_edge_list("3 1\n1 x\n"),
            Err(Error::Parse(_))
        ));
        let json = serde_json::to_string(&Graph::path(3)).unwrap();
        assert_eq!(json, r#"{"n":3,"edges":[[1,2],[2,3]]}"#);
        assert_eq!(
            serde_json::from_str::<Graph>(&json).unwrap(),
            Graph::path(3)
        );
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[1,2],[2,1]]}"#).is_err());
    }

    #[test]
    fn graph_counts() {
        let counts: Vec<usize> = (1..=5)
            .map(|n| {
                nonisomorphic_graphs(5)
                    .iter()
                    .filter(|g| g.n() == n)
                    .count()
            })
            .collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
    }

    #[test]
    fn replication_vectors_are_enumerated_once() {
        let all = ReplicationVector::all_up_to(3, 2);
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn harness_on_small_graphs() {
        let cache = KempeCache::new();
        for g in [Graph::complete(3), Graph::empty(3), Graph::path(3)] {
            let r = theorem_equivalence_harness(&g, 4, 1, 4, &cache).unwrap();
            assert_eq!(r.agreement, Agreement::Agree, "{g:?}");
            assert!(r.base_quadratic.is_quadratic());
            assert_eq!(r.kempe.verdict, KempeVerdict::Holds);
        }
    }

    proptest! {
        #[test]
        fn switch_is_proper_and_involutive(mask in 0u64..1 << 10, seed in 0usize..1000) {
            let pairs: Vec<(usize, usize)> = (1..=5).flat_map(|i| (i + 1..=5).map(move |j| (i, j))).collect();
            let g = Graph::new(5, pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, e)| *e)).unwrap();
            let chi = chromatic_number(&g).unwrap();
            prop_assert_eq!(chi, brute_chromatic(&g));
            let k = chi + 1;
            let states = all_colorings(&g, k, COLORING_LIMIT).unwrap();
            let f = Coloring { k, colors: unpack(states[seed % states.len()], 5).into_iter().map(|c| c + 1).collect() };
            let v = seed % 5 + 1;
            let i = f.color_of(v);
            let j = if i == k { 1 } else { i + 1 };
            let h = kempe_switch(&g, &f, i, j, v).unwrap();
            prop_assert!(Coloring::new(&g, k, h.colors().to_vec()).is_ok());
            prop_assert_eq!(kempe_switch(&g, &h, i, j, v).unwrap(), f);
        }
    }
}
