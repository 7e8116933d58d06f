//! Moving generating sets between `A` and `A^±`: lifting generators of the
//! anti-blocking ideal to the unconditional one, and projecting quadratic
//! chains of the unconditional ideal back down through the ν-projection of
//! signed ordered lists.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibers::{shortest_quadratic_path, PointConfiguration};
use crate::lattice::{
    canonical_sign, reflect, separable, BinomialMove, LatticeVector, Monomial, OrderedList,
    SignVector,
};
use crate::polytope::reflect_all;

/// A separable pair `a, b` of `A^±` rewritten as `e(a + b) = p + q` with
/// `p, q ∈ A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparableResolution {
    pub a: LatticeVector,
    pub b: LatticeVector,
    pub eps: SignVector,
    pub p: LatticeVector,
    pub q: LatticeVector,
}

impl SeparableResolution {
    /// The quadratic move `x_a x_b - x_{εp} x_{εq}` over `A^±`.
    pub fn to_move(&self) -> Result<BinomialMove> {
        let n = self.a.dim();
        BinomialMove::new(
            Monomial::new(n, vec![self.a.clone(), self.b.clone()])?,
            Monomial::new(
                n,
                vec![reflect(&self.p, &self.eps)?, reflect(&self.q, &self.eps)?],
            )?,
        )
    }
}

/// Resolves a separable pair. `eps` is the canonical sign of `a + b` and `p`
/// is the lexicographically least point of `A` completing the decomposition.
pub fn resolve_separable(
    a: &LatticeVector,
    b: &LatticeVector,
    base: &PointConfiguration,
) -> Result<SeparableResolution> {
    for x in [a, b] {
        if base.index_of(&x.abs()).is_none() {
            return Err(Error::PointOutsideConfiguration(x.clone()));
        }
    }
    if !separable(a, b)? {
        return Err(Error::Invariant(format!("{a} and {b} are not separable")));
    }
    let sum = a.add(b)?;
    let eps = canonical_sign(&sum);
    let s = sum.abs();
    for p in base.points() {
        if !p.dominated_by(&s) {
            continue;
        }
        let q = s.sub(p)?;
        if base.index_of(&q).is_some() {
            return Ok(SeparableResolution {
                a: a.clone(),
                b: b.clone(),
                eps,
                p: p.clone(),
                q,
            });
        }
    }
    Err(Error::NoDecomposition { sum: s })
}

/// Lifts moves over `A` to a move set over `A^±`: every sign image of every
/// move, plus one resolution move per separable pair. Output is canonical,
/// deduplicated and sorted.
pub fn lift_generators(
    moves: &[BinomialMove],
    base: &PointConfiguration,
) -> Result<Vec<BinomialMove>> {
    let n = base.dim();
    let mut out = BTreeSet::new();
    for mv in moves {
        for f in mv.lhs().factors().iter().chain(mv.rhs().factors()) {
            if base.index_of(f).is_none() {
                return Err(Error::PointOutsideConfiguration(f.clone()));
            }
        }
        for e in SignVector::all(n) {
            let image = |m: &Monomial| -> Result<Monomial> {
                Monomial::new(
                    n,
                    m.factors()
                        .iter()
                        .map(|x| reflect(x, &e))
                        .collect::<Result<_>>()?,
                )
            };
            let lifted = BinomialMove::new(image(mv.lhs())?, image(mv.rhs())?)?;
            if !lifted.is_trivial() {
                out.insert(lifted.canonical());
            }
        }
    }
    let pm = reflect_all(base.points(), n);
    for (i, a) in pm.iter().enumerate() {
        for b in &pm[i + 1..] {
            if separable(a, b)? {
                out.insert(resolve_separable(a, b, base)?.to_move()?.canonical());
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// `ω(Λ) = Σ ε_j a_j`.
pub fn omega(l: &OrderedList) -> LatticeVector {
    let mut acc = LatticeVector::zeros(l.dim());
    for e in l.entries() {
        acc = acc.add(&e.point()).expect("common dimension");
    }
    acc
}

/// `P_k(Λ)`: each 1-based index `j` repeated `a_{j,k}` times when
/// `ε_{j,k} = +1` and omitted otherwise, in ascending order of `j`.
pub fn selection_list(l: &OrderedList, k: usize) -> Result<Vec<usize>> {
    if k >= l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: k + 1,
        });
    }
    let mut out = Vec::new();
    for (j, e) in l.entries().iter().enumerate() {
        if e.sign().get(k) > 0 {
            let times = usize::try_from(&e.base().coords()[k])
                .map_err(|_| Error::TooLarge(format!("coordinate {}", e.base().coords()[k])))?;
            out.extend(std::iter::repeat_n(j + 1, times));
        }
    }
    Ok(out)
}

/// `ν(Λ) = (c_1, …, c_r)` and the monomial `∏ x_{c_j}`, where `c_{j,k}`
/// counts `j` among the first `ω_k` entries of `P_k(Λ)`.
pub fn nu_projection(l: &OrderedList) -> Result<(Vec<LatticeVector>, Monomial)> {
    let n = l.dim();
    let w = omega(l);
    if let Some(k) = w.coords().iter().position(Signed::is_negative) {
        return Err(Error::NegativeWeight { coordinate: k });
    }
    let mut cols: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; l.len()];
    for k in 0..n {
        let mut left = w.coords()[k].clone();
        for (j, e) in l.entries().iter().enumerate() {
            if left.is_zero() {
                break;
            }
            if e.sign().get(k) > 0 {
                let take = (&e.base().coords()[k]).min(&left).clone();
                left -= &take;
                cols[j][k] = take;
            }
        }
    }
    let c: Vec<LatticeVector> = cols.into_iter().map(LatticeVector::new).collect();
    let m = Monomial::new(n, c.clone())?;
    Ok((c, m))
}

/// One step `from → to` of a chain: `from = cofactor · lhs` and
/// `to = cofactor · rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub from: Monomial,
    pub to: Monomial,
    #[serde(rename = "move")]
    pub mv: BinomialMove,
    pub cofactor: Monomial,
}

/// A walk `M_0 → M_1 → … → M_t` through a fiber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveChain {
    pub from: Monomial,
    pub to: Monomial,
    pub steps: Vec<ChainStep>,
}

fn common_part(a: &Monomial, b: &Monomial) -> Monomial {
    let (x, y) = (a.factors(), b.factors());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(x[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    Monomial::from_factors_unchecked(a.dim(), out)
}

impl MoveChain {
    /// The chain through the given monomials, each step using the largest
    /// common cofactor. Consecutive repeats are dropped.
    pub fn from_monomials(seq: &[Monomial]) -> Result<Self> {
        let first = seq.first().ok_or(Error::Empty("monomial sequence"))?;
        let mut steps = Vec::new();
        let mut cur = first.clone();
        for next in &seq[1..] {
            if *next == cur {
                continue;
            }
            let cofactor = common_part(&cur, next);
            let mv = BinomialMove::new(
                cur.div(&cofactor).expect("common part divides"),
                next.div(&cofactor).expect("common part divides"),
            )?;
            steps.push(ChainStep {
                from: cur.clone(),
                to: next.clone(),
                mv,
                cofactor,
            });
            cur = next.clone();
        }
        Ok(Self {
            from: first.clone(),
            to: cur,
            steps,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        std::iter::once(self.from.clone())
            .chain(self.steps.iter().map(|s| s.to.clone()))
            .collect()
    }

    pub fn max_move_degree(&self) -> usize {
        self.steps.iter().map(|s| s.mv.degree()).max().unwrap_or(0)
    }
}

/// Shortest quadratic chain from `u` to `v` inside their fiber over `config`.
pub fn quadratic_chain(
    config: &PointConfiguration,
    u: &Monomial,
    v: &Monomial,
) -> Result<Option<MoveChain>> {
    shortest_quadratic_path(config, u, v)?
        .map(|p| MoveChain::from_monomials(&p))
        .transpose()
}

/// Projections `m(ν(·))` along bubble-sort adjacent swaps carrying the list
/// `from` to `to`, which must hold the same entries in another order. The
/// first element is `m(ν(from))` and the last is `m(ν(to))`.
pub fn bridge_lists(from: &OrderedList, to: &OrderedList) -> Result<Vec<Monomial>> {
    let mut slots: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, e) in to.entries().iter().enumerate() {
        slots.entry(e).or_default().push(i);
    }
    for v in slots.values_mut() {
        v.reverse();
    }
    let mut rank = Vec::with_capacity(from.len());
    for e in from.entries() {
        let slot = slots
            .get_mut(e)
            .and_then(Vec::pop)
            .ok_or_else(|| Error::InvalidChain("ordered lists hold different entries".into()))?;
        rank.push(slot);
    }
    if from.len() != to.len() {
        return Err(Error::InvalidChain("ordered lists differ in length".into()));
    }
    let mut list = from.clone();
    let mut out = vec![nu_projection(&list)?.1];
    loop {
        let mut swapped = false;
        for p in 0..rank.len().saturating_sub(1) {
            if rank[p] > rank[p + 1] {
                rank.swap(p, p + 1);
                list.swap(p, p + 1);
                out.push(nu_projection(&list)?.1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(out)
}

fn step_lists(step: &ChainStep) -> Result<(OrderedList, OrderedList)> {
    let gamma = step.cofactor.factors();
    let before: Vec<LatticeVector> = gamma
        .iter()
        .chain(step.mv.lhs().factors())
        .cloned()
        .collect();
    let after: Vec<LatticeVector> = gamma
        .iter()
        .chain(step.mv.rhs().factors())
        .cloned()
        .collect();
    Ok((
        OrderedList::from_points(&before)?,
        OrderedList::from_points(&after)?,
    ))
}

/// Projects a quadratic chain over `A^±` from `u` to `v` onto a quadratic
/// chain over `A`. Each step `(Γ, a, b) → (Γ, a', b')` becomes the move
/// between the two ν-projections, and consecutive steps are joined by
/// adjacent swaps between the two orderings of the shared monomial.
pub fn descend_chain(
    chain: &MoveChain,
    u: &Monomial,
    v: &Monomial,
    base: &PointConfiguration,
) -> Result<MoveChain> {
    if &chain.from != u || &chain.to != v {
        return Err(Error::EndpointMismatch(format!(
            "chain runs {} → {}, expected {u} → {v}",
            chain.from, chain.to
        )));
    }
    for m in [u, v] {
        base.indices(m)?;
    }
    let mut seq = vec![u.clone()];
    let mut prev: Option<OrderedList> = None;
    for (k, step) in chain.steps.iter().enumerate() {
        if step.mv.degree() != 2 {
            return Err(Error::NotQuadratic { step: k });
        }
        if step.cofactor.mul(step.mv.lhs()) != step.from
            || step.cofactor.mul(step.mv.rhs()) != step.to
        {
            return Err(Error::InvalidChain(format!(
                "step {k} does not factor through its move"
            )));
        }
        let expected_from = if k == 0 {
            &chain.from
        } else {
            &chain.steps[k - 1].to
        };
        if &step.from != expected_from {
            return Err(Error::InvalidChain(format!(
                "step {k} does not continue the chain"
            )));
        }
        let (before, after) = step_lists(step)?;
        match &prev {
            None => {
                let start = nu_projection(&before)?.1;
                if &start != u {
                    return Err(Error::Invariant(format!(
                        "projection of the first list is {start}, not {u}"
                    )));
                }
            }
            Some(p) => seq.extend(bridge_lists(p, &before)?.into_iter().skip(1)),
        }
        seq.push(nu_projection(&after)?.1);
        prev = Some(after);
    }
    let out = MoveChain::from_monomials(&seq)?;
    if &out.to != v {
        return Err(Error::Invariant(format!(
            "descended chain ends at {}, not {v}",
            out.to
        )));
    }
    if out.max_move_degree() > 2 {
        return Err(Error::Invariant(
            "descended chain has a non-quadratic step".into(),
        ));
    }
    Ok(out)
}

/// Summary of a chain accepted by [`audit_chain`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainAudit {
    pub length: usize,
    pub max_degree: usize,
}

fn tally(factors: &[LatticeVector]) -> BTreeMap<&LatticeVector, usize> {
    let mut m = BTreeMap::new();
    for f in factors {
        *m.entry(f).or_insert(0) += 1;
    }
    m
}

fn plus<'a>(
    a: &[&'a LatticeVector],
    b: &[&'a LatticeVector],
) -> BTreeMap<&'a LatticeVector, usize> {
    let mut m = BTreeMap::new();
    for f in a.iter().chain(b) {
        *m.entry(*f).or_insert(0) += 1;
    }
    m
}

fn coordinate_sums(factors: &[LatticeVector], n: usize) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); n];
    for f in factors {
        for (acc, c) in s.iter_mut().zip(f.coords()) {
            *acc += c;
        }
    }
    s
}

/// Checks a chain from first principles, using multiset counts rather than
/// the monomial arithmetic that built it: every step is `from = cofactor·lhs`,
/// `to = cofactor·rhs` with `lhs`, `rhs` of equal degree and weight, steps
/// are consecutive, the endpoints are `u` and `v`, every factor is a point of
/// `config`, and every move has degree at most `max_degree`.
pub fn audit_chain(
    chain: &MoveChain,
    config: &PointConfiguration,
    u: &Monomial,
    v: &Monomial,
    max_degree: usize,
) -> Result<ChainAudit> {
    let n = config.dim();
    if tally(chain.from.factors()) != tally(u.factors()) {
        return Err(Error::EndpointMismatch(format!(
            "chain starts at {}, expected {u}",
            chain.from
        )));
    }
    if tally(chain.to.factors()) != tally(v.factors()) {
        return Err(Error::EndpointMismatch(format!(
            "chain ends at {}, expected {v}",
            chain.to
        )));
    }
    let mut cur = tally(chain.from.factors());
    let mut worst = 0;
    for (k, s) in chain.steps.iter().enumerate() {
        let bad = |why: &str| Error::InvalidChain(format!("step {k}: {why}"));
        if tally(s.from.factors()) != cur {
            return Err(bad("does not start where the previous step ended"));
        }
        let (l, r, c) = (
            s.mv.lhs().factors(),
            s.mv.rhs().factors(),
            s.cofactor.factors(),
        );
        if l.len() != r.len() {
            return Err(bad("move sides differ in degree"));
        }
        if coordinate_sums(l, n) != coordinate_sums(r, n) {
            return Err(bad("move sides differ in weight"));
        }
        if l.len() > max_degree {
            return Err(if max_degree == 2 {
                Error::NotQuadratic { step: k }
            } else {
                bad("move degree exceeds the bound")
            });
        }
        let cs: Vec<&LatticeVector> = c.iter().collect();
        let ls: Vec<&LatticeVector> = l.iter().collect();
        let rs: Vec<&LatticeVector> = r.iter().collect();
        if plus(&cs, &ls) != cur {
            return Err(bad("from is not cofactor times lhs"));
        }
        let next = plus(&cs, &rs);
        if tally(s.to.factors()) != next {
            return Err(bad("to is not cofactor times rhs"));
        }
        for f in s
            .from
            .factors()
            .iter()
            .chain(s.to.factors())
            .chain(l)
            .chain(r)
        {
            if config.index_of(f).is_none() {
                return Err(Error::PointOutsideConfiguration(f.clone()));
            }
        }
        worst = worst.max(l.len());
        cur = next;
    }
    if cur != tally(v.factors()) {
        return Err(Error::EndpointMismatch(format!("walk ends away from {v}")));
    }
    for f in chain.from.factors() {
        if config.index_of(f).is_none() {
            return Err(Error::PointOutsideConfiguration(f.clone()));
        }
    }
    Ok(ChainAudit {
        length: chain.steps.len(),
        max_degree: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SignedPoint;
    use crate::polytope::{build_anti_blocking, build_unconditional};
    use proptest::prelude::*;

    fn v(x: &[i64]) -> LatticeVector {
        LatticeVector::from(x)
    }

    fn mono(pts: &[&[i64]]) -> Monomial {
        Monomial::new(pts[0].len(), pts.iter().map(|p| v(p)).collect()).unwrap()
    }

    fn square() -> PointConfiguration {
        PointConfiguration::from_anti_blocking(&build_anti_blocking(&[v(&[1, 1])]).unwrap())
            .unwrap()
    }

    fn square_pm() -> PointConfiguration {
        let p = build_anti_blocking(&[v(&[1, 1])]).unwrap();
        PointConfiguration::from_unconditional(&build_unconditional(&p).unwrap()).unwrap()
    }

    /// One-dimensional entries `(±|x|)` for the column examples.
    fn column(xs: &[i64]) -> OrderedList {
        OrderedList::from_points(&xs.iter().map(|x| v(&[*x])).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn worked_column_example() {
        let l = column(&[2, -1, 3, 0]);
        assert_eq!(selection_list(&l, 0).unwrap(), vec![1, 1, 3, 3, 3]);
        assert_eq!(omega(&l), v(&[4]));
        let (c, _) = nu_projection(&l).unwrap();
        assert_eq!(c, vec![v(&[2]), v(&[0]), v(&[2]), v(&[0])]);
    }

    #[test]
    fn omega_trivial_cases() {
        let a = v(&[2, 1]);
        let pos = OrderedList::new(vec![
            SignedPoint::new(a.clone(), SignVector::all_plus(2)).unwrap()
        ])
        .unwrap();
        assert_eq!(omega(&pos), a);
        let both = OrderedList::new(vec![
            SignedPoint::new(a.clone(), SignVector::all_plus(2)).unwrap(),
            SignedPoint::new(a, SignVector::all_minus(2)).unwrap(),
        ])
        .unwrap();
        assert_eq!(omega(&both), v(&[0, 0]));
        assert!(selection_list(&column(&[-1, -2]), 0).unwrap().is_empty());
    }

    #[test]
    fn negative_weight_is_rejected() {
        assert_eq!(
            nu_projection(&column(&[1, -2])).unwrap_err(),
            Error::NegativeWeight { coordinate: 0 }
        );
    }

    #[test]
    fn positive_lists_are_fixed() {
        let pts = vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])];
        let (c, m) = nu_projection(&OrderedList::from_points(&pts).unwrap()).unwrap();
        assert_eq!(c, pts);
        assert_eq!(m, Monomial::new(2, pts).unwrap());
    }

    #[test]
    fn resolve_square_examples() {
        let a = square();
        let r = resolve_separable(&v(&[1, 1]), &v(&[-1, 0]), &a).unwrap();
        assert_eq!((r.p.clone(), r.q.clone()), (v(&[0, 0]), v(&[0, 1])));
        assert_eq!(r.eps, SignVector::all_plus(2));
        let r = resolve_separable(&v(&[1, -1]), &v(&[-1, 1]), &a).unwrap();
        assert_eq!((r.p, r.q), (v(&[0, 0]), v(&[0, 0])));
        assert!(resolve_separable(&v(&[1, 1]), &v(&[1, 0]), &a).is_err());
        assert!(matches!(
            resolve_separable(&v(&[2, 0]), &v(&[-1, 0]), &a),
            Err(Error::PointOutsideConfiguration(_))
        ));
    }

    #[test]
    fn resolution_is_lex_least_by_exhaustion() {
        let p = build_anti_blocking(&[v(&[2, 1]), v(&[1, 2])]).unwrap();
        let a = PointConfiguration::from_anti_blocking(&p).unwrap();
        let pm = reflect_all(a.points(), 2);
        for x in &pm {
            for y in &pm {
                if !separable(x, y).unwrap() {
                    continue;
                }
                let r = resolve_separable(x, y, &a).unwrap();
                let s = reflect(&x.add(y).unwrap(), &r.eps).unwrap();
                assert!(s.is_nonnegative());
                assert_eq!(r.p.add(&r.q).unwrap(), s);
                let least = a
                    .points()
                    .iter()
                    .flat_map(|p| a.points().iter().map(move |q| (p, q)))
                    .filter(|(p, q)| p.add(q).unwrap() == s)
                    .map(|(p, _)| p.clone())
                    .min()
                    .unwrap();
                assert_eq!(r.p, least);
            }
        }
    }

    #[test]
    fn lift_of_empty_set_is_separable_moves_only() {
        let p = build_anti_blocking(&[v(&[1, 0]), v(&[0, 1])]).unwrap();
        let a = PointConfiguration::from_anti_blocking(&p).unwrap();
        let lifted = lift_generators(&[], &a).unwrap();
        assert_eq!(
            lifted,
            vec![
                BinomialMove::new(mono(&[&[0, -1], &[0, 1]]), mono(&[&[0, 0], &[0, 0]]))
                    .unwrap()
                    .canonical(),
                BinomialMove::new(mono(&[&[-1, 0], &[1, 0]]), mono(&[&[0, 0], &[0, 0]]))
                    .unwrap()
                    .canonical(),
            ]
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect::<Vec<_>>()
        );
    }

    #[test]
    fn lift_of_square_move_has_four_orbit_images() {
        let a = square();
        let f = BinomialMove::new(mono(&[&[1, 1], &[0, 0]]), mono(&[&[1, 0], &[0, 1]])).unwrap();
        let lifted = lift_generators(std::slice::from_ref(&f), &a).unwrap();
        let orbit: BTreeSet<BinomialMove> = SignVector::all(2)
            .map(|e| {
                let img = |m: &Monomial| {
                    Monomial::new(
                        2,
                        m.factors()
                            .iter()
                            .map(|x| reflect(x, &e).unwrap())
                            .collect(),
                    )
                    .unwrap()
                };
                BinomialMove::new(img(f.lhs()), img(f.rhs()))
                    .unwrap()
                    .canonical()
            })
            .collect();
        assert_eq!(orbit.len(), 4);
        assert!(orbit.iter().all(|m| lifted.contains(m)));
        let separable_only = lift_generators(&[], &a).unwrap();
        let expected: BTreeSet<_> = orbit.into_iter().chain(separable_only).collect();
        assert_eq!(lifted, expected.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn lifted_square_generators_connect_square_pm() {
        let a = square();
        let f = a.all_quadratic_moves();
        let lifted = lift_generators(&f, &a).unwrap();
        assert!(crate::fibers::is_generated_by(&square_pm(), &lifted, 3).unwrap());
    }

    #[test]
    fn empty_chain_descends_to_empty_chain() {
        let u = mono(&[&[1, 1], &[0, 0]]);
        let c = MoveChain::from_monomials(std::slice::from_ref(&u)).unwrap();
        let d = descend_chain(&c, &u, &u, &square()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn single_move_descends_to_itself() {
        let u = mono(&[&[1, 1], &[0, 0]]);
        let w = mono(&[&[1, 0], &[0, 1]]);
        let c = MoveChain::from_monomials(&[u.clone(), w.clone()]).unwrap();
        let d = descend_chain(&c, &u, &w, &square()).unwrap();
        assert_eq!(d.len(), 1);
        audit_chain(&d, &square(), &u, &w, 2).unwrap();
    }

    #[test]
    fn chain_through_negative_points_descends() {
        let pm = square_pm();
        let u = mono(&[&[1, 1], &[0, 0], &[0, 0]]);
        let w = mono(&[&[1, 0], &[0, 1], &[0, 0]]);
        let c = MoveChain::from_monomials(&[
            u.clone(),
            mono(&[&[1, 1], &[1, -1], &[-1, 1]]),
            mono(&[&[1, -1], &[0, 1], &[0, 1]]),
            w.clone(),
        ])
        .unwrap();
        assert_eq!(audit_chain(&c, &pm, &u, &w, 2).unwrap().length, 3);
        let d = descend_chain(&c, &u, &w, &square()).unwrap();
        audit_chain(&d, &square(), &u, &w, 2).unwrap();
        let bfs = quadratic_chain(&pm, &u, &w).unwrap().unwrap();
        audit_chain(
            &descend_chain(&bfs, &u, &w, &square()).unwrap(),
            &square(),
            &u,
            &w,
            2,
        )
        .unwrap();
    }

    #[test]
    fn descend_rejects_bad_input() {
        let u = mono(&[&[1, 1], &[0, 0]]);
        let w = mono(&[&[1, 0], &[0, 1]]);
        let c = MoveChain::from_monomials(&[u.clone(), w.clone()]).unwrap();
        assert!(matches!(
            descend_chain(&c, &w, &u, &square()),
            Err(Error::EndpointMismatch(_))
        ));
        let cube = mono(&[&[0], &[0], &[3]]);
        let line = PointConfiguration::new(vec![v(&[0]), v(&[1]), v(&[3])]).unwrap();
        let ones = mono(&[&[1], &[1], &[1]]);
        let cubic = MoveChain::from_monomials(&[cube.clone(), ones.clone()]).unwrap();
        assert_eq!(
            descend_chain(&cubic, &cube, &ones, &line).unwrap_err(),
            Error::NotQuadratic { step: 0 }
        );
    }

    #[test]
    fn audit_catches_tampering() {
        let u = mono(&[&[1, 1], &[0, 0]]);
        let w = mono(&[&[1, 0], &[0, 1]]);
        let mut c = MoveChain::from_monomials(&[u.clone(), w.clone()]).unwrap();
        assert_eq!(audit_chain(&c, &square(), &u, &w, 2).unwrap().length, 1);
        c.steps[0].to = mono(&[&[1, 0], &[1, 0]]);
        assert!(audit_chain(&c, &square(), &u, &w, 2).is_err());
        let json =
            serde_json::to_value(MoveChain::from_monomials(&[u.clone(), w.clone()]).unwrap())
                .unwrap();
        assert!(json["steps"][0]["move"]["lhs"].is_array());
        assert!(json["steps"][0]["cofactor"].is_array());
    }

    fn signed_entry() -> impl Strategy<Value = (Vec<i64>, Vec<i8>)> {
        (
            prop::collection::vec(0i64..=2, 2),
            prop::collection::vec(prop::bool::ANY, 2),
        )
            .prop_map(|(a, s)| (a, s.into_iter().map(|b| if b { 1 } else { -1 }).collect()))
    }

    fn to_list(entries: &[(Vec<i64>, Vec<i8>)]) -> OrderedList {
        OrderedList::new(
            entries
                .iter()
                .map(|(a, s)| SignedPoint::new(v(a), SignVector::new(s.clone()).unwrap()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// Counts copies of each index among the first ω_k entries of `P_k`.
    fn nu_by_selection(l: &OrderedList) -> Vec<LatticeVector> {
        let w = omega(l);
        let mut c = vec![vec![0i64; l.dim()]; l.len()];
        for k in 0..l.dim() {
            let cut: usize = (&w.coords()[k]).try_into().unwrap();
            for j in &selection_list(l, k).unwrap()[..cut] {
                c[j - 1][k] += 1;
            }
        }
        c.into_iter().map(LatticeVector::from).collect()
    }

    proptest! {
        #[test]
        fn nu_matches_selection_counts(entries in prop::collection::vec(signed_entry(), 1..6)) {
            let l = to_list(&entries);
            let w = omega(&l);
            prop_assume!(w.is_nonnegative());
            let (c, _) = nu_projection(&l).unwrap();
            prop_assert_eq!(&c, &nu_by_selection(&l));
            let total = c.iter().fold(LatticeVector::zeros(2), |s, x| s.add(x).unwrap());
            prop_assert_eq!(total, w);
            for (cj, e) in c.iter().zip(l.entries()) {
                prop_assert!(cj.is_nonnegative() && cj.dominated_by(e.base()));
            }
        }

        #[test]
        fn adjacent_swap_touches_two_slots(entries in prop::collection::vec(signed_entry(), 2..6), p in 0usize..5) {
            let l = to_list(&entries);
            prop_assume!(omega(&l).is_nonnegative());
            let p = p % (l.len() - 1);
            let mut m = l.clone();
            m.swap(p, p + 1);
            let (c, _) = nu_projection(&l).unwrap();
            let (d, _) = nu_projection(&m).unwrap();
            for j in 0..c.len() {
                if j != p && j != p + 1 {
                    prop_assert_eq!(&c[j], &d[j]);
                }
            }
            prop_assert_eq!(c[p].add(&c[p + 1]).unwrap(), d[p].add(&d[p + 1]).unwrap());
        }
    }
}
