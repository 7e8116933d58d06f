//! Integer vectors, sign vectors, signed ordered lists and the combinatorial
//! stand-ins for monomials and binomials of a toric ideal.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^n` with arbitrary-precision coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Vec<BigInt>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        Self(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = BigInt::from(1);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.0
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|a| -a).collect())
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|a| a.abs()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|a| !a.is_negative())
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Sum of the absolute values of the coordinates.
    pub fn l1_norm(&self) -> BigInt {
        self.0.iter().map(|a| a.abs()).sum()
    }

    /// Machine-integer view, `None` if a coordinate does not fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn add_unit(&mut self, k: usize, delta: i64) {
        self.0[k] += delta;
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v.into_iter().map(BigInt::from).collect())
    }
}

impl From<&[i64]> for LatticeVector {
    fn from(v: &[i64]) -> Self {
        Self(v.iter().copied().map(BigInt::from).collect())
    }
}

impl<const N: usize> From<[i64; N]> for LatticeVector {
    fn from(v: [i64; N]) -> Self {
        Self(v.into_iter().map(BigInt::from).collect())
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Serializes a big integer as a JSON number when it fits in `i64`, as a
/// decimal string otherwise.
pub(crate) fn serialize_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

pub(crate) struct BigIntSeed;

impl<'de> Visitor<'de> for BigIntSeed {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<BigInt, E> {
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            Ok(BigInt::from(v as i64))
        } else {
            Err(E::custom(format!("{v} is not an integer")))
        }
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigInt, E> {
        BigInt::from_str(v.trim()).map_err(|_| E::custom(format!("{v:?} is not an integer")))
    }
}

pub(crate) fn deserialize_bigint<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    d.deserialize_any(BigIntSeed)
}

#[derive(Deserialize)]
struct BigIntWrap(#[serde(deserialize_with = "deserialize_bigint")] BigInt);

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct One<'a>(&'a BigInt);
        impl Serialize for One<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize_bigint(self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for c in &self.0 {
            seq.serialize_element(&One(c))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LatticeVector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<LatticeVector, A::Error> {
                let mut out = Vec::new();
                while let Some(BigIntWrap(x)) = seq.next_element()? {
                    out.push(x);
                }
                Ok(LatticeVector(out))
            }
        }
        d.deserialize_seq(V)
    }
}

/// An element of `{-1, +1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::Parse(format!("sign entry {bad} is not ±1")));
        }
        Ok(Self(signs))
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn all_minus(n: usize) -> Self {
        Self(vec![-1; n])
    }

    /// Sign vector of the orthant given by a bitmask; bit `n-1-k` set means
    /// coordinate `k` is negative, so masks in increasing order enumerate
    /// sign vectors lexicographically with `+` before `-`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self(
            (0..n)
                .map(|k| if mask >> (n - 1 - k) & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    /// All `2^n` sign vectors, starting with the all-plus vector.
    pub fn all(n: usize) -> impl Iterator<Item = SignVector> {
        (0..1u64 << n).map(move |m| Self::from_mask(n, m))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, k: usize) -> i8 {
        self.0[k]
    }

    /// Componentwise product, i.e. composition of the two reflections.
    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    /// Whether `x` lies in the closed orthant of this sign vector.
    pub fn orthant_contains(&self, x: &LatticeVector) -> bool {
        self.0.iter().zip(x.coords()).all(|(s, c)| {
            if *s > 0 {
                !c.is_negative()
            } else {
                !c.is_positive()
            }
        })
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Parse(format!("invalid sign character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// `e·p`, the coordinatewise product with a sign vector.
pub fn reflect(p: &LatticeVector, e: &SignVector) -> Result<LatticeVector> {
    if p.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: e.dim(),
        });
    }
    Ok(LatticeVector(
        p.0.iter()
            .zip(&e.0)
            .map(|(c, s)| if *s < 0 { -c } else { c.clone() })
            .collect(),
    ))
}

/// True iff `a_i * b_i < 0` for some coordinate.
pub fn separable(a: &LatticeVector, b: &LatticeVector) -> Result<bool> {
    a.check_dim(b)?;
    Ok(a.0
        .iter()
        .zip(&b.0)
        .any(|(x, y)| (x.is_positive() && y.is_negative()) || (x.is_negative() && y.is_positive())))
}

/// Canonical sign of `p`: `-1` exactly on its negative coordinates.
pub fn canonical_sign(p: &LatticeVector) -> SignVector {
    SignVector(
        p.0.iter()
            .map(|c| if c.is_negative() { -1 } else { 1 })
            .collect(),
    )
}

/// A point of `A^±` written as a nonnegative base point and a sign vector.
/// The sign is `+1` on every zero coordinate of the base.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedPoint {
    base: LatticeVector,
    sign: SignVector,
}

impl SignedPoint {
    pub fn new(base: LatticeVector, sign: SignVector) -> Result<Self> {
        if base.dim() != sign.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: sign.dim(),
            });
        }
        if !base.is_nonnegative() {
            return Err(Error::NegativeCoordinate(base));
        }
        let sign = SignVector(
            base.0
                .iter()
                .zip(sign.0)
                .map(|(c, s)| if c.is_zero() { 1 } else { s })
                .collect(),
        );
        Ok(Self { base, sign })
    }

    pub fn base(&self) -> &LatticeVector {
        &self.base
    }

    pub fn sign(&self) -> &SignVector {
        &self.sign
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The lattice point `sign · base`.
    pub fn point(&self) -> LatticeVector {
        reflect(&self.base, &self.sign).expect("dimensions checked at construction")
    }
}

pub fn canonical_signed_point(p: &LatticeVector) -> SignedPoint {
    SignedPoint {
        base: p.abs(),
        sign: canonical_sign(p),
    }
}

/// A nonempty, order-sensitive list of signed points of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderedList {
    entries: Vec<SignedPoint>,
}

impl OrderedList {
    pub fn new(entries: Vec<SignedPoint>) -> Result<Self> {
        let first = entries.first().ok_or(Error::Empty("ordered list"))?;
        let n = first.dim();
        if let Some(bad) = entries.iter().find(|e| e.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.dim(),
            });
        }
        Ok(Self { entries })
    }

    /// The list of canonical signed points of the factors, in the given order.
    pub fn from_points(points: &[LatticeVector]) -> Result<Self> {
        Self::new(points.iter().map(canonical_signed_point).collect())
    }

    pub fn entries(&self) -> &[SignedPoint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn swap(&mut self, p: usize, q: usize) {
        self.entries.swap(p, q);
    }

    /// The monomial `∏ x_{ε_j a_j}` this list represents.
    pub fn monomial(&self) -> Monomial {
        Monomial::from_factors_unchecked(
            self.dim(),
            self.entries.iter().map(SignedPoint::point).collect(),
        )
    }
}

/// A monomial of the polynomial ring indexed by lattice points, kept as a
/// lexicographically sorted multiset of its factors.
#[derive(Clone, Debug)]
pub struct Monomial {
    dim: usize,
    factors: Vec<LatticeVector>,
}

impl Monomial {
    pub fn new(dim: usize, mut factors: Vec<LatticeVector>) -> Result<Self> {
        if let Some(bad) = factors.iter().find(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        factors.sort();
        Ok(Self { dim, factors })
    }

    pub fn one(dim: usize) -> Self {
        Self {
            dim,
            factors: Vec::new(),
        }
    }

    pub(crate) fn from_factors_unchecked(dim: usize, mut factors: Vec<LatticeVector>) -> Self {
        factors.sort();
        Self { dim, factors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[LatticeVector] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Componentwise sum of the factors; the zero vector for the empty monomial.
    pub fn weight(&self) -> LatticeVector {
        let mut acc = vec![BigInt::zero(); self.dim];
        for f in &self.factors {
            for (a, c) in acc.iter_mut().zip(f.coords()) {
                *a += c;
            }
        }
        LatticeVector(acc)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors_unchecked(self.dim.max(other.dim), factors)
    }

    /// `self / other` when `other` divides `self` as a multiset.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut rest = Vec::with_capacity(self.factors.len());
        let mut it = other.factors.iter().peekable();
        for f in &self.factors {
            match it.peek() {
                Some(g) if *g == f => {
                    it.next();
                }
                _ => rest.push(f.clone()),
            }
        }
        if it.next().is_some() {
            return None;
        }
        Some(Self {
            dim: self.dim,
            factors: rest,
        })
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        other.div(self).is_some()
    }

    /// Replaces the dimension recorded for an empty monomial read from a file.
    pub(crate) fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }
}

impl PartialEq for Monomial {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for Monomial {}

impl std::hash::Hash for Monomial {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.factors.hash(state);
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.factors.cmp(&other.factors)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, v) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "x{v}")?;
        }
        Ok(())
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.factors.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let factors = Vec::<LatticeVector>::deserialize(d)?;
        let dim = factors.first().map_or(0, LatticeVector::dim);
        Monomial::new(dim, factors).map_err(de::Error::custom)
    }
}

/// A pair of monomials of equal degree and equal weight, i.e. a binomial of
/// the toric ideal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BinomialMove {
    lhs: Monomial,
    rhs: Monomial,
}

impl BinomialMove {
    pub fn new(lhs: Monomial, rhs: Monomial) -> Result<Self> {
        if lhs.degree() != rhs.degree() {
            return Err(Error::Unbalanced(format!(
                "degrees {} and {} differ",
                lhs.degree(),
                rhs.degree()
            )));
        }
        let dim = lhs.dim().max(rhs.dim());
        let (lhs, rhs) = (lhs.with_dim(dim), rhs.with_dim(dim));
        if lhs.weight() != rhs.weight() {
            return Err(Error::Unbalanced(format!(
                "weights {} and {} differ",
                lhs.weight(),
                rhs.weight()
            )));
        }
        Ok(Self { lhs, rhs })
    }

    pub fn lhs(&self) -> &Monomial {
        &self.lhs
    }

    pub fn rhs(&self) -> &Monomial {
        &self.rhs
    }

    pub fn degree(&self) -> usize {
        self.lhs.degree()
    }

    pub fn is_trivial(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn reversed(&self) -> Self {
        Self {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }

    /// Orientation-free form: the smaller monomial on the left.
    pub fn canonical(self) -> Self {
        if self.lhs <= self.rhs {
            self
        } else {
            self.reversed()
        }
    }
}

impl<'de> Deserialize<'de> for BinomialMove {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lhs: Monomial,
            rhs: Monomial,
        }
        let raw = Raw::deserialize(d)?;
        BinomialMove::new(raw.lhs, raw.rhs).map_err(de::Error::custom)
    }
}
