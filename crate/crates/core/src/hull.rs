//! Exact H-representations of full-dimensional lattice polytopes.
//!
//! Both conversions run the double description method on a homogenized
//! cone with exact integer rays: facets of `conv(V)` are the extreme rays of
//! `{(c, d) : c·v + d >= 0 for all v in V}`, and vertices of `{a·x <= b}` are
//! the extreme rays of `{(x, t) : b t - a·x >= 0, t >= 0}` with `t > 0`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{deserialize_bigint, serialize_bigint, LatticeVector, SignVector};

/// `normal · x <= offset`, stored with primitive integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Inequality {
    normal: LatticeVector,
    #[serde(
        serialize_with = "serialize_bigint",
        deserialize_with = "deserialize_bigint"
    )]
    offset: BigInt,
}

impl Inequality {
    /// Scales a rational inequality to its primitive integer form.
    pub fn new(normal: &[BigRational], offset: &BigRational) -> Result<Self> {
        let lcm = normal
            .iter()
            .chain(std::iter::once(offset))
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let scaled: Vec<BigInt> = normal
            .iter()
            .map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let off = (offset * BigRational::from_integer(lcm)).to_integer();
        Self::from_integers(scaled, off)
    }

    pub fn from_integers(normal: Vec<BigInt>, offset: BigInt) -> Result<Self> {
        if normal.iter().all(Zero::is_zero) {
            return Err(Error::Parse("inequality with zero normal".into()));
        }
        let g = normal
            .iter()
            .chain(std::iter::once(&offset))
            .fold(BigInt::zero(), |g, x| g.gcd(x));
        let normal = normal.into_iter().map(|x| x / &g).collect();
        Ok(Self {
            normal: LatticeVector::new(normal),
            offset: offset / g,
        })
    }

    pub fn normal(&self) -> &LatticeVector {
        &self.normal
    }

    pub fn offset(&self) -> &BigInt {
        &self.offset
    }

    pub fn value(&self, x: &LatticeVector) -> BigInt {
        dot(self.normal.coords(), x.coords())
    }

    pub fn holds_rational(&self, x: &[BigRational]) -> bool {
        let lhs: BigRational = self
            .normal
            .coords()
            .iter()
            .zip(x)
            .map(|(a, q)| q * BigRational::from_integer(a.clone()))
            .sum();
        lhs <= BigRational::from_integer(self.offset.clone())
    }

    /// The inequality with its normal reflected by `e`.
    pub fn reflected(&self, e: &SignVector) -> Self {
        Self {
            normal: crate::lattice::reflect(&self.normal, e).expect("dimension checked by caller"),
            offset: self.offset.clone(),
        }
    }
}

/// A bounded full-dimensional polytope `{x : a_i · x <= b_i}` with its
/// rational bounding box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HRepresentation {
    dim: usize,
    inequalities: Vec<Inequality>,
    #[serde(skip)]
    lower: Vec<BigRational>,
    #[serde(skip)]
    upper: Vec<BigRational>,
}

impl HRepresentation {
    /// Validates boundedness and nonemptiness by computing the vertices.
    pub fn new(dim: usize, inequalities: Vec<Inequality>) -> Result<Self> {
        if let Some(bad) = inequalities.iter().find(|h| h.normal.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.normal.dim(),
            });
        }
        let inequalities = normalize_rows(inequalities);
        let vertices = vertices_of(dim, &inequalities)?;
        let (lower, upper) = bounding_box(dim, &vertices);
        Ok(Self {
            dim,
            inequalities,
            lower,
            upper,
        })
    }

    /// The facet description of `conv(points)`.
    pub fn hull(points: &[LatticeVector]) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("point set"))?;
        let dim = first.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let distinct: BTreeSet<&LatticeVector> = points.iter().collect();
        let rows: Vec<Vec<BigInt>> = distinct
            .iter()
            .map(|p| {
                let mut r = p.coords().to_vec();
                r.push(BigInt::one());
                r
            })
            .collect();
        let rays = extreme_rays(&rows, dim + 1).map_err(|e| match e {
            Error::Invariant(_) => Error::NotFullDimensional {
                missing: deficient_directions(points),
            },
            other => other,
        })?;
        let inequalities = rays
            .into_iter()
            .map(|mut r| {
                let d = r.pop().expect("homogenizing coordinate");
                Inequality::from_integers(r.into_iter().map(|c| -c).collect(), d)
            })
            .collect::<Result<Vec<_>>>()?;
        let verts: Vec<Vec<BigRational>> = distinct
            .iter()
            .map(|p| {
                p.coords()
                    .iter()
                    .cloned()
                    .map(BigRational::from_integer)
                    .collect()
            })
            .collect();
        let (lower, upper) = bounding_box(dim, &verts);
        Ok(Self {
            dim,
            inequalities: normalize_rows(inequalities),
            lower,
            upper,
        })
    }

    /// Builds from inequalities already known to describe a bounded polytope
    /// with the given bounding box.
    pub(crate) fn from_parts(
        dim: usize,
        inequalities: Vec<Inequality>,
        lower: Vec<BigRational>,
        upper: Vec<BigRational>,
    ) -> Self {
        Self {
            dim,
            inequalities: normalize_rows(inequalities),
            lower,
            upper,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    pub fn lower(&self) -> &[BigRational] {
        &self.lower
    }

    pub fn upper(&self) -> &[BigRational] {
        &self.upper
    }

    pub fn contains(&self, x: &[BigRational]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.inequalities.iter().all(|h| h.holds_rational(x)))
    }

    /// Whether the lattice point `x` lies in the `t`-th dilate.
    pub fn contains_dilated(&self, x: &LatticeVector, t: u32) -> bool {
        let t = BigInt::from(t);
        self.inequalities
            .iter()
            .all(|h| h.value(x) <= &h.offset * &t)
    }

    pub fn vertices(&self) -> Result<Vec<Vec<BigRational>>> {
        vertices_of(self.dim, &self.inequalities)
    }

    /// Integer box containing the `t`-th dilate.
    pub fn dilated_box(&self, t: u32) -> (Vec<i64>, Vec<i64>) {
        let t = BigRational::from_integer(BigInt::from(t));
        let lo = self
            .lower
            .iter()
            .map(|q| {
                (q * &t)
                    .ceil()
                    .to_integer()
                    .to_i64()
                    .expect("desk-scale box")
            })
            .collect();
        let hi = self
            .upper
            .iter()
            .map(|q| {
                (q * &t)
                    .floor()
                    .to_integer()
                    .to_i64()
                    .expect("desk-scale box")
            })
            .collect();
        (lo, hi)
    }

    /// Machine-integer copy of the rows, if every coefficient fits in `i64`.
    pub(crate) fn small_rows(&self) -> Option<Vec<(Vec<i64>, i64)>> {
        self.inequalities
            .iter()
            .map(|h| Some((h.normal.to_i64s()?, h.offset.to_i64()?)))
            .collect()
    }
}

/// Evaluates `a·x <= t b` with checked `i128` arithmetic; `None` on overflow.
pub(crate) fn small_contains(rows: &[(Vec<i64>, i64)], x: &[i64], t: i64) -> Option<bool> {
    for (a, b) in rows {
        let mut acc: i128 = 0;
        for (ai, xi) in a.iter().zip(x) {
            acc = acc.checked_add((*ai as i128).checked_mul(*xi as i128)?)?;
        }
        if acc > (*b as i128).checked_mul(t as i128)? {
            return Some(false);
        }
    }
    Some(true)
}

fn normalize_rows(rows: Vec<Inequality>) -> Vec<Inequality> {
    let set: BTreeSet<Inequality> = rows.into_iter().collect();
    set.into_iter().collect()
}

fn bounding_box(dim: usize, verts: &[Vec<BigRational>]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut lower = verts[0].clone();
    let mut upper = verts[0].clone();
    for v in verts {
        for k in 0..dim {
            if v[k] < lower[k] {
                lower[k] = v[k].clone();
            }
            if v[k] > upper[k] {
                upper[k] = v[k].clone();
            }
        }
    }
    (lower, upper)
}

fn deficient_directions(points: &[LatticeVector]) -> Vec<usize> {
    let dim = points[0].dim();
    (0..dim)
        .filter(|&k| {
            points
                .iter()
                .all(|p| p.coords()[k] == points[0].coords()[k])
        })
        .collect()
}

fn vertices_of(dim: usize, inequalities: &[Inequality]) -> Result<Vec<Vec<BigRational>>> {
    let mut rows: Vec<Vec<BigInt>> = inequalities
        .iter()
        .map(|h| {
            let mut r: Vec<BigInt> = h.normal.coords().iter().map(|c| -c).collect();
            r.push(h.offset.clone());
            r
        })
        .collect();
    let mut t_row = vec![BigInt::zero(); dim + 1];
    t_row[dim] = BigInt::one();
    rows.push(t_row);
    let rays = extreme_rays(&rows, dim + 1).map_err(|e| match e {
        Error::Invariant(_) => Error::Unbounded,
        other => other,
    })?;
    if rays.is_empty() {
        return Err(Error::Empty("polytope"));
    }
    let mut verts = Vec::with_capacity(rays.len());
    for r in rays {
        let t = &r[dim];
        if t.is_zero() {
            return Err(Error::Unbounded);
        }
        verts.push(
            r[..dim]
                .iter()
                .map(|c| BigRational::new(c.clone(), t.clone()))
                .collect(),
        );
    }
    verts.sort();
    Ok(verts)
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in &mut v {
            *x /= &g;
        }
    }
    v
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn subset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    v: Vec<BigInt>,
    zeros: Bits,
}

/// Extreme rays of the pointed cone `{y in R^d : row·y >= 0 for all rows}`.
/// Returns `Error::Invariant` when the rows have rank below `d` (the cone is
/// not pointed).
pub(crate) fn extreme_rays(rows: &[Vec<BigInt>], d: usize) -> Result<Vec<Vec<BigInt>>> {
    let m = rows.len();
    let basis = independent_rows(rows, d);
    if basis.len() < d {
        return Err(Error::Invariant(format!(
            "constraint rank {} < {d}",
            basis.len()
        )));
    }
    // Columns of the inverse basis matrix generate the initial simplicial cone.
    let inv = inverse(&basis.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>());
    let mut rays: Vec<Ray> = (0..d)
        .map(|col| {
            let lcm = (0..d).fold(BigInt::one(), |acc, r| acc.lcm(inv[r][col].denom()));
            let v: Vec<BigInt> = (0..d)
                .map(|r| (&inv[r][col] * BigRational::from_integer(lcm.clone())).to_integer())
                .collect();
            let mut zeros = Bits::new(m);
            for (j, &bi) in basis.iter().enumerate() {
                if j != col {
                    zeros.set(bi);
                }
            }
            Ray {
                v: primitive(v),
                zeros,
            }
        })
        .collect();
    let in_basis: BTreeSet<usize> = basis.iter().copied().collect();
    for (i, row) in rows.iter().enumerate() {
        if in_basis.contains(&i) {
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() + 2 < d {
                    continue;
                }
                let adjacent =
                    (0..rays.len()).all(|k| k == p || k == q || !common.subset_of(&rays[k].zeros));
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> = rays[q]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(yq, yp)| &vals[p] * yq - &vals[q] * yp)
                    .collect();
                let mut zeros = common;
                zeros.set(i);
                fresh.push(Ray {
                    v: primitive(v),
                    zeros,
                });
            }
        }
        let mut next = Vec::with_capacity(rays.len() + fresh.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            if vals[k].is_zero() {
                r.zeros.set(i);
                next.push(r);
            } else if vals[k].is_positive() {
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    let mut out: Vec<Vec<BigInt>> = rays.into_iter().map(|r| r.v).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn independent_rows(rows: &[Vec<BigInt>], d: usize) -> Vec<usize> {
    let mut echelon: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut chosen = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut r: Vec<BigRational> = row.iter().cloned().map(BigRational::from_integer).collect();
        for (pivot, e) in &echelon {
            if !r[*pivot].is_zero() {
                let f = &r[*pivot] / &e[*pivot];
                for k in 0..d {
                    let sub = &f * &e[k];
                    r[k] -= sub;
                }
            }
        }
        if let Some(pivot) = (0..d).find(|&k| !r[k].is_zero()) {
            echelon.push((pivot, r));
            chosen.push(i);
            if chosen.len() == d {
                break;
            }
        }
    }
    chosen
}

fn inverse(m: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    let d = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> =
                row.iter().cloned().map(BigRational::from_integer).collect();
            r.extend((0..d).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..d {
        let p = (col..d)
            .find(|&r| !a[r][col].is_zero())
            .expect("nonsingular basis");
        a.swap(col, p);
        let pv = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &pv;
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..2 * d {
                    let sub = &f * &a[col][k];
                    a[r][k] -= sub;
                }
            }
        }
    }
    a.into_iter().map(|r| r[d..].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<LatticeVector> {
        v.iter().map(|p| LatticeVector::from(*p)).collect()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn unit_square_facets() {
        let h = HRepresentation::hull(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(h.inequalities().len(), 4);
        assert!(h.contains(&[q(1, 2), q(1, 2)]).unwrap());
        assert!(!h.contains(&[q(2, 1), q(0, 1)]).unwrap());
        assert!(h.contains(&[q(1, 1), q(1, 1)]).unwrap());
        assert!(h.contains(&[q(1, 1)]).is_err());
    }

    #[test]
    fn interior_points_are_not_facets() {
        let h = HRepresentation::hull(&pts(&[
            &[0, 0],
            &[2, 0],
            &[0, 2],
            &[1, 1],
            &[1, 0],
            &[0, 1],
        ]))
        .unwrap();
        assert_eq!(h.inequalities().len(), 3);
    }

    #[test]
    fn degenerate_hull_reports_missing_direction() {
        let err = HRepresentation::hull(&pts(&[&[0, 0], &[3, 0]])).unwrap_err();
        assert_eq!(err, Error::NotFullDimensional { missing: vec![1] });
    }

    #[test]
    fn h_to_v_round_trip() {
        let h = HRepresentation::hull(&pts(&[
            &[0, 0, 0],
            &[2, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 1],
        ]))
        .unwrap();
        let again = HRepresentation::new(3, h.inequalities().to_vec()).unwrap();
        assert_eq!(again, h);
        let verts = h.vertices().unwrap();
        assert_eq!(verts.len(), 5);
    }

    #[test]
    fn unbounded_system_is_rejected() {
        let row = Inequality::from_integers(vec![1.into(), 0.into()], 1.into()).unwrap();
        let row2 = Inequality::from_integers(vec![(-1).into(), 0.into()], 0.into()).unwrap();
        assert_eq!(
            HRepresentation::new(2, vec![row, row2]).unwrap_err(),
            Error::Unbounded
        );
    }

    #[test]
    fn rational_inequalities_are_scaled_to_primitive_rows() {
        let h = Inequality::new(&[q(1, 2), q(1, 3)], &q(1, 1)).unwrap();
        assert_eq!(h.normal(), &LatticeVector::from([3, 2]));
        assert_eq!(h.offset(), &BigInt::from(6));
        let dup = Inequality::new(&[q(3, 1), q(2, 1)], &q(6, 1)).unwrap();
        assert_eq!(h, dup);
    }
}
