//! Concrete countable groups (`Z`, `Z^2`) and the finite-set calculus used by
//! tilings and the construction.
//!
//! Both groups are abelian and written multiplicatively in the API
//! (`mul`, `inv`), represented coordinatewise with big integers. New groups
//! plug in as further [`GroupId`] variants.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num::{BigUint, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Int, Rational, Result};

/// Largest number of elements any operation will enumerate explicitly.
pub const ENUMERATION_LIMIT: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "Z2")]
    Z2,
}

impl GroupId {
    pub fn rank(self) -> usize {
        match self {
            GroupId::Z => 1,
            GroupId::Z2 => 2,
        }
    }

    pub fn identity(self) -> GroupElement {
        GroupElement {
            group: self,
            coords: vec![Int::zero(); self.rank()],
        }
    }

    /// The `n`-th element (1-based) of the fixed spiral enumeration.
    ///
    /// `Z`: `0, 1, -1, 2, -2, ...`. `Z^2`: the origin, then square rings of
    /// radius `r = 1, 2, ...`, each walked counter-clockwise starting just
    /// above `(r, -r)`.
    pub fn enumerate(self, n: &BigUint) -> Result<GroupElement> {
        if n.is_zero() {
            return Err(Error::Argument("enumeration index must be >= 1".into()));
        }
        let m = n - BigUint::one();
        match self {
            GroupId::Z => {
                let (k, odd) = (Int::from(m.clone()) + Int::one()).div_rem(&Int::from(2));
                let v = if odd.is_zero() { k } else { -k };
                Ok(GroupElement::new(self, vec![v]))
            }
            GroupId::Z2 => {
                if m.is_zero() {
                    return Ok(self.identity());
                }
                // ring r holds indices ((2r-1)^2, (2r+1)^2]
                let root = (n - BigUint::one()).sqrt();
                let mut r = (root + BigUint::one()) / BigUint::from(2u8);
                let side = |r: &BigUint| -> BigUint {
                    let s = BigUint::from(2u8) * r + BigUint::one();
                    &s * &s
                };
                while &side(&r) < n {
                    r += BigUint::one();
                }
                while r > BigUint::one() && &side(&(&r - BigUint::one())) >= n {
                    r -= BigUint::one();
                }
                let inner = {
                    let s = BigUint::from(2u8) * &r - BigUint::one();
                    &s * &s
                };
                let off = Int::from(n - inner - BigUint::one());
                let r = Int::from(r);
                let len = &r * 2;
                let (leg, pos) = off.div_rem(&len);
                let leg = leg.to_u8().unwrap_or(0);
                let (x, y) = match leg {
                    0 => (r.clone(), -&r + 1 + pos),
                    1 => (&r - 1 - pos, r.clone()),
                    2 => (-&r, &r - 1 - pos),
                    _ => (-&r + 1 + pos, -&r),
                };
                Ok(GroupElement::new(self, vec![x, y]))
            }
        }
    }

    /// Inverse of [`GroupId::enumerate`].
    pub fn index_of(self, g: &GroupElement) -> Result<BigUint> {
        if g.group != self {
            return Err(Error::MixedGroups(self.to_string(), g.group.to_string()));
        }
        match self {
            GroupId::Z => {
                let v = &g.coords[0];
                let idx = if v.is_positive() {
                    v * Int::from(2)
                } else {
                    -v * Int::from(2) + Int::one()
                };
                Ok(idx.to_biguint().expect("positive index"))
            }
            GroupId::Z2 => {
                let (x, y) = (&g.coords[0], &g.coords[1]);
                let r = x.abs().max(y.abs());
                if r.is_zero() {
                    return Ok(BigUint::one());
                }
                let inner = (&r * 2 - 1) * (&r * 2 - 1);
                let len = &r * 2;
                let off = if *x == r && *y > -r.clone() {
                    y + &r - 1
                } else if *y == r {
                    &len + (&r - 1 - x)
                } else if *x == -r.clone() {
                    &len * 2 + (&r - 1 - y)
                } else {
                    &len * 3 + (x + &r - 1)
                };
                let idx: Int = inner + off + Int::one();
                Ok(idx.to_biguint().expect("positive index"))
            }
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Z => write!(f, "Z"),
            GroupId::Z2 => write!(f, "Z2"),
        }
    }
}

impl FromStr for GroupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" | "z" => Ok(GroupId::Z),
            "Z2" | "z2" | "Z^2" => Ok(GroupId::Z2),
            other => Err(Error::Parse(format!("unknown group `{other}`"))),
        }
    }
}

/// An element of `Z` or `Z^2`. Ordering is lexicographic on coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: GroupId,
    coords: Vec<Int>,
}

impl GroupElement {
    pub fn new(group: GroupId, coords: Vec<Int>) -> Self {
        assert_eq!(
            coords.len(),
            group.rank(),
            "coordinate count must match group rank"
        );
        GroupElement { group, coords }
    }

    pub fn z(v: impl Into<Int>) -> Self {
        GroupElement::new(GroupId::Z, vec![v.into()])
    }

    pub fn z2(x: impl Into<Int>, y: impl Into<Int>) -> Self {
        GroupElement::new(GroupId::Z2, vec![x.into(), y.into()])
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn coords(&self) -> &[Int] {
        &self.coords
    }

    /// The single coordinate of a `Z` element.
    pub fn value(&self) -> &Int {
        &self.coords[0]
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Group product (coordinatewise sum). Both operands must share a group.
    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.group, other.group);
        GroupElement {
            group: self.group,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn checked_mul(&self, other: &GroupElement) -> Result<GroupElement> {
        same_group(self.group, other.group)?;
        Ok(self.mul(other))
    }

    pub fn inv(&self) -> GroupElement {
        GroupElement {
            group: self.group,
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    /// `self * other^{-1}`.
    pub fn div(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.group, other.group);
        GroupElement {
            group: self.group,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.group
            .cmp(&other.group)
            .then_with(|| self.coords.cmp(&other.coords))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl GroupElement {
    /// Parses `"5"` as a `Z` element or `"3,-4"` as a `Z^2` element.
    pub fn parse(group: GroupId, s: &str) -> Result<GroupElement> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<Int>()
                    .map_err(|e| Error::Parse(format!("`{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != group.rank() {
            return Err(Error::Parse(format!("`{s}` is not an element of {group}")));
        }
        Ok(GroupElement::new(group, coords))
    }
}

pub(crate) fn same_group(a: GroupId, b: GroupId) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::MixedGroups(a.to_string(), b.to_string()))
    }
}

/// A finite subset of a group: either an explicit sorted element list or an
/// axis-aligned box (interval for `Z`, rectangle for `Z^2`).
///
/// Boxes let Følner sets of astronomically large cardinality participate in
/// membership and counting queries without being enumerated.
#[derive(Clone, Debug)]
pub enum FiniteSubset {
    Explicit {
        group: GroupId,
        elements: Vec<GroupElement>,
    },
    Box {
        group: GroupId,
        lo: Vec<Int>,
        hi: Vec<Int>,
    },
}

impl FiniteSubset {
    pub fn empty(group: GroupId) -> Self {
        FiniteSubset::Explicit {
            group,
            elements: Vec::new(),
        }
    }

    pub fn from_elements(
        group: GroupId,
        elements: impl IntoIterator<Item = GroupElement>,
    ) -> Result<Self> {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        for e in &elements {
            same_group(group, e.group)?;
        }
        elements.sort();
        elements.dedup();
        Ok(FiniteSubset::Explicit { group, elements })
    }

    pub fn singleton(g: GroupElement) -> Self {
        FiniteSubset::Explicit {
            group: g.group,
            elements: vec![g],
        }
    }

    pub fn identity(group: GroupId) -> Self {
        Self::singleton(group.identity())
    }

    /// The box `lo..=hi` (per axis). Empty boxes normalize to the empty set.
    pub fn boxed(group: GroupId, lo: Vec<Int>, hi: Vec<Int>) -> Self {
        assert_eq!(lo.len(), group.rank());
        assert_eq!(hi.len(), group.rank());
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return FiniteSubset::empty(group);
        }
        FiniteSubset::Box { group, lo, hi }
    }

    /// The integer interval `[a, b]` in `Z`.
    pub fn interval(a: impl Into<Int>, b: impl Into<Int>) -> Self {
        Self::boxed(GroupId::Z, vec![a.into()], vec![b.into()])
    }

    /// The rectangle `[x0, x1] x [y0, y1]` in `Z^2`.
    pub fn rect(
        x0: impl Into<Int>,
        x1: impl Into<Int>,
        y0: impl Into<Int>,
        y1: impl Into<Int>,
    ) -> Self {
        Self::boxed(
            GroupId::Z2,
            vec![x0.into(), y0.into()],
            vec![x1.into(), y1.into()],
        )
    }

    pub fn group(&self) -> GroupId {
        match self {
            FiniteSubset::Explicit { group, .. } | FiniteSubset::Box { group, .. } => *group,
        }
    }

    pub fn as_box(&self) -> Option<(&[Int], &[Int])> {
        match self {
            FiniteSubset::Box { lo, hi, .. } => Some((lo, hi)),
            FiniteSubset::Explicit { .. } => None,
        }
    }

    pub fn cardinality(&self) -> Int {
        match self {
            FiniteSubset::Explicit { elements, .. } => Int::from(elements.len()),
            FiniteSubset::Box { lo, hi, .. } => lo.iter().zip(hi).map(|(l, h)| h - l + 1).product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            FiniteSubset::Explicit { elements, .. } => elements.is_empty(),
            FiniteSubset::Box { .. } => false,
        }
    }

    /// Cardinality as `usize`, failing if the set is too large to enumerate.
    pub fn enumerable_len(&self) -> Result<usize> {
        let card = self.cardinality();
        match card.to_u64() {
            Some(c) if c <= ENUMERATION_LIMIT => Ok(c as usize),
            _ => Err(Error::SizeBound(format!(
                "set of cardinality {card} exceeds the enumeration limit {ENUMERATION_LIMIT}"
            ))),
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        if g.group != self.group() {
            return false;
        }
        match self {
            FiniteSubset::Explicit { elements, .. } => elements.binary_search(g).is_ok(),
            FiniteSubset::Box { lo, hi, .. } => g
                .coords
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| l <= c && c <= h),
        }
    }

    /// Iterates in canonical (lexicographic) order.
    pub fn iter(&self) -> SubsetIter<'_> {
        match self {
            FiniteSubset::Explicit { elements, .. } => SubsetIter::Explicit(elements.iter()),
            FiniteSubset::Box { group, lo, hi } => SubsetIter::Box {
                group: *group,
                lo,
                hi,
                next: Some(lo.clone()),
            },
        }
    }

    /// All elements, guarded by [`ENUMERATION_LIMIT`].
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        self.enumerable_len()?;
        Ok(self.iter().collect())
    }

    pub fn to_explicit(&self) -> Result<FiniteSubset> {
        Ok(FiniteSubset::Explicit {
            group: self.group(),
            elements: self.elements()?,
        })
    }

    /// `A g` (right translate).
    pub fn translate(&self, g: &GroupElement) -> FiniteSubset {
        debug_assert_eq!(self.group(), g.group);
        match self {
            FiniteSubset::Explicit { group, elements } => FiniteSubset::Explicit {
                group: *group,
                elements: elements.iter().map(|e| e.mul(g)).collect(),
            },
            FiniteSubset::Box { group, lo, hi } => FiniteSubset::Box {
                group: *group,
                lo: lo.iter().zip(&g.coords).map(|(a, b)| a + b).collect(),
                hi: hi.iter().zip(&g.coords).map(|(a, b)| a + b).collect(),
            },
        }
    }

    /// Per-axis bounding box, `None` for the empty set.
    pub fn bounds(&self) -> Option<(Vec<Int>, Vec<Int>)> {
        match self {
            FiniteSubset::Box { lo, hi, .. } => Some((lo.clone(), hi.clone())),
            FiniteSubset::Explicit { elements, group } => {
                let first = elements.first()?;
                let mut lo = first.coords.clone();
                let mut hi = first.coords.clone();
                for e in elements {
                    for k in 0..group.rank() {
                        if e.coords[k] < lo[k] {
                            lo[k] = e.coords[k].clone();
                        }
                        if e.coords[k] > hi[k] {
                            hi[k] = e.coords[k].clone();
                        }
                    }
                }
                Some((lo, hi))
            }
        }
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        if self.group() != other.group() {
            return false;
        }
        if let (Some((alo, ahi)), Some((blo, bhi))) = (self.as_box(), other.as_box()) {
            return alo.iter().zip(blo).all(|(a, b)| a >= b)
                && ahi.iter().zip(bhi).all(|(a, b)| a <= b);
        }
        if let Some((blo, bhi)) = other.as_box() {
            return match self.bounds() {
                None => true,
                Some((lo, hi)) => {
                    lo.iter().zip(blo).all(|(a, b)| a >= b)
                        && hi.iter().zip(bhi).all(|(a, b)| a <= b)
                }
            };
        }
        self.iter().all(|g| other.contains(&g))
    }
}

impl PartialEq for FiniteSubset {
    fn eq(&self, other: &Self) -> bool {
        if self.group() != other.group() || self.cardinality() != other.cardinality() {
            return false;
        }
        self.is_subset(other)
    }
}

impl Eq for FiniteSubset {}

pub enum SubsetIter<'a> {
    Explicit(std::slice::Iter<'a, GroupElement>),
    Box {
        group: GroupId,
        lo: &'a [Int],
        hi: &'a [Int],
        next: Option<Vec<Int>>,
    },
}

impl Iterator for SubsetIter<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        match self {
            SubsetIter::Explicit(it) => it.next().cloned(),
            SubsetIter::Box {
                group,
                lo,
                hi,
                next,
            } => {
                let cur = next.take()?;
                let mut succ = cur.clone();
                let mut axis = succ.len();
                loop {
                    if axis == 0 {
                        break;
                    }
                    axis -= 1;
                    if succ[axis] < hi[axis] {
                        succ[axis] += 1;
                        *next = Some(succ);
                        break;
                    }
                    succ[axis] = lo[axis].clone();
                }
                Some(GroupElement {
                    group: *group,
                    coords: cur,
                })
            }
        }
    }
}

fn check_pair(a: &FiniteSubset, b: &FiniteSubset) -> Result<()> {
    same_group(a.group(), b.group())
}

/// `A^{-1}`.
pub fn set_inverse(a: &FiniteSubset) -> FiniteSubset {
    match a {
        FiniteSubset::Box { group, lo, hi } => FiniteSubset::Box {
            group: *group,
            lo: hi.iter().map(|v| -v).collect(),
            hi: lo.iter().map(|v| -v).collect(),
        },
        FiniteSubset::Explicit { group, elements } => {
            let mut elements: Vec<GroupElement> = elements.iter().map(GroupElement::inv).collect();
            elements.sort();
            FiniteSubset::Explicit {
                group: *group,
                elements,
            }
        }
    }
}

/// `AB = {ab : a in A, b in B}`.
pub fn set_product(a: &FiniteSubset, b: &FiniteSubset) -> Result<FiniteSubset> {
    check_pair(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Ok(FiniteSubset::empty(a.group()));
    }
    if let (Some((alo, ahi)), Some((blo, bhi))) = (a.as_box(), b.as_box()) {
        return Ok(FiniteSubset::boxed(
            a.group(),
            alo.iter().zip(blo).map(|(x, y)| x + y).collect(),
            ahi.iter().zip(bhi).map(|(x, y)| x + y).collect(),
        ));
    }
    let total = a.cardinality() * b.cardinality();
    if total > Int::from(ENUMERATION_LIMIT) {
        return Err(Error::SizeBound(format!(
            "product set of up to {total} elements"
        )));
    }
    let mut out = HashSet::new();
    for x in a.iter() {
        for y in b.iter() {
            out.insert(x.mul(&y));
        }
    }
    FiniteSubset::from_elements(a.group(), out)
}

/// The `K`-boundary `B(A, K) = {g : Kg meets A and Kg meets G \ A}`.
pub fn boundary(a: &FiniteSubset, k: &FiniteSubset) -> Result<FiniteSubset> {
    check_pair(a, k)?;
    if a.is_empty() || k.is_empty() {
        return Ok(FiniteSubset::empty(a.group()));
    }
    // g with Kg ∩ A ≠ ∅ lies in K^{-1}A
    let candidates = set_product(&set_inverse(k), a)?;
    candidates.enumerable_len()?;
    let kel = k.elements()?;
    let mut out = Vec::new();
    for g in candidates.iter() {
        let mut meets = false;
        let mut escapes = false;
        for x in &kel {
            if a.contains(&x.mul(&g)) {
                meets = true;
            } else {
                escapes = true;
            }
            if meets && escapes {
                out.push(g.clone());
                break;
            }
        }
    }
    FiniteSubset::from_elements(a.group(), out)
}

/// `|B(A, K)|`, computed arithmetically when both sets are boxes.
pub fn boundary_cardinality(a: &FiniteSubset, k: &FiniteSubset) -> Result<Int> {
    check_pair(a, k)?;
    if let (Some((alo, ahi)), Some((klo, khi))) = (a.as_box(), k.as_box()) {
        // Kg meets A: per axis g in [a_lo - k_hi, a_hi - k_lo]
        // Kg inside A: per axis g in [a_lo - k_lo, a_hi - k_hi]
        let mut meet = Int::one();
        let mut inside = Int::one();
        for axis in 0..alo.len() {
            let m = (&ahi[axis] - &klo[axis]) - (&alo[axis] - &khi[axis]) + Int::one();
            let i = (&ahi[axis] - &khi[axis]) - (&alo[axis] - &klo[axis]) + Int::one();
            meet *= m.max(Int::zero());
            inside *= i.max(Int::zero());
        }
        return Ok(meet - inside);
    }
    Ok(boundary(a, k)?.cardinality())
}

/// `(K, delta)`-invariance: `|B(A, K)| / |A| < delta`, strictly.
pub fn is_invariant(a: &FiniteSubset, k: &FiniteSubset, delta: &Rational) -> Result<bool> {
    if !delta.is_positive() {
        return Err(Error::Argument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if a.is_empty() {
        return Err(Error::Argument(
            "invariance of the empty set is undefined".into(),
        ));
    }
    let b = boundary_cardinality(a, k)?;
    Ok(Rational::new(b, a.cardinality()) < *delta)
}

/// Window-level semi-decision of `G = F S`: is `W ⊆ F · S_sample`?
pub fn covers_window(f: &FiniteSubset, s_sample: &FiniteSubset, w: &FiniteSubset) -> Result<bool> {
    check_pair(f, s_sample)?;
    check_pair(f, w)?;
    w.enumerable_len()?;
    if s_sample.is_empty() || f.is_empty() {
        return Ok(w.is_empty());
    }
    s_sample.enumerable_len()?;
    if f.cardinality() <= w.cardinality() {
        let mut covered: HashSet<GroupElement> = HashSet::new();
        for s in s_sample.iter() {
            for x in f.iter() {
                let y = x.mul(&s);
                if w.contains(&y) {
                    covered.insert(y);
                }
            }
        }
        return Ok(Int::from(covered.len()) == w.cardinality());
    }
    let samples: Vec<GroupElement> = s_sample.iter().collect();
    Ok(w.iter()
        .all(|g| samples.iter().any(|s| f.contains(&g.div(s)))))
}

/// `g_n` of the fixed spiral enumeration.
pub fn enumerate(group: GroupId, n: u64) -> Result<GroupElement> {
    group.enumerate(&BigUint::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zset(v: &[i64]) -> FiniteSubset {
        FiniteSubset::from_elements(GroupId::Z, v.iter().map(|&x| GroupElement::z(x))).unwrap()
    }

    /// Boundary straight from the definition, scanning a generous window.
    fn boundary_oracle(a: &[i64], k: &[i64]) -> Vec<i64> {
        let lo = a.iter().min().unwrap() - k.iter().max().unwrap() - 2;
        let hi = a.iter().max().unwrap() - k.iter().min().unwrap() + 2;
        (lo..=hi)
            .filter(|g| {
                let meets = k.iter().any(|x| a.contains(&(x + g)));
                let escapes = k.iter().any(|x| !a.contains(&(x + g)));
                meets && escapes
            })
            .collect()
    }

    #[test]
    fn boundary_of_intervals() {
        let a: Vec<i64> = (0..=9).collect();
        assert_eq!(boundary_oracle(&a, &[-1, 0, 1]), vec![-1, 0, 9, 10]);
        let b = boundary(
            &FiniteSubset::interval(0, 9),
            &FiniteSubset::interval(-1, 1),
        )
        .unwrap();
        assert_eq!(b, zset(&[-1, 0, 9, 10]));
        let a: Vec<i64> = (0..=99).collect();
        assert_eq!(boundary_oracle(&a, &[-1, 0, 1]), vec![-1, 0, 99, 100]);
        let b = boundary(
            &FiniteSubset::interval(0, 99),
            &FiniteSubset::interval(-1, 1),
        )
        .unwrap();
        assert_eq!(b, zset(&[-1, 0, 99, 100]));
        assert_eq!(
            boundary_cardinality(
                &FiniteSubset::interval(0, 99),
                &FiniteSubset::interval(-1, 1)
            )
            .unwrap(),
            Int::from(4)
        );
    }

    #[test]
    fn identity_boundary_is_empty() {
        let b = boundary(&zset(&[3, 7, 8]), &FiniteSubset::identity(GroupId::Z)).unwrap();
        assert!(b.is_empty());
        assert!(is_invariant(
            &zset(&[3, 7]),
            &FiniteSubset::identity(GroupId::Z),
            &Rational::new(1.into(), 1000.into())
        )
        .unwrap());
    }

    #[test]
    fn invariance_is_strict() {
        let a = FiniteSubset::interval(0, 99);
        let k = FiniteSubset::interval(-1, 1);
        assert!(is_invariant(&a, &k, &Rational::new(1.into(), 20.into())).unwrap());
        assert!(!is_invariant(&a, &k, &Rational::new(1.into(), 25.into())).unwrap());
        assert!(is_invariant(&a, &k, &Rational::zero()).is_err());
    }

    #[test]
    fn mixed_groups_rejected() {
        let a = FiniteSubset::interval(0, 3);
        let k = FiniteSubset::rect(0, 1, 0, 1);
        assert!(matches!(boundary(&a, &k), Err(Error::MixedGroups(..))));
    }

    #[test]
    fn covers_window_examples() {
        let mult4: Vec<i64> = (-4..=104).filter(|x| x % 4 == 0).collect();
        let s = zset(&mult4);
        let w = FiniteSubset::interval(0, 100);
        assert!(covers_window(&FiniteSubset::interval(0, 3), &s, &w).unwrap());
        assert!(!covers_window(&FiniteSubset::interval(0, 2), &s, &w).unwrap());
        assert!(covers_window(&FiniteSubset::identity(GroupId::Z), &w, &w).unwrap());
    }

    #[test]
    fn set_ops() {
        let p = set_product(&zset(&[0, 1]), &zset(&[0, 10])).unwrap();
        assert_eq!(p, zset(&[0, 1, 10, 11]));
        assert_eq!(
            set_product(
                &FiniteSubset::interval(0, 1),
                &FiniteSubset::interval(0, 10)
            )
            .unwrap(),
            FiniteSubset::interval(0, 11)
        );
        assert_eq!(set_inverse(&zset(&[2, 5])), zset(&[-2, -5]));
        assert_eq!(enumerate(GroupId::Z, 3).unwrap(), GroupElement::z(-1));
        assert_eq!(enumerate(GroupId::Z, 1).unwrap(), GroupElement::z(0));
        assert!(enumerate(GroupId::Z, 0).is_err());
    }

    #[test]
    fn spiral_z2_first_ring() {
        let ring: Vec<GroupElement> = (1..=9)
            .map(|n| enumerate(GroupId::Z2, n).unwrap())
            .collect();
        let expected = [
            (0, 0),
            (1, 0),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ];
        for (g, (x, y)) in ring.iter().zip(expected) {
            assert_eq!(*g, GroupElement::z2(x, y));
        }
    }

    #[test]
    fn spiral_covers_balls() {
        for group in [GroupId::Z, GroupId::Z2] {
            for r in [0i64, 1, 7, 50] {
                let n = if group == GroupId::Z {
                    2 * r + 1
                } else {
                    (2 * r + 1) * (2 * r + 1)
                };
                let seen: HashSet<GroupElement> = (1..=n as u64)
                    .map(|i| enumerate(group, i).unwrap())
                    .collect();
                assert_eq!(seen.len() as i64, n);
                let ball = if group == GroupId::Z {
                    FiniteSubset::interval(-r, r)
                } else {
                    FiniteSubset::rect(-r, r, -r, r)
                };
                assert!(ball.iter().all(|g| seen.contains(&g)));
            }
        }
    }

    #[test]
    fn box_iteration_is_lexicographic() {
        let r = FiniteSubset::rect(0, 1, 5, 6);
        let v: Vec<String> = r.iter().map(|g| g.to_string()).collect();
        assert_eq!(v, ["0,5", "0,6", "1,5", "1,6"]);
        assert_eq!(r.cardinality(), Int::from(4));
    }

    #[test]
    fn parse_and_display() {
        let g = GroupElement::parse(GroupId::Z2, "(3,-4)").unwrap();
        assert_eq!(g.to_string(), "3,-4");
        assert!(GroupElement::parse(GroupId::Z, "1,2").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_set() -> impl Strategy<Value = Vec<i64>> {
            proptest::collection::vec(-30i64..30, 1..12)
        }

        proptest! {
            #[test]
            fn boundary_matches_definition(a in small_set(), k in small_set()) {
                let got = boundary(&zset(&a), &zset(&k)).unwrap();
                let mut want = boundary_oracle(&a, &k);
                want.sort();
                want.dedup();
                prop_assert_eq!(got, zset(&want));
            }

            #[test]
            fn boundary_inside_kinv_a_union_a(a in small_set(), k in small_set()) {
                let (sa, sk) = (zset(&a), zset(&k));
                let b = boundary(&sa, &sk).unwrap();
                let kinva = set_product(&set_inverse(&sk), &sa).unwrap();
                prop_assert!(b.iter().all(|g| kinva.contains(&g) || sa.contains(&g)));
            }

            #[test]
            fn box_boundary_count_matches_enumeration(a0 in -20i64..20, al in 0i64..30, k0 in -5i64..5, kl in 0i64..8) {
                let a = FiniteSubset::interval(a0, a0 + al);
                let k = FiniteSubset::interval(k0, k0 + kl);
                let explicit = boundary(&a.to_explicit().unwrap(), &k.to_explicit().unwrap()).unwrap();
                prop_assert_eq!(boundary_cardinality(&a, &k).unwrap(), explicit.cardinality());
            }

            #[test]
            fn rect_boundary_count_matches_enumeration(x0 in -5i64..5, xl in 0i64..6, y0 in -5i64..5, yl in 0i64..6, kl in 0i64..3) {
                let a = FiniteSubset::rect(x0, x0 + xl, y0, y0 + yl);
                let k = FiniteSubset::rect(-kl, kl, 0, kl);
                let explicit = boundary(&a.to_explicit().unwrap(), &k.to_explicit().unwrap()).unwrap();
                prop_assert_eq!(boundary_cardinality(&a, &k).unwrap(), explicit.cardinality());
            }

            #[test]
            fn product_and_inverse_match_brute_force(a in proptest::collection::vec(-50i64..50, 1..100), b in proptest::collection::vec(-50i64..50, 1..20)) {
                let p = set_product(&zset(&a), &zset(&b)).unwrap();
                let mut want: Vec<i64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
                want.sort();
                want.dedup();
                prop_assert_eq!(p, zset(&want));
                let inv: Vec<i64> = a.iter().map(|x| -x).collect();
                prop_assert_eq!(set_inverse(&zset(&a)), zset(&inv));
            }

            #[test]
            fn enumeration_round_trips(n in 1u64..200_000) {
                for group in [GroupId::Z, GroupId::Z2] {
                    let g = enumerate(group, n).unwrap();
                    prop_assert_eq!(group.index_of(&g).unwrap(), BigUint::from(n));
                }
            }
        }
    }
}
