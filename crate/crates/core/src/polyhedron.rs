//! The target polyhedron (unit cube `[0,1]^d`) and its nested finite nets.

use num::{BigUint, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Int, Rational, Result};

/// A point of the cube, coordinates exact.
pub type Point = Vec<Rational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyhedron {
    dim: usize,
}

impl Polyhedron {
    pub fn cube(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("polyhedron dimension must be >= 1".into()));
        }
        Ok(Polyhedron { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basepoint substituted for `#` in the final configuration: the origin.
    pub fn basepoint(&self) -> Point {
        vec![Rational::zero(); self.dim]
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        p.len() == self.dim && p.iter().all(|c| !c.is_negative() && *c <= Rational::one())
    }
}

/// A finite `delta`-dense grid in `[0,1]^d`, points in lexicographic order.
///
/// Per axis the grid is `{0, h, 2h, ..., 1}` with `h = 1/ceil(1/(2 delta))`,
/// so every point of the cube is within sup-distance `delta` of the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    dim: usize,
    delta: Rational,
    divisions: Int,
    points: Option<Vec<Point>>,
}

/// Nets are only expanded into point lists up to this size.
const MATERIALIZE_LIMIT: u64 = 1 << 20;

pub fn make_net(dim: usize, delta: &Rational) -> Result<Net> {
    if dim == 0 {
        return Err(Error::Argument("net dimension must be >= 1".into()));
    }
    if !delta.is_positive() || *delta > Rational::one() {
        return Err(Error::Argument(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let divisions = (Rational::one() / (delta * Int::from(2)))
        .ceil()
        .to_integer();
    let divisions = divisions.max(Int::one());
    let mut net = Net {
        dim,
        delta: delta.clone(),
        divisions,
        points: None,
    };
    let size = net.size();
    if size <= BigUint::from(MATERIALIZE_LIMIT) {
        let n = size.to_usize().expect("bounded");
        net.points = Some((0..n).map(|i| net.decode(&BigUint::from(i))).collect());
    }
    Ok(net)
}

impl Net {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    /// Every point of `coarser` is a point of `self`.
    pub fn refines(&self, coarser: &Net) -> bool {
        self.dim == coarser.dim && self.divisions.is_multiple_of(&coarser.divisions)
    }

    /// Grid spacing along each axis.
    pub fn spacing(&self) -> Rational {
        Rational::new(Int::one(), self.divisions.clone())
    }

    /// Points per axis.
    pub fn radix(&self) -> BigUint {
        (&self.divisions + Int::one())
            .to_biguint()
            .expect("positive")
    }

    pub fn size(&self) -> BigUint {
        num::pow::pow(self.radix(), self.dim)
    }

    fn decode(&self, index: &BigUint) -> Point {
        let radix = self.radix();
        let mut rest = index.clone();
        let mut coords = vec![Rational::zero(); self.dim];
        for axis in (0..self.dim).rev() {
            let (q, r) = rest.div_rem(&radix);
            coords[axis] = Rational::new(Int::from(r), self.divisions.clone());
            rest = q;
        }
        coords
    }

    /// The `index`-th point in lexicographic order.
    pub fn point_at(&self, index: &BigUint) -> Result<Point> {
        if *index >= self.size() {
            return Err(Error::Argument(format!(
                "net index {index} out of range (size {})",
                self.size()
            )));
        }
        Ok(match &self.points {
            Some(p) => p[index.to_usize().expect("bounded")].clone(),
            None => self.decode(index),
        })
    }

    /// Inverse of [`Net::point_at`]; `None` if `p` is not a net point.
    pub fn index_of(&self, p: &[Rational]) -> Option<BigUint> {
        if p.len() != self.dim {
            return None;
        }
        let radix = self.radix();
        let mut idx = BigUint::zero();
        for c in p {
            let scaled = c * Rational::from_integer(self.divisions.clone());
            if !scaled.is_integer() || scaled.is_negative() || scaled.to_integer() > self.divisions
            {
                return None;
            }
            idx = idx * &radix + scaled.to_integer().to_biguint()?;
        }
        Some(idx)
    }

    pub fn points(&self) -> Result<&[Point]> {
        self.points.as_deref().ok_or_else(|| {
            Error::SizeBound(format!("net of size {} is not materialized", self.size()))
        })
    }

    /// Checks `delta`-density against the dual grid of cell midpoints and
    /// the grid points themselves.
    pub fn verify_dense(&self) -> bool {
        match &self.points {
            Some(points) => verify_points_dense(self.dim, &self.delta, &self.divisions, points),
            None => self.spacing() <= &self.delta * Int::from(2),
        }
    }

    #[cfg(test)]
    pub(crate) fn without_point(&self, index: usize) -> Net {
        let mut n = self.clone();
        if let Some(p) = n.points.as_mut() {
            p.remove(index);
        }
        n
    }
}

/// The farthest any cube point sits from a grid of this spacing is attained at
/// midpoints between neighbours, so scanning the half-step lattice suffices.
fn verify_points_dense(dim: usize, delta: &Rational, divisions: &Int, points: &[Point]) -> bool {
    let fine: Int = divisions * Int::from(2);
    let per_axis = match (&fine + Int::one()).to_u64() {
        Some(v) if v.pow(dim as u32) <= 1 << 22 => v,
        _ => return false,
    };
    let total = per_axis.pow(dim as u32);
    for i in 0..total {
        let mut rest = i;
        let mut probe = vec![Rational::zero(); dim];
        for axis in (0..dim).rev() {
            probe[axis] = Rational::new(Int::from(rest % per_axis), fine.clone());
            rest /= per_axis;
        }
        let near = points
            .iter()
            .any(|p| p.iter().zip(&probe).all(|(a, b)| (a - b).abs() <= *delta));
        if !near {
            return false;
        }
    }
    true
}

/// Default net schedule: `delta_n = delta_1 / 2^{n-1}`.
pub fn halving_schedule(dim: usize, delta1: &Rational, levels: usize) -> Result<Vec<Net>> {
    let mut out = Vec::with_capacity(levels);
    let mut delta = delta1.clone();
    for _ in 0..levels {
        out.push(make_net(dim, &delta)?);
        delta /= Int::from(2);
    }
    Ok(out)
}

pub fn format_point(p: &[Rational]) -> String {
    p.iter()
        .map(|c| format!("{}/{}", c.numer(), c.denom()))
        .collect::<Vec<_>>()
        .join(",")
}
