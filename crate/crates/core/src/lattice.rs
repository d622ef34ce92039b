//! Geometry of the hypercubic lattice `Z^d`.
//!
//! Sites are integer vectors, bonds join nearest neighbours and every bond
//! crosses exactly one plaquette, the closed unit `(d-1)`-cube through its
//! midpoint. Plaquettes are stored as the bond they cross; corner geometry is
//! produced on demand in doubled coordinates so that the half-integer corner
//! lattice `(Z + 1/2)^d` stays in integer arithmetic.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::LatticeError;

/// Largest supported dimension. Sites are stored inline so they stay `Copy`.
pub const MAX_DIM: usize = 6;

/// Checks `2 <= d <= MAX_DIM`.
pub fn check_dim(d: usize) -> Result<(), LatticeError> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(LatticeError::Dimension { d, max: MAX_DIM })
    }
}

/// A point of `Z^d`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    dim: u8,
    coords: [i32; MAX_DIM],
}

impl Site {
    pub fn origin(d: usize) -> Self {
        debug_assert!(d <= MAX_DIM);
        Site {
            dim: d as u8,
            coords: [0; MAX_DIM],
        }
    }

    pub fn new(coords: &[i32]) -> Result<Self, LatticeError> {
        check_dim(coords.len())?;
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Site {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    /// Unit vector along `axis`.
    pub fn unit(d: usize, axis: usize) -> Self {
        let mut s = Site::origin(d);
        s.coords[axis] = 1;
        s
    }

    /// The diagonal point `n * (1, ..., 1)`.
    pub fn diagonal(d: usize, n: i32) -> Self {
        let mut s = Site::origin(d);
        s.coords[..d].iter_mut().for_each(|c| *c = n);
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    #[inline]
    pub fn is_origin(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    /// `self + delta * unit(axis)`.
    #[inline]
    pub fn step(&self, axis: usize, delta: i32) -> Self {
        let mut s = *self;
        s.coords[axis] += delta;
        s
    }

    pub fn add(&self, other: &Site) -> Self {
        let mut s = *self;
        for i in 0..self.dim() {
            s.coords[i] += other.coords[i];
        }
        s
    }

    pub fn sub(&self, other: &Site) -> Self {
        let mut s = *self;
        for i in 0..self.dim() {
            s.coords[i] -= other.coords[i];
        }
        s
    }

    pub fn scale(&self, k: i32) -> Self {
        let mut s = *self;
        s.coords[..self.dim()].iter_mut().for_each(|c| *c *= k);
        s
    }

    /// Sum of absolute coordinates.
    #[inline]
    pub fn l1_norm(&self) -> u64 {
        self.coords().iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    #[inline]
    pub fn linf_norm(&self) -> u32 {
        self.coords().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// Coordinate sum, the height above the hyperplane through the origin
    /// orthogonal to `(1, ..., 1)`.
    #[inline]
    pub fn s_sum(&self) -> i64 {
        self.coords().iter().map(|&c| c as i64).sum()
    }

    /// The `2d` nearest neighbours, axis ascending and minus before plus.
    pub fn neighbors(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.dim()).flat_map(move |axis| [self.step(axis, -1), self.step(axis, 1)])
    }

    /// True iff `self` lies in the closed coordinate cuboid spanned by `0` and `x`.
    pub fn precedes(&self, x: &Site) -> bool {
        debug_assert_eq!(self.dim, x.dim);
        self.coords()
            .iter()
            .zip(x.coords())
            .all(|(&y, &x)| y.unsigned_abs() <= x.unsigned_abs() && (x as i64) * (y as i64) >= 0)
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &Site) -> bool {
        self.coords().iter().zip(other.coords()).all(|(a, b)| a <= b)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Serialize for Site {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Site {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i32>::deserialize(d)?;
        Site::new(&v).map_err(serde::de::Error::custom)
    }
}

pub fn l1_norm(x: &Site) -> u64 {
    x.l1_norm()
}

pub fn s_sum(x: &Site) -> i64 {
    x.s_sum()
}

pub fn precedes(y: &Site, x: &Site) -> bool {
    y.precedes(x)
}

pub fn neighbors(x: &Site) -> Vec<Site> {
    x.neighbors().collect()
}

/// Nearest-neighbour bond in canonical form: it joins `base` and
/// `base + unit(axis)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bond {
    base: Site,
    axis: u8,
}

impl Bond {
    pub fn new(base: Site, axis: usize) -> Self {
        debug_assert!(axis < base.dim());
        Bond {
            base,
            axis: axis as u8,
        }
    }

    /// Canonical bond between two adjacent sites.
    pub fn between(x: &Site, y: &Site) -> Result<Self, LatticeError> {
        if x.dim != y.dim {
            return Err(LatticeError::NotAdjacent);
        }
        let mut axis = None;
        for i in 0..x.dim() {
            match (y.coords[i] - x.coords[i]).abs() {
                0 => {}
                1 if axis.is_none() => axis = Some(i),
                _ => return Err(LatticeError::NotAdjacent),
            }
        }
        let axis = axis.ok_or(LatticeError::NotAdjacent)?;
        let base = if x.coords[axis] < y.coords[axis] { *x } else { *y };
        Ok(Bond::new(base, axis))
    }

    /// Canonical bond from `x` in direction `delta = ±1` along `axis`.
    #[inline]
    pub fn from_step(x: &Site, axis: usize, delta: i32) -> Self {
        if delta > 0 {
            Bond::new(*x, axis)
        } else {
            Bond::new(x.step(axis, -1), axis)
        }
    }

    #[inline]
    pub fn base(&self) -> &Site {
        &self.base
    }

    #[inline]
    pub fn axis(&self) -> usize {
        self.axis as usize
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn endpoints(&self) -> (Site, Site) {
        (self.base, self.base.step(self.axis(), 1))
    }

    /// Midpoint in doubled coordinates.
    pub fn midpoint_doubled(&self) -> DoubledPoint {
        let mut p = DoubledPoint::from_site(&self.base);
        p.coords[self.axis()] += 1;
        p
    }
}

/// Closed unit `(d-1)`-cube crossing exactly one bond.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Plaquette {
    dual_bond: Bond,
}

impl Plaquette {
    pub fn dual_bond(&self) -> Bond {
        self.dual_bond
    }

    pub fn dim(&self) -> usize {
        self.dual_bond.dim()
    }

    /// Normal axis; the plaquette lies in the hyperplane
    /// `x[normal] = base[normal] + 1/2`.
    pub fn normal_axis(&self) -> usize {
        self.dual_bond.axis()
    }

    /// Centre in doubled coordinates. Equals the doubled bond midpoint.
    pub fn center_doubled(&self) -> DoubledPoint {
        self.dual_bond.midpoint_doubled()
    }

    /// The `2^(d-1)` corners in doubled coordinates (all coordinates odd).
    pub fn corners_doubled(&self) -> Vec<DoubledPoint> {
        let c = self.center_doubled();
        let d = self.dim();
        let n = self.normal_axis();
        let free: Vec<usize> = (0..d).filter(|&i| i != n).collect();
        (0..1u32 << free.len())
            .map(|mask| {
                let mut p = c;
                for (bit, &axis) in free.iter().enumerate() {
                    p.coords[axis] += if mask >> bit & 1 == 1 { 1 } else { -1 };
                }
                p
            })
            .collect()
    }
}

pub fn dual_plaquette(e: &Bond) -> Plaquette {
    Plaquette { dual_bond: *e }
}

pub fn dual_bond(pi: &Plaquette) -> Bond {
    pi.dual_bond
}

/// Point of `(Z/2)^d` stored as twice its coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct DoubledPoint {
    dim: u8,
    pub(crate) coords: [i64; MAX_DIM],
}

impl DoubledPoint {
    pub fn from_site(x: &Site) -> Self {
        let mut coords = [0i64; MAX_DIM];
        for (c, &v) in coords.iter_mut().zip(x.coords()) {
            *c = 2 * v as i64;
        }
        DoubledPoint { dim: x.dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    /// Twice the l1 norm of the real point.
    pub fn doubled_l1(&self) -> u64 {
        self.coords().iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.coords().iter().map(|&c| c as f64 / 2.0).collect()
    }
}

/// `sup { |x|_1 : x in points }`.
pub fn rad_of(points: &[Vec<f64>]) -> Result<f64, LatticeError> {
    points
        .iter()
        .map(|p| p.iter().map(|c| c.abs()).sum::<f64>())
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .ok_or(LatticeError::EmptySet)
}

/// Upper slope of a cone; `Infinite` is handled symbolically.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Slope {
    Finite(Ratio<i64>),
    Infinite,
}

/// `K_{a,b} = { x : x_1 >= 0, a x_1 <= x_j <= b x_1 for j >= 2 }`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Cone {
    a: Ratio<i64>,
    b: Slope,
}

impl Cone {
    pub fn new(a: Ratio<i64>, b: Slope) -> Result<Self, LatticeError> {
        if a < Ratio::from_integer(0) {
            return Err(LatticeError::InvalidCone("a must be non-negative".into()));
        }
        if let Slope::Finite(b) = b {
            if b <= a {
                return Err(LatticeError::InvalidCone("requires a < b".into()));
            }
        }
        Ok(Cone { a, b })
    }

    /// `K_{a,∞}`.
    pub fn unbounded(a: Ratio<i64>) -> Result<Self, LatticeError> {
        Cone::new(a, Slope::Infinite)
    }

    pub fn a(&self) -> Ratio<i64> {
        self.a
    }

    pub fn b(&self) -> Slope {
        self.b
    }

    pub fn contains(&self, x: &Site) -> bool {
        in_cone(x, self)
    }
}

/// Cone membership in exact rational arithmetic. With `b = ∞` the upper
/// bound is vacuous, so `K_{0,∞}` is the closed non-negative orthant.
pub fn in_cone(x: &Site, c: &Cone) -> bool {
    let x1 = x.coord(0) as i64;
    if x1 < 0 {
        return false;
    }
    let x1r = Ratio::from_integer(x1);
    x.coords()[1..].iter().all(|&xj| {
        let xj = Ratio::from_integer(xj as i64);
        let lower_ok = c.a * x1r <= xj;
        let upper_ok = match c.b {
            Slope::Finite(b) => xj <= b * x1r,
            Slope::Infinite => true,
        };
        lower_ok && upper_ok
    })
}
