//! Block skeleton for oriented percolation inside a planar cone `K_{a,b}`.
//!
//! With `r = r2/r1` and `s = s2/s1` in lowest terms and integers `α, β` such
//! that `s1/r1 < β/α < s2/r2`, the vectors `R = β(r1, r2)` and
//! `S = α(s1, s2)` satisfy `R_1 > S_1` and `R_2 < S_2`. The oriented graph
//! `π` joins `0` to both:
//!
//! 1. `0 -> (α s1, 0)` horizontally,
//! 2. `(α s1, 0) -> S` vertically,
//! 3. `(α s1, β r2) -> R` horizontally.
//!
//! Translates `v + iR + jS` of `π` use disjoint bond sets, so their
//! all-occupied events are independent.

use num_integer::Integer;
use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::OrientedError;
use crate::lattice::{in_cone, Bond, Cone, Site, Slope};
use crate::sampler::BondField;

/// Base-site search covers `x_1 < k0 + SEARCH_BOUND`.
pub const SEARCH_BOUND: i32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkeletonParams {
    pub a: Ratio<i64>,
    pub b: Slope,
    pub r: Ratio<i64>,
    pub s: Ratio<i64>,
    pub alpha: i64,
    pub beta: i64,
    pub extent: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skeleton {
    pub v: Site,
    pub r_vec: [i64; 2],
    pub s_vec: [i64; 2],
    /// Bonds of `π` as `[x, y, axis]`.
    pub pi_bonds: Vec<[i64; 3]>,
    pub n_bonds: usize,
    pub extent: usize,
    /// Row-major `v_{i,j}`, index `i * extent + j`.
    pub sites: Vec<Site>,
    pub all_in_cone: bool,
    pub disjoint: bool,
    pub pairs_checked: u64,
    #[serde(skip)]
    pi: Vec<Bond>,
}

impl Skeleton {
    pub fn pi(&self) -> &[Bond] {
        &self.pi
    }

    /// Bonds of `v_{i,j} + π`.
    pub fn block_bonds(&self, i: usize, j: usize) -> Vec<Bond> {
        let v = self.sites[i * self.extent + j];
        self.pi.iter().map(|e| Bond::new(e.base().add(&v), e.axis())).collect()
    }
}

fn site(x: i64, y: i64) -> Result<Site, OrientedError> {
    let cx = i32::try_from(x).map_err(|_| OrientedError::SkeletonPrecondition(format!("coordinate {x} overflows")))?;
    let cy = i32::try_from(y).map_err(|_| OrientedError::SkeletonPrecondition(format!("coordinate {y} overflows")))?;
    Ok(Site::new(&[cx, cy])?)
}

fn check_params(p: &SkeletonParams) -> Result<(), OrientedError> {
    let fail = |m: String| Err(OrientedError::SkeletonPrecondition(m));
    if p.a < Ratio::from_integer(0) {
        return fail(format!("a = {} must be non-negative", p.a));
    }
    if !(p.a < p.r) {
        return fail(format!("requires a < r (a = {}, r = {})", p.a, p.r));
    }
    if !(p.r < p.s) {
        return fail(format!("requires r < s (r = {}, s = {})", p.r, p.s));
    }
    if let Slope::Finite(b) = p.b {
        if !(p.s < b) {
            return fail(format!("requires s < b (s = {}, b = {b})", p.s));
        }
    }
    if p.alpha < 1 || p.beta < 1 {
        return fail("alpha and beta must be positive".into());
    }
    let (r2, r1) = (*p.r.numer(), *p.r.denom());
    let (s2, s1) = (*p.s.numer(), *p.s.denom());
    if !(s1 * p.alpha < p.beta * r1 && p.beta * r2 < p.alpha * s2) {
        return fail(format!(
            "requires s1/r1 < beta/alpha < s2/r2 ({s1}/{r1} < {}/{} < {s2}/{r2})",
            p.beta, p.alpha
        ));
    }
    Ok(())
}

/// First column from which consecutive columns of `K_{a,b}` share a row.
fn first_connected_column(a: Ratio<i64>, b: Slope) -> i64 {
    match b {
        Slope::Infinite => 0,
        Slope::Finite(b) => ((Ratio::from_integer(1) + a) / (b - a)).ceil().to_integer(),
    }
}

fn pi_bonds(alpha: i64, beta: i64, r1: i64, r2: i64, s1: i64, s2: i64) -> Result<Vec<Bond>, OrientedError> {
    let mut out = Vec::new();
    for x in 0..alpha * s1 {
        out.push(Bond::new(site(x, 0)?, 0));
    }
    for y in 0..alpha * s2 {
        out.push(Bond::new(site(alpha * s1, y)?, 1));
    }
    for x in alpha * s1..beta * r1 {
        out.push(Bond::new(site(x, beta * r2)?, 0));
    }
    Ok(out)
}

fn block_in_cone(pi: &[Bond], v: &Site, cone: &Cone, k0: i64) -> bool {
    pi.iter().all(|e| {
        let (x, y) = e.endpoints();
        [x, y].iter().all(|z| {
            let z = z.add(v);
            z.coord(0) as i64 >= k0 && in_cone(&z, cone)
        })
    })
}

pub fn renormalization_skeleton(params: SkeletonParams) -> Result<Skeleton, OrientedError> {
    check_params(&params)?;
    let cone = Cone::new(params.a, params.b)?;
    let (r2, r1) = (*params.r.numer(), *params.r.denom());
    let (s2, s1) = (*params.s.numer(), *params.s.denom());
    let (alpha, beta) = (params.alpha, params.beta);
    let r_vec = [beta * r1, beta * r2];
    let s_vec = [alpha * s1, alpha * s2];
    let pi = pi_bonds(alpha, beta, r1, r2, s1, s2)?;
    let k0 = first_connected_column(params.a, params.b);

    let mut base = None;
    'search: for x in k0..k0 + SEARCH_BOUND as i64 {
        let y_lo = (params.a * Ratio::from_integer(x)).ceil().to_integer();
        let y_hi = match params.b {
            Slope::Finite(b) => (b * Ratio::from_integer(x)).floor().to_integer(),
            Slope::Infinite => y_lo + SEARCH_BOUND as i64,
        };
        for y in y_lo..=y_hi {
            let v = site(x, y)?;
            if block_in_cone(&pi, &v, &cone, k0) {
                base = Some(v);
                break 'search;
            }
        }
    }
    let v = base.ok_or(OrientedError::NoBaseSite(SEARCH_BOUND))?;

    let n = params.extent;
    let mut sites = Vec::with_capacity(n * n);
    for i in 0..n as i64 {
        for j in 0..n as i64 {
            sites.push(site(
                v.coord(0) as i64 + i * r_vec[0] + j * s_vec[0],
                v.coord(1) as i64 + i * r_vec[1] + j * s_vec[1],
            )?);
        }
    }
    let all_in_cone = sites.iter().all(|w| block_in_cone(&pi, w, &cone, k0));

    let mut owner: FxHashMap<Bond, usize> = FxHashMap::default();
    let mut disjoint = true;
    for (k, w) in sites.iter().enumerate() {
        for e in &pi {
            let moved = Bond::new(e.base().add(w), e.axis());
            if let Some(prev) = owner.insert(moved, k) {
                if prev != k {
                    disjoint = false;
                }
            }
        }
    }
    let m = (n * n) as u64;
    Ok(Skeleton {
        v,
        r_vec,
        s_vec,
        pi_bonds: pi
            .iter()
            .map(|e| [e.base().coord(0) as i64, e.base().coord(1) as i64, e.axis() as i64])
            .collect(),
        n_bonds: pi.len(),
        extent: n,
        sites,
        all_in_cone,
        disjoint,
        pairs_checked: m * m.saturating_sub(1) / 2,
        pi,
    })
}

/// `v_{i,j}` is black when every bond of `v_{i,j} + π` is occupied.
pub fn black_sites<F: BondField + ?Sized>(cfg: &F, sk: &Skeleton) -> Vec<bool> {
    sk.sites
        .iter()
        .map(|w| {
            sk.pi
                .iter()
                .all(|e| cfg.is_occupied(&Bond::new(e.base().add(w), e.axis())))
        })
        .collect()
}

/// Smallest `(α, β)` by `α + β` satisfying the slope inequality.
pub fn default_alpha_beta(r: Ratio<i64>, s: Ratio<i64>) -> Option<(i64, i64)> {
    let (r2, r1) = (*r.numer(), *r.denom());
    let (s2, s1) = (*s.numer(), *s.denom());
    (2..=2048i64).find_map(|total| {
        (1..total).find_map(|alpha| {
            let beta = total - alpha;
            (s1 * alpha < beta * r1 && beta * r2 < alpha * s2 && alpha.gcd(&beta) == 1).then_some((alpha, beta))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    fn params(extent: usize) -> SkeletonParams {
        SkeletonParams {
            a: q(0, 1),
            b: Slope::Infinite,
            r: q(1, 2),
            s: q(2, 1),
            alpha: 1,
            beta: 1,
            extent,
        }
    }

    #[test]
    fn quadrant_skeleton() {
        let sk = renormalization_skeleton(params(10)).unwrap();
        assert_eq!(sk.r_vec, [2, 1]);
        assert_eq!(sk.s_vec, [1, 2]);
        assert_eq!(sk.n_bonds, 4);
        assert!(sk.all_in_cone && sk.disjoint);
        assert_eq!(sk.pairs_checked, 4950);
        assert!(sk.r_vec[0] > sk.s_vec[0] && sk.r_vec[1] < sk.s_vec[1]);
    }

    #[test]
    fn rejects_bad_order() {
        let p = SkeletonParams {
            a: q(1, 2),
            b: Slope::Finite(q(2, 1)),
            r: q(1, 3),
            ..params(3)
        };
        assert!(matches!(renormalization_skeleton(p), Err(OrientedError::SkeletonPrecondition(_))));
        let p = SkeletonParams { alpha: 1, beta: 3, ..params(3) };
        assert!(matches!(renormalization_skeleton(p), Err(OrientedError::SkeletonPrecondition(_))));
    }

    #[test]
    fn finite_cone() {
        let p = SkeletonParams {
            a: q(1, 4),
            b: Slope::Finite(q(3, 1)),
            r: q(1, 2),
            s: q(2, 1),
            alpha: 1,
            beta: 1,
            extent: 6,
        };
        let sk = renormalization_skeleton(p).unwrap();
        assert!(sk.all_in_cone && sk.disjoint);
        assert!(sk.v.coord(0) >= 1);
    }

    #[test]
    fn alpha_beta_search() {
        assert_eq!(default_alpha_beta(q(1, 2), q(2, 1)), Some((1, 1)));
        let (a, b) = default_alpha_beta(q(2, 3), q(3, 4)).unwrap();
        assert!(4 * a < b * 3 && b * 2 < a * 3);
    }
}
