//! Exact self-avoiding walk counts `σ(k)` on `Z^d`.
//!
//! Walks are enumerated depth-first on a dense occupancy grid of side
//! `2k + 1` centred at the origin, which no walk of length `k` can leave.
//! The enumeration is split over the `2d` first steps and the per-subtree
//! counts are summed, so the result does not depend on scheduling.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SawError;
use crate::lattice::check_dim;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SawCount {
    pub d: usize,
    pub k: usize,
    #[serde(serialize_with = "serialize_big")]
    pub count: BigUint,
}

fn serialize_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Largest walk length enumerated by default in dimension `d`.
pub fn default_length_cap(d: usize) -> usize {
    match d {
        2 => 16,
        3 => 12,
        4 => 9,
        5 => 7,
        _ => 6,
    }
}

fn check_request(d: usize, k: usize, cap: usize) -> Result<(), SawError> {
    check_dim(d)?;
    if k > cap {
        return Err(SawError::LengthCap { d, k, cap });
    }
    Ok(())
}

struct Grid {
    cells: Vec<bool>,
    offsets: Vec<isize>,
    center: usize,
}

impl Grid {
    fn new(d: usize, k: usize) -> Self {
        let side = 2 * k + 1;
        let mut stride = 1usize;
        let mut center = 0usize;
        let mut offsets = Vec::with_capacity(2 * d);
        for _ in 0..d {
            offsets.push(-(stride as isize));
            offsets.push(stride as isize);
            center += k * stride;
            stride *= side;
        }
        Grid {
            cells: vec![false; stride],
            offsets,
            center,
        }
    }
}

fn dfs(grid: &mut Grid, pos: usize, depth: usize, kmax: usize, counts: &mut [u64]) {
    counts[depth] += 1;
    if depth == kmax {
        return;
    }
    for i in 0..grid.offsets.len() {
        let next = (pos as isize + grid.offsets[i]) as usize;
        if !grid.cells[next] {
            grid.cells[next] = true;
            dfs(grid, next, depth + 1, kmax, counts);
            grid.cells[next] = false;
        }
    }
}

/// Counts below one first step; `counts[j]` is the number of walks of
/// length `j` that start with that step.
fn subtree_counts(d: usize, kmax: usize, first_step: usize) -> Vec<u64> {
    let mut grid = Grid::new(d, kmax);
    let mut counts = vec![0u64; kmax + 1];
    let origin = grid.center;
    let first = (origin as isize + grid.offsets[first_step]) as usize;
    grid.cells[origin] = true;
    grid.cells[first] = true;
    dfs(&mut grid, first, 1, kmax, &mut counts);
    counts
}

/// `σ(0), ..., σ(kmax)` with a length cap override.
pub fn count_saws_upto_capped(d: usize, kmax: usize, cap: usize) -> Result<Vec<BigUint>, SawError> {
    check_request(d, kmax, cap)?;
    let mut total = vec![0u64; kmax + 1];
    total[0] = 1;
    if kmax > 0 {
        let per_step: Vec<Vec<u64>> = (0..2 * d)
            .into_par_iter()
            .map(|s| subtree_counts(d, kmax, s))
            .collect();
        for counts in per_step {
            for (t, c) in total.iter_mut().zip(counts) {
                *t += c;
            }
        }
    }
    Ok(total.into_iter().map(BigUint::from).collect())
}

/// `σ(0), ..., σ(kmax)` from one enumeration.
pub fn count_saws_upto(d: usize, kmax: usize) -> Result<Vec<BigUint>, SawError> {
    count_saws_upto_capped(d, kmax, default_length_cap(d))
}

/// Same counts with only the `+e_1` first step enumerated and the result
/// multiplied by `2d`. Must agree with [`count_saws_upto`].
pub fn count_saws_upto_folded(d: usize, kmax: usize) -> Result<Vec<BigUint>, SawError> {
    check_request(d, kmax, default_length_cap(d))?;
    let mut out = vec![BigUint::one()];
    if kmax > 0 {
        let counts = subtree_counts(d, kmax, 1);
        out.extend(counts[1..].iter().map(|&c| BigUint::from(c) * BigUint::from(2 * d)));
    }
    Ok(out)
}

pub fn count_saw(d: usize, k: usize) -> Result<SawCount, SawError> {
    let counts = count_saws_upto(d, k)?;
    Ok(SawCount {
        d,
        k,
        count: counts[k].clone(),
    })
}

/// Non-reversing walk count `2d (2d-1)^(k-1)`, an upper bound on `σ(k)`.
/// Returns 1 for `k = 0`.
pub fn saw_upper_bound(d: usize, k: usize) -> BigUint {
    if k == 0 {
        return BigUint::one();
    }
    BigUint::from(2 * d) * BigUint::from(2 * d - 1).pow((k - 1) as u32)
}

/// `σ(k)^(1/k)`. By submultiplicativity of `σ` this bounds `μ_d` from above.
pub fn mu_upper_estimate(d: usize, k: usize) -> Result<f64, SawError> {
    if k == 0 {
        return Err(SawError::ZeroLength);
    }
    let sigma = count_saw(d, k)?.count;
    Ok(mu_from_count(&sigma, k))
}

pub(crate) fn mu_from_count(sigma: &BigUint, k: usize) -> f64 {
    sigma.to_f64().unwrap_or(f64::INFINITY).powf(1.0 / k as f64)
}
