//! Finite-size crossing events and pseudo-critical points.
//!
//! Each variant asks whether a path of its kind leaves the origin and reaches
//! a target shell of size `L` inside a bounded region:
//!
//! | variant    | steps needing an occupied bond | region                  | target           |
//! |------------|--------------------------------|-------------------------|------------------|
//! | `good`     | l1-increasing                  | `‖x‖_1 <= L`            | `‖x‖_1 >= L`     |
//! | `adm`      | `s`-increasing                 | `‖x‖_∞ <= L`            | `s(x) >= L`      |
//! | `admH`     | `s`-increasing                 | `‖x‖_∞ <= L`, `s >= 1`  | `s(x) >= L`      |
//! | `admK`     | `s`-increasing                 | `0 <= x_i <= L`         | `s(x) >= L`      |
//! | `oriented` | all (only `+e_i` steps)        | `0 <= x_i <= L`         | `s(x) >= L`      |
//!
//! The events are nested trial by trial: `oriented ⊆ admK ⊆ admH ⊆ adm` and
//! `admK ⊆ good`.
//!
//! Under the monotone coupling every trial has a threshold
//! `t = min over paths of max u(e)` over the bonds the path needs, and the
//! crossing happens at `p` exactly when `t < p`. Thresholds come from a
//! bottleneck Dijkstra search on a dense grid; bisection then runs on the
//! empirical curve `p -> #{t_i < p} / n`, which equals the Monte Carlo
//! crossing estimate at every `p` for the same trials.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OrientedError;
use crate::explore::{explore, Scratch, StepRule, Visit};
use crate::lattice::{check_dim, Bond, Site, MAX_DIM};
use crate::mc::{wilson_interval, Z_99};
use crate::sampler::{derive_trial_config, BondConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "good")]
    Good,
    #[serde(rename = "adm")]
    Admissible,
    #[serde(rename = "admH")]
    AdmissibleH,
    #[serde(rename = "admK")]
    AdmissibleK,
    #[serde(rename = "oriented")]
    OrientedOcc,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Good,
        Variant::Admissible,
        Variant::AdmissibleH,
        Variant::AdmissibleK,
        Variant::OrientedOcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Good => "good",
            Variant::Admissible => "adm",
            Variant::AdmissibleH => "admH",
            Variant::AdmissibleK => "admK",
            Variant::OrientedOcc => "oriented",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    fn rule(self) -> StepRule {
        match self {
            Variant::Good => StepRule::Norm,
            Variant::OrientedOcc => StepRule::Oriented,
            _ => StepRule::Level,
        }
    }

    fn in_orthant(self) -> bool {
        matches!(self, Variant::AdmissibleK | Variant::OrientedOcc)
    }

    fn admits(self, x: &Site, l: i32) -> bool {
        match self {
            Variant::Good => x.l1_norm() <= l as u64,
            Variant::Admissible => x.linf_norm() <= l as u32,
            Variant::AdmissibleH => x.linf_norm() <= l as u32 && x.s_sum() >= 1,
            Variant::AdmissibleK | Variant::OrientedOcc => x.coords().iter().all(|&c| (0..=l).contains(&c)),
        }
    }

    fn is_target(self, x: &Site, l: i32) -> bool {
        match self {
            Variant::Good => x.l1_norm() >= l as u64,
            _ => x.s_sum() >= l as i64,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_box(l: usize) -> Result<(), OrientedError> {
    if l < 4 {
        return Err(OrientedError::BoxTooSmall(l));
    }
    Ok(())
}

/// Whether trial configuration `cfg` has a crossing for `variant` at size `l`.
pub fn crosses(variant: Variant, cfg: &BondConfig, l: usize) -> bool {
    let l = l as i32;
    let source = Site::origin(cfg_dim(cfg));
    let mut scratch = Scratch::default();
    explore(
        cfg,
        source,
        variant.rule(),
        |w| variant.admits(w, l),
        |v| if variant.is_target(v, l) { Visit::Stop } else { Visit::Expand },
        &mut scratch,
    )
}

fn cfg_dim(cfg: &BondConfig) -> usize {
    use crate::sampler::BondField;
    cfg.dim()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingEstimate {
    pub variant: Variant,
    pub d: usize,
    pub p: f64,
    pub l: usize,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl CrossingEstimate {
    fn new(variant: Variant, d: usize, p: f64, l: usize, trials: u64, hits: u64) -> Self {
        let (wilson_lo, wilson_hi) = wilson_interval(hits, trials, Z_99);
        CrossingEstimate {
            variant,
            d,
            p,
            l,
            trials,
            hits,
            estimate: if trials == 0 { 0.0 } else { hits as f64 / trials as f64 },
            wilson_lo,
            wilson_hi,
        }
    }
}

/// Fraction of trials with a crossing, by direct search at fixed `p`.
pub fn crossing_probability(
    variant: Variant,
    d: usize,
    p: f64,
    l: usize,
    trials: u64,
    master_seed: u64,
) -> Result<CrossingEstimate, OrientedError> {
    check_dim(d)?;
    check_box(l)?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| crosses(variant, &derive_trial_config(d, master_seed, i, p), l))
        .count() as u64;
    Ok(CrossingEstimate::new(variant, d, p, l, trials, hits))
}

/// Dense scratch grid over the box a variant can visit.
struct Grid {
    d: usize,
    lo: i32,
    side: usize,
    cost: Vec<u64>,
    stamp: Vec<u32>,
    generation: u32,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
}

impl Grid {
    fn new(d: usize, variant: Variant, l: i32) -> Self {
        let lo = if variant.in_orthant() { 0 } else { -l };
        let side = (l - lo + 1) as usize;
        let cells = side.pow(d as u32);
        Grid {
            d,
            lo,
            side,
            cost: vec![0; cells],
            stamp: vec![0; cells],
            generation: 0,
            heap: BinaryHeap::new(),
        }
    }

    fn index(&self, x: &Site) -> u32 {
        let mut idx = 0usize;
        for &c in x.coords().iter().rev() {
            idx = idx * self.side + (c - self.lo) as usize;
        }
        idx as u32
    }

    fn site(&self, mut idx: u32) -> Site {
        let mut coords = [0i32; MAX_DIM];
        for c in coords.iter_mut().take(self.d) {
            *c = (idx as usize % self.side) as i32 + self.lo;
            idx /= self.side as u32;
        }
        Site::new(&coords[..self.d]).expect("grid dimension is valid")
    }

    fn get(&self, i: u32) -> u64 {
        if self.stamp[i as usize] == self.generation {
            self.cost[i as usize]
        } else {
            u64::MAX
        }
    }

    fn set(&mut self, i: u32, c: u64) {
        self.stamp[i as usize] = self.generation;
        self.cost[i as usize] = c;
    }
}

// Costs are `0` for paths needing no bond and `bits(u) + 1` otherwise;
// non-negative floats order like their bit patterns.
fn key_of(u: f64) -> u64 {
    u.to_bits() + 1
}

fn threshold_of(key: u64) -> f64 {
    match key {
        0 => -1.0,
        u64::MAX => f64::INFINITY,
        k => f64::from_bits(k - 1),
    }
}

/// Smallest `t` such that `variant` crosses for every `p > t`; `-1` when no
/// occupied bond is needed.
fn threshold(variant: Variant, cfg: &BondConfig, l: i32, grid: &mut Grid) -> f64 {
    grid.generation = grid.generation.wrapping_add(1);
    if grid.generation == 0 {
        grid.stamp.iter_mut().for_each(|s| *s = 0);
        grid.generation = 1;
    }
    grid.heap.clear();
    let rule = variant.rule();
    let source = Site::origin(grid.d);
    let s = grid.index(&source);
    grid.set(s, 0);
    grid.heap.push(Reverse((0, s)));
    while let Some(Reverse((c, i))) = grid.heap.pop() {
        if c > grid.get(i) {
            continue;
        }
        let v = grid.site(i);
        if variant.is_target(&v, l) {
            return threshold_of(c);
        }
        for axis in 0..grid.d {
            for delta in [-1, 1] {
                let w = v.step(axis, delta);
                if !variant.admits(&w, l) {
                    continue;
                }
                let free = match rule {
                    StepRule::Norm => {
                        let x = v.coord(axis);
                        (x > 0 && delta < 0) || (x < 0 && delta > 0)
                    }
                    StepRule::Level => delta < 0,
                    StepRule::Oriented => {
                        if delta < 0 {
                            continue;
                        }
                        false
                    }
                };
                let nc = if free {
                    c
                } else {
                    c.max(key_of(cfg.uniform(&Bond::from_step(&v, axis, delta))))
                };
                let j = grid.index(&w);
                if nc < grid.get(j) {
                    grid.set(j, nc);
                    grid.heap.push(Reverse((nc, j)));
                }
            }
        }
    }
    f64::INFINITY
}

/// Per-trial crossing thresholds in trial order. Trial `i` crosses at `p`
/// exactly when `thresholds[i] < p`.
pub fn crossing_thresholds(
    variant: Variant,
    d: usize,
    l: usize,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<f64>, OrientedError> {
    check_dim(d)?;
    check_box(l)?;
    let li = l as i32;
    Ok((0..trials)
        .into_par_iter()
        .map_init(
            || Grid::new(d, variant, li),
            |grid, i| threshold(variant, &derive_trial_config(d, master_seed, i, 0.0), li, grid),
        )
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalEstimate {
    pub variant: Variant,
    pub d: usize,
    pub l_list: Vec<usize>,
    pub p_hat: Vec<f64>,
    /// 99% distribution-free interval for the median threshold.
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub trials: u64,
    pub tolerance: f64,
    /// `(p, hits)` at each bisection step, per `L`.
    pub evaluations: Vec<Vec<(f64, u64)>>,
    /// Set when a bisection step saw fewer hits at a larger `p`.
    pub non_monotone: Vec<bool>,
}

/// Bisects `[0, 1]` on the crossing fraction until the bracket is no wider
/// than `tol`; the midpoint of the final bracket is returned.
fn bisect(sorted: &[f64], tol: f64) -> (f64, Vec<(f64, u64)>, bool) {
    let n = sorted.len() as u64;
    let hits_at = |p: f64| sorted.partition_point(|&t| t < p) as u64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut evals: Vec<(f64, u64)> = Vec::new();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let h = hits_at(mid);
        evals.push((mid, h));
        if 2 * h >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut by_p = evals.clone();
    by_p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let non_monotone = by_p.windows(2).any(|w| w[1].1 < w[0].1);
    (0.5 * (lo + hi), evals, non_monotone)
}

fn median_interval(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    if sorted.is_empty() {
        return (0.0, 1.0);
    }
    let half = 0.5 * Z_99 * n.sqrt();
    let lo = (0.5 * n - half).floor();
    let hi = (0.5 * n + half).ceil();
    let pick = |k: f64| sorted[(k.max(0.0) as usize).min(sorted.len() - 1)].clamp(0.0, 1.0);
    let ci_lo = if lo < 0.0 { 0.0 } else { pick(lo) };
    let ci_hi = if hi >= n { 1.0 } else { pick(hi) };
    (ci_lo, ci_hi)
}

pub fn estimate_critical(
    variant: Variant,
    d: usize,
    l_list: &[usize],
    trials: u64,
    tol: f64,
    master_seed: u64,
) -> Result<CriticalEstimate, OrientedError> {
    if tol.is_nan() || tol < 1e-3 {
        return Err(OrientedError::ToleranceTooSmall(tol));
    }
    check_dim(d)?;
    for &l in l_list {
        check_box(l)?;
    }
    let mut out = CriticalEstimate {
        variant,
        d,
        l_list: l_list.to_vec(),
        p_hat: Vec::new(),
        ci_lo: Vec::new(),
        ci_hi: Vec::new(),
        trials,
        tolerance: tol,
        evaluations: Vec::new(),
        non_monotone: Vec::new(),
    };
    for &l in l_list {
        let mut t = crossing_thresholds(variant, d, l, trials, master_seed)?;
        t.sort_by(|a, b| a.total_cmp(b));
        let (p_hat, evals, flag) = bisect(&t, tol);
        let (lo, hi) = median_interval(&t);
        out.p_hat.push(p_hat);
        out.ci_lo.push(lo);
        out.ci_hi.push(hi);
        out.evaluations.push(evals);
        out.non_monotone.push(flag);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        for v in Variant::ALL {
            let one = crossing_probability(v, 2, 1.0, 8, 20, 3).unwrap();
            assert_eq!(one.hits, 20, "{v}");
            let zero = crossing_probability(v, 2, 0.0, 8, 20, 3).unwrap();
            assert_eq!(zero.hits, 0, "{v}");
        }
    }

    #[test]
    fn thresholds_match_direct_search() {
        for v in Variant::ALL {
            let t = crossing_thresholds(v, 2, 10, 200, 11).unwrap();
            for p in [0.2, 0.35, 0.5, 0.65] {
                let direct = crossing_probability(v, 2, p, 10, 200, 11).unwrap().hits;
                let from_t = t.iter().filter(|&&x| x < p).count() as u64;
                assert_eq!(direct, from_t, "{v} p={p}");
            }
        }
    }

    #[test]
    fn nested_thresholds() {
        let get = |v| crossing_thresholds(v, 2, 12, 300, 5).unwrap();
        let (g, a, h, k, o) = (
            get(Variant::Good),
            get(Variant::Admissible),
            get(Variant::AdmissibleH),
            get(Variant::AdmissibleK),
            get(Variant::OrientedOcc),
        );
        for i in 0..300 {
            assert!(a[i] <= h[i] && h[i] <= k[i] && k[i] <= o[i]);
            assert!(g[i] <= k[i]);
        }
    }

    #[test]
    fn bisection_width_and_range() {
        let est = estimate_critical(Variant::Good, 2, &[8, 16], 100, 5e-3, 1).unwrap();
        for (i, &p) in est.p_hat.iter().enumerate() {
            assert!((0.0..=1.0).contains(&p));
            let last = est.evaluations[i].len();
            assert!(0.5f64.powi(last as i32) <= 5e-3);
            assert!(est.ci_lo[i] <= est.ci_hi[i]);
            assert!(!est.non_monotone[i]);
        }
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            estimate_critical(Variant::Good, 2, &[8], 10, 1e-4, 0),
            Err(OrientedError::ToleranceTooSmall(_))
        ));
        assert!(matches!(
            crossing_probability(Variant::Good, 2, 0.5, 3, 10, 0),
            Err(OrientedError::BoxTooSmall(3))
        ));
        assert_eq!(Variant::parse("admH"), Some(Variant::AdmissibleH));
    }
}
