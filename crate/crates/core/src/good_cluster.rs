//! The good-path cluster of the origin.
//!
//! A path is good when every step that moves away from the origin in l1 norm
//! crosses an occupied bond; steps towards the origin are free. The cluster
//! `K` is the set of sites reachable from `0` by good paths. It is closed
//! under moves towards the origin, and every bond leaving it is unoccupied,
//! which is what makes its boundary a sphere of unoccupied plaquettes.

use num_traits::ToPrimitive;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{PathError, SawError};
use crate::explore::{explore, Scratch, StepRule, Visit};
use crate::lattice::{check_dim, Bond, Site};
use crate::sampler::BondField;
use crate::saw::{count_saws_upto, default_length_cap};

#[derive(Clone, Debug)]
pub struct ClusterResult {
    pub d: usize,
    pub sites: FxHashSet<Site>,
    pub escaped: bool,
    /// Largest l1 norm among `sites`.
    pub radius: u64,
    /// Truncation radius the cluster was grown with.
    pub r_max: u64,
}

impl ClusterResult {
    /// Builds a result from an explicit site set, e.g. for synthetic tests.
    pub fn from_sites(d: usize, sites: impl IntoIterator<Item = Site>, r_max: u64) -> Self {
        let sites: FxHashSet<Site> = sites.into_iter().collect();
        let radius = sites.iter().map(Site::l1_norm).max().unwrap_or(0);
        ClusterResult {
            d,
            sites,
            escaped: radius >= r_max,
            radius,
            r_max,
        }
    }

    pub fn contains(&self, x: &Site) -> bool {
        self.sites.contains(x)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Sites ordered by l1 norm, then lexicographically.
    pub fn sorted_sites(&self) -> Vec<Site> {
        let mut v: Vec<Site> = self.sites.iter().copied().collect();
        v.sort_by_key(|x| (x.l1_norm(), *x));
        v
    }
}

/// Checks the path rules; an empty or one-site path is good.
pub fn is_good_path<F: BondField + ?Sized>(cfg: &F, path: &[Site]) -> Result<bool, PathError> {
    let mut seen = FxHashSet::default();
    let mut good = true;
    for (i, x) in path.iter().enumerate() {
        if !seen.insert(*x) {
            return Err(PathError::RepeatedSite { index: i });
        }
        if i == 0 {
            continue;
        }
        let prev = &path[i - 1];
        let e = Bond::between(prev, x).map_err(|_| PathError::NotAdjacent { index: i - 1 })?;
        if x.l1_norm() > prev.l1_norm() && !cfg.is_occupied(&e) {
            good = false;
        }
    }
    Ok(good)
}

/// Grows `K` inside the l1 ball of radius `r_max`.
///
/// Sites on the sphere of radius `r_max` are recorded and still explored
/// inwards, so the result is closed under moves towards the origin even when
/// it escaped. If no such site is reached the result is exactly `K`.
pub fn grow_good_cluster<F: BondField + ?Sized>(cfg: &F, r_max: u64) -> ClusterResult {
    let mut scratch = Scratch::default();
    grow_with(cfg, r_max, &mut scratch)
}

pub(crate) fn grow_with<F: BondField + ?Sized>(cfg: &F, r_max: u64, scratch: &mut Scratch) -> ClusterResult {
    let d = cfg.dim();
    let mut escaped = false;
    let mut radius = 0;
    explore(
        cfg,
        Site::origin(d),
        StepRule::Norm,
        |w| w.l1_norm() <= r_max,
        |v| {
            let n = v.l1_norm();
            radius = radius.max(n);
            if n >= r_max {
                escaped = true;
            }
            Visit::Expand
        },
        scratch,
    );
    ClusterResult {
        d,
        sites: std::mem::take(&mut scratch.seen),
        escaped,
        radius,
        r_max,
    }
}

/// Every single step towards the origin from a member stays in the set.
pub fn check_downward_closed(res: &ClusterResult) -> bool {
    sites_downward_closed(&res.sites)
}

pub fn sites_downward_closed(sites: &FxHashSet<Site>) -> bool {
    sites.iter().all(|x| {
        (0..x.dim()).all(|axis| match x.coord(axis).signum() {
            0 => true,
            s => sites.contains(&x.step(axis, -s)),
        })
    })
}

/// Number of good self-avoiding paths from the origin with at most `k_max`
/// steps whose final site has l1 norm exactly `r`.
pub fn count_good_paths<F: BondField + ?Sized>(cfg: &F, r: u64, k_max: usize) -> u64 {
    fn go<F: BondField + ?Sized>(
        cfg: &F,
        v: Site,
        len: usize,
        k_max: usize,
        r: u64,
        on_path: &mut FxHashSet<Site>,
        count: &mut u64,
    ) {
        if len > 0 && v.l1_norm() == r {
            *count += 1;
        }
        if len == k_max {
            return;
        }
        for axis in 0..v.dim() {
            for delta in [-1, 1] {
                let w = v.step(axis, delta);
                if on_path.contains(&w) || !StepRule::Norm.allows(cfg, &v, axis, delta) {
                    continue;
                }
                on_path.insert(w);
                go(cfg, w, len + 1, k_max, r, on_path, count);
                on_path.remove(&w);
            }
        }
    }
    let origin = Site::origin(cfg.dim());
    let mut on_path = FxHashSet::default();
    on_path.insert(origin);
    let mut count = 0;
    go(cfg, origin, 0, k_max, r, &mut on_path, &mut count);
    count
}

/// For every self-avoiding path of length `1..=k_max` from the origin,
/// tallies (number of away steps, final l1 norm). The probability that a
/// fixed path is good is `p^away`.
#[derive(Clone, Debug)]
pub struct AwayStepTally {
    pub d: usize,
    pub k_max: usize,
    counts: FxHashMap<(u32, u64), u64>,
}

impl AwayStepTally {
    pub fn enumerate(d: usize, k_max: usize) -> Result<Self, SawError> {
        check_dim(d)?;
        let cap = default_length_cap(d);
        if k_max > cap {
            return Err(SawError::LengthCap { d, k: k_max, cap });
        }
        fn go(
            v: Site,
            len: usize,
            away: u32,
            k_max: usize,
            on_path: &mut FxHashSet<Site>,
            counts: &mut FxHashMap<(u32, u64), u64>,
        ) {
            if len > 0 {
                *counts.entry((away, v.l1_norm())).or_default() += 1;
            }
            if len == k_max {
                return;
            }
            for w in v.neighbors() {
                if on_path.insert(w) {
                    let a = away + (w.l1_norm() > v.l1_norm()) as u32;
                    go(w, len + 1, a, k_max, on_path, counts);
                    on_path.remove(&w);
                }
            }
        }
        let origin = Site::origin(d);
        let mut on_path = FxHashSet::default();
        on_path.insert(origin);
        let mut counts = FxHashMap::default();
        go(origin, 0, 0, k_max, &mut on_path, &mut counts);
        Ok(AwayStepTally { d, k_max, counts })
    }

    /// Exact `E_p` of the truncated good-path count ending at norm `r`.
    pub fn expectation(&self, p: f64, r: u64) -> f64 {
        let mut terms: Vec<(u32, u64)> = self
            .counts
            .iter()
            .filter(|((_, n), _)| *n == r)
            .map(|(&(a, _), &c)| (a, c))
            .collect();
        terms.sort_unstable();
        terms.iter().map(|&(a, c)| c as f64 * p.powi(a as i32)).sum()
    }
}

pub fn expected_good_paths_truncated(p: f64, d: usize, r: u64, k_max: usize) -> Result<f64, SawError> {
    Ok(AwayStepTally::enumerate(d, k_max)?.expectation(p, r))
}

/// `Σ_{B=0}^{⌊(k_max - r)/2⌋} σ(2B + r) p^(B + r)`.
pub fn path_count_bound(p: f64, d: usize, r: u64, k_max: usize) -> Result<f64, SawError> {
    let sigma = count_saws_upto(d, k_max)?;
    let r = r as usize;
    if r > k_max {
        return Ok(0.0);
    }
    Ok((0..=(k_max - r) / 2)
        .map(|b| sigma[2 * b + r].to_f64().unwrap_or(f64::INFINITY) * p.powi((b + r) as i32))
        .sum())
}
