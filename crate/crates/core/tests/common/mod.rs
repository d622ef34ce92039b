//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rustc_hash::FxHashSet;

use plaq::lattice::{Bond, Site};
use plaq::sampler::{BondField, ExplicitConfig};

pub fn site(c: &[i32]) -> Site {
    Site::new(c).unwrap()
}

/// `counts[j]` is the number of self-avoiding walks of length `j`, found by
/// plain recursion over a hash set of visited sites.
pub fn saw_brute(d: usize, k: usize) -> Vec<u64> {
    fn go(d: usize, left: usize, at: Site, seen: &mut FxHashSet<Site>, counts: &mut [u64], depth: usize) {
        counts[depth] += 1;
        if left == 0 {
            return;
        }
        for axis in 0..d {
            for delta in [-1, 1] {
                let next = at.step(axis, delta);
                if seen.insert(next) {
                    go(d, left - 1, next, seen, counts, depth + 1);
                    seen.remove(&next);
                }
            }
        }
    }
    let mut counts = vec![0u64; k + 1];
    let mut seen = FxHashSet::default();
    let o = Site::origin(d);
    seen.insert(o);
    go(d, k, o, &mut seen, &mut counts, 0);
    counts
}

/// Bonds of `[-1,1]^2` plus `(1,0)-(2,0)` and `(0,1)-(0,2)`.
pub fn window14() -> Vec<Bond> {
    let mut w = Vec::new();
    for x in -1..=1 {
        for y in -1..=1 {
            if x < 1 {
                w.push(Bond::new(site(&[x, y]), 0));
            }
            if y < 1 {
                w.push(Bond::new(site(&[x, y]), 1));
            }
        }
    }
    w.push(Bond::new(site(&[1, 0]), 0));
    w.push(Bond::new(site(&[0, 1]), 1));
    assert_eq!(w.len(), 14);
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Good,
    Admissible,
    Oriented,
}

fn step_ok(cfg: &ExplicitConfig, rule: Rule, from: &Site, to: &Site) -> bool {
    let open = || cfg.is_occupied(&Bond::between(from, to).unwrap());
    match rule {
        Rule::Good => to.l1_norm() < from.l1_norm() || open(),
        Rule::Admissible => to.s_sum() < from.s_sum() || open(),
        Rule::Oriented => to.s_sum() > from.s_sum() && open(),
    }
}

/// Endpoints of all self-avoiding paths from the origin obeying `rule`
/// inside the box `[lo, hi]^2`.
pub fn enumerate_paths(cfg: &ExplicitConfig, rule: Rule, lo: i32, hi: i32) -> FxHashSet<Site> {
    fn go(cfg: &ExplicitConfig, rule: Rule, lo: i32, hi: i32, path: &mut Vec<Site>, out: &mut FxHashSet<Site>) {
        let at = *path.last().unwrap();
        out.insert(at);
        for n in at.neighbors().collect::<Vec<_>>() {
            if n.coords().iter().any(|&c| c < lo || c > hi) || path.contains(&n) {
                continue;
            }
            if step_ok(cfg, rule, &at, &n) {
                path.push(n);
                go(cfg, rule, lo, hi, path, out);
                path.pop();
            }
        }
    }
    let mut out = FxHashSet::default();
    go(cfg, rule, lo, hi, &mut vec![Site::origin(2)], &mut out);
    out
}

/// Reach sets of every configuration of [`window14`], closure against
/// enumeration. Returns the first mismatching mask.
pub fn window14_mismatch() -> Option<(u64, Rule)> {
    use plaq::good_cluster::grow_good_cluster;
    use plaq::oriented::{admissible_reach_set, oriented_reach_set, RegionSpec};
    let w = window14();
    let bx = RegionSpec::Box {
        lo: site(&[-1, -1]),
        hi: site(&[2, 2]),
    };
    for mask in 0..1u64 << w.len() {
        let cfg = ExplicitConfig::from_mask(2, &w, mask, false);
        if grow_good_cluster(&cfg, 10).sites != enumerate_paths(&cfg, Rule::Good, -1, 2) {
            return Some((mask, Rule::Good));
        }
        if admissible_reach_set(&cfg, Site::origin(2), &bx, 10) != enumerate_paths(&cfg, Rule::Admissible, -1, 2) {
            return Some((mask, Rule::Admissible));
        }
        if oriented_reach_set(&cfg, Site::origin(2), &bx, 10) != enumerate_paths(&cfg, Rule::Oriented, -1, 2) {
            return Some((mask, Rule::Oriented));
        }
    }
    None
}
