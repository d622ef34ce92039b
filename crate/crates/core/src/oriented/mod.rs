//! Admissible and oriented reachability on `Z^d`, critical-point estimation,
//! planar duality and the cone skeleton used for oriented percolation in
//! sub-cones.
//!
//! A path is admissible when every step that raises the coordinate sum
//! `s(x)` crosses an occupied bond; an oriented occupied path only moves in
//! `+e_i` directions over occupied bonds. Oriented occupied paths are
//! admissible, and inside the orthant admissible paths are good, which gives
//! the containments the tests in this module rely on.

pub mod critical;
pub mod dual2d;
pub mod skeleton;

use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::explore::{explore, Scratch, StepRule, Visit};
use crate::lattice::{in_cone, Cone, Site};
use crate::sampler::BondField;

pub use critical::{
    crossing_probability, crossing_thresholds, estimate_critical, CriticalEstimate, CrossingEstimate, Variant,
};
pub use dual2d::{
    annulus_circuit, annulus_probability, dual2d_blocking, AnnulusEstimate, dual2d_exhaustive, dual2d_monte_carlo, primal_h_escape,
    Dual2dReport, DualWindow,
};
pub use skeleton::{black_sites, default_alpha_beta, renormalization_skeleton, Skeleton, SkeletonParams};

/// Region a search is confined to.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionSpec {
    All,
    /// `s(x) >= 1`; the source of a search is exempt.
    HalfspaceHplus,
    /// `x_i >= 0` for all `i`.
    OrthantK,
    Cone(Cone),
    /// Closed coordinate box `lo <= x <= hi`.
    Box { lo: Site, hi: Site },
}

impl RegionSpec {
    pub fn contains(&self, x: &Site) -> bool {
        match self {
            RegionSpec::All => true,
            RegionSpec::HalfspaceHplus => x.s_sum() >= 1,
            RegionSpec::OrthantK => x.coords().iter().all(|&c| c >= 0),
            RegionSpec::Cone(c) => in_cone(x, c),
            RegionSpec::Box { lo, hi } => lo.dominated_by(x) && x.dominated_by(hi),
        }
    }
}

fn within_cap(source: &Site, x: &Site, cap: u32) -> bool {
    x.sub(source).linf_norm() <= cap
}

fn reach_set<F: BondField + ?Sized>(
    cfg: &F,
    source: Site,
    rule: StepRule,
    region: &RegionSpec,
    step_cap: u32,
) -> FxHashSet<Site> {
    let mut scratch = Scratch::default();
    explore(
        cfg,
        source,
        rule,
        |w| within_cap(&source, w, step_cap) && region.contains(w),
        |_| Visit::Expand,
        &mut scratch,
    );
    scratch.seen
}

fn reach_any<F, T>(cfg: &F, source: Site, rule: StepRule, region: &RegionSpec, targets: T, step_cap: u32) -> bool
where
    F: BondField + ?Sized,
    T: Fn(&Site) -> bool,
{
    let mut scratch = Scratch::default();
    explore(
        cfg,
        source,
        rule,
        |w| within_cap(&source, w, step_cap) && region.contains(w),
        |v| if targets(v) { Visit::Stop } else { Visit::Expand },
        &mut scratch,
    )
}

/// Sites reachable from `source` by admissible paths inside `region` and the
/// l∞ box of radius `step_cap` around `source`.
pub fn admissible_reach_set<F: BondField + ?Sized>(
    cfg: &F,
    source: Site,
    region: &RegionSpec,
    step_cap: u32,
) -> FxHashSet<Site> {
    reach_set(cfg, source, StepRule::Level, region, step_cap)
}

/// Whether an admissible path from `source` inside `region` (and the cap box)
/// reaches a site satisfying `targets`.
pub fn admissible_reach<F, T>(cfg: &F, source: Site, region: &RegionSpec, targets: T, step_cap: u32) -> bool
where
    F: BondField + ?Sized,
    T: Fn(&Site) -> bool,
{
    reach_any(cfg, source, StepRule::Level, region, targets, step_cap)
}

pub fn oriented_reach_set<F: BondField + ?Sized>(
    cfg: &F,
    source: Site,
    region: &RegionSpec,
    step_cap: u32,
) -> FxHashSet<Site> {
    reach_set(cfg, source, StepRule::Oriented, region, step_cap)
}

pub fn oriented_reach<F, T>(cfg: &F, source: Site, region: &RegionSpec, targets: T, step_cap: u32) -> bool
where
    F: BondField + ?Sized,
    T: Fn(&Site) -> bool,
{
    reach_any(cfg, source, StepRule::Oriented, region, targets, step_cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RadiusR {
    /// Largest `n <= n_max` with an admissible path from `0` to `n e`.
    pub value: u32,
    /// `value == n_max`; the true supremum may be larger.
    pub censored: bool,
}

/// Finite proxy for `sup { n : 0 ->a n(1,...,1) }`. Searches inside `region`
/// intersected with the l∞ box of radius `2 n_max` around the origin.
pub fn estimate_r_in<F: BondField + ?Sized>(cfg: &F, n_max: u32, region: &RegionSpec) -> RadiusR {
    let d = cfg.dim();
    let reached = admissible_reach_set(cfg, Site::origin(d), region, 2 * n_max);
    let value = (1..=n_max as i32)
        .rev()
        .find(|&n| reached.contains(&Site::diagonal(d, n)))
        .unwrap_or(0) as u32;
    RadiusR {
        value,
        censored: value == n_max,
    }
}

pub fn estimate_r<F: BondField + ?Sized>(cfg: &F, n_max: u32) -> RadiusR {
    estimate_r_in(cfg, n_max, &RegionSpec::All)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::BondConfig;

    fn s(c: &[i32]) -> Site {
        Site::new(c).unwrap()
    }

    #[test]
    fn full_config_reaches_region() {
        let cfg = BondConfig::new(2, 1.0, 0);
        let set = admissible_reach_set(&cfg, Site::origin(2), &RegionSpec::All, 3);
        assert_eq!(set.len(), 49);
        let set = oriented_reach_set(&cfg, Site::origin(2), &RegionSpec::All, 3);
        assert_eq!(set.len(), 16);
        assert!(set.iter().all(|x| Site::origin(2).dominated_by(x)));
    }

    #[test]
    fn empty_config_only_moves_down() {
        let cfg = BondConfig::new(2, 0.0, 0);
        let set = admissible_reach_set(&cfg, Site::origin(2), &RegionSpec::All, 3);
        assert_eq!(set.len(), 16);
        assert!(set.iter().all(|x| x.dominated_by(&Site::origin(2))));
        assert!(!set.contains(&s(&[1, -1])));
        let set = oriented_reach_set(&cfg, Site::origin(2), &RegionSpec::All, 3);
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn halfspace_exempts_source() {
        let cfg = BondConfig::new(2, 1.0, 0);
        let set = admissible_reach_set(&cfg, Site::origin(2), &RegionSpec::HalfspaceHplus, 2);
        assert!(set.contains(&Site::origin(2)));
        assert!(set.iter().filter(|x| !x.is_origin()).all(|x| x.s_sum() >= 1));
    }

    #[test]
    fn radius_extremes() {
        let full = estimate_r(&BondConfig::new(2, 1.0, 0), 6);
        assert_eq!(full, RadiusR { value: 6, censored: true });
        let empty = estimate_r(&BondConfig::new(3, 0.0, 0), 6);
        assert_eq!(empty, RadiusR { value: 0, censored: false });
    }

    #[test]
    fn region_membership() {
        let b = RegionSpec::Box {
            lo: s(&[-1, 0]),
            hi: s(&[2, 2]),
        };
        assert!(b.contains(&s(&[-1, 2])));
        assert!(!b.contains(&s(&[3, 0])));
        assert!(RegionSpec::OrthantK.contains(&s(&[0, 4])));
        assert!(!RegionSpec::HalfspaceHplus.contains(&s(&[2, -2])));
    }
}
