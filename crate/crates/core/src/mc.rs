//! Monte Carlo tail estimates for the cluster and sphere radii, the explicit
//! exponential bound they are compared with, and binomial intervals.
//!
//! Trial `i` always runs on the configuration derived from
//! `(master_seed, i)`, trials are evaluated in parallel and collected in
//! index order, so a curve is bit-identical for any thread count. Trials whose
//! cluster reaches the truncation radius are counted as hitting every radius.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::BoundError;
use crate::explore::Scratch;
use crate::good_cluster::grow_with;
use crate::sampler::derive_trial_config;
use crate::sphere::{build_boundary, sphere_radius_doubled};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for `hits` successes in `trials` Bernoulli trials.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo.min(phat), hi.max(phat))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TailTarget {
    ClusterRadius,
    SphereRadius,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub p: f64,
    pub d: usize,
    pub target: TailTarget,
    pub r_values: Vec<u64>,
    pub trials: u64,
    pub r_max: u64,
    /// Trials whose cluster reached `r_max`.
    pub escapes: u64,
    pub hits: Vec<u64>,
    pub estimate: Vec<f64>,
    pub wilson_lo: Vec<f64>,
    pub wilson_hi: Vec<f64>,
}

/// Truncation radius used when none is given: four times the largest `r`.
pub fn default_r_max(r_values: &[u64]) -> u64 {
    4 * r_values.iter().copied().max().unwrap_or(1).max(1)
}

/// Doubled radius of one trial, `None` when the cluster escaped.
fn trial_radius(
    d: usize,
    p: f64,
    master_seed: u64,
    index: u64,
    r_max: u64,
    target: TailTarget,
    scratch: &mut Scratch,
) -> Option<u64> {
    let cfg = derive_trial_config(d, master_seed, index, p);
    let cluster = grow_with(&cfg, r_max, scratch);
    if cluster.escaped {
        return None;
    }
    let doubled = match target {
        TailTarget::ClusterRadius => 2 * cluster.radius,
        TailTarget::SphereRadius => {
            sphere_radius_doubled(&build_boundary(&cluster).expect("non-escaped clusters are closed"))
        }
    };
    scratch.seen = cluster.sites;
    Some(doubled)
}

/// Per-trial doubled radii in trial order; `None` marks an escape.
pub fn trial_radii(
    p: f64,
    d: usize,
    trials: u64,
    master_seed: u64,
    target: TailTarget,
    r_max: u64,
) -> Vec<Option<u64>> {
    (0..trials)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, i| {
            trial_radius(d, p, master_seed, i, r_max, target, scratch)
        })
        .collect()
}

pub fn tail_curve(
    p: f64,
    d: usize,
    r_values: &[u64],
    trials: u64,
    master_seed: u64,
    target: TailTarget,
    r_max: u64,
) -> TailCurve {
    let radii = trial_radii(p, d, trials, master_seed, target, r_max);
    tail_from_radii(p, d, r_values, &radii, target, r_max)
}

pub fn tail_from_radii(
    p: f64,
    d: usize,
    r_values: &[u64],
    radii: &[Option<u64>],
    target: TailTarget,
    r_max: u64,
) -> TailCurve {
    let trials = radii.len() as u64;
    let hits: Vec<u64> = r_values
        .iter()
        .map(|&r| radii.iter().filter(|x| x.map_or(true, |v| v >= 2 * r)).count() as u64)
        .collect();
    let intervals: Vec<(f64, f64)> = hits.iter().map(|&h| wilson_interval(h, trials, Z_99)).collect();
    TailCurve {
        p,
        d,
        target,
        r_values: r_values.to_vec(),
        trials,
        r_max,
        escapes: radii.iter().filter(|x| x.is_none()).count() as u64,
        estimate: hits.iter().map(|&h| if trials == 0 { 0.0 } else { h as f64 / trials as f64 }).collect(),
        wilson_lo: intervals.iter().map(|i| i.0).collect(),
        wilson_hi: intervals.iter().map(|i| i.1).collect(),
        hits,
    }
}

/// Tail of the enclosing sphere radius in `d = 3`. Since the sphere meets
/// no occupied bond and encloses the origin, it also encloses the
/// 1-entanglement cluster of the origin; this curve is therefore a
/// stochastic upper bound for that cluster's radius tail.
pub fn entanglement_radius_tail(p: f64, r_values: &[u64], trials: u64, master_seed: u64, r_max: u64) -> TailCurve {
    tail_curve(p, 3, r_values, trials, master_seed, TailTarget::SphereRadius, r_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub p: f64,
    pub d: usize,
    pub alpha: f64,
    pub c_prime: f64,
    pub r_values: Vec<u64>,
    pub values: Vec<f64>,
}

/// Largest `p` (exclusive) for which the explicit constants apply.
pub fn explicit_regime_limit(d: usize) -> f64 {
    let m = (2 * d - 1) as f64;
    1.0 / (m * m)
}

/// `C' α^r` with `α = p(2d-1)` and `C' = 2 / (1 - p(2d-1)^2)`.
pub fn theoretical_bound(p: f64, d: usize, r_values: &[u64]) -> Result<BoundCurve, BoundError> {
    let m = (2 * d - 1) as f64;
    if !(0.0..1.0).contains(&(p * m * m)) {
        return Err(BoundError::OutsideExplicitRegime {
            p,
            d,
            limit: explicit_regime_limit(d),
        });
    }
    let alpha = p * m;
    let c_prime = 2.0 / (1.0 - p * m * m);
    Ok(BoundCurve {
        p,
        d,
        alpha,
        c_prime,
        r_values: r_values.to_vec(),
        values: r_values.iter().map(|&r| c_prime * alpha.powi(r as i32)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub r: u64,
    pub wilson_lo: f64,
    pub bound: f64,
}

/// Radii where the lower confidence limit exceeds the bound.
pub fn compare_tail(t: &TailCurve, b: &BoundCurve) -> Result<Vec<Violation>, BoundError> {
    if t.p != b.p || t.d != b.d || t.r_values != b.r_values {
        return Err(BoundError::Mismatch);
    }
    Ok(t.r_values
        .iter()
        .zip(t.wilson_lo.iter().zip(&b.values))
        .filter(|(_, (lo, bound))| lo > bound)
        .map(|(&r, (&wilson_lo, &bound))| Violation { r, wilson_lo, bound })
        .collect())
}

/// Least-squares slope of `ln estimate` against `r` over points with at
/// least one hit. `None` with fewer than two such points.
pub fn log_slope(t: &TailCurve) -> Option<f64> {
    let pts: Vec<(f64, f64)> = t
        .r_values
        .iter()
        .zip(&t.hits)
        .zip(&t.estimate)
        .filter(|((_, &h), _)| h > 0)
        .map(|((&r, _), &e)| (r as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub slope: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Outside the explicit regime only the decay rate is checked: the fitted
/// log-slope must not exceed `ln(mu_hat * p) + 0.05`.
pub fn slope_check(t: &TailCurve, mu_hat: f64) -> Option<SlopeCheck> {
    let slope = log_slope(t)?;
    let threshold = (mu_hat * t.p).ln() + 0.05;
    Some(SlopeCheck {
        slope,
        threshold,
        passed: slope <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_constants() {
        let b = theoretical_bound(0.03, 3, &[1, 2]).unwrap();
        assert!((b.alpha - 0.15).abs() < 1e-12);
        assert!((b.c_prime - 8.0).abs() < 1e-12);
        let b = theoretical_bound(0.1, 2, &[1]).unwrap();
        assert!((b.alpha - 0.3).abs() < 1e-12);
        assert!((b.c_prime - 20.0).abs() < 1e-9);
        let b = theoretical_bound(0.0, 3, &[0, 1, 5]).unwrap();
        assert_eq!(b.c_prime, 2.0);
        assert_eq!(b.values, vec![2.0, 0.0, 0.0]);
        assert!(theoretical_bound(0.04, 3, &[1]).is_err());
        assert!(theoretical_bound(0.5, 3, &[1]).is_err());
    }

    #[test]
    fn wilson_properties() {
        let (lo, hi) = wilson_interval(0, 100, Z_99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = wilson_interval(100, 100, Z_99);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.9);
        let (lo, hi) = wilson_interval(37, 120, Z_99);
        assert!(lo < 37.0 / 120.0 && 37.0 / 120.0 < hi);
    }

    #[test]
    fn empty_configs_have_trivial_tails() {
        let t = tail_curve(0.0, 3, &[1, 2, 3], 50, 1, TailTarget::ClusterRadius, 12);
        assert!(t.estimate.iter().all(|&e| e == 0.0));
        let t = tail_curve(0.0, 3, &[1, 2], 50, 1, TailTarget::SphereRadius, 12);
        assert_eq!(t.estimate, vec![1.0, 0.0]);
        let t = tail_curve(0.0, 2, &[1, 2], 10, 1, TailTarget::SphereRadius, 12);
        assert_eq!(t.estimate, vec![1.0, 0.0]);
    }

    #[test]
    fn compare_flags_saturated_curve() {
        let radii = vec![None; 40];
        let t = tail_from_radii(0.03, 3, &[1, 2, 3], &radii, TailTarget::ClusterRadius, 10);
        let b = theoretical_bound(0.03, 3, &[1, 2, 3]).unwrap();
        let v = compare_tail(&t, &b).unwrap();
        let flagged: Vec<u64> = v.iter().map(|x| x.r).collect();
        let expected: Vec<u64> = (0..3).filter(|&i| b.values[i] < t.wilson_lo[i]).map(|i| i as u64 + 1).collect();
        assert_eq!(flagged, expected);
        assert!(!flagged.is_empty());
        let other = theoretical_bound(0.02, 3, &[1, 2, 3]).unwrap();
        assert_eq!(compare_tail(&t, &other), Err(BoundError::Mismatch));
    }

    #[test]
    fn slope_of_geometric_curve() {
        let radii: Vec<Option<u64>> = (0..1000u64).map(|i| Some(2 * (i.trailing_zeros() as u64))).collect();
        let t = tail_from_radii(0.1, 2, &[1, 2, 3, 4], &radii, TailTarget::ClusterRadius, 100);
        let s = log_slope(&t).unwrap();
        assert!((s - 0.5f64.ln()).abs() < 0.05, "{s}");
    }
}
