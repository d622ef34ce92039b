//! Planar duality between admissible escapes in the upper half-plane and
//! directed open dual paths.
//!
//! Dual site `(a, b)` stands for `(a + ½, b + ½)`. A dual bond is open when
//! the primal bond it crosses is unoccupied. Dual paths move right or down;
//! both moves raise `a - b` by one.
//!
//! * right `(a, b) -> (a + 1, b)` crosses the primal bond `(a+1, b)–(a+1, b+1)`
//! * down `(a, b) -> (a, b - 1)` crosses the primal bond `(a, b)–(a+1, b)`
//!
//! The finite window keeps the bonds between sites of
//! `{0} ∪ {x : 1 <= s(x) <= m, |x_1 - x_2| <= w}` random. Every other bond is
//! occupied when its upper endpoint has level above `m` and unoccupied
//! otherwise, so escape means reaching level `m + 1` and a blocking dual path
//! has to run through the window.

use std::collections::VecDeque;

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::OrientedError;
use crate::lattice::{Bond, Site};
use crate::mc::{wilson_interval, Z_99};
use crate::sampler::{derive_trial_config, BondField, ExplicitConfig};

use super::{admissible_reach, RegionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DualWindow {
    pub levels: i32,
    pub half_width: i32,
}

impl Default for DualWindow {
    fn default() -> Self {
        DualWindow {
            levels: 4,
            half_width: 2,
        }
    }
}

impl DualWindow {
    pub fn new(levels: i32, half_width: i32) -> Self {
        DualWindow { levels, half_width }
    }

    pub fn contains_site(&self, x: &Site) -> bool {
        let s = x.s_sum();
        x.is_origin() || ((1..=self.levels as i64).contains(&s) && (x.coord(0) - x.coord(1)).abs() <= self.half_width)
    }

    pub fn contains_bond(&self, e: &Bond) -> bool {
        let (x, y) = e.endpoints();
        self.contains_site(&x) && self.contains_site(&y)
    }

    /// Random bonds of the window in a fixed order (base, then axis).
    pub fn bonds(&self) -> Vec<Bond> {
        let r = self.levels;
        let mut out = Vec::new();
        for x in -1..=r {
            for y in -1..=r {
                for axis in 0..2 {
                    let e = Bond::new(Site::new(&[x, y]).expect("d = 2"), axis);
                    if self.contains_bond(&e) {
                        out.push(e);
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn radius(&self) -> i32 {
        self.levels + self.half_width + 2
    }
}

/// `cfg` inside the window, the fixed boundary convention outside it.
struct WindowField<'a, F: ?Sized> {
    inner: &'a F,
    window: DualWindow,
}

impl<F: BondField + ?Sized> BondField for WindowField<'_, F> {
    fn dim(&self) -> usize {
        2
    }

    fn is_occupied(&self, e: &Bond) -> bool {
        if self.window.contains_bond(e) {
            return self.inner.is_occupied(e);
        }
        let (_, upper) = e.endpoints();
        upper.s_sum() > self.window.levels as i64
    }
}

fn check_planar<F: BondField + ?Sized>(cfg: &F) -> Result<(), OrientedError> {
    match cfg.dim() {
        2 => Ok(()),
        d => Err(OrientedError::PlanarOnly(d)),
    }
}

/// Admissible escape from `0` through `H_+` to level `m + 1`.
pub fn primal_h_escape<F: BondField + ?Sized>(cfg: &F, window: DualWindow) -> Result<bool, OrientedError> {
    check_planar(cfg)?;
    let field = WindowField { inner: cfg, window };
    let top = window.levels as i64 + 1;
    Ok(admissible_reach(
        &field,
        Site::origin(2),
        &RegionSpec::HalfspaceHplus,
        |x| x.s_sum() >= top,
        window.radius() as u32,
    ))
}

fn right_bond(a: i32, b: i32) -> Bond {
    Bond::new(Site::new(&[a + 1, b]).expect("d = 2"), 1)
}

fn down_bond(a: i32, b: i32) -> Bond {
    Bond::new(Site::new(&[a, b]).expect("d = 2"), 0)
}

/// Directed open dual path from `D^+` to `D^-` inside the dual half-plane,
/// with `D^±` truncated to `|u| <= m + w + 2`.
pub fn dual2d_blocking<F: BondField + ?Sized>(cfg: &F, window: DualWindow) -> Result<bool, OrientedError> {
    check_planar(cfg)?;
    let field = WindowField { inner: cfg, window };
    let u_max = window.radius();
    let t_max = 2 * u_max + 1;
    let top = window.levels + 1;
    // dual level of (a, b) is a + b + 1
    let admit = |a: i32, b: i32| {
        let lvl = a + b + 1;
        (0..=top).contains(&lvl) && (a - b).abs() <= t_max
    };
    let is_target = |a: i32, b: i32| a >= 0 && b == -a - 1;
    let mut seen: FxHashSet<(i32, i32)> = FxHashSet::default();
    let mut queue = VecDeque::new();
    for u in 0..=u_max {
        let src = (-u - 1, u);
        seen.insert(src);
        queue.push_back(src);
    }
    while let Some((a, b)) = queue.pop_front() {
        if is_target(a, b) {
            return Ok(true);
        }
        let moves = [((a + 1, b), right_bond(a, b)), ((a, b - 1), down_bond(a, b))];
        for (next, crossed) in moves {
            if !admit(next.0, next.1) || seen.contains(&next) || field.is_occupied(&crossed) {
                continue;
            }
            seen.insert(next);
            queue.push_back(next);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dual2dReport {
    pub mode: String,
    pub levels: i32,
    pub half_width: i32,
    pub window_bonds: usize,
    pub configurations: u64,
    pub escapes: u64,
    pub blockings: u64,
    /// Configurations where both or neither event held.
    pub exceptions: u64,
    pub first_exception: Option<u64>,
}

fn tally<I>(mode: &str, window: DualWindow, n_bonds: usize, outcomes: I) -> Dual2dReport
where
    I: Iterator<Item = (u64, bool, bool)>,
{
    let mut rep = Dual2dReport {
        mode: mode.to_string(),
        levels: window.levels,
        half_width: window.half_width,
        window_bonds: n_bonds,
        configurations: 0,
        escapes: 0,
        blockings: 0,
        exceptions: 0,
        first_exception: None,
    };
    for (i, escape, block) in outcomes {
        rep.configurations += 1;
        rep.escapes += escape as u64;
        rep.blockings += block as u64;
        if escape == block {
            rep.exceptions += 1;
            rep.first_exception.get_or_insert(i);
        }
    }
    rep
}

/// Checks escape XOR blocking on every configuration of the window bonds.
pub fn dual2d_exhaustive(window: DualWindow) -> Dual2dReport {
    let bonds = window.bonds();
    assert!(bonds.len() <= 24, "window too large for exhaustive enumeration");
    let outcomes: Vec<(u64, bool, bool)> = (0..1u64 << bonds.len())
        .into_par_iter()
        .map(|mask| {
            let cfg = ExplicitConfig::from_mask(2, &bonds, mask, false);
            let e = primal_h_escape(&cfg, window).expect("d = 2");
            let b = dual2d_blocking(&cfg, window).expect("d = 2");
            (mask, e, b)
        })
        .collect();
    tally("exhaustive", window, bonds.len(), outcomes.into_iter())
}

/// Same check on sampled window configurations.
pub fn dual2d_monte_carlo(window: DualWindow, p: f64, trials: u64, master_seed: u64) -> Dual2dReport {
    let n_bonds = window.bonds().len();
    let outcomes: Vec<(u64, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let cfg = derive_trial_config(2, master_seed, i, p);
            let e = primal_h_escape(&cfg, window).expect("d = 2");
            let b = dual2d_blocking(&cfg, window).expect("d = 2");
            (i, e, b)
        })
        .collect();
    tally("mc", window, n_bonds, outcomes.into_iter())
}

/// Directed open dual path from `(0, n)` to `(n, 0)` inside
/// `B(n) \ B(n/3)`, where `B(k)` is the dual box `[0, k]^2`.
pub fn annulus_circuit<F: BondField + ?Sized>(cfg: &F, n: i32) -> Result<bool, OrientedError> {
    check_planar(cfg)?;
    if n < 3 {
        return Err(OrientedError::AnnulusTooSmall(n));
    }
    let inside = |a: i32, b: i32| (0..=n).contains(&a) && (0..=n).contains(&b) && !(3 * a <= n && 3 * b <= n);
    let mut seen: FxHashSet<(i32, i32)> = FxHashSet::default();
    let mut stack = vec![(0, n)];
    seen.insert((0, n));
    while let Some((a, b)) = stack.pop() {
        if (a, b) == (n, 0) {
            return Ok(true);
        }
        let moves = [((a + 1, b), right_bond(a, b)), ((a, b - 1), down_bond(a, b))];
        for (next, crossed) in moves {
            if inside(next.0, next.1) && !seen.contains(&next) && !cfg.is_occupied(&crossed) {
                seen.insert(next);
                stack.push(next);
            }
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusEstimate {
    pub p: f64,
    pub n: i32,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// Monte Carlo estimate of the annulus circuit probability at primal density `p`.
pub fn annulus_probability(p: f64, n: i32, trials: u64, master_seed: u64) -> Result<AnnulusEstimate, OrientedError> {
    if n < 3 {
        return Err(OrientedError::AnnulusTooSmall(n));
    }
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| annulus_circuit(&derive_trial_config(2, master_seed, i, p), n).expect("n >= 3"))
        .count() as u64;
    let (wilson_lo, wilson_hi) = wilson_interval(hits, trials, Z_99);
    Ok(AnnulusEstimate {
        p,
        n,
        trials,
        hits,
        estimate: if trials == 0 { 0.0 } else { hits as f64 / trials as f64 },
        wilson_lo,
        wilson_hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::BondConfig;

    #[test]
    fn default_window_has_fourteen_bonds() {
        assert_eq!(DualWindow::default().bonds().len(), 14);
    }

    #[test]
    fn extreme_window_configs() {
        let w = DualWindow::default();
        let full = ExplicitConfig::new(2, true);
        assert!(primal_h_escape(&full, w).unwrap());
        assert!(!dual2d_blocking(&full, w).unwrap());
        let empty = ExplicitConfig::new(2, false);
        assert!(!primal_h_escape(&empty, w).unwrap());
        assert!(dual2d_blocking(&empty, w).unwrap());
    }

    #[test]
    fn exhaustive_small_window() {
        let rep = dual2d_exhaustive(DualWindow::new(2, 1));
        assert_eq!(rep.exceptions, 0, "{rep:?}");
        assert_eq!(rep.escapes + rep.blockings, rep.configurations);
    }

    #[test]
    fn annulus_extremes() {
        assert!(annulus_circuit(&BondConfig::new(2, 0.0, 0), 9).unwrap());
        assert!(!annulus_circuit(&BondConfig::new(2, 1.0, 0), 9).unwrap());
        assert!(matches!(
            annulus_circuit(&BondConfig::new(2, 0.0, 0), 2),
            Err(OrientedError::AnnulusTooSmall(2))
        ));
        assert!(matches!(
            annulus_circuit(&BondConfig::new(3, 0.0, 0), 9),
            Err(OrientedError::PlanarOnly(3))
        ));
    }
}
