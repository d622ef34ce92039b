//! Breadth-first closure of a one-step relation on `Z^d`.
//!
//! All path notions used in this crate (good, admissible, oriented occupied)
//! constrain a path only step by step: a step that increases some height
//! function must use an occupied bond, other steps are free. Any walk obeying
//! such a rule loop-erases to a self-avoiding path obeying it, since loop
//! erasure keeps a subset of the original steps. Reachability by
//! self-avoiding paths therefore equals the closure computed here.

use std::collections::VecDeque;

use rustc_hash::FxHashSet;

use crate::lattice::{Bond, Site};
use crate::sampler::BondField;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum StepRule {
    /// Steps that increase the l1 norm need an occupied bond.
    Norm,
    /// Steps that increase the coordinate sum need an occupied bond.
    Level,
    /// Only `+e_i` steps over occupied bonds.
    Oriented,
}

impl StepRule {
    /// Whether the step from `v` along `axis` by `delta` is allowed.
    #[inline]
    pub(crate) fn allows<F: BondField + ?Sized>(self, field: &F, v: &Site, axis: usize, delta: i32) -> bool {
        let free = match self {
            StepRule::Norm => {
                let c = v.coord(axis);
                (c > 0 && delta < 0) || (c < 0 && delta > 0)
            }
            StepRule::Level => delta < 0,
            StepRule::Oriented => {
                return delta > 0 && field.is_occupied(&Bond::from_step(v, axis, delta));
            }
        };
        free || field.is_occupied(&Bond::from_step(v, axis, delta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Visit {
    Expand,
    /// Abort the whole search.
    Stop,
}

#[derive(Default)]
pub(crate) struct Scratch {
    pub(crate) seen: FxHashSet<Site>,
    queue: VecDeque<Site>,
}

/// Runs the closure from `source` over sites accepted by `admit`.
/// `source` is always visited. Returns `true` if `visit` stopped the search.
pub(crate) fn explore<F, A, V>(
    field: &F,
    source: Site,
    rule: StepRule,
    admit: A,
    mut visit: V,
    scratch: &mut Scratch,
) -> bool
where
    F: BondField + ?Sized,
    A: Fn(&Site) -> bool,
    V: FnMut(&Site) -> Visit,
{
    scratch.seen.clear();
    scratch.queue.clear();
    scratch.seen.insert(source);
    scratch.queue.push_back(source);
    let d = source.dim();
    while let Some(v) = scratch.queue.pop_front() {
        match visit(&v) {
            Visit::Stop => return true,
            Visit::Expand => {}
        }
        for axis in 0..d {
            for delta in [-1, 1] {
                let w = v.step(axis, delta);
                if scratch.seen.contains(&w) || !admit(&w) {
                    continue;
                }
                if rule.allows(field, &v, axis, delta) {
                    scratch.seen.insert(w);
                    scratch.queue.push_back(w);
                }
            }
        }
    }
    false
}
