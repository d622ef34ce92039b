//! Bernoulli bond occupancy on all of `Z^d`, generated lazily.
//!
//! The state of a bond is a pure function of the master seed and the
//! canonical bond: the pair is pushed through a counter-based mixing function
//! and the top 53 bits are compared against `p`. Nothing is stored, so a
//! configuration covers the infinite lattice and can be shared between threads.
//! Because the uniform deviate of a bond does not depend on `p`, configurations
//! with the same seed and different `p` are monotonically coupled.

use std::cell::RefCell;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::lattice::{dual_bond, Bond, Plaquette};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondState {
    Occupied,
    Unoccupied,
}

impl BondState {
    pub fn is_occupied(self) -> bool {
        self == BondState::Occupied
    }
}

impl From<bool> for BondState {
    fn from(occupied: bool) -> Self {
        if occupied {
            BondState::Occupied
        } else {
            BondState::Unoccupied
        }
    }
}

/// Anything that assigns an occupancy to every bond of `Z^d`.
pub trait BondField: Sync {
    fn dim(&self) -> usize;

    fn is_occupied(&self, e: &Bond) -> bool;

    fn bond_state(&self, e: &Bond) -> BondState {
        self.is_occupied(e).into()
    }

    /// Plaquettes share the state of the bond they cross.
    fn plaquette_state(&self, pi: &Plaquette) -> BondState {
        self.bond_state(&dual_bond(pi))
    }
}

impl<F: BondField + ?Sized> BondField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn is_occupied(&self, e: &Bond) -> bool {
        (**self).is_occupied(e)
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    mix64(h.rotate_left(23) ^ word.wrapping_mul(GOLDEN))
}

/// Seed for trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    absorb(mix64(master_seed ^ 0xD1B5_4A32_D192_ED03), index.wrapping_add(1))
}

/// Seeded Bernoulli(p) bond percolation on `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondConfig {
    d: usize,
    p: f64,
    seed: u64,
}

impl BondConfig {
    pub fn new(d: usize, p: f64, seed: u64) -> Self {
        debug_assert!((0.0..=1.0).contains(&p), "p = {p} outside [0, 1]");
        BondConfig { d, p, seed }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same underlying uniforms, different threshold.
    pub fn with_p(&self, p: f64) -> Self {
        BondConfig { p, ..*self }
    }

    /// The uniform deviate in `[0, 1)` attached to `e`.
    #[inline]
    pub fn uniform(&self, e: &Bond) -> f64 {
        let base = e.base().coords();
        let mut h = absorb(self.seed, (e.dim() as u64) << 8 | e.axis() as u64);
        for pair in base.chunks(2) {
            let lo = pair[0] as u32 as u64;
            let hi = pair.get(1).map_or(0, |&c| c as u32 as u64);
            h = absorb(h, lo | hi << 32);
        }
        (mix64(h) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl BondField for BondConfig {
    fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn is_occupied(&self, e: &Bond) -> bool {
        self.uniform(e) < self.p
    }
}

/// Independent configuration for one trial of an experiment.
pub fn derive_trial_config(d: usize, master_seed: u64, trial_index: u64, p: f64) -> BondConfig {
    BondConfig::new(d, p, trial_seed(master_seed, trial_index))
}

/// Memoising view over another field. Not `Sync`; use one per thread.
pub struct CachedConfig<F> {
    inner: F,
    cache: RefCell<FxHashMap<Bond, bool>>,
}

impl<F: BondField> CachedConfig<F> {
    pub fn new(inner: F) -> Self {
        CachedConfig {
            inner,
            cache: RefCell::new(FxHashMap::default()),
        }
    }

    pub fn bond_state(&self, e: &Bond) -> BondState {
        let occupied = *self
            .cache
            .borrow_mut()
            .entry(*e)
            .or_insert_with(|| self.inner.is_occupied(e));
        occupied.into()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.borrow().len()
    }
}

/// Configuration with a default state and explicit exceptions. Used for
/// hand-built and exhaustively enumerated windows.
#[derive(Clone, Debug, Default)]
pub struct ExplicitConfig {
    d: usize,
    default: bool,
    states: FxHashMap<Bond, bool>,
}

impl ExplicitConfig {
    pub fn new(d: usize, default_occupied: bool) -> Self {
        ExplicitConfig {
            d,
            default: default_occupied,
            states: FxHashMap::default(),
        }
    }

    /// Assign the bonds of `window` from the bits of `mask` (bit `i` set means
    /// occupied); everything else takes the default.
    pub fn from_mask(d: usize, window: &[Bond], mask: u64, default_occupied: bool) -> Self {
        let mut cfg = ExplicitConfig::new(d, default_occupied);
        for (i, e) in window.iter().enumerate() {
            cfg.set(*e, mask >> i & 1 == 1);
        }
        cfg
    }

    pub fn set(&mut self, e: Bond, occupied: bool) -> &mut Self {
        self.states.insert(e, occupied);
        self
    }
}

impl BondField for ExplicitConfig {
    fn dim(&self) -> usize {
        self.d
    }

    fn is_occupied(&self, e: &Bond) -> bool {
        self.states.get(e).copied().unwrap_or(self.default)
    }
}

/// `field` with a fixed set of bonds overridden.
pub struct Overlay<'a, F: ?Sized> {
    field: &'a F,
    overrides: FxHashMap<Bond, bool>,
}

impl<'a, F: BondField + ?Sized> Overlay<'a, F> {
    pub fn new(field: &'a F) -> Self {
        Overlay {
            field,
            overrides: FxHashMap::default(),
        }
    }

    pub fn set(&mut self, e: Bond, occupied: bool) -> &mut Self {
        self.overrides.insert(e, occupied);
        self
    }
}

impl<F: BondField + ?Sized> BondField for Overlay<'_, F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn is_occupied(&self, e: &Bond) -> bool {
        match self.overrides.get(e) {
            Some(&s) => s,
            None => self.field.is_occupied(e),
        }
    }
}
