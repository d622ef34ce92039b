//! C ABI over `plaq-core`.
//!
//! Objects cross the boundary as opaque pointers created by `*_new` /
//! `*_grow` / `*_build` functions and released with the matching `*_free`.
//! Every fallible call returns a [`PlaqStatus`]; on failure the message is
//! available from [`plaq_last_error_message`] until the next failing call on
//! the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plaq::good_cluster::{grow_good_cluster, ClusterResult};
use plaq::lattice::{Bond, Site, MAX_DIM};
use plaq::mc::wilson_interval;
use plaq::sampler::{derive_trial_config, BondConfig, BondField};
use plaq::saw::count_saw;
use plaq::sphere::{build_boundary, certify, CertifyOptions, PlaquetteComplex, SphereVerdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The cluster reached its truncation radius.
    Escaped = 3,
    Internal = 4,
    Panic = 5,
}

/// Seeded Bernoulli bond configuration.
pub struct PlaqConfig(BondConfig);

/// Good-path cluster of the origin.
pub struct PlaqCluster(ClusterResult);

/// Set of plaquettes bounding a cluster.
pub struct PlaqComplex(PlaquetteComplex);

/// Tri-state flags use -1 for "not computed".
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlaqTopology {
    pub d: u32,
    pub n_facets: u64,
    pub euler_characteristic: i64,
    pub is_closed_manifold: bool,
    pub is_connected: bool,
    pub origin_inside: i8,
    pub all_unoccupied: i8,
    pub star_shaped: i8,
    /// 0 verified, 1 necessary conditions only, 2 failed.
    pub verdict: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: PlaqStatus, msg: impl Into<String>) -> PlaqStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> PlaqStatus>(f: F) -> PlaqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(PlaqStatus::Panic, msg)
        }
    }
}

fn check_args(d: u32, p: f64) -> Result<(), PlaqStatus> {
    if !(2..=MAX_DIM as u32).contains(&d) {
        return Err(fail(PlaqStatus::InvalidArgument, format!("dimension {d} outside 2..={MAX_DIM}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(fail(PlaqStatus::InvalidArgument, format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Message of the last failing call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn plaq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn plaq_version() -> *const c_char {
    concat!("plaq ", env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_config_new(d: u32, p: f64, seed: u64, out: *mut *mut PlaqConfig) -> PlaqStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlaqStatus::NullPointer, "out is NULL");
        }
        if let Err(s) = check_args(d, p) {
            return s;
        }
        *out = Box::into_raw(Box::new(PlaqConfig(BondConfig::new(d as usize, p, seed))));
        PlaqStatus::Ok
    })
}

/// Configuration of trial `trial` under `master_seed`, as used by the CLI.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_config_for_trial(
    d: u32,
    master_seed: u64,
    trial: u64,
    p: f64,
    out: *mut *mut PlaqConfig,
) -> PlaqStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlaqStatus::NullPointer, "out is NULL");
        }
        if let Err(s) = check_args(d, p) {
            return s;
        }
        *out = Box::into_raw(Box::new(PlaqConfig(derive_trial_config(d as usize, master_seed, trial, p))));
        PlaqStatus::Ok
    })
}

/// # Safety
/// `cfg` must come from `plaq_config_new` / `plaq_config_for_trial` and not be
/// used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn plaq_config_free(cfg: *mut PlaqConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// State of the bond from `base` (length `d` array) along `axis`.
///
/// # Safety
/// `cfg` must be a live handle, `base` must point to `d` integers and
/// `occupied` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_bond_occupied(
    cfg: *const PlaqConfig,
    base: *const i32,
    axis: u32,
    occupied: *mut bool,
) -> PlaqStatus {
    guard(|| {
        if cfg.is_null() || base.is_null() || occupied.is_null() {
            return fail(PlaqStatus::NullPointer, "NULL argument");
        }
        let cfg = &(*cfg).0;
        let d = cfg.dim();
        if axis as usize >= d {
            return fail(PlaqStatus::InvalidArgument, format!("axis {axis} outside 0..{d}"));
        }
        let coords = std::slice::from_raw_parts(base, d);
        let site = match Site::new(coords) {
            Ok(s) => s,
            Err(e) => return fail(PlaqStatus::InvalidArgument, e.to_string()),
        };
        *occupied = cfg.is_occupied(&Bond::new(site, axis as usize));
        PlaqStatus::Ok
    })
}

/// Grows the good-path cluster of the origin up to l1 radius `r_max`.
///
/// # Safety
/// `cfg` must be a live handle and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_cluster_grow(cfg: *const PlaqConfig, r_max: u64, out: *mut *mut PlaqCluster) -> PlaqStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(PlaqStatus::NullPointer, "NULL argument");
        }
        *out = Box::into_raw(Box::new(PlaqCluster(grow_good_cluster(&(*cfg).0, r_max))));
        PlaqStatus::Ok
    })
}

/// # Safety
/// `cluster` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn plaq_cluster_size(cluster: *const PlaqCluster) -> usize {
    cluster.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `cluster` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn plaq_cluster_radius(cluster: *const PlaqCluster) -> u64 {
    cluster.as_ref().map_or(0, |c| c.0.radius)
}

/// # Safety
/// `cluster` must be a live handle or NULL (returns false).
#[no_mangle]
pub unsafe extern "C" fn plaq_cluster_escaped(cluster: *const PlaqCluster) -> bool {
    cluster.as_ref().is_some_and(|c| c.0.escaped)
}

/// # Safety
/// `cluster` must come from `plaq_cluster_grow`; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn plaq_cluster_free(cluster: *mut PlaqCluster) {
    if !cluster.is_null() {
        drop(Box::from_raw(cluster));
    }
}

/// Plaquettes dual to bonds with exactly one endpoint in the cluster.
///
/// # Safety
/// `cluster` must be a live handle and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_boundary_build(cluster: *const PlaqCluster, out: *mut *mut PlaqComplex) -> PlaqStatus {
    guard(|| {
        if cluster.is_null() || out.is_null() {
            return fail(PlaqStatus::NullPointer, "NULL argument");
        }
        let c = &(*cluster).0;
        if c.escaped {
            return fail(PlaqStatus::Escaped, "cluster reached its truncation radius");
        }
        match build_boundary(c) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(PlaqComplex(s)));
                PlaqStatus::Ok
            }
            Err(e) => fail(PlaqStatus::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `complex` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn plaq_complex_len(complex: *const PlaqComplex) -> usize {
    complex.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `complex` must come from `plaq_boundary_build`; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn plaq_complex_free(complex: *mut PlaqComplex) {
    if !complex.is_null() {
        drop(Box::from_raw(complex));
    }
}

fn tri(v: Option<bool>) -> i8 {
    v.map_or(-1, i8::from)
}

/// Topology, occupancy and ray checks of `complex` against `cfg`.
///
/// # Safety
/// `complex` and `cfg` must be live handles and `out` valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_certify(
    complex: *const PlaqComplex,
    cfg: *const PlaqConfig,
    n_rays: u32,
    ray_seed: u64,
    out: *mut PlaqTopology,
) -> PlaqStatus {
    guard(|| {
        if complex.is_null() || cfg.is_null() || out.is_null() {
            return fail(PlaqStatus::NullPointer, "NULL argument");
        }
        let opts = CertifyOptions {
            n_rays: n_rays as usize,
            ray_seed,
        };
        match certify(&(*complex).0, &(*cfg).0, opts) {
            Ok(r) => {
                *out = PlaqTopology {
                    d: r.d as u32,
                    n_facets: r.cell_counts.last().copied().unwrap_or(0) as u64,
                    euler_characteristic: r.euler_characteristic,
                    is_closed_manifold: r.is_closed_manifold,
                    is_connected: r.is_connected,
                    origin_inside: tri(r.origin_inside),
                    all_unoccupied: tri(r.all_unoccupied),
                    star_shaped: tri(r.star_shaped_ray_checks_passed),
                    verdict: match r.verdict_sphere {
                        SphereVerdict::Verified => 0,
                        SphereVerdict::NecessaryConditionsOnly => 1,
                        SphereVerdict::Failed => 2,
                    },
                };
                PlaqStatus::Ok
            }
            Err(e) => fail(PlaqStatus::Internal, e.to_string()),
        }
    })
}

/// Number of self-avoiding walks of length `k` from the origin of `Z^d`.
///
/// # Safety
/// `out` must be valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_saw_count(d: u32, k: u32, out: *mut u64) -> PlaqStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlaqStatus::NullPointer, "out is NULL");
        }
        match count_saw(d as usize, k as usize) {
            Ok(c) => match u64::try_from(&c.count) {
                Ok(v) => {
                    *out = v;
                    PlaqStatus::Ok
                }
                Err(_) => fail(PlaqStatus::InvalidArgument, "count does not fit in 64 bits"),
            },
            Err(e) => fail(PlaqStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Wilson score interval for `hits` of `trials` at normal quantile `z`.
///
/// # Safety
/// `lo` and `hi` must be valid writable storage.
#[no_mangle]
pub unsafe extern "C" fn plaq_wilson_interval(hits: u64, trials: u64, z: f64, lo: *mut f64, hi: *mut f64) -> PlaqStatus {
    guard(|| {
        if lo.is_null() || hi.is_null() {
            return fail(PlaqStatus::NullPointer, "NULL argument");
        }
        if hits > trials || z.is_nan() || z <= 0.0 {
            return fail(PlaqStatus::InvalidArgument, "requires hits <= trials and z > 0");
        }
        let (l, h) = wilson_interval(hits, trials, z);
        *lo = l;
        *hi = h;
        PlaqStatus::Ok
    })
}
