//! Independent brute-force oracles for the enumeration and search code.

mod common;

use num_bigint::BigUint;
use rustc_hash::FxHashSet;

use common::{enumerate_paths, saw_brute, site, window14, window14_mismatch, Rule};
use plaq::lattice::{Bond, Site};
use plaq::oriented::{admissible_reach_set, estimate_r, oriented_reach_set, RegionSpec};
use plaq::sampler::ExplicitConfig;
use plaq::saw::count_saws_upto;

#[test]
fn saw_counts_match_brute_force() {
    for (d, k) in [(2, 10), (3, 7), (4, 5)] {
        let fast = count_saws_upto(d, k).unwrap();
        let slow = saw_brute(d, k);
        for j in 0..=k {
            assert_eq!(fast[j], BigUint::from(slow[j]), "d={d} k={j}");
        }
    }
}

#[test]
fn known_saw_values() {
    let c2 = count_saws_upto(2, 6).unwrap();
    let want2 = [1u64, 4, 12, 36, 100, 284, 780];
    for (got, want) in c2.iter().zip(want2) {
        assert_eq!(*got, BigUint::from(want));
    }
    let c3 = count_saws_upto(3, 4).unwrap();
    let want3 = [1u64, 6, 30, 150, 726];
    for (got, want) in c3.iter().zip(want3) {
        assert_eq!(*got, BigUint::from(want));
    }
}

#[test]
fn closures_match_path_enumeration_on_every_window_config() {
    assert_eq!(window14_mismatch(), None);
}

#[test]
fn oriented_inside_admissible_on_window() {
    let w = window14();
    let bx = RegionSpec::Box {
        lo: site(&[-1, -1]),
        hi: site(&[2, 2]),
    };
    for mask in (0..1u64 << w.len()).step_by(7) {
        let cfg = ExplicitConfig::from_mask(2, &w, mask, false);
        let ori = oriented_reach_set(&cfg, Site::origin(2), &bx, 10);
        let adm = admissible_reach_set(&cfg, Site::origin(2), &bx, 10);
        assert!(ori.is_subset(&adm), "mask {mask}");
    }
}

#[test]
fn admissible_at_zero_density_is_the_negative_quadrant() {
    let cfg = ExplicitConfig::new(2, false);
    let set = admissible_reach_set(&cfg, Site::origin(2), &RegionSpec::All, 3);
    let want: FxHashSet<Site> = (-3..=0).flat_map(|x| (-3..=0).map(move |y| site(&[x, y]))).collect();
    assert_eq!(set, want);
}

/// Window bonds of `[0,2]^2`. With every other bond unoccupied, a path that
/// leaves the box can never raise `s` again, so the box holds every path
/// that matters for reaching `(n, n)`.
fn window_box3() -> Vec<Bond> {
    let mut w = Vec::new();
    for x in 0..=2 {
        for y in 0..=2 {
            if x < 2 {
                w.push(Bond::new(site(&[x, y]), 0));
            }
            if y < 2 {
                w.push(Bond::new(site(&[x, y]), 1));
            }
        }
    }
    w
}

fn radius_oracle(cfg: &ExplicitConfig) -> u32 {
    let reach = enumerate_paths(cfg, Rule::Admissible, 0, 2);
    (0..=2).rev().find(|&n| reach.contains(&site(&[n, n]))).unwrap() as u32
}

#[test]
fn radius_matches_exhaustive_oracle() {
    let w = window_box3();
    assert_eq!(w.len(), 12);
    let p: f64 = 0.2;
    let mut exact = [0.0f64; 3];
    for mask in 0..1u64 << w.len() {
        let cfg = ExplicitConfig::from_mask(2, &w, mask, false);
        let r = estimate_r(&cfg, 2);
        let want = radius_oracle(&cfg);
        assert_eq!(r.value, want, "mask {mask}");
        assert_eq!(r.censored, want == 2);
        let k = mask.count_ones() as i32;
        exact[want as usize] += p.powi(k) * (1.0 - p).powi(w.len() as i32 - k);
    }
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    // sampled window configurations reproduce the exact law
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let n = 40_000;
    let mut counts = [0u64; 3];
    for _ in 0..n {
        let mut cfg = ExplicitConfig::new(2, false);
        for e in &w {
            cfg.set(*e, rng.gen::<f64>() < p);
        }
        counts[estimate_r(&cfg, 2).value as usize] += 1;
    }
    for j in 0..3 {
        let phat = counts[j] as f64 / n as f64;
        let se = (exact[j] * (1.0 - exact[j]) / n as f64).sqrt().max(1e-9);
        assert!((phat - exact[j]).abs() < 4.0 * se + 1e-4, "R={j}: {phat} vs {}", exact[j]);
    }
}
