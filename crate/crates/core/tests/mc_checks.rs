//! Statistical behaviour of the Monte Carlo estimators.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, Discrete};

use plaq::lattice::Slope;
use plaq::mc::{compare_tail, slope_check, tail_curve, theoretical_bound, wilson_interval, TailTarget, Z_99};
use plaq::oriented::{annulus_probability, black_sites, renormalization_skeleton, SkeletonParams};
use plaq::sampler::derive_trial_config;
use plaq::saw::mu_upper_estimate;
use plaq::BoundError;

/// Exact coverage of the Wilson interval by summing the binomial law.
fn coverage(n: u64, p: f64) -> f64 {
    let law = Binomial::new(p, n).unwrap();
    (0..=n)
        .filter(|&k| {
            let (lo, hi) = wilson_interval(k, n, Z_99);
            lo <= p && p <= hi
        })
        .map(|k| law.pmf(k))
        .sum()
}

#[test]
fn wilson_coverage_at_99_percent() {
    for n in [50, 200, 1000] {
        for p in [0.01, 0.05, 0.2, 0.5, 0.8] {
            let c = coverage(n, p);
            assert!(c >= 0.98, "n={n} p={p} coverage={c}");
        }
    }
}

#[test]
fn simulated_wilson_coverage() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, p, reps) = (400u64, 0.03, 3000);
    let covered = (0..reps)
        .filter(|_| {
            let hits = (0..n).filter(|_| rng.gen::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(hits, n, Z_99);
            lo <= p && p <= hi
        })
        .count();
    assert!(covered as f64 / reps as f64 >= 0.98, "{covered}/{reps}");
}

#[test]
fn tail_is_non_increasing_and_under_bound() {
    let rs: Vec<u64> = (1..=8).collect();
    for (d, p) in [(2, 0.1), (3, 0.03)] {
        for target in [TailTarget::ClusterRadius, TailTarget::SphereRadius] {
            let t = tail_curve(p, d, &rs, 20_000, 12, target, 32);
            assert!(t.hits.windows(2).all(|w| w[0] >= w[1]), "{:?}", t.hits);
            let b = theoretical_bound(p, d, &rs).unwrap();
            if target == TailTarget::ClusterRadius {
                assert!(compare_tail(&t, &b).unwrap().is_empty());
            }
        }
    }
}

#[test]
fn sphere_tail_dominates_cluster_tail() {
    let rs: Vec<u64> = (1..=6).collect();
    let k = tail_curve(0.03, 3, &rs, 5000, 1, TailTarget::ClusterRadius, 30);
    let s = tail_curve(0.03, 3, &rs, 5000, 1, TailTarget::SphereRadius, 30);
    assert!(k.hits.iter().zip(&s.hits).all(|(a, b)| a <= b));
}

#[test]
fn bound_outside_regime_is_rejected() {
    assert!(matches!(
        theoretical_bound(0.2, 2, &[1, 2]),
        Err(BoundError::OutsideExplicitRegime { .. })
    ));
    let b = theoretical_bound(0.03, 3, &[1]).unwrap();
    assert!((b.alpha - 0.15).abs() < 1e-12 && (b.c_prime - 8.0).abs() < 1e-9);
    let b = theoretical_bound(0.1, 2, &[1]).unwrap();
    assert!((b.alpha - 0.3).abs() < 1e-12 && (b.c_prime - 20.0).abs() < 1e-9);
    let t = tail_curve(0.1, 2, &[1, 2], 10, 0, TailTarget::ClusterRadius, 8);
    assert_eq!(compare_tail(&t, &b), Err(BoundError::Mismatch));
}

#[test]
fn decay_rate_outside_the_explicit_regime() {
    let rs: Vec<u64> = (1..=8).collect();
    let t = tail_curve(0.2, 2, &rs, 50_000, 5, TailTarget::ClusterRadius, 40);
    let check = slope_check(&t, mu_upper_estimate(2, 16).unwrap()).unwrap();
    assert!(check.passed, "{check:?}");
}

#[test]
fn skeleton_black_sites_behave_independently() {
    let sk = renormalization_skeleton(SkeletonParams {
        a: Ratio::from_integer(0),
        b: Slope::Infinite,
        r: Ratio::new(1, 2),
        s: Ratio::from_integer(2),
        alpha: 1,
        beta: 1,
        extent: 4,
    })
    .unwrap();
    let n = sk.n_bonds as i32;
    let trials = 20_000u64;
    let mut last = 0.0;
    for p in [0.5, 0.7, 0.9] {
        let mut black = 0u64;
        let mut both = 0u64;
        let mut first = 0u64;
        let mut second = 0u64;
        for i in 0..trials {
            let b = black_sites(&derive_trial_config(2, 77, i, p), &sk);
            black += b.iter().filter(|&&x| x).count() as u64;
            first += b[0] as u64;
            second += b[5] as u64;
            both += (b[0] && b[5]) as u64;
        }
        let frac = black as f64 / (trials * 16) as f64;
        let want = p.powi(n);
        assert!((frac - want).abs() < 0.01, "p={p}: {frac} vs {want}");
        assert!(frac > last);
        last = frac;
        let joint = both as f64 / trials as f64;
        let prod = first as f64 * second as f64 / (trials * trials) as f64;
        assert!((joint - prod).abs() < 0.015, "p={p}: {joint} vs {prod}");
    }
}

#[test]
fn annulus_circuits_get_likelier_with_more_open_dual_bonds() {
    let dense = annulus_probability(0.4, 18, 4000, 2).unwrap();
    let sparse = annulus_probability(0.25, 18, 4000, 2).unwrap();
    assert!(sparse.hits > dense.hits);
    assert!(sparse.wilson_lo > 0.01);
}
