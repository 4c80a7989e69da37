//! Independent-oracle checks: brute-force or analytic routes computed
//! separately from the implementation paths they certify.

use kpp_core::bbm::{
    bridge_kill, sample_bessel3, simulate_replica, simulate_spine, SimConfig, SpineKind,
};
use kpp_core::martingales::{evaluate_martingales, martingale_trajectory};
use kpp_core::seed::{particle_rng, replica_seed, StreamKind};
use kpp_core::stats::{ks_two_sample, mean_se};
use rand::Rng;
use rand_distr::StandardNormal;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Brownian-bridge crossing probability against a fine-step path oracle.
///
/// The closed form says a bridge from y0 to y1 over dt crosses zero with
/// probability exp(-2 y0 y1 / dt). The oracle samples bridges by exact
/// sequential conditioning on a mesh; discrete monitoring undercounts
/// crossings by O(sqrt(h)), so the oracle is evaluated at two meshes and
/// extrapolated in sqrt(h) before comparing.
#[test]
fn bridge_kill_matches_fine_step_bridge_simulation() {
    let (y0, y1, dt) = (1.0, 1.0, 1.0);
    let paths = 100_000usize;

    let crossing_fraction = |steps: usize, seed: u64| -> f64 {
        let mut rng = particle_rng(seed, 1, StreamKind::Motion);
        let h = dt / steps as f64;
        let mut crossed = 0usize;
        for _ in 0..paths {
            let mut b = y0;
            for k in 0..steps {
                let t = h * k as f64;
                let remain = dt - t;
                let mean = b + (y1 - b) * h / remain;
                let var = h * (remain - h) / remain;
                let g: f64 = rng.sample(StandardNormal);
                b = mean + var.max(0.0).sqrt() * g;
                if b <= 0.0 {
                    crossed += 1;
                    break;
                }
            }
        }
        crossed as f64 / paths as f64
    };

    // sqrt(h) halves between the meshes: P0 ~ 2 P(fine) - P(coarse).
    let p_coarse = crossing_fraction(1000, 0xb41d6e);
    let p_fine = crossing_fraction(4000, 0xb41d6f);
    let p_extrap = 2.0 * p_fine - p_coarse;
    let p_exact = (-2.0 * y0 * y1 / dt).exp();
    let se = (p_exact * (1.0 - p_exact) / paths as f64).sqrt() * 5.0f64.sqrt();
    assert!(
        (p_extrap - p_exact).abs() <= 3.0 * se + 0.001,
        "extrapolated crossing {p_extrap} (coarse {p_coarse}, fine {p_fine}) \
         vs exp(-2) = {p_exact} (se {se})"
    );
    // The decision function agrees with the same formula by construction.
    assert!(bridge_kill(y0, y1, dt, p_exact * 0.999).unwrap());
    assert!(!bridge_kill(y0, y1, dt, p_exact * 1.001).unwrap());
}

/// Spine vertical marginal at t = 4 against the direct Bessel(3) sampler.
#[test]
fn critical_spine_vertical_is_bessel3() {
    let t = 4.0;
    let n = 4000usize;
    let mut spine_marginal = Vec::with_capacity(n);
    for i in 0..n {
        let cfg = SimConfig::new(1.0, t, true, replica_seed(808, i as u64))
            .with_checkpoints(&[t])
            .with_dt_max(0.05);
        let run = simulate_spine(SpineKind::CriticalAdditive, &cfg).unwrap();
        let last = run.path.last().unwrap();
        assert!((last.0 - t).abs() < 1e-9);
        spine_marginal.push(last.2);
    }
    let oracle: Vec<f64> = (0..n)
        .map(|i| *sample_bessel3(1.0, t, 8, replica_seed(909, i as u64)).unwrap().last().unwrap())
        .collect();
    let (d, p) = ks_two_sample(&spine_marginal, &oracle).unwrap();
    assert!(p > 0.01, "KS d = {d}, p = {p}");
}

/// Spine decomposition mean identity: for events of the population
/// filtration, E_spine[f] = E[(W_t / y) f] under the plain law.
#[test]
fn critical_spine_mean_identity() {
    let (t, y) = (1.5, 1.0);
    let spine_n = 6000usize;
    let plain_n = 40_000usize;

    let mut spine_counts = Vec::with_capacity(spine_n);
    for i in 0..spine_n {
        let cfg = SimConfig::new(y, t, true, replica_seed(5150, i as u64)).with_checkpoints(&[t]);
        let run = simulate_spine(SpineKind::CriticalAdditive, &cfg).unwrap();
        spine_counts.push(run.snapshots[0].particles.len() as f64);
    }
    let (lhs, lhs_se) = mean_se(&spine_counts);

    let mut weighted = Vec::with_capacity(plain_n);
    for i in 0..plain_n {
        let cfg = SimConfig::new(y, t, true, replica_seed(6160, i as u64)).with_checkpoints(&[t]);
        let snap = simulate_replica(&cfg).unwrap().remove(0);
        let w = evaluate_martingales(&snap, &[], &[]).unwrap().w;
        weighted.push(w / y * snap.particles.len() as f64);
    }
    let (rhs, rhs_se) = mean_se(&weighted);
    let joint = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    assert!(
        (lhs - rhs).abs() <= 4.0 * joint,
        "spine mean identity: {lhs} +- {lhs_se} vs {rhs} +- {rhs_se}"
    );
}

/// Same identity for the supercritical spine with tilt W^{lm}/sinh(mu y).
#[test]
fn supercritical_spine_mean_identity() {
    let (t, y, lambda, mu) = (1.5, 1.0, 1.0, 0.5);
    let spine_n = 6000usize;
    let plain_n = 40_000usize;

    let mut spine_counts = Vec::with_capacity(spine_n);
    for i in 0..spine_n {
        let cfg = SimConfig::new(y, t, true, replica_seed(7170, i as u64)).with_checkpoints(&[t]);
        let run = simulate_spine(SpineKind::Supercritical { lambda, mu }, &cfg).unwrap();
        spine_counts.push(run.snapshots[0].particles.len() as f64);
    }
    let (lhs, lhs_se) = mean_se(&spine_counts);

    let mut weighted = Vec::with_capacity(plain_n);
    for i in 0..plain_n {
        let cfg = SimConfig::new(y, t, true, replica_seed(8180, i as u64)).with_checkpoints(&[t]);
        let snap = simulate_replica(&cfg).unwrap().remove(0);
        let wlm = evaluate_martingales(&snap, &[], &[(lambda, mu)]).unwrap().w_lm[0].1;
        weighted.push(wlm / (mu * y).sinh() * snap.particles.len() as f64);
    }
    let (rhs, rhs_se) = mean_se(&weighted);
    let joint = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    assert!(
        (lhs - rhs).abs() <= 4.0 * joint,
        "supercritical spine identity: {lhs} +- {lhs_se} vs {rhs} +- {rhs_se}"
    );
}

/// Vanishing-limit directions at small scale: the critical additive
/// median falls toward zero, the supercritical family outside the disk
/// falls, and inside the disk the mean is conserved.
#[test]
fn martingale_trajectory_vanishing_and_conserved() {
    let base = SimConfig::new(1.0, 3.0, true, 31415).with_checkpoints(&[1.0, 2.0, 3.0]);
    // lambda^2 + mu^2 = 2.5 > 2 vanishes; 1.25 < 2 is uniformly integrable.
    let res =
        martingale_trajectory(&base, &[2.0], &[(1.2247, 1.0), (1.0, 0.5)], 4000).unwrap();
    let medians_w: Vec<f64> = res.summaries.iter().map(|s| s.w.median).collect();
    assert!(
        medians_w[0] > medians_w[1] && medians_w[1] > medians_w[2],
        "W medians must fall: {medians_w:?}"
    );
    let medians_lm: Vec<f64> = res.summaries.iter().map(|s| s.w_lm[0].1.median).collect();
    assert!(
        medians_lm[0] > medians_lm[1] && medians_lm[1] > medians_lm[2],
        "supercritical medians above the disk must fall: {medians_lm:?}"
    );
    let target = (0.5f64 * 1.0).sinh();
    for k in 0..3 {
        let vals: Vec<f64> = res.reports.iter().map(|r| r[k].w_lm[1].1).collect();
        let (mean, se) = mean_se(&vals);
        assert!(
            (mean - target).abs() <= 4.0 * se,
            "UI mean drifted at checkpoint {k}: {mean} +- {se} vs {target}"
        );
    }
}
