//! Monte Carlo estimators of the traveling waves as Laplace transforms of
//! martingale proxies, extinction probabilities, the McKean product
//! representation, and the smoothing-transform consistency check.
//!
//! A probe-point estimate is a reweighting of per-replica martingale
//! samples, so one simulation batch serves every probe `x` (common random
//! numbers); coupled monotonicity in `x` then holds replica-by-replica,
//! not just in expectation. The derivative-martingale proxy inside the
//! exponential is the shaved `Z_T^alpha` (nonnegative by construction);
//! the finite horizon `T` is an experiment parameter reported alongside
//! every estimate, not extrapolated away.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bbm::{simulate_replica, PopulationSnapshot, SimConfig};
use crate::error::invalid;
use crate::martingales::evaluate_martingales;
use crate::pde_2d::Field2D;
use crate::seed::{replica_seed, splitmix64};
use crate::stats::{ks_two_sample, mean_se, EstimateCi};
use crate::Result;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Default shaving parameter: large enough that shaving is rarely active.
pub const DEFAULT_ALPHA: f64 = 8.0;

/// Per-replica martingale proxies from one batch of killed replicas
/// started at `(0, y)`.
#[derive(Clone, Debug)]
pub struct WaveSamples {
    pub y: f64,
    pub horizon_t: f64,
    pub alpha: f64,
    /// `Z_T^alpha` per replica.
    pub z_alpha: Vec<f64>,
    /// `W_T^{lambda,mu}` per replica when `(lambda, mu)` was requested.
    pub w_lm: Option<(f64, f64, Vec<f64>)>,
    /// Whether `N_T^+` was empty.
    pub extinct: Vec<bool>,
}

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < 100 {
        return Err(invalid!(
            "refusing {replicas} replicas: the confidence interval would be meaningless"
        ));
    }
    Ok(())
}

/// Simulate `replicas` killed replicas from `(0, y)` to horizon `t` and
/// collect the proxies every wave estimator needs.
pub fn sample_waves(
    y: f64,
    t: f64,
    alpha: f64,
    lam_mu: Option<(f64, f64)>,
    replicas: usize,
    seed: u64,
) -> Result<WaveSamples> {
    check_replicas(replicas)?;
    if !(alpha > 0.0) {
        return Err(invalid!("alpha must be > 0"));
    }
    if let Some((l, m)) = lam_mu {
        validate_quarter_disk(l, m)?;
    }
    let lm_list: Vec<(f64, f64)> = lam_mu.into_iter().collect();
    let per = crate::runner::map_replicas(replicas, |i| {
        let cfg = SimConfig::new(y, t, true, replica_seed(seed, i));
        let snap = simulate_replica(&cfg)?.remove(0);
        let rep = evaluate_martingales(&snap, &[alpha], &lm_list)?;
        let wlm = rep.w_lm.first().map(|&(_, v)| v);
        Ok((rep.z_alpha[0].1, wlm, snap.particles.is_empty()))
    })?;
    Ok(WaveSamples {
        y,
        horizon_t: t,
        alpha,
        z_alpha: per.iter().map(|p| p.0).collect(),
        w_lm: lam_mu.map(|(l, m)| (l, m, per.iter().map(|p| p.1.unwrap_or(0.0)).collect())),
        extinct: per.iter().map(|p| p.2).collect(),
    })
}

fn validate_quarter_disk(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0 && mu > 0.0) || lambda * lambda + mu * mu >= 2.0 {
        return Err(invalid!(
            "(lambda, mu) = ({lambda}, {mu}) outside the open quarter-disk lambda^2 + mu^2 < 2"
        ));
    }
    Ok(())
}

fn laplace_estimate(
    samples: &[f64],
    weight: f64,
    meta: alloc::string::String,
    t: f64,
) -> EstimateCi {
    let vals: Vec<f64> = samples.iter().map(|&s| (-weight * s).exp()).collect();
    let (mean, se) = mean_se(&vals);
    EstimateCi { value: 1.0 - mean, std_error: se, replicas: samples.len(), horizon_t: t, meta }
}

/// Evaluate the minimal-wave estimate at probe `x` from an existing batch.
pub fn phi_estimate_at(samples: &WaveSamples, x: f64) -> EstimateCi {
    laplace_estimate(
        &samples.z_alpha,
        (-SQRT_2 * x).exp(),
        format!("phi y={} T={} alpha={}", samples.y, samples.horizon_t, samples.alpha),
        samples.horizon_t,
    )
}

/// `1 - E_y exp(-e^{-sqrt(2) x} Z_T^alpha)`.
pub fn estimate_phi(
    x: f64,
    y: f64,
    t: f64,
    alpha: f64,
    replicas: usize,
    seed: u64,
) -> Result<EstimateCi> {
    let samples = sample_waves(y, t, alpha, None, replicas, seed)?;
    Ok(phi_estimate_at(&samples, x))
}

/// Evaluate the supercritical-wave estimate at probe `x` from a batch.
pub fn phi_supercritical_at(samples: &WaveSamples, x: f64) -> Result<EstimateCi> {
    let (l, _m, w) = samples
        .w_lm
        .as_ref()
        .ok_or_else(|| invalid!("batch carries no supercritical martingale"))?;
    Ok(laplace_estimate(
        w,
        (-l * x).exp(),
        format!("phi_lm y={} T={}", samples.y, samples.horizon_t),
        samples.horizon_t,
    ))
}

/// `1 - E_y exp(-e^{-lambda x} W_T^{lambda,mu})` for `(lambda, mu)` in the
/// open quarter-disk.
pub fn estimate_phi_supercritical(
    x: f64,
    y: f64,
    lambda: f64,
    mu: f64,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<EstimateCi> {
    validate_quarter_disk(lambda, mu)?;
    let samples = sample_waves(y, t, DEFAULT_ALPHA, Some((lambda, mu)), replicas, seed)?;
    phi_supercritical_at(&samples, x)
}

/// Fraction of replicas whose killed population is empty at `T`.
pub fn estimate_extinction(y: f64, t: f64, replicas: usize, seed: u64) -> Result<EstimateCi> {
    let samples = sample_waves(y, t, DEFAULT_ALPHA, None, replicas, seed)?;
    Ok(extinction_from(&samples))
}

/// Extinction estimate from an existing batch.
pub fn extinction_from(samples: &WaveSamples) -> EstimateCi {
    let vals: Vec<f64> = samples.extinct.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect();
    let (mean, se) = mean_se(&vals);
    EstimateCi {
        value: mean,
        std_error: se,
        replicas: vals.len(),
        horizon_t: samples.horizon_t,
        meta: format!("extinction y={} T={}", samples.y, samples.horizon_t),
    }
}

/// Abscissa where the probe estimate crosses `level` (the pinning shift);
/// the estimate is strictly decreasing in `x` on any batch with a
/// positive sample.
pub fn pin_x(samples: &WaveSamples, level: f64, x_lo: f64, x_hi: f64) -> Result<f64> {
    if !(phi_estimate_at(samples, x_lo).value > level
        && phi_estimate_at(samples, x_hi).value < level)
    {
        return Err(invalid!("pin_x: level {level} not bracketed on [{x_lo}, {x_hi}]"));
    }
    let (mut lo, mut hi) = (x_lo, x_hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi_estimate_at(samples, mid).value > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// McKean product evaluation of the parabolic evolution at time `t` from
/// initial datum `initial` (values in `[0,1]`, bilinearly interpolated,
/// zero outside its grid), probed at `(x, y)`.
pub fn mckean_evolve(
    initial: &Field2D,
    t: f64,
    x: f64,
    y: f64,
    replicas: usize,
    seed: u64,
) -> Result<EstimateCi> {
    check_replicas(replicas)?;
    if !(t >= 0.0 && t <= 5.0) {
        return Err(invalid!("mckean_evolve: t must lie in [0, 5] (population growth)"));
    }
    if initial.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid!("mckean_evolve: initial field values must lie in [0, 1]"));
    }
    let products = crate::runner::map_replicas(replicas, |i| {
        let cfg = SimConfig::new(y, t, true, replica_seed(seed, i));
        let snap = simulate_replica(&cfg)?.remove(0);
        let mut product = 1.0f64;
        for p in &snap.particles {
            product *= 1.0 - initial.value_at(x - p.x, p.y);
            if product == 0.0 {
                break;
            }
        }
        Ok(product)
    })?;
    let (mean, se) = mean_se(&products);
    Ok(EstimateCi {
        value: 1.0 - mean,
        std_error: se,
        replicas,
        horizon_t: t,
        meta: format!("mckean t={t} probe=({x}, {y})"),
    })
}

/// Two-sided comparison of the smoothing recursion for the shaved
/// derivative martingale.
#[derive(Clone, Debug)]
pub struct SmoothingReport {
    pub mean_direct: f64,
    pub se_direct: f64,
    pub mean_recursed: f64,
    pub se_recursed: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

impl SmoothingReport {
    /// |mean difference| against `k` joint standard errors.
    pub fn means_agree_within(&self, k: f64) -> bool {
        let joint = (self.se_direct * self.se_direct + self.se_recursed * self.se_recursed).sqrt();
        (self.mean_direct - self.mean_recursed).abs() <= k * joint
    }
}

/// Compare the law of `Z_{t+T}^alpha` with its smoothing-transform
/// reassembly: a time-`t` snapshot whose particles root independent
/// descendant proxies `Z_T^{alpha_u}` started at `(0, Y_t(u))`, where
/// `alpha_u = sqrt(2) t + alpha - X_t(u)` is the inherited shaving
/// threshold. The identity is exact in law at the sub-step mesh, so the
/// two samples must be statistically indistinguishable.
pub fn smoothing_consistency(
    t: f64,
    y: f64,
    horizon: f64,
    alpha: f64,
    replicas: usize,
    seed: u64,
) -> Result<SmoothingReport> {
    check_replicas(replicas)?;
    if !(t >= 0.0 && t <= 2.0) {
        return Err(invalid!("smoothing_consistency: t must lie in [0, 2]"));
    }
    if t + horizon > 10.0 {
        return Err(invalid!("smoothing_consistency: total horizon t + T must stay <= 10"));
    }
    let direct_master = splitmix64(seed ^ 0x736d_6f6f_7468_5f4c);
    let recursed_master = splitmix64(seed ^ 0x736d_6f6f_7468_5f52);

    let direct = crate::runner::map_replicas(replicas, |i| {
        let cfg = SimConfig::new(y, t + horizon, true, replica_seed(direct_master, i));
        let snap = simulate_replica(&cfg)?.remove(0);
        Ok(evaluate_martingales(&snap, &[alpha], &[])?.z_alpha[0].1)
    })?;

    let recursed = crate::runner::map_replicas(replicas, |i| {
        let ancestor_seed = replica_seed(recursed_master, i);
        let cfg = SimConfig::new(y, t, true, ancestor_seed);
        let snap = simulate_replica(&cfg)?.remove(0);
        let mut total = 0.0f64;
        for p in &snap.particles {
            if p.max_drift_excess > alpha {
                continue;
            }
            let alpha_u = SQRT_2 * t + alpha - p.x;
            if alpha_u <= 0.0 {
                continue;
            }
            let desc_seed = splitmix64(ancestor_seed ^ splitmix64(p.id ^ 0x6465_7363_656e_64));
            let desc_cfg = SimConfig::new(p.y, horizon, true, desc_seed);
            let desc = simulate_replica(&desc_cfg)?.remove(0);
            let z = evaluate_martingales(&desc, &[alpha_u], &[])?.z_alpha[0].1;
            total += (SQRT_2 * p.x - 2.0 * t).exp() * z;
        }
        Ok(total)
    })?;

    let (mean_direct, se_direct) = mean_se(&direct);
    let (mean_recursed, se_recursed) = mean_se(&recursed);
    let (ks_statistic, ks_p_value) = ks_two_sample(&direct, &recursed)?;
    Ok(SmoothingReport {
        mean_direct,
        se_direct,
        mean_recursed,
        se_recursed,
        ks_statistic,
        ks_p_value,
    })
}

/// Whether a snapshot retains any particle.
pub fn survived(snapshot: &PopulationSnapshot) -> bool {
    !snapshot.particles.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_2d::Field2D;
    use alloc::string::String;
    use alloc::vec;

    #[test]
    fn refuses_meaningless_ci() {
        assert!(estimate_phi(0.0, 1.0, 1.0, 8.0, 50, 1).is_err());
        assert!(estimate_extinction(1.0, 1.0, 10, 1).is_err());
    }

    #[test]
    fn rejects_parameters_outside_quarter_disk() {
        assert!(estimate_phi_supercritical(0.0, 1.0, 1.2, 0.9, 1.0, 200, 1).is_err());
        assert!(estimate_phi_supercritical(0.0, 1.0, -1.0, 0.5, 1.0, 200, 1).is_err());
        assert!(estimate_phi_supercritical(0.0, 1.0, 1.0, 0.5, 1.0, 200, 1).is_ok());
    }

    #[test]
    fn far_field_estimates_vanish() {
        // x -> +infinity kills the exponent; y -> 0 kills the population.
        let far = estimate_phi(40.0, 1.0, 1.0, 8.0, 300, 3).unwrap();
        assert!(far.value.abs() <= far.std_error.max(1e-12));
        let shallow = estimate_phi(0.0, 1e-3, 1.0, 8.0, 300, 4).unwrap();
        assert!(shallow.value <= 2.0 * shallow.std_error + 1e-3, "value {}", shallow.value);
        let sup_far = estimate_phi_supercritical(40.0, 1.0, 1.0, 0.5, 1.0, 300, 5).unwrap();
        assert!(sup_far.value.abs() <= sup_far.std_error.max(1e-12));
    }

    #[test]
    fn common_random_numbers_give_strict_monotonicity() {
        let samples = sample_waves(2.0, 1.5, 8.0, Some((1.0, 0.5)), 400, 17).unwrap();
        let e = [-1.0, 0.0, 1.0].map(|x| phi_estimate_at(&samples, x).value);
        assert!(e[0] > e[1] && e[1] > e[2], "decreasing in x: {e:?}");
        let s = [-1.0, 0.0, 1.0].map(|x| phi_supercritical_at(&samples, x).unwrap().value);
        assert!(s[0] > s[1] && s[1] > s[2], "supercritical decreasing in x: {s:?}");
    }

    #[test]
    fn supercritical_increasing_in_y_under_common_seeds() {
        // Same master seed: per-particle streams couple the three starts.
        let per_y: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&y| {
                estimate_phi_supercritical(0.0, y, 1.0, 0.5, 1.0, 400, 23).unwrap().value
            })
            .collect();
        assert!(per_y[0] < per_y[1] && per_y[1] < per_y[2], "increasing in y: {per_y:?}");
    }

    #[test]
    fn extinction_limits() {
        let shallow = estimate_extinction(1e-3, 1.0, 400, 9).unwrap();
        assert!(shallow.value >= 1.0 - 2.0 * shallow.std_error - 1e-3);
        let deep = estimate_extinction(10.0, 2.0, 400, 10).unwrap();
        assert!(deep.value <= 2.0 * deep.std_error + 1e-3, "extinction at y=10: {}", deep.value);
    }

    fn uniform_field(v: f64) -> Field2D {
        Field2D {
            x_lo: -5.0,
            y_lo: 0.0,
            hx: 0.5,
            hy: 0.5,
            nx: 21,
            ny: 21,
            values: vec![v; 21 * 21],
            frame_speed_c: 0.0,
            bc: String::new(),
            pin_offset: 0.0,
        }
    }

    #[test]
    fn mckean_zero_and_one_fields() {
        let zero = uniform_field(0.0);
        let e = mckean_evolve(&zero, 1.0, 0.0, 1.0, 200, 2).unwrap();
        assert_eq!(e.value, 0.0);

        // All-ones initial datum: the product vanishes iff some particle
        // lands inside the grid; with the grid covering the populated
        // region this is the survival probability.
        let one = uniform_field(1.0);
        let e = mckean_evolve(&one, 1.0, 0.0, 1.0, 400, 11).unwrap();
        let surv = 1.0 - estimate_extinction(1.0, 1.0, 400, 11).unwrap().value;
        assert!((e.value - surv).abs() <= 0.05, "survival {surv} vs mckean {}", e.value);

        let mut bad = uniform_field(0.5);
        bad.values[3] = 1.5;
        assert!(mckean_evolve(&bad, 1.0, 0.0, 1.0, 200, 2).is_err());
    }

    #[test]
    fn smoothing_consistency_at_t_zero_is_exact_in_law() {
        let rep = smoothing_consistency(0.0, 1.0, 2.0, 8.0, 600, 31).unwrap();
        assert!(rep.means_agree_within(4.0), "{rep:?}");
        assert!(rep.ks_p_value > 0.01, "KS p = {}", rep.ks_p_value);
    }

    #[test]
    fn smoothing_consistency_small_scale() {
        let rep = smoothing_consistency(1.0, 1.0, 2.0, 8.0, 600, 37).unwrap();
        assert!(rep.means_agree_within(4.0), "{rep:?}");
        assert!(rep.ks_p_value > 0.01, "KS p = {}", rep.ks_p_value);
        assert!(smoothing_consistency(3.0, 1.0, 2.0, 8.0, 600, 1).is_err());
        assert!(smoothing_consistency(1.0, 1.0, 20.0, 8.0, 600, 1).is_err());
    }
}
