//! One-dimensional solvers: the boundary steady state `phi` on the
//! half-line, the traveling waves `w_c` on the line, the tail-constant fit
//! `w(x) ~ K (x + a) e^{-sqrt(2) x}` at the minimal speed, and a Monte
//! Carlo Laplace-transform wave used to align translates.
//!
//! `phi` solves `phi''/2 + phi - phi^2 = 0`, `phi(0) = 0`, `phi(inf) = 1`
//! by RK4 shooting with bisection on `phi'(0)`; past the point where
//! `1 - phi < 1e-6` the profile is continued on the stable manifold
//! `1 - kappa e^{-sqrt(2) y}`, which keeps the residual at roundoff level
//! instead of letting the saddle instability amplify bisection error.
//!
//! `w_c` solves `w''/2 + c w' + w - w^2 = 0`, `w(-inf) = 1`, `w(inf) = 0`.
//! The connecting orbit is the one-dimensional unstable manifold of
//! `w = 1`, so a single RK4 pass from a manifold seed produces the wave
//! with relative accuracy down to tail values of order `1e-300`; parabolic
//! relaxation cannot resolve the `1e-13`-scale tail the fit window needs.
//! The profile is then resampled so that `w(0) = 1/2`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bbm::{simulate_replica, SimConfig};
use crate::error::invalid;
use crate::martingales::evaluate_martingales;
use crate::seed::replica_seed;
use crate::stats::{mean_se, EstimateCi};
use crate::{Result, C_STAR};

use alloc::format;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Gridded 1D profile with values and first derivatives on uniform nodes.
#[derive(Clone, Debug)]
pub struct Profile1D {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// Wave speed, `None` for the steady state `phi`.
    pub speed_c: Option<f64>,
    /// Description of the normalization, e.g. `value 1/2 at 0`.
    pub pin: String,
}

impl Profile1D {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + self.h * i as f64
    }

    pub fn x_max(&self) -> f64 {
        self.x_at(self.len() - 1)
    }

    /// Cubic Hermite interpolation; clamps to the end values outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let pos = (x - self.x0) / self.h;
        if pos <= 0.0 {
            return self.values[0];
        }
        let n = self.len();
        if pos >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = pos.floor() as usize;
        let s = pos - i as f64;
        hermite(
            self.values[i],
            self.values[i + 1],
            self.derivs[i] * self.h,
            self.derivs[i + 1] * self.h,
            s,
        )
    }
}

fn hermite(v0: f64, v1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * v0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * v1
        + (s3 - s2) * m1
}

/// One RK4 step of the system `(u, v)' = (v, f(u))`.
#[inline]
fn rk4_step(u: f64, v: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let k1 = (v, f(u, v));
    let k2 = (v + 0.5 * h * k1.1, f(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1));
    let k3 = (v + 0.5 * h * k2.1, f(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1));
    let k4 = (v + h * k3.1, f(u + h * k3.0, v + h * k3.1));
    (
        u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

enum Shot {
    Under,
    Over,
    Bounded,
}

fn shoot_phi(slope: f64, y_max: f64, h: f64) -> Shot {
    let f = |u: f64, _v: f64| -2.0 * (u - u * u);
    let (mut u, mut v) = (0.0, slope);
    let n = (y_max / h).ceil() as usize;
    for _ in 0..n {
        let (nu, nv) = rk4_step(u, v, h, f);
        u = nu;
        v = nv;
        if u > 1.0 + 1e-12 {
            return Shot::Over;
        }
        if v < 0.0 && u < 1.0 - 1e-12 {
            return Shot::Under;
        }
    }
    Shot::Bounded
}

/// Solve the Dirichlet steady state `phi` on `[0, y_max]`.
pub fn solve_steady_phi(y_max: f64, h: f64) -> Result<Profile1D> {
    if !(y_max >= 20.0) {
        return Err(invalid!("solve_steady_phi: y_max must be >= 20, got {y_max}"));
    }
    if !(h > 0.0 && h <= 0.01) {
        return Err(invalid!("solve_steady_phi: h must be in (0, 0.01], got {h}"));
    }
    // Bracket phi'(0); the bounded branch separates under- and overshoots.
    let (mut lo, mut hi) = (0.5, 1.2);
    match (shoot_phi(lo, y_max, h), shoot_phi(hi, y_max, h)) {
        (Shot::Under | Shot::Bounded, Shot::Over) => {}
        (a, b) => {
            return Err(invalid!(
                "solve_steady_phi: bisection failed to bracket the bounded branch \
                 (slope {lo} -> {}, slope {hi} -> {})",
                shot_name(&a),
                shot_name(&b)
            ));
        }
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match shoot_phi(mid, y_max, h) {
            Shot::Over => hi = mid,
            _ => lo = mid,
        }
    }
    let slope = 0.5 * (lo + hi);

    let f = |u: f64, _v: f64| -2.0 * (u - u * u);
    let n = (y_max / h).round() as usize;
    let mut values = Vec::with_capacity(n + 1);
    let mut derivs = Vec::with_capacity(n + 1);
    values.push(0.0);
    derivs.push(slope);
    let (mut u, mut v) = (0.0, slope);
    let mut spliced: Option<f64> = None;
    for i in 1..=n {
        let y = h * i as f64;
        match spliced {
            None => {
                let (nu, nv) = rk4_step(u, v, h, f);
                u = nu;
                v = nv;
                if 1.0 - u <= 1e-6 {
                    // Continue on the stable manifold of (1, 0).
                    let kappa = (1.0 - u) * (SQRT_2 * y).exp();
                    spliced = Some(kappa);
                }
                values.push(u);
                derivs.push(v);
            }
            Some(kappa) => {
                let tail = kappa * (-SQRT_2 * y).exp();
                values.push(1.0 - tail);
                derivs.push(SQRT_2 * tail);
            }
        }
    }
    Ok(Profile1D {
        x0: 0.0,
        h,
        values,
        derivs,
        speed_c: None,
        pin: String::from("phi(0) = 0, bounded branch phi -> 1"),
    })
}

fn shot_name(s: &Shot) -> &'static str {
    match s {
        Shot::Under => "undershoot",
        Shot::Over => "overshoot",
        Shot::Bounded => "bounded",
    }
}

/// Residual `u''/2 + u - u^2` (steady state) or
/// `u''/2 + c u' + u - u^2` (wave) evaluated with 4th-order stencils on
/// the grid interior; returns the sup norm.
pub fn ode_residual(profile: &Profile1D) -> f64 {
    let c = profile.speed_c.unwrap_or(0.0);
    let h = profile.h;
    let v = &profile.values;
    let mut sup: f64 = 0.0;
    for i in 2..v.len().saturating_sub(2) {
        let dxx = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2])
            / (12.0 * h * h);
        let dx = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
        let r = 0.5 * dxx + c * dx + v[i] - v[i] * v[i];
        sup = sup.max(r.abs());
    }
    sup
}

/// Solve the 1D traveling wave of speed `c >= sqrt(2)` on `[x_lo, x_hi]`,
/// pinned so that `w(0) = 1/2`.
pub fn solve_wave_1d(c: f64, x_range: (f64, f64), h: f64) -> Result<Profile1D> {
    solve_wave_1d_seeded(c, x_range, h, 1e-10)
}

/// As [`solve_wave_1d`] but with an explicit unstable-manifold seed
/// amplitude; different seeds land on the same orbit, so the pinned
/// profiles must agree (exercised by the uniqueness test).
pub fn solve_wave_1d_seeded(
    c: f64,
    x_range: (f64, f64),
    h: f64,
    delta: f64,
) -> Result<Profile1D> {
    if !(c >= C_STAR - 1e-6) {
        return Err(invalid!(
            "solve_wave_1d: no monotone wave below c* = sqrt(2), got c = {c}"
        ));
    }
    let c = c.max(C_STAR);
    let (x_lo, x_hi) = x_range;
    if !(x_hi > x_lo) || !(h > 0.0) {
        return Err(invalid!("solve_wave_1d: bad range or spacing"));
    }
    if !(delta > 0.0 && delta < 1e-4) {
        return Err(invalid!("solve_wave_1d: manifold seed must be tiny and positive"));
    }

    // March along the unstable manifold of w = 1 until the tail floor.
    let rho_u = -c + (c * c + 2.0).sqrt();
    let h_int = h.min(0.005);
    let f = |u: f64, v: f64| -2.0 * (c * v + u - u * u);
    let (mut u, mut v) = (1.0 - delta, -delta * rho_u);
    let mut us = Vec::with_capacity(1 << 16);
    let mut vs = Vec::with_capacity(1 << 16);
    us.push(u);
    vs.push(v);
    let span_max = ((0.5f64 / delta).ln() / rho_u + (x_hi - x_lo) + 60.0) / h_int;
    let mut half_idx = None;
    for i in 1..=(span_max as usize) {
        let (nu, nv) = rk4_step(u, v, h_int, f);
        u = nu;
        v = nv;
        us.push(u);
        vs.push(v);
        if half_idx.is_none() && u <= 0.5 {
            half_idx = Some(i);
        }
        if let Some(k) = half_idx {
            if u < 1e-290 || (i - k) as f64 * h_int > x_hi + 5.0 {
                break;
            }
        }
    }
    let k = half_idx
        .ok_or_else(|| invalid!("solve_wave_1d: front not reached; widen the integration span"))?;
    // Sub-node crossing location, solved on the same Hermite interpolant
    // used for resampling so the pin is exact at interpolation accuracy.
    let frac = {
        let (v0, v1) = (us[k - 1], us[k]);
        let (m0, m1) = (vs[k - 1] * h_int, vs[k] * h_int);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hermite(v0, v1, m0, m1, mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let x_half = ((k - 1) as f64 + frac) * h_int;

    let raw = Profile1D {
        x0: -x_half,
        h: h_int,
        values: us,
        derivs: vs,
        speed_c: Some(c),
        pin: String::new(),
    };
    let n = ((x_hi - x_lo) / h).round() as usize;
    let mut values = Vec::with_capacity(n + 1);
    let mut derivs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = x_lo + h * i as f64;
        let w = raw.value_at(x).clamp(0.0, 1.0);
        values.push(w);
        // Derivative from the ODE phase variable, Hermite on v.
        let pos = ((x - raw.x0) / h_int).clamp(0.0, (raw.len() - 1) as f64);
        let j = (pos.floor() as usize).min(raw.len() - 2);
        let s = pos - j as f64;
        derivs.push(raw.derivs[j] * (1.0 - s) + raw.derivs[j + 1] * s);
    }
    Ok(Profile1D {
        x0: x_lo,
        h,
        values,
        derivs,
        speed_c: Some(c),
        pin: String::from("w(0) = 1/2"),
    })
}

/// Least-squares fit of `w(x) e^{sqrt(2) x}` against `K (x + a)` on a
/// window of the minimal-speed tail.
///
/// Returns `(K_star, a, sup-norm residual of the fit on the window)`.
pub fn fit_tail_constant(profile: &Profile1D, window: (f64, f64)) -> Result<(f64, f64, f64)> {
    match profile.speed_c {
        Some(c) if (c - C_STAR).abs() <= 1e-9 => {}
        _ => {
            return Err(invalid!(
                "fit_tail_constant: the x + a tail form holds at the minimal speed only"
            ));
        }
    }
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut theta = Vec::new();
    for i in 0..profile.len() {
        let x = profile.x_at(i);
        if x >= lo && x <= hi {
            let w = profile.values[i];
            if !(w > 1e-13) {
                return Err(invalid!(
                    "fit_tail_constant: profile underflows the window at x = {x}"
                ));
            }
            xs.push(x);
            theta.push(w * (SQRT_2 * x).exp());
        }
    }
    if xs.len() < 20 {
        return Err(invalid!(
            "fit_tail_constant: window holds {} grid points, need >= 20",
            xs.len()
        ));
    }
    // theta ~ K x + b with a = b / K.
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let mt = theta.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxt: f64 = xs.iter().zip(&theta).map(|(&x, &t)| (x - mx) * (t - mt)).sum();
    let k_star = sxt / sxx;
    let b = mt - k_star * mx;
    let a = b / k_star;
    let resid = xs
        .iter()
        .zip(&theta)
        .map(|(&x, &t)| (t - k_star * (x + a)).abs())
        .fold(0.0f64, f64::max);
    Ok((k_star, a, resid))
}

/// Per-replica samples of the shaved 1D derivative martingale `D_T^alpha`
/// (killing disabled; the horizontal part of the planar BBM is a 1D BBM).
pub fn d_alpha_samples(t: f64, alpha: f64, replicas: usize, seed: u64) -> Result<Vec<f64>> {
    crate::runner::map_replicas(replicas, |i| {
        let cfg = SimConfig::new(1.0, t, false, replica_seed(seed, i));
        let snap = simulate_replica(&cfg)?.remove(0);
        Ok(evaluate_martingales(&snap, &[alpha], &[])?.d_alpha[0].1)
    })
}

/// Monte Carlo estimate of the Laplace-transform translate of the 1D
/// minimal wave, `1 - E exp(-e^{-sqrt(2) x} D_T^alpha)`.
pub fn laplace_wave_1d_mc(x: f64, t: f64, replicas: usize, seed: u64) -> Result<EstimateCi> {
    let alpha = 8.0;
    if replicas < 100 {
        return Err(invalid!("laplace_wave_1d_mc: fewer than 100 replicas"));
    }
    let samples = d_alpha_samples(t, alpha, replicas, seed)?;
    Ok(estimate_from_d_alpha(&samples, x, t, alpha))
}

/// Evaluate the wave estimate at `x` from precomputed `D_T^alpha` samples;
/// reusing one sample set across probe points couples them (common random
/// numbers), which makes monotonicity in `x` hold replica-by-replica.
pub fn estimate_from_d_alpha(samples: &[f64], x: f64, t: f64, alpha: f64) -> EstimateCi {
    let weight = (-SQRT_2 * x).exp();
    let vals: Vec<f64> = samples.iter().map(|&d| (-weight * d).exp()).collect();
    let (mean, se) = mean_se(&vals);
    EstimateCi {
        value: 1.0 - mean,
        std_error: se,
        replicas: samples.len(),
        horizon_t: t,
        meta: format!("laplace_wave_1d_mc x={x} alpha={alpha}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_default() -> Profile1D {
        solve_steady_phi(30.0, 0.01).unwrap()
    }

    #[test]
    fn phi_boundary_and_limit() {
        let phi = phi_default();
        assert_eq!(phi.values[0], 0.0);
        let last = *phi.values.last().unwrap();
        assert!((1.0 - 1e-3..=1.0).contains(&last), "phi(y_max) = {last}");
        // Monotone increasing within [0, 1].
        for w in phi.values.windows(2) {
            assert!(w[1] >= w[0] - 1e-14);
            assert!((0.0..=1.0).contains(&w[1]));
        }
    }

    #[test]
    fn phi_slope_matches_first_integral() {
        // First integral: phi'^2/2 + phi^2 - (2/3) phi^3 = 1/3 evaluated
        // at 0 and infinity gives phi'(0) = sqrt(2/3).
        let phi = phi_default();
        let target = (2.0f64 / 3.0).sqrt();
        assert!(
            (phi.derivs[0] - target).abs() < 1e-4,
            "phi'(0) = {}, want {target}",
            phi.derivs[0]
        );
    }

    #[test]
    fn phi_first_integral_conserved() {
        let phi = phi_default();
        for i in (0..phi.len()).step_by(50) {
            let (u, v) = (phi.values[i], phi.derivs[i]);
            let e = 0.5 * v * v + u * u - 2.0 / 3.0 * u * u * u;
            assert!((e - 1.0 / 3.0).abs() < 1e-6, "first integral drifted to {e} at i={i}");
        }
    }

    #[test]
    fn phi_residual_below_tolerance() {
        let phi = phi_default();
        let r = ode_residual(&phi);
        assert!(r < 1e-6, "sup residual {r}");
    }

    #[test]
    fn phi_refinement_stability() {
        let a = solve_steady_phi(30.0, 0.01).unwrap();
        let b = solve_steady_phi(30.0, 0.005).unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..a.len() {
            sup = sup.max((a.values[i] - b.value_at(a.x_at(i))).abs());
        }
        assert!(sup < 1e-4, "refinement changed phi by {sup}");
    }

    #[test]
    fn phi_rejects_bad_arguments() {
        assert!(solve_steady_phi(10.0, 0.01).is_err());
        assert!(solve_steady_phi(30.0, 0.1).is_err());
    }

    #[test]
    fn wave_pin_and_monotonicity() {
        let w = solve_wave_1d(C_STAR, (-20.0, 30.0), 0.01).unwrap();
        assert!((w.value_at(0.0) - 0.5).abs() < 1e-8, "pin w(0) = {}", w.value_at(0.0));
        for win in w.values.windows(2) {
            assert!(win[1] <= win[0] + 1e-12, "wave must decrease");
        }
        assert!(w.values[0] > 0.999);
        let r = ode_residual(&w);
        assert!(r < 1e-6, "wave residual {r}");
    }

    #[test]
    fn supercritical_tail_rate() {
        // c = 2: log-slope of w on [15, 25] is the slow root 2 - sqrt(2).
        let w = solve_wave_1d(2.0, (-20.0, 30.0), 0.01).unwrap();
        let rho = 2.0 - SQRT_2;
        let (x1, x2) = (15.0, 25.0);
        let slope = -(w.value_at(x2).ln() - w.value_at(x1).ln()) / (x2 - x1);
        assert!(
            (slope - rho).abs() / rho < 0.02,
            "tail rate {slope}, want {rho} within 2%"
        );
    }

    #[test]
    fn wave_rejects_subminimal_speed() {
        assert!(solve_wave_1d(1.0, (-10.0, 10.0), 0.01).is_err());
        // Rounded-down sqrt(2) is accepted within 1e-6.
        assert!(solve_wave_1d(1.4142135, (-10.0, 10.0), 0.01).is_ok());
    }

    #[test]
    fn wave_independent_seeds_agree_after_pinning() {
        // Two manifold seeds parametrize the same orbit; after the w(0)=1/2
        // pin the profiles must agree within 1e-6.
        let a = solve_wave_1d_seeded(C_STAR, (-10.0, 25.0), 0.01, 1e-8).unwrap();
        let b = solve_wave_1d_seeded(C_STAR, (-10.0, 25.0), 0.01, 1e-12).unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..a.len() {
            sup = sup.max((a.values[i] - b.values[i]).abs());
        }
        assert!(sup < 1e-6, "pinned profiles differ by {sup}");
    }

    #[test]
    fn tail_fit_window_stability_and_rejections() {
        let w = solve_wave_1d(C_STAR, (-10.0, 30.0), 0.01).unwrap();
        let (k1, a1, r1) = fit_tail_constant(&w, (12.0, 22.0)).unwrap();
        let (k2, _a2, _r2) = fit_tail_constant(&w, (14.0, 24.0)).unwrap();
        assert!(k1 > 0.0);
        assert!(
            (k1 - k2).abs() / k1 < 0.01,
            "K* window instability: {k1} vs {k2}"
        );
        assert!(r1 / k1 < 1e-2, "fit residual ratio {}", r1 / k1);
        assert!(a1.is_finite());

        let sup = solve_wave_1d(2.0, (-10.0, 30.0), 0.01).unwrap();
        assert!(fit_tail_constant(&sup, (12.0, 22.0)).is_err());
        // Window with too few points.
        assert!(fit_tail_constant(&w, (12.0, 12.1)).is_err());
    }

    #[test]
    fn laplace_wave_basics() {
        assert!(laplace_wave_1d_mc(0.0, 1.0, 50, 1).is_err());
        let far = laplace_wave_1d_mc(40.0, 1.0, 200, 7).unwrap();
        assert!(far.value.abs() <= far.std_error.max(1e-12), "x -> inf estimate {}", far.value);

        // Decreasing in x under common random numbers.
        let samples = d_alpha_samples(1.0, 8.0, 300, 11).unwrap();
        let e1 = estimate_from_d_alpha(&samples, -1.0, 1.0, 8.0);
        let e2 = estimate_from_d_alpha(&samples, 0.0, 1.0, 8.0);
        let e3 = estimate_from_d_alpha(&samples, 1.0, 1.0, 8.0);
        assert!(e1.value > e2.value && e2.value > e3.value);
    }
}
