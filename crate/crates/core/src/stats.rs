//! Compensated summation and the small statistical toolkit used by the
//! Monte Carlo experiments: mean/standard-error, quantiles, two-sample
//! Kolmogorov–Smirnov, and least-squares slope. All reductions are written
//! to be evaluated in a fixed (replica-index) order so that outputs do not
//! depend on scheduling.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::invalid;
use crate::Result;

/// Kahan–Babuška compensated accumulator.
///
/// The martingale sums mix terms spanning hundreds of orders of magnitude;
/// compensation keeps the result independent of harmless regroupings and
/// reproducible across platforms at f64 precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum `values` in order with compensation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Sample mean and standard error (`sd / sqrt(n)`), fixed-order reduction.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = kahan_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    (mean, sd / (n as f64).sqrt())
}

/// Quantile by linear interpolation of order statistics (`q` in `[0,1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Median / quartiles of an unsorted sample.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75))
}

/// Asymptotic Kolmogorov survival function `Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid!("ks_two_sample: empty sample"));
    }
    let mut xa: Vec<f64> = a.to_vec();
    let mut xb: Vec<f64> = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).expect("NaN in sample"));
    xb.sort_by(|p, q| p.partial_cmp(q).expect("NaN in sample"));
    let (n, m) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xa[i].min(xb[j]);
        while i < n && xa[i] <= x {
            i += 1;
        }
        while j < m && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let ne_sqrt = ne.sqrt();
    let p = kolmogorov_q((ne_sqrt + 0.12 + 0.11 / ne_sqrt) * d);
    Ok((d, p))
}

/// Least-squares slope of `y` on `x` through the mean, with its standard error.
pub fn regression_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(invalid!("regression_slope: need matched samples of size >= 3"));
    }
    let n = x.len() as f64;
    let mx = kahan_sum(x.iter().copied()) / n;
    let my = kahan_sum(y.iter().copied()) / n;
    let sxx = kahan_sum(x.iter().map(|&v| (v - mx) * (v - mx)));
    if sxx == 0.0 {
        return Err(invalid!("regression_slope: degenerate regressor"));
    }
    let sxy = kahan_sum(x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = kahan_sum(
        x.iter()
            .zip(y)
            .map(|(&u, &v)| {
                let r = v - intercept - slope * u;
                r * r
            }),
    );
    let se = (ssr / (n - 2.0) / sxx).sqrt();
    Ok((slope, se))
}

/// Least-squares slope with a heteroskedasticity-robust (sandwich, HC1)
/// standard error.
///
/// The martingale functionals are extremely heavy-tailed: a handful of
/// replicas dominate both covariance and variance, so the homoskedastic
/// slope error would be wildly optimistic. The sandwich form weights each
/// replica's residual by its own leverage and stays honest in that regime.
pub fn regression_slope_robust(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(invalid!("regression_slope_robust: need matched samples of size >= 3"));
    }
    let n = x.len() as f64;
    let mx = kahan_sum(x.iter().copied()) / n;
    let my = kahan_sum(y.iter().copied()) / n;
    let sxx = kahan_sum(x.iter().map(|&v| (v - mx) * (v - mx)));
    if sxx == 0.0 {
        return Err(invalid!("regression_slope_robust: degenerate regressor"));
    }
    let sxy = kahan_sum(x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let meat = kahan_sum(x.iter().zip(y).map(|(&u, &v)| {
        let r = v - intercept - slope * u;
        let lx = u - mx;
        lx * lx * r * r
    }));
    let se = (meat * n / (n - 2.0)).sqrt() / sxx;
    Ok((slope, se))
}

/// Weighted least-squares slope with Cauchy weights `1/(1 + (x/s)^2)`
/// and a sandwich standard error.
///
/// Valid whenever the conditional mean is exactly linear, `E[y|x] = b x`:
/// any weight that depends on `x` alone leaves the slope unbiased, and
/// downweighting the rare huge regressors restores a usable effective
/// sample size where plain least squares is dominated by a handful of
/// extreme replicas.
pub fn wls_slope_cauchy(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(invalid!("wls_slope_cauchy: need matched samples of size >= 3"));
    }
    let mut abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let scale = quantile(&abs, 0.5).max(1e-12) * 3.0;
    let w: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + (v / scale) * (v / scale))).collect();
    let n = x.len() as f64;
    let sw = kahan_sum(w.iter().copied());
    let mx = kahan_sum(w.iter().zip(x).map(|(&wi, &u)| wi * u)) / sw;
    let my = kahan_sum(w.iter().zip(y).map(|(&wi, &v)| wi * v)) / sw;
    let sxx = kahan_sum(w.iter().zip(x).map(|(&wi, &u)| wi * (u - mx) * (u - mx)));
    if sxx == 0.0 {
        return Err(invalid!("wls_slope_cauchy: degenerate regressor"));
    }
    let sxy = kahan_sum(
        w.iter().zip(x).zip(y).map(|((&wi, &u), &v)| wi * (u - mx) * (v - my)),
    );
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let meat = kahan_sum(w.iter().zip(x).zip(y).map(|((&wi, &u), &v)| {
        let r = v - intercept - slope * u;
        let lx = wi * (u - mx);
        lx * lx * r * r
    }));
    let se = (meat * n / (n - 2.0)).sqrt() / sxx;
    Ok((slope, se))
}

/// Monte Carlo point estimate with its uncertainty and provenance.
#[derive(Clone, Debug)]
pub struct EstimateCi {
    pub value: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub horizon_t: f64,
    /// Free-form provenance (estimator name and parameters).
    pub meta: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    #[test]
    fn kahan_beats_naive_on_mixed_scales() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(kahan_sum(terms.iter().copied()), 2.0);
    }

    #[test]
    fn mean_se_matches_hand_values() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // sd = sqrt(5/3), se = sd/2
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn quartiles_of_small_sample() {
        let (q1, q2, q3) = quartiles(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(q2, 2.5);
        assert_eq!(q1, 1.75);
        assert_eq!(q3, 3.25);
    }

    #[test]
    fn ks_identical_samples_have_high_p() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert!(p > 0.999, "p = {p}");
    }

    #[test]
    fn ks_disjoint_samples_have_tiny_p() {
        let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..200).map(|i| 1000.0 + i as f64).collect();
        let (d, p) = ks_two_sample(&a, &b).unwrap();
        assert_eq!(d, 1.0);
        assert!(p < 1e-10);
    }

    #[test]
    fn slope_of_exact_line_is_exact() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (slope, se) = regression_slope(&x, &y).unwrap();
        assert!((slope - 3.0).abs() < 1e-12);
        assert!(se < 1e-12, "se = {se}");
    }

    #[test]
    fn kolmogorov_q_reference_values() {
        // Q(0.5) ~ 0.9639, Q(1.0) ~ 0.2700, Q(2.0) ~ 0.00067
        assert!((kolmogorov_q(1.0) - 0.27).abs() < 1e-3, "{}", format!("{}", kolmogorov_q(1.0)));
        assert!(kolmogorov_q(0.5) > 0.96);
        assert!(kolmogorov_q(2.0) < 1e-3);
    }
}
