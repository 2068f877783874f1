//! Small numerical building blocks shared by the samplers and diagnostics.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

/// log Poisson(y | mu) including the factorial term.
pub fn poisson_log_pmf(y: u64, mu: f64) -> f64 {
    if mu <= 0.0 {
        return if y == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    y as f64 * mu.ln() - mu - log_factorial(y)
}

pub fn log_factorial(y: u64) -> f64 {
    ln_gamma(y as f64 + 1.0)
}

/// Poisson log-likelihood kernel `y * eta - e * exp(eta)` for log-risk `eta`,
/// dropping terms that do not depend on `eta`.
#[inline]
pub fn poisson_kernel(y: f64, e: f64, eta: f64) -> f64 {
    y * eta - e * eta.exp()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate for large positive `x`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn std_normal_inv_cdf(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn std_normal_inv_sf(p: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * p)
}

pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// log of the upper tail probability, switching to the asymptotic series once
/// `erfc` underflows.
fn log_std_normal_sf(x: f64) -> f64 {
    if x < 30.0 {
        std_normal_sf(x).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        std_normal_log_pdf(x) - x.ln() + series.ln()
    }
}

/// log(Phi(b) - Phi(a)) for standardized bounds `a < b` (either may be infinite).
pub fn log_std_normal_interval(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if b <= 0.0 {
        return log_std_normal_interval(-b, -a);
    }
    if a >= 0.0 {
        let la = log_std_normal_sf(a);
        let lb = log_std_normal_sf(b);
        // log(Q(a) - Q(b)) = log Q(a) + log(1 - Q(b)/Q(a))
        la + (-(lb - la).exp()).ln_1p()
    } else {
        (std_normal_cdf(b) - std_normal_cdf(a)).ln()
    }
}

/// Draw from a standard normal truncated to `(a, b)`.
///
/// Inverse-CDF on whichever tail keeps the probabilities away from 1, with a
/// rejection sampler once the interval sits too far out for that to be exact.
pub fn sample_std_truncated_normal<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    assert!(a < b, "empty truncation interval ({a}, {b})");
    if b <= 0.0 {
        return -sample_std_truncated_normal(-b, -a, rng);
    }
    let u: f64 = rng.random();
    if a >= 0.0 {
        if a > 8.0 {
            return sample_far_tail(a, b, rng);
        }
        let pa = std_normal_sf(a);
        let pb = std_normal_sf(b);
        let x = std_normal_inv_sf(pb + u * (pa - pb));
        x.clamp(a, b)
    } else {
        let pa = std_normal_cdf(a);
        let pb = std_normal_cdf(b);
        let x = std_normal_inv_cdf(pa + u * (pb - pa));
        x.clamp(a, b)
    }
}

/// Rejection sampling for `(a, b)` with `a > 8`: translated exponential
/// proposals for wide intervals, uniform proposals for narrow ones.
fn sample_far_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b - a < 2.0 / a {
        loop {
            let z = a + (b - a) * rng.random::<f64>();
            let log_accept = -0.5 * (z * z - a * a);
            if rng.random::<f64>().ln() < log_accept {
                return z;
            }
        }
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let u: f64 = rng.random();
        let z = a - (1.0 - u).ln() / rate;
        if z >= b {
            continue;
        }
        let log_accept = -0.5 * (z - rate) * (z - rate);
        if rng.random::<f64>().ln() < log_accept {
            return z;
        }
    }
}

/// Draw from N(mean, sd^2) truncated to `(lo, hi)`.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> f64 {
    let z = sample_std_truncated_normal((lo - mean) / sd, (hi - mean) / sd, rng);
    (mean + sd * z).clamp(lo, hi)
}

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Inverse-Gamma(shape, rate) draw, i.e. `1 / Gamma(shape, scale = 1 / rate)`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let gamma = Gamma::new(shape, 1.0 / rate).expect("inverse-gamma parameters must be positive");
    1.0 / gamma.sample(rng)
}

/// Sample median; mean of the two central values for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Normalize log-weights in place into probabilities.
pub fn normalize_log_weights(log_weights: &mut [f64]) {
    let lse = log_sum_exp(log_weights);
    for w in log_weights.iter_mut() {
        *w = (*w - lse).exp();
    }
}

/// Inverse-CDF draw of an index from a probability vector.
pub fn sample_discrete<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn poisson_pmf_matches_direct_formula() {
        let direct = (-3.0f64).exp() * 3.0f64.powi(4) / 24.0;
        assert!((poisson_log_pmf(4, 3.0) - direct.ln()).abs() < 1e-12);
        assert_eq!(poisson_log_pmf(0, 0.0), 0.0);
    }

    #[test]
    fn interval_log_mass_in_both_regimes() {
        let direct = (std_normal_cdf(1.0) - std_normal_cdf(-0.5)).ln();
        assert!((log_std_normal_interval(-0.5, 1.0) - direct).abs() < 1e-14);
        let tail = (std_normal_sf(3.0) - std_normal_sf(4.0)).ln();
        assert!((log_std_normal_interval(3.0, 4.0) - tail).abs() < 1e-12);
        let mirrored = log_std_normal_interval(-4.0, -3.0);
        assert!((mirrored - tail).abs() < 1e-12);
        // beyond erfc's range the series takes over and stays finite
        assert!(log_std_normal_interval(50.0, f64::INFINITY).is_finite());
    }

    #[test]
    fn truncated_draws_respect_bounds_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(a, b) in &[(-1.0, 2.0), (2.0, 3.0), (-3.0, -2.5), (9.0, 9.05), (10.0, f64::INFINITY)] {
            let n = 20_000;
            let mut sum = 0.0;
            for _ in 0..n {
                let x = sample_std_truncated_normal(a, b, &mut rng);
                assert!(x >= a && x <= b);
                sum += x;
            }
            // E[X] = (phi(a) - phi(b)) / (Phi(b) - Phi(a)) evaluated in log space
            let log_z = log_std_normal_interval(a, b);
            let pdf = |x: f64| if x.is_finite() { std_normal_log_pdf(x).exp() } else { 0.0 };
            let mean = (pdf(a) - pdf(b)) / log_z.exp();
            let mean = if mean.is_finite() { mean } else { a };
            assert!((sum / n as f64 - mean).abs() < 0.03, "{a},{b}: {} vs {mean}", sum / n as f64);
        }
    }

    #[test]
    fn median_and_quantiles() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        let sorted = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&sorted, 0.5), 2.0);
        assert!((quantile_sorted(&sorted, 0.025) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn discrete_sampler_and_normalization() {
        let mut w = [0.0, (2.0f64).ln()];
        normalize_log_weights(&mut w);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..30_000)
            .filter(|_| sample_discrete(&w, &mut rng) == 1)
            .count() as f64;
        assert!((hits / 30_000.0 - 2.0 / 3.0).abs() < 0.01);
    }
}
