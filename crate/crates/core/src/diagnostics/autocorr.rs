use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Shortest indicator series accepted by [`asymptotic_variance`].
pub const MIN_LENGTH: usize = 1000;

/// Sample autocorrelations `ρ_0 … ρ_max_lag` (biased estimator, via FFT).
///
/// A constant series has `ρ_0 = 1` and all other lags 0.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let lags = max_lag.min(n.saturating_sub(1));
    if n == 0 {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    let mut out = Vec::with_capacity(lags + 1);
    out.push(1.0);
    for t in 1..=lags {
        out.push(if c0 > 0.0 { buf[t].re / c0 } else { 0.0 });
    }
    out
}

/// Integrated autocorrelation time `τ = 1 + 2 Σ ρ_t`, truncated with
/// Geyer's initial positive sequence: pairs `Γ_m = ρ_{2m} + ρ_{2m+1}` are
/// summed while positive. Returns `(τ, number of lags used)`.
pub fn integrated_autocorrelation_time(x: &[f64]) -> (f64, usize) {
    let n = x.len();
    if n < 2 {
        return (1.0, 0);
    }
    let rho = autocorrelation(x, n - 1);
    let mut sum = 0.0;
    let mut m = 0;
    while 2 * m + 1 < rho.len() {
        let gamma = rho[2 * m] + rho[2 * m + 1];
        if !(gamma > 0.0) {
            break;
        }
        sum += gamma;
        m += 1;
    }
    ((2.0 * sum - 1.0).max(0.0), 2 * m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticVariance {
    /// Estimated mean `p̂`.
    pub mean: f64,
    /// `σ²_a = (p̂(1−p̂)/N) τ`.
    pub sigma2_a: f64,
    /// `σ² = p̂(1−p̂)/N`.
    pub sigma2: f64,
    pub tau: f64,
    /// All-0 or all-1 series: both variances are zero.
    pub degenerate: bool,
}

/// Asymptotic variance of the mean of a binary indicator series.
pub fn asymptotic_variance(indicator: &[bool]) -> Result<AsymptoticVariance> {
    let n = indicator.len();
    if n < MIN_LENGTH {
        return Err(Error::Invalid(format!(
            "indicator series has {n} points; at least {MIN_LENGTH} are needed"
        )));
    }
    let hits = indicator.iter().filter(|&&b| b).count();
    let mean = hits as f64 / n as f64;
    if hits == 0 || hits == n {
        return Ok(AsymptoticVariance {
            mean,
            sigma2_a: 0.0,
            sigma2: 0.0,
            tau: 0.0,
            degenerate: true,
        });
    }
    let x: Vec<f64> = indicator.iter().map(|&b| f64::from(u8::from(b))).collect();
    let (tau, _) = integrated_autocorrelation_time(&x);
    let sigma2 = mean * (1.0 - mean) / n as f64;
    Ok(AsymptoticVariance {
        mean,
        sigma2_a: sigma2 * tau,
        sigma2,
        tau,
        degenerate: false,
    })
}

/// `R = σ²_a/σ²` and `R` scaled by the per-iteration CPU cost relative to a
/// reference algorithm's per-iteration cost.
pub fn efficiency_ratio(
    sigma2_a: f64,
    sigma2: f64,
    cpu_seconds: f64,
    iterations: u64,
    reference_cpu_per_iteration: f64,
) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    if iterations == 0 || !(reference_cpu_per_iteration > 0.0) {
        return Err(Error::Invalid("timing normalisation needs positive costs".into()));
    }
    let r = sigma2_a / sigma2;
    let per_iter = cpu_seconds / iterations as f64;
    Ok((r, r * per_iter / reference_cpu_per_iteration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn constant_series() {
        let x = vec![3.0; 50];
        let r = autocorrelation(&x, 5);
        assert_eq!(r, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let mut rng = RngStream::new(4, 0).rng();
        let x: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let c = |t: usize| (0..x.len() - t).map(|i| (x[i] - mean) * (x[i + t] - mean)).sum::<f64>();
        let r = autocorrelation(&x, 10);
        for t in 0..=10 {
            assert!((r[t] - c(t) / c(0)).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_bernoulli_has_unit_ratio() {
        let mut rng = RngStream::new(11, 0).rng();
        let x: Vec<bool> = (0..100_000).map(|_| rng.random::<bool>()).collect();
        let v = asymptotic_variance(&x).unwrap();
        assert!((v.sigma2_a / v.sigma2 - 1.0).abs() < 0.1, "{}", v.tau);
    }

    #[test]
    fn two_state_markov_chain_matches_closed_form() {
        // Flip with probability q: ρ_t = λ^t with λ = 1 − 2q, τ = (1+λ)/(1−λ).
        let q = 0.1;
        let lambda = 1.0 - 2.0 * q;
        let exact = (1.0 + lambda) / (1.0 - lambda);
        let mut rng = RngStream::new(12, 0).rng();
        let mut s = false;
        let x: Vec<bool> = (0..400_000)
            .map(|_| {
                if rng.random::<f64>() < q {
                    s = !s;
                }
                s
            })
            .collect();
        let v = asymptotic_variance(&x).unwrap();
        assert!((v.tau / exact - 1.0).abs() < 0.1, "{} vs {exact}", v.tau);
        assert!(v.sigma2_a >= 0.0);
    }

    #[test]
    fn degenerate_and_short_series() {
        let v = asymptotic_variance(&vec![true; 2000]).unwrap();
        assert!(v.degenerate && v.sigma2_a == 0.0);
        assert!(asymptotic_variance(&[true, false]).is_err());
    }

    #[test]
    fn efficiency_ratio_is_linear_in_time() {
        let (r, a) = efficiency_ratio(2.0, 1.0, 10.0, 100, 0.1).unwrap();
        assert_eq!(r, 2.0);
        assert!((a - 2.0).abs() < 1e-12);
        let (_, b) = efficiency_ratio(2.0, 1.0, 20.0, 100, 0.1).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(matches!(
            efficiency_ratio(1.0, 0.0, 1.0, 1, 1.0),
            Err(Error::ZeroVariance)
        ));
    }
}
