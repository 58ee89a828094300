//! Monte Carlo aggregation: summaries, Gaussian KDE, and goodness-of-fit
//! statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, exp, powf, sqrt};
use crate::math::gamma::gamma_q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatsError {
    TooFewSamples,
    /// zero-variance input where a spread is required
    DegenerateSamples,
    InvalidBandwidth,
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            StatsError::TooFewSamples => "need at least two samples",
            StatsError::DegenerateSamples => "samples have zero variance",
            StatsError::InvalidBandwidth => "bandwidth must be positive",
        };
        f.write_str(msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StatsError {}

/// Mean with a 95% normal confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McSummary {
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
}

/// Summarize samples: mean, standard error, mean ± 1.96·SE.
pub fn summarize(samples: &[f64]) -> Result<McSummary, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewSamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let std_error = sqrt(ss / (n - 1.0) / n);
    Ok(McSummary {
        count: samples.len(),
        mean,
        std_error,
        ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
    })
}

/// Bandwidth choice for the Gaussian KDE.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    /// h = 1.06 σ̂ m^{-1/5}
    Silverman,
    Fixed(f64),
}

/// Gaussian kernel density estimate on a grid:
/// (1/(m h)) Σ φ((x - x_i)/h).
pub fn kde_gaussian(
    samples: &[f64],
    bandwidth: Bandwidth,
    grid: &[f64],
) -> Result<Vec<f64>, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewSamples);
    }
    let h = match bandwidth {
        Bandwidth::Fixed(h) if h > 0.0 => h,
        Bandwidth::Fixed(_) => return Err(StatsError::InvalidBandwidth),
        Bandwidth::Silverman => {
            let m = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / m;
            let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
            if var <= 0.0 {
                return Err(StatsError::DegenerateSamples);
            }
            1.06 * sqrt(var) * powf(m, -0.2)
        }
    };
    let norm = 1.0 / (samples.len() as f64 * h * sqrt(2.0 * core::f64::consts::PI));
    let mut out = vec![0.0; grid.len()];
    for (g, slot) in grid.iter().zip(out.iter_mut()) {
        let mut acc = 0.0;
        for &x in samples {
            let z = (g - x) / h;
            acc += exp(-0.5 * z * z);
        }
        *slot = acc * norm;
    }
    Ok(out)
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples`
/// (right-continuous, jump 1/m at each sample) and a reference `cdf`.
///
/// The reference is evaluated both at each sample point and just below it,
/// so a step reference with atoms exactly at the sample points (e.g. constant
/// samples against their own step CDF) compares to distance zero.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    debug_assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0usize;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == x {
            j += 1;
        }
        let lo = i as f64 / m;
        let hi = (j + 1) as f64 / m;
        let f_at = cdf(x);
        let f_below = cdf(libm::nextafter(x, f64::NEG_INFINITY));
        d = d
            .max(math::abs(f_below - lo))
            .max(math::abs(f_at - hi));
        i = j + 1;
    }
    d.clamp(0.0, 1.0)
}

/// Chi-square goodness-of-fit p-value for observed vs expected counts
/// (dof = bins - 1).
pub fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    debug_assert_eq!(observed.len(), expected.len());
    debug_assert!(observed.len() >= 2);
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected.iter()) {
        debug_assert!(e > 0.0);
        stat += (o - e) * (o - e) / e;
    }
    let dof = (observed.len() - 1) as f64;
    gamma_q(dof / 2.0, stat / 2.0)
}

/// Kolmogorov distribution survival function Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.1 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = exp(-2.0 * kf * kf * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test: returns (D, asymptotic p-value).
/// Ties are handled by advancing both samples through equal values before
/// recording the gap.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> (f64, f64) {
    debug_assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (m, n) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < m && j < n {
        let v = xs[i].min(ys[j]);
        while i < m && xs[i] == v {
            i += 1;
        }
        while j < n && ys[j] == v {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / m as f64 - j as f64 / n as f64));
    }
    let ne = (m as f64 * n as f64) / (m as f64 + n as f64);
    let sq = sqrt(ne);
    let p = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    (d, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;
    use crate::rng::Stream;

    #[test]
    fn summarize_examples() {
        let s = summarize(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.ci95, (1.0, 1.0));

        let s = summarize(&[0.0, 2.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert!(abs(s.std_error - 1.0) < 1e-15);

        let mut rng = Stream::new(1);
        let u: Vec<f64> = (0..100_000).map(|_| rng.uniform()).collect();
        let s = summarize(&u).unwrap();
        assert!(abs(s.mean - 0.5) < 0.01);
        assert!(summarize(&[1.0]).is_err());
    }

    #[test]
    fn summarize_permutation_invariant() {
        let mut rng = Stream::new(2);
        let v: Vec<f64> = (0..1000).map(|_| rng.normal()).collect();
        let mut rev = v.clone();
        rev.reverse();
        let a = summarize(&v).unwrap();
        let b = summarize(&rev).unwrap();
        assert!(abs(a.mean - b.mean) < 1e-12);
        assert!(abs(a.std_error - b.std_error) < 1e-12);
    }

    #[test]
    fn kde_single_value_is_gaussian_bump() {
        let samples = vec![2.0; 100];
        let grid: Vec<f64> = (0..81).map(|i| i as f64 * 0.1).collect();
        let h = 0.5;
        let kde = kde_gaussian(&samples, Bandwidth::Fixed(h), &grid).unwrap();
        for (g, v) in grid.iter().zip(kde.iter()) {
            let z = (g - 2.0) / h;
            let want = exp(-0.5 * z * z) / (h * sqrt(2.0 * core::f64::consts::PI));
            assert!(abs(v - want) < 1e-12);
        }
        // zero-variance samples have no Silverman bandwidth
        assert_eq!(
            kde_gaussian(&samples, Bandwidth::Silverman, &grid),
            Err(StatsError::DegenerateSamples)
        );
    }

    /// 1e6 standard-normal samples, Silverman bandwidth: the KDE deviates
    /// from φ by less than 0.01 on [-3, 3].
    #[test]
    fn kde_recovers_normal_density() {
        let mut rng = Stream::new(3);
        let samples: Vec<f64> = (0..1_000_000).map(|_| rng.normal()).collect();
        let grid: Vec<f64> = (0..=120).map(|i| -3.0 + i as f64 * 0.05).collect();
        let kde = kde_gaussian(&samples, Bandwidth::Silverman, &grid).unwrap();
        let mut worst = 0.0f64;
        for (g, v) in grid.iter().zip(kde.iter()) {
            let phi = exp(-0.5 * g * g) / sqrt(2.0 * core::f64::consts::PI);
            worst = worst.max(abs(v - phi));
        }
        assert!(worst < 0.01, "max deviation {worst}");
    }

    #[test]
    fn kde_integrates_to_one() {
        let mut rng = Stream::new(4);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.normal()).collect();
        let grid: Vec<f64> = (0..=1000).map(|i| -6.0 + i as f64 * 0.012).collect();
        let kde = kde_gaussian(&samples, Bandwidth::Silverman, &grid).unwrap();
        let mut mass = 0.0;
        for w in kde.windows(2) {
            mass += 0.5 * (w[0] + w[1]) * 0.012;
        }
        assert!(abs(mass - 1.0) < 1e-3, "mass {mass}");
        assert!(kde.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn ks_distance_three_point_examples() {
        let uniform3 = |x: f64| (x / 3.0).clamp(0.0, 1.0);
        let d = ks_distance(&[1.0, 2.0, 3.0], uniform3);
        assert!(abs(d - 1.0 / 3.0) < 1e-12, "{d}");
        // shifting the samples by +1 displaces one third of the mass
        let d = ks_distance(&[2.0, 3.0, 4.0], uniform3);
        assert!(abs(d - 2.0 / 3.0) < 1e-12, "{d}");
    }

    #[test]
    fn ks_distance_constant_samples_against_own_step() {
        let step = |x: f64| if x < 5.0 { 0.0 } else { 1.0 };
        let d = ks_distance(&[5.0; 10], step);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn ks_distance_self_sampled() {
        let mut rng = Stream::new(5);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.exponential(1.0)).collect();
        let d = ks_distance(&samples, |x| 1.0 - exp(-x.max(0.0)));
        assert!(d < 0.01, "{d}");
        assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn chi_square_p_sane() {
        // perfectly matching counts: p near 1
        let p = chi_square_p(&[100.0, 100.0, 100.0], &[100.0, 100.0, 100.0]);
        assert!(p > 0.99);
        // wildly off: p near 0
        let p = chi_square_p(&[300.0, 0.0, 0.0], &[100.0, 100.0, 100.0]);
        assert!(p < 1e-10);
    }

    #[test]
    fn two_sample_ks_same_law() {
        let mut rng = Stream::new(6);
        let a: Vec<f64> = (0..20_000).map(|_| rng.exponential(1.0)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| rng.exponential(1.0)).collect();
        let (d, p) = two_sample_ks(&a, &b);
        assert!(p > 0.001, "D = {d}, p = {p}");
        // and clearly different laws are detected
        let c: Vec<f64> = (0..20_000).map(|_| rng.exponential(0.5)).collect();
        let (_, p) = two_sample_ks(&a, &c);
        assert!(p < 1e-6);
    }

    #[test]
    fn kolmogorov_survival_endpoints() {
        assert_eq!(kolmogorov_survival(0.01), 1.0);
        assert!(kolmogorov_survival(0.5) > 0.9);
        assert!(kolmogorov_survival(2.0) < 0.001);
    }
}
