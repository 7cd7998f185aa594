//! Kolmogorov–Smirnov tests with the asymptotic Kolmogorov distribution.

use statrs::distribution::{ContinuousCDF, Normal};

/// `P(K > λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value for statistic `d` at effective sample size `ne`, with
/// the small-sample correction `λ = (√ne + 0.12 + 0.11/√ne)·d`.
pub fn ks_p_value(d: f64, ne: f64) -> f64 {
    let s = ne.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// Critical distance at the given level, `√(−ln(level/2)/2)/√n`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// One-sample KS statistic and p-value against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    (d, ks_p_value(d, n))
}

/// Two-sample KS statistic and p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    (d, ks_p_value(d, ne))
}

/// CDF on `(−π, π]` of `N(0, σ²)` wrapped onto the circle.
pub fn wrapped_normal_cdf(theta: f64, sigma: f64) -> f64 {
    let normal = Normal::new(0.0, sigma).expect("positive scale");
    let two_pi = 2.0 * std::f64::consts::PI;
    let reach = (8.0 * sigma / two_pi).ceil() as i64 + 1;
    let mut acc = 0.0;
    for k in -reach..=reach {
        let shift = two_pi * k as f64;
        acc += normal.cdf(theta + shift) - normal.cdf(-std::f64::consts::PI + shift);
    }
    acc.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kolmogorov_reference_values() {
        // classical table values of the limiting distribution
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn critical_value_at_one_percent() {
        assert!((ks_critical_value(10_000, 0.01) - 0.016276).abs() < 1e-5);
    }

    #[test]
    fn uniform_sample_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xs: Vec<f64> = (0..5000).map(|_| rng.gen()).collect();
        let (d, p) = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical_value(5000, 0.01));
        assert!(p > 0.01);
        let (_, p) = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0).powf(1.2));
        assert!(p < 0.01);
    }

    #[test]
    fn two_sample_examples() {
        let a = [0.1, 0.2, 0.3];
        let (d, _) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        let (d, _) = ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn wrapped_normal_limits() {
        assert!((wrapped_normal_cdf(std::f64::consts::PI, 0.5) - 1.0).abs() < 1e-12);
        assert!((wrapped_normal_cdf(0.0, 0.5) - 0.5).abs() < 1e-12);
        assert!((wrapped_normal_cdf(0.0, 5.0) - 0.5).abs() < 1e-12);
        // very wide wrapping approaches the uniform law
        assert!((wrapped_normal_cdf(1.0, 20.0) - (1.0 + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)).abs() < 1e-6);
    }
}
