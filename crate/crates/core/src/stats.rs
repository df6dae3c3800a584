//! Small numerical helpers: compensated sums, quadrature, jackknife errors
//! and the Kolmogorov–Smirnov statistic.

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    sum(xs.iter().map(|x| (x - m) * (x - m))) / (n - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Delete-one jackknife for a statistic of the form `g(mean(xs))`.
///
/// Returns `(g(mean), standard error)`. For `g = identity` the error equals
/// the usual standard error of the mean.
pub fn jackknife_of_mean(xs: &[f64], g: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = xs.len();
    let full = g(mean(xs));
    if n < 2 {
        return (full, 0.0);
    }
    let total = sum(xs.iter().copied());
    let loo: Vec<f64> = xs.iter().map(|x| g((total - x) / (n - 1) as f64)).collect();
    let loo_mean = mean(&loo);
    let var = sum(loo.iter().map(|t| (t - loo_mean) * (t - loo_mean)));
    (full, ((n - 1) as f64 / n as f64 * var).sqrt())
}

/// Composite Simpson rule over uniformly spaced samples.
///
/// An odd number of intervals is closed with Simpson's 3/8 rule on the last
/// three; two samples fall back to the trapezoid rule.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (samples[0] + samples[1]),
        3 => h / 3.0 * (samples[0] + 4.0 * samples[1] + samples[2]),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                let s = &samples[k..];
                (k, 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]))
            };
            if even_end == 0 {
                return tail;
            }
            let mut acc = CompensatedSum::new();
            acc.add(samples[0]);
            acc.add(samples[even_end]);
            for (i, &y) in samples.iter().enumerate().take(even_end).skip(1) {
                acc.add(if i % 2 == 1 { 4.0 * y } else { 2.0 * y });
            }
            h / 3.0 * acc.value() + tail
        }
    }
}

/// Two-sided one-sample Kolmogorov–Smirnov distance between the empirical
/// distribution of `samples` and the continuous CDF `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let hi = (i + 1) as f64 / n - f;
            let lo = f - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// 99% critical value of the KS distance for `n` samples (asymptotic).
pub fn ks_critical_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat_n(1e-16, 10_000));
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((sum(xs) - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn simpson_is_exact_on_cubics_for_both_parities() {
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0;
        let exact = |a: f64, b: f64| {
            let big = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 3.0 * x;
            big(b) - big(a)
        };
        for n in [3usize, 4, 5, 8, 11, 64, 65] {
            let h = 1.7 / (n - 1) as f64;
            let ys: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            assert!((simpson(&ys, h) - exact(0.0, 1.7)).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn jackknife_of_identity_is_standard_error() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let (m, se) = jackknife_of_mean(&xs, |x| x);
        assert!((m - mean(&xs)).abs() < 1e-14);
        assert!((se - std_error(&xs)).abs() < 1e-12);
    }

    #[test]
    fn ks_of_perfect_quantiles_is_half_step() {
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
