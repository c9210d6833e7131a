//! Pooling per-split statistics into a mean and a 95% confidence interval.

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

impl Estimate {
    pub fn point(v: f64) -> Self {
        Estimate { mean: v, low: v, high: v }
    }

    fn with_se(mean: f64, se: f64) -> Self {
        Estimate {
            mean,
            low: mean - Z95 * se,
            high: mean + Z95 * se,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.high - self.low) / 2.0
    }
}

/// Mean and sample variance of the per-query values in one split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSample {
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

impl SplitSample {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = arithmetic_mean(values);
        SplitSample {
            mean,
            variance: sample_variance(values, mean),
            count: n,
        }
    }
}

/// Exact for constant inputs, where summation would otherwise leave rounding noise.
fn arithmetic_mean(values: &[f64]) -> f64 {
    match values {
        [] => 0.0,
        [first, rest @ ..] if rest.iter().all(|v| v == first) => *first,
        _ => values.iter().sum::<f64>() / values.len() as f64,
    }
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 || values.iter().all(|v| *v == values[0]) {
        return 0.0;
    }
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Inverse-variance (fixed-effect) pooling of split means.
///
/// A split whose mean has zero variance would get infinite weight, so when any split has
/// zero variance the result is the plain mean of those splits with a zero-width interval.
pub fn fixed_effect(splits: &[SplitSample]) -> Estimate {
    match splits {
        [] => Estimate::point(f64::NAN),
        [one] => Estimate::point(one.mean),
        _ => {
            let exact: Vec<f64> = splits
                .iter()
                .filter(|s| s.variance <= 0.0 || s.count == 0)
                .map(|s| s.mean)
                .collect();
            if !exact.is_empty() {
                return Estimate::point(exact.iter().sum::<f64>() / exact.len() as f64);
            }
            let (mut wsum, mut wmean) = (0.0, 0.0);
            for s in splits {
                let w = s.count as f64 / s.variance;
                wsum += w;
                wmean += w * s.mean;
            }
            Estimate::with_se(wmean / wsum, (1.0 / wsum).sqrt())
        }
    }
}

/// Mean of split means with the standard error from their sample variance.
pub fn mean_of_means(means: &[f64]) -> Estimate {
    match means {
        [] => Estimate::point(f64::NAN),
        [one] => Estimate::point(*one),
        _ => {
            let m = arithmetic_mean(means);
            let se = (sample_variance(means, m) / means.len() as f64).sqrt();
            Estimate::with_se(m, se)
        }
    }
}

/// Geometric counterpart of [`mean_of_means`]: the inputs are the log-domain split means.
pub fn geometric(log_means: &[f64]) -> Estimate {
    let e = mean_of_means(log_means);
    Estimate {
        mean: e.mean.exp(),
        low: e.low.exp(),
        high: e.high.exp(),
    }
}
