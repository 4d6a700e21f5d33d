//! Error and difference metrics used to score predictions and strategies.

/// `|measured - predicted|`, in seconds.
pub fn absolute_error(measured: f64, predicted: f64) -> f64 {
    (measured - predicted).abs()
}

/// `100 * |measured - predicted| / measured`.
pub fn percent_error(measured: f64, predicted: f64) -> f64 {
    100.0 * absolute_error(measured, predicted) / measured
}

/// Gap between the exhaustive optimum and another method's result.
pub fn absolute_difference(t_optimal: f64, t_method: f64) -> f64 {
    (t_optimal - t_method).abs()
}

/// `100 * |t_optimal - t_method| / t_optimal`.
pub fn percent_difference(t_optimal: f64, t_method: f64) -> f64 {
    100.0 * absolute_difference(t_optimal, t_method) / t_optimal
}

pub fn speedup(t_baseline: f64, t_method: f64) -> f64 {
    t_baseline / t_method
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Median of a non-empty slice; averages the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert!((absolute_error(0.50, 0.45) - 0.05).abs() < 1e-15);
        assert!((percent_error(0.50, 0.45) - 10.0).abs() < 1e-12);
        assert!((percent_difference(0.50, 0.55) - 10.0).abs() < 1e-12);
        assert_eq!(absolute_difference(2.0, 2.0), 0.0);
        assert_eq!(speedup(3.0, 1.5), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mean([1.0, 2.0, 6.0]), 3.0);
    }
}
