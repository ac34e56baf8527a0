//! Binomial error bars for Monte Carlo comparisons.

/// Standard error of a frequency estimated from `n` Bernoulli(`p`) trials.
pub fn standard_error(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Whether `observed` lies within `k` standard errors of `p`.
///
/// Degenerate `p` (0 or 1) has zero spread, so only an exact hit passes.
pub fn within_standard_errors(observed: f64, p: f64, n: u64, k: f64) -> bool {
    (observed - p).abs() <= k * standard_error(p, n) + 1e-12
}

/// Two-sample test for equal proportions: is `|x₁/n₁ - x₂/n₂|` within `k`
/// pooled standard errors?
pub fn proportions_agree(x1: u64, n1: u64, x2: u64, n2: u64, k: f64) -> bool {
    let (f1, f2) = (x1 as f64 / n1 as f64, x2 as f64 / n2 as f64);
    let pooled = (x1 + x2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    (f1 - f2).abs() <= k * se + 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_error_values() {
        assert!((standard_error(0.25, 1000) - 0.013693063937629).abs() < 1e-12);
        assert_eq!(standard_error(0.0, 10), 0.0);
    }

    #[test]
    fn degenerate_probability_requires_exact_match() {
        assert!(within_standard_errors(0.0, 0.0, 100, 5.0));
        assert!(!within_standard_errors(0.01, 0.0, 100, 5.0));
    }

    #[test]
    fn proportions() {
        assert!(proportions_agree(500, 1000, 510, 1000, 5.0));
        assert!(!proportions_agree(250, 1000, 957, 1000, 5.0));
    }
}
