use super::NumericsError;

/// `log Σ wᵢ exp(log_termsᵢ)`, evaluated with a max shift.
///
/// Terms with zero weight are skipped entirely, so a `-inf` log-term paired
/// with a zero weight never produces a NaN.
pub fn log_sum_exp(log_terms: &[f64], weights: &[f64]) -> Result<f64, NumericsError> {
    if log_terms.is_empty() {
        return Err(NumericsError::InvalidArgument("empty input".into()));
    }
    if log_terms.len() != weights.len() {
        return Err(NumericsError::InvalidArgument(format!(
            "length mismatch: {} log-terms vs {} weights",
            log_terms.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(NumericsError::InvalidArgument(format!(
            "weights must be finite and non-negative, got {w}"
        )));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(NumericsError::InvalidArgument("all weights are zero".into()));
    }

    let shift = log_terms
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, &w)| l + w.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    if shift.is_infinite() {
        return Ok(shift);
    }
    let sum: f64 = log_terms
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, &w)| (l + w.ln() - shift).exp())
        .sum();
    Ok(shift + sum.ln())
}

/// Unweighted variant; returns `-inf` for an empty slice.
pub fn log_sum_exp_unweighted(log_terms: &[f64]) -> f64 {
    let shift = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return shift;
    }
    let sum: f64 = log_terms.iter().map(|&l| (l - shift).exp()).sum();
    shift + sum.ln()
}

/// `log(eᵃ + eᵇ)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_terms() {
        let v = log_sum_exp(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn dominated_term() {
        let v = log_sum_exp(&[-1000.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn weighted_terms_match_direct_summation() {
        // Direct summation is safe here because nothing overflows.
        let direct = ((-1f64).exp() + 2.0 * (-2f64).exp() + 3.0 * (-3f64).exp()).ln();
        let v = log_sum_exp(&[-1.0, -2.0, -3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((v - direct).abs() < 1e-14);
        // frozen from a 30-digit evaluation
        assert!((v - (-0.238_369_869_649_805_5)).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(log_sum_exp(&[], &[]).is_err());
        assert!(log_sum_exp(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(log_sum_exp(&[1.0], &[1.0, 2.0]).is_err());
        assert!(log_sum_exp(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn huge_terms_do_not_overflow() {
        let v = log_sum_exp(&[1e6, 1e6], &[1.0, 1.0]).unwrap();
        assert!((v - (1e6 + 2f64.ln())).abs() < 1e-9);
        let v = log_sum_exp(&[-1e6, -1e6 - 1.0], &[1.0, 1.0]).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn add_exp_handles_neg_infinity() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(log_add_exp(3.0, f64::NEG_INFINITY), 3.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
