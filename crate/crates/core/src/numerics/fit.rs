//! Ordinary least-squares line fit.

use super::NumericsError;

/// Slope and intercept of the least-squares line through `(xs[i], ys[i])`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), NumericsError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(NumericsError::InvalidArgument(
            "line fit needs at least two paired points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(NumericsError::InvalidArgument("line fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 3.0).collect();
        let (s, c) = least_squares_line(&xs, &ys).unwrap();
        assert!((s - 0.5).abs() < 1e-14 && (c + 3.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(least_squares_line(&[1.0], &[2.0]).is_err());
        assert!(least_squares_line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }
}
