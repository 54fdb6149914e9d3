//! Spectra of symmetric matrices and the statistics computed from them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::symmetric_eigenvalues;

/// Eigenvalues of X = scaling·Y in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub eigenvalues: Vec<f64>,
    pub n: usize,
    /// Factor applied to the sampled matrix before the eigensolve (1/√n for
    /// Wigner scaling).
    pub scaling: f64,
}

impl SpectralSample {
    pub fn from_matrix(y: &DMatrix<f64>, scaling: f64) -> Result<Self> {
        let x = y * scaling;
        let eigenvalues = symmetric_eigenvalues(&x)?;
        Ok(Self {
            n: eigenvalues.len(),
            eigenvalues,
            scaling,
        })
    }

    /// Wigner scaling X = Y/√n.
    pub fn wigner(y: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(y, 1.0 / (y.nrows() as f64).sqrt())
    }

    /// Wraps a precomputed spectrum (sorted on construction).
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self {
            n: eigenvalues.len(),
            eigenvalues,
            scaling: 1.0,
        }
    }
}

/// Lipschitz test functions with a computable Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipschitzFn {
    Identity,
    Abs,
    Constant { c: f64 },
    /// Linear interpolation through `knots` (sorted by x), constant outside.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl LipschitzFn {
    pub fn validate(&self) -> Result<()> {
        if let LipschitzFn::PiecewiseLinear { knots } = self {
            if knots.is_empty() {
                return Err(invalid("piecewise-linear function needs knots"));
            }
            if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                return Err(invalid("knots must be strictly increasing in x"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LipschitzFn::Identity => x,
            LipschitzFn::Abs => x.abs(),
            LipschitzFn::Constant { c } => *c,
            LipschitzFn::PiecewiseLinear { knots } => {
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|k| k.0 <= x);
                let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            LipschitzFn::Identity | LipschitzFn::Abs => 1.0,
            LipschitzFn::Constant { .. } => 0.0,
            LipschitzFn::PiecewiseLinear { knots } => knots
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// ∫ f dμ_X = (1/n) Σ f(λᵢ).
pub fn lipschitz_statistic(sample: &SpectralSample, f: &LipschitzFn) -> f64 {
    sample.eigenvalues.iter().map(|&l| f.eval(l)).sum::<f64>() / sample.n as f64
}

/// Both sides of Σ(λᵢ(A) − λᵢ(B))² ≤ Tr[(A − B)²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl HwCheck {
    /// lhs ≤ rhs up to `tol` relative to max(1, rhs).
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol * self.rhs.max(1.0)
    }
}

fn check_same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(invalid(format!(
            "need square matrices of equal size, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Hoffman–Wielandt comparison for symmetric A, B.
pub fn hw_check(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<HwCheck> {
    check_same_shape(a, b)?;
    let la = symmetric_eigenvalues(a)?;
    let lb = symmetric_eigenvalues(b)?;
    let lhs = la.iter().zip(&lb).map(|(x, y)| (x - y) * (x - y)).sum();
    let d = a - b;
    Ok(HwCheck {
        lhs,
        rhs: d.iter().map(|v| v * v).sum(),
    })
}

/// |∫f dμ_X − ∫f dμ_X̃| against (Lip f/√n)·√Tr[(X − X̃)²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub observed: f64,
    pub bound: f64,
}

pub fn perturbation_bound_check(
    x: &DMatrix<f64>,
    x_tilde: &DMatrix<f64>,
    f: &LipschitzFn,
) -> Result<PerturbationCheck> {
    check_same_shape(x, x_tilde)?;
    f.validate()?;
    let s = SpectralSample::from_matrix(x, 1.0)?;
    let t = SpectralSample::from_matrix(x_tilde, 1.0)?;
    let observed = (lipschitz_statistic(&s, f) - lipschitz_statistic(&t, f)).abs();
    let frob = (x - x_tilde).iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(PerturbationCheck {
        observed,
        bound: f.lipschitz() / (x.nrows() as f64).sqrt() * frob,
    })
}

/// Distribution function of the semicircle law on [−2σ, 2σ].
pub fn semicircle_cdf(x: f64, sigma: f64) -> f64 {
    let r = 2.0 * sigma;
    if x <= -r {
        return 0.0;
    }
    if x >= r {
        return 1.0;
    }
    let s2 = sigma * sigma;
    0.5 + x * (4.0 * s2 - x * x).sqrt() / (4.0 * std::f64::consts::PI * s2)
        + (x / r).asin() / std::f64::consts::PI
}

/// Kolmogorov–Smirnov distance between the empirical spectral distribution
/// and the semicircle law of variance σ².
pub fn semicircle_distance(sample: &SpectralSample, sigma: f64) -> Result<f64> {
    if sample.n == 0 {
        return Err(invalid("empty spectrum"));
    }
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let n = sample.n as f64;
    Ok(sample
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let f = semicircle_cdf(l, sigma);
            (((i + 1) as f64 / n) - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn statistics() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]) / 2f64.sqrt();
        let s = SpectralSample::from_matrix(&x, 1.0).unwrap();
        assert_relative_eq!(lipschitz_statistic(&s, &LipschitzFn::Abs), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(lipschitz_statistic(&s, &LipschitzFn::Identity), 0.0, epsilon = 1e-15);
        assert_eq!(lipschitz_statistic(&s, &LipschitzFn::Constant { c: 2.5 }), 2.5);
        let y = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, -0.5, 1.0, 0.0, 1.0, 3.0]);
        let s = SpectralSample::from_matrix(&y, 1.0).unwrap();
        assert_relative_eq!(lipschitz_statistic(&s, &LipschitzFn::Identity), y.trace() / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn piecewise_linear_function() {
        let f = LipschitzFn::PiecewiseLinear { knots: vec![(-1.0, 0.0), (0.0, 2.0), (2.0, 1.0)] };
        assert!(f.validate().is_ok());
        assert_eq!(f.eval(-5.0), 0.0);
        assert_eq!(f.eval(-0.5), 1.0);
        assert_eq!(f.eval(1.0), 1.5);
        assert_eq!(f.lipschitz(), 2.0);
    }

    #[test]
    fn hoffman_wielandt_shift_saturates() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, 2.0, -1.0, 0.0, -1.0, 0.5]);
        let same = hw_check(&a, &a).unwrap();
        assert_eq!((same.lhs, same.rhs), (0.0, 0.0));
        let b = &a + DMatrix::identity(3, 3) * 0.7;
        let h = hw_check(&a, &b).unwrap();
        assert_relative_eq!(h.lhs, 3.0 * 0.49, max_relative = 1e-12);
        assert_relative_eq!(h.rhs, 3.0 * 0.49, max_relative = 1e-12);
        assert!(hw_check(&a, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn perturbation_shift_case() {
        let x = DMatrix::from_row_slice(2, 2, &[0.2, 1.0, 1.0, -0.4]);
        let c = 0.3;
        let t = &x + DMatrix::identity(2, 2) * c;
        let p = perturbation_bound_check(&x, &t, &LipschitzFn::Identity).unwrap();
        assert_relative_eq!(p.observed, c, max_relative = 1e-12);
        assert_relative_eq!(p.bound, c, max_relative = 1e-12);
        let z = perturbation_bound_check(&x, &x, &LipschitzFn::Abs).unwrap();
        assert_eq!((z.observed, z.bound), (0.0, 0.0));
    }

    #[test]
    fn semicircle_cdf_shape() {
        assert_eq!(semicircle_cdf(0.0, 1.0), 0.5);
        assert_eq!(semicircle_cdf(-2.0, 1.0), 0.0);
        assert_eq!(semicircle_cdf(2.0, 1.0), 1.0);
        assert_relative_eq!(semicircle_cdf(1.0, 1.0) + semicircle_cdf(-1.0, 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn distance_of_single_eigenvalue() {
        let s = SpectralSample::from_eigenvalues(vec![0.0]);
        assert_eq!(semicircle_distance(&s, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn distance_of_quantile_grid() {
        let n = 100;
        let quantile = |p: f64| {
            let (mut lo, mut hi) = (-2.0, 2.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if semicircle_cdf(mid, 1.0) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let eig: Vec<f64> = (0..n).map(|i| quantile((i as f64 + 0.5) / n as f64)).collect();
        let d = semicircle_distance(&SpectralSample::from_eigenvalues(eig), 1.0).unwrap();
        assert!(d <= 1.0 / n as f64, "{d}");
    }
}
