use lsi_core::bg::verify_gaussian_lemma;
use lsi_core::numerics::{adaptive_quadrature, log_sum_exp, log_sum_exp_unweighted, symmetric_eigenvalues};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn symmetric(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_iterator(n, n, entries.iter().copied());
    (&a + a.transpose()) * 0.5
}

/// Symmetric matrix strategy of size 1..=max_n with entries in [-s, s].
fn sym_matrix(max_n: usize, s: f64) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-s..s, n * n).prop_map(move |v| symmetric(n, &v))
    })
}

proptest! {
    #[test]
    fn log_sum_exp_is_shift_invariant(
        terms in prop::collection::vec(-1e6..1e6f64, 1..20),
        shift in -1e3..1e3f64,
    ) {
        let base = log_sum_exp_unweighted(&terms);
        prop_assert!(base.is_finite());
        let shifted: Vec<f64> = terms.iter().map(|t| t + shift).collect();
        let moved = log_sum_exp_unweighted(&shifted);
        prop_assert!((moved - (base + shift)).abs() <= 1e-12 * (1.0 + base.abs().max(moved.abs())));
    }

    #[test]
    fn weighted_log_sum_exp_stays_finite(
        terms in prop::collection::vec(-1e6..1e6f64, 1..10),
        weights in prop::collection::vec(0.01..10.0f64, 10),
    ) {
        let w = &weights[..terms.len()];
        let v = log_sum_exp(&terms, w).unwrap();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v.is_finite());
        prop_assert!(v >= max + 0.01f64.ln() - 1e-9);
        prop_assert!(v <= max + (10.0 * terms.len() as f64).ln() + 1e-9);
    }

    #[test]
    fn quadrature_is_exact_on_polynomials(
        coeffs in prop::collection::vec(-1.0..1.0f64, 1..=11),
        a in -2.0..0.0f64,
        width in 0.1..4.0f64,
    ) {
        let b = a + width;
        let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let antiderivative = |x: f64| {
            coeffs.iter().enumerate().map(|(k, c)| c * x.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>()
        };
        let exact = antiderivative(b) - antiderivative(a);
        let scale: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * (a.abs().max(b.abs())).powi(k as i32 + 1) * width)
            .sum::<f64>()
            .max(1.0);
        let got = adaptive_quadrature(p, a, b, 1e-13).unwrap().value;
        prop_assert!((got - exact).abs() <= 1e-12 * scale, "{} vs {}", got, exact);
    }

    #[test]
    fn gaussian_lemma_on_sampled_points(x in 0.0..40.0f64) {
        for check in verify_gaussian_lemma(x).unwrap() {
            prop_assert!(check.holds(1e-12), "{:?}", check);
        }
    }

    #[test]
    fn eigenvalues_shift_with_identity(m in sym_matrix(12, 5.0), c in -10.0..10.0f64) {
        let n = m.nrows();
        let base = symmetric_eigenvalues(&m).unwrap();
        let shifted = symmetric_eigenvalues(&(&m + DMatrix::identity(n, n) * c)).unwrap();
        for (x, y) in base.iter().zip(&shifted) {
            prop_assert!((y - (x + c)).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn spectrum_is_invariant_under_orthogonal_conjugation(
        m in sym_matrix(6, 3.0),
        raw in prop::collection::vec(-1.0..1.0f64, 36),
    ) {
        let n = m.nrows();
        let g = DMatrix::from_iterator(n, n, raw.iter().copied().take(n * n))
            + DMatrix::identity(n, n) * 0.5;
        let q = g.qr().q();
        let conj = &q * &m * q.transpose();
        let conj = (&conj + conj.transpose()) * 0.5;
        let a = symmetric_eigenvalues(&m).unwrap();
        let b = symmetric_eigenvalues(&conj).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
    }

    /// Independent oracle: nalgebra's symmetric eigendecomposition, plus the
    /// characteristic-polynomial identities Σλ = Tr M and Σλ² = ‖M‖²_F.
    #[test]
    fn eigenvalues_match_reference_solver(m in sym_matrix(12, 5.0)) {
        let mut reference: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let got = symmetric_eigenvalues(&m).unwrap();
        let scale = 1.0 + m.norm();
        for (x, y) in got.iter().zip(&reference) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
        prop_assert!((got.iter().sum::<f64>() - m.trace()).abs() <= 1e-9 * scale);
        let sq: f64 = got.iter().map(|l| l * l).sum();
        prop_assert!((sq - m.norm_squared()).abs() <= 1e-9 * scale * scale);
        prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
    }
}
