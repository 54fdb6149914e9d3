//! Closed-form upper and lower bounds on log-Sobolev constants of Gaussian
//! smoothings, together with the Lyapunov-function constant chain behind the
//! n-dimensional bound.
//!
//! Every bound is returned as a [`BoundValue`]: the natural logarithm is always
//! finite, the linear value is present only when it fits in an `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::log_add_exp;

/// Constant in the Poincaré bound for a ball: κ ≤ D·r²·(sup p / inf p).
pub const BALL_POINCARE_CONSTANT: f64 = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Default tolerance for the monotonicity audit of [`cgw_chain`].
pub const CHAIN_TOL: f64 = 1e-9;

/// A positive quantity carried in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub log_value: f64,
    pub value: Option<f64>,
}

impl BoundValue {
    pub fn from_log(log_value: f64) -> Self {
        let v = log_value.exp();
        Self {
            log_value,
            value: v.is_finite().then_some(v),
        }
    }

    pub fn from_value(v: f64) -> Self {
        Self {
            log_value: v.ln(),
            value: Some(v),
        }
    }

    /// Linear value, `inf` when unrepresentable.
    pub fn linear(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_small_delta(r: f64, delta: f64) -> Result<()> {
    check_positive("R", r)?;
    check_positive("delta", delta)?;
    if delta > r * r {
        return Err(invalid(format!("bound needs 0 < delta <= R^2, got delta = {delta}, R = {r}")));
    }
    Ok(())
}

/// One-dimensional bound for a measure supported in an interval of length 2R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDimBound {
    /// 6905·δ^{3/2}R/(4R² + δ)·e^{2R²/δ} + 4989·(√δ + 2R)²
    pub general: BoundValue,
    /// 7803·δ^{3/2}/R·e^{2R²/δ}, present iff δ ≤ R²
    pub small_delta: Option<BoundValue>,
}

pub fn thm_1d_bound(r: f64, delta: f64) -> Result<OneDimBound> {
    check_positive("R", r)?;
    check_positive("delta", delta)?;
    let ln_d = delta.ln();
    let expo = 2.0 * r * r / delta;
    let first = 6905f64.ln() + 1.5 * ln_d + r.ln() - (4.0 * r * r + delta).ln() + expo;
    let second = 4989f64.ln() + 2.0 * (delta.sqrt() + 2.0 * r).ln();
    let general = BoundValue::from_log(log_add_exp(first, second));
    let small_delta = (delta <= r * r)
        .then(|| BoundValue::from_log(7803f64.ln() + 1.5 * ln_d - r.ln() + expo));
    Ok(OneDimBound {
        general,
        small_delta,
    })
}

/// 289·R²·exp(20n + 5R²/δ) for measures on ℝⁿ supported in a ball of
/// radius R, valid for 0 < δ ≤ R².
pub fn thm_nd_bound(r: f64, delta: f64, n: u32) -> Result<BoundValue> {
    check_small_delta(r, delta)?;
    check_dimension(n)?;
    Ok(BoundValue::from_log(final_log(r, delta, n, 289.0)))
}

fn final_log(r: f64, delta: f64, n: u32, k: f64) -> f64 {
    k.ln() + 2.0 * r.ln() + 20.0 * n as f64 + 5.0 * r * r / delta
}

fn check_dimension(n: u32) -> Result<()> {
    if n == 0 {
        return Err(invalid("dimension n must be at least 1"));
    }
    Ok(())
}

/// A named value in a chain of inequalities, in log form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    pub log_value: f64,
}

/// Intermediate constants of the Lyapunov-function argument applied to μ_δ
/// on ℝⁿ with μ supported in the ball of radius R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgwConstants {
    pub r: f64,
    pub delta: f64,
    pub n: u32,
    /// Hessian lower bound 1/δ − 2R²/δ²
    pub k_hess: f64,
    /// Drift constants in ΔW − ⟨∇V, ∇W⟩ ≤ (b − c|x|²)W with W = e^{|x|²/16δ}
    pub b: f64,
    pub c_lyap: f64,
    /// √(16nδ + 2R²)
    pub r0: f64,
    /// (1/4δ)·exp(n + R²/8δ − 1)
    pub b_prime: BoundValue,
    /// n/8δ
    pub lambda: f64,
    /// D·r0²·exp((r0 + R)²/2δ)
    pub kappa_bound: BoundValue,
    pub d_const: f64,
    /// 16δ
    pub epsilon: f64,
    /// (1 + b'κ)/λ
    pub c_p_bound: BoundValue,
    /// 8R² + (36D/e)R²·exp(17n + 25R²/8δ)
    pub c_p_intermediate: BoundValue,
    /// (8 + 36D/e)R²·exp(17n + 25R²/8δ)
    pub c_p_relaxed: BoundValue,
    /// 128R² − 40δ
    pub a: f64,
    /// 128R²
    pub a_relaxed: f64,
    /// (2/c)(1/ε − K/2)(b + c(nδ + R²))
    pub b_exact: f64,
    /// 18nR²/δ + 6R⁴/δ² − 2
    pub b_bound: f64,
    /// A + (B + 2)·C_P with exact intermediates
    pub lsi_exact: BoundValue,
    /// 128R² + (B_bound + 2)·C_P(relaxed)
    pub lsi_bound_chain: BoundValue,
    /// 289R²·exp(20n + 5R²/δ)
    pub lsi_bound_final: BoundValue,
    /// A, then its relaxation.
    pub a_steps: Vec<ChainStep>,
    /// B, then its relaxation.
    pub b_steps: Vec<ChainStep>,
    /// The C_P relaxations, in order.
    pub c_p_steps: Vec<ChainStep>,
    /// The LSI-constant relaxations, in order, ending at `lsi_bound_final`.
    pub lsi_steps: Vec<ChainStep>,
}

impl CgwConstants {
    /// First adjacent pair in a recorded chain that decreases by more than
    /// `tol` (relative, in log form).
    pub fn first_violation(&self, tol: f64) -> Option<(&ChainStep, &ChainStep)> {
        [&self.a_steps, &self.b_steps, &self.c_p_steps, &self.lsi_steps]
            .into_iter()
            .flat_map(|steps| steps.windows(2))
            .find(|w| w[1].log_value < w[0].log_value - tol * w[0].log_value.abs().max(1.0))
            .map(|w| (&w[0], &w[1]))
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.first_violation(tol).is_none()
    }
}

/// Evaluate every constant of the chain and audit that each relaxation is
/// non-decreasing.
pub fn cgw_chain(r: f64, delta: f64, n: u32) -> Result<CgwConstants> {
    check_small_delta(r, delta)?;
    check_dimension(n)?;
    let nf = n as f64;
    let r2 = r * r;
    let d = BALL_POINCARE_CONSTANT;
    let e = std::f64::consts::E;

    let k_hess = 1.0 / delta - 2.0 * r2 / (delta * delta);
    let b = nf / (8.0 * delta) + r2 / (32.0 * delta * delta);
    let c_lyap = 1.0 / (64.0 * delta * delta);
    let r0 = (16.0 * nf * delta + 2.0 * r2).sqrt();
    let log_b_prime = -(4.0 * delta).ln() + nf + r2 / (8.0 * delta) - 1.0;
    let lambda = nf / (8.0 * delta);
    let log_kappa = d.ln() + 2.0 * r0.ln() + (r0 + r) * (r0 + r) / (2.0 * delta);
    let epsilon = 16.0 * delta;

    let log_c_p = log_add_exp(0.0, log_b_prime + log_kappa) - lambda.ln();
    let expo17 = 17.0 * nf + 25.0 * r2 / (8.0 * delta);
    let log_c_p_mid = log_add_exp((8.0 * r2).ln(), (36.0 * d / e).ln() + 2.0 * r.ln() + expo17);
    let log_c_p_relaxed = (8.0 + 36.0 * d / e).ln() + 2.0 * r.ln() + expo17;
    let c_p_expanded = log_add_exp(
        (8.0 * delta / nf).ln(),
        (d / e).ln()
            + (32.0 * delta + 4.0 * r2 / nf).ln()
            + nf
            + r2 / (8.0 * delta)
            + (r0 + r) * (r0 + r) / (2.0 * delta),
    );

    let a = 2.0 / c_lyap * (1.0 / epsilon - k_hess / 2.0) + epsilon;
    let a_relaxed = 128.0 * r2;
    let second_moment = nf * delta + r2;
    let b_exact = 2.0 / c_lyap * (1.0 / epsilon - k_hess / 2.0) * (b + c_lyap * second_moment);
    let b_bound = 18.0 * nf * r2 / delta + 6.0 * r2 * r2 / (delta * delta) - 2.0;

    let lsi_exact = log_add_exp(a.ln(), (b_exact + 2.0).ln() + log_c_p);
    let lsi_chain = log_add_exp(a_relaxed.ln(), (b_bound + 2.0).ln() + log_c_p_relaxed);
    let lsi_identity = log_add_exp(
        a_relaxed.ln(),
        (12.0 * r2 / (2.0 * delta) * (3.0 * nf + r2 / delta)).ln() + log_c_p_relaxed,
    );
    let lsi_exp = log_add_exp(
        a_relaxed.ln(),
        (96.0 + 432.0 * d / e).ln() + 2.0 * r.ln() + 20.0 * nf + 37.0 * r2 / (8.0 * delta),
    );
    let lsi_merged = final_log(r, delta, n, 128.0 + 96.0 + 432.0 * d / e);
    let lsi_final = final_log(r, delta, n, 289.0);

    let step = |label: &str, log_value: f64| ChainStep {
        label: label.to_string(),
        log_value,
    };
    let consts = CgwConstants {
        r,
        delta,
        n,
        k_hess,
        b,
        c_lyap,
        r0,
        b_prime: BoundValue::from_log(log_b_prime),
        lambda,
        kappa_bound: BoundValue::from_log(log_kappa),
        d_const: d,
        epsilon,
        c_p_bound: BoundValue::from_log(log_c_p),
        c_p_intermediate: BoundValue::from_log(log_c_p_mid),
        c_p_relaxed: BoundValue::from_log(log_c_p_relaxed),
        a,
        a_relaxed,
        b_exact,
        b_bound,
        lsi_exact: BoundValue::from_log(lsi_exact),
        lsi_bound_chain: BoundValue::from_log(lsi_chain),
        lsi_bound_final: BoundValue::from_log(lsi_final),
        a_steps: vec![step("a", a.ln()), step("a_relaxed", a_relaxed.ln())],
        b_steps: vec![step("b", b_exact.ln()), step("b_bound", b_bound.ln())],
        c_p_steps: vec![
            step("c_p", log_c_p),
            step("c_p_expanded", c_p_expanded),
            step("c_p_intermediate", log_c_p_mid),
            step("c_p_relaxed", log_c_p_relaxed),
        ],
        lsi_steps: vec![
            step("lsi_exact", lsi_exact),
            step("lsi_relaxed", lsi_chain),
            step("lsi_factored", lsi_identity),
            step("lsi_exponential", lsi_exp),
            step("lsi_merged", lsi_merged),
            step("lsi_final", lsi_final),
        ],
    };
    if let Some((from, to)) = consts.first_violation(CHAIN_TOL) {
        return Err(Error::ChainViolation(format!(
            "{} = {} exceeds {} = {} (log values) at R = {r}, delta = {delta}, n = {n}",
            from.label, from.log_value, to.label, to.log_value
        )));
    }
    Ok(consts)
}

/// 2067·R/a + 9016·δ + 1248·δ·log(1/(a²δ)) for a measure with density at
/// least `a` on an interval of length 2R.
pub fn uniform_density_bound(r: f64, a: f64, delta: f64) -> Result<BoundValue> {
    check_small_delta(r, delta)?;
    check_positive("a", a)?;
    if a * 2.0 * r > 1.0 + 1e-12 {
        return Err(invalid(format!(
            "a density at least {a} on an interval of length {} has mass above 1",
            2.0 * r
        )));
    }
    let v = 2067.0 * r / a + 9016.0 * delta + 1248.0 * delta * (1.0 / (a * a * delta)).ln();
    Ok(BoundValue::from_value(v))
}

/// Two-sided bound for ½(δ₋ᵣ + δᵣ) smoothed at variance δ ≤ R²:
/// (1/11, 117942)·δ^{3/2}/R·e^{R²/2δ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointBounds {
    pub lower: BoundValue,
    pub upper: BoundValue,
}

pub fn two_point_bounds(r: f64, delta: f64) -> Result<TwoPointBounds> {
    check_small_delta(r, delta)?;
    let core = 1.5 * delta.ln() - r.ln() + r * r / (2.0 * delta);
    Ok(TwoPointBounds {
        lower: BoundValue::from_log(core - 11f64.ln()),
        upper: BoundValue::from_log(core + 117_942f64.ln()),
    })
}

/// Log-Sobolev constant of a product measure: the largest factor constant.
pub fn segal_product(constants: &[f64]) -> Result<f64> {
    if constants.is_empty() {
        return Err(invalid("product of zero measures"));
    }
    if let Some(c) = constants.iter().find(|c| !(**c >= 0.0)) {
        return Err(invalid(format!("LSI constants must be non-negative, got {c}")));
    }
    Ok(constants.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// 2·exp(−n²ε²/(4c·lip²)): concentration of a Lipschitz spectral statistic
/// of an n×n matrix whose entry law satisfies an LSI with constant c.
pub fn guionnet_tail(n: u64, epsilon: f64, c: f64, lip: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_positive("c", c)?;
    check_positive("lip", lip)?;
    Ok(2.0 * log_guionnet_exponent(n, epsilon, c, lip).exp())
}

fn log_guionnet_exponent(n: u64, epsilon: f64, c: f64, lip: f64) -> f64 {
    let nf = n as f64;
    -(nf * nf * epsilon * epsilon) / (4.0 * c * lip * lip)
}

/// K·R²·exp(21 d + 5R²d/δ): LSI constant of a smoothed ensemble whose
/// dependence blocks have at most `d` entries.
pub fn ensemble_lsi_constant(r: f64, d: f64, delta: f64, k: f64) -> Result<BoundValue> {
    check_positive("R", r)?;
    check_positive("d_n", d)?;
    check_positive("delta", delta)?;
    check_positive("K", k)?;
    Ok(BoundValue::from_log(
        k.ln() + 2.0 * r.ln() + 21.0 * d + 5.0 * r * r * d / delta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_dim_examples() {
        let b = thm_1d_bound(1.0, 1.0).unwrap();
        assert_relative_eq!(b.small_delta.unwrap().linear(), 57_656.804_743_7, max_relative = 1e-10);
        let g = thm_1d_bound(1.0, 4.0).unwrap();
        assert!(g.small_delta.is_none());
        assert_relative_eq!(g.general.linear(), 91_208.420_37, max_relative = 1e-9);
        let direct = 6905.0 * 0.5f64.exp() + 4989.0 * 16.0;
        assert_relative_eq!(g.general.linear(), direct, max_relative = 1e-14);
    }

    #[test]
    fn small_delta_is_dimensionally_homogeneous() {
        let (r, d, lam) = (0.7, 0.2, 3.0);
        let a = thm_1d_bound(r, d).unwrap().small_delta.unwrap();
        let b = thm_1d_bound(lam * r, lam * lam * d).unwrap().small_delta.unwrap();
        assert_relative_eq!(b.log_value - a.log_value, 2.0 * lam.ln(), epsilon = 1e-13);
    }

    #[test]
    fn n_dim_examples() {
        assert_relative_eq!(thm_nd_bound(1.0, 1.0, 1).unwrap().log_value, 289f64.ln() + 25.0, epsilon = 1e-13);
        assert_relative_eq!(thm_nd_bound(1.0, 1.0, 2).unwrap().log_value, 289f64.ln() + 45.0, epsilon = 1e-13);
        assert_relative_eq!(
            thm_nd_bound(1.0, 1.0, 1).unwrap().linear(),
            289.0 * 25f64.exp(),
            max_relative = 1e-13
        );
        assert!(thm_nd_bound(1.0, 1.5, 1).is_err());
    }

    #[test]
    fn huge_bounds_stay_in_log_form() {
        let b = thm_nd_bound(1.0, 1e-3, 3).unwrap();
        assert!(b.value.is_none());
        assert!(b.log_value.is_finite());
        assert_eq!(b.linear(), f64::INFINITY);
    }

    #[test]
    fn chain_constants_at_unit_parameters() {
        let c = cgw_chain(1.0, 1.0, 1).unwrap();
        assert_eq!(c.k_hess, -1.0);
        assert_relative_eq!(c.b, 5.0 / 32.0, epsilon = 1e-15);
        assert_relative_eq!(c.c_lyap, 1.0 / 64.0, epsilon = 1e-15);
        assert_relative_eq!(c.r0, 18f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.b_prime.linear(), 0.283_287_113_266_706_6, max_relative = 1e-14);
        assert_relative_eq!(c.lambda, 0.125, epsilon = 1e-15);
        assert_relative_eq!(c.a, 88.0, epsilon = 1e-12);
        assert_eq!(c.epsilon, 16.0);
        assert!(c.lsi_bound_chain.log_value <= c.lsi_bound_final.log_value);
    }

    #[test]
    fn chain_b_matches_expanded_form() {
        for &(r, delta, n) in &[(1.0, 1.0, 1u32), (2.0, 0.4, 3), (0.5, 0.1, 2)] {
            let c = cgw_chain(r, delta, n).unwrap();
            let nf = n as f64;
            let r2: f64 = r * r;
            let expanded = 18.0 * nf * r2 / delta + 6.0 * r2 * r2 / (delta * delta)
                - 63.0 * nf / 8.0
                - 21.0 * r2 / (8.0 * delta);
            assert_relative_eq!(c.b_exact, expanded, max_relative = 1e-12);
            assert_relative_eq!(c.a, 128.0 * r2 - 40.0 * delta, max_relative = 1e-12);
        }
    }

    #[test]
    fn chain_poincare_expansion_is_exact() {
        let c = cgw_chain(1.5, 0.7, 2).unwrap();
        assert_relative_eq!(c.c_p_steps[0].log_value, c.c_p_steps[1].log_value, epsilon = 1e-12);
        assert_relative_eq!(c.lsi_steps[1].log_value, c.lsi_steps[2].log_value, epsilon = 1e-12);
    }

    #[test]
    fn chain_rejects_large_delta() {
        assert!(matches!(cgw_chain(1.0, 1.01, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(cgw_chain(1.0, 0.5, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn uniform_density_examples() {
        let v = uniform_density_bound(1.0, 0.5, 0.25).unwrap().linear();
        assert_relative_eq!(v, 7_253.047_681_338_812, max_relative = 1e-13);
        assert!(uniform_density_bound(1.0, 0.6, 0.25).is_err());
        let near = uniform_density_bound(1.0, 0.5, 1.0 - 1e-9).unwrap().linear();
        let at = uniform_density_bound(1.0, 0.5, 1.0).unwrap().linear();
        assert!((near - at).abs() < 1e-4);
    }

    #[test]
    fn two_point_examples() {
        let b = two_point_bounds(1.0, 0.5).unwrap();
        assert_relative_eq!(b.lower.linear(), 0.087_368_887_003_616_3, max_relative = 1e-13);
        let b1 = two_point_bounds(1.0, 1.0).unwrap();
        assert_relative_eq!(b1.lower.linear(), 0.149_883_751_881_829_83, max_relative = 1e-13);
        for &(r, d) in &[(1.0, 0.5), (3.0, 0.1), (0.2, 0.04)] {
            let b = two_point_bounds(r, d).unwrap();
            assert_relative_eq!(
                b.upper.log_value - b.lower.log_value,
                (11.0f64 * 117_942.0).ln(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn segal_examples() {
        assert_eq!(segal_product(&[2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(segal_product(&[1.7]).unwrap(), 1.7);
        assert_eq!(segal_product(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(segal_product(&[]).is_err());
    }

    #[test]
    fn guionnet_examples() {
        assert_relative_eq!(
            guionnet_tail(100, 0.1, 1.0, 1.0).unwrap(),
            2.777_588_772_992_804e-11,
            max_relative = 1e-12
        );
        assert_relative_eq!(guionnet_tail(100, 1e-12, 1.0, 1.0).unwrap(), 2.0, max_relative = 1e-15);
        let e1 = log_guionnet_exponent(50, 0.3, 2.0, 1.0);
        let e2 = log_guionnet_exponent(50, 0.3, 2.0, 2.0);
        assert_relative_eq!(e2, e1 / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn ensemble_constant() {
        let v = ensemble_lsi_constant(1.0, 1.0, 1.0, 289.0).unwrap();
        assert_relative_eq!(v.log_value, 289f64.ln() + 26.0, epsilon = 1e-13);
    }
}
