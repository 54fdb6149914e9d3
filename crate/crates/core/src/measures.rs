//! Compactly supported probability measures on ℝ and their Gaussian
//! smoothings μ_δ = μ * γ_δ.
//!
//! A [`Measure1D`] is a finite set of atoms plus an optional absolutely
//! continuous part on an interval. Smoothing by a centred Gaussian of
//! variance δ gives a [`SmoothedMeasure`] whose density p_δ is strictly
//! positive; every query on it is evaluated in log form so that factors like
//! e^{R²/δ} never overflow.
//!
//! The density part enters every convolution through adaptive quadrature in
//! the source variable (no FFT grids), with breakpoints placed on the scale of
//! the Gaussian kernel so narrow kernels are never stepped over.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{
    integrate, log_sum_exp_unweighted, log_upper_tail, NumericsError, QuadConfig, LN_SQRT_2PI,
};

/// Mass tolerance for validating that a measure is a probability measure.
pub const MASS_TOL: f64 = 1e-9;

/// Half-width, in standard deviations, of the window outside which smoothed
/// quantities are treated as tails.
pub const TAIL_SIGMAS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Shape of the absolutely continuous part.
#[derive(Clone)]
pub enum DensityShape {
    /// ρ(t) = Σₖ coeffs[k]·(t − origin)ᵏ
    Polynomial { origin: f64, coeffs: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityShape::Polynomial { origin, coeffs } => f
                .debug_struct("Polynomial")
                .field("origin", origin)
                .field("coeffs", coeffs)
                .finish(),
            DensityShape::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    Polynomial,
    Custom,
}

/// Absolutely continuous part: a non-negative density on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct DensityPart {
    kind: DensityKind,
    shape: DensityShape,
    lo: f64,
    hi: f64,
    mass: f64,
}

impl DensityPart {
    /// Constant density on `[lo, hi]` carrying total mass `mass`.
    pub fn uniform(lo: f64, hi: f64, mass: f64) -> Result<Self> {
        check_interval(lo, hi)?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(invalid(format!("uniform density needs positive mass, got {mass}")));
        }
        Ok(Self {
            kind: DensityKind::Uniform,
            shape: DensityShape::Polynomial {
                origin: 0.0,
                coeffs: vec![mass / (hi - lo)],
            },
            lo,
            hi,
            mass,
        })
    }

    /// ρ(t) = Σₖ coeffs[k]·tᵏ on `[lo, hi]`.
    pub fn polynomial(lo: f64, hi: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_interval(lo, hi)?;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("polynomial density needs finite coefficients"));
        }
        let shape = DensityShape::Polynomial {
            origin: 0.0,
            coeffs,
        };
        Self::from_shape(DensityKind::Polynomial, shape, lo, hi)
    }

    pub fn custom<F>(lo: f64, hi: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_interval(lo, hi)?;
        Self::from_shape(DensityKind::Custom, DensityShape::Custom(Arc::new(f)), lo, hi)
    }

    fn from_shape(kind: DensityKind, shape: DensityShape, lo: f64, hi: f64) -> Result<Self> {
        let mut part = Self {
            kind,
            shape,
            lo,
            hi,
            mass: 0.0,
        };
        for k in 0..=1000 {
            let t = lo + (hi - lo) * k as f64 / 1000.0;
            let v = part.eval(t);
            if !(v >= -1e-12) || !v.is_finite() {
                return Err(invalid(format!("density is negative or non-finite at {t}: {v}")));
            }
        }
        part.mass = part.moment(0)?;
        if !(part.mass > 0.0) {
            return Err(invalid("density part has zero mass"));
        }
        Ok(part)
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// ρ(t), zero outside the support.
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        self.eval_inside(t)
    }

    fn eval_inside(&self, t: f64) -> f64 {
        match &self.shape {
            DensityShape::Polynomial { origin, coeffs } => {
                let u = t - origin;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
            DensityShape::Custom(f) => f(t),
        }
    }

    /// ∫ tᵏ ρ(t) dt.
    pub fn moment(&self, k: i32) -> Result<f64> {
        let breaks: Vec<f64> = (0..=8)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 8.0)
            .collect();
        let r = integrate(
            |t| t.powi(k) * self.eval_inside(t),
            &breaks,
            &QuadConfig::new(1e-14),
        )?;
        Ok(r.value)
    }

    /// Coefficients in powers of `t` (polynomial kinds only).
    pub fn power_coefficients(&self) -> Option<Vec<f64>> {
        match &self.shape {
            DensityShape::Polynomial { origin, coeffs } => Some(reexpand(coeffs, *origin)),
            DensityShape::Custom(_) => None,
        }
    }

    fn reflect(&self) -> Self {
        let shape = match &self.shape {
            // ρ(−t) = Σ cₖ(−t − o)ᵏ = Σ cₖ(−1)ᵏ (t + o)ᵏ
            DensityShape::Polynomial { origin, coeffs } => DensityShape::Polynomial {
                origin: -origin,
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == 0 { *c } else { -c })
                    .collect(),
            },
            DensityShape::Custom(f) => {
                let f = Arc::clone(f);
                DensityShape::Custom(Arc::new(move |t| f(-t)))
            }
        };
        Self {
            kind: self.kind,
            shape,
            lo: -self.hi,
            hi: -self.lo,
            mass: self.mass,
        }
    }

    fn translate(&self, c: f64) -> Self {
        let shape = match &self.shape {
            DensityShape::Polynomial { origin, coeffs } => DensityShape::Polynomial {
                origin: origin + c,
                coeffs: coeffs.clone(),
            },
            DensityShape::Custom(f) => {
                let f = Arc::clone(f);
                DensityShape::Custom(Arc::new(move |t| f(t - c)))
            }
        };
        Self {
            kind: self.kind,
            shape,
            lo: self.lo + c,
            hi: self.hi + c,
            mass: self.mass,
        }
    }
}

/// Σ cₖ (t − o)ᵏ rewritten as Σ bⱼ tʲ.
fn reexpand(coeffs: &[f64], origin: f64) -> Vec<f64> {
    if origin == 0.0 {
        return coeffs.to_vec();
    }
    let mut out = vec![0.0; coeffs.len()];
    for (k, c) in coeffs.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            // C(k, j) (−o)^{k−j}
            out[j] += c * binom * (-origin).powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("density support must be a finite interval, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// Compactly supported probability measure on ℝ.
#[derive(Debug, Clone)]
pub struct Measure1D {
    atoms: Vec<Atom>,
    density: Option<DensityPart>,
    radius: f64,
}

impl Measure1D {
    /// Validates positivity of weights, total mass 1 (within [`MASS_TOL`]) and
    /// that the support fits in an interval of length `2·radius`.
    pub fn new(atoms: Vec<Atom>, density: Option<DensityPart>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid(format!("support radius R must be positive, got {radius}")));
        }
        if atoms.is_empty() && density.is_none() {
            return Err(invalid("measure has neither atoms nor a density"));
        }
        for a in &atoms {
            if !a.x.is_finite() || !(a.w > 0.0) || !a.w.is_finite() {
                return Err(invalid(format!("atom at {} has invalid weight {}", a.x, a.w)));
            }
        }
        let total = atoms.iter().map(|a| a.w).sum::<f64>()
            + density.as_ref().map_or(0.0, DensityPart::mass);
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("total mass is {total}, expected 1")));
        }
        let m = Self {
            atoms,
            density,
            radius,
        };
        let (lo, hi) = m.support_hull();
        if hi - lo > 2.0 * radius * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "support [{lo}, {hi}] does not fit in an interval of length 2R = {}",
                2.0 * radius
            )));
        }
        Ok(m)
    }

    pub fn point_mass(at: f64, radius: f64) -> Result<Self> {
        Self::new(vec![Atom { x: at, w: 1.0 }], None, radius)
    }

    /// ½(δ₋ᵣ + δᵣ).
    pub fn two_point(r: f64) -> Result<Self> {
        Self::new(
            vec![Atom { x: -r, w: 0.5 }, Atom { x: r, w: 0.5 }],
            None,
            r,
        )
    }

    /// Uniform probability measure on `[lo, hi]` with R = (hi − lo)/2.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let part = DensityPart::uniform(lo, hi, 1.0)?;
        Self::new(Vec::new(), Some(part), 0.5 * (hi - lo))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&DensityPart> {
        self.density.as_ref()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Smallest interval containing the support.
    pub fn support_hull(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        if let Some(d) = &self.density {
            lo = lo.min(d.lo);
            hi = hi.max(d.hi);
        }
        (lo, hi)
    }

    /// ∫ s² dμ(s).
    pub fn second_moment(&self) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.w * a.x * a.x).sum();
        let dens = match &self.density {
            Some(d) => d.moment(2)?,
            None => 0.0,
        };
        Ok(atoms + dens)
    }

    /// Image under t ↦ −t.
    pub fn reflect(&self) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .rev()
                .map(|a| Atom { x: -a.x, w: a.w })
                .collect(),
            density: self.density.as_ref().map(DensityPart::reflect),
            radius: self.radius,
        }
    }

    /// Image under t ↦ t + c.
    pub fn translate(&self, c: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { x: a.x + c, w: a.w })
                .collect(),
            density: self.density.as_ref().map(|d| d.translate(c)),
            radius: self.radius,
        }
    }

    /// True when the support lies in `[−R, R]`.
    pub fn is_centered(&self) -> bool {
        let (lo, hi) = self.support_hull();
        let slack = 1e-12 * self.radius;
        lo >= -self.radius - slack && hi <= self.radius + slack
    }

    pub fn smooth(&self, delta: f64) -> Result<SmoothedMeasure> {
        SmoothedMeasure::new(self.clone(), delta)
    }

    pub fn from_spec(spec: &MeasureSpec) -> Result<Self> {
        let atoms: Vec<Atom> = spec.atoms.iter().map(|a| Atom { x: a.x, w: a.w }).collect();
        let atom_mass: f64 = atoms.iter().map(|a| a.w).sum();
        let density = match &spec.density {
            None => None,
            Some(DensitySpec::Uniform { support, mass }) => {
                let mass = mass.unwrap_or(1.0 - atom_mass);
                Some(DensityPart::uniform(support[0], support[1], mass)?)
            }
            Some(DensitySpec::Polynomial { support, coeffs }) => Some(DensityPart::polynomial(
                support[0],
                support[1],
                coeffs.clone(),
            )?),
        };
        Self::new(atoms, density, spec.r)
    }

    /// JSON description; `None` for measures with a custom density.
    pub fn to_spec(&self) -> Option<MeasureSpec> {
        let density = match &self.density {
            None => None,
            Some(d) => match d.kind {
                DensityKind::Uniform => Some(DensitySpec::Uniform {
                    support: [d.lo, d.hi],
                    mass: Some(d.mass),
                }),
                DensityKind::Polynomial => Some(DensitySpec::Polynomial {
                    support: [d.lo, d.hi],
                    coeffs: d.power_coefficients()?,
                }),
                DensityKind::Custom => return None,
            },
        };
        Some(MeasureSpec {
            r: self.radius,
            atoms: self.atoms.iter().map(|a| AtomSpec { x: a.x, w: a.w }).collect(),
            density,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MeasureSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }
}

/// On-disk measure description.
///
/// ```json
/// {"R": 1.0, "atoms": [{"x": -1.0, "w": 0.5}, {"x": 1.0, "w": 0.5}]}
/// {"R": 1.0, "density": {"kind": "uniform", "support": [-1.0, 1.0]}}
/// {"R": 0.5, "density": {"kind": "polynomial", "support": [0.0, 1.0], "coeffs": [0.0, 2.0]}}
/// ```
///
/// A uniform density without `mass` carries whatever mass the atoms leave.
/// Polynomial coefficients are in powers of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub x: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform {
        support: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
    },
    Polynomial {
        support: [f64; 2],
        coeffs: Vec<f64>,
    },
}

/// μ_δ = μ * γ_δ for a compactly supported μ and δ > 0.
#[derive(Debug, Clone)]
pub struct SmoothedMeasure {
    base: Measure1D,
    delta: f64,
    sd: f64,
    inner: QuadConfig,
}

impl SmoothedMeasure {
    pub fn new(base: Measure1D, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            base,
            delta,
            sd: delta.sqrt(),
            inner: QuadConfig::relative(1e-13).with_max_subdivisions(400),
        })
    }

    pub fn base(&self) -> &Measure1D {
        &self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn radius(&self) -> f64 {
        self.base.radius
    }

    pub fn support_hull(&self) -> (f64, f64) {
        self.base.support_hull()
    }

    /// Interval beyond which μ_δ has less than e^{−72} of mass on either side.
    pub fn window(&self) -> (f64, f64) {
        let (lo, hi) = self.support_hull();
        (lo - TAIL_SIGMAS * self.sd, hi + TAIL_SIGMAS * self.sd)
    }

    pub fn reflect(&self) -> Self {
        Self {
            base: self.base.reflect(),
            ..self.clone()
        }
    }

    pub fn translate(&self, c: f64) -> Self {
        Self {
            base: self.base.translate(c),
            ..self.clone()
        }
    }

    /// Points where p_δ changes character: atoms and density endpoints, each
    /// flanked by points on the kernel scale. Used as quadrature breakpoints
    /// by consumers integrating against μ_δ.
    pub fn feature_points(&self) -> Vec<f64> {
        let mut centers: Vec<f64> = self.base.atoms.iter().map(|a| a.x).collect();
        if let Some(d) = &self.base.density {
            centers.push(d.lo);
            centers.push(d.hi);
        }
        let mut pts = Vec::with_capacity(centers.len() * 9);
        for c in centers {
            pts.push(c);
            for k in [1.0, 2.0, 4.0, 8.0] {
                pts.push(c - k * self.sd);
                pts.push(c + k * self.sd);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// log p_δ(t).
    pub fn log_density(&self, t: f64) -> f64 {
        let log_norm = self.sd.ln() + LN_SQRT_2PI;
        let mut terms: Vec<f64> = self
            .base
            .atoms
            .iter()
            .map(|a| {
                let z = (t - a.x) / self.sd;
                a.w.ln() - 0.5 * z * z - log_norm
            })
            .collect();
        if let Some(d) = &self.base.density {
            terms.push(self.log_density_part(d, t) - log_norm);
        }
        log_sum_exp_unweighted(&terms)
    }

    pub fn density(&self, t: f64) -> f64 {
        self.log_density(t).exp()
    }

    /// log ∫ exp(−(t−s)²/2δ) ρ(s) ds.
    fn log_density_part(&self, d: &DensityPart, t: f64) -> f64 {
        let s_star = t.clamp(d.lo, d.hi);
        let gap = (t - s_star).abs();
        let base = -gap * gap / (2.0 * self.delta);
        let w = if gap > 0.0 {
            (self.delta / gap).min(self.sd)
        } else {
            self.sd
        };
        let breaks = kernel_breaks(d.lo, d.hi, &[s_star], w);
        let two_delta = 2.0 * self.delta;
        let integrand = |s: f64| {
            // (t−s)² − (t−s*)² = (s − s*)(s + s* − 2t) ≥ 0 on the support
            let excess = (s - s_star) * (s + s_star - 2.0 * t);
            (-excess / two_delta).exp() * d.eval_inside(s)
        };
        let value = self.inner_integral(integrand, &breaks);
        if value > 0.0 {
            value.ln() + base
        } else {
            f64::NEG_INFINITY
        }
    }

    fn inner_integral<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> f64 {
        match integrate(f, breaks, &self.inner) {
            Ok(r) => r.value,
            Err(NumericsError::QuadBudgetExceeded { best }) => best.value,
            Err(e) => panic!("density part integrand failed: {e}"),
        }
    }

    /// log(1 − F_δ(x)), computed from the upper tails directly.
    pub fn log_sf(&self, x: f64) -> f64 {
        let mut terms: Vec<f64> = self
            .base
            .atoms
            .iter()
            .map(|a| a.w.ln() + log_upper_tail((x - a.x) / self.sd))
            .collect();
        if let Some(d) = &self.base.density {
            terms.push(self.log_tail_part(d, x, Side::Upper));
        }
        log_sum_exp_unweighted(&terms)
    }

    /// log F_δ(x), computed from the lower tails directly.
    pub fn log_cdf(&self, x: f64) -> f64 {
        let mut terms: Vec<f64> = self
            .base
            .atoms
            .iter()
            .map(|a| a.w.ln() + log_upper_tail((a.x - x) / self.sd))
            .collect();
        if let Some(d) = &self.base.density {
            terms.push(self.log_tail_part(d, x, Side::Lower));
        }
        log_sum_exp_unweighted(&terms)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.log_cdf(x).exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.log_sf(x).exp()
    }

    /// log ∫ Φc(±(x − s)/√δ) ρ(s) ds for the upper (+) or lower (−) tail.
    fn log_tail_part(&self, d: &DensityPart, x: f64, side: Side) -> f64 {
        let sd = self.sd;
        // The kernel is largest at the support end nearest the tail.
        let (anchor, sign) = match side {
            Side::Upper => (d.hi, 1.0),
            Side::Lower => (d.lo, -1.0),
        };
        let z = |s: f64| sign * (x - s) / sd;
        let shift = log_upper_tail(z(anchor));
        let dist = match side {
            Side::Upper => x - d.hi,
            Side::Lower => d.lo - x,
        };
        let w = if dist > 0.0 {
            (self.delta / dist).min(sd)
        } else {
            sd
        };
        let mut breaks = kernel_breaks(d.lo, d.hi, &[anchor], w);
        breaks.extend(kernel_breaks(d.lo, d.hi, &[x.clamp(d.lo, d.hi)], sd));
        let integrand = |s: f64| (log_upper_tail(z(s)) - shift).exp() * d.eval_inside(s);
        let value = self.inner_integral(integrand, &breaks);
        if value > 0.0 {
            value.ln() + shift
        } else {
            f64::NEG_INFINITY
        }
    }

    /// The unique median of μ_δ, by bisection on log F − log(1 − F).
    pub fn median(&self) -> f64 {
        let (mut lo, mut hi) = self.window();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            if self.log_cdf(mid) < self.log_sf(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// ∫ t² dμ_δ(t) = ∫ s² dμ(s) + δ.
    pub fn second_moment(&self) -> Result<f64> {
        Ok(self.base.second_moment()? + self.delta)
    }

    /// log ∫ₐᵇ 1/p_δ(t) dt together with a convergence flag.
    pub fn log_integral_inverse_density(&self, a: f64, b: f64, cfg: &QuadConfig) -> std::result::Result<(f64, bool), NumericsError> {
        if !(a < b) {
            return Ok((f64::NEG_INFINITY, true));
        }
        let mid = 0.5 * (a + b);
        let shift = [a, mid, b]
            .iter()
            .map(|&t| -self.log_density(t))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut breaks: Vec<f64> = (0..=4).map(|k| a + (b - a) * k as f64 / 4.0).collect();
        breaks.extend(self.feature_points().into_iter().filter(|&t| t > a && t < b));
        let (r, ok) = crate::numerics::integrate_best_effort(
            |t| (-self.log_density(t) - shift).exp(),
            &breaks,
            cfg,
        )?;
        Ok((r.value.ln() + shift, ok))
    }

    /// log μ_δ([a, b]) by quadrature of p_δ (no CDF differences).
    pub fn log_mass_between(&self, a: f64, b: f64, cfg: &QuadConfig) -> std::result::Result<(f64, bool), NumericsError> {
        if !(a < b) {
            return Ok((f64::NEG_INFINITY, true));
        }
        let shift = [a, 0.5 * (a + b), b]
            .iter()
            .map(|&t| self.log_density(t))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut breaks = vec![a, b];
        breaks.extend(self.feature_points().into_iter().filter(|&t| t > a && t < b));
        let (r, ok) = crate::numerics::integrate_best_effort(
            |t| (self.log_density(t) - shift).exp(),
            &breaks,
            cfg,
        )?;
        Ok((r.value.ln() + shift, ok))
    }
}

#[derive(Debug, Clone, Copy)]
enum Side {
    Upper,
    Lower,
}

/// Breakpoints at `c ± k·w` (k = 1, 2, 4, …, 32) around each centre, clipped to
/// `[lo, hi]`, plus the endpoints.
fn kernel_breaks(lo: f64, hi: f64, centers: &[f64], w: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &c in centers {
        pts.push(c);
        for k in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            for p in [c - k * w, c + k * w] {
                if p > lo && p < hi {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::adaptive_quadrature;

    fn uniform_pm1() -> Measure1D {
        Measure1D::uniform(-1.0, 1.0).unwrap()
    }

    #[test]
    fn point_mass_density_at_mode() {
        let m = Measure1D::point_mass(0.0, 1.0).unwrap().smooth(1.0).unwrap();
        assert!((m.log_density(0.0) - (-0.918_938_533_204_672_7)).abs() < 1e-14);
    }

    #[test]
    fn two_point_density_at_zero() {
        let m = Measure1D::two_point(1.0).unwrap().smooth(1.0).unwrap();
        let expect = (1.0 / (2.0 * std::f64::consts::PI).sqrt() * (-0.5f64).exp()).ln();
        assert!((m.log_density(0.0) - expect).abs() < 1e-14);
    }

    #[test]
    fn uniform_density_matches_brute_force_convolution() {
        let delta: f64 = 0.25;
        let m = uniform_pm1().smooth(delta).unwrap();
        // midpoint rule on a fine grid in s
        let n = 200_000;
        let h = 2.0 / n as f64;
        let brute: f64 = (0..n)
            .map(|k| {
                let s = -1.0 + (k as f64 + 0.5) * h;
                0.5 * (-(0.0 - s) * (0.0 - s) / (2.0 * delta)).exp()
            })
            .sum::<f64>()
            * h
            / (2.0 * std::f64::consts::PI * delta).sqrt();
        assert!((m.density(0.0) - brute).abs() < 1e-8);
    }

    #[test]
    fn cdf_examples() {
        let m = Measure1D::two_point(1.0).unwrap().smooth(0.37).unwrap();
        assert!((m.cdf(0.0) - 0.5).abs() < 1e-15);
        let g = Measure1D::point_mass(0.0, 1.0).unwrap().smooth(1.0).unwrap();
        assert!((g.cdf(1.0) - (1.0 - 0.158_655_253_931_457_05)).abs() < 1e-15);
        assert!((g.sf(1.0) - 0.158_655_253_931_457_05).abs() < 1e-16);
    }

    #[test]
    fn cdf_is_monotone_on_grid() {
        let m = Measure1D::new(
            vec![Atom { x: -0.5, w: 0.3 }],
            Some(DensityPart::uniform(0.0, 1.0, 0.7).unwrap()),
            0.75,
        )
        .unwrap()
        .smooth(0.05)
        .unwrap();
        let mut prev = 0.0;
        for k in 0..100 {
            let x = -2.0 + 4.0 * k as f64 / 99.0;
            let f = m.cdf(x);
            assert!(f > prev && f < 1.0, "x = {x}: {f} after {prev}");
            prev = f;
        }
    }

    #[test]
    fn tails_are_complementary() {
        let m = uniform_pm1().smooth(0.1).unwrap();
        for &x in &[-1.5, -0.3, 0.0, 0.8, 1.2] {
            assert!((m.cdf(x) + m.sf(x) - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn medians() {
        let m = Measure1D::two_point(1.0).unwrap().smooth(0.5).unwrap();
        assert!(m.median().abs() < 1e-12);
        let p = Measure1D::point_mass(2.5, 1.0).unwrap().smooth(0.3).unwrap();
        assert!((p.median() - 2.5).abs() < 1e-12);
        let u = Measure1D::uniform(0.0, 1.0).unwrap().smooth(0.1).unwrap();
        let med = u.median();
        assert!((med - 0.5).abs() < 1e-10);
        assert!((u.cdf(med) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn second_moments() {
        let p = Measure1D::point_mass(0.0, 1.0).unwrap().smooth(0.7).unwrap();
        assert!((p.second_moment().unwrap() - 0.7).abs() < 1e-15);
        let t = Measure1D::two_point(1.0).unwrap().smooth(0.5).unwrap();
        assert!((t.second_moment().unwrap() - 1.5).abs() < 1e-15);
        let u = uniform_pm1().smooth(0.25).unwrap();
        // ∫ s²/2 ds over [−1, 1] = 1/3
        let oracle = adaptive_quadrature(|s| 0.5 * s * s, -1.0, 1.0, 1e-14).unwrap().value;
        assert!((u.second_moment().unwrap() - (oracle + 0.25)).abs() < 1e-14);
        assert!(u.second_moment().unwrap() <= 0.25 + 1.0);
    }

    #[test]
    fn density_integrates_to_one() {
        let m = Measure1D::new(
            vec![Atom { x: 0.9, w: 0.25 }],
            Some(DensityPart::polynomial(-1.0, 1.0, vec![0.375, 0.0, 0.0]).unwrap()),
            1.0,
        )
        .unwrap();
        for delta in [0.01, 0.2, 1.0] {
            let s = m.smooth(delta).unwrap();
            let (a, b) = s.window();
            let mut breaks = vec![a, b];
            breaks.extend(s.feature_points());
            let r = integrate(|t| s.density(t), &breaks, &QuadConfig::new(1e-12)).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "delta = {delta}: {}", r.value);
        }
    }

    #[test]
    fn cdf_derivative_matches_density() {
        let m = Measure1D::new(
            vec![Atom { x: -0.2, w: 0.5 }],
            Some(DensityPart::uniform(-1.0, 0.6, 0.5).unwrap()),
            0.8,
        )
        .unwrap()
        .smooth(0.08)
        .unwrap();
        let h = 1e-5;
        for k in 0..25 {
            let x = -1.6 + 3.2 * k as f64 / 24.0;
            let fd = (m.cdf(x + h) - m.cdf(x - h)) / (2.0 * h);
            assert!((fd - m.density(x)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn rejects_invalid_measures() {
        assert!(Measure1D::new(vec![Atom { x: 0.0, w: 0.5 }], None, 1.0).is_err());
        assert!(Measure1D::new(
            vec![Atom { x: -1.0, w: 0.5 }, Atom { x: 1.5, w: 0.5 }],
            None,
            1.0
        )
        .is_err());
        assert!(Measure1D::point_mass(0.0, 0.0).is_err());
        assert!(Measure1D::point_mass(0.0, 1.0).unwrap().smooth(0.0).is_err());
        assert!(DensityPart::polynomial(0.0, 1.0, vec![1.0, -3.0]).is_err());
    }

    #[test]
    fn json_roundtrip_and_alpha_density() {
        let m = Measure1D::from_json(
            r#"{"R": 0.5, "density": {"kind": "polynomial", "support": [0.0, 1.0], "coeffs": [0.0, 0.0, 3.0]}}"#,
        )
        .unwrap();
        let spec = m.to_spec().unwrap();
        let again = Measure1D::from_spec(&spec).unwrap();
        assert_eq!(again.to_spec().unwrap(), spec);
        let u = Measure1D::from_json(
            r#"{"R": 1.0, "atoms": [{"x": 0.0, "w": 0.5}], "density": {"kind": "uniform", "support": [-1.0, 1.0]}}"#,
        )
        .unwrap();
        assert!((u.density().unwrap().mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polynomial_reflection_and_translation() {
        let m = Measure1D::new(
            Vec::new(),
            Some(DensityPart::polynomial(0.0, 1.0, vec![0.0, 2.0]).unwrap()),
            0.5,
        )
        .unwrap();
        let r = m.reflect();
        assert!((r.density().unwrap().eval(-0.25) - 0.5).abs() < 1e-15);
        let t = m.translate(3.0);
        assert!((t.density().unwrap().eval(3.25) - 0.5).abs() < 1e-15);
        assert_eq!(t.to_spec().unwrap().density.unwrap(), DensitySpec::Polynomial {
            support: [3.0, 4.0],
            coeffs: vec![-6.0, 2.0],
        });
    }
}
