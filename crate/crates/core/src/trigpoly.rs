//! Cosine-polynomial algebra.
//!
//! A cosine polynomial of degree `n` is `f(φ) = a₀ + a₁ cos φ + … + a_n cos nφ`.
//! This module evaluates such polynomials, maps spectral factors onto their
//! coefficients, computes the ratio functional `v(f)`, and checks membership in
//! the admissible class: nonnegative coefficients, `a₁ > a₀ > 0`, and `f ≥ 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::golden_section_min;

/// Default tolerance for the membership predicates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Number of uniform grid points on `[0, 2π)` used to bound the minimum.
pub const MEMBERSHIP_GRID: usize = 4096;

/// Coefficients `a₀ … a_n` of `Σ a_k cos kφ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialJson", into = "PolynomialJson")]
pub struct CosinePolynomial {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    degree: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<PolynomialJson> for CosinePolynomial {
    type Error = Error;

    fn try_from(raw: PolynomialJson) -> Result<Self> {
        if raw.coeffs.len() != raw.degree + 1 {
            return Err(domain(format!(
                "degree {} requires {} coefficients, got {}",
                raw.degree,
                raw.degree + 1,
                raw.coeffs.len()
            )));
        }
        CosinePolynomial::new(raw.coeffs)
    }
}

impl From<CosinePolynomial> for PolynomialJson {
    fn from(p: CosinePolynomial) -> Self {
        PolynomialJson { degree: p.degree(), coeffs: p.coeffs }
    }
}

impl CosinePolynomial {
    /// Builds a polynomial from `a₀ … a_n`. At least one coefficient is required.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("a cosine polynomial needs at least a₀"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(domain("coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient `a_k`, or zero past the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// `Σ a_k cos kφ`, summed in ascending `k`.
    pub fn eval(&self, phi: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .fold(0.0, |acc, (k, &a)| acc + a * (k as f64 * phi).cos())
    }

    /// `f(0) = Σ a_k`.
    pub fn value_at_zero(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// Pads with zero coefficients up to `degree`; never truncates.
    pub fn padded(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < degree + 1 {
            coeffs.resize(degree + 1, 0.0);
        }
        Self { coeffs }
    }
}

/// Real vector `x₀ … x_n` with `f(φ) = |Σ x_k e^{ikφ}|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralFactor {
    entries: Vec<f64>,
}

impl SpectralFactor {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(domain("a spectral factor needs at least one entry"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.entries.len() - 1
    }

    /// `|Σ x_k e^{ikφ}|²` evaluated directly from the complex sum.
    pub fn modulus_squared(&self, phi: f64) -> f64 {
        let (re, im) = self.entries.iter().enumerate().fold((0.0, 0.0), |(re, im), (k, &x)| {
            let t = k as f64 * phi;
            (re + x * t.cos(), im + x * t.sin())
        });
        re * re + im * im
    }
}

/// Autocorrelation `Σ_{k=0}^{n-lag} x_k x_{k+lag}`.
pub(crate) fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum()
}

/// Coefficients of `|Σ x_k e^{ikφ}|²`: `a₀ = Σ x_k²`, `a_j = 2 Σ x_k x_{k+j}`.
pub fn from_spectral_factor(x: &SpectralFactor) -> CosinePolynomial {
    let e = x.entries();
    let coeffs = (0..e.len())
        .map(|j| {
            let r = autocorrelation(e, j);
            if j == 0 {
                r
            } else {
                2.0 * r
            }
        })
        .collect();
    CosinePolynomial { coeffs }
}

/// `v(f) = (f(0) − a₀) / (√a₁ − √a₀)²`, defined when `a₁ > a₀ > 0`.
pub fn v_functional(poly: &CosinePolynomial) -> Result<f64> {
    let a0 = poly.coeff(0);
    let a1 = poly.coeff(1);
    if a0 <= 0.0 || a1 <= a0 {
        return Err(domain(format!("v(f) needs a₁ > a₀ > 0, got a₀ = {a0}, a₁ = {a1}")));
    }
    let gap = a1.sqrt() - a0.sqrt();
    Ok((poly.value_at_zero() - a0) / (gap * gap))
}

/// `2 cos(π/(n+2))`, the largest attainable `a₁/a₀` for a nonnegative degree-`n` polynomial.
pub fn fejer_bound(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(domain("the Fejér bound needs n ≥ 1"));
    }
    Ok(2.0 * (PI / (n as f64 + 2.0)).cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    #[serde(rename = "A1-negative-coefficient")]
    NegativeCoefficient,
    #[serde(rename = "A2-order-violation")]
    OrderViolation,
    #[serde(rename = "A3-negative-value")]
    NegativeValue,
}

impl Violation {
    pub fn tag(&self) -> &'static str {
        match self {
            Violation::NegativeCoefficient => "A1-negative-coefficient",
            Violation::OrderViolation => "A2-order-violation",
            Violation::NegativeValue => "A3-negative-value",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub in_class: bool,
    pub violated_conditions: Vec<Violation>,
    pub min_value: f64,
    pub min_location: f64,
}

/// Global minimum of `f` on `[0, 2π)`: a uniform grid followed by golden-section
/// refinement inside the two cells around every discrete local minimum.
pub fn global_minimum(poly: &CosinePolynomial) -> (f64, f64) {
    let m = MEMBERSHIP_GRID;
    let h = 2.0 * PI / m as f64;
    let values: Vec<f64> = (0..m).map(|i| poly.eval(i as f64 * h)).collect();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..m {
        let prev = values[(i + m - 1) % m];
        let next = values[(i + 1) % m];
        if values[i] > prev || values[i] > next {
            continue;
        }
        let centre = i as f64 * h;
        let refined = golden_section_min(|phi| poly.eval(phi), centre - h, centre + h, 1e-12)
            .map(|r| (r.f_star, r.x_star))
            .unwrap_or((values[i], centre));
        let candidate = if refined.0 < values[i] { refined } else { (values[i], centre) };
        if candidate.0 < best.0 {
            best = candidate;
        }
    }
    let loc = best.1.rem_euclid(2.0 * PI);
    (best.0, loc)
}

/// Checks the three class conditions: nonnegative coefficients, `a₁ > a₀ > 0`, and `f ≥ 0`.
pub fn membership_c_n(poly: &CosinePolynomial, tol: f64) -> MembershipReport {
    let mut violated = Vec::new();
    if poly.coeffs().iter().any(|&a| a < -tol) {
        violated.push(Violation::NegativeCoefficient);
    }
    let (a0, a1) = (poly.coeff(0), poly.coeff(1));
    if !(a0 > 0.0 && a1 > a0) {
        violated.push(Violation::OrderViolation);
    }
    let (min_value, min_location) = global_minimum(poly);
    if min_value < -tol {
        violated.push(Violation::NegativeValue);
    }
    MembershipReport { in_class: violated.is_empty(), violated_conditions: violated, min_value, min_location }
}
