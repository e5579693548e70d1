//! Degrees 2 and 3, where the extremal polynomials form one-parameter families
//! with closed-form objectives.

use std::time::Instant;

use crate::error::{domain, Result};
use crate::kkt_solver::certify_polynomial;
use crate::numerics::{golden_section_min, BracketResult};
use crate::pipeline::VnResult;
use crate::trigpoly::{fejer_bound, CosinePolynomial};

/// Lower end `1 − 1/√2` of the admissible `α` for `(cos φ + α)²`.
pub const ALPHA2_MIN: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
/// Lower end (excluded) of the admissible `α` for `4(cos φ + α)²(cos φ + 1)`.
pub const ALPHA3_MIN: f64 = -0.25;

pub const ALPHA_TOL: f64 = 1e-9;
/// Offset applied at excluded interval ends.
pub const ENDPOINT_EPS: f64 = 1e-12;
const PRESCAN_POINTS: usize = 10_000;

/// `(cos φ + α)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFamily {
    pub alpha: f64,
}

impl QuadraticFamily {
    /// `(α² + ½) + 2α cos φ + ½ cos 2φ`.
    pub fn polynomial(&self) -> CosinePolynomial {
        let a = self.alpha;
        CosinePolynomial::new(vec![a * a + 0.5, 2.0 * a, 0.5]).expect("three coefficients")
    }

    pub fn in_class(&self) -> bool {
        self.alpha > ALPHA2_MIN && self.alpha < 1.0
    }
}

/// `(cos φ + α)²(cos φ + β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFamily {
    pub alpha: f64,
    pub beta: f64,
}

impl CubicFamily {
    pub fn polynomial(&self) -> CosinePolynomial {
        let (a, b) = (self.alpha, self.beta);
        CosinePolynomial::new(vec![b * (a * a + 0.5) + a, 2.0 * a * b + a * a + 0.75, 0.5 * b + a, 0.25])
            .expect("four coefficients")
    }

    pub fn in_class(&self) -> bool {
        c3_membership(self.alpha, self.beta)
    }
}

/// `v` of `(cos φ + α)²` on `1 − 1/√2 < α ≤ 1`.
pub fn v2_objective(alpha: f64) -> Result<f64> {
    if !(alpha > ALPHA2_MIN && alpha <= 1.0) {
        return Err(domain(format!("v₂ objective needs 1 − 1/√2 < α ≤ 1, got {alpha}")));
    }
    let gap = (2.0 * alpha).sqrt() - (alpha * alpha + 0.5).sqrt();
    Ok((0.5 + 2.0 * alpha) / (gap * gap))
}

/// `v` of `4(cos φ + α)²(cos φ + 1)` on `−1/4 < α ≤ 1`.
pub fn v3_objective(alpha: f64) -> Result<f64> {
    if !(alpha > ALPHA3_MIN && alpha <= 1.0) {
        return Err(domain(format!("v₃ objective needs −1/4 < α ≤ 1, got {alpha}")));
    }
    let a2 = alpha * alpha;
    let gap = (4.0 * a2 + 8.0 * alpha + 3.0).sqrt() - (4.0 * a2 + 4.0 * alpha + 2.0).sqrt();
    Ok((4.0 * a2 + 12.0 * alpha + 6.0) / (gap * gap))
}

/// Whether `(cos φ + α)²(cos φ + β)` lies in the degree-3 class, for `−1 ≤ α ≤ 1`, `β ≥ 1`.
pub fn c3_membership(alpha: f64, beta: f64) -> bool {
    if !(-1.0..=1.0).contains(&alpha) || beta < 1.0 {
        return false;
    }
    if alpha >= ALPHA2_MIN {
        return true;
    }
    alpha > ALPHA3_MIN && beta < 1.0 + (4.0 * alpha + 1.0) / (4.0 * alpha * alpha - 8.0 * alpha + 2.0)
}

/// `(8α + 2)/(4α² + 8α + 2 − 2√(8α(4α² + 2)))` on `[1 − 1/√2, 1]`; infinite at the lower end.
pub fn delta_ratio_lower(alpha: f64) -> Result<f64> {
    if !(ALPHA2_MIN..=1.0).contains(&alpha) {
        return Err(domain(format!("ratio bound needs 1 − 1/√2 ≤ α ≤ 1, got {alpha}")));
    }
    let a2 = alpha * alpha;
    let den = 4.0 * a2 + 8.0 * alpha + 2.0 - 2.0 * (8.0 * alpha * (4.0 * a2 + 2.0)).sqrt();
    Ok(if den <= 0.0 { f64::INFINITY } else { (8.0 * alpha + 2.0) / den })
}

/// Golden section on `[lo, hi]`, cross-checked against a uniform pre-scan.
///
/// Fails when the scan finds a value more than `10·tol` below the search
/// result, which means the objective is not unimodal on the bracket.
pub fn minimize_scanned<F>(f: F, lo: f64, hi: f64) -> Result<BracketResult>
where
    F: Fn(f64) -> f64,
{
    let found = golden_section_min(&f, lo, hi, ALPHA_TOL)?;
    let scan_min = (0..=PRESCAN_POINTS)
        .map(|i| f(lo + (hi - lo) * i as f64 / PRESCAN_POINTS as f64))
        .fold(f64::INFINITY, f64::min);
    if scan_min < found.f_star - 10.0 * ALPHA_TOL {
        return Err(domain(format!(
            "pre-scan found {scan_min} below the golden-section minimum {} on [{lo}, {hi}]",
            found.f_star
        )));
    }
    Ok(found)
}

/// Minimum of [`delta_ratio_lower`] over its domain.
pub fn delta_ratio_minimum() -> Result<BracketResult> {
    minimize_scanned(|a| delta_ratio_lower(a).unwrap_or(f64::INFINITY), ALPHA2_MIN + ENDPOINT_EPS, 1.0)
}

/// Largest sampled [`v3_objective`] over `[1 − 1/√2, 1]` on the pre-scan grid, as `(α, value)`.
///
/// Below `1 − 1/√2` the objective grows without bound as `α → −1/4`.
pub fn v3_sampled_maximum() -> Result<(f64, f64)> {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for i in 0..=PRESCAN_POINTS {
        let a = ALPHA2_MIN + (1.0 - ALPHA2_MIN) * i as f64 / PRESCAN_POINTS as f64;
        let v = v3_objective(a)?;
        if v > best.1 {
            best = (a, v);
        }
    }
    Ok(best)
}

fn closed_form_result(n: usize, alpha: f64, witness: CosinePolynomial, start: Instant) -> Result<VnResult> {
    let certificate = certify_polynomial(&witness);
    let v = crate::trigpoly::v_functional(&witness)?;
    Ok(VnResult {
        n,
        interval: [1.0, fejer_bound(n)?],
        v_value: v,
        a_star: witness.coeff(1) / witness.coeff(0),
        alpha_star: Some(alpha),
        certified: certificate.passed,
        witness,
        witness_factor: None,
        grid_points: 0,
        seed: None,
        warm_start: None,
        uncertified_minimum: None,
        certificate,
        runtime: start.elapsed(),
    })
}

/// `V₂` by golden section over the quadratic family.
pub fn compute_v2() -> Result<VnResult> {
    let start = Instant::now();
    let best = minimize_scanned(|a| v2_objective(a).unwrap_or(f64::INFINITY), ALPHA2_MIN + ENDPOINT_EPS, 1.0)?;
    let witness = QuadraticFamily { alpha: best.x_star }.polynomial();
    closed_form_result(2, best.x_star, witness, start)
}

/// `V₃` by golden section over the cubic family with `β = 1`.
pub fn compute_v3() -> Result<VnResult> {
    let start = Instant::now();
    let best = minimize_scanned(|a| v3_objective(a).unwrap_or(f64::INFINITY), ALPHA3_MIN + ENDPOINT_EPS, 1.0)?;
    let witness = CubicFamily { alpha: best.x_star, beta: 1.0 }.polynomial().scaled(4.0);
    closed_form_result(3, best.x_star, witness, start)
}
