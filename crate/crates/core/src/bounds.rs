//! Lower-bound lines for χₙ(a) and the interval restriction they imply.
//!
//! A positive functional `S(f) = f(φ₀) + ∫ m(φ) f(φ) dφ` with `S(cos kφ) ≤ 1`
//! for `2 ≤ k ≤ n` yields `χₙ(a) ≥ (1 − s(1))·a − s(0)`. Dividing by
//! `(√a − 1)²` gives a curve that bounds the ratio from below; wherever that
//! curve exceeds a known upper bound for `Vₙ` the minimizer cannot lie.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{bisect, panel_quadrature};
use crate::trigpoly::fejer_bound;

/// `χ(a) ≥ slope·a − intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundLine {
    pub slope: f64,
    pub intercept: f64,
}

/// The elementary bound `χ(a) ≥ 2a − 1`.
pub const F1: BoundLine = BoundLine { slope: 2.0, intercept: 1.0 };
/// Bound from the functional supported on `[π/2, π]`.
pub const F2: BoundLine = BoundLine { slope: 5.872_678_1, intercept: 6.872_678_1 };
/// Bound from the functional supported on `[π/3, π]`.
pub const F3: BoundLine = BoundLine { slope: 16.5, intercept: 25.801_160_8 };

pub const BOUND_LINES: [(&str, BoundLine); 3] = [("F1", F1), ("F2", F2), ("F3", F3)];

impl BoundLine {
    /// `(A·a − B)/(√a − 1)²` for `a > 1`.
    pub fn eval(&self, a: f64) -> Result<f64> {
        if !(a > 1.0) {
            return Err(domain(format!("bound line needs a > 1, got {a}")));
        }
        let gap = a.sqrt() - 1.0;
        Ok((self.slope * a - self.intercept) / (gap * gap))
    }

    /// The lower bound on χ itself.
    pub fn chi_lower(&self, a: f64) -> f64 {
        self.slope * a - self.intercept
    }

    /// Interior maximum `(B/A)²` of [`BoundLine::eval`], present only when `B > A`.
    pub fn stationary(&self) -> Option<f64> {
        (self.intercept > self.slope).then(|| (self.intercept / self.slope).powi(2))
    }
}

/// A weighted evaluation functional `f ↦ f(φ₀) + ∫ m f`.
#[derive(Debug, Clone, Copy)]
pub struct LowerBoundFunctional {
    pub name: &'static str,
    pub eval_point: f64,
    pub weight: fn(f64) -> f64,
    pub support: (f64, f64),
}

fn weight_half(phi: f64) -> f64 {
    3.738_664_4 - 1.470_092_2 * (4.0 * phi).cos() - 2.268_572_2 * (8.0 * phi).cos()
}

fn weight_third(phi: f64) -> f64 {
    2.0 * 3f64.sqrt() + 8.0 * (phi - PI / 3.0)
}

fn weight_zero(_: f64) -> f64 {
    0.0
}

impl LowerBoundFunctional {
    pub fn trivial() -> Self {
        Self { name: "trivial", eval_point: PI, weight: weight_zero, support: (PI / 2.0, PI) }
    }

    pub fn half_circle() -> Self {
        Self { name: "half-circle", eval_point: PI, weight: weight_half, support: (PI / 2.0, PI) }
    }

    pub fn two_thirds() -> Self {
        Self { name: "two-thirds", eval_point: 2.0 * PI / 3.0, weight: weight_third, support: (PI / 3.0, PI) }
    }

    /// The two nontrivial functionals with the bound lines they are expected to produce.
    pub fn builtin() -> [(Self, BoundLine); 2] {
        [(Self::half_circle(), F2), (Self::two_thirds(), F3)]
    }
}

const S_PANELS: usize = 16;
const S_TOL: f64 = 1e-12;

/// `s(k) = cos(kφ₀) + ∫ m(φ) cos(kφ) dφ`.
pub fn functional_s(functional: &LowerBoundFunctional, k: usize) -> Result<f64> {
    let kf = k as f64;
    let (lo, hi) = functional.support;
    let integral = panel_quadrature(|p| (functional.weight)(p) * (kf * p).cos(), lo, hi, S_PANELS, S_TOL)?;
    Ok((kf * functional.eval_point).cos() + integral)
}

/// Allowed excess of `s(k)` over 1 for `k ≥ 2`.
pub const S_TOLERANCE: f64 = 1e-5;
const WEIGHT_GRID: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub name: String,
    pub min_weight: f64,
    /// `s(0), s(1), …, s(n)`.
    pub s_values: Vec<f64>,
    /// `max s(k)` over `2 ≤ k ≤ n`.
    pub max_s: f64,
    pub line: BoundLine,
    pub passed: bool,
}

/// Checks `m ≥ 0` on a grid and `s(k) ≤ 1 + 1e-5` for `2 ≤ k ≤ n`.
pub fn verify_functional(functional: &LowerBoundFunctional, n: usize) -> Result<FunctionalReport> {
    if !(2..=8).contains(&n) {
        return Err(domain(format!("functional verification supports 2 ≤ n ≤ 8, got {n}")));
    }
    let (lo, hi) = functional.support;
    let min_weight = (0..=WEIGHT_GRID)
        .map(|i| (functional.weight)(lo + (hi - lo) * i as f64 / WEIGHT_GRID as f64))
        .fold(f64::INFINITY, f64::min);
    let s_values = (0..=n).map(|k| functional_s(functional, k)).collect::<Result<Vec<_>>>()?;
    let max_s = s_values[2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let line = BoundLine { slope: 1.0 - s_values[1], intercept: s_values[0] };
    Ok(FunctionalReport {
        name: functional.name.to_string(),
        min_weight,
        s_values,
        max_s,
        line,
        passed: min_weight >= 0.0 && max_s <= 1.0 + S_TOLERANCE,
    })
}

/// Verifies both nontrivial functionals at degree `n` and that they reproduce
/// the hard-coded [`F2`] and [`F3`] within `1e-5`.
pub fn verify_builtin_functionals(n: usize) -> Result<Vec<FunctionalReport>> {
    LowerBoundFunctional::builtin()
        .iter()
        .map(|(functional, expected)| {
            let report = verify_functional(functional, n)?;
            let matches = (report.line.slope - expected.slope).abs() <= 1e-5
                && (report.line.intercept - expected.intercept).abs() <= 1e-5;
            if report.passed && matches {
                Ok(report)
            } else {
                Err(Error::FunctionalRejected { name: report.name })
            }
        })
        .collect()
}

/// Search interval for the minimizing `a`, before and after outward rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Restriction {
    pub a_lo: f64,
    pub a_hi: f64,
    pub raw_lo: f64,
    pub raw_hi: f64,
    /// Bound line whose crossing fixes the lower end.
    pub lo_line: Option<String>,
    /// Bound line whose crossing fixes the upper end; `None` means the Fejér bound.
    pub hi_line: Option<String>,
}

const ROOT_TOL: f64 = 1e-13;
const NEAR_ONE: f64 = 1e-12;

fn round_down_7(x: f64) -> f64 {
    (x * 1e7).floor() / 1e7
}

fn round_up_7(x: f64) -> f64 {
    (x * 1e7).ceil() / 1e7
}

/// Subintervals of `[lo, hi]` where `line` exceeds `level`.
fn excluded_pieces(line: &BoundLine, level: f64, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    let f = |a: f64| line.eval(a).map(|v| v - level).unwrap_or(f64::NAN);
    let mut breaks = vec![lo];
    if let Some(s) = line.stationary().filter(|&s| s > lo && s < hi) {
        breaks.push(s);
    }
    breaks.push(hi);
    let mut pieces = Vec::new();
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (fp, fq) = (f(p), f(q));
        match (fp > 0.0, fq > 0.0) {
            (true, true) => pieces.push((p, q)),
            (false, false) => {}
            (true, false) => pieces.push((p, bisect(f, p, q, ROOT_TOL)?)),
            (false, true) => pieces.push((bisect(f, p, q, ROOT_TOL)?, q)),
        }
    }
    Ok(pieces)
}

/// Shrinks `(1, A(n)]` to the part where no bound line exceeds `v_upper`.
///
/// `a_lo` is rounded down and `a_hi` up at the seventh decimal; the unrounded
/// crossings are kept in `raw_lo`/`raw_hi`.
pub fn restrict_interval(n: usize, v_upper: f64) -> Result<Restriction> {
    if !(4..=8).contains(&n) {
        return Err(domain(format!("interval restriction supports 4 ≤ n ≤ 8, got {n}")));
    }
    if !(v_upper.is_finite() && v_upper > 0.0) {
        return Err(domain(format!("upper bound must be positive and finite, got {v_upper}")));
    }
    let fejer = fejer_bound(n)?;
    let start = 1.0 + NEAR_ONE;

    let mut pieces = Vec::new();
    for (name, line) in BOUND_LINES {
        for piece in excluded_pieces(&line, v_upper, start, fejer)? {
            pieces.push((piece, name));
        }
    }
    if pieces.is_empty() {
        return Err(Error::NoRestriction { lo: start, hi: fejer });
    }
    pieces.sort_by(|x, y| x.0 .0.total_cmp(&y.0 .0));

    let mut raw_lo: f64 = 1.0;
    let mut lo_line = None;
    for &((p, q), name) in &pieces {
        if p <= raw_lo.max(start) && q > raw_lo {
            raw_lo = q;
            lo_line = Some(name.to_string());
        }
    }
    let mut raw_hi = fejer;
    let mut hi_line = None;
    for &((p, q), name) in pieces.iter().rev() {
        if q >= raw_hi && p < raw_hi {
            raw_hi = p;
            hi_line = Some(name.to_string());
        }
    }
    if raw_lo >= raw_hi {
        return Err(domain(format!("bound lines exclude all of (1, {fejer}] at level {v_upper}")));
    }
    let a_lo = if lo_line.is_some() { round_down_7(raw_lo) } else { start };
    let a_hi = if hi_line.is_some() { round_up_7(raw_hi).min(fejer) } else { fejer };
    Ok(Restriction { a_lo, a_hi, raw_lo, raw_hi, lo_line, hi_line })
}
