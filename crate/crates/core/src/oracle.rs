//! Independent checks on the solver: random sampling of the full feasible set,
//! a one-sided penalty over every inequality, a quadrature check of the
//! spectral map, and the elementary ratio inequalities used for degree 3.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BOUND_LINES;
use crate::error::{domain, Error, Result};
use crate::kkt_solver::{
    default_starts, fejer_extremal, inequality, normalized, objective_f, project_onto_constraints, Form,
    PenaltySchedule, ReducedProblem, EQUALITY_TOL, FEASIBILITY_TOL,
};
use crate::numerics::{bisect, dot, newton_minimize, panel_quadrature, Derivatives, Matrix, NewtonConfig, Objective};
use crate::pipeline::{ratio_denominator, Pipeline, SweepRecord};
use crate::trigpoly::{fejer_bound, from_spectral_factor, SpectralFactor};

pub const MIN_SAMPLES: usize = 1000;
/// Best raw samples handed to the polishing stage.
pub const POLISH_COUNT: usize = 32;
const POLISH_MU: [f64; 3] = [1e4, 1e6, 1e8];
const POLISH_STEPS: usize = 20;

/// `F + μ[(H₁ − 1)² + (H₂ − a)² + Σ_{j=1}^{n−1} min(G_j, 0)²]`.
pub struct OneSidedPenalty {
    n: usize,
    a: f64,
    mu: f64,
}

impl OneSidedPenalty {
    pub fn new(n: usize, a: f64, mu: f64) -> Self {
        Self { n, a, mu }
    }

    fn equalities(&self) -> [(Form, f64); 2] {
        [(Form::Lag(0), 1.0), (Form::Lag(1), self.a)]
    }

    fn inequalities(&self) -> impl Iterator<Item = Form> {
        (2..=self.n).map(Form::Lag)
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let eq: f64 = self.equalities().iter().map(|&(q, c)| (q.value(x) - c).powi(2)).sum();
        let ineq: f64 = self.inequalities().map(|q| q.value(x).min(0.0).powi(2)).sum();
        eq + ineq
    }
}

impl Objective for OneSidedPenalty {
    fn value(&self, x: &[f64]) -> f64 {
        objective_f(x) + self.mu * self.violation(x)
    }

    fn derivatives(&self, x: &[f64]) -> Derivatives {
        let mut gradient = Form::Ones.gradient(x);
        let mut hessian = Matrix::zeros(x.len());
        Form::Ones.add_matrix(&mut hessian, 2.0);
        let residuals = self
            .equalities()
            .into_iter()
            .map(|(q, c)| (q, q.value(x) - c))
            .chain(self.inequalities().map(|q| (q, q.value(x))).filter(|&(_, g)| g < 0.0));
        for (q, r) in residuals {
            let g = q.gradient(x);
            for (gi, qi) in gradient.iter_mut().zip(&g) {
                *gi += 2.0 * self.mu * r * qi;
            }
            hessian.add_outer(2.0 * self.mu, &g, &g);
            q.add_matrix(&mut hessian, 4.0 * self.mu * r);
        }
        Derivatives { value: self.value(x), gradient, hessian }
    }

    fn change(&self, x: &[f64], step: &[f64]) -> f64 {
        let eq: f64 = self
            .equalities()
            .iter()
            .map(|&(q, c)| {
                let d = q.delta(x, step);
                d * (2.0 * (q.value(x) - c) + d)
            })
            .sum();
        let ineq: f64 = self
            .inequalities()
            .map(|q| {
                let g = q.value(x);
                (g + q.delta(x, step)).min(0.0).powi(2) - g.min(0.0).powi(2)
            })
            .sum();
        Form::Ones.delta(x, step) + self.mu * (eq + ineq)
    }
}

/// Projects onto `H₁ = 1`, `H₂ = a` and returns `F` if every `G_j ≥ −1e-6` there.
fn feasible_value(problem: &ReducedProblem, x: &[f64]) -> Option<(f64, Vec<f64>)> {
    let free = problem.active_sets().into_iter().next()?;
    let y = project_onto_constraints(problem, &free, x);
    let h1 = Form::Lag(0).value(&y) - 1.0;
    let h2 = Form::Lag(1).value(&y) - problem.a;
    let ok = h1.abs() <= EQUALITY_TOL
        && h2.abs() <= EQUALITY_TOL
        && (1..problem.n).all(|j| inequality(&y, j) >= -FEASIBILITY_TOL);
    ok.then(|| (objective_f(&y), y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub chi: f64,
    pub x: Vec<f64>,
    /// Samples (or starts) that ended feasible.
    pub feasible: usize,
}

/// Upper estimate of `χₙ(a)` over the full constraint set by random sampling.
///
/// Each random unit vector is moved along a great-circle arc toward the
/// extreme eigenvector of the `a₁` form until `a₁ = a`; points with every
/// `G_j ≥ −1e-6` are kept, and the best [`POLISH_COUNT`] of them are polished
/// with short one-sided penalty runs.
pub fn brute_force_chi(n: usize, a: f64, samples: usize, seed: u64) -> Result<OracleEstimate> {
    let fejer = fejer_bound(n)?;
    if samples < MIN_SAMPLES {
        return Err(domain(format!("brute force needs at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if !(a > -fejer && a < fejer) {
        return Err(domain(format!("a = {a} must lie strictly inside (−{fejer}, {fejer})")));
    }
    let problem = ReducedProblem::new(n, a, Vec::new())?;
    let m = n + 1;
    let top = fejer_extremal(n);
    let bottom: Vec<f64> = top.iter().enumerate().map(|(k, v)| if k % 2 == 0 { *v } else { -v }).collect();
    let a1 = |x: &[f64]| Form::Lag(1).value(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..samples {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let Some(u) = normalized(&raw) else { continue };
        let target = if a1(&u) < a { &top } else { &bottom };
        let sign = if dot(&u, target) < 0.0 { -1.0 } else { 1.0 };
        let arc = |t: f64| -> Vec<f64> {
            let p: Vec<f64> = u.iter().zip(target).map(|(ui, vi)| (1.0 - t) * ui + t * sign * vi).collect();
            normalized(&p).unwrap_or(p)
        };
        let Ok(t) = bisect(|t| a1(&arc(t)) - a, 0.0, 1.0, 1e-15) else { continue };
        let x = arc(t);
        if (1..n).all(|j| inequality(&x, j) >= -FEASIBILITY_TOL) {
            found.push((objective_f(&x), x));
        }
    }
    if found.is_empty() {
        return Err(Error::NoFeasibleSample { samples });
    }
    let feasible = found.len();
    found.sort_by(|p, q| p.0.total_cmp(&q.0));
    found.truncate(POLISH_COUNT);
    let newton = NewtonConfig { max_iters: POLISH_STEPS, ..NewtonConfig::default() };
    let mut best = found[0].clone();
    for (_, x0) in &found {
        let mut x = x0.clone();
        for mu in POLISH_MU {
            x = newton_minimize(&OneSidedPenalty::new(n, a, mu), &x, &newton).x;
        }
        if let Some(candidate) = feasible_value(&problem, &x) {
            if candidate.0 < best.0 {
                best = candidate;
            }
        }
    }
    Ok(OracleEstimate { chi: best.0, x: best.1, feasible })
}

/// Minimizes the one-sided penalty over every inequality with μ-continuation from each start.
///
/// Runs whose final stage converges and whose projection is feasible compete on `F`.
pub fn one_sided_penalty_chi(
    n: usize,
    a: f64,
    schedule: &PenaltySchedule,
    starts: &[Vec<f64>],
) -> Result<OracleEstimate> {
    let problem = ReducedProblem::new(n, a, Vec::new())?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible = 0;
    for x0 in starts.iter().filter_map(|s| normalized(s)) {
        let mut x = x0;
        let mut converged = false;
        for &mu in &schedule.mu_values {
            let out = newton_minimize(&OneSidedPenalty::new(n, a, mu), &x, &schedule.newton);
            x = out.x;
            converged = out.converged;
        }
        if !converged {
            continue;
        }
        if let Some(candidate) = feasible_value(&problem, &x) {
            feasible += 1;
            if best.as_ref().is_none_or(|b| candidate.0 < b.0) {
                best = Some(candidate);
            }
        }
    }
    let (chi, x) = best.ok_or(Error::AllStartsFailed { starts: starts.len() })?;
    Ok(OracleEstimate { chi, x, feasible })
}

/// Largest deviation between quadrature Fourier coefficients of `|Σ x_k e^{ikφ}|²` and [`from_spectral_factor`].
pub fn spectral_cross_check(x: &SpectralFactor) -> Result<f64> {
    let poly = from_spectral_factor(x);
    let tau = 2.0 * std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for k in 0..=poly.degree() {
        let kf = k as f64;
        let integral = panel_quadrature(|p| x.modulus_squared(p) * (kf * p).cos(), 0.0, tau, 32, 1e-13)?;
        let coeff = if k == 0 { integral / tau } else { 2.0 * integral / tau };
        worst = worst.max((coeff - poly.coeff(k)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub trials: usize,
    /// Mediant: `Δa/Δb > a/b ⇒ (a+Δa)/(b+Δb) > a/b`.
    pub mediant_failures: usize,
    /// Aggregation: `a₁/b₁ > k` and `a₂/b₂ > k ⇒ (a₁+a₂)/(b₁+b₂) > k`.
    pub aggregation_failures: usize,
    /// `√((a+Δa)(b+Δb)) ≥ √(ab) + √(ΔaΔb)`.
    pub sqrt_failures: usize,
    /// Largest relative gap in the square-root inequality when `aΔb = bΔa`.
    pub equality_max_error: f64,
    pub passed: bool,
}

/// Randomized checks of the three ratio inequalities behind the degree-3 argument.
pub fn appendix_a_properties(trials: usize, seed: u64) -> Result<LemmaReport> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = || -> f64 { rng.gen_range(1e-3..1e3) };
    let mut report = LemmaReport {
        trials,
        mediant_failures: 0,
        aggregation_failures: 0,
        sqrt_failures: 0,
        equality_max_error: 0.0,
        passed: false,
    };
    for _ in 0..trials {
        let (a, b, da, db) = (pos(), pos(), pos(), pos());
        if da / db > a / b && !((a + da) / (b + db) > a / b) {
            report.mediant_failures += 1;
        }

        let (a1, b1, a2, b2) = (pos(), pos(), pos(), pos());
        let k = 0.999 * (a1 / b1).min(a2 / b2);
        if !((a1 + a2) / (b1 + b2) > k) {
            report.aggregation_failures += 1;
        }

        let lhs = ((a + da) * (b + db)).sqrt();
        let rhs = (a * b).sqrt() + (da * db).sqrt();
        if lhs < rhs * (1.0 - 1e-15) {
            report.sqrt_failures += 1;
        }

        let db_eq = b * da / a;
        let lhs = ((a + da) * (b + db_eq)).sqrt();
        let rhs = (a * b).sqrt() + (da * db_eq).sqrt();
        report.equality_max_error = report.equality_max_error.max((lhs - rhs).abs() / rhs);
    }
    report.passed = report.mediant_failures == 0
        && report.aggregation_failures == 0
        && report.sqrt_failures == 0
        && report.equality_max_error <= 1e-12;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Random starts for the one-sided penalty.
    pub restarts: usize,
    pub schedule: PenaltySchedule,
    /// Sweep points audited besides the argmin.
    pub extra_points: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { samples: 100_000, seed: 42, restarts: 8, schedule: PenaltySchedule::default(), extra_points: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub a: f64,
    pub chi_reduced: f64,
    pub brute_force: Option<f64>,
    pub one_sided: Option<f64>,
    /// Largest `χ` lower bound among the bound lines at `a`.
    pub bound_floor: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    pub v: f64,
    pub a_star: f64,
    pub samples: usize,
    pub seed: u64,
    pub points: Vec<AuditPoint>,
    pub passed: bool,
}

/// Tolerances of the sandwich `χ_reduced ≤ oracle + tol`.
pub const BRUTE_FORCE_SLACK: f64 = 1e-5;
pub const ONE_SIDED_SLACK: f64 = 1e-4;

/// Runs both oracles at `a` and checks them against `chi_reduced` and the bound lines.
pub fn audit_point(n: usize, a: f64, chi_reduced: f64, cfg: &OracleConfig) -> AuditPoint {
    let brute_force = brute_force_chi(n, a, cfg.samples, cfg.seed).ok().map(|e| e.chi);
    let starts = default_starts(n, None, cfg.restarts, cfg.seed);
    let one_sided = one_sided_penalty_chi(n, a, &cfg.schedule, &starts).ok().map(|e| e.chi);
    let bound_floor = BOUND_LINES.iter().map(|(_, l)| l.chi_lower(a)).fold(f64::NEG_INFINITY, f64::max);
    let above_bounds = |v: f64| v >= bound_floor - 1e-6;
    let passed = brute_force.is_some_and(|b| chi_reduced <= b + BRUTE_FORCE_SLACK && above_bounds(b))
        && one_sided.is_some_and(|o| chi_reduced <= o + ONE_SIDED_SLACK && above_bounds(o));
    AuditPoint { a, chi_reduced, brute_force, one_sided, bound_floor, passed }
}

/// Audits the argmin of `Vₙ` and `cfg.extra_points` seeded random certified sweep points.
pub fn audit(n: usize, pipeline: &mut Pipeline, cfg: &OracleConfig) -> Result<AuditReport> {
    if n < 4 {
        return Err(domain("audits apply to the swept degrees 4 ≤ n ≤ 8"));
    }
    let result = pipeline.compute(n)?;
    let mut targets = vec![(result.a_star, result.v_value * ratio_denominator(result.a_star))];
    let certified: Vec<&SweepRecord> =
        pipeline.sweep_records(n).unwrap_or_default().iter().filter(|r| r.certified).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.extra_points.min(certified.len()) {
        let r = certified[rng.gen_range(0..certified.len())];
        targets.push((r.a, r.chi));
    }
    let points: Vec<AuditPoint> = targets.iter().map(|&(a, chi)| audit_point(n, a, chi, cfg)).collect();
    Ok(AuditReport {
        n,
        v: result.v_value,
        a_star: result.a_star,
        samples: cfg.samples,
        seed: cfg.seed,
        passed: points.iter().all(|p| p.passed),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_gradient;

    #[test]
    fn one_sided_gradient_matches_differences() {
        let obj = OneSidedPenalty::new(6, 1.7, 1e3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let analytic = obj.derivatives(&x).gradient;
            let numeric = finite_diff_gradient(|y| obj.value(y), &x, 1e-6);
            for (p, q) in analytic.iter().zip(&numeric) {
                assert!((p - q).abs() <= 1e-5 * (1.0 + q.abs()), "{p} vs {q}");
            }
        }
    }

    #[test]
    fn inactive_inequalities_drop_out() {
        // Strictly positive lags: only the equality terms remain.
        let x = normalized(&[1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let obj = OneSidedPenalty::new(4, 1.6, 1e4);
        let eq = (Form::Lag(0).value(&x) - 1.0).powi(2) + (Form::Lag(1).value(&x) - 1.6).powi(2);
        assert!((obj.violation(&x) - eq).abs() < 1e-15);
    }

    #[test]
    fn change_matches_value_difference() {
        let obj = OneSidedPenalty::new(5, 1.7, 1e2);
        let x = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2];
        let s = [0.01, 0.02, -0.03, 0.0, 0.05, -0.01];
        let moved: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
        assert!((obj.change(&x, &s) - (obj.value(&moved) - obj.value(&x))).abs() < 1e-12);
    }

    #[test]
    fn brute_force_rejects_small_budgets() {
        assert!(brute_force_chi(4, 1.7, 10, 1).is_err());
        assert!(brute_force_chi(4, 1.74, 1000, 1).is_err());
    }

    #[test]
    fn lemma_checks_pass() {
        let r = appendix_a_properties(1000, 5).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn spectral_check_is_tight() {
        let x = SpectralFactor::new(vec![0.2, -0.5, 0.7, 0.1]).unwrap();
        assert!(spectral_cross_check(&x).unwrap() < 1e-10);
    }
}
