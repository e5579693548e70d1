//! Reduced extremal problems over spectral factors and their KKT subproblems.
//!
//! For `x ∈ ℝⁿ⁺¹` every quantity of interest is a quadratic form:
//!
//! * `F(x) = (Σ x_k)² − 1`, the objective `f(0) − 1`;
//! * `H₁(x) = Σ x_k² = 1` and `H₂(x) = 2 Σ x_k x_{k+1} = a`, the equalities;
//! * `G_j(x) = 2 Σ x_k x_{k+j+1} ≥ 0` for `1 ≤ j ≤ n−1`, i.e. `G_j = a_{j+1}`.
//!
//! A reduced problem keeps only some `G_j`. Each subset of the kept
//! constraints forced to equality is one KKT subproblem, solved by a quadratic
//! penalty with μ-continuation and damped Newton.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{newton_minimize, norm, Derivatives, Matrix, NewtonConfig, Objective};
use crate::trigpoly::{fejer_bound, from_spectral_factor, membership_c_n, CosinePolynomial, MembershipReport, SpectralFactor};

/// Residual allowed on `H₁` and `H₂` for a run to count as converged.
pub const EQUALITY_TOL: f64 = 1e-7;
/// Smallest admissible inequality value `G_j`.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Objective values closer than this are ties, broken by canonical order.
pub const TIE_TOL: f64 = 1e-9;
const CONSISTENCY_TOL: f64 = 1e-7;

/// Spectral factor of the degree-4 extremal polynomial.
pub const V4_FACTOR: [f64; 5] = [0.2114174, 0.5028451, 0.6363167, 0.5028451, 0.2114174];

/// Fixed starting vectors for six-dimensional problems, reused by padding or truncation.
pub const SEEDED_STARTS: [[f64; 6]; 4] = [
    [0.2813599288, 0.5616322755, 0.6297662332, 0.4344555262, 0.1227731004, -0.0705778044],
    [-0.0201966983, 0.1955685973, 0.4848202185, 0.6297457947, 0.5212134113, 0.2409501665],
    [-0.1711276227, -0.4436859255, -0.6124330758, -0.5502991243, -0.3040722037, -0.0591661108],
    [-0.1579917997, -0.3946171069, -0.5650843883, -0.5650843821, -0.3946170930, -0.1579917886],
];

/// Inequality indices kept in the reduced problem for degree `n`.
pub fn standard_kept(n: usize) -> Vec<usize> {
    match n {
        0..=4 => vec![],
        5 => vec![4],
        _ => vec![4, 5],
    }
}

/// A quadratic form `xᵀQx` from the fixed family used by the problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// The induced coefficient `a_lag`: `Σx²` for lag 0, `2Σ x_k x_{k+lag}` otherwise.
    Lag(usize),
    /// `(Σ x_k)²`.
    Ones,
}

impl Form {
    pub fn value(self, x: &[f64]) -> f64 {
        match self {
            Form::Ones => x.iter().sum::<f64>().powi(2),
            Form::Lag(0) => x.iter().map(|v| v * v).sum(),
            Form::Lag(l) if l >= x.len() => 0.0,
            Form::Lag(l) => 2.0 * x.iter().zip(&x[l..]).map(|(u, v)| u * v).sum::<f64>(),
        }
    }

    /// `Qx`, so the gradient is `2Qx`.
    pub fn apply(self, x: &[f64]) -> Vec<f64> {
        let m = x.len();
        match self {
            Form::Ones => vec![x.iter().sum(); m],
            Form::Lag(0) => x.to_vec(),
            Form::Lag(l) => (0..m)
                .map(|i| {
                    let up = if i + l < m { x[i + l] } else { 0.0 };
                    let down = if i >= l { x[i - l] } else { 0.0 };
                    up + down
                })
                .collect(),
        }
    }

    /// `q(x + s) − q(x) = 2 sᵀQx + q(s)`, free of cancellation against `q(x)`.
    pub fn delta(self, x: &[f64], s: &[f64]) -> f64 {
        2.0 * crate::numerics::dot(&self.apply(x), s) + self.value(s)
    }

    pub fn gradient(self, x: &[f64]) -> Vec<f64> {
        self.apply(x).into_iter().map(|v| 2.0 * v).collect()
    }

    /// `h += scale · Q`.
    pub fn add_matrix(self, h: &mut Matrix, scale: f64) {
        let m = h.dim();
        match self {
            Form::Ones => (0..m).for_each(|i| (0..m).for_each(|j| h[(i, j)] += scale)),
            Form::Lag(0) => (0..m).for_each(|i| h[(i, i)] += scale),
            Form::Lag(l) => (0..m.saturating_sub(l)).for_each(|i| {
                h[(i, i + l)] += scale;
                h[(i + l, i)] += scale;
            }),
        }
    }
}

/// `F(x) = (Σx)² − 1`.
pub fn objective_f(x: &[f64]) -> f64 {
    Form::Ones.value(x) - 1.0
}

/// `G_j(x)`, the induced coefficient `a_{j+1}`.
pub fn inequality(x: &[f64], j: usize) -> f64 {
    Form::Lag(j + 1).value(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedProblem {
    pub n: usize,
    pub a: f64,
    pub kept: Vec<usize>,
}

impl ReducedProblem {
    pub fn new(n: usize, a: f64, kept: Vec<usize>) -> Result<Self> {
        if n < 1 {
            return Err(domain("reduced problems need n ≥ 1"));
        }
        let fejer = fejer_bound(n)?;
        if !(a > 1.0 && a <= fejer + 1e-12) {
            return Err(domain(format!("a = {a} lies outside (1, {fejer}]")));
        }
        if let Some(&bad) = kept.iter().find(|&&j| j == 0 || j >= n) {
            return Err(domain(format!("inequality index {bad} outside 1..={}", n - 1)));
        }
        let mut kept = kept;
        kept.sort_unstable();
        kept.dedup();
        Ok(Self { n, a, kept })
    }

    /// The problem with the kept set used for degree `n`.
    pub fn standard(n: usize, a: f64) -> Result<Self> {
        Self::new(n, a, standard_kept(n))
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// All `2^|kept|` active sets; bit `i` of `id − 1` activates `kept[i]`.
    pub fn active_sets(&self) -> Vec<ActiveSet> {
        (0..1usize << self.kept.len())
            .map(|mask| ActiveSet {
                id: mask + 1,
                active: self.kept.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &j)| j).collect(),
            })
            .collect()
    }

    fn equality_terms(&self) -> [(Form, f64); 2] {
        [(Form::Lag(0), 1.0), (Form::Lag(1), self.a)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSet {
    /// 1-based subproblem number.
    pub id: usize,
    pub active: Vec<usize>,
}

impl ActiveSet {
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.active.iter().map(|j| j.to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySchedule {
    pub mu_values: Vec<f64>,
    pub newton: NewtonConfig,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self { mu_values: (2..=9).map(|e| 10f64.powi(e)).collect(), newton: NewtonConfig::default() }
    }
}

impl PenaltySchedule {
    pub fn new(mu_values: Vec<f64>, newton: NewtonConfig) -> Result<Self> {
        let increasing = mu_values.windows(2).all(|w| w[0] < w[1]);
        let positive = mu_values.first().is_some_and(|&m| m > 0.0);
        if !increasing || !positive || *mu_values.last().unwrap() < 1e8 {
            return Err(domain("penalty schedule must be strictly increasing, positive and end at μ ≥ 1e8"));
        }
        Ok(Self { mu_values, newton })
    }

    pub fn final_mu(&self) -> f64 {
        *self.mu_values.last().expect("schedule is nonempty")
    }
}

/// `F + μ[(H₁ − 1)² + (H₂ − a)² + Σ_{j ∈ act} G_j²]`.
pub struct PenaltyObjective {
    terms: Vec<(Form, f64)>,
    mu: f64,
}

impl PenaltyObjective {
    pub fn new(problem: &ReducedProblem, act: &ActiveSet, mu: f64) -> Self {
        let mut terms = problem.equality_terms().to_vec();
        terms.extend(act.active.iter().map(|&j| (Form::Lag(j + 1), 0.0)));
        Self { terms, mu }
    }

    /// `α(x)`, the sum of squared constraint residuals.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(q, c)| (q.value(x) - c).powi(2)).sum()
    }
}

impl Objective for PenaltyObjective {
    fn value(&self, x: &[f64]) -> f64 {
        objective_f(x) + self.mu * self.violation(x)
    }

    fn derivatives(&self, x: &[f64]) -> Derivatives {
        let m = x.len();
        let mut gradient = Form::Ones.gradient(x);
        let mut hessian = Matrix::zeros(m);
        Form::Ones.add_matrix(&mut hessian, 2.0);
        for &(q, c) in &self.terms {
            let r = q.value(x) - c;
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
        let penalty: f64 = self
            .terms
            .iter()
            .map(|&(q, c)| {
                let d = q.delta(x, step);
                d * (2.0 * (q.value(x) - c) + d)
            })
            .sum();
        Form::Ones.delta(x, step) + self.mu * penalty
    }
}

/// Value, gradient and Hessian of the penalized objective at `x`.
pub fn penalty_objective(problem: &ReducedProblem, act: &ActiveSet, mu: f64, x: &[f64]) -> Derivatives {
    PenaltyObjective::new(problem, act, mu).derivatives(x)
}

/// Lagrange multipliers; `u` pairs each kept index with its multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub lambda1: f64,
    pub lambda2: f64,
    pub u: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub n: usize,
    pub a: f64,
    pub active: Vec<usize>,
    pub x: Vec<f64>,
    pub objective_f: f64,
    pub residual_h1: f64,
    pub residual_h2: f64,
    /// `G_1 … G_{n−1}` at `x`.
    pub inequality_values: Vec<f64>,
    pub multipliers: Multipliers,
    pub kkt_residual_norm: f64,
    pub converged: bool,
    pub canonical: bool,
    /// Penalized optimum `θ(μ)` after each stage.
    pub theta: Vec<f64>,
    /// `μ·α(x)` at the final stage.
    pub penalty_term: f64,
}

impl SolveOutcome {
    pub fn inequality(&self, j: usize) -> f64 {
        self.inequality_values[j - 1]
    }

    pub fn coefficients(&self) -> CosinePolynomial {
        coefficients_of(&self.x)
    }

    /// `G_j ≥ −1e-6` for each `j` in `kept`.
    pub fn satisfies(&self, kept: &[usize]) -> bool {
        kept.iter().all(|&j| self.inequality(j) >= -FEASIBILITY_TOL)
    }
}

pub fn coefficients_of(x: &[f64]) -> CosinePolynomial {
    from_spectral_factor(&SpectralFactor::new(x.to_vec()).expect("nonempty factor"))
}

fn lex_cmp(x: &[f64], y: &[f64]) -> Ordering {
    x.iter().zip(y).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Sign flipped so `Σx > 0`, then the lexicographically larger of `x` and its reversal.
pub fn canonical_form(x: &[f64]) -> Vec<f64> {
    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let fwd: Vec<f64> = x.iter().map(|v| sign * v).collect();
    let rev: Vec<f64> = fwd.iter().rev().copied().collect();
    if lex_cmp(&rev, &fwd) == Ordering::Greater {
        rev
    } else {
        fwd
    }
}

/// `‖∇F + λ₁∇H₁ + λ₂∇H₂ − Σ u_j ∇G_j‖`.
pub fn stationarity_residual(x: &[f64], multipliers: &Multipliers) -> f64 {
    let mut r = Form::Ones.gradient(x);
    let mut add = |form: Form, coef: f64| {
        for (ri, gi) in r.iter_mut().zip(form.gradient(x)) {
            *ri += coef * gi;
        }
    };
    add(Form::Lag(0), multipliers.lambda1);
    add(Form::Lag(1), multipliers.lambda2);
    for &(j, u) in &multipliers.u {
        add(Form::Lag(j + 1), -u);
    }
    norm(&r)
}

/// Multipliers minimizing the stationarity residual at `x`, with `u_j = 0` off the active set.
pub fn least_squares_multipliers(problem: &ReducedProblem, act: &ActiveSet, x: &[f64]) -> Multipliers {
    let mut cols = vec![Form::Lag(0).gradient(x), Form::Lag(1).gradient(x)];
    cols.extend(act.active.iter().map(|&j| Form::Lag(j + 1).gradient(x).into_iter().map(|v| -v).collect()));
    let rhs: Vec<f64> = Form::Ones.gradient(x).into_iter().map(|v| -v).collect();
    let k = cols.len();
    let mut normal = Matrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            normal[(i, j)] = crate::numerics::dot(&cols[i], &cols[j]);
        }
    }
    let b: Vec<f64> = cols.iter().map(|c| crate::numerics::dot(c, &rhs)).collect();
    let coef = normal.solve(&b).unwrap_or_else(|| vec![0.0; k]);
    let u = problem
        .kept
        .iter()
        .map(|&j| (j, act.active.iter().position(|&a| a == j).map_or(0.0, |p| coef[2 + p])))
        .collect();
    Multipliers { lambda1: coef[0], lambda2: coef[1], u }
}

/// Stationarity residual of an outcome with its recovered multipliers.
pub fn kkt_residual(outcome: &SolveOutcome) -> f64 {
    stationarity_residual(&outcome.x, &outcome.multipliers)
}

pub(crate) fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let s = norm(v);
    (s > 0.0 && s.is_finite()).then(|| v.iter().map(|x| x / s).collect())
}

/// One penalty-continuation run from `x0`.
fn run_start(problem: &ReducedProblem, act: &ActiveSet, schedule: &PenaltySchedule, x0: &[f64]) -> SolveOutcome {
    let mut x = x0.to_vec();
    let mut theta = Vec::with_capacity(schedule.mu_values.len());
    let mut stage_converged = false;
    for &mu in &schedule.mu_values {
        let out = newton_minimize(&PenaltyObjective::new(problem, act, mu), &x, &schedule.newton);
        x = out.x;
        theta.push(out.value);
        stage_converged = out.converged;
    }
    let mu = schedule.final_mu();
    let x = canonical_form(&x);
    let penalty = PenaltyObjective::new(problem, act, mu);
    let penalty_term = mu * penalty.violation(&x);
    let near_feasible = penalty.violation(&x).sqrt() <= EQUALITY_TOL;
    let multipliers = penalty_multipliers(problem, act, &x, mu);
    let mut outcome = outcome_at(problem, act, &project_onto_constraints(problem, act, &x), multipliers);
    outcome.theta = theta;
    outcome.penalty_term = penalty_term;
    let consistent = (outcome.coefficients().coeffs().iter().sum::<f64>() - 1.0 - outcome.objective_f).abs()
        <= CONSISTENCY_TOL;
    outcome.converged = stage_converged
        && near_feasible
        && consistent
        && outcome.residual_h1.abs() <= EQUALITY_TOL
        && outcome.residual_h2.abs() <= EQUALITY_TOL;
    outcome
}

/// Multipliers recovered from a penalized minimizer: `λ_i = 2μ h_i`, `u_j = −2μ G_j` on the active set.
pub fn penalty_multipliers(problem: &ReducedProblem, act: &ActiveSet, x: &[f64], mu: f64) -> Multipliers {
    let u = problem
        .kept
        .iter()
        .map(|&j| (j, if act.active.contains(&j) { -2.0 * mu * inequality(x, j) } else { 0.0 }))
        .collect();
    Multipliers {
        lambda1: 2.0 * mu * (Form::Lag(0).value(x) - 1.0),
        lambda2: 2.0 * mu * (Form::Lag(1).value(x) - problem.a),
        u,
    }
}

/// Minimum-norm Gauss–Newton corrections onto `H₁ = 1`, `H₂ = a` and the active `G_j = 0`.
///
/// Penalized minimizers sit `O(1/μ)` off the constraints, which biases `F`
/// low by about `2μ·α`; the projected point is feasible to rounding.
pub fn project_onto_constraints(problem: &ReducedProblem, act: &ActiveSet, x: &[f64]) -> Vec<f64> {
    let mut terms = problem.equality_terms().to_vec();
    terms.extend(act.active.iter().map(|&j| (Form::Lag(j + 1), 0.0)));
    let k = terms.len();
    let mut x = x.to_vec();
    for _ in 0..3 {
        let r: Vec<f64> = terms.iter().map(|&(q, c)| q.value(&x) - c).collect();
        if r.iter().all(|v| v.abs() <= 4.0 * f64::EPSILON) {
            break;
        }
        let rows: Vec<Vec<f64>> = terms.iter().map(|&(q, _)| q.gradient(&x)).collect();
        let mut gram = Matrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = crate::numerics::dot(&rows[i], &rows[j]);
            }
        }
        let Some(w) = gram.solve(&r) else { break };
        for (i, row) in rows.iter().enumerate() {
            for (xi, gi) in x.iter_mut().zip(row) {
                *xi -= w[i] * gi;
            }
        }
    }
    x
}

/// Builds an outcome for a point with the given multipliers.
pub fn outcome_at(problem: &ReducedProblem, act: &ActiveSet, x: &[f64], multipliers: Multipliers) -> SolveOutcome {
    SolveOutcome {
        n: problem.n,
        a: problem.a,
        active: act.active.clone(),
        objective_f: objective_f(x),
        residual_h1: Form::Lag(0).value(x) - 1.0,
        residual_h2: Form::Lag(1).value(x) - problem.a,
        kkt_residual_norm: stationarity_residual(x, &multipliers),
        inequality_values: (1..problem.n).map(|j| inequality(x, j)).collect(),
        multipliers,
        converged: false,
        canonical: canonical_form(x) == x,
        theta: Vec::new(),
        penalty_term: 0.0,
        x: x.to_vec(),
    }
}

/// Orders outcomes by objective, treating values within [`TIE_TOL`] as equal
/// and then preferring the lexicographically larger canonical vector.
pub fn better(x: &SolveOutcome, y: &SolveOutcome) -> bool {
    if (x.objective_f - y.objective_f).abs() <= TIE_TOL {
        lex_cmp(&x.x, &y.x) == Ordering::Greater
    } else {
        x.objective_f < y.objective_f
    }
}

fn best_of(outcomes: impl IntoIterator<Item = SolveOutcome>) -> Option<SolveOutcome> {
    outcomes.into_iter().fold(None, |best, o| match best {
        Some(b) if !better(&o, &b) => Some(b),
        _ => Some(o),
    })
}

/// Unit vector attaining `a₁ = A(n)`: the top eigenvector `sin((k+1)π/(n+2))` of the lag-1 form.
pub fn fejer_extremal(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..=n).map(|k| ((k + 1) as f64 * std::f64::consts::PI / (n + 2) as f64).sin()).collect();
    normalized(&v).expect("nonzero")
}

/// Every converged run of one subproblem.
///
/// At `a = A(n)` the sphere meets `H₂ = a` in a single point where the
/// constraint gradients are parallel; that point is returned directly.
pub fn solve_subproblem_all(
    problem: &ReducedProblem,
    act: &ActiveSet,
    schedule: &PenaltySchedule,
    starts: &[Vec<f64>],
) -> Vec<SolveOutcome> {
    let fejer = fejer_bound(problem.n).expect("validated n");
    if (problem.a - fejer).abs() <= 1e-12 {
        if !act.active.is_empty() {
            return Vec::new();
        }
        let x = canonical_form(&fejer_extremal(problem.n));
        let mut outcome = outcome_at(problem, act, &x, least_squares_multipliers(problem, act, &x));
        outcome.converged = true;
        return vec![outcome];
    }
    starts
        .iter()
        .filter_map(|s| normalized(s))
        .map(|x0| run_start(problem, act, schedule, &x0))
        .filter(|o| o.converged)
        .collect()
}

/// Best converged run of one subproblem over all starts.
pub fn solve_subproblem(
    problem: &ReducedProblem,
    act: &ActiveSet,
    schedule: &PenaltySchedule,
    starts: &[Vec<f64>],
) -> Result<SolveOutcome> {
    if starts.is_empty() {
        return Err(domain("at least one start vector is required"));
    }
    best_of(solve_subproblem_all(problem, act, schedule, starts)).ok_or(Error::AllStartsFailed { starts: starts.len() })
}

fn fit_length(v: &[f64], m: usize, offset: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (i, &x) in v.iter().enumerate() {
        if i + offset < m {
            out[i + offset] = x;
        }
    }
    out
}

/// Deterministic start vectors for dimension `n + 1`: an optional warm start,
/// the degree-4 factor at every shift, the fixed six-entry starts, then
/// `restarts` seeded uniform vectors in `[−1, 1]ⁿ⁺¹`.
pub fn default_starts(n: usize, warm: Option<&[f64]>, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = n + 1;
    let mut starts = Vec::new();
    if let Some(w) = warm.filter(|w| w.len() == m) {
        starts.push(w.to_vec());
    }
    for offset in 0..=m.saturating_sub(V4_FACTOR.len()) {
        starts.push(fit_length(&V4_FACTOR, m, offset));
    }
    starts.extend(SEEDED_STARTS.iter().map(|s| fit_length(s, m, 0)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    starts.extend((0..restarts).map(|_| (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()));
    starts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemResult {
    pub active_set: ActiveSet,
    /// Best converged outcome, preferring ones that satisfy the kept constraints.
    pub best: Option<SolveOutcome>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiResult {
    pub chi: f64,
    pub best: SolveOutcome,
    pub subproblem_id: usize,
    pub subproblems: Vec<SubproblemResult>,
}

/// Reduced optimum at `problem.a` from explicit start vectors.
pub fn chi_reduced_from(problem: &ReducedProblem, schedule: &PenaltySchedule, starts: &[Vec<f64>]) -> Result<ChiResult> {
    let mut subproblems = Vec::new();
    let mut overall: Option<(SolveOutcome, usize)> = None;
    for act in problem.active_sets() {
        let (feasible, infeasible): (Vec<_>, Vec<_>) =
            solve_subproblem_all(problem, &act, schedule, starts).into_iter().partition(|o| o.satisfies(&problem.kept));
        let best_feasible = best_of(feasible);
        if let Some(b) = &best_feasible {
            if overall.as_ref().is_none_or(|(o, _)| better(b, o)) {
                overall = Some((b.clone(), act.id));
            }
        }
        let is_feasible = best_feasible.is_some();
        subproblems.push(SubproblemResult {
            active_set: act,
            best: best_feasible.or_else(|| best_of(infeasible)),
            feasible: is_feasible,
        });
    }
    let (best, subproblem_id) = overall.ok_or(Error::Infeasible { a: problem.a })?;
    Ok(ChiResult { chi: best.objective_f, best, subproblem_id, subproblems })
}

/// Reduced optimum over all active sets using [`default_starts`].
pub fn chi_reduced(problem: &ReducedProblem, schedule: &PenaltySchedule, restarts: usize, seed: u64) -> Result<ChiResult> {
    if restarts == 0 {
        return Err(domain("restarts must be at least 1"));
    }
    chi_reduced_from(problem, schedule, &default_starts(problem.n, None, restarts, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    /// `a₂ … a_n`, equivalently `G_1 … G_{n−1}`.
    pub inequality_values: Vec<f64>,
    pub min_inequality: f64,
    pub membership: MembershipReport,
    pub coefficients: CosinePolynomial,
}

/// Checks every higher coefficient against `−1e-6` and runs the class test at the same tolerance.
pub fn certify_polynomial(poly: &CosinePolynomial) -> CertificateReport {
    let inequality_values: Vec<f64> = poly.coeffs().iter().skip(2).copied().collect();
    let min_inequality = inequality_values.iter().copied().fold(f64::INFINITY, f64::min);
    let membership = membership_c_n(poly, FEASIBILITY_TOL);
    CertificateReport {
        passed: min_inequality >= -FEASIBILITY_TOL && membership.in_class,
        inequality_values,
        min_inequality,
        membership,
        coefficients: poly.clone(),
    }
}

/// Full-constraint certificate for a spectral factor.
pub fn certify_vector(x: &[f64]) -> CertificateReport {
    certify_polynomial(&coefficients_of(x))
}

/// Full-constraint certificate for a converged outcome; unconverged outcomes never pass.
pub fn certify_full(outcome: &SolveOutcome) -> CertificateReport {
    let mut report = certify_vector(&outcome.x);
    report.passed &= outcome.converged;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_gradient, finite_diff_hessian};
    use proptest::prelude::*;

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn forms_match_spectral_map() {
        let x = [0.3, -0.2, 0.7, 0.1, -0.5];
        let poly = coefficients_of(&x);
        for lag in 0..5 {
            assert!(close(Form::Lag(lag).value(&x), poly.coeff(lag), 1e-15));
        }
        assert!(close(objective_f(&x), poly.coeffs().iter().sum::<f64>() - 1.0, 1e-15));
    }

    #[test]
    fn penalty_at_origin() {
        let p = ReducedProblem::new(4, 1.5, vec![]).unwrap();
        let act = &p.active_sets()[0];
        let d = penalty_objective(&p, act, 100.0, &[0.0; 5]);
        assert!(close(d.value, -1.0 + 100.0 * (1.0 + 1.5 * 1.5), 1e-12));
    }

    #[test]
    fn penalty_at_witness() {
        let p = ReducedProblem::new(4, 1.7051159, vec![]).unwrap();
        let act = &p.active_sets()[0];
        let obj = PenaltyObjective::new(&p, act, 1e8);
        assert!(obj.violation(&V4_FACTOR) * 1e8 < 1e-3);
        assert!(close(objective_f(&V4_FACTOR), 3.2635716, 2e-6));
    }

    #[test]
    fn active_set_enumeration() {
        let p = ReducedProblem::standard(6, 1.7).unwrap();
        let sets: Vec<String> = p.active_sets().iter().map(ActiveSet::label).collect();
        assert_eq!(sets, ["{}", "{4}", "{5}", "{4,5}"]);
        assert_eq!(p.active_sets()[3].id, 4);
    }

    #[test]
    fn problem_validation() {
        assert!(ReducedProblem::new(4, 1.0, vec![]).is_err());
        assert!(ReducedProblem::new(4, 1.8, vec![]).is_err());
        assert!(ReducedProblem::new(4, 1.5, vec![4]).is_err());
        assert!(ReducedProblem::new(4, 3f64.sqrt(), vec![]).is_ok());
        assert!(PenaltySchedule::new(vec![1e2, 1e3], NewtonConfig::default()).is_err());
        assert!(PenaltySchedule::new(vec![1e9, 1e8], NewtonConfig::default()).is_err());
    }

    #[test]
    fn canonical_form_examples() {
        assert_eq!(canonical_form(&[-1.0, -2.0, -3.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(canonical_form(&[1.0, 2.0, 3.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(canonical_form(&[3.0, 2.0, 1.0]), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn degree_five_recovers_padded_witness() {
        let p = ReducedProblem::new(5, 1.7051159, vec![4]).unwrap();
        let act = ActiveSet { id: 2, active: vec![4] };
        let starts = default_starts(5, None, 4, 42);
        let out = solve_subproblem(&p, &act, &PenaltySchedule::default(), &starts).unwrap();
        assert!(close(out.objective_f, 3.2635716, 1e-6), "{}", out.objective_f);
        assert!(out.x[0].abs() < 1e-6 || out.x[5].abs() < 1e-6);
        let inner: Vec<f64> = if out.x[5].abs() < 1e-6 { out.x[..5].to_vec() } else { out.x[1..].to_vec() };
        for (u, v) in canonical_form(&inner).iter().zip(V4_FACTOR) {
            assert!(close(*u, v, 1e-6), "{:?}", out.x);
        }
    }

    #[test]
    fn fejer_endpoint_enforced() {
        let a = 3f64.sqrt();
        let p = ReducedProblem::new(4, a, vec![]).unwrap();
        let out = solve_subproblem(&p, &p.active_sets()[0], &PenaltySchedule::default(), &default_starts(4, None, 4, 1))
            .unwrap();
        let poly = out.coefficients();
        assert!(close(poly.coeff(1) / poly.coeff(0), a, 1e-6));
    }

    #[test]
    fn chi_at_degree_four_optimum() {
        let p = ReducedProblem::standard(4, 1.7051159).unwrap();
        let r = chi_reduced(&p, &PenaltySchedule::default(), 4, 42).unwrap();
        let ratio = r.chi / (1.7051159f64.sqrt() - 1.0).powi(2);
        assert!(close(ratio, 34.8992259, 1e-5), "{ratio}");
        assert!(r.best.kkt_residual_norm <= 1e-5 * (1.0 + r.chi));
        assert!(certify_full(&r.best).passed);
    }

    #[test]
    fn certificate_examples() {
        let report = certify_vector(&V4_FACTOR);
        assert!(report.passed);
        let expected = [1.0, 1.7051159, 1.0438202, 0.4252409, 0.0893946];
        for (c, e) in report.coefficients.coeffs().iter().zip(expected) {
            assert!(close(*c, e, 1e-6));
        }
        let mut bad = vec![0.0; 8];
        bad[0] = 1.0;
        bad[7] = -0.1;
        let report = certify_vector(&bad);
        assert!(!report.passed);
        assert!(report.inequality_values[5] < 0.0);
    }

    #[test]
    fn kkt_residual_examples() {
        let p = ReducedProblem::standard(4, 1.7051159).unwrap();
        let act = &p.active_sets()[0];
        let m = least_squares_multipliers(&p, act, &V4_FACTOR);
        assert!(stationarity_residual(&V4_FACTOR, &m) <= 1e-5);
        let generic = [0.5, 0.1, 0.6, 0.2, 0.58];
        let m = least_squares_multipliers(&p, act, &generic);
        assert!(stationarity_residual(&generic, &m) > 1e-3);
    }

    fn random_vector(seed: u64, m: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| rand::Rng::gen_range(&mut rng, -1.0..=1.0)).collect()
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for n in 4..=8 {
            let fejer = fejer_bound(n).unwrap();
            let p = ReducedProblem::standard(n, 0.5 * (1.0 + fejer)).unwrap();
            for act in p.active_sets() {
                for mu in [1e2, 1e8] {
                    let obj = PenaltyObjective::new(&p, &act, mu);
                    for s in 0..100 {
                        let x = random_vector(s + 1000 * n as u64, n + 1);
                        let d = obj.derivatives(&x);
                        let scale = d.hessian.max_abs();
                        let gscale = d.gradient.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        let g = finite_diff_gradient(|y| obj.value(y), &x, 1e-5);
                        for (a, b) in d.gradient.iter().zip(&g) {
                            assert!((a - b).abs() <= 1e-5 * (1.0 + gscale), "n={n} {a} vs {b}");
                        }
                        if s % 10 == 0 {
                            let h = finite_diff_hessian(|y| obj.value(y), &x, 1e-4);
                            for i in 0..=n {
                                for j in 0..=n {
                                    assert!((d.hessian[(i, j)] - h[(i, j)]).abs() <= 1e-5 * (1.0 + scale));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn forms_invariant_under_symmetry(x in proptest::collection::vec(-1.0f64..1.0, 5..10)) {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let rev: Vec<f64> = x.iter().rev().copied().collect();
            let both: Vec<f64> = rev.iter().map(|v| -v).collect();
            let forms = std::iter::once(Form::Ones).chain((0..x.len()).map(Form::Lag));
            for f in forms {
                let v = f.value(&x);
                for y in [&neg, &rev, &both] {
                    prop_assert!((f.value(y) - v).abs() <= 1e-12 * (1.0 + v.abs()));
                }
            }
        }

        #[test]
        fn canonical_form_is_idempotent(x in proptest::collection::vec(-1.0f64..1.0, 5..10)) {
            let c = canonical_form(&x);
            prop_assert_eq!(canonical_form(&c), c.clone());
            prop_assert!(c.iter().sum::<f64>() >= 0.0);
        }
    }
}
