//! End-to-end computation of `Vₙ = inf_a χₙ(a)/(√a − 1)²`.
//!
//! Degrees 2 and 3 use the closed forms in [`crate::lowdegree`]. From degree 4
//! on, the bound lines restrict `a` using `V_{n−1}`, a uniform grid over the
//! restricted interval is solved with [`chi_reduced_from`], the best certified
//! grid point is refined by golden section, and the final witness is certified
//! against every constraint of the full problem.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::bounds::{restrict_interval, verify_builtin_functionals};
use crate::error::{domain, Error, Result};
use crate::format::sig9;
use crate::kkt_solver::{
    certify_full, chi_reduced_from, default_starts, ActiveSet, CertificateReport, PenaltySchedule, ReducedProblem,
    SolveOutcome, SubproblemResult,
};
use crate::lowdegree::{compute_v2, compute_v3};
use crate::numerics::golden_section_min;
use crate::trigpoly::{v_functional, CosinePolynomial, SpectralFactor};

/// Published values of `Vₙ` for `n = 2 … 8`, used only in strict-bounds mode and by tests.
pub const REFERENCE_VN: [(usize, f64); 7] = [
    (2, 53.139_072_0),
    (3, 36.919_991_1),
    (4, 34.899_225_9),
    (5, 34.899_225_9),
    (6, 34.899_225_9),
    (7, 34.649_487_4),
    (8, 34.539_915_5),
];

pub fn reference_vn(n: usize) -> Option<f64> {
    REFERENCE_VN.iter().find(|(m, _)| *m == n).map(|(_, v)| *v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub grid_points: usize,
    pub seed: u64,
    /// Random starts per grid point, on top of the fixed ones.
    pub restarts: usize,
    pub schedule: PenaltySchedule,
    /// Golden-section tolerance on `a` during refinement.
    pub refine_tol: f64,
    /// Worker threads for the grid; above 1 the sweep runs without warm starts.
    pub jobs: usize,
    /// Restrict with the published `V_{n−1}` instead of the computed one.
    pub reference_bounds: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            seed: 42,
            restarts: 8,
            schedule: PenaltySchedule::default(),
            refine_tol: 1e-8,
            jobs: 1,
            reference_bounds: false,
        }
    }
}

/// Solution of the reduced problem at one `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub a: f64,
    pub chi: f64,
    pub ratio: f64,
    /// Winning active set, or 0 for a gap.
    pub subproblem_id: usize,
    pub certified: bool,
    pub outcome: Option<SolveOutcome>,
    pub subproblems: Vec<SubproblemResult>,
}

impl SweepRecord {
    pub fn is_gap(&self) -> bool {
        self.outcome.is_none()
    }
}

/// `(√a − 1)²`.
pub fn ratio_denominator(a: f64) -> f64 {
    (a.sqrt() - 1.0).powi(2)
}

fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Solves and certifies the reduced problem at `a`; solver failures become gap records.
pub fn evaluate_point(n: usize, a: f64, warm: Option<&[f64]>, seed: u64, cfg: &PipelineConfig) -> Result<SweepRecord> {
    let problem = ReducedProblem::standard(n, a)?;
    let starts = default_starts(n, warm, cfg.restarts, seed);
    match chi_reduced_from(&problem, &cfg.schedule, &starts) {
        Ok(r) => {
            let certified = certify_full(&r.best).passed;
            Ok(SweepRecord {
                a,
                chi: r.chi,
                ratio: r.chi / ratio_denominator(a),
                subproblem_id: r.subproblem_id,
                certified,
                outcome: Some(r.best),
                subproblems: r.subproblems,
            })
        }
        Err(Error::Infeasible { .. } | Error::AllStartsFailed { .. }) => Ok(SweepRecord {
            a,
            chi: f64::INFINITY,
            ratio: f64::INFINITY,
            subproblem_id: 0,
            certified: false,
            outcome: None,
            subproblems: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

/// Uniform grid of `grid_points` values of `a` over `interval`, in increasing order.
pub fn grid(interval: (f64, f64), grid_points: usize) -> Vec<f64> {
    let (lo, hi) = interval;
    let last = (grid_points - 1) as f64;
    (0..grid_points).map(|i| if i + 1 == grid_points { hi } else { lo + (hi - lo) * i as f64 / last }).collect()
}

/// Evaluates the uniform grid; sequential runs warm-start each point from its left neighbour.
pub fn sweep(n: usize, interval: (f64, f64), grid_points: usize, cfg: &PipelineConfig) -> Result<Vec<SweepRecord>> {
    if grid_points < 2 {
        return Err(domain("a sweep needs at least 2 grid points"));
    }
    let (lo, hi) = interval;
    if !(lo > 1.0 && lo < hi) {
        return Err(domain(format!("sweep interval [{lo}, {hi}] must satisfy 1 < lo < hi")));
    }
    let points = grid(interval, grid_points);
    if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| domain(format!("thread pool: {e}")))?;
        return pool.install(|| {
            points
                .par_iter()
                .enumerate()
                .map(|(i, &a)| evaluate_point(n, a, None, point_seed(cfg.seed, i as u64), cfg))
                .collect()
        });
    }
    let mut records: Vec<SweepRecord> = Vec::with_capacity(grid_points);
    for (i, &a) in points.iter().enumerate() {
        let warm = records.iter().rev().find_map(|r| r.outcome.as_ref()).map(|o| o.x.clone());
        records.push(evaluate_point(n, a, warm.as_deref(), point_seed(cfg.seed, i as u64), cfg)?);
    }
    Ok(records)
}

/// Best certified record, leftmost among equal ratios.
pub fn best_certified(records: &[SweepRecord]) -> Option<&SweepRecord> {
    records.iter().filter(|r| r.certified).fold(None, |best: Option<&SweepRecord>, r| match best {
        Some(b) if b.ratio <= r.ratio => Some(b),
        _ => Some(r),
    })
}

/// Golden-section refinement of the ratio on `[a_best − h, a_best + h]`, clipped to the swept range.
///
/// Uncertified evaluations count as `+∞`. Returns the refined record, or the
/// grid record when refinement does not improve on it.
pub fn refine(n: usize, records: &[SweepRecord], halfwidth: f64, cfg: &PipelineConfig) -> Result<SweepRecord> {
    let best = best_certified(records)
        .ok_or_else(|| Error::CertificationFailed(format!("no certified grid point for n = {n}")))?;
    let lo = records.first().map_or(best.a, |r| r.a);
    let hi = records.last().map_or(best.a, |r| r.a);
    let (a_lo, a_hi) = ((best.a - halfwidth).max(lo), (best.a + halfwidth).min(hi));
    if !(a_lo < a_hi) {
        return Ok(best.clone());
    }
    let warm = best.outcome.as_ref().map(|o| o.x.clone());
    let seed = point_seed(cfg.seed, u64::MAX);
    let eval = |a: f64| evaluate_point(n, a, warm.as_deref(), seed, cfg);
    let objective = |a: f64| match eval(a) {
        Ok(r) if r.certified => r.ratio,
        _ => f64::INFINITY,
    };
    let found = golden_section_min(objective, a_lo, a_hi, cfg.refine_tol)?;
    let refined = eval(found.x_star)?;
    Ok(if refined.certified && refined.ratio <= best.ratio { refined } else { best.clone() })
}

/// Grid point whose ratio undercuts the certified minimum but could not be certified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertifiedPoint {
    pub a: f64,
    pub ratio: f64,
}

fn coeffs_only<S: Serializer>(poly: &CosinePolynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
    poly.coeffs().serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VnResult {
    pub n: usize,
    pub interval: [f64; 2],
    #[serde(rename = "v")]
    pub v_value: f64,
    pub a_star: f64,
    /// Family parameter of the closed-form witness for `n = 2, 3`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_star: Option<f64>,
    #[serde(rename = "witness_coeffs", serialize_with = "coeffs_only")]
    pub witness: CosinePolynomial,
    pub witness_factor: Option<SpectralFactor>,
    pub certified: bool,
    pub grid_points: usize,
    pub seed: Option<u64>,
    /// Present and `false` when the grid was solved in parallel without warm starts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncertified_minimum: Option<UncertifiedPoint>,
    #[serde(skip)]
    pub certificate: CertificateReport,
    #[serde(skip)]
    pub runtime: Duration,
}

/// Memoizing driver; computing `Vₙ` first computes `V_{n−1}`.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    cache: BTreeMap<usize, VnResult>,
    sweeps: BTreeMap<usize, Vec<SweepRecord>>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Self { config, cache: BTreeMap::new(), sweeps: BTreeMap::new() }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Grid records from the most recent computation of `Vₙ`.
    pub fn sweep_records(&self, n: usize) -> Option<&[SweepRecord]> {
        self.sweeps.get(&n).map(Vec::as_slice)
    }

    /// Upper bound used to restrict the degree-`n` search.
    pub fn upper_bound(&mut self, n: usize) -> Result<f64> {
        if self.config.reference_bounds {
            reference_vn(n - 1).ok_or_else(|| domain(format!("no reference value for n = {}", n - 1)))
        } else {
            Ok(self.compute(n - 1)?.v_value)
        }
    }

    /// Restricted search interval for degree `n ≥ 4`.
    pub fn interval(&mut self, n: usize) -> Result<(f64, f64)> {
        check_degree(n)?;
        if n < 4 {
            return Err(domain("interval restriction applies from n = 4"));
        }
        verify_builtin_functionals(n)?;
        let v_upper = self.upper_bound(n)?;
        match restrict_interval(n, v_upper) {
            Ok(r) => Ok((r.a_lo, r.a_hi)),
            Err(Error::NoRestriction { lo, hi }) => Ok((lo, hi)),
            Err(e) => Err(e),
        }
    }

    pub fn compute(&mut self, n: usize) -> Result<VnResult> {
        check_degree(n)?;
        if let Some(r) = self.cache.get(&n) {
            return Ok(r.clone());
        }
        let mut result = match n {
            2 => compute_v2()?,
            3 => compute_v3()?,
            _ => self.compute_swept(n)?,
        };
        result.seed.get_or_insert(self.config.seed);
        self.cache.insert(n, result.clone());
        Ok(result)
    }

    fn compute_swept(&mut self, n: usize) -> Result<VnResult> {
        let interval = self.interval(n)?;
        let start = Instant::now();
        let cfg = self.config.clone();
        let records = sweep(n, interval, cfg.grid_points, &cfg)?;
        let spacing = (interval.1 - interval.0) / (cfg.grid_points - 1) as f64;
        let refined = refine(n, &records, 2.0 * spacing, &cfg)?;
        let outcome = refined.outcome.clone().expect("certified records carry an outcome");
        let certificate = certify_full(&outcome);
        if !certificate.passed {
            return Err(Error::CertificationFailed(format!("final witness for n = {n} at a = {}", refined.a)));
        }
        let witness = certificate.coefficients.clone();
        let uncertified_minimum = records
            .iter()
            .filter(|r| !r.certified && !r.is_gap() && r.ratio < refined.ratio)
            .min_by(|x, y| x.ratio.total_cmp(&y.ratio))
            .map(|r| UncertifiedPoint { a: r.a, ratio: r.ratio });
        let v_check = v_functional(&witness)?;
        if (v_check - refined.ratio).abs() > 1e-6 {
            return Err(Error::CertificationFailed(format!(
                "witness v(f) = {v_check} disagrees with ratio {}",
                refined.ratio
            )));
        }
        self.sweeps.insert(n, records);
        Ok(VnResult {
            n,
            interval: [interval.0, interval.1],
            v_value: refined.ratio,
            a_star: refined.a,
            alpha_star: None,
            witness,
            witness_factor: Some(SpectralFactor::new(outcome.x.clone())?),
            certified: true,
            grid_points: cfg.grid_points,
            seed: Some(cfg.seed),
            warm_start: (cfg.jobs > 1).then_some(false),
            uncertified_minimum,
            certificate,
            runtime: start.elapsed(),
        })
    }
}

fn check_degree(n: usize) -> Result<()> {
    if (2..=8).contains(&n) {
        Ok(())
    } else {
        Err(domain(format!("degree must satisfy 2 ≤ n ≤ 8, got {n}")))
    }
}

/// `Vₙ` with a fresh [`Pipeline`].
pub fn compute_vn(n: usize, config: &PipelineConfig) -> Result<VnResult> {
    Pipeline::new(config.clone()).compute(n)
}

/// Sweep table with header `a,chi,ratio,subproblem,certified`.
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("a,chi,ratio,subproblem,certified\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{}", sig9(r.a), sig9(r.chi), sig9(r.ratio), r.subproblem_id, r.certified);
    }
    out
}

/// One table per active set with header `a,chi,ratio,feasible`.
pub fn subproblem_csvs(n: usize, records: &[SweepRecord]) -> Vec<(ActiveSet, String)> {
    let Some(first) = records.first() else { return Vec::new() };
    let Ok(problem) = ReducedProblem::standard(n, first.a) else { return Vec::new() };
    problem
        .active_sets()
        .into_iter()
        .map(|act| {
            let mut out = String::from("a,chi,ratio,feasible\n");
            for r in records {
                let sub = r.subproblems.iter().find(|s| s.active_set == act);
                let chi = sub.and_then(|s| s.best.as_ref()).map_or(f64::INFINITY, |o| o.objective_f);
                let feasible = sub.is_some_and(|s| s.feasible);
                let _ = writeln!(out, "{},{},{},{}", sig9(r.a), sig9(chi), sig9(chi / ratio_denominator(r.a)), feasible);
            }
            (act, out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> PipelineConfig {
        PipelineConfig { grid_points: 41, restarts: 4, ..PipelineConfig::default() }
    }

    #[test]
    fn grid_endpoints() {
        let g = grid((1.5, 1.7), 2);
        assert_eq!(g, vec![1.5, 1.7]);
        let g = grid((1.5, 1.7), 11);
        assert_eq!(g.len(), 11);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn two_point_sweep() {
        let records = sweep(4, (1.6, 1.7), 2, &quick()).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records[0].a < records[1].a);
        let csv = sweep_csv(&records);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("a,chi,ratio,subproblem,certified\n"));
    }

    #[test]
    fn sweep_rejects_bad_input() {
        assert!(sweep(4, (1.6, 1.7), 1, &quick()).is_err());
        assert!(sweep(4, (1.7, 1.6), 5, &quick()).is_err());
    }

    #[test]
    fn records_are_consistent() {
        let records = sweep(6, (1.65, 1.82), 9, &quick()).unwrap();
        for r in records.iter().filter(|r| !r.is_gap()) {
            assert!((r.ratio * ratio_denominator(r.a) - r.chi).abs() <= 1e-12 * r.chi.abs());
        }
    }

    #[test]
    fn flat_bracket_keeps_leftmost() {
        let mut records = sweep(4, (1.70, 1.71), 3, &quick()).unwrap();
        for r in &mut records {
            r.ratio = 1.0;
        }
        assert_eq!(best_certified(&records).unwrap().a, 1.70);
    }

    #[test]
    fn reference_values_listed() {
        assert_eq!(reference_vn(7), Some(34.6494874));
        assert_eq!(reference_vn(9), None);
    }

    #[test]
    fn degree_checked() {
        assert!(compute_vn(9, &quick()).is_err());
        assert!(compute_vn(1, &quick()).is_err());
    }
}
