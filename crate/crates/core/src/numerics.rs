//! Small numerical kernels shared by the solvers.
//!
//! Everything here works on dense `f64` data of dimension at most a few dozen;
//! the largest system solved anywhere in the crate is 9×9.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Inverse golden ratio, `(√5 − 1)/2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `self += scale · u vᵀ`
    pub fn add_outer(&mut self, scale: f64, u: &[f64], v: &[f64]) {
        for (row, &ui) in self.data.chunks_mut(self.n).zip(u) {
            for (r, &vj) in row.iter_mut().zip(v) {
                *r += scale * ui * vj;
            }
        }
    }

    pub fn add_scaled(&mut self, scale: f64, other: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)].abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cholesky factor `L` with `A = L Lᵀ`, or `None` when `A` is not positive definite.
    pub fn cholesky(&self) -> Option<Matrix> {
        let n = self.n;
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// Solves `L Lᵀ x = b` given the Cholesky factor in `self`.
    pub fn cholesky_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self[(i, k)] * y[k];
            }
            y[i] /= self[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self[(k, i)] * y[k];
            }
            y[i] /= self[(i, i)];
        }
        y
    }

    /// Solves a general system by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
            if a[pivot * n + col].abs() < 1e-300 {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                x.swap(col, pivot);
            }
            for row in col + 1..n {
                let f = a[row * n + col] / a[col * n + col];
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                x[row] -= f * x[col];
            }
        }
        for row in (0..n).rev() {
            let mut s = x[row];
            for k in row + 1..n {
                s -= a[row * n + k] * x[k];
            }
            x[row] = s / a[row * n + row];
        }
        Some(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketResult {
    pub x_star: f64,
    pub f_star: f64,
    pub bracket_width: f64,
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
///
/// Ties keep the left sub-bracket, so a flat objective converges to `lo`.
pub fn golden_section_min<F>(objective: F, lo: f64, hi: f64, tol: f64) -> Result<BracketResult>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Err(domain(format!("golden section needs lo < hi, got [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(domain("golden section needs tol > 0"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = objective(d);
        }
    }
    let x_star = 0.5 * (a + b);
    Ok(BracketResult { x_star, f_star: objective(x_star), bracket_width: b - a })
}

/// Bisection for a root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(domain(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

/// A twice-differentiable objective for [`newton_minimize`].
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    fn derivatives(&self, x: &[f64]) -> Derivatives;

    /// `f(x + step) − f(x)`. Override when the difference can be formed without
    /// cancellation; near a stiff minimum it drops below the rounding of `f`.
    fn change(&self, x: &[f64], step: &[f64]) -> f64 {
        let moved: Vec<f64> = x.iter().zip(step).map(|(a, b)| a + b).collect();
        self.value(&moved) - self.value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Stop once `‖∇f‖ ≤ grad_tol · (1 + |f|)`.
    pub grad_tol: f64,
    /// Also stop once a positive-definite Newton step is shorter than `step_tol · (1 + ‖x‖)`.
    pub step_tol: f64,
    pub max_iters: usize,
    /// Initial step scale in `(0, 1]` for the backtracking line search.
    pub damping: f64,
    /// Relative diagonal shift tried first when the Hessian is not positive definite.
    pub hessian_regularization: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-10, step_tol: 1e-15, max_iters: 500, damping: 1.0, hessian_regularization: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
}

const MAX_HALVINGS: usize = 60;
const ARMIJO: f64 = 1e-4;

/// Damped Newton minimization with diagonal regularization and backtracking.
///
/// Accepted steps never increase the objective. Returns the last iterate with
/// `converged = false` after `max_iters` or when the line search fails.
pub fn newton_minimize<O: Objective + ?Sized>(objective: &O, x0: &[f64], cfg: &NewtonConfig) -> NewtonOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut d = objective.derivatives(&x);
    let mut iters = 0;
    loop {
        let grad_norm = norm(&d.gradient);
        let done = |converged| NewtonOutcome { x: x.clone(), value: d.value, grad_norm, iters, converged };
        if !d.value.is_finite() {
            return done(false);
        }
        if grad_norm <= cfg.grad_tol * (1.0 + d.value.abs()) {
            return done(true);
        }
        if iters >= cfg.max_iters {
            return done(false);
        }

        let mut shift = 0.0;
        let mut shifted = d.hessian.clone();
        let step = loop {
            if let Some(l) = shifted.cholesky() {
                let mut s = l.cholesky_solve(&d.gradient);
                s.iter_mut().for_each(|v| *v = -*v);
                if dot(&s, &d.gradient) < 0.0 {
                    break Some(s);
                }
            }
            shift = if shift == 0.0 {
                cfg.hessian_regularization * (1.0 + d.hessian.max_abs_diagonal())
            } else {
                shift * 10.0
            };
            if !shift.is_finite() || shift > 1e300 {
                break None;
            }
            shifted = d.hessian.clone();
            for i in 0..n {
                shifted[(i, i)] += shift;
            }
        };
        let Some(step) = step else {
            return done(false);
        };

        if shift == 0.0 && norm(&step) <= cfg.step_tol * (1.0 + norm(&x)) {
            return done(true);
        }

        let slope = dot(&step, &d.gradient);
        let mut t = cfg.damping;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            let taken: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let delta = objective.change(&x, &taken);
            if delta.is_finite() && delta <= ARMIJO * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            return done(false);
        };
        iters += 1;
        x = next;
        d = objective.derivatives(&x);
    }
}

pub const QUADRATURE_MAX_DEPTH: usize = 40;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn quadrature<F>(integrand: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if lo == hi {
        return Ok(0.0);
    }
    let (a, b, sign) = if lo < hi { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
    let fa = integrand(a);
    let fb = integrand(b);
    let m = 0.5 * (a + b);
    let fm = integrand(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&integrand, a, b, fa, fm, fb, whole, tol, 0).map(|v| sign * v)
}

/// [`quadrature`] applied on `panels` equal subintervals, splitting `tol` evenly.
///
/// Oscillatory integrands can fool the first Simpson comparison when the
/// sample points alias the period; pre-splitting avoids that.
pub fn panel_quadrature<F>(integrand: F, lo: f64, hi: f64, panels: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let panels = panels.max(1);
    let width = (hi - lo) / panels as f64;
    let tol = tol / panels as f64;
    (0..panels).try_fold(0.0, |acc, i| {
        let a = lo + width * i as f64;
        let b = if i + 1 == panels { hi } else { a + width };
        Ok(acc + quadrature(&integrand, a, b, tol)?)
    })
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let split = left + right;
    let delta = split - whole;
    // Below the roundoff floor further splitting cannot reduce the error.
    let floor = 64.0 * f64::EPSILON * split.abs().max(left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= floor {
        return Ok(split + delta / 15.0);
    }
    if depth >= QUADRATURE_MAX_DEPTH {
        return Err(Error::MaxDepthExceeded { depth });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// Central-difference gradient.
pub fn finite_diff_gradient<F>(objective: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = objective(&probe);
            probe[i] = x[i] - h;
            let down = objective(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian from function values.
pub fn finite_diff_hessian<F>(objective: F, x: &[f64], h: f64) -> Matrix
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let mut hess = Matrix::zeros(n);
    let mut probe = x.to_vec();
    let at = |probe: &mut Vec<f64>, i: usize, si: f64, j: usize, sj: f64| {
        probe[i] += si * h;
        probe[j] += sj * h;
        let v = objective(probe);
        probe[i] = x[i];
        probe[j] = x[j];
        v
    };
    for i in 0..n {
        for j in i..n {
            let v = (at(&mut probe, i, 1.0, j, 1.0) - at(&mut probe, i, 1.0, j, -1.0) - at(&mut probe, i, -1.0, j, 1.0)
                + at(&mut probe, i, -1.0, j, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct FnObjective<V, D>(V, D);

    impl<V: Fn(&[f64]) -> f64, D: Fn(&[f64]) -> Derivatives> Objective for FnObjective<V, D> {
        fn value(&self, x: &[f64]) -> f64 {
            (self.0)(x)
        }
        fn derivatives(&self, x: &[f64]) -> Derivatives {
            (self.1)(x)
        }
    }

    fn rosenbrock() -> impl Objective {
        let value = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        FnObjective(value, move |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let mut h = Matrix::zeros(2);
            h[(0, 0)] = 2.0 - 400.0 * (b - 3.0 * a * a);
            h[(0, 1)] = -400.0 * a;
            h[(1, 0)] = -400.0 * a;
            h[(1, 1)] = 200.0;
            Derivatives {
                value: value(x),
                gradient: vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)],
                hessian: h,
            }
        })
    }

    fn sum_squares() -> impl Objective {
        let value = |x: &[f64]| x.iter().map(|v| v * v).sum();
        FnObjective(value, move |x: &[f64]| {
            let mut h = Matrix::identity(x.len());
            h.add_scaled(1.0, &Matrix::identity(x.len()));
            Derivatives { value: value(x), gradient: x.iter().map(|v| 2.0 * v).collect(), hessian: h }
        })
    }

    #[test]
    fn golden_section_quadratic() {
        let r = golden_section_min(|x| (x - 2.0) * (x - 2.0), 0.0, 5.0, 1e-9).unwrap();
        assert!((r.x_star - 2.0).abs() <= 1e-9);
        assert!(r.bracket_width <= 1e-9);
    }

    #[test]
    fn golden_section_flat_goes_left() {
        let r = golden_section_min(|_| 1.0, 0.0, 1.0, 1e-8).unwrap();
        assert!(r.x_star <= 1e-8);
    }

    #[test]
    fn golden_section_rejects_bad_bracket() {
        assert!(golden_section_min(|x| x, 1.0, 1.0, 1e-3).is_err());
        assert!(golden_section_min(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-10).is_err());
    }

    #[test]
    fn newton_exact_on_quadratic() {
        let out = newton_minimize(&sum_squares(), &[1.0, 1.0, 1.0], &NewtonConfig::default());
        assert!(out.converged);
        assert!(out.iters <= 2);
        assert!(norm(&out.x) < 1e-14);
    }

    #[test]
    fn newton_rosenbrock() {
        let out = newton_minimize(&rosenbrock(), &[-1.2, 1.0], &NewtonConfig::default());
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn newton_reports_non_convergence() {
        let cfg = NewtonConfig { max_iters: 2, ..NewtonConfig::default() };
        let out = newton_minimize(&rosenbrock(), &[-1.2, 1.0], &cfg);
        assert!(!out.converged);
        assert_eq!(out.iters, 2);
    }

    #[test]
    fn newton_escapes_saddle_region() {
        // f = x⁴ − x² + y², indefinite Hessian at the start.
        let value = |x: &[f64]| x[0].powi(4) - x[0] * x[0] + x[1] * x[1];
        let obj = FnObjective(value, move |x: &[f64]| {
            let mut h = Matrix::zeros(2);
            h[(0, 0)] = 12.0 * x[0] * x[0] - 2.0;
            h[(1, 1)] = 2.0;
            Derivatives { value: value(x), gradient: vec![4.0 * x[0].powi(3) - 2.0 * x[0], 2.0 * x[1]], hessian: h }
        });
        let out = newton_minimize(&obj, &[0.1, 1.0], &NewtonConfig::default());
        assert!(out.converged);
        assert!((out.x[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn quadrature_examples() {
        use std::f64::consts::PI;
        assert!(quadrature(f64::cos, 0.0, PI, 1e-12).unwrap().abs() < 1e-12);

        let s3 = 3f64.sqrt();
        let v = quadrature(|p| 2.0 * s3 + 8.0 * (p - PI / 3.0), PI / 3.0, PI, 1e-12).unwrap();
        let exact = 4.0 * s3 * PI / 3.0 + 16.0 * PI * PI / 9.0;
        assert!((v - exact).abs() < 1e-12);
        assert!((exact + 1.0 - 25.8011608).abs() < 1e-7);

        let c = 3.7386644;
        let v = quadrature(|_| c, PI / 2.0, PI, 1e-12).unwrap();
        assert!((v - c * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn panels_avoid_aliasing() {
        use std::f64::consts::PI;
        let v = panel_quadrature(|p| (4.0 * p).cos(), 0.0, 2.0 * PI, 32, 1e-12).unwrap();
        assert!(v.abs() < 1e-12);
        let v = panel_quadrature(|p| (4.0 * p).cos().powi(2), 0.0, 2.0 * PI, 32, 1e-12).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_depth_limit() {
        // A jump discontinuity cannot meet a tiny absolute tolerance.
        let r = quadrature(|x| if x < 0.3 { 0.0 } else { 1e6 }, 0.0, 1.0, 1e-30);
        assert!(matches!(r, Err(Error::MaxDepthExceeded { .. })));
    }

    #[test]
    fn finite_difference_examples() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let x = [0.3, -1.2, 2.5];
        let g = finite_diff_gradient(f, &x, 1e-5);
        for (gi, xi) in g.iter().zip(&x) {
            assert!((gi - 2.0 * xi).abs() < 1e-7);
        }
        let sq = |x: &[f64]| x.iter().sum::<f64>().powi(2) - 1.0;
        let h = finite_diff_hessian(sq, &x, 1e-3);
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[(i, j)] - 2.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn linear_solvers_agree() {
        let mut a = Matrix::zeros(3);
        let rows = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = rows[i][j];
            }
        }
        let b = [1.0, 2.0, 3.0];
        let x1 = a.cholesky().unwrap().cholesky_solve(&b);
        let x2 = a.solve(&b).unwrap();
        let back = a.mul_vec(&x1);
        for i in 0..3 {
            assert!((x1[i] - x2[i]).abs() < 1e-14);
            assert!((back[i] - b[i]).abs() < 1e-14);
        }
        let mut indefinite = Matrix::identity(2);
        indefinite[(1, 1)] = -1.0;
        assert!(indefinite.cholesky().is_none());
    }

    proptest! {
        #[test]
        fn golden_section_finds_vertex(vertex in -10.0f64..10.0, curv in 0.01f64..100.0,
                                       left in 0.1f64..20.0, right in 0.1f64..20.0) {
            let tol = 1e-8;
            let r = golden_section_min(|x| curv * (x - vertex).powi(2),
                                       vertex - left, vertex + right, tol).unwrap();
            prop_assert!((r.x_star - vertex).abs() <= tol);
        }

        #[test]
        fn quadrature_exact_on_quintics(c in proptest::array::uniform6(-5.0f64..5.0),
                                        lo in -3.0f64..3.0, len in 0.01f64..4.0) {
            let hi = lo + len;
            let p = |x: f64| c.iter().rev().fold(0.0, |acc, ck| acc * x + ck);
            let anti = |x: f64| c.iter().enumerate().rev()
                .fold(0.0, |acc, (k, ck)| acc * x + ck / (k as f64 + 1.0)) * x;
            let exact = anti(hi) - anti(lo);
            let v = quadrature(p, lo, hi, 1e-12).unwrap();
            prop_assert!((v - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }

        #[test]
        fn newton_descent_is_monotone(x0 in -2.0f64..2.0, y0 in -2.0f64..2.0) {
            let obj = rosenbrock();
            let mut prev = obj.value(&[x0, y0]);
            let mut x = vec![x0, y0];
            for _ in 0..40 {
                let cfg = NewtonConfig { max_iters: 1, ..NewtonConfig::default() };
                let out = newton_minimize(&obj, &x, &cfg);
                prop_assert!(out.value <= prev);
                prev = out.value;
                x = out.x;
            }
        }
    }
}
