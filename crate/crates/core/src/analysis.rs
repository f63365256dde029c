//! Numerical checks on an expansion: is `g` coercive, and does the rescaled
//! increment `(f(x* + B(t^alpha * h)) - f(x*)) / t` converge to `g`?

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::expansion::{recenter, Expansion};
use crate::poly::{CompiledPoly, PolyError, SparsePoly};
use crate::scalar::{fraction_string, Field, Rational};

/// `g` is declared coercive when its sphere minimum exceeds this.
pub const COERCIVE_THRESHOLD: f64 = 1e-8;
/// Number of quasi-random starting points on the sphere.
pub const SPHERE_STARTS: usize = 256;
/// Relative pass tolerance for the rescaled increment.
pub const LIMIT_RTOL: f64 = 1e-3;
/// Slack on the fitted decay rate.
pub const RATE_SLACK: f64 = 0.1;
/// Errors below `MACHINE_FLOOR * (1 + sup|g|)` are treated as rounding noise.
pub const MACHINE_FLOOR: f64 = 1e-12;
/// A fitted rate below this means the error grows as `t` decreases.
pub const DIVERGENCE_RATE: f64 = -0.01;

/// Result of the sphere-minimum probe. The verdict is numerical, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityVerdict {
    pub coercive: bool,
    pub sphere_min: f64,
    /// Near-zero direction on the unit sphere when not coercive.
    pub witness: Option<Vec<f64>>,
    pub method: String,
}

/// Since `g(t^alpha * h) = t g(h)` and every `h != 0` is `t^alpha * u` for a
/// unique `t > 0` and unit `u`, `g` is coercive iff it is positive on the
/// Euclidean unit sphere. That minimum is estimated by projected gradient
/// descent from quasi-random starting points.
///
/// ```
/// use gibbsx::analysis::check_coercive;
/// use gibbsx::poly::parse_poly;
/// use gibbsx::scalar::rat;
/// let g = parse_poly("(x - y^2)^2", &["x", "y"]).unwrap().to_f64();
/// let v = check_coercive(&g, &[rat(1, 2), rat(1, 4)]);
/// assert!(!v.coercive);
/// ```
pub fn check_coercive(g: &SparsePoly<f64>, alpha: &[Rational]) -> CoercivityVerdict {
    let d = alpha.len().max(g.dim());
    let cg = CompiledPoly::new(&g.clone().with_dim(d));
    let starts = sphere_points(d, SPHERE_STARTS);
    let results: Vec<(f64, Vec<f64>)> = starts.into_par_iter().map(|x0| descend(&cg, x0)).collect();
    let (sphere_min, argmin) = results.into_iter().fold((f64::INFINITY, Vec::new()), |best, r| if r.0 < best.0 { r } else { best });
    let coercive = sphere_min > COERCIVE_THRESHOLD;
    CoercivityVerdict {
        coercive,
        sphere_min,
        witness: (!coercive).then_some(argmin),
        method: format!("numerical: projected descent on the unit sphere from {SPHERE_STARTS} starts"),
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Halton points pushed through the normal quantile and normalized.
fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    let normal = Normal::standard();
    (1..=n)
        .map(|i| {
            let v: Vec<f64> = (0..d).map(|k| normal.inverse_cdf(radical_inverse(i, PRIMES[k % PRIMES.len()]))).collect();
            normalize(v)
        })
        .collect()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    } else if let Some(x) = v.first_mut() {
        *x = 1.0;
    }
    v
}

fn descend(g: &CompiledPoly, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    let mut step = 1.0;
    let (mut val, _) = g.eval_grad(&x);
    for _ in 0..2000 {
        let (_, grad) = g.eval_grad(&x);
        let radial: f64 = grad.iter().zip(&x).map(|(a, b)| a * b).sum();
        let rg: Vec<f64> = grad.iter().zip(&x).map(|(gi, xi)| gi - radial * xi).collect();
        let rn2: f64 = rg.iter().map(|v| v * v).sum();
        if rn2 < 1e-30 {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let cand = normalize(x.iter().zip(&rg).map(|(xi, gi)| xi - step * gi).collect());
            let cv = g.eval(&cand);
            if cv <= val - 1e-4 * step * rn2 {
                x = cand;
                val = cv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e3);
    }
    (val, x)
}

/// Error of the rescaled increment along a decreasing sequence of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub grid: Vec<Vec<f64>>,
    pub t_ladder: Vec<f64>,
    pub max_abs_err: Vec<f64>,
    /// Slope of `log err` against `log t`; absent when all errors are rounding noise.
    pub fitted_rate: Option<f64>,
    /// Smallest grade above 1, as a fraction string.
    pub a_min: Option<String>,
    pub expected_rate: Option<f64>,
    pub sup_g: f64,
    pub tolerance: f64,
    pub diverging: bool,
    /// Smallest sub-unit grade, when the expansion has one.
    pub offending_grade: Option<String>,
    pub pass: bool,
}

/// Geometric ladder `1e-1, 1e-2, ..., 1e-8`.
pub fn default_t_ladder() -> Vec<f64> {
    (1..=8).map(|k| 10f64.powi(-k)).collect()
}

/// Centered lattice with `n` points per axis on `[-r, r]^d`.
pub fn lattice(d: usize, n: usize, r: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n).map(|i| if n == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (n - 1) as f64 }).collect();
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let mut p = vec![0.0; d];
            for c in p.iter_mut() {
                *c = axis[k % n];
                k /= n;
            }
            p
        })
        .collect()
}

/// Default grid: 9 points per axis on `[-2, 2]^d`.
pub fn default_grid(d: usize) -> Vec<Vec<f64>> {
    lattice(d, 9, 2.0)
}

/// `r(t, h) = (f(x* + B(t^alpha * h)) - f(x*)) / t - g(h)` evaluator.
struct Increment {
    f0: CompiledPoly,
    g: CompiledPoly,
    b: Vec<Vec<f64>>,
    alpha: Vec<f64>,
}

impl Increment {
    fn new(f: &SparsePoly, x_star: &[Rational], b: &[Vec<f64>], alpha: &[Rational], g: &SparsePoly<f64>) -> Result<Self, PolyError> {
        let (f0, _) = recenter(f, x_star)?;
        Ok(Increment {
            f0: CompiledPoly::new(&f0),
            g: CompiledPoly::new(&g.clone().with_dim(f.dim())),
            b: b.to_vec(),
            alpha: alpha.iter().map(Field::to_f64).collect(),
        })
    }

    fn residual(&self, t: f64, h: &[f64]) -> f64 {
        let d = h.len();
        let scaled: Vec<f64> = h.iter().zip(&self.alpha).map(|(hi, a)| t.powf(*a) * hi).collect();
        let x: Vec<f64> = (0..d).map(|i| (0..d).map(|j| self.b[i][j] * scaled[j]).sum()).collect();
        self.f0.eval(&x) / t - self.g.eval(h)
    }

    fn max_err(&self, t: f64, grid: &[Vec<f64>]) -> f64 {
        grid.par_iter().map(|h| self.residual(t, h).abs()).collect::<Vec<_>>().into_iter().fold(0.0, f64::max)
    }

    fn sup_g(&self, grid: &[Vec<f64>]) -> f64 {
        grid.iter().map(|h| self.g.eval(h).abs()).fold(0.0, f64::max)
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Evaluate `r(t, h)` on `grid` for every `t` in the (strictly decreasing)
/// ladder and fit the decay rate.
///
/// Passes when the error at the smallest `t` is below
/// `LIMIT_RTOL * (1 + sup|g|)` and the fitted rate is at least
/// `a_min - 1 - RATE_SLACK`. A negative fitted rate flags divergence.
pub fn verify_pointwise_limit(
    f: &SparsePoly,
    x_star: &[Rational],
    expansion: &Expansion,
    grid: &[Vec<f64>],
    t_ladder: &[f64],
) -> Result<ConvergenceReport, PolyError> {
    assert!(t_ladder.windows(2).all(|w| w[1] < w[0]), "t ladder must be strictly decreasing");
    let inc = Increment::new(f, x_star, &expansion.b_f64(), expansion.alpha(), &expansion.g_f64())?;
    let errs: Vec<f64> = t_ladder.iter().map(|&t| inc.max_err(t, grid)).collect();
    let sup_g = inc.sup_g(grid);
    let floor = MACHINE_FLOOR * (1.0 + sup_g);
    let (lt, le): (Vec<f64>, Vec<f64>) = t_ladder.iter().zip(&errs).filter(|(_, e)| **e > floor).map(|(t, e)| (*t, *e)).unzip();
    let fitted_rate = loglog_slope(&lt, &le);
    let a_min = expansion.a_min();
    let expected_rate = a_min.as_ref().map(|a| Field::to_f64(&(a - Rational::one())));
    let tolerance = LIMIT_RTOL * (1.0 + sup_g);
    let diverging = fitted_rate.is_some_and(|r| r < DIVERGENCE_RATE);
    let rate_ok = match (fitted_rate, expected_rate) {
        (None, _) => true,
        (Some(r), Some(e)) => r >= e - RATE_SLACK,
        (Some(r), None) => r >= -RATE_SLACK,
    };
    let last = errs.last().copied().unwrap_or(0.0);
    let offending_grade = expansion.offending_strings(&[]).first().map(|(a, _)| fraction_string(a));
    let pass = errs.iter().all(|e| e.is_finite()) && last <= tolerance && rate_ok && !diverging;
    Ok(ConvergenceReport {
        grid: grid.to_vec(),
        t_ladder: t_ladder.to_vec(),
        max_abs_err: errs,
        fitted_rate,
        a_min: a_min.as_ref().map(fraction_string),
        expected_rate,
        sup_g,
        tolerance,
        diverging,
        offending_grade,
        pass,
    })
}

/// Sup of `|r(t, h)|` over a dense grid of the ball of radius `radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformReport {
    pub radius: f64,
    pub points: usize,
    pub t: f64,
    pub sup_err: f64,
    pub sup_g: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const UNIFORM_T: f64 = 1e-6;
pub const UNIFORM_NODES: usize = 17;
pub const UNIFORM_CAP: usize = 100_000;

/// Lattice points of `[-r, r]^d` inside the ball, 17 per axis but capped at
/// `UNIFORM_CAP` points in total.
pub fn ball_grid(d: usize, r: f64) -> Vec<Vec<f64>> {
    let mut n = UNIFORM_NODES;
    while n > 3 && n.pow(d as u32) > UNIFORM_CAP {
        n -= 2;
    }
    lattice(d, n, r).into_iter().filter(|p| p.iter().map(|x| x * x).sum::<f64>() <= r * r * (1.0 + 1e-12)).collect()
}

/// Passes iff the sup error at `t = 1e-6` is below `1e-3 * (1 + sup|g|)`.
pub fn verify_uniform_on_compact(
    f: &SparsePoly,
    x_star: &[Rational],
    expansion: &Expansion,
    radius: f64,
) -> Result<UniformReport, PolyError> {
    let inc = Increment::new(f, x_star, &expansion.b_f64(), expansion.alpha(), &expansion.g_f64())?;
    let grid = ball_grid(f.dim(), radius);
    let sup_err = inc.max_err(UNIFORM_T, &grid);
    let sup_g = inc.sup_g(&grid);
    let tolerance = LIMIT_RTOL * (1.0 + sup_g);
    Ok(UniformReport {
        radius,
        points: grid.len(),
        t: UNIFORM_T,
        sup_err,
        sup_g,
        tolerance,
        pass: sup_err.is_finite() && sup_err < tolerance,
    })
}
