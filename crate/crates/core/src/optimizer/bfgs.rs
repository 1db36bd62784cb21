use std::time::Instant;

use log::debug;

use super::{Counted, Deadline, Objective, OptimResult, SolverOptions, Termination};
use crate::linalg::{dot, norm2, norm_inf, DenseMatrix};

const C1: f64 = 1e-4;
const C2: f64 = 0.1;
const MAX_TRIALS: usize = 60;

struct Point {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Strong Wolfe line search along `d` (bracketing followed by zoom).
/// Returns `None` when no acceptable point is found within `MAX_TRIALS`
/// function evaluations.
fn wolfe_search<O: Objective>(
    obj: &O,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    alpha_init: f64,
) -> Option<Point> {
    let mut trials = 0;
    let mut xt = vec![0.0; x.len()];
    let mut eval = |alpha: f64, trials: &mut usize| {
        *trials += 1;
        for ((t, xi), di) in xt.iter_mut().zip(x).zip(d) {
            *t = xi + alpha * di;
        }
        let f = obj.value(&xt);
        let mut g = vec![0.0; x.len()];
        obj.gradient(&xt, &mut g);
        let slope = dot(&g, d);
        Point { alpha, f, g, slope }
    };
    // values within rounding of f0 are treated as equal, otherwise the search
    // stalls once the achievable decrease drops below the noise in f
    let noise = 10.0 * f64::EPSILON * f0.abs().max(1.0);
    let armijo = |p: &Point| p.f <= f0 + C1 * p.alpha * slope0 + noise && p.f.is_finite();
    let curvature = |p: &Point| p.slope.abs() <= -C2 * slope0;

    let mut prev = Point { alpha: 0.0, f: f0, g: Vec::new(), slope: slope0 };
    let mut alpha = alpha_init;
    let (mut lo, mut hi) = loop {
        if trials >= MAX_TRIALS {
            return None;
        }
        let cur = eval(alpha, &mut trials);
        if !armijo(&cur) || (prev.alpha > 0.0 && cur.f > prev.f + noise) {
            break (prev, cur);
        }
        if curvature(&cur) {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            break (cur, prev);
        }
        // secant on the slopes, kept within [1.1, 10] times the current step
        let growth = cur.slope - prev.slope;
        alpha = if growth > 0.0 {
            cur.alpha - cur.slope * (cur.alpha - prev.alpha) / growth
        } else {
            2.0 * cur.alpha
        };
        alpha = alpha.clamp(1.1 * cur.alpha, 10.0 * cur.alpha);
        prev = cur;
    };

    // zoom: lo satisfies Armijo with the lowest value seen, hi brackets it
    while trials < MAX_TRIALS {
        let width = hi.alpha - lo.alpha;
        if width.abs() <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
            return None;
        }
        // minimizer of the quadratic through (lo.f, lo.slope) and hi.f
        let denom = 2.0 * (hi.f - lo.f - lo.slope * width);
        let mut a = if denom > 0.0 && denom.is_finite() {
            lo.alpha - lo.slope * width * width / denom
        } else {
            lo.alpha + 0.5 * width
        };
        let (left, right) = if width > 0.0 { (lo.alpha, hi.alpha) } else { (hi.alpha, lo.alpha) };
        let guard = 0.1 * width.abs();
        if !(a > left + guard && a < right - guard) {
            a = lo.alpha + 0.5 * width;
        }
        let cur = eval(a, &mut trials);
        if !armijo(&cur) || cur.f > lo.f + noise {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Some(cur);
            }
            if cur.slope * width >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    None
}

/// Dense BFGS on the inverse Hessian with a strong Wolfe line search.
///
/// The inverse approximation starts as the identity, is rescaled by
/// `sᵀy / yᵀy` after the first step, and is reset to the identity whenever
/// it fails to produce a descent direction.
pub fn bfgs_minimize<O: Objective>(obj: &O, x0: &[f64], opts: &SolverOptions) -> OptimResult {
    let start = Instant::now();
    let deadline = Deadline::new(start, opts.time_limit);
    let obj = Counted::new(obj);
    let n = obj.dim();
    let max_iters = opts.max_iters_for(n);

    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    let mut g = vec![0.0; n];
    obj.gradient(&x, &mut g);
    let mut hinv = DenseMatrix::identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut accepted_values = vec![f];
    let mut d = vec![0.0; n];
    let mut hy = vec![0.0; n];

    let termination = loop {
        if norm_inf(&g) <= opts.grad_tol {
            break Termination::GradTol;
        }
        if iterations >= max_iters {
            break Termination::MaxIters;
        }
        if deadline.passed() {
            break Termination::TimeLimit;
        }

        hinv.mul_vec(&g, &mut d);
        d.iter_mut().for_each(|di| *di = -*di);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            hinv = DenseMatrix::identity(n);
            fresh = true;
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = -dot(&g, &g);
        }
        let alpha0 = if fresh { (1.0 / norm2(&g)).min(1.0) } else { 1.0 };

        iterations += 1;
        let Some(pt) = wolfe_search(&obj, &x, f, slope, &d, alpha0) else {
            break Termination::LineSearchFail;
        };
        debug!("bfgs iter {iterations}: f={:.12e} alpha={:.3e}", pt.f, pt.alpha);

        let s: Vec<f64> = d.iter().map(|di| pt.alpha * di).collect();
        let y: Vec<f64> = pt.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        x.iter_mut().zip(&s).for_each(|(xi, si)| *xi += si);
        f = pt.f;
        g = pt.g;
        accepted_values.push(f);

        let sy = dot(&s, &y);
        if sy > 0.0 {
            if fresh {
                let scale = sy / dot(&y, &y);
                hinv.data.iter_mut().for_each(|h| *h *= scale);
                fresh = false;
            }
            // H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            hinv.mul_vec(&y, &mut hy);
            let yhy = dot(&y, &hy);
            let c = rho * rho * yhy + rho;
            for i in 0..n {
                let row = &mut hinv.data[i * n..(i + 1) * n];
                for j in 0..n {
                    row[j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
    };

    OptimResult {
        grad_norm_inf: norm_inf(&g),
        x,
        value: f,
        iterations,
        energy_evals: obj.value_evals(),
        gradient_evals: obj.gradient_evals(),
        wall_time: start.elapsed(),
        termination,
        accepted_values,
    }
}
