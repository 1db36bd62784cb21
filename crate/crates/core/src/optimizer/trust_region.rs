use std::time::Instant;

use log::debug;

use super::hessian::{hessian_colored_fd, hessian_dense_fd};
use super::steihaug::{tr_step, CgOptions};
use super::subspace::subspace_step;
use super::{Counted, Deadline, Objective, OptimResult, SolverOptions, Subproblem, Termination};
use crate::linalg::{norm2, norm_inf, LinearOperator, SparsityPattern};

/// How the trust-region model Hessian is formed from gradients.
#[derive(Debug, Clone, Copy)]
pub enum HessianApprox<'a> {
    /// Colored forward differences on a known pattern (coloring required).
    Sparse(&'a SparsityPattern),
    /// Column-by-column forward differences.
    Dense,
}

/// Trust-region Newton iteration with a Steihaug–Toint inner solver.
pub fn trust_region_minimize<O: Objective>(
    obj: &O,
    x0: &[f64],
    hessian: HessianApprox<'_>,
    opts: &SolverOptions,
) -> OptimResult {
    let start = Instant::now();
    let deadline = Deadline::new(start, opts.time_limit);
    let obj = Counted::new(obj);
    let n = obj.dim();
    let max_iters = opts.max_iters_for(n);

    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    let mut g = vec![0.0; n];
    obj.gradient(&x, &mut g);
    let mut radius = opts.tr_radius0;
    let mut model: Option<Box<dyn LinearOperator>> = None;
    let mut iterations = 0;
    let mut accepted_values = vec![f];
    let mut x_trial = vec![0.0; n];

    let termination = loop {
        let gnorm = norm_inf(&g);
        if gnorm <= opts.grad_tol {
            break Termination::GradTol;
        }
        if iterations >= max_iters {
            break Termination::MaxIters;
        }
        if deadline.passed() {
            break Termination::TimeLimit;
        }
        if radius <= f64::EPSILON * norm2(&x).max(1.0) {
            break Termination::RadiusCollapse;
        }

        let h: &dyn LinearOperator = &**model.get_or_insert_with(|| {
            let mut grad = |v: &[f64], out: &mut [f64]| obj.gradient(v, out);
            match hessian {
                HessianApprox::Sparse(p) => Box::new(hessian_colored_fd(&mut grad, p, &x)),
                HessianApprox::Dense => Box::new(hessian_dense_fd(&mut grad, &x)),
            }
        });

        let g2 = norm2(&g);
        let cg = CgOptions {
            tol: opts.cg_tol.unwrap_or(g2.sqrt().min(0.5) * g2),
            max_iters: opts.cg_max_iters.unwrap_or(n),
        };
        let trial = match opts.subproblem {
            Subproblem::Steihaug => tr_step(h, &g, radius, cg),
            Subproblem::TwoDimSubspace => subspace_step(h, &g, radius, cg),
        };
        iterations += 1;

        for ((xt, xi), si) in x_trial.iter_mut().zip(&x).zip(&trial.step) {
            *xt = xi + si;
        }
        let f_trial = obj.value(&x_trial);
        let actual = f - f_trial;
        let predicted = trial.predicted_reduction;
        // both reductions are shifted by the rounding level of f so that
        // steps below measurable precision compare as ratio ~ 1
        let noise = 10.0 * f64::EPSILON * f.abs().max(1.0);
        let rho = if predicted > 0.0 && f_trial.is_finite() {
            (actual + noise) / (predicted + noise)
        } else {
            f64::NEG_INFINITY
        };

        if rho < opts.shrink_threshold {
            // shrinking from the step length avoids re-solving to the same
            // interior step when it was shorter than the radius
            radius = opts.shrink_factor * radius.min(norm2(&trial.step));
        } else if rho > opts.expand_threshold && trial.hit_boundary {
            radius = (radius * opts.expand_factor).min(opts.tr_radius_max);
        }

        debug!(
            "tr iter {iterations}: f={f:.12e} |g|={gnorm:.3e} rho={rho:.3} radius={radius:.3e} cg={}",
            trial.cg_iters
        );

        if rho > opts.eta_accept {
            std::mem::swap(&mut x, &mut x_trial);
            f = f_trial;
            obj.gradient(&x, &mut g);
            model = None;
            accepted_values.push(f);
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
