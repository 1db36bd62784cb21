use super::steihaug::{CgOptions, TrStep};
use crate::linalg::{axpy, dot, norm2, LinearOperator};

/// Approximate Newton direction from CG on `Hs = -g`, or the first direction
/// of non-positive curvature met along the way.
fn newton_direction(h: &dyn LinearOperator, g: &[f64], opts: CgOptions) -> (Vec<f64>, usize) {
    let n = g.len();
    let mut z = vec![0.0; n];
    let mut r = g.to_vec();
    let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut hd = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iters = 0;
    while rr.sqrt() > opts.tol && iters < opts.max_iters.max(1) {
        iters += 1;
        h.apply(&d, &mut hd);
        let dhd = dot(&d, &hd);
        if dhd <= 0.0 {
            return (d, iters);
        }
        let alpha = rr / dhd;
        axpy(alpha, &d, &mut z);
        axpy(alpha, &hd, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = -ri + beta * *di;
        }
    }
    (z, iters)
}

/// Exact minimizer of `aᵀz + zᵀ diag(lambda) z / 2` over `|z| <= radius`,
/// written in the eigenbasis of a symmetric 2x2 model. Returns `z` and
/// whether the constraint is active.
fn small_trust_region(lambda: [f64; 2], a: [f64; 2], radius: f64) -> ([f64; 2], bool) {
    let (l1, l2) = (lambda[0], lambda[1]);
    debug_assert!(l1 <= l2);
    if l1 > 0.0 {
        let z = [-a[0] / l1, -a[1] / l2];
        if z[0].hypot(z[1]) <= radius {
            return (z, false);
        }
    }
    let norm_at = |mu: f64| (a[0] / (l1 + mu)).hypot(a[1] / (l2 + mu));
    let lo0 = (-l1).max(0.0);
    let small = 1e-14 * (l1.abs() + l2.abs()).max(1e-300);
    if a[0].abs() <= small * a[0].hypot(a[1]).max(f64::MIN_POSITIVE) {
        // hard case: the boundary cannot be reached by shifting alone
        let z1 = if l2 + lo0 > 0.0 { -a[1] / (l2 + lo0) } else { 0.0 };
        if z1.abs() <= radius && lo0 > 0.0 {
            let tau = (radius * radius - z1 * z1).max(0.0).sqrt();
            return ([tau, z1], true);
        }
    }
    let mut lo = lo0;
    let mut hi = lo0 + a[0].hypot(a[1]) / radius + small;
    while norm_at(hi) > radius {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ([-a[0] / (l1 + hi), -a[1] / (l2 + hi)], true)
}

/// Symmetric 2x2 eigen-decomposition, eigenvalues ascending.
fn eigen_sym2(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let (l1, l2) = (mean - rad, mean + rad);
    if b == 0.0 {
        return if a <= c { ([a, c], [[1.0, 0.0], [0.0, 1.0]]) } else { ([c, a], [[0.0, 1.0], [1.0, 0.0]]) };
    }
    // eigenvector for l1, the one for l2 is its rotation
    let (x, y) = if (a - l1).abs() > (c - l1).abs() { (-b, a - l1) } else { (c - l1, -b) };
    let s = x.hypot(y);
    let v1 = [x / s, y / s];
    ([l1, l2], [v1, [-v1[1], v1[0]]])
}

/// Trust-region step restricted to the span of the gradient and an inexact
/// Newton direction, with the two-dimensional subproblem solved exactly.
pub fn subspace_step(h: &dyn LinearOperator, g: &[f64], radius: f64, opts: CgOptions) -> TrStep {
    let n = g.len();
    let gnorm = norm2(g);
    if gnorm == 0.0 {
        return TrStep { step: vec![0.0; n], predicted_reduction: 0.0, hit_boundary: false, cg_iters: 0 };
    }
    let (dir, cg_iters) = newton_direction(h, g, opts);

    let q1: Vec<f64> = g.iter().map(|x| x / gnorm).collect();
    let mut q2 = dir;
    let dnorm = norm2(&q2);
    axpy(-dot(&q1, &q2), &q1, &mut q2);
    let q2norm = norm2(&q2);
    let two_dim = q2norm > 1e-8 * dnorm;
    if two_dim {
        q2.iter_mut().for_each(|x| *x /= q2norm);
    }

    let mut hq1 = vec![0.0; n];
    h.apply(&q1, &mut hq1);
    let (lambda, basis, a) = if two_dim {
        let mut hq2 = vec![0.0; n];
        h.apply(&q2, &mut hq2);
        let off = 0.5 * (dot(&q1, &hq2) + dot(&q2, &hq1));
        let (lambda, v) = eigen_sym2([[dot(&q1, &hq1), off], [off, dot(&q2, &hq2)]]);
        let a = [v[0][0] * gnorm, v[1][0] * gnorm];
        (lambda, v, a)
    } else {
        // a second direction with infinite curvature never moves
        let l = dot(&q1, &hq1);
        ([l, f64::INFINITY], [[1.0, 0.0], [0.0, 1.0]], [gnorm, 0.0])
    };
    let (w, hit_boundary) = if lambda[1].is_finite() {
        small_trust_region(lambda, a, radius)
    } else if lambda[0] > 0.0 && gnorm / lambda[0] <= radius {
        ([-gnorm / lambda[0], 0.0], false)
    } else {
        ([-radius, 0.0], true)
    };
    let predicted_reduction = -(a[0] * w[0] + a[1] * w[1])
        - 0.5 * (lambda[0] * w[0] * w[0] + if two_dim { lambda[1] * w[1] * w[1] } else { 0.0 });

    // back to the full space: z = w1 v1 + w2 v2 in (q1, q2) coordinates
    let c1 = basis[0][0] * w[0] + basis[1][0] * w[1];
    let c2 = basis[0][1] * w[0] + basis[1][1] * w[1];
    let mut step: Vec<f64> = q1.iter().map(|x| c1 * x).collect();
    if two_dim {
        axpy(c2, &q2, &mut step);
    }
    TrStep { step, predicted_reduction, hit_boundary, cg_iters }
}
