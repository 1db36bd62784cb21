use crate::linalg::{axpy, dot, norm2, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Residual norm at which the inner iteration stops.
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrStep {
    pub step: Vec<f64>,
    /// `-(gᵀs + sᵀHs/2)`.
    pub predicted_reduction: f64,
    pub hit_boundary: bool,
    pub cg_iters: usize,
}

/// Positive `tau` with `|z + tau d| = radius`, assuming `|z| <= radius`.
fn to_boundary(z: &[f64], d: &[f64], radius: f64) -> f64 {
    let dd = dot(d, d);
    let zd = dot(z, d);
    let zz = dot(z, z);
    let disc = (zd * zd + dd * (radius * radius - zz)).max(0.0).sqrt();
    // numerically stable root of dd tau^2 + 2 zd tau + (zz - r^2) = 0
    if zd >= 0.0 {
        (radius * radius - zz).max(0.0) / (zd + disc)
    } else {
        (disc - zd) / dd
    }
}

/// Steihaug–Toint truncated conjugate gradients for
/// `min gᵀs + sᵀHs/2` subject to `|s| <= radius`.
pub fn tr_step(h: &dyn LinearOperator, g: &[f64], radius: f64, opts: CgOptions) -> TrStep {
    let n = g.len();
    let mut z = vec![0.0; n];
    let mut r = g.to_vec();
    let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut hd = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut hit_boundary = false;
    let mut iters = 0;

    if rr.sqrt() > opts.tol {
        while iters < opts.max_iters.max(1) {
            iters += 1;
            h.apply(&d, &mut hd);
            let dhd = dot(&d, &hd);
            if dhd <= 0.0 {
                let tau = to_boundary(&z, &d, radius);
                axpy(tau, &d, &mut z);
                hit_boundary = true;
                break;
            }
            let alpha = rr / dhd;
            let mut z_next = z.clone();
            axpy(alpha, &d, &mut z_next);
            if norm2(&z_next) >= radius {
                let tau = to_boundary(&z, &d, radius);
                axpy(tau, &d, &mut z);
                hit_boundary = true;
                break;
            }
            z = z_next;
            axpy(alpha, &hd, &mut r);
            let rr_next = dot(&r, &r);
            if rr_next.sqrt() <= opts.tol {
                break;
            }
            let beta = rr_next / rr;
            rr = rr_next;
            for (di, ri) in d.iter_mut().zip(&r) {
                *di = -ri + beta * *di;
            }
        }
    }

    h.apply(&z, &mut hd);
    let predicted_reduction = -(dot(g, &z) + 0.5 * dot(&z, &hd));
    TrStep { step: z, predicted_reduction, hit_boundary, cg_iters: iters }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn diag(values: &[f64]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    const CG: CgOptions = CgOptions { tol: 1e-12, max_iters: 50 };

    #[test]
    fn newton_point_inside_region() {
        let s = tr_step(&diag(&[1.0, 1.0]), &[1.0, 0.0], 10.0, CG);
        assert_eq!(s.step, vec![-1.0, 0.0]);
        assert!((s.predicted_reduction - 0.5).abs() < 1e-15);
        assert!(!s.hit_boundary);
    }

    #[test]
    fn clipped_to_boundary() {
        let s = tr_step(&diag(&[1.0, 1.0]), &[1.0, 0.0], 0.5, CG);
        assert!((s.step[0] + 0.5).abs() < 1e-15 && s.step[1] == 0.0);
        assert!(s.hit_boundary);
    }

    #[test]
    fn indefinite_goes_to_boundary() {
        let h = diag(&[1.0, -1.0]);
        let g = [1.0, 1.0];
        let s = tr_step(&h, &g, 1.0, CG);
        assert!((norm2(&s.step) - 1.0).abs() < 1e-12);
        assert!(s.hit_boundary);

        let model = |x: f64, y: f64| g[0] * x + g[1] * y + 0.5 * (x * x - y * y);
        // Cauchy point: negative curvature along -g, so it lies on the boundary
        let gn = norm2(&g);
        let cauchy = -model(-g[0] / gn, -g[1] / gn);
        assert!(s.predicted_reduction >= cauchy - 1e-12);
        // never better than the best boundary point
        let best = (0..100_000)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 100_000.0;
                -model(a.cos(), a.sin())
            })
            .fold(f64::MIN, f64::max);
        assert!(s.predicted_reduction <= best + 1e-9);
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        let s = tr_step(&diag(&[2.0, 3.0]), &[0.0, 0.0], 1.0, CG);
        assert_eq!(s.step, vec![0.0, 0.0]);
        assert_eq!(s.predicted_reduction, 0.0);
    }
}
