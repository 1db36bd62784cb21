use std::time::Duration;

use plap_core::energy::{reference_solution_1d, ProblemSpec};
use plap_core::mesh::{make_interval_mesh, make_structured_trimesh};
use plap_core::optimizer::Subproblem;
use plap_core::{DomainKind, Mesh, PLaplace, SolveReport, SolverKind, SolverOptions, Termination};

fn interval(n: usize) -> Mesh {
    Mesh::Interval(make_interval_mesh(-1.0, 1.0, n).unwrap())
}

fn tri(kind: DomainKind, level: u32) -> Mesh {
    Mesh::Triangles(make_structured_trimesh(kind, level).unwrap())
}

fn solve(mesh: Mesh, p: f64, kind: SolverKind, opts: &SolverOptions) -> SolveReport {
    let prob = PLaplace::with_constants(mesh, p, -10.0, 0.0).unwrap();
    let r = prob.solve(kind, opts).unwrap();
    assert!(r.converged(), "{kind:?}: {:?}", r.termination);
    r
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn all_options_agree_on_nonquadratic_problems() {
    let opts = SolverOptions::default();
    for (mesh, p) in [(interval(100), 1.8), (interval(100), 3.0), (tri(DomainKind::LShape, 2), 3.0)] {
        let reference = solve(mesh.clone(), p, SolverKind::TrExactGradSparse, &opts);
        for kind in &SolverKind::ALL[1..] {
            let r = solve(mesh.clone(), p, *kind, &opts);
            assert!(
                (r.j_final - reference.j_final).abs() <= 1e-4,
                "{kind:?} p={p}: {} vs {}",
                r.j_final,
                reference.j_final
            );
        }
    }
}

#[test]
fn accepted_energies_never_increase() {
    let opts = SolverOptions::default();
    for p in [1.8, 3.0] {
        for kind in SolverKind::ALL {
            let r = solve(tri(DomainKind::UnitSquare, 2), p, kind, &opts);
            let slack = 1e-12 * r.j_final.abs().max(1.0);
            assert!(r.accepted_values.windows(2).all(|w| w[1] <= w[0] + slack), "{kind:?} p={p}");
            assert_eq!(*r.accepted_values.last().unwrap(), r.j_final);
            assert!(r.iterations + 1 >= r.accepted_values.len());
        }
    }
}

#[test]
fn both_subproblem_solvers_reach_the_same_minimizer() {
    let mesh = tri(DomainKind::LShape, 2);
    let a = solve(mesh.clone(), 3.0, SolverKind::TrExactGradSparse, &SolverOptions::default());
    let steihaug = SolverOptions { subproblem: Subproblem::Steihaug, ..Default::default() };
    let b = solve(mesh, 3.0, SolverKind::TrExactGradSparse, &steihaug);
    assert!((a.j_final - b.j_final).abs() < 1e-9);
    assert!(max_diff(&a.u_full, &b.u_full) < 1e-5);
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let mesh = tri(DomainKind::LShape, 1);
    let prob = PLaplace::with_constants(mesh, 3.0, -10.0, 0.0).unwrap();
    let opts = SolverOptions::default();
    for kind in SolverKind::ALL {
        let a = prob.solve(kind, &opts).unwrap();
        let b = prob.solve(kind, &opts).unwrap();
        assert_eq!(a.u_full, b.u_full, "{kind:?}");
        assert_eq!(a.accepted_values, b.accepted_values, "{kind:?}");
        assert_eq!(
            (a.iterations, a.energy_evals, a.gradient_evals),
            (b.iterations, b.energy_evals, b.gradient_evals)
        );
    }
}

#[test]
fn refinement_lowers_the_energy() {
    let opts = SolverOptions::default();
    for kind in [DomainKind::UnitSquare, DomainKind::LShape] {
        let energies: Vec<f64> =
            (0..=3).map(|l| solve(tri(kind, l), 3.0, SolverKind::TrExactGradSparse, &opts).j_final).collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{kind:?}: {energies:?}");
    }
    // interval meshes with 2^k - 1 interior nodes are nested
    let energies: Vec<f64> = (2..=7)
        .map(|k| solve(interval((1 << k) - 1), 3.0, SolverKind::TrExactGradSparse, &opts).j_final)
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{energies:?}");
}

#[test]
fn one_dimensional_solution_approaches_closed_form() {
    let opts = SolverOptions { grad_tol: 1e-9, ..Default::default() };
    for p in [1.8, 2.0, 3.0] {
        let exact = reference_solution_1d(p, -10.0, -1.0, 1.0).unwrap();
        let mut errors = Vec::new();
        for n in [19, 79, 319] {
            let mesh = make_interval_mesh(-1.0, 1.0, n).unwrap();
            let coords = mesh.coords.clone();
            let r = solve(Mesh::Interval(mesh), p, SolverKind::TrExactGradSparse, &opts);
            assert!(r.j_final >= exact.energy - 1e-9, "p={p}: discrete energy below the continuous one");
            let nodal: Vec<f64> = coords.iter().map(|&x| exact.u(x)).collect();
            errors.push(max_diff(&r.u_full, &nodal));
        }
        // at p = 2 piecewise linears are exact at the nodes
        assert!(errors.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-9), "p={p}: {errors:?}");
        assert!(errors[2] < 5e-3, "p={p}: {errors:?}");
    }
}

#[test]
fn boundary_values_are_kept_and_shift_the_solution() {
    // with constant g the minimizer is the zero-boundary one shifted by g
    let mesh = tri(DomainKind::LShape, 2);
    let opts = SolverOptions { grad_tol: 1e-9, ..Default::default() };
    let base = solve(mesh.clone(), 3.0, SolverKind::TrExactGradSparse, &opts);
    let prob = PLaplace::with_constants(mesh.clone(), 3.0, -10.0, 1.5).unwrap();
    for kind in SolverKind::ALL {
        let r = prob.solve(kind, &opts).unwrap();
        assert!(r.converged(), "{kind:?}: {:?}", r.termination);
        for &k in &mesh.boundary_nodes() {
            assert_eq!(r.u_full[k], 1.5);
        }
        let shifted: Vec<f64> = base.u_full.iter().map(|u| u + 1.5).collect();
        assert!(max_diff(&r.u_full, &shifted) < 1e-5, "{kind:?}");
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let mesh = tri(DomainKind::UnitSquare, 1);
    let prob = PLaplace::with_constants(mesh, 3.0, 0.0, 0.0).unwrap();
    for kind in SolverKind::ALL {
        let r = prob.solve(kind, &SolverOptions::default()).unwrap();
        assert_eq!(r.termination, Termination::GradTol);
        assert_eq!(r.iterations, 0);
        assert!(r.u_full.iter().all(|&u| u == 0.0));
        assert_eq!(r.j_final, 0.0);
    }
}

#[test]
fn limits_are_reported() {
    let prob = PLaplace::with_constants(tri(DomainKind::LShape, 2), 3.0, -10.0, 0.0).unwrap();
    for kind in SolverKind::ALL {
        let opts = SolverOptions { max_iters: Some(2), ..Default::default() };
        let r = prob.solve(kind, &opts).unwrap();
        assert_eq!((r.termination, r.iterations), (Termination::MaxIters, 2), "{kind:?}");
        let opts = SolverOptions { time_limit: Some(Duration::ZERO), ..Default::default() };
        let r = prob.solve(kind, &opts).unwrap();
        assert_eq!(r.termination, Termination::TimeLimit, "{kind:?}");
        assert!(!r.converged());
    }
}

#[test]
fn variable_load_and_boundary_data() {
    // p = 2 with f = 0 and linear boundary data: the linear function is
    // discretely harmonic on a structured mesh
    let mesh = tri(DomainKind::UnitSquare, 2);
    let coords: Vec<Vec<f64>> = (0..mesh.num_nodes()).map(|i| mesh.coords_of(i)).collect();
    let linear = |c: &[f64]| 2.0 * c[0] - c[1] + 0.5;
    let spec = ProblemSpec {
        p: 2.0,
        f_nodal: vec![0.0; mesh.num_nodes()],
        g: mesh.boundary_nodes().into_iter().map(|k| (k, linear(&coords[k]))).collect(),
        reg_eps: 0.0,
    };
    let prob = PLaplace::new(mesh, &spec).unwrap();
    let opts = SolverOptions { grad_tol: 1e-10, ..Default::default() };
    let r = prob.solve(SolverKind::TrExactGradSparse, &opts).unwrap();
    let want: Vec<f64> = coords.iter().map(|c| linear(c)).collect();
    assert!(max_diff(&r.u_full, &want) < 1e-8);
}
