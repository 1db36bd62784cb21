use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use plap_core::assembly::hessian_sparsity;
use plap_core::io::{write_mesh, write_solution_csv, write_sparsity};
use plap_core::{Mesh, PLaplace, SolverKind};

use crate::args::{build_mesh, solver_name, BenchArgs, DomainArg, Format, MeshArgs, SolveArgs};
use crate::bench::run_bench;

/// Whether every solve reached the gradient tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// `solution.csv` becomes `solution_opt2.csv`.
fn suffixed(path: &Path, kind: SolverKind) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_opt{}.{}", kind.option_number(), ext.to_string_lossy()),
        None => format!("{stem}_opt{}", kind.option_number()),
    };
    path.with_file_name(name)
}

fn size_text(domain: DomainArg, n: usize, level: u32) -> String {
    match domain {
        DomainArg::Interval => format!("interval (-1, 1), n = {n}"),
        DomainArg::Square => format!("unit square, level {level}"),
        DomainArg::Lshape => format!("L-shape, level {level}"),
    }
}

pub fn solve(args: &SolveArgs) -> Result<Outcome> {
    let domain = args.domain.resolve()?;
    let opts = args.solver.options()?;
    let mesh = build_mesh(domain, args.n, args.level)?;
    if let Some(path) = &args.mesh_out {
        let mut out = create(path)?;
        write_mesh(&mesh, &mut out)?;
        out.flush()?;
    }
    let spec = args.problem.spec(&mesh)?;
    let prob = PLaplace::new(mesh, &spec)?;
    println!(
        "{}, p = {}, {} unknowns",
        size_text(domain, args.n, args.level),
        args.problem.p,
        prob.num_free()
    );

    let kinds = args.solver.solver.kinds();
    let mut outcome = Outcome::Converged;
    for &kind in &kinds {
        let report = prob.solve(kind, &opts)?;
        println!(
            "option {} ({}): J_final = {:.10}, iterations = {}, time = {:.3} s, termination = {:?}",
            kind.option_number(),
            solver_name(kind),
            report.j_final,
            report.iterations,
            report.wall_time.as_secs_f64(),
            report.termination
        );
        let path = if kinds.len() > 1 { suffixed(&args.out, kind) } else { args.out.clone() };
        let mut out = create(&path)?;
        write_solution_csv(&prob.mesh, &report.u_full, &mut out)?;
        out.flush()?;
        if !report.converged() {
            outcome = Outcome::NotConverged;
        }
    }
    Ok(outcome)
}

pub fn bench(args: &BenchArgs) -> Result<Outcome> {
    let domain = args.domain.resolve()?;
    let solver = args.solver.as_solver_args();
    let opts = solver.options()?;
    let meshes: Vec<Mesh> = if domain == DomainArg::Interval {
        anyhow::ensure!(args.n.windows(2).all(|w| w[0] < w[1]), "--n sizes must be ascending");
        args.n.iter().map(|&n| build_mesh(domain, n, 0)).collect::<Result<_>>()?
    } else {
        anyhow::ensure!(args.level.windows(2).all(|w| w[0] < w[1]), "--level values must be ascending");
        args.level.iter().map(|&l| build_mesh(domain, 0, l)).collect::<Result<_>>()?
    };
    anyhow::ensure!(!meshes.is_empty(), "no sizes given");
    let problems = meshes
        .into_iter()
        .map(|mesh| {
            let spec = args.problem.spec(&mesh)?;
            Ok(PLaplace::new(mesh, &spec)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let caption = format!(
        "{:?} domain, p = {}, f = {}, g = {}, tol = {:e}, time budget {} s per cell, seed {}",
        domain, args.problem.p, args.problem.f, args.problem.g, solver.tol, solver.time_budget, solver.seed
    );
    let report = run_bench(problems, &solver.solver.kinds(), &opts, caption);
    let text = match args.format {
        Format::Md => report.to_markdown(),
        Format::Csv => report.to_csv(),
    };
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(if report.all_ok() { Outcome::Converged } else { Outcome::NotConverged })
}

pub fn mesh(args: &MeshArgs) -> Result<Outcome> {
    let domain = args.domain.resolve()?;
    let mesh = build_mesh(domain, args.n, args.level)?;
    let mut out = create(&args.out)?;
    write_mesh(&mesh, &mut out)?;
    out.flush()?;
    println!(
        "{}: {} nodes, {} boundary nodes, wrote {}",
        size_text(domain, args.n, args.level),
        mesh.num_nodes(),
        mesh.boundary_nodes().len(),
        args.out.display()
    );
    if args.sparsity {
        let path = args.out.with_extension("sparsity");
        let pattern = hessian_sparsity(&mesh);
        let mut out = create(&path)?;
        write_sparsity(&pattern, &mut out)?;
        out.flush()?;
        println!("{} structural nonzeros, wrote {}", pattern.nnz(), path.display());
    }
    Ok(Outcome::Converged)
}
