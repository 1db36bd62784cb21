use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use plap_core::io::{parse_mesh, MeshFile};
use plap_core::mesh::make_structured_trimesh;
use plap_core::{DomainKind, Mesh};

fn plap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plap"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn bare_solve_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["solve"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("999 unknowns"), "{text}");
    let j: f64 = text.split("J_final = ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((j + 16.8655).abs() < 5e-3, "{j}");
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("x,u\n-1,0\n"));
    assert_eq!(csv.lines().count(), 1002);
}

#[test]
fn lshape_solve_writes_contour_ready_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "solve", "--dim", "2", "--domain", "lshape", "--level", "3", "--p", "1.8", "--f", "-10", "--out",
        "l.csv",
    ];
    let out = plap(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("l.csv")).unwrap();
    assert!(csv.starts_with("x,y,u\n"));
    let mesh = make_structured_trimesh(DomainKind::LShape, 3).unwrap();
    assert_eq!(csv.lines().count(), mesh.num_nodes() + 1);
    // f < 0 pulls the solution below the zero boundary values
    let u = csv_column(&csv, 2);
    assert!(u.iter().all(|&v| v <= 0.0) && u.iter().any(|&v| v < -0.1));
}

#[test]
fn zero_data_gives_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["solve", "--dim", "1", "--n", "9", "--p", "2", "--f", "0", "--g", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("J_final = 0.0000000000"));
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv_column(&csv, 1).iter().all(|&u| u == 0.0));
}

#[test]
fn solutions_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let args = [
            "solve", "--domain", "square", "--level", "2", "--solver", "tr-fd", "--seed", "7", "--out", name,
        ];
        assert_eq!(plap(dir.path(), &args).status.code(), Some(0));
        files.push(fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn solver_all_writes_one_file_per_option() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["solve", "--n", "49", "--solver", "all", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut energies = Vec::new();
    for k in 1..=4 {
        assert!(text.contains(&format!("option {k} (")), "{text}");
        let csv = fs::read_to_string(dir.path().join(format!("s_opt{k}.csv"))).unwrap();
        energies.push(csv_column(&csv, 1));
    }
    for u in &energies[1..] {
        let diff = u.iter().zip(&energies[0]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-4, "{diff}");
    }
}

#[test]
fn f_file_overrides_constant_load() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (0..11).map(|_| "-10".to_string()).collect();
    fs::write(dir.path().join("f.txt"), values.join("\n")).unwrap();
    let a = plap(dir.path(), &["solve", "--n", "9", "--f", "3", "--f-file", "f.txt", "--out", "a.csv"]);
    let b = plap(dir.path(), &["solve", "--n", "9", "--f", "-10", "--out", "b.csv"]);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
    // wrong length
    fs::write(dir.path().join("short.txt"), "1 2 3").unwrap();
    assert_eq!(plap(dir.path(), &["solve", "--n", "9", "--f-file", "short.txt"]).status.code(), Some(1));
}

#[test]
fn mesh_command_lshape_level0() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(
        dir.path(),
        &["mesh", "--dim", "2", "--domain", "lshape", "--level", "0", "--sparsity", "--out", "m.txt"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("m.txt")).unwrap();
    assert!(text.starts_with("nodes 21 2\n"));
    assert!(text.contains("\nelements 24 3\n"));
    let dump = fs::read_to_string(dir.path().join("m.sparsity")).unwrap();
    assert_eq!(dump.lines().count(), 109);
    let pairs: Vec<(usize, usize)> = dump
        .lines()
        .map(|l| {
            let mut it = l.split(' ').map(|x| x.parse::<usize>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert!(pairs.iter().all(|&(i, j)| pairs.contains(&(j, i))));
    assert_eq!(pairs.iter().filter(|(i, j)| i == j).count(), 21);
}

#[test]
fn mesh_command_interval() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["mesh", "--dim", "1", "--n", "3", "--out", "i.txt"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("i.txt")).unwrap();
    assert!(text.starts_with("nodes 5 1\n"));
    assert!(text.contains("\nelements 4 2\n"));
}

#[test]
fn mesh_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (domain, level) in [("lshape", "2"), ("square", "1")] {
        let out = plap(dir.path(), &["mesh", "--domain", domain, "--level", level, "--out", "r.txt"]);
        assert_eq!(out.status.code(), Some(0));
        let bytes = fs::read(dir.path().join("r.txt")).unwrap();
        let parsed = parse_mesh(bytes.as_slice()).unwrap();
        let kind = if domain == "lshape" { DomainKind::LShape } else { DomainKind::UnitSquare };
        let direct = Mesh::Triangles(make_structured_trimesh(kind, level.parse().unwrap()).unwrap());
        assert_eq!(parsed, MeshFile::from(&direct));
        let rebuilt = parsed.into_mesh().unwrap();
        assert_eq!(rebuilt.boundary_nodes(), direct.boundary_nodes());
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--bogus"][..],
        &["solve", "--dim", "3"],
        &["solve", "--dim", "1", "--domain", "square"],
        &["solve", "--p", "1"],
        &["solve", "--solver", "newton"],
        &["solve", "--n", "0"],
        &["bench", "--n", "99,9"],
        &["mesh", "--level", "40", "--domain", "square"],
        &[],
    ] {
        let out = plap(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(plap(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn non_convergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["solve", "--n", "99", "--max-iters", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("termination = MaxIters"));
    // the partial solution is still written
    assert!(dir.path().join("solution.csv").exists());
}

#[test]
fn bench_two_dimensional_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bench", "--dim", "2", "--level", "1,2,3,4", "--solver", "tr-exact", "--format", "csv", "--out",
        "b.csv",
    ];
    let out = plap(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let sizes: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sizes, ["33", "161", "705", "2945"]);
}

#[test]
fn bench_one_dimensional_grid_in_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["bench", "--n", "9,99", "--solver", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let header = text.lines().find(|l| l.starts_with("| N_dof |")).unwrap();
    assert_eq!(header.matches("time").count(), 4);
    let rows: Vec<&str> =
        text.lines().filter(|l| l.starts_with("| 9 |") || l.starts_with("| 99 |")).collect();
    assert_eq!(rows.len(), 2);
    // 1 size column + 8 cells, all filled
    assert!(rows.iter().all(|r| r.matches('|').count() == 10 && !r.contains('−')));
}

#[test]
fn bench_time_budget_marks_cells() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bench", "--n", "9,99", "--solver", "qn", "--time-budget", "1e-9", "--format", "csv"];
    let out = plap(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("9,,,,over_budget"), "{text}");
    assert!(text.contains("99,,,,skipped"), "{text}");
}

#[test]
fn bench_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = plap(dir.path(), &["bench", "--n", "9", "--solver", "tr-exact", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next(), Some("n_dof,opt1_time,opt1_iters,opt1_J,opt1_status"));
}
