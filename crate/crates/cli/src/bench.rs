//! Timing table: rows are problem sizes, columns are (time, iterations) pairs
//! per solver option.

use std::fmt::Write as _;
use std::time::Duration;

use log::{info, warn};
use plap_core::{PLaplace, SolverKind, SolverOptions, Termination};

/// Options with an `n x n` matrix are not attempted above this many bytes.
pub const DENSE_BYTES_LIMIT: usize = 1 << 30;

/// Largest allowed |J - J(option 1)| in a row.
pub const AGREEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellStatus {
    Converged,
    /// Stopped for a reason other than the gradient test or the budget.
    Stopped(Termination),
    /// Converged, but away from option 1's energy by more than [`AGREEMENT_TOL`].
    Mismatch,
    /// Ran into the time budget.
    OverBudget,
    /// Not run because a smaller size already exceeded the budget.
    Skipped,
    /// Not run because the dense matrix would exceed [`DENSE_BYTES_LIMIT`].
    OutOfMemory,
}

impl CellStatus {
    /// Cells shown as "−" in the table.
    pub fn is_dash(self) -> bool {
        matches!(self, CellStatus::OverBudget | CellStatus::Skipped | CellStatus::OutOfMemory)
    }

    fn label(self) -> &'static str {
        match self {
            CellStatus::Converged => "converged",
            CellStatus::Stopped(Termination::MaxIters) => "max_iters",
            CellStatus::Stopped(Termination::RadiusCollapse) => "radius_collapse",
            CellStatus::Stopped(Termination::LineSearchFail) => "line_search_fail",
            CellStatus::Stopped(_) => "stopped",
            CellStatus::Mismatch => "mismatch",
            CellStatus::OverBudget => "over_budget",
            CellStatus::Skipped => "skipped",
            CellStatus::OutOfMemory => "out_of_memory",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub time: Duration,
    pub iters: usize,
    pub j_final: f64,
    pub status: CellStatus,
}

impl Cell {
    fn dash(status: CellStatus) -> Self {
        Cell { time: Duration::ZERO, iters: 0, j_final: f64::NAN, status }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// Number of free unknowns.
    pub n_dof: usize,
    /// One cell per entry of [`BenchReport::kinds`].
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub kinds: Vec<SolverKind>,
    pub rows: Vec<BenchRow>,
    /// Free-text description printed above the table.
    pub caption: String,
}

impl BenchReport {
    /// Every cell that ran converged and agreed with option 1.
    pub fn all_ok(&self) -> bool {
        self.rows
            .iter()
            .flat_map(|r| &r.cells)
            .all(|c| c.status == CellStatus::Converged || c.status.is_dash())
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\n", self.caption);
        out.push_str("| N_dof |");
        for k in &self.kinds {
            let _ = write!(out, " option {} time | option {} iters |", k.option_number(), k.option_number());
        }
        out.push_str("\n|---:|");
        out.push_str(&"---:|---:|".repeat(self.kinds.len()));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.n_dof);
            for c in &row.cells {
                if c.status.is_dash() {
                    out.push_str(" − | − |");
                } else {
                    let mark = if c.status == CellStatus::Converged { "" } else { "*" };
                    let _ = write!(out, " {:.3} | {}{mark} |", c.time.as_secs_f64(), c.iters);
                }
            }
            out.push('\n');
        }
        out.push_str("\nTimes in seconds. − : over the time budget, skipped after an earlier overrun, or dense storage too large. ");
        out.push_str("* : did not converge or disagrees with option 1.\n");
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_dof");
        for k in &self.kinds {
            let o = k.option_number();
            let _ = write!(out, ",opt{o}_time,opt{o}_iters,opt{o}_J,opt{o}_status");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.n_dof);
            for c in &row.cells {
                if c.status.is_dash() {
                    let _ = write!(out, ",,,,{}", c.status.label());
                } else {
                    let _ = write!(
                        out,
                        ",{},{},{},{}",
                        c.time.as_secs_f64(),
                        c.iters,
                        c.j_final,
                        c.status.label()
                    );
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every option on every problem, in order. `problems` must be ascending
/// in size: once an option overruns the budget it is skipped for the rest.
pub fn run_bench<I>(problems: I, kinds: &[SolverKind], opts: &SolverOptions, caption: String) -> BenchReport
where
    I: IntoIterator<Item = PLaplace>,
{
    let budget = opts.time_limit;
    let mut exhausted = vec![false; kinds.len()];
    let mut rows = Vec::new();
    for prob in problems {
        let n = prob.num_free();
        let mut cells = Vec::with_capacity(kinds.len());
        for (slot, &kind) in kinds.iter().enumerate() {
            let cell = if exhausted[slot] {
                Cell::dash(CellStatus::Skipped)
            } else if kind.is_dense() && n.saturating_mul(n).saturating_mul(8) > DENSE_BYTES_LIMIT {
                Cell::dash(CellStatus::OutOfMemory)
            } else {
                let report = prob.solve(kind, opts).expect("options validated before the run");
                info!(
                    "n_dof {n}, option {}: J = {:.10}, {} iterations, {:.3} s, {:?}",
                    kind.option_number(),
                    report.j_final,
                    report.iterations,
                    report.wall_time.as_secs_f64(),
                    report.termination
                );
                let over = budget.is_some_and(|b| report.wall_time > b);
                if report.termination == Termination::TimeLimit || over {
                    exhausted[slot] = true;
                }
                let status = match report.termination {
                    Termination::GradTol => CellStatus::Converged,
                    Termination::TimeLimit => CellStatus::OverBudget,
                    t => CellStatus::Stopped(t),
                };
                if status == CellStatus::OverBudget {
                    Cell::dash(status)
                } else {
                    Cell { time: report.wall_time, iters: report.iterations, j_final: report.j_final, status }
                }
            };
            cells.push(cell);
        }
        check_agreement(kinds, &mut cells, n);
        rows.push(BenchRow { n_dof: n, cells });
    }
    BenchReport { kinds: kinds.to_vec(), rows, caption }
}

fn check_agreement(kinds: &[SolverKind], cells: &mut [Cell], n: usize) {
    let Some(anchor) = kinds.iter().position(|&k| k == SolverKind::TrExactGradSparse) else {
        return;
    };
    if cells[anchor].status != CellStatus::Converged {
        return;
    }
    let j_ref = cells[anchor].j_final;
    for (kind, cell) in kinds.iter().zip(cells.iter_mut()) {
        if cell.status == CellStatus::Converged && (cell.j_final - j_ref).abs() > AGREEMENT_TOL {
            warn!(
                "n_dof {n}: option {} J = {} differs from option 1 J = {j_ref}",
                kind.option_number(),
                cell.j_final
            );
            cell.status = CellStatus::Mismatch;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use plap_core::mesh::make_interval_mesh;
    use plap_core::Mesh;

    fn problems(sizes: &[usize]) -> Vec<PLaplace> {
        sizes
            .iter()
            .map(|&n| {
                let mesh = Mesh::Interval(make_interval_mesh(-1.0, 1.0, n).unwrap());
                PLaplace::with_constants(mesh, 3.0, -10.0, 0.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn grid_shape_and_agreement() {
        let report = run_bench(problems(&[9, 19]), &SolverKind::ALL, &SolverOptions::default(), "t".into());
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.cells.len() == 4));
        assert!(report.all_ok());
        let md = report.to_markdown();
        assert_eq!(md.lines().filter(|l| l.starts_with("| 9 |") || l.starts_with("| 19 |")).count(), 2);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.split(',').count() == 17));
    }

    #[test]
    fn overrun_skips_larger_sizes() {
        let opts = SolverOptions { time_limit: Some(Duration::ZERO), ..Default::default() };
        let report = run_bench(problems(&[9, 19]), &[SolverKind::QuasiNewtonBfgs], &opts, String::new());
        assert_eq!(report.rows[0].cells[0].status, CellStatus::OverBudget);
        assert_eq!(report.rows[1].cells[0].status, CellStatus::Skipped);
        assert!(report.to_markdown().contains("| 19 | − | − |"));
        assert!(report.to_csv().ends_with("19,,,,skipped\n"));
        assert!(report.all_ok());
    }

    #[test]
    fn disagreement_is_flagged() {
        let kinds = [SolverKind::TrExactGradSparse, SolverKind::QuasiNewtonBfgs];
        let mut cells = vec![
            Cell { time: Duration::ZERO, iters: 1, j_final: -1.0, status: CellStatus::Converged },
            Cell { time: Duration::ZERO, iters: 1, j_final: -1.001, status: CellStatus::Converged },
        ];
        check_agreement(&kinds, &mut cells, 3);
        assert_eq!(cells[1].status, CellStatus::Mismatch);
        assert_eq!(cells[0].status, CellStatus::Converged);
    }

    #[test]
    fn single_cell_csv() {
        let report = run_bench(
            problems(&[9]),
            &[SolverKind::TrExactGradSparse],
            &SolverOptions::default(),
            String::new(),
        );
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n_dof,opt1_time,opt1_iters,opt1_J,opt1_status"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "9");
        assert_eq!(row[4], "converged");
        assert!(lines.next().is_none());
    }
}
