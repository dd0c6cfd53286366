//! Adaptive refinement driven by the local least-squares indicators.

use crate::analysis::loglog_slope;
use crate::error::{Error, Result};
use crate::mesh::{bisect, SimplicialMesh};
use crate::problems::MaxwellProblem;
use crate::study::{solve_on_mesh, StudyOptions};
use std::fmt::Write as _;

/// Smallest set of cells, taken in order of decreasing indicator (ties by
/// index), whose squared indicators sum to at least `theta` times the total.
/// Returns the marked cells in ascending order; nothing is marked when all
/// indicators vanish.
pub fn dorfler_mark(eta2: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("marking fraction must lie in (0, 1], got {theta}")));
    }
    if eta2.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter("indicators must be finite and non-negative".into()));
    }
    let total: f64 = eta2.iter().sum();
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..eta2.len()).collect();
    order.sort_by(|&a, &b| eta2[b].total_cmp(&eta2[a]).then(a.cmp(&b)));
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for c in order {
        if acc >= theta * total {
            break;
        }
        acc += eta2[c];
        marked.push(c);
    }
    marked.sort_unstable();
    Ok(marked)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveRecord {
    pub step: usize,
    pub n_cells: usize,
    pub n_dofs: usize,
    pub l2_u: f64,
    pub l2_p: f64,
    pub energy: f64,
    pub sum_eta2: f64,
    /// Cells marked for refinement after this solve (0 on the last step).
    pub marked: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptiveHistory {
    pub records: Vec<AdaptiveRecord>,
    pub initial_mesh: SimplicialMesh,
    pub final_mesh: SimplicialMesh,
}

/// Error carrying the records completed before the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("adaptive loop failed after {} steps: {source}", .history.len())]
pub struct AdaptiveFailure {
    pub history: Vec<AdaptiveRecord>,
    pub source: Error,
}

impl AdaptiveHistory {
    /// Fitted slope of `log y` against `log n_cells` over the last `count` records.
    fn tail_slope(&self, count: usize, y: impl Fn(&AdaptiveRecord) -> f64) -> Result<f64> {
        let tail = &self.records[self.records.len().saturating_sub(count)..];
        let x: Vec<f64> = tail.iter().map(|r| r.n_cells as f64).collect();
        let y: Vec<f64> = tail.iter().map(y).collect();
        loglog_slope(&x, &y)
    }

    pub fn l2_u_slope(&self, count: usize) -> Result<f64> {
        self.tail_slope(count, |r| r.l2_u)
    }

    pub fn l2_p_slope(&self, count: usize) -> Result<f64> {
        self.tail_slope(count, |r| r.l2_p)
    }

    pub fn energy_slope(&self, count: usize) -> Result<f64> {
        self.tail_slope(count, |r| r.energy)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,n_cells,n_dofs,l2_u,l2_p,energy,sum_eta2,marked\n");
        for r in &self.records {
            writeln!(
                s,
                "{},{},{},{:.3e},{:.3e},{:.3e},{:.3e},{}",
                r.step, r.n_cells, r.n_dofs, r.l2_u, r.l2_p, r.energy, r.sum_eta2, r.marked
            )
            .unwrap();
        }
        s
    }
}

/// Solve, estimate, mark, refine. Performs at most `max_steps` refinements
/// (so up to `max_steps + 1` solves) and stops early once the next mesh would
/// exceed `dof_budget` unknowns.
pub fn adaptive_solve(
    problem: &dyn MaxwellProblem,
    initial: &SimplicialMesh,
    opts: &StudyOptions,
    theta: f64,
    max_steps: usize,
    dof_budget: Option<usize>,
) -> std::result::Result<AdaptiveHistory, AdaptiveFailure> {
    let mut records = Vec::new();
    let fail = |records: &Vec<AdaptiveRecord>, source| AdaptiveFailure {
        history: records.clone(),
        source,
    };
    dorfler_mark(&[], theta).map_err(|e| fail(&records, e))?;
    let mut mesh = initial.clone();
    for step in 0..=max_steps {
        let sol = solve_on_mesh(problem, &mesh, opts, true).map_err(|e| fail(&records, e))?;
        let eta2 = sol.indicators.expect("indicators requested");
        let within_budget = dof_budget.is_none_or(|b| sol.report.n_dofs <= b);
        let mut record = AdaptiveRecord {
            step,
            n_cells: sol.report.n_cells,
            n_dofs: sol.report.n_dofs,
            l2_u: sol.report.l2_u,
            l2_p: sol.report.l2_p,
            energy: sol.report.energy_error,
            sum_eta2: eta2.iter().sum(),
            marked: 0,
        };
        if step == max_steps || !within_budget {
            records.push(record);
            break;
        }
        let marked = dorfler_mark(&eta2, theta).map_err(|e| fail(&records, e))?;
        record.marked = marked.len();
        records.push(record);
        if marked.is_empty() {
            break;
        }
        let next = bisect(&mesh, &marked).map_err(|e| fail(&records, e))?;
        if let Some(b) = dof_budget {
            let per_cell = sol.report.n_dofs / sol.report.n_cells;
            if next.num_cells() * per_cell > b {
                break;
            }
        }
        mesh = next;
    }
    Ok(AdaptiveHistory {
        records,
        initial_mesh: initial.clone(),
        final_mesh: mesh,
    })
}
