//! Iterative solvers on assembled least-squares systems.

use dls_maxwell::solver::{bicgstab, cg, solve, Ilu0, PreconditionerKind};
use dls_maxwell::study::assemble_on_mesh;
use dls_maxwell::*;

fn system(k: f64, n: usize, m: usize) -> SparseSystem {
    let problem = ManufacturedProblem::example1(k).unwrap();
    let opts = StudyOptions { degree: m, ..Default::default() };
    assemble_on_mesh(&problem, &unit_square_mesh(n), &opts).unwrap()
}

fn a_norm(a: &CsrMatrix, x: &[f64]) -> f64 {
    let ax = a.spmv(x).unwrap();
    x.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>().sqrt()
}

#[test]
fn cg_and_bicgstab_agree_in_energy() {
    let sys = system(4.0, 8, 2);
    let mut opts = SolverOptions { tol: 1e-12, ..Default::default() };
    let (xb, sb) = solve(&sys.matrix, &sys.rhs, &opts).unwrap();
    opts.kind = SolverKind::Cg;
    let (xc, sc) = solve(&sys.matrix, &sys.rhs, &opts).unwrap();
    assert!(sb.converged && sc.converged);
    let diff: Vec<f64> = xb.iter().zip(&xc).map(|(a, b)| a - b).collect();
    assert!(a_norm(&sys.matrix, &diff) <= 1e-7 * a_norm(&sys.matrix, &xb));
}

#[test]
fn every_preconditioner_converges() {
    let sys = system(1.0, 6, 1);
    for pc in [PreconditionerKind::SymmetricGaussSeidel, PreconditionerKind::Ilu0, PreconditionerKind::Jacobi] {
        for kind in [SolverKind::BiCgStab, SolverKind::Cg] {
            let opts = SolverOptions { kind, preconditioner: pc, ..Default::default() };
            let (x, stats) = solve(&sys.matrix, &sys.rhs, &opts).unwrap();
            assert!(stats.converged, "{kind} + {pc}");
            let r = sys.matrix.spmv(&x).unwrap();
            let res: f64 = r.iter().zip(&sys.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let bn: f64 = sys.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(res <= 1e-9 * bn, "{kind} + {pc}: {res:e}");
        }
    }
}

#[test]
fn ilu_residual_drops_over_first_iterations() {
    let sys = system(1.0, 10, 1);
    let ilu = Ilu0::new(&sys.matrix).unwrap();
    let res: Vec<f64> = (1..=5)
        .map(|it| bicgstab(&sys.matrix, &sys.rhs, &ilu, 1e-14, it).unwrap().1.relative_residual)
        .collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
    assert!(res[0] < 1.0);
}

#[test]
fn ilu_pivots_are_positive_on_spd_systems() {
    let sys = system(2.0, 4, 2);
    let ilu = Ilu0::new(&sys.matrix).unwrap();
    assert!(ilu.pivots().iter().all(|&p| p > 0.0));
}

#[test]
fn iteration_cap_is_reported() {
    let sys = system(1.0, 8, 1);
    let opts = SolverOptions { max_iter: Some(2), ..Default::default() };
    let (_, stats) = solve(&sys.matrix, &sys.rhs, &opts).unwrap();
    assert!(!stats.converged);
    assert!(stats.iterations <= 2);
    let err = solve_on_mesh(
        &ManufacturedProblem::example1(1.0).unwrap(),
        &unit_square_mesh(8),
        &StudyOptions { solver: opts, ..Default::default() },
        false,
    )
    .unwrap_err();
    assert!(matches!(err, Error::SolverFailed(_)));
}

#[test]
fn preconditioned_cg_is_deterministic() {
    let sys = system(3.0, 5, 2);
    let ilu = Ilu0::new(&sys.matrix).unwrap();
    let a = cg(&sys.matrix, &sys.rhs, &ilu, 1e-10, 5000).unwrap();
    let b = cg(&sys.matrix, &sys.rhs, &ilu, 1e-10, 5000).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn matrix_market_dump_lists_every_entry() {
    let sys = system(1.0, 2, 1);
    let mut out = Vec::new();
    sys.write_matrix_market(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('%'));
    let header: Vec<usize> = lines.next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(header, vec![sys.matrix.n_rows(), sys.matrix.n_cols(), sys.matrix.nnz()]);
    assert_eq!(lines.count(), sys.matrix.nnz());
}
