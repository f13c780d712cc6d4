//! Acceptance gate. Prints one PASS/FAIL line per criterion, followed by
//! the offending values for failures, and exits non-zero if any failed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdg::assembly::{assemble_b, assemble_bstar, assemble_mass, SdgSystem};
use sdg::mesh::{EdgeKind, InitialMesh, StaggeredMesh};
use sdg::postprocess::{element_means, postprocess, postprocess_serial};
use sdg::problems::{l2_error_scalar, ProblemInstance};
use sdg::solver::{jacobian_action, newton_solve, residual, NewtonConfig};
use sdg::space::{normal_trace_mismatch, scalar_trace_mismatch, SdgSpaces};
use sdg::{ManufacturedSolution, StandardCoefficient};
use sdg_cli::{run_study, StudyConfig, StudyReport};

use ManufacturedSolution::{U1, U2};
use StandardCoefficient::{Rho1, Rho2, Rho3, Rho4, Rho5, Rho6};

const U_REL: f64 = 0.05;
const USTAR_REL: f64 = 0.10;
const ORDER_TOL: f64 = 0.05;
const BLOCK_SECONDS: f64 = 180.0;

/// Reference rows for `N = 4, 8, 16, 32, 64`; orders are listed from the
/// second level on.
struct Reference {
    solution: ManufacturedSolution,
    rho: StandardCoefficient,
    err_u: [f64; 5],
    order_u: [f64; 4],
    err_ustar: [f64; 5],
    iterations: [usize; 5],
}

#[rustfmt::skip]
const REFERENCE: [Reference; 10] = [
    Reference { solution: U1, rho: Rho1,
        err_u: [3.54e-2, 9.24e-3, 2.34e-3, 5.86e-4, 1.46e-4], order_u: [1.94, 1.98, 2.00, 2.00],
        err_ustar: [2.86e-3, 3.71e-4, 4.70e-5, 5.91e-6, 7.40e-7],
        iterations: [4, 4, 4, 4, 4] },
    Reference { solution: U1, rho: Rho2,
        err_u: [3.50e-2, 9.23e-3, 2.34e-3, 5.86e-4, 1.46e-4], order_u: [1.92, 1.98, 2.00, 2.00],
        err_ustar: [3.00e-3, 3.95e-4, 5.07e-5, 6.45e-6, 8.13e-7],
        iterations: [4, 4, 4, 4, 4] },
    Reference { solution: U1, rho: Rho3,
        err_u: [3.78e-2, 9.41e-3, 2.34e-3, 5.86e-4, 1.46e-4], order_u: [2.01, 2.01, 2.00, 2.00],
        err_ustar: [4.31e-3, 5.46e-4, 5.81e-5, 7.67e-6, 9.84e-7],
        iterations: [5, 5, 5, 5, 5] },
    Reference { solution: U1, rho: Rho4,
        err_u: [3.50e-2, 9.21e-3, 2.34e-3, 5.86e-4, 1.46e-4], order_u: [1.93, 1.98, 2.00, 2.00],
        err_ustar: [3.13e-3, 4.12e-4, 5.30e-5, 6.74e-6, 8.49e-7],
        iterations: [4, 5, 5, 5, 5] },
    Reference { solution: U2, rho: Rho1,
        err_u: [1.46e-2, 3.91e-3, 9.92e-4, 2.49e-4, 6.24e-5], order_u: [1.90, 1.98, 1.99, 2.00],
        err_ustar: [1.78e-3, 2.40e-4, 3.11e-5, 3.94e-6, 5.00e-7],
        iterations: [5, 5, 5, 5, 5] },
    Reference { solution: U2, rho: Rho2,
        err_u: [1.45e-2, 3.90e-3, 9.91e-4, 2.45e-4, 6.24e-5], order_u: [1.90, 1.98, 1.99, 2.00],
        err_ustar: [1.72e-3, 2.32e-4, 3.04e-5, 3.82e-6, 4.94e-7],
        iterations: [5, 5, 5, 5, 5] },
    Reference { solution: U2, rho: Rho3,
        err_u: [1.40e-2, 3.94e-3, 9.94e-4, 2.49e-4, 6.24e-5], order_u: [1.83, 1.99, 1.99, 2.00],
        err_ustar: [1.90e-3, 2.58e-4, 3.22e-5, 4.19e-6, 5.33e-7],
        iterations: [6, 6, 6, 6, 6] },
    Reference { solution: U2, rho: Rho4,
        err_u: [1.45e-2, 3.90e-3, 9.91e-4, 2.49e-4, 6.24e-5], order_u: [1.89, 1.98, 1.99, 2.00],
        err_ustar: [1.71e-3, 2.31e-4, 3.03e-5, 3.79e-6, 4.89e-7],
        iterations: [4, 4, 4, 4, 4] },
    Reference { solution: U2, rho: Rho5,
        err_u: [1.49e-2, 3.94e-3, 9.99e-4, 2.50e-4, 6.25e-5], order_u: [1.92, 1.98, 2.00, 2.00],
        err_ustar: [3.97e-3, 6.05e-4, 9.24e-5, 1.32e-5, 1.79e-6],
        iterations: [7, 8, 8, 10, 10] },
    Reference { solution: U2, rho: Rho6,
        err_u: [1.54e-2, 3.91e-3, 9.94e-4, 2.50e-4, 6.24e-5], order_u: [1.98, 1.98, 1.99, 2.00],
        err_ustar: [6.54e-3, 1.17e-3, 1.96e-4, 2.92e-5, 3.91e-6],
        iterations: [13, 15, 18, 21, 23] },
];

struct Block<'r> {
    reference: &'r Reference,
    report: StudyReport,
    seconds: f64,
}

impl Block<'_> {
    fn label(&self) -> String {
        format!("{}/{}", self.reference.solution, self.reference.rho)
    }

    fn smooth(&self) -> bool {
        !matches!(self.reference.rho, Rho5 | Rho6)
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want
}

/// `u_h` values, orders on the last two levels and the runtime budget.
fn check_u(block: &Block, out: &mut Vec<String>) {
    let r = block.reference;
    if block.report.rows.len() != 5 {
        out.push(format!(
            "{}: only {} of 5 levels completed",
            block.label(),
            block.report.rows.len()
        ));
        return;
    }
    for (row, want) in block.report.rows.iter().zip(r.err_u) {
        if rel(row.err_u, want) > U_REL {
            out.push(format!(
                "{} N={}: err_u {:.3e} vs {want:.2e} ({:+.1}%)",
                block.label(),
                row.n,
                row.err_u,
                100.0 * (row.err_u / want - 1.0)
            ));
        }
    }
    for i in [3, 4] {
        let got = block.report.rows[i].order_u.unwrap();
        if (got - r.order_u[i - 1]).abs() > ORDER_TOL {
            out.push(format!(
                "{} N={}: order_u {got:.3} vs {:.2}",
                block.label(),
                block.report.rows[i].n,
                r.order_u[i - 1]
            ));
        }
    }
    if block.seconds > BLOCK_SECONDS {
        out.push(format!(
            "{}: {:.0} s exceeds the budget",
            block.label(),
            block.seconds
        ));
    }
}

/// `u*` values and the postprocessed order requirement.
fn check_ustar(block: &Block, out: &mut Vec<String>) {
    let r = block.reference;
    if block.report.rows.len() != 5 {
        out.push(format!(
            "{}: only {} of 5 levels completed",
            block.label(),
            block.report.rows.len()
        ));
        return;
    }
    for (row, want) in block.report.rows.iter().zip(r.err_ustar) {
        if rel(row.err_ustar, want) > USTAR_REL {
            out.push(format!(
                "{} N={}: err_ustar {:.3e} vs {want:.2e} ({:+.1}%)",
                block.label(),
                row.n,
                row.err_ustar,
                100.0 * (row.err_ustar / want - 1.0)
            ));
        }
    }
    let orders: Vec<f64> = block.report.rows[1..]
        .iter()
        .map(|r| r.order_ustar.unwrap())
        .collect();
    if block.smooth() {
        if orders[3] < 2.9 {
            out.push(format!(
                "{}: finest order_ustar {:.3} < 2.9",
                block.label(),
                orders[3]
            ));
        }
    } else if let Some(o) = orders.iter().find(|o| !(2.4..=3.1).contains(*o)) {
        out.push(format!(
            "{}: order_ustar {o:.3} outside [2.4, 3.1]",
            block.label()
        ));
    }
}

fn check_iterations(block: &Block, out: &mut Vec<String>) {
    let slack = if block.smooth() { 2 } else { 5 };
    if let Some(f) = &block.report.failure {
        out.push(format!("{} N={}: {}", block.label(), f.n, f.message));
    }
    for (row, want) in block.report.rows.iter().zip(block.reference.iterations) {
        if row.iterations.abs_diff(want) > slack {
            out.push(format!(
                "{} N={}: {} iterations vs {want} (slack {slack})",
                block.label(),
                row.n,
                row.iterations
            ));
        }
    }
}

fn spaces(n: usize, k: usize) -> SdgSpaces<f64> {
    SdgSpaces::new(
        StaggeredMesh::new(&InitialMesh::unit_square(n).unwrap()).unwrap(),
        k,
    )
    .unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn adjoint(out: &mut Vec<String>) {
    for n in [1, 2, 4] {
        for k in 0..=2 {
            let sp = spaces(n, k);
            let d = assemble_b(&sp).max_abs_diff(&assemble_bstar(&sp));
            if d >= 1e-12 {
                out.push(format!("N={n} k={k}: max |B - B*| = {d:e}"));
            }
        }
    }
}

fn jacobian(out: &mut Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [2, 4] {
        let sp = spaces(n, 1);
        for rho in [Rho1, Rho2, Rho3, Rho4] {
            let p = ProblemInstance::standard(U1, rho);
            let system = SdgSystem::assemble(&sp, |x| p.forcing(x)).unwrap();
            let dim = system.num_w() + system.num_u();
            for _ in 0..20 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let d: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let eps = 1e-6;
                let shifted = |s: f64| -> Vec<f64> {
                    x.iter().zip(&d).map(|(a, b)| a + s * eps * b).collect()
                };
                let hp = residual(&system, &rho, &shifted(1.0)).unwrap();
                let hm = residual(&system, &rho, &shifted(-1.0)).unwrap();
                let jd = jacobian_action(&system, &rho, &x, &d, 1e-14).unwrap();
                let diff: Vec<f64> = hp
                    .iter()
                    .zip(&hm)
                    .zip(&jd)
                    .map(|((a, b), j)| (a - b) / (2.0 * eps) - j)
                    .collect();
                let r = norm(&diff) / norm(&jd);
                if r >= 1e-6 {
                    out.push(format!("N={n} {rho}: relative mismatch {r:e}"));
                }
            }
        }
    }
}

fn linear(out: &mut Vec<String>) {
    let rho = StandardCoefficient::Constant(1.0);
    let p = ProblemInstance::standard(U1, rho);
    let mut errors = Vec::new();
    for n in [4, 8, 16, 32] {
        let sp = spaces(n, 1);
        let system = SdgSystem::assemble(&sp, |x| p.forcing(x)).unwrap();
        let sol = newton_solve(&system, &rho, &NewtonConfig::default()).unwrap();
        if sol.report.iterations > 2 {
            out.push(format!("N={n}: {} iterations", sol.report.iterations));
        }
        errors.push(l2_error_scalar(&sp, p.solution.as_ref(), &sol.u_hat));
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    if (orders[orders.len() - 1] - 2.0).abs() > ORDER_TOL || orders.iter().any(|&o| o < 1.9) {
        out.push(format!("orders {orders:.3?}"));
    }
}

fn structure(out: &mut Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [1, 2, 4, 8] {
        let sp = spaces(n, 1);
        let mesh = sp.mesh();
        let dual = mesh
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::Dual)
            .count();
        if mesh.num_subtriangles() != 6 * n * n || dual != 6 * n * n {
            out.push(format!(
                "N={n}: {} subtriangles, {dual} dual edges",
                mesh.num_subtriangles()
            ));
        }
        if sp.wh().macros().iter().any(|m| m.count != 12) {
            out.push(format!("N={n}: a first-type macro without 12 dofs"));
        }
        let bad = sp
            .uh()
            .macros()
            .iter()
            .enumerate()
            .filter(|(e, m)| mesh.edge(*e).is_interior() && m.count != 4)
            .count();
        if bad > 0 {
            out.push(format!(
                "N={n}: {bad} interior second-type macros without 4 dofs"
            ));
        }
        let u: Vec<f64> = (0..sp.uh().num_dofs())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let g: Vec<f64> = (0..sp.wh().num_dofs())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let (su, sg) = (
            scalar_trace_mismatch(&sp, &u),
            normal_trace_mismatch(&sp, &g),
        );
        if su >= 1e-11 || sg >= 1e-11 {
            out.push(format!("N={n}: trace jumps {su:e}, {sg:e}"));
        }
        let m = assemble_mass(&sp);
        if m.num_blocks() != mesh.num_first_type() || m.asymmetry() > 1e-15 || m.cholesky().is_err()
        {
            out.push(format!("N={n}: mass matrix is not SPD block-diagonal"));
        }
    }
}

fn locality(out: &mut Vec<String>) {
    let sp = spaces(16, 1);
    let p = ProblemInstance::standard(U2, Rho3);
    let system = SdgSystem::assemble(&sp, |x| p.forcing(x)).unwrap();
    let sol = newton_solve(&system, p.coefficient.as_ref(), &NewtonConfig::default()).unwrap();
    let par = postprocess(&sp, &sol.u_hat, &sol.g_hat).unwrap();
    let ser = postprocess_serial(&sp, &sol.u_hat, &sol.g_hat).unwrap();
    let identical = par
        .coeffs
        .iter()
        .zip(&ser.coeffs)
        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    if !identical {
        out.push("parallel and serial reconstructions differ".into());
    }
    let worst = element_means(&sp, &par, &sol.u_hat)
        .iter()
        .map(|(a, b)| rel(*a, *b))
        .fold(0.0f64, f64::max);
    if worst >= 1e-12 {
        out.push(format!("mean mismatch {worst:e}"));
    }
}

fn determinism(out: &mut Vec<String>) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_sdg"))
            .args([
                "--solution",
                "u1",
                "--rho",
                "rho3",
                "--meshes",
                "4,8,16",
                "--format",
                "csv",
            ])
            .output()
            .expect("runs the sdg binary")
    };
    let (a, b) = (run(), run());
    if !a.status.success() || a.stdout.is_empty() {
        out.push(format!(
            "first run failed: {}",
            String::from_utf8_lossy(&a.stderr)
        ));
    } else if a.stdout != b.stdout {
        out.push("two runs produced different CSV".into());
    }
}

fn main() -> ExitCode {
    let blocks: Vec<Block> = REFERENCE
        .iter()
        .map(|reference| {
            let start = Instant::now();
            let report = run_study(&StudyConfig::standard(reference.solution, reference.rho))
                .expect("valid study");
            let seconds = start.elapsed().as_secs_f64();
            eprintln!(
                "  solved {}/{} in {seconds:.1} s",
                reference.solution, reference.rho
            );
            Block {
                reference,
                report,
                seconds,
            }
        })
        .collect();
    let u1 = || blocks.iter().filter(|b| b.reference.solution == U1);
    let u2 = || blocks.iter().filter(|b| b.reference.solution == U2);

    type Check<'a> = (&'static str, Box<dyn Fn(&mut Vec<String>) + 'a>);
    let criteria: Vec<Check> = vec![
        ("u1, rho1-rho4: u_h errors within 5%, last two orders within 0.05, under 3 min per block",
            Box::new(|o| u1().for_each(|b| check_u(b, o)))),
        ("u1, rho1-rho4: u* errors within 10%, finest order >= 2.9",
            Box::new(|o| u1().for_each(|b| check_ustar(b, o)))),
        ("u2, rho1-rho6: u_h and u* tolerances as above, u* orders in [2.4, 3.1] for rho5, rho6",
            Box::new(|o| u2().for_each(|b| { check_u(b, o); check_ustar(b, o) }))),
        ("Newton iterations within 2 (rho1-rho4) or 5 (rho5, rho6), all levels converged",
            Box::new(|o| blocks.iter().for_each(|b| check_iterations(b, o)))),
        ("adjoint identity B = B* below 1e-12, N in {1,2,4}, k in {0,1,2}", Box::new(adjoint)),
        ("Jacobian action matches central differences to 1e-6, rho1-rho4, N in {2,4}", Box::new(jacobian)),
        ("constant coefficient: at most 2 iterations and second-order u_h", Box::new(linear)),
        ("mesh counts, dof dimensions, trace continuity, mass structure on N in {1,2,4,8}", Box::new(structure)),
        ("postprocessing conserves means to 1e-12 and is identical serial or parallel", Box::new(locality)),
        ("identical CLI runs give identical CSV", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let mut problems = Vec::new();
        check(&mut problems);
        let status = if problems.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {status}  {name}", i + 1);
        for p in &problems {
            println!("      {p}");
        }
        failed += usize::from(!problems.is_empty());
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
