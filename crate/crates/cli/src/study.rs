use std::time::Instant;

use serde::{Deserialize, Serialize};

use sdg::assembly::SdgSystem;
use sdg::mesh::{InitialMesh, StaggeredMesh};
use sdg::postprocess::postprocess;
use sdg::problems::{l2_error_scalar, ProblemInstance};
use sdg::solver::{newton_solve, NewtonConfig};
use sdg::space::SdgSpaces;
use sdg::{ManufacturedSolution, NewtonReport, SdgError, StandardCoefficient};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub solution: ManufacturedSolution,
    pub coefficient: StandardCoefficient,
    pub degree: usize,
    /// Subdivisions per side of the unit square, strictly increasing.
    pub meshes: Vec<usize>,
    pub newton: NewtonConfig<f64>,
    /// Echoed in the report; the study itself is deterministic.
    pub seed: u64,
}

impl StudyConfig {
    /// The standard study: `k = 1`, `N = 4, 8, ..., 64`.
    pub fn standard(solution: ManufacturedSolution, coefficient: StandardCoefficient) -> Self {
        Self {
            solution,
            coefficient,
            degree: 1,
            meshes: vec![4, 8, 16, 32, 64],
            newton: NewtonConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.meshes.is_empty() {
            return Err(CliError::Config("mesh list is empty".into()));
        }
        if self.meshes[0] == 0 {
            return Err(CliError::Config("mesh sizes must be positive".into()));
        }
        if self.meshes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(
                "mesh list must be strictly increasing".into(),
            ));
        }
        self.newton
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_ustar: f64,
    pub report: NewtonReport,
    pub seconds: f64,
}

/// Solves and postprocesses on the `n x n` mesh.
pub fn solve_level(config: &StudyConfig, n: usize) -> Result<LevelResult, SdgError> {
    let start = Instant::now();
    let problem = ProblemInstance::standard(config.solution, config.coefficient);
    let mesh = StaggeredMesh::new(&InitialMesh::unit_square(n)?)?;
    let spaces = SdgSpaces::new(mesh, config.degree)?;
    let system = SdgSystem::assemble(&spaces, |x| problem.forcing(x))?;
    let solution = newton_solve(&system, problem.coefficient.as_ref(), &config.newton)?;
    let post = postprocess(&spaces, &solution.u_hat, &solution.g_hat)?;
    Ok(LevelResult {
        n,
        h: 1.0 / n as f64,
        err_u: l2_error_scalar(&spaces, problem.solution.as_ref(), &solution.u_hat),
        err_ustar: post.l2_error(spaces.mesh(), problem.solution.as_ref()),
        report: solution.report,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `log2(e_coarse / e_fine)` for meshes related by `h_fine = h_coarse / 2`,
/// and `log(e_c / e_f) / log(h_c / h_f)` in general.
pub fn observed_order(h_coarse: f64, e_coarse: f64, h_fine: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub err_u: f64,
    pub order_u: Option<f64>,
    pub err_ustar: f64,
    pub order_ustar: Option<f64>,
    pub iterations: usize,
    pub newton: NewtonReport,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyFailure {
    pub n: usize,
    pub message: String,
    pub newton: Option<NewtonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMetadata {
    pub version: String,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_guess: String,
    pub stop_norm: String,
    pub line_search: bool,
    pub seed: u64,
    pub meshes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub solution: String,
    pub coefficient: String,
    pub degree: usize,
    pub rows: Vec<StudyRow>,
    /// Set when a level failed; `rows` then holds the levels before it.
    pub failure: Option<StudyFailure>,
    pub metadata: StudyMetadata,
}

impl StudyReport {
    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs every level in order, stopping at the first failure.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport, CliError> {
    config.validate()?;
    let mut rows: Vec<StudyRow> = Vec::new();
    let mut failure = None;
    for &n in &config.meshes {
        match solve_level(config, n) {
            Ok(level) => {
                let prev = rows.last();
                rows.push(StudyRow {
                    n,
                    h: level.h,
                    err_u: level.err_u,
                    order_u: prev.map(|p| observed_order(p.h, p.err_u, level.h, level.err_u)),
                    err_ustar: level.err_ustar,
                    order_ustar: prev
                        .map(|p| observed_order(p.h, p.err_ustar, level.h, level.err_ustar)),
                    iterations: level.report.iterations,
                    newton: level.report,
                    seconds: level.seconds,
                });
            }
            Err(SdgError::NotConverged(report)) => {
                failure = Some(StudyFailure {
                    n,
                    message: format!(
                        "Newton did not converge in {} iterations",
                        report.iterations
                    ),
                    newton: Some(*report),
                });
                break;
            }
            Err(
                e @ (SdgError::SingularJacobian(_)
                | SdgError::NonFiniteIterate(_)
                | SdgError::NonFinite { .. }),
            ) => {
                failure = Some(StudyFailure {
                    n,
                    message: e.to_string(),
                    newton: None,
                });
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let nc = &config.newton;
    Ok(StudyReport {
        solution: config.solution.to_string(),
        coefficient: config.coefficient.to_string(),
        degree: config.degree,
        rows,
        failure,
        metadata: StudyMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerance: nc.tolerance,
            max_iterations: nc.max_iterations,
            initial_guess: format!("{:?}", nc.initial_guess).to_lowercase(),
            stop_norm: format!("{:?}", nc.stop_norm).to_lowercase(),
            line_search: nc.line_search,
            seed: config.seed,
            meshes: config.meshes.clone(),
        },
    })
}
