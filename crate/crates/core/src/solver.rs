//! Newton's method on the reduced system in `(G, u)`:
//!
//! ```text
//! H(G, u) = ( M G - B^T u,  B M^{-1} F(G) - f )
//! J(G, u) = [ M              -B^T ]
//!           [ B M^{-1} F'(G)   0  ]
//! ```
//!
//! Each step factorizes the full block Jacobian with a sparse LU. Its
//! sparsity pattern never changes, so the pattern and the symbolic
//! factorization are computed once per solve.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_flux, assemble_flux_jacobian, SdgSystem};
use crate::linalg::{norm2, BlockDiagonal};
use crate::problems::{l2_norm_scalar, Coefficient};
use crate::space::SdgSpaces;
use crate::{Real, Result, SdgError};

/// Norm of `u^{n+1} - u^n` used by the stopping test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopNorm {
    /// `L^2(Omega)` norm of the difference function.
    #[default]
    L2,
    /// Euclidean norm of the coefficient difference.
    Coeff,
}

impl std::str::FromStr for StopNorm {
    type Err = SdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Self::L2),
            "coeff" => Ok(Self::Coeff),
            other => Err(SdgError::InvalidConfig(format!(
                "unknown stop norm `{other}` (expected l2 or coeff)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialGuess {
    /// Solve the linear problem with `rho` frozen at `rho(0)`, or at 1 when
    /// `rho(0) = 0`.
    #[default]
    Linear,
    Zero,
}

impl std::str::FromStr for InitialGuess {
    type Err = SdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "zero" => Ok(Self::Zero),
            other => Err(SdgError::InvalidConfig(format!(
                "unknown initial guess `{other}` (expected linear or zero)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig<T> {
    /// Stop once the successive error drops below this.
    pub tolerance: T,
    pub max_iterations: usize,
    pub initial_guess: InitialGuess,
    /// `|G|` is replaced by `max(|G|, guard)` where `rho` needs `G / |G|`.
    pub guard: T,
    pub stop_norm: StopNorm,
    /// Halve the step until the residual decreases (at most 30 times).
    pub line_search: bool,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-10),
            max_iterations: 100,
            initial_guess: InitialGuess::Linear,
            guard: T::lit(1e-14),
            stop_norm: StopNorm::L2,
            line_search: false,
        }
    }
}

impl<T: Real> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) {
            return Err(SdgError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(SdgError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.guard >= T::zero()) {
            return Err(SdgError::InvalidConfig("guard must be non-negative".into()));
        }
        Ok(())
    }
}

/// Convergence history. Entry `n` of each history belongs to Newton step
/// `n + 1`; the residual is the one at the start of the step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub converged: bool,
    pub successive_errors: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// `||H||` at the returned iterate.
    pub final_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SdgSolution<T> {
    pub u_hat: Vec<T>,
    pub g_hat: Vec<T>,
    /// Flux coefficients `M^{-1} F(G)`.
    pub flux_hat: Vec<T>,
    pub report: NewtonReport,
}

/// `H(x)` for `x = (G, u)`.
pub fn residual<T: Real>(
    system: &SdgSystem<'_, T>,
    rho: &dyn Coefficient<T>,
    x: &[T],
) -> Result<Vec<T>> {
    let nw = system.num_w();
    let (g, u) = x.split_at(nw);
    let flux = assemble_flux(system.spaces(), g, rho)?;
    let mg = system.mass().apply(g);
    let btu = system.b().apply_transpose(u);
    let bf = system.b().apply(&system.solve_mass(&flux));
    let mut h: Vec<T> = mg.iter().zip(&btu).map(|(&a, &b)| a - b).collect();
    h.extend(bf.iter().zip(system.load()).map(|(&a, &b)| a - b));
    Ok(h)
}

/// `J(x) d`, computed blockwise without forming the sparse matrix.
pub fn jacobian_action<T: Real>(
    system: &SdgSystem<'_, T>,
    rho: &dyn Coefficient<T>,
    x: &[T],
    d: &[T],
    guard: T,
) -> Result<Vec<T>> {
    let nw = system.num_w();
    let (dg, du) = d.split_at(nw);
    let fp = assemble_flux_jacobian(system.spaces(), &x[..nw], rho, guard)?;
    let mg = system.mass().apply(dg);
    let btu = system.b().apply_transpose(du);
    let kdg = system.solve_mass(&fp.apply(dg));
    let mut out: Vec<T> = mg.iter().zip(&btu).map(|(&a, &b)| a - b).collect();
    out.extend(system.b().apply(&kdg));
    Ok(out)
}

/// Sparse Jacobian with a fixed pattern and a reusable symbolic LU.
struct JacobianFactory<T: Real> {
    dim: usize,
    entries: usize,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: SymbolicLu<usize>,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> JacobianFactory<T> {
    fn new(system: &SdgSystem<'_, T>) -> Result<Self> {
        let mut pairs = Vec::new();
        visit_entries(system, system.mass(), |i, j, _| pairs.push(Pair::new(i, j)));
        let dim = system.num_w() + system.num_u();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(dim, dim, &pairs)
            .map_err(|e| SdgError::Sparse(format!("{e:?}")))?;
        let lu = SymbolicLu::try_new(symbolic.as_ref())
            .map_err(|e| SdgError::Sparse(format!("{e:?}")))?;
        Ok(Self {
            dim,
            entries: pairs.len(),
            symbolic,
            argsort,
            lu,
            _marker: std::marker::PhantomData,
        })
    }

    /// Solves `J x = rhs` where `J` has `M^{-1} F'` given by `k`.
    fn solve(
        &self,
        system: &SdgSystem<'_, T>,
        k: &BlockDiagonal<T>,
        rhs: &[T],
        iteration: usize,
    ) -> Result<Vec<T>> {
        let mut values = Vec::with_capacity(self.entries);
        visit_entries(system, k, |_, _, v| values.push(v));
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, &values)
            .map_err(|e| SdgError::Sparse(format!("{e:?}")))?;
        let lu = Lu::try_new_with_symbolic(self.lu.clone(), mat.as_ref())
            .map_err(|_| SdgError::SingularJacobian(iteration))?;
        let mut x = Mat::from_fn(self.dim, 1, |i, _| rhs[i]);
        lu.solve_in_place(x.as_mut());
        let x: Vec<T> = (0..self.dim).map(|i| x[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SdgError::SingularJacobian(iteration));
        }
        Ok(x)
    }
}

/// Calls `f(row, col, value)` for every stored Jacobian entry, always in the
/// same order. `k` holds the blocks of `M^{-1} F'`.
fn visit_entries<T: Real>(
    system: &SdgSystem<'_, T>,
    k: &BlockDiagonal<T>,
    mut f: impl FnMut(usize, usize, T),
) {
    let nw = system.num_w();
    let mass = system.mass();
    for t in 0..mass.num_blocks() {
        let o = mass.offset(t);
        let blk = mass.block(t);
        for j in 0..blk.ncols() {
            for i in 0..blk.nrows() {
                f(o + i, o + j, blk[(i, j)]);
            }
        }
    }
    let b = system.b();
    let wh = system.spaces().wh();
    for s in 0..b.num_blocks() {
        let blk = b.block(s);
        let (r, c) = (b.row_offset(s), b.col_offset(s));
        for j in 0..blk.ncols() {
            for i in 0..blk.nrows() {
                f(c + j, nw + r + i, -blk[(i, j)]);
            }
        }
        let t = wh.macro_of(s);
        let bk = blk * k.block(t);
        for j in 0..bk.ncols() {
            for i in 0..bk.nrows() {
                f(nw + r + i, c + j, bk[(i, j)]);
            }
        }
    }
}

/// `M^{-1} A` blockwise.
fn mass_solve_blocks<T: Real>(system: &SdgSystem<'_, T>, a: &BlockDiagonal<T>) -> BlockDiagonal<T> {
    let factor = system.mass_factor();
    BlockDiagonal::new(
        (0..a.num_blocks())
            .map(|t| factor.solve_block(t, a.block(t)))
            .collect(),
    )
}

/// `||u_next - u_prev||` in the selected norm.
pub fn successive_error<T: Real>(
    spaces: &SdgSpaces<T>,
    u_prev: &[T],
    u_next: &[T],
    norm: StopNorm,
) -> T {
    let d: Vec<T> = u_next.iter().zip(u_prev).map(|(&a, &b)| a - b).collect();
    match norm {
        StopNorm::L2 => l2_norm_scalar(spaces, &d),
        StopNorm::Coeff => norm2(&d),
    }
}

/// Newton solver bound to one assembled system.
pub struct NewtonSolver<'s, 'a, T: Real> {
    system: &'s SdgSystem<'a, T>,
    rho: &'s dyn Coefficient<T>,
    config: NewtonConfig<T>,
    factory: JacobianFactory<T>,
}

impl<'s, 'a, T: Real> NewtonSolver<'s, 'a, T> {
    pub fn new(
        system: &'s SdgSystem<'a, T>,
        rho: &'s dyn Coefficient<T>,
        config: NewtonConfig<T>,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            factory: JacobianFactory::new(system)?,
            system,
            rho,
            config,
        })
    }

    /// Starting iterate per the configured strategy.
    pub fn initial_guess(&self) -> Result<Vec<T>> {
        let n = self.system.num_w() + self.system.num_u();
        match self.config.initial_guess {
            InitialGuess::Zero => Ok(vec![T::zero(); n]),
            InitialGuess::Linear => {
                let r0 = self.rho.rho_at_zero();
                let c = if r0 > T::zero() && r0.is_finite() {
                    r0
                } else {
                    T::one()
                };
                let k = BlockDiagonal::new(
                    self.system
                        .mass()
                        .blocks()
                        .iter()
                        .map(|b| Mat::<T>::identity(b.nrows(), b.ncols()) * faer::Scale(c))
                        .collect(),
                );
                let mut rhs = vec![T::zero(); self.system.num_w()];
                rhs.extend_from_slice(self.system.load());
                self.factory.solve(self.system, &k, &rhs, 0)
            }
        }
    }

    /// One Newton update `x - J(x)^{-1} H(x)`; also returns `||H(x)||`.
    pub fn step(&self, x: &[T], iteration: usize) -> Result<(Vec<T>, T)> {
        let nw = self.system.num_w();
        let h = residual(self.system, self.rho, x)?;
        let fp =
            assemble_flux_jacobian(self.system.spaces(), &x[..nw], self.rho, self.config.guard)?;
        let k = mass_solve_blocks(self.system, &fp);
        let delta = self.factory.solve(self.system, &k, &h, iteration)?;
        let hn = norm2(&h);
        let mut next: Vec<T> = x.iter().zip(&delta).map(|(&a, &d)| a - d).collect();
        if self.config.line_search {
            let mut lambda = T::one();
            for _ in 0..30 {
                match residual(self.system, self.rho, &next) {
                    Ok(r) if norm2(&r) < hn => break,
                    _ => {}
                }
                lambda *= T::lit(0.5);
                next = x
                    .iter()
                    .zip(&delta)
                    .map(|(&a, &d)| a - lambda * d)
                    .collect();
            }
        }
        Ok((next, hn))
    }

    pub fn solve(&self) -> Result<SdgSolution<T>> {
        let x = self.initial_guess()?;
        self.solve_from(x)
    }

    pub fn solve_from(&self, mut x: Vec<T>) -> Result<SdgSolution<T>> {
        let nw = self.system.num_w();
        let spaces = self.system.spaces();
        let mut report = NewtonReport::default();
        for it in 1..=self.config.max_iterations {
            let (next, hn) = self.step(&x, it)?;
            if next.iter().any(|v| !v.is_finite()) {
                return Err(SdgError::NonFiniteIterate(it));
            }
            let err = successive_error(spaces, &x[nw..], &next[nw..], self.config.stop_norm);
            x = next;
            report.iterations = it;
            report.successive_errors.push(err.to_f64_lossy());
            report.residual_norms.push(hn.to_f64_lossy());
            if err < self.config.tolerance {
                report.converged = true;
                break;
            }
        }
        report.final_residual = norm2(&residual(self.system, self.rho, &x)?).to_f64_lossy();
        if !report.converged {
            return Err(SdgError::NotConverged(Box::new(report)));
        }
        let u_hat = x.split_off(nw);
        let flux = assemble_flux(spaces, &x, self.rho)?;
        Ok(SdgSolution {
            flux_hat: self.system.solve_mass(&flux),
            u_hat,
            g_hat: x,
            report,
        })
    }
}

/// Solves the discrete problem with Newton's method.
pub fn newton_solve<T: Real>(
    system: &SdgSystem<'_, T>,
    rho: &dyn Coefficient<T>,
    config: &NewtonConfig<T>,
) -> Result<SdgSolution<T>> {
    NewtonSolver::new(system, rho, *config)?.solve()
}

/// A single Newton update from `x`.
pub fn newton_step<T: Real>(
    system: &SdgSystem<'_, T>,
    rho: &dyn Coefficient<T>,
    config: &NewtonConfig<T>,
    x: &[T],
) -> Result<Vec<T>> {
    Ok(NewtonSolver::new(system, rho, *config)?.step(x, 1)?.0)
}
