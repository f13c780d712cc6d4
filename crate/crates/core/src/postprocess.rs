//! Element-local reconstruction `u* in P^{k+1}(tau)` from `(u_h, G_h)`:
//! `grad u*` is the `L^2` projection of `G_h` onto `grad P^{k+1}(tau)` and
//! `u*` has the same mean as `u_h` on every subtriangle.

use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;

use crate::basis::{OrthonormalBasis, Tabulation};
use crate::mesh::StaggeredMesh;
use crate::problems::{error_quadrature_degree, ExactSolution};
use crate::quadrature::TriangleQuadrature;
use crate::space::SdgSpaces;
use crate::{Point, Real, Result, SdgError};

/// Piecewise `P^{k+1}` field in the orthonormal reference basis.
#[derive(Debug, Clone)]
pub struct PostprocessedSolution<T> {
    basis: OrthonormalBasis<T>,
    /// `coeffs[s]` has `dim P^{k+1}` entries.
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Real> PostprocessedSolution<T> {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &OrthonormalBasis<T> {
        &self.basis
    }

    /// Value on subtriangle `s` at physical point `x`.
    pub fn value_on(&self, mesh: &StaggeredMesh<T>, s: usize, x: Point<T>) -> T {
        crate::linalg::dot(
            &self.coeffs[s],
            &self.basis.eval(mesh.map(s).to_reference(x)),
        )
    }

    /// `int_s u*`. Only the constant basis function `sqrt 2` has a nonzero
    /// mean.
    pub fn integral(&self, mesh: &StaggeredMesh<T>, s: usize) -> T {
        self.coeffs[s][0] * mesh.map(s).det.abs() / T::lit(2.0).sqrt()
    }

    pub fn l2_error(&self, mesh: &StaggeredMesh<T>, exact: &dyn ExactSolution<T>) -> T {
        let q = TriangleQuadrature::<T>::with_degree(error_quadrature_degree(self.degree()));
        let tab = Tabulation::new(&self.basis, &q.points);
        let mut total = T::zero();
        for (s, c) in self.coeffs.iter().enumerate() {
            let map = mesh.map(s);
            let mut acc = T::zero();
            for (i, (p, &w)) in q.points.iter().zip(&q.weights).enumerate() {
                let d = exact.value(map.to_physical(*p)) - crate::linalg::dot(c, tab.values_at(i));
                acc += w * d * d;
            }
            total += acc * map.det.abs();
        }
        total.sqrt()
    }
}

/// Shared read-only data of the local problems.
struct Local<'a, T: Real> {
    spaces: &'a SdgSpaces<T>,
    high: Tabulation<T>,
    u_hat: &'a [T],
    g_hat: &'a [T],
}

impl<T: Real> Local<'_, T> {
    fn solve(&self, s: usize) -> Result<Vec<T>> {
        let spaces = self.spaces;
        let map = spaces.mesh().map(s);
        let jac = map.det.abs();
        let q = spaces.quadrature();
        let low = spaces.tabulation();
        let m = low.dim;
        let n = self.high.dim;
        let g_local = spaces.wh().local_coefficients(s, self.g_hat);
        let u_local = spaces.uh().local_coefficients(s, self.u_hat);

        let mut a = Mat::<T>::zeros(n + 1, n + 1);
        let mut rhs = Mat::<T>::zeros(n + 1, 1);
        for (i, &w) in q.weights.iter().enumerate() {
            let wq = w * jac;
            let phi = low.values_at(i);
            let g = [
                crate::linalg::dot(&g_local[..m], phi),
                crate::linalg::dot(&g_local[m..], phi),
            ];
            let grads: Vec<Point<T>> = self
                .high
                .grads_at(i)
                .iter()
                .map(|d| map.push_gradient(*d))
                .collect();
            for (r, gr) in grads.iter().enumerate() {
                rhs[(r, 0)] += wq * (g[0] * gr[0] + g[1] * gr[1]);
                for (c, gc) in grads.iter().enumerate() {
                    a[(r, c)] += wq * (gr[0] * gc[0] + gr[1] * gc[1]);
                }
            }
        }
        // mean constraint: int phi_a = |det| / sqrt 2 for a = 0, else 0
        let mean = jac / T::lit(2.0).sqrt();
        a[(0, n)] = mean;
        a[(n, 0)] = mean;
        rhs[(n, 0)] = u_local[0] * mean;

        let x = a.partial_piv_lu().solve(&rhs);
        let out: Vec<T> = (0..n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SdgError::BadTriangle(s));
        }
        Ok(out)
    }
}

fn local<'a, T: Real>(
    spaces: &'a SdgSpaces<T>,
    u_hat: &'a [T],
    g_hat: &'a [T],
) -> (Local<'a, T>, OrthonormalBasis<T>) {
    let basis = OrthonormalBasis::new(spaces.degree() + 1);
    let high = Tabulation::new(&basis, &spaces.quadrature().points);
    (
        Local {
            spaces,
            high,
            u_hat,
            g_hat,
        },
        basis,
    )
}

/// Reconstruction with the local problems solved in parallel.
pub fn postprocess<T: Real>(
    spaces: &SdgSpaces<T>,
    u_hat: &[T],
    g_hat: &[T],
) -> Result<PostprocessedSolution<T>> {
    let (problem, basis) = local(spaces, u_hat, g_hat);
    let coeffs = (0..spaces.mesh().num_subtriangles())
        .into_par_iter()
        .map(|s| problem.solve(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(PostprocessedSolution { basis, coeffs })
}

/// The same reconstruction computed on the calling thread.
pub fn postprocess_serial<T: Real>(
    spaces: &SdgSpaces<T>,
    u_hat: &[T],
    g_hat: &[T],
) -> Result<PostprocessedSolution<T>> {
    let (problem, basis) = local(spaces, u_hat, g_hat);
    let coeffs = (0..spaces.mesh().num_subtriangles())
        .map(|s| problem.solve(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(PostprocessedSolution { basis, coeffs })
}

/// `(int_s u*, int_s u_h)` for every subtriangle.
pub fn element_means<T: Real>(
    spaces: &SdgSpaces<T>,
    post: &PostprocessedSolution<T>,
    u_hat: &[T],
) -> Vec<(T, T)> {
    let mesh = spaces.mesh();
    (0..mesh.num_subtriangles())
        .map(|s| {
            let u0 = spaces.uh().local_coefficients(s, u_hat)[0];
            (
                post.integral(mesh, s),
                u0 * mesh.map(s).det.abs() / T::lit(2.0).sqrt(),
            )
        })
        .collect()
}
