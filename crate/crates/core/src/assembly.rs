//! Assembly of the discrete operators: the `W^h` mass matrix, the coupling
//! matrix `B`, the load vector, and the nonlinear flux vector `F(G)` with its
//! derivative.
//!
//! All loops run in parallel over elements or macros and collect per-item
//! results in index order, so assembled values do not depend on the thread
//! count.

use faer::Mat;
use rayon::prelude::*;

use crate::linalg::{BlockCholesky, BlockDiagonal, ElementBlocks};
use crate::problems::Coefficient;
use crate::space::{DofMap, SdgSpaces};
use crate::{Point, Real, Result, SdgError};

/// Local-to-macro coefficient matrix of subtriangle `s` (`rows x count`).
pub(crate) fn transform<T: Real>(map: &DofMap<T>, s: usize) -> Mat<T> {
    let count = map.element_dofs(s).len();
    let c = map.element_coeffs(s);
    let rows = map.kind().components() * crate::basis::dimension(map.degree());
    Mat::from_fn(rows, count, |r, j| c[r * count + j])
}

fn non_finite<T: Real>(what: &'static str, element: usize, x: Point<T>) -> SdgError {
    SdgError::NonFinite {
        what,
        element,
        x: x[0].to_f64_lossy(),
        y: x[1].to_f64_lossy(),
    }
}

/// `M_ij = int psi_j . psi_i`, one dense block per first-type macro.
///
/// The reference basis is orthonormal, so the local mass matrix of a
/// subtriangle is `|det J| I` and no quadrature is needed.
pub fn assemble_mass<T: Real>(spaces: &SdgSpaces<T>) -> BlockDiagonal<T> {
    let wh = spaces.wh();
    let blocks = wh
        .macros()
        .par_iter()
        .map(|mac| {
            let mut block = Mat::<T>::zeros(mac.count, mac.count);
            for &s in &mac.elements {
                let c = transform(wh, s);
                let scale = spaces.mesh().map(s).det.abs();
                block += (c.transpose() * &c) * faer::Scale(scale);
            }
            block
        })
        .collect();
    BlockDiagonal::new(blocks)
}

/// Which discrete form to assemble `B` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CouplingForm {
    /// `int V . grad v - sum_{dual} int V.n [v]`
    Gradient,
    /// `-int v div V + sum_{interior primal} int v [V.n]`
    Divergence,
}

/// `B_ij = b_h(psi_j, phi_i)`, one dense block per subtriangle.
pub fn assemble_b<T: Real>(spaces: &SdgSpaces<T>) -> ElementBlocks<T> {
    assemble_coupling(spaces, CouplingForm::Gradient)
}

/// The same matrix assembled from the adjoint form `b_h^*(phi_i, psi_j)`.
pub fn assemble_bstar<T: Real>(spaces: &SdgSpaces<T>) -> ElementBlocks<T> {
    assemble_coupling(spaces, CouplingForm::Divergence)
}

fn assemble_coupling<T: Real>(spaces: &SdgSpaces<T>, form: CouplingForm) -> ElementBlocks<T> {
    let mesh = spaces.mesh();
    let (uh, wh) = (spaces.uh(), spaces.wh());
    let m = spaces.basis().dim();
    let q = spaces.quadrature();
    let tab = spaces.tabulation();
    let rule = spaces.edge_rule();

    let blocks: Vec<Mat<T>> = (0..mesh.num_subtriangles())
        .into_par_iter()
        .map(|s| {
            let map = mesh.map(s);
            let jac = map.det.abs();
            // local[a, c*m + b] pairs scalar basis a with vector basis e_c phi_b
            let mut local = Mat::<T>::zeros(m, 2 * m);
            for (i, &w) in q.weights.iter().enumerate() {
                let wq = w * jac;
                let phi = tab.values_at(i);
                let grads: Vec<Point<T>> = tab
                    .grads_at(i)
                    .iter()
                    .map(|g| map.push_gradient(*g))
                    .collect();
                for a in 0..m {
                    for b in 0..m {
                        for c in 0..2 {
                            let v = match form {
                                CouplingForm::Gradient => grads[a][c] * phi[b],
                                CouplingForm::Divergence => -phi[a] * grads[b][c],
                            };
                            local[(a, c * m + b)] += wq * v;
                        }
                    }
                }
            }

            let sub = &mesh.subtriangles()[s];
            let edges: &[usize] = match form {
                CouplingForm::Gradient => &sub.edges[..2],
                CouplingForm::Divergence => &sub.edges[2..],
            };
            for &e in edges {
                let edge = mesh.edge(e);
                if !edge.is_interior() {
                    continue;
                }
                let first = edge.adjacent.0 == s;
                let sign = match (form, first) {
                    (CouplingForm::Gradient, true) | (CouplingForm::Divergence, false) => -T::one(),
                    _ => T::one(),
                };
                let n = edge.normal;
                for (x, &w) in spaces.edge_points(e).into_iter().zip(&rule.weights) {
                    let wq = sign * w * edge.length;
                    let phi = spaces.basis_at(s, x);
                    for a in 0..m {
                        for b in 0..m {
                            let v = wq * phi[a] * phi[b];
                            local[(a, b)] += v * n[0];
                            local[(a, m + b)] += v * n[1];
                        }
                    }
                }
            }

            let cu = transform(uh, s);
            let cw = transform(wh, s);
            cu.transpose() * local * cw
        })
        .collect();

    let rows = (0..mesh.num_subtriangles())
        .map(|s| uh.element_dofs(s).start)
        .collect();
    let cols = (0..mesh.num_subtriangles())
        .map(|s| wh.element_dofs(s).start)
        .collect();
    ElementBlocks::new(uh.num_dofs(), wh.num_dofs(), rows, cols, blocks)
}

/// `f_i = int f phi_i`.
pub fn assemble_load<T: Real>(
    spaces: &SdgSpaces<T>,
    f: impl Fn(Point<T>) -> T + Sync,
) -> Result<Vec<T>> {
    let mesh = spaces.mesh();
    let uh = spaces.uh();
    let q = spaces.quadrature();
    let tab = spaces.tabulation();
    let m = spaces.basis().dim();
    let locals = (0..mesh.num_subtriangles())
        .into_par_iter()
        .map(|s| {
            let map = mesh.map(s);
            let mut local = Mat::<T>::zeros(m, 1);
            for (i, (p, &w)) in q.points.iter().zip(&q.weights).enumerate() {
                let x = map.to_physical(*p);
                let fx = f(x);
                if !fx.is_finite() {
                    return Err(non_finite("forcing", s, x));
                }
                let wq = w * map.det.abs() * fx;
                for (a, &phi) in tab.values_at(i).iter().enumerate() {
                    local[(a, 0)] += wq * phi;
                }
            }
            Ok(transform(uh, s).transpose() * local)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![T::zero(); uh.num_dofs()];
    for (s, v) in locals.iter().enumerate() {
        for (k, i) in uh.element_dofs(s).enumerate() {
            out[i] += v[(k, 0)];
        }
    }
    Ok(out)
}

/// Per-element quadrature-point values of a `W^h` field: `(x, G, weight)`.
fn field_samples<'a, T: Real>(
    spaces: &'a SdgSpaces<T>,
    s: usize,
    local: &[T],
) -> impl Iterator<Item = (Point<T>, Point<T>, T)> + 'a {
    let map = *spaces.mesh().map(s);
    let m = spaces.basis().dim();
    let q = spaces.quadrature();
    let tab = spaces.tabulation();
    let (gx, gy) = (local[..m].to_vec(), local[m..].to_vec());
    q.points
        .iter()
        .zip(&q.weights)
        .enumerate()
        .map(move |(i, (p, &w))| {
            let phi = tab.values_at(i);
            let g = [crate::linalg::dot(&gx, phi), crate::linalg::dot(&gy, phi)];
            (map.to_physical(*p), g, w * map.det.abs())
        })
}

/// `F(G)_i = int rho(G_h) G_h . psi_i`, blocked like `M`.
pub fn assemble_flux<T: Real>(
    spaces: &SdgSpaces<T>,
    g_hat: &[T],
    rho: &dyn Coefficient<T>,
) -> Result<Vec<T>> {
    let wh = spaces.wh();
    let m = spaces.basis().dim();
    let tab = spaces.tabulation();
    let blocks = wh
        .macros()
        .par_iter()
        .map(|mac| {
            let mut block = Mat::<T>::zeros(mac.count, 1);
            for &s in &mac.elements {
                let lc = wh.local_coefficients(s, g_hat);
                let mut local = Mat::<T>::zeros(2 * m, 1);
                for (i, (x, g, wq)) in field_samples(spaces, s, &lc).enumerate() {
                    let flux = rho.flux(g);
                    if !(flux[0].is_finite() && flux[1].is_finite()) {
                        return Err(non_finite("flux", s, x));
                    }
                    for (a, &phi) in tab.values_at(i).iter().enumerate() {
                        local[(a, 0)] += wq * flux[0] * phi;
                        local[(m + a, 0)] += wq * flux[1] * phi;
                    }
                }
                block += transform(wh, s).transpose() * local;
            }
            Ok(block)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(wh.num_dofs());
    for b in &blocks {
        out.extend((0..b.nrows()).map(|i| b[(i, 0)]));
    }
    Ok(out)
}

/// `F'(G)_ij = int psi_i^T (rho(G_h) I + G_h grad rho(G_h)^T) psi_j`.
pub fn assemble_flux_jacobian<T: Real>(
    spaces: &SdgSpaces<T>,
    g_hat: &[T],
    rho: &dyn Coefficient<T>,
    guard: T,
) -> Result<BlockDiagonal<T>> {
    let wh = spaces.wh();
    let m = spaces.basis().dim();
    let tab = spaces.tabulation();
    let blocks = wh
        .macros()
        .par_iter()
        .map(|mac| {
            let mut block = Mat::<T>::zeros(mac.count, mac.count);
            for &s in &mac.elements {
                let lc = wh.local_coefficients(s, g_hat);
                let mut local = Mat::<T>::zeros(2 * m, 2 * m);
                for (i, (x, g, wq)) in field_samples(spaces, s, &lc).enumerate() {
                    let a = rho.flux_jacobian(g, guard);
                    if a.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(non_finite("flux derivative", s, x));
                    }
                    let phi = tab.values_at(i);
                    for p in 0..m {
                        for r in 0..m {
                            let pp = wq * phi[p] * phi[r];
                            for c in 0..2 {
                                for d in 0..2 {
                                    local[(c * m + p, d * m + r)] += pp * a[c][d];
                                }
                            }
                        }
                    }
                }
                let c = transform(wh, s);
                block += c.transpose() * local * &c;
            }
            Ok(block)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockDiagonal::new(blocks))
}

/// The assembled linear parts of the discrete problem.
#[derive(Debug)]
pub struct SdgSystem<'a, T: Real> {
    spaces: &'a SdgSpaces<T>,
    mass: BlockDiagonal<T>,
    mass_factor: BlockCholesky<T>,
    b: ElementBlocks<T>,
    load: Vec<T>,
}

impl<'a, T: Real> SdgSystem<'a, T> {
    pub fn assemble(spaces: &'a SdgSpaces<T>, f: impl Fn(Point<T>) -> T + Sync) -> Result<Self> {
        let mass = assemble_mass(spaces);
        let mass_factor = mass.cholesky()?;
        Ok(Self {
            spaces,
            mass_factor,
            mass,
            b: assemble_b(spaces),
            load: assemble_load(spaces, f)?,
        })
    }

    pub fn spaces(&self) -> &'a SdgSpaces<T> {
        self.spaces
    }

    pub fn mass(&self) -> &BlockDiagonal<T> {
        &self.mass
    }

    pub fn mass_factor(&self) -> &BlockCholesky<T> {
        &self.mass_factor
    }

    pub fn b(&self) -> &ElementBlocks<T> {
        &self.b
    }

    pub fn load(&self) -> &[T] {
        &self.load
    }

    pub fn num_u(&self) -> usize {
        self.b.nrows()
    }

    pub fn num_w(&self) -> usize {
        self.b.ncols()
    }

    /// `M^{-1} x`
    pub fn solve_mass(&self, x: &[T]) -> Vec<T> {
        self.mass_factor.solve(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{InitialMesh, StaggeredMesh};
    use crate::problems::StandardCoefficient;

    fn spaces(n: usize, k: usize) -> SdgSpaces<f64> {
        let mesh = StaggeredMesh::new(&InitialMesh::unit_square(n).unwrap()).unwrap();
        SdgSpaces::new(mesh, k).unwrap()
    }

    #[test]
    fn adjoint_identity_small() {
        for k in 0..=2 {
            let s = spaces(2, k);
            let diff = assemble_b(&s).max_abs_diff(&assemble_bstar(&s));
            assert!(diff < 1e-12, "k={k}: {diff}");
        }
    }

    #[test]
    fn unit_coefficient_flux_is_mass_action() {
        let s = spaces(2, 1);
        let m = assemble_mass(&s);
        let g: Vec<f64> = (0..s.wh().num_dofs())
            .map(|i| (i as f64 * 0.37).sin())
            .collect();
        let f = assemble_flux(&s, &g, &StandardCoefficient::Constant(1.0)).unwrap();
        for (a, b) in f.iter().zip(m.apply(&g)) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn mass_is_symmetric() {
        let s = spaces(2, 2);
        assert!(assemble_mass(&s).asymmetry() < 1e-14);
    }

    #[test]
    fn zero_forcing_gives_zero_load() {
        let s = spaces(2, 1);
        assert!(assemble_load(&s, |_| 0.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(matches!(
            assemble_load(&s, |_| f64::NAN),
            Err(SdgError::NonFinite {
                what: "forcing",
                ..
            })
        ));
    }
}
