//! The discrete spaces `U^h` and `W^h`.
//!
//! Neither space is given an explicit nodal basis. On each macro element
//! the broken polynomial space (`P^k` per subtriangle) is restricted by
//! sampling its continuity constraints at Gauss points of the constrained
//! edges; the orthonormal null space of that small constraint matrix is the
//! local block of global degrees of freedom. `U^h` is built per second-type
//! macro `R(e)` (continuity across `e`, or vanishing trace on a boundary
//! `e`), `W^h` per first-type macro `S(nu)` (normal continuity across its
//! three dual edges). Both constraint families live entirely inside one
//! macro, so the macros are independent.

use std::ops::Range;

use faer::Mat;
use rayon::prelude::*;

use crate::basis::{dimension, OrthonormalBasis, Tabulation};
use crate::error::MacroKind;
use crate::linalg::null_space;
use crate::mesh::{dot, StaggeredMesh};
use crate::quadrature::{GaussLegendre, TriangleQuadrature};
use crate::{Point, Real, Result, SdgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Vector,
}

impl FieldKind {
    pub fn components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MacroDofs {
    pub first: usize,
    pub count: usize,
    pub elements: Vec<usize>,
}

impl MacroDofs {
    pub fn range(&self) -> Range<usize> {
        self.first..self.first + self.count
    }
}

/// Local-to-global table: on subtriangle `s` the `j`-th global function of
/// its macro has local polynomial coefficients `coeffs(s)[r * count + j]`,
/// with `r` running over components (x block, then y block) times the
/// orthonormal reference basis.
#[derive(Debug, Clone)]
pub struct DofMap<T> {
    kind: FieldKind,
    degree: usize,
    local_dim: usize,
    num_dofs: usize,
    macros: Vec<MacroDofs>,
    element_macro: Vec<usize>,
    element_coeffs: Vec<Vec<T>>,
}

impl<T: Real> DofMap<T> {
    /// Assembles the global numbering from per-macro null-space bases;
    /// `blocks[i]` has one row per local polynomial coefficient of the
    /// macro's elements, in element order.
    fn from_blocks(
        kind: FieldKind,
        degree: usize,
        num_elements: usize,
        element_lists: Vec<Vec<usize>>,
        blocks: Vec<Mat<T>>,
    ) -> Self {
        let local_dim = dimension(degree);
        let rows_per_element = kind.components() * local_dim;
        let mut macros = Vec::with_capacity(blocks.len());
        let mut element_macro = vec![usize::MAX; num_elements];
        let mut element_coeffs = vec![Vec::new(); num_elements];
        let mut next = 0;
        for (i, (elements, z)) in element_lists.into_iter().zip(blocks).enumerate() {
            let count = z.ncols();
            for (slot, &s) in elements.iter().enumerate() {
                element_macro[s] = i;
                let mut c = Vec::with_capacity(rows_per_element * count);
                for r in 0..rows_per_element {
                    for j in 0..count {
                        c.push(z[(slot * rows_per_element + r, j)]);
                    }
                }
                element_coeffs[s] = c;
            }
            macros.push(MacroDofs {
                first: next,
                count,
                elements,
            });
            next += count;
        }
        Self {
            kind,
            degree,
            local_dim,
            num_dofs: next,
            macros,
            element_macro,
            element_coeffs,
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn macros(&self) -> &[MacroDofs] {
        &self.macros
    }

    pub fn macro_of(&self, s: usize) -> usize {
        self.element_macro[s]
    }

    /// Global dofs with support on subtriangle `s`.
    pub fn element_dofs(&self, s: usize) -> Range<usize> {
        self.macros[self.element_macro[s]].range()
    }

    pub fn element_coeffs(&self, s: usize) -> &[T] {
        &self.element_coeffs[s]
    }

    /// Local polynomial coefficients on `s` of the field with global
    /// coefficients `global`.
    pub fn local_coefficients(&self, s: usize, global: &[T]) -> Vec<T> {
        let range = self.element_dofs(s);
        let rows = self.kind.components() * self.local_dim;
        let count = range.len();
        if count == 0 {
            return vec![T::zero(); rows];
        }
        let g = &global[range];
        self.element_coeffs[s]
            .chunks_exact(count)
            .map(|row| crate::linalg::dot(row, g))
            .collect()
    }

    /// Values on `s` of every global scalar function of its macro, given the
    /// reference basis values `phi`.
    pub fn scalar_values(&self, s: usize, phi: &[T], out: &mut Vec<T>) {
        debug_assert_eq!(self.kind, FieldKind::Scalar);
        let count = self.element_dofs(s).len();
        let c = &self.element_coeffs[s];
        out.clear();
        out.resize(count, T::zero());
        for (l, &p) in phi.iter().enumerate() {
            let row = &c[l * count..(l + 1) * count];
            for (o, &z) in out.iter_mut().zip(row) {
                *o += z * p;
            }
        }
    }

    /// Physical gradients on `s` of every global scalar function of its
    /// macro, given physical gradients of the local basis.
    pub fn scalar_gradients(&self, s: usize, grad_phi: &[Point<T>], out: &mut Vec<Point<T>>) {
        debug_assert_eq!(self.kind, FieldKind::Scalar);
        let count = self.element_dofs(s).len();
        let c = &self.element_coeffs[s];
        out.clear();
        out.resize(count, [T::zero(); 2]);
        for (l, g) in grad_phi.iter().enumerate() {
            let row = &c[l * count..(l + 1) * count];
            for (o, &z) in out.iter_mut().zip(row) {
                o[0] += z * g[0];
                o[1] += z * g[1];
            }
        }
    }

    pub fn vector_values(&self, s: usize, phi: &[T], out: &mut Vec<Point<T>>) {
        debug_assert_eq!(self.kind, FieldKind::Vector);
        let count = self.element_dofs(s).len();
        let m = self.local_dim;
        let c = &self.element_coeffs[s];
        out.clear();
        out.resize(count, [T::zero(); 2]);
        for (l, &p) in phi.iter().enumerate() {
            let rx = &c[l * count..(l + 1) * count];
            let ry = &c[(m + l) * count..(m + l + 1) * count];
            for ((o, &zx), &zy) in out.iter_mut().zip(rx).zip(ry) {
                o[0] += zx * p;
                o[1] += zy * p;
            }
        }
    }

    pub fn vector_divergence(&self, s: usize, grad_phi: &[Point<T>], out: &mut Vec<T>) {
        debug_assert_eq!(self.kind, FieldKind::Vector);
        let count = self.element_dofs(s).len();
        let m = self.local_dim;
        let c = &self.element_coeffs[s];
        out.clear();
        out.resize(count, T::zero());
        for (l, g) in grad_phi.iter().enumerate() {
            let rx = &c[l * count..(l + 1) * count];
            let ry = &c[(m + l) * count..(m + l + 1) * count];
            for ((o, &zx), &zy) in out.iter_mut().zip(rx).zip(ry) {
                *o = *o + zx * g[0] + zy * g[1];
            }
        }
    }

    /// The same space with every macro block re-expressed in another basis:
    /// new global function `j` of macro `i` is `sum_k old_k * q(i)[(k, j)]`.
    /// `q(i)` must be square and invertible.
    pub fn with_macro_transform(&self, q: impl Fn(usize, usize) -> Mat<T>) -> Self {
        let mut out = self.clone();
        for (i, mac) in self.macros.iter().enumerate() {
            let qi = q(i, mac.count);
            assert_eq!((qi.nrows(), qi.ncols()), (mac.count, mac.count));
            for &s in &mac.elements {
                let old = &self.element_coeffs[s];
                let rows = old.len() / mac.count.max(1);
                let mut new = vec![T::zero(); old.len()];
                for r in 0..rows {
                    for j in 0..mac.count {
                        let mut acc = T::zero();
                        for k in 0..mac.count {
                            acc += old[r * mac.count + k] * qi[(k, j)];
                        }
                        new[r * mac.count + j] = acc;
                    }
                }
                out.element_coeffs[s] = new;
            }
        }
        out
    }
}

/// Knobs of the discretization that are not dictated by the method.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpaceOptions {
    /// Exactness degree of the volume rule; `None` means `2k + 4`.
    pub quadrature_degree: Option<usize>,
    /// Gauss points per edge for constraints and edge integrals; `None`
    /// means `k + 2`.
    pub edge_points: Option<usize>,
}

/// Mesh, degree, both dof maps and the shared reference tables.
#[derive(Debug, Clone)]
pub struct SdgSpaces<T> {
    mesh: StaggeredMesh<T>,
    degree: usize,
    basis: OrthonormalBasis<T>,
    uh: DofMap<T>,
    wh: DofMap<T>,
    quadrature: TriangleQuadrature<T>,
    tabulation: Tabulation<T>,
    edge_rule: GaussLegendre<T>,
}

impl<T: Real> SdgSpaces<T> {
    pub fn new(mesh: StaggeredMesh<T>, degree: usize) -> Result<Self> {
        Self::with_options(mesh, degree, SpaceOptions::default())
    }

    pub fn with_options(
        mesh: StaggeredMesh<T>,
        degree: usize,
        options: SpaceOptions,
    ) -> Result<Self> {
        let basis = OrthonormalBasis::new(degree);
        let edge_rule = GaussLegendre::new(options.edge_points.unwrap_or(degree + 2));
        let uh = build_uh(&mesh, &basis, &edge_rule)?;
        let wh = build_wh(&mesh, &basis, &edge_rule)?;
        let quadrature =
            TriangleQuadrature::with_degree(options.quadrature_degree.unwrap_or(2 * degree + 4));
        let tabulation = Tabulation::new(&basis, &quadrature.points);
        Ok(Self {
            mesh,
            degree,
            basis,
            uh,
            wh,
            quadrature,
            tabulation,
            edge_rule,
        })
    }

    pub fn mesh(&self) -> &StaggeredMesh<T> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &OrthonormalBasis<T> {
        &self.basis
    }

    pub fn uh(&self) -> &DofMap<T> {
        &self.uh
    }

    pub fn wh(&self) -> &DofMap<T> {
        &self.wh
    }

    pub fn quadrature(&self) -> &TriangleQuadrature<T> {
        &self.quadrature
    }

    pub fn tabulation(&self) -> &Tabulation<T> {
        &self.tabulation
    }

    pub fn edge_rule(&self) -> &GaussLegendre<T> {
        &self.edge_rule
    }

    /// Replaces the dof maps, e.g. by a re-parametrised version of the same
    /// spaces.
    pub fn with_dofmaps(&self, uh: DofMap<T>, wh: DofMap<T>) -> Self {
        assert_eq!(uh.kind(), FieldKind::Scalar);
        assert_eq!(wh.kind(), FieldKind::Vector);
        Self {
            uh,
            wh,
            ..self.clone()
        }
    }

    /// Physical points of the edge rule on edge `e`.
    pub fn edge_points(&self, e: usize) -> Vec<Point<T>> {
        edge_points(&self.mesh, e, &self.edge_rule)
    }

    /// Reference basis values of subtriangle `s` at physical point `x`.
    pub fn basis_at(&self, s: usize, x: Point<T>) -> Vec<T> {
        self.basis.eval(self.mesh.map(s).to_reference(x))
    }

    /// Value on subtriangle `s` (extended polynomially) of the `U^h` field.
    pub fn scalar_on(&self, s: usize, x: Point<T>, u_hat: &[T]) -> T {
        let local = self.uh.local_coefficients(s, u_hat);
        crate::linalg::dot(&local, &self.basis_at(s, x))
    }

    /// Value on subtriangle `s` (extended polynomially) of the `W^h` field.
    pub fn vector_on(&self, s: usize, x: Point<T>, g_hat: &[T]) -> Point<T> {
        let local = self.wh.local_coefficients(s, g_hat);
        let phi = self.basis_at(s, x);
        let m = phi.len();
        [
            crate::linalg::dot(&local[..m], &phi),
            crate::linalg::dot(&local[m..], &phi),
        ]
    }

    pub fn eval_scalar(&self, x: Point<T>, u_hat: &[T]) -> Result<T> {
        let s = self.locate(x)?;
        Ok(self.scalar_on(s, x, u_hat))
    }

    pub fn eval_vector(&self, x: Point<T>, g_hat: &[T]) -> Result<Point<T>> {
        let s = self.locate(x)?;
        Ok(self.vector_on(s, x, g_hat))
    }

    fn locate(&self, x: Point<T>) -> Result<usize> {
        self.mesh
            .locate(x)
            .ok_or_else(|| SdgError::PointLocation(x[0].to_f64_lossy(), x[1].to_f64_lossy()))
    }
}

fn edge_points<T: Real>(
    mesh: &StaggeredMesh<T>,
    e: usize,
    rule: &GaussLegendre<T>,
) -> Vec<Point<T>> {
    let [a, b] = mesh.edge(e).endpoints.map(|i| mesh.vertices()[i]);
    rule.points
        .iter()
        .map(|&t| [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t])
        .collect()
}

fn build_uh<T: Real>(
    mesh: &StaggeredMesh<T>,
    basis: &OrthonormalBasis<T>,
    rule: &GaussLegendre<T>,
) -> Result<DofMap<T>> {
    let m = basis.dim();
    let k = basis.degree();
    let blocks = (0..mesh.num_second_type())
        .into_par_iter()
        .map(|e| {
            let elements = mesh.second_type(e);
            let points = edge_points(mesh, e, rule);
            let mut c = Mat::zeros(points.len(), elements.len() * m);
            for (r, &x) in points.iter().enumerate() {
                for (slot, &s) in elements.iter().enumerate() {
                    let sign = if slot == 0 { T::one() } else { -T::one() };
                    let phi = basis.eval(mesh.map(s).to_reference(x));
                    for l in 0..m {
                        c[(r, slot * m + l)] = sign * phi[l];
                    }
                }
            }
            null_space(c.as_ref(), k + 1).map_err(|rank| SdgError::DegenerateMacro {
                kind: MacroKind::SecondType,
                index: e,
                rank,
                expected: k + 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lists = (0..mesh.num_second_type())
        .map(|e| mesh.second_type(e).to_vec())
        .collect();
    Ok(DofMap::from_blocks(
        FieldKind::Scalar,
        k,
        mesh.num_subtriangles(),
        lists,
        blocks,
    ))
}

fn build_wh<T: Real>(
    mesh: &StaggeredMesh<T>,
    basis: &OrthonormalBasis<T>,
    rule: &GaussLegendre<T>,
) -> Result<DofMap<T>> {
    let m = basis.dim();
    let k = basis.degree();
    let blocks = (0..mesh.num_first_type())
        .into_par_iter()
        .map(|t| {
            let elements = mesh.first_type(t);
            let slot_of = |s: usize| {
                elements
                    .iter()
                    .position(|&x| x == s)
                    .expect("dual edge inside macro")
            };
            let duals = mesh.dual_edges_of(t);
            let np = rule.len();
            let mut c = Mat::zeros(3 * np, 3 * 2 * m);
            for (d, &e) in duals.iter().enumerate() {
                let edge = mesh.edge(e);
                let n = edge.normal;
                let pair = [
                    edge.adjacent.0,
                    edge.adjacent.1.expect("dual edges are interior"),
                ];
                for (p, &x) in edge_points(mesh, e, rule).iter().enumerate() {
                    let row = d * np + p;
                    for (side, &s) in pair.iter().enumerate() {
                        let sign = if side == 0 { T::one() } else { -T::one() };
                        let phi = basis.eval(mesh.map(s).to_reference(x));
                        let base = slot_of(s) * 2 * m;
                        for l in 0..m {
                            c[(row, base + l)] = sign * n[0] * phi[l];
                            c[(row, base + m + l)] = sign * n[1] * phi[l];
                        }
                    }
                }
            }
            let expected = 3 * (k + 1);
            null_space(c.as_ref(), expected).map_err(|rank| SdgError::DegenerateMacro {
                kind: MacroKind::FirstType,
                index: t,
                rank,
                expected,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lists = (0..mesh.num_first_type())
        .map(|t| mesh.first_type(t).to_vec())
        .collect();
    Ok(DofMap::from_blocks(
        FieldKind::Vector,
        k,
        mesh.num_subtriangles(),
        lists,
        blocks,
    ))
}

/// Largest jump of the `U^h` field across interior primal edges and of its
/// trace on boundary edges, sampled at `k + 1` Gauss points per edge.
pub fn scalar_trace_mismatch<T: Real>(spaces: &SdgSpaces<T>, u_hat: &[T]) -> T {
    let mesh = spaces.mesh();
    let rule = GaussLegendre::new(spaces.degree() + 1);
    let mut worst = T::zero();
    for e in 0..mesh.num_primal_edges() {
        let edge = mesh.edge(e);
        for x in edge_points(mesh, e, &rule) {
            let a = spaces.scalar_on(edge.adjacent.0, x, u_hat);
            let b = edge
                .adjacent
                .1
                .map_or(T::zero(), |s| spaces.scalar_on(s, x, u_hat));
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Largest jump of the normal component of a `W^h` field across dual edges.
pub fn normal_trace_mismatch<T: Real>(spaces: &SdgSpaces<T>, g_hat: &[T]) -> T {
    let mesh = spaces.mesh();
    let rule = GaussLegendre::new(spaces.degree() + 1);
    let mut worst = T::zero();
    for e in mesh.num_primal_edges()..mesh.edges().len() {
        let edge = mesh.edge(e);
        let other = edge.adjacent.1.expect("dual edges are interior");
        for x in edge_points(mesh, e, &rule) {
            let a = dot(spaces.vector_on(edge.adjacent.0, x, g_hat), edge.normal);
            let b = dot(spaces.vector_on(other, x, g_hat), edge.normal);
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::InitialMesh;

    fn spaces(n: usize, k: usize) -> SdgSpaces<f64> {
        let mesh = StaggeredMesh::new(&InitialMesh::unit_square(n).unwrap()).unwrap();
        SdgSpaces::new(mesh, k).unwrap()
    }

    #[test]
    fn dimensions_single_square() {
        let s = spaces(1, 1);
        assert_eq!(s.uh().num_dofs(), 8);
        assert_eq!(s.wh().num_dofs(), 24);
        let s0 = spaces(1, 0);
        assert_eq!(s0.uh().num_dofs(), 1);
        assert_eq!(s0.wh().num_dofs(), 6);
    }

    #[test]
    fn dimensions_four_by_four() {
        let s = spaces(4, 1);
        assert_eq!(s.uh().num_dofs(), 40 * 4 + 16);
        assert_eq!(s.wh().num_dofs(), 32 * 12);
        for mac in s.wh().macros() {
            assert_eq!(mac.count, 12);
        }
    }

    #[test]
    fn zero_coefficients_evaluate_to_zero() {
        let s = spaces(2, 1);
        let u = vec![0.0; s.uh().num_dofs()];
        let g = vec![0.0; s.wh().num_dofs()];
        assert_eq!(s.eval_scalar([0.3, 0.7], &u).unwrap(), 0.0);
        assert_eq!(s.eval_vector([0.3, 0.7], &g).unwrap(), [0.0, 0.0]);
        assert!(s.eval_scalar([1.5, 0.5], &u).is_err());
    }

    #[test]
    fn traces_are_continuous_for_unit_vectors() {
        let s = spaces(2, 2);
        for i in 0..s.uh().num_dofs() {
            let mut u = vec![0.0; s.uh().num_dofs()];
            u[i] = 1.0;
            assert!(scalar_trace_mismatch(&s, &u) < 1e-12);
        }
        for i in 0..s.wh().num_dofs() {
            let mut g = vec![0.0; s.wh().num_dofs()];
            g[i] = 1.0;
            assert!(normal_trace_mismatch(&s, &g) < 1e-12);
        }
    }
}
