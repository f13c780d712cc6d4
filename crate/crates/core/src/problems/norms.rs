//! `L^2` errors against exact fields and the mesh-dependent norms used in
//! the stability analysis.

use crate::basis::Tabulation;
use crate::mesh::{dot, StaggeredMesh};
use crate::quadrature::TriangleQuadrature;
use crate::space::SdgSpaces;
use crate::{Point, Real};

use super::ExactSolution;

/// `sqrt(sum_s int_s f(s, x)^2)` with a rule of the given exactness degree.
pub fn l2_error<T: Real>(
    mesh: &StaggeredMesh<T>,
    degree: usize,
    f: impl Fn(usize, Point<T>) -> T,
) -> T {
    let q = TriangleQuadrature::<T>::with_degree(degree);
    let mut total = T::zero();
    for s in 0..mesh.num_subtriangles() {
        let map = mesh.map(s);
        let mut acc = T::zero();
        for (p, &w) in q.points.iter().zip(&q.weights) {
            let v = f(s, map.to_physical(*p));
            acc += w * v * v;
        }
        total += acc * map.det.abs();
    }
    total.sqrt()
}

/// Exactness degree used for error norms: `2k + 6`.
pub fn error_quadrature_degree(k: usize) -> usize {
    2 * k + 6
}

/// `||u - u_h||_{L^2}` for `u_h` with `U^h` coefficients `u_hat`.
pub fn l2_error_scalar<T: Real>(
    spaces: &SdgSpaces<T>,
    exact: &dyn ExactSolution<T>,
    u_hat: &[T],
) -> T {
    let mesh = spaces.mesh();
    let q = TriangleQuadrature::<T>::with_degree(error_quadrature_degree(spaces.degree()));
    let tab = Tabulation::new(spaces.basis(), &q.points);
    let mut total = T::zero();
    for s in 0..mesh.num_subtriangles() {
        let map = mesh.map(s);
        let local = spaces.uh().local_coefficients(s, u_hat);
        let mut acc = T::zero();
        for (i, (p, &w)) in q.points.iter().zip(&q.weights).enumerate() {
            let d = exact.value(map.to_physical(*p)) - crate::linalg::dot(&local, tab.values_at(i));
            acc += w * d * d;
        }
        total += acc * map.det.abs();
    }
    total.sqrt()
}

/// `||grad u - G_h||_{L^2}` for `G_h` with `W^h` coefficients `g_hat`.
pub fn l2_error_vector<T: Real>(
    spaces: &SdgSpaces<T>,
    exact: &dyn ExactSolution<T>,
    g_hat: &[T],
) -> T {
    let mesh = spaces.mesh();
    let m = spaces.basis().dim();
    let q = TriangleQuadrature::<T>::with_degree(error_quadrature_degree(spaces.degree()));
    let tab = Tabulation::new(spaces.basis(), &q.points);
    let mut total = T::zero();
    for s in 0..mesh.num_subtriangles() {
        let map = mesh.map(s);
        let local = spaces.wh().local_coefficients(s, g_hat);
        let mut acc = T::zero();
        for (i, (p, &w)) in q.points.iter().zip(&q.weights).enumerate() {
            let g = exact.gradient(map.to_physical(*p));
            let phi = tab.values_at(i);
            let dx = g[0] - crate::linalg::dot(&local[..m], phi);
            let dy = g[1] - crate::linalg::dot(&local[m..], phi);
            acc += w * (dx * dx + dy * dy);
        }
        total += acc * map.det.abs();
    }
    total.sqrt()
}

/// `||u_h||_{L^2}`. The reference basis is orthonormal, so this is exact.
pub fn l2_norm_scalar<T: Real>(spaces: &SdgSpaces<T>, u_hat: &[T]) -> T {
    let mesh = spaces.mesh();
    let mut total = T::zero();
    for s in 0..mesh.num_subtriangles() {
        let local = spaces.uh().local_coefficients(s, u_hat);
        total += mesh.map(s).det.abs() * crate::linalg::dot(&local, &local);
    }
    total.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarNorms<T> {
    pub l2: T,
    /// `||v||_X`: `L^2` plus `h_e`-weighted traces on interior primal edges.
    pub x: T,
    /// `||v||_Z`: broken `H^1` seminorm plus `h_e^{-1}`-weighted jumps on
    /// dual edges.
    pub z: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorNorms<T> {
    pub l2: T,
    /// `||V||_X'`: `L^2` plus `h_e`-weighted normal traces on dual edges.
    pub x_prime: T,
    /// `||V||_Z'`: broken divergence plus `h_e^{-1}`-weighted normal jumps
    /// on interior primal edges.
    pub z_prime: T,
}

/// `sum_e weight(e) int_e g(e, x)^2` over the listed edges.
fn edge_sum<T: Real>(
    spaces: &SdgSpaces<T>,
    edges: &[usize],
    weight: impl Fn(T) -> T,
    g: impl Fn(usize, Point<T>) -> T,
) -> T {
    let rule = spaces.edge_rule();
    let mut total = T::zero();
    for &e in edges {
        let len = spaces.mesh().edge(e).length;
        let mut acc = T::zero();
        for (x, &w) in spaces.edge_points(e).into_iter().zip(&rule.weights) {
            let v = g(e, x);
            acc += w * v * v;
        }
        total += weight(len) * len * acc;
    }
    total
}

pub fn scalar_norms<T: Real>(spaces: &SdgSpaces<T>, v_hat: &[T]) -> ScalarNorms<T> {
    let mesh = spaces.mesh();
    let classes = mesh.classify_edges();
    let q = spaces.quadrature();
    let tab = spaces.tabulation();
    let m = spaces.basis().dim();

    let mut l2 = T::zero();
    let mut grad = T::zero();
    for s in 0..mesh.num_subtriangles() {
        let map = mesh.map(s);
        let local = spaces.uh().local_coefficients(s, v_hat);
        l2 += map.det.abs() * crate::linalg::dot(&local, &local);
        let mut acc = T::zero();
        for (i, &w) in q.weights.iter().enumerate() {
            let mut g = [T::zero(); 2];
            for (l, rg) in tab.grads_at(i).iter().enumerate().take(m) {
                let pg = map.push_gradient(*rg);
                g[0] += local[l] * pg[0];
                g[1] += local[l] * pg[1];
            }
            acc += w * dot(g, g);
        }
        grad += acc * map.det.abs();
    }

    let trace = edge_sum(
        spaces,
        &classes.primal_interior,
        |h| h,
        |e, x| spaces.scalar_on(mesh.edge(e).adjacent.0, x, v_hat),
    );
    let jumps = edge_sum(
        spaces,
        &classes.dual,
        |h| T::one() / h,
        |e, x| {
            let edge = mesh.edge(e);
            let other = edge.adjacent.1.expect("dual edges are interior");
            spaces.scalar_on(edge.adjacent.0, x, v_hat) - spaces.scalar_on(other, x, v_hat)
        },
    );
    ScalarNorms {
        l2: l2.sqrt(),
        x: (l2 + trace).sqrt(),
        z: (grad + jumps).sqrt(),
    }
}

pub fn vector_norms<T: Real>(spaces: &SdgSpaces<T>, v_hat: &[T]) -> VectorNorms<T> {
    let mesh = spaces.mesh();
    let classes = mesh.classify_edges();
    let q = spaces.quadrature();
    let tab = spaces.tabulation();
    let m = spaces.basis().dim();

    let mut l2 = T::zero();
    let mut div = T::zero();
    for s in 0..mesh.num_subtriangles() {
        let map = mesh.map(s);
        let local = spaces.wh().local_coefficients(s, v_hat);
        l2 += map.det.abs() * crate::linalg::dot(&local, &local);
        let mut acc = T::zero();
        for (i, &w) in q.weights.iter().enumerate() {
            let mut d = T::zero();
            for (l, rg) in tab.grads_at(i).iter().enumerate().take(m) {
                let pg = map.push_gradient(*rg);
                d = d + local[l] * pg[0] + local[m + l] * pg[1];
            }
            acc += w * d * d;
        }
        div += acc * map.det.abs();
    }

    let normal =
        |s: usize, e: usize, x: Point<T>| dot(spaces.vector_on(s, x, v_hat), mesh.edge(e).normal);
    let traces = edge_sum(
        spaces,
        &classes.dual,
        |h| h,
        |e, x| normal(mesh.edge(e).adjacent.0, e, x),
    );
    let jumps = edge_sum(
        spaces,
        &classes.primal_interior,
        |h| T::one() / h,
        |e, x| {
            let edge = mesh.edge(e);
            let other = edge.adjacent.1.expect("interior edge");
            normal(edge.adjacent.0, e, x) - normal(other, e, x)
        },
    );
    VectorNorms {
        l2: l2.sqrt(),
        x_prime: (l2 + traces).sqrt(),
        z_prime: (div + jumps).sqrt(),
    }
}
