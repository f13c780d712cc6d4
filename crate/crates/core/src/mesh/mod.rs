//! Two-level staggered triangulations.
//!
//! An [`InitialMesh`] is a conforming triangulation of the domain. Choosing
//! one interior point per initial triangle and joining it to the three
//! corners yields the [`StaggeredMesh`]: every initial triangle becomes a
//! first-type macro element `S(nu)` made of three subtriangles, and every
//! initial edge `e` owns the second-type macro element `R(e)` formed by the
//! one or two subtriangles touching it.

mod dump;
mod initial;
mod staggered;

pub use dump::MeshDump;
pub use initial::InitialMesh;
pub use staggered::{
    Centroid, Edge, EdgeClasses, EdgeKind, InteriorPointRule, StaggeredMesh, Subtriangle,
};

use crate::{Point, Real};

#[inline]
pub(crate) fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm<T: Real>(a: Point<T>) -> T {
    a[0].hypot(a[1])
}

/// Twice the signed area of the triangle `(a, b, c)`.
#[inline]
pub(crate) fn signed_det<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    cross(sub(b, a), sub(c, a))
}

/// Affine map from the reference triangle `(0,0), (1,0), (0,1)` onto a
/// physical triangle: `x = origin + J xi`.
#[derive(Debug, Clone, Copy)]
pub struct TriangleMap<T> {
    pub origin: Point<T>,
    /// Columns are the edge vectors `x1 - x0` and `x2 - x0`.
    pub jacobian: [[T; 2]; 2],
    pub inverse: [[T; 2]; 2],
    /// `det J`, twice the area.
    pub det: T,
}

impl<T: Real> TriangleMap<T> {
    pub fn new(v: [Point<T>; 3]) -> Self {
        let e1 = sub(v[1], v[0]);
        let e2 = sub(v[2], v[0]);
        let det = cross(e1, e2);
        let jacobian = [[e1[0], e2[0]], [e1[1], e2[1]]];
        let inverse = [
            [jacobian[1][1] / det, -jacobian[0][1] / det],
            [-jacobian[1][0] / det, jacobian[0][0] / det],
        ];
        Self {
            origin: v[0],
            jacobian,
            inverse,
            det,
        }
    }

    #[inline]
    pub fn area(&self) -> T {
        self.det.abs() * T::lit(0.5)
    }

    #[inline]
    pub fn to_physical(&self, xi: Point<T>) -> Point<T> {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    #[inline]
    pub fn to_reference(&self, x: Point<T>) -> Point<T> {
        let d = sub(x, self.origin);
        let a = &self.inverse;
        [
            a[0][0] * d[0] + a[0][1] * d[1],
            a[1][0] * d[0] + a[1][1] * d[1],
        ]
    }

    /// Pushes a reference gradient forward: `grad_x = J^{-T} grad_xi`.
    #[inline]
    pub fn push_gradient(&self, g: Point<T>) -> Point<T> {
        let a = &self.inverse;
        [
            a[0][0] * g[0] + a[1][0] * g[1],
            a[0][1] * g[0] + a[1][1] * g[1],
        ]
    }
}

/// Barycentric containment test with a relative slack.
pub(crate) fn contains<T: Real>(v: [Point<T>; 3], x: Point<T>, slack: T) -> bool {
    let det = signed_det(v[0], v[1], v[2]);
    let l0 = signed_det(x, v[1], v[2]) / det;
    let l1 = signed_det(v[0], x, v[2]) / det;
    let l2 = T::one() - l0 - l1;
    l0 >= -slack && l1 >= -slack && l2 >= -slack
}
