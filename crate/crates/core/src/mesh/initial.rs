use std::collections::HashMap;

use super::{cross, dot, signed_det, sub};
use crate::{Point, Real, Result, SdgError};

/// A conforming, positively oriented triangulation of a polygonal domain.
///
/// Edges are numbered in order of first appearance when walking the
/// triangles in order and their local edges `(v0,v1), (v1,v2), (v2,v0)`.
#[derive(Debug, Clone)]
pub struct InitialMesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// For each edge, the `(triangle, local edge)` pairs touching it; the
    /// first entry always has the lower triangle index.
    edge_triangles: Vec<[Option<(usize, usize)>; 2]>,
    triangle_edges: Vec<[usize; 3]>,
}

impl<T: Real> InitialMesh<T> {
    /// Validates and indexes a triangulation.
    pub fn new(vertices: Vec<Point<T>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return Err(SdgError::VertexOutOfRange {
                    triangle: t,
                    vertex: v,
                    count: nv,
                });
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let det = signed_det(a, b, c);
            let scale = [sub(b, a), sub(c, b), sub(a, c)]
                .iter()
                .map(|e| dot(*e, *e))
                .fold(T::zero(), T::max);
            if !(det > T::epsilon() * T::lit(64.0) * scale) {
                return Err(SdgError::BadTriangle(t));
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<[Option<(usize, usize)>; 2]> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for j in 0..3 {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangles.push([None, None]);
                    edges.len() - 1
                });
                let slot = &mut edge_triangles[e];
                if slot[0].is_none() {
                    slot[0] = Some((t, j));
                } else if slot[1].is_none() {
                    slot[1] = Some((t, j));
                } else {
                    return Err(SdgError::NonManifoldEdge(key.0, key.1));
                }
                local[j] = e;
            }
            triangle_edges.push(local);
        }

        let mesh = Self {
            vertices,
            triangles,
            edges,
            edge_triangles,
            triangle_edges,
        };
        mesh.check_hanging_nodes()?;
        Ok(mesh)
    }

    /// Unit square split into `n x n` squares, each cut along the diagonal
    /// from its lower-left to its upper-right corner.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SdgError::InvalidResolution(n));
        }
        let nn = T::from_count(n);
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([T::from_count(i) / nn, T::from_count(j) / nn]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Self::new(vertices, triangles)
    }

    // Only boundary edges can hide a hanging node: the two sides of a
    // non-matching interface show up as edges with a single neighbour.
    fn check_hanging_nodes(&self) -> Result<()> {
        let boundary: Vec<usize> = (0..self.edges.len())
            .filter(|&e| self.is_boundary(e))
            .collect();
        let mut candidates: Vec<usize> = boundary.iter().flat_map(|&e| self.edges[e]).collect();
        candidates.sort_unstable();
        candidates.dedup();
        for &e in &boundary {
            let [a, b] = self.edges[e];
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = sub(pb, pa);
            let len2 = dot(d, d);
            for &v in &candidates {
                if v == a || v == b {
                    continue;
                }
                let w = sub(self.vertices[v], pa);
                let t = dot(w, d) / len2;
                if t > T::zero()
                    && t < T::one()
                    && cross(d, w).abs() <= T::epsilon() * T::lit(64.0) * len2
                {
                    return Err(SdgError::HangingNode { vertex: v, a, b });
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Triangles adjacent to edge `e` with the local index of `e` in each.
    pub fn edge_triangles(&self, e: usize) -> [Option<(usize, usize)>; 2] {
        self.edge_triangles[e]
    }

    /// Edge indices of triangle `t`; local edge `j` joins corners `j` and `j+1`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn is_boundary(&self, e: usize) -> bool {
        self.edge_triangles[e][1].is_none()
    }

    /// Boundary tag of every edge.
    pub fn boundary_tags(&self) -> Vec<bool> {
        (0..self.edges.len()).map(|e| self.is_boundary(e)).collect()
    }

    pub fn num_boundary_edges(&self) -> usize {
        (0..self.edges.len())
            .filter(|&e| self.is_boundary(e))
            .count()
    }

    pub fn area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        signed_det(a, b, c) * T::lit(0.5)
    }

    /// `V - E + F`; equals 1 for a triangulated disk.
    pub fn euler_characteristic(&self) -> isize {
        self.vertices.len() as isize - self.edges.len() as isize + self.triangles.len() as isize
    }
}
