use super::{dot, norm, signed_det, sub, InitialMesh, TriangleMap};
use crate::{Point, Real, Result, SdgError};

/// Chooses the interior point `nu` of an initial triangle.
pub trait InteriorPointRule<T> {
    fn interior_point(&self, corners: [Point<T>; 3]) -> Point<T>;
}

/// Barycentre of the triangle.
#[derive(Debug, Clone, Copy, Default)]
pub struct Centroid;

impl<T: Real> InteriorPointRule<T> for Centroid {
    fn interior_point(&self, c: [Point<T>; 3]) -> Point<T> {
        let third = T::one() / T::lit(3.0);
        [
            (c[0][0] + c[1][0] + c[2][0]) * third,
            (c[0][1] + c[1][1] + c[2][1]) * third,
        ]
    }
}

impl<T, F> InteriorPointRule<T> for F
where
    F: Fn([Point<T>; 3]) -> Point<T>,
{
    fn interior_point(&self, corners: [Point<T>; 3]) -> Point<T> {
        self(corners)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Interior edge of the initial triangulation (`F_u^0`).
    PrimalInterior,
    /// Boundary edge of the initial triangulation.
    PrimalBoundary,
    /// Edge created by the subdivision (`F_p`).
    Dual,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::PrimalInterior => "primal-interior",
            EdgeKind::PrimalBoundary => "primal-boundary",
            EdgeKind::Dual => "dual",
        }
    }

    pub fn is_primal(self) -> bool {
        !matches!(self, EdgeKind::Dual)
    }
}

impl std::str::FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "primal-interior" => Ok(EdgeKind::PrimalInterior),
            "primal-boundary" => Ok(EdgeKind::PrimalBoundary),
            "dual" => Ok(EdgeKind::Dual),
            other => Err(format!("unknown edge kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge<T> {
    pub endpoints: [usize; 2],
    pub kind: EdgeKind,
    /// Unit normal. Outward on the boundary; on interior edges it points
    /// from `adjacent.0` to `adjacent.1`, so `[v] = v|adjacent.0 - v|adjacent.1`.
    pub normal: Point<T>,
    pub adjacent: (usize, Option<usize>),
    pub length: T,
}

impl<T> Edge<T> {
    pub fn is_interior(&self) -> bool {
        self.adjacent.1.is_some()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Subtriangle {
    /// `(a, b, nu)` where `(a, b)` is the primal edge, counter-clockwise.
    pub vertices: [usize; 3],
    /// Index of the first-type macro element (= initial triangle).
    pub macro_index: usize,
    /// Local edge `i` is opposite local vertex `i`; local edge 2 is primal.
    pub edges: [usize; 3],
}

impl Subtriangle {
    /// The primal edge, which also indexes the second-type macro `R(e)`.
    pub fn primal_edge(&self) -> usize {
        self.edges[2]
    }
}

/// The edge sets `F_u`, `F_u^0` and `F_p` as index lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeClasses {
    pub primal: Vec<usize>,
    pub primal_interior: Vec<usize>,
    pub dual: Vec<usize>,
}

/// The subdivided triangulation with its macro-element bookkeeping.
///
/// Layout: vertices are the initial vertices followed by one interior point
/// per initial triangle; subtriangle `3t + j` is the piece of initial
/// triangle `t` adjacent to its local edge `j`; edges are the primal edges
/// in initial-mesh order followed by the dual edges, `3t + j` of which joins
/// corner `j` of triangle `t` to its interior point.
#[derive(Debug, Clone)]
pub struct StaggeredMesh<T> {
    vertices: Vec<Point<T>>,
    num_initial_vertices: usize,
    subtriangles: Vec<Subtriangle>,
    edges: Vec<Edge<T>>,
    num_primal_edges: usize,
    first_type: Vec<[usize; 3]>,
    second_type: Vec<Vec<usize>>,
    maps: Vec<TriangleMap<T>>,
    h: T,
}

impl<T: Real> StaggeredMesh<T> {
    /// Subdivides with the centroid rule.
    pub fn new(initial: &InitialMesh<T>) -> Result<Self> {
        Self::subdivide(initial, &Centroid)
    }

    pub fn subdivide(initial: &InitialMesh<T>, rule: &impl InteriorPointRule<T>) -> Result<Self> {
        let nv = initial.vertices().len();
        let nt = initial.triangles().len();
        let np = initial.edges().len();
        let mut vertices = initial.vertices().to_vec();
        vertices.reserve(nt);

        let mut subtriangles = Vec::with_capacity(3 * nt);
        for (t, tri) in initial.triangles().iter().enumerate() {
            let corners = tri.map(|i| vertices[i]);
            let nu = rule.interior_point(corners);
            let p = nv + t;
            vertices.push(nu);
            let macro_area = initial.area(t);
            let te = initial.triangle_edges(t);
            for j in 0..3 {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                let det = signed_det(vertices[a], vertices[b], nu);
                if !(det > T::epsilon() * T::lit(1e3) * macro_area) {
                    return Err(SdgError::InteriorPointOutside(t));
                }
                subtriangles.push(Subtriangle {
                    vertices: [a, b, p],
                    macro_index: t,
                    edges: [np + 3 * t + (j + 1) % 3, np + 3 * t + j, te[j]],
                });
            }
        }

        let maps: Vec<TriangleMap<T>> = subtriangles
            .iter()
            .map(|s| TriangleMap::new(s.vertices.map(|i| vertices[i])))
            .collect();
        let centroid =
            |s: usize| Centroid.interior_point(subtriangles[s].vertices.map(|i| vertices[i]));

        let make_edge = |endpoints: [usize; 2], kind, adjacent: (usize, Option<usize>)| {
            let (pa, pb) = (vertices[endpoints[0]], vertices[endpoints[1]]);
            let d = sub(pb, pa);
            let length = norm(d);
            let mut normal = [d[1] / length, -d[0] / length];
            let reference = match adjacent.1 {
                Some(other) => sub(centroid(other), centroid(adjacent.0)),
                None => {
                    let mid = [(pa[0] + pb[0]) * T::lit(0.5), (pa[1] + pb[1]) * T::lit(0.5)];
                    sub(mid, centroid(adjacent.0))
                }
            };
            if dot(normal, reference) < T::zero() {
                normal = [-normal[0], -normal[1]];
            }
            Edge {
                endpoints,
                kind,
                normal,
                adjacent,
                length,
            }
        };

        let mut edges = Vec::with_capacity(np + 3 * nt);
        let mut second_type = Vec::with_capacity(np);
        for (e, &endpoints) in initial.edges().iter().enumerate() {
            let [first, second] = initial.edge_triangles(e);
            let (t0, j0) = first.expect("every edge has a triangle");
            let s0 = 3 * t0 + j0;
            let s1 = second.map(|(t1, j1)| 3 * t1 + j1);
            let kind = if s1.is_some() {
                EdgeKind::PrimalInterior
            } else {
                EdgeKind::PrimalBoundary
            };
            edges.push(make_edge(endpoints, kind, (s0, s1)));
            second_type.push(std::iter::once(s0).chain(s1).collect());
        }
        for (t, tri) in initial.triangles().iter().enumerate() {
            for j in 0..3 {
                // dual edge (corner j, nu) separates pieces j-1 and j
                let a = 3 * t + (j + 2) % 3;
                let b = 3 * t + j;
                edges.push(make_edge(
                    [tri[j], nv + t],
                    EdgeKind::Dual,
                    (a.min(b), Some(a.max(b))),
                ));
            }
        }

        let h = subtriangles
            .iter()
            .map(|s| {
                let [a, b, c] = s.vertices.map(|i| vertices[i]);
                norm(sub(a, b)).max(norm(sub(b, c))).max(norm(sub(c, a)))
            })
            .fold(T::zero(), T::max);

        Ok(Self {
            vertices,
            num_initial_vertices: nv,
            subtriangles,
            edges,
            num_primal_edges: np,
            first_type: (0..nt).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect(),
            second_type,
            maps,
            h,
        })
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn num_initial_vertices(&self) -> usize {
        self.num_initial_vertices
    }

    pub fn subtriangles(&self) -> &[Subtriangle] {
        &self.subtriangles
    }

    pub fn num_subtriangles(&self) -> usize {
        self.subtriangles.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge<T> {
        &self.edges[e]
    }

    pub fn num_primal_edges(&self) -> usize {
        self.num_primal_edges
    }

    /// Number of first-type macro elements (initial triangles).
    pub fn num_first_type(&self) -> usize {
        self.first_type.len()
    }

    /// Number of second-type macro elements (primal edges).
    pub fn num_second_type(&self) -> usize {
        self.second_type.len()
    }

    /// `S(nu)`: the three subtriangles of initial triangle `t`.
    pub fn first_type(&self, t: usize) -> [usize; 3] {
        self.first_type[t]
    }

    /// `R(e)`: subtriangles adjacent to primal edge `e`, lowest index first.
    pub fn second_type(&self, e: usize) -> &[usize] {
        &self.second_type[e]
    }

    /// The three dual edges inside `S(nu)`.
    pub fn dual_edges_of(&self, t: usize) -> [usize; 3] {
        let base = self.num_primal_edges + 3 * t;
        [base, base + 1, base + 2]
    }

    pub fn interior_point(&self, t: usize) -> Point<T> {
        self.vertices[self.num_initial_vertices + t]
    }

    pub fn corners(&self, s: usize) -> [Point<T>; 3] {
        self.subtriangles[s].vertices.map(|i| self.vertices[i])
    }

    pub fn map(&self, s: usize) -> &TriangleMap<T> {
        &self.maps[s]
    }

    pub fn area(&self, s: usize) -> T {
        self.maps[s].area()
    }

    /// Largest subtriangle diameter.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn classify_edges(&self) -> EdgeClasses {
        let mut classes = EdgeClasses::default();
        for (e, edge) in self.edges.iter().enumerate() {
            match edge.kind {
                EdgeKind::PrimalInterior => {
                    classes.primal.push(e);
                    classes.primal_interior.push(e);
                }
                EdgeKind::PrimalBoundary => classes.primal.push(e),
                EdgeKind::Dual => classes.dual.push(e),
            }
        }
        classes
    }

    /// `V - E + F` of the subdivided triangulation.
    pub fn euler_characteristic(&self) -> isize {
        self.vertices.len() as isize - self.edges.len() as isize + self.subtriangles.len() as isize
    }

    /// Smallest interior angle over all subtriangles, in degrees.
    pub fn min_angle_degrees(&self) -> T {
        let mut min = T::lit(180.0);
        for s in 0..self.subtriangles.len() {
            let c = self.corners(s);
            for i in 0..3 {
                let u = sub(c[(i + 1) % 3], c[i]);
                let v = sub(c[(i + 2) % 3], c[i]);
                let cos = dot(u, v) / (norm(u) * norm(v));
                let angle = cos.max(-T::one()).min(T::one()).acos().to_degrees();
                min = min.min(angle);
            }
        }
        min
    }

    /// Index of a subtriangle containing `x`, if any.
    pub fn locate(&self, x: Point<T>) -> Option<usize> {
        let slack = T::epsilon().sqrt();
        (0..self.subtriangles.len()).find(|&s| super::contains(self.corners(s), x, slack))
    }
}
