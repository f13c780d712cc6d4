use thiserror::Error;

use crate::solver::NewtonReport;

pub type Result<T, E = SdgError> = std::result::Result<T, E>;

/// Which family of macro elements a degree-of-freedom map is built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroKind {
    /// `S(nu)`: an initial triangle and its three subtriangles.
    FirstType,
    /// `R(e)`: the one or two subtriangles adjacent to a primal edge.
    SecondType,
}

impl std::fmt::Display for MacroKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MacroKind::FirstType => f.write_str("first-type"),
            MacroKind::SecondType => f.write_str("second-type"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SdgError {
    #[error("mesh resolution must be at least 1, got {0}")]
    InvalidResolution(usize),

    #[error("triangle {triangle} references vertex {vertex}, but the mesh has {count} vertices")]
    VertexOutOfRange {
        triangle: usize,
        vertex: usize,
        count: usize,
    },

    #[error("triangle {0} is degenerate or not positively oriented")]
    BadTriangle(usize),

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("vertex {vertex} lies inside edge ({a}, {b}): hanging node")]
    HangingNode { vertex: usize, a: usize, b: usize },

    #[error("interior point of triangle {0} produces a degenerate subtriangle")]
    InteriorPointOutside(usize),

    #[error("{kind} macro element {index}: constraint rank {rank}, expected {expected}")]
    DegenerateMacro {
        kind: MacroKind,
        index: usize,
        rank: usize,
        expected: usize,
    },

    #[error("mass block of macro element {0} is not positive definite")]
    NonSpdBlock(usize),

    #[error("non-finite {what} in element {element} at ({x}, {y})")]
    NonFinite {
        what: &'static str,
        element: usize,
        x: f64,
        y: f64,
    },

    #[error("point ({0}, {1}) is not inside any element")]
    PointLocation(f64, f64),

    #[error("Jacobian factorization failed at Newton iteration {0}")]
    SingularJacobian(usize),

    #[error("non-finite Newton iterate at iteration {0}")]
    NonFiniteIterate(usize),

    #[error("Newton did not converge in {} iterations", .0.iterations)]
    NotConverged(Box<NewtonReport>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sparse matrix construction failed: {0}")]
    Sparse(String),

    #[error("malformed mesh dump at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
