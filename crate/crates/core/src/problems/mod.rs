//! Model problems: manufactured solutions on the unit square, the
//! nonlinear coefficients `rho`, and the forcing they induce.

mod norms;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use norms::{
    error_quadrature_degree, l2_error, l2_error_scalar, l2_error_vector, l2_norm_scalar,
    scalar_norms, vector_norms, ScalarNorms, VectorNorms,
};

use crate::{Point, Real, Result, SdgError};

/// An analytic solution with its first and second derivatives.
pub trait ExactSolution<T>: Send + Sync {
    fn value(&self, x: Point<T>) -> T;
    fn gradient(&self, x: Point<T>) -> Point<T>;
    fn hessian(&self, x: Point<T>) -> [[T; 2]; 2];
}

/// The two test solutions; both vanish on the boundary of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManufacturedSolution {
    /// `sin(pi x) sin(pi y)`
    U1,
    /// `10 x y^2 (1-x)(1-y) - e^(x-1) sin(pi x) sin(pi y) / 2`
    U2,
}

impl<T: Real> ExactSolution<T> for ManufacturedSolution {
    fn value(&self, [x, y]: Point<T>) -> T {
        let pi = T::PI();
        match self {
            Self::U1 => (pi * x).sin() * (pi * y).sin(),
            Self::U2 => {
                let p = x * (T::one() - x);
                let q = y * y * (T::one() - y);
                T::lit(10.0) * p * q
                    - (x - T::one()).exp() * (pi * x).sin() * (pi * y).sin() * T::lit(0.5)
            }
        }
    }

    fn gradient(&self, [x, y]: Point<T>) -> Point<T> {
        let pi = T::PI();
        let (sx, cx, sy, cy) = (
            (pi * x).sin(),
            (pi * x).cos(),
            (pi * y).sin(),
            (pi * y).cos(),
        );
        match self {
            Self::U1 => [pi * cx * sy, pi * sx * cy],
            Self::U2 => {
                let (a, da, b, db) = u2_factors(x, y);
                let ten = T::lit(10.0);
                let half = T::lit(0.5);
                let e = (x - T::one()).exp();
                let g = e * sx;
                let dg = e * (sx + pi * cx);
                [
                    ten * da * b - half * dg * sy,
                    ten * a * db - half * g * pi * cy,
                ]
            }
        }
    }

    fn hessian(&self, [x, y]: Point<T>) -> [[T; 2]; 2] {
        let pi = T::PI();
        let pi2 = pi * pi;
        let (sx, cx, sy, cy) = (
            (pi * x).sin(),
            (pi * x).cos(),
            (pi * y).sin(),
            (pi * y).cos(),
        );
        match self {
            Self::U1 => {
                let d = -pi2 * sx * sy;
                let o = pi2 * cx * cy;
                [[d, o], [o, d]]
            }
            Self::U2 => {
                let (a, da, b, db) = u2_factors(x, y);
                let dda = -T::lit(2.0);
                let ddb = T::lit(2.0) - T::lit(6.0) * y;
                let ten = T::lit(10.0);
                let half = T::lit(0.5);
                let e = (x - T::one()).exp();
                let g = e * sx;
                let dg = e * (sx + pi * cx);
                let ddg = e * (sx + T::lit(2.0) * pi * cx - pi2 * sx);
                let (s, ds, dds) = (sy, pi * cy, -pi2 * sy);
                let xx = ten * dda * b - half * ddg * s;
                let yy = ten * a * ddb - half * g * dds;
                let xy = ten * da * db - half * dg * ds;
                [[xx, xy], [xy, yy]]
            }
        }
    }
}

/// Polynomial factors of `u2`: `(p, p', q, q')` with `p = x(1-x)`,
/// `q = y^2 (1-y)`.
fn u2_factors<T: Real>(x: T, y: T) -> (T, T, T, T) {
    let p = x * (T::one() - x);
    let dp = T::one() - T::lit(2.0) * x;
    let q = y * y * (T::one() - y);
    let dq = T::lit(2.0) * y - T::lit(3.0) * y * y;
    (p, dp, q, dq)
}

impl FromStr for ManufacturedSolution {
    type Err = SdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u1" => Ok(Self::U1),
            "u2" => Ok(Self::U2),
            other => Err(SdgError::InvalidConfig(format!(
                "unknown solution `{other}` (expected u1 or u2)"
            ))),
        }
    }
}

impl fmt::Display for ManufacturedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::U1 => "u1",
            Self::U2 => "u2",
        })
    }
}

/// A nonlinear coefficient `rho(G)`.
pub trait Coefficient<T: Real>: Send + Sync {
    fn rho(&self, g: Point<T>) -> T;

    /// `grad_G rho`. Where the expression involves `G / |G|`, `|G|` is
    /// replaced by `max(|G|, guard)`.
    fn grad_rho(&self, g: Point<T>, guard: T) -> Point<T>;

    /// Whether `G -> rho(G) G` is smooth and `rho` is bounded away from zero.
    fn is_smooth(&self) -> bool;

    fn rho_at_zero(&self) -> T {
        self.rho([T::zero(); 2])
    }

    /// The flux `rho(G) G`.
    fn flux(&self, g: Point<T>) -> Point<T> {
        let r = self.rho(g);
        [r * g[0], r * g[1]]
    }

    /// Derivative of the flux: `rho(G) I + G (grad rho)^T`.
    fn flux_jacobian(&self, g: Point<T>, guard: T) -> [[T; 2]; 2] {
        let r = self.rho(g);
        let d = self.grad_rho(g, guard);
        [
            [r + g[0] * d[0], g[0] * d[1]],
            [g[1] * d[0], r + g[1] * d[1]],
        ]
    }
}

/// The six coefficients of the experiments plus constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StandardCoefficient {
    /// `2 + 1 / (1 + |G|)`
    Rho1,
    /// `1 + exp(-|G|)`
    Rho2,
    /// `1 + exp(-|G|^2)`
    Rho3,
    /// `1 / sqrt(1 + |G|)`
    Rho4,
    /// `|G|`
    Rho5,
    /// `|G|^2`
    Rho6,
    Constant(f64),
}

impl StandardCoefficient {
    pub const ALL: [StandardCoefficient; 6] = [
        Self::Rho1,
        Self::Rho2,
        Self::Rho3,
        Self::Rho4,
        Self::Rho5,
        Self::Rho6,
    ];

    /// `rho(r)` and `rho'(r)` as functions of `r = |G|`.
    fn profile<T: Real>(&self, r: T) -> (T, T) {
        let one = T::one();
        match *self {
            Self::Rho1 => (
                T::lit(2.0) + one / (one + r),
                -one / ((one + r) * (one + r)),
            ),
            Self::Rho2 => (one + (-r).exp(), -(-r).exp()),
            Self::Rho3 => {
                let e = (-r * r).exp();
                (one + e, -T::lit(2.0) * r * e)
            }
            Self::Rho4 => {
                let s = (one + r).sqrt();
                (one / s, -T::lit(0.5) / (s * s * s))
            }
            Self::Rho5 => (r, one),
            Self::Rho6 => (r * r, T::lit(2.0) * r),
            Self::Constant(c) => (T::lit(c), T::zero()),
        }
    }
}

impl<T: Real> Coefficient<T> for StandardCoefficient {
    fn rho(&self, g: Point<T>) -> T {
        self.profile(g[0].hypot(g[1])).0
    }

    fn grad_rho(&self, g: Point<T>, guard: T) -> Point<T> {
        match *self {
            // rho'(r) / r is smooth for these two
            Self::Rho3 => {
                let s = -T::lit(2.0) * (-(g[0] * g[0] + g[1] * g[1])).exp();
                [s * g[0], s * g[1]]
            }
            Self::Rho6 => [T::lit(2.0) * g[0], T::lit(2.0) * g[1]],
            Self::Constant(_) => [T::zero(); 2],
            _ => {
                let r = g[0].hypot(g[1]);
                let r_eff = r.max(guard);
                if r_eff == T::zero() {
                    return [T::zero(); 2];
                }
                let (_, dr) = self.profile(r);
                [dr * g[0] / r_eff, dr * g[1] / r_eff]
            }
        }
    }

    fn is_smooth(&self) -> bool {
        !matches!(self, Self::Rho5 | Self::Rho6)
    }
}

impl FromStr for StandardCoefficient {
    type Err = SdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho1" => Ok(Self::Rho1),
            "rho2" => Ok(Self::Rho2),
            "rho3" => Ok(Self::Rho3),
            "rho4" => Ok(Self::Rho4),
            "rho5" => Ok(Self::Rho5),
            "rho6" => Ok(Self::Rho6),
            other => other
                .strip_prefix("const:")
                .and_then(|c| c.parse::<f64>().ok())
                .filter(|c| *c > 0.0)
                .map(Self::Constant)
                .ok_or_else(|| {
                    SdgError::InvalidConfig(format!(
                        "unknown coefficient `{other}` (expected rho1..rho6 or const:<value>)"
                    ))
                }),
        }
    }
}

impl fmt::Display for StandardCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rho1 => f.write_str("rho1"),
            Self::Rho2 => f.write_str("rho2"),
            Self::Rho3 => f.write_str("rho3"),
            Self::Rho4 => f.write_str("rho4"),
            Self::Rho5 => f.write_str("rho5"),
            Self::Rho6 => f.write_str("rho6"),
            Self::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

/// A solution/coefficient pair with the forcing that makes the solution
/// exact.
#[derive(Clone)]
pub struct ProblemInstance<T: Real> {
    pub solution: Arc<dyn ExactSolution<T>>,
    pub coefficient: Arc<dyn Coefficient<T>>,
    /// Regularization of `G / |G|` in the forcing.
    pub guard: T,
}

impl<T: Real> ProblemInstance<T> {
    pub fn new(solution: Arc<dyn ExactSolution<T>>, coefficient: Arc<dyn Coefficient<T>>) -> Self {
        Self {
            solution,
            coefficient,
            guard: T::lit(1e-14),
        }
    }

    pub fn standard(solution: ManufacturedSolution, coefficient: StandardCoefficient) -> Self {
        Self::new(Arc::new(solution), Arc::new(coefficient))
    }

    /// From identifiers such as `("u1", "rho3")`.
    pub fn from_ids(solution: &str, coefficient: &str) -> Result<Self> {
        Ok(Self::standard(solution.parse()?, coefficient.parse()?))
    }

    /// `f = -div(rho(grad u) grad u)`, expanded by the chain rule as
    /// `-rho lap u - (H grad_G rho) . grad u`.
    pub fn forcing(&self, x: Point<T>) -> T {
        forcing(
            self.solution.as_ref(),
            self.coefficient.as_ref(),
            x,
            self.guard,
        )
    }
}

pub fn forcing<T: Real>(
    solution: &dyn ExactSolution<T>,
    coefficient: &dyn Coefficient<T>,
    x: Point<T>,
    guard: T,
) -> T {
    let g = solution.gradient(x);
    let h = solution.hessian(x);
    let rho = coefficient.rho(g);
    let d = coefficient.grad_rho(g, guard);
    let hd = [
        h[0][0] * d[0] + h[0][1] * d[1],
        h[1][0] * d[0] + h[1][1] * d[1],
    ];
    -rho * (h[0][0] + h[1][1]) - (hd[0] * g[0] + hd[1] * g[1])
}
