//! Gauss-Legendre rules on `[0, 1]` and conical-product rules on the
//! reference triangle `(0,0), (1,0), (0,1)`.

use crate::{Point, Real};

/// Gauss-Legendre rule mapped to `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
        let nt = T::from_count(n);
        let half = T::lit(0.5);
        let mut points = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            // Newton on P_n starting from the Tricomi-style guess.
            let mut x = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nt + half)).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            // map from [-1, 1] to [0, 1]
            points[i] = (T::one() - x) * half;
            points[n - 1 - i] = (T::one() + x) * half;
            weights[i] = w * half;
            weights[n - 1 - i] = w * half;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let k = T::from_count(k);
        let p2 = ((T::lit(2.0) * k - T::one()) * x * p1 - (k - T::one()) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nt = T::from_count(n);
    let d = nt * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Quadrature on the reference triangle. Points are in reference
/// coordinates `(xi, eta)`; weights are positive and sum to the reference
/// area `1/2`.
#[derive(Debug, Clone)]
pub struct TriangleQuadrature<T> {
    pub points: Vec<Point<T>>,
    pub weights: Vec<T>,
    degree: usize,
}

impl<T: Real> TriangleQuadrature<T> {
    /// Collapsed-coordinate (Duffy) product of Gauss-Legendre rules, exact
    /// for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        // x = s, y = (1 - s) t with Jacobian (1 - s): the integrand has
        // degree `degree + 1` in s and `degree` in t.
        let n = (degree + 3) / 2;
        let gl = GaussLegendre::<T>::new(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&s, &ws) in gl.points.iter().zip(&gl.weights) {
            for (&t, &wt) in gl.points.iter().zip(&gl.weights) {
                points.push([s, (T::one() - s) * t]);
                weights.push(ws * wt * (T::one() - s));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    /// Polynomial exactness degree.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Barycentric coordinates of point `q`.
    pub fn barycentric(&self, q: usize) -> [T; 3] {
        let [x, y] = self.points[q];
        [T::one() - x - y, x, y]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact `int_T x^a y^b` over the reference triangle: `a! b! / (a+b+2)!`.
    fn moment(a: u32, b: u32) -> f64 {
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=8 {
            let r = GaussLegendre::<f64>::new(n);
            for p in 0..(2 * n) as i32 {
                let approx: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(p))
                    .sum();
                assert!(
                    (approx - 1.0 / (p as f64 + 1.0)).abs() < 1e-14,
                    "n={n} p={p}"
                );
            }
        }
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        for d in 0..=12 {
            let q = TriangleQuadrature::<f64>::with_degree(d);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            let area: f64 = q.weights.iter().sum();
            assert!((area - 0.5).abs() < 1e-15);
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let approx: f64 = q
                        .points
                        .iter()
                        .zip(&q.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = moment(a, b);
                    assert!(
                        ((approx - exact) / exact).abs() < 1e-13,
                        "d={d} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn points_are_inside() {
        let q = TriangleQuadrature::<f64>::with_degree(8);
        for q_i in 0..q.len() {
            assert!(q.barycentric(q_i).iter().all(|&l| l > 0.0 && l < 1.0));
        }
    }

    #[test]
    fn single_precision_rule() {
        let q = TriangleQuadrature::<f32>::with_degree(6);
        let approx: f32 = q
            .points
            .iter()
            .zip(&q.weights)
            .map(|(p, w)| w * p[0] * p[0] * p[1])
            .sum();
        assert!((approx - moment(2, 1) as f32).abs() < 1e-6);
    }
}
