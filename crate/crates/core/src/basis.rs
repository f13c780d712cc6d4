//! Orthonormal polynomial bases on the reference triangle.

use crate::{Point, Real};

/// `P^k` on the reference triangle, orthonormal in `L^2`.
///
/// Built by Cholesky-orthonormalising the monomials `x^a y^b` (ordered by
/// total degree) against their exact Gram matrix, so basis function `i`
/// only involves monomials `0..=i` and the first function is the constant
/// `sqrt(2)`.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis<T> {
    degree: usize,
    exponents: Vec<(usize, usize)>,
    /// Row-major lower-triangular `dim x dim` monomial coefficients.
    coeffs: Vec<T>,
}

pub fn dimension(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

impl<T: Real> OrthonormalBasis<T> {
    pub fn new(degree: usize) -> Self {
        let exponents: Vec<(usize, usize)> = (0..=degree)
            .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
            .collect();
        let n = exponents.len();

        let fact = |k: usize| (1..=k).fold(T::one(), |acc, i| acc * T::from_count(i));
        let moment = |a: usize, b: usize| fact(a) * fact(b) / fact(a + b + 2);
        let mut gram = vec![T::zero(); n * n];
        for (i, &(ai, bi)) in exponents.iter().enumerate() {
            for (j, &(aj, bj)) in exponents.iter().enumerate() {
                gram[i * n + j] = moment(ai + aj, bi + bj);
            }
        }

        // gram = L L^T
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = gram[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = gram[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }

        // coeffs = L^{-1}, so that coeffs * gram * coeffs^T = I
        let mut coeffs = vec![T::zero(); n * n];
        for c in 0..n {
            for i in c..n {
                let mut s = if i == c { T::one() } else { T::zero() };
                for k in c..i {
                    s -= l[i * n + k] * coeffs[k * n + c];
                }
                coeffs[i * n + c] = s / l[i * n + i];
            }
        }

        Self {
            degree,
            exponents,
            coeffs,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    fn monomials(&self, xi: Point<T>, out: &mut [T]) {
        for (m, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *m = xi[0].powi(a as i32) * xi[1].powi(b as i32);
        }
    }

    /// Basis values at `xi`.
    pub fn eval(&self, xi: Point<T>) -> Vec<T> {
        let n = self.dim();
        let mut mono = vec![T::zero(); n];
        self.monomials(xi, &mut mono);
        (0..n)
            .map(|i| (0..=i).map(|j| self.coeffs[i * n + j] * mono[j]).sum())
            .collect()
    }

    /// Reference gradients at `xi`.
    pub fn eval_grad(&self, xi: Point<T>) -> Vec<Point<T>> {
        let n = self.dim();
        let dmono: Vec<Point<T>> = self
            .exponents
            .iter()
            .map(|&(a, b)| {
                let dx = if a == 0 {
                    T::zero()
                } else {
                    T::from_count(a) * xi[0].powi(a as i32 - 1) * xi[1].powi(b as i32)
                };
                let dy = if b == 0 {
                    T::zero()
                } else {
                    T::from_count(b) * xi[0].powi(a as i32) * xi[1].powi(b as i32 - 1)
                };
                [dx, dy]
            })
            .collect();
        (0..n)
            .map(|i| {
                let mut g = [T::zero(); 2];
                for j in 0..=i {
                    let c = self.coeffs[i * n + j];
                    g[0] += c * dmono[j][0];
                    g[1] += c * dmono[j][1];
                }
                g
            })
            .collect()
    }
}

/// Basis values and reference gradients tabulated at a fixed point set.
#[derive(Debug, Clone)]
pub struct Tabulation<T> {
    pub dim: usize,
    /// `values[q * dim + i]`
    pub values: Vec<T>,
    /// `grads[q * dim + i]`
    pub grads: Vec<Point<T>>,
}

impl<T: Real> Tabulation<T> {
    pub fn new(basis: &OrthonormalBasis<T>, points: &[Point<T>]) -> Self {
        let mut values = Vec::with_capacity(points.len() * basis.dim());
        let mut grads = Vec::with_capacity(points.len() * basis.dim());
        for &p in points {
            values.extend(basis.eval(p));
            grads.extend(basis.eval_grad(p));
        }
        Self {
            dim: basis.dim(),
            values,
            grads,
        }
    }

    #[inline]
    pub fn values_at(&self, q: usize) -> &[T] {
        &self.values[q * self.dim..(q + 1) * self.dim]
    }

    #[inline]
    pub fn grads_at(&self, q: usize) -> &[Point<T>] {
        &self.grads[q * self.dim..(q + 1) * self.dim]
    }
}
