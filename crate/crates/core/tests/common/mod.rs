#![allow(dead_code)]

use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sdg::mesh::{InitialMesh, StaggeredMesh};
use sdg::quadrature::TriangleQuadrature;
use sdg::space::{DofMap, SdgSpaces};

pub fn spaces(n: usize, k: usize) -> SdgSpaces<f64> {
    let mesh = StaggeredMesh::new(&InitialMesh::unit_square(n).unwrap()).unwrap();
    SdgSpaces::new(mesh, k).unwrap()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `int_s g(x)` with a rule independent of the one the library assembles with.
pub fn integrate_on(
    sp: &SdgSpaces<f64>,
    s: usize,
    degree: usize,
    g: impl Fn([f64; 2]) -> f64,
) -> f64 {
    let q = TriangleQuadrature::<f64>::with_degree(degree);
    let map = sp.mesh().map(s);
    q.points
        .iter()
        .zip(&q.weights)
        .map(|(p, w)| w * g(map.to_physical(*p)))
        .sum::<f64>()
        * map.det.abs()
}

/// Macro-by-macro L2 projection of `f` onto a dof map, using only point
/// evaluation. Exact when `f` lies in the space.
fn project(
    sp: &SdgSpaces<f64>,
    map: &DofMap<f64>,
    degree: usize,
    eval: impl Fn(usize, [f64; 2], &[f64]) -> Vec<f64>,
    f: impl Fn([f64; 2]) -> Vec<f64>,
) -> Vec<f64> {
    let n = map.num_dofs();
    let mut out = vec![0.0; n];
    for mac in map.macros() {
        let c = mac.count;
        if c == 0 {
            continue;
        }
        let basis: Vec<Vec<f64>> = mac.range().map(|i| unit(n, i)).collect();
        let mut gram = Mat::<f64>::zeros(c, c);
        let mut rhs = Mat::<f64>::zeros(c, 1);
        for &s in &mac.elements {
            for i in 0..c {
                rhs[(i, 0)] += integrate_on(sp, s, degree, |x| {
                    eval(s, x, &basis[i])
                        .iter()
                        .zip(f(x))
                        .map(|(a, b)| a * b)
                        .sum()
                });
                for j in 0..c {
                    gram[(i, j)] += integrate_on(sp, s, degree, |x| {
                        eval(s, x, &basis[i])
                            .iter()
                            .zip(eval(s, x, &basis[j]))
                            .map(|(a, b)| a * b)
                            .sum()
                    });
                }
            }
        }
        let sol = gram.partial_piv_lu().solve(&rhs);
        for (i, g) in mac.range().enumerate() {
            out[g] = sol[(i, 0)];
        }
    }
    out
}

pub fn project_scalar(sp: &SdgSpaces<f64>, degree: usize, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    project(
        sp,
        sp.uh(),
        degree,
        |s, x, c| vec![sp.scalar_on(s, x, c)],
        |x| vec![f(x)],
    )
}

pub fn project_vector(
    sp: &SdgSpaces<f64>,
    degree: usize,
    f: impl Fn([f64; 2]) -> [f64; 2],
) -> Vec<f64> {
    project(
        sp,
        sp.wh(),
        degree,
        |s, x, c| sp.vector_on(s, x, c).to_vec(),
        |x| f(x).to_vec(),
    )
}
