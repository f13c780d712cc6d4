//! Small dense kernels and the two block-structured operators the scheme
//! produces: block-diagonal matrices (one dense block per first-type
//! macro) and element-coupled matrices (one dense block per subtriangle).

use std::io::Write;

use faer::linalg::solvers::{Llt, Solve};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef, Side};

use crate::{Real, Result, SdgError};

/// Orthonormal basis of the null space of `c`, as the columns of the
/// returned matrix, provided the numerical rank equals `expected_rank`.
///
/// On a rank mismatch the observed rank is returned as the error.
pub fn null_space<T: Real>(
    c: MatRef<'_, T>,
    expected_rank: usize,
) -> std::result::Result<Mat<T>, usize> {
    let n = c.ncols();
    if c.nrows() == 0 {
        return if expected_rank == 0 {
            Ok(Mat::identity(n, n))
        } else {
            Err(0)
        };
    }
    let svd = c.svd().map_err(|_| usize::MAX)?;
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i]).fold(T::zero(), T::max);
    let tol = smax * T::rank_tolerance();
    let rank = (0..s.nrows()).filter(|&i| s[i] > tol).count();
    if rank != expected_rank {
        return Err(rank);
    }
    let v = svd.V();
    Ok(v.subcols(rank, n - rank).to_owned())
}

/// Square block-diagonal matrix.
#[derive(Debug, Clone)]
pub struct BlockDiagonal<T> {
    offsets: Vec<usize>,
    blocks: Vec<Mat<T>>,
}

impl<T: Real> BlockDiagonal<T> {
    pub fn new(blocks: Vec<Mat<T>>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in &blocks {
            assert_eq!(b.nrows(), b.ncols(), "diagonal blocks must be square");
            offsets.push(offsets.last().unwrap() + b.nrows());
        }
        Self { offsets, blocks }
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> MatRef<'_, T> {
        self.blocks[i].as_ref()
    }

    pub fn blocks(&self) -> &[Mat<T>] {
        &self.blocks
    }

    /// First index of block `i`.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![T::zero(); x.len()];
        for (b, block) in self.blocks.iter().enumerate() {
            let o = self.offsets[b];
            for i in 0..block.nrows() {
                let mut s = T::zero();
                for j in 0..block.ncols() {
                    s += block[(i, j)] * x[o + j];
                }
                y[o + i] = s;
            }
        }
        y
    }

    pub fn trace(&self) -> T {
        self.blocks
            .iter()
            .map(|b| (0..b.nrows()).map(|i| b[(i, i)]).sum::<T>())
            .sum()
    }

    /// Largest `|A_ij - A_ji|` over all blocks.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..i {
                    m = m.max((b[(i, j)] - b[(j, i)]).abs());
                }
            }
        }
        m
    }

    /// Cholesky factors of every block; fails with the first block index
    /// that is not positive definite.
    pub fn cholesky(&self) -> Result<BlockCholesky<T>> {
        let factors = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| b.llt(Side::Lower).map_err(|_| SdgError::NonSpdBlock(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockCholesky {
            offsets: self.offsets.clone(),
            factors,
        })
    }

    pub fn push_triplets(&self, row0: usize, col0: usize, out: &mut Vec<Triplet<usize, usize, T>>) {
        for (b, block) in self.blocks.iter().enumerate() {
            let o = self.offsets[b];
            for j in 0..block.ncols() {
                for i in 0..block.nrows() {
                    out.push(Triplet::new(row0 + o + i, col0 + o + j, block[(i, j)]));
                }
            }
        }
    }

    pub fn to_sparse(&self) -> Result<SparseColMat<usize, T>> {
        let mut t = Vec::new();
        self.push_triplets(0, 0, &mut t);
        sparse_from_triplets(self.dim(), self.dim(), &t)
    }
}

/// Cached per-block Cholesky factorizations of an SPD [`BlockDiagonal`].
#[derive(Debug)]
pub struct BlockCholesky<T> {
    offsets: Vec<usize>,
    factors: Vec<Llt<T>>,
}

impl<T: Real> BlockCholesky<T> {
    pub fn solve(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        for (b, f) in self.factors.iter().enumerate() {
            let (o, n) = (self.offsets[b], self.offsets[b + 1] - self.offsets[b]);
            let rhs = Mat::from_fn(n, 1, |i, _| x[o + i]);
            let sol = f.solve(&rhs);
            for i in 0..n {
                y[o + i] = sol[(i, 0)];
            }
        }
        y
    }

    /// `M_b^{-1} rhs` for block `b`.
    pub fn solve_block(&self, b: usize, rhs: MatRef<'_, T>) -> Mat<T> {
        self.factors[b].solve(rhs)
    }
}

/// Rectangular matrix made of dense blocks, one per element, each coupling
/// a contiguous row range to a contiguous column range. Blocks of distinct
/// elements may overlap; entries add.
#[derive(Debug, Clone)]
pub struct ElementBlocks<T> {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    blocks: Vec<Mat<T>>,
}

impl<T: Real> ElementBlocks<T> {
    /// `rows[e]`/`cols[e]` are the first row/column of block `e`.
    pub fn new(
        nrows: usize,
        ncols: usize,
        rows: Vec<usize>,
        cols: Vec<usize>,
        blocks: Vec<Mat<T>>,
    ) -> Self {
        assert!(rows.len() == blocks.len() && cols.len() == blocks.len());
        for ((r, c), b) in rows.iter().zip(&cols).zip(&blocks) {
            assert!(r + b.nrows() <= nrows && c + b.ncols() <= ncols);
        }
        Self {
            nrows,
            ncols,
            rows,
            cols,
            blocks,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, e: usize) -> MatRef<'_, T> {
        self.blocks[e].as_ref()
    }

    pub fn row_offset(&self, e: usize) -> usize {
        self.rows[e]
    }

    pub fn col_offset(&self, e: usize) -> usize {
        self.cols[e]
    }

    /// `A x`
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![T::zero(); self.nrows];
        for (e, b) in self.blocks.iter().enumerate() {
            let (r, c) = (self.rows[e], self.cols[e]);
            for i in 0..b.nrows() {
                let mut s = T::zero();
                for j in 0..b.ncols() {
                    s += b[(i, j)] * x[c + j];
                }
                y[r + i] += s;
            }
        }
        y
    }

    /// `A^T y`
    pub fn apply_transpose(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.nrows);
        let mut x = vec![T::zero(); self.ncols];
        for (e, b) in self.blocks.iter().enumerate() {
            let (r, c) = (self.rows[e], self.cols[e]);
            for j in 0..b.ncols() {
                let mut s = T::zero();
                for i in 0..b.nrows() {
                    s += b[(i, j)] * y[r + i];
                }
                x[c + j] += s;
            }
        }
        x
    }

    pub fn push_triplets(&self, out: &mut Vec<Triplet<usize, usize, T>>) {
        for (e, b) in self.blocks.iter().enumerate() {
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    out.push(Triplet::new(self.rows[e] + i, self.cols[e] + j, b[(i, j)]));
                }
            }
        }
    }

    pub fn to_sparse(&self) -> Result<SparseColMat<usize, T>> {
        let mut t = Vec::new();
        self.push_triplets(&mut t);
        sparse_from_triplets(self.nrows, self.ncols, &t)
    }

    /// Entrywise maximum difference of the assembled matrices.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let a = dense(&self.to_sparse().expect("valid blocks"));
        let b = dense(&other.to_sparse().expect("valid blocks"));
        let mut m = T::zero();
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        m
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for b in &self.blocks {
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    m = m.max(b[(i, j)].abs());
                }
            }
        }
        m
    }
}

pub fn sparse_from_triplets<T: Real>(
    nrows: usize,
    ncols: usize,
    triplets: &[Triplet<usize, usize, T>],
) -> Result<SparseColMat<usize, T>> {
    SparseColMat::try_new_from_triplets(nrows, ncols, triplets)
        .map_err(|e| SdgError::Sparse(format!("{e:?}")))
}

/// Densifies a sparse matrix; intended for tests and small problems.
pub fn dense<T: Real>(a: &SparseColMat<usize, T>) -> Mat<T> {
    let mut m = Mat::zeros(a.nrows(), a.ncols());
    let s = a.as_ref();
    for j in 0..a.ncols() {
        for (i, v) in s.row_idx_of_col(j).zip(s.val_of_col(j)) {
            m[(i, j)] += *v;
        }
    }
    m
}

/// Writes `i j value` lines (zero-based) for every stored entry.
pub fn write_coordinates<T: Real, W: Write>(a: &SparseColMat<usize, T>, mut out: W) -> Result<()> {
    let s = a.as_ref();
    for j in 0..a.ncols() {
        for (i, v) in s.row_idx_of_col(j).zip(s.val_of_col(j)) {
            writeln!(out, "{i} {j} {v:e}")?;
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

#[inline]
pub(crate) fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one_rows() {
        // x0 - x1 = 0 sampled twice: rank 1, null space dimension 2
        let c = Mat::<f64>::from_fn(2, 3, |_, j| [1.0, -1.0, 0.0][j]);
        let z = null_space(c.as_ref(), 1).unwrap();
        assert_eq!(z.ncols(), 2);
        let cz = &c * &z;
        for j in 0..2 {
            for i in 0..2 {
                assert!(cz[(i, j)].abs() < 1e-14);
            }
        }
        let ztz = z.transpose() * &z;
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((ztz[(i, j)] - e).abs() < 1e-14);
            }
        }
        assert_eq!(null_space(c.as_ref(), 2).unwrap_err(), 1);
    }

    #[test]
    fn block_products_agree_with_dense() {
        let blocks = vec![
            Mat::<f64>::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 0.5 }),
            Mat::<f64>::from_fn(1, 1, |_, _| 3.0),
        ];
        let d = BlockDiagonal::new(blocks);
        let x = [1.0, -2.0, 0.5];
        assert_eq!(d.apply(&x), vec![1.0, -3.5, 1.5]);
        let chol = d.cholesky().unwrap();
        let back = d.apply(&chol.solve(&x));
        for (a, b) in back.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }

        let e = ElementBlocks::new(
            3,
            2,
            vec![0, 1],
            vec![0, 0],
            vec![
                Mat::from_fn(2, 2, |i, j| (i + 2 * j) as f64),
                Mat::from_fn(2, 1, |i, _| 1.0 + i as f64),
            ],
        );
        let a = dense(&e.to_sparse().unwrap());
        let x = [1.0, 2.0];
        let y = e.apply(&x);
        for i in 0..3 {
            assert!((y[i] - (a[(i, 0)] * x[0] + a[(i, 1)] * x[1])).abs() < 1e-14);
        }
        let z = [1.0, -1.0, 2.0];
        let w = e.apply_transpose(&z);
        for j in 0..2 {
            let expected: f64 = (0..3).map(|i| a[(i, j)] * z[i]).sum();
            assert!((w[j] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn non_spd_block_is_reported() {
        let d = BlockDiagonal::new(vec![Mat::identity(2, 2), Mat::from_fn(1, 1, |_, _| -1.0)]);
        assert!(matches!(d.cholesky(), Err(SdgError::NonSpdBlock(1))));
    }
}
