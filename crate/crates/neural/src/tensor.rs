//! Row-major 2-D tensor and GEMM wrappers.

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.set(i, i, 1.0);
        }
        t
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NnError::Shape(format!("{} values for a {rows}x{cols} tensor", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NnError::Shape("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn row_vector(values: &[f64]) -> Self {
        Self { rows: 1, cols: values.len(), data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Adds `row` to every row.
    pub fn add_row_broadcast(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "broadcast width mismatch");
        for r in self.data.chunks_exact_mut(self.cols.max(1)) {
            r.iter_mut().zip(row).for_each(|(x, b)| *x += b);
        }
    }

    /// Column sums as a 1×cols tensor.
    pub fn column_sums(&self) -> Self {
        let mut out = Self::zeros(1, self.cols);
        for r in self.data.chunks_exact(self.cols.max(1)) {
            out.data.iter_mut().zip(r).for_each(|(s, x)| *s += x);
        }
        out
    }

    /// `self += other * scale`.
    pub fn axpy(&mut self, scale: f64, other: &Tensor2) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        self.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += scale * y);
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(NnError::NonFinite(what.into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    N,
    T,
}

/// `c = beta * c + op(a) · op(b)`.
fn gemm(a: &Tensor2, ta: Op, b: &Tensor2, tb: Op, beta: f64, c: &mut Tensor2) {
    let (m, k) = match ta {
        Op::N => (a.rows, a.cols),
        Op::T => (a.cols, a.rows),
    };
    let (kb, n) = match tb {
        Op::N => (b.rows, b.cols),
        Op::T => (b.cols, b.rows),
    };
    assert_eq!(k, kb, "gemm inner dimension mismatch");
    assert_eq!((c.rows, c.cols), (m, n), "gemm output shape mismatch");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.data.iter_mut().for_each(|x| *x *= beta);
        return;
    }
    let (rsa, csa) = match ta {
        Op::N => (a.cols as isize, 1),
        Op::T => (1, a.cols as isize),
    };
    let (rsb, csb) = match tb {
        Op::N => (b.cols as isize, 1),
        Op::T => (1, b.cols as isize),
    };
    // SAFETY: the strides above describe in-bounds row-major views of `a` and
    // `b` with the asserted dimensions, and `c` is a distinct m×n buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

fn check_inner(what: &str, k1: usize, k2: usize) -> Result<()> {
    if k1 == k2 {
        Ok(())
    } else {
        Err(NnError::Shape(format!("{what}: inner dimensions {k1} and {k2} differ")))
    }
}

/// `a · b`.
pub fn matmul(a: &Tensor2, b: &Tensor2) -> Result<Tensor2> {
    check_inner("matmul", a.cols, b.rows)?;
    let mut c = Tensor2::zeros(a.rows, b.cols);
    gemm(a, Op::N, b, Op::N, 0.0, &mut c);
    Ok(c)
}

/// `aᵀ · b`.
pub fn matmul_tn(a: &Tensor2, b: &Tensor2) -> Result<Tensor2> {
    check_inner("matmul_tn", a.rows, b.rows)?;
    let mut c = Tensor2::zeros(a.cols, b.cols);
    gemm(a, Op::T, b, Op::N, 0.0, &mut c);
    Ok(c)
}

/// `a · bᵀ`.
pub fn matmul_nt(a: &Tensor2, b: &Tensor2) -> Result<Tensor2> {
    check_inner("matmul_nt", a.cols, b.cols)?;
    let mut c = Tensor2::zeros(a.rows, b.rows);
    gemm(a, Op::N, b, Op::T, 0.0, &mut c);
    Ok(c)
}

/// `acc += aᵀ · b`.
pub fn add_matmul_tn(acc: &mut Tensor2, a: &Tensor2, b: &Tensor2) -> Result<()> {
    check_inner("add_matmul_tn", a.rows, b.rows)?;
    if acc.shape() != (a.cols, b.cols) {
        return Err(NnError::Shape(format!("accumulator {:?} vs {}x{}", acc.shape(), a.cols, b.cols)));
    }
    gemm(a, Op::T, b, Op::N, 1.0, acc);
    Ok(())
}
