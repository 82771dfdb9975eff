//! Toeplitz representation, arbitrary-length DFT, FFT matvec via circulant
//! embedding, and a dense LU fallback path.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::sync::Arc;

use crate::error::{Result, SolverError};

thread_local! {
    // shared planner so same-size transforms reuse their twiddle tables
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    // reusable work buffers for the embedding matvec
    static WORK: RefCell<(Vec<Complex64>, Vec<Complex64>)> =
        const { RefCell::new((Vec::new(), Vec::new())) };
}

pub(crate) fn plan_forward(m: usize) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m))
}

pub(crate) fn plan_inverse(m: usize) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m))
}

/// Transform direction for [`dft`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Discrete Fourier transform of arbitrary length. Forward is unnormalized;
/// inverse carries the 1/n factor.
pub fn dft(v: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Err(SolverError::EmptyInput("dft of zero-length sequence".into()));
    }
    let mut buf = v.to_vec();
    match direction {
        Direction::Forward => plan_forward(v.len()).process(&mut buf),
        Direction::Inverse => {
            plan_inverse(v.len()).process(&mut buf);
            let scale = 1.0 / v.len() as f64;
            for z in &mut buf {
                *z *= scale;
            }
        }
    }
    Ok(buf)
}

/// A real Toeplitz matrix stored as first column and first row.
#[derive(Debug, Clone)]
pub struct Toeplitz {
    pub n: usize,
    pub col: Vec<f64>,
    pub row: Vec<f64>,
}

impl Toeplitz {
    pub fn new(col: Vec<f64>, row: Vec<f64>) -> Result<Self> {
        if col.is_empty() || col.len() != row.len() {
            return Err(SolverError::DimensionMismatch {
                expected: col.len(),
                got: row.len(),
            });
        }
        if col[0] != row[0] {
            return Err(SolverError::Domain(format!(
                "Toeplitz col[0] = {} and row[0] = {} must agree",
                col[0], row[0]
            )));
        }
        Ok(Self {
            n: col.len(),
            col,
            row,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut col = vec![0.0; n];
        col[0] = 1.0;
        Self {
            n,
            col: col.clone(),
            row: col,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.col[i - j]
        } else {
            self.row[j - i]
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                data[i * self.n + j] = self.entry(i, j);
            }
        }
        DenseMatrix { n: self.n, data }
    }

    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            col: self.row.clone(),
            row: self.col.clone(),
        }
    }

    /// One-shot FFT matvec. Prefer [`ToeplitzOperator`] when the same matrix
    /// is applied repeatedly.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let op = ToeplitzOperator::new(self)?;
        let mut out = vec![0.0; self.n];
        op.apply(v, &mut out)?;
        Ok(out)
    }
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Prepared FFT matvec engine: the Toeplitz generator is embedded in a
/// circulant of power-of-two size >= 2n and its DFT cached.
pub struct ToeplitzOperator {
    n: usize,
    m: usize,
    generator_hat: Vec<Complex64>,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
}

impl ToeplitzOperator {
    pub fn new(t: &Toeplitz) -> Result<Self> {
        let n = t.n;
        let m = next_pow2(2 * n);
        let mut gen = vec![Complex64::new(0.0, 0.0); m];
        for (g, &c) in gen.iter_mut().zip(&t.col) {
            *g = Complex64::new(c, 0.0);
        }
        for k in 1..n {
            gen[m - k] = Complex64::new(t.row[k], 0.0);
        }
        let fwd = plan_forward(m);
        let inv = plan_inverse(m);
        fwd.process(&mut gen);
        Ok(Self {
            n,
            m,
            generator_hat: gen,
            fwd,
            inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(SolverError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        WORK.with(|w| {
            let (buf, scratch) = &mut *w.borrow_mut();
            buf.clear();
            buf.resize(self.m, Complex64::new(0.0, 0.0));
            for (b, &x) in buf.iter_mut().zip(v) {
                b.re = x;
            }
            let need = self
                .fwd
                .get_inplace_scratch_len()
                .max(self.inv.get_inplace_scratch_len());
            scratch.resize(need, Complex64::new(0.0, 0.0));
            self.fwd.process_with_scratch(buf, scratch);
            for (b, g) in buf.iter_mut().zip(&self.generator_hat) {
                *b *= g;
            }
            self.inv.process_with_scratch(buf, scratch);
            let scale = 1.0 / self.m as f64;
            for (o, b) in out.iter_mut().zip(buf.iter()) {
                *o = b.re * scale;
            }
        });
        Ok(())
    }
}

/// Row-major dense matrix with an LU path for the direct solver.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * n..(i + 1) * n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Partial-pivot LU factorization; the factors are reusable across
    /// right-hand sides.
    pub fn lu(&self) -> Result<LuFactors> {
        let n = self.n;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut maxv = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > maxv {
                    maxv = v;
                    p = i;
                }
            }
            if maxv == 0.0 {
                return Err(SolverError::SingularMatrix { column: k });
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    let (head, tail) = lu.split_at_mut(i * n);
                    let krow = &head[k * n + k + 1..k * n + n];
                    let irow = &mut tail[k + 1..n];
                    for (iv, kv) in irow.iter_mut().zip(krow) {
                        *iv -= factor * kv;
                    }
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }
}

/// LU factors with row permutation.
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let mut acc = x[i];
            for (j, &l) in row.iter().enumerate() {
                acc -= l * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i..(i + 1) * n];
            let mut acc = x[i];
            for (k, &u) in row.iter().enumerate().skip(1) {
                acc -= u * x[i + k];
            }
            x[i] = acc / row[0];
        }
        Ok(x)
    }
}

/// Factor and solve in one call.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    a.lu()?.solve(b)
}
