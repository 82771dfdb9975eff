//! Circulant operators stored by their DFT eigenvalues, the Strang
//! approximation of a Toeplitz matrix, and spectrum checks for the
//! preconditioner.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Result, SolverError};
use crate::toeplitz::{plan_forward, plan_inverse, Toeplitz};

/// Relative eigenvalue threshold below which a circulant is treated as
/// singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-14;

/// A circulant matrix represented by the DFT of its first column.
#[derive(Clone)]
pub struct CirculantOperator {
    n: usize,
    eigs: Vec<Complex64>,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
}

impl std::fmt::Debug for CirculantOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantOperator")
            .field("n", &self.n)
            .finish()
    }
}

impl CirculantOperator {
    /// Build from the first column; one forward DFT.
    pub fn from_first_column(col: &[f64]) -> Result<Self> {
        if col.is_empty() {
            return Err(SolverError::EmptyInput("circulant first column".into()));
        }
        let n = col.len();
        let fwd = plan_forward(n);
        let inv = plan_inverse(n);
        let mut eigs: Vec<Complex64> = col.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fwd.process(&mut eigs);
        Ok(Self { n, eigs, fwd, inv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigs
    }

    pub fn is_singular(&self) -> bool {
        let max = self.eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.eigs
            .iter()
            .any(|z| z.norm() < SINGULARITY_THRESHOLD * max)
    }

    /// Linear combination eta*I - sigma*(sum of scaled circulants), all
    /// operating on the same dimension. Used to assemble preconditioners.
    pub fn affine_combination(
        eta: f64,
        sigma: f64,
        parts: &[(f64, &CirculantOperator)],
    ) -> Result<Self> {
        let n = parts
            .first()
            .map(|(_, c)| c.n)
            .ok_or_else(|| SolverError::EmptyInput("affine_combination parts".into()))?;
        let mut eigs = vec![Complex64::new(eta, 0.0); n];
        for &(scale, c) in parts {
            if c.n != n {
                return Err(SolverError::DimensionMismatch {
                    expected: n,
                    got: c.n,
                });
            }
            for (e, &ce) in eigs.iter_mut().zip(&c.eigs) {
                *e -= sigma * scale * ce;
            }
        }
        Ok(Self {
            n,
            eigs,
            fwd: parts[0].1.fwd.clone(),
            inv: parts[0].1.inv.clone(),
        })
    }

    fn transform(&self, v: &[f64], solve: bool) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(SolverError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        if solve {
            let max = self.eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (k, (b, e)) in buf.iter_mut().zip(&self.eigs).enumerate() {
                if e.norm() < SINGULARITY_THRESHOLD * max {
                    return Err(SolverError::SingularCirculant {
                        index: k,
                        modulus: e.norm(),
                    });
                }
                *b /= e;
            }
        } else {
            for (b, e) in buf.iter_mut().zip(&self.eigs) {
                *b *= e;
            }
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        Ok(buf.iter().map(|z| z.re * scale).collect())
    }

    /// Matrix-vector product through the eigenvalue representation.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.transform(v, false)
    }

    /// Solve C x = v through the eigenvalue representation.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.transform(v, true)
    }

    /// Dense first column (inverse DFT of the eigenvalues).
    pub fn first_column(&self) -> Vec<f64> {
        let mut buf = self.eigs.clone();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|z| z.re * scale).collect()
    }
}

/// Prepared application of a circulant inverse. The inverse of a circulant
/// is circulant, so its first column is computed once and applied through
/// the power-of-two Toeplitz embedding; awkward prime-factor lengths then
/// cost one setup transform instead of two per application.
pub struct CirculantInverse {
    op: crate::toeplitz::ToeplitzOperator,
}

impl CirculantInverse {
    pub fn new(c: &CirculantOperator) -> Result<Self> {
        let max = c.eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut inv_eigs = Vec::with_capacity(c.n);
        for (k, e) in c.eigs.iter().enumerate() {
            if e.norm() < SINGULARITY_THRESHOLD * max {
                return Err(SolverError::SingularCirculant {
                    index: k,
                    modulus: e.norm(),
                });
            }
            inv_eigs.push(Complex64::new(1.0, 0.0) / e);
        }
        c.inv.process(&mut inv_eigs);
        let scale = 1.0 / c.n as f64;
        let col: Vec<f64> = inv_eigs.iter().map(|z| z.re * scale).collect();
        let mut row = vec![0.0; c.n];
        row[0] = col[0];
        for k in 1..c.n {
            row[k] = col[c.n - k];
        }
        let t = Toeplitz::new(col, row)?;
        Ok(Self {
            op: crate::toeplitz::ToeplitzOperator::new(&t)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.op.apply(v, out)
    }
}

/// Strang circulant approximation: copy the central band of the Toeplitz
/// matrix. The midpoint index n/2 at even n is taken from the column.
pub fn strang(t: &Toeplitz) -> Result<CirculantOperator> {
    if t.n < 2 {
        return Err(SolverError::Domain("strang requires n >= 2".into()));
    }
    let n = t.n;
    let half = n / 2;
    let mut col = vec![0.0; n];
    for (k, c) in col.iter_mut().enumerate() {
        if k <= half {
            *c = t.col[k];
        } else {
            *c = t.row[n - k];
        }
    }
    CirculantOperator::from_first_column(&col)
}

/// Spectrum check for the Strang approximation of the spatial weight matrix:
/// every eigenvalue must have strictly negative real part. This is the
/// property the preconditioner's nonsingularity rests on. The modulus bound
/// 2|omega_1| does not hold for small beta; see [`spectrum_bounds`] for the
/// observed extremes.
pub fn gershgorin_check(c: &CirculantOperator) -> bool {
    c.eigenvalues().iter().all(|z| z.re < 0.0)
}

/// (min real part, max real part, max modulus) of the operator's spectrum.
pub fn spectrum_bounds(c: &CirculantOperator) -> (f64, f64, f64) {
    let mut min_re = f64::INFINITY;
    let mut max_re = f64::NEG_INFINITY;
    let mut max_mod: f64 = 0.0;
    for z in c.eigenvalues() {
        min_re = min_re.min(z.re);
        max_re = max_re.max(z.re);
        max_mod = max_mod.max(z.norm());
    }
    (min_re, max_re, max_mod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::shifted_weights;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dense_circulant_matvec(col: &[f64], v: &[f64]) -> Vec<f64> {
        let n = col.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                out[i] += col[(n + i - j) % n] * v[j];
            }
        }
        out
    }

    #[test]
    fn identity_circulant() {
        let mut col = vec![0.0; 5];
        col[0] = 1.0;
        let c = CirculantOperator::from_first_column(&col).unwrap();
        let v = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        for (a, b) in c.apply(&v).unwrap().iter().zip(&v) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        for (a, b) in c.solve(&v).unwrap().iter().zip(&v) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn apply_matches_dense_oracle_n33() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let col: Vec<f64> = (0..33).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..33).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CirculantOperator::from_first_column(&col).unwrap();
        let fast = c.apply(&v).unwrap();
        let dense = dense_circulant_matvec(&col, &v);
        let scale = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn solve_apply_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 40;
        let mut col: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
        col[0] = 3.0; // well conditioned
        let c = CirculantOperator::from_first_column(&col).unwrap();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = c.solve(&c.apply(&v).unwrap()).unwrap();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (a, b) in w.iter().zip(&v) {
            assert!((a - b).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn solve_singular_names_index() {
        // eigenvalues of the all-ones circulant vanish away from DC
        let c = CirculantOperator::from_first_column(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        match c.solve(&[1.0, 2.0, 3.0, 4.0]) {
            Err(SolverError::SingularCirculant { index, .. }) => assert!(index > 0),
            other => panic!("expected singularity error, got {other:?}"),
        }
    }

    #[test]
    fn strang_banding_rule() {
        let t = Toeplitz::new(vec![2.0, -1.0, 0.0, 0.0], vec![2.0, -1.0, 0.0, 0.0]).unwrap();
        let c = strang(&t).unwrap();
        let col = c.first_column();
        let want = [2.0, -1.0, 0.0, -1.0];
        for (a, b) in col.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        // closed-form circulant spectrum {2 - 2cos(2 pi k / 4)}
        let mut mags: Vec<f64> = c.eigenvalues().iter().map(|z| z.re).collect();
        mags.sort_by(f64::total_cmp);
        let want_eigs = [0.0, 2.0, 2.0, 4.0];
        for (a, b) in mags.iter().zip(&want_eigs) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        for z in c.eigenvalues() {
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn strang_fixed_point_on_circulant_input() {
        // Toeplitz that is already circulant: col and row wrap consistently
        let col = vec![5.0, 1.0, 2.0, 3.0];
        let row = vec![5.0, 3.0, 2.0, 1.0];
        let t = Toeplitz::new(col.clone(), row).unwrap();
        let c = strang(&t).unwrap();
        let got = c.first_column();
        for (a, b) in got.iter().zip(&col) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    fn spatial_strang(beta: f64, n: usize) -> (CirculantOperator, f64) {
        let sw = shifted_weights(beta, n + 1);
        let mut col = vec![0.0; n];
        let mut row = vec![0.0; n];
        col.copy_from_slice(&sw.omega[1..=n]);
        row[0] = sw.omega[1];
        if n >= 2 {
            row[1] = sw.omega[0];
        }
        let t = Toeplitz::new(col, row).unwrap();
        (strang(&t).unwrap(), sw.omega[1])
    }

    #[test]
    fn gershgorin_on_spatial_weights() {
        let (c, w1) = spatial_strang(1.5, 64);
        assert!(gershgorin_check(&c));
        let (_, _, max_mod) = spectrum_bounds(&c);
        assert!(max_mod <= 2.0 * w1.abs());

        let (c, w1) = spatial_strang(1.1, 5);
        assert!(gershgorin_check(&c));
        // the 2|omega_1| modulus bound fails near beta = 1; pin the observed
        // violation so the behavior is documented
        let (_, _, max_mod) = spectrum_bounds(&c);
        assert!(max_mod > 2.0 * w1.abs());

        // beta = 2: the DC eigenvalue of the Laplacian band hits zero, so the
        // strict check fails there while the modulus bound is tight
        let (c, w1) = spatial_strang(2.0, 64);
        let (_, max_re, max_mod) = spectrum_bounds(&c);
        assert!(max_re <= 1e-12);
        assert!(max_mod <= 2.0 * w1.abs() + 1e-12);
    }
}
