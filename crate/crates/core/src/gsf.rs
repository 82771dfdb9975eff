//! Gohberg-Semencul representation of a Toeplitz inverse: four triangular
//! Toeplitz factors built from the solutions of A x = e_1 and A y = e_n,
//! applied through cached FFTs.

use crate::error::{Result, SolverError};
use crate::toeplitz::{Toeplitz, ToeplitzOperator};

/// Relative threshold on |x[0]| below which the formula is refused.
pub const XI0_THRESHOLD: f64 = 1e-12;

/// Cached inverse. `apply` evaluates A^{-1} v in O(n log n).
pub struct GsfInverse {
    n: usize,
    xi0: f64,
    lower: ToeplitzOperator,
    upper: ToeplitzOperator,
    lower0: ToeplitzOperator,
    upper0: ToeplitzOperator,
}

/// Assemble the four triangular factors from the two special solutions.
pub fn gsf_build(a: &Toeplitz, x: &[f64], y: &[f64]) -> Result<GsfInverse> {
    let n = a.n;
    if x.len() != n || y.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: x.len().min(y.len()),
        });
    }
    let xi0 = x[0];
    let xmax = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if xi0.abs() < XI0_THRESHOLD * xmax {
        return Err(SolverError::GsfInapplicable { xi0 });
    }

    // lower triangular with first column x
    let mut row = vec![0.0; n];
    row[0] = x[0];
    let lower = Toeplitz::new(x.to_vec(), row)?;

    // upper triangular with first row (y_{n-1}, y_{n-2}, ..., y_0)
    let mut col = vec![0.0; n];
    col[0] = y[n - 1];
    let rev: Vec<f64> = y.iter().rev().copied().collect();
    let upper = Toeplitz::new(col, rev)?;

    // strictly lower with first column (0, y_0, ..., y_{n-2})
    let mut col0 = vec![0.0; n];
    col0[1..].copy_from_slice(&y[..n - 1]);
    let lower0 = Toeplitz::new(col0, vec![0.0; n])?;

    // strictly upper with first row (0, x_{n-1}, ..., x_1)
    let mut row0 = vec![0.0; n];
    for k in 1..n {
        row0[k] = x[n - k];
    }
    let upper0 = Toeplitz::new(vec![0.0; n], row0)?;

    Ok(GsfInverse {
        n,
        xi0,
        lower: ToeplitzOperator::new(&lower)?,
        upper: ToeplitzOperator::new(&upper)?,
        lower0: ToeplitzOperator::new(&lower0)?,
        upper0: ToeplitzOperator::new(&upper0)?,
    })
}

impl GsfInverse {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    /// z = (L R v - L0 R0 v) / xi0 via four triangular Toeplitz products.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(SolverError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut z1 = vec![0.0; self.n];
        let mut z2 = vec![0.0; self.n];
        let mut z3 = vec![0.0; self.n];
        let mut z4 = vec![0.0; self.n];
        self.upper0.apply(v, &mut z1)?;
        self.upper.apply(v, &mut z2)?;
        self.lower0.apply(&z1, &mut z3)?;
        self.lower.apply(&z2, &mut z4)?;
        let inv = 1.0 / self.xi0;
        Ok(z4
            .iter()
            .zip(&z3)
            .map(|(a, b)| (a - b) * inv)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::dense_lu_solve;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        e
    }

    #[test]
    fn identity_inverse_is_identity() {
        let n = 6;
        let a = Toeplitz::identity(n);
        let g = gsf_build(&a, &unit(n, 0), &unit(n, n - 1)).unwrap();
        assert_eq!(g.xi0(), 1.0);
        let v = vec![1.0, -2.0, 0.5, 3.0, 0.0, 4.0];
        let z = g.apply(&v).unwrap();
        for (a, b) in z.iter().zip(&v) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (3.0, 1.0, -2.0);
        let det = a * a - b * c;
        let t = Toeplitz::new(vec![a, c], vec![a, b]).unwrap();
        let x = vec![a / det, -c / det];
        let y = vec![-b / det, a / det];
        let g = gsf_build(&t, &x, &y).unwrap();
        let v = vec![1.0, 2.0];
        let z = g.apply(&v).unwrap();
        let want = vec![(a * 1.0 - b * 2.0) / det, (-c * 1.0 + a * 2.0) / det];
        for (p, q) in z.iter().zip(&want) {
            assert_relative_eq!(p, q, max_relative = 1e-13);
        }
    }

    fn random_dd_toeplitz(rng: &mut impl Rng, n: usize) -> Toeplitz {
        let mut col: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dom: f64 = col.iter().chain(row.iter()).map(|v| v.abs()).sum();
        col[0] = dom + 1.0;
        row[0] = col[0];
        Toeplitz::new(col, row).unwrap()
    }

    #[test]
    fn matches_dense_inverse_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let n = 64;
            let t = random_dd_toeplitz(&mut rng, n);
            let dense = t.to_dense();
            let x = dense_lu_solve(&dense, &unit(n, 0)).unwrap();
            let y = dense_lu_solve(&dense, &unit(n, n - 1)).unwrap();
            let g = gsf_build(&t, &x, &y).unwrap();

            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z = g.apply(&v).unwrap();
            // residual ||A z - v|| / ||v||
            let az = t.matvec(&z).unwrap();
            let vnorm = v.iter().map(|q| q * q).sum::<f64>().sqrt();
            let rnorm = az
                .iter()
                .zip(&v)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            assert!(rnorm / vnorm <= 1e-8, "residual {:.3e}", rnorm / vnorm);

            // agreement with the dense solve
            let xd = dense_lu_solve(&dense, &v).unwrap();
            let xnorm = xd.iter().map(|q| q * q).sum::<f64>().sqrt();
            let dnorm = z
                .iter()
                .zip(&xd)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            assert!(dnorm / xnorm <= 1e-8);
        }
    }

    #[test]
    fn apply_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 32;
        let t = random_dd_toeplitz(&mut rng, n);
        let dense = t.to_dense();
        let x = dense_lu_solve(&dense, &unit(n, 0)).unwrap();
        let y = dense_lu_solve(&dense, &unit(n, n - 1)).unwrap();
        let g = gsf_build(&t, &x, &y).unwrap();

        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (al, be) = (0.7, -1.3);
        let mixed: Vec<f64> = u.iter().zip(&v).map(|(p, q)| al * p + be * q).collect();
        let lhs = g.apply(&mixed).unwrap();
        let gu = g.apply(&u).unwrap();
        let gv = g.apply(&v).unwrap();
        let scale = lhs.iter().map(|q| q * q).sum::<f64>().sqrt().max(1.0);
        for i in 0..n {
            assert!((lhs[i] - (al * gu[i] + be * gv[i])).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn rejects_vanishing_leading_entry() {
        let n = 4;
        let a = Toeplitz::identity(n);
        let x = vec![0.0, 1.0, 0.0, 0.0];
        let y = unit(n, n - 1);
        assert!(matches!(
            gsf_build(&a, &x, &y),
            Err(SolverError::GsfInapplicable { .. })
        ));
    }
}
