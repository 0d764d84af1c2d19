//! Dense Hermitian eigendecomposition by cyclic Jacobi rotations.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Eigenvalues (descending) and orthonormal eigenvectors (column-major:
/// `vectors[k + j * n]` is component `k` of eigenvector `j`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Complex64>,
    pub sweeps: usize,
    pub offdiag_norm: f64,
}

/// Cyclic Jacobi for a Hermitian matrix given row-major.
///
/// Terminates when the off-diagonal Frobenius norm drops below
/// `1e-12 * ||A||_F`; fails after `max_sweeps` full sweeps.
pub fn jacobi_hermitian(matrix: &[Complex64], n: usize, max_sweeps: usize) -> Result<HermitianEigen> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        v[j + j * n] = Complex64::new(1.0, 0.0);
    }
    let norm_f = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-12 * norm_f.max(1e-300);

    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[q + p * n].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut offn = off(&a);
    while offn > tol {
        if sweeps >= max_sweeps {
            return Err(Error::EigFail { sweeps, offdiag: offn });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[q + p * n];
                let babs = beta.norm();
                if babs <= tol / (n as f64) {
                    continue;
                }
                let phase = beta / babs;
                let alpha = a[p + p * n].re;
                let gamma = a[q + q * n].re;
                let tau = (gamma - alpha) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_ph = s * phase; // s e^{i phi}
                let s_phc = s_ph.conj();

                // Update rows/columns p and q of A (Hermitian storage kept
                // fully materialized for simplicity).
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[p + j * n];
                    let ajq = a[q + j * n];
                    let new_jp = c * ajp - s_phc * ajq;
                    let new_jq = s_ph * ajp + c * ajq;
                    a[p + j * n] = new_jp;
                    a[q + j * n] = new_jq;
                    a[j + p * n] = new_jp.conj();
                    a[j + q * n] = new_jq.conj();
                }
                let app = alpha - t * babs;
                let aqq = gamma + t * babs;
                a[p + p * n] = Complex64::new(app, 0.0);
                a[q + q * n] = Complex64::new(aqq, 0.0);
                a[q + p * n] = Complex64::new(0.0, 0.0);
                a[p + q * n] = Complex64::new(0.0, 0.0);

                // Accumulate V <- V G.
                for j in 0..n {
                    let vjp = v[p + j * n];
                    let vjq = v[q + j * n];
                    v[p + j * n] = c * vjp - s_phc * vjq;
                    v[q + j * n] = s_ph * vjp + c * vjq;
                }
            }
        }
        offn = off(&a);
    }

    // Sort descending by eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j + j * n].re.partial_cmp(&a[i + i * n].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&j| a[j + j * n].re).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (col_new, &col_old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k + col_new * n] = v[col_old + k * n];
        }
    }
    Ok(HermitianEigen { values, vectors, sweeps, offdiag_norm: offn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgauss::RngStream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_sorted_passthrough() {
        let n = 4;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (j, d) in [0.5, 2.0, 1.0, -0.25].iter().enumerate() {
            m[j + j * n] = Complex64::new(*d, 0.0);
        }
        let e = jacobi_hermitian(&m, n, 100).unwrap();
        assert_eq!(e.values, vec![2.0, 1.0, 0.5, -0.25]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, g) = (1.5, c(0.3, -0.7), -0.5);
        let m = vec![c(a, 0.0), b, b.conj(), c(g, 0.0)];
        let e = jacobi_hermitian(&m, 2, 100).unwrap();
        let disc = ((a - g) * (a - g) + 4.0 * b.norm_sqr()).sqrt();
        let lo = 0.5 * (a + g - disc);
        let hi = 0.5 * (a + g + disc);
        assert!((e.values[0] - hi).abs() < 1e-13);
        assert!((e.values[1] - lo).abs() < 1e-13);
    }

    #[test]
    fn reconstruction_and_orthonormality_random() {
        let n = 24;
        let mut st = RngStream::new(2718, 0);
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in p..n {
                let g = st.complex_gaussian();
                if p == q {
                    m[p + p * n] = Complex64::new(g.re, 0.0);
                } else {
                    m[q + p * n] = g;
                    m[p + q * n] = g.conj();
                }
            }
        }
        let e = jacobi_hermitian(&m, n, 100).unwrap();
        // Orthonormality to 1e-10.
        for i in 0..n {
            for j in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    dot += e.vectors[k + i * n].conj() * e.vectors[k + j * n];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - c(target, 0.0)).norm() < 1e-10);
            }
        }
        // Reconstruction ||V L V* - M||_F <= 1e-10 ||M||_F.
        let mut err = 0.0;
        let mut nf = 0.0;
        for r in 0..n {
            for cidx in 0..n {
                let mut rec = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    rec += e.vectors[r + j * n] * e.values[j] * e.vectors[cidx + j * n].conj();
                }
                err += (rec - m[cidx + r * n]).norm_sqr();
                nf += m[cidx + r * n].norm_sqr();
            }
        }
        assert!(err.sqrt() <= 1e-10 * nf.sqrt(), "{} vs {}", err.sqrt(), nf.sqrt());
        // Eigenvalues sorted descending.
        for wpair in e.values.windows(2) {
            assert!(wpair[0] >= wpair[1] - 1e-14);
        }
    }
}
