//! Cyclic Jacobi eigensolver.
//!
//! Complex Hermitian matrices are diagonalized through their real embedding
//! `[[Re M, -Im M], [Im M, Re M]]`, whose spectrum is the spectrum of `M`
//! with every eigenvalue doubled. Each real eigenvector `(u; v)` maps to the
//! complex eigenvector `u + i v`; a pivoted Gram-Schmidt pass picks `d`
//! orthonormal ones out of the `2d` candidates.

use super::dense::RealMatrix;
use super::{ComplexMatrix, HermitianMatrix, C64};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `M = V diag(values) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: ComplexMatrix,
}

/// Eigenvalues (ascending) and eigenvectors (columns of a row-major
/// orthogonal matrix) of a real symmetric `n × n` matrix.
pub fn eig_symmetric(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += m[p * n + q] * m[p * n + q];
                }
            }
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[p * n + q];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[k * n + p];
                        let mkq = m[k * n + q];
                        m[k * n + p] = c * mkp - s * mkq;
                        m[k * n + q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[p * n + k];
                        let mqk = m[q * n + k];
                        m[p * n + k] = c * mpk - s * mqk;
                        m[q * n + k] = s * mpk + c * mqk;
                    }
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    (values, vectors)
}

/// `[[Re M, -Im M], [Im M, Re M]]`.
pub fn real_embedding(m: &HermitianMatrix) -> RealMatrix {
    let d = m.dim();
    let n = 2 * d;
    let mut e = RealMatrix::zeros(n);
    for j in 0..d {
        for k in 0..d {
            let z = m.get(j, k);
            e.set(j, k, z.re);
            e.set(j + d, k + d, z.re);
            e.set(j + d, k, z.im);
            e.set(j, k + d, -z.im);
        }
    }
    e
}

pub fn eig_hermitian(m: &HermitianMatrix) -> HermitianEigen {
    let d = m.dim();
    let n = 2 * d;
    let emb = real_embedding(m);
    let (_, rv) = eig_symmetric(emb.data(), n);

    let mut candidates: Vec<Vec<C64>> = (0..n)
        .map(|col| (0..d).map(|j| C64::new(rv[j * n + col], rv[(j + d) * n + col])).collect())
        .collect();
    let mut chosen: Vec<Vec<C64>> = Vec::with_capacity(d);
    for _ in 0..d {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, super::vec_norm(c)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut v = candidates.swap_remove(best);
        let nv = super::vec_norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        // re-orthogonalize once against earlier picks to clean up round-off
        for u in &chosen {
            let p = super::inner(u, &v);
            v.iter_mut().zip(u).for_each(|(z, uz)| *z -= p * uz);
        }
        let nv = super::vec_norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        for c in candidates.iter_mut() {
            let p = super::inner(&v, c);
            c.iter_mut().zip(&v).for_each(|(z, vz)| *z -= p * vz);
        }
        chosen.push(v);
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = chosen.into_iter().map(|v| (m.expectation(&v), v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<Vec<C64>> = pairs.into_iter().map(|p| p.1).collect();
    HermitianEigen {
        values,
        vectors: ComplexMatrix::from_columns(&cols).expect("d columns of length d"),
    }
}

/// `true` iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> bool {
    let emb = real_embedding(m);
    let (vals, _) = eig_symmetric(emb.data(), 2 * m.dim());
    vals[0] >= -tol
}
