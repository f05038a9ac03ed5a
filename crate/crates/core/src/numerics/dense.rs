//! Real dense kernels on row-major square matrices stored in slices.

/// Square real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "RealMatrix data length");
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// `C = A B` for `n × n` matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let ci = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let bk = &b[k * n..(k + 1) * n];
            for (cij, bkj) in ci.iter_mut().zip(bk) {
                *cij += aik * bkj;
            }
        }
    }
    c
}

/// `tr(A B)` for symmetric `B` (equivalently the Frobenius inner product).
pub fn frobenius_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn frobenius_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Replaces `a` by `(a + aᵀ)/2`.
pub fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a pivot is not positive.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            for (x, y) in ri.iter().zip(rj) {
                s -= x * y;
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place.
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// `(L Lᵀ)⁻¹` from the Cholesky factor.
pub fn cholesky_inverse(l: &[f64], n: usize) -> Vec<f64> {
    // invert L first, then form L⁻ᵀ L⁻¹
    let mut linv = vec![0.0; n * n];
    for j in 0..n {
        linv[j * n + j] = 1.0 / l[j * n + j];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * n + k] * linv[k * n + j];
            }
            linv[i * n + j] = s / l[i * n + i];
        }
    }
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..n {
                s += linv[k * n + i] * linv[k * n + j];
            }
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    inv
}

/// `L⁻¹ A L⁻ᵀ` for lower-triangular `L` and symmetric `A`.
pub fn whiten(l: &[f64], a: &[f64], n: usize) -> Vec<f64> {
    // forward-substitute on columns: T = L⁻¹ A
    let mut t = a.to_vec();
    for col in 0..n {
        for i in 0..n {
            let mut s = t[i * n + col];
            for k in 0..i {
                s -= l[i * n + k] * t[k * n + col];
            }
            t[i * n + col] = s / l[i * n + i];
        }
    }
    // W = T L⁻ᵀ, i.e. Wᵀ = L⁻¹ Tᵀ
    let mut w = vec![0.0; n * n];
    for row in 0..n {
        for i in 0..n {
            let mut s = t[row * n + i];
            for k in 0..i {
                s -= l[i * n + k] * w[row * n + k];
            }
            w[row * n + i] = s / l[i * n + i];
        }
    }
    symmetrize(&mut w, n);
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + i as f64 + j as f64);
            }
            a[i * n + i] += n as f64;
        }
        a
    }

    #[test]
    fn cholesky_roundtrip_and_inverse() {
        let n = 5;
        let a = spd(n);
        let l = cholesky(&a, n).unwrap();
        let inv = cholesky_inverse(&l, n);
        let prod = matmul(&a, &inv, n);
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * n + j] - e).abs() < 1e-12);
            }
        }
        let mut b: Vec<f64> = (0..n).map(|i| i as f64 - 1.0).collect();
        let b0 = b.clone();
        cholesky_solve(&l, n, &mut b);
        for i in 0..n {
            let ax: f64 = (0..n).map(|k| a[i * n + k] * b[k]).sum();
            assert!((ax - b0[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn whiten_of_factored_matrix_is_identity() {
        let n = 4;
        let a = spd(n);
        let l = cholesky(&a, n).unwrap();
        let w = whiten(&l, &a, n);
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((w[i * n + j] - e).abs() < 1e-12);
            }
        }
    }
}
