use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Kronecker product. The left factor is the most significant subsystem:
/// `(a ⊗ b)[(i*rb + k, j*cb + l)] = a[(i, j)] * b[(k, l)]`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for j in 0..ca {
        for i in 0..ra {
            let x = a[(i, j)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

/// True when `‖m − m†‖ ≤ tol · max(1, ‖m‖)` entrywise.
pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = frobenius(m).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// `|row⟩⟨col|` in a `dim`-dimensional space.
pub fn ket_bra(dim: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(row, col)] = C64::new(1.0, 0.0);
    m
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// `exp(-i h t)` for Hermitian `h` via its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases = CMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Coordinate-list operator used on the propagation hot path, where the
/// Hamiltonians and jump operators have O(dim) nonzeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut op = Self::new(m.nrows());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v.norm_sqr() > 0.0 {
                    op.entries.push((i, j, v));
                }
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row, col, value));
    }

    /// Pushes `value·|row⟩⟨col| + h.c.`.
    pub fn push_hermitian_pair(&mut self, row: usize, col: usize, value: C64) {
        self.push(row, col, value);
        self.push(col, row, value.conj());
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.2.norm_sqr() == 0.0)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, j, v)| (j, i, v.conj())).collect(),
        }
    }

    /// `out += scale · self · x` for a vector.
    pub fn apply_vec(&self, x: &[C64], scale: C64, out: &mut [C64]) {
        for &(i, j, v) in &self.entries {
            out[i] += scale * v * x[j];
        }
    }

    /// `out += scale · self · x` for a column-major square matrix of size `dim`.
    pub fn left_mul_into(&self, x: &[C64], scale: C64, out: &mut [C64]) {
        let n = self.dim;
        for &(i, j, v) in &self.entries {
            let sv = scale * v;
            for c in 0..n {
                out[c * n + i] += sv * x[c * n + j];
            }
        }
    }

    /// `out += scale · x · self` for a column-major square matrix of size `dim`.
    pub fn right_mul_into(&self, x: &[C64], scale: C64, out: &mut [C64]) {
        let n = self.dim;
        for &(i, j, v) in &self.entries {
            let sv = scale * v;
            let (src, dst) = (i * n, j * n);
            for r in 0..n {
                out[dst + r] += sv * x[src + r];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn generic(rows: usize, cols: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| {
            c((seed + 1.3 * i as f64 - 0.7 * j as f64).sin(), (seed * 0.5 + i as f64 * j as f64).cos())
        })
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(tensor_product(&i2, &i2), CMatrix::identity(4, 4));
    }

    #[test]
    fn diagonal_ordering() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let out = tensor_product(&d, &CMatrix::identity(2, 2));
        let want = [1.0, 1.0, 2.0, 2.0];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(out[(k, k)], c(*w, 0.0));
        }
        assert_eq!(frobenius(&out), (1.0f64 + 1.0 + 4.0 + 4.0).sqrt());
    }

    #[test]
    fn index_formula_oracle() {
        let a = generic(2, 2, 0.3);
        let b = generic(3, 3, 1.1);
        let out = tensor_product(&a, &b);
        assert_eq!(out.shape(), (6, 6));
        for r in 0..6 {
            for s in 0..6 {
                let want = a[(r / 3, s / 3)] * b[(r % 3, s % 3)];
                assert!((out[(r, s)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn associativity() {
        let a = generic(2, 2, 0.1);
        let b = generic(3, 2, 0.2);
        let cc = generic(2, 3, 0.3);
        let left = tensor_product(&tensor_product(&a, &b), &cc);
        let right = tensor_product(&a, &tensor_product(&b, &cc));
        assert!(frobenius(&(left - right)) < 1e-13);
    }

    #[test]
    fn sparse_products_match_dense() {
        let s = generic(4, 4, 0.9);
        let x = generic(4, 4, 2.0);
        let op = SparseOp::from_dense(&s);
        let mut l = vec![C64::default(); 16];
        let mut r = vec![C64::default(); 16];
        op.left_mul_into(x.as_slice(), c(1.0, 0.0), &mut l);
        op.right_mul_into(x.as_slice(), c(1.0, 0.0), &mut r);
        assert!(frobenius(&(CMatrix::from_column_slice(4, 4, &l) - &s * &x)) < 1e-13);
        assert!(frobenius(&(CMatrix::from_column_slice(4, 4, &r) - &x * &s)) < 1e-13);
        assert!(frobenius(&(op.adjoint().to_dense() - s.adjoint())) < 1e-15);
    }

    #[test]
    fn expm_of_pauli_x() {
        let mut sx = CMatrix::zeros(2, 2);
        sx[(0, 1)] = c(1.0, 0.0);
        sx[(1, 0)] = c(1.0, 0.0);
        let u = expm_hermitian(&sx, std::f64::consts::FRAC_PI_2);
        assert!((u[(1, 0)] - c(0.0, -1.0)).norm() < 1e-14);
        assert!(u[(0, 0)].norm() < 1e-14);
    }
}
