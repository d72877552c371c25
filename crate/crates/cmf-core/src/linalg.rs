//! Dense complex matrix arithmetic and decomposition primitives.
//!
//! Everything downstream works on one value type, [`ComplexMatrix`]: a
//! row-major dense matrix of `Complex64` entries. Real-valued data (pixel
//! matrices, graph Laplacians, NMF factors) is carried as the zero-imaginary
//! special case.
//!
//! The pseudoinverse uses normal equations with a Cholesky solve when the
//! input is well conditioned with full column rank, and falls back to a
//! rank-revealing SVD (singular values below `1e-12 * sigma_max` are treated
//! as zero) otherwise.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CmfError, Result};

/// Relative singular-value cutoff for the rank-revealing pseudoinverse.
pub const PINV_RANK_CUTOFF: f64 = 1e-12;

/// Dense row-major matrix of double-precision complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` for every entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a zero-imaginary matrix from a real-valued generator.
    pub fn from_real_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(rows, cols, |i, j| Complex64::new(f(i, j), 0.0))
    }

    /// Wraps a row-major entry vector; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CmfError::InvalidParameter(format!(
                "entry vector has length {} but shape is {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major view of all entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Copy of column `j`.
    pub fn col(&self, j: usize) -> Vec<Complex64> {
        assert!(j < self.cols);
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// True when every entry is finite in both components.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest absolute imaginary component; zero for real-valued matrices.
    pub fn max_abs_im(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape("sub", other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self - step * g`, the gradient-descent update.
    pub fn sub_scaled(&self, step: f64, g: &Self) -> Result<Self> {
        self.check_same_shape("sub_scaled", g)?;
        let data = self
            .data
            .iter()
            .zip(&g.data)
            .map(|(a, b)| a - b * step)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    fn check_same_shape(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CmfError::ShapeMismatch {
                op,
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }

    /// Standard complex matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(CmfError::ShapeMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, m);
        // i-k-j order keeps both B and C accesses sequential.
        for i in 0..n {
            for p in 0..k {
                let a = self.data[i * k + p];
                let brow = &other.data[p * m..(p + 1) * m];
                let crow = &mut out.data[i * m..(i + 1) * m];
                for (c, b) in crow.iter_mut().zip(brow) {
                    *c += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Squared Frobenius norm, `sum |a_ij|^2`; exactly real and nonnegative.
    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.re * z.re + z.im * z.im).sum()
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    /// Moore-Penrose pseudoinverse.
    ///
    /// For a well-conditioned full-column-rank input, solves the normal
    /// equations `(A^H A)^{-1} A^H` via Cholesky; wide matrices go through
    /// the adjoint identity `pinv(A) = pinv(A^H)^H`. If the Cholesky path
    /// fails or its residual check rejects the solve, the SVD route is used
    /// with singular values below `1e-12 * sigma_max` treated as zero.
    /// Rank-deficient input is therefore valid.
    pub fn pinv(&self) -> Self {
        if self.rows < self.cols {
            return self.hermitian().pinv().hermitian();
        }
        if let Some(p) = self.pinv_normal_equations() {
            return p;
        }
        self.pinv_svd()
    }

    /// Cholesky normal-equations route; `None` when the factorization fails
    /// or the solve residual is too large to trust.
    fn pinv_normal_equations(&self) -> Option<Self> {
        let a = self.to_nalgebra();
        let gram = a.adjoint() * &a;
        let chol = nalgebra::linalg::Cholesky::new(gram.clone())?;
        let inv = chol.inverse();
        // ||S * S^{-1} - I||_F / ||I||_F flags ill-conditioned solves.
        let k = self.cols;
        let residual = (&gram * &inv - DMatrix::<Complex64>::identity(k, k)).norm();
        if !residual.is_finite() || residual > 1e-10 * (k as f64).sqrt() {
            return None;
        }
        let p = inv * a.adjoint();
        Some(Self::from_nalgebra(&p))
    }

    /// SVD route: `A_dagger = V * S_dagger * U^H` with small singular values zeroed.
    fn pinv_svd(&self) -> Self {
        let svd = nalgebra::linalg::SVD::new(self.to_nalgebra(), true, true);
        let u = svd.u.expect("SVD requested with u");
        let v_t = svd.v_t.expect("SVD requested with v_t");
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let cutoff = PINV_RANK_CUTOFF * sigma_max;
        let mut scaled_uh = u.adjoint();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            let inv = if s > cutoff { 1.0 / s } else { 0.0 };
            scaled_uh.row_mut(i).scale_mut(inv);
        }
        let p = v_t.adjoint() * scaled_uh;
        Self::from_nalgebra(&p)
    }

    /// Singular values in descending order (used for numerical-rank queries).
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = nalgebra::linalg::SVD::new(self.to_nalgebra(), false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Numerical rank: count of singular values above `1e-12 * sigma_max`.
    pub fn numerical_rank(&self) -> usize {
        let s = self.singular_values();
        let cutoff = PINV_RANK_CUTOFF * s.first().copied().unwrap_or(0.0);
        s.iter().filter(|&&v| v > cutoff).count()
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Writes the matrix in the `cmfmat v1` text format.
    ///
    /// First line `cmfmat 1 <rows> <cols>`, then one line per row with
    /// entries as `<re>:<im>` separated by single spaces. Numbers carry 17
    /// significant digits so the write/read round trip is bit-exact.
    pub fn write_cmfmat<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        writeln!(w, "cmfmat 1 {} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            line.clear();
            for j in 0..self.cols {
                if j > 0 {
                    line.push(' ');
                }
                let z = self[(i, j)];
                let _ = write!(line, "{:.16e}:{:.16e}", z.re, z.im);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Writes the `cmfmat v1` representation to a file.
    pub fn save_cmfmat(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_cmfmat(std::io::BufWriter::new(file))
    }

    /// Parses a matrix in the `cmfmat v1` format.
    pub fn read_cmfmat<R: std::io::Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| CmfError::MatFormat("empty input".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "cmfmat" || fields[1] != "1" {
            return Err(CmfError::MatFormat(format!(
                "bad header {header:?}, expected `cmfmat 1 <rows> <cols>`"
            )));
        }
        let rows: usize = fields[2]
            .parse()
            .map_err(|_| CmfError::MatFormat(format!("bad row count {:?}", fields[2])))?;
        let cols: usize = fields[3]
            .parse()
            .map_err(|_| CmfError::MatFormat(format!("bad col count {:?}", fields[3])))?;
        if rows == 0 || cols == 0 {
            return Err(CmfError::MatFormat("dimensions must be positive".into()));
        }
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| CmfError::MatFormat(format!("missing row {i}")))??;
            let mut count = 0;
            for (j, tok) in line.split_whitespace().enumerate() {
                if j >= cols {
                    return Err(CmfError::MatFormat(format!("row {i} has extra entries")));
                }
                let (re, im) = tok
                    .split_once(':')
                    .ok_or_else(|| CmfError::MatFormat(format!("bad entry {tok:?} at row {i}")))?;
                let re: f64 = re
                    .parse()
                    .map_err(|_| CmfError::MatFormat(format!("bad real part {re:?} at row {i}")))?;
                let im: f64 = im
                    .parse()
                    .map_err(|_| CmfError::MatFormat(format!("bad imag part {im:?} at row {i}")))?;
                m[(i, j)] = Complex64::new(re, im);
                count += 1;
            }
            if count != cols {
                return Err(CmfError::MatFormat(format!(
                    "row {i} has {count} entries, expected {cols}"
                )));
            }
        }
        Ok(m)
    }

    /// Reads a `cmfmat v1` file.
    pub fn load_cmfmat(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_cmfmat(file)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares update of the basis: `W = Z * pinv(V)`, the minimizer of
/// `||Z - W V||_F` over `W`.
pub fn lstsq_w(z: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    if z.cols() != v.cols() {
        return Err(CmfError::ShapeMismatch {
            op: "lstsq_w",
            left_rows: z.rows(),
            left_cols: z.cols(),
            right_rows: v.rows(),
            right_cols: v.cols(),
        });
    }
    z.matmul(&v.pinv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Naive triple-loop product used as the independent oracle.
    fn matmul_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = Complex64::new(0.0, 0.0);
                for p in 0..a.cols() {
                    s += a[(i, p)] * b[(p, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64, what: &str) {
        let diff = a.sub(b).unwrap().frob_norm();
        assert!(diff <= tol, "{what}: difference {diff} exceeds {tol}");
    }

    #[test]
    fn matmul_identity_returns_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_matrix(&mut rng, 2, 3);
        let prod = ComplexMatrix::identity(2).matmul(&b).unwrap();
        assert_close(&prod, &b, 0.0, "I*B");
    }

    #[test]
    fn matmul_imaginary_unit_squares_to_minus_one() {
        let i = ComplexMatrix::from_vec(1, 1, vec![Complex64::new(0.0, 1.0)]).unwrap();
        let prod = i.matmul(&i).unwrap();
        assert_eq!(prod[(0, 0)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 3, 2);
        let b = random_matrix(&mut rng, 2, 4);
        let fast = a.matmul(&b).unwrap();
        let slow = matmul_oracle(&a, &b);
        assert_close(&fast, &slow, 1e-12, "matmul vs oracle");
    }

    #[test]
    fn matmul_rejects_shape_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        let err = a.matmul(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("matmul"), "got {msg}");
    }

    #[test]
    fn matmul_associative_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 4, 3);
            let b = random_matrix(&mut rng, 3, 5);
            let c = random_matrix(&mut rng, 5, 2);
            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            let rel = left.sub(&right).unwrap().frob_norm() / left.frob_norm().max(1e-300);
            assert!(rel <= 1e-10, "associativity violated: rel {rel}");
        }
    }

    #[test]
    fn hermitian_scalar_conjugates() {
        let a = ComplexMatrix::from_vec(1, 1, vec![Complex64::new(1.0, 2.0)]).unwrap();
        assert_eq!(a.hermitian()[(0, 0)], Complex64::new(1.0, -2.0));
    }

    #[test]
    fn hermitian_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 3, 5);
        assert_close(&a.hermitian().hermitian(), &a, 0.0, "A^HH");
    }

    #[test]
    fn hermitian_fixes_real_symmetric() {
        let a = ComplexMatrix::from_real_fn(3, 3, |i, j| (i + j) as f64);
        assert_close(&a.hermitian(), &a, 0.0, "real symmetric");
    }

    #[test]
    fn hermitian_reverses_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 2);
        let lhs = a.matmul(&b).unwrap().hermitian();
        let rhs = b.hermitian().matmul(&a.hermitian()).unwrap();
        assert_close(&lhs, &rhs, 1e-12, "(AB)^H = B^H A^H");
    }

    #[test]
    fn frob_norm_sq_zero_matrix() {
        assert_eq!(ComplexMatrix::zeros(2, 3).frob_norm_sq(), 0.0);
    }

    #[test]
    fn frob_norm_sq_three_four_i() {
        let a = ComplexMatrix::from_vec(1, 1, vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert_eq!(a.frob_norm_sq(), 25.0);
    }

    #[test]
    fn frob_norm_sq_invariant_under_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_matrix(&mut rng, 4, 6);
        let d = (a.frob_norm_sq() - a.hermitian().frob_norm_sq()).abs();
        assert!(d <= 1e-12 * a.frob_norm_sq(), "difference {d}");
    }

    fn check_moore_penrose(a: &ComplexMatrix, tol: f64) {
        let p = a.pinv();
        let scale = a.frob_norm().max(1e-300);
        let apa = a.matmul(&p).unwrap().matmul(a).unwrap();
        assert!(
            apa.sub(a).unwrap().frob_norm() <= tol * scale,
            "A P A != A (residual {})",
            apa.sub(a).unwrap().frob_norm() / scale
        );
        let pap = p.matmul(a).unwrap().matmul(&p).unwrap();
        assert!(
            pap.sub(&p).unwrap().frob_norm() <= tol * p.frob_norm().max(1e-300),
            "P A P != P"
        );
        let ap = a.matmul(&p).unwrap();
        assert!(
            ap.sub(&ap.hermitian()).unwrap().frob_norm() <= tol * scale,
            "A P not Hermitian"
        );
        let pa = p.matmul(a).unwrap();
        assert!(
            pa.sub(&pa.hermitian()).unwrap().frob_norm() <= tol * scale,
            "P A not Hermitian"
        );
    }

    #[test]
    fn pinv_identity() {
        let p = ComplexMatrix::identity(3).pinv();
        assert_close(&p, &ComplexMatrix::identity(3), 1e-12, "pinv(I)");
    }

    #[test]
    fn pinv_column_vector_hand_computed() {
        // [1, i]^T has pinv (A^H A)^{-1} A^H = 0.5 * [1, -i].
        let a =
            ComplexMatrix::from_vec(2, 1, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
                .unwrap();
        let p = a.pinv();
        assert_eq!(p.rows(), 1);
        assert_eq!(p.cols(), 2);
        assert!((p[(0, 0)] - Complex64::new(0.5, 0.0)).norm() <= 1e-12);
        assert!((p[(0, 1)] - Complex64::new(0.0, -0.5)).norm() <= 1e-12);
    }

    #[test]
    fn pinv_left_inverse_of_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 6, 3);
        let pa = a.pinv().matmul(&a).unwrap();
        assert_close(&pa, &ComplexMatrix::identity(3), 1e-10, "pinv(A)*A");
    }

    #[test]
    fn pinv_satisfies_moore_penrose_on_standard_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (r, c) in [(5, 3), (3, 5), (4, 4)] {
            let a = random_matrix(&mut rng, r, c);
            check_moore_penrose(&a, 1e-8);
        }
        // Rank-2 5x3 built as a product of random factors.
        let left = random_matrix(&mut rng, 5, 2);
        let right = random_matrix(&mut rng, 2, 3);
        let deficient = left.matmul(&right).unwrap();
        check_moore_penrose(&deficient, 1e-8);
    }

    #[test]
    fn pinv_zero_matrix_is_zero() {
        let p = ComplexMatrix::zeros(3, 2).pinv();
        assert_eq!(p.frob_norm_sq(), 0.0);
        assert_eq!((p.rows(), p.cols()), (2, 3));
    }

    #[test]
    fn lstsq_w_recovers_exact_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w0 = random_matrix(&mut rng, 6, 3);
        let v0 = random_matrix(&mut rng, 3, 8); // full row rank w.p. 1
        let z = w0.matmul(&v0).unwrap();
        let w = lstsq_w(&z, &v0).unwrap();
        let residual = z.sub(&w.matmul(&v0).unwrap()).unwrap().frob_norm();
        assert!(residual <= 1e-10 * z.frob_norm(), "residual {residual}");
    }

    #[test]
    fn lstsq_w_identity_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let z = random_matrix(&mut rng, 4, 3);
        let w = lstsq_w(&z, &ComplexMatrix::identity(3)).unwrap();
        assert_close(&w, &z, 1e-12, "W when V=I");
    }

    #[test]
    fn lstsq_w_beats_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = random_matrix(&mut rng, 5, 7);
        let v = random_matrix(&mut rng, 3, 7);
        let w_star = lstsq_w(&z, &v).unwrap();
        let f_star = z.sub(&w_star.matmul(&v).unwrap()).unwrap().frob_norm_sq();
        for _ in 0..20 {
            let w = random_matrix(&mut rng, 5, 3);
            let f = z.sub(&w.matmul(&v).unwrap()).unwrap().frob_norm_sq();
            assert!(f_star <= f + 1e-10, "probe beat lstsq: {f_star} > {f}");
        }
    }

    #[test]
    fn cmfmat_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_matrix(&mut rng, 3, 4);
        let mut buf = Vec::new();
        a.write_cmfmat(&mut buf).unwrap();
        let b = ComplexMatrix::read_cmfmat(buf.as_slice()).unwrap();
        assert_eq!(a, b, "round trip must preserve every bit");
    }

    #[test]
    fn cmfmat_rejects_bad_headers() {
        for text in [
            "",
            "cmfmat 2 2 2\n",
            "matrix 1 2 2\n",
            "cmfmat 1 2\n",
            "cmfmat 1 0 3\n",
        ] {
            assert!(ComplexMatrix::read_cmfmat(text.as_bytes()).is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn cmfmat_rejects_truncated_payload() {
        let text = "cmfmat 1 2 2\n1.0:0.0 2.0:0.0\n";
        assert!(ComplexMatrix::read_cmfmat(text.as_bytes()).is_err());
        let text = "cmfmat 1 1 3\n1.0:0.0 2.0:0.0\n";
        assert!(ComplexMatrix::read_cmfmat(text.as_bytes()).is_err());
    }
}
