//! Dense complex matrices.
//!
//! Everything in this crate moves through `Mat`: a row-major dense matrix of
//! `Complex64`. Sizes are small (a few thousand rows at the very largest), so
//! the arithmetic here favours clarity over blocking tricks, with one
//! exception: the Hermitian positive definite solver behind the completion
//! step routes through LAPACK (`zposv`), because those systems reach orders of
//! several thousand and dominate the run time of the doubling driver.
//!
//! The block operations `block_transpose` / `block_hermitian` treat a matrix
//! as a grid of `bs x bs` blocks and swap the *blocks* without transposing
//! inside them, so that entrywise transposition of each block of `A^Tb`
//! recovers the plain transpose of `A`.

use num_complex::Complex64;

use crate::error::{Error, Result};

// LAPACK symbols come from the system OpenBLAS; the crate link is established
// by this extern declaration.
extern crate openblas_src;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let v = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    /// Builds a matrix from a function of the index pair.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a square matrix from rows of real entries (test convenience).
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Mat::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        // i-k-j loop order keeps the inner accesses contiguous.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * rhs^H` without forming the adjoint.
    pub fn mul_adjoint(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.cols, "shape mismatch in mul_adjoint");
        let mut out = Mat::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let arow = self.row(i);
            for j in 0..rhs.rows {
                let brow = rhs.row(j);
                let mut acc = Complex64::ZERO;
                for (&a, &b) in arow.iter().zip(brow) {
                    acc += a * b.conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `self^H * rhs` without forming the adjoint.
    pub fn adjoint_mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows, "shape mismatch in adjoint_mul");
        let mut out = Mat::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let arow = self.row(k);
            let brow = rhs.row(k);
            for i in 0..self.cols {
                let a = arow[i].conj();
                if a == Complex64::ZERO {
                    continue;
                }
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Plain transpose.
    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise sum `self + rhs`.
    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&rhs.data) {
            *o += b;
        }
        out
    }

    /// Entrywise difference `self - rhs`.
    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&rhs.data) {
            *o -= b;
        }
        out
    }

    /// In-place `self += alpha * rhs`.
    pub fn axpy(&mut self, alpha: Complex64, rhs: &Mat) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (o, &b) in self.data.iter_mut().zip(&rhs.data) {
            *o += alpha * b;
        }
    }

    /// Entrywise scaling by a complex constant.
    pub fn scale(&self, alpha: Complex64) -> Mat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= alpha;
        }
        out
    }

    /// Largest entry modulus. Zero for empty matrices.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr())).sqrt()
    }

    /// Frobenius norm.
    pub fn frob(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest modulus among entries of `self - self^H`.
    pub fn hermitian_residual(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..=i {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                m = m.max(d);
            }
        }
        m
    }

    /// Copies the `nr x nc` submatrix with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        Mat::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Overwrites the submatrix with top-left corner `(r0, c0)` by `b`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Block-grid transpose: blocks of size `bs` swap positions, their
    /// contents do not. Both dimensions must be multiples of `bs`.
    pub fn block_transpose(&self, bs: usize) -> Mat {
        assert!(bs > 0 && self.rows % bs == 0 && self.cols % bs == 0, "block size must divide both dimensions");
        let (br, bc) = (self.rows / bs, self.cols / bs);
        let mut out = Mat::zeros(self.cols, self.rows);
        for a in 0..br {
            for b in 0..bc {
                for i in 0..bs {
                    for j in 0..bs {
                        out[(b * bs + i, a * bs + j)] = self[(a * bs + i, b * bs + j)];
                    }
                }
            }
        }
        out
    }

    /// Block-grid adjoint: block positions swap and each block is conjugated
    /// entrywise (not transposed), i.e. `A^Hb = conj(A^Tb)`.
    pub fn block_hermitian(&self, bs: usize) -> Mat {
        let mut out = self.block_transpose(bs);
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
///
/// Only the lower triangle of `a` is read. Fails with the offending column
/// index when a pivot drops below `pivot_floor` (an absolute threshold the
/// caller derives from the matrix scale).
pub fn cholesky_lower(a: &Mat, pivot_floor: f64) -> std::result::Result<Mat, usize> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > pivot_floor) {
            return Err(j);
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `A X = B` for Hermitian positive definite `A` via LAPACK `zposv`.
///
/// `a` is the full matrix in **column-major** order (destroyed: overwritten by
/// the factor); `b` holds `nrhs` right-hand sides column-major (overwritten by
/// the solution). Column-major is what LAPACK expects; the completion solver
/// assembles directly in that layout.
pub fn solve_hermitian_pd_colmajor(
    a: &mut [Complex64],
    n: usize,
    b: &mut [Complex64],
    nrhs: usize,
) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * nrhs);
    let ni = i32::try_from(n).expect("system order exceeds i32");
    let nrhsi = nrhs as i32;
    let mut info = 0i32;
    unsafe {
        lapack_sys::zposv_(
            &(b'L' as std::ffi::c_char),
            &ni,
            &nrhsi,
            a.as_mut_ptr().cast(),
            &ni,
            b.as_mut_ptr().cast(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::SolveFailed { info });
    }
    Ok(())
}

/// Determinant by LU with partial pivoting.
pub fn lu_det(a: &Mat) -> Complex64 {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut det = Complex64::ONE;
    for k in 0..n {
        // pivot
        let mut p = k;
        let mut best = m[(k, k)].norm_sqr();
        for i in k + 1..n {
            let v = m[(i, k)].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Complex64::ZERO;
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            det = -det;
        }
        let piv = m[(k, k)];
        det *= piv;
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            if f == Complex64::ZERO {
                continue;
            }
            for j in k + 1..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
        }
    }
    det
}

/// Solves `A X = B` for general square `A` by LU with partial pivoting.
/// Fails when a pivot vanishes to machine zero.
pub fn lu_solve(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    assert_eq!(n, b.rows());
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut p = k;
        let mut best = m[(k, k)].norm_sqr();
        for i in k + 1..n {
            let v = m[(i, k)].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularMatrix);
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = t;
            }
        }
        let piv = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            if f == Complex64::ZERO {
                continue;
            }
            for j in k + 1..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
            for j in 0..x.cols() {
                let xkj = x[(k, j)];
                x[(i, j)] -= f * xkj;
            }
        }
    }
    // back substitution
    for k in (0..n).rev() {
        let piv = m[(k, k)];
        for j in 0..x.cols() {
            let mut s = x[(k, j)];
            for i in k + 1..n {
                s -= m[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / piv;
        }
    }
    Ok(x)
}

/// Inverse of a general square matrix by LU.
pub fn lu_inverse(a: &Mat) -> Result<Mat> {
    lu_solve(a, &Mat::identity(a.rows()))
}

/// Eigendecomposition of a Hermitian matrix via LAPACK `zheev`.
///
/// Returns `(eigenvalues, V)` with eigenvalues ascending and `A = V diag(w) V^H`.
/// The accuracy of this decomposition sets the accuracy of every Gram
/// renormalization, which in turn bounds how far long factorizations can drift
/// from the input, so it has to be fully backward stable — not merely
/// converged to a loose off-diagonal threshold.
///
/// Panics if the QR iteration fails to converge, which does not occur for the
/// small, well-conditioned Gram matrices this library feeds it.
pub fn hermitian_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    // Column-major copy of the Hermitian average (sheds any stray asymmetry);
    // with uplo = 'L' LAPACK reads only the lower triangle.
    let mut buf: Vec<Complex64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            buf.push((a[(i, j)] + a[(j, i)].conj()) * 0.5);
        }
    }
    let ni = i32::try_from(n).expect("matrix order exceeds i32");
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; (3 * n).saturating_sub(2).max(1)];
    let mut info = 0i32;
    // Workspace query (lwork = -1), then the actual decomposition.
    let mut work = vec![Complex64::ZERO; 1];
    let query = -1i32;
    unsafe {
        lapack_sys::zheev_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &ni,
            buf.as_mut_ptr().cast(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr().cast(),
            &query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    assert_eq!(info, 0, "eigensolver workspace query failed (info = {info})");
    let lwork = (work[0].re as i32).max(2 * ni - 1).max(1);
    work = vec![Complex64::ZERO; lwork as usize];
    unsafe {
        lapack_sys::zheev_(
            &(b'V' as std::ffi::c_char),
            &(b'L' as std::ffi::c_char),
            &ni,
            buf.as_mut_ptr().cast(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr().cast(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    assert_eq!(info, 0, "eigensolver failed to converge (info = {info})");
    // `buf` now holds the eigenvectors column-major; eigenvalues come back
    // already ascending.
    let v = Mat::from_fn(n, n, |i, j| buf[j * n + i]);
    (w, v)
}

/// Smallest singular value, computed from the Hermitian eigenvalues of `A^H A`.
pub fn smallest_singular_value(a: &Mat) -> f64 {
    let g = a.adjoint_mul(a);
    let (w, _) = hermitian_eigen(&g);
    w.first().map(|&x| x.max(0.0).sqrt()).unwrap_or(0.0)
}

/// Hermitian inverse square root `K^{-1/2}` with an eigenvalue floor:
/// eigenvalues below `floor_rel * max eigenvalue` report failure.
pub fn hermitian_inv_sqrt(k: &Mat, floor_rel: f64) -> std::result::Result<Mat, f64> {
    let (w, v) = hermitian_eigen(k);
    let wmax = w.iter().cloned().fold(0.0f64, f64::max);
    let floor = floor_rel * wmax;
    if let Some(&wmin) = w.first() {
        if !(wmin > floor) {
            return Err(wmin);
        }
    }
    let n = k.rows();
    // V diag(w^{-1/2}) V^H
    let mut out = Mat::zeros(n, n);
    for t in 0..n {
        let f = 1.0 / w[t].sqrt();
        for i in 0..n {
            let vi = v[(i, t)] * f;
            for j in 0..n {
                out[(i, j)] += vi * v[(j, t)].conj();
            }
        }
    }
    Ok(out)
}

/// Factors `A = L V` with `L` lower triangular with positive real diagonal and
/// `V` unitary, via a Householder QR of `A^H`. Used to fix the constant-matrix
/// gauge of a spectral factor.
pub fn lq_positive(a: &Mat) -> (Mat, Mat) {
    let n = a.rows();
    assert_eq!(n, a.cols());
    // QR of A^H by Householder reflections: A^H = Q R.
    let mut r = a.adjoint();
    let mut q = Mat::identity(n);
    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut norm2 = 0.0f64;
        for i in k..n {
            norm2 += r[(i, k)].norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let akk = r[(k, k)];
        let phase = if akk.norm() > 0.0 { akk / akk.norm() } else { Complex64::ONE };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        // R <- (I - 2 v v^H / |v|^2) R ; Q <- Q (I - 2 v v^H / |v|^2)
        for j in k..n {
            let mut s = Complex64::ZERO;
            for i in k..n {
                s += v[i - k].conj() * r[(i, j)];
            }
            s *= 2.0 / vn2;
            for i in k..n {
                let vi = v[i - k];
                r[(i, j)] -= vi * s;
            }
        }
        for i in 0..n {
            let mut s = Complex64::ZERO;
            for j in k..n {
                s += q[(i, j)] * v[j - k];
            }
            s *= 2.0 / vn2;
            for j in k..n {
                let vj = v[j - k].conj();
                q[(i, j)] -= s * vj;
            }
        }
    }
    // Rotate the diagonal of R onto the positive real axis.
    for k in 0..n {
        let d = r[(k, k)];
        if d.norm() == 0.0 {
            continue;
        }
        let ph = d / d.norm();
        for j in 0..n {
            r[(k, j)] *= ph.conj();
        }
        for i in 0..n {
            q[(i, k)] *= ph;
        }
    }
    // A = R^H Q^H with R^H lower triangular, positive real diagonal.
    (r.adjoint(), q.adjoint())
}
