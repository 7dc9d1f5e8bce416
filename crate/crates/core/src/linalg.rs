//! Dense complex linear algebra for small operators.
//!
//! Everything here works on [`ComplexMatrix`], a row-major matrix of
//! `Complex64`. The sizes this crate deals with never exceed a few dozen rows,
//! so the kernels favour robustness over speed: the Hermitian eigensolver is a
//! cyclic complex Jacobi iteration and singular values come from the
//! eigenvalues of `M†M`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default relative Frobenius tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues below `ZERO_CUTOFF * λ_max` count as zero.
pub const ZERO_CUTOFF: f64 = 1e-9;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data. The entries are taken verbatim.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn column_matrix(v: &[C64]) -> Self {
        ComplexMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Relative Frobenius deviation from Hermiticity, `‖M − M†‖_F / ‖M‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `A B A†`.
    pub fn sandwich(&self, inner: &ComplexMatrix) -> ComplexMatrix {
        &(self * inner) * &self.adjoint()
    }

    /// `tr(A† B)`.
    pub fn inner(&self, other: &ComplexMatrix) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest entrywise distance.
    pub fn max_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn same_shape(&self, other: &ComplexMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.same_shape(rhs), "matrix sum dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.same_shape(rhs), "matrix difference dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> AddAssign<&'a ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert!(self.same_shape(rhs), "matrix sum dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<'a> SubAssign<&'a ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert!(self.same_shape(rhs), "matrix difference dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Columns are the matching orthonormal eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.eigenvectors.column(j)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x)
    }

    /// `V f(Λ) V†`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fl.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above the relative zero cutoff.
    pub fn rank(&self) -> usize {
        let lmax = self.eigenvalues.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
        if lmax == 0.0 {
            return 0;
        }
        self.eigenvalues
            .iter()
            .filter(|&&x| x > ZERO_CUTOFF * lmax)
            .count()
    }
}

/// Hermitian eigendecomposition with the default tolerance.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with_tol(m, HERMITIAN_TOL)
}

/// Cyclic complex Jacobi. The input must be Hermitian to within `tol`
/// relative Frobenius deviation; only its Hermitian part is diagonalized.
pub fn hermitian_eig_with_tol(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(jacobi(m.hermitian_part()))
}

fn jacobi(mut a: ComplexMatrix) -> HermitianEigen {
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a.data[i * n + i] = C64::new(a.data[i * n + i].re, 0.0);
    }
    let norm = a.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a.data[p * n + q].norm_sqr();
                }
            }
        }
        if off.sqrt() <= JACOBI_TOL * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.data[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// One Jacobi rotation zeroing `a[p][q]`: `A ← G†AG`, `V ← VG` with
/// `G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]` on the `(p, q)` plane.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows;
    let apq = a.data[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a.data[p * n + p].re;
    let aqq = a.data[q * n + q].re;
    // Negligible against both diagonal entries: drop it.
    if r < 1e-18 * app.abs().min(aqq.abs()) {
        a.data[p * n + q] = ZERO;
        a.data[q * n + p] = ZERO;
        return;
    }
    let phase = apq / r;
    let phase_c = phase.conj();
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g10 = -phase_c * s;
    let g11 = phase_c * c;
    for k in 0..n {
        let akp = a.data[k * n + p];
        let akq = a.data[k * n + q];
        a.data[k * n + p] = akp * c + akq * g10;
        a.data[k * n + q] = akp * s + akq * g11;
    }
    for k in 0..n {
        let apk = a.data[p * n + k];
        let aqk = a.data[q * n + k];
        a.data[p * n + k] = apk * c + aqk * g10.conj();
        a.data[q * n + k] = apk * s + aqk * g11.conj();
    }
    a.data[p * n + q] = ZERO;
    a.data[q * n + p] = ZERO;
    a.data[p * n + p] = C64::new(a.data[p * n + p].re, 0.0);
    a.data[q * n + q] = C64::new(a.data[q * n + q].re, 0.0);
    for k in 0..n {
        let vkp = v.data[k * n + p];
        let vkq = v.data[k * n + q];
        v.data[k * n + p] = vkp * c + vkq * g10;
        v.data[k * n + q] = vkp * s + vkq * g11;
    }
}

/// Singular value decomposition `M = U diag(s) V†` of an `r × c` matrix with
/// `r ≥ c`. `U` is `r × c` with orthonormal columns, `V` is `c × c` unitary.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let (r, c) = (m.rows, m.cols);
    if r < c {
        // M† = U' S V'†  ⇒  M = V' S U'†
        let t = svd(&m.adjoint());
        let mut u = ComplexMatrix::zeros(r, r);
        for j in 0..r {
            u.set_column(j, &t.v.column(j));
        }
        let mut v = ComplexMatrix::zeros(c, c);
        for j in 0..r {
            v.set_column(j, &t.u.column(j));
        }
        complete_orthonormal(&mut v, r);
        return Svd {
            u,
            singular_values: t.singular_values,
            v,
        };
    }
    let gram = &m.adjoint() * m;
    let eig = jacobi(gram.hermitian_part());
    let singular_values: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let v = eig.eigenvectors;
    let mut u = ComplexMatrix::zeros(r, c);
    let mut filled = 0;
    for j in 0..c {
        let s = singular_values[j];
        if s <= 1e-13 * smax || s == 0.0 {
            break;
        }
        let mv = m.mul_vec(&v.column(j));
        let col: Vec<C64> = mv.iter().map(|z| z / s).collect();
        u.set_column(j, &col);
        filled += 1;
    }
    // Re-orthonormalize (small singular values lose accuracy) and complete.
    gram_schmidt_columns(&mut u, filled);
    complete_orthonormal(&mut u, filled);
    Svd {
        u,
        singular_values,
        v,
    }
}

fn gram_schmidt_columns(m: &mut ComplexMatrix, upto: usize) {
    for j in 0..upto {
        let mut col = m.column(j);
        for k in 0..j {
            let prev = m.column(k);
            let ov: C64 = prev.iter().zip(&col).map(|(a, b)| a.conj() * b).sum();
            for (x, p) in col.iter_mut().zip(&prev) {
                *x -= ov * p;
            }
        }
        normalize(&mut col);
        m.set_column(j, &col);
    }
}

/// Fills columns `filled..` with an orthonormal completion of the first
/// `filled` columns, using computational basis vectors as seeds.
fn complete_orthonormal(m: &mut ComplexMatrix, filled: usize) {
    let r = m.rows;
    let mut next = filled;
    let mut seed = 0;
    while next < m.cols && seed < r {
        let mut col = vec![ZERO; r];
        col[seed] = ONE;
        seed += 1;
        for k in 0..next {
            let prev = m.column(k);
            let ov: C64 = prev.iter().zip(&col).map(|(a, b)| a.conj() * b).sum();
            for (x, p) in col.iter_mut().zip(&prev) {
                *x -= ov * p;
            }
        }
        if vec_norm(&col) < 1e-6 {
            continue;
        }
        normalize(&mut col);
        m.set_column(next, &col);
        next += 1;
    }
}

/// Singular values, non-increasing.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let gram = if m.rows >= m.cols {
        &m.adjoint() * m
    } else {
        m * &m.adjoint()
    };
    jacobi(gram.hermitian_part())
        .eigenvalues
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .collect()
}

/// Unitary factor `W` of the polar decomposition `M = W |M|` of a square
/// matrix: the unitary maximizing `Re tr(W† M)`.
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let s = svd(m);
    &s.u * &s.v.adjoint()
}

/// Kronecker product.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    let oc = ac * bc;
    for i in 0..ar {
        for j in 0..ac {
            let x = a.data[i * ac + j];
            if x == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.data[(i * br + k) * oc + j * bc + l] = x * b.data[k * bc + l];
                }
            }
        }
    }
    out
}

pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over `subsystems` (in order), laid out
/// with the strides of the full system.
fn offsets(dims: &[usize], full_strides: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &o in &out {
            for k in 0..dims[s] {
                next.push(o + k * full_strides[s]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems
/// appear in increasing index order in the result.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total || dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} do not match a {}x{} operator",
            m.rows, m.cols
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "kept subsystems {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let st = strides(dims);
    let keep_off = offsets(dims, &st, &kept);
    let trace_off = offsets(dims, &st, &traced);
    let n = keep_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &ri) in keep_off.iter().enumerate() {
        for (j, &cj) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &trace_off {
                acc += m.data[(ri + t) * total + cj + t];
            }
            out.data[i * n + j] = acc;
        }
    }
    Ok(out)
}

/// Which factor of a bipartite operator to transpose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial transpose of an operator on `C^{d_A} ⊗ C^{d_B}`.
pub fn partial_transpose(m: &ComplexMatrix, dims: [usize; 2], which: Subsystem) -> Result<ComplexMatrix> {
    let [da, db] = dims;
    if !m.is_square() || m.rows != da * db {
        return Err(Error::DimensionMismatch(format!(
            "dimensions {da}x{db} do not match a {}x{} operator",
            m.rows, m.cols
        )));
    }
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    let v = m.data[(i * db + j) * n + k * db + l];
                    let (r, c) = match which {
                        Subsystem::A => (k * db + j, i * db + l),
                        Subsystem::B => (i * db + l, k * db + j),
                    };
                    out.data[r * n + c] = v;
                }
            }
        }
    }
    Ok(out)
}

/// The swap `Σ_ij |ij⟩⟨ji|` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            p[(j * d + i, i * d + j)] = ONE;
        }
    }
    p
}

/// Index of `|a, b', b⟩` for the basis vector `|a, b, b'⟩` of `A ⊗ B ⊗ B'`.
#[inline]
pub fn swapped_index(idx: usize, db: usize) -> usize {
    let bp = idx % db;
    let b = (idx / db) % db;
    let a = idx / (db * db);
    (a * db + bp) * db + b
}

/// `(I_A ⊗ P_BB') M (I_A ⊗ P_BB')` computed by index permutation.
pub fn conjugate_by_swap(m: &ComplexMatrix, db: usize) -> ComplexMatrix {
    let n = m.rows;
    let perm: Vec<usize> = (0..n).map(|i| swapped_index(i, db)).collect();
    ComplexMatrix::from_fn(n, n, |i, j| m.data[perm[i] * n + perm[j]])
}

/// `(I_A ⊗ P_BB') |v⟩`.
pub fn swap_vector(v: &[C64], db: usize) -> Vec<C64> {
    (0..v.len()).map(|i| v[swapped_index(i, db)]).collect()
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && m.is_hermitian(1e-13) {
        return jacobi(m.hermitian_part())
            .eigenvalues
            .iter()
            .map(|x| x.abs())
            .sum();
    }
    singular_values(m).iter().sum()
}

/// Non-zero eigenvalues of a Hermitian operator, non-increasing, using the
/// relative zero cutoff.
pub fn nonzero_eigenvalues(values: &[f64]) -> Vec<f64> {
    let lmax = values.iter().fold(0.0_f64, |a, &x| a.max(x));
    if lmax <= 0.0 {
        return Vec::new();
    }
    values
        .iter()
        .copied()
        .filter(|&x| x > ZERO_CUTOFF * lmax)
        .collect()
}

/// Checks the state invariants (Hermitian, PSD to −1e−9, unit trace to 1e−9)
/// and returns the eigendecomposition.
pub fn check_state(rho: &ComplexMatrix) -> Result<HermitianEigen> {
    if !rho.is_square() {
        return Err(Error::NotAState("operator is not square".into()));
    }
    let eig = hermitian_eig(rho).map_err(|e| Error::NotAState(e.to_string()))?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::NotAState(format!("trace {:.12} ≠ 1", tr.re)));
    }
    if eig.lambda_min() < -1e-9 {
        return Err(Error::NotAState(format!(
            "negative eigenvalue {:.3e}",
            eig.lambda_min()
        )));
    }
    Ok(eig)
}

/// `−Σ λ log₂ λ` over eigenvalues above the zero cutoff, in bits.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let eig = check_state(rho)?;
    Ok(entropy_of(&eig.eigenvalues))
}

pub(crate) fn entropy_of(values: &[f64]) -> f64 {
    nonzero_eigenvalues(values)
        .iter()
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [C64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

pub fn inner_product(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
