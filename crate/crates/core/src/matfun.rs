//! Dense complex linear algebra and matrix functions.
//!
//! Everything here is a pure function of its inputs: LU with partial
//! pivoting, the principal square root (product-form Denman–Beavers with
//! determinantal scaling, or diagonalization for normal inputs of the form
//! `R + icI` with `R` real symmetric), the exponential (scaling and squaring
//! with diagonal Padé approximants), the spectral norm and a cyclic Jacobi
//! eigensolver for real symmetric matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:>10.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self {
            rows,
            cols,
            data: entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn scalar(z: C64) -> Self {
        Self::from_diag(&[z])
    }

    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
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

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[C64]) {
        for (i, &v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * z).collect(),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    /// Returns `self + z I`.
    pub fn shift(&self, z: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out.data[i * self.cols + i] += z;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (m, p, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; m * n];
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..p {
                let a = self.data[i * p + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: m,
            cols: n,
            data: out,
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(ZERO, |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `self^H v` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, v.len(), "adjoint_mul_vec dimension mismatch");
        let mut out = vec![ZERO; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == ZERO {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, z) in sums.iter_mut().zip(self.row(i)) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest deviation from real symmetry, including imaginary parts.
    pub fn symmetry_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut defect: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                defect = defect.max(a.im.abs());
                if j > i {
                    defect = defect.max((a.re - self[(j, i)].re).abs());
                }
            }
        }
        defect
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
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

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

// ---------------------------------------------------------------------------
// vectors

pub fn vec_norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[C64], z: C64) -> Vec<C64> {
    a.iter().map(|x| x * z).collect()
}

pub fn vec_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

// ---------------------------------------------------------------------------
// LU

/// Packed LU factors with the row permutation of partial pivoting.
#[derive(Clone, Debug)]
pub struct LUFactorization {
    permutation: Vec<usize>,
    factors: ComplexMatrix,
    source_dim: usize,
}

impl LUFactorization {
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn factors(&self) -> &ComplexMatrix {
        &self.factors
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.source_dim;
        assert_eq!(b.len(), n, "solve_vec dimension mismatch");
        let lu = &self.factors;
        let mut x: Vec<C64> = self.permutation.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    pub fn solve(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let n = self.source_dim;
        assert_eq!(rhs.rows, n, "solve dimension mismatch");
        let k = rhs.cols;
        let lu = &self.factors;
        // row-oriented substitution over all right-hand sides at once
        let mut x = ComplexMatrix::zeros(n, k);
        for (i, &p) in self.permutation.iter().enumerate() {
            x.data[i * k..(i + 1) * k].copy_from_slice(rhs.row(p));
        }
        for i in 0..n {
            for j in 0..i {
                let l = lu[(i, j)];
                if l == ZERO {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(i * k);
                let src = &head[j * k..(j + 1) * k];
                for (d, &s) in tail[..k].iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = lu[(i, j)];
                if u == ZERO {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(j * k);
                let dst = &mut head[i * k..(i + 1) * k];
                for (d, &s) in dst.iter_mut().zip(&tail[..k]) {
                    *d -= u * s;
                }
            }
            let inv = ONE / lu[(i, i)];
            for d in &mut x.data[i * k..(i + 1) * k] {
                *d *= inv;
            }
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.source_dim))
    }

    /// `log |det M|`.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.source_dim).map(|i| self.factors[(i, i)].norm().ln()).sum()
    }
}

/// LU factorization with partial pivoting.
pub fn lu_factor(m: &ComplexMatrix) -> Result<LUFactorization> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "LU of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("LU input"));
    }
    let n = m.rows;
    let threshold = 1e-14 * m.norm_max();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut piv, mut best) = (k, a[(k, k)].norm());
        for i in k + 1..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best <= threshold || best == 0.0 {
            return Err(Error::SingularMatrix {
                step: k,
                pivot: best,
                threshold,
            });
        }
        if piv != k {
            for j in 0..n {
                a.data.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
        }
        let inv = ONE / a[(k, k)];
        for i in k + 1..n {
            let l = a[(i, k)] * inv;
            a[(i, k)] = l;
            if l == ZERO {
                continue;
            }
            let (head, tail) = a.data.split_at_mut(i * n);
            let pivot_row = &head[k * n + k + 1..(k + 1) * n];
            for (d, &s) in tail[k + 1..n].iter_mut().zip(pivot_row) {
                *d -= l * s;
            }
        }
    }
    Ok(LUFactorization {
        permutation: perm,
        factors: a,
        source_dim: n,
    })
}

/// Solves `m X = rhs` by LU with partial pivoting.
pub fn lu_solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rhs.rows != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} rows, matrix has {}",
            rhs.rows, m.rows
        )));
    }
    Ok(lu_factor(m)?.solve(rhs))
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(lu_factor(m)?.inverse())
}

// ---------------------------------------------------------------------------
// symmetric eigensolver

/// Cyclic Jacobi on a dense real symmetric matrix stored row-major.
/// Returns ascending eigenvalues and the column eigenvector matrix.
pub(crate) fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 || apq.abs() <= 1e-18 * scale {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new_j] = v[k * n + old_j];
        }
    }
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric matrix (imaginary part zero).
pub fn eigh_real_symmetric(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigh of a non-square matrix".into()));
    }
    let defect = m.symmetry_defect();
    if defect > 1e-12 * m.norm_max().max(1.0) {
        return Err(Error::NotSymmetric(defect));
    }
    let n = m.rows;
    let (w, v) = jacobi_eigen(m.real_parts(), n);
    Ok((w, ComplexMatrix::from_real(n, n, &v)?))
}

// ---------------------------------------------------------------------------
// principal square root

/// Splits `m = R + i c I` with `R` real symmetric, when that structure holds.
fn real_symmetric_plus_shift(m: &ComplexMatrix) -> Option<(Vec<f64>, f64)> {
    let n = m.rows;
    let tol = 1e-12 * m.norm_max().max(1.0);
    let c = m.diagonal().iter().map(|z| z.im).sum::<f64>() / n as f64;
    let mut re = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            let expected_im = if i == j { c } else { 0.0 };
            if (z.im - expected_im).abs() > tol {
                return None;
            }
            if j > i && (z.re - m[(j, i)].re).abs() > tol {
                return None;
            }
            re[i * n + j] = z.re;
        }
    }
    Some((re, c))
}

/// Applies `f` to a matrix `V diag(w + ic) V^T`.
fn spectral_apply(values: &[f64], vectors: &[f64], shift: f64, f: impl Fn(C64) -> C64) -> ComplexMatrix {
    let n = values.len();
    let fw: Vec<C64> = values.iter().map(|&w| f(C64::new(w, shift))).collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let vik = vectors[i * n + k];
            if vik == 0.0 {
                continue;
            }
            let coef = fw[k] * vik;
            let row = &mut out.data[i * n..(i + 1) * n];
            for (j, o) in row.iter_mut().enumerate() {
                *o += coef * vectors[j * n + k];
            }
        }
    }
    out
}

fn check_cut(z: C64, scale: f64) -> Result<()> {
    let tol = 1e-12 * scale.max(1.0);
    if z.re <= tol && z.im.abs() <= tol {
        return Err(Error::SpectrumOnCut { re: z.re, im: z.im });
    }
    Ok(())
}

/// Principal square root: the unique root whose spectrum lies in the open
/// right half-plane.
pub fn sqrtm_principal(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("sqrtm of a non-square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("sqrtm input"));
    }
    let n = m.rows;
    if n == 1 {
        let z = m[(0, 0)];
        check_cut(z, z.norm())?;
        return Ok(ComplexMatrix::scalar(z.sqrt()));
    }
    if let Some((re, shift)) = real_symmetric_plus_shift(m) {
        let (w, v) = jacobi_eigen(re, n);
        let scale = m.norm_max();
        for &wi in &w {
            check_cut(C64::new(wi, shift), scale)?;
        }
        return Ok(spectral_apply(&w, &v, shift, |z| z.sqrt()));
    }
    denman_beavers(m)
}

const DB_MAX_ITER: usize = 60;

fn denman_beavers(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows;
    let eye = ComplexMatrix::identity(n);
    let tol = 1e-13 * (n as f64).sqrt();
    let mut m = a.clone();
    let mut y = a.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..DB_MAX_ITER {
        residual = (&m - &eye).norm_fro();
        if residual <= tol {
            return Ok(y);
        }
        let lu = lu_factor(&m).map_err(|_| Error::SpectrumOnCut { re: 0.0, im: 0.0 })?;
        let m_inv = lu.inverse();
        let mu = if residual > 1e-2 {
            (-lu.log_abs_det() / (2.0 * n as f64)).exp()
        } else {
            1.0
        };
        let mu2 = mu * mu;
        let y_next = (&y * &eye.shift(ZERO).add(&m_inv.scale_real(1.0 / mu2))).scale_real(0.5 * mu);
        let m_next = (&eye + &(&m.scale_real(mu2) + &m_inv.scale_real(1.0 / mu2)).scale_real(0.5)).scale_real(0.5);
        if !m_next.is_finite() || !y_next.is_finite() {
            break;
        }
        m = m_next;
        y = y_next;
    }
    // one last look: the final update may have landed inside the tolerance
    let final_res = (&m - &eye).norm_fro();
    if final_res <= tol {
        return Ok(y);
    }
    Err(Error::IterationDiverged {
        iterations: DB_MAX_ITER,
        residual: final_res.min(residual),
    })
}

// ---------------------------------------------------------------------------
// exponential

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

fn pade_low(a: &ComplexMatrix, coeffs: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows;
    let a2 = a * a;
    let mut powers = vec![ComplexMatrix::identity(n), a2.clone()];
    let m = coeffs.len() - 1;
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 <= m {
            u_inner = &u_inner + &p.scale_real(coeffs[2 * k + 1]);
        }
        v = &v + &p.scale_real(coeffs[2 * k]);
    }
    (a * &u_inner, v)
}

fn pade13(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &PADE13;
    let n = a.rows;
    let eye = ComplexMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |x: &[(&ComplexMatrix, f64)]| {
        x.iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, (m, c)| &acc + &m.scale_real(*c))
    };
    let u_hi = lin(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])]);
    let u_lo = lin(&[(&a6, b[7]), (&a4, b[5]), (&a2, b[3]), (&eye, b[1])]);
    let u = a * &(&(&a6 * &u_hi) + &u_lo);
    let v_hi = lin(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])]);
    let v_lo = lin(&[(&a6, b[6]), (&a4, b[4]), (&a2, b[2]), (&eye, b[0])]);
    let v = &(&a6 * &v_hi) + &v_lo;
    (u, v)
}

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants (degrees 3 to 13, 1-norm thresholds).
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("expm of a non-square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("expm input"));
    }
    let n = m.rows;
    if n == 1 {
        return Ok(ComplexMatrix::scalar(m[(0, 0)].exp()));
    }
    let norm = m.norm_1();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let rational = |u: &ComplexMatrix, v: &ComplexMatrix| -> Result<ComplexMatrix> { lu_solve(&(v - u), &(v + u)) };
    for &(deg, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(m, coeffs);
            return rational(&u, &v);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = m.scale_real(2f64.powi(-s));
    let (u, v) = pade13(&scaled);
    let mut e = rational(&u, &v)?;
    for _ in 0..s {
        e = &e * &e;
    }
    if !e.is_finite() {
        return Err(Error::NonFinite("expm result"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// spectral norm

const POWER_MAX_ITER: usize = 5000;
// tighter than the 1e-10 contract so the extrapolated stop lands well inside it
const POWER_TOL: f64 = 1e-12;
/// Plain iterations between squarings of the Gram operator.
const POWER_SQUARE_EVERY: usize = 40;

fn power_start(n: usize) -> Vec<C64> {
    // all-ones plus a deterministic ramp so that no reflection symmetry of the
    // operator can hide the dominant singular vector
    let v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.5 * i as f64 / n as f64, 0.0)).collect();
    let norm = vec_norm2(&v);
    vec_scale(&v, C64::new(1.0 / norm, 0.0))
}

/// Largest singular value by power iteration on `m^H m`.
///
/// Convergence is declared when the Aitken-extrapolated error of successive
/// estimates falls below the relative tolerance. When the dominant singular
/// values cluster, the Gram operator is periodically squared so the
/// iteration still converges within the cap.
pub fn opnorm2(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite("opnorm2 input"));
    }
    if m.norm_max() == 0.0 {
        return Ok(0.0);
    }
    let n = m.cols;
    if m.rows == 1 || n == 1 {
        return Ok(m.norm_fro());
    }
    let mut x = power_start(n);
    let mut gram: Option<ComplexMatrix> = None;
    let mut sigma_prev = vec_norm2(&m.mul_vec(&x));
    let mut delta_prev = f64::NAN;
    let mut since_square = 0usize;
    let mut last = sigma_prev;
    for it in 0..POWER_MAX_ITER {
        let z = match &gram {
            None => m.adjoint_mul_vec(&m.mul_vec(&x)),
            Some(g) => g.mul_vec(&x),
        };
        let zn = vec_norm2(&z);
        if zn == 0.0 {
            return Ok(sigma_prev);
        }
        x = vec_scale(&z, C64::new(1.0 / zn, 0.0));
        let sigma = vec_norm2(&m.mul_vec(&x));
        last = sigma;
        let delta = (sigma - sigma_prev).abs();
        if delta <= 1e-15 * sigma {
            return Ok(sigma.max(sigma_prev));
        }
        if delta_prev.is_finite() && delta_prev > 0.0 {
            let q = (delta / delta_prev).min(0.999_999);
            let extrapolated = delta * q / (1.0 - q);
            if delta <= POWER_TOL * sigma && extrapolated <= POWER_TOL * sigma {
                return Ok(sigma);
            }
        }
        delta_prev = delta;
        sigma_prev = sigma;
        since_square += 1;
        if since_square >= POWER_SQUARE_EVERY && it + 1 < POWER_MAX_ITER && n <= 1024 {
            let base = match gram.take() {
                None => &m.adjoint() * m,
                Some(g) => g,
            };
            let sq = &base * &base;
            let scale = sq.norm_max();
            if scale > 0.0 && scale.is_finite() {
                gram = Some(sq.scale_real(1.0 / scale));
            } else {
                gram = Some(base);
            }
            since_square = 0;
            delta_prev = f64::NAN;
        }
    }
    let upper = m.norm_fro();
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITER,
        lower: last,
        upper,
    })
}
