use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for Hermiticity/unitarity of matrices this crate constructs itself.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Tolerance for Hermiticity/unitarity of caller-supplied matrices.
pub const INPUT_TOL: f64 = 1e-8;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix. Column vectors are represented as `n x 1` matrices.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from entries given in row-major order.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Builds a matrix from real entries in row-major order.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Builds a matrix from a slice of rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows[0].as_ref().len();
        assert!(n > 0 && m > 0, "empty matrix");
        let mut flat = Vec::with_capacity(n * m);
        for r in rows {
            assert_eq!(r.as_ref().len(), m, "ragged rows");
            flat.extend_from_slice(r.as_ref());
        }
        Self(DMatrix::from_row_slice(n, m, &flat))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self(m)
    }

    /// Column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Projector `|v><v|` for a column vector `v`.
    pub fn projector(v: &ComplexMatrix) -> Self {
        Self(&v.0 * v.0.adjoint())
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        self.0.transpose().as_slice().to_vec()
    }

    /// Entries of a column vector (or of column `j` in general).
    pub fn column_entries(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        let n = self.rows();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.0.shape() != other.0.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max|H - H^dagger|`, or infinity for non-square input.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// `max|U^dagger U - I|`, or infinity for non-square input.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = Self(self.0.adjoint() * &self.0);
        prod.max_abs_diff(&Self::identity(self.rows()))
    }

    /// Checks Hermiticity relative to the max-entry norm.
    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_error();
        let scale = self.max_abs().max(1.0);
        if deviation > tol * scale {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: tol * scale,
            });
        }
        Ok(())
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_error();
        if deviation > tol {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// Matrix product with dimension checking.
    pub fn try_mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// `self * rho * self^dagger`.
    pub fn conjugate(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.try_mul(rho)?.try_mul(&self.adjoint())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on dimension mismatch; use [`ComplexMatrix::try_mul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Kronecker product `a ⊗ b`. The left factor is the most significant index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = (*iter.next().expect("kron_all needs at least one factor")).clone();
    iter.fold(first, |acc, f| kron(&acc, f))
}

/// Labels the tensor-factor structure of a Hilbert space, e.g. `[2, 2, 2]` for
/// three qubits or `[3, 3, n]` for two three-level atoms and a truncated cavity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpace {
    factor_dims: Vec<usize>,
}

impl TensorSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "tensor factors must be nonempty and positive, got {factor_dims:?}"
            )));
        }
        Ok(Self { factor_dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self {
            factor_dims: vec![2; n],
        }
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Digits of a flat index, most significant factor first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factor_dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Flat index of a digit tuple, most significant factor first.
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factor_dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

/// Reduced matrix on the factors listed in `keep` (in ascending factor order).
pub fn partial_trace(
    rho: &ComplexMatrix,
    space: &TensorSpace,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let dim = space.dim();
    if !rho.is_square() || rho.rows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {:?} needs a {dim}x{dim} matrix, got {}x{}",
            space.factor_dims(),
            rho.rows(),
            rho.cols()
        )));
    }
    let n = space.factor_dims().len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&k| k >= n) {
        return Err(Error::DimensionMismatch(format!(
            "keep set {keep:?} must be a nonempty subset of factors 0..{n}"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
    let dims = space.factor_dims();
    let kept_space = TensorSpace::new(kept.iter().map(|&k| dims[k]).collect())?;
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();
    let traced_space = if traced.is_empty() {
        None
    } else {
        Some(TensorSpace::new(traced.iter().map(|&k| dims[k]).collect())?)
    };

    let out_dim = kept_space.dim();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut row_digits = vec![0; n];
    let mut col_digits = vec![0; n];
    for r in 0..out_dim {
        let rk = kept_space.digits(r);
        for c in 0..out_dim {
            let ck = kept_space.digits(c);
            let mut acc = ZERO;
            for t in 0..traced_dim {
                let td = traced_space
                    .as_ref()
                    .map(|s| s.digits(t))
                    .unwrap_or_default();
                for (slot, &k) in kept.iter().enumerate() {
                    row_digits[k] = rk[slot];
                    col_digits[k] = ck[slot];
                }
                for (slot, &k) in traced.iter().enumerate() {
                    row_digits[k] = td[slot];
                    col_digits[k] = td[slot];
                }
                acc += rho.get(space.index(&row_digits), space.index(&col_digits));
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-12;

    /// Validates and wraps `m`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_trace_tolerance(m, Self::TRACE_TOL)
    }

    /// Validates with a caller-chosen trace tolerance (used at integration output boundaries).
    pub fn with_trace_tolerance(m: ComplexMatrix, trace_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let herm = m.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1"
            )));
        }
        let min_eig = hermitian_eigen(&m)
            .0
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -Self::PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// `|psi><psi|` for a normalized column vector.
    pub fn pure(psi: &ComplexMatrix) -> Result<Self> {
        if psi.cols() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "pure state needs a column vector, got {}x{}",
                psi.rows(),
                psi.cols()
            )));
        }
        Self::new(ComplexMatrix::projector(psi))
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale(c64(1.0 / dim as f64, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `tr(observable * rho)`, real part.
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        observable.trace_product(&self.0).re
    }

    /// Eigen-decomposition into weighted pure branches; weights below `cutoff` are dropped.
    pub fn pure_branches(&self, cutoff: f64) -> Vec<(f64, ComplexMatrix)> {
        let (vals, vecs) = hermitian_eigen(&self.0);
        vals.iter()
            .enumerate()
            .filter(|(_, &w)| w > cutoff)
            .map(|(k, &w)| {
                let col = ComplexMatrix::from_inner(vecs.inner().columns(k, 1).into_owned());
                (w, col)
            })
            .collect()
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({:?})", self.0)
    }
}

/// Eigenvalues (ascending order not guaranteed) and eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    // Symmetrize first so tiny anti-Hermitian noise cannot bias the solver.
    let sym = (&m.0 + m.0.adjoint()) * c64(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    (
        eig.eigenvalues.iter().copied().collect(),
        ComplexMatrix(eig.eigenvectors),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sz() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let expected = ComplexMatrix::from_diagonal(&[ONE, ONE, -ONE, -ONE]);
        assert_eq!(kron(&sz(), &i2), expected);
    }

    #[test]
    fn kron_projector_places_block_upper_left() {
        let p0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let k = kron(&p0, &sx());
        #[rustfmt::skip]
        let expected = ComplexMatrix::from_real(4, 4, &[
            0.0, 1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
        ]).unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ComplexMatrix::new(2, 2, vec![ONE; 3]).is_err());
        assert!(TensorSpace::new(vec![2, 0]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let space = TensorSpace::new(vec![3, 3, 4]).unwrap();
        for idx in 0..space.dim() {
            assert_eq!(space.index(&space.digits(idx)), idx);
        }
        assert_eq!(space.digits(5), vec![0, 1, 1]);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho_a = ComplexMatrix::from_rows(&[
            [c64(0.7, 0.0), c64(0.1, -0.2)],
            [c64(0.1, 0.2), c64(0.3, 0.0)],
        ]);
        let rho_b = ComplexMatrix::from_real(2, 2, &[0.25, 0.0, 0.0, 0.75]).unwrap();
        let joint = kron(&rho_a, &rho_b);
        let space = TensorSpace::qubits(2);
        let reduced_a = partial_trace(&joint, &space, &[0]).unwrap();
        let reduced_b = partial_trace(&joint, &space, &[1]).unwrap();
        assert!(reduced_a.max_abs_diff(&rho_a) < 1e-15);
        assert!(reduced_b.max_abs_diff(&rho_b) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = ComplexMatrix::column(&[ZERO, c64(s, 0.0), c64(s, 0.0), ZERO]);
        let rho = ComplexMatrix::projector(&psi);
        let reduced = partial_trace(&rho, &TensorSpace::qubits(2), &[0]).unwrap();
        let half = ComplexMatrix::identity(2).scale(c64(0.5, 0.0));
        assert!(reduced.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_mismatch() {
        let rho = ComplexMatrix::identity(4);
        let space = TensorSpace::qubits(3);
        assert!(matches!(
            partial_trace(&rho, &space, &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        let space2 = TensorSpace::qubits(2);
        assert!(partial_trace(&rho, &space2, &[]).is_err());
        assert!(partial_trace(&rho, &space2, &[2]).is_err());
    }

    #[test]
    fn keep_everything_is_identity_map() {
        let rho = DensityMatrix::maximally_mixed(8).into_matrix();
        let out = partial_trace(&rho, &TensorSpace::qubits(3), &[2, 0, 1]).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        let not_psd = ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityMatrix::new(not_psd).is_err());
        let non_herm = ComplexMatrix::from_real(2, 2, &[0.5, 0.3, 0.0, 0.5]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(2).scale(c64(0.5, 0.0))).is_ok());
    }

    #[test]
    fn pure_branches_reconstruct_state() {
        let rho = ComplexMatrix::from_real(2, 2, &[0.6, 0.2, 0.2, 0.4]).unwrap();
        let dm = DensityMatrix::new(rho.clone()).unwrap();
        let mut sum = ComplexMatrix::zeros(2, 2);
        for (w, v) in dm.pure_branches(1e-12) {
            sum = &sum + &ComplexMatrix::projector(&v).scale(c64(w, 0.0));
        }
        assert!(sum.max_abs_diff(&rho) < 1e-14);
    }
}
