//! Dense complex-matrix substrate: Hermitian checks, Hadamard products, trace
//! pairings, the generalized Gell-Mann basis, numerical rank and projection
//! onto the state set.
//!
//! Dimensions stay small (n up to ~16), so everything is stored densely in
//! [`nalgebra::DMatrix`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, TomographyError};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Absolute tolerance on `max |M - M†|`.
pub const HERM_TOL: f64 = 1e-10;
/// Absolute tolerance on `|Tr M - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as "positive semidefinite".
pub const PSD_TOL: f64 = 1e-9;
/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// The all-ones matrix `J`, identity element of the Hadamard product.
pub fn ones(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_element(n, n, c64(1.0, 0.0))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)])
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(TomographyError::NonFinite)
    }
}

pub fn ensure_square(context: &'static str, m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(TomographyError::shape(context, (m.nrows(), m.nrows()), m.shape()));
    }
    Ok(m.nrows())
}

fn ensure_same_shape(context: &'static str, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(TomographyError::shape(context, a.shape(), b.shape()));
    }
    Ok(())
}

/// `max_ij |M_ij - conj(M_ji)|`.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..m.ncols().min(n) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && hermiticity_error(m) <= tol
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(DVector<f64>, ComplexMatrix)> {
    ensure_square("hermitian_eigen", m)?;
    ensure_finite(m)?;
    let eig = hermitian_part(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(TomographyError::EigenFailure("non-finite eigenvalues".into()));
    }
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = hermitian_eigen(m)?;
    Ok(values[0])
}

/// Positive semidefinite, unit-trace, Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square("density matrix", &matrix)?;
        ensure_finite(&matrix)?;
        let herm = hermiticity_error(&matrix);
        if herm > HERM_TOL {
            return Err(TomographyError::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = trace(&matrix);
        if (tr - c64(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(TomographyError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_eigenvalue(&matrix)?;
        if min_eig < -PSD_TOL {
            return Err(TomographyError::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { matrix: identity(n).unscale(n as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// A labelled Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub label: String,
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        ensure_square("observable", &matrix)?;
        ensure_finite(&matrix)?;
        let label = label.into();
        let herm = hermiticity_error(&matrix);
        if herm > HERM_TOL {
            return Err(TomographyError::InvalidInput(format!(
                "observable {label} is not Hermitian (deviation {herm:e})"
            )));
        }
        Ok(Observable { label, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Entrywise product `A ∘ B`.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_same_shape("hadamard", a, b)?;
    Ok(a.component_mul(b))
}

/// `Tr(M ρ)`.
pub fn trace_pair(m: &ComplexMatrix, rho: &DensityMatrix) -> Result<Complex64> {
    trace_product(m, rho.matrix())
}

/// `Tr(A B)` for square matrices of equal size, without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    ensure_square("trace_product", a)?;
    ensure_same_shape("trace_product", a, b)?;
    let n = a.nrows();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// Both sides of the Hadamard/trace transport identity
/// `Tr{Aᵀ (B ∘ C)} = Tr{(Aᵀ ∘ Bᵀ) C}` for equal-shape `A`, `B`, `C`.
///
/// Each side is evaluated through its own ordinary matrix product so the
/// pair can be compared.
pub fn hadamard_trace_transport(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<(Complex64, Complex64)> {
    ensure_same_shape("hadamard_trace_transport", a, b)?;
    ensure_same_shape("hadamard_trace_transport", a, c)?;
    let lhs = trace(&(a.transpose() * b.component_mul(c)));
    let rhs = trace(&(a.transpose().component_mul(&b.transpose()) * c));
    Ok((lhs, rhs))
}

/// Identity followed by the `n² - 1` generalized Gell-Mann generators.
///
/// Generators are normalized to `Tr(G_a G_b) = 2 δ_ab`; the identity has
/// `Tr(I I) = n`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `Tr(G_a G_a)` for each element.
    pub fn norms(&self) -> Vec<f64> {
        (0..self.operators.len())
            .map(|a| if a == 0 { self.dim as f64 } else { 2.0 })
            .collect()
    }

    /// Real expansion coefficients of a Hermitian matrix.
    pub fn coordinates(&self, m: &ComplexMatrix) -> Result<Vec<f64>> {
        if m.shape() != (self.dim, self.dim) {
            return Err(TomographyError::shape("basis coordinates", (self.dim, self.dim), m.shape()));
        }
        self.operators
            .iter()
            .zip(self.norms())
            .map(|(g, norm)| Ok(trace_product(g, m)?.re / norm))
            .collect()
    }

    pub fn resum(&self, coords: &[f64]) -> Result<ComplexMatrix> {
        if coords.len() != self.operators.len() {
            return Err(TomographyError::InvalidInput(format!(
                "expected {} coordinates, got {}",
                self.operators.len(),
                coords.len()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (g, &x) in self.operators.iter().zip(coords) {
            out += g.scale(x);
        }
        Ok(out)
    }
}

pub fn hermitian_basis(n: usize) -> Result<HermitianBasis> {
    if n < 2 {
        return Err(TomographyError::InvalidInput(format!("Hermitian basis needs n >= 2, got {n}")));
    }
    let mut operators = Vec::with_capacity(n * n);
    operators.push(identity(n));
    for j in 0..n {
        for k in j + 1..n {
            let mut g = ComplexMatrix::zeros(n, n);
            g[(j, k)] = c64(1.0, 0.0);
            g[(k, j)] = c64(1.0, 0.0);
            operators.push(g);
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut g = ComplexMatrix::zeros(n, n);
            g[(j, k)] = c64(0.0, -1.0);
            g[(k, j)] = c64(0.0, 1.0);
            operators.push(g);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut g = ComplexMatrix::zeros(n, n);
        for j in 0..l {
            g[(j, j)] = c64(scale, 0.0);
        }
        g[(l, l)] = c64(-(l as f64) * scale, 0.0);
        operators.push(g);
    }
    Ok(HermitianBasis { dim: n, operators })
}

/// Stacks each matrix, flattened, as one column.
pub(crate) fn stack_columns(vectors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let Some(first) = vectors.first() else {
        return Err(TomographyError::InvalidInput("empty matrix list".into()));
    };
    let shape = first.shape();
    let len = shape.0 * shape.1;
    let mut out = ComplexMatrix::zeros(len, vectors.len());
    for (col, m) in vectors.iter().enumerate() {
        if m.shape() != shape {
            return Err(TomographyError::shape("matrix list", shape, m.shape()));
        }
        for (row, z) in m.iter().enumerate() {
            out[(row, col)] = *z;
        }
    }
    Ok(out)
}

pub(crate) fn singular_values(m: &ComplexMatrix) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

pub(crate) fn rank_of_singular_values(sv: &DVector<f64>, tol: f64) -> usize {
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Number of singular values above `tol` times the largest, treating each
/// matrix as one flat vector.
pub fn numerical_rank(vectors: &[ComplexMatrix], tol: f64) -> Result<usize> {
    let stacked = stack_columns(vectors)?;
    Ok(rank_of_singular_values(&singular_values(&stacked), tol))
}

/// Closest state in the eigenvalue-clipping sense: symmetrize, drop negative
/// eigenvalues, renormalize the trace.
pub fn nearest_density(h: &ComplexMatrix) -> Result<DensityMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= f64::MIN_POSITIVE {
        return Err(TomographyError::DegenerateInput(
            "no positive spectral weight left after clipping".into(),
        ));
    }
    let n = h.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &w) in clipped.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.adjoint()).scale(w / total);
    }
    let out = hermitian_part(&out);
    DensityMatrix::new(out)
}

/// Least squares `min ‖A x - b‖` via SVD with a relative singular-value
/// cutoff. Returns the solution and the residual norm.
pub(crate) fn complex_least_squares(
    a: &ComplexMatrix,
    b: &DVector<Complex64>,
) -> Result<(DVector<Complex64>, f64)> {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let x = svd
        .solve(b, (RANK_TOL * max).max(f64::MIN_POSITIVE))
        .map_err(|e| TomographyError::EigenFailure(e.to_string()))?;
    let residual = (a * &x - b).norm();
    Ok((x, residual))
}
