//! Pure-decoherence construction of phase-damping channels.
//!
//! The joint Hamiltonian `H = Σ_n P_n ⊗ Z_n` with `Z_n = e_n I + H_E + B_n`
//! is block diagonal in the system eigenbasis, so the reduced dynamics only
//! needs the environment-sized unitaries `e^{-i Z_n t}`. The system basis is
//! the computational basis throughout.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{validate_channel, DampingModel};
use crate::error::{Result, TomographyError};
use crate::operator::{
    c64, ensure_finite, ensure_square, hermitian_eigen, hermiticity_error, min_eigenvalue, trace_product,
    ComplexMatrix, DensityMatrix, HERM_TOL, PSD_TOL,
};

pub const MAX_ENV_DIM: usize = 64;

#[derive(Debug, Clone)]
pub struct PureDecoherenceModel {
    energies: Vec<f64>,
    env_hamiltonian: ComplexMatrix,
    couplings: Vec<ComplexMatrix>,
    env_state: DensityMatrix,
    /// Eigenpairs of each dressed operator `Z_n`.
    spectra: Vec<(DVector<f64>, ComplexMatrix)>,
}

impl PureDecoherenceModel {
    pub fn new(
        energies: Vec<f64>,
        env_hamiltonian: ComplexMatrix,
        couplings: Vec<ComplexMatrix>,
        env_state: DensityMatrix,
    ) -> Result<Self> {
        if energies.is_empty() {
            return Err(TomographyError::InvalidInput("at least one system level is required".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(TomographyError::NonFinite);
        }
        let env_dim = ensure_square("environment Hamiltonian", &env_hamiltonian)?;
        if env_dim > MAX_ENV_DIM {
            return Err(TomographyError::InvalidInput(format!(
                "environment dimension {env_dim} exceeds the cap of {MAX_ENV_DIM}"
            )));
        }
        if couplings.len() != energies.len() {
            return Err(TomographyError::InvalidInput(format!(
                "{} system levels but {} coupling operators",
                energies.len(),
                couplings.len()
            )));
        }
        check_hermitian("environment Hamiltonian", &env_hamiltonian)?;
        for b in &couplings {
            if b.shape() != (env_dim, env_dim) {
                return Err(TomographyError::shape("coupling operator", (env_dim, env_dim), b.shape()));
            }
            check_hermitian("coupling operator", b)?;
        }
        if env_state.dim() != env_dim {
            return Err(TomographyError::shape("environment state", (env_dim, env_dim), (env_state.dim(), env_state.dim())));
        }
        let mut model = PureDecoherenceModel { energies, env_hamiltonian, couplings, env_state, spectra: Vec::new() };
        model.spectra = dressed_operators(&model).iter().map(hermitian_eigen).collect::<Result<_>>()?;
        Ok(model)
    }

    pub fn system_dim(&self) -> usize {
        self.energies.len()
    }

    pub fn env_dim(&self) -> usize {
        self.env_hamiltonian.nrows()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn env_hamiltonian(&self) -> &ComplexMatrix {
        &self.env_hamiltonian
    }

    pub fn couplings(&self) -> &[ComplexMatrix] {
        &self.couplings
    }

    pub fn env_state(&self) -> &DensityMatrix {
        &self.env_state
    }

    fn propagator(&self, level: usize, t: f64) -> ComplexMatrix {
        let (values, vectors) = &self.spectra[level];
        let phases = values.map(|e| Complex64::from_polar(1.0, -e * t));
        let mut scaled = vectors.clone();
        for (k, phase) in phases.iter().enumerate() {
            for z in scaled.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        scaled * vectors.adjoint()
    }
}

fn check_hermitian(what: &str, m: &ComplexMatrix) -> Result<()> {
    ensure_finite(m)?;
    let err = hermiticity_error(m);
    if err > HERM_TOL {
        return Err(TomographyError::InvalidInput(format!("{what} is not Hermitian (deviation {err:e})")));
    }
    Ok(())
}

/// `Z_n = e_n I + H_E + B_n`.
pub fn dressed_operators(model: &PureDecoherenceModel) -> Vec<ComplexMatrix> {
    let d = model.env_dim();
    model
        .energies
        .iter()
        .zip(&model.couplings)
        .map(|(&e, b)| ComplexMatrix::identity(d, d).scale(e) + &model.env_hamiltonian + b)
        .collect()
}

/// `C_nm(t) = Tr(e^{-i Z_n t} ρ_E e^{i Z_m t})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub time: f64,
    pub matrix: ComplexMatrix,
}

impl CoefficientMatrix {
    /// Unit diagonal, positivity, and `C(0) = J`, each to `tol` (positivity to
    /// [`PSD_TOL`]).
    pub fn verify(&self, tol: f64) -> Result<()> {
        let one = c64(1.0, 0.0);
        let diag = self.matrix.diagonal().iter().map(|z| (z - one).norm()).fold(0.0, f64::max);
        if diag > tol {
            return Err(TomographyError::InvalidChannel(format!("C({}) diagonal deviates by {diag:e}", self.time)));
        }
        let min_eig = min_eigenvalue(&self.matrix)?;
        if min_eig < -PSD_TOL {
            return Err(TomographyError::InvalidChannel(format!("C({}) has eigenvalue {min_eig:e}", self.time)));
        }
        if self.time == 0.0 {
            let init = self.matrix.iter().map(|z| (z - one).norm()).fold(0.0, f64::max);
            if init > tol {
                return Err(TomographyError::InvalidChannel(format!("C(0) deviates from J by {init:e}")));
            }
        }
        Ok(())
    }
}

pub fn coefficient_matrix(model: &PureDecoherenceModel, t: f64) -> Result<CoefficientMatrix> {
    if t.is_nan() {
        return Err(TomographyError::NonFinite);
    }
    if t < 0.0 {
        return Err(TomographyError::NegativeTime(t));
    }
    let n = model.system_dim();
    let propagators: Vec<ComplexMatrix> = (0..n).map(|k| model.propagator(k, t)).collect();
    let evolved: Vec<ComplexMatrix> = propagators.iter().map(|u| u * model.env_state.matrix()).collect();
    let mut matrix = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            matrix[(a, b)] = trace_product(&evolved[a], &propagators[b].adjoint())?;
        }
    }
    ensure_finite(&matrix).map_err(|_| TomographyError::EigenFailure("non-finite coefficient matrix".into()))?;
    Ok(CoefficientMatrix { time: t, matrix })
}

/// `Σ_{n,m} C_nm(t) P_n ρ(0) P_m` with `P_n = |n⟩⟨n|`.
pub fn apply_kraus_map(model: &PureDecoherenceModel, t: f64, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let n = model.system_dim();
    if rho0.dim() != n {
        return Err(TomographyError::shape("apply_kraus_map", (n, n), (rho0.dim(), rho0.dim())));
    }
    let c = coefficient_matrix(model, t)?;
    let projectors: Vec<ComplexMatrix> = (0..n)
        .map(|k| {
            let mut p = ComplexMatrix::zeros(n, n);
            p[(k, k)] = c64(1.0, 0.0);
            p
        })
        .collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for (a, pa) in projectors.iter().enumerate() {
        let left = pa * rho0.matrix();
        for (b, pb) in projectors.iter().enumerate() {
            out += (&left * pb) * c.matrix[(a, b)];
        }
    }
    DensityMatrix::new(out)
}

/// Wraps `t ↦ C(t)` as a sampled channel and validates it on `probe_grid`.
pub fn to_channel(model: &PureDecoherenceModel, probe_grid: &[f64]) -> Result<DampingModel> {
    if !probe_grid.contains(&0.0) {
        return Err(TomographyError::InvalidInput("probe grid must contain t = 0".into()));
    }
    let shared = Arc::new(model.clone());
    let channel = DampingModel::from_fn(model.system_dim(), move |t| Ok(coefficient_matrix(&shared, t)?.matrix));
    let report = validate_channel(&channel, probe_grid)?;
    if !report.all_ok() {
        return Err(TomographyError::InvalidChannel(format!("pure-decoherence channel failed validation: {report:?}")));
    }
    Ok(channel)
}
