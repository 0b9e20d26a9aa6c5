//! Phase-damping channels `ρ(t) = D(t) ∘ ρ(0)`.
//!
//! A channel is either given through a constant-basis decomposition
//! `D(t) = Σ_k λ_k(t) A_k` or as a sampled matrix function of time. Sampled
//! channels can be turned into decompositions with [`extract_basis`].

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Result, TomographyError};
use crate::operator::{
    c64, complex_least_squares, ensure_finite, ensure_square, hadamard, hermiticity_error, min_eigenvalue,
    numerical_rank, stack_columns, ComplexMatrix, DensityMatrix, HERM_TOL, PSD_TOL, RANK_TOL,
};

/// Tolerance on `|d_ii(t) - 1|` and `|d_ij(0) - 1|`.
pub const CHANNEL_TOL: f64 = 1e-10;
/// Largest Frobenius residual accepted when expressing a sample in a basis.
pub const DECOMPOSITION_TOL: f64 = 1e-9;
/// Fraction of the largest remainder a sample needs to enter the extracted basis.
pub const EXTRACTION_PIVOT_RATIO: f64 = 0.25;

/// One term `c · e^{z t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coeff: Complex64,
    pub rate: Complex64,
}

impl ExpTerm {
    pub fn new(coeff: Complex64, rate: Complex64) -> Self {
        ExpTerm { coeff, rate }
    }
}

/// Scalar time signal `λ_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarSignal {
    ExponentialSum(Vec<ExpTerm>),
    /// Strictly increasing sample times, linearly interpolated.
    Tabulated(Vec<(f64, Complex64)>),
}

impl ScalarSignal {
    pub fn exponential_sum(terms: Vec<ExpTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(TomographyError::InvalidInput("exponential sum needs at least one term".into()));
        }
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !terms.iter().all(|t| finite(t.coeff) && finite(t.rate)) {
            return Err(TomographyError::NonFinite);
        }
        Ok(ScalarSignal::ExponentialSum(terms))
    }

    pub fn tabulated(points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(TomographyError::InvalidInput("tabulated signal needs at least one point".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.re.is_finite() || !v.im.is_finite()) {
            return Err(TomographyError::NonFinite);
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TomographyError::InvalidInput("tabulated times must be strictly increasing".into()));
        }
        Ok(ScalarSignal::Tabulated(points))
    }

    pub fn constant(value: Complex64) -> Self {
        ScalarSignal::ExponentialSum(vec![ExpTerm::new(value, c64(0.0, 0.0))])
    }

    /// `e^{-γ t}`.
    pub fn decay(gamma: f64) -> Self {
        ScalarSignal::ExponentialSum(vec![ExpTerm::new(c64(1.0, 0.0), c64(-gamma, 0.0))])
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            ScalarSignal::ExponentialSum(terms) => {
                Ok(terms.iter().map(|term| term.coeff * (term.rate * t).exp()).sum())
            }
            ScalarSignal::Tabulated(points) => {
                let (start, end) = (points[0].0, points[points.len() - 1].0);
                if !(start..=end).contains(&t) {
                    return Err(TomographyError::TimeOutOfRange { t, start, end });
                }
                let idx = points.partition_point(|(ti, _)| *ti <= t);
                if idx == 0 {
                    return Ok(points[0].1);
                }
                let (t0, v0) = points[idx - 1];
                if t0 == t || idx == points.len() {
                    return Ok(v0);
                }
                let (t1, v1) = points[idx];
                let w = (t - t0) / (t1 - t0);
                Ok(v0 * (1.0 - w) + v1 * w)
            }
        }
    }

    /// Time range on which the signal can be evaluated (`None` = unbounded).
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            ScalarSignal::ExponentialSum(_) => None,
            ScalarSignal::Tabulated(points) => Some((points[0].0, points[points.len() - 1].0)),
        }
    }

    /// Smallest strictly positive decay rate `-Re z` among the terms.
    pub fn slowest_decay(&self) -> Option<f64> {
        match self {
            ScalarSignal::ExponentialSum(terms) => terms
                .iter()
                .map(|t| -t.rate.re)
                .filter(|&r| r > 0.0)
                .min_by(f64::total_cmp),
            ScalarSignal::Tabulated(_) => None,
        }
    }
}

/// `D(t) = Σ_k λ_k(t) A_k` with linearly independent constant `A_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDecomposition {
    basis: Vec<ComplexMatrix>,
    signals: Vec<ScalarSignal>,
}

impl BasisDecomposition {
    pub fn new(basis: Vec<ComplexMatrix>, signals: Vec<ScalarSignal>) -> Result<Self> {
        if basis.is_empty() {
            return Err(TomographyError::InvalidInput("decomposition needs at least one basis matrix".into()));
        }
        if basis.len() != signals.len() {
            return Err(TomographyError::InvalidInput(format!(
                "{} basis matrices but {} signals",
                basis.len(),
                signals.len()
            )));
        }
        let n = ensure_square("decomposition basis", &basis[0])?;
        for a in &basis {
            ensure_finite(a)?;
        }
        let mu = basis.len();
        if mu > n * n {
            return Err(TomographyError::InvalidInput(format!("mu = {mu} exceeds n^2 = {}", n * n)));
        }
        let rank = numerical_rank(&basis, RANK_TOL)?;
        if rank != mu {
            return Err(TomographyError::InvalidInput(format!(
                "basis matrices are linearly dependent (rank {rank} < {mu})"
            )));
        }
        Ok(BasisDecomposition { basis, signals })
    }

    pub fn mu(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn signals(&self) -> &[ScalarSignal] {
        &self.signals
    }

    pub fn evaluate(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (a, s) in self.basis.iter().zip(&self.signals) {
            out += a * s.eval(t)?;
        }
        Ok(out)
    }

    /// Intersection of the signal domains.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.signals.iter().filter_map(|s| s.domain()).fold(None, |acc, (a, b)| match acc {
            None => Some((a, b)),
            Some((lo, hi)) => Some((lo.max(a), hi.min(b))),
        })
    }

    pub fn slowest_decay(&self) -> Option<f64> {
        self.signals.iter().filter_map(|s| s.slowest_decay()).min_by(f64::total_cmp)
    }
}

type ChannelFn = dyn Fn(f64) -> Result<ComplexMatrix> + Send + Sync;

#[derive(Clone)]
pub enum SampledChannel {
    Function(Arc<ChannelFn>),
    /// Strictly increasing times, entrywise linear interpolation.
    Table(Vec<(f64, ComplexMatrix)>),
}

impl fmt::Debug for SampledChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampledChannel::Function(_) => f.write_str("SampledChannel::Function(..)"),
            SampledChannel::Table(points) => f.debug_tuple("SampledChannel::Table").field(points).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ChannelRepr {
    Decomposed(BasisDecomposition),
    Sampled(SampledChannel),
}

/// A phase-damping channel `t ↦ D(t)` on an `n`-level system.
#[derive(Debug, Clone)]
pub struct DampingModel {
    dim: usize,
    repr: ChannelRepr,
}

impl DampingModel {
    pub fn decomposed(decomposition: BasisDecomposition) -> Self {
        DampingModel { dim: decomposition.dim(), repr: ChannelRepr::Decomposed(decomposition) }
    }

    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        DampingModel { dim, repr: ChannelRepr::Sampled(SampledChannel::Function(Arc::new(f))) }
    }

    pub fn from_table(points: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let Some((_, first)) = points.first() else {
            return Err(TomographyError::InvalidInput("empty channel table".into()));
        };
        let dim = ensure_square("channel table", first)?;
        for (t, m) in &points {
            if !t.is_finite() {
                return Err(TomographyError::NonFinite);
            }
            if m.shape() != (dim, dim) {
                return Err(TomographyError::shape("channel table", (dim, dim), m.shape()));
            }
            ensure_finite(m)?;
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TomographyError::InvalidInput("table times must be strictly increasing".into()));
        }
        Ok(DampingModel { dim, repr: ChannelRepr::Sampled(SampledChannel::Table(points)) })
    }

    /// Qubit dephasing: `D(t) = I + e^{-γt} σ₁`.
    pub fn dephasing(gamma: f64) -> Self {
        let basis = vec![crate::operator::identity(2), crate::operator::pauli_x()];
        let signals = vec![ScalarSignal::constant(c64(1.0, 0.0)), ScalarSignal::decay(gamma)];
        DampingModel::decomposed(BasisDecomposition { basis, signals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &ChannelRepr {
        &self.repr
    }

    pub fn decomposition(&self) -> Option<&BasisDecomposition> {
        match &self.repr {
            ChannelRepr::Decomposed(d) => Some(d),
            ChannelRepr::Sampled(_) => None,
        }
    }

    pub fn slowest_decay(&self) -> Option<f64> {
        self.decomposition().and_then(BasisDecomposition::slowest_decay)
    }
}

/// `D(t)`.
pub fn evaluate(model: &DampingModel, t: f64) -> Result<ComplexMatrix> {
    if t.is_nan() {
        return Err(TomographyError::NonFinite);
    }
    if t < 0.0 {
        return Err(TomographyError::NegativeTime(t));
    }
    let out = match &model.repr {
        ChannelRepr::Decomposed(d) => d.evaluate(t)?,
        ChannelRepr::Sampled(SampledChannel::Function(f)) => f(t)?,
        ChannelRepr::Sampled(SampledChannel::Table(points)) => interpolate_table(points, t)?,
    };
    if out.shape() != (model.dim, model.dim) {
        return Err(TomographyError::shape("channel evaluation", (model.dim, model.dim), out.shape()));
    }
    ensure_finite(&out)?;
    Ok(out)
}

fn interpolate_table(points: &[(f64, ComplexMatrix)], t: f64) -> Result<ComplexMatrix> {
    let (start, end) = (points[0].0, points[points.len() - 1].0);
    if !(start..=end).contains(&t) {
        return Err(TomographyError::TimeOutOfRange { t, start, end });
    }
    let idx = points.partition_point(|(ti, _)| *ti <= t);
    let (t0, m0) = &points[idx.saturating_sub(1)];
    if *t0 == t || idx == points.len() || idx == 0 {
        return Ok(m0.clone());
    }
    let (t1, m1) = &points[idx];
    let w = (t - t0) / (t1 - t0);
    Ok(m0.scale(1.0 - w) + m1.scale(w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// Worst magnitude over the probe grid (0 when the condition holds exactly).
    pub magnitude: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub psd_ok: bool,
    pub diag_ok: bool,
    pub init_ok: bool,
    /// `max(-λ_min, ‖D - D†‖_max)` over the grid.
    pub psd: Violation,
    /// `max |d_ii - 1|` over the grid.
    pub diag: Violation,
    /// `max |d_ij(0) - 1|`.
    pub init: Violation,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.psd_ok && self.diag_ok && self.init_ok
    }
}

/// Checks positivity, unit diagonal and `D(0) = J` on a probe grid.
///
/// The initial condition is always evaluated at `t = 0`, whether or not the
/// grid contains it.
pub fn validate_channel(model: &DampingModel, probe_grid: &[f64]) -> Result<ValidationReport> {
    if probe_grid.is_empty() {
        return Err(TomographyError::InvalidInput("validation grid is empty".into()));
    }
    let mut psd = Violation { magnitude: 0.0, time: probe_grid[0] };
    let mut diag = Violation { magnitude: 0.0, time: probe_grid[0] };
    let mut psd_ok = true;
    for &t in probe_grid {
        let d = evaluate(model, t)?;
        let herm = hermiticity_error(&d);
        let neg = -min_eigenvalue(&d)?;
        if herm > HERM_TOL || neg > PSD_TOL {
            psd_ok = false;
        }
        let v = herm.max(neg).max(0.0);
        if v > psd.magnitude {
            psd = Violation { magnitude: v, time: t };
        }
        let dv = d.diagonal().iter().map(|z| (z - c64(1.0, 0.0)).norm()).fold(0.0, f64::max);
        if dv > diag.magnitude {
            diag = Violation { magnitude: dv, time: t };
        }
    }
    let d0 = evaluate(model, 0.0)?;
    let init = Violation {
        magnitude: d0.iter().map(|z| (z - c64(1.0, 0.0)).norm()).fold(0.0, f64::max),
        time: 0.0,
    };
    Ok(ValidationReport {
        psd_ok,
        diag_ok: diag.magnitude <= CHANNEL_TOL,
        init_ok: init.magnitude <= CHANNEL_TOL,
        psd,
        diag,
        init,
    })
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(TomographyError::InvalidInput("no candidate times".into()));
    }
    if let Some(&t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(if t.is_finite() { TomographyError::NegativeTime(t) } else { TomographyError::NonFinite });
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(TomographyError::InvalidInput("candidate times must be sorted".into()));
    }
    Ok(())
}

/// Greedy constant-basis extraction. At each step the earliest sample
/// `D(t_i)` whose component orthogonal to the kept samples is at least
/// [`EXTRACTION_PIVOT_RATIO`] times the largest such component is kept.
/// Extraction stops when every remainder is below `tol` relative to the
/// largest sample. The coefficients `λ_k(t_i)` are then fitted by least
/// squares at every candidate and stored as tabulated signals.
pub fn extract_basis(model: &DampingModel, candidate_times: &[f64], tol: f64) -> Result<BasisDecomposition> {
    validate_times(candidate_times)?;
    let n = model.dim();
    let samples = candidate_times.iter().map(|&t| evaluate(model, t)).collect::<Result<Vec<_>>>()?;
    let mut residuals: Vec<DVector<Complex64>> =
        samples.iter().map(|d| DVector::from_iterator(d.len(), d.iter().cloned())).collect();
    let scale = residuals.iter().map(|r| r.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(TomographyError::DegenerateInput("channel vanishes at every candidate time".into()));
    }
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    while basis.len() < n * n {
        let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
        let largest = norms.iter().cloned().fold(0.0_f64, f64::max);
        if largest <= tol * scale {
            break;
        }
        let best = norms.iter().position(|&r| r >= EXTRACTION_PIVOT_RATIO * largest).unwrap_or(0);
        let norm = norms[best];
        basis.push(samples[best].clone());
        let q = residuals[best].unscale(norm);
        for r in residuals.iter_mut() {
            let c = q.dotc(r);
            r.axpy(-c, &q, Complex64::new(1.0, 0.0));
        }
    }
    refit_signals(model, basis, candidate_times)
}

/// Expresses `D(t)` in a fixed basis at each time, failing with the first
/// time whose residual exceeds [`DECOMPOSITION_TOL`].
pub fn refit_signals(model: &DampingModel, basis: Vec<ComplexMatrix>, times: &[f64]) -> Result<BasisDecomposition> {
    validate_times(times)?;
    let mut times: Vec<f64> = times.to_vec();
    times.dedup();
    let columns = stack_columns(&basis)?;
    let mut tables: Vec<Vec<(f64, Complex64)>> = vec![Vec::with_capacity(times.len()); basis.len()];
    for &t in &times {
        let d = evaluate(model, t)?;
        let (coeffs, residual) = fit_in_basis(&columns, &d)?;
        if residual > DECOMPOSITION_TOL {
            return Err(TomographyError::DecompositionFailure { time: t, residual, tolerance: DECOMPOSITION_TOL });
        }
        for (table, c) in tables.iter_mut().zip(coeffs.iter()) {
            table.push((t, *c));
        }
    }
    let signals = tables.into_iter().map(ScalarSignal::tabulated).collect::<Result<Vec<_>>>()?;
    BasisDecomposition::new(basis, signals)
}

/// Frobenius residual of the best fit of `D(t)` in `basis`, for each probe time.
pub fn basis_residuals(model: &DampingModel, basis: &[ComplexMatrix], probe_times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let columns = stack_columns(basis)?;
    probe_times
        .iter()
        .map(|&t| {
            let d = evaluate(model, t)?;
            Ok((t, fit_in_basis(&columns, &d)?.1))
        })
        .collect()
}

/// Largest residual of expressing `D(t)` in `basis` over `probe_times`.
pub fn verify_basis(model: &DampingModel, basis: &[ComplexMatrix], probe_times: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (time, residual) in basis_residuals(model, basis, probe_times)? {
        if residual > DECOMPOSITION_TOL {
            return Err(TomographyError::DecompositionFailure { time, residual, tolerance: DECOMPOSITION_TOL });
        }
        worst = worst.max(residual);
    }
    Ok(worst)
}

fn fit_in_basis(columns: &ComplexMatrix, target: &ComplexMatrix) -> Result<(DVector<Complex64>, f64)> {
    if columns.nrows() != target.len() {
        return Err(TomographyError::DimensionMismatch {
            context: "basis fit",
            expected: format!("{} entries", columns.nrows()),
            found: format!("{} entries", target.len()),
        });
    }
    let b = DVector::from_iterator(target.len(), target.iter().cloned());
    complex_least_squares(columns, &b)
}

/// Default extraction grid: `4n²` uniform points on `[0, T]`.
pub fn default_candidate_times(n: usize, horizon: f64) -> Vec<f64> {
    let count = 4 * n * n;
    (0..count).map(|i| horizon * i as f64 / (count - 1) as f64).collect()
}

/// Closes a seed set under ordinary matrix products.
///
/// Starts from a maximal independent subset of `seed`, then repeatedly adds
/// every product `B_i B_h` of current members that is independent of the
/// set, until a round adds nothing (or `n²` rounds have run).
pub fn basis_closure(seed: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = seed.first() else {
        return Err(TomographyError::InvalidInput("empty seed".into()));
    };
    let n = ensure_square("basis_closure", first)?;
    for m in seed {
        if m.shape() != (n, n) {
            return Err(TomographyError::shape("basis_closure", (n, n), m.shape()));
        }
        ensure_finite(m)?;
    }
    let mut set: Vec<ComplexMatrix> = Vec::new();
    let try_push = |set: &mut Vec<ComplexMatrix>, m: ComplexMatrix| -> Result<bool> {
        set.push(m);
        if numerical_rank(set, RANK_TOL)? < set.len() {
            set.pop();
            return Ok(false);
        }
        Ok(true)
    };
    for m in seed {
        try_push(&mut set, m.clone())?;
    }
    for _round in 0..n * n {
        if set.len() == n * n || set.is_empty() {
            break;
        }
        let members = set.clone();
        let mut added = false;
        for bi in &members {
            for bh in &members {
                if set.len() == n * n {
                    break;
                }
                added |= try_push(&mut set, bi * bh)?;
            }
        }
        if !added {
            break;
        }
    }
    Ok(set)
}

/// `D(t) ∘ ρ(0)`.
pub fn apply_channel(model: &DampingModel, t: f64, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    if rho0.dim() != model.dim() {
        return Err(TomographyError::shape("apply_channel", (model.dim(), model.dim()), (rho0.dim(), rho0.dim())));
    }
    let d = evaluate(model, t)?;
    let out = hadamard(&d, rho0.matrix())?;
    DensityMatrix::new(out).map_err(|e| TomographyError::InvalidChannel(format!("at t = {t}: {e}")))
}
