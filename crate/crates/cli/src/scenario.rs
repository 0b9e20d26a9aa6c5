//! Scenario files. Complex numbers are `[re, im]` pairs and matrices are
//! row-major nested arrays of them.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dephtomo::channel::{default_candidate_times, BasisDecomposition, DampingModel, ExpTerm, ScalarSignal};
use dephtomo::decoherence::coefficient_matrix;
use dephtomo::io::{matrix_from_json, JsonMatrix};
use dephtomo::{Complex64, ComplexMatrix, DensityMatrix, Observable, PureDecoherenceModel, ReconstructionOptions};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub true_state: Option<JsonMatrix>,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub options: OptionsSpec,
    /// Probe times for `validate` and `decompose`.
    #[serde(default)]
    pub validation_grid: Option<Vec<f64>>,
    /// Candidate times for basis extraction of sampled channels.
    #[serde(default)]
    pub candidate_times: Option<Vec<f64>>,
    /// Measurement record CSV, read instead of simulating. Relative paths
    /// resolve against the scenario file.
    #[serde(default)]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    DampingModel(DampingSpec),
    PureDecoherence(PureDecoherenceSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSpec {
    Decomposition { basis: Vec<JsonMatrix>, signals: Vec<SignalSpec> },
    Samples(Vec<SampleSpec>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub t: f64,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    ExponentialSum(Vec<TermSpec>),
    Tabulated(Vec<(f64, [f64; 2])>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: [f64; 2],
    pub rate: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureDecoherenceSpec {
    pub energies: Vec<f64>,
    pub env_hamiltonian: JsonMatrix,
    pub couplings: Vec<JsonMatrix>,
    pub env_state: JsonMatrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub label: String,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub auto: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default = "yes")]
    pub trace_augmentation: bool,
    #[serde(default)]
    pub project_to_density: bool,
}

fn yes() -> bool {
    true
}

impl Default for OptionsSpec {
    fn default() -> Self {
        OptionsSpec { trace_augmentation: true, project_to_density: false }
    }
}

impl From<OptionsSpec> for ReconstructionOptions {
    fn from(o: OptionsSpec) -> Self {
        ReconstructionOptions { trace_augmentation: o.trace_augmentation, project_to_density: o.project_to_density }
    }
}

/// How measurement instants are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GridMode {
    Explicit(Vec<f64>),
    Auto { horizon: Option<f64> },
}

fn c([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(context: &str, m: &JsonMatrix) -> Result<ComplexMatrix, CliError> {
    matrix_from_json(m).map_err(|e| CliError::Scenario(format!("{context}: {e}")))
}

fn invalid(context: &str) -> impl Fn(dephtomo::TomographyError) -> CliError + '_ {
    move |e| CliError::Scenario(format!("{context}: {e}"))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let mut scenario: Scenario = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        if let (Some(record), Some(dir)) = (&scenario.record, path.parent()) {
            if record.is_relative() {
                scenario.record = Some(dir.join(record));
            }
        }
        Ok(scenario)
    }

    pub fn channel(&self) -> Result<DampingModel, CliError> {
        match &self.channel {
            ChannelSpec::DampingModel(DampingSpec::Decomposition { basis, signals }) => {
                let basis = basis
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix(&format!("basis[{k}]"), m))
                    .collect::<Result<Vec<_>, _>>()?;
                let signals = signals.iter().map(SignalSpec::build).collect::<Result<Vec<_>, _>>()?;
                let decomp = BasisDecomposition::new(basis, signals).map_err(invalid("decomposition"))?;
                Ok(DampingModel::decomposed(decomp))
            }
            ChannelSpec::DampingModel(DampingSpec::Samples(samples)) => {
                let points = samples
                    .iter()
                    .map(|s| Ok((s.t, matrix(&format!("sample at t = {}", s.t), &s.matrix)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                DampingModel::from_table(points).map_err(invalid("samples"))
            }
            ChannelSpec::PureDecoherence(spec) => {
                let model = Arc::new(spec.build()?);
                let n = model.system_dim();
                Ok(DampingModel::from_fn(n, move |t| Ok(coefficient_matrix(&model, t)?.matrix)))
            }
        }
    }

    pub fn true_state(&self) -> Result<Option<DensityMatrix>, CliError> {
        self.true_state
            .as_ref()
            .map(|m| DensityMatrix::new(matrix("true_state", m)?).map_err(invalid("true_state")))
            .transpose()
    }

    pub fn observables(&self) -> Result<Vec<Observable>, CliError> {
        if self.observables.is_empty() {
            return Err(CliError::Scenario("no observables".into()));
        }
        self.observables
            .iter()
            .map(|q| Observable::new(q.label.clone(), matrix(&q.label, &q.matrix)?).map_err(invalid(&q.label)))
            .collect()
    }

    pub fn grid_mode(&self) -> Result<GridMode, CliError> {
        let Some(grid) = &self.grid else {
            return Err(CliError::Scenario("missing `grid`".into()));
        };
        match (&grid.times, grid.auto) {
            (Some(_), true) => Err(CliError::Scenario("grid: give either `times` or `auto`, not both".into())),
            (Some(times), false) => Ok(GridMode::Explicit(times.clone())),
            (None, true) => Ok(GridMode::Auto { horizon: grid.horizon }),
            (None, false) => Err(CliError::Scenario("grid: need `times` or `auto: true`".into())),
        }
    }

    /// Explicit horizon if given, else `3 / (slowest decay rate)`.
    pub fn horizon(&self, model: &DampingModel) -> Result<f64, CliError> {
        let given = self.grid.as_ref().and_then(|g| g.horizon);
        let h = given.or_else(|| model.slowest_decay().map(|r| 3.0 / r)).ok_or_else(|| {
            CliError::Scenario("no decay rate to derive a horizon from; set `grid.horizon`".into())
        })?;
        if !(h.is_finite() && h > 0.0) {
            return Err(CliError::Scenario(format!("horizon must be positive and finite, got {h}")));
        }
        Ok(h)
    }

    pub fn candidate_times(&self, model: &DampingModel) -> Result<Vec<f64>, CliError> {
        match &self.candidate_times {
            Some(t) => Ok(t.clone()),
            None => Ok(default_candidate_times(model.dim(), self.horizon(model)?)),
        }
    }

    /// `validation_grid`, else explicit grid times plus `t = 0`, else the
    /// default candidate grid over the horizon.
    pub fn probe_times(&self, model: &DampingModel) -> Result<Vec<f64>, CliError> {
        if let Some(t) = &self.validation_grid {
            return Ok(t.clone());
        }
        if let Some(times) = self.grid.as_ref().and_then(|g| g.times.as_ref()) {
            let mut t = times.clone();
            if !t.contains(&0.0) {
                t.insert(0, 0.0);
            }
            return Ok(t);
        }
        Ok(default_candidate_times(model.dim(), self.horizon(model)?))
    }
}

impl SignalSpec {
    fn build(&self) -> Result<ScalarSignal, CliError> {
        match self {
            SignalSpec::ExponentialSum(terms) => {
                ScalarSignal::exponential_sum(terms.iter().map(|t| ExpTerm::new(c(t.coeff), c(t.rate))).collect())
                    .map_err(invalid("exponential_sum"))
            }
            SignalSpec::Tabulated(points) => {
                ScalarSignal::tabulated(points.iter().map(|&(t, z)| (t, c(z))).collect()).map_err(invalid("tabulated"))
            }
        }
    }
}

impl PureDecoherenceSpec {
    fn build(&self) -> Result<PureDecoherenceModel, CliError> {
        let h = matrix("env_hamiltonian", &self.env_hamiltonian)?;
        let couplings = self
            .couplings
            .iter()
            .enumerate()
            .map(|(i, m)| matrix(&format!("couplings[{i}]"), m))
            .collect::<Result<Vec<_>, _>>()?;
        let env_state = DensityMatrix::new(matrix("env_state", &self.env_state)?).map_err(invalid("env_state"))?;
        PureDecoherenceModel::new(self.energies.clone(), h, couplings, env_state).map_err(invalid("pure_decoherence"))
    }
}
