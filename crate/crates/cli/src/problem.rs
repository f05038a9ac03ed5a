//! Problem files: JSON descriptions of observables, costs, the error measure
//! and the weight vectors to evaluate.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "observables": [{"name": "Q", "builtin": "fourier_position"},
//!                   {"name": "P", "builtin": "fourier_momentum"}],
//!   "costs": [{"type": "discrete"}, {"type": "discrete"}],
//!   "measure": "E",
//!   "weights": {"samples": 41}
//! }
//! ```

use std::path::Path;

use mur_core::observables::{fourier_pair, spin1_triple};
use mur_core::region::{sample_weights, Sampling, SamplingScheme};
use mur_core::{CostFunction, ErrorMeasure, HermitianMatrix, Observable, ProblemInstance, WeightVector, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub observables: Vec<ObservableSpec>,
    pub costs: Vec<CostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<ErrorMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsSpec>,
}

/// One observable: an orthonormal basis (vector `k` is outcome `k`), a
/// builtin, or explicit POVM elements.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    /// Outcome values, used by quadratic costs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Discrete,
    Quadratic,
    Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    #[serde(rename = "type")]
    pub kind: CostKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Samples { samples: usize },
    Single(Vec<f64>),
    List(Vec<Vec<f64>>),
}

fn invalid(field: impl AsRef<str>, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {msg}", field.as_ref()))
}

fn complex_rows(rows: &[Vec<[f64; 2]>]) -> Vec<Vec<C64>> {
    rows.iter().map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect()
}

impl CostSpec {
    pub fn discrete() -> Self {
        Self { kind: CostKind::Discrete, values: None, matrix: None }
    }

    /// Cost on `outcomes` outcomes; quadratic costs fall back to
    /// `default_values` when it carries none.
    pub fn build(&self, outcomes: usize, default_values: Option<&[f64]>) -> Result<CostFunction, CliError> {
        let cost = match self.kind {
            CostKind::Discrete => CostFunction::discrete(outcomes)?,
            CostKind::Quadratic => {
                let values = self
                    .values
                    .as_deref()
                    .or(default_values)
                    .ok_or_else(|| CliError::Validation("quadratic cost needs outcome values".into()))?;
                if values.len() != outcomes {
                    return Err(CliError::Validation(format!("quadratic cost has {} values for {outcomes} outcomes", values.len())));
                }
                CostFunction::quadratic(values)?
            }
            CostKind::Matrix => {
                let rows = self.matrix.clone().ok_or_else(|| CliError::Validation("matrix cost needs \"matrix\"".into()))?;
                if rows.len() == rows.first().map_or(0, Vec::len) {
                    CostFunction::new(rows)?
                } else {
                    CostFunction::rectangular(rows)?
                }
            }
        };
        if self.kind != CostKind::Matrix && self.matrix.is_some() {
            return Err(CliError::Validation("\"matrix\" is only allowed for matrix costs".into()));
        }
        Ok(cost)
    }

    /// Command-line form: `discrete`, `discrete:<d>`, `quadratic:<v,…>` or
    /// `matrix:<row>;<row>` with comma-separated rows.
    pub fn parse_arg(s: &str) -> Result<(Self, Option<usize>), CliError> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "discrete" if rest.is_empty() => Ok((Self::discrete(), None)),
            "discrete" => {
                let d = rest.trim().parse().map_err(|_| invalid("--cost", format!("bad outcome count {rest:?}")))?;
                Ok((Self::discrete(), Some(d)))
            }
            "quadratic" => {
                let values = parse_list(rest).map_err(|e| invalid("--cost", e))?;
                let n = values.len();
                Ok((Self { kind: CostKind::Quadratic, values: Some(values), matrix: None }, Some(n)))
            }
            "matrix" => {
                let rows = rest.split(';').map(parse_list).collect::<Result<Vec<_>, _>>().map_err(|e| invalid("--cost", e))?;
                Ok((Self { kind: CostKind::Matrix, values: None, matrix: Some(rows) }, None))
            }
            _ => Err(invalid("--cost", format!("unknown cost {s:?}; expected discrete, quadratic:<values> or matrix:<rows>"))),
        }
    }
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"))).collect()
}

impl ObservableSpec {
    pub fn builtin(name: &str) -> Self {
        Self { name: Some(name.into()), builtin: Some(name.into()), ..Self::default() }
    }

    pub fn build(&self, dim: usize) -> Result<Observable, CliError> {
        let given = [self.basis.is_some(), self.builtin.is_some(), self.elements.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(CliError::Validation("exactly one of \"basis\", \"builtin\" and \"elements\" is required".into()));
        }
        let a = if let Some(b) = &self.builtin {
            builtin(b, dim)?
        } else if let Some(basis) = &self.basis {
            Observable::projective_from_basis(&complex_rows(basis))?
        } else {
            let elements = self
                .elements
                .as_deref()
                .unwrap_or_default()
                .iter()
                .map(|rows| {
                    let data: Vec<C64> = complex_rows(rows).into_iter().flatten().collect();
                    HermitianMatrix::new(rows.len(), data)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Observable::new(elements)?
        };
        if a.dim() != dim {
            return Err(CliError::Validation(format!("has dimension {}, expected {dim}", a.dim())));
        }
        match &self.values {
            Some(v) => Ok(a.with_values(v.clone())?),
            None => Ok(a),
        }
    }
}

fn builtin(name: &str, dim: usize) -> Result<Observable, CliError> {
    let spin = |k: usize| {
        if dim != 3 {
            return Err(CliError::Validation(format!("builtin {name:?} needs dim 3")));
        }
        Ok(spin1_triple()[k].clone())
    };
    match name {
        "spin1_L1" => spin(0),
        "spin1_L2" => spin(1),
        "spin1_L3" => spin(2),
        "fourier_position" => Ok(fourier_pair(dim)?.0),
        "fourier_momentum" => Ok(fourier_pair(dim)?.1),
        _ => Err(CliError::Validation(format!(
            "unknown builtin {name:?}; expected spin1_L1, spin1_L2, spin1_L3, fourier_position or fourier_momentum"
        ))),
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Builtin spin-1 triple with quadratic costs on the eigenvalues.
    pub fn spin1(measure: Option<ErrorMeasure>) -> Self {
        let quadratic = CostSpec { kind: CostKind::Quadratic, values: None, matrix: None };
        Self {
            dim: 3,
            observables: ["spin1_L1", "spin1_L2", "spin1_L3"].map(ObservableSpec::builtin).to_vec(),
            costs: vec![quadratic; 3],
            measure,
            weights: None,
        }
    }

    /// Builtin position/momentum pair on `Z_d` with the discrete metric.
    pub fn fourier(d: usize, measure: Option<ErrorMeasure>) -> Self {
        Self {
            dim: d,
            observables: ["fourier_position", "fourier_momentum"].map(ObservableSpec::builtin).to_vec(),
            costs: vec![CostSpec::discrete(); 2],
            measure,
            weights: None,
        }
    }

    pub fn observables(&self) -> Result<Vec<Observable>, CliError> {
        self.observables
            .iter()
            .enumerate()
            .map(|(i, spec)| spec.build(self.dim).map_err(|e| e.within(&format!("observables[{i}]"))))
            .collect()
    }

    /// Cost `i` sized for `a`, defaulting quadratic values to those of `a`.
    pub fn cost(&self, i: usize, a: &Observable) -> Result<CostFunction, CliError> {
        let spec = self.costs.get(i).ok_or_else(|| invalid("costs", format!("missing entry {i}")))?;
        spec.build(a.outcomes(), a.values()).map_err(|e| e.within(&format!("costs[{i}]")))
    }

    /// Region instance; scheme families are attached when `with_families`.
    pub fn instance(&self, with_families: bool) -> Result<ProblemInstance, CliError> {
        let observables = self.observables()?;
        if self.costs.len() != observables.len() {
            return Err(invalid("costs", format!("{} entries for {} observables", self.costs.len(), observables.len())));
        }
        let costs = observables.iter().enumerate().map(|(i, a)| self.cost(i, a)).collect::<Result<Vec<_>, _>>()?;
        let inst = ProblemInstance::new(observables, costs)?;
        Ok(if with_families { inst.with_enumerated_families()? } else { inst })
    }

    /// Measures to evaluate: the override, else the file's, else all three.
    pub fn measures(&self, flag: Option<ErrorMeasure>) -> Vec<ErrorMeasure> {
        match flag.or(self.measure) {
            Some(m) => vec![m],
            None => ErrorMeasure::ALL.to_vec(),
        }
    }

    /// Weight vectors. `samples` overrides the file; without either the
    /// default sampling density is used.
    pub fn weight_vectors(&self, samples: Option<usize>) -> Result<Vec<WeightVector>, CliError> {
        let n = self.observables.len();
        let sampled = |count| sample_weights(n, Sampling { count, scheme: SamplingScheme::Auto }).map_err(CliError::from);
        if let Some(count) = samples {
            return sampled(count);
        }
        let explicit = |w: &Vec<f64>| {
            if w.len() != n {
                return Err(invalid("weights", format!("vector of length {} for {n} observables", w.len())));
            }
            WeightVector::new(w.clone()).map_err(|e| CliError::from(e).within("weights"))
        };
        match &self.weights {
            None => sampled(Sampling::default_for(n).count),
            Some(WeightsSpec::Samples { samples }) => sampled(*samples),
            Some(WeightsSpec::Single(w)) => Ok(vec![explicit(w)?]),
            Some(WeightsSpec::List(ws)) => ws.iter().map(explicit).collect(),
        }
    }
}
