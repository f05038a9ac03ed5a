//! Library side of the `mur` command-line tool: problem files, the
//! computations behind each subcommand, and the CSV, JSON and SVG writers.
//!
//! Every command goes through the same `mur-core` calls a library user
//! would make, so the numbers in the output files are the library's numbers.

use std::fmt::Write as _;
use std::path::PathBuf;

use mur_core::region::{build_sdp, offset_point, Formulation};
use mur_core::transport::{binomial, enumerate_mccm, transport_cost_dual, transport_cost_primal};
use mur_core::{CostFunction, Distribution, ErrorMeasure, Execution, ProblemInstance, RegionSample, SolveOptions, SolveStatus, WeightVector};
use thiserror::Error;

pub mod output;
pub mod problem;

pub use output::{csv_header, fmt_g12, region_csv, region_json, region_svg};
pub use problem::{CostKind, CostSpec, ObservableSpec, ProblemFile, WeightsSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid problem file: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] mur_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("all {0} boundary points failed")]
    AllFailed(usize),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Core(e) if is_input_error(e) => 2,
            CliError::Core(_) | CliError::AllFailed(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Prefixes input errors with the offending field.
    pub fn within(self, field: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{field}: {m}")),
            CliError::Core(e) if is_input_error(&e) => CliError::Validation(format!("{field}: {e}")),
            other => other,
        }
    }
}

fn is_input_error(e: &mur_core::Error) -> bool {
    use mur_core::Error as E;
    matches!(e, E::Validation(_) | E::DimensionMismatch { .. } | E::NotCyclicallyMonotone { .. } | E::EnumerationBound { .. })
}

/// Solver settings and execution mode shared by the region commands.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub solve: SolveOptions,
    pub exec: Execution,
}

impl RunOptions {
    pub fn with_tol(tol: Option<f64>) -> Result<Self, CliError> {
        let mut opts = Self::default();
        if let Some(t) = tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Validation(format!("--tol must lie in (0, 1), got {t}")));
            }
            opts.solve.tol = t;
        }
        Ok(opts)
    }
}

/// Primal and dual transport costs, their gap and an optimal plan.
pub fn transport_report(c: &CostFunction, p: &[f64], q: &[f64]) -> Result<String, CliError> {
    let p = Distribution::new(p.to_vec()).map_err(|e| CliError::from(e).within("--p"))?;
    let q = Distribution::new(q.to_vec()).map_err(|e| CliError::from(e).within("--q"))?;
    let (primal, plan) = transport_cost_primal(c, &p, &q)?;
    let family = enumerate_mccm(c)?;
    let (dual, best) = transport_cost_dual(c, &p, &q, &family)?;
    let mut out = String::new();
    let _ = writeln!(out, "primal {}", fmt_g12(primal));
    let _ = writeln!(out, "dual {}", fmt_g12(dual));
    let _ = writeln!(out, "gap {}", fmt_g12((primal - dual).abs()));
    let _ = writeln!(out, "scheme {best}");
    out.push_str("plan\n");
    for x in 0..plan.nx() {
        let row: Vec<String> = (0..plan.ny()).map(|y| fmt_g12(plan.get(x, y))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    Ok(out)
}

/// Every optimal pricing scheme with its equality set, then the count.
pub fn mccm_report(c: &CostFunction) -> Result<String, CliError> {
    let family = enumerate_mccm(c)?;
    let tol = c.equality_tol();
    let list = |v: &[f64]| v.iter().map(|&x| fmt_g12(x)).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    for (k, s) in family.schemes().iter().enumerate() {
        let edges: Vec<String> = s.equality_set(c, tol).edges().iter().map(|(x, y)| format!("({x},{y})")).collect();
        let _ = writeln!(out, "scheme {k}: phi [{}] psi [{}] equality {}", list(&s.phi), list(&s.psi), edges.join(" "));
    }
    let _ = writeln!(out, "count {}", family.len());
    if c.ordered_convex() {
        let _ = writeln!(out, "bound {}", binomial(c.nx() + c.ny() - 2, c.nx() - 1));
    }
    Ok(out)
}

/// Errors of `observables[0]` as an approximation of `observables[1]`,
/// measured with the cost of the reference (`costs[1]`, or `costs[0]` when
/// only one is given).
pub fn error_report(problem: &ProblemFile, measure: Option<ErrorMeasure>) -> Result<String, CliError> {
    let observables = problem.observables()?;
    let [aprime, a] = observables.as_slice() else {
        return Err(CliError::Validation(format!(
            "observables: the error command needs exactly two entries (approximation, reference), got {}",
            observables.len()
        )));
    };
    let c = problem.cost(problem.costs.len().min(2).saturating_sub(1), a)?;
    let measures = problem.measures(measure);
    let family = if measures.contains(&ErrorMeasure::Max) { Some(enumerate_mccm(&c)?) } else { None };
    let mut out = String::new();
    for m in measures {
        let v = m.evaluate(aprime, a, &c, family.as_ref())?;
        let _ = writeln!(out, "{m} {}", fmt_g12(v));
    }
    Ok(out)
}

/// Boundary points for each measure over the given weights, in weight order.
pub fn trace(instance: &ProblemInstance, measures: &[ErrorMeasure], weights: &[WeightVector], opts: &RunOptions) -> Result<Vec<RegionSample>, CliError> {
    measures
        .iter()
        .map(|&m| {
            let points = opts
                .exec
                .map(weights, |w| offset_point(instance, m, w, &opts.solve))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RegionSample { measure: m, points, caps: instance.caps(m)? })
        })
        .collect()
}

/// The `region` and `demo` computation: samples override the file's weights.
pub fn region(problem: &ProblemFile, measure: Option<ErrorMeasure>, samples: Option<usize>, opts: &RunOptions) -> Result<Vec<RegionSample>, CliError> {
    let measures = problem.measures(measure);
    let instance = problem.instance(measures.contains(&ErrorMeasure::Max))?;
    let weights = problem.weight_vectors(samples)?;
    trace(&instance, &measures, &weights, opts)
}

/// The `offset` computation: the file's explicit weights, or the uniform
/// vector when it has none.
pub fn offsets(problem: &ProblemFile, measure: Option<ErrorMeasure>, opts: &RunOptions) -> Result<Vec<RegionSample>, CliError> {
    let measures = problem.measures(measure);
    let instance = problem.instance(measures.contains(&ErrorMeasure::Max))?;
    let weights = match &problem.weights {
        Some(WeightsSpec::Samples { .. }) => {
            return Err(CliError::Validation("weights: the offset command needs explicit weight vectors".into()))
        }
        Some(_) => problem.weight_vectors(None)?,
        None => vec![WeightVector::uniform(instance.n())],
    };
    trace(&instance, &measures, &weights, opts)
}

/// Plain-text form of the program over joint measurements at the first
/// weight vector, one block per measure.
pub fn sdp_dump(problem: &ProblemFile, measure: Option<ErrorMeasure>) -> Result<String, CliError> {
    let measures = problem.measures(measure);
    let instance = problem.instance(measures.contains(&ErrorMeasure::Max))?;
    let w = match &problem.weights {
        Some(WeightsSpec::Single(_) | WeightsSpec::List(_)) => problem.weight_vectors(None)?.remove(0),
        _ => WeightVector::uniform(instance.n()),
    };
    let mut out = String::new();
    for m in measures {
        let _ = writeln!(out, "# measure {m}");
        out.push_str(&build_sdp(&instance, m, Formulation::Joint, &w)?.to_text());
    }
    Ok(out)
}

/// Fails when no point of any sample was solved to optimality.
pub fn check_any_optimal(samples: &[RegionSample]) -> Result<(), CliError> {
    let total: usize = samples.iter().map(|s| s.points.len()).sum();
    let ok = samples.iter().flat_map(|s| &s.points).any(|p| p.status == SolveStatus::Optimal);
    if total > 0 && !ok {
        return Err(CliError::AllFailed(total));
    }
    Ok(())
}
