//! Uncertainty regions: offsets `b_L(w) = inf{w·ε : ε ∈ U_L}` of the
//! supporting hyperplanes, computed as SDPs over joint measurements, and
//! boundary tracing over the weight simplex.
//!
//! Joint measurements `R(x_1, …, x_n)` range over tuples of outcomes of the
//! `n` observables. Observables with zero weight do not enter the optimized
//! constraints; their errors are recomputed from the optimal `R`.

use serde::{Deserialize, Serialize};

use crate::deviation::{err_cal, err_ent, err_max, ErrorMeasure};
use crate::error::{validation, Error, Result};
use crate::numerics::HermitianMatrix;
use crate::observables::{fourier_pair, spin1_triple, tuple_of, JointMeasurement, Observable};
use crate::parallel::Execution;
use crate::sdp::{hermitian_basis, solve, HermitianVar, LinearForm, SdpProblem, SdpSolution, Sense, SolveOptions, SolveStatus};
use crate::transport::{enumerate_mccm, CostFunction, SchemeFamily};

/// Below this the imaginary parts of all observables are treated as zero
/// and matrix variables stay real.
const REAL_TOL: f64 = 1e-14;

/// Projective observables on a common space with square costs, plus the
/// scheme families used by the maximal error.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    observables: Vec<Observable>,
    costs: Vec<CostFunction>,
    families: Option<Vec<SchemeFamily>>,
    complex: bool,
}

impl ProblemInstance {
    pub fn new(observables: Vec<Observable>, costs: Vec<CostFunction>) -> Result<Self> {
        if observables.is_empty() {
            return validation("at least one observable is required");
        }
        if observables.len() != costs.len() {
            return Err(Error::DimensionMismatch { expected: observables.len(), got: costs.len() });
        }
        let d = observables[0].dim();
        for (i, (a, c)) in observables.iter().zip(&costs).enumerate() {
            if a.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
            }
            if !a.is_projective() {
                return validation(format!("observable {i} is not a non-degenerate projective observable"));
            }
            if !c.is_square() || c.nx() != a.outcomes() {
                return validation(format!("cost {i} must be a square {}×{} matrix", a.outcomes(), a.outcomes()));
            }
        }
        let complex = observables.iter().flat_map(|a| a.elements()).flat_map(|e| e.data()).any(|z| z.im.abs() > REAL_TOL);
        Ok(Self { observables, costs, families: None, complex })
    }

    pub fn with_families(mut self, families: Vec<SchemeFamily>) -> Result<Self> {
        if families.len() != self.costs.len() {
            return Err(Error::DimensionMismatch { expected: self.costs.len(), got: families.len() });
        }
        for (i, (f, c)) in families.iter().zip(&self.costs).enumerate() {
            if f.cost() != c {
                return validation(format!("scheme family {i} belongs to a different cost function"));
            }
        }
        self.families = Some(families);
        Ok(self)
    }

    /// Attaches the optimal pricing schemes of every cost.
    pub fn with_enumerated_families(self) -> Result<Self> {
        let families = self.costs.iter().map(enumerate_mccm).collect::<Result<Vec<_>>>()?;
        self.with_families(families)
    }

    /// Spin-1 components `L1, L2, L3` with `c(x, y) = (x − y)²` on the
    /// eigenvalues `−1, 0, 1`.
    pub fn spin1() -> Result<Self> {
        let c = CostFunction::quadratic(&[-1.0, 0.0, 1.0])?;
        Self::new(spin1_triple().to_vec(), vec![c.clone(), c.clone(), c])?.with_enumerated_families()
    }

    /// Position and momentum on `Z_d` with the discrete metric.
    pub fn fourier(d: usize) -> Result<Self> {
        let (q, p) = fourier_pair(d)?;
        let c = CostFunction::discrete(d)?;
        Self::new(vec![q, p], vec![c.clone(), c])?.with_enumerated_families()
    }

    pub fn n(&self) -> usize {
        self.observables.len()
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn costs(&self) -> &[CostFunction] {
        &self.costs
    }

    pub fn families(&self) -> Option<&[SchemeFamily]> {
        self.families.as_deref()
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    /// Outcome counts of the joint measurement.
    pub fn shape(&self) -> Vec<usize> {
        self.observables.iter().map(Observable::outcomes).collect()
    }

    /// Per-observable maximal errors `c^L_i`.
    pub fn caps(&self, measure: ErrorMeasure) -> Result<Vec<f64>> {
        self.costs.iter().map(|c| measure.cap(c, self.dim())).collect()
    }

    /// Error tuple of the marginals of `r`.
    pub fn errors(&self, r: &JointMeasurement, measure: ErrorMeasure) -> Result<Vec<f64>> {
        let marginals = r.marginals()?;
        (0..self.n()).map(|i| self.error_of(&marginals[i], i, measure)).collect()
    }

    fn error_of(&self, aprime: &Observable, i: usize, measure: ErrorMeasure) -> Result<f64> {
        let (a, c) = (&self.observables[i], &self.costs[i]);
        match measure {
            ErrorMeasure::Max => err_max(aprime, a, c, &self.require_families()?[i]),
            ErrorMeasure::Calibration => err_cal(aprime, a, c),
            ErrorMeasure::Entangled => err_ent(aprime, a, c),
        }
    }

    fn require_families(&self) -> Result<&[SchemeFamily]> {
        self.families().ok_or_else(|| Error::Validation("the maximal error needs scheme families".into()))
    }

    fn check_weights(&self, w: &WeightVector) -> Result<()> {
        if w.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: w.len() });
        }
        Ok(())
    }

    /// `B_ξ = Σ_{i,y} w_i c_i(ξ_i, y) A_i(y)`.
    fn weighted_cost_operator(&self, w: &[f64], tuple: &[usize]) -> HermitianMatrix {
        let d = self.dim();
        let terms = self.observables.iter().enumerate().flat_map(|(i, a)| {
            let (c, wi, x) = (&self.costs[i], w[i], tuple[i]);
            a.elements().iter().enumerate().map(move |(y, e)| (wi * c.get(x, y), e))
        });
        HermitianMatrix::combination(d, terms)
    }
}

/// Nonnegative weights, not necessarily normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return validation("weights must be finite and nonnegative");
        }
        if w.iter().all(|v| *v == 0.0) {
            return validation("weights must not all vanish");
        }
        Ok(Self(w))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Self(w)
    }

    /// Rescaled to sum 1.
    pub fn normalized(&self) -> Self {
        let s: f64 = self.0.iter().sum();
        Self(self.0.iter().map(|v| v / s).collect())
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * t).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, eps: &[f64]) -> f64 {
        self.0.iter().zip(eps).map(|(w, e)| w * e).sum()
    }

    fn active(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }
}

/// A supporting hyperplane `w·ε ≥ b` and an error tuple on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub w: WeightVector,
    pub measure: ErrorMeasure,
    pub b: f64,
    pub epsilon: Vec<f64>,
    /// `|primal − dual|` of the solve that produced `b`.
    pub gap: f64,
    pub status: SolveStatus,
    /// Normalized optimal joint measurement.
    #[serde(skip)]
    pub joint: Option<JointMeasurement>,
}

/// Boundary points of one region together with its caps `c^L_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionSample {
    pub measure: ErrorMeasure,
    pub points: Vec<BoundaryPoint>,
    pub caps: Vec<f64>,
}

/// Which SDP of a measure to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// The program over joint measurements.
    Joint,
    /// Its dual, over operator multipliers.
    Multiplier,
}

/// Variables of an SDP over joint measurements.
struct JointVars {
    r: Vec<HermitianVar>,
}

fn tuples(instance: &ProblemInstance) -> Vec<Vec<usize>> {
    let shape = instance.shape();
    let count: usize = shape.iter().product();
    (0..count).map(|k| tuple_of(&shape, k)).collect()
}

/// `Σ_ξ R_ξ = I`, coordinate-wise.
fn add_normalization(p: &mut SdpProblem, vars: &JointVars, basis: &[HermitianMatrix]) {
    for e in basis {
        let mut f = LinearForm::new();
        for r in &vars.r {
            r.add_trace(&mut f, e, 1.0);
        }
        p.add_constraint(f, e.trace());
    }
}

fn add_joint(p: &mut SdpProblem, instance: &ProblemInstance, count: usize) -> JointVars {
    JointVars { r: (0..count).map(|_| p.add_hermitian(instance.dim(), instance.complex)).collect() }
}

/// `Σ_y Ψ(y) A(y)`.
fn psi_operator(a: &Observable, psi: &[f64]) -> HermitianMatrix {
    HermitianMatrix::combination(a.dim(), psi.iter().copied().zip(a.elements()))
}

fn basis(instance: &ProblemInstance) -> Vec<HermitianMatrix> {
    hermitian_basis(instance.dim(), instance.complex)
}

/// `inf Σ w_i μ_i` subject to `Σ_ξ Φ_α(ξ_i) R_ξ − Σ_y Ψ_α(y) A_i(y) ⪯ μ_i I`
/// for every `i` and `α ∈ S_i`, `R_ξ ⪰ 0`, `Σ R_ξ = I`.
///
/// Free variables: `μ_i` of the weighted observables, in order. Blocks:
/// the `R_ξ` first, tuples in row-major order.
pub fn build_sdp_m(instance: &ProblemInstance, w: &WeightVector) -> Result<SdpProblem> {
    instance.check_weights(w)?;
    let families = instance.require_families()?;
    let ts = tuples(instance);
    let basis = basis(instance);
    let d = instance.dim();
    let mut p = SdpProblem::new(Sense::Minimize);
    let vars = add_joint(&mut p, instance, ts.len());
    for i in w.active() {
        let mu = p.add_free();
        p.objective_mut().add_free(mu, w.as_slice()[i]);
        for s in families[i].schemes() {
            let slack = p.add_hermitian(d, instance.complex);
            let rhs = psi_operator(&instance.observables[i], &s.psi);
            // S + Σ Φ(ξ_i) R_ξ − μ I = Σ Ψ A
            for e in &basis {
                let mut f = LinearForm::new();
                slack.add_trace(&mut f, e, 1.0);
                for (r, t) in vars.r.iter().zip(&ts) {
                    r.add_trace(&mut f, e, s.phi[t[i]]);
                }
                f.add_free(mu, -e.trace());
                p.add_constraint(f, e.trace_product(&rhs));
            }
        }
    }
    add_normalization(&mut p, &vars, &basis);
    Ok(p)
}

/// `sup tr C − Σ_{i,α} tr(D_{i,α} Σ_y Ψ_α(y) A_i(y))` subject to
/// `C ⪯ Σ_{i,α} Φ_α(ξ_i) D_{i,α}` for every tuple, `D ⪰ 0`,
/// `Σ_α tr D_{i,α} = w_i`.
pub fn build_sdp_m_dual(instance: &ProblemInstance, w: &WeightVector) -> Result<SdpProblem> {
    instance.check_weights(w)?;
    let families = instance.require_families()?;
    let ts = tuples(instance);
    let basis = basis(instance);
    let d = instance.dim();
    let mut p = SdpProblem::new(Sense::Maximize);
    let c: Vec<usize> = basis.iter().map(|_| p.add_free()).collect();
    for (q, e) in basis.iter().enumerate() {
        p.objective_mut().add_free(c[q], e.trace());
    }
    // (observable, scheme index, variable)
    let mut ds: Vec<(usize, usize, HermitianVar)> = Vec::new();
    for i in w.active() {
        let mut trace = LinearForm::new();
        for (a, s) in families[i].schemes().iter().enumerate() {
            let dv = p.add_hermitian(d, instance.complex);
            dv.add_trace(p.objective_mut(), &psi_operator(&instance.observables[i], &s.psi), -1.0);
            dv.add_trace(&mut trace, &HermitianMatrix::identity(d), 1.0);
            ds.push((i, a, dv));
        }
        p.add_constraint(trace, w.as_slice()[i]);
    }
    // T_ξ − Σ Φ(ξ_i) D + C = 0
    for t in &ts {
        let slack = p.add_hermitian(d, instance.complex);
        for (q, e) in basis.iter().enumerate() {
            let mut f = LinearForm::new();
            slack.add_trace(&mut f, e, 1.0);
            for &(i, a, dv) in &ds {
                dv.add_trace(&mut f, e, -families[i].schemes()[a].phi[t[i]]);
            }
            f.add_free(c[q], 1.0);
            p.add_constraint(f, 0.0);
        }
    }
    Ok(p)
}

/// `sup tr Y` subject to `Y ⪯ Σ_{i,y} w_i λ_{i,y} c_i(ξ_i, y) A_i(y)` for
/// every tuple, `λ ≥ 0`, `Σ_y λ_{i,y} = 1`.
pub fn build_sdp_c(instance: &ProblemInstance, w: &WeightVector) -> Result<SdpProblem> {
    instance.check_weights(w)?;
    let ts = tuples(instance);
    let basis = basis(instance);
    let d = instance.dim();
    let mut p = SdpProblem::new(Sense::Maximize);
    let y: Vec<usize> = basis.iter().map(|_| p.add_free()).collect();
    for (q, e) in basis.iter().enumerate() {
        p.objective_mut().add_free(y[q], e.trace());
    }
    let mut lambdas: Vec<(usize, usize, usize)> = Vec::new();
    for i in w.active() {
        let mut sum = LinearForm::new();
        for yy in 0..instance.observables[i].outcomes() {
            let l = p.add_nonnegative();
            sum.add(l, 0, 0, 1.0);
            lambdas.push((i, yy, l));
        }
        p.add_constraint(sum, 1.0);
    }
    // S_ξ − Σ w λ c A + Y = 0
    for t in &ts {
        let slack = p.add_hermitian(d, instance.complex);
        for (q, e) in basis.iter().enumerate() {
            let mut f = LinearForm::new();
            slack.add_trace(&mut f, e, 1.0);
            for &(i, yy, l) in &lambdas {
                let a = instance.observables[i].element(yy);
                f.add(l, 0, 0, -w.as_slice()[i] * instance.costs[i].get(t[i], yy) * e.trace_product(a));
            }
            f.add_free(y[q], 1.0);
            p.add_constraint(f, 0.0);
        }
    }
    Ok(p)
}

/// `inf Σ w_i m_i` subject to `m_i ≥ Σ_ξ tr(R_ξ A_i(y)) c_i(ξ_i, y)` for
/// every `i, y`, `R_ξ ⪰ 0`, `Σ R_ξ = I`.
///
/// Free variables: `m_i` of the weighted observables, in order.
pub fn build_sdp_c_dual(instance: &ProblemInstance, w: &WeightVector) -> Result<SdpProblem> {
    instance.check_weights(w)?;
    let ts = tuples(instance);
    let basis = basis(instance);
    let mut p = SdpProblem::new(Sense::Minimize);
    let vars = add_joint(&mut p, instance, ts.len());
    for i in w.active() {
        let m = p.add_free();
        p.objective_mut().add_free(m, w.as_slice()[i]);
        let (a, c) = (&instance.observables[i], &instance.costs[i]);
        for yy in 0..a.outcomes() {
            // m − Σ tr(R A(y)) c − t = 0
            let slack = p.add_nonnegative();
            let mut f = LinearForm::new();
            f.add_free(m, 1.0);
            f.add(slack, 0, 0, -1.0);
            for (r, t) in vars.r.iter().zip(&ts) {
                r.add_trace(&mut f, a.element(yy), -c.get(t[i], yy));
            }
            p.add_constraint(f, 0.0);
        }
    }
    add_normalization(&mut p, &vars, &basis);
    Ok(p)
}

/// `sup tr(Y) / d` subject to `Y ⪯ Σ_{i,y} w_i c_i(ξ_i, y) A_i(y)` for every tuple.
pub fn build_sdp_e(instance: &ProblemInstance, w: &WeightVector) -> Result<SdpProblem> {
    instance.check_weights(w)?;
    let ts = tuples(instance);
    let basis = basis(instance);
    let d = instance.dim();
    let mut p = SdpProblem::new(Sense::Maximize);
    let y: Vec<usize> = basis.iter().map(|_| p.add_free()).collect();
    for (q, e) in basis.iter().enumerate() {
        p.objective_mut().add_free(y[q], e.trace() / d as f64);
    }
    for t in &ts {
        let slack = p.add_hermitian(d, instance.complex);
        let b = instance.weighted_cost_operator(w.as_slice(), t);
        for (q, e) in basis.iter().enumerate() {
            let mut f = LinearForm::new();
            slack.add_trace(&mut f, e, 1.0);
            f.add_free(y[q], 1.0);
            p.add_constraint(f, e.trace_product(&b));
        }
    }
    Ok(p)
}

/// `inf Σ_ξ tr(R_ξ Σ_{i,y} w_i c_i(ξ_i, y) A_i(y)) / d` over joint measurements.
pub fn build_sdp_e_dual(instance: &ProblemInstance, w: &WeightVector) -> Result<SdpProblem> {
    instance.check_weights(w)?;
    let ts = tuples(instance);
    let basis = basis(instance);
    let d = instance.dim() as f64;
    let mut p = SdpProblem::new(Sense::Minimize);
    let vars = add_joint(&mut p, instance, ts.len());
    for (r, t) in vars.r.iter().zip(&ts) {
        r.add_trace(p.objective_mut(), &instance.weighted_cost_operator(w.as_slice(), t), 1.0 / d);
    }
    add_normalization(&mut p, &vars, &basis);
    Ok(p)
}

/// Builds one of the six programs.
pub fn build_sdp(instance: &ProblemInstance, measure: ErrorMeasure, form: Formulation, w: &WeightVector) -> Result<SdpProblem> {
    match (measure, form) {
        (ErrorMeasure::Max, Formulation::Joint) => build_sdp_m(instance, w),
        (ErrorMeasure::Max, Formulation::Multiplier) => build_sdp_m_dual(instance, w),
        (ErrorMeasure::Calibration, Formulation::Joint) => build_sdp_c_dual(instance, w),
        (ErrorMeasure::Calibration, Formulation::Multiplier) => build_sdp_c(instance, w),
        (ErrorMeasure::Entangled, Formulation::Joint) => build_sdp_e_dual(instance, w),
        (ErrorMeasure::Entangled, Formulation::Multiplier) => build_sdp_e(instance, w),
    }
}

/// Reads the joint measurement out of a solution of a program built over
/// joint measurements (its first `Π d_i` blocks).
fn extract_joint(instance: &ProblemInstance, sol: &SdpSolution) -> Result<JointMeasurement> {
    let shape = instance.shape();
    let count: usize = shape.iter().product();
    let d = instance.dim();
    let blocks = (0..count)
        .map(|k| HermitianVar { block: k, dim: d, complex: instance.complex }.extract(&sol.blocks[k]))
        .collect();
    JointMeasurement::from_unnormalized(d, shape, blocks)
}

fn solve_offset(
    instance: &ProblemInstance,
    measure: ErrorMeasure,
    w: &WeightVector,
    opts: &SolveOptions,
) -> Result<(BoundaryPoint, SdpSolution)> {
    let problem = build_sdp(instance, measure, Formulation::Joint, w)?;
    let sol = solve(&problem, opts)?;
    let joint = extract_joint(instance, &sol).ok();
    let mut epsilon = vec![f64::NAN; instance.n()];
    if let Some(r) = &joint {
        let marginals = r.marginals()?;
        let active = w.active();
        for i in 0..instance.n() {
            epsilon[i] = match (measure, active.iter().position(|&a| a == i)) {
                // the free variables are μ_i resp. m_i of the weighted observables
                (ErrorMeasure::Max | ErrorMeasure::Calibration, Some(k)) => sol.free[k],
                _ => instance.error_of(&marginals[i], i, measure)?,
            };
        }
    }
    let point = BoundaryPoint { w: w.clone(), measure, b: sol.value(), epsilon, gap: sol.residuals.gap, status: sol.status, joint };
    Ok((point, sol))
}

/// Solves for `b_L(w)` and an error tuple on the supporting hyperplane,
/// reporting non-optimal solves through the status instead of an error.
pub fn offset_point(instance: &ProblemInstance, measure: ErrorMeasure, w: &WeightVector, opts: &SolveOptions) -> Result<BoundaryPoint> {
    solve_offset(instance, measure, w, opts).map(|(p, _)| p)
}

/// [`offset_point`] with the default solver options; non-optimal solves are errors.
pub fn offset(instance: &ProblemInstance, measure: ErrorMeasure, w: &WeightVector) -> Result<BoundaryPoint> {
    let (point, sol) = solve_offset(instance, measure, w, &SolveOptions::default())?;
    if sol.status != SolveStatus::Optimal || point.joint.is_none() {
        return Err(Error::Solver {
            status: sol.status,
            primal_feas: sol.residuals.primal_feas,
            dual_feas: sol.residuals.dual_feas,
            gap: sol.residuals.gap,
        });
    }
    Ok(point)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingScheme {
    /// Angular grid for two observables, Fibonacci lattice for three or more.
    Auto,
    Angular,
    Fibonacci,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub count: usize,
    pub scheme: SamplingScheme,
}

impl Sampling {
    /// 41 directions for two observables, 200 otherwise.
    pub fn default_for(n: usize) -> Self {
        Self { count: if n == 2 { 41 } else { 200 }, scheme: SamplingScheme::Auto }
    }
}

/// Weight vectors on the simplex.
///
/// Two observables: angles `θ_k = (π/2)·k/(count − 1)` with
/// `w ∝ (cos θ, sin θ)`, endpoints exact. More observables: a golden-ratio
/// lattice pushed onto the simplex. A single sample is the uniform vector.
pub fn sample_weights(n: usize, sampling: Sampling) -> Result<Vec<WeightVector>> {
    if sampling.count == 0 || n == 0 {
        return validation("sampling needs at least one point and one observable");
    }
    if n == 1 {
        return Ok(vec![WeightVector::unit(1, 0); sampling.count]);
    }
    if sampling.count == 1 {
        return Ok(vec![WeightVector::uniform(n)]);
    }
    let scheme = match sampling.scheme {
        SamplingScheme::Auto if n == 2 => SamplingScheme::Angular,
        SamplingScheme::Auto => SamplingScheme::Fibonacci,
        s => s,
    };
    let count = sampling.count;
    match scheme {
        SamplingScheme::Angular => {
            if n != 2 {
                return validation("angular sampling needs exactly two observables");
            }
            Ok((0..count)
                .map(|k| {
                    let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (count - 1) as f64;
                    let w = if k == 0 {
                        vec![1.0, 0.0]
                    } else if k == count - 1 {
                        vec![0.0, 1.0]
                    } else {
                        let (s, c) = theta.sin_cos();
                        vec![c / (c + s), s / (c + s)]
                    };
                    WeightVector(w)
                })
                .collect())
        }
        _ => {
            // Kronecker lattice in the unit cube, then sorted spacings onto the simplex
            let golden = generalized_golden(n - 1);
            Ok((0..count)
                .map(|k| {
                    let mut u: Vec<f64> = (0..n - 1)
                        .map(|j| if j == 0 { (k as f64 + 0.5) / count as f64 } else { (0.5 + k as f64 * golden[j - 1]).fract() })
                        .collect();
                    if n == 3 {
                        // triangle: (1 − √u, √u (1 − v), √u v)
                        let (a, b) = (u[0].sqrt(), u[1]);
                        return WeightVector(vec![1.0 - a, a * (1.0 - b), a * b]);
                    }
                    u.sort_by(f64::total_cmp);
                    let mut w = Vec::with_capacity(n);
                    let mut prev = 0.0;
                    for v in u {
                        w.push(v - prev);
                        prev = v;
                    }
                    w.push(1.0 - prev);
                    WeightVector(w)
                })
                .collect())
        }
    }
}

/// `1/φ_k^j` for the positive root of `x^{k+1} = x + 1`, `j = 1..k`.
fn generalized_golden(k: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (k as f64 + 1.0));
    }
    (1..k.max(2)).map(|j| phi.powi(-(j as i32))).collect()
}

/// Boundary points of `U_L` over sampled weights, in sample order. Failed
/// solves stay in the list with their status.
pub fn trace_boundary(instance: &ProblemInstance, measure: ErrorMeasure, sampling: Sampling, exec: Execution) -> Result<RegionSample> {
    trace_boundary_with(instance, measure, sampling, exec, &SolveOptions::default())
}

pub fn trace_boundary_with(
    instance: &ProblemInstance,
    measure: ErrorMeasure,
    sampling: Sampling,
    exec: Execution,
    opts: &SolveOptions,
) -> Result<RegionSample> {
    if measure == ErrorMeasure::Max {
        instance.require_families()?;
    }
    let weights = sample_weights(instance.n(), sampling)?;
    let points = exec.map(&weights, |w| offset_point(instance, measure, w, opts)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RegionSample { measure, points, caps: instance.caps(measure)? })
}
