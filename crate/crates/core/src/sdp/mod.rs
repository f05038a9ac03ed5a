//! Small dense semidefinite programs with several PSD blocks and free scalars.
//!
//! A problem reads
//!
//! ```text
//! minimize / maximize  ⟨C, X⟩ + cᵀs
//! subject to           ⟨A_k, X⟩ + f_kᵀ s = b_k   (k = 1..m)
//!                      X = diag(X_1, …, X_p) ⪰ 0,  s free
//! ```
//!
//! with real symmetric blocks `X_j`. Complex Hermitian matrix variables are
//! stored through their real embedding `[[Re, −Im], [Im, Re]]`, on which
//! every trace doubles; [`HermitianVar`] hides the factor.
//!
//! Dual (for minimization): maximize `bᵀy` subject to
//! `Z = C − Σ y_k A_k ⪰ 0` and `Σ y_k f_k = c`.

mod ipm;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::numerics::{eig_symmetric, HermitianMatrix, C64};

pub use ipm::solve;

/// Default tolerance on relative gap and feasibility residuals.
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Coefficient of a symmetric matrix: `value` sits at `(row, col)` and at
/// `(col, row)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Linear functional on `(X, s)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub entries: Vec<Entry>,
    pub free: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` and its mirror; stored with `row ≤ col`.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        if value != 0.0 {
            let (row, col) = if row <= col { (row, col) } else { (col, row) };
            self.entries.push(Entry { block, row, col, value });
        }
    }

    pub fn add_free(&mut self, index: usize, value: f64) {
        if value != 0.0 {
            self.free.push((index, value));
        }
    }

    /// `⟨A, X⟩ + fᵀs` for row-major blocks.
    pub fn eval(&self, dims: &[usize], blocks: &[Vec<f64>], free: &[f64]) -> f64 {
        let mut acc = 0.0;
        for e in &self.entries {
            let n = dims[e.block];
            let x = blocks[e.block][e.row * n + e.col];
            acc += if e.row == e.col { e.value * x } else { 2.0 * e.value * x };
        }
        acc + self.free.iter().map(|&(j, v)| v * free[j]).sum::<f64>()
    }

    /// Adds `scale · A` to the dense blocks.
    fn accumulate_into(&self, dims: &[usize], blocks: &mut [Vec<f64>], scale: f64) {
        for e in &self.entries {
            let n = dims[e.block];
            blocks[e.block][e.row * n + e.col] += scale * e.value;
            if e.row != e.col {
                blocks[e.block][e.col * n + e.row] += scale * e.value;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub form: LinearForm,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    sense: Sense,
    blocks: Vec<usize>,
    free_vars: usize,
    objective: LinearForm,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self { sense, blocks: Vec::new(), free_vars: 0, objective: LinearForm::new(), constraints: Vec::new() }
    }

    /// New real symmetric PSD block of size `dim`; returns its index.
    pub fn add_block(&mut self, dim: usize) -> usize {
        self.blocks.push(dim);
        self.blocks.len() - 1
    }

    /// New Hermitian PSD matrix variable, embedded when `complex`.
    pub fn add_hermitian(&mut self, dim: usize, complex: bool) -> HermitianVar {
        let block = self.add_block(if complex { 2 * dim } else { dim });
        HermitianVar { block, dim, complex }
    }

    /// New nonnegative scalar, as a 1×1 block.
    pub fn add_nonnegative(&mut self) -> usize {
        self.add_block(1)
    }

    pub fn add_free(&mut self) -> usize {
        self.free_vars += 1;
        self.free_vars - 1
    }

    pub fn add_constraint(&mut self, form: LinearForm, rhs: f64) {
        self.constraints.push(Constraint { form, rhs });
    }

    pub fn objective_mut(&mut self) -> &mut LinearForm {
        &mut self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn free_vars(&self) -> usize {
        self.free_vars
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.iter().any(|&n| n == 0) {
            return validation("empty PSD block");
        }
        let check = |form: &LinearForm, what: &str| -> Result<()> {
            for e in &form.entries {
                if e.block >= self.blocks.len() || e.col >= self.blocks[e.block] || !e.value.is_finite() {
                    return validation(format!("{what}: entry {e:?} out of range"));
                }
            }
            for &(j, v) in &form.free {
                if j >= self.free_vars || !v.is_finite() {
                    return validation(format!("{what}: free variable {j} out of range"));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.form, &format!("constraint {k}"))?;
            if !c.rhs.is_finite() {
                return validation(format!("constraint {k}: non-finite right-hand side"));
            }
        }
        Ok(())
    }

    /// Objective value in the caller's sense.
    pub fn objective_value(&self, blocks: &[Vec<f64>], free: &[f64]) -> f64 {
        self.objective.eval(&self.blocks, blocks, free)
    }

    /// Plain-text dump, one line per constraint:
    ///
    /// ```text
    /// sdp <min|max> blocks <n_1> … <n_p> free <count> constraints <m>
    /// objective <block> <row> <col> <coef> ; … | <free index> <coef> ; …
    /// <k> rhs <b_k> <block> <row> <col> <coef> ; … | <free index> <coef> ; …
    /// ```
    ///
    /// Entries are upper-triangular coefficients of symmetric matrices.
    pub fn to_text(&self) -> String {
        fn form_text(out: &mut String, f: &LinearForm) {
            let mats: Vec<String> = f.entries.iter().map(|e| format!("{} {} {} {:e}", e.block, e.row, e.col, e.value)).collect();
            let free: Vec<String> = f.free.iter().map(|(j, v)| format!("{j} {v:e}")).collect();
            let _ = write!(out, " {} | {}", mats.join(" ; "), free.join(" ; "));
        }
        let mut out = String::new();
        let sense = if self.sense == Sense::Minimize { "min" } else { "max" };
        let dims: Vec<String> = self.blocks.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "sdp {sense} blocks {} free {} constraints {}", dims.join(" "), self.free_vars, self.constraints.len());
        out.push_str("objective");
        form_text(&mut out, &self.objective);
        out.push('\n');
        for (k, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, "{k} rhs {:e}", c.rhs);
            form_text(&mut out, &c.form);
            out.push('\n');
        }
        out
    }
}

/// Hermitian `dim × dim` variable living in one PSD block. With `complex`
/// the block holds the `2·dim` real embedding; otherwise the variable is
/// real symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermitianVar {
    pub block: usize,
    pub dim: usize,
    pub complex: bool,
}

impl HermitianVar {
    /// Adds to `form` the functional `R ↦ scale · tr(h R)`. For a real
    /// variable only `Re h` contributes.
    pub fn add_trace(&self, form: &mut LinearForm, h: &HermitianMatrix, scale: f64) {
        let d = self.dim;
        for j in 0..d {
            for k in j..d {
                let z = h.get(j, k);
                if self.complex {
                    // ⟨emb h, emb R⟩ = 2 tr(h R)
                    let s = 0.5 * scale;
                    form.add(self.block, j, k, s * z.re);
                    form.add(self.block, j + d, k + d, s * z.re);
                    if j != k {
                        form.add(self.block, k, j + d, s * z.im);
                        form.add(self.block, j, k + d, -s * z.im);
                    }
                } else {
                    form.add(self.block, j, k, scale * z.re);
                }
            }
        }
    }

    /// Block contents for a given Hermitian matrix.
    pub fn embed(&self, r: &HermitianMatrix) -> Vec<f64> {
        let d = self.dim;
        if !self.complex {
            return r.data().iter().map(|z| z.re).collect();
        }
        let n = 2 * d;
        let mut x = vec![0.0; n * n];
        for j in 0..d {
            for k in 0..d {
                let z = r.get(j, k);
                x[j * n + k] = z.re;
                x[(j + d) * n + k + d] = z.re;
                x[(j + d) * n + k] = z.im;
                x[j * n + k + d] = -z.im;
            }
        }
        x
    }

    /// Hermitian matrix read off a block, averaging the two embedded copies.
    pub fn extract(&self, x: &[f64]) -> HermitianMatrix {
        let d = self.dim;
        if !self.complex {
            return HermitianMatrix::from_upper(d, |j, k| C64::new(0.5 * (x[j * d + k] + x[k * d + j]), 0.0));
        }
        let n = 2 * d;
        HermitianMatrix::from_upper(d, |j, k| {
            let re = 0.25 * (x[j * n + k] + x[k * n + j] + x[(j + d) * n + k + d] + x[(k + d) * n + j + d]);
            let im = 0.25 * (x[(j + d) * n + k] - x[(k + d) * n + j] - x[j * n + k + d] + x[k * n + j + d]);
            C64::new(re, im)
        })
    }
}

/// Orthonormal basis of the Hermitian `d × d` matrices under `tr(AB)`;
/// without `complex` only the real symmetric part.
pub fn hermitian_basis(d: usize, complex: bool) -> Vec<HermitianMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(HermitianMatrix::from_upper(d, |a, b| if a == j && b == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }));
    }
    for j in 0..d {
        for k in j + 1..d {
            out.push(HermitianMatrix::from_upper(d, |a, b| if a == j && b == k { C64::new(r, 0.0) } else { C64::new(0.0, 0.0) }));
            if complex {
                out.push(HermitianMatrix::from_upper(d, |a, b| if a == j && b == k { C64::new(0.0, r) } else { C64::new(0.0, 0.0) }));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        })
    }
}

/// Feasibility and gap measures, relative to the data scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max(‖b − A(X) − Fs‖_∞ / (1 + ‖b‖_∞), −λ_min(X))`.
    pub primal_feas: f64,
    /// `max(‖c − Fᵀy‖_∞ / (1 + ‖c‖_∞), −λ_min(Z) / (1 + ‖C‖_∞))` with `Z` recomputed from `y`.
    pub dual_feas: f64,
    /// `|objective_primal − objective_dual|`.
    pub gap: f64,
    /// `gap / (1 + |objective_primal| + |objective_dual|)`.
    pub relative_gap: f64,
}

impl Residuals {
    pub fn within(&self, tol: f64) -> bool {
        self.primal_feas <= tol && self.dual_feas <= tol && self.relative_gap <= tol
    }
}

/// Primal blocks and free scalars, dual multipliers and slack, objectives in
/// the caller's sense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub blocks: Vec<Vec<f64>>,
    pub free: Vec<f64>,
    pub duals: Vec<f64>,
    pub dual_slack: Vec<Vec<f64>>,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SdpSolution {
    /// Midpoint of the primal and dual objectives.
    pub fn value(&self) -> f64 {
        0.5 * (self.objective_primal + self.objective_dual)
    }
}

fn min_eigenvalue(a: &[f64], n: usize) -> f64 {
    if n == 1 {
        return a[0];
    }
    eig_symmetric(a, n).0[0]
}

/// Recomputes objectives and residuals from the problem data and the
/// reported `(X, s, y)`; `Z` is rebuilt from `y` rather than read back.
pub fn residuals(problem: &SdpProblem, solution: &SdpSolution) -> Residuals {
    let dims = problem.blocks();
    let sign = if problem.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let b_norm = problem.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let mut primal = 0.0f64;
    for c in &problem.constraints {
        let r = c.rhs - c.form.eval(dims, &solution.blocks, &solution.free);
        primal = primal.max(r.abs());
    }
    primal /= 1.0 + b_norm;
    for (j, &n) in dims.iter().enumerate() {
        primal = primal.max(-min_eigenvalue(&solution.blocks[j], n));
    }

    // Z = sign·(C − Σ y_k A_k)
    let mut z: Vec<Vec<f64>> = dims.iter().map(|&n| vec![0.0; n * n]).collect();
    problem.objective.accumulate_into(dims, &mut z, 1.0);
    let c_norm = z.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut free_res = vec![0.0; problem.free_vars];
    for &(j, v) in &problem.objective.free {
        free_res[j] += v;
    }
    let cf_norm = free_res.iter().map(|v: &f64| v.abs()).fold(0.0, f64::max);
    for (k, c) in problem.constraints.iter().enumerate() {
        c.form.accumulate_into(dims, &mut z, -solution.duals[k]);
        for &(j, v) in &c.form.free {
            free_res[j] -= solution.duals[k] * v;
        }
    }
    let mut dual = free_res.iter().map(|v| v.abs()).fold(0.0, f64::max) / (1.0 + cf_norm);
    for (j, &n) in dims.iter().enumerate() {
        let zb: Vec<f64> = z[j].iter().map(|v| sign * v).collect();
        dual = dual.max(-min_eigenvalue(&zb, n) / (1.0 + c_norm));
    }

    let p = problem.objective_value(&solution.blocks, &solution.free);
    let d: f64 = problem.constraints.iter().zip(&solution.duals).map(|(c, y)| c.rhs * y).sum();
    let gap = (p - d).abs();
    Residuals { primal_feas: primal, dual_feas: dual, gap, relative_gap: gap / (1.0 + p.abs() + d.abs()) }
}
