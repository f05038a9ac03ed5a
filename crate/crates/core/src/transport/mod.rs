//! Finite optimal transport.
//!
//! A cost function `c(x, y)` on finite sets `X × Y` defines the transport
//! cost `ĉ(p, q)`, the minimum of `Σ c γ` over couplings `γ` of `p` and `q`.
//! Its dual is the supremum of `Σ Φ p − Σ Ψ q` over pricing schemes,
//! `Φ(x) − Ψ(y) ≤ c(x, y)`. The optimal schemes are the vertices of the
//! scheme polyhedron, one per maximally cyclically c-monotone (mccm) set, so
//! the cost of any pair of distributions is a maximum over a finite family
//! that depends on `c` alone.
//!
//! Pricing schemes are normalized by `Φ(0) = 0`.

mod ccm;
mod enumerate;
mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

pub use ccm::{is_ccm, negative_cycle, pricing_from_ccm, PricingBounds};
pub use enumerate::{binomial, enumerate_mccm, enumerate_mccm_growth, enumerate_mccm_ordered, enumerate_mccm_with_bound, DEFAULT_ENUMERATION_BOUND};
pub use simplex::{transport_cost_primal, transport_solve, TransportSolution};

/// Tolerance for the normalization of a [`Distribution`].
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Absolute slack (scaled by `1 + max |c|`) below which a pricing inequality
/// counts as an equality.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Cost matrix `c(x, y)` with structural flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostFunction {
    nx: usize,
    ny: usize,
    cost: Vec<f64>,
    values_x: Option<Vec<f64>>,
    values_y: Option<Vec<f64>>,
    is_square: bool,
    is_metric: bool,
    is_discrete_metric: bool,
    ordered_convex: bool,
}

impl CostFunction {
    /// Cost from matrix rows. A square matrix is read as a cost on a single
    /// outcome set and must vanish exactly on the diagonal and be positive
    /// off it; use [`CostFunction::rectangular`] to drop that requirement.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut c = Self::rectangular(rows)?;
        if c.nx == c.ny {
            for x in 0..c.nx {
                for y in 0..c.ny {
                    let v = c.get(x, y);
                    if x == y && v != 0.0 {
                        return validation(format!("square cost must vanish on the diagonal, c({x},{x}) = {v}"));
                    }
                    if x != y && !(v > 0.0) {
                        return validation(format!("square cost must be positive off the diagonal, c({x},{y}) = {v}"));
                    }
                }
            }
            c.is_square = true;
            c.is_metric = c.check_metric();
            c.is_discrete_metric = c.cost.iter().enumerate().all(|(k, &v)| if k / c.ny == k % c.ny { v == 0.0 } else { v == 1.0 });
        }
        Ok(c)
    }

    /// Cost on two unrelated outcome sets; no square-case invariants.
    pub fn rectangular(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nx = rows.len();
        if nx == 0 {
            return validation("cost matrix has no rows");
        }
        let ny = rows[0].len();
        if ny == 0 {
            return validation("cost matrix has no columns");
        }
        let mut cost = Vec::with_capacity(nx * ny);
        for (x, r) in rows.into_iter().enumerate() {
            if r.len() != ny {
                return validation(format!("cost row {x} has {} entries, expected {ny}", r.len()));
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return validation(format!("cost row {x} has non-finite entry {v}"));
            }
            cost.extend(r);
        }
        Ok(Self {
            nx,
            ny,
            cost,
            values_x: None,
            values_y: None,
            is_square: false,
            is_metric: false,
            is_discrete_metric: false,
            ordered_convex: false,
        })
    }

    /// Discrete metric `c(x, y) = 1 − δ_{xy}` on `d` outcomes.
    pub fn discrete(d: usize) -> Result<Self> {
        if d == 0 {
            return validation("discrete metric needs at least one outcome");
        }
        Self::new((0..d).map(|x| (0..d).map(|y| if x == y { 0.0 } else { 1.0 }).collect()).collect())
    }

    /// `c(x, y) = (v_x − v_y)²` on the outcome values `v`.
    pub fn quadratic(values: &[f64]) -> Result<Self> {
        Self::convex_difference(values, |t| t * t)
    }

    /// `c(x, y) = h(v_x − v_y)` for a convex `h` with `h(0) = 0` and `h > 0`
    /// elsewhere. The ordered-convex flag is set when the values are strictly
    /// increasing and the Monge inequality holds on the resulting matrix.
    pub fn convex_difference(values: &[f64], h: impl Fn(f64) -> f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return validation("outcome values must be finite");
        }
        for (i, a) in values.iter().enumerate() {
            if values[..i].contains(a) {
                return validation(format!("outcome value {a} occurs twice"));
            }
        }
        let rows = values.iter().map(|&a| values.iter().map(|&b| h(a - b)).collect()).collect();
        let mut c = Self::new(rows)?;
        c.values_x = Some(values.to_vec());
        c.values_y = Some(values.to_vec());
        let sorted = values.windows(2).all(|w| w[0] < w[1]);
        c.ordered_convex = sorted && c.is_monge();
        Ok(c)
    }

    /// Attaches physical outcome labels.
    pub fn with_outcome_values(mut self, values_x: Vec<f64>, values_y: Vec<f64>) -> Result<Self> {
        if values_x.len() != self.nx {
            return Err(Error::DimensionMismatch { expected: self.nx, got: values_x.len() });
        }
        if values_y.len() != self.ny {
            return Err(Error::DimensionMismatch { expected: self.ny, got: values_y.len() });
        }
        self.values_x = Some(values_x);
        self.values_y = Some(values_y);
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cost[x * self.ny + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.cost[x * self.ny..(x + 1) * self.ny]
    }

    pub fn values_x(&self) -> Option<&[f64]> {
        self.values_x.as_deref()
    }

    pub fn values_y(&self) -> Option<&[f64]> {
        self.values_y.as_deref()
    }

    pub fn is_square(&self) -> bool {
        self.is_square
    }

    pub fn is_metric(&self) -> bool {
        self.is_metric
    }

    pub fn is_discrete_metric(&self) -> bool {
        self.is_discrete_metric
    }

    pub fn ordered_convex(&self) -> bool {
        self.ordered_convex
    }

    pub fn max_abs(&self) -> f64 {
        self.cost.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Slack tolerance used when reading off equality sets.
    pub fn equality_tol(&self) -> f64 {
        EQUALITY_TOL * (1.0 + self.max_abs())
    }

    fn check_metric(&self) -> bool {
        let n = self.nx;
        let tol = 1e-12 * (1.0 + self.max_abs());
        for x in 0..n {
            for y in 0..n {
                if (self.get(x, y) - self.get(y, x)).abs() > tol {
                    return false;
                }
                for z in 0..n {
                    if self.get(x, z) > self.get(x, y) + self.get(y, z) + tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn is_monge(&self) -> bool {
        let tol = 1e-12 * (1.0 + self.max_abs());
        for x1 in 0..self.nx {
            for x2 in x1 + 1..self.nx {
                for y1 in 0..self.ny {
                    for y2 in y1 + 1..self.ny {
                        let lhs = self.get(x1, y1) + self.get(x2, y2);
                        let rhs = self.get(x1, y2) + self.get(x2, y1);
                        if lhs > rhs + tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Probability distribution on a finite outcome set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and `Σ w = 1` within [`NORMALIZATION_TOL`].
    /// Round-off negatives down to `−1e-12` are clamped to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return validation("distribution over an empty set");
        }
        let mut weights = weights;
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() || *w < -1e-12 {
                return validation(format!("distribution weight {i} is {w}"));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > NORMALIZATION_TOL {
            return validation(format!("distribution sums to {s}, not 1"));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mean and variance of the outcome values under this distribution.
    pub fn moments(&self, values: &[f64]) -> (f64, f64) {
        let m: f64 = self.weights.iter().zip(values).map(|(w, v)| w * v).sum();
        let v = self.weights.iter().zip(values).map(|(w, x)| w * (x - m) * (x - m)).sum();
        (m, v)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        Distribution::new(Vec::deserialize(de)?).map_err(serde::de::Error::custom)
    }
}

/// Transport plan on `X × Y`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    nx: usize,
    ny: usize,
    joint: Vec<f64>,
}

impl Coupling {
    pub fn new(nx: usize, ny: usize, joint: Vec<f64>) -> Result<Self> {
        if joint.len() != nx * ny {
            return Err(Error::DimensionMismatch { expected: nx * ny, got: joint.len() });
        }
        Ok(Self { nx, ny, joint })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.ny + y]
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nx).map(|x| (0..self.ny).map(|y| self.get(x, y)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.ny).map(|y| (0..self.nx).map(|x| self.get(x, y)).sum()).collect()
    }

    /// Pairs carrying more than `tol` mass.
    pub fn support(&self, tol: f64) -> CcmSet {
        let mut edges = Vec::new();
        for x in 0..self.nx {
            for y in 0..self.ny {
                if self.get(x, y) > tol {
                    edges.push((x, y));
                }
            }
        }
        CcmSet { edges }
    }

    pub fn total_cost(&self, c: &CostFunction) -> f64 {
        let mut acc = 0.0;
        for x in 0..self.nx {
            for y in 0..self.ny {
                acc += self.get(x, y) * c.get(x, y);
            }
        }
        acc
    }
}

/// Dual pair `(Φ, Ψ)` with `Φ(x) − Ψ(y) ≤ c(x, y)`. Entries may be `±∞` for
/// the extremal schemes of a ccm set that does not touch every vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingScheme {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl PricingScheme {
    pub fn new(phi: Vec<f64>, psi: Vec<f64>) -> Self {
        Self { phi, psi }
    }

    /// `Σ Φ p − Σ Ψ q`.
    pub fn value(&self, p: &[f64], q: &[f64]) -> f64 {
        let a: f64 = self.phi.iter().zip(p).map(|(f, w)| if *w == 0.0 { 0.0 } else { f * w }).sum();
        let b: f64 = self.psi.iter().zip(q).map(|(f, w)| if *w == 0.0 { 0.0 } else { f * w }).sum();
        a - b
    }

    /// Largest violation `max(Φ(x) − Ψ(y) − c(x, y), 0)`.
    pub fn max_violation(&self, c: &CostFunction) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..c.nx() {
            for y in 0..c.ny() {
                let s = self.phi[x] - self.psi[y] - c.get(x, y);
                if s.is_nan() {
                    return f64::INFINITY;
                }
                worst = worst.max(s);
            }
        }
        worst
    }

    pub fn is_feasible(&self, c: &CostFunction, tol: f64) -> bool {
        self.phi.len() == c.nx() && self.psi.len() == c.ny() && self.max_violation(c) <= tol
    }

    /// Pairs where the pricing inequality is tight within `tol`.
    pub fn equality_set(&self, c: &CostFunction, tol: f64) -> CcmSet {
        let mut edges = Vec::new();
        for x in 0..c.nx() {
            for y in 0..c.ny() {
                let slack = c.get(x, y) - (self.phi[x] - self.psi[y]);
                if slack.abs() <= tol {
                    edges.push((x, y));
                }
            }
        }
        CcmSet { edges }
    }

    /// Shifts both functions by the same constant so that `Φ(0) = 0`.
    pub fn normalized(&self) -> Self {
        let a = self.phi[0];
        if !a.is_finite() {
            return self.clone();
        }
        Self {
            phi: self.phi.iter().map(|v| v - a).collect(),
            psi: self.psi.iter().map(|v| v - a).collect(),
        }
    }

    /// Rounded (`Φ, Ψ`) vector used for deduplication.
    pub(crate) fn key(&self) -> Vec<i64> {
        self.phi.iter().chain(&self.psi).map(|v| quantize(*v)).collect()
    }
}

pub(crate) fn quantize(v: f64) -> i64 {
    if v.is_infinite() {
        if v > 0.0 { i64::MAX } else { i64::MIN }
    } else {
        (v * 1e9).round() as i64
    }
}

impl fmt::Display for PricingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
        write!(f, "Phi = [{}], Psi = [{}]", show(&self.phi), show(&self.psi))
    }
}

/// A subset `Γ ⊆ X × Y`, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CcmSet {
    edges: Vec<(usize, usize)>,
}

impl CcmSet {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        Self { edges }
    }

    pub fn diagonal(n: usize) -> Self {
        Self::new((0..n).map(|i| (i, i)))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.edges.binary_search(&(x, y)).is_ok()
    }

    pub fn is_superset_of(&self, other: &CcmSet) -> bool {
        other.edges.iter().all(|&(x, y)| self.contains(x, y))
    }

    /// `true` when the bipartite graph on all `nx + ny` vertices is connected.
    pub fn is_connected(&self, nx: usize, ny: usize) -> bool {
        let n = nx + ny;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for &(x, y) in &self.edges {
            let (a, b) = (find(&mut parent, x), find(&mut parent, nx + y));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (1..n).all(|i| find(&mut parent, i) == root)
    }
}

/// The finite label set of optimal pricing schemes for one cost function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeFamily {
    schemes: Vec<PricingScheme>,
    cost: CostFunction,
}

impl SchemeFamily {
    /// Normalizes, deduplicates and sorts the schemes.
    pub fn new(cost: CostFunction, schemes: Vec<PricingScheme>) -> Result<Self> {
        let tol = cost.equality_tol();
        let mut keyed: Vec<(Vec<i64>, PricingScheme)> = Vec::with_capacity(schemes.len());
        for s in schemes {
            if s.phi.len() != cost.nx() || s.psi.len() != cost.ny() {
                return validation("pricing scheme size does not match the cost function");
            }
            if s.phi.iter().chain(&s.psi).any(|v| !v.is_finite()) {
                return validation("scheme family entries must be finite");
            }
            if !s.is_feasible(&cost, tol) {
                return validation(format!("scheme violates the pricing inequality: {s}"));
            }
            let s = s.normalized();
            keyed.push((s.key(), s));
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut kept: Vec<PricingScheme> = Vec::with_capacity(keyed.len());
        for (_, s) in keyed {
            let dup = kept.iter().any(|k| {
                k.phi.iter().chain(&k.psi).zip(s.phi.iter().chain(&s.psi)).all(|(a, b)| (a - b).abs() <= tol)
            });
            if !dup {
                kept.push(s);
            }
        }
        Ok(Self { schemes: kept, cost })
    }

    pub fn schemes(&self) -> &[PricingScheme] {
        &self.schemes
    }

    pub fn cost(&self) -> &CostFunction {
        &self.cost
    }

    pub fn len(&self) -> usize {
        self.schemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemes.is_empty()
    }
}

/// `max_α Σ Φ_α p − Σ Ψ_α q` and the first maximizing index.
pub fn transport_cost_dual(c: &CostFunction, p: &Distribution, q: &Distribution, family: &SchemeFamily) -> Result<(f64, usize)> {
    if family.is_empty() {
        return validation("empty scheme family");
    }
    if family.cost() != c {
        return validation("scheme family was enumerated for a different cost function");
    }
    check_sizes(c, p, q)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for (a, s) in family.schemes().iter().enumerate() {
        let v = s.value(p.weights(), q.weights());
        if v > best.0 {
            best = (v, a);
        }
    }
    Ok(best)
}

/// Total variation distance `½ Σ |p − q|`.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    Ok(0.5 * p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

pub(crate) fn check_sizes(c: &CostFunction, p: &Distribution, q: &Distribution) -> Result<()> {
    if p.len() != c.nx() {
        return Err(Error::DimensionMismatch { expected: c.nx(), got: p.len() });
    }
    if q.len() != c.ny() {
        return Err(Error::DimensionMismatch { expected: c.ny(), got: q.len() });
    }
    Ok(())
}
