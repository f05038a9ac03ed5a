//! POVMs, projective reference observables, joint measurements and their
//! marginals, plus the builtin observable families.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{validation, Error, Result};
use crate::numerics::{eig_hermitian, inner, vec_norm, ComplexMatrix, HermitianMatrix, C64};
use crate::transport::Distribution;

/// Tolerance for positivity and normalization of POVMs and states.
pub const POVM_TOL: f64 = 1e-9;

/// Finite POVM: PSD elements summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observable {
    dim: usize,
    elements: Vec<HermitianMatrix>,
    projective: bool,
    values: Option<Vec<f64>>,
}

impl Observable {
    /// Validates positivity and normalization within [`POVM_TOL`]. The
    /// projective flag is set when there are `d` rank-one projectors.
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return validation("observable has no outcomes");
        };
        let dim = first.dim();
        check_povm(dim, &elements)?;
        let projective = elements.len() == dim && elements.iter().all(|e| is_rank_one_projector(e));
        Ok(Self { dim, elements, projective, values: None })
    }

    /// Projective observable `A(y) = |φ_y⟩⟨φ_y|` of an orthonormal basis.
    pub fn projective_from_basis(basis: &[Vec<C64>]) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return validation("empty basis");
        }
        for (j, u) in basis.iter().enumerate() {
            if u.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: u.len() });
            }
            for (k, v) in basis.iter().enumerate().take(j + 1) {
                let target = if j == k { 1.0 } else { 0.0 };
                let ip = inner(v, u);
                if (ip - C64::new(target, 0.0)).norm() > 1e-10 {
                    return validation(format!("basis is not orthonormal: <{k}|{j}> = {ip}"));
                }
            }
        }
        let elements = basis.iter().map(|v| HermitianMatrix::projector(v)).collect();
        Ok(Self { dim: d, elements, projective: true, values: None })
    }

    /// Eigenbasis observable of a non-degenerate Hermitian matrix, outcomes
    /// labelled by the eigenvalues in ascending order.
    pub fn from_hermitian(m: &HermitianMatrix) -> Result<Self> {
        let eig = eig_hermitian(m);
        let scale = 1.0 + m.norm();
        if eig.values.windows(2).any(|w| w[1] - w[0] < 1e-8 * scale) {
            return validation("Hermitian matrix has a degenerate spectrum");
        }
        let basis: Vec<Vec<C64>> = (0..m.dim()).map(|k| eig.vectors.column(k)).collect();
        Self::projective_from_basis(&basis)?.with_values(eig.values)
    }

    /// Trivial observable that always reports outcome `at`.
    pub fn constant(dim: usize, outcomes: usize, at: usize) -> Self {
        let elements = (0..outcomes)
            .map(|x| if x == at { HermitianMatrix::identity(dim) } else { HermitianMatrix::zeros(dim) })
            .collect();
        Self { dim, elements, projective: false, values: None }
    }

    /// Attaches real outcome labels.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.elements.len() {
            return Err(Error::DimensionMismatch { expected: self.elements.len(), got: values.len() });
        }
        self.values = Some(values);
        Ok(self)
    }

    /// Convex combination `t a + (1 − t) b`.
    pub fn mix(t: f64, a: &Self, b: &Self) -> Result<Self> {
        if a.dim != b.dim || a.outcomes() != b.outcomes() {
            return validation("mixed observables must share dimension and outcome set");
        }
        let elements = a
            .elements
            .iter()
            .zip(&b.elements)
            .map(|(x, y)| HermitianMatrix::combination(a.dim, [(t, x), (1.0 - t, y)]))
            .collect();
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn element(&self, x: usize) -> &HermitianMatrix {
        &self.elements[x]
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Largest entrywise deviation between corresponding elements.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.elements.iter().zip(&other.elements).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }
}

/// Density operator: PSD with unit trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State {
    matrix: HermitianMatrix,
}

impl State {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return validation(format!("state has trace {tr}"));
        }
        let lmin = matrix.min_eigenvalue();
        if lmin < -POVM_TOL {
            return validation(format!("state is not positive: smallest eigenvalue {lmin}"));
        }
        Ok(Self { matrix })
    }

    /// Pure state `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &[C64]) -> Result<Self> {
        let n = vec_norm(v);
        if !(n > 0.0) {
            return validation("pure state from a zero vector");
        }
        let u: Vec<C64> = v.iter().map(|z| z / n).collect();
        Ok(Self { matrix: HermitianMatrix::projector(&u) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: HermitianMatrix::identity(dim).scaled(1.0 / dim as f64) }
    }

    /// Haar-random pure state.
    pub fn random_pure(dim: usize, rng: &mut impl Rng) -> Self {
        let v = gaussian_vector(dim, rng);
        Self::pure(&v).expect("Gaussian vector is nonzero")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

/// `(ρA)(y) = tr(ρ A(y))`.
pub fn outcome_distribution(rho: &State, a: &Observable) -> Result<Distribution> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: rho.dim() });
    }
    let raw: Vec<f64> = a.elements().iter().map(|e| rho.matrix().trace_product(e).max(0.0)).collect();
    let s: f64 = raw.iter().sum();
    if (s - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!("outcome probabilities sum to {s}")));
    }
    Distribution::new(raw.iter().map(|p| p / s).collect())
}

/// POVM over outcome tuples `(x_1, …, x_n)`, stored row-major with the last
/// slot varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointMeasurement {
    dim: usize,
    shape: Vec<usize>,
    elements: Vec<HermitianMatrix>,
}

impl JointMeasurement {
    pub fn new(dim: usize, shape: Vec<usize>, elements: Vec<HermitianMatrix>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return validation("joint measurement shape must be nonempty with positive sizes");
        }
        let count: usize = shape.iter().product();
        if elements.len() != count {
            return Err(Error::DimensionMismatch { expected: count, got: elements.len() });
        }
        check_povm(dim, &elements)?;
        Ok(Self { dim, shape, elements })
    }

    /// Turns PSD blocks into an exact POVM by the sandwich
    /// `R ↦ S^{-1/2} R S^{-1/2}` with `S = Σ R`.
    pub fn from_unnormalized(dim: usize, shape: Vec<usize>, blocks: Vec<HermitianMatrix>) -> Result<Self> {
        let count: usize = shape.iter().product();
        if blocks.len() != count || count == 0 {
            return Err(Error::DimensionMismatch { expected: count, got: blocks.len() });
        }
        // clip round-off negativity before normalizing
        let blocks: Vec<HermitianMatrix> = blocks.iter().map(|b| b.spectral_map(|l| l.max(0.0))).collect();
        let s = HermitianMatrix::combination(dim, blocks.iter().map(|b| (1.0, b)));
        if s.min_eigenvalue() <= 1e-14 * (1.0 + s.norm()) {
            return Err(Error::Numerical("joint measurement blocks do not sum to an invertible operator".into()));
        }
        let inv_sqrt = s.spectral_map(|l| 1.0 / l.sqrt()).to_complex();
        let elements = blocks.iter().map(|b| b.congruence(&inv_sqrt)).collect::<Result<Vec<_>>>()?;
        Self::new(dim, shape, elements)
    }

    /// Slot `slot` measures `a`; every other slot reports its entry of
    /// `fixed`.
    pub fn copying(a: &Observable, shape: Vec<usize>, slot: usize, fixed: &[usize]) -> Result<Self> {
        let count: usize = shape.iter().product();
        let mut elements = vec![HermitianMatrix::zeros(a.dim()); count];
        for x in 0..a.outcomes() {
            let mut t: Vec<usize> = fixed.to_vec();
            t[slot] = x;
            elements[tuple_index(&shape, &t)] = a.element(x).clone();
        }
        Self::new(a.dim(), shape, elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Tuple of the `k`-th element.
    pub fn tuple(&self, k: usize) -> Vec<usize> {
        tuple_of(&self.shape, k)
    }

    /// Marginal `A'_i(x) = Σ_{tuples with x_i = x} R(tuple)`.
    pub fn marginal(&self, i: usize) -> Result<Observable> {
        if i >= self.shape.len() {
            return validation(format!("marginal index {i} out of range for {} slots", self.shape.len()));
        }
        let mut acc = vec![HermitianMatrix::zeros(self.dim); self.shape[i]];
        for (k, e) in self.elements.iter().enumerate() {
            acc[tuple_of(&self.shape, k)[i]].add_scaled(1.0, e);
        }
        Observable::new(acc)
    }

    pub fn marginals(&self) -> Result<Vec<Observable>> {
        (0..self.shape.len()).map(|i| self.marginal(i)).collect()
    }
}

/// Digits of `k` in the mixed radix `shape`, last slot fastest.
pub fn tuple_of(shape: &[usize], mut k: usize) -> Vec<usize> {
    let mut t = vec![0; shape.len()];
    for (slot, &m) in shape.iter().enumerate().rev() {
        t[slot] = k % m;
        k /= m;
    }
    t
}

pub fn tuple_index(shape: &[usize], tuple: &[usize]) -> usize {
    tuple.iter().zip(shape).fold(0, |acc, (&x, &m)| acc * m + x)
}

/// Random joint measurement from Ginibre blocks `G G†`, normalized by the
/// symmetric sandwich. Deterministic in `seed`.
pub fn random_joint_measurement(dim: usize, shape: &[usize], seed: u64) -> Result<JointMeasurement> {
    if dim < 1 {
        return validation("dimension must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_joint_measurement_with(dim, shape, &mut rng)
}

pub fn random_joint_measurement_with(dim: usize, shape: &[usize], rng: &mut impl Rng) -> Result<JointMeasurement> {
    let count: usize = shape.iter().product();
    let blocks = (0..count).map(|_| ginibre_psd(dim, rng)).collect();
    JointMeasurement::from_unnormalized(dim, shape.to_vec(), blocks)
}

/// Random POVM with `outcomes` elements.
pub fn random_observable(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Result<Observable> {
    random_joint_measurement_with(dim, &[outcomes], rng)?.marginal(0)
}

/// Projective observable of a Haar-random orthonormal basis.
pub fn random_projective(dim: usize, rng: &mut impl Rng) -> Result<Observable> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v = gaussian_vector(dim, rng);
        for _ in 0..2 {
            for u in &basis {
                let p = inner(u, &v);
                v.iter_mut().zip(u).for_each(|(z, uz)| *z -= p * uz);
            }
        }
        let n = vec_norm(&v);
        if n > 1e-6 {
            basis.push(v.iter().map(|z| z / n).collect());
        }
    }
    Observable::projective_from_basis(&basis)
}

fn gaussian_vector(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

fn ginibre_psd(dim: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = ComplexMatrix::new(dim, dim, (0..dim * dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect())
        .expect("square Ginibre matrix");
    let p = g.matmul(&g.adjoint()).expect("square product");
    HermitianMatrix::from_upper(dim, |j, k| p.get(j, k))
}

/// Spin-1 angular momentum components `L1, L2, L3` as projective
/// observables with outcome values `(−1, 0, +1)`.
pub fn spin1_triple() -> [Observable; 3] {
    let s = 1.0 / 2f64.sqrt();
    let z = C64::new(0.0, 0.0);
    let r = C64::new(s, 0.0);
    let i = C64::new(0.0, s);
    let l1 = HermitianMatrix::new(3, vec![z, r, z, r, z, r, z, r, z]).expect("L1 is Hermitian");
    let l2 = HermitianMatrix::new(3, vec![z, -i, z, i, z, -i, z, i, z]).expect("L2 is Hermitian");
    let l3 = HermitianMatrix::diag(&[1.0, 0.0, -1.0]);
    [l1, l2, l3].map(|m| {
        let mut a = Observable::from_hermitian(&m).expect("spin-1 components are non-degenerate");
        // pin the labels to exact integers
        a.values = Some(vec![-1.0, 0.0, 1.0]);
        a
    })
}

/// Computational basis and discrete Fourier basis `f_k = d^{-1/2}(ω^{jk})_j`,
/// outcomes labelled `0, …, d−1`.
pub fn fourier_pair(d: usize) -> Result<(Observable, Observable)> {
    if d < 2 {
        return validation("Fourier pair needs d >= 2");
    }
    let labels: Vec<f64> = (0..d).map(|k| k as f64).collect();
    let position: Vec<Vec<C64>> = (0..d)
        .map(|k| (0..d).map(|j| C64::new(if j == k { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let norm = 1.0 / (d as f64).sqrt();
    let momentum: Vec<Vec<C64>> = (0..d)
        .map(|k| (0..d).map(|j| C64::from_polar(norm, 2.0 * PI * ((j * k) % d) as f64 / d as f64)).collect())
        .collect();
    Ok((
        Observable::projective_from_basis(&position)?.with_values(labels.clone())?,
        Observable::projective_from_basis(&momentum)?.with_values(labels)?,
    ))
}

fn check_povm(dim: usize, elements: &[HermitianMatrix]) -> Result<()> {
    let mut sum = HermitianMatrix::zeros(dim);
    for (k, e) in elements.iter().enumerate() {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
        }
        let lmin = e.min_eigenvalue();
        if lmin < -POVM_TOL {
            return validation(format!("element {k} is not positive: smallest eigenvalue {lmin:.3e}"));
        }
        sum.add_scaled(1.0, e);
    }
    let dev = sum.max_abs_diff(&HermitianMatrix::identity(dim));
    if dev > POVM_TOL {
        return validation(format!("elements sum to the identity only within {dev:.3e}"));
    }
    Ok(())
}

fn is_rank_one_projector(e: &HermitianMatrix) -> bool {
    if (e.trace() - 1.0).abs() > POVM_TOL {
        return false;
    }
    let m = e.to_complex();
    let sq = m.matmul(&m).expect("square");
    sq.max_abs_diff(&m) <= POVM_TOL
}
