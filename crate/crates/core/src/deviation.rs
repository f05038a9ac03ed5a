//! Deviation of an approximating observable `A'` from a reference `A`.
//!
//! With `ĉ` the transport cost of [`crate::transport`]:
//!
//! * maximal error `ε_M = sup_ρ ĉ(ρA', ρA) = max_α λ_max(Σ Φ_α(x) A'(x) − Σ Ψ_α(y) A(y))`,
//! * calibration error `ε_C = max_y Σ_x ⟨φ_y|A'(x)|φ_y⟩ c(x, y)`,
//! * entangled reference error `ε_E = Σ_{x,y} tr(A'(x) A(y)) c(x, y) / d`,
//!
//! ordered as `ε_M ≥ ε_C ≥ ε_E` and vanishing exactly when `A' = A`.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::numerics::HermitianMatrix;
use crate::observables::{outcome_distribution, Observable, State};
use crate::parallel::Execution;
use crate::transport::{transport_cost_primal, CostFunction, SchemeFamily};

/// Which error notion an uncertainty region is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorMeasure {
    #[serde(rename = "M")]
    Max,
    #[serde(rename = "C")]
    Calibration,
    #[serde(rename = "E")]
    Entangled,
}

impl ErrorMeasure {
    pub const ALL: [ErrorMeasure; 3] = [ErrorMeasure::Max, ErrorMeasure::Calibration, ErrorMeasure::Entangled];

    pub fn tag(self) -> &'static str {
        match self {
            ErrorMeasure::Max => "M",
            ErrorMeasure::Calibration => "C",
            ErrorMeasure::Entangled => "E",
        }
    }

    /// Error of `aprime` against `a`; `family` is needed for [`ErrorMeasure::Max`].
    pub fn evaluate(self, aprime: &Observable, a: &Observable, c: &CostFunction, family: Option<&SchemeFamily>) -> Result<f64> {
        match self {
            ErrorMeasure::Max => {
                let family = family.ok_or_else(|| Error::Validation("maximal error needs a scheme family".into()))?;
                err_max(aprime, a, c, family)
            }
            ErrorMeasure::Calibration => err_cal(aprime, a, c),
            ErrorMeasure::Entangled => err_ent(aprime, a, c),
        }
    }

    /// Largest error attainable by any approximating observable.
    pub fn cap(self, c: &CostFunction, d: usize) -> Result<f64> {
        let (c_star, c_bar) = cost_caps(c, d)?;
        Ok(if self == ErrorMeasure::Entangled { c_bar } else { c_star })
    }
}

impl fmt::Display for ErrorMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ErrorMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(ErrorMeasure::Max),
            "C" | "c" => Ok(ErrorMeasure::Calibration),
            "E" | "e" => Ok(ErrorMeasure::Entangled),
            other => validation(format!("unknown error measure {other:?}; expected M, C or E")),
        }
    }
}

fn check_pair(aprime: &Observable, a: &Observable, c: &CostFunction) -> Result<()> {
    if aprime.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: aprime.dim() });
    }
    if aprime.outcomes() != c.nx() {
        return Err(Error::DimensionMismatch { expected: c.nx(), got: aprime.outcomes() });
    }
    if a.outcomes() != c.ny() {
        return Err(Error::DimensionMismatch { expected: c.ny(), got: a.outcomes() });
    }
    Ok(())
}

/// `B_α = Σ_x Φ_α(x) A'(x) − Σ_y Ψ_α(y) A(y)`.
pub fn scheme_operator(aprime: &Observable, a: &Observable, phi: &[f64], psi: &[f64]) -> HermitianMatrix {
    let d = a.dim();
    let plus = phi.iter().copied().zip(aprime.elements());
    let minus = psi.iter().map(|v| -v).zip(a.elements());
    HermitianMatrix::combination(d, plus.chain(minus))
}

/// Maximal measurement error via the largest eigenvalue of `B_α` over the
/// scheme family. `a` may be any POVM.
pub fn err_max(aprime: &Observable, a: &Observable, c: &CostFunction, family: &SchemeFamily) -> Result<f64> {
    check_pair(aprime, a, c)?;
    if family.cost() != c {
        return validation("scheme family was enumerated for a different cost function");
    }
    if family.is_empty() {
        return validation("empty scheme family");
    }
    Ok(family
        .schemes()
        .iter()
        .map(|s| scheme_operator(aprime, a, &s.phi, &s.psi).max_eigenvalue())
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `M(x, y) = tr(A'(x) A(y))`.
fn overlaps(aprime: &Observable, a: &Observable) -> Vec<Vec<f64>> {
    aprime.elements().iter().map(|ex| a.elements().iter().map(|ey| ex.trace_product(ey)).collect()).collect()
}

/// Calibration error; the reference must be projective.
pub fn err_cal(aprime: &Observable, a: &Observable, c: &CostFunction) -> Result<f64> {
    check_pair(aprime, a, c)?;
    if !a.is_projective() {
        return validation("calibration error needs a projective reference observable");
    }
    let m = overlaps(aprime, a);
    Ok((0..c.ny())
        .map(|y| (0..c.nx()).map(|x| m[x][y] * c.get(x, y)).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Entangled reference error; the reference must be projective.
pub fn err_ent(aprime: &Observable, a: &Observable, c: &CostFunction) -> Result<f64> {
    check_pair(aprime, a, c)?;
    if !a.is_projective() {
        return validation("entangled reference error needs a projective reference observable");
    }
    let m = overlaps(aprime, a);
    let mut acc = 0.0;
    for (x, row) in m.iter().enumerate() {
        for (y, v) in row.iter().enumerate() {
            acc += v * c.get(x, y);
        }
    }
    Ok(acc / a.dim() as f64)
}

/// `(c*, c̄*) = (max c, max_y Σ_x c(x, y) / d)`.
pub fn cost_caps(c: &CostFunction, d: usize) -> Result<(f64, f64)> {
    if !c.is_square() {
        return validation("cost caps need a square cost function");
    }
    if d == 0 {
        return validation("dimension must be positive");
    }
    let c_star = (0..c.nx()).flat_map(|x| (0..c.ny()).map(move |y| (x, y))).map(|(x, y)| c.get(x, y)).fold(0.0, f64::max);
    let c_bar = (0..c.ny()).map(|y| (0..c.nx()).map(|x| c.get(x, y)).sum::<f64>() / d as f64).fold(0.0, f64::max);
    Ok((c_star, c_bar))
}

/// Moment bound for the quadratic cost at one state: with `m`, `v` the mean
/// and variance of `ρA` and `v'` the mean square deviation of `ρA'` from
/// `m`, returns `((√v' − √v)², ĉ(ρA', ρA))`; the first never exceeds the second.
pub fn appleby_pointwise(rho: &State, aprime: &Observable, a: &Observable) -> Result<(f64, f64)> {
    let (Some(vx), Some(vy)) = (aprime.values(), a.values()) else {
        return validation("the moment bound needs outcome values on both observables");
    };
    let c = CostFunction::rectangular(vx.iter().map(|&x| vy.iter().map(|&y| (x - y) * (x - y)).collect()).collect())?;
    let p = outcome_distribution(rho, aprime)?;
    let q = outcome_distribution(rho, a)?;
    let (m, v) = q.moments(vy);
    let vp: f64 = p.weights().iter().zip(vx).map(|(w, x)| w * (x - m) * (x - m)).sum();
    let lhs = (vp.sqrt() - v.sqrt()).powi(2);
    let (rhs, _) = transport_cost_primal(&c, &p, &q)?;
    Ok((lhs, rhs))
}

/// Largest `ĉ(ρA', ρA)` over `samples` Haar-random pure states. A lower
/// bound on [`err_max`], not a certified value. Deterministic in `seed`
/// regardless of `exec`.
pub fn sampled_err_max_lower_bound(
    aprime: &Observable,
    a: &Observable,
    c: &CostFunction,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    check_pair(aprime, a, c)?;
    const CHUNK: usize = 256;
    let chunks = samples.div_ceil(CHUNK);
    let partial = exec.map_range(chunks, |k| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..CHUNK.min(samples - k * CHUNK) {
            let rho = State::random_pure(a.dim(), &mut rng);
            let (v, _) = transport_cost_primal(c, &outcome_distribution(&rho, aprime)?, &outcome_distribution(&rho, a)?)?;
            best = best.max(v);
        }
        Ok(best)
    });
    partial.into_iter().try_fold(f64::NEG_INFINITY, |m, r| r.map(|v| m.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{fourier_pair, spin1_triple};
    use crate::transport::enumerate_mccm;

    #[test]
    fn identical_observables_have_zero_error() {
        let [l1, _, _] = spin1_triple();
        let c = CostFunction::quadratic(&[-1.0, 0.0, 1.0]).unwrap();
        let fam = enumerate_mccm(&c).unwrap();
        assert!(err_max(&l1, &l1, &c, &fam).unwrap().abs() < 1e-12);
        assert!(err_cal(&l1, &l1, &c).unwrap().abs() < 1e-12);
        assert!(err_ent(&l1, &l1, &c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn constant_observable_errors() {
        let [_, _, l3] = spin1_triple();
        let c = CostFunction::quadratic(&[-1.0, 0.0, 1.0]).unwrap();
        let fam = enumerate_mccm(&c).unwrap();
        let b = Observable::constant(3, 3, 1);
        // x* = 0 has costs (1, 0, 1) to the three outcomes
        assert!((err_max(&b, &l3, &c, &fam).unwrap() - 1.0).abs() < 1e-12);
        assert!((err_cal(&b, &l3, &c).unwrap() - 1.0).abs() < 1e-12);
        assert!((err_ent(&b, &l3, &c).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let b = Observable::constant(3, 3, 0);
        assert!((err_max(&b, &l3, &c, &fam).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_needs_projective_reference() {
        let c = CostFunction::discrete(2).unwrap();
        let (p, _) = fourier_pair(2).unwrap();
        let noisy = Observable::mix(0.5, &p, &Observable::constant(2, 2, 0)).unwrap();
        assert!(err_cal(&p, &noisy, &c).is_err());
        assert!(err_ent(&p, &noisy, &c).is_err());
        let fam = enumerate_mccm(&c).unwrap();
        assert!(err_max(&p, &noisy, &c, &fam).is_ok());
    }

    #[test]
    fn caps_examples() {
        let c = CostFunction::quadratic(&[-1.0, 0.0, 1.0]).unwrap();
        let (s, b) = cost_caps(&c, 3).unwrap();
        assert_eq!(s, 4.0);
        assert!((b - 5.0 / 3.0).abs() < 1e-15);
        for d in 2..6 {
            let (s, b) = cost_caps(&CostFunction::discrete(d).unwrap(), d).unwrap();
            assert_eq!(s, 1.0);
            assert!((b - (1.0 - 1.0 / d as f64)).abs() < 1e-15);
        }
        assert!(cost_caps(&CostFunction::rectangular(vec![vec![1.0, 2.0]]).unwrap(), 2).is_err());
    }

    #[test]
    fn moment_bound_examples() {
        let [l1, _, l3] = spin1_triple();
        let rho = State::maximally_mixed(3);
        let (lhs, rhs) = appleby_pointwise(&rho, &l3, &l3).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
        // eigenstate of L3: v = 0 and the bound is v' = ĉ(ρA', δ_y)
        let rho = State::pure(&[1.0.into(), 0.0.into(), 0.0.into()]).unwrap();
        let (lhs, rhs) = appleby_pointwise(&rho, &l1, &l3).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let missing = Observable::constant(3, 3, 0);
        assert!(appleby_pointwise(&rho, &missing, &l3).is_err());
    }

    #[test]
    fn measure_tags_round_trip() {
        for m in ErrorMeasure::ALL {
            assert_eq!(m.tag().parse::<ErrorMeasure>().unwrap(), m);
        }
        assert!("X".parse::<ErrorMeasure>().is_err());
    }

    #[test]
    fn sampling_is_deterministic_across_modes() {
        let c = CostFunction::discrete(2).unwrap();
        let (p, m) = fourier_pair(2).unwrap();
        let a = sampled_err_max_lower_bound(&p, &m, &c, 600, 3, Execution::Parallel).unwrap();
        let b = sampled_err_max_lower_bound(&p, &m, &c, 600, 3, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        let fam = enumerate_mccm(&c).unwrap();
        assert!(a <= err_max(&p, &m, &c, &fam).unwrap() + 1e-12);
    }
}
