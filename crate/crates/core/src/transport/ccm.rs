//! Cyclic c-monotonicity and the extremal pricing schemes of a ccm set.
//!
//! Vertices `0..nx` are the points of `X`, vertices `nx..nx+ny` those of
//! `Y`. A Γ-adapted path may step `x → y` only along `Γ` and `y → x` freely;
//! with `c(y, x) := −c(x, y)` a set is ccm iff no closed adapted path has
//! positive cost. Negating the weights turns this into negative-cycle
//! detection and longest adapted paths into shortest ones.

use super::{CcmSet, CostFunction, PricingScheme};
use crate::error::{validation, Error, Result};

struct Arc {
    from: usize,
    to: usize,
    weight: f64,
}

/// Arcs with negated path costs: `x → y` (on Γ) weighs `−c(x,y)`,
/// `y → x` weighs `+c(x,y)`.
fn arcs(c: &CostFunction, gamma: &CcmSet) -> Vec<Arc> {
    let nx = c.nx();
    let mut out = Vec::with_capacity(gamma.len() + nx * c.ny());
    for &(x, y) in gamma.edges() {
        out.push(Arc { from: x, to: nx + y, weight: -c.get(x, y) });
    }
    for x in 0..nx {
        for y in 0..c.ny() {
            out.push(Arc { from: nx + y, to: x, weight: c.get(x, y) });
        }
    }
    out
}

fn slack(c: &CostFunction) -> f64 {
    1e-12 * (1.0 + c.max_abs())
}

fn check_edges(c: &CostFunction, gamma: &CcmSet) -> Result<()> {
    for &(x, y) in gamma.edges() {
        if x >= c.nx() || y >= c.ny() {
            return validation(format!("edge ({x},{y}) outside the {}×{} cost matrix", c.nx(), c.ny()));
        }
    }
    Ok(())
}

/// A closed Γ-adapted path of positive cost, as vertex indices (`X` first,
/// then `Y` offset by `nx`), or `None` when Γ is ccm.
pub fn negative_cycle(c: &CostFunction, gamma: &CcmSet) -> Option<Vec<usize>> {
    let n = c.nx() + c.ny();
    let arcs = arcs(c, gamma);
    let eps = slack(c);
    let mut dist = vec![0.0; n];
    let mut pred = vec![usize::MAX; n];
    let mut last = None;
    for _ in 0..n {
        last = None;
        for (k, a) in arcs.iter().enumerate() {
            let nd = dist[a.from] + a.weight;
            if nd < dist[a.to] - eps {
                dist[a.to] = nd;
                pred[a.to] = k;
                last = Some(a.to);
            }
        }
        last?;
    }
    // a relaxation in round n means a cycle; walk back n steps to land on it
    let step = |v: usize| (pred[v] != usize::MAX).then(|| arcs[pred[v]].from);
    let mut v = last?;
    for _ in 0..n {
        v = step(v)?;
    }
    let start = v;
    let mut cycle = vec![start];
    let mut u = step(start)?;
    while u != start {
        cycle.push(u);
        u = step(u)?;
    }
    cycle.reverse();
    Some(cycle)
}

/// `true` iff no closed Γ-adapted path has positive cost.
pub fn is_ccm(c: &CostFunction, gamma: &CcmSet) -> bool {
    check_edges(c, gamma).is_ok() && negative_cycle(c, gamma).is_none()
}

/// Largest and smallest pricing schemes whose equality set contains Γ.
#[derive(Clone, Debug)]
pub struct PricingBounds {
    pub plus: PricingScheme,
    pub minus: PricingScheme,
    /// Vertices (`X` first, then `Y` offset by `nx`) where an extremal scheme
    /// takes an infinite value because no adapted path connects them to `x0`.
    pub unreachable: Vec<usize>,
}

/// Extremal schemes `χ±` of a ccm set Γ, normalized at `x0`:
/// `χ₊(z) = −sup c(x0, …, z)` and `χ₋(z) = sup c(z, …, x0)` over adapted
/// paths, with empty suprema equal to `−∞`.
pub fn pricing_from_ccm(c: &CostFunction, gamma: &CcmSet, x0: usize) -> Result<PricingBounds> {
    check_edges(c, gamma)?;
    if gamma.is_empty() {
        return validation("pricing schemes of an empty set are undetermined");
    }
    if x0 >= c.nx() || !gamma.edges().iter().any(|&(x, _)| x == x0) {
        return validation(format!("reference point x0 = {x0} has no edge in the set"));
    }
    if let Some(cycle) = negative_cycle(c, gamma) {
        return Err(Error::NotCyclicallyMonotone { cycle });
    }
    let (nx, ny) = (c.nx(), c.ny());
    let n = nx + ny;
    let all = arcs(c, gamma);
    let eps = slack(c);

    // χ₊ is the shortest-path distance from x0 under the negated weights
    let plus = bellman_ford(n, x0, all.iter().map(|a| (a.from, a.to, a.weight)), eps);
    // χ₋(z) = −(shortest distance z → x0) = −(distance from x0 in the reversed graph)
    let to_root = bellman_ford(n, x0, all.iter().map(|a| (a.to, a.from, a.weight)), eps);
    let minus: Vec<f64> = to_root.iter().map(|d| -d).collect();

    let unreachable = (0..n).filter(|&v| plus[v].is_infinite() || minus[v].is_infinite()).collect();
    Ok(PricingBounds {
        plus: PricingScheme::new(plus[..nx].to_vec(), plus[nx..].to_vec()),
        minus: PricingScheme::new(minus[..nx].to_vec(), minus[nx..].to_vec()),
        unreachable,
    })
}

fn bellman_ford(n: usize, source: usize, arcs: impl Iterator<Item = (usize, usize, f64)> + Clone, eps: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for (u, v, w) in arcs.clone() {
            if dist[u].is_finite() && dist[u] + w < dist[v] - eps {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist[source] = 0.0;
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_ccm_for_metrics() {
        for c in [CostFunction::discrete(4).unwrap(), CostFunction::convex_difference(&[0.0, 1.0, 4.0], f64::abs).unwrap()] {
            assert!(is_ccm(&c, &CcmSet::diagonal(c.nx())));
        }
    }

    #[test]
    fn crossing_pair_is_not_ccm() {
        let c = CostFunction::quadratic(&[1.0, 2.0]).unwrap();
        let gamma = CcmSet::new([(0, 1), (1, 0)]);
        assert!(!is_ccm(&c, &gamma));
        let cycle = negative_cycle(&c, &gamma).unwrap();
        assert_eq!(cycle.len(), 4);
        match pricing_from_ccm(&c, &gamma, 0) {
            Err(Error::NotCyclicallyMonotone { cycle }) => assert!(!cycle.is_empty()),
            other => panic!("expected a cycle error, got {other:?}"),
        }
    }

    #[test]
    fn equality_set_of_a_scheme_is_ccm() {
        let c = CostFunction::quadratic(&[-1.0, 0.0, 1.0]).unwrap();
        let p = crate::transport::Distribution::new(vec![0.5, 0.2, 0.3]).unwrap();
        let q = crate::transport::Distribution::new(vec![0.1, 0.3, 0.6]).unwrap();
        let s = crate::transport::transport_solve(&c, &p, &q).unwrap().scheme;
        assert!(s.is_feasible(&c, 1e-12));
        let e = s.equality_set(&c, 1e-12);
        assert!(!e.is_empty());
        assert!(is_ccm(&c, &e));
    }

    #[test]
    fn diagonal_bounds_bracket_zero_scheme() {
        let c = CostFunction::discrete(3).unwrap();
        let b = pricing_from_ccm(&c, &CcmSet::diagonal(3), 0).unwrap();
        assert!(b.unreachable.is_empty());
        for v in 0..3 {
            assert!(b.minus.phi[v] <= 0.0 && 0.0 <= b.plus.phi[v]);
            assert!(b.minus.psi[v] <= 0.0 && 0.0 <= b.plus.psi[v]);
        }
        let tol = 1e-12;
        assert!(b.plus.equality_set(&c, tol).is_superset_of(&CcmSet::diagonal(3)));
        assert!(b.minus.equality_set(&c, tol).is_superset_of(&CcmSet::diagonal(3)));
    }

    #[test]
    fn singleton_bounds_satisfy_pricing_everywhere() {
        let c = CostFunction::quadratic(&[1.0, 2.0]).unwrap();
        let gamma = CcmSet::new([(0, 0)]);
        let b = pricing_from_ccm(&c, &gamma, 0).unwrap();
        // exhaustive check over the four pairs, by hand: plus is finite on X
        // and on the covered y, +∞ on the uncovered one
        assert_eq!(b.plus.phi, vec![0.0, 1.0]);
        assert_eq!(b.plus.psi[0], 0.0);
        assert!(b.plus.psi[1].is_infinite() && b.plus.psi[1] > 0.0);
        assert_eq!(b.minus.psi, vec![0.0, -1.0]);
        assert_eq!(b.minus.phi[0], 0.0);
        assert!(b.minus.phi[1].is_infinite() && b.minus.phi[1] < 0.0);
        for s in [&b.plus, &b.minus] {
            for x in 0..2 {
                for y in 0..2 {
                    assert!(s.phi[x] - s.psi[y] <= c.get(x, y) + 1e-12);
                }
            }
            assert_eq!(s.phi[0] - s.psi[0], c.get(0, 0));
        }
        assert_eq!(b.unreachable, vec![1, 3]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = CostFunction::discrete(2).unwrap();
        assert!(pricing_from_ccm(&c, &CcmSet::default(), 0).is_err());
        assert!(pricing_from_ccm(&c, &CcmSet::new([(1, 1)]), 0).is_err());
        assert!(pricing_from_ccm(&c, &CcmSet::new([(0, 5)]), 0).is_err());
        assert!(!is_ccm(&c, &CcmSet::new([(2, 0)])));
    }
}
