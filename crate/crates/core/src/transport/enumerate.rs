//! Enumeration of the optimal pricing schemes (equivalently the mccm sets)
//! of a cost function.
//!
//! The optimal schemes normalized by `Φ(0) = 0` are the vertices of the
//! polyhedron `{Φ(x) − Ψ(y) ≤ c(x, y)}`; their equality sets are connected
//! and contain a spanning tree. [`enumerate_mccm`] walks the vertex graph of
//! a symbolically perturbed polyhedron, with costs `c + ε ξ` for fixed
//! generic `ξ` and infinitesimal `ε`. There every vertex is a single
//! spanning tree and neighbours differ by one edge exchange. Each perturbed
//! vertex is then read off with the unperturbed costs on its tree, which
//! gives every vertex of the original polyhedron, possibly several times.
//!
//! [`enumerate_mccm_growth`] is the direct growth process over connected
//! ccm trees rooted at `x = 0`: a vertex is attached through an edge that is
//! tight for the extended scheme, which forces its potential
//! (`Ψ(y) = max_x Φ(x) − c(x, y)` or `Φ(x) = min_y Ψ(y) + c(x, y)` over the
//! tree). Partial trees with equal vertex set and potentials are visited
//! once. It is exponential in `|X| + |Y|` and serves as a cross-check.
//!
//! Ordered convex costs admit only north-east staircases, enumerated
//! directly by [`enumerate_mccm_ordered`].

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{quantize, CostFunction, PricingScheme, SchemeFamily};
use crate::error::{validation, Error, Result};

/// Largest `|X|` and `|Y|` accepted by [`enumerate_mccm`].
pub const DEFAULT_ENUMERATION_BOUND: usize = 8;

/// All optimal pricing schemes of `c`, one per mccm set.
pub fn enumerate_mccm(c: &CostFunction) -> Result<SchemeFamily> {
    enumerate_mccm_with_bound(c, DEFAULT_ENUMERATION_BOUND)
}

/// [`enumerate_mccm`] with an explicit size bound (`|X|·|Y| ≤ 128` always).
pub fn enumerate_mccm_with_bound(c: &CostFunction, bound: usize) -> Result<SchemeFamily> {
    let (nx, ny) = (c.nx(), c.ny());
    if nx > bound || ny > bound || nx * ny > 128 {
        return Err(Error::EnumerationBound { rows: nx, cols: ny, bound });
    }
    let walk = Walk::new(c);
    let start = walk.initial_tree();
    let mut seen: HashSet<u128> = HashSet::new();
    seen.insert(walk.mask(&start));
    let mut queue = VecDeque::from([start]);
    let mut found = Vec::new();
    while let Some(tree) = queue.pop_front() {
        let pot = walk.potentials(&tree);
        found.push(PricingScheme::new(
            pot[..nx].iter().map(|p| p.0).collect(),
            pot[nx..].iter().map(|p| p.0).collect(),
        ));
        for k in 0..tree.len() {
            if let Some(next) = walk.exchange(&tree, &pot, k) {
                if seen.insert(walk.mask(&next)) {
                    queue.push_back(next);
                }
            }
        }
    }
    SchemeFamily::new(c.clone(), found)
}

/// Value `a + ε b` with infinitesimal `ε`.
#[derive(Clone, Copy, Debug)]
struct Lex(f64, f64);

impl Lex {
    fn sub(self, o: Lex) -> Lex {
        Lex(self.0 - o.0, self.1 - o.1)
    }
    fn add(self, o: Lex) -> Lex {
        Lex(self.0 + o.0, self.1 + o.1)
    }
}

struct Walk<'a> {
    c: &'a CostFunction,
    xi: Vec<f64>,
    tol: f64,
}

impl<'a> Walk<'a> {
    fn new(c: &'a CostFunction) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d63_636d);
        let xi = (0..c.nx() * c.ny()).map(|_| rng.random::<f64>()).collect();
        Self { c, xi, tol: 1e-12 * (1.0 + c.max_abs()) }
    }

    fn cost(&self, x: usize, y: usize) -> Lex {
        Lex(self.c.get(x, y), self.xi[x * self.c.ny() + y])
    }

    fn cmp(&self, a: Lex, b: Lex) -> Ordering {
        if (a.0 - b.0).abs() > self.tol {
            a.0.total_cmp(&b.0)
        } else {
            a.1.total_cmp(&b.1)
        }
    }

    fn mask(&self, tree: &[(usize, usize)]) -> u128 {
        tree.iter().fold(0u128, |m, &(x, y)| m | 1u128 << (x * self.c.ny() + y))
    }

    /// Star at `x = 0` plus the cheapest attachment of every other `x`.
    fn initial_tree(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.c.nx(), self.c.ny());
        let psi: Vec<Lex> = (0..ny).map(|y| Lex(0.0, 0.0).sub(self.cost(0, y))).collect();
        let mut tree: Vec<(usize, usize)> = (0..ny).map(|y| (0, y)).collect();
        for x in 1..nx {
            let best = (0..ny)
                .min_by(|&a, &b| self.cmp(psi[a].add(self.cost(x, a)), psi[b].add(self.cost(x, b))))
                .expect("ny > 0");
            tree.push((x, best));
        }
        tree
    }

    /// Potentials on `X` then `Y`, propagated over the tree from `Φ(0) = 0`.
    fn potentials(&self, tree: &[(usize, usize)]) -> Vec<Lex> {
        let (nx, ny) = (self.c.nx(), self.c.ny());
        let mut pot = vec![Lex(f64::NAN, f64::NAN); nx + ny];
        let mut known = vec![false; nx + ny];
        pot[0] = Lex(0.0, 0.0);
        known[0] = true;
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for &(x, y) in tree {
                let (from, to) = if v == x { (x, nx + y) } else if v == nx + y { (nx + y, x) } else { continue };
                if known[to] {
                    continue;
                }
                pot[to] = if to >= nx { pot[from].sub(self.cost(x, y)) } else { pot[from].add(self.cost(x, y)) };
                known[to] = true;
                stack.push(to);
            }
        }
        pot
    }

    /// Drops tree edge `k` and enters the first pair to become tight while
    /// the component away from `x = 0` shifts; `None` along an unbounded ray.
    fn exchange(&self, tree: &[(usize, usize)], pot: &[Lex], k: usize) -> Option<Vec<(usize, usize)>> {
        let (nx, ny) = (self.c.nx(), self.c.ny());
        let mut far = vec![true; nx + ny];
        far[0] = false;
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for (j, &(x, y)) in tree.iter().enumerate() {
                if j == k {
                    continue;
                }
                let to = if v == x { nx + y } else if v == nx + y { x } else { continue };
                if far[to] {
                    far[to] = false;
                    stack.push(to);
                }
            }
        }
        let (ex, ey) = tree[k];
        // shifting the far side up loosens (near x, far y) pairs and tightens
        // (far x, near y) pairs; shifting down does the opposite
        let up = far[nx + ey];
        debug_assert!(up != far[ex]);
        let mut best: Option<((usize, usize), Lex)> = None;
        for x in 0..nx {
            for y in 0..ny {
                let tightens = if up { far[x] && !far[nx + y] } else { !far[x] && far[nx + y] };
                if !tightens || (x, y) == (ex, ey) {
                    continue;
                }
                let slack = self.cost(x, y).sub(pot[x]).add(pot[nx + y]);
                if best.is_none_or(|(_, b)| self.cmp(slack, b) == Ordering::Less) {
                    best = Some(((x, y), slack));
                }
            }
        }
        let (enter, _) = best?;
        let mut next: Vec<(usize, usize)> = tree.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &e)| e).collect();
        next.push(enter);
        next.sort_unstable();
        Some(next)
    }
}

/// Growth process over connected ccm trees; exponential, for cross-checks
/// on small instances.
pub fn enumerate_mccm_growth(c: &CostFunction) -> Result<SchemeFamily> {
    let (nx, ny) = (c.nx(), c.ny());
    let n = nx + ny;
    if n > 16 {
        return Err(Error::EnumerationBound { rows: nx, cols: ny, bound: 8 });
    }
    let full: u64 = (1u64 << n) - 1;

    let mut root = vec![f64::NAN; n];
    root[0] = 0.0;
    let mut stack = vec![(1u64, root)];
    let mut seen: HashSet<(u64, Vec<i64>)> = HashSet::new();
    let mut found = Vec::new();
    while let Some((mask, pot)) = stack.pop() {
        if mask == full {
            found.push(PricingScheme::new(pot[..nx].to_vec(), pot[nx..].to_vec()));
            continue;
        }
        let has_y = mask >> nx != 0;
        for v in (0..n).rev() {
            if mask & (1 << v) != 0 {
                continue;
            }
            let value = if v >= nx {
                let y = v - nx;
                (0..nx)
                    .filter(|&x| mask & (1 << x) != 0)
                    .map(|x| pot[x] - c.get(x, y))
                    .fold(f64::NEG_INFINITY, f64::max)
            } else {
                if !has_y {
                    continue;
                }
                (0..ny)
                    .filter(|&y| mask & (1 << (nx + y)) != 0)
                    .map(|y| pot[nx + y] + c.get(v, y))
                    .fold(f64::INFINITY, f64::min)
            };
            let next_mask = mask | (1 << v);
            let mut next = pot.clone();
            next[v] = value;
            let key: Vec<i64> = (0..n).filter(|&u| next_mask & (1 << u) != 0).map(|u| quantize(next[u])).collect();
            if seen.insert((next_mask, key)) {
                stack.push((next_mask, next));
            }
        }
    }
    SchemeFamily::new(c.clone(), found)
}

/// Schemes of an ordered convex cost from the monotone staircases
/// `(0, 0) → (|X|−1, |Y|−1)`; at most `binom(|X|+|Y|−2, |X|−1)` of them.
pub fn enumerate_mccm_ordered(c: &CostFunction) -> Result<SchemeFamily> {
    if !c.ordered_convex() {
        return validation("the ordered enumeration needs a cost h(x − y) with convex h on sorted outcome values");
    }
    let (nx, ny) = (c.nx(), c.ny());
    let tol = c.equality_tol();
    let mut found = Vec::new();
    let mut phi = vec![0.0; nx];
    let mut psi = vec![0.0; ny];
    psi[0] = -c.get(0, 0);
    staircase(c, 0, 0, &mut phi, &mut psi, tol, &mut found);
    SchemeFamily::new(c.clone(), found)
}

fn staircase(c: &CostFunction, x: usize, y: usize, phi: &mut [f64], psi: &mut [f64], tol: f64, out: &mut Vec<PricingScheme>) {
    // prune as soon as a fixed pair violates the pricing inequality
    for xi in 0..=x {
        if phi[xi] - psi[y] > c.get(xi, y) + tol {
            return;
        }
    }
    for yi in 0..=y {
        if phi[x] - psi[yi] > c.get(x, yi) + tol {
            return;
        }
    }
    if x + 1 == c.nx() && y + 1 == c.ny() {
        let s = PricingScheme::new(phi.to_vec(), psi.to_vec());
        if s.is_feasible(c, tol) {
            out.push(s);
        }
        return;
    }
    if y + 1 < c.ny() {
        psi[y + 1] = phi[x] - c.get(x, y + 1);
        staircase(c, x, y + 1, phi, psi, tol, out);
    }
    if x + 1 < c.nx() {
        phi[x + 1] = psi[y] + c.get(x + 1, y);
        staircase(c, x + 1, y, phi, psi, tol, out);
    }
}

/// `binom(n, k)`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}
