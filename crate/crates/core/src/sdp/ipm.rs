//! Infeasible-start primal-dual path following with the HKM direction and
//! Mehrotra's predictor-corrector.
//!
//! Free scalars are eliminated from the Newton system by a Schur complement
//! on the `m × m` matrix `M_kl = Σ_j tr(A_k X_j A_l Z_j⁻¹)`. Within a block,
//! constraint matrices that are scalar multiples of one another share a
//! single product `X P Z⁻¹`.

use std::collections::HashMap;

use super::{residuals, Residuals, SdpProblem, SdpSolution, Sense, SolveOptions, SolveStatus};
use crate::error::Result;
use crate::numerics::dense::{cholesky, cholesky_inverse, cholesky_solve, frobenius_dot, matmul, whiten};
use crate::numerics::eig_symmetric;

const REGULARIZATION: f64 = 1e-12;
const BLOWUP: f64 = 1e12;

struct Pattern {
    entries: Vec<(usize, usize, f64)>,
    dense: Vec<f64>,
}

struct Term {
    constraint: usize,
    pattern: usize,
    scale: f64,
}

struct Block {
    n: usize,
    cost: Vec<f64>,
    patterns: Vec<Pattern>,
    terms: Vec<Term>,
}

struct Prepared {
    blocks: Vec<Block>,
    m: usize,
    nf: usize,
    b: Vec<f64>,
    /// Free-variable columns per constraint.
    f: Vec<Vec<(usize, f64)>>,
    cf: Vec<f64>,
}

fn pattern_key(entries: &[(usize, usize, f64)]) -> Vec<(usize, usize, i64)> {
    entries.iter().map(|&(r, c, v)| (r, c, (v * (1u64 << 40) as f64).round() as i64)).collect()
}

fn prepare(problem: &SdpProblem) -> Prepared {
    let sign = if problem.sense() == Sense::Minimize { 1.0 } else { -1.0 };
    let dims = problem.blocks();
    let mut blocks: Vec<Block> =
        dims.iter().map(|&n| Block { n, cost: vec![0.0; n * n], patterns: Vec::new(), terms: Vec::new() }).collect();
    for e in &problem.objective().entries {
        let blk = &mut blocks[e.block];
        blk.cost[e.row * blk.n + e.col] += sign * e.value;
        if e.row != e.col {
            blk.cost[e.col * blk.n + e.row] += sign * e.value;
        }
    }
    let mut cf = vec![0.0; problem.free_vars()];
    for &(j, v) in &problem.objective().free {
        cf[j] += sign * v;
    }

    let mut lookup: Vec<HashMap<Vec<(usize, usize, i64)>, usize>> = vec![HashMap::new(); dims.len()];
    let mut f = Vec::with_capacity(problem.constraints().len());
    let mut b = Vec::with_capacity(problem.constraints().len());
    for (k, c) in problem.constraints().iter().enumerate() {
        let mut per_block: Vec<(usize, Vec<(usize, usize, f64)>)> = Vec::new();
        for e in &c.form.entries {
            match per_block.iter_mut().find(|(blk, _)| *blk == e.block) {
                Some((_, list)) => list.push((e.row, e.col, e.value)),
                None => per_block.push((e.block, vec![(e.row, e.col, e.value)])),
            }
        }
        for (j, mut list) in per_block {
            list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            // merge duplicate positions
            let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(list.len());
            for (r, cc, v) in list {
                match merged.last_mut() {
                    Some(last) if last.0 == r && last.1 == cc => last.2 += v,
                    _ => merged.push((r, cc, v)),
                }
            }
            merged.retain(|e| e.2 != 0.0);
            let Some(&(_, _, lead)) = merged.first() else { continue };
            let normalized: Vec<(usize, usize, f64)> = merged.iter().map(|&(r, cc, v)| (r, cc, v / lead)).collect();
            let blk = &mut blocks[j];
            let n = blk.n;
            let id = *lookup[j].entry(pattern_key(&normalized)).or_insert_with(|| {
                let mut dense = vec![0.0; n * n];
                for &(r, cc, v) in &normalized {
                    dense[r * n + cc] += v;
                    if r != cc {
                        dense[cc * n + r] += v;
                    }
                }
                blk.patterns.push(Pattern { entries: normalized.clone(), dense });
                blk.patterns.len() - 1
            });
            blk.terms.push(Term { constraint: k, pattern: id, scale: lead });
        }
        let mut fk: Vec<(usize, f64)> = Vec::new();
        for &(j, v) in &c.form.free {
            match fk.iter_mut().find(|(i, _)| *i == j) {
                Some(e) => e.1 += v,
                None => fk.push((j, v)),
            }
        }
        f.push(fk);
        b.push(c.rhs);
    }
    Prepared { blocks, m: b.len(), nf: problem.free_vars(), b, f, cf }
}

fn pattern_dot(p: &Pattern, x: &[f64], n: usize) -> f64 {
    p.entries.iter().map(|&(r, c, v)| if r == c { v * x[r * n + c] } else { v * (x[r * n + c] + x[c * n + r]) }).sum()
}

impl Prepared {
    /// `A(X) + F s`.
    fn apply(&self, x: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (blk, xb) in self.blocks.iter().zip(x) {
            let dots: Vec<f64> = blk.patterns.iter().map(|p| pattern_dot(p, xb, blk.n)).collect();
            for t in &blk.terms {
                out[t.constraint] += t.scale * dots[t.pattern];
            }
        }
        for (k, fk) in self.f.iter().enumerate() {
            out[k] += fk.iter().map(|&(j, v)| v * s[j]).sum::<f64>();
        }
        out
    }

    /// `Σ y_k A_k` restricted to each block.
    fn adjoint(&self, y: &[f64]) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut coef = vec![0.0; blk.patterns.len()];
                for t in &blk.terms {
                    coef[t.pattern] += t.scale * y[t.constraint];
                }
                let mut out = vec![0.0; blk.n * blk.n];
                for (p, c) in blk.patterns.iter().zip(coef) {
                    if c != 0.0 {
                        out.iter_mut().zip(&p.dense).for_each(|(o, d)| *o += c * d);
                    }
                }
                out
            })
            .collect()
    }

    fn adjoint_free(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nf];
        for (k, fk) in self.f.iter().enumerate() {
            for &(j, v) in fk {
                out[j] += v * y[k];
            }
        }
        out
    }

    fn schur(&self, x: &[Vec<f64>], zinv: &[Vec<f64>]) -> Vec<f64> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for ((blk, xb), zi) in self.blocks.iter().zip(x).zip(zinv) {
            let n = blk.n;
            let np = blk.patterns.len();
            if np == 0 {
                continue;
            }
            let g: Vec<Vec<f64>> = blk.patterns.iter().map(|p| matmul(&matmul(xb, &p.dense, n), zi, n)).collect();
            let mut t = vec![0.0; np * np];
            for (a, ga) in g.iter().enumerate() {
                for (c, pc) in blk.patterns.iter().enumerate() {
                    t[a * np + c] = pattern_dot(pc, ga, n);
                }
            }
            for (i, ti) in blk.terms.iter().enumerate() {
                let row = &t[ti.pattern * np..(ti.pattern + 1) * np];
                let base = ti.constraint * m;
                for tj in &blk.terms[i..] {
                    mat[base + tj.constraint] += ti.scale * tj.scale * row[tj.pattern];
                }
            }
        }
        // terms were visited in constraint order, so only the upper triangle is filled
        for k in 0..m {
            for l in k + 1..m {
                mat[l * m + k] = mat[k * m + l];
            }
        }
        mat
    }
}

fn sym_product(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut p = matmul(a, b, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (p[i * n + j] + p[j * n + i]);
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    p
}

/// Largest `α` with `L Lᵀ + α Δ ⪰ 0`, or infinity.
fn max_step(l: &[f64], delta: &[f64], n: usize) -> f64 {
    let lmin = if n == 1 { delta[0] / (l[0] * l[0]) } else { eig_symmetric(&whiten(l, delta, n), n).0[0] };
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct Factor {
    /// Cholesky factor of `D M D + reg I` with `D = diag(M)^{-1/2}`.
    chol: Vec<f64>,
    dscale: Vec<f64>,
    /// `M⁻¹ F` column-major (one column per free variable).
    w: Vec<Vec<f64>>,
    s_chol: Vec<f64>,
    /// Unregularized Schur matrix, kept for iterative refinement.
    schur: Vec<f64>,
}

/// `M⁻¹ r` from the factor of the Jacobi-scaled `D M D`.
fn scaled_solve(chol: &[f64], d: &[f64], r: &mut [f64]) {
    r.iter_mut().zip(d).for_each(|(a, b)| *a *= b);
    cholesky_solve(chol, d.len(), r);
    r.iter_mut().zip(d).for_each(|(a, b)| *a *= b);
}

const REFINEMENT_STEPS: usize = 3;

impl Factor {
    /// One pass of the block elimination for `M dy + F ds = r`, `Fᵀ dy = g`.
    fn eliminate(&self, p: &Prepared, mut r: Vec<f64>, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut ds = vec![0.0; p.nf];
        if p.nf > 0 {
            let mut t: Vec<f64> = (0..p.nf).map(|j| frobenius_dot(&self.w[j], &r) - g[j]).collect();
            cholesky_solve(&self.s_chol, p.nf, &mut t);
            ds = t;
            for (k, fk) in p.f.iter().enumerate() {
                r[k] -= fk.iter().map(|&(j, v)| v * ds[j]).sum::<f64>();
            }
        }
        scaled_solve(&self.chol, &self.dscale, &mut r);
        (r, ds)
    }

    fn solve(&self, p: &Prepared, r: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = p.m;
        let (mut dy, mut ds) = self.eliminate(p, r.to_vec(), g);
        for _ in 0..REFINEMENT_STEPS {
            let mut er: Vec<f64> = r.to_vec();
            for k in 0..m {
                let row = &self.schur[k * m..(k + 1) * m];
                er[k] -= row.iter().zip(&dy).map(|(a, b)| a * b).sum::<f64>();
                er[k] -= p.f[k].iter().map(|&(j, v)| v * ds[j]).sum::<f64>();
            }
            let mut eg: Vec<f64> = g.to_vec();
            for (k, fk) in p.f.iter().enumerate() {
                for &(j, v) in fk {
                    eg[j] -= v * dy[k];
                }
            }
            if inf_norm(&er).max(inf_norm(&eg)) == 0.0 {
                break;
            }
            let (cy, cs) = self.eliminate(p, er, &eg);
            dy.iter_mut().zip(&cy).for_each(|(a, b)| *a += b);
            ds.iter_mut().zip(&cs).for_each(|(a, b)| *a += b);
        }
        (dy, ds)
    }
}

struct Direction {
    dx: Vec<Vec<f64>>,
    dz: Vec<Vec<f64>>,
    dy: Vec<f64>,
    ds: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

struct State<'a> {
    p: &'a Prepared,
    x: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    y: Vec<f64>,
    s: Vec<f64>,
}

impl State<'_> {
    fn objectives(&self) -> (f64, f64) {
        let pobj: f64 = self.p.blocks.iter().zip(&self.x).map(|(b, x)| frobenius_dot(&b.cost, x)).sum::<f64>()
            + self.p.cf.iter().zip(&self.s).map(|(c, s)| c * s).sum::<f64>();
        let dobj: f64 = self.p.b.iter().zip(&self.y).map(|(b, y)| b * y).sum();
        (pobj, dobj)
    }

    fn direction(
        &self,
        factor: &Factor,
        zinv: &[Vec<f64>],
        rp: &[f64],
        rd: &[Vec<f64>],
        rf: &[f64],
        target: f64,
        corr: Option<&Direction>,
    ) -> Direction {
        let p = self.p;
        let h: Vec<Vec<f64>> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(j, blk)| {
                let n = blk.n;
                let mut t = vec![0.0; n * n];
                for i in 0..n {
                    t[i * n + i] = target;
                }
                if let Some(c) = corr {
                    let k = matmul(&c.dx[j], &c.dz[j], n);
                    t.iter_mut().zip(&k).for_each(|(a, b)| *a -= b);
                }
                let mut hb = sym_product(&t, &zinv[j], n);
                let xr = sym_product(&matmul(&self.x[j], &rd[j], n), &zinv[j], n);
                for ((a, x), r) in hb.iter_mut().zip(&self.x[j]).zip(&xr) {
                    *a -= x + r;
                }
                hb
            })
            .collect();
        let zero = vec![0.0; p.nf];
        let ah = p.apply(&h, &zero);
        let rhs: Vec<f64> = rp.iter().zip(&ah).map(|(a, b)| a - b).collect();
        let (dy, ds) = factor.solve(p, &rhs, rf);
        let aty = p.adjoint(&dy);
        let mut dx = Vec::with_capacity(p.blocks.len());
        let mut dz = Vec::with_capacity(p.blocks.len());
        for (j, blk) in p.blocks.iter().enumerate() {
            let n = blk.n;
            let dzb: Vec<f64> = rd[j].iter().zip(&aty[j]).map(|(r, a)| r - a).collect();
            let corr_x = sym_product(&matmul(&self.x[j], &aty[j], n), &zinv[j], n);
            let dxb: Vec<f64> = h[j].iter().zip(&corr_x).map(|(a, b)| a + b).collect();
            dx.push(dxb);
            dz.push(dzb);
        }
        Direction { dx, dz, dy, ds }
    }
}

fn factorize(p: &Prepared, x: &[Vec<f64>], zinv: &[Vec<f64>]) -> Option<Factor> {
    let m = p.m;
    let mat = p.schur(x, zinv);
    // Jacobi scaling first, so the regularization is relative per row
    let dscale: Vec<f64> = (0..m).map(|k| 1.0 / mat[k * m + k].max(f64::MIN_POSITIVE).sqrt()).collect();
    let mut scaled = mat.clone();
    for k in 0..m {
        for l in 0..m {
            scaled[k * m + l] *= dscale[k] * dscale[l];
        }
    }
    let mut reg = REGULARIZATION;
    let chol = loop {
        let mut a = scaled.clone();
        for k in 0..m {
            a[k * m + k] += reg;
        }
        if let Some(l) = cholesky(&a, m) {
            break l;
        }
        reg *= 100.0;
        if reg > 1e-4 {
            return None;
        }
    };
    let mut w = Vec::with_capacity(p.nf);
    for j in 0..p.nf {
        let mut col = vec![0.0; m];
        for (k, fk) in p.f.iter().enumerate() {
            col[k] = fk.iter().filter(|e| e.0 == j).map(|e| e.1).sum();
        }
        scaled_solve(&chol, &dscale, &mut col);
        w.push(col);
    }
    let mut s = vec![0.0; p.nf * p.nf];
    for a in 0..p.nf {
        for (k, fk) in p.f.iter().enumerate() {
            for &(j, v) in fk {
                s[a * p.nf + j] += w[a][k] * v;
            }
        }
    }
    for a in 0..p.nf {
        for b in a + 1..p.nf {
            let v = 0.5 * (s[a * p.nf + b] + s[b * p.nf + a]);
            s[a * p.nf + b] = v;
            s[b * p.nf + a] = v;
        }
    }
    let s_scale = (0..p.nf).map(|a| s[a * p.nf + a]).fold(0.0, f64::max).max(1e-300);
    for a in 0..p.nf {
        s[a * p.nf + a] += REGULARIZATION * s_scale;
    }
    let s_chol = if p.nf > 0 { cholesky(&s, p.nf)? } else { Vec::new() };
    Some(Factor { chol, dscale, w, s_chol, schur: mat })
}

/// Cholesky factor of `[A F][A F]ᵀ`, or `None` when the constraints are
/// numerically dependent.
fn gram_factor(p: &Prepared) -> Option<Vec<f64>> {
    let m = p.m;
    let mut g = vec![0.0; m * m];
    let mut unit = vec![0.0; m];
    for l in 0..m {
        unit[l] = 1.0;
        let col = p.apply(&p.adjoint(&unit), &p.adjoint_free(&unit));
        unit[l] = 0.0;
        for k in 0..m {
            g[k * m + l] = col[k];
        }
    }
    let scale = (0..m).map(|k| g[k * m + k]).fold(0.0, f64::max);
    let chol = cholesky(&g, m)?;
    let pivot_min = (0..m).map(|k| chol[k * m + k]).fold(f64::INFINITY, f64::min);
    (pivot_min * pivot_min > 1e-12 * scale).then_some(chol)
}

/// Solves `problem`; errors only on malformed input. Non-optimal outcomes
/// are reported through [`SdpSolution::status`] together with the last
/// iterate.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let p = prepare(problem);
    let total: usize = p.blocks.iter().map(|b| b.n).sum();

    let b_norm = inf_norm(&p.b);
    let c_norm = p.blocks.iter().map(|b| inf_norm(&b.cost)).fold(0.0, f64::max);
    let cf_norm = inf_norm(&p.cf);
    let a_norm = {
        let mut norms = vec![0.0f64; p.m];
        for blk in &p.blocks {
            for t in &blk.terms {
                norms[t.constraint] += t.scale * t.scale * frobenius_dot(&blk.patterns[t.pattern].dense, &blk.patterns[t.pattern].dense);
            }
        }
        norms.into_iter().map(f64::sqrt).collect::<Vec<_>>()
    };
    let nmax = p.blocks.iter().map(|b| b.n).max().unwrap_or(1) as f64;
    let xi = (0..p.m).map(|k| nmax.sqrt() * (1.0 + p.b[k].abs()) / (1.0 + a_norm[k])).fold(10f64.max(nmax.sqrt()), f64::max);
    let eta = a_norm.iter().copied().fold(c_norm.max(cf_norm), f64::max).max(10f64.max(nmax.sqrt()));

    let ident = |n: usize, v: f64| {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = v;
        }
        a
    };
    let mut st = State {
        p: &p,
        x: p.blocks.iter().map(|b| ident(b.n, xi)).collect(),
        z: p.blocks.iter().map(|b| ident(b.n, eta)).collect(),
        y: vec![0.0; p.m],
        s: vec![0.0; p.nf],
    };

    let sign = if problem.sense() == Sense::Minimize { 1.0 } else { -1.0 };
    let finish = |st: &State, status: SolveStatus, iterations: usize| -> SdpSolution {
        let (pobj, dobj) = st.objectives();
        let mut sol = SdpSolution {
            status,
            blocks: st.x.clone(),
            free: st.s.clone(),
            duals: st.y.iter().map(|v| sign * v).collect(),
            dual_slack: st.z.clone(),
            objective_primal: sign * pobj,
            objective_dual: sign * dobj,
            residuals: Residuals { primal_feas: f64::NAN, dual_feas: f64::NAN, gap: f64::NAN, relative_gap: f64::NAN },
            iterations,
        };
        sol.residuals = residuals(problem, &sol);
        sol
    };

    let gram = gram_factor(&p);
    let mut stalls = 0;
    for iter in 0..opts.max_iter {
        let ax = p.apply(&st.x, &st.s);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = p.adjoint(&st.y);
        let rd: Vec<Vec<f64>> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(j, blk)| blk.cost.iter().zip(&aty[j]).zip(&st.z[j]).map(|((c, a), z)| c - a - z).collect())
            .collect();
        let fty = p.adjoint_free(&st.y);
        let rf: Vec<f64> = p.cf.iter().zip(&fty).map(|(c, f)| c - f).collect();
        let (pobj, dobj) = st.objectives();

        let pinf = inf_norm(&rp) / (1.0 + b_norm);
        let dinf = rd.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max) / (1.0 + c_norm);
        let finf = inf_norm(&rf) / (1.0 + cf_norm);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pinf <= opts.tol && dinf.max(finf) <= opts.tol && rel_gap <= opts.tol {
            let sol = finish(&st, SolveStatus::Optimal, iter);
            if sol.residuals.within(opts.tol) {
                return Ok(sol);
            }
        }
        let xmax = st.x.iter().map(|x| inf_norm(x)).fold(0.0, f64::max);
        let ymax = inf_norm(&st.y);
        if xmax > BLOWUP * xi || ymax > BLOWUP * (1.0 + eta) || !(xmax.is_finite() && ymax.is_finite()) {
            return Ok(finish(&st, SolveStatus::Infeasible, iter));
        }

        let mut lx = Vec::with_capacity(p.blocks.len());
        let mut lz = Vec::with_capacity(p.blocks.len());
        for (j, blk) in p.blocks.iter().enumerate() {
            let (Some(a), Some(b)) = (cholesky(&st.x[j], blk.n), cholesky(&st.z[j], blk.n)) else {
                return Ok(finish(&st, SolveStatus::NumericalFailure, iter));
            };
            lx.push(a);
            lz.push(b);
        }
        let zinv: Vec<Vec<f64>> = p.blocks.iter().zip(&lz).map(|(b, l)| cholesky_inverse(l, b.n)).collect();
        let Some(factor) = factorize(&p, &st.x, &zinv) else {
            return Ok(finish(&st, SolveStatus::NumericalFailure, iter));
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for (j, blk) in p.blocks.iter().enumerate() {
                ap = ap.min(max_step(&lx[j], &d.dx[j], blk.n));
                ad = ad.min(max_step(&lz[j], &d.dz[j], blk.n));
            }
            (ap, ad)
        };

        let mu: f64 = st.x.iter().zip(&st.z).map(|(x, z)| frobenius_dot(x, z)).sum::<f64>() / total as f64;
        let pred = st.direction(&factor, &zinv, &rp, &rd, &rf, 0.0, None);
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff: f64 = (0..p.blocks.len())
            .map(|j| {
                let xa: Vec<f64> = st.x[j].iter().zip(&pred.dx[j]).map(|(x, d)| x + ap * d).collect();
                let za: Vec<f64> = st.z[j].iter().zip(&pred.dz[j]).map(|(z, d)| z + ad * d).collect();
                frobenius_dot(&xa, &za)
            })
            .sum::<f64>()
            / total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let project = |mut dir: Direction| -> Direction {
            // restore A(dX) + F ds = rp lost to the conditioning of Z⁻¹
            if let Some(g) = &gram {
                let adx = p.apply(&dir.dx, &dir.ds);
                let mut e: Vec<f64> = rp.iter().zip(&adx).map(|(r, a)| r - a).collect();
                cholesky_solve(g, p.m, &mut e);
                let cx = p.adjoint(&e);
                let cs = p.adjoint_free(&e);
                for (d, c) in dir.dx.iter_mut().zip(&cx) {
                    d.iter_mut().zip(c).for_each(|(a, b)| *a += b);
                }
                dir.ds.iter_mut().zip(&cs).for_each(|(a, b)| *a += b);
            }
            dir
        };
        let mut dir = project(st.direction(&factor, &zinv, &rp, &rd, &rf, sigma * mu, Some(&pred)));
        let (mut ap_max, mut ad_max) = steps(&dir);
        if ap_max.min(ad_max).min(1.0) < 0.5 * ap.min(ad) {
            // second-order term hurts: plain centering direction instead
            let alt = project(st.direction(&factor, &zinv, &rp, &rd, &rf, sigma.max(0.1) * mu, None));
            let (ap_alt, ad_alt) = steps(&alt);
            if ap_alt.min(ad_alt) > ap_max.min(ad_max) {
                (dir, ap_max, ad_max) = (alt, ap_alt, ad_alt);
            }
        }
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let trial = |base: &[Vec<f64>], d: &[Vec<f64>], mut a: f64| -> (Vec<Vec<f64>>, f64) {
            // shrink until every block factors; rounding can leave the cone
            loop {
                let next: Vec<Vec<f64>> =
                    base.iter().zip(d).map(|(b, d)| b.iter().zip(d).map(|(x, v)| x + a * v).collect()).collect();
                if a < 1e-12 || next.iter().zip(&p.blocks).all(|(m, blk)| cholesky(m, blk.n).is_some()) {
                    return (next, a);
                }
                a *= 0.8;
            }
        };
        let (x_next, ap) = trial(&st.x, &dir.dx, (gamma * ap_max).min(1.0));
        let (z_next, ad) = trial(&st.z, &dir.dz, (gamma * ad_max).min(1.0));
        if ap.max(ad) < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                return Ok(finish(&st, SolveStatus::NumericalFailure, iter));
            }
        } else {
            stalls = 0;
        }
        if ap >= 1e-12 {
            st.x = x_next;
            st.s.iter_mut().zip(&dir.ds).for_each(|(s, d)| *s += ap * d);
        }
        if ad >= 1e-12 {
            st.z = z_next;
            st.y.iter_mut().zip(&dir.dy).for_each(|(y, d)| *y += ad * d);
        }
    }
    Ok(finish(&st, SolveStatus::NumericalFailure, opts.max_iter))
}
