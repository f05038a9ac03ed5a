//! Dense two-phase tableau simplex for the transportation LP.

use super::{check_sizes, Coupling, CostFunction, Distribution, PricingScheme};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Optimal plan together with the pricing scheme read off the final basis.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub cost: f64,
    pub plan: Coupling,
    /// Optimal dual scheme, normalized by `Φ(0) = 0`.
    pub scheme: PricingScheme,
    pub dual_cost: f64,
}

/// Minimal transport cost and an optimal (vertex) coupling.
pub fn transport_cost_primal(c: &CostFunction, p: &Distribution, q: &Distribution) -> Result<(f64, Coupling)> {
    let s = transport_solve(c, p, q)?;
    Ok((s.cost, s.plan))
}

/// Solves the transportation LP and certifies the result against the dual
/// scheme taken from the optimal basis.
pub fn transport_solve(c: &CostFunction, p: &Distribution, q: &Distribution) -> Result<TransportSolution> {
    check_sizes(c, p, q)?;
    let (nx, ny) = (c.nx(), c.ny());
    let n = nx * ny;
    let m = nx + ny - 1;
    let mut a = vec![0.0; m * n];
    let mut b = vec![0.0; m];
    for x in 0..nx {
        for y in 0..ny {
            a[x * n + x * ny + y] = 1.0;
        }
        b[x] = p.weights()[x];
    }
    // the last column constraint is implied by the others
    for y in 0..ny - 1 {
        for x in 0..nx {
            a[(nx + y) * n + x * ny + y] = 1.0;
        }
        b[nx + y] = q.weights()[y];
    }
    let cost: Vec<f64> = (0..n).map(|k| c.get(k / ny, k % ny)).collect();
    let lp = solve_standard_form(&a, &b, &cost, m, n)?;

    let joint: Vec<f64> = lp.x.iter().map(|v| v.max(0.0)).collect();
    let plan = Coupling::new(nx, ny, joint)?;
    let primal = plan.total_cost(c);
    let phi: Vec<f64> = lp.y[..nx].to_vec();
    let mut psi: Vec<f64> = lp.y[nx..].iter().map(|v| -v).collect();
    psi.push(0.0);
    let scheme = PricingScheme::new(phi, psi).normalized();
    let dual = scheme.value(p.weights(), q.weights());

    let tol = 1e-9 * (1.0 + c.max_abs());
    let viol = scheme.max_violation(c);
    if viol > tol || (primal - dual).abs() > tol {
        return Err(Error::Numerical(format!(
            "transport LP not certified: primal {primal}, dual {dual}, pricing violation {viol}"
        )));
    }
    Ok(TransportSolution { cost: primal, plan, scheme, dual_cost: dual })
}

pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    /// Multipliers with `Aᵀ y ≤ c` at optimality.
    pub y: Vec<f64>,
}

/// `min cᵀx  s.t.  A x = b, x ≥ 0` with `A` of full row rank (`m × n`,
/// row-major). Bland's rule keeps degenerate pivots from cycling.
pub(crate) fn solve_standard_form(a: &[f64], b: &[f64], c: &[f64], m: usize, n: usize) -> Result<LpSolution> {
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    let mut sign = vec![1.0; m];
    for i in 0..m {
        if b[i] < 0.0 {
            sign[i] = -1.0;
        }
        for j in 0..n {
            t[i * width + j] = sign[i] * a[i * n + j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = sign[i] * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()));

    // phase one: minimize the sum of artificials
    let phase1: Vec<f64> = (0..n + m).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    run_simplex(&mut t, &mut basis, &phase1, m, width, n + m)?;
    let infeas: f64 = basis.iter().enumerate().filter(|(_, &j)| j >= n).map(|(i, _)| t[i * width + n + m]).sum();
    if infeas > 1e-9 * scale {
        return Err(Error::Numerical(format!("transport LP reported infeasible (residual {infeas})")));
    }
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i * width + j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, m, width, i, j);
            }
        }
    }

    // phase two on structural columns only
    run_simplex(&mut t, &mut basis, c, m, width, n)?;

    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i * width + n + m];
        }
    }
    // y = c_Bᵀ B⁻¹; the artificial columns hold B⁻¹
    let mut y = vec![0.0; m];
    for (r, yr) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for (i, &j) in basis.iter().enumerate() {
            let cj = if j < n { c[j] } else { 0.0 };
            s += cj * t[i * width + n + r];
        }
        *yr = s * sign[r];
    }
    Ok(LpSolution { x, y })
}

fn run_simplex(t: &mut [f64], basis: &mut [usize], cost: &[f64], m: usize, width: usize, eligible: usize) -> Result<()> {
    let rhs = width - 1;
    let cmax = cost.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let max_iter = 50 * (width + m) * (width + m);
    for _ in 0..max_iter {
        // Bland: first column with negative reduced cost
        let mut entering = None;
        for j in 0..eligible {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for (i, &bj) in basis.iter().enumerate() {
                let cb = if bj < cost.len() { cost[bj] } else { 0.0 };
                if cb != 0.0 {
                    r -= cb * t[i * width + j];
                }
            }
            if r < -PIVOT_TOL * cmax {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + j];
            if aij > PIVOT_TOL {
                let ratio = t[i * width + rhs] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            return Err(Error::Numerical("transport LP is unbounded".into()));
        };
        pivot(t, basis, m, width, i, j);
    }
    Err(Error::Numerical("simplex iteration limit reached".into()))
}

fn pivot(t: &mut [f64], basis: &mut [usize], m: usize, width: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for k in 0..width {
        t[row * width + k] /= p;
    }
    for i in 0..m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f == 0.0 {
            continue;
        }
        for k in 0..width {
            t[i * width + k] -= f * t[row * width + k];
        }
        t[i * width + col] = 0.0;
    }
    basis[row] = col;
}
