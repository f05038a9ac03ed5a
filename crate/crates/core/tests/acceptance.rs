//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use mur_core::deviation::{appleby_pointwise, err_cal, err_ent, err_max};
use mur_core::observables::{random_joint_measurement, random_observable, random_projective};
use mur_core::region::{
    build_sdp, offset, sample_weights, trace_boundary, Formulation, RegionSample, Sampling, SamplingScheme,
};
use mur_core::sdp::{residuals, solve};
use mur_core::transport::{
    binomial, enumerate_mccm, enumerate_mccm_growth, enumerate_mccm_ordered, transport_cost_dual, transport_cost_primal,
};
use mur_core::{
    ComplexMatrix, CostFunction, Distribution, ErrorMeasure, Execution, HermitianMatrix, JointMeasurement, Observable,
    ProblemInstance, SolveOptions, SolveStatus, State, WeightVector, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1, StandardNormal};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < budget_s, || format!("runtime {:.2} s exceeds {budget_s} s", elapsed.as_secs_f64()))
}

fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v: f64| v / s).collect()
}

fn random_distribution(n: usize, rng: &mut impl Rng) -> Distribution {
    Distribution::new(random_simplex(n, rng)).unwrap()
}

fn random_state(d: usize, rng: &mut impl Rng) -> State {
    let data: Vec<C64> = (0..d * d).map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let g = ComplexMatrix::new(d, d, data).unwrap();
    let gg = g.matmul(&g.adjoint()).unwrap();
    let h = HermitianMatrix::new(d, gg.data().to_vec()).unwrap();
    let t = h.trace();
    State::new(h.scaled(1.0 / t)).unwrap()
}

/// Square costs with zero diagonal and positive off-diagonal entries.
fn random_square_cost(d: usize, rng: &mut impl Rng) -> CostFunction {
    let rows = (0..d).map(|x| (0..d).map(|y| if x == y { 0.0 } else { rng.random_range(0.1..1.0) }).collect()).collect();
    CostFunction::new(rows).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let nx = rng.random_range(1..=6);
        let ny = rng.random_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..nx)
            .map(|x| (0..ny).map(|y| if nx == ny && x == y { 0.0 } else { rng.random_range(0.0..1.0) }).collect())
            .collect();
        let c = CostFunction::rectangular(rows).map_err(|e| e.to_string())?;
        let p = random_distribution(nx, &mut rng);
        let q = random_distribution(ny, &mut rng);
        let (primal, _) = transport_cost_primal(&c, &p, &q).map_err(|e| e.to_string())?;
        let family = enumerate_mccm(&c).map_err(|e| e.to_string())?;
        let (dual, _) = transport_cost_dual(&c, &p, &q, &family).map_err(|e| e.to_string())?;
        worst = worst.max((primal - dual).abs());
    }
    ensure(worst <= 1e-9, || format!("max |primal - dual| = {worst:.3e}"))?;
    within_budget(start.elapsed(), 10.0)?;
    Ok(format!("500 instances, max |primal - dual| = {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let families: Vec<_> = (1..=8).map(|d| enumerate_mccm(&CostFunction::discrete(d).unwrap()).unwrap()).collect();
    let mut worst_primal = 0.0f64;
    let mut worst_dual = 0.0f64;
    for _ in 0..500 {
        let d = rng.random_range(1..=8);
        let c = CostFunction::discrete(d).unwrap();
        let p = random_distribution(d, &mut rng);
        let q = random_distribution(d, &mut rng);
        let closed: f64 = 0.5 * p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let (primal, _) = transport_cost_primal(&c, &p, &q).map_err(|e| e.to_string())?;
        let (dual, _) = transport_cost_dual(&c, &p, &q, &families[d - 1]).map_err(|e| e.to_string())?;
        worst_primal = worst_primal.max((primal - closed).abs());
        worst_dual = worst_dual.max((dual - closed).abs());
    }
    ensure(worst_primal <= 1e-12 && worst_dual <= 1e-12, || {
        format!("max deviation from the closed form: primal {worst_primal:.3e}, dual {worst_dual:.3e}")
    })?;
    Ok(format!("500 pairs, max deviation primal {worst_primal:.1e}, dual {worst_dual:.1e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for k in 2..=5usize {
        let values: Vec<f64> = (0..k).map(|x| x as f64).collect();
        let c = CostFunction::quadratic(&values).map_err(|e| e.to_string())?;
        let ordered = enumerate_mccm_ordered(&c).map_err(|e| e.to_string())?;
        let growth = enumerate_mccm_growth(&c).map_err(|e| e.to_string())?;
        let traversal = enumerate_mccm(&c).map_err(|e| e.to_string())?;
        let bound = binomial(2 * k - 2, k - 1) as usize;
        ensure(ordered.len() <= bound, || format!("k={k}: {} schemes exceed the bound {bound}", ordered.len()))?;
        ensure(ordered.schemes() == growth.schemes(), || format!("k={k}: ordered path and tree growth differ"))?;
        ensure(traversal.schemes() == growth.schemes(), || format!("k={k}: default enumeration and tree growth differ"))?;
        counts.push(format!("k={k}: {}/{bound}", ordered.len()));
    }
    within_budget(start.elapsed(), 5.0)?;
    Ok(counts.join(", "))
}

/// `Σ_x tr(A'(x) A(y)) c(x, y)` per `y`, computed directly.
fn calibration_profile(aprime: &Observable, a: &Observable, c: &CostFunction) -> Vec<f64> {
    (0..a.outcomes())
        .map(|y| (0..aprime.outcomes()).map(|x| aprime.element(x).trace_product(a.element(y)) * c.get(x, y)).sum())
        .collect()
}

fn oracle_cal(aprime: &Observable, a: &Observable, c: &CostFunction) -> f64 {
    calibration_profile(aprime, a, c).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn oracle_ent(aprime: &Observable, a: &Observable, c: &CostFunction) -> f64 {
    calibration_profile(aprime, a, c).into_iter().sum::<f64>() / a.dim() as f64
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for d in 2..=4usize {
        for k in 0..200 {
            let a = random_projective(d, &mut rng).map_err(|e| e.to_string())?;
            let c = random_square_cost(d, &mut rng);
            let family = enumerate_mccm(&c).map_err(|e| e.to_string())?;
            let noise = random_observable(d, d, &mut rng).map_err(|e| e.to_string())?;
            // equal, slightly perturbed and generic approximations
            let (aprime, equal) = match k % 4 {
                0 => (a.clone(), true),
                1 => (Observable::mix(1e-3, &noise, &a).map_err(|e| e.to_string())?, false),
                _ => (noise, false),
            };
            let em = err_max(&aprime, &a, &c, &family).map_err(|e| e.to_string())?;
            let ec = err_cal(&aprime, &a, &c).map_err(|e| e.to_string())?;
            let ee = err_ent(&aprime, &a, &c).map_err(|e| e.to_string())?;
            ensure((ec - oracle_cal(&aprime, &a, &c)).abs() < 1e-12 && (ee - oracle_ent(&aprime, &a, &c)).abs() < 1e-12, || {
                format!("d={d}: calibration or entangled error disagrees with direct evaluation")
            })?;
            ensure(em >= ec - 1e-9 && ec >= ee - 1e-9, || format!("d={d}: ordering violated: M {em}, C {ec}, E {ee}"))?;
            let vanish = em <= 1e-8 && ec <= 1e-8 && ee <= 1e-8;
            let positive = em > 1e-8 && ec > 1e-8 && ee > 1e-8;
            ensure(if equal { vanish } else { positive }, || {
                format!("d={d}: faithfulness violated (equal = {equal}): M {em:.3e}, C {ec:.3e}, E {ee:.3e}")
            })?;
            checked += 1;
        }
    }
    within_budget(start.elapsed(), 30.0)?;
    Ok(format!("{checked} pairs over d = 2, 3, 4"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_slack = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let d = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        let mut vx: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut vy: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        vx.sort_by(f64::total_cmp);
        vy.sort_by(f64::total_cmp);
        let aprime = random_observable(d, m, &mut rng).and_then(|o| o.with_values(vx.clone())).map_err(|e| e.to_string())?;
        let a = random_projective(d, &mut rng).and_then(|o| o.with_values(vy.clone())).map_err(|e| e.to_string())?;
        let rho = random_state(d, &mut rng);
        let (lhs, rhs) = appleby_pointwise(&rho, &aprime, &a).map_err(|e| e.to_string())?;

        // independent evaluation of both sides
        let p: Vec<f64> = aprime.elements().iter().map(|e| e.trace_product(rho.matrix())).collect();
        let q: Vec<f64> = a.elements().iter().map(|e| e.trace_product(rho.matrix())).collect();
        let mean: f64 = q.iter().zip(&vy).map(|(w, y)| w * y).sum();
        let var: f64 = q.iter().zip(&vy).map(|(w, y)| w * (y - mean).powi(2)).sum();
        let var_prime: f64 = p.iter().zip(&vx).map(|(w, x)| w * (x - mean).powi(2)).sum();
        let lhs_oracle = (var_prime.sqrt() - var.sqrt()).powi(2);
        let rows = vx.iter().map(|x| vy.iter().map(|y| (x - y).powi(2)).collect()).collect();
        let c = CostFunction::rectangular(rows).map_err(|e| e.to_string())?;
        let family = enumerate_mccm(&c).map_err(|e| e.to_string())?;
        let pd = Distribution::new(p).map_err(|e| e.to_string())?;
        let qd = Distribution::new(q).map_err(|e| e.to_string())?;
        let (rhs_dual, _) = transport_cost_dual(&c, &pd, &qd, &family).map_err(|e| e.to_string())?;
        ensure((lhs - lhs_oracle).abs() < 1e-9, || format!("lhs {lhs} differs from direct evaluation {lhs_oracle}"))?;
        ensure((rhs - rhs_dual).abs() < 1e-9, || format!("rhs {rhs} differs from the dual route {rhs_dual}"))?;
        ensure(lhs <= rhs + 1e-9, || format!("bound violated: lhs {lhs} > rhs {rhs}"))?;
        worst_slack = worst_slack.max(lhs - rhs);
    }
    Ok(format!("1000 instances, max lhs - rhs = {worst_slack:.2e}"))
}

fn criterion_6() -> Outcome {
    let opts = SolveOptions::default();
    let mut worst_gap = 0.0f64;
    let mut worst_res = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut solves = 0;
    for (name, inst) in [("fourier d=2", ProblemInstance::fourier(2)), ("spin-1", ProblemInstance::spin1())] {
        let inst = inst.map_err(|e| e.to_string())?;
        let weights = sample_weights(inst.n(), Sampling { count: 11, scheme: SamplingScheme::Auto }).map_err(|e| e.to_string())?;
        for measure in ErrorMeasure::ALL {
            for w in &weights {
                let mut values = Vec::new();
                for form in [Formulation::Joint, Formulation::Multiplier] {
                    let problem = build_sdp(&inst, measure, form, w).map_err(|e| e.to_string())?;
                    let t = Instant::now();
                    let sol = solve(&problem, &opts).map_err(|e| e.to_string())?;
                    let elapsed = t.elapsed();
                    slowest = slowest.max(elapsed);
                    ensure(sol.status == SolveStatus::Optimal, || format!("{name} {measure} {form:?} w={:?}: {}", w.as_slice(), sol.status))?;
                    let r = residuals(&problem, &sol);
                    let res = r.primal_feas.max(r.dual_feas).max(r.relative_gap);
                    ensure(res <= 1e-7, || format!("{name} {measure} {form:?} w={:?}: residual {res:.3e}", w.as_slice()))?;
                    ensure((r.gap - (sol.objective_primal - sol.objective_dual).abs()).abs() <= 1e-12, || {
                        format!("{name} {measure} {form:?}: reported gap disagrees with the objectives")
                    })?;
                    within_budget(elapsed, 1.0)?;
                    worst_res = worst_res.max(res);
                    values.push(sol.value());
                    solves += 1;
                }
                let gap = (values[0] - values[1]).abs();
                ensure(gap <= 1e-6, || format!("{name} {measure} w={:?}: primal build {} vs dual build {}", w.as_slice(), values[0], values[1]))?;
                worst_gap = worst_gap.max(gap);
            }
        }
    }
    Ok(format!(
        "{solves} solves, max |primal - dual build| = {worst_gap:.1e}, max residual = {worst_res:.1e}, slowest {:.3} s",
        slowest.as_secs_f64()
    ))
}

/// Least-squares conic `a x² + b xy + c y² + d x + e y = 1` and the largest
/// first-order geometric distance of the points from it.
fn conic_fit(points: &[(f64, f64)]) -> ([f64; 5], f64) {
    let rows: Vec<[f64; 5]> = points.iter().map(|&(x, y)| [x * x, x * y, y * y, x, y]).collect();
    let mut ata = [[0.0; 5]; 5];
    let mut atb = [0.0; 5];
    for r in &rows {
        for i in 0..5 {
            atb[i] += r[i];
            for j in 0..5 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    let mut m = ata;
    let mut v = atb;
    for col in 0..5 {
        let piv = (col..5).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        v.swap(col, piv);
        for r in col + 1..5 {
            let f = m[r][col] / m[col][col];
            for k in col..5 {
                m[r][k] -= f * m[col][k];
            }
            v[r] -= f * v[col];
        }
    }
    let mut coef = [0.0; 5];
    for r in (0..5).rev() {
        let s: f64 = (r + 1..5).map(|k| m[r][k] * coef[k]).sum();
        coef[r] = (v[r] - s) / m[r][r];
    }
    let [a, b, c, d, e] = coef;
    let dist = |x: f64, y: f64| {
        let q = a * x * x + b * x * y + c * y * y + d * x + e * y - 1.0;
        let gx = 2.0 * a * x + b * y + d;
        let gy = b * x + 2.0 * c * y + e;
        q.abs() / (gx * gx + gy * gy).sqrt()
    };
    let worst = points.iter().map(|&(x, y)| dist(x, y)).fold(0.0, f64::max);
    (coef, worst)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let sampling = Sampling { count: 21, scheme: SamplingScheme::Angular };
    let mut notes = Vec::new();
    for d in 2..=4usize {
        let inst = ProblemInstance::fourier(d).map_err(|e| e.to_string())?;
        let delta = 1.0 - 1.0 / d as f64;
        let regions: Vec<RegionSample> = ErrorMeasure::ALL
            .iter()
            .map(|&m| trace_boundary(&inst, m, sampling, Execution::default()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for r in &regions {
            ensure(r.points.iter().all(|p| p.status == SolveStatus::Optimal), || format!("d={d} {}: failed solve", r.measure))?;
            let first = &r.points[0].epsilon;
            let last = &r.points[r.points.len() - 1].epsilon;
            let err = first[0].abs().max((first[1] - delta).abs()).max((last[0] - delta).abs()).max(last[1].abs());
            ensure(err <= 2e-3, || format!("d={d} {}: endpoints {first:?}, {last:?} vs (0, {delta})", r.measure))?;
        }
        let mut spread = 0.0f64;
        for k in 0..21 {
            for a in 0..3 {
                for b in a + 1..3 {
                    let (ea, eb) = (&regions[a].points[k].epsilon, &regions[b].points[k].epsilon);
                    spread = spread.max((ea[0] - eb[0]).abs()).max((ea[1] - eb[1]).abs());
                }
            }
        }
        ensure(spread <= 2e-3, || format!("d={d}: measures differ by {spread:.3e}"))?;
        if d == 2 {
            for r in &regions {
                let pts: Vec<(f64, f64)> = r.points.iter().map(|p| (p.epsilon[0], p.epsilon[1])).collect();
                let (coef, worst) = conic_fit(&pts);
                let disc = coef[1] * coef[1] - 4.0 * coef[0] * coef[2];
                ensure(worst < 1e-3, || format!("d=2 {}: conic residual {worst:.3e}", r.measure))?;
                ensure(disc < 0.0, || format!("d=2 {}: fitted conic is not an ellipse", r.measure))?;
                notes.push(format!("d=2 {} conic residual {worst:.1e}", r.measure));
            }
        }
        notes.push(format!("d={d} spread {spread:.1e}"));
    }
    within_budget(start.elapsed(), 120.0)?;
    Ok(notes.join(", "))
}

fn criterion_8() -> Outcome {
    let inst = ProblemInstance::spin1().map_err(|e| e.to_string())?;
    let weights = sample_weights(3, Sampling { count: 11, scheme: SamplingScheme::Auto }).map_err(|e| e.to_string())?;
    let joints: Vec<JointMeasurement> =
        (0..100).map(|s| random_joint_measurement(3, &[3, 3, 3], 800 + s)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let families = inst.families().unwrap();
    let mut min_slack = f64::INFINITY;
    let mut offsets = vec![vec![0.0; weights.len()]; 3];
    let mut boundary: Vec<Vec<Vec<f64>>> = vec![Vec::new(); 3];
    for (li, &measure) in ErrorMeasure::ALL.iter().enumerate() {
        // error tuples of the random joint measurements
        let mut tuples = Vec::with_capacity(joints.len());
        for r in &joints {
            let marginals = r.marginals().map_err(|e| e.to_string())?;
            let eps: Vec<f64> = (0..3)
                .map(|i| {
                    let (m, a, c) = (&marginals[i], &inst.observables()[i], &inst.costs()[i]);
                    match measure {
                        ErrorMeasure::Max => err_max(m, a, c, &families[i]).unwrap(),
                        ErrorMeasure::Calibration => oracle_cal(m, a, c),
                        ErrorMeasure::Entangled => oracle_ent(m, a, c),
                    }
                })
                .collect();
            tuples.push(eps);
        }
        for (k, w) in weights.iter().enumerate() {
            let pt = offset(&inst, measure, w).map_err(|e| format!("{measure} w={:?}: {e}", w.as_slice()))?;
            for eps in &tuples {
                let slack = w.dot(eps) - pt.b;
                ensure(slack >= -1e-7, || format!("{measure} w={:?}: random R beats the bound by {:.3e}", w.as_slice(), -slack))?;
                min_slack = min_slack.min(slack);
            }
            offsets[li][k] = pt.b;
            boundary[li].push(pt.epsilon.clone());
        }
    }
    for k in 0..weights.len() {
        let (bm, bc, be) = (offsets[0][k], offsets[1][k], offsets[2][k]);
        ensure(be <= bc + 1e-7 && bc <= bm + 1e-7, || format!("w={:?}: offsets not nested: E {be}, C {bc}, M {bm}", weights[k].as_slice()))?;
    }
    // boundary points of the smaller region lie in the larger one
    for (inner, outer) in [(0usize, 1usize), (1, 2)] {
        for eps in &boundary[inner] {
            for (k, w) in weights.iter().enumerate() {
                ensure(w.dot(eps) >= offsets[outer][k] - 1e-7, || {
                    format!("{} boundary point {eps:?} lies outside the {} region", ErrorMeasure::ALL[inner], ErrorMeasure::ALL[outer])
                })?;
            }
        }
    }
    Ok(format!("100 random R x 11 weights x 3 measures, min slack {min_slack:.2e}, offsets nested"))
}

fn criterion_9() -> Outcome {
    let mut checked = 0usize;
    let cases = [
        ("fourier d=3", ProblemInstance::fourier(3), Sampling { count: 21, scheme: SamplingScheme::Auto }),
        ("spin-1", ProblemInstance::spin1(), Sampling { count: 30, scheme: SamplingScheme::Auto }),
    ];
    for (name, inst, sampling) in cases {
        let inst = inst.map_err(|e| e.to_string())?;
        for measure in ErrorMeasure::ALL {
            let region = trace_boundary(&inst, measure, sampling, Execution::default()).map_err(|e| e.to_string())?;
            let pts: Vec<_> = region.points.iter().filter(|p| p.status == SolveStatus::Optimal).collect();
            ensure(pts.len() == region.points.len(), || format!("{name} {measure}: failed solves"))?;
            for p in &pts {
                for (i, (e, cap)) in p.epsilon.iter().zip(&region.caps).enumerate() {
                    ensure(*e <= cap + 1e-9, || format!("{name} {measure}: eps_{i} = {e} exceeds cap {cap}"))?;
                }
            }
            for a in &pts {
                for b in &pts {
                    for t in [0.25, 0.5, 0.75] {
                        let mix: Vec<f64> = a.epsilon.iter().zip(&b.epsilon).map(|(x, y)| t * x + (1.0 - t) * y).collect();
                        for h in &pts {
                            ensure(h.w.dot(&mix) >= h.b - 1e-7, || {
                                format!("{name} {measure}: mixture {mix:?} below the hyperplane of w={:?}", h.w.as_slice())
                            })?;
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{checked} mixture/hyperplane checks, caps respected"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("transport duality", criterion_1),
        ("discrete-metric closed form", criterion_2),
        ("mccm bounds", criterion_3),
        ("error ordering and faithfulness", criterion_4),
        ("pointwise moment bound", criterion_5),
        ("SDP strong duality", criterion_6),
        ("Fourier-pair reproduction", criterion_7),
        ("hyperplane soundness", criterion_8),
        ("convexity and caps", criterion_9),
    ];
    let _ = WeightVector::uniform(1);
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2} s] {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2} s] {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
