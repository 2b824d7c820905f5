//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (written straight to stderr so it survives output
//! capture) before asserting.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::Instant;

use circle_core::diophantine::golden_mean;
use circle_core::graphflow::{self, SolveOptions, DEFAULT_ETA_CAP};
use circle_core::maps::{self, Frame, Params, Perturbation};
use circle_core::normalform::{self, RegionTag};
use circle_core::russmann;
use circle_core::smalldiv::{self, DifferenceProblem};
use circle_core::{Complex64, DiophantineNumber, TrigPoly};
use circle_lab::config::AlphaSpec;
use circle_lab::sweep::{self, Pipeline, RunOptions, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    ok: bool,
    what: String,
}

fn check(ok: bool, what: impl Into<String>) -> Check {
    Check { ok, what: what.into() }
}

fn report(n: u32, title: &str, result: Result<Vec<Check>, String>) {
    let (ok, detail) = match &result {
        Ok(checks) => {
            let ok = checks.iter().all(|c| c.ok);
            let parts: Vec<String> =
                checks.iter().map(|c| if c.ok { c.what.clone() } else { format!("FAILED {}", c.what) }).collect();
            (ok, parts.join("; "))
        }
        Err(e) => (false, format!("error: {e}")),
    };
    let line = format!("acceptance criterion {n} ({title}): {} | {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{line}");
}

fn params(nu: f64, eta: f64, eps: f64) -> Params {
    Params::new(nu, eta, eps, DiophantineNumber::golden()).unwrap()
}

/// `f = sin θ (1 + ρ/2)`, `g = cos θ`.
fn rho_pert() -> Perturbation {
    Perturbation::new(
        &[(0, TrigPoly::sin_mode(1, 1, 1.0)), (1, TrigPoly::sin_mode(1, 1, 0.5))],
        &[(0, TrigPoly::cos_mode(1, 1, 1.0))],
    )
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

#[test]
fn criterion_1_unperturbed_exactness() {
    report(1, "unperturbed exactness", (|| {
        let a = golden_mean();
        let mut checks = Vec::new();
        for eta in [0.05, 0.1, 0.3] {
            for nu in [a, a + 0.01] {
                let p = params(nu, eta, 0.0);
                let pert = rho_pert();
                // The default cap 1/(2π) excludes η = 0.3; at ε = 0 it plays no role.
                let gt = graphflow::solve_invariant_circle_with(&p, &pert, eta / 6.0, &SolveOptions::new(1e-14), 0.5)
                    .map_err(e)?;
                let sup = gt.graph.sup_norm();
                checks.push(check(
                    gt.residual <= 1e-13 && sup <= 1e-13,
                    format!("eta {eta} dnu {:.2}: gt residual {:.1e}, |phi| {:.1e}", nu - a, gt.residual, sup),
                ));
                let (tc, _) = russmann::solve_translated_curve(&p, &pert, None).map_err(e)?;
                let tau = 2.0 * PI * eta * (nu - a);
                let (g, h) = (tc.gamma.sup_norm(), tc.h.periodic_part().sup_norm());
                checks.push(check(
                    g == 0.0 && h == 0.0 && tc.defect <= 1e-12 && (tc.lambda - tau).abs() <= 1e-12,
                    format!(
                        "russmann |gamma| {g:.1e} |h-id| {h:.1e} defect {:.1e} |lambda-tau| {:.1e}",
                        tc.defect,
                        (tc.lambda - tau).abs()
                    ),
                ));
            }
        }
        Ok(checks)
    })());
}

#[test]
fn criterion_2_theorem_1_reproduction() {
    report(2, "graph transform at desk scale", (|| {
        let (eps, eta) = (1e-4, 0.1);
        let k = eta / 6.0;
        let p = params(golden_mean(), eta, eps);
        let pert = rho_pert();
        let mut checks = Vec::new();
        let gate = graphflow::gate(&p, &pert, k);
        checks.push(check(gate.admissible, format!("gate admissible (margin {:.3e})", gate.margin)));
        let c_formula = (-TAU * eta).exp() + eps * pert.a_g + TAU * k + eps * k * pert.a_f;
        let c = graphflow::analytic_contraction(&p, &pert, k);
        checks.push(check((c - c_formula).abs() <= 1e-15 && c < 1.0, format!("C = {c:.6}")));
        let mc = graphflow::measure_contraction(&p, &pert, k, 512, 24).map_err(e)?;
        checks.push(check(
            mc.empirical <= c,
            format!("empirical ratio {:.6} over {} pairs", mc.empirical, mc.pairs),
        ));
        let sol = graphflow::solve_invariant_circle(&p, &pert, k, 1e-12).map_err(e)?;
        checks.push(check(sol.residual <= 1e-10, format!("Q residual {:.2e}", sol.residual)));
        let mut rng = ChaCha8Rng::seed_from_u64(0xba51_2024);
        let mut worst = 0usize;
        let mut missed = 0usize;
        for _ in 0..100 {
            let mut z = (rng.gen_range(0.0..TAU), rng.gen_range(-1.0..=1.0));
            let mut hit = None;
            for n in 0..=500 {
                if graphflow::vertical_distance(&sol.graph, z) <= 1e-6 {
                    hit = Some(n);
                    break;
                }
                z = maps::eval_q(&p, &pert, &Frame::Raw, z).map_err(e)?;
            }
            match hit {
                Some(n) => worst = worst.max(n),
                None => missed += 1,
            }
        }
        checks.push(check(missed == 0, format!("100 seeds within 1e-6 after at most {worst} iterates ({missed} missed)")));
        Ok(checks)
    })());
}

/// Smallest admissible `η` with the gate maximized over a log grid of `k`
/// (independent of the `k = η/6` choice inside `eta_min`).
fn eta_min_over_k(eps: f64, a: f64) -> f64 {
    let ok = |eta: f64| {
        (0..400).any(|i| {
            let k = eta * 10f64.powf(-4.0 + 4.0 * i as f64 / 399.0);
            graphflow::gate_raw(eps, eta, a, k, DEFAULT_ETA_CAP).admissible
        })
    };
    let (mut lo, mut hi) = (0.0, DEFAULT_ETA_CAP);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn criterion_3_sqrt_eps_scaling() {
    report(3, "sqrt(eps) scaling of the gate boundary", (|| {
        let a = rho_pert().a();
        let eps = [1e-6, 4e-6, 1.6e-5, 6.4e-5];
        let mut checks = Vec::new();
        let mins: Vec<f64> = eps
            .iter()
            .map(|&x| graphflow::eta_min(x, a, DEFAULT_ETA_CAP).ok_or("no admissible eta"))
            .collect::<Result<_, _>>()?;
        let brute: Vec<f64> = eps.iter().map(|&x| eta_min_over_k(x, a)).collect();
        for i in 0..3 {
            let r = mins[i + 1] / mins[i];
            let rb = brute[i + 1] / brute[i];
            checks.push(check(
                (1.8..=2.2).contains(&r) && (1.8..=2.2).contains(&rb),
                format!("ratio {:.0e}->{:.0e}: {r:.4} (k-scan {rb:.4})", eps[i], eps[i + 1]),
            ));
        }
        let agree = mins.iter().zip(&brute).all(|(m, b)| (m - b).abs() <= 0.01 * m);
        checks.push(check(agree, "eta_min agrees with the k-scan to 1%"));
        Ok(checks)
    })());
}

#[test]
fn criterion_4_russmann_solver() {
    report(4, "Russmann solver", (|| {
        let pert = Perturbation::sin_cos();
        let a = golden_mean();
        let eta = 0.1;
        let mut checks = Vec::new();
        for eps in [1e-5, 1e-4, 1e-3] {
            let p = params(a, eta, eps);
            let (tc, trace) = russmann::solve_translated_curve(&p, &pert, None).map_err(e)?;
            let d = trace.defects();
            let k = trace.quadratic_constant();
            let tail_ok = d.windows(2).filter(|w| w[0] < 1e-3 && w[1] > 1e-13).all(|w| k.is_some_and(|k| w[1] <= k * w[0] * w[0]));
            checks.push(check(
                tc.defect <= 1e-9 && tail_ok && k.map_or(true, f64::is_finite),
                format!("eps {eps:.0e}: defect {:.1e}, K {:?}, {} its", tc.defect, k.map(|k| (k * 1e3).round() / 1e3), trace.iterations()),
            ));
            let tau = 2.0 * PI * eta * (p.nu - a);
            checks.push(check((tc.lambda - tau).abs() <= 10.0 * eps, format!("|lambda-tau| {:.2e}", (tc.lambda - tau).abs())));
            let s = russmann::dlambda_dnu(&p, &pert, 1e-6).map_err(e)?;
            let rel = (s / (TAU * eta) - 1.0).abs();
            checks.push(check(rel <= 0.1, format!("dlambda/dnu {s:.6} ({:.2}% off 2 pi eta)", 100.0 * rel)));
            let rot = tc.tangential_rotation(&pert, 4000).map_err(e)?;
            checks.push(check((rot.value - a).abs() <= 1e-8, format!("rotation - alpha {:.1e}", rot.value - a)));
        }
        Ok(checks)
    })());
}

#[test]
fn criterion_5_c_alpha_curve() {
    report(5, "C_alpha curve", (|| {
        // g has nonzero mean so that ν* − α is first order in ε.
        let pert = Perturbation::new(
            &[(0, TrigPoly::sin_mode(1, 1, 1.0))],
            &[(0, &TrigPoly::cos_mode(1, 1, 1.0) + &TrigPoly::constant(1, 0.5))],
        );
        let a = golden_mean();
        let mut checks = Vec::new();
        let mut ks = Vec::new();
        for eps in [1e-5, 3e-5, 1e-4] {
            let pt = russmann::find_c_alpha(&params(a, 0.1, eps), &pert, (a - 0.01, a + 0.01)).map_err(e)?;
            let off = (pt.nu_star - a).abs();
            checks.push(check(
                pt.curve.lambda.abs() <= 1e-11 && off <= pt.k * eps * (1.0 + 1e-12),
                format!("eps {eps:.0e}: |lambda| {:.1e}, nu*-alpha {:.3e}, K {:.4}", pt.curve.lambda.abs(), pt.nu_star - a, pt.k),
            ));
            let rot = pt.curve.tangential_rotation(&pert, 4000).map_err(e)?;
            checks.push(check((rot.value - a).abs() <= 1e-8, format!("rotation - alpha {:.1e}", rot.value - a)));
            ks.push(pt.k);
        }
        let mut sorted = ks.clone();
        sorted.sort_by(f64::total_cmp);
        let med = sorted[1];
        let spread = ks.iter().map(|k| (k / med - 1.0).abs()).fold(0.0, f64::max);
        checks.push(check(spread <= 0.3, format!("K within {:.2}% of its median", 100.0 * spread)));
        Ok(checks)
    })());
}

#[test]
fn criterion_6_normal_form() {
    report(6, "normal form", (|| {
        let (eta, eps) = (0.02, 1e-4);
        let p = params(golden_mean(), eta, eps);
        let pert = Perturbation::sin_cos();
        let (tc, _) = russmann::solve_translated_curve(&p, &pert, None).map_err(e)?;
        let lm = normalform::localize(&p, &pert, &tc, 4).map_err(e)?;
        let nf = normalform::reduce(&lm, &p.alpha, 4).map_err(e)?;
        let mut checks = Vec::new();
        let worst = (0..=4)
            .map(|i| nf.reduced.a[i].nonconstant_norm().max(nf.reduced.b[i].nonconstant_norm()))
            .fold(0.0, f64::max);
        checks.push(check(worst <= 1e-10, format!("nonconstant part of orders <= 4: {worst:.1e}")));
        let m = 1024;
        let mean_log = lm.b(1).sample_real(m).iter().map(|v| v.ln()).sum::<f64>() / m as f64;
        let b1 = nf.beta_bar[0];
        checks.push(check((b1 - mean_log.exp()).abs() <= 1e-12, format!("|b1 - exp mean log B1| {:.1e}", (b1 - mean_log.exp()).abs())));
        let x = TAU * eta;
        let gap = (b1 - (1.0 - x + 0.5 * x * x)).abs();
        let slack = 5.0 * eps + 10.0 * eta.powi(3);
        checks.push(check(gap <= slack, format!("|b1 - (1 - 2 pi eta + 2 pi^2 eta^2)| {gap:.2e} <= {slack:.2e}")));
        let mut rng = ChaCha8Rng::seed_from_u64(0x00f0_4a11);
        let pts: Vec<(f64, f64)> = (0..10_000).map(|_| (rng.gen_range(0.0..TAU), rng.gen_range(-0.1..=0.1))).collect();
        let rt = nf.round_trip_error(&pts).map_err(e)?;
        checks.push(check(rt <= 1e-9, format!("round trip on 1e4 points {rt:.1e}")));
        let com = nf.commutation_error(&pert, &pts).map_err(e)?;
        checks.push(check(com <= 1e-9, format!("commutation on |y| <= 0.1 {com:.1e}")));
        Ok(checks)
    })());
}

#[test]
fn criterion_7_theorem_2_enlargement() {
    report(7, "theorem 2 enlargement", (|| {
        let a = golden_mean();
        let eps = 1e-4;
        let eta = 20.0 * eps;
        let pert = Perturbation::sin_cos();
        let mut checks = Vec::new();

        let p = params(a, eta, eps);
        let r = normalform::classify_region(&p, &pert);
        checks.push(check(
            !r.in_thm1 && r.tag == RegionTag::Thm2,
            format!("cell (alpha, {eta}, {eps}) gate {} tag {}", r.in_thm1, r.tag.name()),
        ));
        let nf = normalform::normal_form(&p, &pert, 4).map_err(e)?;
        let res = normalform::verify_circle_in_region(&p, &pert, &nf).map_err(e)?;
        checks.push(check(res <= 1e-8, format!("verify_circle residual {res:.1e}")));

        let ca = russmann::find_c_alpha(&p, &pert, (a - 1e-3, a + 1e-3)).map_err(e)?;
        let ps = params(ca.nu_star, eta, eps);
        let nfs = normalform::normal_form(&ps, &pert, 4).map_err(e)?;
        let v = normalform::verify_circle_detailed(&ps, &pert, &nfs, &Default::default(), 512).map_err(e)?;
        let (tc, _) = russmann::solve_translated_curve(&ps, &pert, None).map_err(e)?;
        let s = maps::russ_offset(&ps);
        let gap = (0..512)
            .map(|j| {
                let t = TAU * (j as f64 + 0.5) / 512.0;
                (v.raw_graph.eval_real(t) - (tc.gamma.eval_real(t) + s)).abs()
            })
            .fold(0.0, f64::max);
        checks.push(check(gap <= 1e-8, format!("on C_alpha circle vs Russmann curve {gap:.1e}")));

        let spec = SweepSpec {
            eps_list: vec![eps],
            eta_range: [0.01, 0.2],
            eta_steps: 50,
            nu_range: [a - 0.05, a + 0.05],
            nu_steps: 50,
            alpha: AlphaSpec::default(),
            q: None,
            cutoff_k: None,
            pert_ref: None,
            pipeline: Pipeline::GateOnly,
            seed: 0,
            c2: None,
            eta_cap: None,
            trace_c_alpha: true,
        };
        let dir = tempfile::tempdir().map_err(e)?;
        let out = dir.path().join("sweep.csv");
        let t0 = Instant::now();
        let summary = sweep::run_sweep_to_file(&spec, &out, &RunOptions::default()).map_err(e)?;
        let secs = t0.elapsed().as_secs_f64();
        let recs = sweep::read_results(&out).map_err(e)?;
        let dnu = 0.1 / 49.0;
        let slope = TAU.sqrt();
        let edges = sweep::cone_edges(&recs);
        let mut worst: f64 = 0.0;
        for edge in &edges {
            let half = edge.eta / slope;
            let left = (a - half).max(spec.nu_range[0]);
            let right = (a + half).min(spec.nu_range[1]);
            worst = worst.max((edge.nu_left - left).abs()).max((edge.nu_right - right).abs());
        }
        checks.push(check(
            edges.len() == 50 && worst <= dnu && summary.fatal == 0,
            format!("cone edges on {} rows within {:.2} cells", edges.len(), worst / dnu),
        ));
        let inside = summary.calpha.iter().all(|c| {
            c.nu_star.is_some_and(|nu| c.lambda.unwrap_or(1.0).abs() <= 1e-11 && normalform::in_thm2_region(&params(nu, c.eta, eps), spec.region_config().c2))
        });
        checks.push(check(inside && summary.calpha.len() == 50, "traced C_alpha inside the cone"));
        checks.push(check(secs <= 600.0, format!("50x50 sweep in {secs:.1} s")));
        Ok(checks)
    })());
}

fn random_rhs(rng: &mut ChaCha8Rng, n: usize) -> TrigPoly {
    let mut g = TrigPoly::zero(n);
    for _ in 0..rng.gen_range(1..=4) {
        let k = rng.gen_range(1..=n / 2);
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        g.set_real_mode(k, g.coeff(k as isize) + c);
    }
    g
}

fn max_coeff_gap(x: &TrigPoly, y: &TrigPoly) -> f64 {
    let n = x.order().max(y.order()) as isize;
    (-n..=n).map(|k| (x.coeff(k) - y.coeff(k)).norm()).fold(0.0, f64::max)
}

#[test]
fn criterion_8_small_divisor_suite() {
    report(8, "small-divisor suite", (|| {
        // Fresh problems: the frozen constant was calibrated on a different seed.
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_97ed);
        let alpha = DiophantineNumber::golden();
        let n = 32;
        let (mut holds, mut worst_res, mut worst_margin) = (0, 0.0f64, f64::INFINITY);
        let (mut lin, mut equi) = (0.0f64, 0.0f64);
        for i in 0..100 {
            let (a, b) = if i % 2 == 0 {
                (1.0, 1.0)
            } else {
                let beta: f64 = rng.gen_range(0.5..0.99);
                (beta.powi(rng.gen_range(2..=4)), beta)
            };
            let g = random_rhs(&mut rng, n);
            let (s, sigma) = (rng.gen_range(0.05..0.3), rng.gen_range(0.05..0.3));
            let sol = smalldiv::solve_difference(&DifferenceProblem::new(a, b, g.clone(), alpha.clone())).map_err(e)?;
            let bound = sol.norm_bound(s, sigma);
            holds += bound.holds() as usize;
            worst_margin = worst_margin.min(bound.margin());
            worst_res = worst_res.max(sol.residual);

            let g2 = random_rhs(&mut rng, n);
            let s2 = smalldiv::solve_difference(&DifferenceProblem::new(a, b, g2.clone(), alpha.clone())).map_err(e)?;
            let s12 = smalldiv::solve_difference(&DifferenceProblem::new(a, b, &g + &g2, alpha.clone())).map_err(e)?;
            lin = lin.max(max_coeff_gap(&s12.f, &(&sol.f + &s2.f))).max((s12.mu - sol.mu - s2.mu).abs());

            let beta = rng.gen_range(0.0..TAU);
            let sr = smalldiv::solve_difference(&DifferenceProblem::new(a, b, g.compose_rotation(beta), alpha.clone())).map_err(e)?;
            equi = equi.max(max_coeff_gap(&sr.f, &sol.f.compose_rotation(beta)));
        }
        Ok(vec![
            check(holds == 100, format!("bound holds on {holds}/100 (min margin {worst_margin:.3})")),
            check(lin <= 1e-13, format!("linearity {lin:.1e}")),
            check(equi <= 1e-13, format!("rotation equivariance {equi:.1e}")),
            check(worst_res <= 1e-11, format!("max accepted residual {worst_res:.1e}")),
        ])
    })());
}
