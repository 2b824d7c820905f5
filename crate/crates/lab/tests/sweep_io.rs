use std::fs;
use std::path::Path;

use circle_core::diophantine::golden_mean;
use circle_core::graphflow::DEFAULT_ETA_CAP;
use circle_core::maps::{Params, Perturbation};
use circle_core::normalform::{self, RegionTag};
use circle_core::DiophantineNumber;
use circle_lab::config::AlphaSpec;
use circle_lab::error::LabError;
use circle_lab::figures::render_svg;
use circle_lab::formats::PerturbationJson;
use circle_lab::sweep::{self, Pipeline, RunOptions, SweepSpec, CSV_HEADER};

fn spec(eps_list: Vec<f64>, pipeline: Pipeline) -> SweepSpec {
    let a = golden_mean();
    SweepSpec {
        eps_list,
        eta_range: [0.01, 0.2],
        eta_steps: 6,
        nu_range: [a - 0.05, a + 0.05],
        nu_steps: 7,
        alpha: AlphaSpec::default(),
        q: None,
        cutoff_k: None,
        pert_ref: None,
        pipeline,
        seed: 42,
        c2: None,
        eta_cap: None,
        trace_c_alpha: true,
    }
}

fn run(spec: &SweepSpec, out: &Path, opts: RunOptions) -> sweep::SweepSummary {
    sweep::run_sweep_to_file(spec, out, &opts).unwrap()
}

#[test]
fn identical_spec_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(vec![0.0, 1e-4], Pipeline::GateOnly);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run(&s, &a, RunOptions::default());
    run(&s, &b, RunOptions::default());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(sweep::calpha_path(&a)).unwrap(), fs::read(sweep::calpha_path(&b)).unwrap());
    // The in-memory sweep produces the same rows.
    let mem = sweep::run_sweep(&s).unwrap();
    assert_eq!(sweep::read_results(&a).unwrap(), mem);
}

#[test]
fn interrupted_and_resumed_equals_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(vec![0.0, 1e-4], Pipeline::GateOnly);
    let full = dir.path().join("full.csv");
    run(&s, &full, RunOptions::default());
    let total = s.cell_count();
    for n in [0, 1, 17, total - 1, total] {
        let part = dir.path().join(format!("part{n}.csv"));
        let first = run(&s, &part, RunOptions { resume: false, stop_after: Some(n) });
        assert_eq!(first.complete, n == total);
        let second = run(&s, &part, RunOptions { resume: true, stop_after: None });
        assert_eq!(second.resumed_from, n);
        assert!(second.complete);
        assert_eq!(fs::read(&part).unwrap(), fs::read(&full).unwrap(), "stopped after {n}");
    }
}

#[test]
fn resume_drops_a_torn_row() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(vec![1e-4], Pipeline::GateOnly);
    let (full, part) = (dir.path().join("full.csv"), dir.path().join("part.csv"));
    run(&s, &full, RunOptions::default());
    run(&s, &part, RunOptions { resume: false, stop_after: Some(10) });
    let mut text = fs::read_to_string(&part).unwrap();
    text.push_str("0.61,0.0");
    fs::write(&part, text).unwrap();
    let summary = run(&s, &part, RunOptions { resume: true, stop_after: None });
    assert_eq!(summary.resumed_from, 10);
    assert_eq!(fs::read(&part).unwrap(), fs::read(&full).unwrap());
}

#[test]
fn resume_against_other_spec_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let s = spec(vec![1e-4], Pipeline::GateOnly);
    run(&s, &out, RunOptions { resume: false, stop_after: Some(5) });
    let mut other = s.clone();
    other.seed += 1;
    let err = sweep::run_sweep_to_file(&other, &out, &RunOptions { resume: true, stop_after: None }).unwrap_err();
    assert!(matches!(err, LabError::SpecMismatch { .. }));
}

#[test]
fn perturbation_file_enters_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pert.json");
    let write = |p: &Perturbation| fs::write(&path, serde_json::to_string(&PerturbationJson::from(p)).unwrap()).unwrap();
    let mut s = spec(vec![1e-4], Pipeline::GateOnly);
    s.pert_ref = Some(path.clone());
    write(&Perturbation::sin_cos());
    let h1 = s.hash().unwrap();
    let default_hash = spec(vec![1e-4], Pipeline::GateOnly).hash().unwrap();
    assert_eq!(h1, default_hash, "hash depends on perturbation content, not on its path");
    write(&Perturbation::zero());
    assert_ne!(s.hash().unwrap(), h1);
}

#[test]
fn single_cell_sweep_equals_classify() {
    let a = golden_mean();
    for pipeline in [Pipeline::GateOnly, Pipeline::Full] {
        for (nu, eta, eps) in [(a, 0.1, 1e-4), (a + 0.001, 0.05, 2e-4), (a + 0.04, 0.02, 1e-4), (a, 0.3, 0.0)] {
            let mut s = spec(vec![eps], pipeline);
            s.eta_range = [eta, eta];
            s.eta_steps = 1;
            s.nu_range = [nu, nu];
            s.nu_steps = 1;
            let recs = sweep::run_sweep(&s).unwrap();
            assert_eq!(recs.len(), 1);
            let p = Params::new(nu, eta, eps, DiophantineNumber::golden()).unwrap();
            let direct = normalform::classify_region_with(&p, &Perturbation::sin_cos(), &s.region_config(), None);
            let r = &recs[0];
            assert_eq!(r.tag, Some(direct.tag), "{pipeline:?} {nu} {eta} {eps}");
            assert_eq!((r.in_thm1, r.in_thm2, r.on_c_alpha), (direct.in_thm1, direct.in_thm2, direct.on_c_alpha));
            assert_eq!(r.lambda, direct.lambda);
            assert_eq!((r.nu, r.eta, r.eps), (nu, eta, eps));
        }
    }
}

#[test]
fn empty_tag_filter_gives_header_only() {
    let recs = sweep::run_sweep(&spec(vec![1e-4], Pipeline::GateOnly)).unwrap();
    let mut buf = Vec::new();
    sweep::write_csv(&mut buf, &recs, Some(&[])).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    let mut buf = Vec::new();
    sweep::write_csv(&mut buf, &recs, Some(&[RegionTag::Thm1])).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",thm1_region,")));
    assert_eq!(text.lines().count() - 1, recs.iter().filter(|r| r.tag == Some(RegionTag::Thm1)).count());
}

#[test]
fn unperturbed_sweep_has_exact_c_alpha_and_gate_tags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eps0.csv");
    let mut s = spec(vec![0.0], Pipeline::GateOnly);
    s.eta_range = [0.01, 0.3];
    let summary = run(&s, &out, RunOptions::default());
    assert_eq!(summary.fatal, 0);
    assert_eq!(summary.calpha.len(), s.eta_steps);
    assert!(summary.calpha.iter().all(|c| c.nu_star == Some(golden_mean())));
    assert_eq!(sweep::read_calpha(&sweep::calpha_path(&out)).unwrap(), summary.calpha);
    let recs = sweep::read_results(&out).unwrap();
    for r in &recs {
        assert_eq!(r.in_thm1, r.eta <= DEFAULT_ETA_CAP, "at eps = 0 the gate only checks the cap");
        if r.in_thm1 {
            assert_eq!(r.tag, Some(RegionTag::Thm1));
        }
    }
    let svg = render_svg(&recs, &summary.calpha, golden_mean(), None);
    let line = svg.lines().find(|l| l.contains("class=\"c-alpha\"")).unwrap();
    let pts = line.split('"').nth(1).unwrap();
    let xs: Vec<&str> = pts.split(' ').map(|p| p.split(',').next().unwrap()).collect();
    assert_eq!(xs.len(), s.eta_steps);
    assert!(xs.iter().all(|x| *x == xs[0]), "C_alpha line is vertical");
}

#[test]
fn gate_admissibility_is_upward_closed_in_eta() {
    let a = golden_mean();
    let mut s = spec(vec![1e-5, 1e-4, 1e-3], Pipeline::GateOnly);
    s.eta_range = [0.001, DEFAULT_ETA_CAP];
    s.eta_steps = 80;
    s.nu_range = [a, a];
    s.nu_steps = 1;
    let recs = sweep::run_sweep(&s).unwrap();
    for eps in &s.eps_list {
        let flags: Vec<bool> = recs.iter().filter(|r| r.eps == *eps).map(|r| r.in_thm1).collect();
        if let Some(first) = flags.iter().position(|f| *f) {
            assert!(flags[first..].iter().all(|f| *f), "eps = {eps}");
        }
    }
}

#[test]
fn on_c_alpha_cells_lie_in_the_cone() {
    // Traced C_α points satisfy the cone inequality wherever η ≥ c₂ε.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let s = spec(vec![1e-5, 1e-4], Pipeline::GateOnly);
    let summary = run(&s, &out, RunOptions::default());
    let cfg = s.region_config();
    for c in &summary.calpha {
        let nu = c.nu_star.expect("trace succeeded");
        assert!(c.lambda.unwrap().abs() <= 1e-11);
        let p = Params::new(nu, c.eta, c.eps, DiophantineNumber::golden()).unwrap();
        if c.eta >= cfg.c2 * c.eps {
            assert!(normalform::in_thm2_region(&p, cfg.c2));
        }
    }
}

#[test]
fn spec_file_with_relative_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), serde_json::to_string(&PerturbationJson::from(&Perturbation::sin_cos())).unwrap())
        .unwrap();
    let text = r#"{ "eps_list": [1e-4], "eta_range": [0.05, 0.1], "eta_steps": 2,
                    "nu_range": [0.6, 0.62], "nu_steps": 2, "pipeline": "gate-only",
                    "seed": 3, "pert_ref": "p.json", "alpha": "golden" }"#;
    fs::write(dir.path().join("s.json"), text).unwrap();
    let s = SweepSpec::load(&dir.path().join("s.json")).unwrap();
    assert_eq!(s.pert_ref.as_deref(), Some(dir.path().join("p.json").as_path()));
    assert_eq!(sweep::run_sweep(&s).unwrap().len(), 4);
    let bad = text.replace("\"seed\": 3", "\"seed\": 3, \"extra\": 1");
    assert!(serde_json::from_str::<SweepSpec>(&bad).is_err());
}
