//! Parameter-space sweeps over `(ε, η, ν)` with incremental, resumable
//! persistence.
//!
//! Cells are ordered `ε` (outer), `η`, `ν` (inner). Workers evaluate chunks of
//! cells in parallel; the calling thread is the only writer and appends rows
//! in cell order, so the CSV is byte-identical across thread counts and
//! across interrupted-then-resumed runs. A JSON sidecar next to the CSV
//! records the SHA-256 of the canonical spec plus perturbation; resuming
//! against a different spec is refused.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use circle_core::diophantine::{self, DiophantineNumber, DEFAULT_CUTOFF_K};
use circle_core::graphflow::{self, SolveOptions, DEFAULT_ETA_CAP};
use circle_core::maps::{Params, Perturbation};
use circle_core::normalform::{self, RegionConfig, RegionReport, RegionTag, DEFAULT_C2, DEFAULT_K};
use circle_core::russmann::{self, RussmannConfig, RussmannError, TranslatedCurve};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{load_perturbation, AlphaSpec};
use crate::error::LabError;
use crate::formats::PerturbationJson;

pub const CSV_HEADER: &str = "nu,eta,eps,region_tag,in_thm1,in_thm2,on_c_alpha,residual,lambda,error";
pub const CALPHA_HEADER: &str = "eps,eta,nu_star,lambda,k,status";
pub const THREADS_ENV: &str = "CIRCLE_LAB_THREADS";

/// Grid used for the residual of a certified circle in the full pipeline.
const RESIDUAL_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// Gate and region inequalities only, no solves per cell.
    GateOnly,
    /// Also solves for `λ` per cell and verifies the circle of tagged cells.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub eps_list: Vec<f64>,
    pub eta_range: [f64; 2],
    pub eta_steps: usize,
    pub nu_range: [f64; 2],
    pub nu_steps: usize,
    #[serde(default)]
    pub alpha: AlphaSpec,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default, rename = "K")]
    pub cutoff_k: Option<usize>,
    /// Perturbation JSON file; `f = sin θ`, `g = cos θ` when absent.
    #[serde(default)]
    pub pert_ref: Option<PathBuf>,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub eta_cap: Option<f64>,
    /// Trace `C_α` by continuation in `η` (default on).
    #[serde(default = "yes")]
    pub trace_c_alpha: bool,
}

fn yes() -> bool {
    true
}

impl SweepSpec {
    /// Loads a spec; a relative `pert_ref` is taken relative to the spec file.
    pub fn load(path: &Path) -> Result<SweepSpec, LabError> {
        let mut spec: SweepSpec = serde_json::from_str(&fs::read_to_string(path)?)?;
        if let (Some(file), Some(dir)) = (&spec.pert_ref, path.parent()) {
            if file.is_relative() {
                spec.pert_ref = Some(dir.join(file));
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.eps_list.is_empty() {
            return Err(LabError::Config("eps_list is empty".into()));
        }
        if self.eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(LabError::Config("eps values must be finite and non-negative".into()));
        }
        check_axis("eta", self.eta_range, self.eta_steps)?;
        check_axis("nu", self.nu_range, self.nu_steps)
    }

    pub fn etas(&self) -> Vec<f64> {
        axis(self.eta_range, self.eta_steps)
    }

    pub fn nus(&self) -> Vec<f64> {
        axis(self.nu_range, self.nu_steps)
    }

    pub fn cell_count(&self) -> usize {
        self.eps_list.len() * self.eta_steps * self.nu_steps
    }

    /// `(ν, η, ε)` of every cell in output order.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        let (etas, nus) = (self.etas(), self.nus());
        let mut out = Vec::with_capacity(self.cell_count());
        for &eps in &self.eps_list {
            for &eta in &etas {
                for &nu in &nus {
                    out.push((nu, eta, eps));
                }
            }
        }
        out
    }

    pub fn region_config(&self) -> RegionConfig {
        RegionConfig {
            c2: self.c2.unwrap_or(DEFAULT_C2),
            eta_cap: self.eta_cap.unwrap_or(DEFAULT_ETA_CAP),
            solve_lambda: self.pipeline == Pipeline::Full,
        }
    }

    pub fn alpha(&self) -> Result<DiophantineNumber, LabError> {
        let a = self.alpha.value()?;
        Ok(diophantine::certify(a, self.q.unwrap_or(1.0), self.cutoff_k.unwrap_or(DEFAULT_CUTOFF_K))?)
    }

    pub fn perturbation(&self) -> Result<(Perturbation, PerturbationJson), LabError> {
        let pert = load_perturbation(None, self.pert_ref.as_deref())?;
        let pj = PerturbationJson::from(&pert);
        Ok((pert, pj))
    }

    /// SHA-256 of the canonical spec JSON (without the file path) and the
    /// canonical perturbation JSON, as lowercase hex.
    pub fn hash(&self) -> Result<String, LabError> {
        let mut canon = self.clone();
        canon.pert_ref = None;
        let (_, pj) = self.perturbation()?;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&canon)?);
        h.update(b"\n");
        h.update(serde_json::to_vec(&pj)?);
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn check_axis(name: &str, range: [f64; 2], steps: usize) -> Result<(), LabError> {
    let [lo, hi] = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(LabError::Config(format!("{name}_range must satisfy lo <= hi")));
    }
    if steps == 0 || (steps == 1 && lo != hi) || (steps >= 2 && lo == hi) {
        return Err(LabError::Config(format!(
            "{name}_steps must be >= 2 on a proper range, or 1 on a single point"
        )));
    }
    Ok(())
}

fn axis(range: [f64; 2], steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![range[0]];
    }
    lin_axis(range[0], range[1], steps)
}

/// `n ≥ 2` equispaced points with both endpoints exact.
pub fn lin_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    v[n - 1] = hi;
    v
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub nu: f64,
    pub eta: f64,
    pub eps: f64,
    /// `None` when the cell could not be classified at all (fatal).
    pub tag: Option<RegionTag>,
    pub in_thm1: bool,
    pub in_thm2: bool,
    pub on_c_alpha: bool,
    pub residual: Option<f64>,
    pub lambda: Option<f64>,
    pub error: Option<String>,
}

impl CellRecord {
    pub fn from_report(r: &RegionReport, error: Option<String>) -> CellRecord {
        CellRecord {
            nu: r.nu,
            eta: r.eta,
            eps: r.eps,
            tag: Some(r.tag),
            in_thm1: r.in_thm1,
            in_thm2: r.in_thm2,
            on_c_alpha: r.on_c_alpha,
            residual: r.residual,
            lambda: r.lambda,
            error,
        }
    }

    fn fatal(nu: f64, eta: f64, eps: f64, msg: String) -> CellRecord {
        CellRecord {
            nu,
            eta,
            eps,
            tag: None,
            in_thm1: false,
            in_thm2: false,
            on_c_alpha: false,
            residual: None,
            lambda: None,
            error: Some(msg),
        }
    }

    pub fn is_fatal(&self) -> bool {
        self.tag.is_none()
    }

    pub fn tag_name(&self) -> &'static str {
        self.tag.map_or("error", |t| t.name())
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let err = self.error.as_deref().map(sanitize).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.nu,
            self.eta,
            self.eps,
            self.tag_name(),
            self.in_thm1 as u8,
            self.in_thm2 as u8,
            self.on_c_alpha as u8,
            opt(self.residual),
            opt(self.lambda),
            err
        )
    }

    pub fn parse_csv(line: &str) -> Result<CellRecord, LabError> {
        let f: Vec<&str> = line.splitn(10, ',').collect();
        if f.len() != 10 {
            return Err(LabError::Config(format!("bad result row `{line}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| LabError::Config(format!("bad number `{s}`")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(LabError::Config(format!("bad flag `{s}`"))),
        };
        let tag = match f[3] {
            "error" => None,
            t => Some(RegionTag::parse(t).ok_or_else(|| LabError::Config(format!("bad tag `{t}`")))?),
        };
        Ok(CellRecord {
            nu: num(f[0])?,
            eta: num(f[1])?,
            eps: num(f[2])?,
            tag,
            in_thm1: flag(f[4])?,
            in_thm2: flag(f[5])?,
            on_c_alpha: flag(f[6])?,
            residual: opt(f[7])?,
            lambda: opt(f[8])?,
            error: if f[9].is_empty() { None } else { Some(f[9].to_string()) },
        })
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c == ',' { ';' } else if c.is_control() { ' ' } else { c }).collect()
}

/// Immutable inputs shared by all cells.
#[derive(Debug, Clone)]
pub struct CellContext {
    pub alpha: DiophantineNumber,
    pub pert: Perturbation,
    pub region: RegionConfig,
    pub pipeline: Pipeline,
}

impl CellContext {
    pub fn from_spec(spec: &SweepSpec) -> Result<CellContext, LabError> {
        Ok(CellContext {
            alpha: spec.alpha()?,
            pert: spec.perturbation()?.0,
            region: spec.region_config(),
            pipeline: spec.pipeline,
        })
    }
}

/// Classifies one cell. Errors are stored in the record, never returned.
pub fn evaluate_cell(ctx: &CellContext, nu: f64, eta: f64, eps: f64) -> CellRecord {
    let p = match Params::new(nu, eta, eps, ctx.alpha.clone()) {
        Ok(p) => p,
        Err(e) => return CellRecord::fatal(nu, eta, eps, e.to_string()),
    };
    match ctx.pipeline {
        Pipeline::GateOnly => {
            CellRecord::from_report(&normalform::classify_region_with(&p, &ctx.pert, &ctx.region, None), None)
        }
        Pipeline::Full => full_cell(ctx, &p),
    }
}

fn full_cell(ctx: &CellContext, p: &Params) -> CellRecord {
    let mut errors = Vec::new();
    let lambda = if p.eps == 0.0 {
        None
    } else {
        match russmann::solve_translated_curve(p, &ctx.pert, None) {
            Ok((tc, _)) => Some(tc.lambda),
            Err(e) => {
                errors.push(format!("russmann: {e}"));
                None
            }
        }
    };
    let cfg = RegionConfig { solve_lambda: false, ..ctx.region };
    let mut report = normalform::classify_region_with(p, &ctx.pert, &cfg, lambda);
    report.residual = match report.tag {
        RegionTag::Thm1 => {
            let opts = SolveOptions { grid: RESIDUAL_GRID, tol: 1e-12, alt_starts: Vec::new() };
            graphflow::solve_invariant_circle_with(p, &ctx.pert, p.eta / 6.0, &opts, cfg.eta_cap)
                .map(|f| f.residual)
                .map_err(|e| errors.push(format!("graph transform: {e}")))
                .ok()
        }
        RegionTag::Thm2 | RegionTag::OnCAlpha if report.in_thm2 => normalform::normal_form(p, &ctx.pert, DEFAULT_K)
            .and_then(|nf| normalform::verify_circle_detailed(p, &ctx.pert, &nf, &cfg, RESIDUAL_GRID))
            .map(|v| v.residual)
            .map_err(|e| errors.push(format!("normal form: {e}")))
            .ok(),
        _ => None,
    };
    let error = if errors.is_empty() { None } else { Some(errors.join("; ")) };
    CellRecord::from_report(&report, error)
}

/// One point of the traced `C_α` curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CAlphaSample {
    pub eps: f64,
    pub eta: f64,
    pub nu_star: Option<f64>,
    pub lambda: Option<f64>,
    pub k: Option<f64>,
    pub status: String,
}

impl CAlphaSample {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.eps,
            self.eta,
            self.nu_star.map(|x| x.to_string()).unwrap_or_default(),
            opt(self.lambda),
            opt(self.k),
            sanitize(&self.status)
        )
    }

    pub fn parse_csv(line: &str) -> Result<CAlphaSample, LabError> {
        let f: Vec<&str> = line.splitn(6, ',').collect();
        if f.len() != 6 {
            return Err(LabError::Config(format!("bad C_alpha row `{line}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| LabError::Config(format!("bad number `{s}`")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        Ok(CAlphaSample {
            eps: num(f[0])?,
            eta: num(f[1])?,
            nu_star: opt(f[2])?,
            lambda: opt(f[3])?,
            k: opt(f[4])?,
            status: f[5].to_string(),
        })
    }
}

const BRACKET_TRIES: usize = 12;

/// Traces `ν*(η)` for one `ε` from the largest `η` downward; each root
/// seeds the bracket and the Newton guess of the next one. At `ε = 0` the
/// curve is `ν = α` exactly (`λ = τ ∝ ν − α`).
pub fn trace_c_alpha(ctx: &CellContext, eps: f64, etas: &[f64]) -> Vec<CAlphaSample> {
    let alpha = ctx.alpha.alpha();
    let mut order: Vec<f64> = etas.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(order.len());
    let cfg = RussmannConfig::default();
    let mut prev: Vec<f64> = Vec::new();
    let mut warm: Option<TranslatedCurve> = None;
    for eta in order {
        if eps == 0.0 {
            out.push(CAlphaSample { eps, eta, nu_star: Some(alpha), lambda: Some(0.0), k: Some(0.0), status: "exact".into() });
            continue;
        }
        let p0 = match Params::new(alpha, eta, eps, ctx.alpha.clone()) {
            Ok(p) => p,
            Err(e) => {
                out.push(failed(eps, eta, e.to_string()));
                continue;
            }
        };
        let center = match prev.as_slice() {
            [.., a, b] => b + (b - a),
            [b] => *b,
            [] => alpha,
        };
        let mut w = match prev.as_slice() {
            [.., a, b] => (4.0 * (b - a).abs()).max(1e-7),
            _ => (eps * ctx.pert.a()).max(1e-7),
        };
        let mut result = Err(RussmannError::InvalidInput("empty bracket"));
        for _ in 0..BRACKET_TRIES {
            result = russmann::find_c_alpha_with(&p0, &ctx.pert, (center - w, center + w), &cfg, warm.as_ref());
            match &result {
                Err(RussmannError::NoSignChange { .. }) => w *= 4.0,
                _ => break,
            }
        }
        match result {
            Ok(pt) => {
                prev.push(pt.nu_star);
                out.push(CAlphaSample {
                    eps,
                    eta,
                    nu_star: Some(pt.nu_star),
                    lambda: Some(pt.curve.lambda),
                    k: Some(pt.k),
                    status: "ok".into(),
                });
                warm = Some(pt.curve);
            }
            Err(e) => out.push(failed(eps, eta, e.to_string())),
        }
    }
    out
}

fn failed(eps: f64, eta: f64, msg: String) -> CAlphaSample {
    CAlphaSample { eps, eta, nu_star: None, lambda: None, k: None, status: msg }
}

/// In-memory sweep: one record per cell in output order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellRecord>, LabError> {
    spec.validate()?;
    let ctx = CellContext::from_spec(spec)?;
    let cells = spec.cells();
    Ok(thread_pool()?.install(|| cells.par_iter().map(|&(nu, eta, eps)| evaluate_cell(&ctx, nu, eta, eps)).collect()))
}

/// Rayon pool capped by `CIRCLE_LAB_THREADS` when it is set to a positive
/// integer.
pub fn thread_pool() -> Result<rayon::ThreadPool, LabError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            b = b.num_threads(n);
        }
    }
    b.build().map_err(|e| LabError::Config(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Stop after this many cells are on disk (simulates an interruption).
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    pub spec_hash: String,
    pub cells: usize,
    pub columns: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub cells_total: usize,
    /// Cells already on disk before this run.
    pub resumed_from: usize,
    pub written: usize,
    pub fatal: usize,
    pub complete: bool,
    pub calpha: Vec<CAlphaSample>,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    suffixed(out, ".meta.json")
}

pub fn calpha_path(out: &Path) -> PathBuf {
    suffixed(out, ".calpha.csv")
}

fn suffixed(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs the sweep into `out` (CSV), its sidecar and the `C_α` trace file.
pub fn run_sweep_to_file(spec: &SweepSpec, out: &Path, opts: &RunOptions) -> Result<SweepSummary, LabError> {
    spec.validate()?;
    let ctx = CellContext::from_spec(spec)?;
    let hash = spec.hash()?;
    let cells = spec.cells();
    let side = sidecar_path(out);

    let done = if opts.resume && out.exists() {
        let found: Sidecar = serde_json::from_str(&fs::read_to_string(&side)?)?;
        if found.spec_hash != hash {
            return Err(LabError::SpecMismatch { expected: hash, found: found.spec_hash });
        }
        truncate_to_complete_rows(out)?
    } else {
        let sc = Sidecar { spec_hash: hash, cells: cells.len(), columns: CSV_HEADER.into(), spec: spec.clone() };
        fs::write(&side, serde_json::to_string_pretty(&sc)? + "\n")?;
        fs::write(out, format!("{CSV_HEADER}\n"))?;
        0
    };
    if done > cells.len() {
        return Err(LabError::Config(format!("{} has {done} rows, spec has {} cells", out.display(), cells.len())));
    }

    let pool = thread_pool()?;
    let end = opts.stop_after.map_or(cells.len(), |n| n.clamp(done, cells.len()));
    let chunk = 8 * pool.current_num_threads().max(1);
    let mut w = BufWriter::new(OpenOptions::new().append(true).open(out)?);
    let mut fatal = 0;
    for block in cells[done..end].chunks(chunk) {
        let rows: Vec<CellRecord> =
            pool.install(|| block.par_iter().map(|&(nu, eta, eps)| evaluate_cell(&ctx, nu, eta, eps)).collect());
        for r in &rows {
            fatal += r.is_fatal() as usize;
            writeln!(w, "{}", r.to_csv())?;
        }
        w.flush()?;
    }
    drop(w);
    let complete = end == cells.len();

    let mut calpha = Vec::new();
    if complete {
        // Earlier rows may carry fatal cells from the interrupted run.
        fatal = read_results(out)?.iter().filter(|r| r.is_fatal()).count();
        if spec.trace_c_alpha {
            let etas = spec.etas();
            let per_eps: Vec<Vec<CAlphaSample>> =
                pool.install(|| spec.eps_list.par_iter().map(|&eps| trace_c_alpha(&ctx, eps, &etas)).collect());
            calpha = per_eps.into_iter().flatten().collect();
            let mut text = format!("{CALPHA_HEADER}\n");
            for s in &calpha {
                text.push_str(&s.to_csv());
                text.push('\n');
            }
            fs::write(calpha_path(out), text)?;
        }
    }
    Ok(SweepSummary { cells_total: cells.len(), resumed_from: done, written: end - done, fatal, complete, calpha })
}

/// Drops a trailing partial row and returns the number of complete rows.
fn truncate_to_complete_rows(out: &Path) -> Result<usize, LabError> {
    let text = fs::read_to_string(out)?;
    let keep = text.rfind('\n').map_or(0, |i| i + 1);
    if keep < text.len() {
        let f = OpenOptions::new().write(true).open(out)?;
        f.set_len(keep as u64)?;
    }
    let kept = &text[..keep];
    let mut lines = kept.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => Ok(lines.count()),
        None => {
            fs::write(out, format!("{CSV_HEADER}\n"))?;
            Ok(0)
        }
        Some(h) => Err(LabError::Config(format!("unexpected header `{h}` in {}", out.display()))),
    }
}

pub fn read_results(path: &Path) -> Result<Vec<CellRecord>, LabError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(LabError::Config(format!("{} is not a sweep result file", path.display()))),
    }
    lines.filter(|l| !l.is_empty()).map(CellRecord::parse_csv).collect()
}

pub fn read_calpha(path: &Path) -> Result<Vec<CAlphaSample>, LabError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CALPHA_HEADER => {}
        _ => return Err(LabError::Config(format!("{} is not a C_alpha trace", path.display()))),
    }
    lines.filter(|l| !l.is_empty()).map(CAlphaSample::parse_csv).collect()
}

/// Left and right `ν` edges of the `in_thm2` cells of one `(ε, η)` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeEdge {
    pub eps: f64,
    pub eta: f64,
    pub nu_left: f64,
    pub nu_right: f64,
}

/// Outermost `in_thm2` cells per `(ε, η)` row, rows in input order.
pub fn cone_edges(records: &[CellRecord]) -> Vec<ConeEdge> {
    let mut out: Vec<ConeEdge> = Vec::new();
    for r in records.iter().filter(|r| r.in_thm2) {
        match out.iter_mut().find(|e| e.eps == r.eps && e.eta == r.eta) {
            Some(e) => {
                e.nu_left = e.nu_left.min(r.nu);
                e.nu_right = e.nu_right.max(r.nu);
            }
            None => out.push(ConeEdge { eps: r.eps, eta: r.eta, nu_left: r.nu, nu_right: r.nu }),
        }
    }
    out
}

/// Writes `records` as CSV, keeping only tags in `filter` when given.
pub fn write_csv<W: Write>(mut w: W, records: &[CellRecord], filter: Option<&[RegionTag]>) -> Result<(), LabError> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let keep = match filter {
            None => true,
            Some(tags) => r.tag.is_some_and(|t| tags.contains(&t)),
        };
        if keep {
            writeln!(w, "{}", r.to_csv())?;
        }
    }
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[CellRecord], filter: Option<&[RegionTag]>) -> Result<(), LabError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(&mut w, records, filter)?;
    w.flush()?;
    Ok(())
}
