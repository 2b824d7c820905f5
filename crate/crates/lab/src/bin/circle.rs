use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use circle_core::diophantine;
use circle_core::graphflow::{self, SolveOptions};
use circle_core::math::angle_grid;
use circle_core::normalform::{self, RegionConfig, RegionTag, DEFAULT_K};
use circle_core::russmann;
use circle_lab::config::{Overrides, RunConfig, RunSetup};
use circle_lab::error::LabError;
use circle_lab::expr::eval_alpha;
use circle_lab::figures;
use circle_lab::formats::TrigPolyJson;
use circle_lab::sweep::{self, CellContext, Pipeline, RunOptions, SweepSpec};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "circle", about = "Invariant circles of dissipative twist maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Diophantine utilities.
    Dioph {
        #[command(subcommand)]
        cmd: DiophCmd,
    },
    /// Invariant circle by graph transform.
    SolveGt {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Lipschitz budget (default η/6).
        #[arg(long = "lip-k")]
        lip_k: Option<f64>,
        /// Also write the graph as `theta,rho` CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Translated curve by Newton iteration.
    Russmann {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Root ν* of λ(ν) = 0 in a bracket.
    CAlpha {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true)]
        bracket: String,
    },
    /// Order-k normal form around the translated curve.
    NormalForm {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Region tags on a grid, as CSV on stdout.
    Classify {
        #[command(flatten)]
        run: RunArgs,
        /// `nu=lo:hi:n,eta=lo:hi:n,eps=v`; each axis is a value or `lo:hi:n`.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "full")]
        pipeline: String,
    },
    /// Parameter-space sweep with resumable CSV output.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        resume: bool,
        /// Comma-separated tags kept in the SVG (all when absent).
        #[arg(long)]
        tags: Option<String>,
    },
}

#[derive(Subcommand)]
enum DiophCmd {
    /// Brute-force certificate γ = min k^q ‖kα‖ over 1 ≤ k ≤ K.
    Certify {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long = "K", default_value_t = diophantine::DEFAULT_CUTOFF_K)]
        cutoff_k: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, LabError> {
        match &self.config {
            Some(p) => RunConfig::load(p),
            None => Ok(RunConfig::default()),
        }
    }

    fn setup(&self) -> Result<RunSetup, LabError> {
        let ov = Overrides { nu: self.nu, eta: self.eta, eps: self.eps, alpha: self.alpha.clone() };
        self.config()?.resolve(&ov)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), LabError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, LabError> {
    match cli.cmd {
        Cmd::Dioph { cmd: DiophCmd::Certify { alpha, q, cutoff_k } } => {
            let d = diophantine::certify(eval_alpha(&alpha)?, q, cutoff_k)?;
            print_json(&json!({ "alpha": d.alpha(), "gamma": d.gamma(), "q": d.q(), "K": d.cutoff_k() }))?;
        }
        Cmd::SolveGt { run, tol, lip_k, csv } => {
            let s = run.setup()?;
            let k = lip_k.unwrap_or(s.k);
            let mut opts = SolveOptions::new(tol);
            if let Some(g) = s.grid {
                opts.grid = g;
            }
            let sol = graphflow::solve_invariant_circle_with(&s.params, &s.pert, k, &opts, s.eta_cap)?;
            let c = graphflow::analytic_contraction(&s.params, &s.pert, k);
            if let Some(path) = csv {
                let mut text = String::from("theta,rho\n");
                for (t, v) in angle_grid(sol.graph.grid_size()).iter().zip(sol.graph.values()) {
                    text.push_str(&format!("{t},{v}\n"));
                }
                std::fs::write(path, text)?;
            }
            print_json(&json!({
                "residual": sol.residual,
                "iterations": sol.iterations,
                "k": k,
                "C": c,
                "uniqueness_spread": sol.uniqueness_spread,
                "graph": sol.graph.values(),
            }))?;
        }
        Cmd::Russmann { run } => {
            let s = run.setup()?;
            let (tc, trace) = russmann::solve_translated_curve(&s.params, &s.pert, None)?;
            print_json(&json!({
                "lambda": tc.lambda,
                "defect": tc.defect,
                "iterations": trace.iterations(),
                "defects": trace.defects(),
                "gamma": TrigPolyJson::from(&tc.gamma),
                "h": TrigPolyJson::from(tc.h.periodic_part()),
            }))?;
        }
        Cmd::CAlpha { run, bracket } => {
            let s = run.setup()?;
            let (lo, hi) = parse_bracket(&bracket)?;
            let pt = russmann::find_c_alpha(&s.params, &s.pert, (lo, hi))?;
            print_json(&json!({
                "nu_star": pt.nu_star,
                "lambda": pt.curve.lambda,
                "defect": pt.curve.defect,
                "k": pt.k,
                "evaluations": pt.evaluations,
            }))?;
        }
        Cmd::NormalForm { run, k } => {
            let s = run.setup()?;
            let nf = normalform::normal_form(&s.params, &s.pert, k)?;
            let report: Vec<_> = nf
                .residual_report
                .iter()
                .map(|r| json!({ "order": r.order, "angular": r.angular, "radial": r.radial }))
                .collect();
            print_json(&json!({
                "k": nf.k,
                "alpha_bar": nf.alpha_bar,
                "beta_bar": nf.beta_bar,
                "lambda": nf.lambda,
                "curve_lambda": nf.curve_lambda,
                "residual_report": report,
                "max_residual": nf.max_residual(),
                "transforms": nf.transform_stack.iter().map(|t| t.label()).collect::<Vec<_>>(),
            }))?;
        }
        Cmd::Classify { mut run, grid, pipeline } => {
            let (g_nu, g_eta, g_eps) = parse_grid(&grid)?;
            if run.eta.is_none() {
                run.eta = g_eta.as_ref().and_then(|v| v.first().copied());
            }
            let s = run.setup()?;
            let pipeline = match pipeline.as_str() {
                "full" => Pipeline::Full,
                "gate-only" => Pipeline::GateOnly,
                other => return Err(LabError::Config(format!("unknown pipeline `{other}`"))),
            };
            let ctx = CellContext {
                alpha: s.params.alpha.clone(),
                pert: s.pert.clone(),
                region: RegionConfig { c2: s.c2, eta_cap: s.eta_cap, solve_lambda: pipeline == Pipeline::Full },
                pipeline,
            };
            let axes = (
                g_nu.unwrap_or_else(|| vec![s.params.nu]),
                g_eta.unwrap_or_else(|| vec![s.params.eta]),
                g_eps.unwrap_or_else(|| vec![s.params.eps]),
            );
            let mut cells = Vec::new();
            for &eps in &axes.2 {
                for &eta in &axes.1 {
                    for &nu in &axes.0 {
                        cells.push((nu, eta, eps));
                    }
                }
            }
            let pool = sweep::thread_pool()?;
            let rows: Vec<_> = pool.install(|| {
                use rayon::prelude::*;
                cells.par_iter().map(|&(nu, eta, eps)| sweep::evaluate_cell(&ctx, nu, eta, eps)).collect()
            });
            let mut out = std::io::stdout().lock();
            writeln!(out, "nu,eta,eps,region_tag,residual")?;
            let mut fatal = false;
            for r in rows {
                fatal |= r.is_fatal();
                let res = r.residual.map(|x| format!("{x:e}")).unwrap_or_default();
                writeln!(out, "{},{},{},{},{}", r.nu, r.eta, r.eps, r.tag_name(), res)?;
            }
            if fatal {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Sweep { spec, out, svg, resume, tags } => {
            let spec = SweepSpec::load(&spec)?;
            let summary = sweep::run_sweep_to_file(&spec, &out, &RunOptions { resume, stop_after: None })?;
            if let Some(path) = svg {
                let filter = tags.as_deref().map(parse_tags).transpose()?;
                let records = sweep::read_results(&out)?;
                figures::write_svg(&path, &records, &summary.calpha, spec.alpha()?.alpha(), filter.as_deref())?;
            }
            eprintln!(
                "{} cells ({} resumed, {} new), {} fatal",
                summary.cells_total, summary.resumed_from, summary.written, summary.fatal
            );
            if summary.fatal > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_bracket(s: &str) -> Result<(f64, f64), LabError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(LabError::Config(format!("bracket `{s}` must be lo,hi")));
    }
    let num = |t: &str| eval_alpha(t.trim()).or_else(|_| t.trim().parse::<f64>().map_err(|_| LabError::Config(format!("bad number `{t}`"))));
    Ok((num(parts[0])?, num(parts[1])?))
}

fn parse_tags(s: &str) -> Result<Vec<RegionTag>, LabError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| RegionTag::parse(t.trim()).ok_or_else(|| LabError::Config(format!("unknown tag `{t}`"))))
        .collect()
}

type Axes = (Option<Vec<f64>>, Option<Vec<f64>>, Option<Vec<f64>>);

fn parse_grid(s: &str) -> Result<Axes, LabError> {
    let mut axes: Axes = (None, None, None);
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, val) = part
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("grid entry `{part}` must be name=value")))?;
        let axis = Some(parse_axis(val.trim())?);
        match name.trim() {
            "nu" => axes.0 = axis,
            "eta" => axes.1 = axis,
            "eps" => axes.2 = axis,
            other => return Err(LabError::Config(format!("unknown grid axis `{other}`"))),
        }
    }
    Ok(axes)
}

fn parse_axis(s: &str) -> Result<Vec<f64>, LabError> {
    let num = |t: &str| eval_alpha(t.trim());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| LabError::Config(format!("bad step count `{n}`")))?;
            match n {
                0 => Err(LabError::Config("step count must be positive".into())),
                1 => Ok(vec![lo]),
                _ => Ok(sweep::lin_axis(lo, hi, n)),
            }
        }
        _ => Err(LabError::Config(format!("axis `{s}` must be v or lo:hi:n"))),
    }
}
