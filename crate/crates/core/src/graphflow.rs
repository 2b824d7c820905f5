//! Graph transform on Lipschitz graphs over the circle.
//!
//! A graph `ρ = φ(θ)` is stored by its samples on a uniform grid and
//! evaluated between nodes by cubic Hermite interpolation with fourth-order
//! periodic finite-difference slopes. For a cylinder map `(θ,ρ) ↦ (Θ,R)` the
//! transform is `Γφ(θ) = R(σ, φ(σ))` where `Θ(σ, φ(σ)) = θ`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::maps::{self, MapError, Matrix2, Params, Perturbation, Point};
use crate::math::{self, PI, TAU};
use crate::trig;

/// Default grid size.
pub const DEFAULT_GRID: usize = 1024;

/// Default cap `c` in `η ≤ c`.
pub const DEFAULT_ETA_CAP: f64 = 1.0 / TAU;

/// Seed for the random graph pairs of [`measure_contraction`].
pub const CONTRACTION_SEED: u64 = 0xc0_47a5;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    GateRejected(GateReport),
    /// `Θ∘(id, φ)` is not increasing; carries the smallest sampled slope.
    NotMonotone { min_slope: f64 },
    LipBudgetExceeded { measured: f64, budget: f64 },
    /// A graph value left `[−1, 1]`.
    OutOfRange { value: f64 },
    NoConvergence { step: f64, iterations: usize },
    Map(MapError),
    BadGrid(usize),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::GateRejected(r) => write!(f, "gate rejected (margin {:.3e})", r.margin),
            GraphError::NotMonotone { min_slope } => write!(f, "angle map not monotone (slope {min_slope:e})"),
            GraphError::LipBudgetExceeded { measured, budget } => {
                write!(f, "Lipschitz constant {measured:e} exceeds budget {budget:e}")
            }
            GraphError::OutOfRange { value } => write!(f, "graph value {value} outside [-1, 1]"),
            GraphError::NoConvergence { step, iterations } => {
                write!(f, "no convergence after {iterations} iterations (last step {step:e})")
            }
            GraphError::Map(e) => write!(f, "{e}"),
            GraphError::BadGrid(m) => write!(f, "grid size {m} too small"),
        }
    }
}

impl From<MapError> for GraphError {
    fn from(e: MapError) -> Self {
        GraphError::Map(e)
    }
}

/// A cylinder map with its Jacobian.
pub trait CylinderMap {
    fn apply(&self, pt: Point) -> Result<Point, MapError>;
    fn jacobian(&self, pt: Point) -> Result<Matrix2, MapError>;
}

/// `Q` in raw coordinates.
#[derive(Debug, Clone)]
pub struct RawQ<'a> {
    pub params: &'a Params,
    pub pert: &'a Perturbation,
}

impl CylinderMap for RawQ<'_> {
    fn apply(&self, pt: Point) -> Result<Point, MapError> {
        maps::eval_q(self.params, self.pert, &maps::Frame::Raw, pt)
    }

    fn jacobian(&self, pt: Point) -> Result<Matrix2, MapError> {
        maps::jacobian_q(self.params, self.pert, &maps::Frame::Raw, pt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipGraph {
    values: Vec<f64>,
    slopes: Vec<f64>,
    lip_k: f64,
    measured_lip: f64,
}

impl LipGraph {
    /// Checks `|φ| ≤ 1` and the Lipschitz budget.
    pub fn new(values: Vec<f64>, lip_k: f64) -> Result<LipGraph, GraphError> {
        let g = Self::unchecked(values, lip_k)?;
        if let Some(v) = g.values.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(GraphError::OutOfRange { value: *v });
        }
        if g.measured_lip > lip_k {
            return Err(GraphError::LipBudgetExceeded { measured: g.measured_lip, budget: lip_k });
        }
        Ok(g)
    }

    fn unchecked(values: Vec<f64>, lip_k: f64) -> Result<LipGraph, GraphError> {
        let m = values.len();
        if m < 8 {
            return Err(GraphError::BadGrid(m));
        }
        let h = TAU / m as f64;
        let at = |j: isize| values[j.rem_euclid(m as isize) as usize];
        let slopes = (0..m as isize)
            .map(|j| (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h))
            .collect();
        let measured_lip = (0..m).map(|j| (at(j as isize + 1) - values[j]).abs() / h).fold(0.0, f64::max);
        Ok(LipGraph { values, slopes, lip_k, measured_lip })
    }

    pub fn constant(m: usize, c: f64, lip_k: f64) -> Result<LipGraph, GraphError> {
        LipGraph::new(vec![c; m], lip_k)
    }

    pub fn from_fn<F: Fn(f64) -> f64>(m: usize, lip_k: f64, f: F) -> Result<LipGraph, GraphError> {
        LipGraph::new(math::angle_grid(m).into_iter().map(f).collect(), lip_k)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn lip_k(&self) -> f64 {
        self.lip_k
    }

    pub fn measured_lip(&self) -> f64 {
        self.measured_lip
    }

    pub fn with_budget(mut self, lip_k: f64) -> LipGraph {
        self.lip_k = lip_k;
        self
    }

    /// Value and derivative of the interpolant at any real `θ`.
    pub fn eval_with_slope(&self, theta: f64) -> (f64, f64) {
        let m = self.values.len();
        let h = TAU / m as f64;
        let t = theta / h;
        let fl = math::floor(t);
        let s = t - fl;
        let j = (fl as i64).rem_euclid(m as i64) as usize;
        let j1 = (j + 1) % m;
        let (y0, y1) = (self.values[j], self.values[j1]);
        let (d0, d1) = (self.slopes[j] * h, self.slopes[j1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let dv = (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1;
        (value, dv / h)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_with_slope(theta).0
    }

    /// Sup over the nodes of `|self − other|` (same grid).
    pub fn sup_distance(&self, other: &LipGraph) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Lipschitz constant measured on the doubled grid of the interpolant;
    /// guards against aliasing between nodes.
    pub fn refined_lip(&self) -> f64 {
        let m = 2 * self.values.len();
        let h = TAU / m as f64;
        let v: Vec<f64> = math::angle_grid(m).into_iter().map(|t| self.eval(t)).collect();
        (0..m).map(|j| (v[(j + 1) % m] - v[j]).abs() / h).fold(0.0, f64::max)
    }
}

/// Inequalities of the graph-transform gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateReport {
    pub eps: f64,
    pub k: f64,
    pub eta: f64,
    pub a: f64,
    /// Cap `c` used for the third condition (a configuration choice).
    pub eta_cap: f64,
    /// `ε ≤ (π/(6A)) η k`.
    pub condition1: bool,
    /// `k ≤ η/6`.
    pub condition2: bool,
    /// `η ≤ c`.
    pub condition3: bool,
    pub admissible: bool,
    /// Smallest relative slack of the three inequalities.
    pub margin: f64,
}

impl GateReport {
    /// Right-hand side `(π/(6A)) η k` of the first inequality.
    pub fn eps_threshold(&self) -> f64 {
        if self.a == 0.0 {
            f64::INFINITY
        } else {
            PI / (6.0 * self.a) * self.eta * self.k
        }
    }
}

pub fn gate(p: &Params, pert: &Perturbation, k: f64) -> GateReport {
    gate_with_cap(p, pert, k, DEFAULT_ETA_CAP)
}

pub fn gate_with_cap(p: &Params, pert: &Perturbation, k: f64, eta_cap: f64) -> GateReport {
    gate_raw(p.eps, p.eta, pert.a(), k, eta_cap)
}

/// Gate from the bare numbers.
pub fn gate_raw(eps: f64, eta: f64, a: f64, k: f64, eta_cap: f64) -> GateReport {
    let thr = if a == 0.0 { f64::INFINITY } else { PI / (6.0 * a) * eta * k };
    let c1 = eps <= thr;
    let c2 = k > 0.0 && k <= eta / 6.0;
    let c3 = eta > 0.0 && eta <= eta_cap;
    let rel = |lhs: f64, rhs: f64| if rhs.is_infinite() { 1.0 } else if rhs > 0.0 { (rhs - lhs) / rhs } else { -1.0 };
    let margin = rel(eps, thr).min(rel(k, eta / 6.0)).min(rel(eta, eta_cap));
    GateReport {
        eps,
        k,
        eta,
        a,
        eta_cap,
        condition1: c1,
        condition2: c2,
        condition3: c3,
        admissible: c1 && c2 && c3,
        margin,
    }
}

/// `e^{−2πη} + εA_g + 2πk + εkA_f`.
pub fn analytic_contraction(p: &Params, pert: &Perturbation, k: f64) -> f64 {
    p.contraction() + p.eps * pert.a_g + TAU * k + p.eps * k * pert.a_f
}

/// Solves `Θ(σ, φ(σ)) = target` near `guess`.
fn invert_angle<M: CylinderMap>(map: &M, phi: &LipGraph, target: f64, guess: f64) -> Result<f64, GraphError> {
    let eval = |s: f64| -> Result<(f64, f64), MapError> {
        let (v, dv) = phi.eval_with_slope(s);
        let img = map.apply((s, v))?;
        let j = map.jacobian((s, v))?;
        Ok((img.0, j[0][0] + j[0][1] * dv))
    };
    let mut s = guess;
    for _ in 0..40 {
        let (v, d) = eval(s)?;
        if !(d > 0.0) {
            return Err(GraphError::NotMonotone { min_slope: d });
        }
        let step = (v - target) / d;
        s -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + s.abs()) {
            return Ok(s);
        }
    }
    // Fall back to the safeguarded bracketed solver.
    let u = |x: f64| eval(x).unwrap_or((f64::NAN, f64::NAN));
    trig::invert_monotone(u, target, s - PI, s + PI, 1e-15 * (1.0 + target.abs()))
        .map_err(|_| GraphError::NotMonotone { min_slope: f64::NAN })
}

/// Node values of `Γφ` without budget checks, plus the preimages `σ_j`.
fn transform_nodes<M: CylinderMap>(map: &M, phi: &LipGraph) -> Result<(Vec<f64>, Vec<f64>), GraphError> {
    let m = phi.grid_size();
    let grid = math::angle_grid(m);
    let mut out = Vec::with_capacity(m);
    let mut pre = Vec::with_capacity(m);
    // Initial guess: undo the image displacement at θ_0.
    let z0 = map.apply((grid[0], phi.eval(grid[0])))?;
    let mut guess = grid[0] - (z0.0 - grid[0]);
    let mut prev: Option<(f64, f64)> = None;
    for &t in &grid {
        if let Some((s_prev, t_prev)) = prev {
            guess = s_prev + (t - t_prev);
        }
        let s = invert_angle(map, phi, t, guess)?;
        let z = map.apply((s, phi.eval(s)))?;
        out.push(z.1);
        pre.push(s);
        prev = Some((s, t));
    }
    Ok((out, pre))
}

/// One application of the graph transform for an arbitrary map.
pub fn graph_transform_map<M: CylinderMap>(map: &M, phi: &LipGraph) -> Result<LipGraph, GraphError> {
    let (vals, _) = transform_nodes(map, phi)?;
    LipGraph::new(vals, phi.lip_k())
}

/// `Γφ` for `Q`; refuses to run outside the gate.
pub fn graph_transform(p: &Params, pert: &Perturbation, phi: &LipGraph) -> Result<LipGraph, GraphError> {
    let report = gate(p, pert, phi.lip_k());
    if !report.admissible {
        return Err(GraphError::GateRejected(report));
    }
    graph_transform_map(&RawQ { params: p, pert }, phi)
}

/// Sup over off-grid points `θ` of `|R(θ, φ(θ)) − φ(Θ(θ, φ(θ)))|`.
pub fn invariance_residual<M: CylinderMap>(map: &M, phi: &LipGraph) -> Result<f64, GraphError> {
    let m = phi.grid_size();
    let h = TAU / m as f64;
    let mut worst: f64 = 0.0;
    for j in 0..m {
        for frac in [0.5, 0.25] {
            let t = (j as f64 + frac) * h;
            let z = map.apply((t, phi.eval(t)))?;
            worst = worst.max((z.1 - phi.eval(z.0)).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    /// Analytic bound `e^{−2πη} + εA_g + 2πk + εkA_f`.
    pub analytic: f64,
    /// Largest `sup|Γφ₁ − Γφ₂| / sup|φ₁ − φ₂|` over the random pairs.
    pub empirical: f64,
    pub pairs: usize,
}

/// Random graph with `|φ| ≤ 0.9` and Lipschitz constant `≤ 0.9 k`.
fn random_graph(rng: &mut ChaCha8Rng, m: usize, k: f64) -> Result<LipGraph, GraphError> {
    let modes = 3;
    let mut amps = [0.0; 3];
    let mut phases = [0.0; 3];
    let budget: f64 = rng.gen_range(0.1..0.9);
    let weights: Vec<f64> = (0..modes).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().enumerate().map(|(i, w)| (i + 1) as f64 * w).sum::<f64>().max(1e-12);
    let lip_scale = budget * k / total;
    let amp_sum: f64 = weights.iter().sum::<f64>() * lip_scale;
    let amp_scale = if amp_sum > 0.45 { 0.45 / amp_sum } else { 1.0 };
    for i in 0..modes {
        amps[i] = weights[i] * lip_scale * amp_scale;
        phases[i] = rng.gen_range(0.0..TAU);
    }
    let c: f64 = rng.gen_range(-0.45..0.45);
    LipGraph::from_fn(m, k, |t| {
        c + (0..modes).map(|i| amps[i] * math::cos((i + 1) as f64 * t + phases[i])).sum::<f64>()
    })
}

/// Analytic bound and empirical ratio over `pairs` random graph pairs.
pub fn measure_contraction(
    p: &Params,
    pert: &Perturbation,
    k: f64,
    m: usize,
    pairs: usize,
) -> Result<ContractionReport, GraphError> {
    let report = gate(p, pert, k);
    if !report.admissible {
        return Err(GraphError::GateRejected(report));
    }
    measure_contraction_unchecked(p, pert, k, m, pairs)
}

/// As [`measure_contraction`] without the gate check (used with a custom cap).
pub fn measure_contraction_unchecked(
    p: &Params,
    pert: &Perturbation,
    k: f64,
    m: usize,
    pairs: usize,
) -> Result<ContractionReport, GraphError> {
    let map = RawQ { params: p, pert };
    let mut rng = ChaCha8Rng::seed_from_u64(CONTRACTION_SEED);
    let mut empirical: f64 = 0.0;
    for _ in 0..pairs {
        let a = random_graph(&mut rng, m, k)?;
        let b = random_graph(&mut rng, m, k)?;
        let d = a.sup_distance(&b);
        if d == 0.0 {
            continue;
        }
        let ga = graph_transform_map(&map, &a)?;
        let gb = graph_transform_map(&map, &b)?;
        empirical = empirical.max(ga.sup_distance(&gb) / d);
    }
    Ok(ContractionReport { analytic: analytic_contraction(p, pert, k), empirical, pairs })
}

#[derive(Debug, Clone)]
pub struct FixedGraph {
    pub graph: LipGraph,
    /// Off-grid invariance residual.
    pub residual: f64,
    pub iterations: usize,
    /// `sup|Γφ_n − φ_n|` per iteration.
    pub steps: Vec<f64>,
    /// Largest node distance between the solutions from the alternative
    /// starting graphs and the main one.
    pub uniqueness_spread: f64,
    /// Contraction constant used for the stopping rule.
    pub contraction: f64,
    pub k: f64,
}

/// Options for [`solve_fixed_graph`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub grid: usize,
    pub tol: f64,
    /// Extra constant starting graphs for the uniqueness probe.
    pub alt_starts: Vec<f64>,
}

impl SolveOptions {
    pub fn new(tol: f64) -> SolveOptions {
        SolveOptions { grid: DEFAULT_GRID, tol, alt_starts: vec![0.9, -0.9] }
    }
}

fn iterate_to_fixed<M: CylinderMap>(
    map: &M,
    start: LipGraph,
    contraction: f64,
    tol: f64,
) -> Result<(LipGraph, usize, Vec<f64>), GraphError> {
    let budget = (math::ceil(math::ln(tol) / math::ln(contraction)) as usize).saturating_add(50);
    let mut phi = start;
    let mut steps = Vec::new();
    for it in 1..=budget {
        let next = graph_transform_map(map, &phi)?;
        let step = next.sup_distance(&phi);
        steps.push(step);
        phi = next;
        if step <= tol * (1.0 - contraction) {
            return Ok((phi, it, steps));
        }
    }
    Err(GraphError::NoConvergence { step: steps.last().copied().unwrap_or(f64::NAN), iterations: budget })
}

/// Fixed point of the graph transform of `map` from `φ₀ ≡ 0`, with the
/// multi-start uniqueness probe. `contraction` must be `< 1`.
pub fn solve_fixed_graph<M: CylinderMap>(
    map: &M,
    k: f64,
    contraction: f64,
    opts: &SolveOptions,
) -> Result<FixedGraph, GraphError> {
    let contraction = contraction.clamp(1e-3, 0.999);
    let start = LipGraph::constant(opts.grid, 0.0, k)?;
    let (graph, iterations, steps) = iterate_to_fixed(map, start, contraction, opts.tol)?;
    let residual = invariance_residual(map, &graph)?;
    let mut spread: f64 = 0.0;
    for &c in &opts.alt_starts {
        let (alt, _, _) = iterate_to_fixed(map, LipGraph::constant(opts.grid, c, k)?, contraction, opts.tol)?;
        spread = spread.max(alt.sup_distance(&graph));
    }
    Ok(FixedGraph { graph, residual, iterations, steps, uniqueness_spread: spread, contraction, k })
}

/// Theorem-1 pipeline for `Q`: gate, analytic contraction, fixed point.
pub fn solve_invariant_circle(p: &Params, pert: &Perturbation, k: f64, tol: f64) -> Result<FixedGraph, GraphError> {
    solve_invariant_circle_with(p, pert, k, &SolveOptions::new(tol), DEFAULT_ETA_CAP)
}

pub fn solve_invariant_circle_with(
    p: &Params,
    pert: &Perturbation,
    k: f64,
    opts: &SolveOptions,
    eta_cap: f64,
) -> Result<FixedGraph, GraphError> {
    let report = gate_with_cap(p, pert, k, eta_cap);
    if !report.admissible {
        return Err(GraphError::GateRejected(report));
    }
    let c = analytic_contraction(p, pert, k);
    solve_fixed_graph(&RawQ { params: p, pert }, k, c, opts)
}

/// Smallest `η ∈ (0, cap]` admitted by the gate with `k = η/6` (the
/// optimal choice), located by bisection on the gate itself.
pub fn eta_min(eps: f64, a: f64, eta_cap: f64) -> Option<f64> {
    let ok = |eta: f64| gate_raw(eps, eta, a, eta / 6.0, eta_cap).admissible;
    if !ok(eta_cap) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, eta_cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Distance of `pt` from the graph, measured vertically.
pub fn vertical_distance(phi: &LipGraph, pt: Point) -> f64 {
    (pt.1 - phi.eval(pt.0)).abs()
}
