//! Localization of `Q` at a translated curve and the order-`k` reduction to
//! angle-independent radial and angular Taylor coefficients.
//!
//! Maps near the curve are stored as truncated series in the radial variable,
//!
//! ```text
//! ξ′ = ξ + 2πα + Σ_{i=0}^{n} a_i(ξ) x^i,    x′ = Σ_{i=0}^{n} b_i(ξ) x^i,
//! ```
//!
//! with `a_0`, `b_0 − λ` of the size of the curve defect. Changes of variables
//! are conjugated through the series by jet arithmetic on an angle grid, at an
//! internal order above the reduction order so the reduced map stays usable
//! pointwise on `|y| ≤ 0.1`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::diophantine::DiophantineNumber;
use crate::graphflow::{self, CylinderMap, FixedGraph, GraphError, SolveOptions, DEFAULT_ETA_CAP};
use crate::jet::Jet;
use crate::maps::{self, Frame, MapError, Matrix2, Params, Perturbation, Point};
use crate::math::{self, TAU};
use crate::russmann::{self, RussmannError, TranslatedCurve};
use crate::smalldiv::{self, DifferenceProblem, SmallDivError};
use crate::trig::{self, TrigPoly};

/// Taylor order carried internally by localized and reduced maps.
pub const INTERNAL_ORDER: usize = 12;
/// Default reduction order.
pub const DEFAULT_K: usize = 4;
/// Radius of the working annulus `|x| ≤ 0.1`.
pub const ANNULUS: f64 = 0.1;
/// Default constant in `η ≥ c₂ ε`.
pub const DEFAULT_C2: f64 = 10.0;
/// `|λ|` below which a cell counts as lying on `C_α`.
pub const C_ALPHA_TOL: f64 = 1e-11;
/// Largest admissible sup norm of a transform generator.
pub const BLOWUP_LIMIT: f64 = 10.0;
/// Relative tolerance of the finite-difference validation of a localization.
pub const TAYLOR_CHECK_TOL: f64 = 1e-7;
/// Relative magnitude below which trailing Fourier modes count as round-off.
/// High angular derivatives amplify them by `k^i/i!`.
pub const NOISE_FLOOR: f64 = 1e-15;

/// Truncates before the first pair of consecutive modes below the floor.
fn denoise(p: &TrigPoly) -> TrigPoly {
    let tol = NOISE_FLOOR * (1.0 + p.sup_norm());
    let small = |k: usize| p.coeff(k as isize).norm() <= tol && p.coeff(-(k as isize)).norm() <= tol;
    match (1..=p.order()).find(|&k| small(k) && (k == p.order() || small(k + 1))) {
        Some(k) => p.truncate(k - 1),
        None => p.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormalFormError {
    /// Series and finite differences of the exact map disagree.
    TaylorUnstable { worst: f64 },
    /// The curve defect is above `1e-9`.
    UncertifiedCurve { defect: f64 },
    DivisorFailure(SmallDivError),
    OrderBlowup { order: usize, norm: f64 },
    BadOrder { k: usize, k_max: usize },
    /// Newton for the invariant radius left `|R| ≤ 1` or `|β̄₁ − 1| ≤ 1e-8`.
    NoRoot,
    /// The parameters are outside the Theorem-2 region.
    OutsideRegion,
    Russmann(RussmannError),
    Graph(GraphError),
    Map(MapError),
}

impl fmt::Display for NormalFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalFormError::TaylorUnstable { worst } => write!(f, "Taylor coefficients failed validation ({worst:e})"),
            NormalFormError::UncertifiedCurve { defect } => write!(f, "translated curve defect {defect:e} too large"),
            NormalFormError::DivisorFailure(e) => write!(f, "difference equation failed: {e}"),
            NormalFormError::OrderBlowup { order, norm } => write!(f, "transform of order {order} has norm {norm:e}"),
            NormalFormError::BadOrder { k, k_max } => write!(f, "order {k} exceeds localization order {k_max}"),
            NormalFormError::NoRoot => write!(f, "no invariant radius in |R| <= 1"),
            NormalFormError::OutsideRegion => write!(f, "parameters outside the normally attractive region"),
            NormalFormError::Russmann(e) => write!(f, "{e}"),
            NormalFormError::Graph(e) => write!(f, "{e}"),
            NormalFormError::Map(e) => write!(f, "{e}"),
        }
    }
}

impl From<SmallDivError> for NormalFormError {
    fn from(e: SmallDivError) -> Self {
        NormalFormError::DivisorFailure(e)
    }
}

impl From<RussmannError> for NormalFormError {
    fn from(e: RussmannError) -> Self {
        NormalFormError::Russmann(e)
    }
}

impl From<GraphError> for NormalFormError {
    fn from(e: GraphError) -> Self {
        NormalFormError::Graph(e)
    }
}

impl From<MapError> for NormalFormError {
    fn from(e: MapError) -> Self {
        NormalFormError::Map(e)
    }
}

/// Angle grid and Fourier cutoff used to fit coefficient functions.
#[derive(Debug, Clone, Copy)]
pub struct SeriesGrid {
    pub grid: usize,
    pub n: usize,
}

impl Default for SeriesGrid {
    fn default() -> Self {
        SeriesGrid { grid: 128, n: 42 }
    }
}

/// A near-identity map given by Taylor series in the radial variable.
#[derive(Debug, Clone)]
pub struct SeriesMap {
    pub omega: f64,
    pub a: Vec<TrigPoly>,
    pub b: Vec<TrigPoly>,
}

fn horner_point(c: &[TrigPoly], xi: f64, y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, p| acc * y + p.eval_real(xi))
}

fn poly_at_jet(p: &TrigPoly, e: &Jet) -> Jet {
    e.compose_taylor(&p.taylor_at(e.value(), e.order()))
}

fn horner_jet(c: &[TrigPoly], e: &Jet, y: &Jet) -> Jet {
    let n = e.order();
    let mut acc = Jet::zero(n);
    for p in c.iter().rev() {
        acc = &(&acc * y) + &poly_at_jet(p, e);
    }
    acc
}

impl SeriesMap {
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn apply(&self, pt: Point) -> Point {
        (pt.0 + self.omega + horner_point(&self.a, pt.0, pt.1), horner_point(&self.b, pt.0, pt.1))
    }

    pub fn apply_jet(&self, e: &Jet, y: &Jet) -> (Jet, Jet) {
        (horner_jet(&self.a, e, y).add_const(self.omega).add_jet(e), horner_jet(&self.b, e, y))
    }

    pub fn jacobian(&self, pt: Point) -> Matrix2 {
        let (xi, y) = pt;
        let mut m = [[1.0, 0.0], [0.0, 0.0]];
        let mut yp = 1.0;
        for i in 0..=self.order() {
            let ta = self.a[i].taylor_at(xi, 1);
            let tb = self.b[i].taylor_at(xi, 1);
            m[0][0] += ta[1] * yp;
            m[1][0] += tb[1] * yp;
            if i >= 1 {
                let d = i as f64 * math::powi(y, i as i32 - 1);
                m[0][1] += ta[0] * d;
                m[1][1] += tb[0] * d;
            }
            yp *= y;
        }
        m
    }

    /// `(sup_i nonconstant a_i, sup_i nonconstant b_i)` over `1 ≤ i ≤ k`.
    pub fn nonconstancy(&self, k: usize) -> (f64, f64) {
        let f = |c: &[TrigPoly]| c.iter().take(k + 1).skip(1).fold(0.0f64, |m, p| m.max(p.nonconstant_norm()));
        (f(&self.a), f(&self.b))
    }

    /// Conjugates by `t`: the map `t⁻¹ ∘ self ∘ t`, refitted on `grid`.
    pub fn conjugate(&self, t: &Transform, grid: SeriesGrid) -> SeriesMap {
        let n = self.order();
        let m = grid.grid;
        let mut av = vec![Vec::with_capacity(m); n + 1];
        let mut bv = vec![Vec::with_capacity(m); n + 1];
        for xi in math::angle_grid(m) {
            let e = Jet::constant(xi, n);
            let y = Jet::variable(0.0, n);
            let (e1, y1) = t.forward_jet(&e, &y);
            let (e2, y2) = self.apply_jet(&e1, &y1);
            let (e3, y3) = t.inverse_jet(&e2, &y2);
            let da = e3.add_const(-xi - self.omega);
            for i in 0..=n {
                av[i].push(da.coeff(i));
                bv[i].push(y3.coeff(i));
            }
        }
        let fit = |v: &Vec<f64>| TrigPoly::from_real_samples(v, grid.n, 0.0);
        SeriesMap { omega: self.omega, a: av.iter().map(fit).collect(), b: bv.iter().map(fit).collect() }
    }
}

trait AddJet {
    fn add_jet(&self, o: &Jet) -> Jet;
}

impl AddJet for Jet {
    fn add_jet(&self, o: &Jet) -> Jet {
        self + o
    }
}

/// One change of variables `(ξ, y) ↦ (ξ_old, x_old)`.
#[derive(Debug, Clone)]
pub enum Transform {
    /// `x = X(ξ) y`.
    Rescale(TrigPoly),
    /// `x = y + X(ξ) y^i`.
    Radial { order: usize, x: TrigPoly },
    /// `ξ_old = ξ + Z(ξ) y^i`.
    Angular { order: usize, z: TrigPoly },
}

const INVERSE_ITER: usize = 80;

impl Transform {
    pub fn generator(&self) -> &TrigPoly {
        match self {
            Transform::Rescale(x) => x,
            Transform::Radial { x, .. } => x,
            Transform::Angular { z, .. } => z,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Transform::Rescale(_) => String::from("X"),
            Transform::Radial { order, .. } => alloc::format!("X{order}"),
            Transform::Angular { order, .. } => alloc::format!("Z{order}"),
        }
    }

    pub fn forward(&self, pt: Point) -> Point {
        let (xi, y) = pt;
        match self {
            Transform::Rescale(x) => (xi, x.eval_real(xi) * y),
            Transform::Radial { order, x } => (xi, y + x.eval_real(xi) * math::powi(y, *order as i32)),
            Transform::Angular { order, z } => (xi + z.eval_real(xi) * math::powi(y, *order as i32), y),
        }
    }

    pub fn inverse(&self, pt: Point) -> Point {
        let (xi, x) = pt;
        match self {
            Transform::Rescale(g) => (xi, x / g.eval_real(xi)),
            Transform::Radial { order, x: g } => {
                let c = g.eval_real(xi);
                let mut y = x;
                for _ in 0..INVERSE_ITER {
                    let next = x - c * math::powi(y, *order as i32);
                    let done = (next - y).abs() <= 1e-17 * (1.0 + y.abs());
                    y = next;
                    if done {
                        break;
                    }
                }
                (xi, y)
            }
            Transform::Angular { order, z } => {
                let yp = math::powi(x, *order as i32);
                let mut eta = xi;
                for _ in 0..INVERSE_ITER {
                    let next = xi - z.eval_real(eta) * yp;
                    let done = (next - eta).abs() <= 1e-16 * (1.0 + eta.abs());
                    eta = next;
                    if done {
                        break;
                    }
                }
                (eta, x)
            }
        }
    }

    fn forward_jet(&self, e: &Jet, y: &Jet) -> (Jet, Jet) {
        match self {
            Transform::Rescale(x) => (e.clone(), &poly_at_jet(x, e) * y),
            Transform::Radial { order, x } => (e.clone(), y + &(&poly_at_jet(x, e) * &y.powi(*order))),
            Transform::Angular { order, z } => (e + &(&poly_at_jet(z, e) * &y.powi(*order)), y.clone()),
        }
    }

    fn inverse_jet(&self, e: &Jet, x: &Jet) -> (Jet, Jet) {
        match self {
            Transform::Rescale(g) => (e.clone(), x * &poly_at_jet(g, e).recip()),
            Transform::Radial { order, x: g } => {
                let c = poly_at_jet(g, e);
                let mut y = x.clone();
                for _ in 0..INVERSE_ITER {
                    let next = x - &(&c * &y.powi(*order));
                    let done = (&next - &y).max_from(0) <= 1e-18;
                    y = next;
                    if done {
                        break;
                    }
                }
                (e.clone(), y)
            }
            Transform::Angular { order, z } => {
                let yp = x.powi(*order);
                let mut eta = e.clone();
                for _ in 0..INVERSE_ITER {
                    let next = e - &(&poly_at_jet(z, &eta) * &yp);
                    let done = (&next - &eta).max_from(0) <= 1e-16;
                    eta = next;
                    if done {
                        break;
                    }
                }
                (eta, x.clone())
            }
        }
    }
}

/// `Q` in the coordinates `(ξ, x)` attached to a translated curve.
#[derive(Debug, Clone)]
pub struct LocalizedMap {
    pub series: SeriesMap,
    pub lambda: f64,
    pub k_max: usize,
    /// `Σ_{i>k_max} (|a_i|₀ + |b_i|₀) 0.1^i`.
    pub tail_bound: f64,
    pub params: Params,
    pub curve: TranslatedCurve,
    pub grid: SeriesGrid,
    /// Worst relative mismatch of the finite-difference validation.
    pub validation: f64,
}

impl LocalizedMap {
    /// `A_i`.
    pub fn a(&self, i: usize) -> &TrigPoly {
        &self.series.a[i]
    }

    /// `B_i`.
    pub fn b(&self, i: usize) -> &TrigPoly {
        &self.series.b[i]
    }

    /// `Q` evaluated exactly in `(ξ, x)`.
    pub fn exact(&self, pert: &Perturbation, pt: Point) -> Result<Point, MapError> {
        maps::eval_q(&self.params, pert, &self.curve.frame(), pt)
    }

    /// `(|B₁ − e^{−2πη}|₀/ε, max_{2≤i≤k_max} |B_i|₀/ε)`; zeros at `ε = 0`.
    pub fn order_constants(&self) -> (f64, f64) {
        if self.params.eps == 0.0 {
            return (0.0, 0.0);
        }
        let e = self.params.contraction();
        let d1 = (&self.series.b[1] - &TrigPoly::constant(0, e)).sup_norm() / self.params.eps;
        let di = (2..=self.k_max).fold(0.0f64, |m, i| m.max(self.series.b[i].sup_norm())) / self.params.eps;
        (d1, di)
    }
}

/// Localization with the default grid.
pub fn localize(
    p: &Params,
    pert: &Perturbation,
    tc: &TranslatedCurve,
    k_max: usize,
) -> Result<LocalizedMap, NormalFormError> {
    localize_with(p, pert, tc, k_max, SeriesGrid::default())
}

pub fn localize_with(
    p: &Params,
    pert: &Perturbation,
    tc: &TranslatedCurve,
    k_max: usize,
    grid: SeriesGrid,
) -> Result<LocalizedMap, NormalFormError> {
    if !(tc.defect <= 1e-9) {
        return Err(NormalFormError::UncertifiedCurve { defect: tc.defect });
    }
    if k_max > INTERNAL_ORDER {
        return Err(NormalFormError::BadOrder { k: k_max, k_max: INTERNAL_ORDER });
    }
    let n = INTERNAL_ORDER;
    let mut tc = tc.clone();
    tc.gamma_xi = denoise(&tc.gamma_xi);
    tc.h = crate::trig::CircleLift::near_identity(denoise(tc.h.periodic_part()));
    let tc = &tc;
    let omega = TAU * p.alpha.alpha();
    let (c, e, tau, s) = (p.twist(), p.contraction(), maps::translation_tau(p), maps::russ_offset(p));
    let m = grid.grid;
    let mut av = vec![Vec::with_capacity(m); n + 1];
    let mut bv = vec![Vec::with_capacity(m); n + 1];
    for xi in math::angle_grid(m) {
        let theta = tc.h.eval(xi);
        let r0 = tc.gamma_xi.eval_real(xi);
        let r = Jet::variable(r0, n);
        let mut th1 = (&r * c).add_const(theta + omega);
        let mut r1 = (&r * e).add_const(tau);
        if p.eps != 0.0 {
            th1 = &th1 + &(&pert.f.rho_jet(theta, r0 + s, n) * p.eps);
            r1 = &r1 + &(&pert.g.rho_jet(theta, r0 + s, n) * p.eps);
        }
        let xi1 = invert_h_jet(tc, &th1)?;
        let x1 = &r1 - &poly_at_jet(&tc.gamma_xi, &xi1);
        let da = xi1.add_const(-xi - omega);
        for i in 0..=n {
            av[i].push(da.coeff(i));
            bv[i].push(x1.coeff(i));
        }
    }
    let fit = |v: &Vec<f64>| TrigPoly::from_real_samples(v, grid.n, 0.0);
    let series = SeriesMap { omega, a: av.iter().map(fit).collect(), b: bv.iter().map(fit).collect() };
    let tail_bound = (k_max + 1..=n)
        .map(|i| (series.a[i].sup_norm() + series.b[i].sup_norm()) * math::powi(ANNULUS, i as i32))
        .sum();
    let mut lm = LocalizedMap {
        series,
        lambda: tc.lambda,
        k_max,
        tail_bound,
        params: p.clone(),
        curve: tc.clone(),
        grid,
        validation: 0.0,
    };
    lm.validation = validate(&lm, pert)?;
    if lm.validation > TAYLOR_CHECK_TOL {
        return Err(NormalFormError::TaylorUnstable { worst: lm.validation });
    }
    Ok(lm)
}

/// `h⁻¹(θ(x))` as a jet, by fixed-point iteration on the Taylor series of `h`.
fn invert_h_jet(tc: &TranslatedCurve, th: &Jet) -> Result<Jet, NormalFormError> {
    let n = th.order();
    let xi0 = tc.invert_h(th.value())?;
    let taylor = tc.h.periodic_part().taylor_at(xi0, n);
    let dth = th.without_constant();
    let mut u = dth.clone();
    for _ in 0..INVERSE_ITER {
        let pu = u.compose_taylor(&taylor).add_const(-taylor[0]);
        let next = &dth - &pu;
        let done = (&next - &u).max_from(0) <= 1e-18;
        u = next;
        if done {
            break;
        }
    }
    Ok(u.add_const(xi0))
}

/// Relative mismatch at 64 angles between the series and the exact map:
/// values at `x = ±0.05` and a fourth-order central difference of the slope.
fn validate(lm: &LocalizedMap, pert: &Perturbation) -> Result<f64, NormalFormError> {
    let d = 1e-3;
    let mut worst: f64 = 0.0;
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
    for xi in math::angle_grid(64) {
        for x in [-0.05, 0.05] {
            let ex = lm.exact(pert, (xi, x))?;
            let se = lm.series.apply((xi, x));
            worst = worst.max(rel(se.0, ex.0)).max(rel(se.1, ex.1));
        }
        let q = |x: f64| lm.exact(pert, (xi, x));
        let (p2, p1, m1, m2) = (q(2.0 * d)?, q(d)?, q(-d)?, q(-2.0 * d)?);
        let fd0 = (-p2.0 + 8.0 * p1.0 - 8.0 * m1.0 + m2.0) / (12.0 * d);
        let fd1 = (-p2.1 + 8.0 * p1.1 - 8.0 * m1.1 + m2.1) / (12.0 * d);
        worst = worst.max(rel(lm.series.a[1].eval_real(xi), fd0)).max(rel(lm.series.b[1].eval_real(xi), fd1));
    }
    Ok(worst)
}

/// Nonconstancy of the targeted order after one reduction step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub label: String,
    pub after: f64,
}

/// Per-order nonconstancy after the full reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderResidual {
    pub order: usize,
    pub angular: f64,
    pub radial: f64,
}

#[derive(Debug, Clone)]
pub struct NormalFormResult {
    /// `ᾱ_1..ᾱ_k`.
    pub alpha_bar: Vec<f64>,
    /// `β̄_1..β̄_k`.
    pub beta_bar: Vec<f64>,
    /// Mean order-0 radial coefficient of the reduced map (equals the curve's
    /// `λ` up to `O(|λ|ε)`).
    pub lambda: f64,
    pub curve_lambda: f64,
    /// Transforms in the order they were applied; the reduced coordinates map
    /// to `(ξ, x)` through the last one first.
    pub transform_stack: Vec<Transform>,
    pub residual_report: Vec<OrderResidual>,
    pub steps: Vec<StepRecord>,
    /// Reduced map at the internal order.
    pub reduced: SeriesMap,
    pub k: usize,
    pub params: Params,
    pub curve: TranslatedCurve,
    /// Residual of the multiplicative solve.
    pub log_residual: f64,
}

impl NormalFormResult {
    /// Reduced coordinates to `(ξ, x)`.
    pub fn to_localized(&self, pt: Point) -> Point {
        self.transform_stack.iter().rev().fold(pt, |z, t| t.forward(z))
    }

    pub fn from_localized(&self, pt: Point) -> Point {
        self.transform_stack.iter().fold(pt, |z, t| t.inverse(z))
    }

    pub fn to_raw(&self, pt: Point) -> Result<Point, MapError> {
        self.curve.frame().from_frame(&self.params, self.to_localized(pt))
    }

    pub fn from_raw(&self, pt: Point) -> Result<Point, MapError> {
        Ok(self.from_localized(self.curve.frame().to_frame(&self.params, pt)?))
    }

    /// Largest `|from_raw(to_raw(z)) − z|` over the points.
    pub fn round_trip_error(&self, pts: &[Point]) -> Result<f64, MapError> {
        let mut worst: f64 = 0.0;
        for &z in pts {
            let back = self.from_raw(self.to_raw(z)?)?;
            worst = worst.max((back.0 - z.0).abs()).max((back.1 - z.1).abs());
        }
        Ok(worst)
    }

    /// Largest `|Φ(Q_red(z)) − Q(Φ(z))|` with `Φ` the stack into `(ξ, x)`.
    pub fn commutation_error(&self, pert: &Perturbation, pts: &[Point]) -> Result<f64, MapError> {
        let frame = self.curve.frame();
        let mut worst: f64 = 0.0;
        for &z in pts {
            let lhs = self.to_localized(self.reduced.apply(z));
            let rhs = maps::eval_q(&self.params, pert, &frame, self.to_localized(z))?;
            worst = worst.max((lhs.0 - rhs.0).abs()).max((lhs.1 - rhs.1).abs());
        }
        Ok(worst)
    }

    /// `β̄₁ + Σ_{i≥2} i β̄_i R^{i−1}`.
    pub fn multiplier_at(&self, r: f64) -> f64 {
        self.beta_bar.iter().enumerate().map(|(j, b)| (j + 1) as f64 * b * math::powi(r, j as i32)).sum()
    }

    /// Worst nonconstancy over the reduced orders.
    pub fn max_residual(&self) -> f64 {
        self.residual_report.iter().fold(0.0, |m, r| m.max(r.angular).max(r.radial))
    }
}

fn check_blowup(t: &Transform, order: usize) -> Result<(), NormalFormError> {
    let norm = t.generator().sup_norm();
    if !(norm <= BLOWUP_LIMIT) {
        return Err(NormalFormError::OrderBlowup { order, norm });
    }
    Ok(())
}

const MAX_SWEEPS: usize = 12;
const PASS_TOL: f64 = 1e-13;

#[allow(clippy::too_many_arguments)]
fn apply_step(
    map: &mut SeriesMap,
    stack: &mut Vec<Transform>,
    steps: &mut Vec<StepRecord>,
    t: Transform,
    order: usize,
    radial: bool,
    grid: SeriesGrid,
) -> Result<(), NormalFormError> {
    check_blowup(&t, order)?;
    *map = map.conjugate(&t, grid);
    let after = if radial { map.b[order].nonconstant_norm() } else { map.a[order].nonconstant_norm() };
    steps.push(StepRecord { label: t.label(), after });
    stack.push(t);
    Ok(())
}

/// Zero-mean solution of `a w(ξ+2πα) − b w(ξ) = g − ḡ`.
fn twisted(a: f64, b: f64, g: &TrigPoly, alpha: &DiophantineNumber) -> Result<TrigPoly, SmallDivError> {
    let sol = smalldiv::solve_difference(&DifferenceProblem::new(a, b, g.without_mean(), alpha.clone()))?;
    Ok(denoise(&sol.f))
}

/// Log solve on `B₁`, radial eliminations for `i = 2..k`, angular
/// eliminations for `i = 1..k`.
pub fn reduce(lm: &LocalizedMap, alpha: &DiophantineNumber, k: usize) -> Result<NormalFormResult, NormalFormError> {
    if k == 0 || k > lm.k_max {
        return Err(NormalFormError::BadOrder { k, k_max: lm.k_max });
    }
    let grid = lm.grid;
    let mut map = lm.series.clone();
    let mut stack = Vec::new();
    let mut steps = Vec::new();
    let mut log_residual = 0.0;
    // Later steps disturb earlier orders through the order-0 term (of size
    // λ), so the whole sequence is repeated while it still makes progress.
    let mut best = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        let (na, nb) = map.nonconstancy(k);
        let current = na.max(nb);
        if sweep > 0 && (current <= PASS_TOL || current > 0.5 * best) {
            break;
        }
        best = current;
        let skip = |v: f64| sweep > 0 && v <= PASS_TOL;
        if !skip(map.b[1].nonconstant_norm()) {
            let log = smalldiv::solve_log_multiplicative_order(&map.b[1], alpha, grid.n)?;
            if sweep == 0 {
                log_residual = log.residual;
            }
            apply_step(&mut map, &mut stack, &mut steps, Transform::Rescale(denoise(&log.x)), 1, true, grid)?;
        }
        for i in 2..=k {
            if skip(map.b[i].nonconstant_norm()) {
                continue;
            }
            let beta1 = map.b[1].mean();
            let x = twisted(math::powi(beta1, i as i32), beta1, &map.b[i], alpha)?;
            apply_step(&mut map, &mut stack, &mut steps, Transform::Radial { order: i, x }, i, true, grid)?;
        }
        for i in 1..=k {
            if skip(map.a[i].nonconstant_norm()) {
                continue;
            }
            let beta1 = map.b[1].mean();
            let z = twisted(math::powi(beta1, i as i32), 1.0, &map.a[i], alpha)?;
            apply_step(&mut map, &mut stack, &mut steps, Transform::Angular { order: i, z }, i, false, grid)?;
        }
    }
    let residual_report = (1..=k)
        .map(|i| OrderResidual { order: i, angular: map.a[i].nonconstant_norm(), radial: map.b[i].nonconstant_norm() })
        .collect();
    Ok(NormalFormResult {
        alpha_bar: (1..=k).map(|i| map.a[i].mean()).collect(),
        beta_bar: (1..=k).map(|i| map.b[i].mean()).collect(),
        lambda: map.b[0].mean(),
        curve_lambda: lm.lambda,
        transform_stack: stack,
        residual_report,
        steps,
        reduced: map,
        k,
        params: lm.params.clone(),
        curve: lm.curve.clone(),
        log_residual,
    })
}

/// Translated curve, localization and reduction in one call.
pub fn normal_form(p: &Params, pert: &Perturbation, k: usize) -> Result<NormalFormResult, NormalFormError> {
    let (tc, _) = russmann::solve_translated_curve(p, pert, None)?;
    let lm = localize(p, pert, &tc, k.max(DEFAULT_K))?;
    reduce(&lm, &p.alpha, k)
}

/// Root of `R = λ + Σ β̄_i R^i` by Newton from `−λ/(β̄₁ − 1)`.
pub fn invariant_radius(nf: &NormalFormResult) -> Result<f64, NormalFormError> {
    let b1 = nf.beta_bar[0];
    if !((b1 - 1.0).abs() > 1e-8) {
        return Err(NormalFormError::NoRoot);
    }
    let f = |r: f64| nf.lambda + nf.beta_bar.iter().rev().fold(0.0, |acc, b| (acc + b) * r) - r;
    let mut r = -nf.lambda / (b1 - 1.0);
    for _ in 0..50 {
        let fr = f(r);
        if fr.abs() <= 1e-13 * (1.0 + nf.lambda.abs()) && fr.abs() <= 1e-13 {
            return Ok(r);
        }
        let step = fr / (nf.multiplier_at(r) - 1.0);
        r -= step;
        if !(r.abs() <= 1.0) {
            return Err(NormalFormError::NoRoot);
        }
        if step.abs() <= 1e-17 {
            break;
        }
    }
    if f(r).abs() <= 1e-13 {
        Ok(r)
    } else {
        Err(NormalFormError::NoRoot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    Thm1,
    Thm2,
    OnCAlpha,
    Unresolved,
}

impl RegionTag {
    pub fn name(&self) -> &'static str {
        match self {
            RegionTag::Thm1 => "thm1_region",
            RegionTag::Thm2 => "thm2_region",
            RegionTag::OnCAlpha => "on_c_alpha",
            RegionTag::Unresolved => "unresolved",
        }
    }

    pub fn parse(s: &str) -> Option<RegionTag> {
        [RegionTag::Thm1, RegionTag::Thm2, RegionTag::OnCAlpha, RegionTag::Unresolved]
            .into_iter()
            .find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegionConfig {
    pub c2: f64,
    pub eta_cap: f64,
    /// Solve for `λ` when it is not supplied (`ε > 0`).
    pub solve_lambda: bool,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig { c2: DEFAULT_C2, eta_cap: DEFAULT_ETA_CAP, solve_lambda: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub nu: f64,
    pub eta: f64,
    pub eps: f64,
    pub tag: RegionTag,
    pub in_thm1: bool,
    pub in_thm2: bool,
    pub on_c_alpha: bool,
    pub residual: Option<f64>,
    pub lambda: Option<f64>,
}

/// Gate at the best `k = η/6` under the cap.
pub fn in_thm1_region(p: &Params, pert: &Perturbation, eta_cap: f64) -> bool {
    graphflow::gate_with_cap(p, pert, p.eta / 6.0, eta_cap).admissible
}

/// `η ≥ c₂ ε` and `η ≥ √(2π)|ν − α|`.
pub fn in_thm2_region(p: &Params, c2: f64) -> bool {
    p.eta >= c2 * p.eps && p.eta >= math::sqrt(TAU) * (p.nu - p.alpha.alpha()).abs()
}

pub fn classify_region(p: &Params, pert: &Perturbation) -> RegionReport {
    classify_region_with(p, pert, &RegionConfig::default(), None)
}

/// Tag priority: Theorem 1, then `C_α`, then Theorem 2.
pub fn classify_region_with(
    p: &Params,
    pert: &Perturbation,
    cfg: &RegionConfig,
    lambda: Option<f64>,
) -> RegionReport {
    let in_thm1 = in_thm1_region(p, pert, cfg.eta_cap);
    let in_thm2 = in_thm2_region(p, cfg.c2);
    let lambda = lambda.or_else(|| {
        if p.eps == 0.0 {
            Some(maps::translation_tau(p))
        } else if cfg.solve_lambda {
            russmann::solve_translated_curve(p, pert, None).ok().map(|(tc, _)| tc.lambda)
        } else {
            None
        }
    });
    let on_c_alpha = lambda.is_some_and(|l| l.abs() <= C_ALPHA_TOL);
    let tag = if in_thm1 {
        RegionTag::Thm1
    } else if on_c_alpha {
        RegionTag::OnCAlpha
    } else if in_thm2 {
        RegionTag::Thm2
    } else {
        RegionTag::Unresolved
    };
    RegionReport { nu: p.nu, eta: p.eta, eps: p.eps, tag, in_thm1, in_thm2, on_c_alpha, residual: None, lambda }
}

/// The reduced map recentred at `R₀`.
struct Recentred<'a> {
    map: &'a SeriesMap,
    r0: f64,
}

impl CylinderMap for Recentred<'_> {
    fn apply(&self, pt: Point) -> Result<Point, MapError> {
        let z = self.map.apply((pt.0, pt.1 + self.r0));
        Ok((z.0, z.1 - self.r0))
    }

    fn jacobian(&self, pt: Point) -> Result<Matrix2, MapError> {
        Ok(self.map.jacobian((pt.0, pt.1 + self.r0)))
    }
}

#[derive(Debug, Clone)]
pub struct VerifiedCircle {
    /// Sup over the grid of `|ρ′ − ρ*(θ′)|` for `(θ′, ρ′) = Q(θ, ρ*(θ))`.
    pub residual: f64,
    /// The circle as `ρ = ρ*(θ)` in raw coordinates.
    pub raw_graph: TrigPoly,
    pub r0: f64,
    /// Linear multiplier of the recentred map.
    pub multiplier: f64,
    pub fixed: FixedGraph,
}

/// Residual of the circle found by the graph transform on the recentred
/// reduced map, measured for `Q` in raw coordinates.
pub fn verify_circle_in_region(
    p: &Params,
    pert: &Perturbation,
    nf: &NormalFormResult,
) -> Result<f64, NormalFormError> {
    Ok(verify_circle_detailed(p, pert, nf, &RegionConfig::default(), 512)?.residual)
}

pub fn verify_circle_detailed(
    p: &Params,
    pert: &Perturbation,
    nf: &NormalFormResult,
    cfg: &RegionConfig,
    m: usize,
) -> Result<VerifiedCircle, NormalFormError> {
    if !in_thm2_region(p, cfg.c2) {
        return Err(NormalFormError::OutsideRegion);
    }
    let r0 = invariant_radius(nf)?;
    let multiplier = nf.multiplier_at(r0);
    let map = Recentred { map: &nf.reduced, r0 };
    let opts = SolveOptions { grid: m, tol: 1e-12, alt_starts: Vec::new() };
    let fixed = graphflow::solve_fixed_graph(&map, 0.01, multiplier.abs().max(0.5), &opts)?;
    let graph = &fixed.graph;
    let raw_at = |xi: f64| nf.to_raw((xi, r0 + graph.eval(xi)));
    let mut rho = Vec::with_capacity(m);
    for t in math::angle_grid(m) {
        let u = |xi: f64| {
            let a = raw_at(xi).map(|z| z.0).unwrap_or(f64::NAN);
            let b = raw_at(xi + 1e-6).map(|z| z.0).unwrap_or(f64::NAN);
            (a, (b - a) / 1e-6)
        };
        let xi = trig::invert_monotone(u, t, t - 1.0, t + 1.0, 1e-14).map_err(RussmannError::from)?;
        rho.push(raw_at(xi)?.1);
    }
    let raw_graph = TrigPoly::from_real_samples(&rho, m / 4, 0.0);
    let mut residual: f64 = 0.0;
    for (t, r) in math::angle_grid(m).into_iter().zip(&rho) {
        let img = maps::eval_q(p, pert, &Frame::Raw, (t, *r))?;
        residual = residual.max((img.1 - raw_graph.eval_real(img.0)).abs());
    }
    Ok(VerifiedCircle { residual, raw_graph, r0, multiplier, fixed })
}
