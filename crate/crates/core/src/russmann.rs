//! Translated curves: `(γ, h, λ)` with
//! `Q(θ, γ(θ)) = (h∘R_{2πα}∘h⁻¹(θ), λ + γ(h∘R_{2πα}∘h⁻¹(θ)))`,
//! computed by Newton's method on the parameterization
//! `K(ξ) = (h(ξ), Γ(ξ))`, `Γ = γ∘h`, in the frame where
//! `P = (θ + 2πα + Cr, r e^{−2πη} + τ)`.
//!
//! Each step linearizes `Q∘K − K∘R_{2πα} − (0, λ)` in the adapted frame
//! `M = [[h′, 0], [Γ′, 1]]`, which makes the linear operator triangular:
//! the normal row is a difference equation with variable multiplier (reduced
//! to a constant one by the log solve), the tangential row is the plain
//! cohomological equation whose solvability fixes the λ-correction.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::diophantine::{rotation_number, DiophantineNumber, RotationEstimate, RotationMode};
use crate::maps::{self, Frame, FrameMap, FrameTag, MapError, Params, Perturbation, Point};
use crate::math::{self, TAU};
use crate::smalldiv::{self, DifferenceProblem, SmallDivError};
use crate::trig::{CircleLift, TrigError, TrigPoly};

#[derive(Debug, Clone, PartialEq)]
pub enum RussmannError {
    NoConvergence { defect: f64, iterations: usize },
    DivisorFailure(SmallDivError),
    /// The first Newton step increased the defect, or `ε > ε₀`.
    EpsTooLarge { eps: f64, defect: f64 },
    /// `λ` does not change sign on the bracket.
    NoSignChange { lambda_lo: f64, lambda_hi: f64 },
    Map(MapError),
    Lift(TrigError),
    InvalidInput(&'static str),
}

impl fmt::Display for RussmannError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RussmannError::NoConvergence { defect, iterations } => {
                write!(f, "Newton stalled at defect {defect:e} after {iterations} iterations")
            }
            RussmannError::DivisorFailure(e) => write!(f, "difference equation failed: {e}"),
            RussmannError::EpsTooLarge { eps, defect } => {
                write!(f, "perturbation too large (eps = {eps:e}, defect {defect:e})")
            }
            RussmannError::NoSignChange { lambda_lo, lambda_hi } => {
                write!(f, "lambda has no sign change on bracket ({lambda_lo:e}, {lambda_hi:e})")
            }
            RussmannError::Map(e) => write!(f, "{e}"),
            RussmannError::Lift(e) => write!(f, "{e}"),
            RussmannError::InvalidInput(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl From<SmallDivError> for RussmannError {
    fn from(e: SmallDivError) -> Self {
        RussmannError::DivisorFailure(e)
    }
}

impl From<MapError> for RussmannError {
    fn from(e: MapError) -> Self {
        RussmannError::Map(e)
    }
}

impl From<TrigError> for RussmannError {
    fn from(e: TrigError) -> Self {
        RussmannError::Lift(e)
    }
}

#[derive(Debug, Clone)]
pub struct RussmannConfig {
    /// Fourier cutoff of `h − id` and `Γ`.
    pub n: usize,
    /// Working grid (power of two, at least `4n`).
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest `ε` accepted.
    pub eps0: f64,
    /// Grid on which the reported defect is measured.
    pub defect_grid: usize,
}

impl Default for RussmannConfig {
    fn default() -> Self {
        RussmannConfig { n: 64, grid: 256, tol: 1e-12, max_iter: 30, eps0: 1e-3, defect_grid: 512 }
    }
}

impl RussmannConfig {
    /// Same configuration with the grid and cutoff doubled.
    pub fn refined(&self) -> RussmannConfig {
        RussmannConfig { n: 2 * self.n, grid: 2 * self.grid, defect_grid: 2 * self.defect_grid, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct TranslatedCurve {
    /// `γ` as a function of `θ`.
    pub gamma: TrigPoly,
    /// `Γ = γ∘h`, as a function of `ξ`.
    pub gamma_xi: TrigPoly,
    /// `h = id + periodic`, with the periodic part vanishing at 0.
    pub h: CircleLift,
    pub lambda: f64,
    /// Sup over the defect grid of the invariance error in `θ` form.
    pub defect: f64,
    pub params: Params,
}

impl TranslatedCurve {
    /// `(h, γ, λ) = (id, 0, τ)`: exact at `ε = 0`.
    pub fn unperturbed(p: &Params, n: usize) -> TranslatedCurve {
        TranslatedCurve {
            gamma: TrigPoly::zero(n),
            gamma_xi: TrigPoly::zero(n),
            h: CircleLift::near_identity(TrigPoly::zero(n)),
            lambda: maps::translation_tau(p),
            defect: f64::INFINITY,
            params: p.clone(),
        }
    }

    /// Mean of `γ` (gauge observable).
    pub fn gamma_mean(&self) -> f64 {
        self.gamma.mean()
    }

    /// `h∘R_{2πα}∘h⁻¹(θ)`.
    pub fn tangential(&self, theta: f64) -> Result<f64, RussmannError> {
        let xi = self.invert_h(theta)?;
        Ok(self.h.eval(xi + TAU * self.params.alpha.alpha()))
    }

    pub fn invert_h(&self, theta: f64) -> Result<f64, RussmannError> {
        let guess = theta - self.h.periodic_part().eval_real(theta);
        Ok(self.h.invert_from(theta, guess, 1e-15 * (1.0 + theta.abs()))?)
    }

    /// Frame `(ξ, x)` with `θ = h(ξ)`, `r = Γ(ξ) + x`.
    pub fn frame(&self) -> Frame {
        Frame::Custom(Arc::new(RussFrame { h: self.h.clone(), gamma_xi: self.gamma_xi.clone() }))
    }

    /// Rotation number of `θ ↦ Θ(θ, γ(θ))` (the tangential dynamics of `Q`
    /// on the curve) over `n` iterates.
    pub fn tangential_rotation(&self, pert: &Perturbation, n: usize) -> Result<RotationEstimate, RussmannError> {
        let mut th = Vec::with_capacity(n + 1);
        let mut t = 0.0;
        th.push(t);
        for _ in 0..n {
            let z = maps::eval_q(&self.params, pert, &Frame::RussR, (t, self.gamma.eval_real(t)))?;
            t = z.0;
            th.push(t);
        }
        rotation_number(&th, RotationMode::Birkhoff).map_err(|_| RussmannError::InvalidInput("orbit too short"))
    }
}

/// The `(ξ, x)` coordinates attached to a translated curve.
#[derive(Debug, Clone)]
pub struct RussFrame {
    pub h: CircleLift,
    pub gamma_xi: TrigPoly,
}

impl FrameMap for RussFrame {
    fn tag(&self) -> FrameTag {
        FrameTag::RussXiX
    }

    fn to_frame(&self, p: &Params, raw: Point) -> Result<Point, MapError> {
        let r = raw.1 - maps::russ_offset(p);
        let guess = raw.0 - self.h.periodic_part().eval_real(raw.0);
        let xi = self
            .h
            .invert_from(raw.0, guess, 1e-15 * (1.0 + raw.0.abs()))
            .map_err(|_| MapError::Frame("h not invertible"))?;
        Ok((xi, r - self.gamma_xi.eval_real(xi)))
    }

    fn from_frame(&self, p: &Params, pt: Point) -> Result<Point, MapError> {
        let r = self.gamma_xi.eval_real(pt.0) + pt.1;
        Ok((self.h.eval(pt.0), r + maps::russ_offset(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRecord {
    /// Defect before the step.
    pub defect: f64,
    pub step_gamma: f64,
    pub step_h: f64,
    pub step_lambda: f64,
}

#[derive(Debug, Clone, Default)]
pub struct NewtonTrace {
    pub records: Vec<NewtonRecord>,
    /// Defect after the last step.
    pub final_defect: f64,
}

impl NewtonTrace {
    pub fn defects(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.records.iter().map(|r| r.defect).collect();
        d.push(self.final_defect);
        d
    }

    /// `max d_{n+1}/d_n²` over consecutive pairs with `d_n < 10⁻³` and
    /// `d_{n+1}` above the round-off floor `10⁻¹³`.
    pub fn quadratic_constant(&self) -> Option<f64> {
        let d = self.defects();
        d.windows(2)
            .filter(|w| w[0] < 1e-3 && w[0] > 0.0 && w[1] > 1e-13)
            .map(|w| w[1] / (w[0] * w[0]))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }

    pub fn iterations(&self) -> usize {
        self.records.len().max(1)
    }
}

struct State {
    p: TrigPoly,
    gam: TrigPoly,
    lambda: f64,
}

struct Fields {
    e1: Vec<f64>,
    e2: Vec<f64>,
    theta_r: Vec<f64>,
    r_r: Vec<f64>,
    hp_shift: Vec<f64>,
    gp_shift: Vec<f64>,
    hp: Vec<f64>,
    gp: Vec<f64>,
}

impl Fields {
    fn sup(&self) -> f64 {
        self.e1.iter().chain(&self.e2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn fields(p: &Params, pert: &Perturbation, st: &State, m: usize) -> Result<Fields, RussmannError> {
    let omega = TAU * p.alpha.alpha();
    let grid = math::angle_grid(m);
    let pv = st.p.sample_real(m);
    let gv = st.gam.sample_real(m);
    let dp = st.p.derivative();
    let dg = st.gam.derivative();
    let p_s = st.p.compose_rotation(omega).sample_real(m);
    let g_s = st.gam.compose_rotation(omega).sample_real(m);
    let hp: Vec<f64> = dp.sample_real(m).iter().map(|v| 1.0 + v).collect();
    let gp = dg.sample_real(m);
    let hp_shift: Vec<f64> = dp.compose_rotation(omega).sample_real(m).iter().map(|v| 1.0 + v).collect();
    let gp_shift = dg.compose_rotation(omega).sample_real(m);
    let mut f = Fields {
        e1: Vec::with_capacity(m),
        e2: Vec::with_capacity(m),
        theta_r: Vec::with_capacity(m),
        r_r: Vec::with_capacity(m),
        hp_shift,
        gp_shift,
        hp,
        gp,
    };
    for j in 0..m {
        let th = grid[j] + pv[j];
        let pt = (th, gv[j]);
        let img = maps::eval_q(p, pert, &Frame::RussR, pt)?;
        let jac = maps::jacobian_q(p, pert, &Frame::RussR, pt)?;
        f.e1.push(img.0 - (grid[j] + omega + p_s[j]));
        f.e2.push(img.1 - g_s[j] - st.lambda);
        f.theta_r.push(jac[0][1]);
        f.r_r.push(jac[1][1]);
    }
    Ok(f)
}

fn fit(v: &[f64], n: usize) -> TrigPoly {
    TrigPoly::from_real_samples(v, n, 0.0)
}

/// `w(ξ+2πα) − β w(ξ) = g` including the zero mode.
fn solve_twisted(beta: f64, g: &TrigPoly, alpha: &DiophantineNumber) -> Result<TrigPoly, SmallDivError> {
    let sol = smalldiv::solve_difference(&DifferenceProblem::new(1.0, beta, g.clone(), alpha.clone()))?;
    Ok(sol.full_solution().expect("beta differs from 1"))
}

/// One Newton step; returns the new state and the step sizes.
fn newton_step(
    p: &Params,
    st: &State,
    fl: &Fields,
    cfg: &RussmannConfig,
) -> Result<(State, NewtonRecord), RussmannError> {
    let (m, n) = (cfg.grid, cfg.n);
    let alpha = &p.alpha;
    let omega = TAU * alpha.alpha();
    let mut e1t = Vec::with_capacity(m);
    let mut e2t = Vec::with_capacity(m);
    let mut s = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for j in 0..m {
        let a = fl.e1[j] / fl.hp_shift[j];
        e1t.push(a);
        e2t.push(fl.e2[j] - fl.gp_shift[j] * a);
        let sj = fl.theta_r[j] / fl.hp_shift[j];
        s.push(sj);
        b.push(fl.r_r[j] - fl.gp_shift[j] * sj);
    }
    let b_poly = fit(&b, n);
    let log = smalldiv::solve_log_multiplicative_order(&b_poly, alpha, n)?;
    let x_shift = log.x.compose_rotation(omega).sample_real(m);
    let x_vals = log.x.sample_real(m);
    // β̄ w − w(+) = r / X(+)  ⇔  w(+) − β̄ w = −r / X(+).
    let rhs0: Vec<f64> = (0..m).map(|j| e2t[j] / x_shift[j]).collect();
    let rhs1: Vec<f64> = (0..m).map(|j| -1.0 / x_shift[j]).collect();
    let w0 = solve_twisted(log.beta1_bar, &fit(&rhs0, n), alpha)?.sample_real(m);
    let w1 = solve_twisted(log.beta1_bar, &fit(&rhs1, n), alpha)?.sample_real(m);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..m {
        num += s[j] * x_vals[j] * w0[j] + e1t[j];
        den += s[j] * x_vals[j] * w1[j];
    }
    let dlambda = -num / den;
    let w2: Vec<f64> = (0..m).map(|j| x_vals[j] * (w0[j] + dlambda * w1[j])).collect();
    let g1: Vec<f64> = (0..m).map(|j| s[j] * w2[j] + e1t[j]).collect();
    let g1p = fit(&g1, n);
    let sol = smalldiv::solve_difference(&DifferenceProblem::new(1.0, 1.0, g1p, alpha.clone()))?;
    let shift0 = sol.f.eval_real(0.0);
    let w1v: Vec<f64> = sol.f.sample_real(m).iter().map(|v| v - shift0).collect();
    let dh: Vec<f64> = (0..m).map(|j| fl.hp[j] * w1v[j]).collect();
    let dg: Vec<f64> = (0..m).map(|j| fl.gp[j] * w1v[j] + w2[j]).collect();
    let dh_p = fit(&dh, n);
    let dg_p = fit(&dg, n);
    let mut new_p = &st.p + &dh_p;
    let p0 = new_p.eval_real(0.0);
    new_p = &new_p - &TrigPoly::constant(0, p0);
    let new_g = &st.gam + &dg_p;
    let rec = NewtonRecord {
        defect: fl.sup(),
        step_gamma: dg_p.sup_norm(),
        step_h: dh_p.sup_norm(),
        step_lambda: dlambda.abs(),
    };
    Ok((State { p: new_p, gam: new_g, lambda: st.lambda + dlambda }, rec))
}

/// `γ(θ) = Γ(h⁻¹(θ))` fitted at order `n`, and the `θ`-form defect.
fn finalize(
    p: &Params,
    pert: &Perturbation,
    st: &State,
    cfg: &RussmannConfig,
) -> Result<TranslatedCurve, RussmannError> {
    let h = CircleLift::near_identity(st.p.clone());
    let mut tc = TranslatedCurve {
        gamma: TrigPoly::zero(cfg.n),
        gamma_xi: st.gam.clone(),
        h,
        lambda: st.lambda,
        defect: f64::INFINITY,
        params: p.clone(),
    };
    let m = cfg.grid;
    let mut vals = Vec::with_capacity(m);
    for t in math::angle_grid(m) {
        let xi = tc.invert_h(t)?;
        vals.push(st.gam.eval_real(xi));
    }
    tc.gamma = fit(&vals, cfg.n);
    tc.defect = theta_defect(&tc, pert, cfg.defect_grid)?;
    Ok(tc)
}

/// Sup over `m` angles of the error of
/// `Q(θ, γ(θ)) = (h(ξ + 2πα), λ + Γ(ξ + 2πα))`, `ξ = h⁻¹(θ)`.
pub fn theta_defect(tc: &TranslatedCurve, pert: &Perturbation, m: usize) -> Result<f64, RussmannError> {
    let omega = TAU * tc.params.alpha.alpha();
    let mut worst: f64 = 0.0;
    for t in math::angle_grid(m) {
        let xi = tc.invert_h(t)?;
        let r = tc.gamma_xi.eval_real(xi);
        let img = maps::eval_q(&tc.params, pert, &Frame::RussR, (t, r))?;
        let target = (tc.h.eval(xi + omega), tc.lambda + tc.gamma_xi.eval_real(xi + omega));
        worst = worst.max((img.0 - target.0).abs()).max((img.1 - target.1).abs());
    }
    Ok(worst)
}

/// Newton iteration from `guess` (or `(id, 0, τ)`).
pub fn solve_translated_curve(
    p: &Params,
    pert: &Perturbation,
    guess: Option<&TranslatedCurve>,
) -> Result<(TranslatedCurve, NewtonTrace), RussmannError> {
    solve_translated_curve_with(p, pert, guess, &RussmannConfig::default())
}

pub fn solve_translated_curve_with(
    p: &Params,
    pert: &Perturbation,
    guess: Option<&TranslatedCurve>,
    cfg: &RussmannConfig,
) -> Result<(TranslatedCurve, NewtonTrace), RussmannError> {
    p.validate()?;
    if p.eps > cfg.eps0 {
        return Err(RussmannError::EpsTooLarge { eps: p.eps, defect: f64::NAN });
    }
    if cfg.grid < 4 * cfg.n || !cfg.grid.is_power_of_two() {
        return Err(RussmannError::InvalidInput("grid must be a power of two at least 4n"));
    }
    let mut st = match guess {
        Some(g) => State {
            p: g.h.periodic_part().truncate(cfg.n),
            gam: g.gamma_xi.truncate(cfg.n),
            lambda: g.lambda,
        },
        None => State { p: TrigPoly::zero(cfg.n), gam: TrigPoly::zero(cfg.n), lambda: maps::translation_tau(p) },
    };
    let mut trace = NewtonTrace::default();
    let mut best = f64::INFINITY;
    let mut stall = 0;
    for it in 0..=cfg.max_iter {
        let fl = fields(p, pert, &st, cfg.grid)?;
        let d = fl.sup();
        if it == 1 && d > trace.records[0].defect {
            return Err(RussmannError::EpsTooLarge { eps: p.eps, defect: d });
        }
        if d <= cfg.tol {
            trace.final_defect = d;
            if trace.records.is_empty() {
                trace.records.push(NewtonRecord { defect: d, step_gamma: 0.0, step_h: 0.0, step_lambda: 0.0 });
            }
            let tc = finalize(p, pert, &st, cfg)?;
            return Ok((tc, trace));
        }
        if d < 0.5 * best {
            best = d;
            stall = 0;
        } else {
            stall += 1;
            if stall >= 10 {
                return Err(RussmannError::NoConvergence { defect: d, iterations: it });
            }
        }
        if it == cfg.max_iter {
            return Err(RussmannError::NoConvergence { defect: d, iterations: it });
        }
        let (next, rec) = newton_step(p, &st, &fl, cfg)?;
        trace.records.push(rec);
        st = next;
    }
    unreachable!()
}

/// Central difference `(λ(ν+δ) − λ(ν−δ))/(2δ)`.
pub fn dlambda_dnu(p: &Params, pert: &Perturbation, delta: f64) -> Result<f64, RussmannError> {
    dlambda_dnu_with(p, pert, delta, &RussmannConfig::default())
}

pub fn dlambda_dnu_with(
    p: &Params,
    pert: &Perturbation,
    delta: f64,
    cfg: &RussmannConfig,
) -> Result<f64, RussmannError> {
    let (hi, _) = solve_translated_curve_with(&p.with_nu(p.nu + delta), pert, None, cfg)?;
    let (lo, _) = solve_translated_curve_with(&p.with_nu(p.nu - delta), pert, Some(&hi), cfg)?;
    Ok((hi.lambda - lo.lambda) / (2.0 * delta))
}

/// `η ≥ 4Mε/π`, the validity threshold for `∂λ/∂ν > 0`.
pub fn eta_threshold(p: &Params, pert: &Perturbation) -> f64 {
    4.0 * pert.c2_bound * p.eps / math::PI
}

#[derive(Debug, Clone)]
pub struct CAlphaPoint {
    pub nu_star: f64,
    pub curve: TranslatedCurve,
    /// `|ν* − α| / ε` (zero at `ε = 0`).
    pub k: f64,
    pub evaluations: usize,
}

/// Root of `ν ↦ λ(ν)` on the bracket by a safeguarded secant iteration.
pub fn find_c_alpha(
    p0: &Params,
    pert: &Perturbation,
    bracket: (f64, f64),
) -> Result<CAlphaPoint, RussmannError> {
    find_c_alpha_with(p0, pert, bracket, &RussmannConfig::default(), None)
}

pub fn find_c_alpha_with(
    p0: &Params,
    pert: &Perturbation,
    bracket: (f64, f64),
    cfg: &RussmannConfig,
    warm: Option<&TranslatedCurve>,
) -> Result<CAlphaPoint, RussmannError> {
    let (mut a, mut b) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let solve = |nu: f64, g: Option<&TranslatedCurve>| solve_translated_curve_with(&p0.with_nu(nu), pert, g, cfg);
    let (ca, _) = solve(a, warm)?;
    let (cb, _) = solve(b, Some(&ca))?;
    let mut evaluations = 2;
    let (mut fa, mut fb) = (ca.lambda, cb.lambda);
    if fa == 0.0 {
        return Ok(finish(p0, a, ca, evaluations));
    }
    if fb == 0.0 {
        return Ok(finish(p0, b, cb, evaluations));
    }
    if fa.signum() == fb.signum() {
        return Err(RussmannError::NoSignChange { lambda_lo: fa, lambda_hi: fb });
    }
    let mut best = if fa.abs() < fb.abs() { (a, ca) } else { (b, cb) };
    // Illinois variant of regula falsi: secant steps that keep the bracket.
    let mut side = 0i8;
    for _ in 0..60 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let (cx, _) = solve(x, Some(&best.1))?;
        evaluations += 1;
        let fx = cx.lambda;
        if fx.abs() <= 1e-11 || (b - a) <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            return Ok(finish(p0, x, cx, evaluations));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if fx.abs() < best.1.lambda.abs() {
            best = (x, cx);
        }
    }
    let (x, cx) = best;
    if cx.lambda.abs() <= 1e-11 {
        Ok(finish(p0, x, cx, evaluations))
    } else {
        Err(RussmannError::NoConvergence { defect: cx.lambda.abs(), iterations: evaluations })
    }
}

fn finish(p0: &Params, nu: f64, curve: TranslatedCurve, evaluations: usize) -> CAlphaPoint {
    let dev = (nu - p0.alpha.alpha()).abs();
    let k = if p0.eps > 0.0 { dev / p0.eps } else { 0.0 };
    CAlphaPoint { nu_star: nu, curve, k, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::golden_mean;

    fn params(dnu: f64, eta: f64, eps: f64) -> Params {
        Params::new(golden_mean() + dnu, eta, eps, DiophantineNumber::golden()).unwrap()
    }

    #[test]
    fn unperturbed_is_exact() {
        let p = params(0.02, 0.1, 0.0);
        let (tc, tr) = solve_translated_curve(&p, &Perturbation::sin_cos(), None).unwrap();
        assert_eq!(tr.iterations(), 1);
        assert_eq!(tc.defect, 0.0);
        assert_eq!(tc.lambda, maps::translation_tau(&p));
        assert_eq!(tc.gamma.sup_norm(), 0.0);
        assert_eq!(tc.h.periodic_part().sup_norm(), 0.0);
    }

    #[test]
    fn perturbed_sin_cos() {
        let p = params(0.0, 0.1, 1e-4);
        let (tc, tr) = solve_translated_curve(&p, &Perturbation::sin_cos(), None).unwrap();
        assert!(tc.defect <= 1e-10, "{}", tc.defect);
        assert!((tc.lambda - maps::translation_tau(&p)).abs() <= 10.0 * 1e-4);
        assert!(tc.h.periodic_part().eval_real(0.0).abs() < 1e-15);
        let k = tr.quadratic_constant();
        assert!(k.is_some() && k.unwrap().is_finite(), "{:?}", tr.defects());
    }

    #[test]
    fn conjugated_rotation_is_alpha() {
        let p = params(0.01, 0.1, 1e-4);
        let (tc, _) = solve_translated_curve(&p, &Perturbation::sin_cos(), None).unwrap();
        let mut th = alloc::vec![0.0];
        for i in 0..2000 {
            let next = tc.tangential(th[i]).unwrap();
            th.push(next);
        }
        let r = rotation_number(&th, RotationMode::Birkhoff).unwrap();
        assert!((r.value - golden_mean()).abs() < 1e-10);
        let r = tc.tangential_rotation(&Perturbation::sin_cos(), 2000).unwrap();
        assert!((r.value - golden_mean()).abs() < 1e-8, "{}", r.value - golden_mean());
    }

    #[test]
    fn unperturbed_slope() {
        let p = params(0.01, 0.1, 0.0);
        let d = dlambda_dnu(&p, &Perturbation::sin_cos(), 1e-3).unwrap();
        assert!((d - TAU * 0.1).abs() < 1e-12);
    }

    #[test]
    fn unperturbed_c_alpha() {
        let p = params(0.0, 0.1, 0.0);
        let a = golden_mean();
        let r = find_c_alpha(&p, &Perturbation::sin_cos(), (a - 0.01, a + 0.013)).unwrap();
        assert!((r.nu_star - a).abs() < 1e-14);
    }

    #[test]
    fn one_sided_bracket() {
        let p = params(0.0, 0.1, 1e-4);
        let a = golden_mean();
        assert!(matches!(
            find_c_alpha(&p, &Perturbation::sin_cos(), (a + 0.01, a + 0.02)),
            Err(RussmannError::NoSignChange { .. })
        ));
    }

    #[test]
    fn frame_round_trip() {
        let p = params(0.01, 0.1, 1e-3);
        let (tc, _) = solve_translated_curve(&p, &Perturbation::sin_cos(), None).unwrap();
        let fr = tc.frame();
        for z in [(0.1, 0.01), (3.0, -0.2), (7.0, 0.3)] {
            let back = fr.from_frame(&p, fr.to_frame(&p, z).unwrap()).unwrap();
            assert!((back.0 - z.0).abs() < 1e-10 && (back.1 - z.1).abs() < 1e-10);
        }
    }

    fn shifted_cos() -> Perturbation {
        let n = 4;
        Perturbation::new(
            &[(0, TrigPoly::sin_mode(n, 1, 1.0))],
            &[(0, &TrigPoly::cos_mode(n, 1, 1.0) + &TrigPoly::constant(n, 0.5))],
        )
    }

    #[test]
    fn regridding_leaves_lambda() {
        let p = params(0.01, 0.1, 1e-4);
        let cfg = RussmannConfig::default();
        let (a, _) = solve_translated_curve_with(&p, &Perturbation::sin_cos(), None, &cfg).unwrap();
        let (b, _) = solve_translated_curve_with(&p, &Perturbation::sin_cos(), None, &cfg.refined()).unwrap();
        assert!((a.lambda - b.lambda).abs() <= 1e-10);
    }

    #[test]
    fn perturbed_slope_near_unperturbed() {
        let p = params(0.0, 0.1, 1e-4);
        let d = dlambda_dnu(&p, &Perturbation::sin_cos(), 1e-4).unwrap();
        assert!((d / (TAU * 0.1) - 1.0).abs() < 0.1, "{d}");
    }

    #[test]
    fn slope_positive_above_threshold() {
        let pert = Perturbation::sin_cos();
        let p = params(0.0, 0.01, 1e-4);
        assert!(p.eta >= eta_threshold(&p, &pert));
        assert!(dlambda_dnu(&p, &pert, 1e-5).unwrap() > 0.0);
    }

    #[test]
    fn c_alpha_root_is_order_eps() {
        let pert = shifted_cos();
        let a = golden_mean();
        let p = params(0.0, 0.1, 1e-4);
        let r = find_c_alpha(&p, &pert, (a - 0.01, a + 0.01)).unwrap();
        assert!(r.curve.lambda.abs() <= 1e-11);
        assert!(r.curve.defect <= 1e-9);
        assert!(r.k > 0.01 && r.k < 10.0, "{}", r.k);
        let rot = r.curve.tangential_rotation(&pert, 4000).unwrap();
        assert!((rot.value - a).abs() < 1e-8);
    }
}
