//! The dissipative twist family
//! `P(θ,ρ) = (θ + 2πν + Cρ, ρ e^{−2πη})`, `C = (1 − e^{−2πη})/η`,
//! its perturbation `Q = P + ε(f, g)`, and the closed-form changes of
//! variables used to localize near the circle of rotation `2πα`.
//!
//! Angles are lifts throughout: `θ` is never reduced modulo `2π`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::diophantine::DiophantineNumber;
use crate::jet::Jet;
use crate::math::{self, TAU};
use crate::trig::TrigPoly;

pub type Point = (f64, f64);

/// Default validity band `|ρ| ≤ 2`.
pub const DEFAULT_BAND: f64 = 2.0;

/// Safety factor applied to grid maxima of derivatives.
pub const BOUND_SAFETY: f64 = 1.05;

const BOUND_GRID_THETA: usize = 512;
const BOUND_GRID_RHO: usize = 65;

#[derive(Debug, Clone, PartialEq)]
pub enum MapError {
    OutOfDomain { rho: f64, band: f64 },
    InvalidParams(&'static str),
    /// No trapping band up to `100 ε/η`.
    NotFound,
    /// A frame conversion failed (e.g. a non-invertible conjugacy).
    Frame(&'static str),
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::OutOfDomain { rho, band } => write!(f, "radius {rho} outside band ±{band}"),
            MapError::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            MapError::NotFound => write!(f, "no trapping annulus up to 100 eps/eta"),
            MapError::Frame(m) => write!(f, "frame conversion failed: {m}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Params {
    pub nu: f64,
    pub eta: f64,
    pub eps: f64,
    pub alpha: DiophantineNumber,
}

impl Params {
    pub fn new(nu: f64, eta: f64, eps: f64, alpha: DiophantineNumber) -> Result<Params, MapError> {
        let p = Params { nu, eta, eps, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MapError> {
        if !(self.eta != 0.0 && self.eta.is_finite()) {
            return Err(MapError::InvalidParams("eta must be finite and nonzero"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(MapError::InvalidParams("eps must be finite and nonnegative"));
        }
        if !self.nu.is_finite() {
            return Err(MapError::InvalidParams("nu must be finite"));
        }
        Ok(())
    }

    /// Twist `C = (1 − e^{−2πη})/η`.
    pub fn twist(&self) -> f64 {
        math::twist(self.eta)
    }

    /// Normal multiplier `e^{−2πη}`.
    pub fn contraction(&self) -> f64 {
        math::exp(-TAU * self.eta)
    }

    pub fn with_nu(&self, nu: f64) -> Params {
        Params { nu, ..self.clone() }
    }

    pub fn with_eta(&self, eta: f64) -> Params {
        Params { eta, ..self.clone() }
    }

    pub fn with_eps(&self, eps: f64) -> Params {
        Params { eps, ..self.clone() }
    }
}

/// `τ = 2πη(ν − α)`.
pub fn translation_tau(p: &Params) -> f64 {
    TAU * p.eta * (p.nu - p.alpha.alpha())
}

/// `1 + 2πη/(e^{−2πη} − 1)`, with a series for small `η`.
pub fn radius_bracket(eta: f64) -> f64 {
    let x = TAU * eta;
    if x.abs() < 1e-4 {
        // 1 − x/(1 − e^{−x}) = −x/2 − x²/12 + x⁴/720
        -x / 2.0 - x * x / 12.0 + x * x * x * x / 720.0
    } else {
        1.0 + x / math::expm1(-x)
    }
}

/// Radius (in the shifted frame `r = ρ + ν − α`) of the unique circle of
/// rotation `2πα` of `P`.
pub fn radius_r_alpha(p: &Params) -> f64 {
    (p.nu - p.alpha.alpha()) * radius_bracket(p.eta)
}

/// Offset `s` with `ρ = r + s` in the frame where `P` reads
/// `(θ + 2πα + Cr, r e^{−2πη} + τ)`: `s = 2πη(ν − α)/(e^{−2πη} − 1)`.
pub fn russ_offset(p: &Params) -> f64 {
    let x = TAU * p.eta;
    let denom = if x.abs() < 1e-8 { -x } else { math::expm1(-x) };
    x * (p.nu - p.alpha.alpha()) / denom
}

/// A function `Σ_j f_j(θ) ρ^j` with precomputed `θ`-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    terms: Vec<TrigPoly>,
    d1: Vec<TrigPoly>,
    d2: Vec<TrigPoly>,
}

impl PolyField {
    pub fn new(entries: &[(usize, TrigPoly)]) -> PolyField {
        let deg = entries.iter().map(|(j, _)| *j).max().unwrap_or(0);
        let mut terms = vec![TrigPoly::zero(0); deg + 1];
        for (j, p) in entries {
            terms[*j] = &terms[*j] + p;
        }
        let d1: Vec<TrigPoly> = terms.iter().map(|t| t.derivative()).collect();
        let d2 = d1.iter().map(|t| t.derivative()).collect();
        PolyField { terms, d1, d2 }
    }

    pub fn zero() -> PolyField {
        PolyField::new(&[])
    }

    /// `(j, f_j)` for the nonzero coefficients.
    pub fn entries(&self) -> Vec<(usize, TrigPoly)> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.norm_s(0.0) > 0.0)
            .map(|(j, t)| (j, t.clone()))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.norm_s(0.0) == 0.0)
    }

    /// `f_j(θ)` for every `j`.
    pub fn coeffs_at(&self, theta: f64) -> Vec<f64> {
        self.terms.iter().map(|t| t.eval_real(theta)).collect()
    }

    fn poly(coeffs: &[f64], rho: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * rho + c)
    }

    fn poly_d(coeffs: &[f64], rho: f64) -> f64 {
        coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (j, c)| acc * rho + j as f64 * c)
    }

    fn poly_dd(coeffs: &[f64], rho: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * rho + (j * (j - 1)) as f64 * c)
    }

    pub fn value(&self, theta: f64, rho: f64) -> f64 {
        Self::poly(&self.coeffs_at(theta), rho)
    }

    /// `(∂_θ, ∂_ρ)`.
    pub fn gradient(&self, theta: f64, rho: f64) -> (f64, f64) {
        let c = self.coeffs_at(theta);
        let dc: Vec<f64> = self.d1.iter().map(|t| t.eval_real(theta)).collect();
        (Self::poly(&dc, rho), Self::poly_d(&c, rho))
    }

    /// Exact expansion of `x ↦ f(θ, ρ0 + x)` to order `n`.
    pub fn rho_jet(&self, theta: f64, rho0: f64, n: usize) -> Jet {
        let c = self.coeffs_at(theta);
        Jet::new(c, self.degree().max(n)).shift(rho0).truncate(n)
    }

    /// `(sup|∂_θ f|, sup|∂_ρ f|, sup of second derivatives)` on the bound
    /// grid over `𝕋 × [−1, 1]`.
    fn grid_sups(&self) -> (f64, f64, f64) {
        let m = BOUND_GRID_THETA;
        let vals: Vec<Vec<f64>> = self.terms.iter().map(|t| sample_any(t, m)).collect();
        let d1: Vec<Vec<f64>> = self.d1.iter().map(|t| sample_any(t, m)).collect();
        let d2: Vec<Vec<f64>> = self.d2.iter().map(|t| sample_any(t, m)).collect();
        let (mut st, mut sr, mut s2) = (0.0f64, 0.0f64, 0.0f64);
        let mut c = vec![0.0; self.terms.len()];
        let mut c1 = c.clone();
        let mut c2 = c.clone();
        for i in 0..m {
            for j in 0..self.terms.len() {
                c[j] = vals[j][i];
                c1[j] = d1[j][i];
                c2[j] = d2[j][i];
            }
            for l in 0..BOUND_GRID_RHO {
                let rho = -1.0 + 2.0 * l as f64 / (BOUND_GRID_RHO - 1) as f64;
                st = st.max(Self::poly(&c1, rho).abs());
                sr = sr.max(Self::poly_d(&c, rho).abs());
                let tt = Self::poly(&c2, rho).abs();
                let tr = Self::poly_d(&c1, rho).abs();
                let rr = Self::poly_dd(&c, rho).abs();
                s2 = s2.max(tt).max(tr).max(rr);
            }
        }
        (st, sr, s2)
    }
}

fn sample_any(t: &TrigPoly, m: usize) -> Vec<f64> {
    if 2 * t.order() < m {
        t.sample_real(m)
    } else {
        math::angle_grid(m).into_iter().map(|x| t.eval_real(x)).collect()
    }
}

/// Perturbation `(f, g)` with its derivative bounds on `𝕋 × [−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub f: PolyField,
    pub g: PolyField,
    pub a_f: f64,
    pub a_g: f64,
    /// Bound `M` on all second derivatives of `f` and `g`.
    pub c2_bound: f64,
}

impl Perturbation {
    pub fn new(f: &[(usize, TrigPoly)], g: &[(usize, TrigPoly)]) -> Perturbation {
        let (f, g) = (PolyField::new(f), PolyField::new(g));
        let (a_f, a_g, c2_bound) = derivative_bounds(&f, &g);
        Perturbation { f, g, a_f, a_g, c2_bound }
    }

    pub fn zero() -> Perturbation {
        Perturbation::new(&[], &[])
    }

    /// `A = A_f + A_g`.
    pub fn a(&self) -> f64 {
        self.a_f + self.a_g
    }

    /// Stored bounds agree with a recomputation.
    pub fn bounds_consistent(&self) -> bool {
        let (a_f, a_g, m) = derivative_bounds(&self.f, &self.g);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + x.abs());
        close(a_f, self.a_f) && close(a_g, self.a_g) && close(m, self.c2_bound)
    }

    /// `f = sin θ`, `g = cos θ`.
    pub fn sin_cos() -> Perturbation {
        Perturbation::new(&[(0, TrigPoly::sin_mode(1, 1, 1.0))], &[(0, TrigPoly::cos_mode(1, 1, 1.0))])
    }
}

fn derivative_bounds(f: &PolyField, g: &PolyField) -> (f64, f64, f64) {
    let (ft, fr, f2) = f.grid_sups();
    let (gt, gr, g2) = g.grid_sups();
    (BOUND_SAFETY * ft.max(fr), BOUND_SAFETY * gt.max(gr), BOUND_SAFETY * f2.max(g2))
}

/// Which coordinates a point is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameTag {
    Raw,
    DioShift,
    RussR,
    RussXiX,
    NormalThetaR,
}

impl FrameTag {
    pub fn name(&self) -> &'static str {
        match self {
            FrameTag::Raw => "raw",
            FrameTag::DioShift => "dio_shift",
            FrameTag::RussR => "russ_r",
            FrameTag::RussXiX => "russ_xi_x",
            FrameTag::NormalThetaR => "normal_ThetaR",
        }
    }
}

/// A change of variables computed elsewhere (a translated curve or a
/// normal-form transform stack).
pub trait FrameMap: Send + Sync {
    fn tag(&self) -> FrameTag;
    /// Raw `(θ, ρ)` to frame coordinates.
    fn to_frame(&self, p: &Params, raw: Point) -> Result<Point, MapError>;
    /// Frame coordinates to raw `(θ, ρ)`.
    fn from_frame(&self, p: &Params, pt: Point) -> Result<Point, MapError>;
}

#[derive(Clone)]
pub enum Frame {
    Raw,
    /// `r = ρ + ν − α`.
    DioShift,
    /// `r = ρ − s`, `s` from [`russ_offset`].
    RussR,
    Custom(Arc<dyn FrameMap>),
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame({})", self.tag().name())
    }
}

impl Frame {
    pub fn tag(&self) -> FrameTag {
        match self {
            Frame::Raw => FrameTag::Raw,
            Frame::DioShift => FrameTag::DioShift,
            Frame::RussR => FrameTag::RussR,
            Frame::Custom(m) => m.tag(),
        }
    }

    /// Constant `s` with `ρ = r + s` for the shift frames.
    fn shift(&self, p: &Params) -> Option<f64> {
        match self {
            Frame::Raw => Some(0.0),
            Frame::DioShift => Some(p.alpha.alpha() - p.nu),
            Frame::RussR => Some(russ_offset(p)),
            Frame::Custom(_) => None,
        }
    }

    pub fn to_frame(&self, p: &Params, raw: Point) -> Result<Point, MapError> {
        match self {
            Frame::Custom(m) => m.to_frame(p, raw),
            _ => Ok((raw.0, raw.1 - self.shift(p).unwrap_or(0.0))),
        }
    }

    pub fn from_frame(&self, p: &Params, pt: Point) -> Result<Point, MapError> {
        match self {
            Frame::Custom(m) => m.from_frame(p, pt),
            _ => Ok((pt.0, pt.1 + self.shift(p).unwrap_or(0.0))),
        }
    }
}

/// Unperturbed map in the given frame.
pub fn eval_p(p: &Params, frame: &Frame, pt: Point) -> Result<Point, MapError> {
    let c = p.twist();
    let e = p.contraction();
    match frame {
        Frame::Raw => Ok((pt.0 + TAU * p.nu + c * pt.1, pt.1 * e)),
        Frame::DioShift => {
            let d = p.nu - p.alpha.alpha();
            Ok((pt.0 + TAU * p.nu + c * (pt.1 - d), d + e * (pt.1 - d)))
        }
        Frame::RussR => Ok((pt.0 + TAU * p.alpha.alpha() + c * pt.1, pt.1 * e + translation_tau(p))),
        Frame::Custom(m) => {
            let raw = m.from_frame(p, pt)?;
            let img = eval_p(p, &Frame::Raw, raw)?;
            m.to_frame(p, img)
        }
    }
}

/// Perturbed map in the given frame; the perturbation is always evaluated at
/// the raw radius so that every frame is an exact conjugate of the raw map.
pub fn eval_q(p: &Params, pert: &Perturbation, frame: &Frame, pt: Point) -> Result<Point, MapError> {
    eval_q_band(p, pert, frame, pt, DEFAULT_BAND)
}

pub fn eval_q_band(p: &Params, pert: &Perturbation, frame: &Frame, pt: Point, band: f64) -> Result<Point, MapError> {
    match frame.shift(p) {
        Some(s) => {
            let rho = pt.1 + s;
            if !(rho.abs() <= band) {
                return Err(MapError::OutOfDomain { rho, band });
            }
            let base = eval_p(p, frame, pt)?;
            if p.eps == 0.0 {
                return Ok(base);
            }
            Ok((base.0 + p.eps * pert.f.value(pt.0, rho), base.1 + p.eps * pert.g.value(pt.0, rho)))
        }
        None => {
            let raw = frame.from_frame(p, pt)?;
            let img = eval_q_band(p, pert, &Frame::Raw, raw, band)?;
            frame.to_frame(p, img)
        }
    }
}

/// `[[∂θ'/∂θ, ∂θ'/∂r], [∂r'/∂θ, ∂r'/∂r]]`.
pub type Matrix2 = [[f64; 2]; 2];

pub fn jacobian_q(p: &Params, pert: &Perturbation, frame: &Frame, pt: Point) -> Result<Matrix2, MapError> {
    match frame.shift(p) {
        Some(s) => {
            let rho = pt.1 + s;
            if !(rho.abs() <= DEFAULT_BAND) {
                return Err(MapError::OutOfDomain { rho, band: DEFAULT_BAND });
            }
            let (ft, fr) = pert.f.gradient(pt.0, rho);
            let (gt, gr) = pert.g.gradient(pt.0, rho);
            let e = p.eps;
            Ok([[1.0 + e * ft, p.twist() + e * fr], [e * gt, p.contraction() + e * gr]])
        }
        None => {
            let h = 1e-6;
            let mut jac = [[0.0; 2]; 2];
            for (col, d) in [(h, 0.0), (0.0, h)].iter().enumerate() {
                let plus = eval_q(p, pert, frame, (pt.0 + d.0, pt.1 + d.1))?;
                let minus = eval_q(p, pert, frame, (pt.0 - d.0, pt.1 - d.1))?;
                jac[0][col] = (plus.0 - minus.0) / (2.0 * h);
                jac[1][col] = (plus.1 - minus.1) / (2.0 * h);
            }
            Ok(jac)
        }
    }
}

/// `n` iterates of `Q` starting at `pt` (the output has `n + 1` points).
pub fn orbit(p: &Params, pert: &Perturbation, frame: &Frame, pt: Point, n: usize) -> Result<Vec<Point>, MapError> {
    let mut out = Vec::with_capacity(n + 1);
    let mut z = pt;
    out.push(z);
    for _ in 0..n {
        z = eval_q(p, pert, frame, z)?;
        out.push(z);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrappingAnnulus {
    pub band: f64,
    pub verified: bool,
}

/// Smallest `b` on the grid `{j ε/(10η)}`, `1 ≤ j ≤ 1000`, with
/// `ρ′ − ρ < 0` at `ρ = b` and `ρ′ − ρ > 0` at `ρ = −b` on 256 angles.
pub fn trapping_annulus(p: &Params, pert: &Perturbation) -> Result<TrappingAnnulus, MapError> {
    if !(p.eta > 0.0) {
        return Err(MapError::InvalidParams("trapping annulus needs eta > 0"));
    }
    if p.eps == 0.0 || pert.g.is_zero() {
        return Ok(TrappingAnnulus { band: 0.0, verified: true });
    }
    let step = p.eps / (10.0 * p.eta);
    let grid = math::angle_grid(256);
    let drift = |theta: f64, rho: f64| rho * math::expm1(-TAU * p.eta) + p.eps * pert.g.value(theta, rho);
    for j in 1..=1000 {
        let b = j as f64 * step;
        if grid.iter().all(|&t| drift(t, b) < 0.0 && drift(t, -b) > 0.0) {
            return Ok(TrappingAnnulus { band: b, verified: true });
        }
    }
    Err(MapError::NotFound)
}
