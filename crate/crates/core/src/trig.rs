//! Truncated Fourier series on the circle and monotone circle lifts.
//!
//! A [`TrigPoly`] stores the coefficients `c_k`, `|k| ≤ N`, of
//! `f(θ) = Σ c_k e^{ikθ}` together with an analyticity width `s` (used only
//! as a tag; every norm takes the width explicitly) and the accumulated
//! `Σ |c_k|` of modes discarded by truncation, so that residuals computed
//! downstream can be audited against what was thrown away.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::fft;
use crate::math::{self, TAU};

/// Default mode cutoff.
pub const DEFAULT_CUTOFF: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub enum TrigError {
    /// Coefficient vector does not have odd length `2N+1`.
    BadLength(usize),
    /// The lift is not certified increasing; carries the certified lower
    /// bound on `u'` that failed.
    NotMonotone { min_derivative: f64 },
    /// Iteration budget exhausted; carries the last residual.
    NoConvergence { residual: f64 },
    /// Target value lies outside the supplied bracket.
    NotBracketed,
}

impl fmt::Display for TrigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrigError::BadLength(n) => write!(f, "coefficient vector of even length {n}"),
            TrigError::NotMonotone { min_derivative } => {
                write!(f, "lift not monotone (certified min u' = {min_derivative:e})")
            }
            TrigError::NoConvergence { residual } => {
                write!(f, "inversion did not converge (residual {residual:e})")
            }
            TrigError::NotBracketed => write!(f, "target not bracketed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
    width: f64,
    real: bool,
    tail: f64,
}

impl TrigPoly {
    /// Builds from coefficients ordered `k = -N..=N`. When `real` is set the
    /// coefficients are projected onto the Hermitian-symmetric subspace.
    pub fn from_coeffs(coeffs: Vec<Complex64>, width: f64, real: bool) -> Result<Self, TrigError> {
        if coeffs.len() % 2 == 0 {
            return Err(TrigError::BadLength(coeffs.len()));
        }
        let mut p = TrigPoly { coeffs, width, real, tail: 0.0 };
        if real {
            p.symmetrize();
        }
        Ok(p)
    }

    pub fn zero(n: usize) -> Self {
        TrigPoly { coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1], width: 0.0, real: true, tail: 0.0 }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.coeffs[n] = Complex64::new(c, 0.0);
        p
    }

    /// `amp · cos(kθ)`.
    pub fn cos_mode(n: usize, k: usize, amp: f64) -> Self {
        let mut p = Self::zero(n.max(k));
        if k == 0 {
            let n0 = p.order();
            p.coeffs[n0] = Complex64::new(amp, 0.0);
        } else {
            p.set_real_mode(k, Complex64::new(amp / 2.0, 0.0));
        }
        p
    }

    /// `amp · sin(kθ)`.
    pub fn sin_mode(n: usize, k: usize, amp: f64) -> Self {
        let mut p = Self::zero(n.max(k));
        if k > 0 {
            p.set_real_mode(k, Complex64::new(0.0, -amp / 2.0));
        }
        p
    }

    /// Sets `c_k = c` and `c_{-k} = conj(c)`.
    pub fn set_real_mode(&mut self, k: usize, c: Complex64) {
        let n = self.order();
        assert!(k <= n);
        self.coeffs[n + k] = c;
        self.coeffs[n - k] = c.conj();
        if k == 0 {
            self.coeffs[n] = Complex64::new(c.re, 0.0);
        }
    }

    pub fn with_width(mut self, s: f64) -> Self {
        self.width = s;
        self
    }

    /// Mode cutoff `N`.
    pub fn order(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Accumulated `Σ|c_k|` of modes dropped by truncation.
    pub fn truncation_tail(&self) -> f64 {
        self.tail
    }

    /// Coefficients ordered `k = -N..=N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_k`, zero outside the stored range.
    pub fn coeff(&self, k: isize) -> Complex64 {
        let n = self.order() as isize;
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    fn symmetrize(&mut self) {
        let n = self.order();
        for k in 1..=n {
            let c = (self.coeffs[n + k] + self.coeffs[n - k].conj()) * 0.5;
            self.coeffs[n + k] = c;
            self.coeffs[n - k] = c.conj();
        }
        self.coeffs[n].im = 0.0;
    }

    /// `Σ c_k e^{ikθ}` by direct summation.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let n = self.order();
        let w = Complex64::from_polar(1.0, theta);
        if self.real {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut p = w;
            for k in 1..=n {
                acc += self.coeffs[n + k] * p;
                p *= w;
            }
            Complex64::new(self.coeffs[n].re + 2.0 * acc.re, 0.0)
        } else {
            let wi = w.conj();
            let mut acc = self.coeffs[n];
            let (mut p, mut q) = (w, wi);
            for k in 1..=n {
                acc += self.coeffs[n + k] * p + self.coeffs[n - k] * q;
                p *= w;
                q *= wi;
            }
            acc
        }
    }

    /// Real part of [`eval`](Self::eval).
    pub fn eval_real(&self, theta: f64) -> f64 {
        self.eval(theta).re
    }

    /// Normalised Taylor coefficients `f^{(j)}(z)/j!`, `j = 0..=order`, of the
    /// real part at a real point.
    pub fn taylor_at(&self, z: f64, order: usize) -> Vec<f64> {
        let n = self.order();
        let mut out = vec![0.0; order + 1];
        let w = Complex64::from_polar(1.0, z);
        let wi = w.conj();
        let mut p = Complex64::new(1.0, 0.0);
        let mut q = Complex64::new(1.0, 0.0);
        out[0] = self.coeffs[n].re;
        for k in 1..=n {
            p *= w;
            q *= wi;
            let kf = k as f64;
            let mut tp = self.coeffs[n + k] * p;
            let mut tq = self.coeffs[n - k] * q;
            out[0] += (tp + tq).re;
            for (j, slot) in out.iter_mut().enumerate().skip(1) {
                let jf = j as f64;
                tp *= Complex64::new(0.0, kf / jf);
                tq *= Complex64::new(0.0, -kf / jf);
                *slot += (tp + tq).re;
            }
        }
        out
    }

    pub fn derivative(&self) -> TrigPoly {
        let n = self.order() as isize;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * Complex64::new(0.0, (idx as isize - n) as f64))
            .collect();
        TrigPoly { coeffs, width: self.width, real: self.real, tail: self.tail }
    }

    /// Coefficient convolution with cutoff `N_f + N_g`.
    pub fn product(&self, other: &TrigPoly) -> TrigPoly {
        let (nf, ng) = (self.order(), other.order());
        let n = nf + ng;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        TrigPoly {
            coeffs,
            width: self.width.min(other.width),
            real: self.real && other.real,
            tail: self.tail + other.tail,
        }
    }

    /// Product re-truncated to cutoff `n`; dropped mass goes to the tail.
    pub fn product_truncated(&self, other: &TrigPoly, n: usize) -> TrigPoly {
        self.product(other).truncate(n)
    }

    /// Keeps modes `|k| ≤ n` (zero-padding when `n > N`).
    pub fn truncate(&self, n: usize) -> TrigPoly {
        let old = self.order();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        let mut dropped = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = idx as isize - old as isize;
            if k.unsigned_abs() <= n {
                coeffs[(k + n as isize) as usize] = *c;
            } else {
                dropped += c.norm();
            }
        }
        TrigPoly { coeffs, width: self.width, real: self.real, tail: self.tail + dropped }
    }

    /// Drops trailing modes whose magnitude is below `tol`, shrinking `N`.
    pub fn trimmed(&self, tol: f64) -> TrigPoly {
        let n = self.order();
        let mut keep = 0;
        for k in (1..=n).rev() {
            if self.coeffs[n + k].norm() > tol || self.coeffs[n - k].norm() > tol {
                keep = k;
                break;
            }
        }
        self.truncate(keep)
    }

    /// `f(θ + β)`: coefficients `c_k e^{ikβ}`.
    pub fn compose_rotation(&self, beta: f64) -> TrigPoly {
        let n = self.order() as isize;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * Complex64::from_polar(1.0, (idx as isize - n) as f64 * beta))
            .collect();
        TrigPoly { coeffs, width: self.width, real: self.real, tail: self.tail }
    }

    /// Weighted norm `Σ |c_k| e^{|k|s}`, an upper bound for the sup over the
    /// complex strip `|Im θ| ≤ s`.
    pub fn norm_s(&self, s: f64) -> f64 {
        let n = self.order() as isize;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c.norm() * math::exp((idx as isize - n).unsigned_abs() as f64 * s))
            .sum()
    }

    /// Max of `|f|` over a uniform grid of at least `8N` points.
    pub fn sup_norm(&self) -> f64 {
        let m = (8 * self.order()).max(64).next_power_of_two();
        self.sample(m).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `c_0` (real part).
    pub fn mean(&self) -> f64 {
        self.coeffs[self.order()].re
    }

    /// `Σ_{k≠0} |c_k|`.
    pub fn nonconstant_norm(&self) -> f64 {
        let n = self.order();
        self.coeffs.iter().enumerate().filter(|(i, _)| *i != n).map(|(_, c)| c.norm()).sum()
    }

    /// `Σ_{|k|>k0} |c_k|`.
    pub fn high_mode_norm(&self, k0: usize) -> f64 {
        let n = self.order() as isize;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as isize - n).unsigned_abs() > k0)
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// Same function with the zero mode removed.
    pub fn without_mean(&self) -> TrigPoly {
        let mut p = self.clone();
        let n = p.order();
        p.coeffs[n] = Complex64::new(0.0, 0.0);
        p
    }

    /// Values at `θ_j = 2πj/m`.
    pub fn sample(&self, m: usize) -> Vec<Complex64> {
        fft::synthesize(&self.coeffs, m)
    }

    pub fn sample_real(&self, m: usize) -> Vec<f64> {
        self.sample(m).into_iter().map(|v| v.re).collect()
    }

    /// Fits modes `|k| ≤ n` to uniform complex samples.
    pub fn from_samples(values: &[Complex64], n: usize, width: f64, real: bool) -> TrigPoly {
        let mut p = TrigPoly { coeffs: fft::analyze(values, n), width, real, tail: 0.0 };
        if real {
            p.symmetrize();
        }
        p
    }

    /// Fits a real function from uniform samples.
    pub fn from_real_samples(values: &[f64], n: usize, width: f64) -> TrigPoly {
        let buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        Self::from_samples(&buf, n, width, true)
    }

    /// Samples `f` on a grid of `m` points and fits `N = n` modes.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, n: usize, m: usize, width: f64) -> TrigPoly {
        let vals: Vec<f64> = math::angle_grid(m).into_iter().map(f).collect();
        Self::from_real_samples(&vals, n, width)
    }

    pub fn scale(&self, a: f64) -> TrigPoly {
        TrigPoly {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            width: self.width,
            real: self.real,
            tail: self.tail * a.abs(),
        }
    }

    fn combine(&self, other: &TrigPoly, sign: f64) -> TrigPoly {
        let n = self.order().max(other.order());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for k in -(n as isize)..=(n as isize) {
            coeffs[(k + n as isize) as usize] = self.coeff(k) + other.coeff(k) * sign;
        }
        TrigPoly {
            coeffs,
            width: self.width.min(other.width),
            real: self.real && other.real,
            tail: self.tail + other.tail,
        }
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.combine(rhs, -1.0)
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        self.combine(&rhs, 1.0)
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        self.combine(&rhs, -1.0)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.product(rhs)
    }
}

/// Inverts an increasing function on `[lo, hi]`: bisection until the bracket
/// is narrower than `1e-6`, then safeguarded Newton until `|u(θ) - y| ≤ tol`.
/// `u` returns the value and the derivative.
pub fn invert_monotone<F>(u: F, y: f64, lo: f64, hi: f64, tol: f64) -> Result<f64, TrigError>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let (flo, _) = u(lo);
    let (fhi, _) = u(hi);
    if flo > y + tol || fhi < y - tol {
        return Err(TrigError::NotBracketed);
    }
    let mut budget = 200usize;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let (fm, _) = u(mid);
        if (fm - y).abs() <= tol {
            return Ok(mid);
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
        budget -= 1;
    }
    newton_in_bracket(&u, y, lo, hi, 0.5 * (lo + hi), tol, budget)
}

/// Newton from `guess` kept inside `[lo, hi]`; falls back to bisection
/// steps whenever Newton would leave the bracket.
pub fn newton_in_bracket<F>(
    u: &F,
    y: f64,
    mut lo: f64,
    mut hi: f64,
    guess: f64,
    tol: f64,
    budget: usize,
) -> Result<f64, TrigError>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = guess.clamp(lo, hi);
    let mut last = f64::INFINITY;
    for _ in 0..budget {
        let (fx, dfx) = u(x);
        let r = fx - y;
        last = r.abs();
        if last <= tol {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if dfx > 0.0 { x - r / dfx } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x || hi - lo <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            // Bracket collapsed to adjacent floats: best attainable answer.
            return if last <= tol.max(8.0 * f64::EPSILON * (1.0 + y.abs())) {
                Ok(x)
            } else {
                Ok(next)
            };
        }
        x = next;
    }
    Err(TrigError::NoConvergence { residual: last })
}

/// Lift `u(θ) = θ + base_rotation + periodic_part(θ)` of a circle map.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleLift {
    base_rotation: f64,
    periodic: TrigPoly,
    deriv: TrigPoly,
}

impl CircleLift {
    pub fn new(base_rotation: f64, periodic: TrigPoly) -> Self {
        let deriv = periodic.derivative();
        CircleLift { base_rotation, periodic, deriv }
    }

    /// `θ ↦ θ + p(θ)`.
    pub fn near_identity(periodic: TrigPoly) -> Self {
        Self::new(0.0, periodic)
    }

    pub fn base_rotation(&self) -> f64 {
        self.base_rotation
    }

    pub fn periodic_part(&self) -> &TrigPoly {
        &self.periodic
    }

    pub fn eval(&self, theta: f64) -> f64 {
        theta + self.base_rotation + self.periodic.eval_real(theta)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        1.0 + self.deriv.eval_real(theta)
    }

    /// Certified lower bound on `u'`: minimum over a grid of `max(8N, 64)`
    /// points minus half a grid step times `Σ k²|c_k| ≥ sup|u''|`.
    pub fn certified_min_derivative(&self) -> f64 {
        let n = self.periodic.order();
        let m = (8 * n).max(64);
        let grid_min = self
            .deriv
            .sample_real(m)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            + 1.0;
        let second = self.deriv.norm_s(0.0) * n as f64;
        grid_min - 0.5 * (TAU / m as f64) * second
    }

    pub fn is_monotone(&self) -> bool {
        self.certified_min_derivative() > 0.0
    }

    /// Solves `u(θ) = y` to `tol`.
    pub fn invert(&self, y: f64, tol: f64) -> Result<f64, TrigError> {
        let min_d = self.certified_min_derivative();
        if min_d <= 0.0 {
            return Err(TrigError::NotMonotone { min_derivative: min_d });
        }
        self.invert_unchecked(y, tol)
    }

    /// [`invert`](Self::invert) without re-running the monotonicity
    /// certificate; for callers that certified the lift once.
    pub fn invert_unchecked(&self, y: f64, tol: f64) -> Result<f64, TrigError> {
        let spread = self.periodic.norm_s(0.0) + 1e-12;
        let centre = y - self.base_rotation;
        invert_monotone(
            |t| (self.eval(t), self.derivative(t)),
            y,
            centre - spread,
            centre + spread,
            tol,
        )
    }

    /// Inverse via Newton from a guess, falling back to the bracketed solve.
    pub fn invert_from(&self, y: f64, guess: f64, tol: f64) -> Result<f64, TrigError> {
        let spread = self.periodic.norm_s(0.0) + 1e-12;
        let centre = y - self.base_rotation;
        let f = |t| (self.eval(t), self.derivative(t));
        newton_in_bracket(&f, y, centre - spread, centre + spread, guess, tol, 60)
            .or_else(|_| self.invert_unchecked(y, tol))
    }
}
