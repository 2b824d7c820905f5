//! Continued fractions, finite-cutoff Diophantine certification and
//! rotation-number estimation from lifted orbits.

use alloc::vec::Vec;
use core::fmt;

use crate::math::{self, TAU};

/// Default certification cutoff for the reference rotation.
pub const DEFAULT_CUTOFF_K: usize = 1024;

/// Smallest acceptable certified γ.
pub const GAMMA_FLOOR: f64 = 1e-12;

/// Minimum orbit length accepted by [`rotation_number`].
pub const MIN_ORBIT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum DiophantineError {
    /// A continued-fraction remainder vanished at the given depth.
    RationalDetected { depth: usize },
    /// Certified γ fell below [`GAMMA_FLOOR`].
    GammaUnderflow { gamma: f64, worst_k: usize },
    /// Fewer than [`MIN_ORBIT`] iterates.
    TooShort(usize),
    /// Invalid input (α outside (0,1), K = 0, ...).
    InvalidInput(&'static str),
}

impl fmt::Display for DiophantineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiophantineError::RationalDetected { depth } => {
                write!(f, "number is rational to machine precision (depth {depth})")
            }
            DiophantineError::GammaUnderflow { gamma, worst_k } => {
                write!(f, "certified gamma {gamma:e} underflows (worst k = {worst_k})")
            }
            DiophantineError::TooShort(n) => write!(f, "orbit of {n} iterates is too short"),
            DiophantineError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

/// Irrational `α ∈ (0,1)` with `|kα − l| ≥ γ/k^q` certified for
/// `1 ≤ k ≤ cutoff_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineNumber {
    alpha: f64,
    cf: Vec<u64>,
    gamma: f64,
    q: f64,
    cutoff_k: usize,
}

impl DiophantineNumber {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Partial quotients `a_1, a_2, ...` of `α = [0; a_1, a_2, ...]`.
    pub fn continued_fraction(&self) -> &[u64] {
        &self.cf
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn cutoff_k(&self) -> usize {
        self.cutoff_k
    }

    /// `(√5 − 1)/2` certified with `q = 1` up to [`DEFAULT_CUTOFF_K`].
    pub fn golden() -> Self {
        certify(golden_mean(), 1.0, DEFAULT_CUTOFF_K).expect("golden mean certifies")
    }

    /// Lower bound on `|e^{i2πkα} − 1|` implied by the certificate
    /// (`2 sin(π‖kα‖) ≥ 4‖kα‖ ≥ 4γ/k^q`), `None` past the cutoff.
    pub fn divisor_lower_bound(&self, k: usize) -> Option<f64> {
        if k == 0 || k > self.cutoff_k {
            None
        } else {
            Some(4.0 * self.gamma / math::powf(k as f64, self.q))
        }
    }
}

pub fn golden_mean() -> f64 {
    (math::sqrt(5.0) - 1.0) / 2.0
}

/// Partial quotients `a_1..a_depth` of `α ∈ (0,1)`.
pub fn continued_fraction(alpha: f64, depth: usize) -> Result<Vec<u64>, DiophantineError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DiophantineError::InvalidInput("alpha must lie in (0,1)"));
    }
    let mut out = Vec::with_capacity(depth);
    let mut x = alpha;
    for d in 0..depth {
        if x.abs() < 1e-12 {
            return Err(DiophantineError::RationalDetected { depth: d });
        }
        let inv = 1.0 / x;
        let a = math::floor(inv);
        out.push(a as u64);
        x = inv - a;
    }
    Ok(out)
}

/// Convergent denominators `q_n` from partial quotients (`q_0 = 1`).
pub fn convergent_denominators(cf: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(cf.len() + 1);
    let (mut prev, mut cur) = (0u64, 1u64);
    out.push(cur);
    for &a in cf {
        let next = a.saturating_mul(cur).saturating_add(prev);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Brute-force certificate `γ = min_{1≤k≤K} k^q ‖kα‖`.
pub fn certify(alpha: f64, q: f64, cutoff_k: usize) -> Result<DiophantineNumber, DiophantineError> {
    if cutoff_k == 0 {
        return Err(DiophantineError::InvalidInput("K must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DiophantineError::InvalidInput("alpha must lie in (0,1)"));
    }
    if q < 1.0 {
        return Err(DiophantineError::InvalidInput("q must be at least 1"));
    }
    let (mut gamma, mut worst_k) = (f64::INFINITY, 1);
    for k in 1..=cutoff_k {
        let v = math::powf(k as f64, q) * math::dist_to_int(k as f64 * alpha);
        if v < gamma {
            gamma = v;
            worst_k = k;
        }
    }
    if gamma < GAMMA_FLOOR {
        return Err(DiophantineError::GammaUnderflow { gamma, worst_k });
    }
    // Quotients past machine precision are noise; keep the reliable prefix.
    let cf = match continued_fraction(alpha, 20) {
        Ok(cf) => cf,
        Err(DiophantineError::RationalDetected { depth }) => {
            continued_fraction(alpha, depth).unwrap_or_default()
        }
        Err(e) => return Err(e),
    };
    Ok(DiophantineNumber { alpha, cf, gamma, q, cutoff_k })
}

/// Estimator used by [`rotation_number`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationMode {
    /// Weighted Birkhoff average of the increments with the smooth bump
    /// `exp(−1/(t(1−t)))`; converges faster than any power of `1/n` on
    /// quasi-periodic orbits.
    #[default]
    Birkhoff,
    /// Plain displacement averages over dyadic lengths `n, n/2, n/4`,
    /// combined by Richardson extrapolation assuming a `1/n` error.
    ConvergentAcceleration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    /// Rotation number in turns (lifted displacement divided by `2π`).
    pub value: f64,
    /// Spread between the estimate and its half-length counterpart.
    pub error: f64,
}

fn weighted_average(increments: &[f64]) -> f64 {
    let n = increments.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, d) in increments.iter().enumerate() {
        let t = (j as f64 + 1.0) / (n as f64 + 1.0);
        let w = math::exp(-1.0 / (t * (1.0 - t)));
        num += w * d;
        den += w;
    }
    num / den
}

/// Estimates `lim (θ_n − θ_0)/(2πn)` from a lifted orbit.
pub fn rotation_number(orbit: &[f64], mode: RotationMode) -> Result<RotationEstimate, DiophantineError> {
    if orbit.len() < MIN_ORBIT {
        return Err(DiophantineError::TooShort(orbit.len()));
    }
    match mode {
        RotationMode::Birkhoff => {
            let inc: Vec<f64> = orbit.windows(2).map(|w| w[1] - w[0]).collect();
            let full = weighted_average(&inc) / TAU;
            let half = weighted_average(&inc[..inc.len() / 2]) / TAU;
            Ok(RotationEstimate { value: full, error: (full - half).abs() })
        }
        RotationMode::ConvergentAcceleration => {
            let n = orbit.len() - 1;
            let avg = |m: usize| (orbit[m] - orbit[0]) / (TAU * m as f64);
            let (r1, r2, r4) = (avg(n), avg(n / 2), avg(n / 4));
            let rich = 2.0 * r1 - r2;
            let rich_half = 2.0 * r2 - r4;
            Ok(RotationEstimate { value: rich, error: (rich - rich_half).abs() })
        }
    }
}

/// Lifted orbit of a circle-map lift.
pub fn lifted_orbit<F: Fn(f64) -> f64>(lift: F, theta0: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut t = theta0;
    out.push(t);
    for _ in 0..n {
        t = lift(t);
        out.push(t);
    }
    out
}
