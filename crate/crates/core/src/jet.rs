//! Truncated power series `Σ_{i≤n} c_i x^i` in one real variable.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    /// Series of order `n` (coefficients `c_0..c_n`), padded or cut.
    pub fn new(mut coeffs: Vec<f64>, n: usize) -> Jet {
        coeffs.resize(n + 1, 0.0);
        Jet { c: coeffs }
    }

    pub fn zero(n: usize) -> Jet {
        Jet { c: vec![0.0; n + 1] }
    }

    pub fn constant(v: f64, n: usize) -> Jet {
        let mut j = Jet::zero(n);
        j.c[0] = v;
        j
    }

    /// `v + x`.
    pub fn variable(v: f64, n: usize) -> Jet {
        let mut j = Jet::constant(v, n);
        if n >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.c.get(i).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, i: usize, v: f64) {
        if i < self.c.len() {
            self.c[i] = v;
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet { c: self.c.iter().map(|v| v * a).collect() }
    }

    pub fn add_const(&self, a: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += a;
        j
    }

    /// Same series without the constant term.
    pub fn without_constant(&self) -> Jet {
        let mut j = self.clone();
        j.c[0] = 0.0;
        j
    }

    pub fn derivative(&self) -> Jet {
        let n = self.order();
        let mut out = Jet::zero(n);
        for i in 1..=n {
            out.c[i - 1] = i as f64 * self.c[i];
        }
        out
    }

    /// Cauchy product truncated at `min` of the two orders.
    pub fn mul_jet(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        let mut out = Jet::zero(n);
        for i in 0..=n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                out.c[i + j] += self.c[i] * other.c[j];
            }
        }
        out
    }

    pub fn powi(&self, k: usize) -> Jet {
        let mut out = Jet::constant(1.0, self.order());
        for _ in 0..k {
            out = out.mul_jet(self);
        }
        out
    }

    /// `Σ taylor[j] (self − self_0)^j`, i.e. a function given by its Taylor
    /// coefficients at `self_0` composed with this series.
    pub fn compose_taylor(&self, taylor: &[f64]) -> Jet {
        let n = self.order();
        let d = self.without_constant();
        let mut out = Jet::zero(n);
        for t in taylor.iter().take(n + 1).rev() {
            out = out.mul_jet(&d);
            out.c[0] += t;
        }
        out
    }

    /// `outer(self)` where `outer` is a series about 0 and `self_0 = 0` is
    /// not required (the constant is folded in first when nonzero).
    pub fn compose(&self, outer: &Jet) -> Jet {
        if self.c[0] == 0.0 {
            return self.compose_taylor(&outer.c);
        }
        // Re-expand outer about self_0.
        let shifted = outer.shift(self.c[0]);
        self.compose_taylor(&shifted.c)
    }

    /// Coefficients of `x ↦ p(x + a)`.
    pub fn shift(&self, a: f64) -> Jet {
        let n = self.order();
        let mut out = Jet::zero(n);
        // Binomial expansion, degree by degree.
        for (i, ci) in self.c.iter().enumerate() {
            let mut binom = 1.0;
            let mut apow = 1.0;
            let mut terms = Vec::with_capacity(i + 1);
            for k in 0..=i {
                terms.push((i - k, binom * apow));
                binom = binom * (i - k) as f64 / (k + 1) as f64;
                apow *= a;
            }
            for (deg, w) in terms {
                out.c[deg] += ci * w;
            }
        }
        out
    }

    /// `1/self`; requires `self_0 ≠ 0`.
    pub fn recip(&self) -> Jet {
        let n = self.order();
        let a0 = self.c[0];
        let mut out = Jet::zero(n);
        out.c[0] = 1.0 / a0;
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| self.c[j] * out.c[k - j]).sum();
            out.c[k] = -s / a0;
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut out = Jet::zero(n);
        out.c[0] = math::exp(self.c[0]);
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * out.c[k - j]).sum();
            out.c[k] = s / k as f64;
        }
        out
    }

    /// `log self`; requires `self_0 > 0`.
    pub fn ln(&self) -> Jet {
        let n = self.order();
        let a0 = self.c[0];
        let mut out = Jet::zero(n);
        out.c[0] = math::ln(a0);
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| j as f64 * out.c[j] * self.c[k - j]).sum();
            out.c[k] = (self.c[k] - s / k as f64) / a0;
        }
        out
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.order();
        let (mut s, mut c) = (Jet::zero(n), Jet::zero(n));
        s.c[0] = math::sin(self.c[0]);
        c.c[0] = math::cos(self.c[0]);
        for k in 1..=n {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ss += w * c.c[k - j];
                cc -= w * s.c[k - j];
            }
            s.c[k] = ss / k as f64;
            c.c[k] = cc / k as f64;
        }
        (s, c)
    }

    /// Largest `|c_i|` for `i ≥ from`.
    pub fn max_from(&self, from: usize) -> f64 {
        self.c.iter().skip(from).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn truncate(&self, n: usize) -> Jet {
        Jet::new(self.c.clone(), n)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        Jet { c: (0..=n).map(|i| self.c[i] + rhs.c[i]).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        Jet { c: (0..=n).map(|i| self.c[i] - rhs.c[i]).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Jet, b: &[f64], tol: f64) {
        for (i, v) in b.iter().enumerate() {
            assert!((a.coeff(i) - v).abs() <= tol, "coef {i}: {} vs {v}", a.coeff(i));
        }
    }

    #[test]
    fn geometric_reciprocal() {
        let one_minus_x = Jet::new(vec![1.0, -1.0], 6);
        close(&one_minus_x.recip(), &[1.0; 7], 1e-15);
    }

    #[test]
    fn exp_and_ln_invert() {
        let j = Jet::new(vec![0.3, 1.0, -0.5, 0.25], 8);
        let back = j.exp().ln();
        close(&back, j.coeffs(), 1e-14);
        let factorials = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        let e = Jet::variable(0.0, 5).exp();
        let expect: Vec<f64> = factorials.iter().map(|f| 1.0 / f).collect();
        close(&e, &expect, 1e-15);
    }

    #[test]
    fn sin_cos_of_variable() {
        let (s, c) = Jet::variable(0.7, 6).sin_cos();
        for x in [0.01, -0.02, 0.03] {
            assert!((s.eval(x) - (0.7f64 + x).sin()).abs() < 1e-12);
            assert!((c.eval(x) - (0.7f64 + x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = Jet::new(vec![1.0, -2.0, 0.5, 3.0], 3);
        let q = p.shift(0.4);
        for x in [-0.3, 0.0, 0.2, 1.1] {
            assert!((q.eval(x) - p.eval(x + 0.4)).abs() < 1e-13);
        }
    }

    #[test]
    fn composition_agrees_pointwise() {
        let inner = Jet::new(vec![0.2, 0.5, -0.1], 10);
        let outer = Jet::new(vec![1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0], 10);
        let comp = inner.compose(&outer);
        for x in [0.01, -0.02, 0.015] {
            assert!((comp.eval(x) - outer.eval(inner.eval(x))).abs() < 1e-12);
        }
    }
}
