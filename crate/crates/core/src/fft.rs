//! Radix-2 complex FFT used for sampling and fitting trigonometric polynomials.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::math::TAU;

/// In-place iterative Cooley-Tukey transform. `inverse` uses the `+i`
/// exponent and does not normalise.
///
/// Panics if the length is not a power of two.
pub fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let half = len / 2;
        // Twiddles computed directly per level to avoid drift from repeated products.
        let tw: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, ang * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = data[start + k];
                let v = data[start + k + half] * tw[k];
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Samples `Σ_{|k|≤N} c_k e^{ikθ}` at `θ_j = 2πj/m`. Coefficients are
/// ordered `k = -N..=N`. Uses the FFT when `m` is a power of two and
/// `m ≥ 2N+1`, direct summation otherwise.
pub fn synthesize(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = (coeffs.len() - 1) / 2;
    if m.is_power_of_two() && m >= 2 * n + 1 {
        let mut buf = alloc::vec![Complex64::new(0.0, 0.0); m];
        for (idx, c) in coeffs.iter().enumerate() {
            let k = idx as isize - n as isize;
            let slot = k.rem_euclid(m as isize) as usize;
            buf[slot] += *c;
        }
        fft_in_place(&mut buf, true);
        buf
    } else {
        (0..m)
            .map(|j| {
                let theta = TAU * j as f64 / m as f64;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let k = idx as f64 - n as f64;
                        c * Complex64::from_polar(1.0, k * theta)
                    })
                    .sum()
            })
            .collect()
    }
}

/// Least-squares (interpolatory) fit of modes `|k| ≤ n` to uniform samples.
/// Requires `values.len() ≥ 2n+1`.
pub fn analyze(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = values.len();
    assert!(m > 2 * n, "need at least 2N+1 samples to resolve N modes");
    let raw: Vec<Complex64> = if m.is_power_of_two() {
        let mut buf = values.to_vec();
        fft_in_place(&mut buf, false);
        buf
    } else {
        (0..m)
            .map(|k| {
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -TAU * (k * j) as f64 / m as f64))
                    .sum()
            })
            .collect()
    };
    let scale = 1.0 / m as f64;
    (-(n as isize)..=n as isize)
        .map(|k| raw[k.rem_euclid(m as isize) as usize] * scale)
        .collect()
}
