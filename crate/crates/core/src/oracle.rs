//! Reference evaluations of the quantum moment integrals that share no code
//! with the quadrature path. Used by the test suites and `verify`; the solver
//! never calls into this module.
//!
//! * `x ≥ 0`: polylogarithm series `Li_s(z) = Σ z^k / k^s`, `|z| ≤ 1`, with an
//!   Euler–Maclaurin tail for `ζ(s)` at `|z| = 1`.
//! * fermion `x < 0` (`|z| > 1`, outside the series): trapezoid rule on the
//!   whole real line, which converges exponentially for this analytic even
//!   integrand.

use std::f64::consts::PI;

use crate::quantum_integrals::Statistics;

const PI_3_2: f64 = 5.568_327_996_831_708;

/// Riemann zeta for real `s > 1`.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0);
    const N: usize = 30;
    // B_2, B_4, ..., B_14
    const BERNOULLI: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let n = N as f64;
    let mut sum = 0.0;
    for k in (1..N).rev() {
        sum += (k as f64).powf(-s);
    }
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = s; // s(s+1)...(s+2j-2)
    let mut fact = 2.0; // (2j)!
    for (j, b) in BERNOULLI.iter().enumerate() {
        let j = j as f64 + 1.0;
        sum += b / fact * rising * n.powf(-s - 2.0 * j + 1.0);
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    sum
}

/// Dirichlet eta `η(s) = (1 − 2^{1−s}) ζ(s)`.
pub fn eta(s: f64) -> f64 {
    (1.0 - 2f64.powf(1.0 - s)) * zeta(s)
}

/// `Li_s(z)` for real `z ∈ [−1, 1]`, `s > 1`.
pub fn polylog(s: f64, z: f64) -> f64 {
    assert!(z.abs() <= 1.0, "series oracle needs |z| <= 1");
    if z == 1.0 {
        return zeta(s);
    }
    if z == -1.0 {
        return -eta(s);
    }
    let mut sum = 0.0;
    let mut zk = 1.0;
    let mut k = 1usize;
    loop {
        zk *= z;
        let term = zk / (k as f64).powf(s);
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) || zk == 0.0 {
            break;
        }
        k += 1;
    }
    sum
}

/// `∫_0^∞ r^s / (e^{r²+x} + 1) dr` by the full-line trapezoid rule.
pub fn fermi_radial_trapezoid(s: i32, x: f64) -> f64 {
    // Nearest pole of the integrand in r: sqrt(−x + iπ).
    let a = -x;
    let modulus = a.hypot(PI);
    let dist = if a >= 0.0 {
        PI / (2.0 * (0.5 * (modulus + a)).sqrt())
    } else {
        (0.5 * (modulus - a)).sqrt()
    };
    let h = dist / 7.0;
    let r_end = a.max(0.0).sqrt() + 14.0;
    let n = (r_end / h).ceil() as usize;
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        let r = k as f64 * h;
        let u = r * r + x;
        let f = if u > 0.0 {
            let e = (-u).exp();
            e / (1.0 + e)
        } else {
            1.0 / (u.exp() + 1.0)
        };
        sum += r.powi(s) * f;
    }
    let at_zero = if s == 0 { 0.5 / (x.exp() + 1.0) } else { 0.0 };
    h * (sum + at_zero)
}

/// Reference `h_τ(x)`.
pub fn moment0(stats: Statistics, x: f64) -> f64 {
    match stats {
        Statistics::Fermion if x < 0.0 => 4.0 * PI * fermi_radial_trapezoid(2, x),
        Statistics::Fermion => -PI_3_2 * polylog(1.5, -(-x).exp()),
        Statistics::Boson => PI_3_2 * polylog(1.5, (-x).exp()),
    }
}

/// Reference `∫|p|²/(e^{|p|²+x}+τ) dp`.
pub fn moment2(stats: Statistics, x: f64) -> f64 {
    match stats {
        Statistics::Fermion if x < 0.0 => 4.0 * PI * fermi_radial_trapezoid(4, x),
        Statistics::Fermion => -1.5 * PI_3_2 * polylog(2.5, -(-x).exp()),
        Statistics::Boson => 1.5 * PI_3_2 * polylog(2.5, (-x).exp()),
    }
}
