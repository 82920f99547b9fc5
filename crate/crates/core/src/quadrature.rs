//! Fixed-node composite Gauss–Legendre quadrature on graded panels.
//!
//! The radial integrands handled here are analytic on the real axis but have
//! complex poles that can approach it (the Fermi surface of a degenerate
//! fermion gas, or the origin for a boson gas near condensation). Panels are
//! graded geometrically toward the real part of the nearest pole so every
//! panel sees that pole at several half-widths, which keeps the Gauss rule in
//! its exponentially convergent regime. Node placement depends only on the
//! inputs, so results are bit-reproducible.

use std::sync::OnceLock;

/// Points of the primary rule.
pub const HIGH_ORDER: usize = 20;
/// Points of the embedded rule used for the error estimate.
pub const LOW_ORDER: usize = 10;
/// Widest panel allowed anywhere.
pub const MAX_PANEL: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] via Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, z);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn high_order_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(HIGH_ORDER))
}

pub fn low_order_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(LOW_ORDER))
}

/// Panel boundaries on `[0, hi]`, graded toward `center` where the nearest
/// complex singularity sits at distance `delta` from the real axis.
pub fn graded_breaks(center: f64, delta: f64, hi: f64) -> Vec<f64> {
    assert!(hi > 0.0 && delta > 0.0);
    let c = center.clamp(0.0, hi);
    let w0 = (0.5 * delta).min(MAX_PANEL);

    let mut right = Vec::new();
    let mut b = (c + 0.5 * w0).min(hi);
    right.push(b);
    while b < hi {
        let w = (b - c).clamp(0.5 * w0, MAX_PANEL);
        b = (b + w).min(hi);
        right.push(b);
    }

    let mut left = Vec::new();
    let mut b = (c - 0.5 * w0).max(0.0);
    left.push(b);
    while b > 0.0 {
        let w = (c - b).clamp(0.5 * w0, MAX_PANEL);
        b = (b - w).max(0.0);
        left.push(b);
    }

    left.reverse();
    left.extend(right);
    left.dedup();
    left
}

/// Integrates `N` integrands sharing one evaluation callback over the given
/// panels. Returns the high-order sums and the largest |high - low| difference
/// per component.
pub fn composite<const N: usize, F>(breaks: &[f64], f: F) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let hi_rule = high_order_rule();
    let lo_rule = low_order_rule();
    let mut total = [0.0; N];
    let mut coarse = [0.0; N];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut fine_panel = [0.0; N];
        for (x, wt) in hi_rule.nodes().iter().zip(hi_rule.weights()) {
            let v = f(mid + half * x);
            for k in 0..N {
                fine_panel[k] += wt * v[k];
            }
        }
        let mut coarse_panel = [0.0; N];
        for (x, wt) in lo_rule.nodes().iter().zip(lo_rule.weights()) {
            let v = f(mid + half * x);
            for k in 0..N {
                coarse_panel[k] += wt * v[k];
            }
        }
        for k in 0..N {
            total[k] += half * fine_panel[k];
            coarse[k] += half * coarse_panel[k];
        }
    }
    let mut diff = [0.0; N];
    for k in 0..N {
        diff[k] = (total[k] - coarse[k]).abs();
    }
    (total, diff)
}
