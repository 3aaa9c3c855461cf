#![allow(dead_code)]
//! Independent quadrature used as an oracle: composite Gauss–Legendre rules
//! evaluated on tensor grids, sharing no code with the library integrator.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite rule on `[lo, hi]` split into panels no wider than `max_width`.
pub fn composite(lo: f64, hi: f64, max_width: f64, n: usize) -> Vec<(f64, f64)> {
    let panels = ((hi - lo) / max_width).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    let rule = gauss_legendre(n);
    (0..panels)
        .flat_map(|k| {
            let a = lo + k as f64 * h;
            rule.iter().map(move |(x, w)| (a + 0.5 * h * (x + 1.0), 0.5 * h * w))
        })
        .collect()
}

/// A 1-D rule whose nodes carry a binned sign.
pub struct SignedRule {
    pub nodes: Vec<(f64, f64, i8)>,
}

impl SignedRule {
    pub fn from_pieces(pieces: &[(f64, f64, i8)], max_width: f64, n: usize) -> Self {
        let nodes = pieces
            .iter()
            .flat_map(|&(lo, hi, s)| composite(lo, hi, max_width, n).into_iter().map(move |(x, w)| (x, w, s)))
            .collect();
        Self { nodes }
    }
}

/// Normalised Hermite function by direct recurrence on `H_n` with factorial scaling.
pub fn fock_wavefunction(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    let h = if n == 0 {
        h0
    } else {
        for k in 1..n {
            let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
            h0 = h1;
            h1 = h2;
        }
        h1
    };
    let mut norm = PI.sqrt();
    for k in 1..=n {
        norm *= 2.0 * k as f64;
    }
    h * (-0.5 * x * x).exp() / norm.sqrt()
}
