//! Adaptive Gauss-Kronrod (7/15) quadrature with global subdivision.
//!
//! Infinite endpoints are mapped onto a finite interval:
//!
//! * `(-inf, inf)`: `x = t / (1 - t^2)` on `(-1, 1)`
//! * `[a, inf)`: `x = a + t / (1 - t)` on `[0, 1)`
//! * `(-inf, b]`: `x = b - t / (1 - t)` on `[0, 1)`
//!
//! The Kronrod nodes never touch the interval ends, so the maps are never
//! evaluated at their singular points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// Default absolute tolerance.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target; the looser of the two wins. Zero disables it.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_QUAD_TOL,
            rel_tol: 0.0,
            max_subdivisions: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand(x))
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let (value, error) = gauss_kronrod(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 0;
    let target = |total: f64| cfg.abs_tol.max(cfg.rel_tol * total.abs());
    while total_err > target(total) {
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error: total_err,
                subdivisions,
            });
        }
        let (v1, e1) = gauss_kronrod(f, worst.a, mid)?;
        let (v2, e2) = gauss_kronrod(f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
        // refresh sums to avoid drift from repeated subtraction
        if subdivisions % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error_estimate: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error_estimate,
        subdivisions,
        evaluations: 15 * (1 + 2 * subdivisions),
    })
}

/// Integrates `f` over `(a, b)`; either end may be infinite.
pub fn integrate_1d_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if a.is_nan() || b.is_nan() || !(cfg.abs_tol > 0.0 || cfg.rel_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad quadrature request on ({a}, {b}) with {cfg:?}"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }
    if a > b {
        let mut r = integrate_1d_with(f, b, a, cfg)?;
        r.value = -r.value;
        return Ok(r);
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&f, a, b, cfg),
        (false, false) => {
            let g = |t: f64| {
                let d = 1.0 - t * t;
                let x = t / d;
                f(x) * (1.0 + t * t) / (d * d)
            };
            adaptive(&g, -1.0, 1.0, cfg)
        }
        (true, false) => {
            let g = |t: f64| {
                let d = 1.0 - t;
                f(a + t / d) / (d * d)
            };
            adaptive(&g, 0.0, 1.0, cfg)
        }
        (false, true) => {
            let g = |t: f64| {
                let d = 1.0 - t;
                f(b - t / d) / (d * d)
            };
            adaptive(&g, 0.0, 1.0, cfg)
        }
    }
}

/// Integrates `f` over `(a, b)` to absolute tolerance `tol`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_1d_with(f, a, b, &QuadConfig::with_abs_tol(tol)).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_over_real_line() {
        let v = integrate_1d(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-10).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn half_line_moment() {
        let v = integrate_1d(|x| 2.0 * x * (-x * x).exp(), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let w = integrate_1d(|x| 2.0 * x * (-x * x).exp(), f64::NEG_INFINITY, 0.0, 1e-10).unwrap();
        assert!((w + 1.0).abs() < 1e-10);
    }

    #[test]
    fn kinked_integrand_is_bounded() {
        let v = integrate_1d(
            |x| (x.cos() * x.sin()).abs() * (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-10,
        )
        .unwrap();
        assert!(v > 0.0 && v < PI.sqrt());
    }

    #[test]
    fn reversed_and_empty_intervals() {
        assert_eq!(integrate_1d(|x| x, 2.0, 2.0, 1e-10).unwrap(), 0.0);
        let v = integrate_1d(|x| x * x, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        let err = integrate_1d_with(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { subdivisions: 3, .. }));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate_1d(|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand(_)));
    }
}
