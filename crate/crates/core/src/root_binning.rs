//! Root binning for states `(|f>^m + e^{i theta} |g>^m) / sqrt(2)` with `f`
//! even and `g` odd. An `X` outcome bins to `+1` where `f g >= 0`, a `P`
//! outcome where `f~ h~ >= 0`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::binned::{intervals_from_roots, mode_integrals, BinInterval, ModeIntegrals, ProductExpansion};
use crate::coherent::{gaussian_norm, wavefunction_p, wavefunction_x};
use crate::mk::{self, expand_mk, Setting, SettingTuple};
use crate::numerics::{integrate_1d_with, QuadConfig};
use crate::{Error, Result};

/// Tolerance for the `V`, `W` overlap integrals.
pub const OVERLAP_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-8;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which quadrature a party measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

/// An even `f`, an odd `g`, their Fourier data and the sign-change points of
/// `f g` and `f~ h~`.
#[derive(Clone)]
pub struct ParityFunctionPair {
    pub f: RealFn,
    pub g: RealFn,
    pub f_tilde: RealFn,
    /// `g~ = i h~`.
    pub h_tilde: RealFn,
    x_roots: Vec<f64>,
    p_roots: Vec<f64>,
    /// Integration is restricted to `|x|, |p| <= cutoff`.
    cutoff: f64,
}

impl fmt::Debug for ParityFunctionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParityFunctionPair")
            .field("x_roots", &self.x_roots)
            .field("p_roots", &self.p_roots.len())
            .field("cutoff", &self.cutoff)
            .finish_non_exhaustive()
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|r| r.is_finite())
}

impl ParityFunctionPair {
    /// Validates norms (to `1e-8`), parities on a sample grid and root ordering.
    pub fn new(
        f: RealFn,
        g: RealFn,
        f_tilde: RealFn,
        h_tilde: RealFn,
        x_roots: Vec<f64>,
        p_roots: Vec<f64>,
        cutoff: f64,
    ) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff}")));
        }
        if !strictly_increasing(&x_roots) || !strictly_increasing(&p_roots) {
            return Err(Error::InvalidState("root lists must be strictly increasing".into()));
        }
        let pair = Self { f, g, f_tilde, h_tilde, x_roots, p_roots, cutoff };
        let cfg = QuadConfig::default();
        for (name, func) in [("f", &pair.f), ("g", &pair.g), ("f~", &pair.f_tilde), ("h~", &pair.h_tilde)] {
            let n = integrate_1d_with(|y| func(y).powi(2), f64::NEG_INFINITY, f64::INFINITY, &cfg)?.value;
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidState(format!("{name} has norm^2 {n}")));
            }
        }
        for i in 0..=64 {
            let y = cutoff * i as f64 / 64.0;
            let scale = |v: f64| 1e-12 * v.abs().max(1e-300);
            let even = |h: &RealFn| (h(y) - h(-y)).abs() <= scale(h(y)) + 1e-300;
            let odd = |h: &RealFn| (h(y) + h(-y)).abs() <= scale(h(y)) + 1e-300;
            if !even(&pair.f) || !odd(&pair.g) || !even(&pair.f_tilde) || !odd(&pair.h_tilde) {
                return Err(Error::InvalidState(format!("parity violated at {y}")));
            }
        }
        Ok(pair)
    }

    pub fn x_roots(&self) -> &[f64] {
        &self.x_roots
    }

    pub fn p_roots(&self) -> &[f64] {
        &self.p_roots
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Binning intervals for `quadrature`, truncated at the cutoff.
    pub fn intervals(&self, quadrature: Quadrature) -> Vec<BinInterval> {
        match quadrature {
            Quadrature::X => {
                let (f, g) = (self.f.clone(), self.g.clone());
                intervals_from_roots(&self.x_roots, self.cutoff, move |x| f(x) * g(x))
            }
            Quadrature::P => {
                let (f, h) = (self.f_tilde.clone(), self.h_tilde.clone());
                intervals_from_roots(&self.p_roots, self.cutoff, move |p| f(p) * h(p))
            }
        }
    }

    /// `int |u v|` over the binning intervals, summing the pieces between roots.
    fn abs_overlap(&self, quadrature: Quadrature, cfg: &QuadConfig) -> Result<f64> {
        let (u, v) = match quadrature {
            Quadrature::X => (&self.f, &self.g),
            Quadrature::P => (&self.f_tilde, &self.h_tilde),
        };
        self.intervals(quadrature)
            .iter()
            .map(|iv| integrate_1d_with(|y| (u(y) * v(y)).abs(), iv.lo, iv.hi, cfg).map(|r| r.value))
            .sum()
    }
}

/// `(V, W) = (int |f g| dx, int |f~ h~| dp)` at tolerance [`OVERLAP_TOL`].
pub fn overlaps_vw(pair: &ParityFunctionPair) -> Result<(f64, f64)> {
    overlaps_vw_with(pair, &QuadConfig::with_abs_tol(OVERLAP_TOL))
}

pub fn overlaps_vw_with(pair: &ParityFunctionPair, cfg: &QuadConfig) -> Result<(f64, f64)> {
    Ok((pair.abs_overlap(Quadrature::X, cfg)?, pair.abs_overlap(Quadrature::P, cfg)?))
}

/// Overlaps, state phase and party count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBinningSpec {
    pub v: f64,
    pub w: f64,
    pub theta: f64,
    pub m: usize,
}

impl RootBinningSpec {
    pub fn new(v: f64, w: f64, theta: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPartyCount(0));
        }
        for (name, x) in [("V", v), ("W", w)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!("{name} = {x} outside [0, 1]")));
            }
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("non-finite theta".into()));
        }
        Ok(Self { v, w, theta, m })
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

/// `E(k, m-k) = V^k W^(m-k) cos(theta + (m-k) pi/2)` with `k` parties measuring `X`.
pub fn class_correlator(spec: &RootBinningSpec, k: usize) -> f64 {
    let k = k.min(spec.m);
    let n = spec.m - k;
    spec.v.powi(k as i32) * spec.w.powi(n as i32) * (spec.theta + n as f64 * FRAC_PI_2).cos()
}

/// Which quadrature the unprimed setting measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Labeling {
    XUnprimed,
    PUnprimed,
}

impl Labeling {
    pub const BOTH: [Labeling; 2] = [Labeling::XUnprimed, Labeling::PUnprimed];

    pub fn quadrature(self, setting: Setting) -> Quadrature {
        match (self, setting) {
            (Labeling::XUnprimed, Setting::Unprimed) | (Labeling::PUnprimed, Setting::Primed) => Quadrature::X,
            _ => Quadrature::P,
        }
    }

    fn x_count(self, tuple: &SettingTuple) -> usize {
        tuple.choices().iter().filter(|s| self.quadrature(**s) == Quadrature::X).count()
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Labeling::XUnprimed => "x-unprimed",
            Labeling::PUnprimed => "p-unprimed",
        })
    }
}

/// Signed `<B_m>` with class correlators.
pub fn bell_expectation_root(spec: &RootBinningSpec, labeling: Labeling) -> Result<f64> {
    let e = expand_mk(spec.m)?;
    mk::bell_expectation(&e, |t| class_correlator(spec, labeling.x_count(t)))
}

/// `|<B_m>|` with class correlators.
pub fn bell_factor_root(spec: &RootBinningSpec, labeling: Labeling) -> Result<f64> {
    bell_expectation_root(spec, labeling).map(f64::abs)
}

/// Bell factor maximised over the state phase, with the maximising phase.
/// `<B_m>` is `A cos(theta) + B sin(theta)`, so the maximum is `sqrt(A^2 + B^2)`.
pub fn bell_factor_root_best_theta(spec: &RootBinningSpec, labeling: Labeling) -> Result<(f64, f64)> {
    let a = bell_expectation_root(&spec.with_theta(0.0), labeling)?;
    let b = bell_expectation_root(&spec.with_theta(FRAC_PI_2), labeling)?;
    Ok((a.hypot(b), b.atan2(a)))
}

/// `theta_m = (1 - m) pi / 4`.
pub fn optimal_phase(m: usize) -> f64 {
    (1.0 - m as f64) * PI / 4.0
}

/// Phase at which the other labeling reproduces the correlator table of
/// `theta`: exchanging `X` and `P` maps `theta` to `-theta - m pi/2`.
pub fn swapped_phase(theta: f64, m: usize) -> f64 {
    -theta - m as f64 * FRAC_PI_2
}

/// `(m, B_m)` at `V = W = 1` and the optimal phase, for `m = 2 ..= m_max`.
pub fn maximal_violation_curve(m_max: usize) -> Result<Vec<(usize, f64)>> {
    if m_max < 2 {
        return Err(Error::InvalidPartyCount(m_max));
    }
    (2..=m_max)
        .map(|m| {
            let spec = RootBinningSpec::new(1.0, 1.0, optimal_phase(m), m)?;
            bell_factor_root(&spec, Labeling::XUnprimed).map(|b| (m, b))
        })
        .collect()
}

/// Even and odd cat states `c_+-(|alpha> +- |-alpha>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatFamily {
    alpha: f64,
}

impl CatFamily {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `c_+ = 1 / sqrt(2 (1 + exp(-2 alpha^2)))`.
    pub fn c_plus(&self) -> f64 {
        (2.0 * (1.0 + (-2.0 * self.alpha * self.alpha).exp())).sqrt().recip()
    }

    /// `c_- = 1 / sqrt(2 (1 - exp(-2 alpha^2)))`.
    pub fn c_minus(&self) -> f64 {
        (2.0 * (1.0 - (-2.0 * self.alpha * self.alpha).exp())).sqrt().recip()
    }

    /// Truncation used for binning intervals.
    pub fn cutoff(&self) -> f64 {
        8.0 + 2.0 * SQRT_2 * self.alpha
    }

    /// Zeros of `f~ h~`: multiples of `pi / (2 sqrt(2) alpha)` inside the cutoff.
    pub fn p_roots(&self) -> Vec<f64> {
        let spacing = PI / (2.0 * SQRT_2 * self.alpha);
        let n = (self.cutoff() / spacing).floor() as i64;
        (-n..=n).map(|k| k as f64 * spacing).collect()
    }
}

/// The cat-state parity pair.
pub fn cat_pair(alpha: f64) -> Result<ParityFunctionPair> {
    let cat = CatFamily::new(alpha)?;
    let (cp, cm) = (cat.c_plus(), cat.c_minus());
    let x0 = SQRT_2 * alpha;
    let nrm = gaussian_norm();
    let f: RealFn = Arc::new(move |x| cp * (wavefunction_x(alpha, x) + wavefunction_x(-alpha, x)));
    let g: RealFn = Arc::new(move |x| cm * (wavefunction_x(alpha, x) - wavefunction_x(-alpha, x)));
    let f_tilde: RealFn = Arc::new(move |p: f64| 2.0 * cp * nrm * (-0.5 * p * p).exp() * (x0 * p).cos());
    let h_tilde: RealFn = Arc::new(move |p: f64| -2.0 * cm * nrm * (-0.5 * p * p).exp() * (x0 * p).sin());
    ParityFunctionPair::new(f, g, f_tilde, h_tilde, vec![0.0], cat.p_roots(), cat.cutoff())
}

/// Quadrature settings for the per-mode domain integrals.
pub fn domain_config() -> QuadConfig {
    QuadConfig::with_abs_tol(1e-13)
}

/// Per-mode integrals of `{|alpha>, |-alpha>}` over the cat pair's `X` and `P` bins.
fn coherent_mode_integrals(pair: &ParityFunctionPair, alpha: f64) -> Result<(ModeIntegrals, ModeIntegrals)> {
    let cfg = domain_config();
    let xa = move |x: f64| Complex64::new(wavefunction_x(alpha, x), 0.0);
    let xb = move |x: f64| Complex64::new(wavefunction_x(-alpha, x), 0.0);
    let pa = move |p: f64| wavefunction_p(alpha, p);
    let pb = move |p: f64| wavefunction_p(-alpha, p);
    let x = mode_integrals(&pair.intervals(Quadrature::X), &[&xa, &xb], &cfg)?;
    let p = mode_integrals(&pair.intervals(Quadrature::P), &[&pa, &pb], &cfg)?;
    Ok((x, p))
}

/// Coherent sign patterns of the three-mode state, `+` for `alpha`.
pub const PSI3_PATTERNS: [[i8; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

/// `c'^2 = 1 / (4 (1 + 3 exp(-4 alpha^2)))`.
pub fn psi3_normalization(alpha: f64) -> f64 {
    (4.0 * (1.0 + 3.0 * (-4.0 * alpha * alpha).exp())).sqrt().recip()
}

fn psi3_expansion(alpha: f64) -> Result<ProductExpansion> {
    let c = Complex64::new(psi3_normalization(alpha), 0.0);
    let labels = PSI3_PATTERNS
        .iter()
        .map(|pat| pat.iter().map(|s| usize::from(*s < 0)).collect())
        .collect();
    ProductExpansion::pure(&[c; 4], labels)
}

/// Bell factor of the three-mode coherent state with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi3Report {
    pub alpha: f64,
    /// `max` over both labelings.
    pub bell: f64,
    pub best_labeling: Labeling,
    pub per_labeling: [(Labeling, f64); 2],
    /// Largest `|sum_d P_d - 1|` over all setting tuples.
    pub max_normalization_error: f64,
    pub min_probability: f64,
}

/// Three-party Bell factor of `c'(|a,a,a> + |a,-a,-a> + |-a,a,-a> + |-a,-a,a>)`
/// under root binning derived from the cat pair, by exact domain integration.
pub fn direct_bell_psi3(alpha: f64) -> Result<Psi3Report> {
    let pair = cat_pair(alpha)?;
    let (xi, pi) = coherent_mode_integrals(&pair, alpha)?;
    let state = psi3_expansion(alpha)?;
    let expansion = expand_mk(3)?;
    let mut max_norm_err: f64 = 0.0;
    let mut min_p = f64::INFINITY;
    let mut per_labeling = [(Labeling::XUnprimed, 0.0); 2];
    for (slot, labeling) in per_labeling.iter_mut().zip(Labeling::BOTH) {
        let mut failure = None;
        let value = mk::bell_expectation(&expansion, |t| {
            let modes: Vec<&ModeIntegrals> = t
                .choices()
                .iter()
                .map(|s| match labeling.quadrature(*s) {
                    Quadrature::X => &xi,
                    Quadrature::P => &pi,
                })
                .collect();
            match state.distribution(&modes) {
                Ok(dist) => {
                    let total: f64 = dist.iter().map(|(_, p)| p).sum();
                    max_norm_err = max_norm_err.max((total - 1.0).abs());
                    for (_, p) in &dist {
                        min_p = min_p.min(*p);
                    }
                    crate::binned::correlator_of(&dist)
                }
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        *slot = (labeling, value?.abs());
    }
    let (best_labeling, bell) = if per_labeling[1].1 > per_labeling[0].1 { per_labeling[1] } else { per_labeling[0] };
    Ok(Psi3Report {
        alpha,
        bell,
        best_labeling,
        per_labeling,
        max_normalization_error: max_norm_err,
        min_probability: min_p,
    })
}

/// Basis index of the vacuum in [`parity_mode_integrals`].
pub const VACUUM_INDEX: usize = 2;

/// Per-mode integrals of `{f, g, vacuum}` over `X` bins and `{f~, i h~, vacuum}` over `P` bins.
pub fn parity_mode_integrals(pair: &ParityFunctionPair, cfg: &QuadConfig) -> Result<(ModeIntegrals, ModeIntegrals)> {
    let (f, g, ft, ht) = (pair.f.clone(), pair.g.clone(), pair.f_tilde.clone(), pair.h_tilde.clone());
    let fx = move |x: f64| Complex64::new(f(x), 0.0);
    let gx = move |x: f64| Complex64::new(g(x), 0.0);
    let fp = move |p: f64| Complex64::new(ft(p), 0.0);
    let gp = move |p: f64| Complex64::new(0.0, ht(p));
    // the vacuum wavefunction is the same real Gaussian in both quadratures
    let vac = |y: f64| Complex64::new(wavefunction_x(0.0, y), 0.0);
    let x = mode_integrals(&pair.intervals(Quadrature::X), &[&fx, &gx, &vac], cfg)?;
    let p = mode_integrals(&pair.intervals(Quadrature::P), &[&fp, &gp, &vac], cfg)?;
    Ok((x, p))
}

/// `(|f>^m + e^{i theta} |g>^m) / sqrt(2)` as a product expansion over the basis `{f, g}`.
pub fn parity_state_expansion(m: usize, theta: f64) -> Result<ProductExpansion> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ProductExpansion::pure(
        &[Complex64::new(h, 0.0), Complex64::from_polar(h, theta)],
        vec![vec![0; m], vec![1; m]],
    )
}

/// Correlator of the parity state for the given per-party quadratures, by
/// domain integration rather than the closed form.
pub fn direct_class_correlator(pair: &ParityFunctionPair, theta: f64, quadratures: &[Quadrature]) -> Result<f64> {
    let (xi, pi) = parity_mode_integrals(pair, &domain_config())?;
    let state = parity_state_expansion(quadratures.len(), theta)?;
    let modes: Vec<&ModeIntegrals> = quadratures
        .iter()
        .map(|q| if *q == Quadrature::X { &xi } else { &pi })
        .collect();
    state.correlator(&modes)
}
