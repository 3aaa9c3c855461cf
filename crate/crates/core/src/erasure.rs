//! Independent per-mode erasure: with probability `p` a mode is replaced by
//! vacuum. Every term with at least one erased mode has even binned
//! marginals, so the noisy Bell factor is `(1-p)^m` times the noise-free one.
//! The erased terms are evaluated here rather than assumed to vanish.

use num_complex::Complex64;

use crate::binned::{mode_integrals, sign_intervals, ModeIntegrals, ProductExpansion};
use crate::mk::{self, expand_mk, Setting};
use crate::numerics::{hermite_function, QuadConfig};
use crate::root_binning::{domain_config, parity_mode_integrals, parity_state_expansion, ParityFunctionPair, Quadrature, VACUUM_INDEX};
use crate::sign_binning::{bell_expectation_sign, AngleSettings, FockCorrelatedState};
use crate::{Error, Result};

/// Contract on erased-term correlators.
pub const ERASED_CORRELATOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureChannel {
    p: f64,
}

impl ErasureChannel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("erasure probability {p} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Weight `p^j (1-p)^(m-j)` of one erasure pattern with `j` erased modes.
    pub fn pattern_weight(&self, erased: usize, m: usize) -> f64 {
        self.p.powi(erased as i32) * (1.0 - self.p).powi((m - erased) as i32)
    }
}

/// `(1-p)^m B_m`.
pub fn noisy_bell_factor(bell: f64, p: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidPartyCount(0));
    }
    if !(bell >= 0.0 && bell.is_finite()) {
        return Err(Error::InvalidArgument(format!("Bell factor {bell}")));
    }
    let ch = ErasureChannel::new(p)?;
    Ok(ch.pattern_weight(0, m) * bell)
}

/// Erasure threshold for the GHZ state under sign binning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PMax {
    /// Clamped at zero when the noise-free state does not violate.
    pub p_max: f64,
    pub violates: bool,
}

/// `1 - (sqrt(pi)/2) 2^(1/(2m))`, solving `(1-p)^m sqrt(2) (4/pi)^(m/2) = 2`.
pub fn p_max_ghz(m: usize) -> Result<PMax> {
    if m == 0 {
        return Err(Error::InvalidPartyCount(0));
    }
    let raw = 1.0 - std::f64::consts::PI.sqrt() / 2.0 * 2f64.powf(1.0 / (2.0 * m as f64));
    Ok(if raw > 0.0 {
        PMax { p_max: raw, violates: true }
    } else {
        PMax { p_max: 0.0, violates: false }
    })
}

/// `1 - sqrt(pi)/2`, the large-`m` limit of [`p_max_ghz`].
pub fn p_max_limit() -> f64 {
    1.0 - std::f64::consts::PI.sqrt() / 2.0
}

/// Sign-binned integrals of the Fock basis `psi_r`, `r < d`, at angle zero.
fn fock_base_integrals(d: usize) -> Result<ModeIntegrals> {
    let funcs: Vec<Box<dyn Fn(f64) -> Complex64 + Sync>> = (0..d)
        .map(|r| Box::new(move |x: f64| Complex64::new(hermite_function(r, x), 0.0)) as Box<dyn Fn(f64) -> Complex64 + Sync>)
        .collect();
    let refs: Vec<&(dyn Fn(f64) -> Complex64 + Sync)> = funcs.iter().map(|b| b.as_ref()).collect();
    mode_integrals(&sign_intervals(), &refs, &QuadConfig::with_abs_tol(1e-13))
}

/// `<x_theta|r> = e^{-i r theta} psi_r(x)` applied to the angle-zero integrals.
fn rotate(base: &ModeIntegrals, theta: f64) -> ModeIntegrals {
    let phase = |a: usize, b: usize| Complex64::from_polar(1.0, -(a as f64 - b as f64) * theta);
    let map = |m: &Vec<Vec<Complex64>>| {
        m.iter()
            .enumerate()
            .map(|(a, row)| row.iter().enumerate().map(|(b, v)| v * phase(a, b)).collect())
            .collect()
    };
    ModeIntegrals { plus: map(&base.plus), minus: map(&base.minus) }
}

fn fock_expansion(state: &FockCorrelatedState) -> Result<ProductExpansion> {
    let m = state.modes();
    let weights: Vec<Complex64> = state.coefficients().iter().map(|c| Complex64::new(*c, 0.0)).collect();
    let labels = (0..state.truncation()).map(|r| vec![r; m]).collect();
    ProductExpansion::pure(&weights, labels)
}

fn check_modes(erased: &[usize], m: usize) -> Result<()> {
    for (i, t) in erased.iter().enumerate() {
        if *t >= m {
            return Err(Error::ModeOutOfRange { index: *t, modes: m });
        }
        if erased[..i].contains(t) {
            return Err(Error::InvalidArgument(format!("mode {t} erased twice")));
        }
    }
    Ok(())
}

fn erase_all(state: ProductExpansion, erased: &[usize], trace: &ModeIntegrals, vacuum: usize) -> Result<ProductExpansion> {
    erased.iter().try_fold(state, |s, t| s.erase(*t, trace, vacuum))
}

/// Sign-binned correlator of the state with `erased` modes traced out and
/// replaced by vacuum, with the total phase `phi` spread evenly over the parties.
pub fn erased_modes_correlator(state: &FockCorrelatedState, erased: &[usize], phi: f64) -> Result<f64> {
    let m = state.modes();
    check_modes(erased, m)?;
    let base = fock_base_integrals(state.truncation())?;
    let rotated = rotate(&base, phi / m as f64);
    let noisy = erase_all(fock_expansion(state)?, erased, &base, 0)?;
    noisy.correlator(&vec![&rotated; m])
}

/// Single-erasure case of [`erased_modes_correlator`].
pub fn erased_term_correlator(state: &FockCorrelatedState, erased_mode: usize, phi: f64) -> Result<f64> {
    erased_modes_correlator(state, &[erased_mode], phi)
}

/// Result of evaluating the full erasure mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyBellReport {
    pub bell: f64,
    /// Largest `|<B_m>|` of any term with at least one erased mode.
    pub max_erased_term: f64,
}

/// Erasure patterns as sorted mode lists, excluding the empty pattern.
fn erasure_patterns(m: usize) -> Vec<Vec<usize>> {
    (1..1usize << m)
        .map(|mask| (0..m).filter(|t| mask >> t & 1 == 1).collect())
        .collect()
}

/// Bell factor of the full erasure mixture, summing every erasure pattern with its weight.
pub fn noisy_bell_direct_report(state: &FockCorrelatedState, angles: &AngleSettings, p: f64) -> Result<NoisyBellReport> {
    let ch = ErasureChannel::new(p)?;
    let m = state.modes();
    let clean = bell_expectation_sign(state, angles)?;
    let expansion = expand_mk(m)?;
    let base = fock_base_integrals(state.truncation())?;
    let unprimed: Vec<ModeIntegrals> = angles.theta().iter().map(|t| rotate(&base, *t)).collect();
    let primed: Vec<ModeIntegrals> = angles.theta_prime().iter().map(|t| rotate(&base, *t)).collect();
    let pure = fock_expansion(state)?;
    let mut total = ch.pattern_weight(0, m) * clean;
    let mut max_erased: f64 = 0.0;
    for pattern in erasure_patterns(m) {
        let noisy = erase_all(pure.clone(), &pattern, &base, 0)?;
        let mut failure = None;
        let value = mk::bell_expectation(&expansion, |tuple| {
            let modes: Vec<&ModeIntegrals> = tuple
                .choices()
                .iter()
                .enumerate()
                .map(|(t, s)| if *s == Setting::Unprimed { &unprimed[t] } else { &primed[t] })
                .collect();
            noisy.correlator(&modes).unwrap_or_else(|e| {
                failure = Some(e);
                f64::NAN
            })
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let value = value?;
        max_erased = max_erased.max(value.abs());
        total += ch.pattern_weight(pattern.len(), m) * value;
    }
    Ok(NoisyBellReport { bell: total.abs(), max_erased_term: max_erased })
}

/// `|<B_m>|` of the erasure mixture evaluated term by term.
pub fn noisy_bell_direct(state: &FockCorrelatedState, angles: &AngleSettings, p: f64) -> Result<f64> {
    noisy_bell_direct_report(state, angles, p).map(|r| r.bell)
}

/// Root-binned correlator of `(|f>^m + e^{i theta} |g>^m)/sqrt(2)` with
/// `erased` modes replaced by vacuum.
pub fn root_erased_correlator(
    pair: &ParityFunctionPair,
    theta: f64,
    quadratures: &[Quadrature],
    erased: &[usize],
) -> Result<f64> {
    let m = quadratures.len();
    check_modes(erased, m)?;
    let (xi, pi) = parity_mode_integrals(pair, &domain_config())?;
    let noisy = erase_all(parity_state_expansion(m, theta)?, erased, &xi, VACUUM_INDEX)?;
    let modes: Vec<&ModeIntegrals> = quadratures
        .iter()
        .map(|q| if *q == Quadrature::X { &xi } else { &pi })
        .collect();
    noisy.correlator(&modes)
}
