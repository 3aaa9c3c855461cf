//! Photon-number-correlated states `sum_r c_r |r>^(x m)` measured with
//! homodyne detectors whose outcomes are binned by sign.
//!
//! Joint sign-binned probabilities take the closed form
//! `P_d = 2^-m + sigma(d) G(phi, m)`, where `phi` is the sum of the measured
//! quadrature angles and `G` is built from half-line Hermite overlaps. The
//! Bell factor for fixed angles is then a quadratic form in the coefficient
//! vector, so the optimal state is a top eigenvector.

use std::f64::consts::PI;
use std::fmt;

use crate::mk::{self, expand_mk, MkExpansion, Setting, SettingTuple};
use crate::numerics::{
    ln_abs_gamma, max_eigenpair, reciprocal_gamma, reciprocal_gamma_log, Constraint,
    LogSignedReal, SymmetricMatrix,
};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const NEGATIVE_PROBABILITY_TOL: f64 = 1e-12;

/// Real coefficients `c_0 .. c_{d-1}` of a photon-number-correlated `m`-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockCorrelatedState {
    m: usize,
    coefficients: Vec<f64>,
}

impl FockCorrelatedState {
    pub fn new(m: usize, coefficients: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPartyCount(0));
        }
        if coefficients.is_empty() {
            return Err(Error::InvalidState("truncation must be at least 1".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidState("non-finite coefficient".into()));
        }
        let norm2: f64 = coefficients.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("sum c_r^2 = {norm2}, expected 1")));
        }
        Ok(Self { m, coefficients })
    }

    /// Rescales `raw` to unit norm.
    pub fn normalized(m: usize, raw: Vec<f64>) -> Result<Self> {
        let n = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        Self::new(m, raw.into_iter().map(|c| c / n).collect())
    }

    /// `(|0...0> + |1...1>) / sqrt(2)`.
    pub fn ghz(m: usize) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(m, vec![h, h])
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// Quadrature angles `(theta_t, theta'_t)` for every party.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSettings {
    theta: Vec<f64>,
    theta_prime: Vec<f64>,
}

impl AngleSettings {
    pub fn new(theta: Vec<f64>, theta_prime: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidPartyCount(0));
        }
        if theta.len() != theta_prime.len() {
            return Err(Error::InvalidArgument(format!(
                "{} unprimed angles vs {} primed",
                theta.len(),
                theta_prime.len()
            )));
        }
        if theta.iter().chain(&theta_prime).any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite angle".into()));
        }
        Ok(Self { theta, theta_prime })
    }

    pub fn parties(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_prime(&self) -> &[f64] {
        &self.theta_prime
    }

    /// Sum of the angles selected by `tuple`.
    pub fn phase(&self, tuple: &SettingTuple) -> f64 {
        tuple
            .choices()
            .iter()
            .enumerate()
            .map(|(t, s)| match s {
                Setting::Unprimed => self.theta[t],
                Setting::Primed => self.theta_prime[t],
            })
            .sum()
    }
}

/// `theta_k = (-1)^(m+1) pi (k-1) / (2m)`, `theta'_k = theta_k + pi/2`.
pub fn ghz_like_angles(m: usize) -> Result<AngleSettings> {
    if m < 2 {
        return Err(Error::InvalidPartyCount(m));
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let theta: Vec<f64> = (1..=m)
        .map(|k| sign * PI * (k as f64 - 1.0) / (2.0 * m as f64))
        .collect();
    let theta_prime = theta.iter().map(|t| t + PI / 2.0).collect();
    AngleSettings::new(theta, theta_prime)
}

/// Two-party angles for which `B_2 = 3E(phi) - E(3phi)`, fixing `theta_1 = 0`.
pub fn two_party_phi_angles(phi: f64) -> Result<AngleSettings> {
    AngleSettings::new(vec![0.0, phi], vec![-2.0 * phi, -phi])
}

/// Angles used by the optimiser: the `phi = pi/4` family for two parties,
/// GHZ-like angles otherwise.
pub fn default_angles(m: usize) -> Result<AngleSettings> {
    if m == 2 {
        two_party_phi_angles(PI / 4.0)
    } else {
        ghz_like_angles(m)
    }
}

/// One `+-1` outcome per mode after binning.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinnedOutcome(Vec<i8>);

impl BinnedOutcome {
    pub fn new(d: Vec<i8>) -> Result<Self> {
        if d.is_empty() || d.iter().any(|v| *v != 1 && *v != -1) {
            return Err(Error::InvalidArgument(format!("bad outcome {d:?}")));
        }
        Ok(Self(d))
    }

    /// All `2^m` outcomes, `+1` first.
    pub fn all(m: usize) -> Vec<Self> {
        (0..1usize << m)
            .map(|bits| {
                Self((0..m).map(|t| if bits >> (m - 1 - t) & 1 == 1 { -1 } else { 1 }).collect())
            })
            .collect()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    /// `sigma(d) = prod_t d_t`.
    pub fn sign(&self) -> i8 {
        self.0.iter().product()
    }
}

impl fmt::Display for BinnedOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            f.write_str(if *v > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// `F(r, s) = 1 / (Gamma((1-r)/2) Gamma(-s/2))`.
fn f_rs(r: usize, s: usize) -> f64 {
    reciprocal_gamma((1.0 - r as f64) / 2.0) * reciprocal_gamma(-(s as f64) / 2.0)
}

fn f_rs_log(r: usize, s: usize) -> LogSignedReal {
    reciprocal_gamma_log((1.0 - r as f64) / 2.0) * reciprocal_gamma_log(-(s as f64) / 2.0)
}

/// `int_0^inf exp(-x^2) H_r(x) H_s(x) dx` in closed form.
pub fn hermite_halfline_overlap(r: usize, s: usize) -> f64 {
    if r == s {
        let (ln_fact, _) = ln_abs_gamma(r as f64 + 1.0);
        return (((r as f64) - 1.0) * 2f64.ln() + ln_fact).exp() * PI.sqrt();
    }
    let diff = r as f64 - s as f64;
    let bracket = (f_rs(r, s) - f_rs(s, r)) / diff;
    PI * 2f64.powi((r + s) as i32) * bracket
}

/// Half-line overlap of the normalised Fock wavefunctions, `int_0^inf <r|x><x|s> dx`,
/// in log-signed form. Zero whenever `r - s` is even and `r != s`.
pub fn normalized_halfline_overlap(r: usize, s: usize) -> LogSignedReal {
    if r == s {
        return LogSignedReal::from_f64(0.5);
    }
    let diff = LogSignedReal::from_f64(r as f64 - s as f64);
    let bracket = f_rs_log(r, s) - f_rs_log(s, r);
    if bracket.is_zero() {
        return LogSignedReal::ZERO;
    }
    let (ln_r_fact, _) = ln_abs_gamma(r as f64 + 1.0);
    let (ln_s_fact, _) = ln_abs_gamma(s as f64 + 1.0);
    // sqrt(pi 2^(r+s) / (r! s!))
    let prefactor = LogSignedReal::new(
        0.5 * (PI.ln() + (r + s) as f64 * 2f64.ln() - ln_r_fact - ln_s_fact),
        1,
    );
    prefactor * bracket / diff
}

fn g_from_overlap(h: LogSignedReal, r: usize, s: usize, phi: f64, m: usize) -> f64 {
    h.powi(m as i32).to_f64() * (phi * (r as f64 - s as f64)).cos()
}

/// `g_{r,s}(phi, m) = (pi 2^(r+s) / (r! s!))^(m/2) ([F(r,s) - F(s,r)] / (r-s))^m cos(phi (r-s))`,
/// evaluated in log-signed form.
pub fn g_rs(r: usize, s: usize, phi: f64, m: usize) -> Result<f64> {
    if r <= s {
        return Err(Error::InvalidArgument(format!("g_rs needs r > s, got ({r}, {s})")));
    }
    if m == 0 {
        return Err(Error::InvalidPartyCount(0));
    }
    Ok(g_from_overlap(normalized_halfline_overlap(r, s), r, s, phi, m))
}

fn halfline_table(d: usize) -> Vec<Vec<LogSignedReal>> {
    (0..d)
        .map(|r| (0..r).map(|s| normalized_halfline_overlap(r, s)).collect())
        .collect()
}

fn g_sum(state: &FockCorrelatedState, table: &[Vec<LogSignedReal>], phi: f64) -> f64 {
    let c = &state.coefficients;
    let mut total = 0.0;
    for r in 1..c.len() {
        for s in 0..r {
            if c[r] == 0.0 || c[s] == 0.0 {
                continue;
            }
            total += c[r] * c[s] * g_from_overlap(table[r][s], r, s, phi, state.m);
        }
    }
    2.0 * total
}

/// `G(phi, m) = 2 sum_{r>s} c_r c_s g_{r,s}(phi, m)`.
pub fn g_function(state: &FockCorrelatedState, phi: f64) -> f64 {
    g_sum(state, &halfline_table(state.truncation()), phi)
}

/// Sign-binned correlator `E(phi, m) = 2^m G(phi, m)`.
pub fn correlator_e(state: &FockCorrelatedState, phi: f64) -> f64 {
    2f64.powi(state.m as i32) * g_function(state, phi)
}

/// Probability of the binned outcome `d`; an error flags a value below
/// `-1e-12`, which means the coefficient vector is outside the formula's scope.
pub fn outcome_probability(state: &FockCorrelatedState, phi: f64, d: &BinnedOutcome) -> Result<f64> {
    if d.0.len() != state.m {
        return Err(Error::ModeCountMismatch(d.0.len(), state.m));
    }
    let p = 2f64.powi(-(state.m as i32)) + f64::from(d.sign()) * g_function(state, phi);
    if p < -NEGATIVE_PROBABILITY_TOL {
        return Err(Error::NegativeProbability {
            outcome: d.to_string(),
            value: p,
        });
    }
    Ok(p)
}

/// Every binned outcome with its probability.
pub fn outcome_distribution(state: &FockCorrelatedState, phi: f64) -> Result<Vec<(BinnedOutcome, f64)>> {
    BinnedOutcome::all(state.m)
        .into_iter()
        .map(|d| outcome_probability(state, phi, &d).map(|p| (d, p)))
        .collect()
}

fn check_parties(state: &FockCorrelatedState, angles: &AngleSettings) -> Result<()> {
    if state.m != angles.parties() {
        return Err(Error::ModeCountMismatch(state.m, angles.parties()));
    }
    Ok(())
}

/// Signed `<B_m>` for sign binning.
pub fn bell_expectation_sign(state: &FockCorrelatedState, angles: &AngleSettings) -> Result<f64> {
    check_parties(state, angles)?;
    let expansion = expand_mk(state.m)?;
    let table = halfline_table(state.truncation());
    let scale = 2f64.powi(state.m as i32);
    mk::bell_expectation(&expansion, |t| scale * g_sum(state, &table, angles.phase(t)))
}

/// Sign-binned Bell factor `|<B_m>|`.
pub fn bell_factor_sign(state: &FockCorrelatedState, angles: &AngleSettings) -> Result<f64> {
    bell_expectation_sign(state, angles).map(f64::abs)
}

fn bell_matrix_from(expansion: &MkExpansion, d: usize, angles: &AngleSettings) -> Result<SymmetricMatrix> {
    let m = expansion.parties();
    let table = halfline_table(d);
    let phases: Vec<(f64, f64)> = expansion
        .terms()
        .iter()
        .map(|(t, c)| (mk::ratio_to_f64(*c), angles.phase(t)))
        .collect();
    let scale = 2f64.powi(m as i32);
    SymmetricMatrix::from_lower(d, |r, s| {
        if r == s || table[r][s].is_zero() {
            return 0.0;
        }
        scale
            * phases
                .iter()
                .map(|(c, phi)| c * g_from_overlap(table[r][s], r, s, *phi, m))
                .sum::<f64>()
    })
}

/// Symmetric matrix `M` with `<B_m> = c^T M c` for truncation `d`; the diagonal is zero.
pub fn bell_matrix(m: usize, d: usize, angles: &AngleSettings) -> Result<SymmetricMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("truncation must be >= 2, got {d}")));
    }
    if angles.parties() != m {
        return Err(Error::ModeCountMismatch(m, angles.parties()));
    }
    bell_matrix_from(&expand_mk(m)?, d, angles)
}

/// Best state found by [`optimize_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedState {
    pub bell: f64,
    pub state: FockCorrelatedState,
    /// Eigen residual or KKT stationarity residual, depending on the constraint.
    pub residual: f64,
}

/// Maximises the sign-binned Bell factor over real coefficient vectors of length `d`.
///
/// Since the factor is `|c^T M c|`, both `M` and `-M` are searched. On a tie
/// the vector with the larger component sum wins.
pub fn optimize_state(
    m: usize,
    d: usize,
    angles: &AngleSettings,
    constraint: Constraint,
) -> Result<OptimizedState> {
    let matrix = bell_matrix(m, d, angles)?;
    let mut candidates = vec![
        max_eigenpair(&matrix, constraint)?,
        max_eigenpair(&matrix.negated(), constraint)?,
    ];
    let scale = candidates[0].value.abs().max(candidates[1].value.abs()).max(1.0);
    candidates.sort_by(|a, b| {
        if (a.value - b.value).abs() <= 1e-12 * scale {
            let sa: f64 = a.vector.iter().sum();
            let sb: f64 = b.vector.iter().sum();
            sb.total_cmp(&sa)
        } else {
            b.value.total_cmp(&a.value)
        }
    });
    let best = candidates.swap_remove(0);
    Ok(OptimizedState {
        bell: best.value.max(0.0),
        state: FockCorrelatedState::normalized(m, best.vector)?,
        residual: best.residual,
    })
}

/// Optimal Bell factor at increasing truncations with a convergence flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `(d, bell)` for each truncation visited.
    pub trace: Vec<(usize, f64)>,
    pub bell: f64,
    /// Change over the last step in `d`.
    pub delta: f64,
    pub converged: bool,
}

/// Runs [`optimize_state`] at `d_max - step` and `d_max` (and the steps below,
/// down to `step`) and flags convergence when the last increment is below `tol`.
pub fn asymptotic_bell(
    m: usize,
    angles: &AngleSettings,
    d_max: usize,
    step: usize,
    tol: f64,
) -> Result<ConvergenceReport> {
    if step == 0 || d_max < step + 2 {
        return Err(Error::InvalidArgument(format!("bad convergence grid d_max={d_max} step={step}")));
    }
    let mut ds: Vec<usize> = (1..).map(|k| d_max - (k - 1) * step).take_while(|&d| d >= 2).collect();
    ds.reverse();
    let trace = ds
        .iter()
        .map(|&d| optimize_state(m, d, angles, Constraint::None).map(|o| (d, o.bell)))
        .collect::<Result<Vec<_>>>()?;
    let n = trace.len();
    let bell = trace[n - 1].1;
    let delta = (trace[n - 1].1 - trace[n - 2].1).abs();
    Ok(ConvergenceReport {
        trace,
        bell,
        delta,
        converged: delta < tol,
    })
}
