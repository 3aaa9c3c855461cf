//! Binned joint probabilities for operators that are finite sums of product
//! wavefunctions. Every domain integral then factorises into per-mode 1-D
//! integrals over the binning intervals.

use num_complex::Complex64;

use crate::numerics::{integrate_1d_with, QuadConfig};
use crate::sign_binning::BinnedOutcome;
use crate::{Error, Result};

/// One interval of the real line with its binned value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinInterval {
    pub lo: f64,
    pub hi: f64,
    pub sign: i8,
}

/// Splits `(-cutoff, cutoff)` at `roots` and labels each piece with the sign of
/// `indicator` at its midpoint (zero counts as `+1`).
pub fn intervals_from_roots(roots: &[f64], cutoff: f64, indicator: impl Fn(f64) -> f64) -> Vec<BinInterval> {
    let mut edges = vec![-cutoff];
    edges.extend(roots.iter().copied().filter(|r| r.abs() < cutoff));
    edges.push(cutoff);
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            BinInterval {
                lo: w[0],
                hi: w[1],
                sign: if indicator(mid) >= 0.0 { 1 } else { -1 },
            }
        })
        .collect()
}

/// `(-inf, 0)` binned to `-1` and `(0, inf)` binned to `+1`.
pub fn sign_intervals() -> Vec<BinInterval> {
    vec![
        BinInterval { lo: f64::NEG_INFINITY, hi: 0.0, sign: -1 },
        BinInterval { lo: 0.0, hi: f64::INFINITY, sign: 1 },
    ]
}

/// Restricted inner products of a per-mode basis:
/// `plus[a][b] = int_{D+} phi_a conj(phi_b)`, likewise `minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeIntegrals {
    pub plus: Vec<Vec<Complex64>>,
    pub minus: Vec<Vec<Complex64>>,
}

impl ModeIntegrals {
    pub fn basis_len(&self) -> usize {
        self.plus.len()
    }

    /// Integrals over the whole line, `<phi_b|phi_a>`.
    pub fn full(&self, a: usize, b: usize) -> Complex64 {
        self.plus[a][b] + self.minus[a][b]
    }

    fn restricted(&self, sign: i8, a: usize, b: usize) -> Complex64 {
        if sign > 0 {
            self.plus[a][b]
        } else {
            self.minus[a][b]
        }
    }
}

type BasisFn<'a> = &'a (dyn Fn(f64) -> Complex64 + Sync);

/// Computes [`ModeIntegrals`] for `basis` over `intervals`.
pub fn mode_integrals(intervals: &[BinInterval], basis: &[BasisFn<'_>], cfg: &QuadConfig) -> Result<ModeIntegrals> {
    let n = basis.len();
    let mut plus = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut minus = plus.clone();
    for a in 0..n {
        for b in a..n {
            let (mut p, mut q) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for iv in intervals {
                let re = integrate_1d_with(|y| (basis[a](y) * basis[b](y).conj()).re, iv.lo, iv.hi, cfg)?.value;
                let im = integrate_1d_with(|y| (basis[a](y) * basis[b](y).conj()).im, iv.lo, iv.hi, cfg)?.value;
                let v = Complex64::new(re, im);
                if iv.sign > 0 {
                    p += v;
                } else {
                    q += v;
                }
            }
            plus[a][b] = p;
            minus[a][b] = q;
            plus[b][a] = p.conj();
            minus[b][a] = q.conj();
        }
    }
    Ok(ModeIntegrals { plus, minus })
}

/// `rho = sum_{j,l} rho[j][l] |phi_j><phi_l|` where every `phi_j` is a product
/// of per-mode basis functions selected by `labels[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductExpansion {
    modes: usize,
    labels: Vec<Vec<usize>>,
    rho: Vec<Vec<Complex64>>,
}

impl ProductExpansion {
    pub fn new(labels: Vec<Vec<usize>>, rho: Vec<Vec<Complex64>>) -> Result<Self> {
        let modes = labels.first().map_or(0, Vec::len);
        if modes == 0 {
            return Err(Error::InvalidState("expansion needs at least one term and one mode".into()));
        }
        if labels.iter().any(|l| l.len() != modes) {
            return Err(Error::InvalidState("terms disagree on mode count".into()));
        }
        if rho.len() != labels.len() || rho.iter().any(|row| row.len() != labels.len()) {
            return Err(Error::InvalidState("coefficient matrix shape mismatch".into()));
        }
        Ok(Self { modes, labels, rho })
    }

    /// Pure state `sum_j w_j |phi_j>`.
    pub fn pure(weights: &[Complex64], labels: Vec<Vec<usize>>) -> Result<Self> {
        let rho = weights
            .iter()
            .map(|wj| weights.iter().map(|wl| wj * wl.conj()).collect())
            .collect();
        Self::new(labels, rho)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> usize {
        self.labels.len()
    }

    /// Traces out `mode` (using its full-line overlaps in `trace`) and puts
    /// basis element `replacement` in its place.
    pub fn erase(&self, mode: usize, trace: &ModeIntegrals, replacement: usize) -> Result<Self> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange { index: mode, modes: self.modes });
        }
        let n = self.terms();
        let mut rho = self.rho.clone();
        for (j, row) in rho.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate().take(n) {
                *v *= trace.full(self.labels[j][mode], self.labels[l][mode]);
            }
        }
        let labels = self
            .labels
            .iter()
            .map(|l| {
                let mut l = l.clone();
                l[mode] = replacement;
                l
            })
            .collect();
        Self::new(labels, rho)
    }

    /// Probability of each binned outcome when mode `t` is integrated with `per_mode[t]`.
    pub fn distribution(&self, per_mode: &[&ModeIntegrals]) -> Result<Vec<(BinnedOutcome, f64)>> {
        if per_mode.len() != self.modes {
            return Err(Error::ModeCountMismatch(per_mode.len(), self.modes));
        }
        for (t, mi) in per_mode.iter().enumerate() {
            if self.labels.iter().any(|l| l[t] >= mi.basis_len()) {
                return Err(Error::InvalidState(format!("basis label out of range on mode {t}")));
            }
        }
        BinnedOutcome::all(self.modes)
            .into_iter()
            .map(|d| {
                let mut total = Complex64::new(0.0, 0.0);
                for (j, lj) in self.labels.iter().enumerate() {
                    for (l, ll) in self.labels.iter().enumerate() {
                        let mut prod = self.rho[j][l];
                        for (t, mi) in per_mode.iter().enumerate() {
                            prod *= mi.restricted(d.values()[t], lj[t], ll[t]);
                        }
                        total += prod;
                    }
                }
                if !total.re.is_finite() {
                    return Err(Error::NonFiniteCorrelator { setting: d.to_string(), value: total.re });
                }
                Ok((d, total.re))
            })
            .collect()
    }

    /// `sum_d sigma(d) P_d`.
    pub fn correlator(&self, per_mode: &[&ModeIntegrals]) -> Result<f64> {
        Ok(correlator_of(&self.distribution(per_mode)?))
    }
}

/// `sum_d sigma(d) P_d` of a binned distribution.
pub fn correlator_of(distribution: &[(BinnedOutcome, f64)]) -> f64 {
    distribution.iter().map(|(d, p)| f64::from(d.sign()) * p).sum()
}
