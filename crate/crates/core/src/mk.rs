//! Mermin-Klyshko Bell operators, expanded symbolically over setting tuples.
//!
//! `B_1 = 2 O_1`, `B'_1 = 2 O'_1` and
//! `B_t = B_{t-1}/2 (O_t + O'_t) + B'_{t-1}/2 (O_t - O'_t)`,
//! where `B'_t` is `B_t` with every primed and unprimed observable exchanged.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::{Error, Result};

/// Exact dyadic coefficient.
pub type Coefficient = Ratio<i64>;

/// Default party count up to which the classical bound is checked by exhaustion.
pub const DEFAULT_EXHAUSTION_LIMIT: usize = 4;

/// Which of the two observables a party measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setting {
    Unprimed,
    Primed,
}

impl Setting {
    pub fn flipped(self) -> Self {
        match self {
            Setting::Unprimed => Setting::Primed,
            Setting::Primed => Setting::Unprimed,
        }
    }
}

/// One choice of setting per party. Ordered lexicographically with
/// unprimed before primed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SettingTuple(Vec<Setting>);

impl SettingTuple {
    pub fn new(choices: Vec<Setting>) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::InvalidPartyCount(0));
        }
        Ok(Self(choices))
    }

    /// Parses a string of `u`/`p` characters, e.g. `"uup"`.
    pub fn parse(s: &str) -> Result<Self> {
        let choices = s
            .chars()
            .map(|c| match c {
                'u' => Ok(Setting::Unprimed),
                'p' => Ok(Setting::Primed),
                other => Err(Error::InvalidArgument(format!("bad setting '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(choices)
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn choices(&self) -> &[Setting] {
        &self.0
    }

    pub fn primed_count(&self) -> usize {
        self.0.iter().filter(|s| **s == Setting::Primed).count()
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| s.flipped()).collect())
    }

    fn extended(&self, last: Setting) -> Self {
        let mut v = self.0.clone();
        v.push(last);
        Self(v)
    }

    /// All `2^m` tuples in lexicographic order.
    pub fn all(m: usize) -> Vec<Self> {
        (0..1usize << m)
            .map(|bits| {
                Self(
                    (0..m)
                        .map(|t| {
                            if bits >> (m - 1 - t) & 1 == 1 {
                                Setting::Primed
                            } else {
                                Setting::Unprimed
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for SettingTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Setting::Unprimed => "u",
                Setting::Primed => "p",
            })?;
        }
        Ok(())
    }
}

/// Fully expanded `B_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MkExpansion {
    m: usize,
    terms: BTreeMap<SettingTuple, Coefficient>,
    alpha: BTreeMap<usize, Coefficient>,
}

impl MkExpansion {
    fn from_terms(m: usize, all: BTreeMap<SettingTuple, Coefficient>) -> Self {
        let terms: BTreeMap<_, _> = all.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let mut alpha = BTreeMap::new();
        for (t, c) in &terms {
            *alpha.entry(t.primed_count()).or_insert_with(Coefficient::zero) += *c;
        }
        alpha.retain(|_, c: &mut Coefficient| !c.is_zero());
        Self { m, terms, alpha }
    }

    pub fn parties(&self) -> usize {
        self.m
    }

    /// Nonzero terms in lexicographic tuple order.
    pub fn terms(&self) -> &BTreeMap<SettingTuple, Coefficient> {
        &self.terms
    }

    /// Coefficients collapsed by primed count; meaningful only when the
    /// correlators depend on nothing but that count.
    pub fn alpha(&self) -> &BTreeMap<usize, Coefficient> {
        &self.alpha
    }

    pub fn coefficient(&self, tuple: &SettingTuple) -> Coefficient {
        self.terms.get(tuple).copied().unwrap_or_else(Coefficient::zero)
    }

    /// `B'_m`: the same expansion with every tuple flipped.
    pub fn primed_twin(&self) -> Self {
        let flipped = self.terms.iter().map(|(t, c)| (t.flipped(), *c)).collect();
        Self::from_terms(self.m, flipped)
    }
}

fn expand_pair(m: usize) -> (BTreeMap<SettingTuple, Coefficient>, BTreeMap<SettingTuple, Coefficient>) {
    let two = Coefficient::from_integer(2);
    if m == 1 {
        let u = SettingTuple(vec![Setting::Unprimed]);
        let p = SettingTuple(vec![Setting::Primed]);
        let b = BTreeMap::from([(u.clone(), two), (p.clone(), Coefficient::zero())]);
        let bp = BTreeMap::from([(u, Coefficient::zero()), (p, two)]);
        return (b, bp);
    }
    let (prev, prev_twin) = expand_pair(m - 1);
    let half = Coefficient::new(1, 2);
    let mut b = BTreeMap::new();
    let mut bp = BTreeMap::new();
    for (tuple, c) in &prev {
        let c_twin = prev_twin[tuple];
        // B_t   = B/2 (O + O') + B'/2 (O - O')
        b.insert(tuple.extended(Setting::Unprimed), half * (c + c_twin));
        b.insert(tuple.extended(Setting::Primed), half * (c - c_twin));
        // B'_t  = B'/2 (O' + O) + B/2 (O' - O)
        bp.insert(tuple.extended(Setting::Unprimed), half * (c_twin - c));
        bp.insert(tuple.extended(Setting::Primed), half * (c_twin + c));
    }
    (b, bp)
}

/// Expands `B_m` into signed exact coefficients over the `2^m` setting tuples.
pub fn expand_mk(m: usize) -> Result<MkExpansion> {
    if m == 0 {
        return Err(Error::InvalidPartyCount(0));
    }
    let (b, _) = expand_pair(m);
    Ok(MkExpansion::from_terms(m, b))
}

/// Local-realistic maximum of `|<B_m>|` over every deterministic `+-1`
/// assignment, with the default exhaustion limit.
pub fn classical_bound_exhaustive(expansion: &MkExpansion) -> Result<f64> {
    classical_bound_exhaustive_with_limit(expansion, DEFAULT_EXHAUSTION_LIMIT)
}

pub fn classical_bound_exhaustive_with_limit(expansion: &MkExpansion, limit: usize) -> Result<f64> {
    let m = expansion.m;
    if m > limit {
        return Err(Error::ExhaustionLimitExceeded { m, limit });
    }
    let mut best = Coefficient::zero();
    // bit 2t: value of O_t, bit 2t+1: value of O'_t
    for strategy in 0u64..(1u64 << (2 * m)) {
        let value_of = |party: usize, s: Setting| -> i64 {
            let bit = 2 * party + usize::from(s == Setting::Primed);
            if strategy >> bit & 1 == 1 {
                -1
            } else {
                1
            }
        };
        let mut total = Coefficient::zero();
        for (tuple, c) in &expansion.terms {
            let sign: i64 = tuple
                .0
                .iter()
                .enumerate()
                .map(|(t, s)| value_of(t, *s))
                .product();
            total += *c * sign;
        }
        best = best.max(total.abs());
    }
    Ok(ratio_to_f64(best))
}

pub(crate) fn ratio_to_f64(c: Coefficient) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

/// Maximal quantum value `2^((m+1)/2)`.
pub fn quantum_bound(m: usize) -> f64 {
    2f64.powf((m as f64 + 1.0) / 2.0)
}

/// Signed expectation `sum_tuples coeff * correlator(tuple)`.
pub fn bell_expectation<F>(expansion: &MkExpansion, mut correlator: F) -> Result<f64>
where
    F: FnMut(&SettingTuple) -> f64,
{
    let mut total = 0.0;
    for (tuple, c) in &expansion.terms {
        let e = correlator(tuple);
        if !e.is_finite() {
            return Err(Error::NonFiniteCorrelator {
                setting: tuple.to_string(),
                value: e,
            });
        }
        total += ratio_to_f64(*c) * e;
    }
    Ok(total)
}

/// Bell factor `|<B_m>|` for the given correlator table.
pub fn bell_factor<F>(expansion: &MkExpansion, correlator: F) -> Result<f64>
where
    F: FnMut(&SettingTuple) -> f64,
{
    bell_expectation(expansion, correlator).map(f64::abs)
}
