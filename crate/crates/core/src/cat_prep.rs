//! Conditional preparation of the three-mode coherent state from four cat
//! states, two layers of balanced beam splitters and a homodyne measurement.
//! States are tracked exactly as finite sums of real-amplitude coherent products.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;

use crate::coherent::{overlap, wavefunction_x};
use crate::root_binning::{psi3_normalization, CatFamily, PSI3_PATTERNS};
use crate::{Error, Result};

const MERGE_TOL: f64 = 1e-12;
const MIN_DENSITY: f64 = 1e-300;

/// `sum_j w_j |a_j1, ..., a_jn>` with real coherent amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentSuperposition {
    n_modes: usize,
    terms: Vec<(Complex64, Vec<f64>)>,
}

impl CoherentSuperposition {
    pub fn new(n_modes: usize, terms: Vec<(Complex64, Vec<f64>)>) -> Result<Self> {
        if n_modes == 0 || terms.is_empty() {
            return Err(Error::InvalidState("superposition needs at least one mode and one term".into()));
        }
        for (w, amps) in &terms {
            if amps.len() != n_modes {
                return Err(Error::ModeCountMismatch(amps.len(), n_modes));
            }
            if !(w.re.is_finite() && w.im.is_finite()) || amps.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidState("non-finite weight or amplitude".into()));
            }
        }
        Ok(Self { n_modes, terms })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[(Complex64, Vec<f64>)] {
        &self.terms
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n_modes != other.n_modes {
            return Err(Error::ModeCountMismatch(self.n_modes, other.n_modes));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (wa, a) in &self.terms {
            for (wb, b) in &other.terms {
                let ov: f64 = a.iter().zip(b).map(|(x, y)| overlap(*x, *y)).product();
                total += wa.conj() * wb * ov;
            }
        }
        Ok(total)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).map(|c| c.re).unwrap_or(f64::NAN)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_nan() || n <= MIN_DENSITY {
            return Err(Error::ZeroNormConditional(n));
        }
        let s = n.sqrt().recip();
        Ok(Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(|(w, a)| (w * s, a.clone())).collect(),
        })
    }

    /// `|a> (x) |b>`.
    pub fn tensor(&self, other: &Self) -> Self {
        let terms = self
            .terms
            .iter()
            .flat_map(|(wa, a)| {
                other.terms.iter().map(move |(wb, b)| {
                    let mut amps = a.clone();
                    amps.extend_from_slice(b);
                    (wa * wb, amps)
                })
            })
            .collect();
        Self { n_modes: self.n_modes + other.n_modes, terms }
    }

    /// Every amplitude negated.
    pub fn sign_flipped(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(|(w, a)| (*w, a.iter().map(|x| -x).collect())).collect(),
        }
    }

    /// Merges terms with equal amplitudes and drops vanishing weights.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<(Complex64, Vec<f64>)> = Vec::new();
        for (w, a) in &self.terms {
            let a: Vec<f64> = a.iter().map(|x| if x.abs() < MERGE_TOL { 0.0 } else { *x }).collect();
            match out
                .iter_mut()
                .find(|(_, b)| b.iter().zip(&a).all(|(x, y)| (x - y).abs() < MERGE_TOL))
            {
                Some((acc, _)) => *acc += w,
                None => out.push((*w, a)),
            }
        }
        let scale = out.iter().map(|(w, _)| w.norm()).fold(0.0, f64::max);
        out.retain(|(w, _)| w.norm() > MERGE_TOL * scale);
        if out.is_empty() {
            // keep a zero vector representable
            out.push((Complex64::new(0.0, 0.0), vec![0.0; self.n_modes]));
        }
        Self { n_modes: self.n_modes, terms: out }
    }
}

/// `c_+ (|alpha> + |-alpha>)`.
pub fn scs(alpha: f64) -> Result<CoherentSuperposition> {
    let c = Complex64::new(CatFamily::new(alpha)?.c_plus(), 0.0);
    CoherentSuperposition::new(1, vec![(c, vec![alpha]), (c, vec![-alpha])])
}

/// `c'(|a,a,a> + |a,-a,-a> + |-a,a,-a> + |-a,-a,a>)`.
pub fn psi3_prime(alpha: f64) -> Result<CoherentSuperposition> {
    CatFamily::new(alpha)?;
    let c = Complex64::new(psi3_normalization(alpha), 0.0);
    let terms = PSI3_PATTERNS
        .iter()
        .map(|pat| (c, pat.iter().map(|s| f64::from(*s) * alpha).collect()))
        .collect();
    CoherentSuperposition::new(3, terms)
}

fn check_ports(n: usize, a: usize, b: usize) -> Result<()> {
    for i in [a, b] {
        if i >= n {
            return Err(Error::ModeOutOfRange { index: i, modes: n });
        }
    }
    if a == b {
        return Err(Error::PortCollision(a));
    }
    Ok(())
}

/// Balanced beam splitter: `(a_a, a_b) -> ((a_a + a_b)/sqrt2, (a_a - a_b)/sqrt2)`.
pub fn bs_transform(state: &CoherentSuperposition, a: usize, b: usize) -> Result<CoherentSuperposition> {
    check_ports(state.n_modes, a, b)?;
    let terms = state
        .terms
        .iter()
        .map(|(w, amps)| {
            let mut out = amps.clone();
            out[a] = FRAC_1_SQRT_2 * (amps[a] + amps[b]);
            out[b] = FRAC_1_SQRT_2 * (amps[a] - amps[b]);
            (*w, out)
        })
        .collect();
    Ok(CoherentSuperposition { n_modes: state.n_modes, terms })
}

/// Ordered beam-splitter applications, sum port first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsNetwork {
    steps: Vec<(usize, usize)>,
}

impl BsNetwork {
    pub fn new(steps: Vec<(usize, usize)>) -> Result<Self> {
        if let Some((a, _)) = steps.iter().find(|(a, b)| a == b) {
            return Err(Error::PortCollision(*a));
        }
        Ok(Self { steps })
    }

    /// `BS(0,1)`, `BS(2,3)`, then `BS(1,2)`, `BS(0,3)`.
    pub fn four_mode() -> Self {
        Self { steps: vec![(0, 1), (2, 3), (1, 2), (0, 3)] }
    }

    /// Same network with the second-layer ports exchanged.
    pub fn four_mode_alternate() -> Self {
        Self { steps: vec![(0, 1), (2, 3), (2, 1), (3, 0)] }
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn apply(&self, state: &CoherentSuperposition) -> Result<CoherentSuperposition> {
        self.steps.iter().try_fold(state.clone(), |s, (a, b)| bs_transform(&s, *a, *b))
    }
}

/// Projects `mode` onto the position eigenstate `x0`. Returns the normalised
/// state of the remaining modes and the outcome density at `x0`.
pub fn homodyne_project(state: &CoherentSuperposition, mode: usize, x0: f64) -> Result<(CoherentSuperposition, f64)> {
    if mode >= state.n_modes {
        return Err(Error::ModeOutOfRange { index: mode, modes: state.n_modes });
    }
    if state.n_modes < 2 {
        return Err(Error::InvalidArgument("cannot condition the only mode".into()));
    }
    let terms = state
        .terms
        .iter()
        .map(|(w, amps)| {
            let mut rest = amps.clone();
            let a = rest.remove(mode);
            (w * wavefunction_x(a, x0), rest)
        })
        .collect();
    let unnormalized = CoherentSuperposition { n_modes: state.n_modes - 1, terms }.simplified();
    let density = unnormalized.norm_sqr();
    if density.is_nan() || density < MIN_DENSITY {
        return Err(Error::ZeroNormConditional(density));
    }
    Ok((unnormalized.normalized()?, density))
}

/// `|<target|state>|^2` for normalised states.
pub fn fidelity(state: &CoherentSuperposition, target: &CoherentSuperposition) -> Result<f64> {
    if state.n_modes != target.n_modes {
        return Err(Error::ModeCountMismatch(state.n_modes, target.n_modes));
    }
    for n in [state.norm_sqr(), target.norm_sqr()] {
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("fidelity needs normalised states, got norm^2 {n}")));
        }
    }
    Ok(target.inner(state)?.norm_sqr())
}

/// Outcome of one conditional preparation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    /// Against the target state.
    pub fidelity: f64,
    /// Against the target with every amplitude negated.
    pub flipped_fidelity: f64,
    pub density: f64,
}

/// Four cat states through `network`, homodyne on mode 0 at `x0`.
pub fn run_pipeline(alpha: f64, x0: f64, network: &BsNetwork) -> Result<PipelineResult> {
    let cat = scs(alpha)?;
    let input = cat.tensor(&cat).tensor(&cat).tensor(&cat);
    let output = network.apply(&input)?;
    let (conditional, density) = homodyne_project(&output, 0, x0)?;
    let target = psi3_prime(alpha)?;
    Ok(PipelineResult {
        fidelity: fidelity(&conditional, &target)?,
        flipped_fidelity: fidelity(&conditional, &target.sign_flipped())?,
        density,
    })
}

/// [`run_pipeline`] on the standard four-mode network.
pub fn generation_pipeline(alpha: f64, x0: f64) -> Result<PipelineResult> {
    run_pipeline(alpha, x0, &BsNetwork::four_mode())
}

/// Conditioning value at the coherent peak `-sqrt(2) alpha`.
pub fn peak_conditioning(alpha: f64) -> f64 {
    -SQRT_2 * alpha
}

/// Fidelity-maximising conditioning value and the pipeline result there.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalConditioning {
    pub x0: f64,
    pub result: PipelineResult,
}

/// Scans `x0` over `[-sqrt2 alpha - 3, -sqrt2 alpha + 3]` in steps of 0.01
/// and refines the best grid point by golden-section search.
pub fn optimal_conditioning(alpha: f64, network: &BsNetwork) -> Result<OptimalConditioning> {
    let centre = peak_conditioning(alpha);
    let fid = |x: f64| run_pipeline(alpha, x, network).map(|r| r.fidelity);
    let mut best = (centre, f64::NEG_INFINITY);
    for i in 0..=600 {
        let x = centre - 3.0 + 0.01 * i as f64;
        let f = match fid(x) {
            Ok(f) => f,
            Err(Error::ZeroNormConditional(_)) => continue,
            Err(e) => return Err(e),
        };
        if f > best.1 {
            best = (x, f);
        }
    }
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best.0 - 0.01, best.0 + 0.01);
    for _ in 0..60 {
        let a = hi - invphi * (hi - lo);
        let b = lo + invphi * (hi - lo);
        if fid(a).unwrap_or(f64::NEG_INFINITY) >= fid(b).unwrap_or(f64::NEG_INFINITY) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    let x0 = if fid(mid).unwrap_or(f64::NEG_INFINITY) >= best.1 { mid } else { best.0 };
    Ok(OptimalConditioning { x0, result: run_pipeline(alpha, x0, network)? })
}
