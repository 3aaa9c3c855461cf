//! One function per subcommand. Each validates its inputs, runs the sweep on
//! the worker pool and returns the table plus the JSON headline.

use bellscope_core::cat_prep::{generation_pipeline, optimal_conditioning, run_pipeline, BsNetwork};
use bellscope_core::erasure::{noisy_bell_direct, noisy_bell_factor, p_max_ghz, ERASED_CORRELATOR_TOL};
use bellscope_core::numerics::{Constraint, EIGEN_RESIDUAL_TOL, KKT_RESIDUAL_TOL};
use bellscope_core::root_binning::{
    bell_factor_root, bell_factor_root_best_theta, cat_pair, direct_bell_psi3, domain_config, optimal_phase,
    overlaps_vw_with, Labeling, RootBinningSpec, OVERLAP_TOL,
};
use bellscope_core::sign_binning::{
    bell_factor_sign, default_angles, ghz_like_angles, optimize_state, FockCorrelatedState,
};
use bellscope_core::numerics::QuadConfig;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::output::Cell;
use crate::range::{FloatRange, IntRange};
use crate::CliError;

pub const DEFAULT_CONVERGENCE_TOL: f64 = 5e-4;
const CONVERGENCE_STEP: usize = 10;
/// Noisy mixtures are evaluated term by term only up to this many parties.
const DIRECT_MIXTURE_MAX_M: usize = 5;

pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub inputs: Value,
    pub headline: Value,
    pub tolerances: Value,
}

/// `best` maximises over both labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LabelingArg {
    XUnprimed,
    PUnprimed,
    Best,
}

impl LabelingArg {
    fn name(self) -> &'static str {
        match self {
            LabelingArg::XUnprimed => "x-unprimed",
            LabelingArg::PUnprimed => "p-unprimed",
            LabelingArg::Best => "best",
        }
    }

    fn pick(self, x: f64, p: f64) -> f64 {
        match self {
            LabelingArg::XUnprimed => x,
            LabelingArg::PUnprimed => p,
            LabelingArg::Best => x.max(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ConstraintArg {
    None,
    Nonneg,
}

impl ConstraintArg {
    fn name(self) -> &'static str {
        match self {
            ConstraintArg::None => "none",
            ConstraintArg::Nonneg => "nonneg",
        }
    }

    fn constraint(self) -> Constraint {
        match self {
            ConstraintArg::None => Constraint::None,
            ConstraintArg::Nonneg => Constraint::Nonnegative,
        }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn require_m(ms: &IntRange, min: usize) -> Result<(), CliError> {
    match ms.values().iter().find(|m| **m < min) {
        Some(m) => Err(config(format!("--m must be at least {min}, got {m}"))),
        None => Ok(()),
    }
}

fn require_positive(name: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().find(|v| **v <= 0.0) {
        Some(v) => Err(config(format!("{name} must be positive, got {v}"))),
        None => Ok(()),
    }
}

fn par_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R, CliError> + Sync + Send,
) -> Result<Vec<R>, CliError> {
    items.par_iter().map(f).collect()
}

fn ghz_closed_form(m: usize) -> f64 {
    2f64.sqrt() * (4.0 / std::f64::consts::PI).powf(m as f64 / 2.0)
}

pub fn sign_ghz(ms: &IntRange) -> Result<Report, CliError> {
    require_m(ms, 2)?;
    let values = par_map(ms.values(), |&m| {
        let b = bell_factor_sign(&FockCorrelatedState::ghz(m)?, &ghz_like_angles(m)?)?;
        Ok((m, b))
    })?;
    let rows = values
        .iter()
        .map(|(m, b)| vec![Cell::Int(*m), Cell::Num(*b), Cell::Num(ghz_closed_form(*m)), Cell::Bool(*b > 2.0)])
        .collect();
    let headline = if let [(_, b)] = values.as_slice() {
        json!({ "bell_factor": b })
    } else {
        json!({ "bell_factor_by_m": values.iter().map(|(m, b)| json!({"m": m, "bell_factor": b})).collect::<Vec<_>>() })
    };
    Ok(Report {
        header: vec!["m", "bell_factor", "closed_form", "violates"],
        rows,
        inputs: json!({ "m": ms.to_string() }),
        headline,
        tolerances: json!({}),
    })
}

pub fn sign_optimize(m: usize, d: usize, constraint: ConstraintArg, tol: Option<f64>) -> Result<Report, CliError> {
    if m < 2 {
        return Err(config(format!("--m must be at least 2, got {m}")));
    }
    if d < 2 {
        return Err(config(format!("--d must be at least 2, got {d}")));
    }
    let conv_tol = tol.unwrap_or(DEFAULT_CONVERGENCE_TOL);
    let angles = default_angles(m)?;
    let c = constraint.constraint();
    let mut ds = vec![d];
    if d >= CONVERGENCE_STEP + 2 {
        ds.push(d - CONVERGENCE_STEP);
    }
    let results = par_map(&ds, |&dd| Ok(optimize_state(m, dd, &angles, c)?))?;
    let best = &results[0];
    let rows = best
        .state
        .coefficients()
        .iter()
        .enumerate()
        .map(|(r, c)| vec![Cell::Int(r), Cell::Num(*c)])
        .collect();
    let mut headline = Map::new();
    headline.insert("bell".into(), json!(best.bell));
    headline.insert("residual".into(), json!(best.residual));
    headline.insert("angles".into(), json!(if m == 2 { "phi=pi/4 family" } else { "ghz-like" }));
    if let Some(prev) = results.get(1) {
        let delta = (best.bell - prev.bell).abs();
        headline.insert("bell_at_d_minus_10".into(), json!(prev.bell));
        headline.insert("convergence_delta".into(), json!(delta));
        headline.insert("converged".into(), json!(delta < conv_tol));
    }
    let residual_key = if c == Constraint::None { "eigen_residual" } else { "kkt_residual" };
    let residual_tol = if c == Constraint::None { EIGEN_RESIDUAL_TOL } else { KKT_RESIDUAL_TOL };
    Ok(Report {
        header: vec!["r", "c_r"],
        rows,
        inputs: json!({ "m": m, "d": d, "constraint": constraint.name() }),
        headline: Value::Object(headline),
        tolerances: json!({ residual_key: residual_tol, "convergence_delta": conv_tol }),
    })
}

pub fn root_max(ms: &IntRange, theta: Option<f64>, labeling: LabelingArg) -> Result<Report, CliError> {
    require_m(ms, 2)?;
    let values = par_map(ms.values(), |&m| {
        let th = theta.unwrap_or_else(|| optimal_phase(m));
        let spec = RootBinningSpec::new(1.0, 1.0, th, m)?;
        let x = bell_factor_root(&spec, Labeling::XUnprimed)?;
        let p = bell_factor_root(&spec, Labeling::PUnprimed)?;
        let best_theta = bell_factor_root_best_theta(&spec, Labeling::XUnprimed)?.0;
        Ok((m, th, x, p, best_theta))
    })?;
    let rows = values
        .iter()
        .map(|(m, th, x, p, bt)| {
            vec![
                Cell::Int(*m),
                Cell::Num(*th),
                Cell::Num(*x),
                Cell::Num(*p),
                Cell::Num(labeling.pick(*x, *p)),
                Cell::Num(*bt),
                Cell::Num(2f64.powf((*m as f64 + 1.0) / 2.0)),
            ]
        })
        .collect();
    let headline = json!({
        "bell_factor_by_m": values.iter().map(|(m, _, x, p, _)| json!({"m": m, "bell_factor": labeling.pick(*x, *p)})).collect::<Vec<_>>()
    });
    Ok(Report {
        header: vec!["m", "theta", "bell_x_unprimed", "bell_p_unprimed", "bell_factor", "bell_max_theta", "quantum_bound"],
        rows,
        inputs: json!({ "m": ms.to_string(), "theta": theta.map_or(json!("optimal"), |t| json!(t)), "labeling": labeling.name(), "v": 1.0, "w": 1.0 }),
        headline,
        tolerances: json!({}),
    })
}

fn overlaps(alpha: f64, tol: f64) -> Result<(f64, f64), CliError> {
    Ok(overlaps_vw_with(&cat_pair(alpha)?, &QuadConfig::with_abs_tol(tol))?)
}

/// Root-binned Bell factor at `theta` for both labelings, and the best over `theta`.
fn class_bells(v: f64, w: f64, theta: f64, m: usize, labeling: LabelingArg) -> Result<(f64, f64, f64), CliError> {
    let spec = RootBinningSpec::new(v.min(1.0), w.min(1.0), theta, m)?;
    let x = bell_factor_root(&spec, Labeling::XUnprimed)?;
    let p = bell_factor_root(&spec, Labeling::PUnprimed)?;
    let bx = bell_factor_root_best_theta(&spec, Labeling::XUnprimed)?.0;
    let bp = bell_factor_root_best_theta(&spec, Labeling::PUnprimed)?.0;
    Ok((x, p, labeling.pick(bx, bp)))
}

pub fn cat_vw(alphas: &FloatRange, ms: &IntRange, theta: f64, labeling: LabelingArg, tol: Option<f64>) -> Result<Report, CliError> {
    require_positive("--alpha", alphas.values())?;
    require_m(ms, 1)?;
    let qtol = tol.unwrap_or(OVERLAP_TOL);
    let per_alpha = par_map(alphas.values(), |&a| {
        let (v, w) = overlaps(a, qtol)?;
        let bells = ms
            .values()
            .iter()
            .map(|&m| class_bells(v, w, theta, m, labeling).map(|b| (m, b)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((a, v, w, bells))
    })?;
    let mut rows = Vec::new();
    for (a, v, w, bells) in &per_alpha {
        for (m, (x, p, bt)) in bells {
            rows.push(vec![
                Cell::Num(*a),
                Cell::Int(*m),
                Cell::Num(*v),
                Cell::Num(*w),
                Cell::Num(theta),
                Cell::Num(*x),
                Cell::Num(*p),
                Cell::Num(labeling.pick(*x, *p)),
                Cell::Num(*bt),
            ]);
        }
    }
    let headline = json!({
        "points": per_alpha.iter().map(|(a, v, w, bells)| json!({
            "alpha": a,
            "v": v,
            "w": w,
            "bell": bells.iter().map(|(m, (x, p, bt))| json!({"m": m, "bell_factor": labeling.pick(*x, *p), "bell_max_theta": bt})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>()
    });
    Ok(Report {
        header: vec!["alpha", "m", "v", "w", "theta", "bell_x_unprimed", "bell_p_unprimed", "bell_factor", "bell_max_theta"],
        rows,
        inputs: json!({ "alpha": alphas.to_string(), "m": ms.to_string(), "theta": theta, "labeling": labeling.name() }),
        headline,
        tolerances: json!({ "overlap_quadrature_abs": qtol }),
    })
}

pub fn psi3_curve(alphas: &FloatRange, labeling: LabelingArg, tol: Option<f64>) -> Result<Report, CliError> {
    require_positive("--alpha", alphas.values())?;
    let qtol = tol.unwrap_or(OVERLAP_TOL);
    let points = par_map(alphas.values(), |&a| {
        let r = direct_bell_psi3(a)?;
        let (v, w) = overlaps(a, qtol)?;
        let (cx, cp, cbest) = class_bells(v, w, 0.0, 3, labeling)?;
        Ok((r, labeling.pick(cx, cp), cbest))
    })?;
    let pick = |r: &bellscope_core::root_binning::Psi3Report| labeling.pick(r.per_labeling[0].1, r.per_labeling[1].1);
    let rows = points
        .iter()
        .map(|(r, c0, cbest)| {
            vec![
                Cell::Num(r.alpha),
                Cell::Num(pick(r)),
                Cell::Num(r.per_labeling[0].1),
                Cell::Num(r.per_labeling[1].1),
                Cell::Text(r.best_labeling.to_string()),
                Cell::Num(*c0),
                Cell::Num(*cbest),
                Cell::Num(r.max_normalization_error),
            ]
        })
        .collect();
    let crossing = points.windows(2).find_map(|w| {
        let (b0, b1) = (pick(&w[0].0), pick(&w[1].0));
        (b0 < 2.0 && b1 >= 2.0).then(|| w[0].0.alpha + (2.0 - b0) * (w[1].0.alpha - w[0].0.alpha) / (b1 - b0))
    });
    let last = &points.last().expect("range is never empty").0;
    let max_norm = points.iter().map(|(r, _, _)| r.max_normalization_error).fold(0.0, f64::max);
    Ok(Report {
        header: vec![
            "alpha",
            "bell_factor",
            "bell_x_unprimed",
            "bell_p_unprimed",
            "best_labeling",
            "class_bell_theta0",
            "class_bell_max_theta",
            "max_normalization_error",
        ],
        rows,
        inputs: json!({ "alpha": alphas.to_string(), "labeling": labeling.name() }),
        headline: json!({
            "crossing_alpha": crossing,
            "final_alpha": last.alpha,
            "final_bell_factor": pick(last),
            "max_normalization_error": max_norm,
        }),
        tolerances: json!({ "domain_quadrature_abs": domain_config().abs_tol, "overlap_quadrature_abs": qtol }),
    })
}

pub fn noise_sweep(ms: &IntRange, ps: &FloatRange) -> Result<Report, CliError> {
    require_m(ms, 2)?;
    if let Some(p) = ps.values().iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(config(format!("--p must lie in [0, 1], got {p}")));
    }
    let grid: Vec<(usize, f64)> = ms.values().iter().flat_map(|&m| ps.values().iter().map(move |&p| (m, p))).collect();
    let values = par_map(&grid, |&(m, p)| {
        let state = FockCorrelatedState::ghz(m)?;
        let angles = ghz_like_angles(m)?;
        let clean = bell_factor_sign(&state, &angles)?;
        let b = noisy_bell_factor(clean, p, m)?;
        let direct = if m <= DIRECT_MIXTURE_MAX_M { Some(noisy_bell_direct(&state, &angles, p)?) } else { None };
        Ok((m, p, b, direct))
    })?;
    let rows = values
        .iter()
        .map(|(m, p, b, direct)| {
            vec![Cell::Int(*m), Cell::Num(*p), Cell::Num(*b), Cell::Bool(*b > 2.0), direct.map_or(Cell::Empty, Cell::Num)]
        })
        .collect();
    let thresholds = ms
        .values()
        .iter()
        .map(|&m| p_max_ghz(m).map(|t| json!({"m": m, "p_max": t.p_max, "violates": t.violates})))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        header: vec!["m", "p", "bell_factor", "violates", "bell_direct"],
        rows,
        inputs: json!({ "m": ms.to_string(), "p": ps.to_string(), "state": "ghz", "angles": "ghz-like" }),
        headline: json!({ "p_max": thresholds }),
        tolerances: json!({ "erased_correlator": ERASED_CORRELATOR_TOL }),
    })
}

pub fn prep_fidelity(alphas: &FloatRange, x0: Option<&FloatRange>) -> Result<Report, CliError> {
    require_positive("--alpha", alphas.values())?;
    let alternate = BsNetwork::four_mode_alternate();
    let grid: Vec<(f64, Option<f64>)> = match x0 {
        Some(xs) => alphas.values().iter().flat_map(|&a| xs.values().iter().map(move |&x| (a, Some(x)))).collect(),
        None => alphas.values().iter().map(|&a| (a, None)).collect(),
    };
    let values = par_map(&grid, |&(a, x)| {
        let (x, main) = match x {
            Some(x) => (x, generation_pipeline(a, x)?),
            None => {
                let o = optimal_conditioning(a, &BsNetwork::four_mode())?;
                (o.x0, o.result)
            }
        };
        let alt = run_pipeline(a, x, &alternate)?;
        Ok((a, x, main, alt.fidelity))
    })?;
    let rows = values
        .iter()
        .map(|(a, x, r, alt)| {
            vec![Cell::Num(*a), Cell::Num(*x), Cell::Num(r.fidelity), Cell::Num(r.density), Cell::Num(r.flipped_fidelity), Cell::Num(*alt)]
        })
        .collect();
    let headline = json!({
        "points": values.iter().map(|(a, x, r, alt)| json!({
            "alpha": a, "x0": x, "fidelity": r.fidelity, "density": r.density, "alternate_fidelity": alt,
        })).collect::<Vec<_>>()
    });
    Ok(Report {
        header: vec!["alpha", "x0", "fidelity", "density", "flipped_fidelity", "alternate_fidelity"],
        rows,
        inputs: json!({ "alpha": alphas.to_string(), "x0": x0.map_or(json!("optimal"), |x| json!(x.to_string())) }),
        headline,
        tolerances: json!({ "x0_grid_step": 0.01 }),
    })
}
