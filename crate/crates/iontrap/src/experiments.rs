//! The named experiments. Each one turns a [`RunConfig`] into result tables, a
//! JSON summary and, when a self-check fails, a diagnostic.

use iontrap_core::closed_forms::{
    anticrossing_shift, engine_problem, first_order_evolutor, rwa_evolutor, spectrum_second_order,
    y1_relation, Regime, RegimeKind, DEFAULT_RHO,
};
use iontrap_core::hamiltonians::{bh_closed_form, t1, t_delta};
use iontrap_core::operator::{propagator, BasisIndex, Spin};
use iontrap_core::oracle::{
    avoided_pair, balanced_gap_at, exact_eigs, fit_log_log, frame_chain_evolutor, from_gaps, gap_at,
    ith_magnus_evolutor, ConvergenceFit, MAGNUS_STEPS_PER_UNIT, PAIRING_THRESHOLD,
};
use iontrap_core::perturbation::{
    residual_norm, solve, SpectralDecomposition, DEFAULT_DEG_TOL_REL, HERMITICITY_TOL,
};
use iontrap_core::{BalancedParams, ModelParams, Operator, SpaceConfig, C64};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{Params, RunConfig};
use crate::error::RunError;
use crate::table::ResultTable;

/// Standard λ grid of the order fits.
pub const LAMBDA_GRID: [f64; 4] = [0.02, 0.04, 0.08, 0.16];
/// A fitted order must reach `order − ORDER_SLACK`.
pub const ORDER_SLACK: f64 = 0.3;
pub const FRAME_CHAIN_TOL: f64 = 1e-6;
pub const NORM_TOL: f64 = 1e-10;
/// Population allowed above the interior block during `evolve`.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Tolerances echoed into every metadata file.
pub fn tolerances() -> Value {
    json!({
        "degeneracy_tol_rel": DEFAULT_DEG_TOL_REL,
        "hermiticity_tol": HERMITICITY_TOL,
        "magnus_steps_per_unit": MAGNUS_STEPS_PER_UNIT,
        "min_r_squared": ConvergenceFit::MIN_R_SQUARED,
        "order_slack": ORDER_SLACK,
        "pairing_threshold": PAIRING_THRESHOLD,
        "regime_rho": DEFAULT_RHO,
        "frame_chain_tol": FRAME_CHAIN_TOL,
        "norm_tol": NORM_TOL,
        "leakage_tol": LEAKAGE_TOL,
    })
}

/// Tables, summary and an optional failed self-check.
#[derive(Debug)]
pub struct Output {
    pub tables: Vec<ResultTable>,
    pub summary: Value,
    pub diagnostic: Option<RunError>,
}

pub fn run_experiment(cfg: &RunConfig) -> Result<Output, RunError> {
    match cfg.experiment.as_str() {
        "spectrum" => spectrum(cfg),
        "evolve" => evolve(cfg),
        "compare-rwa" => compare_rwa(cfg),
        "residual-order" => residual_order(cfg),
        "anticrossing" => anticrossing(cfg),
        "limits" => limits(cfg),
        "frame-chain" => frame_chain(cfg),
        other => Err(RunError::Config(format!("unknown experiment `{other}`"))),
    }
}

fn core<T>(invariant: &str, r: iontrap_core::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::from_core(invariant, e))
}

fn regime_kind(name: &str) -> Result<RegimeKind, RunError> {
    RegimeKind::from_name(name).ok_or_else(|| {
        let names: Vec<&str> = RegimeKind::ALL.iter().map(|k| k.name()).collect();
        RunError::Config(format!("unknown regime `{name}`; valid regimes: {}", names.join(", ")))
    })
}

fn default_regime() -> String {
    RegimeKind::EtaMuchLess.name().to_string()
}

fn default_lambdas() -> Vec<f64> {
    LAMBDA_GRID.to_vec()
}

fn check_grid(lambdas: &[f64]) -> Result<(), RunError> {
    if lambdas.len() < 4 || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(RunError::Config("lambdas needs at least 4 positive values".into()));
    }
    Ok(())
}

/// The base parameters at coupling `lambda`, keeping `η̆/λ`.
fn at_lambda(bp: &BalancedParams, lambda: f64) -> Result<BalancedParams, RunError> {
    let r = if bp.lambda == 0.0 {
        BalancedParams::new(bp.nu, bp.delta_breve, 0.0, lambda)
    } else {
        bp.with_lambda(lambda)
    };
    r.map_err(RunError::from_params)
}

fn fit_json(f: &ConvergenceFit) -> Value {
    json!({ "slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared })
}

// spectrum

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumOptions {
    #[serde(default = "default_levels")]
    n_levels: usize,
}

fn default_levels() -> usize {
    10
}

fn spectrum(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: SpectrumOptions = cfg.options()?;
    if opts.n_levels == 0 || opts.n_levels > cfg.space.interior_cutoff() {
        return Err(RunError::Config(format!(
            "n_levels must lie in 1..={} for this space",
            cfg.space.interior_cutoff()
        )));
    }
    let bp = cfg.params.balanced()?;
    let formula = core("spectrum", spectrum_second_order(&bp, opts.n_levels))?;
    let h = bh_closed_form(&bp, cfg.space);
    let (values, vectors) = core("exact diagonalization", exact_eigs(&h))?;
    let vac = BasisIndex::new(0, Spin::Ground).flat();
    let weight = vectors.matrix()[(vac, 0)].norm_sqr();
    if weight < PAIRING_THRESHOLD {
        return Err(RunError::numerical(
            "eigenstate pairing",
            format!("lowest eigenvector has overlap {weight:.3} with |0,g⟩"),
        ));
    }
    let pairs: Vec<(f64, f64)> = (1..=opts.n_levels)
        .into_par_iter()
        .map(|n| core("eigenstate pairing", avoided_pair(&h, n)))
        .collect::<Result<_, _>>()?;

    let mut levels = ResultTable::new(
        "levels",
        &["n", "e_minus_formula", "e_plus_formula", "e_minus_exact", "e_plus_exact", "a_n", "b_n"],
    );
    let mut worst = (formula.e0 - values[0]).abs();
    for (k, &(n, lo, hi)) in formula.levels.iter().enumerate() {
        let (xlo, xhi) = pairs[k];
        worst = worst.max((lo - xlo).abs()).max((hi - xhi).abs());
        levels.push_row(&[n as f64, lo, hi, xlo, xhi, formula.a[k], formula.b[k]]);
    }
    let mut ground = ResultTable::new("ground", &["e0_formula", "e0_exact"]);
    ground.push_row(&[formula.e0, values[0]]);
    let l3 = bp.lambda.abs().powi(3) * bp.nu;
    Ok(Output {
        tables: vec![levels, ground],
        summary: json!({
            "max_abs_error": worst,
            "max_error_over_lambda3_nu": if l3 > 0.0 { json!(worst / l3) } else { Value::Null },
        }),
        diagnostic: None,
    })
}

// evolve

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveOptions {
    #[serde(default = "default_t_max")]
    t_max: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default)]
    fock: usize,
    #[serde(default = "default_spin")]
    spin: String,
    #[serde(default = "default_frame")]
    frame: String,
}

fn default_t_max() -> f64 {
    10.0
}

fn default_steps() -> usize {
    100
}

fn default_spin() -> String {
    "g".into()
}

fn default_frame() -> String {
    "balanced".into()
}

struct Observables {
    p_excited: f64,
    mean_n: f64,
    norm: f64,
    leakage: f64,
}

fn observables(psi: &[C64], space: SpaceConfig) -> Observables {
    let cutoff = space.interior_cutoff();
    let mut o = Observables {
        p_excited: 0.0,
        mean_n: 0.0,
        norm: 0.0,
        leakage: 0.0,
    };
    for (k, amp) in psi.iter().enumerate() {
        let b = BasisIndex::from_flat(k);
        let w = amp.norm_sqr();
        o.norm += w;
        o.mean_n += w * b.fock as f64;
        if b.spin == Spin::Excited {
            o.p_excited += w;
        }
        if b.fock > cutoff {
            o.leakage += w;
        }
    }
    o
}

fn column(u: &Operator, k: usize) -> Vec<C64> {
    u.matrix().column(k).iter().copied().collect()
}

fn evolve(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: EvolveOptions = cfg.options()?;
    let spin = match opts.spin.as_str() {
        "g" => Spin::Ground,
        "e" => Spin::Excited,
        other => return Err(RunError::Config(format!("spin must be \"g\" or \"e\", got `{other}`"))),
    };
    if opts.fock > cfg.space.interior_cutoff() {
        return Err(RunError::Config("initial Fock level lies outside the interior block".into()));
    }
    if !(opts.t_max >= 0.0) || opts.steps == 0 {
        return Err(RunError::Config("need t_max ≥ 0 and steps ≥ 1".into()));
    }
    let start = BasisIndex::new(opts.fock, spin).flat();
    let times: Vec<f64> = (0..=opts.steps)
        .map(|k| opts.t_max * k as f64 / opts.steps as f64)
        .collect();
    let space = cfg.space;
    let states: Vec<Vec<C64>> = match opts.frame.as_str() {
        "balanced" => {
            let bp = cfg.params.balanced()?;
            let (values, v) = core("exact diagonalization", exact_eigs(&bh_closed_form(&bp, space)))?;
            let m = v.matrix();
            let c: Vec<C64> = (0..values.len()).map(|k| m[(start, k)].conj()).collect();
            times
                .par_iter()
                .map(|&t| {
                    let phased: Vec<C64> = values
                        .iter()
                        .zip(&c)
                        .map(|(&e, &ck)| C64::from_polar(1.0, -e * t) * ck)
                        .collect();
                    (0..values.len())
                        .map(|j| (0..values.len()).map(|k| m[(j, k)] * phased[k]).sum())
                        .collect()
                })
                .collect()
        }
        "lab" => {
            let p = cfg.params.full("evolve (lab frame)")?;
            times
                .par_iter()
                .map(|&t| core("frame chain", frame_chain_evolutor(&p, t, space)).map(|u| column(&u, start)))
                .collect::<Result<_, _>>()?
        }
        other => {
            return Err(RunError::Config(format!(
                "frame must be \"balanced\" or \"lab\", got `{other}`"
            )))
        }
    };
    let mut table = ResultTable::new("evolution", &["t", "p_excited", "mean_n", "norm", "leakage"]);
    let mut diagnostic = None;
    let mut max_leak = 0.0_f64;
    for (&t, psi) in times.iter().zip(&states) {
        let o = observables(psi, space);
        max_leak = max_leak.max(o.leakage);
        if diagnostic.is_none() && (o.norm - 1.0).abs() > NORM_TOL {
            diagnostic = Some(RunError::numerical("norm conservation", format!("|ψ|² = {} at t = {t}", o.norm)));
        }
        table.push_row(&[t, o.p_excited, o.mean_n, o.norm, o.leakage]);
    }
    if diagnostic.is_none() && max_leak > LEAKAGE_TOL {
        diagnostic = Some(RunError::numerical(
            "interior confinement",
            format!("population {max_leak:e} beyond the interior block; enlarge n_max"),
        ));
    }
    Ok(Output {
        tables: vec![table],
        summary: json!({ "max_leakage": max_leak }),
        diagnostic,
    })
}

// compare-rwa

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareOptions {
    #[serde(default = "default_lambdas")]
    lambdas: Vec<f64>,
    #[serde(default = "default_compare_times")]
    times: Vec<f64>,
    #[serde(default = "default_regime")]
    regime: String,
}

fn default_compare_times() -> Vec<f64> {
    vec![1.0, 3.0]
}

fn compare_rwa(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: CompareOptions = cfg.options()?;
    check_grid(&opts.lambdas)?;
    if opts.times.is_empty() || opts.times.iter().any(|&t| !(t > 0.0)) {
        return Err(RunError::Config("times needs positive values".into()));
    }
    let kind = regime_kind(&opts.regime)?;
    let bp = cfg.params.balanced()?;
    if (bp.delta_breve - bp.nu).abs() > DEFAULT_DEG_TOL_REL * bp.nu {
        return Err(RunError::Config(format!(
            "compare-rwa needs resonance ν = δ̆ (got ν = {}, δ̆ = {})",
            bp.nu, bp.delta_breve
        )));
    }
    let space = cfg.space;
    let grid: Vec<(f64, f64)> = opts
        .times
        .iter()
        .flat_map(|&t| opts.lambdas.iter().map(move |&l| (t, l)))
        .collect();
    let rows: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&(t, l)| {
            let p = at_lambda(&bp, l)?;
            let regime = core("regime", Regime::new(kind, &p))?;
            let exact = core("propagator", propagator(&bh_closed_form(&p, space), t))?;
            let rwa = core("rwa evolutor", rwa_evolutor(t, &p, space))?;
            let e1 = core("first-order evolutor", first_order_evolutor(t, &p, &regime, space))?;
            let y1 = core("first-order relation", y1_relation(t, &p, space))?;
            let d = |u: &Operator| core("interior norm", u.interior_distance(&exact));
            Ok([d(&rwa)?, d(&e1)?, d(&y1)?])
        })
        .collect::<Result<_, RunError>>()?;

    let mut errors = ResultTable::new("errors", &["lambda", "t", "err_rwa", "err_e1", "err_y1", "ratio"]);
    for (&(t, l), r) in grid.iter().zip(&rows) {
        errors.push_row(&[l, t, r[0], r[1], r[2], r[0] / r[1]]);
    }
    let mut fits = ResultTable::new(
        "fits",
        &["t", "slope_rwa", "r2_rwa", "slope_e1", "r2_e1", "slope_y1", "r2_y1"],
    );
    let mut diagnostic = None;
    let mut summary = Vec::new();
    let n = opts.lambdas.len();
    for (k, &t) in opts.times.iter().enumerate() {
        let block = &rows[k * n..(k + 1) * n];
        let mut row = vec![t];
        let mut js = serde_json::Map::new();
        for (j, label) in ["rwa", "e1", "y1"].iter().enumerate() {
            let r: Vec<f64> = block.iter().map(|x| x[j]).collect();
            let f = core("fit", fit_log_log(&opts.lambdas, &r))?;
            if diagnostic.is_none() && !f.is_conclusive() {
                diagnostic = Some(RunError::numerical(
                    "fit conclusiveness",
                    format!("{label} at t = {t}: r² = {:.4}", f.r_squared),
                ));
            }
            row.extend([f.slope, f.r_squared]);
            js.insert(label.to_string(), fit_json(&f));
        }
        fits.push_row(&row);
        summary.push(json!({ "t": t, "fits": js }));
    }
    Ok(Output {
        tables: vec![errors, fits],
        summary: Value::Array(summary),
        diagnostic,
    })
}

// residual-order

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResidualOptions {
    #[serde(default = "default_order")]
    order: usize,
    #[serde(default = "default_regime")]
    regime: String,
    #[serde(default = "default_lambdas")]
    lambdas: Vec<f64>,
}

fn default_order() -> usize {
    2
}

fn residual_order(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: ResidualOptions = cfg.options()?;
    check_grid(&opts.lambdas)?;
    if !(1..=6).contains(&opts.order) {
        return Err(RunError::Config("order must lie in 1..=6".into()));
    }
    let kind = regime_kind(&opts.regime)?;
    let bp = cfg.params.balanced()?;
    let space = cfg.space;
    let rows: Vec<Vec<f64>> = opts
        .lambdas
        .par_iter()
        .map(|&l| {
            let p = at_lambda(&bp, l)?;
            let regime = core("regime", Regime::new(kind, &p))?;
            let prob = core("engine input", engine_problem(&p, &regime, space))?;
            let spec = core(
                "cluster separation",
                SpectralDecomposition::new(&prob.h0, DEFAULT_DEG_TOL_REL * p.nu),
            )?;
            let sol = core("engine", solve(&spec, &prob.series, opts.order))?;
            (1..=opts.order)
                .map(|n| core("residual", residual_norm(&prob.h0, &prob.series, &sol, l, n)))
                .collect()
        })
        .collect::<Result<_, RunError>>()?;

    let mut headers = vec!["lambda".to_string()];
    headers.extend((1..=opts.order).map(|n| format!("r_{n}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut residuals = ResultTable::new("residuals", &header_refs);
    for (&l, r) in opts.lambdas.iter().zip(&rows) {
        let mut row = vec![l];
        row.extend(r);
        residuals.push_row(&row);
    }
    let mut fits = ResultTable::new("fits", &["order", "slope", "intercept", "r_squared", "required_slope"]);
    let mut diagnostic = None;
    for n in 1..=opts.order {
        let r: Vec<f64> = rows.iter().map(|x| x[n - 1]).collect();
        let f = core("fit", fit_log_log(&opts.lambdas, &r))?;
        let required = n as f64 + 1.0 - ORDER_SLACK;
        if diagnostic.is_none() {
            if !f.is_conclusive() {
                diagnostic = Some(RunError::numerical(
                    "fit conclusiveness",
                    format!("R_{n}: r² = {:.4}", f.r_squared),
                ));
            } else if f.slope < required {
                diagnostic = Some(RunError::numerical(
                    "residual order",
                    format!("R_{n}: slope {:.3} < {required}", f.slope),
                ));
            }
        }
        fits.push_row(&[n as f64, f.slope, f.intercept, f.r_squared, required]);
    }
    Ok(Output {
        tables: vec![residuals, fits],
        summary: json!({ "regime": kind.name(), "order": opts.order }),
        diagnostic,
    })
}

// anticrossing

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnticrossingOptions {
    #[serde(default = "default_anticrossing_levels")]
    levels: Vec<usize>,
    #[serde(default = "default_offset_min")]
    offset_min: f64,
    #[serde(default = "default_offset_max")]
    offset_max: f64,
    #[serde(default = "default_offset_steps")]
    offset_steps: usize,
    scan: Option<String>,
}

fn default_anticrossing_levels() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_offset_min() -> f64 {
    -0.01
}

fn default_offset_max() -> f64 {
    0.01
}

fn default_offset_steps() -> usize {
    41
}

enum Scan {
    FixedRabi(ModelParams),
    Frozen(BalancedParams),
}

fn anticrossing(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: AnticrossingOptions = cfg.options()?;
    if opts.levels.is_empty() || opts.levels.iter().any(|&n| n == 0 || n > cfg.space.interior_cutoff()) {
        return Err(RunError::Config(format!(
            "levels must lie in 1..={}",
            cfg.space.interior_cutoff()
        )));
    }
    if opts.offset_steps < 3 || !(opts.offset_min < opts.offset_max) {
        return Err(RunError::Config("need offset_min < offset_max and offset_steps ≥ 3".into()));
    }
    let scan_name = opts.scan.clone().unwrap_or_else(|| match cfg.params {
        Params::Full(_) => "fixed-rabi".into(),
        Params::Reduced(_) => "frozen".into(),
    });
    let scan = match scan_name.as_str() {
        "fixed-rabi" => Scan::FixedRabi(cfg.params.full("anticrossing (fixed-rabi scan)")?),
        "frozen" => Scan::Frozen(cfg.params.balanced()?),
        other => {
            return Err(RunError::Config(format!(
                "scan must be \"fixed-rabi\" or \"frozen\", got `{other}`"
            )))
        }
    };
    let bp = cfg.params.balanced()?;
    let offsets: Vec<f64> = (0..opts.offset_steps)
        .map(|k| opts.offset_min + (opts.offset_max - opts.offset_min) * k as f64 / (opts.offset_steps - 1) as f64)
        .collect();
    let space = cfg.space;
    let grid: Vec<(usize, f64)> = opts
        .levels
        .iter()
        .flat_map(|&n| offsets.iter().map(move |&o| (n, o)))
        .collect();
    let gaps: Vec<f64> = grid
        .par_iter()
        .map(|&(n, o)| match &scan {
            Scan::FixedRabi(p) => core("eigenstate pairing", gap_at(n, p, o, space)),
            Scan::Frozen(b) => core("eigenstate pairing", balanced_gap_at(n, b, o, space)),
        })
        .collect::<Result<_, _>>()?;

    let mut table = ResultTable::new("gaps", &["n", "offset", "gap"]);
    for (&(n, o), &g) in grid.iter().zip(&gaps) {
        table.push_row(&[n as f64, o, g]);
    }
    let mut minima = ResultTable::new(
        "minima",
        &["n", "argmin", "min_gap", "level_shift", "predicted_crossing"],
    );
    let m = offsets.len();
    for (k, &n) in opts.levels.iter().enumerate() {
        let s = core("gap scan", from_gaps(n, &offsets, gaps[k * m..(k + 1) * m].to_vec()))?;
        let half = core("anticrossing shift", anticrossing_shift(n, &bp))?;
        minima.push_row(&[n as f64, s.argmin, s.min_gap, half, -2.0 * half]);
    }
    Ok(Output {
        tables: vec![table, minima],
        summary: json!({ "scan": scan_name, "lambda": bp.lambda }),
        diagnostic: None,
    })
}

// limits

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsOptions {
    #[serde(default = "default_big_deltas")]
    big_deltas: Vec<f64>,
}

fn default_big_deltas() -> Vec<f64> {
    vec![1e-6, 1.0, 1e6]
}

fn limits(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: LimitsOptions = cfg.options()?;
    if opts.big_deltas.is_empty() || opts.big_deltas.iter().any(|d| !d.is_finite()) {
        return Err(RunError::Config("big_deltas needs finite values".into()));
    }
    // T_Δ depends on Δ and η only
    let (eta, omega_l, rabi) = match cfg.params {
        Params::Full(p) => (p.eta, p.omega_l, if p.omega_r > 0.0 { p.omega_r } else { 1.0 }),
        Params::Reduced(b) => ((4.0 * b.lambda * b.lambda + b.eta_breve * b.eta_breve).sqrt(), 0.0, 1.0),
    };
    let nu = cfg.params.nu();
    let space = cfg.space;
    let rows: Vec<[f64; 4]> = opts
        .big_deltas
        .par_iter()
        .map(|&d| {
            let p = ModelParams::from_detuning(nu, d * rabi, omega_l, rabi, eta).map_err(RunError::from_params)?;
            let t = core("T_Δ", t_delta(&p, space))?;
            let first = core("T₁", t1(&p, space))?;
            let id = Operator::identity(space);
            Ok([
                d,
                (&t - &id).interior_norm(),
                (&t - &first).interior_norm(),
                t.unitarity_defect(),
            ])
        })
        .collect::<Result<_, RunError>>()?;
    let mut table = ResultTable::new(
        "limits",
        &["big_delta", "norm_t_minus_identity", "norm_t_minus_t1", "unitarity_defect"],
    );
    let mut diagnostic = None;
    for r in &rows {
        if diagnostic.is_none() && r[3] > NORM_TOL {
            diagnostic = Some(RunError::numerical(
                "T_Δ unitarity",
                format!("defect {:e} at Δ = {}", r[3], r[0]),
            ));
        }
        table.push_row(r);
    }
    Ok(Output {
        tables: vec![table],
        summary: json!({ "eta": eta }),
        diagnostic,
    })
}

// frame-chain

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameChainOptions {
    #[serde(default = "default_chain_times")]
    times: Vec<f64>,
}

fn default_chain_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn frame_chain(cfg: &RunConfig) -> Result<Output, RunError> {
    let opts: FrameChainOptions = cfg.options()?;
    if opts.times.is_empty() || opts.times.iter().any(|&t| !(t > 0.0)) {
        return Err(RunError::Config("times needs positive values".into()));
    }
    let p = cfg.params.full("frame-chain")?;
    let space = cfg.space;
    let rows: Vec<[f64; 3]> = opts
        .times
        .par_iter()
        .map(|&t| {
            let steps = iontrap_core::oracle::magnus_steps(p.nu, t);
            let chain = core("frame chain", frame_chain_evolutor(&p, t, space))?;
            let magnus = core("Magnus integration", ith_magnus_evolutor(&p, t, steps, space))?;
            let d = core("interior norm", chain.interior_distance(&magnus))?;
            Ok([t, steps as f64, d])
        })
        .collect::<Result<_, RunError>>()?;
    let mut table = ResultTable::new("frame_chain", &["t", "steps", "distance"]);
    let mut diagnostic = None;
    for r in &rows {
        if diagnostic.is_none() && r[2] > FRAME_CHAIN_TOL {
            diagnostic = Some(RunError::numerical(
                "frame-chain agreement",
                format!("‖chain − Magnus‖ = {:e} at t = {}", r[2], r[0]),
            ));
        }
        table.push_row(r);
    }
    Ok(Output {
        tables: vec![table],
        summary: json!({ "max_distance": rows.iter().map(|r| r[2]).fold(0.0, f64::max) }),
        diagnostic,
    })
}
