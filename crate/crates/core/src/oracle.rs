//! Ground truth: exact diagonalization, exact propagation, a Magnus
//! integrator for the lab-frame Hamiltonian, log-log order fits and the
//! avoided-crossing scan.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
// f64 math in no_std builds; redundant when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonians::{bh_closed_form, BalancedParams, ModelParams};
use crate::operator::{expm, propagator, BasisIndex, Operator, SpaceConfig, Spin, C64};

/// Ascending eigenvalues and the unitary whose columns are the eigenvectors.
///
/// The input is symmetrized first; a hermiticity defect above
/// `1e−10·max(1, ‖H‖)` is rejected.
pub fn exact_eigs(h: &Operator) -> Result<(Vec<f64>, Operator)> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.op_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let sym = h.hermitian_part();
    let eig = sym.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let d = h.dim();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, Operator::from_matrix(h.space(), vectors)?))
}

/// `exp(−iHt)` by scaling and squaring.
pub fn exact_propagator(h: &Operator, t: f64) -> Result<Operator> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.op_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    propagator(h, t)
}

/// `V e^{−iEt} V†` from the eigendecomposition.
pub fn spectral_propagator(h: &Operator, t: f64) -> Result<Operator> {
    let (values, v) = exact_eigs(h)?;
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    ));
    let m = v.matrix() * phases * v.matrix().adjoint();
    Operator::from_matrix(h.space(), m)
}

/// Steps per unit `νt` of the lab-frame Magnus integrator.
pub const MAGNUS_STEPS_PER_UNIT: usize = 200;

/// Magnus propagator of `i dU/dt = H(t)U` from `t0` to `t1` in `steps`
/// uniform steps, keeping the first two Magnus terms per step
/// (`Ω₁ + Ω₂`, two-point Gauss-Legendre nodes).
pub fn magnus2(h: impl Fn(f64) -> Operator, t0: f64, t1: f64, steps: usize) -> Result<Operator> {
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one step is required".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let offset = 0.5 - Float::sqrt(3.0_f64) / 6.0;
    let c2 = Float::sqrt(3.0_f64) / 12.0 * dt * dt;
    let mut u: Option<Operator> = None;
    for k in 0..steps {
        let start = t0 + k as f64 * dt;
        let h1 = h(start + offset * dt);
        let h2 = h(start + (1.0 - offset) * dt);
        // Ω = −i·dt/2·(H₁ + H₂) − (√3/12)·dt²·[H₂, H₁]
        let omega = (&h1 + &h2).scale(C64::new(0.0, -0.5 * dt)) - h2.commutator(&h1)?.scale_re(c2);
        let step = expm(&omega)?;
        u = Some(match u {
            None => step,
            Some(prev) => &step * &prev,
        });
    }
    Ok(u.expect("steps > 0"))
}

/// Number of Magnus steps for a span `t` at trap frequency `nu`.
pub fn magnus_steps(nu: f64, t: f64) -> usize {
    ((MAGNUS_STEPS_PER_UNIT as f64 * nu * t.abs()).ceil() as usize).max(1)
}

/// Log-log least-squares fit of residuals against the perturbative parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceFit {
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ConvergenceFit {
    pub const MIN_R_SQUARED: f64 = 0.95;

    pub fn is_conclusive(&self) -> bool {
        self.r_squared >= Self::MIN_R_SQUARED
    }
}

/// Fits `log r = slope·log λ + intercept`.
pub fn fit_log_log(lambdas: &[f64], residuals: &[f64]) -> Result<ConvergenceFit> {
    if lambdas.len() != residuals.len() {
        return Err(Error::InvalidFit(format!(
            "{} grid points but {} residuals",
            lambdas.len(),
            residuals.len()
        )));
    }
    if lambdas.len() < 4 {
        return Err(Error::InvalidFit("at least 4 grid points are required".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidFit(format!("grid point {l} is not positive")));
    }
    if let Some(r) = residuals.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidFit(format!(
            "residual {r} is not positive; shrink the tolerance or the grid"
        )));
    }
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("grid points must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    // a flat residual carries no order information
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Ok(ConvergenceFit {
        lambdas: lambdas.to_vec(),
        residuals: residuals.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// Evaluates `residual` on `grid` and fits the order.
pub fn fit_order(mut residual: impl FnMut(f64) -> Result<f64>, grid: &[f64]) -> Result<ConvergenceFit> {
    let residuals = grid.iter().map(|&l| residual(l)).collect::<Result<Vec<_>>>()?;
    fit_log_log(grid, &residuals)
}

/// Exact gaps of the `n`-th avoided pair over a detuning sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GapScan {
    pub n: usize,
    /// Grid of `δ̆ − ν`.
    pub detuning_offsets: Vec<f64>,
    /// `E_{n,+} − E_{n,−}`.
    pub gaps: Vec<f64>,
    /// Location of the minimum gap after parabolic refinement.
    pub argmin: f64,
    /// Refined minimum gap.
    pub min_gap: f64,
}

/// Overlap below which the pairing of exact eigenstates is rejected.
pub const PAIRING_THRESHOLD: f64 = 0.8;

/// Model parameters with `δ̆ = ν + offset`, obtained by changing `δ` at fixed
/// `Ω_R` (keeping the sign of the base detuning).
pub fn detuned(p_base: &ModelParams, offset: f64) -> Result<ModelParams> {
    let target = p_base.nu + offset;
    let rabi2 = 4.0 * p_base.omega_r * p_base.omega_r;
    let d2 = target * target - rabi2;
    if target <= 0.0 || d2 < 0.0 {
        return Err(Error::InvalidParams(format!(
            "δ̆ = {target} is unreachable with Ω_R = {}",
            p_base.omega_r
        )));
    }
    let sign = if p_base.delta() < 0.0 { -1.0 } else { 1.0 };
    ModelParams::from_detuning(p_base.nu, sign * d2.sqrt(), p_base.omega_l, p_base.omega_r, p_base.eta)
}

/// Exact pair `(E_−, E_+)` of `h` living mostly on `span{|n−1,e⟩, |n,g⟩}`.
pub fn avoided_pair(h: &Operator, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("the n = 0 level has no partner".into()));
    }
    let (values, v) = exact_eigs(h)?;
    let a = BasisIndex::new(n - 1, Spin::Excited).flat();
    let b = BasisIndex::new(n, Spin::Ground).flat();
    let m = v.matrix();
    let mut weights: Vec<(f64, usize)> = (0..values.len())
        .map(|k| (m[(a, k)].norm_sqr() + m[(b, k)].norm_sqr(), k))
        .collect();
    weights.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (w1, k1) = weights[0];
    let (w2, k2) = weights[1];
    let worst = w1.min(w2);
    if worst < PAIRING_THRESHOLD {
        return Err(Error::OverlapAmbiguity {
            overlap: worst,
            threshold: PAIRING_THRESHOLD,
        });
    }
    let (lo, hi) = (values[k1].min(values[k2]), values[k1].max(values[k2]));
    Ok((lo, hi))
}

/// Exact gap of the `n`-th pair at one detuning offset.
pub fn gap_at(n: usize, p_base: &ModelParams, offset: f64, space: SpaceConfig) -> Result<f64> {
    let p = detuned(p_base, offset)?;
    let h = bh_closed_form(&p.balanced()?, space);
    let (lo, hi) = avoided_pair(&h, n)?;
    Ok(hi - lo)
}

/// Vertex of the parabola through three points.
pub fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if curv <= 0.0 {
        // not convex: fall back to the middle sample
        return (x[1], y[1]);
    }
    // p(x) = y0 + d1 (x − x0) + curv (x − x0)(x − x1)
    let xv = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curv);
    let yv = y[0] + d1 * (xv - x[0]) + curv * (xv - x[0]) * (xv - x[1]);
    (xv, yv)
}

/// Refines the minimum of sampled `gaps` over an ascending grid.
pub fn refine_minimum(offsets: &[f64], gaps: &[f64]) -> Result<(f64, f64)> {
    if offsets.len() < 3 || offsets.len() != gaps.len() {
        return Err(Error::InvalidArgument("need at least 3 matching samples".into()));
    }
    if offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("offsets must be strictly ascending".into()));
    }
    let k = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("nonempty");
    let c = k.clamp(1, offsets.len() - 2);
    Ok(parabola_vertex(
        [offsets[c - 1], offsets[c], offsets[c + 1]],
        [gaps[c - 1], gaps[c], gaps[c + 1]],
    ))
}

/// Scans the exact `n`-th gap of `H̆` over `δ̆ − ν ∈ offsets`.
pub fn scan_gap(n: usize, p_base: &ModelParams, offsets: &[f64], space: SpaceConfig) -> Result<GapScan> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let gaps = offsets
        .iter()
        .map(|&o| gap_at(n, p_base, o, space))
        .collect::<Result<Vec<_>>>()?;
    from_gaps(n, offsets, gaps)
}

/// Exact gap of the `n`-th pair of `H̆` with `δ̆ = ν + offset` and `λ`, `η̆`
/// held fixed.
pub fn balanced_gap_at(n: usize, bp: &BalancedParams, offset: f64, space: SpaceConfig) -> Result<f64> {
    let p = BalancedParams::new(bp.nu, bp.nu + offset, bp.eta_breve, bp.lambda)?;
    let (lo, hi) = avoided_pair(&bh_closed_form(&p, space), n)?;
    Ok(hi - lo)
}

/// Like [`scan_gap`], but moves `δ̆` alone with `λ` and `η̆` frozen.
pub fn scan_gap_balanced(n: usize, bp: &BalancedParams, offsets: &[f64], space: SpaceConfig) -> Result<GapScan> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let gaps = offsets
        .iter()
        .map(|&o| balanced_gap_at(n, bp, o, space))
        .collect::<Result<Vec<_>>>()?;
    from_gaps(n, offsets, gaps)
}

/// Assembles a [`GapScan`] from precomputed gaps (e.g. a parallel sweep).
pub fn from_gaps(n: usize, offsets: &[f64], gaps: Vec<f64>) -> Result<GapScan> {
    let (argmin, min_gap) = refine_minimum(offsets, &gaps)?;
    Ok(GapScan {
        n,
        detuning_offsets: offsets.to_vec(),
        gaps,
        argmin,
        min_gap,
    })
}

/// Lab-frame evolutor through the frame chain, `R_t† T_Δ† e^{−iH̆t} T_Δ`.
pub fn frame_chain_evolutor(p: &ModelParams, t: f64, space: SpaceConfig) -> Result<Operator> {
    use crate::hamiltonians::{rotating_frame, t_delta};
    let td = t_delta(p, space)?;
    let h = bh_closed_form(&p.balanced()?, space);
    let inner = exact_propagator(&h, t)?;
    Ok(rotating_frame(t, p.omega_l, space).adjoint() * td.adjoint() * inner * td)
}

/// Lab-frame evolutor by direct Magnus integration of `H(t)`.
pub fn ith_magnus_evolutor(p: &ModelParams, t: f64, steps: usize, space: SpaceConfig) -> Result<Operator> {
    let trap = crate::hamiltonians::IonTrap::new(p, space)?;
    magnus2(|s| trap.at(s), 0.0, t, steps)
}

/// `exp(A)` re-exported for callers that only pull in the oracle.
pub fn exponential(a: &Operator) -> Result<Operator> {
    expm(a)
}
