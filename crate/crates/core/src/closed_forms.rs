//! Printed closed forms for the balanced Hamiltonian: low-order constants of
//! motion and generators per regime, the JC and RWA evolutors, the first-order
//! evolutor, the `Y̆₁` relation and the second-order spectrum.
//!
//! Unless stated otherwise operators carry their powers of `λ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// f64 math in no_std builds; redundant when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonians::{bh_interaction_term, bh_unperturbed, spin_blocks, BalancedParams, JCParams};
use crate::operator::{annihilation, expm, number, pauli, propagator, re, Operator, Pauli, SpaceConfig, C64, I};
use crate::perturbation::{chi, gamma, solve, InteractionSeries, SpectralDecomposition, DEFAULT_DEG_TOL_REL};

/// Default width of the near-resonant window, `|ν − δ̆| ≤ ρν`.
pub const DEFAULT_RHO: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    /// `η̆ ≪ λ`
    EtaMuchLess,
    /// `η̆ ∼ λ`
    EtaComparable,
    /// `η̆ ≫ λ`
    EtaMuchGreater,
    /// `|ν − δ̆| ≪ ν`
    NearResonant,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] = [
        RegimeKind::EtaMuchLess,
        RegimeKind::EtaComparable,
        RegimeKind::EtaMuchGreater,
        RegimeKind::NearResonant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::EtaMuchLess => "eta_much_less",
            RegimeKind::EtaComparable => "eta_comparable",
            RegimeKind::EtaMuchGreater => "eta_much_greater",
            RegimeKind::NearResonant => "near_resonant",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the `λη̆` term enters at second order.
    pub fn keeps_eta_breve(self) -> bool {
        !matches!(self, RegimeKind::EtaMuchLess)
    }
}

/// Perturbative regime, chosen by the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regime {
    pub kind: RegimeKind,
    /// `ν = δ̆` within the degeneracy tolerance.
    pub resonant: bool,
    pub rho: f64,
}

impl Regime {
    pub fn new(kind: RegimeKind, bp: &BalancedParams) -> Result<Self> {
        Self::with_rho(kind, bp, DEFAULT_RHO)
    }

    pub fn with_rho(kind: RegimeKind, bp: &BalancedParams, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument("rho must be positive".into()));
        }
        let offset = (bp.nu - bp.delta_breve).abs();
        if kind == RegimeKind::NearResonant && offset > rho * bp.nu {
            return Err(Error::RegimeMismatch(format!(
                "|ν − δ̆| = {offset} exceeds {rho}·ν"
            )));
        }
        Ok(Self {
            kind,
            resonant: offset <= DEFAULT_DEG_TOL_REL * bp.nu,
            rho,
        })
    }
}

/// `C₁, Z₁, C₂`.
#[derive(Clone, Debug)]
pub struct LowOrders {
    pub c1: Operator,
    pub z1: Operator,
    pub c2: Operator,
}

fn eps(bp: &BalancedParams) -> f64 {
    DEFAULT_DEG_TOL_REL * bp.nu
}

struct Ladders {
    a_sp: Operator,
    ad_sm: Operator,
    a_sm: Operator,
    ad_sp: Operator,
}

fn ladders(space: SpaceConfig) -> Ladders {
    let a = annihilation(space);
    let ad = a.adjoint();
    let sp = pauli(Pauli::Plus, space);
    let sm = pauli(Pauli::Minus, space);
    Ladders {
        a_sp: &a * &sp,
        ad_sm: &ad * &sm,
        a_sm: &a * &sm,
        ad_sp: &ad * &sp,
    }
}

/// `(n̂ + ½)σ_z + s/2`.
fn shifted_sz(space: SpaceConfig, s: f64) -> Operator {
    let id = Operator::identity(space);
    (number(space) + id.scale_re(0.5)) * pauli(Pauli::Z, space) + id.scale_re(0.5 * s)
}

/// `iλν(aσ₊ − a†σ₋)`.
pub fn jc_breve_generator(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let l = ladders(space);
    (l.a_sp - l.ad_sm).scale(I * (bp.lambda * bp.nu))
}

/// The printed `C̆₁, Z̆₁, C̆₂` of the requested regime.
pub fn bh_first_second_order(bp: &BalancedParams, regime: &Regime, space: SpaceConfig) -> Result<LowOrders> {
    let regime = Regime::with_rho(regime.kind, bp, regime.rho)?;
    let (nu, db, lam) = (bp.nu, bp.delta_breve, bp.lambda);
    let l = ladders(space);
    if regime.kind == RegimeKind::NearResonant {
        let c1 = pauli(Pauli::Z, space).scale_re(0.5 * (db - nu)) + jc_breve_generator(bp, space);
        let z1 = (&l.a_sm + &l.ad_sp).scale_re(-0.5 * lam);
        let c2 = shifted_sz(space, -1.0).scale_re(0.5 * lam * lam * nu);
        return Ok(LowOrders { c1, z1, c2 });
    }
    let e = eps(bp);
    let c1 = jc_breve_generator(bp, space).scale_re(chi(nu - db, e));
    let z1 = (&l.a_sp + &l.ad_sm).scale_re(-lam * nu * gamma(nu - db, e))
        + (&l.a_sm + &l.ad_sp).scale_re(-lam * nu / (nu + db));
    let mut c2 = shifted_sz(space, -1.0).scale_re(lam * lam * nu * nu / (nu + db))
        - shifted_sz(space, 1.0).scale_re(lam * lam * nu * nu * gamma(nu - db, e));
    if regime.kind.keeps_eta_breve() {
        let a = annihilation(space);
        let a2 = &a * &a;
        let extra = &a2 * &pauli(Pauli::Plus, space) + a2.adjoint() * pauli(Pauli::Minus, space);
        c2 -= &extra.scale_re(lam * bp.eta_breve * nu * chi(2.0 * nu - db, e));
    }
    Ok(LowOrders { c1, z1, c2 })
}

/// Input to the generic engine for one regime: `H₀` and the series in `λ`
/// with the explicit powers of `λ` stripped (ratio `η̆/λ` held fixed).
#[derive(Clone, Debug)]
pub struct EngineProblem {
    pub h0: Operator,
    pub series: InteractionSeries,
    pub lambda: f64,
}

/// `H̆₀` for the generic regimes, `H̆₀' = ν(n̂ + ½σ_z) + λ²ν` near resonance.
pub fn regime_unperturbed(bp: &BalancedParams, kind: RegimeKind, space: SpaceConfig) -> Operator {
    match kind {
        RegimeKind::NearResonant => bh_unperturbed(&BalancedParams { delta_breve: bp.nu, ..*bp }, space),
        _ => bh_unperturbed(bp, space),
    }
}

pub fn engine_problem(bp: &BalancedParams, regime: &Regime, space: SpaceConfig) -> Result<EngineProblem> {
    let regime = Regime::with_rho(regime.kind, bp, regime.rho)?;
    if bp.lambda == 0.0 {
        return Err(Error::InvalidParams("the engine needs λ ≠ 0".into()));
    }
    let unit = BalancedParams { lambda: 1.0, ..*bp };
    let h0 = regime_unperturbed(bp, regime.kind, space);
    let mut h1 = bh_interaction_term(0, &unit, space);
    if regime.kind == RegimeKind::NearResonant {
        h1 += &pauli(Pauli::Z, space).scale_re(0.5 * (bp.delta_breve - bp.nu) / bp.lambda);
    }
    let mut terms = vec![h1];
    if regime.kind.keeps_eta_breve() {
        let ratio = BalancedParams {
            eta_breve: bp.eta_breve / bp.lambda,
            ..unit
        };
        terms.push(bh_interaction_term(1, &ratio, space));
    }
    Ok(EngineProblem {
        h0,
        series: InteractionSeries::new(terms)?,
        lambda: bp.lambda,
    })
}

/// `C₁, Z₁, C₂` from the engine, rescaled by `λ`, `λ`, `λ²`.
pub fn engine_first_second_order(bp: &BalancedParams, regime: &Regime, space: SpaceConfig) -> Result<LowOrders> {
    let prob = engine_problem(bp, regime, space)?;
    let spec = SpectralDecomposition::new(&prob.h0, eps(bp))?;
    let sol = solve(&spec, &prob.series, 2)?;
    let l = prob.lambda;
    Ok(LowOrders {
        c1: sol.c(1).scale_re(l),
        z1: sol.z(1).scale_re(l),
        c2: sol.c(2).scale_re(l * l),
    })
}

/// `sin(x√n)/√n`, equal to `x` at `n = 0`.
pub fn sin_over_sqrt(x: f64, n: f64) -> f64 {
    if n == 0.0 {
        x
    } else {
        (x * n.sqrt()).sin() / n.sqrt()
    }
}

fn fock(space: SpaceConfig, f: impl Fn(f64) -> C64) -> Operator {
    Operator::fock_function(space, |n| f(n as f64))
}

/// `n + 1`, except `0` at the top level where the partner state is cut away;
/// keeps the closed forms exactly unitary on the truncated space.
fn raised(space: SpaceConfig, n: f64) -> f64 {
    if n as usize >= space.n_max() {
        0.0
    } else {
        n + 1.0
    }
}

fn require_resonant(nu: f64, omega: f64, what: &'static str) -> Result<()> {
    if (nu - omega).abs() > DEFAULT_DEG_TOL_REL * nu {
        return Err(Error::NotResonant(what));
    }
    Ok(())
}

/// `JC(t) = exp(−i𝒮t)` at resonance `ν = ω`.
pub fn jc_evolutor(t: f64, p: &JCParams, space: SpaceConfig) -> Result<Operator> {
    require_resonant(p.nu, p.omega, "the JC closed form needs ν = ω")?;
    let x = p.lambda * p.nu * t;
    let a = annihilation(space);
    let ee = fock(space, |n| re((x * raised(space, n).sqrt()).cos()));
    let gg = fock(space, |n| re((x * n.sqrt()).cos()));
    let eg = fock(space, |n| C64::new(0.0, -sin_over_sqrt(x, n + 1.0))) * &a;
    let ge = fock(space, |n| C64::new(0.0, -sin_over_sqrt(x, n))) * a.adjoint();
    Ok(spin_blocks(&ee, &eg, &ge, &gg))
}

/// `JC̆(t) = exp(−iC̆₁t)` at resonance `ν = δ̆`.
pub fn jc_evolutor_breve(t: f64, bp: &BalancedParams, space: SpaceConfig) -> Result<Operator> {
    require_resonant(bp.nu, bp.delta_breve, "the JC̆ closed form needs ν = δ̆")?;
    let x = bp.lambda * bp.nu * t;
    let a = annihilation(space);
    let ee = fock(space, |n| re((x * raised(space, n).sqrt()).cos()));
    let gg = fock(space, |n| re((x * n.sqrt()).cos()));
    let eg = fock(space, |n| re(sin_over_sqrt(x, n + 1.0))) * &a;
    let ge = fock(space, |n| re(-sin_over_sqrt(x, n))) * a.adjoint();
    Ok(spin_blocks(&ee, &eg, &ge, &gg))
}

/// `ℜ(t) = e^{−iH̆₀t} JC̆(t)`.
pub fn rwa_evolutor(t: f64, bp: &BalancedParams, space: SpaceConfig) -> Result<Operator> {
    let jc = jc_evolutor_breve(t, bp, space)?;
    Ok(propagator(&bh_unperturbed(bp, space), t)? * jc)
}

/// `𝔈₁(t) = e^{−iZ̆₁} e^{−iH̆₀t} e^{−iC̆₁t} e^{iZ̆₁}`, with `H̆₀'` in place of
/// `H̆₀` near resonance.
pub fn first_order_evolutor(t: f64, bp: &BalancedParams, regime: &Regime, space: SpaceConfig) -> Result<Operator> {
    let regime = Regime::with_rho(regime.kind, bp, regime.rho)?;
    if !(regime.resonant || regime.kind == RegimeKind::NearResonant) {
        return Err(Error::RegimeMismatch(
            "the first-order evolutor needs a resonant or near-resonant regime".into(),
        ));
    }
    let orders = bh_first_second_order(bp, &regime, space)?;
    let h0 = regime_unperturbed(bp, regime.kind, space);
    let ez = expm(&orders.z1.scale(I))?;
    Ok(ez.adjoint() * propagator(&h0, t)? * propagator(&orders.c1, t)? * ez)
}

/// Closed form of `exp(iZ̆₁)` with `Z̆₁ = −½λ(aσ₋ + a†σ₊)`.
pub fn exp_z1(bp: &BalancedParams, space: SpaceConfig) -> Result<Operator> {
    require_resonant(bp.nu, bp.delta_breve, "exp(iZ̆₁) closed form needs ν = δ̆")?;
    let y = 0.5 * bp.lambda;
    let a = annihilation(space);
    let ee = fock(space, |n| re((y * n.sqrt()).cos()));
    let gg = fock(space, |n| re((y * raised(space, n).sqrt()).cos()));
    let eg = fock(space, |n| C64::new(0.0, -sin_over_sqrt(y, n))) * a.adjoint();
    let ge = fock(space, |n| C64::new(0.0, -sin_over_sqrt(y, n + 1.0))) * &a;
    Ok(spin_blocks(&ee, &eg, &ge, &gg))
}

/// `α_λ(n) = cos²(½λ√n)`.
pub fn alpha(lambda: f64, n: f64) -> f64 {
    let c = (0.5 * lambda * n.sqrt()).cos();
    c * c
}

/// `β_λ(n) = sin²(½λ√n)`.
pub fn beta(lambda: f64, n: f64) -> f64 {
    let s = (0.5 * lambda * n.sqrt()).sin();
    s * s
}

/// `κ_λ(n) = −i cos(½λ√n) sin(½λ√n)/√n`, equal to `−iλ/2` at `n = 0`.
pub fn kappa(lambda: f64, n: f64) -> C64 {
    let y = 0.5 * lambda;
    C64::new(0.0, -(y * n.sqrt()).cos() * sin_over_sqrt(y, n))
}

/// `e^{−iZ̆₁} e^{−iH̆₀t} e^{iZ̆₁}` from the `α/β/κ` block matrix, times the
/// scalar phase `e^{−iλ²νt}` carried by `H̆₀`.
pub fn sandwich(t: f64, bp: &BalancedParams, space: SpaceConfig) -> Result<Operator> {
    require_resonant(bp.nu, bp.delta_breve, "the sandwich closed form needs ν = δ̆")?;
    let (nu, l) = (bp.nu, bp.lambda);
    let a = annihilation(space);
    let up = C64::from_polar(1.0, 2.0 * nu * t);
    let down = up.conj();
    let phase_e = |n: f64| C64::from_polar(1.0, -nu * (n + 0.5) * t);
    let phase_g = |n: f64| C64::from_polar(1.0, -nu * (n - 0.5) * t);
    let ee = fock(space, |n| (alpha(l, n) + up * beta(l, n)) * phase_e(n));
    let eg = fock(space, |n| kappa(l, n) * (1.0 - up) * phase_e(n)) * a.adjoint();
    let ge = fock(space, |n| kappa(l, n + 1.0) * (1.0 - down) * phase_g(n)) * &a;
    let gg = fock(space, |n| (alpha(l, n + 1.0) + down * beta(l, n + 1.0)) * phase_g(n));
    let scalar = C64::from_polar(1.0, -bp.scalar_shift() * t);
    Ok(spin_blocks(&ee, &eg, &ge, &gg).scale(scalar))
}

/// `∫₀ᵗ Y̆₁(τ)dτ = Z̆₁(0) − Z̆₁(−t)`, with
/// `Y̆₁(τ) = iλν(aσ₋e^{i2ντ} − a†σ₊e^{−i2ντ})`.
pub fn y1_integral(t: f64, bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let nu = bp.nu;
    let w = 2.0 * nu;
    // ∫₀ᵗ e^{iwτ}dτ
    let int_up = if w * t == 0.0 {
        re(t)
    } else {
        (C64::from_polar(1.0, w * t) - 1.0) / C64::new(0.0, w)
    };
    let l = ladders(space);
    let coeff = I * (bp.lambda * nu);
    l.a_sm.scale(coeff * int_up) - l.ad_sp.scale(coeff * int_up.conj())
}

/// `exp(−i∫₀ᵗ Y̆₁) ℜ(t)`.
pub fn y1_relation(t: f64, bp: &BalancedParams, space: SpaceConfig) -> Result<Operator> {
    let rwa = rwa_evolutor(t, bp, space)?;
    let gen = y1_integral(t, bp, space);
    Ok(expm(&gen.scale(-I))? * rwa)
}

/// Second-order levels of `H̆` near resonance.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderSpectrum {
    pub e0: f64,
    /// `(n, E_{n,−}, E_{n,+})` for `n = 1..`.
    pub levels: Vec<(usize, f64, f64)>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl SecondOrderSpectrum {
    /// All levels in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = vec![self.e0];
        for &(_, lo, hi) in &self.levels {
            v.push(lo);
            v.push(hi);
        }
        v.sort_by(f64::total_cmp);
        v
    }
}

fn require_near_resonant(bp: &BalancedParams) -> Result<()> {
    Regime::new(RegimeKind::NearResonant, bp).map(|_| ())
}

/// `𝔄_n`, `𝔅_n`, `E₀` and `E_{n,±} = 𝔄_n ± √(𝔅_n² + λ²ν²n)` for `n ≤ n_levels`.
///
/// `E₀ = −½δ̆ + s − ½λ²ν` and `𝔄_n = ν(n − ½) + s − ½λ²ν`, with `s` the scalar
/// of `H̆₀` ([`BalancedParams::scalar_shift`]).
pub fn spectrum_second_order(bp: &BalancedParams, n_levels: usize) -> Result<SecondOrderSpectrum> {
    require_near_resonant(bp)?;
    let (nu, db, lam) = (bp.nu, bp.delta_breve, bp.lambda);
    let shift = bp.scalar_shift();
    // the literature value −½ν is the resonant case of −½δ̆
    let e0 = -0.5 * db + shift - 0.5 * lam * lam * nu;
    let mut levels = Vec::with_capacity(n_levels);
    let mut a = Vec::with_capacity(n_levels);
    let mut b = Vec::with_capacity(n_levels);
    for n in 1..=n_levels {
        let nf = n as f64;
        let an = nu * (nf - 0.5) + shift - 0.5 * lam * lam * nu;
        let bn = 0.5 * (db - nu) + 0.5 * lam * lam * nu * nf;
        let r = (bn * bn + lam * lam * nu * nu * nf).sqrt();
        levels.push((n, an - r, an + r));
        a.push(an);
        b.push(bn);
    }
    Ok(SecondOrderSpectrum { e0, levels, a, b })
}

/// The levels with the `λ²` terms dropped.
pub fn spectrum_first_order(bp: &BalancedParams, n_levels: usize) -> Result<SecondOrderSpectrum> {
    require_near_resonant(bp)?;
    let (nu, db, lam) = (bp.nu, bp.delta_breve, bp.lambda);
    let shift = bp.scalar_shift();
    let mut levels = Vec::with_capacity(n_levels);
    let mut a = Vec::with_capacity(n_levels);
    let mut b = Vec::with_capacity(n_levels);
    for n in 1..=n_levels {
        let nf = n as f64;
        let an = nu * (nf - 0.5) + shift;
        let bn = 0.5 * (db - nu);
        let r = (bn * bn + lam * lam * nu * nu * nf).sqrt();
        levels.push((n, an - r, an + r));
        a.push(an);
        b.push(bn);
    }
    Ok(SecondOrderSpectrum {
        e0: -0.5 * db + shift,
        levels,
        a,
        b,
    })
}

/// RWA Hamiltonian `H̆₀ + iλν(aσ₊ − a†σ₋)`.
pub fn rwa_hamiltonian(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    bh_unperturbed(bp, space) + jc_breve_generator(bp, space)
}

/// `P₁→₂(t) = |𝔠|²/(𝔟² + |𝔠|²) sin²(√(𝔟² + |𝔠|²) t)`.
pub fn transition_probability(t: f64, b: f64, c: C64) -> f64 {
    let c2 = c.norm_sqr();
    let w2 = b * b + c2;
    if w2 == 0.0 {
        return 0.0;
    }
    let s = (w2.sqrt() * t).sin();
    c2 / w2 * s * s
}

/// `½λ²νn`.
pub fn anticrossing_shift(n: usize, bp: &BalancedParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n = 0 has no two-dimensional block".into()));
    }
    Ok(0.5 * bp.lambda * bp.lambda * bp.nu * n as f64)
}
