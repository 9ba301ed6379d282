//! Hamiltonians and frame transformations of the trapped-ion problem.
//!
//! Chain of frames: the ion-trap Hamiltonian `H(t)` (lab frame) becomes the
//! rotating-frame Hamiltonian `H̃` under `R_t = exp(i½ω_L t σ_z)`, and the
//! balanced Hamiltonian `H̆ = T_Δ H̃ T_Δ†`, whose coupling `λ` stays bounded
//! in the Rabi frequency. A further conjugation by `T = exp(iπ/2 n̂σ_x)`
//! gives `Ȟ`, which splits over the `g`/`e` sectors at leading order.
//!
//! Spin block matrices below are written in the `(e, g)` order, with
//! Fock-space operators as entries.
//!
//! `H̆₀` is degenerate when an integer multiple of `ν` matches `δ̆`
//! (`m ν = δ̆`); the same condition also appears written as `ν = m δ̆`.
//! Nothing here depends on which reading is used: the perturbation engine
//! finds degeneracies from the computed spectrum.

use alloc::format;

// f64 math in no_std builds; redundant when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::operator::{
    annihilation, displacement, expm, number, pauli, re, Operator, Pauli, SpaceConfig, Spin, C64,
    I, ONE,
};

/// Physical inputs of the laser-driven ion (angular frequencies, `ħ = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Trap frequency ν.
    pub nu: f64,
    /// Internal transition frequency ω_ge.
    pub omega_ge: f64,
    /// Laser frequency ω_L.
    pub omega_l: f64,
    /// Rabi frequency Ω_R.
    pub omega_r: f64,
    /// Lamb-Dicke factor η.
    pub eta: f64,
}

impl ModelParams {
    pub fn new(nu: f64, omega_ge: f64, omega_l: f64, omega_r: f64, eta: f64) -> Result<Self> {
        let p = Self {
            nu,
            omega_ge,
            omega_l,
            omega_r,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters given through the detuning; the laser frequency only fixes
    /// the lab frame.
    pub fn from_detuning(nu: f64, delta: f64, omega_l: f64, omega_r: f64, eta: f64) -> Result<Self> {
        Self::new(nu, delta + omega_l, omega_l, omega_r, eta)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.nu, self.omega_ge, self.omega_l, self.omega_r, self.eta];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite parameter in {self:?}")));
        }
        if self.nu <= 0.0 {
            return Err(Error::InvalidParams(format!("nu must be positive, got {}", self.nu)));
        }
        if self.omega_r < 0.0 {
            return Err(Error::InvalidParams(format!(
                "Rabi frequency must be non-negative, got {}",
                self.omega_r
            )));
        }
        Ok(())
    }

    /// Ion-laser detuning `δ = ω_ge − ω_L`.
    pub fn delta(&self) -> f64 {
        self.omega_ge - self.omega_l
    }

    /// `Δ = δ/Ω_R`.
    pub fn big_delta(&self) -> Result<f64> {
        if self.omega_r == 0.0 {
            return Err(Error::ZeroRabi);
        }
        Ok(self.delta() / self.omega_r)
    }

    /// Balanced detuning `δ̆ = √(4Ω_R² + δ²)`.
    pub fn delta_breve(&self) -> f64 {
        (4.0 * self.omega_r * self.omega_r + self.delta() * self.delta()).sqrt()
    }

    fn require_positive_breve(&self) -> Result<f64> {
        let db = self.delta_breve();
        if db > 0.0 {
            Ok(db)
        } else {
            Err(Error::InvalidParams(
                "balanced detuning vanishes (Ω_R = δ = 0)".into(),
            ))
        }
    }

    /// `η̆ = Δη/√(4+Δ²) = δη/δ̆`.
    pub fn eta_breve(&self) -> Result<f64> {
        Ok(self.delta() * self.eta / self.require_positive_breve()?)
    }

    /// `λ = η/√(4+Δ²) = Ω_R η/δ̆`.
    pub fn lambda(&self) -> Result<f64> {
        Ok(self.omega_r * self.eta / self.require_positive_breve()?)
    }

    /// Spin-rotation angle `θ ∈ [−π/2, π/2]`, `tan θ = Δ/2`.
    pub fn theta(&self) -> Result<f64> {
        Ok((self.big_delta()? / 2.0).atan())
    }

    /// The reduced parameter set of the balanced Hamiltonian.
    pub fn balanced(&self) -> Result<BalancedParams> {
        Ok(BalancedParams {
            nu: self.nu,
            delta_breve: self.require_positive_breve()?,
            eta_breve: self.eta_breve()?,
            lambda: self.lambda()?,
        })
    }
}

/// Reduced parameters `(ν, δ̆, η̆, λ)`; enough to write `H̆` and everything
/// derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalancedParams {
    pub nu: f64,
    pub delta_breve: f64,
    pub eta_breve: f64,
    pub lambda: f64,
}

impl BalancedParams {
    pub fn new(nu: f64, delta_breve: f64, eta_breve: f64, lambda: f64) -> Result<Self> {
        let all = [nu, delta_breve, eta_breve, lambda];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("non-finite balanced parameter".into()));
        }
        if nu <= 0.0 || delta_breve <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "nu and delta_breve must be positive (got {nu}, {delta_breve})"
            )));
        }
        Ok(Self {
            nu,
            delta_breve,
            eta_breve,
            lambda,
        })
    }

    /// `η̆/λ`, which equals `Δ` for physical parameters.
    pub fn eta_ratio(&self) -> Result<f64> {
        if self.lambda == 0.0 {
            return Err(Error::InvalidParams("λ = 0: the ratio η̆/λ is undefined".into()));
        }
        Ok(self.eta_breve / self.lambda)
    }

    /// Same `ν`, `δ̆` and `η̆/λ` with a new coupling. This is the one-parameter
    /// family obtained by varying `η` at fixed laser settings.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let ratio = self.eta_ratio()?;
        Self::new(self.nu, self.delta_breve, ratio * lambda, lambda)
    }

    /// Same coupling with `η̆ = 0`.
    pub fn without_eta_breve(&self) -> Self {
        Self {
            eta_breve: 0.0,
            ..*self
        }
    }

    /// The scalar `λ²ν` carried by `H̆₀`, so that `H̆ = T_Δ H̃ T_Δ†` holds
    /// exactly.
    pub fn scalar_shift(&self) -> f64 {
        self.lambda * self.lambda * self.nu
    }

    /// The scalar `λη̆ν` as printed in the literature form of `H̆₀`; it differs
    /// from [`Self::scalar_shift`] by `λ(λ − η̆)ν`.
    pub fn printed_scalar_shift(&self) -> f64 {
        self.lambda * self.eta_breve * self.nu
    }
}

/// Jaynes-Cummings parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JCParams {
    pub nu: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl JCParams {
    pub fn is_resonant(&self, tol: f64) -> bool {
        (self.nu - self.omega).abs() <= tol
    }
}

/// Spin-block operator `[[ee, eg], [ge, gg]]` from Fock-space entries.
pub fn spin_blocks(ee: &Operator, eg: &Operator, ge: &Operator, gg: &Operator) -> Operator {
    let space = ee.space();
    ee * &Operator::spin_projector(space, Spin::Excited)
        + eg * &pauli(Pauli::Plus, space)
        + ge * &pauli(Pauli::Minus, space)
        + gg * &Operator::spin_projector(space, Spin::Ground)
}

/// `D(iβ) = exp(iβ(a + a†))`.
pub fn displacement_imag(beta: f64, space: SpaceConfig) -> Operator {
    displacement(C64::new(0.0, beta), space)
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `H_JC = ν n̂ + ½ω σ_z + λν(aσ₊ + a†σ₋)`.
pub fn jc_hamiltonian(p: &JCParams, space: SpaceConfig) -> Operator {
    let (n, s) = jc_constants(p, space);
    n + s
}

/// The commuting pair `(𝒩, 𝒮)` with `H_JC = 𝒩 + 𝒮`.
pub fn jc_constants(p: &JCParams, space: SpaceConfig) -> (Operator, Operator) {
    let a = annihilation(space);
    let sz = pauli(Pauli::Z, space);
    let big_n = (number(space) + sz.scale_re(0.5)).scale_re(p.nu);
    let coupling = &a * &pauli(Pauli::Plus, space) + &a.adjoint() * &pauli(Pauli::Minus, space);
    let big_s = sz.scale_re(0.5 * (p.omega - p.nu)) + coupling.scale_re(p.lambda * p.nu);
    (big_n, big_s)
}

/// Time-independent pieces of the ion-trap Hamiltonian, so that `H(t)` can be
/// evaluated repeatedly without re-exponentiating `D(iη)`.
#[derive(Clone, Debug)]
pub struct IonTrap {
    pub params: ModelParams,
    h0: Operator,
    /// `Ω_R σ₊ D(iη)`; the other coupling term is its adjoint.
    raising: Operator,
}

impl IonTrap {
    pub fn new(p: &ModelParams, space: SpaceConfig) -> Result<Self> {
        p.validate()?;
        let h0 = number(space).scale_re(p.nu) + pauli(Pauli::Z, space).scale_re(0.5 * p.omega_ge);
        let d = displacement_imag(p.eta, space);
        let raising = (&pauli(Pauli::Plus, space) * &d).scale_re(p.omega_r);
        Ok(Self {
            params: *p,
            h0,
            raising,
        })
    }

    /// `H₀ = ν n̂ + ½ω_ge σ_z`.
    pub fn bare(&self) -> &Operator {
        &self.h0
    }

    /// `H(t) = H₀ + Ω_R(e^{iω_L t}σ₋D(iη)† + e^{−iω_L t}σ₊D(iη))`.
    pub fn at(&self, t: f64) -> Operator {
        let phase = C64::from_polar(1.0, -self.params.omega_l * t);
        let up = self.raising.scale(phase);
        &self.h0 + &up + up.adjoint()
    }
}

/// The ion-trap Hamiltonian at time `t`.
pub fn ith(t: f64, p: &ModelParams, space: SpaceConfig) -> Result<Operator> {
    Ok(IonTrap::new(p, space)?.at(t))
}

/// `R_t = exp(i½ω_L t σ_z)`.
pub fn rotating_frame(t: f64, omega_l: f64, space: SpaceConfig) -> Operator {
    Operator::diagonal(space, |b| C64::from_polar(1.0, 0.5 * omega_l * t * b.spin.sz()))
}

/// `H̃ = ν n̂ + ½δσ_z + Ω_R(σ₋D(iη)† + σ₊D(iη))`.
pub fn rfh(p: &ModelParams, space: SpaceConfig) -> Result<Operator> {
    p.validate()?;
    let h0 = rfh_reference(p, space);
    let d = displacement_imag(p.eta, space);
    let up = (&pauli(Pauli::Plus, space) * &d).scale_re(p.omega_r);
    Ok(h0 + &up + up.adjoint())
}

/// Reference Hamiltonian `H̃₀ = ν n̂ + ½δσ_z` of the usual RWA treatment.
pub fn rfh_reference(p: &ModelParams, space: SpaceConfig) -> Operator {
    number(space).scale_re(p.nu) + pauli(Pauli::Z, space).scale_re(0.5 * p.delta())
}

/// Which sideband the RWA keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sideband {
    /// Carrier, `δ ≃ 0`.
    Carrier,
    /// Red sideband, `δ + ν ≃ 0`.
    Red,
    /// Blue sideband, `δ − ν ≃ 0`.
    Blue,
}

/// The three Lamb-Dicke RWA effective Hamiltonians.
pub fn rwa_effective(which: Sideband, p: &ModelParams, space: SpaceConfig) -> Operator {
    let a = annihilation(space);
    let ad = a.adjoint();
    let sp = pauli(Pauli::Plus, space);
    let sm = pauli(Pauli::Minus, space);
    match which {
        Sideband::Carrier => (&sp + &sm).scale_re(p.omega_r),
        Sideband::Red => (&ad * &sp - &a * &sm).scale(I * (p.eta * p.omega_r)),
        Sideband::Blue => (&a * &sp - &ad * &sm).scale(I * (p.eta * p.omega_r)),
    }
}

/// Coefficients `(κ⁺, κ⁻, ε⁺, ε⁻)` of `T_Δ`, with `sign(0) = +1`.
pub fn kappa_epsilon(big_delta: f64) -> (f64, f64, f64, f64) {
    let root = (4.0 + big_delta * big_delta).sqrt();
    let sign = if big_delta >= 0.0 { 1.0 } else { -1.0 };
    let first = (0.25 + 0.5 / root).sqrt();
    // guard the rounding at Δ = 0, where the radicand is exactly zero
    let second = (0.25 - 0.5 / root).max(0.0).sqrt();
    let eps = big_delta / (2.0 * root);
    (first + sign * second, first - sign * second, eps + 0.5, eps - 0.5)
}

/// `T₁ = (1/√2)[[𝒟†, 𝒟], [−𝒟†, 𝒟]]`, `𝒟 = D(iη/2)`.
pub fn t1(p: &ModelParams, space: SpaceConfig) -> Result<Operator> {
    p.big_delta()?;
    let d = displacement_imag(p.eta / 2.0, space);
    let dd = d.adjoint();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    Ok(spin_blocks(&dd, &d, &-&dd, &d).scale_re(s))
}

/// Spin rotation by `θ` about `y`.
pub fn t2(p: &ModelParams, space: SpaceConfig) -> Result<Operator> {
    let theta = p.theta()?;
    Ok(spin_rotation_y(theta, space))
}

/// `[[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]` in the `(e, g)` order.
pub fn spin_rotation_y(theta: f64, space: SpaceConfig) -> Operator {
    let id = Operator::identity(space);
    let (s, c) = (theta / 2.0).sin_cos();
    spin_blocks(&id.scale_re(c), &id.scale_re(-s), &id.scale_re(s), &id.scale_re(c))
}

/// `T₃ = diag(D(iη̆/2), D(iη̆/2)†)`.
pub fn t3(p: &ModelParams, space: SpaceConfig) -> Result<Operator> {
    p.big_delta()?;
    let d = displacement_imag(p.eta_breve()? / 2.0, space);
    let z = Operator::zeros(space);
    Ok(spin_blocks(&d, &z, &z, &d.adjoint()))
}

/// `T_Δ` from its closed block form.
pub fn t_delta(p: &ModelParams, space: SpaceConfig) -> Result<Operator> {
    let big_delta = p.big_delta()?;
    let (kp, km, ep, em) = kappa_epsilon(big_delta);
    let d_minus = displacement_imag(em * p.eta, space);
    let d_plus = displacement_imag(ep * p.eta, space);
    Ok(spin_blocks(
        &d_minus.scale_re(kp),
        &d_plus.scale_re(km),
        &d_plus.adjoint().scale_re(-km),
        &d_minus.adjoint().scale_re(kp),
    ))
}

/// `H̆₀ = ν n̂ + ½δ̆σ_z + λ²ν`.
pub fn bh_unperturbed(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    Operator::diagonal(space, |b| {
        re(bp.nu * b.fock as f64 + 0.5 * bp.delta_breve * b.spin.sz() + bp.scalar_shift())
    })
}

/// Term `m` of the expansion of `H̆↕` in powers of `η̆`:
/// `iλν (iη̆)^m/m! (a² − a†² + 1 − m)(a + a†)^{m−1}(σ₊ + (−1)^m σ₋)`,
/// and `iλν(a − a†)(σ₊ + σ₋)` for `m = 0`.
pub fn bh_interaction_term(m: usize, bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let a = annihilation(space);
    let ad = a.adjoint();
    let sp = pauli(Pauli::Plus, space);
    let sm = pauli(Pauli::Minus, space);
    let prefactor = I * (bp.lambda * bp.nu);
    if m == 0 {
        return (&(&a - &ad) * &(&sp + &sm)).scale(prefactor);
    }
    let coeff = prefactor * I.powu(m as u32) * bp.eta_breve.powi(m as i32) / factorial(m);
    let id = Operator::identity(space);
    let quad = &a * &a - &ad * &ad + id.scale_re(1.0 - m as f64);
    let x_pow = (&a + &ad).pow(m as u32 - 1);
    let spin = if m % 2 == 0 { &sp + &sm } else { &sp - &sm };
    // hermitian in the untruncated algebra; the product is only off at the edge
    (quad * x_pow * spin).scale(coeff).hermitian_part()
}

/// `Σ_{m=0}^{M} bh_interaction_term(m)`.
pub fn bh_interaction_series(bp: &BalancedParams, order: usize, space: SpaceConfig) -> Operator {
    let mut acc = Operator::zeros(space);
    for m in 0..=order {
        acc += &bh_interaction_term(m, bp, space);
    }
    acc
}

const SERIES_TAIL: f64 = 1e-12;
const SERIES_MAX_ORDER: usize = 80;

/// Smallest `M` with `η̆^{M+1} ‖a+a†‖^M e/(M+1)! < 1e−12`, where the norm is
/// taken on the interior block (`2√cutoff` bounds it).
pub fn series_order(eta_breve: f64, space: SpaceConfig) -> usize {
    let x_norm = 2.0 * (space.interior_cutoff() as f64).sqrt();
    let e = core::f64::consts::E;
    (0..SERIES_MAX_ORDER)
        .find(|&m| {
            eta_breve.abs().powi(m as i32 + 1) * x_norm.powi(m as i32) * e / factorial(m + 1)
                < SERIES_TAIL
        })
        .unwrap_or(SERIES_MAX_ORDER)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BhRoute {
    ClosedForm,
    Conjugation,
}

/// The balanced Hamiltonian, either summed from its closed series or obtained
/// as `T_Δ H̃ T_Δ†`.
pub fn bh(p: &ModelParams, space: SpaceConfig, route: BhRoute) -> Result<Operator> {
    match route {
        BhRoute::ClosedForm => Ok(bh_closed_form(&p.balanced()?, space)),
        BhRoute::Conjugation => {
            let t = t_delta(p, space)?;
            Ok(&t * &rfh(p, space)? * t.adjoint())
        }
    }
}

/// `H̆₀ + H̆↕` from reduced parameters, with the series cut by [`series_order`].
pub fn bh_closed_form(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let order = series_order(bp.eta_breve, space);
    bh_unperturbed(bp, space) + bh_interaction_series(bp, order, space)
}

/// `H̆₀ + iλν(a−a†)(σ₊+σ₋) + λη̆ν(a†²−a²)(σ₊−σ₋)`, the interaction kept to
/// first order in `η̆`.
pub fn bh_truncated(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    bh_unperturbed(bp, space) + bh_interaction_series(bp, 1, space)
}

/// `T = exp(iπ/2 n̂σ_x) = cos(π n̂/2) + i sin(π n̂/2)σ_x`.
pub fn check_transform(space: SpaceConfig) -> Operator {
    // cos and sin of integer multiples of π/2, exactly
    let cos_q = |n: usize| [1.0, 0.0, -1.0, 0.0][n % 4];
    let sin_q = |n: usize| [0.0, 1.0, 0.0, -1.0][n % 4];
    let c = Operator::fock_function(space, |n| re(cos_q(n)));
    let s = Operator::fock_function(space, |n| C64::new(0.0, sin_q(n)));
    c + s * pauli(Pauli::X, space)
}

/// `T` by exponentiation, for cross-checking [`check_transform`].
pub fn check_transform_expm(space: SpaceConfig) -> Result<Operator> {
    let gen = (number(space) * pauli(Pauli::X, space))
        .scale(C64::new(0.0, core::f64::consts::FRAC_PI_2));
    expm(&gen)
}

/// `e^{iπ n̂} = (−1)^n̂`.
pub fn parity(space: SpaceConfig) -> Operator {
    Operator::fock_function(space, |n| if n % 2 == 0 { ONE } else { -ONE })
}

/// `Ȟ₀ = ν n̂ + ½δ̆ e^{iπn̂}σ_z + λ²ν`.
pub fn h_check_unperturbed(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    Operator::diagonal(space, |b| {
        let sign = if b.fock % 2 == 0 { 1.0 } else { -1.0 };
        re(bp.nu * b.fock as f64 + 0.5 * bp.delta_breve * sign * b.spin.sz() + bp.scalar_shift())
    })
}

/// Term `m` of `Ȟ↕ = T H̆↕ T†`: `λν η̆^m/m! (a†² − a² + 1 − m)(a† − a)^{m−1} S_m`
/// with `S_m = e^{iπn̂}(σ₋ − σ₊)` for odd `m` and `S_m = 1` for even `m`, and
/// `λν(a + a†)` for `m = 0`.
///
/// The literature form writes `S_m = e^{imπn̂}(σ₋ + (−1)^m σ₊)`, which for even
/// `m ≥ 2` leaves a spurious `σ_x`.
pub fn h_check_interaction_term(m: usize, bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let a = annihilation(space);
    let ad = a.adjoint();
    let scale = bp.lambda * bp.nu;
    if m == 0 {
        return (&a + &ad).scale_re(scale);
    }
    let sp = pauli(Pauli::Plus, space);
    let sm = pauli(Pauli::Minus, space);
    let coeff = scale * bp.eta_breve.powi(m as i32) / factorial(m);
    let id = Operator::identity(space);
    let quad = &ad * &ad - &a * &a + id.scale_re(1.0 - m as f64);
    let p_pow = (&ad - &a).pow(m as u32 - 1);
    let spin = if m % 2 == 0 {
        // σ_x from the ladder factors cancels the conjugated σ₊ + σ₋
        id
    } else {
        parity(space) * (&sm - &sp)
    };
    (quad * p_pow * spin).scale_re(coeff).hermitian_part()
}

/// `Ȟ₀ + Σ_{m ≤ M} Ȟ↕ terms` with `M` from [`series_order`].
pub fn h_check(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let order = series_order(bp.eta_breve, space);
    h_check_truncated(bp, order, space)
}

pub fn h_check_truncated(bp: &BalancedParams, order: usize, space: SpaceConfig) -> Operator {
    let mut acc = h_check_unperturbed(bp, space);
    for m in 0..=order {
        acc += &h_check_interaction_term(m, bp, space);
    }
    acc
}

/// `Ȟ` by explicit conjugation `T H̆ T†` of the closed-form `H̆`.
pub fn h_check_conjugated(bp: &BalancedParams, space: SpaceConfig) -> Operator {
    let t = check_transform(space);
    &t * &bh_closed_form(bp, space) * t.adjoint()
}
