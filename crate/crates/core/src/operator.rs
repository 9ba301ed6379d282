//! Truncated Fock ⊗ spin-½ operator algebra.
//!
//! States are indexed as `2·fock + spin` with `g = 0`, `e = 1`, so the
//! interior block (Fock levels up to `n_max − interior_margin`, both spins)
//! is a leading principal submatrix.

use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
// f64 math in no_std builds; redundant when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Truncation of the bosonic factor and the comparison window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceConfig {
    n_max: usize,
    interior_margin: usize,
}

impl SpaceConfig {
    /// `n_max = 40`, margin 10.
    pub const DEFAULT: SpaceConfig = SpaceConfig {
        n_max: 40,
        interior_margin: 10,
    };

    pub fn new(n_max: usize, interior_margin: usize) -> Result<Self> {
        let fail = |reason| Error::InvalidSpace {
            n_max,
            margin: interior_margin,
            reason,
        };
        if n_max < 4 {
            return Err(fail("n_max must be at least 4"));
        }
        if interior_margin < 1 {
            return Err(fail("interior_margin must be at least 1"));
        }
        if n_max < interior_margin + 2 {
            return Err(fail("n_max - interior_margin must be at least 2"));
        }
        Ok(Self {
            n_max,
            interior_margin,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn interior_margin(&self) -> usize {
        self.interior_margin
    }

    /// Hilbert-space dimension `2·(n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Highest Fock level inside the interior block.
    pub fn interior_cutoff(&self) -> usize {
        self.n_max - self.interior_margin
    }

    /// Dimension of the interior block.
    pub fn interior_dim(&self) -> usize {
        2 * (self.interior_cutoff() + 1)
    }

    pub fn basis(&self) -> impl Iterator<Item = BasisIndex> {
        let n_max = self.n_max;
        (0..=n_max).flat_map(|fock| {
            [Spin::Ground, Spin::Excited]
                .into_iter()
                .map(move |spin| BasisIndex { fock, spin })
        })
    }
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Ground,
    Excited,
}

impl Spin {
    /// Eigenvalue of σ_z.
    pub fn sz(self) -> f64 {
        match self {
            Spin::Ground => -1.0,
            Spin::Excited => 1.0,
        }
    }
}

/// A standard-basis label `|fock⟩ ⊗ |spin⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub fock: usize,
    pub spin: Spin,
}

impl BasisIndex {
    pub fn new(fock: usize, spin: Spin) -> Self {
        Self { fock, spin }
    }

    pub fn flat(self) -> usize {
        2 * self.fock
            + match self.spin {
                Spin::Ground => 0,
                Spin::Excited => 1,
            }
    }

    pub fn from_flat(index: usize) -> Self {
        Self {
            fock: index / 2,
            spin: if index % 2 == 0 {
                Spin::Ground
            } else {
                Spin::Excited
            },
        }
    }
}

/// Dense complex matrix on the truncated space.
#[derive(Clone, PartialEq)]
pub struct Operator {
    space: SpaceConfig,
    m: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("space", &self.space)
            .field("norm", &self.op_norm())
            .finish()
    }
}

impl Operator {
    pub fn zeros(space: SpaceConfig) -> Self {
        let d = space.dim();
        Self {
            space,
            m: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: SpaceConfig) -> Self {
        let d = space.dim();
        Self {
            space,
            m: DMatrix::identity(d, d),
        }
    }

    /// Builds `Σ f(row, col) |row⟩⟨col|`.
    pub fn from_fn(space: SpaceConfig, mut f: impl FnMut(BasisIndex, BasisIndex) -> C64) -> Self {
        let d = space.dim();
        Self {
            space,
            m: DMatrix::from_fn(d, d, |r, c| {
                f(BasisIndex::from_flat(r), BasisIndex::from_flat(c))
            }),
        }
    }

    /// Diagonal operator with entries `f(state)`.
    pub fn diagonal(space: SpaceConfig, mut f: impl FnMut(BasisIndex) -> C64) -> Self {
        let mut op = Self::zeros(space);
        for (k, b) in space.basis().enumerate() {
            op.m[(k, k)] = f(b);
        }
        op
    }

    /// `f(n̂) ⊗ 1`.
    pub fn fock_function(space: SpaceConfig, mut f: impl FnMut(usize) -> C64) -> Self {
        Self::diagonal(space, |b| f(b.fock))
    }

    /// `1 ⊗ |s⟩⟨s|`.
    pub fn spin_projector(space: SpaceConfig, s: Spin) -> Self {
        Self::diagonal(space, |b| if b.spin == s { ONE } else { ZERO })
    }

    pub fn from_matrix(space: SpaceConfig, m: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: m.nrows().max(m.ncols()),
            });
        }
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, m })
    }

    pub fn space(&self) -> SpaceConfig {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: BasisIndex, col: BasisIndex) -> C64 {
        self.m[(row.flat(), col.flat())]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            m: self.m.adjoint(),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            space: self.space,
            m: &self.m * z,
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(re(x))
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            space: self.space,
            m: &self.m * &other.m - &other.m * &self.m,
        })
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        spectral_norm(&self.m)
    }

    /// `P A P` with `P` the projector on the interior Fock levels.
    pub fn interior_project(&self) -> Self {
        let k = self.space.interior_dim();
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        m.view_mut((0, 0), (k, k)).copy_from(&self.m.view((0, 0), (k, k)));
        Self {
            space: self.space,
            m,
        }
    }

    /// The interior block as a standalone matrix.
    pub fn interior_block(&self) -> DMatrix<C64> {
        let k = self.space.interior_dim();
        self.m.view((0, 0), (k, k)).into_owned()
    }

    /// Spectral norm of the interior block.
    pub fn interior_norm(&self) -> f64 {
        spectral_norm(&self.interior_block())
    }

    /// `‖A − A†‖`.
    pub fn hermiticity_defect(&self) -> f64 {
        spectral_norm(&(&self.m - self.m.adjoint()))
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            space: self.space,
            m: (&self.m + self.m.adjoint()) * re(0.5),
        }
    }

    /// `‖A†A − 1‖`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        spectral_norm(&(self.m.adjoint() * &self.m - DMatrix::identity(d, d)))
    }

    /// Distance to `other` on the interior block.
    pub fn interior_distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok((self - other).interior_norm())
    }

    /// Re-embeds this operator in a different truncation, keeping the
    /// common Fock levels and zero-filling the rest.
    pub fn embed(&self, target: SpaceConfig) -> Self {
        let k = self.dim().min(target.dim());
        let mut m = DMatrix::zeros(target.dim(), target.dim());
        m.view_mut((0, 0), (k, k)).copy_from(&self.m.view((0, 0), (k, k)));
        Self { space: target, m }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Operator::identity(self.space);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

pub(crate) fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl<'a> $tr<&'a Operator> for &'a Operator {
            type Output = Operator;
            fn $f(self, rhs: &'a Operator) -> Operator {
                assert_eq!(self.space, rhs.space, "operator space mismatch");
                Operator { space: self.space, m: &self.m $op &rhs.m }
            }
        }
        impl $tr<Operator> for Operator {
            type Output = Operator;
            fn $f(self, rhs: Operator) -> Operator {
                (&self) $op (&rhs)
            }
        }
        impl<'a> $tr<&'a Operator> for Operator {
            type Output = Operator;
            fn $f(self, rhs: &'a Operator) -> Operator {
                (&self) $op rhs
            }
        }
        impl<'a> $tr<Operator> for &'a Operator {
            type Output = Operator;
            fn $f(self, rhs: Operator) -> Operator {
                self $op (&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        self.m += &rhs.m;
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        self.m -= &rhs.m;
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, z: C64) -> Operator {
        self.scale(z)
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(mut self, z: C64) -> Operator {
        self.m *= z;
        self
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, x: f64) -> Operator {
        self.scale(re(x))
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(mut self, x: f64) -> Operator {
        self.m *= re(x);
        self
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(mut self) -> Operator {
        self.m.neg_mut();
        self
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(re(-1.0))
    }
}

/// `a|n⟩ = √n |n−1⟩`, identity on the spin factor.
pub fn annihilation(space: SpaceConfig) -> Operator {
    Operator::from_fn(space, |r, c| {
        if r.spin == c.spin && c.fock == r.fock + 1 {
            re((c.fock as f64).sqrt())
        } else {
            ZERO
        }
    })
}

/// `a†`; its top Fock level is truncated away.
pub fn creation(space: SpaceConfig) -> Operator {
    annihilation(space).adjoint()
}

/// `n̂ = a†a`.
pub fn number(space: SpaceConfig) -> Operator {
    Operator::fock_function(space, |n| re(n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    Z,
    Plus,
    Minus,
    X,
}

/// Spin operator, identity on the Fock factor. `σ_+ = |e⟩⟨g|`.
pub fn pauli(which: Pauli, space: SpaceConfig) -> Operator {
    Operator::from_fn(space, |r, c| {
        if r.fock != c.fock {
            return ZERO;
        }
        let hit = match which {
            Pauli::Z => {
                return if r.spin == c.spin { re(r.spin.sz()) } else { ZERO };
            }
            Pauli::Plus => r.spin == Spin::Excited && c.spin == Spin::Ground,
            Pauli::Minus => r.spin == Spin::Ground && c.spin == Spin::Excited,
            Pauli::X => r.spin != c.spin,
        };
        if hit {
            ONE
        } else {
            ZERO
        }
    })
}

/// `D(α) = exp(α a† − α* a)` on the truncated space (exactly unitary).
pub fn displacement(alpha: C64, space: SpaceConfig) -> Operator {
    let a = annihilation(space);
    let gen = &a.adjoint() * alpha - &a * alpha.conj();
    expm(&gen).expect("finite generator")
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm_matrix(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: a.ncols(),
        });
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * re(2.0f64.powi(-s));
    let b = PADE13;
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]))
        + &a6 * re(b[7])
        + &a4 * re(b[5])
        + &a2 * re(b[3])
        + &ident * re(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]))
        + &a6 * re(b[6])
        + &a4 * re(b[4])
        + &a2 * re(b[2])
        + &ident * re(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::NonFinite)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// `exp(A)` for an operator with finite entries.
pub fn expm(a: &Operator) -> Result<Operator> {
    let m = expm_matrix(&a.m)?;
    Operator::from_matrix(a.space, m)
}

/// `exp(−i H t)`.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    expm(&h.scale(C64::new(0.0, -t)))
}
