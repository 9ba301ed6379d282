//! Recursive perturbation engine.
//!
//! For `H(λ) = H₀ + Σ_{m≥1} λ^m H_m` with `H₀` exactly diagonalizable, this
//! computes hermitian `C_n` commuting with `H₀` and hermitian generators
//! `Z_n` such that, order by order,
//!
//! ```text
//! e^{iZ(λ)} H(λ) e^{−iZ(λ)} = H₀ + C(λ),   C(λ) = Σ λ^n C_n,  Z(λ) = Σ λ^n Z_n.
//! ```
//!
//! Order `n` reads `C_n − i[Z_n, H₀] = G_n(H₀..H_n; Z₁..Z_{n−1})`. `C_n` is the
//! block-diagonal part of `G_n` over the degenerate eigenspaces of `H₀`, and
//! `Z_n` is the minimal solution: zero inside every eigenspace and, in the
//! eigenbasis, `(Z_n)_{jk} = i γ(E_k − E_j) (G_n)_{jk}` elsewhere.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;
// f64 math in no_std builds; redundant when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::operator::{expm, Operator, C64, I, ZERO};

/// Default degeneracy tolerance, relative to the trap frequency.
pub const DEFAULT_DEG_TOL_REL: f64 = 1e-8;

/// Tolerance on the hermiticity of each input term, relative to its norm.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// `χ(x) = 1` if `|x| ≤ eps`, else `0`.
pub fn chi(x: f64, eps: f64) -> f64 {
    if x.abs() <= eps {
        1.0
    } else {
        0.0
    }
}

/// `γ(x) = 0` if `|x| ≤ eps`, else `1/x`.
pub fn gamma(x: f64, eps: f64) -> f64 {
    if x.abs() <= eps {
        0.0
    } else {
        1.0 / x
    }
}

/// Eigen-decomposition of an unperturbed Hamiltonian with its eigenvalues
/// grouped into degenerate clusters.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    h0: Operator,
    eigenvalues: Vec<f64>,
    eigenbasis: Operator,
    clusters: Vec<Range<usize>>,
    eps_deg: f64,
}

impl SpectralDecomposition {
    /// Diagonalizes `h0` and clusters eigenvalues closer than `eps_deg`.
    ///
    /// A gap between adjacent eigenvalues inside `(eps_deg, 3·eps_deg]` is
    /// neither a clear degeneracy nor a clear split and is reported as
    /// [`Error::AmbiguousClustering`].
    pub fn new(h0: &Operator, eps_deg: f64) -> Result<Self> {
        let (values, vectors) = crate::oracle::exact_eigs(h0)?;
        Self::from_parts(h0.clone(), values, vectors, eps_deg)
    }

    /// Uses a caller-supplied orthonormal eigenbasis (columns of `vectors`)
    /// with ascending `values`.
    pub fn from_parts(h0: Operator, values: Vec<f64>, vectors: Operator, eps_deg: f64) -> Result<Self> {
        if !(eps_deg > 0.0) {
            return Err(Error::InvalidArgument("eps_deg must be positive".into()));
        }
        if values.len() != h0.dim() || vectors.space() != h0.space() {
            return Err(Error::DimensionMismatch {
                left: h0.dim(),
                right: values.len(),
            });
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("eigenvalues must be ascending".into()));
        }
        let mut clusters = Vec::new();
        let mut start = 0;
        for k in 1..=values.len() {
            if k == values.len() {
                clusters.push(start..k);
                break;
            }
            let gap = values[k] - values[k - 1];
            if gap > eps_deg && gap <= 3.0 * eps_deg {
                return Err(Error::AmbiguousClustering { gap, eps: eps_deg });
            }
            if gap > eps_deg {
                clusters.push(start..k);
                start = k;
            }
        }
        Ok(Self {
            h0,
            eigenvalues: values,
            eigenbasis: vectors,
            clusters,
            eps_deg,
        })
    }

    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &Operator {
        &self.eigenbasis
    }

    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    pub fn eps_deg(&self) -> f64 {
        self.eps_deg
    }

    /// `Σ E(n) ‖n⟩⟨n‖`.
    pub fn reconstruct(&self) -> Operator {
        let v = self.eigenbasis.matrix();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
        ));
        Operator::from_matrix(self.h0.space(), v * d * v.adjoint()).expect("finite reconstruction")
    }

    /// Orthogonal projector onto cluster `k`.
    pub fn projector(&self, k: usize) -> Operator {
        let v = self.eigenbasis.matrix();
        let r = self.clusters[k].clone();
        let cols = v.columns(r.start, r.len());
        Operator::from_matrix(self.h0.space(), &cols * cols.adjoint()).expect("finite projector")
    }

    fn cluster_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.eigenvalues.len()];
        for (k, r) in self.clusters.iter().enumerate() {
            for j in r.clone() {
                labels[j] = k;
            }
        }
        labels
    }

    fn to_eigenbasis(&self, g: &Operator) -> DMatrix<C64> {
        let v = self.eigenbasis.matrix();
        v.adjoint() * g.matrix() * v
    }

    fn from_eigenbasis(&self, m: &DMatrix<C64>) -> Operator {
        let v = self.eigenbasis.matrix();
        Operator::from_matrix(self.h0.space(), v * m * v.adjoint()).expect("finite operator")
    }

    fn check(&self, g: &Operator) -> Result<()> {
        if g.space() != self.h0.space() {
            return Err(Error::DimensionMismatch {
                left: self.h0.dim(),
                right: g.dim(),
            });
        }
        Ok(())
    }
}

/// Interaction terms `H₁, H₂, …`; term `m` multiplies `λ^m`.
#[derive(Clone, Debug)]
pub struct InteractionSeries {
    terms: Vec<Operator>,
}

impl InteractionSeries {
    pub fn new(terms: Vec<Operator>) -> Result<Self> {
        for t in &terms {
            let defect = t.hermiticity_defect();
            if defect > HERMITICITY_TOL * t.op_norm().max(1.0) {
                return Err(Error::NotHermitian { defect });
            }
        }
        if let Some(first) = terms.first() {
            if terms.iter().any(|t| t.space() != first.space()) {
                return Err(Error::DimensionMismatch {
                    left: first.dim(),
                    right: terms.iter().map(|t| t.dim()).max().unwrap_or(0),
                });
            }
        }
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `H_m` for `m ≥ 1`, `None` past the end of the series.
    pub fn term(&self, m: usize) -> Option<&Operator> {
        m.checked_sub(1).and_then(|k| self.terms.get(k))
    }

    pub fn terms(&self) -> &[Operator] {
        &self.terms
    }

    /// `Σ_m λ^m H_m`.
    pub fn evaluate(&self, lambda: f64) -> Option<Operator> {
        let mut it = self.terms.iter().enumerate();
        let (_, first) = it.next()?;
        let mut acc = first.scale_re(lambda);
        for (k, t) in it {
            acc += &t.scale_re(lambda.powi(k as i32 + 1));
        }
        Some(acc)
    }
}

/// `C₁..C_N` and `Z₁..Z_N`.
#[derive(Clone, Debug)]
pub struct PerturbativeSolution {
    c: Vec<Operator>,
    z: Vec<Operator>,
}

impl PerturbativeSolution {
    pub fn order(&self) -> usize {
        self.c.len()
    }

    /// `C_n`, 1-based.
    pub fn c(&self, n: usize) -> &Operator {
        &self.c[n - 1]
    }

    /// `Z_n`, 1-based.
    pub fn z(&self, n: usize) -> &Operator {
        &self.z[n - 1]
    }

    pub fn cs(&self) -> &[Operator] {
        &self.c
    }

    pub fn zs(&self) -> &[Operator] {
        &self.z
    }

    /// Keeps the first `n` orders.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            c: self.c[..n].to_vec(),
            z: self.z[..n].to_vec(),
        }
    }

    /// `W = Σ_{k ≤ n} λ^k Z_k`.
    pub fn generator(&self, lambda: f64, n: usize) -> Operator {
        weighted_sum(&self.z[..n], lambda)
    }

    /// `Σ_{k ≤ n} λ^k C_k`.
    pub fn constant(&self, lambda: f64, n: usize) -> Operator {
        weighted_sum(&self.c[..n], lambda)
    }
}

fn weighted_sum(ops: &[Operator], lambda: f64) -> Operator {
    let mut acc = Operator::zeros(ops[0].space());
    for (k, op) in ops.iter().enumerate() {
        acc += &op.scale_re(lambda.powi(k as i32 + 1));
    }
    acc
}

/// Splits `G` into `Σ_m P_m G P_m` and the remainder.
pub fn diagonal_split(g: &Operator, spec: &SpectralDecomposition) -> Result<(Operator, Operator)> {
    spec.check(g)?;
    let labels = spec.cluster_labels();
    let mut gt = spec.to_eigenbasis(g);
    for j in 0..labels.len() {
        for k in 0..labels.len() {
            if labels[j] != labels[k] {
                gt[(j, k)] = ZERO;
            }
        }
    }
    let block = spec.from_eigenbasis(&gt);
    let off = g - &block;
    Ok((block, off))
}

/// All ordered ways of writing `total` as `parts` positive integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if total < parts {
            return;
        }
        for k in 1..=total - (parts - 1) {
            prefix.push(k);
            go(total - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(total, parts, &mut Vec::new(), &mut out);
    out
}

/// `[Z_{k₁}, [Z_{k₂}, … [Z_{k_m}, X] …]]`.
fn nested_commutator(ks: &[usize], z: &[Operator], x: &Operator) -> Result<Operator> {
    let mut acc = x.clone();
    for &k in ks.iter().rev() {
        acc = z[k - 1].commutator(&acc)?;
    }
    Ok(acc)
}

fn i_pow_over_factorial(m: usize) -> C64 {
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    I.powu(m as u32) / fact
}

/// `Σ_{m=min_parts}^{order} i^m/m! Σ_{k₁+…+k_m = order} [Z_{k₁}, … [Z_{k_m}, X]]`.
fn ad_series(order: usize, min_parts: usize, z: &[Operator], x: &Operator) -> Result<Operator> {
    let mut acc = Operator::zeros(x.space());
    for m in min_parts.max(1)..=order {
        let coeff = i_pow_over_factorial(m);
        for ks in compositions(order, m) {
            acc += &nested_commutator(&ks, z, x)?.scale(coeff);
        }
    }
    Ok(acc)
}

/// `F_r(X; Z₁..Z_r)`, with `F₀(X) = X`.
pub fn f_term(order: usize, x: &Operator, z: &[Operator]) -> Result<Operator> {
    if order == 0 {
        return Ok(x.clone());
    }
    ad_series(order, 1, z, x)
}

/// Right-hand side `G_n` of `C_n − i[Z_n, H₀] = G_n`.
///
/// `z_prev` must hold `Z₁..Z_{n−1}`.
pub fn build_g(n: usize, h0: &Operator, series: &InteractionSeries, z_prev: &[Operator]) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if z_prev.len() != n - 1 {
        return Err(Error::InvalidArgument(alloc::format!(
            "order {n} needs {} generators, got {}",
            n - 1,
            z_prev.len()
        )));
    }
    // the H₀ part of F_n minus its single-commutator piece i[Z_n, H₀]
    let mut g = ad_series(n, 2, z_prev, h0)?;
    for m in 1..=n {
        if let Some(hm) = series.term(m) {
            g += &f_term(n - m, hm, z_prev)?;
        }
    }
    Ok(g)
}

/// Solves orders `1..=order` with the minimal choice of generators.
pub fn solve(spec: &SpectralDecomposition, series: &InteractionSeries, order: usize) -> Result<PerturbativeSolution> {
    if order == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if let Some(t) = series.terms().first() {
        spec.check(t)?;
    }
    let labels = spec.cluster_labels();
    let e = spec.eigenvalues();
    let h0_norm = spec.h0().op_norm();
    let mut cs = Vec::with_capacity(order);
    let mut zs: Vec<Operator> = Vec::with_capacity(order);
    for n in 1..=order {
        let g = build_g(n, spec.h0(), series, &zs)?;
        let g_norm = g.op_norm();
        let defect = g.hermiticity_defect();
        if defect > 1e-10 * g_norm.max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        let gt = spec.to_eigenbasis(&g);
        let dim = labels.len();
        let mut ct = DMatrix::<C64>::zeros(dim, dim);
        let mut zt = DMatrix::<C64>::zeros(dim, dim);
        for j in 0..dim {
            for k in 0..dim {
                if labels[j] == labels[k] {
                    ct[(j, k)] = gt[(j, k)];
                } else {
                    zt[(j, k)] = I * gt[(j, k)] / (e[k] - e[j]);
                }
            }
        }
        let c = spec.from_eigenbasis(&ct).hermitian_part();
        let z = spec.from_eigenbasis(&zt).hermitian_part();
        let tol_comm = 1e-9 * (h0_norm + g_norm);
        let comm = c.commutator(spec.h0())?.op_norm();
        if comm > tol_comm {
            return Err(Error::InvalidFit(alloc::format!(
                "[C_{n}, H0] = {comm:e} exceeds {tol_comm:e}"
            )));
        }
        cs.push(c);
        zs.push(z);
    }
    Ok(PerturbativeSolution { c: cs, z: zs })
}

/// `(e^{−iW} H₀ e^{iW}, e^{−iW} (Σ λ^k C_k) e^{iW})` with `W = Σ_{k≤n} λ^k Z_k`.
pub fn assemble(h0: &Operator, sol: &PerturbativeSolution, lambda: f64, n: usize) -> Result<(Operator, Operator)> {
    if n == 0 || n > sol.order() {
        return Err(Error::InvalidArgument(alloc::format!(
            "assembly order {n} outside 1..={}",
            sol.order()
        )));
    }
    let w = sol.generator(lambda, n);
    let u = expm(&w.scale(I))?;
    let ud = u.adjoint();
    let h0n = &ud * h0 * &u;
    let cn = &ud * &sol.constant(lambda, n) * &u;
    Ok((h0n, cn))
}

/// `‖e^{iW} H(λ) e^{−iW} − H₀ − Σ_{k≤n} λ^k C_k‖` on the interior block.
pub fn residual_norm(
    h0: &Operator,
    series: &InteractionSeries,
    sol: &PerturbativeSolution,
    lambda: f64,
    n: usize,
) -> Result<f64> {
    let h = match series.evaluate(lambda) {
        Some(v) => h0 + &v,
        None => h0.clone(),
    };
    let w = sol.generator(lambda, n);
    let u = expm(&w.scale(I))?;
    let lhs = &u * &h * u.adjoint();
    let rhs = h0 + &sol.constant(lambda, n);
    Ok((lhs - rhs).interior_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{bh_interaction_term, bh_unperturbed, BalancedParams};
    use crate::operator::{annihilation, pauli, re, Pauli, SpaceConfig};

    fn space() -> SpaceConfig {
        SpaceConfig::new(20, 5).unwrap()
    }

    #[test]
    fn chi_gamma_values() {
        assert_eq!(chi(0.0, 1e-12), 1.0);
        assert_eq!(gamma(0.0, 1e-12), 0.0);
        assert_eq!(gamma(2.0, 1e-12), 0.5);
        assert_eq!(chi(3e-13, 1e-12), 1.0);
        for x in [1e-11, -0.3, 7.0, -1e5] {
            assert!((gamma(x, 1e-12) * x - (1.0 - chi(x, 1e-12))).abs() <= 1e-15);
        }
    }

    #[test]
    fn compositions_enumerated() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(4, 1), vec![vec![4]]);
        assert!(compositions(2, 3).is_empty());
        // C(n−1, m−1) compositions of n into m parts
        assert_eq!(compositions(6, 3).len(), 10);
    }

    fn resonant() -> BalancedParams {
        BalancedParams::new(1.0, 1.0, 0.0, 0.05).unwrap()
    }

    fn unit_series(bp: &BalancedParams, s: SpaceConfig) -> InteractionSeries {
        let unit = BalancedParams { lambda: 1.0, ..*bp };
        InteractionSeries::new(vec![bh_interaction_term(0, &unit, s)]).unwrap()
    }

    #[test]
    fn spectral_decomposition_clusters() {
        let s = space();
        let h0 = bh_unperturbed(&resonant(), s);
        let spec = SpectralDecomposition::new(&h0, 1e-8).unwrap();
        assert!((spec.reconstruct() - h0).op_norm() < 1e-10);
        // |0,g⟩ alone, then pairs {|n−1,e⟩, |n,g⟩}, then |n_max,e⟩ alone
        assert_eq!(spec.clusters().len(), s.n_max() + 2);
        assert_eq!(spec.clusters()[0].len(), 1);
        assert!(spec.clusters()[1..=s.n_max()].iter().all(|r| r.len() == 2));
    }

    #[test]
    fn ambiguous_clustering_reported() {
        let s = space();
        let h0 = Operator::diagonal(s, |b| re(b.fock as f64 + if b.spin == crate::Spin::Excited { 2e-8 } else { 0.0 }));
        let err = SpectralDecomposition::new(&h0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::AmbiguousClustering { .. }));
    }

    #[test]
    fn diagonal_split_cases() {
        let s = space();
        let h0 = bh_unperturbed(&resonant(), s);
        let spec = SpectralDecomposition::new(&h0, 1e-8).unwrap();
        // a polynomial in H0 has no off-diagonal part
        let poly = &h0 * &h0 + h0.scale_re(3.0);
        let (_, off) = diagonal_split(&poly, &spec).unwrap();
        assert!(off.op_norm() < 1e-12);
        // JC coupling lives inside the degenerate pairs
        let a = annihilation(s);
        let jc = &a * &pauli(Pauli::Plus, s) + &a.adjoint() * &pauli(Pauli::Minus, s);
        let (block, off) = diagonal_split(&jc, &spec).unwrap();
        assert!((block - &jc).op_norm() < 1e-12 && off.op_norm() < 1e-12);
        // nondegenerate spectrum: a pure ladder has no diagonal
        let nondeg = BalancedParams::new(1.0, 1.618033988749895, 0.0, 0.05).unwrap();
        let spec = SpectralDecomposition::new(&bh_unperturbed(&nondeg, s), 1e-8).unwrap();
        let x = &a + &a.adjoint();
        let (block, _) = diagonal_split(&x, &spec).unwrap();
        assert!(block.op_norm() < 1e-12);
    }

    #[test]
    fn build_g_low_orders() {
        let s = space();
        let bp = resonant();
        let h0 = bh_unperturbed(&bp, s);
        let series = unit_series(&bp, s);
        let g1 = build_g(1, &h0, &series, &[]).unwrap();
        assert_eq!(&g1, series.term(1).unwrap());
        let zero_series = InteractionSeries::new(vec![Operator::zeros(s), Operator::zeros(s)]).unwrap();
        let g2 = build_g(2, &h0, &zero_series, &[Operator::zeros(s)]).unwrap();
        assert_eq!(g2, Operator::zeros(s));
        // linear case: G₂ = −½[Z₁,[Z₁,H₀]] + i[Z₁,H₁]
        let a = annihilation(s);
        let z1 = (&a * &pauli(Pauli::Minus, s) + &a.adjoint() * &pauli(Pauli::Plus, s)).scale_re(0.3);
        let h1 = series.term(1).unwrap();
        let expect = z1.commutator(&z1.commutator(&h0).unwrap()).unwrap().scale_re(-0.5)
            + z1.commutator(h1).unwrap().scale(I);
        let g2 = build_g(2, &h0, &series, &[z1]).unwrap();
        assert!((g2 - expect).op_norm() < 1e-12);
        assert!(build_g(2, &h0, &series, &[]).is_err());
    }

    #[test]
    fn zero_interaction_gives_zero_solution() {
        let s = space();
        let h0 = bh_unperturbed(&resonant(), s);
        let spec = SpectralDecomposition::new(&h0, 1e-8).unwrap();
        let series = InteractionSeries::new(vec![Operator::zeros(s); 3]).unwrap();
        let sol = solve(&spec, &series, 3).unwrap();
        for n in 1..=3 {
            assert_eq!(sol.c(n).op_norm(), 0.0);
            assert_eq!(sol.z(n).op_norm(), 0.0);
        }
    }

    #[test]
    fn resonant_first_order_is_jc_constant() {
        let s = space();
        let bp = resonant();
        let spec = SpectralDecomposition::new(&bh_unperturbed(&bp, s), 1e-8).unwrap();
        let sol = solve(&spec, &unit_series(&bp, s), 2).unwrap();
        let a = annihilation(s);
        let expect = (&a * &pauli(Pauli::Plus, s) - &a.adjoint() * &pauli(Pauli::Minus, s)).scale(I);
        assert!((sol.c(1) - &expect).op_norm() < 1e-10);
    }

    #[test]
    fn off_resonant_first_order_vanishes() {
        let s = space();
        let bp = BalancedParams::new(1.0, 1.618033988749895, 0.0, 0.05).unwrap();
        let spec = SpectralDecomposition::new(&bh_unperturbed(&bp, s), 1e-8).unwrap();
        let sol = solve(&spec, &unit_series(&bp, s), 1).unwrap();
        assert!(sol.c(1).op_norm() < 1e-10);
    }

    #[test]
    fn solution_invariants() {
        let s = space();
        let bp = BalancedParams::new(1.0, 1.0, 0.03, 0.05).unwrap();
        let h0 = bh_unperturbed(&bp, s);
        let spec = SpectralDecomposition::new(&h0, 1e-8).unwrap();
        let unit = BalancedParams { lambda: 1.0, ..bp };
        let ratio = bp.eta_ratio().unwrap();
        let h2 = bh_interaction_term(1, &BalancedParams { eta_breve: ratio, ..unit }, s);
        let series = InteractionSeries::new(vec![bh_interaction_term(0, &unit, s), h2]).unwrap();
        let sol = solve(&spec, &series, 3).unwrap();
        for n in 1..=3 {
            assert!(sol.c(n).hermiticity_defect() < 1e-10);
            assert!(sol.z(n).hermiticity_defect() < 1e-10);
            assert!(sol.c(n).commutator(&h0).unwrap().op_norm() < 1e-9 * h0.op_norm());
            for k in 0..spec.clusters().len() {
                let p = spec.projector(k);
                assert!((&p * sol.z(n) * &p).op_norm() < 1e-10);
            }
        }
        // lower-triangular recursion
        let sol1 = solve(&spec, &series, 1).unwrap();
        let trunc = solve(&spec, &series, 2).unwrap().truncated(1);
        assert_eq!(sol1.c(1), trunc.c(1));
        assert_eq!(sol1.z(1), trunc.z(1));
    }

    #[test]
    fn assembled_parts_commute() {
        let s = space();
        let bp = resonant();
        let h0 = bh_unperturbed(&bp, s);
        let spec = SpectralDecomposition::new(&h0, 1e-8).unwrap();
        let series = unit_series(&bp, s);
        let sol = solve(&spec, &series, 2).unwrap();
        let (h0n, cn) = assemble(&h0, &sol, 0.05, 2).unwrap();
        assert!(cn.commutator(&h0n).unwrap().op_norm() < 1e-10);
        let none = PerturbativeSolution {
            c: vec![Operator::zeros(s)],
            z: vec![Operator::zeros(s)],
        };
        let (h0n, _) = assemble(&h0, &none, 0.05, 1).unwrap();
        assert!((h0n - &h0).op_norm() < 1e-14);
        assert!(assemble(&h0, &sol, 0.05, 3).is_err());
    }

    /// Ladder form: in the eigenbasis, `C` keeps the entries `G_{j,j+m}` with
    /// `χ(E(j+m) − E(j)) = 1` and `Z` takes `i γ(E(j+m) − E(j)) G_{j,j+m}`.
    fn ladder_first_order(spec: &SpectralDecomposition, g: &Operator, eps: f64) -> (Operator, Operator) {
        let v = spec.eigenbasis().matrix();
        let gt = v.adjoint() * g.matrix() * v;
        let e = spec.eigenvalues();
        let dim = e.len();
        let mut c = DMatrix::<C64>::zeros(dim, dim);
        let mut z = DMatrix::<C64>::zeros(dim, dim);
        for j in 0..dim {
            c[(j, j)] = gt[(j, j)];
            for m in 1..dim - j {
                let k = j + m;
                let x = e[k] - e[j];
                c[(j, k)] = gt[(j, k)] * chi(x, eps);
                c[(k, j)] = gt[(k, j)] * chi(x, eps);
                z[(j, k)] = I * gt[(j, k)] * gamma(x, eps);
                z[(k, j)] = -I * gt[(k, j)] * gamma(x, eps);
            }
        }
        let back = |m: DMatrix<C64>| Operator::from_matrix(g.space(), v * m * v.adjoint()).unwrap();
        (back(c), back(z))
    }

    #[test]
    fn ladder_form_matches_projector_route() {
        let s = space();
        for db in [1.0, 1.618033988749895, 2.0] {
            let bp = BalancedParams::new(1.0, db, 0.0, 0.05).unwrap();
            let spec = SpectralDecomposition::new(&bh_unperturbed(&bp, s), 1e-8).unwrap();
            let series = unit_series(&bp, s);
            let sol = solve(&spec, &series, 1).unwrap();
            let (c, z) = ladder_first_order(&spec, series.term(1).unwrap(), 1e-8);
            assert!((c - sol.c(1)).op_norm() < 1e-10);
            assert!((z - sol.z(1)).op_norm() < 1e-10);
        }
    }

    #[test]
    fn degenerate_basis_rotation_is_harmless() {
        let s = space();
        let bp = resonant();
        let h0 = bh_unperturbed(&bp, s);
        let spec = SpectralDecomposition::new(&h0, 1e-8).unwrap();
        // rotate every degenerate pair by a fixed unitary
        let mut v = spec.eigenbasis().matrix().clone();
        let (c, sn) = (0.6, 0.8);
        for r in spec.clusters().iter().filter(|r| r.len() == 2) {
            let a = v.column(r.start).into_owned();
            let b = v.column(r.start + 1).into_owned();
            v.set_column(r.start, &(&a * re(c) + &b * C64::new(0.0, sn)));
            v.set_column(r.start + 1, &(&a * C64::new(0.0, sn) + &b * re(c)));
        }
        let rotated = SpectralDecomposition::from_parts(
            h0.clone(),
            spec.eigenvalues().to_vec(),
            Operator::from_matrix(s, v).unwrap(),
            1e-8,
        )
        .unwrap();
        let series = unit_series(&bp, s);
        let a = solve(&spec, &series, 2).unwrap();
        let b = solve(&rotated, &series, 2).unwrap();
        for n in 1..=2 {
            assert!((a.c(n) - b.c(n)).op_norm() < 1e-10);
            assert!((a.z(n) - b.z(n)).op_norm() < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_series_rejected() {
        let s = space();
        let a = annihilation(s);
        assert!(matches!(
            InteractionSeries::new(vec![a]),
            Err(Error::NotHermitian { .. })
        ));
    }
}
