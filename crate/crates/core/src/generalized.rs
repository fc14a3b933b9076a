//! Flows of operators with `𝓡^{n+1} = 𝓡` built from root-of-unity filtered
//! exponential series.
//!
//! `G^(n)_k(t) = (1/n) Σ_{m<n} ξ^{mk} e^{ξ^m t}` with `ξ = e^{2πi/n}` keeps the
//! terms `t^j/j!` of the exponential series with `j ≡ -k (mod n)`. The flow
//!
//! ```text
//! φ_τ = e^{-τ} (1 + (G_0(τ) - 1) 𝓡^n + Σ_{k=1}^{n-1} G_{n-k}(τ) 𝓡^k)
//! ```
//!
//! solves `x' = (𝓡 - 1)(x)` whenever `𝓡` commutes with `φ_τ`. The concrete
//! operator here is `𝓡 = σ ∘ R_A`, where `σ` relabels the alphabet of the first
//! block of `A`'s partition by a permutation `g` with `g^n = id`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{partition_of, LinkSet};
use crate::measure::{require_positive, tv_distance, Measure, ProductSpace};
use crate::recombinator::{Recombinator, POSITIVITY_TOL};

/// Imaginary parts of the scaled root-of-unity sums above this are an error.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Precomputed roots of unity for one order `n`.
#[derive(Clone, Debug)]
pub struct GFunTable {
    n: usize,
    roots: Vec<Complex64>,
    // ξ^m - 1, with the real part as -2 sin²(πm/n) to avoid cancellation
    shifted: Vec<Complex64>,
}

impl GFunTable {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("G-functions need order n ≥ 2, got {n}")));
        }
        let roots = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
            .collect();
        let shifted = (0..n)
            .map(|m| {
                let half = PI * m as f64 / n as f64;
                Complex64::new(-2.0 * half.sin().powi(2), (2.0 * half).sin())
            })
            .collect();
        Ok(Self { n, roots, shifted })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// `e^{-t} G^(n)_k(t)`, evaluated without overflow for large `t`.
    pub fn eval_scaled(&self, k: i64, t: f64) -> Result<f64> {
        let n = self.n;
        let k = k.rem_euclid(n as i64) as usize;
        let sum: Complex64 = (0..n)
            .map(|m| self.roots[(m * k) % n] * (self.shifted[m] * t).exp())
            .sum::<Complex64>()
            / n as f64;
        if sum.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue(sum.im.abs()));
        }
        Ok(sum.re)
    }

    /// `G^(n)_k(t)`.
    pub fn eval(&self, k: i64, t: f64) -> Result<f64> {
        Ok(t.exp() * self.eval_scaled(k, t)?)
    }
}

pub fn gfun(n: usize, k: i64, t: f64) -> Result<f64> {
    GFunTable::new(n)?.eval(k, t)
}

/// `|e^{-t} G^(n)_k(t) - 1/n|`.
pub fn gfun_asymptotic_check(n: usize, k: i64, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("time {t} must be finite and nonnegative")));
    }
    Ok((GFunTable::new(n)?.eval_scaled(k, t)? - 1.0 / n as f64).abs())
}

/// `|(G_k(t+h) - G_k(t-h))/2h - G_{k+1}(t)| / max(1, G_{k+1}(t))`, the
/// central-difference residual of `G_k' = G_{k+1}`.
pub fn gfun_derivative_residual(n: usize, k: i64, t: f64, h: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("difference step {h} must be positive")));
    }
    let table = GFunTable::new(n)?;
    let fd = (table.eval(k, t + h)? - table.eval(k, t - h)?) / (2.0 * h);
    let want = table.eval(k + 1, t)?;
    Ok((fd - want).abs() / want.abs().max(1.0))
}

/// Coefficients `c_0..=c_n` of `φ_τ = Σ_k c_k 𝓡^k` (with `𝓡^0 = 1`).
pub fn generalized_coefficients(n: usize, tau: f64) -> Result<Vec<f64>> {
    coefficients_with(&GFunTable::new(n)?, tau)
}

fn coefficients_with(table: &GFunTable, tau: f64) -> Result<Vec<f64>> {
    let n = table.order();
    let decay = (-tau).exp();
    let mut c = Vec::with_capacity(n + 1);
    c.push(decay);
    for k in 1..n {
        c.push(table.eval_scaled((n - k) as i64, tau)?);
    }
    c.push(table.eval_scaled(0, tau)? - decay);
    Ok(c)
}

/// `𝓡 = σ ∘ R_A` with `σ` the relabeling of the first block's alphabet by `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicOperator {
    recombinator: Recombinator,
    space: ProductSpace,
    perm: Vec<usize>,
    order: usize,
    inner: usize,
}

impl CyclicOperator {
    /// `perm[a]` is the image of the first-block state `a` (flat index over
    /// that block's nodes); `perm^order` must be the identity.
    pub fn new(space: &ProductSpace, links: LinkSet, perm: Vec<usize>, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::domain(format!("cyclic order must be at least 2, got {order}")));
        }
        let partition = partition_of(links, space.n_nodes())?;
        let first = partition.blocks()[0].clone();
        let block_states = space.block_states(first.clone());
        if perm.len() != block_states {
            return Err(Error::domain(format!(
                "permutation has {} entries, the first block has {block_states} states",
                perm.len()
            )));
        }
        let mut seen = vec![false; block_states];
        for &p in &perm {
            if p >= block_states || std::mem::replace(&mut seen[p], true) {
                return Err(Error::domain(format!("{perm:?} is not a permutation")));
            }
        }
        let powered = (0..block_states)
            .map(|a| (0..order).fold(a, |x, _| perm[x]))
            .collect::<Vec<_>>();
        if powered.iter().enumerate().any(|(a, &b)| a != b) {
            return Err(Error::domain(format!(
                "permutation {perm:?} raised to {order} is not the identity"
            )));
        }
        Ok(Self {
            recombinator: Recombinator::new(links),
            space: space.clone(),
            perm,
            order,
            inner: space.block_states(first.end..space.n_nodes()),
        })
    }

    /// The identity relabeling, which makes `𝓡 = R_A` idempotent.
    pub fn identity(space: &ProductSpace, links: LinkSet, order: usize) -> Result<Self> {
        let partition = partition_of(links, space.n_nodes())?;
        let states = space.block_states(partition.blocks()[0].clone());
        Self::new(space, links, (0..states).collect(), order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn links(&self) -> LinkSet {
        self.recombinator.links()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn check_measure(&self, omega: &Measure) -> Result<()> {
        if !omega.is_full() || omega.space() != &self.space {
            return Err(Error::domain("measure does not live on the operator's space"));
        }
        Ok(())
    }

    /// Pushforward of `ω` under `σ^k`.
    fn relabel(&self, omega: &Measure, k: usize) -> Measure {
        let k = k % self.order;
        if k == 0 {
            return omega.clone();
        }
        let map: Vec<usize> = (0..self.perm.len())
            .map(|a| (0..k).fold(a, |x, _| self.perm[x]))
            .collect();
        let w = omega.weights();
        let mut out = vec![0.0; w.len()];
        for (a, &ga) in map.iter().enumerate() {
            let (src, dst) = (a * self.inner, ga * self.inner);
            out[dst..dst + self.inner].copy_from_slice(&w[src..src + self.inner]);
        }
        omega.with_weights(out)
    }

    /// `𝓡(ω) = σ(R_A(ω))`, no positivity check. Panics if `ω` does not live
    /// on the operator's space.
    pub fn apply(&self, omega: &Measure) -> Measure {
        self.relabel(&self.recombinator.apply(omega), 1)
    }

    /// `[ω, 𝓡ω, .., 𝓡^n ω]` using `𝓡^k = σ^k ∘ R_A`.
    fn powers(&self, omega: &Measure) -> Vec<Measure> {
        let r = self.recombinator.apply(omega);
        let mut out = Vec::with_capacity(self.order + 1);
        out.push(omega.clone());
        out.extend((1..=self.order).map(|k| self.relabel(&r, k)));
        out
    }

    /// `(1/n) Σ_{k=1}^n 𝓡^k(ω)`, the long-time limit of the flow.
    pub fn limit(&self, omega: &Measure) -> Result<Measure> {
        require_positive(omega, POSITIVITY_TOL)?;
        self.check_measure(omega)?;
        let p = self.powers(omega);
        Ok(combine(&p[1..], &vec![1.0 / self.order as f64; self.order]))
    }
}

fn combine(terms: &[Measure], coeffs: &[f64]) -> Measure {
    let mut out = terms[0].scaled(coeffs[0]);
    for (m, &c) in terms.iter().zip(coeffs).skip(1) {
        out.axpy(c, m);
    }
    out
}

/// `𝓡^k(ω)`; `k = 0` returns `ω`.
pub fn cyclic_apply(omega: &Measure, op: &CyclicOperator, k: usize) -> Result<Measure> {
    require_positive(omega, POSITIVITY_TOL)?;
    op.check_measure(omega)?;
    if k == 0 {
        return Ok(omega.clone());
    }
    Ok(op.relabel(&op.recombinator.apply(omega), k))
}

fn require_rate_time(rate: f64, t: f64) -> Result<()> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::domain(format!("rate {rate} must be finite and nonnegative")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("time {t} must be finite and nonnegative")));
    }
    Ok(())
}

/// `φ_{ρt}(ω_0)`; the rate enters as the time scale `τ = ρt`.
pub fn generalized_flow_apply(omega0: &Measure, op: &CyclicOperator, rate: f64, t: f64) -> Result<Measure> {
    require_positive(omega0, POSITIVITY_TOL)?;
    op.check_measure(omega0)?;
    require_rate_time(rate, t)?;
    if rate * t == 0.0 {
        return Ok(omega0.clone());
    }
    let c = generalized_coefficients(op.order, rate * t)?;
    Ok(combine(&op.powers(omega0), &c))
}

/// `‖𝓡(φ_t(ω_0)) - φ_t(𝓡(ω_0))‖`.
pub fn check_flow_commutation(omega0: &Measure, op: &CyclicOperator, rate: f64, t: f64) -> Result<f64> {
    let flowed = generalized_flow_apply(omega0, op, rate, t)?;
    let lhs = op.apply(&flowed);
    let rhs = generalized_flow_apply(&op.apply(omega0), op, rate, t)?;
    Ok(tv_distance(&lhs, &rhs))
}

/// Largest `‖(x(t+h) - x(t-h))/2h - ρ(𝓡 - 1)(x(t))‖` over `grid`, where
/// `x(t) = φ_{ρt}(ω_0)`. Near `t = 0` the backward point uses the closed form
/// at negative time, which is the analytic continuation of the same formula.
pub fn check_generalized_ode(omega0: &Measure, op: &CyclicOperator, rate: f64, grid: &[f64], h_fd: f64) -> Result<f64> {
    require_positive(omega0, POSITIVITY_TOL)?;
    op.check_measure(omega0)?;
    if !(h_fd.is_finite() && h_fd > 0.0) {
        return Err(Error::domain(format!("difference step {h_fd} must be positive")));
    }
    let table = GFunTable::new(op.order)?;
    let powers = op.powers(omega0);
    let at = |t: f64| -> Result<Measure> { Ok(combine(&powers, &coefficients_with(&table, rate * t)?)) };
    let mut worst = 0.0f64;
    for &t in grid {
        require_rate_time(rate, t)?;
        let fd = at(t + h_fd)?.lincomb(1.0 / (2.0 * h_fd), &at(t - h_fd)?, -1.0 / (2.0 * h_fd));
        let x = at(t)?;
        let rhs = op.apply(&x).lincomb(rate, &x, -rate);
        worst = worst.max(tv_distance(&fd, &rhs));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::semigroup_apply;
    use crate::measure::{marginal, random_probability, tensor, total_variation};
    use crate::recombinator::recombine;
    use approx::assert_abs_diff_eq;

    fn series(n: usize, k: usize, t: f64) -> f64 {
        // δ_{k,0} + Σ_{m≥1} t^{mn-k}/(mn-k)!, summed term by term
        let mut total = if k == 0 { 1.0 } else { 0.0 };
        let mut term = 1.0; // t^j / j!
        for j in 1..400 {
            term *= t / j as f64;
            if (j + k).is_multiple_of(n) {
                total += term;
            }
        }
        total
    }

    fn ls(n: usize, links: &[usize]) -> LinkSet {
        LinkSet::from_links(n, links).unwrap()
    }

    #[test]
    fn gfun_matches_series_and_hyperbolics() {
        for n in 2..=7 {
            for k in 0..n {
                for t in [0.0, 0.3, 1.0, 2.5, 7.0] {
                    let got = gfun(n, k as i64, t).unwrap();
                    let want = series(n, k, t);
                    assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "n={n} k={k} t={t}");
                }
            }
        }
        for t in [0.0, 0.5, 3.0, 10.0] {
            assert!((gfun(2, 0, t).unwrap() - t.cosh()).abs() <= 1e-12 * t.cosh());
            assert!((gfun(2, 1, t).unwrap() - t.sinh()).abs() <= 1e-12 * t.sinh());
        }
        // index is taken mod n
        assert_eq!(gfun(3, 4, 1.2).unwrap(), gfun(3, 1, 1.2).unwrap());
        assert_eq!(gfun(3, -1, 1.2).unwrap(), gfun(3, 2, 1.2).unwrap());
        assert!(gfun(1, 0, 1.0).is_err());
    }

    #[test]
    fn gfun_elementary_properties() {
        for n in 2..=6 {
            for k in 0..n as i64 {
                assert_abs_diff_eq!(
                    gfun(n, k, 0.0).unwrap(),
                    if k == 0 { 1.0 } else { 0.0 },
                    epsilon = 1e-15
                );
            }
            for t in [0.1, 1.0, 5.0, 20.0] {
                let s: f64 = (0..n as i64).map(|k| gfun(n, k, t).unwrap()).sum();
                assert!((s - t.exp()).abs() <= 1e-10 * t.exp());
            }
        }
    }

    #[test]
    fn derivative_recurrence() {
        for n in 2..=6 {
            for k in 0..n as i64 {
                for t in [0.0, 0.5, 2.0, 8.0] {
                    assert!(gfun_derivative_residual(n, k, t, 1e-4).unwrap() <= 1e-6);
                }
            }
        }
        let r1 = gfun_derivative_residual(3, 1, 4.0, 1e-2).unwrap();
        let r2 = gfun_derivative_residual(3, 1, 4.0, 5e-3).unwrap();
        assert!((3.5..=4.5).contains(&(r1 / r2)), "{}", r1 / r2);
        assert!(gfun_derivative_residual(3, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        assert!(gfun_asymptotic_check(2, 0, 20.0).unwrap() <= 1e-17);
        let bound = ((2.0 * PI / 3.0).cos() - 1.0) * 30.0;
        assert!(bound.exp() <= 1e-6);
        for k in 0..3 {
            assert!(gfun_asymptotic_check(3, k, 30.0).unwrap() <= 1e-6);
        }
        assert!(gfun_asymptotic_check(4, 0, 0.0).unwrap() <= 1.0);
    }

    #[test]
    fn three_term_coefficients() {
        // 𝓡^3 = 𝓡 is order 2 here: terms 1, 𝓡, 𝓡²
        for t in [0.0, 0.2, 1.0, 4.0] {
            let c = generalized_coefficients(2, t).unwrap();
            let e = (-t).exp();
            assert_abs_diff_eq!(c[0], e, epsilon = 1e-12);
            assert_abs_diff_eq!(c[1], e * t.sinh(), epsilon = 1e-12);
            assert_abs_diff_eq!(c[2], e * (t.cosh() - 1.0), epsilon = 1e-12);
            assert_abs_diff_eq!(c[1], 0.5 * (1.0 + e) * (1.0 - e), epsilon = 1e-12);
            assert_abs_diff_eq!(c[2], 0.5 * (1.0 - e).powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(c.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    fn three_cycle() -> (ProductSpace, CyclicOperator) {
        let s = ProductSpace::new(vec![3, 2]).unwrap();
        let op = CyclicOperator::new(&s, ls(1, &[0]), vec![1, 2, 0], 3).unwrap();
        (s, op)
    }

    #[test]
    fn cyclic_apply_examples() {
        let (s, op) = three_cycle();
        let x0 = Measure::new(ProductSpace::new(vec![3]).unwrap(), vec![0.5, 0.3, 0.2]).unwrap();
        let x1 = Measure::on_nodes(ProductSpace::new(vec![2]).unwrap(), vec![1], vec![0.6, 0.4]).unwrap();
        // a correlated measure with these marginals
        let mut w = tensor(&[x0, x1.clone()]).unwrap();
        w.weights_mut()[0] += 0.05;
        w.weights_mut()[1] -= 0.05;
        w.weights_mut()[2] -= 0.05;
        w.weights_mut()[3] += 0.05;
        let r1 = cyclic_apply(&w, &op, 1).unwrap();
        let m0 = marginal(&r1, &[0]).unwrap();
        for (a, b) in m0.weights().iter().zip([0.2, 0.5, 0.3]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let expected = tensor(&[
            Measure::new(ProductSpace::new(vec![3]).unwrap(), vec![0.2, 0.5, 0.3]).unwrap(),
            x1,
        ])
        .unwrap();
        assert!(tv_distance(&r1, &expected) <= 1e-15);

        assert_eq!(cyclic_apply(&w, &op, 0).unwrap(), w);
        assert!(tv_distance(&cyclic_apply(&w, &op, 3).unwrap(), &recombine(&w, ls(1, &[0]))) <= 1e-15);
        assert!(tv_distance(&cyclic_apply(&w, &op, 4).unwrap(), &r1) <= 1e-15);

        let id = CyclicOperator::identity(&s, ls(1, &[0]), 3).unwrap();
        for k in 1..5 {
            assert_eq!(cyclic_apply(&w, &id, k).unwrap(), recombine(&w, ls(1, &[0])));
        }
        let neg = w.lincomb(1.0, &random_probability(&s, 1), -2.0);
        assert!(cyclic_apply(&neg, &op, 1).is_err());
    }

    #[test]
    fn operator_validation() {
        let s = ProductSpace::new(vec![3, 2]).unwrap();
        assert!(CyclicOperator::new(&s, ls(1, &[0]), vec![1, 2, 0], 2).is_err());
        assert!(CyclicOperator::new(&s, ls(1, &[0]), vec![1, 1, 0], 3).is_err());
        assert!(CyclicOperator::new(&s, ls(1, &[0]), vec![1, 0], 2).is_err());
        assert!(CyclicOperator::new(&s, ls(1, &[0]), vec![0, 1, 2], 1).is_err());
        // g need not have exact order n
        assert!(CyclicOperator::new(&s, ls(1, &[0]), vec![1, 0, 2], 4).is_ok());
        // first block spanning two nodes
        let s3 = ProductSpace::new(vec![2, 2, 3]).unwrap();
        let op = CyclicOperator::new(&s3, ls(2, &[1]), vec![1, 2, 3, 0], 4).unwrap();
        let w = random_probability(&s3, 3);
        let r5 = cyclic_apply(&w, &op, 5).unwrap();
        assert!(tv_distance(&r5, &cyclic_apply(&w, &op, 1).unwrap()) <= 1e-12);
    }

    #[test]
    fn flow_examples() {
        let (s, op) = three_cycle();
        let w = random_probability(&s, 17);
        assert!(tv_distance(&generalized_flow_apply(&w, &op, 1.0, 0.0).unwrap(), &w) <= 1e-15);

        let id2 = CyclicOperator::identity(&s, ls(1, &[0]), 2).unwrap();
        let a = generalized_flow_apply(&w, &id2, 1.0, 0.7).unwrap();
        let b = semigroup_apply(&w, ls(1, &[0]), 1.0, 0.7).unwrap();
        assert!(tv_distance(&a, &b) <= 1e-12);

        for t in [0.1, 1.0, 5.0] {
            assert!(check_flow_commutation(&w, &op, 1.0, t).unwrap() <= 1e-10);
            let x = generalized_flow_apply(&w, &op, 1.3, t).unwrap();
            assert!((x.mass() - 1.0).abs() <= 1e-12);
            assert!(x.min_weight() >= -1e-15);
        }
        assert_eq!(check_flow_commutation(&w, &op, 1.0, 0.0).unwrap(), 0.0);
        assert!(check_flow_commutation(&w, &id2, 1.0, 2.0).unwrap() <= 1e-12);
        assert!(generalized_flow_apply(&w, &op, -1.0, 1.0).is_err());
    }

    #[test]
    fn ode_residual_is_second_order() {
        let (s, op) = three_cycle();
        let w = random_probability(&s, 4);
        let grid: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
        assert!(check_generalized_ode(&w, &op, 1.0, &grid, 1e-3).unwrap() <= 1e-6);
        let r1 = check_generalized_ode(&w, &op, 1.0, &grid, 1e-2).unwrap();
        let r2 = check_generalized_ode(&w, &op, 1.0, &grid, 5e-3).unwrap();
        assert!((3.5..=4.5).contains(&(r1 / r2)), "{}", r1 / r2);

        let id2 = CyclicOperator::identity(&s, ls(1, &[0]), 2).unwrap();
        let r1 = check_generalized_ode(&w, &id2, 1.0, &grid, 1e-2).unwrap();
        let r2 = check_generalized_ode(&w, &id2, 1.0, &grid, 5e-3).unwrap();
        assert!((3.5..=4.5).contains(&(r1 / r2)), "{}", r1 / r2);

        assert!(check_generalized_ode(&w, &op, 0.0, &grid, 1e-3).unwrap() <= 1e-14);
    }

    #[test]
    fn long_time_limit() {
        for (n, perm) in [
            (2usize, vec![1, 0, 2]),
            (3, vec![1, 2, 0]),
            (4, vec![1, 0, 2]),
            (6, vec![1, 2, 0]),
        ] {
            let s = ProductSpace::new(vec![3, 2, 2]).unwrap();
            let op = CyclicOperator::new(&s, ls(2, &[0]), perm, n).unwrap();
            let w = random_probability(&s, n as u64);
            let lim = op.limit(&w).unwrap();
            let rate = 0.8;
            let decay = (1.0f64).min(1.0 - (2.0 * PI / n as f64).cos());
            let c = (n + 1) as f64 * total_variation(&w);
            for k in 0..=40 {
                let t = 0.5 * k as f64;
                let d = tv_distance(&generalized_flow_apply(&w, &op, rate, t).unwrap(), &lim);
                assert!(d <= c * (-decay * rate * t).exp() + 1e-14, "n={n} t={t}");
            }
        }
    }
}
