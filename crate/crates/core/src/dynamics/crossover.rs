//! Single crossovers at every link: the coefficient expansion of the flow
//! and its Möbius linearization.
//!
//! With rates `ρ_α` on the singletons `{α}` the solution is
//! `ω_t = Σ_G a_G(t) R_G(ω_0)` with
//! `a_G(t) = Π_{α∉G} e^{-ρ_α t} · Π_{β∈G} (1 - e^{-ρ_β t})`.
//! The alternating superset sums `T_G = Σ_{H⊇G} (-1)^{|H-G|} R_H` turn the
//! flow into decoupled linear decays `T_G(ω_t) = e^{-t Σ_{α∉G} ρ_α} T_G(ω_0)`.

use super::trajectory::{Method, Trajectory};
use super::{require_time, LinkRates};
use crate::error::{Error, Result};
use crate::lattice::{moebius_sign, LinkSet};
use crate::measure::{require_positive, tv_distance, Measure};
use crate::recombinator::{recombine, POSITIVITY_TOL};

fn check_links(g: LinkSet, rates: &LinkRates) -> Result<()> {
    if g.n_links() != rates.n_links() {
        return Err(Error::LinkCountMismatch(g.n_links(), rates.n_links()));
    }
    Ok(())
}

fn coefficient_a_unchecked(g: LinkSet, rates: &LinkRates, t: f64) -> f64 {
    rates
        .rates()
        .iter()
        .enumerate()
        .map(|(l, &r)| {
            if g.contains(l) {
                -(-r * t).exp_m1()
            } else {
                (-r * t).exp()
            }
        })
        .product()
}

/// `a_G(t)`: probability that exactly the links of `G` have crossed over by
/// time `t`.
pub fn coefficient_a(g: LinkSet, rates: &LinkRates, t: f64) -> Result<f64> {
    check_links(g, rates)?;
    require_time(t)?;
    Ok(coefficient_a_unchecked(g, rates, t))
}

/// `b_G(t) = Σ_{H⊆G} a_H(t)`.
pub fn coefficient_b(g: LinkSet, rates: &LinkRates, t: f64) -> Result<f64> {
    check_links(g, rates)?;
    require_time(t)?;
    Ok(g.subsets().map(|h| coefficient_a_unchecked(h, rates, t)).sum())
}

/// `Σ_G a_G(t) R_G(ω_0)`.
pub fn crossover_solution(omega0: &Measure, rates: &LinkRates, t: f64) -> Result<Measure> {
    require_positive(omega0, POSITIVITY_TOL)?;
    require_time(t)?;
    let n = rates.n_links();
    if omega0.space().n_links() != n {
        return Err(Error::LinkCountMismatch(omega0.space().n_links(), n));
    }
    let mut out = omega0.with_weights(vec![0.0; omega0.weights().len()]);
    for g in LinkSet::all_subsets(n)? {
        let a = coefficient_a_unchecked(g, rates, t);
        if a != 0.0 {
            out.axpy(a, &recombine(omega0, g));
        }
    }
    Ok(out)
}

pub fn crossover_trajectory(omega0: &Measure, rates: &LinkRates, grid: &[f64]) -> Result<Trajectory> {
    let states = grid
        .iter()
        .map(|&t| crossover_solution(omega0, rates, t))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid.to_vec(), states, Method::CrossoverExpansion)
}

/// `T_G(ω) = Σ_{H⊇G} (-1)^{|H-G|} R_H(ω)`, a signed measure.
pub fn moebius_t(omega: &Measure, g: LinkSet) -> Result<Measure> {
    require_positive(omega, POSITIVITY_TOL)?;
    if omega.space().n_links() != g.n_links() {
        return Err(Error::LinkCountMismatch(omega.space().n_links(), g.n_links()));
    }
    let mut out = omega.with_weights(vec![0.0; omega.weights().len()]);
    for h in g.supersets() {
        out.axpy(f64::from(moebius_sign(g, h)?), &recombine(omega, h));
    }
    Ok(out)
}

/// All `T_G(ω)` at once, indexed by `G.bits()`, via the in-place superset
/// difference transform (one pass per link).
pub fn moebius_transform_all(omega: &Measure) -> Result<Vec<Measure>> {
    require_positive(omega, POSITIVITY_TOL)?;
    let n = omega.space().n_links();
    let mut table: Vec<Measure> = LinkSet::all_subsets(n)?.map(|h| recombine(omega, h)).collect();
    for link in 0..n {
        let bit = 1usize << link;
        for g in 0..table.len() {
            if g & bit == 0 {
                let upper = table[g | bit].clone();
                table[g].axpy(-1.0, &upper);
            }
        }
    }
    Ok(table)
}

/// Largest `‖T_G(ω_t) - e^{-t Σ_{α∉G} ρ_α} T_G(ω_0)‖` over `times`, with
/// `ω_t` from [`crossover_solution`].
pub fn check_linearization(omega0: &Measure, rates: &LinkRates, g: LinkSet, times: &[f64]) -> Result<f64> {
    check_links(g, rates)?;
    let t0 = moebius_t(omega0, g)?;
    let decay = rates.sum_over(g.complement());
    let mut worst = 0.0f64;
    for &t in times {
        let wt = crossover_solution(omega0, rates, t)?;
        let tt = moebius_t(&wt, g)?;
        worst = worst.max(tv_distance(&tt, &t0.scaled((-decay * t).exp())));
    }
    Ok(worst)
}
