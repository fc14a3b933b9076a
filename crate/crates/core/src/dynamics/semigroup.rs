//! Closed-form flows on the positive cone.
//!
//! For one recombinator the flow is `φ_t = e^{-ρt}·1 + (1 - e^{-ρt})·R_A`.
//! Semigroups of recombinators with pairwise disjoint stretches commute, and
//! their product solves the ODE with all those rates switched on at once.

use super::trajectory::{Method, Trajectory};
use super::{require_time, DisjointStretchSystem};
use crate::error::{Error, Result};
use crate::lattice::LinkSet;
use crate::measure::{require_positive, Measure};
use crate::recombinator::{Recombinator, POSITIVITY_TOL};

/// `φ_t(ω) = R(ω) + e^{-ρt}(ω - R(ω))`, no checks.
pub(crate) fn single_flow(omega: &Measure, r: &Recombinator, rate: f64, t: f64) -> Measure {
    if t == 0.0 {
        return omega.clone();
    }
    let ro = r.apply(omega);
    ro.lincomb(1.0, &omega.sub(&ro), (-rate * t).exp())
}

pub fn semigroup_apply(omega0: &Measure, a: LinkSet, rate: f64, t: f64) -> Result<Measure> {
    require_positive(omega0, POSITIVITY_TOL)?;
    if a.is_empty() {
        return Err(Error::domain(
            "the semigroup of the empty link set is trivial and not allowed",
        ));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::domain(format!("rate {rate} must be positive")));
    }
    require_time(t)?;
    Ok(single_flow(omega0, &Recombinator::new(a), rate, t))
}

/// `Π_i φ^{L_i}_{t_i}(ω_0)`, applying the components in system order.
pub fn product_flow_apply(omega0: &Measure, system: &DisjointStretchSystem, ts: &[f64]) -> Result<Measure> {
    let order: Vec<usize> = (0..system.len()).collect();
    product_flow_apply_ordered(omega0, system, ts, &order)
}

/// As [`product_flow_apply`] with an explicit application order (first entry
/// applied first). The result does not depend on the order.
pub fn product_flow_apply_ordered(
    omega0: &Measure,
    system: &DisjointStretchSystem,
    ts: &[f64],
    order: &[usize],
) -> Result<Measure> {
    require_positive(omega0, POSITIVITY_TOL)?;
    if ts.len() != system.len() {
        return Err(Error::domain(format!(
            "{} times for {} components",
            ts.len(),
            system.len()
        )));
    }
    let mut seen = vec![false; system.len()];
    if order.len() != system.len()
        || !order
            .iter()
            .all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
    {
        return Err(Error::domain(format!(
            "{order:?} is not a permutation of the components"
        )));
    }
    for &t in ts {
        require_time(t)?;
    }
    let comps = system.recombinators();
    Ok(order.iter().fold(omega0.clone(), |acc, &i| {
        let (r, rate) = &comps[i];
        single_flow(&acc, r, *rate, ts[i])
    }))
}

/// The closed-form solution of the system's ODE on a time grid.
pub fn product_flow_trajectory(omega0: &Measure, system: &DisjointStretchSystem, grid: &[f64]) -> Result<Trajectory> {
    let states = grid
        .iter()
        .map(|&t| product_flow_apply(omega0, system, &vec![t; system.len()]))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid.to_vec(), states, Method::ClosedForm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rk4::rk4_on_grid;
    use crate::measure::{random_probability, total_variation, tv_distance, ProductSpace};
    use crate::recombinator::recombine;
    use proptest::prelude::*;

    fn ls(n: usize, links: &[usize]) -> LinkSet {
        LinkSet::from_links(n, links).unwrap()
    }

    fn space() -> ProductSpace {
        ProductSpace::new(vec![2, 3, 2, 2]).unwrap()
    }

    #[test]
    fn semigroup_examples() {
        let w = random_probability(&space(), 3);
        let a = ls(3, &[0, 2]);
        assert_eq!(semigroup_apply(&w, a, 1.0, 0.0).unwrap(), w);
        let r = recombine(&w, a);
        assert!(tv_distance(&semigroup_apply(&w, a, 1.0, 50.0).unwrap(), &r) <= 1e-20);
        let base = tv_distance(&w, &r);
        for t in [0.1, 1.0, 3.0] {
            let d = tv_distance(&semigroup_apply(&w, a, 0.8, t).unwrap(), &r);
            let want = (-0.8 * t).exp() * base;
            assert!((d - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn semigroup_errors() {
        let w = random_probability(&space(), 3);
        assert!(semigroup_apply(&w, ls(3, &[]), 1.0, 1.0).is_err());
        assert!(semigroup_apply(&w, ls(3, &[0]), 0.0, 1.0).is_err());
        assert!(semigroup_apply(&w, ls(3, &[0]), 1.0, -1.0).is_err());
        let neg = w.lincomb(1.0, &random_probability(&space(), 4), -3.0);
        assert!(semigroup_apply(&neg, ls(3, &[0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn product_flow_examples() {
        let w = random_probability(&space(), 8);
        let sys = DisjointStretchSystem::new(3, vec![(ls(3, &[0]), 1.0), (ls(3, &[2]), 0.4)]).unwrap();
        assert_eq!(product_flow_apply(&w, &sys, &[0.0, 0.0]).unwrap(), w);
        let one = DisjointStretchSystem::new(3, vec![(ls(3, &[1, 2]), 0.7)]).unwrap();
        assert_eq!(
            product_flow_apply(&w, &one, &[1.3]).unwrap(),
            semigroup_apply(&w, ls(3, &[1, 2]), 0.7, 1.3).unwrap()
        );
        let ab = product_flow_apply_ordered(&w, &sys, &[0.7, 1.9], &[0, 1]).unwrap();
        let ba = product_flow_apply_ordered(&w, &sys, &[0.7, 1.9], &[1, 0]).unwrap();
        assert!(tv_distance(&ab, &ba) <= 1e-12);
        assert!(product_flow_apply(&w, &sys, &[1.0]).is_err());
        assert!(product_flow_apply_ordered(&w, &sys, &[1.0, 1.0], &[0, 0]).is_err());
    }

    #[test]
    fn overlapping_stretches_do_not_commute() {
        // {0, 2} and {1} violate the hypothesis; the orders then disagree
        let w = random_probability(&space(), 5);
        let r02 = Recombinator::new(ls(3, &[0, 2]));
        let r1 = Recombinator::new(ls(3, &[1]));
        let ab = single_flow(&single_flow(&w, &r02, 1.0, 0.5), &r1, 1.0, 0.5);
        let ba = single_flow(&single_flow(&w, &r1, 1.0, 0.5), &r02, 1.0, 0.5);
        assert!(tv_distance(&ab, &ba) > 1e-6);
    }

    #[test]
    fn equilibrium_bound() {
        let w = random_probability(&ProductSpace::new(vec![2, 2, 3, 2, 2]).unwrap(), 12);
        let sys = DisjointStretchSystem::new(4, vec![(ls(4, &[0, 1]), 0.6), (ls(4, &[3]), 1.5)]).unwrap();
        let limit = recombine(&w, sys.union());
        let c: f64 = sys.components().map(|(l, _)| tv_distance(&w, &recombine(&w, l))).sum();
        let rho = sys.min_rate().unwrap();
        for k in 0..=40 {
            let t = 0.25 * k as f64;
            let wt = product_flow_apply(&w, &sys, &[t, t]).unwrap();
            assert!(tv_distance(&wt, &limit) <= c * (-rho * t).exp() + 1e-15);
        }
    }

    #[test]
    fn closed_form_tracks_rk4() {
        let w = random_probability(&space(), 21);
        let sys = DisjointStretchSystem::new(3, vec![(ls(3, &[0]), 1.2), (ls(3, &[1, 2]), 0.5)]).unwrap();
        let grid: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
        let exact = product_flow_trajectory(&w, &sys, &grid).unwrap();
        let num = rk4_on_grid(&w, &sys.rate_map(), &grid, 1e-3).unwrap();
        let worst = exact.gaps(&num).unwrap().into_iter().fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst}");
        assert!(exact.max_mass_drift() <= 1e-12);
        assert!((total_variation(exact.last()) - 1.0).abs() <= 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn semigroup_law(seed in any::<u64>(), s in 0.0f64..3.0, t in 0.0f64..3.0, r1 in 0.1f64..3.0, r2 in 0.1f64..3.0) {
            let w = random_probability(&space(), seed);
            let sys = DisjointStretchSystem::new(3, vec![(ls(3, &[0, 1]), r1), (ls(3, &[2]), r2)]).unwrap();
            let direct = product_flow_apply(&w, &sys, &[s + t, s + t]).unwrap();
            let first = product_flow_apply(&w, &sys, &[s, s]).unwrap();
            let composed = product_flow_apply(&first, &sys, &[t, t]).unwrap();
            prop_assert!(tv_distance(&direct, &composed) <= 1e-11);
            prop_assert!(direct.min_weight() >= 0.0);
            prop_assert!((direct.mass() - 1.0).abs() <= 1e-12);
        }
    }
}
