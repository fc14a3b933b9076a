//! The recombination equation `ω' = Σ_G ρ_G (R_G - 1)(ω)` and its solutions.
//!
//! [`rk4`] integrates the equation numerically for any rate map. The
//! closed forms live in [`semigroup`] (single recombinator and commuting
//! disjoint-stretch products) and [`crossover`] (all single crossovers, the
//! coefficient expansion and the Möbius linearization).

pub mod crossover;
pub mod rk4;
pub mod semigroup;
pub mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{stretches_disjoint, LinkSet, MAX_LINKS};
use crate::measure::Measure;
use crate::recombinator::Recombinator;

pub use crossover::{
    check_linearization, coefficient_a, coefficient_b, crossover_solution, crossover_trajectory, moebius_t,
    moebius_transform_all,
};
pub use rk4::{integrate_rk4, rk4_integrate, rk4_on_grid};
pub use semigroup::{product_flow_apply, product_flow_apply_ordered, product_flow_trajectory, semigroup_apply};
pub use trajectory::{Method, Trajectory};

/// Rates `G ↦ ρ_G ≥ 0` over nonempty link sets.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMap {
    n_links: usize,
    entries: Vec<(Recombinator, f64)>,
}

impl RateMap {
    pub fn new(n_links: usize, entries: impl IntoIterator<Item = (LinkSet, f64)>) -> Result<Self> {
        if n_links > MAX_LINKS {
            return Err(Error::TooManyLinks(n_links));
        }
        let mut list: Vec<(LinkSet, f64)> = entries.into_iter().collect();
        for &(g, rate) in &list {
            if g.n_links() != n_links {
                return Err(Error::LinkCountMismatch(g.n_links(), n_links));
            }
            if g.is_empty() {
                return Err(Error::domain(
                    "a rate on the empty link set has no effect and is not allowed",
                ));
            }
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::domain(format!(
                    "rate {rate} for {g:?} must be finite and nonnegative"
                )));
            }
        }
        list.sort_by_key(|(g, _)| g.bits());
        if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::domain(format!("duplicate rate for {:?}", w[0].0)));
        }
        Ok(Self {
            n_links,
            entries: list.into_iter().map(|(g, r)| (Recombinator::new(g), r)).collect(),
        })
    }

    pub fn empty(n_links: usize) -> Result<Self> {
        Self::new(n_links, [])
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn entries(&self) -> impl Iterator<Item = (LinkSet, f64)> + '_ {
        self.entries.iter().map(|(r, rate)| (r.links(), *rate))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The same rates as a commuting product of semigroups, if the stretches
    /// of all positive-rate entries are pairwise disjoint.
    pub fn to_disjoint_stretch_system(&self) -> Result<DisjointStretchSystem> {
        DisjointStretchSystem::new(self.n_links, self.entries().filter(|&(_, rate)| rate > 0.0).collect())
    }
}

impl From<&LinkRates> for RateMap {
    fn from(rates: &LinkRates) -> Self {
        let n = rates.n_links();
        RateMap::new(
            n,
            rates
                .rates()
                .iter()
                .enumerate()
                .map(|(l, &r)| (LinkSet::singleton(n, l).expect("link in range"), r)),
        )
        .expect("link rates are valid rate map entries")
    }
}

/// `Φ(ω) = Σ_G ρ_G (R_G(ω) - ω)`.
pub fn vector_field(omega: &Measure, rates: &RateMap) -> Measure {
    let mut out = omega.with_weights(vec![0.0; omega.weights().len()]);
    for (r, rate) in &rates.entries {
        if *rate == 0.0 {
            continue;
        }
        out.axpy(*rate, &r.apply(omega));
        out.axpy(-*rate, omega);
    }
    out
}

/// Components `(L_i, ρ_i)` whose stretches are pairwise disjoint, so that
/// their single-recombinator semigroups commute.
#[derive(Clone, Debug, PartialEq)]
pub struct DisjointStretchSystem {
    n_links: usize,
    components: Vec<(Recombinator, f64)>,
}

impl DisjointStretchSystem {
    pub fn new(n_links: usize, components: Vec<(LinkSet, f64)>) -> Result<Self> {
        if n_links > MAX_LINKS {
            return Err(Error::TooManyLinks(n_links));
        }
        for (i, &(li, rate)) in components.iter().enumerate() {
            if li.n_links() != n_links {
                return Err(Error::LinkCountMismatch(li.n_links(), n_links));
            }
            if li.is_empty() {
                return Err(Error::domain(format!("component {i} has an empty link set")));
            }
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::domain(format!("component {i} has nonpositive rate {rate}")));
            }
            for (j, &(lj, _)) in components.iter().enumerate().take(i) {
                if !stretches_disjoint(li, lj) {
                    return Err(Error::domain(format!(
                        "stretches of components {j} ({lj:?}) and {i} ({li:?}) overlap"
                    )));
                }
            }
        }
        Ok(Self {
            n_links,
            components: components.into_iter().map(|(l, r)| (Recombinator::new(l), r)).collect(),
        })
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (LinkSet, f64)> + '_ {
        self.components.iter().map(|(r, rate)| (r.links(), *rate))
    }

    pub(crate) fn recombinators(&self) -> &[(Recombinator, f64)] {
        &self.components
    }

    /// `A = ∪ L_i`, the cut set of the equilibrium.
    pub fn union(&self) -> LinkSet {
        self.components().fold(
            LinkSet::empty(self.n_links).expect("valid link count"),
            |acc, (l, _)| acc.union(l).expect("same link count"),
        )
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.components().map(|(_, r)| r).reduce(f64::min)
    }

    /// The rate map of the equivalent ODE.
    pub fn rate_map(&self) -> RateMap {
        RateMap::new(self.n_links, self.components()).expect("components are valid rate entries")
    }
}

/// Strictly positive per-link crossover rates `ρ_α`, indexed by link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LinkRates(Vec<f64>);

impl LinkRates {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.len() > MAX_LINKS {
            return Err(Error::TooManyLinks(rates.len()));
        }
        if let Some((l, r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::domain(format!(
                "crossover rate {r} at link {l} must be positive"
            )));
        }
        Ok(Self(rates))
    }

    pub fn n_links(&self) -> usize {
        self.0.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    /// `Σ_{α ∈ S} ρ_α`.
    pub fn sum_over(&self, s: LinkSet) -> f64 {
        s.links().map(|l| self.0[l]).sum()
    }

    /// The singleton components `({α}, ρ_α)`.
    pub fn singleton_system(&self) -> DisjointStretchSystem {
        let n = self.n_links();
        DisjointStretchSystem::new(
            n,
            self.0
                .iter()
                .enumerate()
                .map(|(l, &r)| (LinkSet::singleton(n, l).expect("link in range"), r))
                .collect(),
        )
        .expect("singletons have disjoint stretches")
    }
}

impl TryFrom<Vec<f64>> for LinkRates {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        LinkRates::new(v)
    }
}

impl From<LinkRates> for Vec<f64> {
    fn from(r: LinkRates) -> Self {
        r.0
    }
}

pub(crate) fn require_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("time {t} must be finite and nonnegative")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{random_probability, tensor, total_variation, ProductSpace};
    use crate::recombinator::recombine;
    use approx::assert_abs_diff_eq;

    fn ls(n: usize, links: &[usize]) -> LinkSet {
        LinkSet::from_links(n, links).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let s = ProductSpace::new(vec![2, 2]).unwrap();
        let w = Measure::new(s.clone(), vec![0.5, 0.2, 0.1, 0.2]).unwrap();
        let rates = RateMap::new(1, [(ls(1, &[0]), 1.0)]).unwrap();
        let f = vector_field(&w, &rates);
        for (x, y) in f.weights().iter().zip([-0.08, 0.08, 0.08, -0.08]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
        assert!(vector_field(&w, &RateMap::empty(1).unwrap())
            .weights()
            .iter()
            .all(|&x| x == 0.0));

        let s3 = ProductSpace::new(vec![2, 3, 2]).unwrap();
        let p = recombine(&random_probability(&s3, 4), LinkSet::full(2).unwrap());
        let rates = RateMap::new(2, [(ls(2, &[0]), 0.7), (ls(2, &[0, 1]), 2.0), (ls(2, &[1]), 0.1)]).unwrap();
        assert!(total_variation(&vector_field(&p, &rates)) <= 1e-15);
    }

    #[test]
    fn vector_field_conserves_mass_on_positives() {
        let s = ProductSpace::new(vec![3, 2, 2, 2]).unwrap();
        let rates = RateMap::new(
            3,
            LinkSet::all_subsets(3)
                .unwrap()
                .skip(1)
                .map(|g| (g, 0.1 * g.bits() as f64)),
        )
        .unwrap();
        for seed in 0..10 {
            let f = vector_field(&random_probability(&s, seed), &rates);
            assert!(f.mass().abs() <= 1e-14);
        }
    }

    #[test]
    fn rate_map_validation() {
        assert!(RateMap::new(2, [(ls(2, &[]), 1.0)]).is_err());
        assert!(RateMap::new(2, [(ls(2, &[0]), -1.0)]).is_err());
        assert!(RateMap::new(2, [(ls(2, &[0]), f64::NAN)]).is_err());
        assert!(RateMap::new(2, [(ls(2, &[0]), 1.0), (ls(2, &[0]), 2.0)]).is_err());
        assert!(RateMap::new(2, [(ls(3, &[0]), 1.0)]).is_err());
        let ok = RateMap::new(2, [(ls(2, &[1]), 1.0), (ls(2, &[0]), 0.0)]).unwrap();
        assert_eq!(ok.entries().map(|(g, _)| g.bits()).collect::<Vec<_>>(), vec![1, 2]);
        // zero-rate entry is dropped when converting
        assert_eq!(ok.to_disjoint_stretch_system().unwrap().len(), 1);
    }

    #[test]
    fn disjoint_stretch_validation() {
        assert!(DisjointStretchSystem::new(3, vec![(ls(3, &[0, 2]), 1.0), (ls(3, &[1]), 1.0)]).is_err());
        assert!(DisjointStretchSystem::new(3, vec![(ls(3, &[0]), 0.0)]).is_err());
        assert!(DisjointStretchSystem::new(3, vec![(ls(3, &[]), 1.0)]).is_err());
        let sys = DisjointStretchSystem::new(4, vec![(ls(4, &[0, 1]), 1.0), (ls(4, &[3]), 0.5)]).unwrap();
        assert_eq!(sys.union(), ls(4, &[0, 1, 3]));
        assert_eq!(sys.min_rate(), Some(0.5));
        let overlapping = RateMap::new(3, [(ls(3, &[0, 2]), 1.0), (ls(3, &[1]), 1.0)]).unwrap();
        assert!(overlapping.to_disjoint_stretch_system().is_err());
    }

    #[test]
    fn link_rates_validation() {
        assert!(LinkRates::new(vec![1.0, 0.0]).is_err());
        assert!(LinkRates::new(vec![1.0, -2.0]).is_err());
        let r = LinkRates::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.sum_over(ls(3, &[0, 2])), 4.0);
        assert_eq!(r.singleton_system().len(), 3);
        assert_eq!(RateMap::from(&r).entries().count(), 3);
    }

    #[test]
    fn product_measure_is_fixed_point() {
        let a = Measure::new(ProductSpace::new(vec![2]).unwrap(), vec![0.3, 0.7]).unwrap();
        let b = Measure::on_nodes(ProductSpace::new(vec![3]).unwrap(), vec![1], vec![0.2, 0.2, 0.6]).unwrap();
        let p = tensor(&[a, b]).unwrap();
        let rates = RateMap::new(1, [(ls(1, &[0]), 3.0)]).unwrap();
        assert!(total_variation(&vector_field(&p, &rates)) <= 1e-15);
    }
}
