//! Recombinators `R_A`: replace a measure by the normalized tensor product of
//! its marginals on the blocks of the ordered partition cut at `A`.

use crate::error::{Error, Result};
use crate::lattice::{partition_of, LinkSet, OrderedPartition};
use crate::measure::{block_marginal, outer_product, require_positive, total_variation, tv_distance, Measure};

/// Measures with total variation below this are treated as the zero measure.
pub const ZERO_THRESHOLD: f64 = 1e-300;

/// Absolute tolerance on negative weights for operations stated on the
/// positive cone.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// `R_A` with its ordered partition precomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recombinator {
    links: LinkSet,
    partition: OrderedPartition,
}

impl Recombinator {
    pub fn new(links: LinkSet) -> Self {
        let partition = partition_of(links, links.n_links() + 1).expect("link count always matches n_links + 1");
        Self { links, partition }
    }

    pub fn links(&self) -> LinkSet {
        self.links
    }

    pub fn partition(&self) -> &OrderedPartition {
        &self.partition
    }

    pub fn is_identity(&self) -> bool {
        self.links.is_empty()
    }

    /// Applies `R_A`. Panics if `omega` is not a full-space measure with
    /// `n_links + 1` nodes.
    pub fn apply(&self, omega: &Measure) -> Measure {
        assert!(
            omega.is_full() && omega.space().n_links() == self.links.n_links(),
            "recombinator over {} links applied to a measure on nodes {:?}",
            self.links.n_links(),
            omega.nodes()
        );
        if self.is_identity() {
            return omega.clone();
        }
        let norm = total_variation(omega);
        if norm < ZERO_THRESHOLD {
            return omega.with_weights(vec![0.0; omega.weights().len()]);
        }
        // one factor of 1/‖ω‖ per block after the first
        let blocks = self.partition.blocks();
        let mut marginals: Vec<Vec<f64>> = blocks.iter().map(|b| block_marginal(omega, b.clone())).collect();
        for m in marginals.iter_mut().skip(1) {
            m.iter_mut().for_each(|x| *x /= norm);
        }
        omega.with_weights(outer_product(marginals.iter().map(Vec::as_slice)))
    }
}

/// `R_A(ω)`.
pub fn recombine(omega: &Measure, a: LinkSet) -> Measure {
    Recombinator::new(a).apply(omega)
}

/// `‖R_A(aω + (1-a)R_A(ω)) - R_A(ω)‖`, which vanishes on the positive cone.
pub fn check_gen_cond(omega: &Measure, links: LinkSet, a: f64) -> Result<f64> {
    require_positive(omega, POSITIVITY_TOL)?;
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::domain(format!("mixing weight {a} outside [0, 1]")));
    }
    let r = Recombinator::new(links);
    let r_omega = r.apply(omega);
    let mixed = omega.lincomb(a, &r_omega, 1.0 - a);
    Ok(tv_distance(&r.apply(&mixed), &r_omega))
}

/// `‖R_α(ω) - R_α(ν)‖ / ‖ω - ν‖` for the elementary recombinator at `link`.
pub fn lipschitz_ratio(omega: &Measure, nu: &Measure, link: usize) -> Result<f64> {
    let denom = tv_distance(omega, nu);
    if denom == 0.0 {
        return Err(Error::domain("Lipschitz ratio of identical measures"));
    }
    let r = Recombinator::new(LinkSet::singleton(omega.space().n_links(), link)?);
    Ok(tv_distance(&r.apply(omega), &r.apply(nu)) / denom)
}
