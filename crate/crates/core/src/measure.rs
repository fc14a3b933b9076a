//! Finite signed measures on finite product spaces, stored as dense tensors.
//!
//! Flat indices use a mixed-radix convention with node 0 most significant:
//! `flat(x_0, .., x_n) = Σ_i x_i · Π_{j>i} k_j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_LINKS;

/// Alphabet sizes `(k_0, .., k_n)` of a product space `X_0 × .. × X_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ProductSpace {
    sizes: Vec<usize>,
}

impl ProductSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidSpace("at least one node is required".into()));
        }
        if sizes.len() > MAX_LINKS + 1 {
            return Err(Error::TooManyLinks(sizes.len() - 1));
        }
        if let Some(i) = sizes.iter().position(|&k| k == 0) {
            return Err(Error::InvalidSpace(format!("node {i} has an empty alphabet")));
        }
        sizes
            .iter()
            .try_fold(1usize, |acc, &k| acc.checked_mul(k))
            .ok_or_else(|| Error::InvalidSpace("state count overflows".into()))?;
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_nodes(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_links(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn total_states(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Flat index of a coordinate tuple.
    pub fn flat_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.sizes.len());
        coords.iter().zip(&self.sizes).fold(0, |acc, (&x, &k)| acc * k + x)
    }

    /// Coordinate tuple of a flat index.
    pub fn coords(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &k) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = flat % k;
            flat /= k;
        }
        out
    }

    /// Number of states of the sub-product over the nodes `range`.
    pub fn block_states(&self, range: std::ops::Range<usize>) -> usize {
        self.sizes[range].iter().product()
    }
}

impl TryFrom<Vec<usize>> for ProductSpace {
    type Error = Error;
    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        ProductSpace::new(sizes)
    }
}

impl From<ProductSpace> for Vec<usize> {
    fn from(space: ProductSpace) -> Self {
        space.sizes
    }
}

/// A finite signed measure on the sub-product `X_I` over the ascending node
/// labels `I`. Measures on the full space carry `I = 0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    space: ProductSpace,
    nodes: Vec<usize>,
    weights: Vec<f64>,
}

impl Measure {
    /// A measure on the full space `X`.
    pub fn new(space: ProductSpace, weights: Vec<f64>) -> Result<Self> {
        let nodes = (0..space.n_nodes()).collect();
        Self::on_nodes(space, nodes, weights)
    }

    /// A measure on the sub-product over `nodes`; `space` holds their sizes.
    pub fn on_nodes(space: ProductSpace, nodes: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != space.n_nodes() {
            return Err(Error::InvalidSpace(format!(
                "{} node labels for {} alphabet sizes",
                nodes.len(),
                space.n_nodes()
            )));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(format!(
                "node labels {nodes:?} are not strictly ascending"
            )));
        }
        if weights.len() != space.total_states() {
            return Err(Error::InvalidSpace(format!(
                "{} weights for {} states",
                weights.len(),
                space.total_states()
            )));
        }
        Ok(Self { space, nodes, weights })
    }

    pub fn zeros(space: ProductSpace) -> Self {
        let n = space.total_states();
        let nodes = (0..space.n_nodes()).collect();
        Self {
            space,
            nodes,
            weights: vec![0.0; n],
        }
    }

    /// Unit point mass at the given coordinates of the full space.
    pub fn point_mass(space: ProductSpace, coords: &[usize]) -> Result<Self> {
        if coords.len() != space.n_nodes() || coords.iter().zip(space.sizes()).any(|(&x, &k)| x >= k) {
            return Err(Error::domain(format!("coordinates {coords:?} outside the space")));
        }
        let mut m = Self::zeros(space);
        let i = m.space.flat_index(coords);
        m.weights[i] = 1.0;
        Ok(m)
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// True when the measure lives on `X = X_0 × .. × X_n` itself.
    pub fn is_full(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, &n)| i == n)
    }

    /// `ω(X)`, the signed total mass.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same space and support layout.
    pub fn same_layout(&self, other: &Measure) -> bool {
        self.space == other.space && self.nodes == other.nodes
    }

    /// A copy carrying new weights of the same length.
    pub(crate) fn with_weights(&self, weights: Vec<f64>) -> Measure {
        debug_assert_eq!(weights.len(), self.weights.len());
        Measure {
            space: self.space.clone(),
            nodes: self.nodes.clone(),
            weights,
        }
    }

    pub fn scaled(&self, a: f64) -> Measure {
        self.with_weights(self.weights.iter().map(|w| a * w).collect())
    }

    /// `self - other`. Panics on a layout mismatch.
    pub fn sub(&self, other: &Measure) -> Measure {
        self.lincomb(1.0, other, -1.0)
    }

    /// `a·self + b·other`. Panics on a layout mismatch.
    pub fn lincomb(&self, a: f64, other: &Measure, b: f64) -> Measure {
        assert!(self.same_layout(other), "measures live on different spaces");
        self.with_weights(
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    /// `self += a·other`. Panics on a layout mismatch.
    pub fn axpy(&mut self, a: f64, other: &Measure) {
        assert!(self.same_layout(other), "measures live on different spaces");
        for (x, y) in self.weights.iter_mut().zip(&other.weights) {
            *x += a * y;
        }
    }
}

/// `‖ω‖ = |ω|(X) = Σ_x |w_x|`.
pub fn total_variation(omega: &Measure) -> f64 {
    omega.weights.iter().map(|w| w.abs()).sum()
}

/// `‖ω - ν‖`. Panics on a layout mismatch.
pub fn tv_distance(omega: &Measure, nu: &Measure) -> f64 {
    assert!(omega.same_layout(nu), "measures live on different spaces");
    omega.weights.iter().zip(&nu.weights).map(|(a, b)| (a - b).abs()).sum()
}

/// Marginal `π_I.ω` onto the ascending node labels `nodes`.
pub fn marginal(omega: &Measure, nodes: &[usize]) -> Result<Measure> {
    if nodes.is_empty() {
        return Err(Error::domain("marginal onto the empty node set"));
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!(
            "marginal nodes {nodes:?} are not strictly ascending"
        )));
    }
    let mut keep_pos = Vec::with_capacity(nodes.len());
    for &n in nodes {
        match omega.nodes.iter().position(|&m| m == n) {
            Some(p) => keep_pos.push(p),
            None => {
                return Err(Error::domain(format!(
                    "node {n} is not among the measure's nodes {:?}",
                    omega.nodes
                )))
            }
        }
    }
    let sizes = omega.space.sizes();
    let sub_sizes: Vec<usize> = keep_pos.iter().map(|&p| sizes[p]).collect();
    let sub_space = ProductSpace::new(sub_sizes)?;

    // target stride contributed by each source position (0 when summed out)
    let mut stride = vec![0usize; sizes.len()];
    let mut s = 1;
    for &p in keep_pos.iter().rev() {
        stride[p] = s;
        s *= sizes[p];
    }

    let mut out = vec![0.0; sub_space.total_states()];
    let mut counter = vec![0usize; sizes.len()];
    let mut target = 0usize;
    for &w in &omega.weights {
        out[target] += w;
        // odometer increment, last node fastest
        for pos in (0..sizes.len()).rev() {
            counter[pos] += 1;
            target += stride[pos];
            if counter[pos] < sizes[pos] {
                break;
            }
            target -= stride[pos] * counter[pos];
            counter[pos] = 0;
        }
    }
    Measure::on_nodes(sub_space, nodes.to_vec(), out)
}

/// Marginal onto a contiguous node range of a full-space measure. Infallible
/// fast path used by the recombinators.
pub(crate) fn block_marginal(omega: &Measure, block: std::ops::Range<usize>) -> Vec<f64> {
    let sizes = omega.space.sizes();
    let outer: usize = sizes[..block.start].iter().product();
    let mid: usize = sizes[block.clone()].iter().product();
    let inner: usize = sizes[block.end..].iter().product();
    let mut out = vec![0.0; mid];
    for o in 0..outer {
        let base = o * mid * inner;
        for (m, slot) in out.iter_mut().enumerate() {
            let start = base + m * inner;
            *slot += omega.weights[start..start + inner].iter().sum::<f64>();
        }
    }
    out
}

/// Outer product of flat factor arrays, first factor most significant.
pub(crate) fn outer_product<'a>(factors: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut acc = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for &a in &acc {
            next.extend(f.iter().map(|&b| a * b));
        }
        acc = next;
    }
    acc
}

/// Tensor product of measures on consecutive contiguous node blocks starting
/// at node 0. The result lives on the union of the blocks.
pub fn tensor(factors: &[Measure]) -> Result<Measure> {
    if factors.is_empty() {
        return Err(Error::domain("tensor product of no factors"));
    }
    let mut expected = 0usize;
    let mut sizes = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let contiguous = f.nodes.iter().enumerate().all(|(j, &n)| n == expected + j);
        if !contiguous {
            return Err(Error::domain(format!(
                "factor {i} covers nodes {:?}, expected a contiguous block starting at node {expected}",
                f.nodes
            )));
        }
        expected += f.nodes.len();
        sizes.extend_from_slice(f.space.sizes());
    }
    let weights = outer_product(factors.iter().map(|f| f.weights.as_slice()));
    Measure::new(ProductSpace::new(sizes)?, weights)
}

/// `min_x w_x ≥ -tol`.
pub fn is_positive(omega: &Measure, tol: f64) -> bool {
    omega.weights.iter().all(|&w| w >= -tol)
}

/// Errors with [`Error::NotPositive`] unless `is_positive(omega, tol)`.
pub fn require_positive(omega: &Measure, tol: f64) -> Result<()> {
    if is_positive(omega, tol) {
        Ok(())
    } else {
        Err(Error::NotPositive {
            min: omega.min_weight(),
        })
    }
}

/// A strictly positive probability measure drawn deterministically from `seed`.
pub fn random_probability(space: &ProductSpace, seed: u64) -> Measure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_probability_with(space, &mut rng)
}

/// As [`random_probability`] but drawing from a caller-owned generator.
pub fn random_probability_with<R: Rng + ?Sized>(space: &ProductSpace, rng: &mut R) -> Measure {
    let mut w: Vec<f64> = (0..space.total_states()).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    Measure::new(space.clone(), w).expect("weights match the space")
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    sizes: Vec<usize>,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<usize>>,
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRepr {
            sizes: self.space.sizes.clone(),
            weights: self.weights.clone(),
            nodes: (!self.is_full()).then(|| self.nodes.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRepr::deserialize(d)?;
        let space = ProductSpace::new(r.sizes).map_err(serde::de::Error::custom)?;
        let nodes = r.nodes.unwrap_or_else(|| (0..space.n_nodes()).collect());
        Measure::on_nodes(space, nodes, r.weights).map_err(serde::de::Error::custom)
    }
}
