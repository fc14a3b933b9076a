//! Measure-valued recombination dynamics on finite product spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: link subsets, the ordered partitions they cut, stretches and
//!   Möbius signs on the Boolean lattice of links.
//! * [`measure`]: dense signed measures, marginals and tensor products.
//! * [`recombinator`]: the nonlinear operators `R_A`.
//! * [`dynamics`]: the recombination ODE, an RK4 reference integrator and the
//!   closed-form semigroups, coefficient expansion and Möbius linearization.
//! * [`generalized`]: flows of operators with `𝓡^{n+1} = 𝓡`.
//! * [`verify`]: seeded property suites over all of the above.

pub mod dynamics;
pub mod error;
pub mod generalized;
pub mod lattice;
pub mod measure;
pub mod recombinator;
pub mod verify;

pub use dynamics::{DisjointStretchSystem, LinkRates, Method, RateMap, Trajectory};
pub use error::{Error, Result};
pub use generalized::{CyclicOperator, GFunTable};
pub use lattice::{LinkSet, OrderedPartition, Stretch};
pub use measure::{Measure, ProductSpace};
pub use recombinator::Recombinator;
