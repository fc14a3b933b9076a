use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A link bitmask has bits at or above the number of available links.
    #[error("link set {bits:#b} uses links beyond the {n_links} available")]
    InvalidLinkSet { bits: u32, n_links: usize },

    #[error("{0} links requested, at most {max} are supported", max = crate::lattice::MAX_LINKS)]
    TooManyLinks(usize),

    #[error("link sets live on different link counts ({0} vs {1})")]
    LinkCountMismatch(usize, usize),

    #[error("invalid product space: {0}")]
    InvalidSpace(String),

    #[error("measure is not positive: minimum weight {min:e} below tolerance")]
    NotPositive { min: f64 },

    #[error("imaginary residue {0:e} in root-of-unity sum exceeds 1e-10")]
    ImaginaryResidue(f64),

    #[error("unknown suite `{0}` (expected algebra, semigroup, moebius, generalized or all)")]
    UnknownSuite(String),

    #[error("{0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
