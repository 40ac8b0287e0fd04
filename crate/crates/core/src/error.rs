use thiserror::Error;

use crate::monomial::Monomial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed monomial: {0}")]
    MalformedMonomial(String),
    #[error("duplicate generator {0}")]
    DuplicateGenerator(Monomial),
    #[error("generators are not minimal: {divisor} divides {multiple}")]
    NonMinimalGenerators { divisor: Monomial, multiple: Monomial },
    #[error("generator index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("{0} is not in the ideal")]
    NotInIdeal(Monomial),
    #[error("generator order does not have linear quotients (fails at j={}, witness {witness})", .j + 1)]
    NotLinearQuotients { j: usize, witness: Monomial },
    #[error("decomposition function is not regular")]
    NotRegular,
    #[error("alpha is not a subset of set(m_{})", .0 + 1)]
    AlphaNotInSet(usize),
    #[error("variable x{} is not in set(m_{})", .var + 1, .gen + 1)]
    NotInSet { gen: usize, var: usize },
    #[error("chain is degenerate")]
    DegenerateChain,
    #[error("chain is already non-degenerate")]
    AlreadyNondegenerate,
    #[error("swap-push lift failed for generator {0}")]
    LiftFailed(usize),
    #[error("orientation clash in cell ({gen}; {alpha:?})")]
    OrientationClash { gen: usize, alpha: Vec<usize> },
    #[error("not a cell complex: {0}")]
    NotACellComplex(String),
    #[error("chain map does not commute with the differentials in degree {0}")]
    NonCommutingChainMap(usize),
    #[error("cellular differential disagrees with the algebraic one: {0}")]
    MismatchWithAlgebraicDifferential(String),
    #[error("ideal is not the lex-ordered edge ideal of a cointerval hypergraph")]
    NotCointerval,
    #[error("symbol ({gen}; {alpha:?}) does not correspond to a face")]
    SymbolNotInComplex { gen: usize, alpha: Vec<usize> },
    #[error("{k} generators exceed the configured bound {bound}")]
    TooManyGenerators { k: usize, bound: usize },
    #[error("labels are not monotone under faces")]
    NonMonotoneLabels,
    #[error("search space of {size} candidates exceeds the bound {bound}")]
    SearchSpaceTooLarge { size: u128, bound: u128 },
    #[error("malformed hypergraph: {0}")]
    MalformedGraph(String),
    #[error("invalid prime {0}")]
    InvalidPrime(u64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors caused by malformed or out-of-range input, as opposed to an
    /// input that is well formed but lacks a required property.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedMonomial(_)
                | Error::DuplicateGenerator(_)
                | Error::NonMinimalGenerators { .. }
                | Error::IndexOutOfRange(_)
                | Error::MalformedGraph(_)
                | Error::InvalidPrime(_)
                | Error::TooManyGenerators { .. }
                | Error::SearchSpaceTooLarge { .. }
        )
    }
}
