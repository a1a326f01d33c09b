use thiserror::Error;

/// Errors raised by the classification library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid polytope parameters: {0}")]
    InvalidPolytope(String),

    #[error("m = {m} exceeds the exhaustive search bound {bound}")]
    SearchBound { m: usize, bound: usize },

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Shape {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("not a characteristic matrix: {0}")]
    NotCharacteristic(String),

    #[error("permutation is not an automorphism of the polytope: {0}")]
    NotAutomorphism(String),

    #[error("invalid connected sum: {0}")]
    ConnectedSum(String),

    #[error("index {k} out of range {lo}..={hi}")]
    OutOfRange { k: usize, lo: usize, hi: usize },

    #[error("operation undefined in dimension {0}")]
    Dimension(usize),

    #[error("torsion detected in degree {degree}: elementary divisors {divisors:?}")]
    Torsion { degree: usize, divisors: Vec<i64> },

    #[error("polynomial is not homogeneous of degree {0}")]
    Inhomogeneous(usize),

    #[error("matrix is not unimodular over the coefficient ring")]
    NotUnimodular,

    #[error("modulus {0} outside the supported range 2..=16")]
    Modulus(u64),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("orbit computation left the class list: {0}")]
    OrbitEscapes(String),

    #[error("matrix does not define a ring isomorphism: {0}")]
    NotIsomorphism(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
