use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Modulus below 2 or above the supported range.
    InvalidModulus(u64),
    /// A dyadic exponent was required but the ring is not `2^m + 1`.
    NotDyadic { modulus: u64 },
    /// Matrix shape parameters out of range.
    InvalidShape { rows: usize, cols: usize },
    /// Entry vector length does not match `rows * cols`.
    DimensionMismatch { expected: usize, found: usize },
    /// An entry is not the canonical representative of its class.
    NotCanonical { value: i64, modulus: u64 },
    /// Level `h` above the window exponent `m`.
    LevelOutOfRange { level: u32, m: u32 },
    /// Input length to Wagner's tree is not a power of two `>= 2`.
    NotPowerOfTwo(usize),
    /// Tree depth `n` exceeds window exponent `m`.
    DepthExceedsWindow { n: u32, m: u32 },
    /// A (n, m) pair outside the domain of an operation.
    ParameterDomain(&'static str),
    /// A 128-bit count overflowed.
    CountOverflow,
    /// Exhaustive enumeration would exceed the configured budget.
    BudgetExceeded { modulus: u64, cells: u32, budget: u128 },
    /// Negative or non-finite rate passed to a Poisson routine.
    InvalidRate,
    /// Evaluation point outside the domain of a limit polynomial.
    OutsideDomain,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModulus(m) => write!(f, "modulus {m} is not supported (need 2 <= M <= 2^62)"),
            Error::NotDyadic { modulus } => write!(f, "modulus {modulus} is not of the form 2^m + 1"),
            Error::InvalidShape { rows, cols } => {
                write!(f, "matrix shape {rows}x{cols} is invalid (need L >= 2, N >= 2)")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
            Error::NotCanonical { value, modulus } => {
                write!(f, "entry {value} is outside the symmetric window for M = {modulus}")
            }
            Error::LevelOutOfRange { level, m } => write!(f, "level {level} exceeds window exponent m = {m}"),
            Error::NotPowerOfTwo(len) => write!(f, "input length {len} is not a power of two >= 2"),
            Error::DepthExceedsWindow { n, m } => write!(f, "tree depth n = {n} exceeds m = {m}"),
            Error::ParameterDomain(what) => write!(f, "parameter out of domain: {what}"),
            Error::CountOverflow => write!(f, "count exceeds the 128-bit range"),
            Error::BudgetExceeded { modulus, cells, budget } => {
                write!(f, "enumeration of {modulus}^{cells} matrices exceeds budget {budget}")
            }
            Error::InvalidRate => write!(f, "Poisson rate must be finite and non-negative"),
            Error::OutsideDomain => write!(f, "evaluation point outside the polynomial's domain"),
        }
    }
}

impl core::error::Error for Error {}
