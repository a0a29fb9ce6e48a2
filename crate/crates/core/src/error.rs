use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jet degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("unsupported jet degree {0} (expected 3 or 4)")]
    UnsupportedDegree(usize),
    #[error("inner jet has nonzero constant term {0:e}")]
    NonzeroConstant(f64),
    #[error("singular linear part (|a|^2 - |b|^2 = {0:e})")]
    SingularLinearPart(f64),
    #[error("jet is not adapted: {0}")]
    NotAdapted(String),
    #[error("no elliptic multiplier pair: {0}")]
    NotElliptic(String),
    #[error("resonance: psi = {psi} is within the exclusion margin of {resonance}")]
    Resonance { psi: f64, resonance: &'static str },
    #[error("small divisor |{divisor:e}| for monomial ({p},{q})")]
    SmallDivisor { p: usize, q: usize, divisor: f64 },
    #[error("psi = {0} outside (0, pi)")]
    PsiOutOfRange(f64),
    #[error("value {value} outside the domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },
    #[error("pole of the closed form at psi = {0}")]
    Pole(f64),
    #[error("fixed-point residual {0:e} too large")]
    FixedPointResidual(f64),
    #[error("map has no polynomial expansion")]
    NotPolynomial,
    #[error("finite-difference step underflow at scale {0:e}")]
    StepUnderflow(f64),
    #[error("M2 = 0: Henon map not invertible")]
    NotInvertible,
    #[error("discriminant {disc:e} < 0: no fixed points")]
    NoFixedPoints { disc: f64 },
    #[error("zero discriminant: saddle-node boundary L+ with double fixed point X = {x}")]
    SaddleNodeBoundary { x: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("itinerary violation on leg {leg} at iterate {iterate}: {what}")]
    Itinerary {
        leg: usize,
        iterate: usize,
        what: &'static str,
    },
    #[error("precision cap: |gamma1^2i gamma2^2j| = {scale:e} exceeds {cap:e}")]
    PrecisionCap { scale: f64, cap: f64 },
    #[error("target ({m1}, {m2}) outside the box (-2,4) x ({lo}, {hi})")]
    TargetOutsideBox { m1: f64, m2: f64, lo: f64, hi: f64 },
    #[error("orientation sign is -1 for (i, j) = ({i}, {j})")]
    NegativeOrientation { i: u32, j: u32 },
    #[error("(i, j) = ({i}, {j}) must exceed kappa0 = {kappa0}")]
    BelowKappa { i: u32, j: u32, kappa0: u32 },
    #[error("inadmissible return spec: ratio {0:e}")]
    Inadmissible(f64),
    #[error("Newton did not converge: {0}")]
    NewtonFailed(String),
    #[error("global maps couple the strong-stable directions")]
    Coupled,
    #[error("leading multipliers off the unit circle by {0:e}")]
    OffCircle(f64),
    #[error("parameter {name} = {value} violates {rule}")]
    Margin {
        name: &'static str,
        value: f64,
        rule: &'static str,
    },
    #[error("json: {0}")]
    Json(String),
    #[error("toml: {0}")]
    Toml(String),
}

pub type Result<T> = std::result::Result<T, Error>;
