//! Crate-wide error type.

/// Errors reported by the geometric and numeric operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("point lies outside the half-plane x<0: (t={t}, x={x})")]
    OutsideDomain { t: f64, x: f64 },

    #[error("zero vector is neither causal nor acausal")]
    ZeroVector,

    #[error("empty sample region")]
    EmptyRegion,

    #[error("integration window [{lo}, {hi}] is invalid or leaves the half-plane")]
    BadWindow { lo: f64, hi: f64 },

    #[error("seed s0={0} lies outside the integration window")]
    SeedOutsideWindow(f64),

    #[error("step size underflow near s={0}")]
    StepUnderflow(f64),

    #[error("s={0} is outside the curve's domain")]
    OutsideCurveDomain(f64),

    #[error("curve samples are not causally ordered near index {0}")]
    NotCausallyOrdered(usize),

    #[error("curve was not integrated close enough to the boundary for endpoint extraction")]
    WindowTooShort,

    #[error("operands belong to different metrics")]
    MetricMismatch,

    #[error("cones are not nested: the source cone field must be included in the target")]
    ConesNotNested,

    #[error("transversal intersection search failed: {0}")]
    IntersectionSearch(&'static str),

    #[error("lattice box touches the x=0 boundary or is empty")]
    BadLatticeBox,

    #[error("lattice spacing {0} exceeds the box extent")]
    SpacingTooLarge(f64),

    #[error("point lies outside the lattice box: (t={t}, x={x})")]
    OutsideBox { t: f64, x: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
