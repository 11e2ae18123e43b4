use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("scaling violation at r={r}, R={big_r}: {detail}")]
    ScalingViolation { r: f64, big_r: f64, detail: String },
    #[error("no m <= {cap} with s_L(2^m) > 1")]
    NoMs { cap: u32 },
    #[error("quadrature failed to reach relative tolerance {tol:e} (estimate {estimate:e}, error {error:e})")]
    QuadratureFail { tol: f64, estimate: f64, error: f64 },
    #[error("weak-scaling functional grows at the {end} end of the sampled grid")]
    Unbounded { end: GridEnd, sup: f64, argmax: f64 },
    #[error("lower bound fails for probe {probe} at r={r}, t={t}: lhs={lhs}, rhs={rhs}")]
    LowerBoundFail { probe: String, r: f64, t: f64, lhs: f64, rhs: f64 },
    #[error("time order violated: s={s} > t={t}")]
    TimeOrder { s: f64, t: f64 },
    #[error("time {t} outside the model horizon [0, {horizon}]")]
    OutsideHorizon { t: f64, horizon: f64 },
    #[error("grid function is in the {found:?} domain, expected {expected:?}")]
    DomainTag { expected: crate::grid::Domain, found: crate::grid::Domain },
    #[error("multiplier is not finite at grid index {index}")]
    NonfiniteMultiplier { index: usize },
    #[error("grid too coarse: {detail}")]
    GridTooCoarse { detail: String },
    #[error("thinning envelope {envelope} is below the jump intensity {rate} at t={t}")]
    EnvelopeFail { t: f64, rate: f64, envelope: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jump sampling is not available for {0}")]
    SamplingUnsupported(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which end of a sampled radius grid misbehaved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridEnd {
    Small,
    Large,
}

impl core::fmt::Display for GridEnd {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GridEnd::Small => f.write_str("small-r"),
            GridEnd::Large => f.write_str("large-r"),
        }
    }
}
