use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WlabError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field shape {got:?} does not match grid {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("chart is not conformal: max |<x_z,x_z>|/<x_z,x_zbar> = {ratio:.3e} exceeds {tol:.1e}")]
    NonConformal { ratio: f64, tol: f64 },

    #[error("degenerate metric at {count} of {total} grid points")]
    DegenerateMetric { count: usize, total: usize },

    #[error("frame relation violated: {0}")]
    FrameRelation(String),

    #[error("normal bundle is not flat (flatness residual {0:.3e}); phase is undefined")]
    NotFlat(f64),

    #[error("Mobius image crosses the projection singularity (timelike component {0:.3e}); choose a different map")]
    ProjectionSingular(f64),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("frame degeneracy at t = {t:.6}, step {step}: {detail}")]
    FrameDegeneracy { t: f64, step: usize, detail: String },

    #[error("no stereographic pole farther than {min:.2} from the surface (best {best:.3e})")]
    PoleTooClose { best: f64, min: f64 },

    #[error("too few unmasked samples: {got} < {needed}")]
    TooFewSamples { got: usize, needed: usize },

    #[error("unknown gallery surface `{0}`")]
    UnknownSurface(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

pub type Result<T, E = WlabError> = std::result::Result<T, E>;
