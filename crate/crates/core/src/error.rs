use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain of chart `{chart}`")]
    Domain { chart: String, x: f64, y: f64 },

    #[error("jet order {0} is too small (need at least {1})")]
    Order(usize, usize),

    #[error("gradient norm {norm:.3e} is below the chart threshold {threshold:.3e}")]
    DegenerateChart { norm: f64, threshold: f64 },

    #[error("point is off the surface: |F| = {residual:.3e} exceeds {tolerance:.3e}")]
    OffSurface { residual: f64, tolerance: f64 },

    #[error("2-jet is not in normal form: {0}")]
    NormalizationRequired(String),

    #[error("cubic form vanishes at this point (quadratic point)")]
    SingularCubic,

    #[error("not a quadratic point: {0}")]
    NotQuadratic(String),

    #[error("singularity is not simple (ad - bc = {delta:.3e})")]
    NonSimple { delta: f64 },

    #[error("{what} = {value:.3e} is within tolerance of the boundary")]
    Boundary { what: &'static str, value: f64 },

    #[error("winding refinement hit the depth limit near t = {t:.6}; the loop passes close to zero")]
    NearSingular { t: f64 },

    #[error("form is not semi-homogeneous: (A_n, B_n) share the real direction t = {t:.6}")]
    NotSemiHomogeneous { t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a computation on valid input, as opposed to
    /// rejected input or unmet preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearSingular { .. } | Error::Numerical(_) | Error::OffSurface { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
