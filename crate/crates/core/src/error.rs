use num_complex::Complex64;

/// Errors shared by all modules of the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("z = {z} is within {dist:.3e} of the spectrum of the base operator")]
    SpectrumCollision { z: Complex64, dist: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("RankDeficientTrace: trace map is rank deficient (sigma_min/sigma_max = {ratio:.3e})")]
    RankDeficientTrace { ratio: f64 },

    #[error("identity residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    IdentityViolation { residual: f64, tolerance: f64 },

    #[error("Theta + Gamma(z) is numerically singular at z = {z}")]
    SingularBoundaryOperator { z: Complex64 },

    #[error("interval [{a}, {b}] touches the base spectrum at eigenvalue {eigenvalue}")]
    IntervalTouchesBaseSpectrum { a: f64, b: f64, eigenvalue: f64 },

    #[error("perturbed resolvent is numerically singular at probe z = {z}")]
    SingularResolvent { z: Complex64 },

    #[error("sample z = {z} is not in the open upper half-plane")]
    SampleOutsideUpperHalfPlane { z: Complex64 },

    #[error("density convention violated: min eigenvalue of the density is {min_eig:.3e}")]
    NonPositiveDensity { min_eig: f64 },

    #[error("calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("model file format error: {0}")]
    FileFormat(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
