use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("space dimension {site_dim}^{sites} exceeds the configured maximum {max}")]
    DimensionOverflow {
        site_dim: usize,
        sites: usize,
        max: usize,
    },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("region is not contained in the volume: site {site} >= {n_sites}")]
    RegionOutsideVolume { site: usize, n_sites: usize },
    #[error("regions overlap at site {0}")]
    OverlappingRegions(usize),
    #[error("matrix dimension {found} does not match region dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("model invariant violated: {0}")]
    InvalidModel(String),
    #[error("enumeration cap exceeded: {what} ({size} > {cap})")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("expansion is not convergent: {0}")]
    NonConvergent(String),
    #[error("degenerate ground state (splitting {0:.3e})")]
    DegenerateGroundState(f64),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("z = {0} lies in the spectrum")]
    InSpectrum(num_complex::Complex64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
