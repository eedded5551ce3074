use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate Fermi level: modes {below} and {above} both at energy {energy:.3e}; pick a chemical potential instead")]
    DegenerateFermiLevel { below: usize, above: usize, energy: f64 },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("singular spectrum: mode {mode} has occupation {xi:.3e} outside ({delta:.1e}, 1 - {delta:.1e})")]
    SingularSpectrum { mode: usize, xi: f64, delta: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("gapless parameters: {0}")]
    Gapless(String),

    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("geometry: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
