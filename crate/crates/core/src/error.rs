use thiserror::Error;

/// Errors raised by the physics and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("energy {energy} lies outside the band [{band_min}, {band_max}]")]
    EnergyOutsideBand {
        energy: f64,
        band_min: f64,
        band_max: f64,
    },

    #[error("energy {0} sits on a band edge where the self-energy diverges")]
    BandEdgeSingularity(f64),

    #[error("Green's function evaluated on a pole at {0}")]
    PoleHit(f64),

    #[error("root not bracketed on ({lo}, {hi})")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("principal-value pole at {0} coincides with a band edge")]
    PoleAtEdge(f64),

    #[error("adaptive quadrature did not converge (estimated error {error:e} after {evaluations} evaluations)")]
    QuadratureNotConverged { error: f64, evaluations: usize },

    #[error("threshold degeneracy: argument {0} lies on a band edge")]
    ThresholdDegenerate(f64),

    #[error("momentum {0} has vanishing group velocity")]
    EdgeMomentum(f64),

    #[error("bound-channel denominator vanishes at eps0 = {eps0} (|D| = {magnitude:e}); three-body resonance")]
    DenominatorVanishing { eps0: f64, magnitude: f64 },

    #[error("energy shell is empty: {0}")]
    EmptyShell(String),

    #[error("outgoing pair is off the energy shell by {0:e}")]
    OffShell(f64),

    #[error("three-body denominator touches the two-photon shell (|B - eps - eps'| = {0:e})")]
    ShellTouching(f64),

    #[error("real-space grid too small: boundary/peak ratio {0:e} exceeds 1e-3")]
    GridTooSmall(f64),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
