use thiserror::Error;

use crate::tensor_core::Party;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has (numerically) zero norm")]
    ZeroState,
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("local factor {factor} is not unitary (residual {residual:.3e})")]
    NonUnitary { factor: char, residual: f64 },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("{what} has a non-negligible imaginary part {im:.3e} (real part {re:.3e})")]
    NonRealResult { what: &'static str, re: f64, im: f64 },
    #[error("permutation ranks differ: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("permutation rank {0} exceeds the supported maximum of 4")]
    RankTooLarge(usize),
    #[error("invalid permutation: {0}")]
    BadPermutation(String),
    #[error("state is not normalized (<psi|psi> = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("marginal of particle {0} has a degenerate spectrum; its Schmidt basis is not unique")]
    DegenerateSpectrum(Party),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("bad family parameters: {0}")]
    BadParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
