use thiserror::Error;

use crate::search::SearchTrace;

pub type Result<T> = std::result::Result<T, GameError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Every entry of a power profile is zero, so shares are undefined.
    #[error("degenerate power profile: total computing power is zero")]
    DegenerateProfile,

    #[error("index {index} out of range for {len} miners")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// The closed-form equilibrium assigns negative power to these miners.
    #[error("closed-form equilibrium infeasible: negative power for miners {indices:?}")]
    InfeasibleEquilibrium { indices: Vec<usize> },

    #[error("search bracket [{lo}, {hi}] is empty or inverted")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("fee {fee} is below the minimum consumption {min_consumption}")]
    BelowParticipation { fee: f64, min_consumption: f64 },

    #[error("fee search did not terminate within {max_iters} iterations (last fee {last_fee})")]
    FeeSearchExhausted {
        max_iters: usize,
        last_fee: f64,
        trace: Box<SearchTrace>,
    },

    #[error("best-response dynamics did not converge within {max_iters} iterations (residual {residual:e})")]
    DynamicsNotConverged {
        max_iters: usize,
        residual: f64,
        last: Vec<f64>,
        previous: Vec<f64>,
    },

    #[error("coordinate ascent did not converge within {max_iters} sweeps")]
    AscentNotConverged { max_iters: usize, last: Vec<f64> },
}

pub(crate) fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(GameError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
