//! Verification statistics: how well a metric's model scores agree with
//! human judgments, by rank (Kendall tau-b) and by pairwise gaps (Pearson r
//! over all model-pair differences).

mod kendall;
mod pearson;
mod verify;

use serde::{Deserialize, Serialize};

pub use kendall::kendall_tau;
pub use pearson::pearson;
pub use verify::{
    gap_vectors, verify, verify_breakdown, BreakdownReport, Degeneracy, MacroAverage,
    ModelScoreTable, VerificationReport,
};

use crate::error::{NndError, Result};

/// A correlation coefficient, or the explicit statement that it is undefined
/// (a constant input).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Correlation {
    Value(f64),
    Degenerate,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Value(v) => Some(v),
            Correlation::Degenerate => None,
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, Correlation::Degenerate)
    }
}

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(NndError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min_len {
        return Err(NndError::TooShort {
            required: min_len,
            got: x.len(),
        });
    }
    let len = x.len();
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(NndError::NonFinite(i % len));
    }
    Ok(())
}
