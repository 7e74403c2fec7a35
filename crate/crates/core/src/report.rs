use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Per-run counters in the column layout of the benchmark tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub epsilon: f64,
    /// Accepted outer iterations.
    #[serde(rename = "IT")]
    pub it: u64,
    /// Oracle calls of every kind.
    #[serde(rename = "CO")]
    pub co: u64,
    /// Inner solver executions.
    #[serde(rename = "BGM_E")]
    pub bgm_e: u64,
    /// Inner iterations summed over all executions.
    #[serde(rename = "BGM_IT")]
    pub bgm_it: u64,
    #[serde(rename = "BGM_A")]
    pub bgm_a: f64,
    pub final_grad_norm: f64,
    pub final_f: f64,
    pub wall_time_s: f64,
}

impl RunReport {
    pub(crate) fn average(bgm_it: u64, bgm_e: u64) -> f64 {
        if bgm_e == 0 {
            0.0
        } else {
            bgm_it as f64 / bgm_e as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    OuterCapReached,
    InnerCapReached,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Final iterate, or the best accepted one when a cap was hit.
    pub solution: DVector<f64>,
    pub report: RunReport,
    pub status: RunStatus,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}
