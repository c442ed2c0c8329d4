//! Broadcast and fanout schedule synthesis.

mod broadcast;
mod fanout;

use serde::Serialize;

pub use crate::bounds::t_ghz_regime;
pub use broadcast::{
    cascade_rounds, doubling_rounds, plan_broadcast_over, plan_cascade_over, BroadcastPlan,
    BroadcastRound, BroadcastStrategy, Drivers,
};
pub use fanout::{plan_fanout, FanoutPlan};

use crate::error::{Error, Result};
use crate::lattice::QubitAssignment;

/// Broadcast from logical qubit `root` over all data qubits of `assignment`.
pub fn plan_broadcast(assignment: &QubitAssignment, alpha: f64, root: usize) -> Result<BroadcastPlan> {
    let sites = assignment.data_sites();
    let root_site = *sites.get(root).ok_or(Error::InvalidRoot(root))?;
    plan_broadcast_over(assignment.layout(), sites, root_site, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub cluster_size: usize,
    pub max_target_distance: f64,
    pub layer_duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundSummary {
    pub strategy: BroadcastStrategy,
    pub rounds: Vec<RoundRecord>,
    pub makespan_net: f64,
    pub makespan_gross: f64,
}

impl RoundSummary {
    fn new(rounds: &[BroadcastRound], strategy: BroadcastStrategy, net: f64, gross: f64) -> Self {
        RoundSummary {
            strategy,
            rounds: rounds
                .iter()
                .map(|r| RoundRecord {
                    cluster_size: r.cluster_size,
                    max_target_distance: r.max_target_distance,
                    layer_duration: r.layer_duration,
                })
                .collect(),
            makespan_net: net,
            makespan_gross: gross,
        }
    }
}
