//! Fanout `|x1, x2, ..., xn> -> |x1, x2 ^ x1, ..., xn ^ x1>` through an
//! ancilla broadcast.
//!
//! Layers: CNOT(d1 -> a1); broadcast over the ancillae from a1; CNOT(ai -> di)
//! for i >= 2 in one layer; the broadcast reversed; CNOT(d1 -> a1).

use super::broadcast::{plan_broadcast_over, BroadcastPlan};
use super::RoundSummary;
use crate::error::{Error, Result};
use crate::lattice::QubitAssignment;
use crate::numeric::exact_sum;
use crate::schedule::{local_cnot, reverse_schedule, ProtocolSchedule, ScheduleLayer};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone)]
pub struct FanoutPlan {
    assignment: QubitAssignment,
    broadcast: BroadcastPlan,
}

impl FanoutPlan {
    pub fn assignment(&self) -> &QubitAssignment {
        &self.assignment
    }

    pub fn broadcast(&self) -> &BroadcastPlan {
        &self.broadcast
    }

    pub fn alpha(&self) -> f64 {
        self.broadcast.alpha()
    }

    /// Number of layers in the full schedule.
    pub fn layer_count(&self) -> usize {
        3 + 2 * self.broadcast.rounds().len()
    }

    /// Durations of all layers in schedule order.
    pub fn layer_durations(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layer_count());
        out.push(FRAC_PI_2);
        out.extend(self.broadcast.layer_durations());
        out.push(FRAC_PI_2);
        out.extend(self.broadcast.layer_durations().rev());
        out.push(FRAC_PI_2);
        out
    }

    /// Makespan without the three local layers.
    pub fn makespan_net(&self) -> f64 {
        exact_sum(
            self.broadcast
                .layer_durations()
                .chain(self.broadcast.layer_durations().rev()),
        )
    }

    pub fn makespan_gross(&self) -> f64 {
        exact_sum(self.layer_durations())
    }

    /// Number of (control, target) pairs in the materialised schedule.
    pub fn control_entries(&self) -> usize {
        2 * self.broadcast.control_entries() + self.assignment.n() + 1
    }

    pub fn schedule(&self) -> Result<ProtocolSchedule> {
        let layout = self.assignment.layout();
        let data = self.assignment.data_sites();
        let anc = self.assignment.ancilla_sites();
        let entry = || ScheduleLayer::new(vec![local_cnot(data[0], anc[0], layout)?]);

        let forward = self.broadcast.schedule()?;
        let copy_back = data[1..]
            .iter()
            .zip(&anc[1..])
            .map(|(&d, &a)| local_cnot(a, d, layout))
            .collect::<Result<Vec<_>>>()?;

        let mut s = ProtocolSchedule::empty(self.alpha(), &layout.id(), "fanout");
        s.push_layer(entry()?);
        s.extend(&forward);
        s.push_layer(ScheduleLayer::new(copy_back)?);
        s.extend(&reverse_schedule(&forward));
        s.push_layer(entry()?);
        Ok(s)
    }

    pub fn summary(&self) -> RoundSummary {
        RoundSummary::new(
            self.broadcast.rounds(),
            self.broadcast.strategy(),
            self.makespan_net(),
            self.makespan_gross(),
        )
    }
}

/// Plans the fanout controlled by data qubit 1 onto data qubits 2..n.
pub fn plan_fanout(assignment: &QubitAssignment, alpha: f64) -> Result<FanoutPlan> {
    let n = assignment.n();
    if n < 2 {
        return Err(Error::TrivialFanout(n));
    }
    if !assignment.has_ancillae() {
        return Err(Error::Parameter("fanout needs an ancilla per data qubit".into()));
    }
    let anc = assignment.ancilla_sites();
    let broadcast = plan_broadcast_over(assignment.layout(), anc, anc[0], alpha)?;
    Ok(FanoutPlan {
        assignment: assignment.clone(),
        broadcast,
    })
}
