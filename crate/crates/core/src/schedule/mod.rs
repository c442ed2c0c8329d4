//! Timed Hamiltonian pulses under the power-law coupling cap.
//!
//! A controlled-X pulse evolves under `H = sum_i h_i |1><1|_i (x) X_target`
//! for a time `t` with `t * sum_i h_i = pi/2`, which on the all-ones control
//! pattern is `-iX` on the target. The phase-correction flag marks pulses
//! whose first listed control receives `diag(1, i)` afterwards.

mod text;

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use crate::error::{check_index, Error, Result};
use crate::lattice::LatticeLayout;
use crate::numeric::exact_sum;

pub use text::{parse_schedule, write_schedule};

/// Relative tolerance used when checking strengths against the cap.
pub const CAP_TOLERANCE: f64 = 1e-12;

/// Maximal coupling `1/r^alpha` at squared distance `d2`.
#[inline]
pub fn coupling_cap(d2: u64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        (d2 as f64).powf(-0.5 * alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseKind {
    /// Short-range operation (single-qubit gate or nearest-neighbour CNOT).
    LocalGate,
    ControlledX,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub site: usize,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    pub controls: Vec<Control>,
    pub target: usize,
    pub duration: f64,
    pub phase_correction: bool,
}

impl Pulse {
    pub fn total_strength(&self) -> f64 {
        self.controls.iter().fold(0.0, |acc, c| acc + c.strength)
    }

    /// Every site the pulse touches, controls first.
    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls
            .iter()
            .map(|c| c.site)
            .chain(std::iter::once(self.target))
    }
}

fn check_pair(layout: &LatticeLayout, control: usize, target: usize) -> Result<u64> {
    if control == target {
        return Err(Error::InvalidPulse(format!(
            "control and target are both site {control}"
        )));
    }
    layout.distance_sq(control, target)
}

/// Single-control CNOT pulse at the maximal allowed strength.
pub fn cnot_pulse(control: usize, target: usize, layout: &LatticeLayout, alpha: f64) -> Result<Pulse> {
    multicontrol_pulse(&[control], target, layout, alpha)
}

/// Collective pulse: every control drives `target` at its maximal strength.
/// The first control carries the phase correction.
pub fn multicontrol_pulse(
    controls: &[usize],
    target: usize,
    layout: &LatticeLayout,
    alpha: f64,
) -> Result<Pulse> {
    if controls.is_empty() {
        return Err(Error::InvalidPulse("empty control set".into()));
    }
    check_index(target, layout.len())?;
    let mut seen = HashSet::with_capacity(controls.len());
    let mut list = Vec::with_capacity(controls.len());
    let mut total = 0.0;
    for &c in controls {
        let d2 = check_pair(layout, c, target)?;
        if !seen.insert(c) {
            return Err(Error::InvalidPulse(format!("control {c} listed twice")));
        }
        let strength = coupling_cap(d2, alpha);
        total += strength;
        list.push(Control { site: c, strength });
    }
    Ok(Pulse {
        kind: PulseKind::ControlledX,
        controls: list,
        target,
        duration: FRAC_PI_2 / total,
        phase_correction: true,
    })
}

/// Nearest-neighbour CNOT, counted as a local operation.
pub fn local_cnot(control: usize, target: usize, layout: &LatticeLayout) -> Result<Pulse> {
    let d2 = check_pair(layout, control, target)?;
    if d2 != 1 {
        return Err(Error::InvalidPulse(format!(
            "local CNOT between sites {control} and {target} at squared distance {d2}"
        )));
    }
    Ok(Pulse {
        kind: PulseKind::LocalGate,
        controls: vec![Control { site: control, strength: 1.0 }],
        target,
        duration: FRAC_PI_2,
        phase_correction: true,
    })
}

/// Pulses that run concurrently.
///
/// Targets are pairwise distinct and no target is a control of another pulse
/// in the layer, so all terms commute.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleLayer {
    pulses: Vec<Pulse>,
}

impl ScheduleLayer {
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidLayer("empty layer".into()));
        }
        let mut targets = HashSet::with_capacity(pulses.len());
        for p in &pulses {
            if p.controls.iter().any(|c| c.site == p.target) {
                return Err(Error::InvalidLayer(format!(
                    "site {} is both control and target of one pulse",
                    p.target
                )));
            }
            if !targets.insert(p.target) {
                return Err(Error::InvalidLayer(format!(
                    "site {} is targeted twice",
                    p.target
                )));
            }
        }
        for p in &pulses {
            if let Some(c) = p.controls.iter().find(|c| targets.contains(&c.site)) {
                return Err(Error::InvalidLayer(format!(
                    "site {} is a control of one pulse and the target of another",
                    c.site
                )));
            }
        }
        Ok(ScheduleLayer { pulses })
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).fold(0.0, f64::max)
    }

    pub fn is_local(&self) -> bool {
        self.pulses.iter().all(|p| p.kind == PulseKind::LocalGate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSchedule {
    layers: Vec<ScheduleLayer>,
    pub alpha: f64,
    pub layout_id: String,
    pub protocol: String,
}

impl ProtocolSchedule {
    pub fn new(layers: Vec<ScheduleLayer>, alpha: f64, layout_id: &str, protocol: &str) -> Self {
        ProtocolSchedule {
            layers,
            alpha,
            layout_id: layout_id.to_string(),
            protocol: protocol.to_string(),
        }
    }

    pub fn empty(alpha: f64, layout_id: &str, protocol: &str) -> Self {
        Self::new(Vec::new(), alpha, layout_id, protocol)
    }

    pub fn layers(&self) -> &[ScheduleLayer] {
        &self.layers
    }

    pub fn push_layer(&mut self, layer: ScheduleLayer) {
        self.layers.push(layer);
    }

    /// Appends all layers of `other`.
    pub fn extend(&mut self, other: &ProtocolSchedule) {
        self.layers.extend(other.layers.iter().cloned());
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn pulse_count(&self) -> usize {
        self.layers.iter().map(|l| l.pulses.len()).sum()
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.layers.iter().flat_map(|l| l.pulses.iter())
    }

    /// Sum of layer durations (gross makespan).
    pub fn makespan(&self) -> f64 {
        exact_sum(self.layers.iter().map(ScheduleLayer::duration))
    }

    /// Makespan with purely local layers left out.
    pub fn net_makespan(&self) -> f64 {
        exact_sum(
            self.layers
                .iter()
                .filter(|l| !l.is_local())
                .map(ScheduleLayer::duration),
        )
    }

    /// Highest site index used, plus one.
    pub fn site_span(&self) -> usize {
        self.pulses()
            .flat_map(|p| p.sites())
            .max()
            .map_or(0, |s| s + 1)
    }
}

/// Free-standing form of [`ProtocolSchedule::makespan`].
pub fn makespan(schedule: &ProtocolSchedule) -> f64 {
    schedule.makespan()
}

/// Layers in reverse order. Each completed pulse undoes itself on the
/// correlated subspace, and its correction is diagonal on a control so it
/// commutes with the evolution; reversing layer order is therefore enough.
pub fn reverse_schedule(schedule: &ProtocolSchedule) -> ProtocolSchedule {
    let mut rev = schedule.clone();
    rev.layers.reverse();
    rev
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapViolation {
    pub pulse_index: usize,
    pub control: usize,
    pub target: usize,
    pub strength: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerLawReport {
    pub violations: Vec<CapViolation>,
    pub checked_pairs: usize,
}

impl PowerLawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every control strength against `1/r^alpha`.
pub fn validate_powerlaw(
    schedule: &ProtocolSchedule,
    layout: &LatticeLayout,
    alpha: f64,
) -> Result<PowerLawReport> {
    let mut report = PowerLawReport::default();
    for (index, pulse) in schedule.pulses().enumerate() {
        for c in &pulse.controls {
            let d2 = layout.distance_sq(c.site, pulse.target)?;
            let cap = coupling_cap(d2, alpha);
            report.checked_pairs += 1;
            if !(c.strength >= 0.0 && c.strength <= cap * (1.0 + CAP_TOLERANCE)) {
                report.violations.push(CapViolation {
                    pulse_index: index,
                    control: c.site,
                    target: pulse.target,
                    strength: c.strength,
                    cap,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn cnot_durations() {
        let chain = LatticeLayout::chain(5).unwrap();
        assert!(close(cnot_pulse(0, 1, &chain, 2.0).unwrap().duration, PI / 2.0));
        assert!(close(cnot_pulse(0, 2, &chain, 1.0).unwrap().duration, PI));
        assert!(close(cnot_pulse(0, 2, &chain, 3.0).unwrap().duration, 4.0 * PI));
        assert!(matches!(cnot_pulse(1, 1, &chain, 1.0), Err(Error::InvalidPulse(_))));
        let p = cnot_pulse(3, 1, &chain, 1.0).unwrap();
        assert!(p.phase_correction);
        assert_eq!(p.kind, PulseKind::ControlledX);
    }

    #[test]
    fn multicontrol_durations() {
        let chain = LatticeLayout::chain(6).unwrap();
        assert_eq!(
            multicontrol_pulse(&[0], 3, &chain, 1.5).unwrap(),
            cnot_pulse(0, 3, &chain, 1.5).unwrap()
        );
        for alpha in [0.0, 1.0, 4.0] {
            let p = multicontrol_pulse(&[1, 3], 2, &chain, alpha).unwrap();
            assert!(close(p.duration, PI / 4.0));
        }
        // 1 + 1/2 + 1/3 + 1/4 = 25/12
        let p = multicontrol_pulse(&[4, 3, 2, 1], 5, &chain, 1.0).unwrap();
        assert!(close(p.duration, 6.0 * PI / 25.0));
        assert!(matches!(multicontrol_pulse(&[], 5, &chain, 1.0), Err(Error::InvalidPulse(_))));
        assert!(matches!(multicontrol_pulse(&[1, 5], 5, &chain, 1.0), Err(Error::InvalidPulse(_))));
    }

    #[test]
    fn completed_pulse_identity() {
        let chain = LatticeLayout::chain(9).unwrap();
        for alpha in [0.0, 0.5, 1.0, 2.5, 6.0] {
            let p = multicontrol_pulse(&[0, 1, 2, 5], 8, &chain, alpha).unwrap();
            assert!(close(p.duration * p.total_strength(), FRAC_PI_2));
        }
    }

    #[test]
    fn layer_rules() {
        let chain = LatticeLayout::chain(5).unwrap();
        let a = multicontrol_pulse(&[0, 1], 2, &chain, 1.0).unwrap();
        let b = multicontrol_pulse(&[0, 1], 3, &chain, 1.0).unwrap();
        assert!(ScheduleLayer::new(vec![a.clone(), b]).is_ok());
        let c = cnot_pulse(4, 2, &chain, 1.0).unwrap();
        assert!(ScheduleLayer::new(vec![a.clone(), c]).is_err());
        let d = cnot_pulse(2, 4, &chain, 1.0).unwrap();
        assert!(ScheduleLayer::new(vec![a, d]).is_err());
        assert!(ScheduleLayer::new(vec![]).is_err());
    }

    fn timed(duration: f64, target: usize) -> Pulse {
        Pulse {
            kind: PulseKind::ControlledX,
            controls: vec![Control { site: 0, strength: FRAC_PI_2 / duration }],
            target,
            duration,
            phase_correction: true,
        }
    }

    #[test]
    fn makespan_sums_layer_maxima() {
        let mut s = ProtocolSchedule::empty(0.0, "x", "test");
        assert_eq!(makespan(&s), 0.0);
        s.push_layer(ScheduleLayer::new(vec![timed(PI / 4.0, 1), timed(PI / 2.0, 2)]).unwrap());
        assert!(close(s.makespan(), PI / 2.0));
        let mut t = ProtocolSchedule::empty(0.0, "x", "test");
        t.push_layer(ScheduleLayer::new(vec![timed(PI / 2.0, 1)]).unwrap());
        t.push_layer(ScheduleLayer::new(vec![timed(PI, 1)]).unwrap());
        assert!(close(t.makespan(), 1.5 * PI));
        assert_eq!(reverse_schedule(&t).makespan(), t.makespan());
        assert_eq!(reverse_schedule(&reverse_schedule(&t)), t);
    }

    #[test]
    fn validation_flags_oversized_strength() {
        let chain = LatticeLayout::chain(4).unwrap();
        let empty = ProtocolSchedule::empty(1.0, "x", "test");
        assert!(validate_powerlaw(&empty, &chain, 1.0).unwrap().passed());

        let mut s = ProtocolSchedule::empty(2.0, "x", "test");
        s.push_layer(ScheduleLayer::new(vec![cnot_pulse(0, 2, &chain, 2.0).unwrap()]).unwrap());
        assert!(validate_powerlaw(&s, &chain, 2.0).unwrap().passed());

        let mut bad = cnot_pulse(0, 3, &chain, 2.0).unwrap();
        bad.controls[0].strength = 2.0 / 9.0;
        s.push_layer(ScheduleLayer::new(vec![bad]).unwrap());
        let report = validate_powerlaw(&s, &chain, 2.0).unwrap();
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!((v.pulse_index, v.control, v.target), (1, 0, 3));
        assert!(close(v.cap, 1.0 / 9.0));
    }

    #[test]
    fn local_cnot_requires_adjacency() {
        let chain = LatticeLayout::chain(4).unwrap();
        assert_eq!(local_cnot(0, 1, &chain).unwrap().kind, PulseKind::LocalGate);
        assert!(local_cnot(0, 2, &chain).is_err());
    }
}
