//! Dense state-vector simulation.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the amplitude
//! index, so qubit 0 is the most significant bit. When simulating a schedule
//! directly, qubit index equals site index; [`compact_schedule`] relabels a
//! schedule onto the sites it actually touches.

mod gates;
mod unitary;

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::fmt17;
use crate::schedule::{Control, ProtocolSchedule, Pulse, ScheduleLayer};

pub use gates::Gate;
pub use unitary::{
    circuit_unitary, distance_up_to_phase, ideal_fanout, identity, is_unitary, operator_norm,
    restrict_to_zero, schedule_restricted_unitary, schedule_unitary, UnitaryMatrix,
};

/// Largest register for unitary extraction.
pub const UNITARY_QUBIT_CAP: usize = 12;
/// Largest register for state evolution.
pub const STATE_QUBIT_CAP: usize = 24;

/// Below this many amplitudes kernels run sequentially.
const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

pub(crate) fn check_qubits(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Capacity(format!("{n} qubits exceed the dense cap of {cap}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn bit_of(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n, STATE_QUBIT_CAP)?;
        crate::error::check_index(index, 1 << n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::Shape(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let n = amps.len().trailing_zeros() as usize;
        check_qubits(n, STATE_QUBIT_CAP)?;
        Ok(StateVector { n, amps })
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        check_qubits(qubits.len(), STATE_QUBIT_CAP)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for q in qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::from_amplitudes(amps)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Shape(format!("{} vs {} qubits", self.n, other.n)));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply_pulse(&mut self, pulse: &Pulse) -> Result<()> {
        check_pulse(pulse, self.n)?;
        pulse_kernel(&mut self.amps, self.n, pulse);
        Ok(())
    }

    pub fn apply_layer(&mut self, layer: &ScheduleLayer) -> Result<()> {
        layer.pulses().iter().try_for_each(|p| self.apply_pulse(p))
    }

    pub fn run_schedule(&mut self, schedule: &ProtocolSchedule) -> Result<()> {
        schedule.layers().iter().try_for_each(|l| self.apply_layer(l))
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check(self.n)?;
        gate.apply(&mut self.amps, self.n);
        Ok(())
    }

    /// Probability that every listed qubit reads 0.
    pub fn zero_probability(&self, qubits: &[usize]) -> Result<f64> {
        let mut mask = 0;
        for &q in qubits {
            crate::error::check_index(q, self.n)?;
            mask |= bit_of(self.n, q);
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// Applies `pulse` to a fresh copy of `state`.
pub fn apply_pulse(state: &StateVector, pulse: &Pulse) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_pulse(pulse)?;
    Ok(out)
}

pub fn run_schedule(state: &StateVector, schedule: &ProtocolSchedule) -> Result<StateVector> {
    let mut out = state.clone();
    out.run_schedule(schedule)?;
    Ok(out)
}

/// `|<a|b>|^2`.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

fn check_pulse(pulse: &Pulse, n: usize) -> Result<()> {
    for s in pulse.sites() {
        crate::error::check_index(s, n)?;
    }
    Ok(())
}

/// `exp(-i t sum_i h_i |1><1|_i X_target)`, then `diag(1, i)` on the first
/// control if flagged. With no controls the rotation is unconditional and
/// the flag contributes a global phase `i`.
pub(crate) fn pulse_kernel(amps: &mut [Complex64], n: usize, pulse: &Pulse) {
    let tbit = bit_of(n, pulse.target);
    let controls: Vec<(usize, f64)> = pulse
        .controls
        .iter()
        .map(|&Control { site, strength }| (bit_of(n, site), strength))
        .collect();
    let t = pulse.duration;
    let unconditional = if controls.is_empty() { t } else { 0.0 };

    let rotate = |base: usize, block: &mut [Complex64]| {
        for off in 0..block.len() {
            let idx = base + off;
            if idx & tbit != 0 {
                continue;
            }
            let mut h = 0.0;
            for &(mask, strength) in &controls {
                if idx & mask != 0 {
                    h += strength;
                }
            }
            let theta = if controls.is_empty() { unconditional } else { t * h };
            if theta == 0.0 {
                continue;
            }
            let (s, c) = theta.sin_cos();
            let a0 = block[off];
            let a1 = block[off + tbit];
            block[off] = a0 * c + Complex64::new(0.0, -s) * a1;
            block[off + tbit] = a1 * c + Complex64::new(0.0, -s) * a0;
        }
    };
    for_blocks(amps, 2 * tbit, rotate);

    if pulse.phase_correction {
        let i = Complex64::new(0.0, 1.0);
        match controls.first() {
            Some(&(mask, _)) => for_blocks(amps, 1, |base, block| {
                for (off, a) in block.iter_mut().enumerate() {
                    if (base + off) & mask != 0 {
                        *a *= i;
                    }
                }
            }),
            None => amps.iter_mut().for_each(|a| *a *= i),
        }
    }
}

/// Runs `f(base_index, block)` over aligned blocks of at least `min_block`
/// amplitudes (`min_block <= amps.len()`), in parallel for large registers. Blocks are disjoint, so the
/// result does not depend on scheduling.
pub(crate) fn for_blocks<F>(amps: &mut [Complex64], min_block: usize, f: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    let len = amps.len();
    if len < PARALLEL_THRESHOLD {
        f(0, amps);
        return;
    }
    let size = min_block.max(PARALLEL_THRESHOLD / 4).min(len);
    amps.par_chunks_mut(size)
        .enumerate()
        .for_each(|(k, b)| f(k * size, b));
}

/// Relabels a schedule onto the sites it touches, in ascending site order.
/// Returns the relabelled schedule and the site held by each new qubit.
pub fn compact_schedule(schedule: &ProtocolSchedule) -> Result<(ProtocolSchedule, Vec<usize>)> {
    let mut sites: Vec<usize> = schedule.pulses().flat_map(|p| p.sites()).collect();
    sites.sort_unstable();
    sites.dedup();
    let index = |s: usize| sites.binary_search(&s).expect("site collected above");
    let layers = schedule
        .layers()
        .iter()
        .map(|layer| {
            let pulses = layer
                .pulses()
                .iter()
                .map(|p| Pulse {
                    kind: p.kind,
                    controls: p
                        .controls
                        .iter()
                        .map(|c| Control { site: index(c.site), strength: c.strength })
                        .collect(),
                    target: index(p.target),
                    duration: p.duration,
                    phase_correction: p.phase_correction,
                })
                .collect();
            ScheduleLayer::new(pulses)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ProtocolSchedule::new(layers, schedule.alpha, &schedule.layout_id, &schedule.protocol),
        sites,
    ))
}

/// One `index re im` line per amplitude.
pub fn write_state(state: &StateVector) -> String {
    let mut out = String::with_capacity(state.amps.len() * 52);
    for (i, a) in state.amps.iter().enumerate() {
        let _ = writeln!(out, "{i} {} {}", fmt17(a.re), fmt17(a.im));
    }
    out
}

pub fn parse_state(text: &str) -> Result<StateVector> {
    let mut amps = Vec::new();
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |msg: &str| Error::Parse { line: k + 1, msg: msg.into() };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(bad("expected index re im"));
        }
        let i: usize = f[0].parse().map_err(|_| bad("bad index"))?;
        if i != amps.len() {
            return Err(bad("indices must run 0, 1, 2, ..."));
        }
        let re = f[1].parse().map_err(|_| bad("bad real part"))?;
        let im = f[2].parse().map_err(|_| bad("bad imaginary part"))?;
        amps.push(Complex64::new(re, im));
    }
    StateVector::from_amplitudes(amps)
}
