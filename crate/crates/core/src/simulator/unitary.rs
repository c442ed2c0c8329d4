use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{bit_of, check_qubits, pulse_kernel, Gate, STATE_QUBIT_CAP, UNITARY_QUBIT_CAP};
use crate::error::{check_index, Error, Result};
use crate::schedule::ProtocolSchedule;

/// Dense `2^n x 2^n` complex matrix, most significant qubit first.
pub type UnitaryMatrix = DMatrix<Complex64>;

pub fn identity(n: usize) -> Result<UnitaryMatrix> {
    check_qubits(n, UNITARY_QUBIT_CAP)?;
    Ok(DMatrix::identity(1 << n, 1 << n))
}

fn check_schedule_sites(schedule: &ProtocolSchedule, n: usize) -> Result<()> {
    for p in schedule.pulses() {
        for s in p.sites() {
            check_index(s, n)?;
        }
    }
    Ok(())
}

fn evolve_columns(u: &mut UnitaryMatrix, n: usize, schedule: &ProtocolSchedule) {
    let dim = 1 << n;
    u.as_mut_slice().par_chunks_mut(dim).for_each(|col| {
        for p in schedule.pulses() {
            pulse_kernel(col, n, p);
        }
    });
}

/// Full unitary of `schedule` on `n` qubits (qubit = site).
pub fn schedule_unitary(schedule: &ProtocolSchedule, n: usize) -> Result<UnitaryMatrix> {
    let mut u = identity(n)?;
    check_schedule_sites(schedule, n)?;
    evolve_columns(&mut u, n, schedule);
    Ok(u)
}

pub fn circuit_unitary(gates: &[Gate], n: usize) -> Result<UnitaryMatrix> {
    let mut u = identity(n)?;
    for g in gates {
        g.check(n)?;
    }
    let dim = 1 << n;
    u.as_mut_slice().par_chunks_mut(dim).for_each(|col| {
        for g in gates {
            g.apply(col, n);
        }
    });
    Ok(u)
}

fn kept_indices(n: usize, zero_qubits: &[usize]) -> Result<(usize, Vec<usize>)> {
    let mut mask = 0;
    for &q in zero_qubits {
        check_index(q, n)?;
        mask |= bit_of(n, q);
    }
    let kept = (0..1usize << n).filter(|i| i & mask == 0).collect();
    Ok((mask, kept))
}

/// Block of `u` with the listed qubits fixed to `|0>` on input and output.
/// The remaining qubits keep their relative order.
pub fn restrict_to_zero(u: &UnitaryMatrix, n: usize, zero_qubits: &[usize]) -> Result<UnitaryMatrix> {
    if u.nrows() != 1 << n || u.ncols() != 1 << n {
        return Err(Error::Shape(format!("matrix is {}x{}, expected 2^{n}", u.nrows(), u.ncols())));
    }
    let (_, kept) = kept_indices(n, zero_qubits)?;
    Ok(DMatrix::from_fn(kept.len(), kept.len(), |r, c| u[(kept[r], kept[c])]))
}

/// Restriction of the schedule's action to inputs and outputs with the
/// listed qubits at `|0>`, computed without the full unitary. Also returns
/// the largest probability leaking out of that subspace over basis inputs.
pub fn schedule_restricted_unitary(
    schedule: &ProtocolSchedule,
    n: usize,
    zero_qubits: &[usize],
) -> Result<(UnitaryMatrix, f64)> {
    check_qubits(n, STATE_QUBIT_CAP)?;
    check_schedule_sites(schedule, n)?;
    let (mask, kept) = kept_indices(n, zero_qubits)?;
    check_qubits(kept.len().trailing_zeros() as usize, UNITARY_QUBIT_CAP)?;
    let columns: Vec<(Vec<Complex64>, f64)> = kept
        .par_iter()
        .map(|&input| {
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
            amps[input] = Complex64::new(1.0, 0.0);
            for p in schedule.pulses() {
                pulse_kernel(&mut amps, n, p);
            }
            let leak = amps
                .iter()
                .enumerate()
                .filter(|(i, _)| i & mask != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            (kept.iter().map(|&i| amps[i]).collect(), leak)
        })
        .collect();
    let dim = kept.len();
    let leak = columns.iter().map(|c| c.1).fold(0.0, f64::max);
    let m = DMatrix::from_fn(dim, dim, |r, c| columns[c].0[r]);
    Ok((m, leak))
}

/// Permutation flipping qubits `1..n` iff qubit 0 is set.
pub fn ideal_fanout(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::Parameter("fanout needs at least one qubit".into()));
    }
    check_qubits(n, UNITARY_QUBIT_CAP)?;
    let dim = 1usize << n;
    let msb = dim >> 1;
    let mut u = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        let y = if x & msb != 0 { x ^ (msb - 1) } else { x };
        u[(y, x)] = Complex64::new(1.0, 0.0);
    }
    Ok(u)
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `|| a - e^{i phi} b ||` with `phi` aligning the traces `tr(b^dag a)`.
pub fn distance_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(operator_norm(&(a - b * phase)))
}

pub fn is_unitary(u: &DMatrix<Complex64>, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let gram = u.adjoint() * u;
    operator_norm(&(gram - DMatrix::identity(u.nrows(), u.ncols()))) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeLayout, QubitAssignment};
    use crate::protocols::plan_fanout;
    use crate::schedule::{cnot_pulse, reverse_schedule, ScheduleLayer};

    fn one(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn completed_pulse_is_cnot() {
        let chain = LatticeLayout::chain(2).unwrap();
        let layer = ScheduleLayer::new(vec![cnot_pulse(0, 1, &chain, 2.0).unwrap()]).unwrap();
        let s = ProtocolSchedule::new(vec![layer], 2.0, &chain.id(), "t");
        let u = schedule_unitary(&s, 2).unwrap();
        let mut cnot = DMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            cnot[(r, c)] = one(1.0);
        }
        assert!(operator_norm(&(u - cnot)) < 1e-12);
    }

    #[test]
    fn ideal_fanout_cases() {
        let f = ideal_fanout(3).unwrap();
        assert_eq!(f[(0b111, 0b100)], one(1.0));
        assert_eq!(f[(0b001, 0b001)], one(1.0));
        assert!(is_unitary(&f, 1e-12));
    }

    #[test]
    fn fanout_schedule_restricts_to_ideal() {
        let layout = LatticeLayout::for_fanout(1, 3).unwrap();
        let a = QubitAssignment::fanout(&layout, 3).unwrap();
        let s = plan_fanout(&a, 1.0).unwrap().schedule().unwrap();
        let u = schedule_unitary(&s, layout.len()).unwrap();
        assert!(is_unitary(&u, 1e-10));
        let block = restrict_to_zero(&u, layout.len(), a.ancilla_sites()).unwrap();
        assert!(distance_up_to_phase(&block, &ideal_fanout(3).unwrap()).unwrap() < 1e-10);

        let (direct, leak) = schedule_restricted_unitary(&s, layout.len(), a.ancilla_sites()).unwrap();
        assert!(leak < 1e-20);
        assert!(operator_norm(&(direct - block)) < 1e-14);

        let mut round = s.clone();
        round.extend(&reverse_schedule(&s));
        // collective pulses are exact only where controls agree, which holds
        // on every input with the ancillae at |0>
        let (id, leak) = schedule_restricted_unitary(&round, layout.len(), a.ancilla_sites()).unwrap();
        assert!(leak < 1e-20);
        assert!(distance_up_to_phase(&id, &identity(3).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn single_control_schedules_invert_everywhere() {
        let chain = LatticeLayout::chain(4).unwrap();
        let layers = vec![
            ScheduleLayer::new(vec![cnot_pulse(0, 2, &chain, 1.5).unwrap()]).unwrap(),
            ScheduleLayer::new(vec![cnot_pulse(2, 3, &chain, 1.5).unwrap(), cnot_pulse(0, 1, &chain, 1.5).unwrap()])
                .unwrap(),
        ];
        let s = ProtocolSchedule::new(layers, 1.5, &chain.id(), "t");
        let mut round = s.clone();
        round.extend(&reverse_schedule(&s));
        let u = schedule_unitary(&round, 4).unwrap();
        assert!(distance_up_to_phase(&u, &identity(4).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(identity(13), Err(Error::Capacity(_))));
        assert!(matches!(ideal_fanout(13), Err(Error::Capacity(_))));
    }
}
