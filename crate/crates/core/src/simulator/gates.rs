use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{bit_of, for_blocks};
use crate::error::{check_index, Error, Result};

/// Circuit-level gates on qubit indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    /// `diag(1, e^{i angle})`.
    Phase { qubit: usize, angle: f64 },
    /// `diag(1, 1, 1, e^{i angle})`; symmetric in its two qubits.
    ControlledPhase { control: usize, target: usize, angle: f64 },
    Swap(usize, usize),
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Phase { qubit: q, .. } => (q, None),
            Gate::ControlledPhase { control, target, .. } => (control, Some(target)),
            Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        let (a, b) = self.qubits();
        check_index(a, n)?;
        if let Some(b) = b {
            check_index(b, n)?;
            if a == b {
                return Err(Error::Parameter(format!("two-qubit gate on qubit {a} twice")));
            }
        }
        Ok(())
    }

    pub(crate) fn apply(&self, amps: &mut [Complex64], n: usize) {
        match *self {
            Gate::H(q) => {
                let bit = bit_of(n, q);
                for_blocks(amps, 2 * bit, |base, block| {
                    for off in 0..block.len() {
                        if (base + off) & bit == 0 {
                            let (a0, a1) = (block[off], block[off + bit]);
                            block[off] = (a0 + a1) * FRAC_1_SQRT_2;
                            block[off + bit] = (a0 - a1) * FRAC_1_SQRT_2;
                        }
                    }
                });
            }
            Gate::X(q) => {
                let bit = bit_of(n, q);
                for_blocks(amps, 2 * bit, |base, block| {
                    for off in 0..block.len() {
                        if (base + off) & bit == 0 {
                            block.swap(off, off + bit);
                        }
                    }
                });
            }
            Gate::Phase { qubit, angle } => {
                let mask = bit_of(n, qubit);
                let phase = Complex64::from_polar(1.0, angle);
                for_blocks(amps, 1, |base, block| {
                    for (off, a) in block.iter_mut().enumerate() {
                        if (base + off) & mask == mask {
                            *a *= phase;
                        }
                    }
                });
            }
            Gate::ControlledPhase { control, target, angle } => {
                let mask = bit_of(n, control) | bit_of(n, target);
                let phase = Complex64::from_polar(1.0, angle);
                for_blocks(amps, 1, |base, block| {
                    for (off, a) in block.iter_mut().enumerate() {
                        if (base + off) & mask == mask {
                            *a *= phase;
                        }
                    }
                });
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (bit_of(n, a), bit_of(n, b));
                let span = 2 * ba.max(bb);
                for_blocks(amps, span, |base, block| {
                    for off in 0..block.len() {
                        let idx = base + off;
                        if idx & ba != 0 && idx & bb == 0 {
                            block.swap(off, off - ba + bb);
                        }
                    }
                });
            }
        }
    }
}
