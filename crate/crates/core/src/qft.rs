//! Exact and banded approximate quantum Fourier transforms.
//!
//! Basis index `y = y_1 2^(n-1) + ... + y_n`, with qubit 1 the most
//! significant bit. `U[y][z] = w^(yz) / sqrt(2^n)` with `w = exp(2 pi i / 2^n)`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_index, Error, Result};
use crate::simulator::{check_qubits, circuit_unitary, operator_norm, Gate, UnitaryMatrix, UNITARY_QUBIT_CAP};

/// Register size and rotation band of a (possibly approximate) transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasedFourierSpec {
    n: usize,
    band: usize,
}

impl PhasedFourierSpec {
    /// `band` in `1..=n`; `band == n` keeps every rotation.
    pub fn new(n: usize, band: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("the transform needs at least one qubit".into()));
        }
        if !(1..=n).contains(&band) {
            return Err(Error::Parameter(format!("band {band} outside 1..={n}")));
        }
        Ok(PhasedFourierSpec { n, band })
    }

    pub fn exact(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn dimension(&self) -> usize {
        1 << self.n
    }

    pub fn omega(&self) -> Complex64 {
        self.omega_pow(1)
    }

    /// `w^e`, with `e` reduced mod `2^n` before evaluation.
    pub fn omega_pow(&self, e: i64) -> Complex64 {
        let dim = self.dimension() as i64;
        let k = e.rem_euclid(dim);
        Complex64::from_polar(1.0, TAU * k as f64 / dim as f64)
    }

    /// Gate list: Hadamards, controlled rotations by `2 pi / 2^d` for
    /// `d <= band`, then the qubit-reversal swaps.
    pub fn circuit(&self) -> Vec<Gate> {
        let n = self.n;
        let mut gates = Vec::new();
        for j in 0..n {
            gates.push(Gate::H(j));
            for m in j + 1..n {
                let d = m - j + 1;
                if d <= self.band {
                    gates.push(Gate::ControlledPhase {
                        control: m,
                        target: j,
                        angle: TAU / (1u64 << d) as f64,
                    });
                }
            }
        }
        for j in 0..n / 2 {
            gates.push(Gate::Swap(j, n - 1 - j));
        }
        gates
    }
}

fn fourier_matrix(n: usize, sign: i64) -> Result<UnitaryMatrix> {
    check_qubits(n, UNITARY_QUBIT_CAP)?;
    let ft = PhasedFourierSpec::exact(n.max(1))?;
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let table: Vec<Complex64> = (0..dim as i64).map(|k| ft.omega_pow(sign * k) * scale).collect();
    Ok(DMatrix::from_fn(dim, dim, |y, z| table[(y * z) % dim]))
}

/// Exact transform from its matrix elements.
pub fn qft_unitary(n: usize) -> Result<UnitaryMatrix> {
    fourier_matrix(n, 1)
}

/// Inverse transform via `w -> w^-1`.
pub fn qft_inverse(n: usize) -> Result<UnitaryMatrix> {
    fourier_matrix(n, -1)
}

/// Banded circuit unitary and its realised error `||U - U_band||`.
pub fn aqft_unitary(n: usize, band: usize) -> Result<(UnitaryMatrix, f64)> {
    check_qubits(n, UNITARY_QUBIT_CAP)?;
    let ft = PhasedFourierSpec::new(n, band)?;
    let approx = circuit_unitary(&ft.circuit(), n)?;
    let eps = operator_norm(&(qft_unitary(n)? - &approx));
    Ok((approx, eps))
}

/// Entry `(z, x)` of `U^dag Z_1 U` in closed form.
pub fn z1prime_element(n: usize, z: usize, x: usize) -> Result<Complex64> {
    let ft = PhasedFourierSpec::exact(n)?;
    check_index(z, ft.dimension())?;
    check_index(x, ft.dimension())?;
    let diff = x as i64 - z as i64;
    if diff % 2 == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let prefactor = 4.0 / ft.dimension() as f64;
    Ok(Complex64::new(prefactor, 0.0) / (Complex64::new(1.0, 0.0) - ft.omega_pow(diff)))
}

pub fn z1prime_matrix(n: usize) -> Result<UnitaryMatrix> {
    check_qubits(n, UNITARY_QUBIT_CAP)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for z in 0..dim {
        for x in 0..dim {
            m[(z, x)] = z1prime_element(n, z, x)?;
        }
    }
    Ok(m)
}

/// `U^dag P U` for a diagonal `P` with entries `diag`.
pub fn conjugate_diagonal(u: &UnitaryMatrix, diag: &[f64]) -> Result<UnitaryMatrix> {
    if u.nrows() != diag.len() || !u.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix with {} diagonal entries", u.nrows(), u.ncols(), diag.len())));
    }
    let mut scaled = u.clone();
    for (r, &d) in diag.iter().enumerate() {
        scaled.row_mut(r).scale_mut(d);
    }
    Ok(u.adjoint() * scaled)
}

/// `Z` on qubit 1 as a diagonal.
pub fn z1_diagonal(n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    (0..dim).map(|y| if y < dim / 2 { 1.0 } else { -1.0 }).collect()
}

/// `V = H^(x)n U`, which maps `|psi>|0...0>` to `|0...0>|psi>`.
pub fn state_transfer_unitary(n: usize) -> Result<UnitaryMatrix> {
    let mut v = qft_unitary(n)?;
    let dim = 1usize << n;
    let hadamards: Vec<Gate> = (0..n).map(Gate::H).collect();
    for col in v.as_mut_slice().chunks_mut(dim) {
        for g in &hadamards {
            g.apply(col, n);
        }
    }
    Ok(v)
}

/// Single-qubit Hadamard as a matrix, for callers building small oracles.
pub fn hadamard() -> UnitaryMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    DMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}
