//! Pauli-basis operator analysis.
//!
//! Pauli strings are stored as `(x, z)` bitmasks over qubits, using the
//! simulator's bit order (qubit 0 is the most significant bit). Per qubit,
//! `(0,0) = I`, `(1,0) = X`, `(1,1) = Y`, `(0,1) = Z`, so that
//! `P|b> = i^|x&z| (-1)^|z&b| |b ^ x>`.

mod reports;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_index, Error, Result};
use crate::lattice::LatticeLayout;
use crate::simulator::{bit_of, check_qubits};

pub use reports::{
    aqft_spread, aqft_spread_in, chain_region, fanout_spread, fanout_spread_in, fit_decay,
    placement_correlation, product_input, verify_lemma, verify_lemma_in, CorrelationProfile,
    DecayFit, ProductInput, SpreadingReport, LEMMA_TOLERANCE,
};

/// Largest register for explicit Pauli enumeration.
pub const ENUMERATION_QUBIT_CAP: usize = 8;
/// Largest register for partial-trace weights.
pub const PARTIAL_TRACE_QUBIT_CAP: usize = 12;

/// Coefficients at or below this magnitude are left out of decompositions.
const DROP_BELOW: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    n: usize,
    x: usize,
    z: usize,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: 0, z: 0 }
    }

    /// From bitmasks in simulator bit order.
    pub fn from_masks(n: usize, x: usize, z: usize) -> Result<Self> {
        let limit = 1usize << n;
        if x >= limit || z >= limit {
            return Err(Error::Parameter(format!("masks exceed {n} qubits")));
        }
        Ok(PauliString { n, x, z })
    }

    /// A single letter on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: char) -> Result<Self> {
        check_index(qubit, n)?;
        let bit = bit_of(n, qubit);
        let (x, z) = letter_masks(letter).ok_or_else(|| Error::Parameter(format!("unknown Pauli letter {letter:?}")))?;
        Ok(PauliString { n, x: if x { bit } else { 0 }, z: if z { bit } else { 0 } })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> usize {
        self.x
    }

    pub fn z_mask(&self) -> usize {
        self.z
    }

    /// Qubits where the string is not the identity, as a bitmask.
    pub fn support_mask(&self) -> usize {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn letter(&self, qubit: usize) -> char {
        let bit = bit_of(self.n, qubit);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// `i^|x & z|`, the phase from the `Y` letters.
    fn y_phase(&self) -> Complex64 {
        match (self.x & self.z).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let phase = self.y_phase();
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let sign = if (self.z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(b ^ self.x, b)] = phase * sign;
        }
        m
    }
}

fn letter_masks(letter: char) -> Option<(bool, bool)> {
    match letter {
        'I' => Some((false, false)),
        'X' => Some((true, false)),
        'Y' => Some((true, true)),
        'Z' => Some((false, true)),
        _ => None,
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (0..self.n).try_for_each(|q| write!(f, "{}", self.letter(q)))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > usize::BITS as usize - 1 {
            return Err(Error::Parameter(format!("bad Pauli string length {n}")));
        }
        let (mut x, mut z) = (0, 0);
        for (q, ch) in s.chars().enumerate() {
            let (bx, bz) = letter_masks(ch).ok_or_else(|| Error::Parameter(format!("unknown Pauli letter {ch:?}")))?;
            let bit = bit_of(n, q);
            if bx {
                x |= bit;
            }
            if bz {
                z |= bit;
            }
        }
        Ok(PauliString { n, x, z })
    }
}

/// Sparse expansion `O = sum_P c_P P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    n: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliDecomposition {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// `sum_P |c_P|^2`, equal to the normalised Frobenius weight.
    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, &c) in &self.terms {
            let phase = p.y_phase() * c;
            for b in 0..dim {
                let sign = if (p.z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(b ^ p.x, b)] += phase * sign;
            }
        }
        m
    }
}

fn check_square(op: &DMatrix<Complex64>, n: usize) -> Result<()> {
    let dim = 1usize << n;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::Shape(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

/// Qubit count of a square `2^n`-dimensional operator.
pub fn operator_qubits(op: &DMatrix<Complex64>) -> Result<usize> {
    let dim = op.nrows();
    if !op.is_square() || dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!("{}x{} is not a qubit operator", op.nrows(), op.ncols())));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Coefficients `c_P = Tr(P^dag O) / 2^n`.
pub fn decompose(op: &DMatrix<Complex64>, n: usize) -> Result<PauliDecomposition> {
    check_qubits(n, ENUMERATION_QUBIT_CAP)?;
    check_square(op, n)?;
    let dim = 1usize << n;
    let mut terms = BTreeMap::new();
    let mut v = vec![Complex64::default(); dim];
    for x in 0..dim {
        for (b, slot) in v.iter_mut().enumerate() {
            *slot = op[(b ^ x, b)];
        }
        walsh_hadamard(&mut v);
        for (z, &w) in v.iter().enumerate() {
            let p = PauliString { n, x, z };
            let c = p.y_phase().conj() * w / dim as f64;
            if c.norm() > DROP_BELOW {
                terms.insert(p, c);
            }
        }
    }
    Ok(PauliDecomposition { n, terms })
}

/// `Tr(O^dag O) / 2^n`.
pub fn frobenius_weight(op: &DMatrix<Complex64>, n: usize) -> Result<f64> {
    check_square(op, n)?;
    Ok(op.iter().map(|c| c.norm_sqr()).sum::<f64>() / (1usize << n) as f64)
}

/// Qubits at distance at least `radius` from a reference qubit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    sites: Vec<usize>,
    radius: Option<f64>,
    reference: Option<usize>,
}

impl Region {
    pub fn by_radius(layout: &LatticeLayout, reference: usize, radius: f64) -> Result<Self> {
        check_index(reference, layout.len())?;
        let mut sites = Vec::new();
        for s in 0..layout.len() {
            if layout.distance(reference, s)? >= radius {
                sites.push(s);
            }
        }
        Ok(Region { sites, radius: Some(radius), reference: Some(reference) })
    }

    pub fn from_sites(sites: &[usize]) -> Self {
        let mut sites = sites.to_vec();
        sites.sort_unstable();
        sites.dedup();
        Region { sites, radius: None, reference: None }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn reference(&self) -> Option<usize> {
        self.reference
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    fn mask(&self, n: usize) -> Result<usize> {
        if self.sites.is_empty() {
            return Err(Error::Parameter("empty region".into()));
        }
        let mut mask = 0;
        for &s in &self.sites {
            check_index(s, n)?;
            mask |= bit_of(n, s);
        }
        Ok(mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMethod {
    /// Sum `|c_P|^2` over an explicit Pauli decomposition.
    Enumerate,
    /// Subtract the weight of the region-traced operator.
    PartialTrace,
}

/// Weight of `O` on Pauli strings acting nontrivially somewhere in `region`.
pub fn qr_weight(op: &DMatrix<Complex64>, region: &Region) -> Result<f64> {
    qr_weight_with(op, region, WeightMethod::PartialTrace)
}

pub fn qr_weight_with(op: &DMatrix<Complex64>, region: &Region, method: WeightMethod) -> Result<f64> {
    let n = operator_qubits(op)?;
    let mask = region.mask(n)?;
    match method {
        WeightMethod::Enumerate => {
            let d = decompose(op, n)?;
            Ok(d
                .terms
                .iter()
                .filter(|(p, _)| p.support_mask() & mask != 0)
                .map(|(_, c)| c.norm_sqr())
                .sum())
        }
        WeightMethod::PartialTrace => {
            check_qubits(n, PARTIAL_TRACE_QUBIT_CAP)?;
            Ok(frobenius_weight(op, n)? - traced_weight(op, n, mask))
        }
    }
}

/// Weight of the component of `O` acting trivially on `region`.
pub fn trivial_weight(op: &DMatrix<Complex64>, region: &Region) -> Result<f64> {
    let n = operator_qubits(op)?;
    check_qubits(n, PARTIAL_TRACE_QUBIT_CAP)?;
    Ok(traced_weight(op, n, region.mask(n)?))
}

/// `||Tr_B O||^2 / 2^(|B| + n)` for the qubits `B` in `mask`.
fn traced_weight(op: &DMatrix<Complex64>, n: usize, mask: usize) -> f64 {
    let dim = 1usize << n;
    let kept: Vec<usize> = (0..dim).filter(|i| i & mask == 0).collect();
    let traced: Vec<usize> = (0..dim).filter(|i| i & !mask == 0).collect();
    let mut total = 0.0;
    for &a in &kept {
        for &a2 in &kept {
            let s: Complex64 = traced.iter().map(|&b| op[(a | b, a2 | b)]).sum();
            total += s.norm_sqr();
        }
    }
    total / (traced.len() * dim) as f64
}
