//! Spreading checks for the Fourier transform and fanout, and the
//! placement-dependent correlation profile.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{qr_weight, Region, ENUMERATION_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::lattice::{LatticeLayout, Placement, QubitAssignment};
use crate::numeric::linear_fit;
use crate::qft::{aqft_unitary, conjugate_diagonal, qft_unitary, z1_diagonal};
use crate::simulator::{bit_of, ideal_fanout, StateVector};

/// Slack allowed below an exact weight of 1.
pub const LEMMA_TOLERANCE: f64 = 1e-10;

/// Largest register for the correlation profile.
const CORRELATION_QUBIT_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadingReport {
    pub n: usize,
    pub region_r: f64,
    pub weight: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub pass: bool,
}

fn check_range(n: usize) -> Result<()> {
    if !(1..=ENUMERATION_QUBIT_CAP).contains(&n) {
        return Err(Error::Parameter(format!("n = {n} outside 1..={ENUMERATION_QUBIT_CAP}")));
    }
    Ok(())
}

/// The last qubit of a canonical chain, as the region at distance `n - 1`
/// from the first.
fn far_end(n: usize) -> Result<Region> {
    Region::by_radius(&LatticeLayout::chain(n)?, 0, (n - 1) as f64)
}

fn report(n: usize, region: &Region, weight: f64, epsilon: f64, bound: f64) -> SpreadingReport {
    SpreadingReport {
        n,
        region_r: region.radius().unwrap_or(f64::NAN),
        weight,
        epsilon,
        bound,
        pass: weight >= bound - LEMMA_TOLERANCE,
    }
}

/// Region at distance `radius` or more from the first qubit of a canonical
/// chain of `n`; `None` selects the far end.
pub fn chain_region(n: usize, radius: Option<f64>) -> Result<Region> {
    match radius {
        None => far_end(n),
        Some(r) => Region::by_radius(&LatticeLayout::chain(n)?, 0, r),
    }
}

/// Weight of `U^dag Z_1 U` at the far end of the chain; passes when it is 1.
pub fn verify_lemma(n: usize) -> Result<SpreadingReport> {
    check_range(n)?;
    verify_lemma_in(n, &far_end(n)?)
}

pub fn verify_lemma_in(n: usize, region: &Region) -> Result<SpreadingReport> {
    check_range(n)?;
    let op = conjugate_diagonal(&qft_unitary(n)?, &z1_diagonal(n))?;
    Ok(report(n, region, qr_weight(&op, region)?, 0.0, 1.0))
}

/// Same weight for the banded circuit, against the bound `1 - 2 eps`.
pub fn aqft_spread(n: usize, band: usize) -> Result<SpreadingReport> {
    check_range(n)?;
    aqft_spread_in(n, band, &far_end(n)?)
}

pub fn aqft_spread_in(n: usize, band: usize, region: &Region) -> Result<SpreadingReport> {
    check_range(n)?;
    let (approx, eps) = aqft_unitary(n, band)?;
    let op = conjugate_diagonal(&approx, &z1_diagonal(n))?;
    Ok(report(n, region, qr_weight(&op, region)?, eps, 1.0 - 2.0 * eps))
}

/// Weight of `F^dag X_1 F` at the far end, for the ideal fanout `F`.
pub fn fanout_spread(n: usize) -> Result<SpreadingReport> {
    check_range(n)?;
    fanout_spread_in(n, &far_end(n)?)
}

pub fn fanout_spread_in(n: usize, region: &Region) -> Result<SpreadingReport> {
    check_range(n)?;
    let f = ideal_fanout(n)?;
    let dim = 1usize << n;
    let msb = dim >> 1;
    let mut x1 = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        x1[(b ^ msb, b)] = Complex64::new(1.0, 0.0);
    }
    let op = f.adjoint() * x1 * &f;
    Ok(report(n, region, qr_weight(&op, region)?, 0.0, 1.0))
}

/// Product input for the correlation profile, one state per logical qubit.
#[derive(Debug, Clone, PartialEq)]
pub enum ProductInput {
    Zero,
    Plus,
    /// Independent Haar-random qubits from a seeded generator.
    Random(u64),
    Explicit(Vec<[Complex64; 2]>),
}

impl ProductInput {
    pub fn parse(name: &str, seed: u64) -> Result<Self> {
        match name {
            "zero" => Ok(ProductInput::Zero),
            "plus" => Ok(ProductInput::Plus),
            "random" => Ok(ProductInput::Random(seed)),
            other => Err(Error::Parameter(format!("unknown product input {other:?}"))),
        }
    }
}

/// Single-qubit states for `n` logical qubits.
pub fn product_input(input: &ProductInput, n: usize) -> Result<Vec<[Complex64; 2]>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(match input {
        ProductInput::Zero => vec![[one, zero]; n],
        ProductInput::Plus => vec![[one * FRAC_1_SQRT_2, one * FRAC_1_SQRT_2]; n],
        ProductInput::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n)
                .map(|_| {
                    let mut v: [Complex64; 2] = std::array::from_fn(|_| {
                        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
                    });
                    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                    v.iter_mut().for_each(|a| *a /= norm);
                    v
                })
                .collect()
        }
        ProductInput::Explicit(states) => {
            if states.len() != n {
                return Err(Error::Shape(format!("{} qubit states for n = {n}", states.len())));
            }
            states.clone()
        }
    })
}

/// Largest connected `ZZ` correlator at each chain distance `1..n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationProfile {
    pub n: usize,
    pub placement: Placement,
    pub distances: Vec<usize>,
    pub correlations: Vec<f64>,
}

/// Exponential fit `corr ~ exp(intercept - rate * distance)` over the
/// points with nonzero correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

/// Output of the exact transform on `input`, with qubits at chain positions
/// given by `placement`.
pub fn placement_correlation(n: usize, placement: Placement, input: &ProductInput) -> Result<CorrelationProfile> {
    if !(2..=CORRELATION_QUBIT_CAP).contains(&n) {
        return Err(Error::Parameter(format!("n = {n} outside 2..={CORRELATION_QUBIT_CAP}")));
    }
    let assignment = QubitAssignment::new(&LatticeLayout::chain(n)?, n, placement)?;
    let state = StateVector::product(&product_input(input, n)?)?;
    let probs = fourier_probabilities(state.amplitudes(), n);

    let z_sign = |b: usize, q: usize| if b & bit_of(n, q) == 0 { 1.0 } else { -1.0 };
    let single: Vec<f64> = (0..n)
        .map(|q| probs.iter().enumerate().map(|(b, p)| p * z_sign(b, q)).sum())
        .collect();
    let mut best = vec![0.0f64; n];
    for q in 0..n {
        for r in q + 1..n {
            let zz: f64 = probs.iter().enumerate().map(|(b, p)| p * z_sign(b, q) * z_sign(b, r)).sum();
            let conn = (zz - single[q] * single[r]).abs();
            let d = assignment.data_site(q)?.abs_diff(assignment.data_site(r)?);
            best[d] = best[d].max(conn);
        }
    }
    Ok(CorrelationProfile {
        n,
        placement,
        distances: (1..n).collect(),
        correlations: best[1..].to_vec(),
    })
}

/// `|U psi|^2` by direct summation of the transform's matrix elements.
fn fourier_probabilities(psi: &[Complex64], n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let table: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::from_polar(scale, TAU * k as f64 / dim as f64))
        .collect();
    (0..dim)
        .map(|y| {
            let amp: Complex64 = psi.iter().enumerate().map(|(z, a)| table[(y * z) % dim] * a).sum();
            amp.norm_sqr()
        })
        .collect()
}

/// Needs at least two points above `floor`.
pub fn fit_decay(profile: &CorrelationProfile, floor: f64) -> Option<DecayFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = profile
        .distances
        .iter()
        .zip(&profile.correlations)
        .filter(|(_, &c)| c > floor)
        .map(|(&d, &c)| (d as f64, c.ln()))
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    let (slope, intercept, residual) = linear_fit(&xs, &ys);
    Some(DecayFit { rate: -slope, intercept, residual, points: xs.len() })
}
