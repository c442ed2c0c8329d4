//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! gating criterion fails. Runs without the libtest harness so the lines are
//! always printed.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fanout_core::bounds::{
    frob_lower_bound_1d_exact, lr_lower_bound_exact, t_ghz_regime_exact, RegimeKind, ScalingRegime,
};
use fanout_core::cli::scaling_study;
use fanout_core::lattice::{LatticeLayout, Placement, QubitAssignment};
use fanout_core::protocols::{plan_broadcast, plan_broadcast_over, plan_fanout};
use fanout_core::qft::{conjugate_diagonal, qft_unitary, state_transfer_unitary, z1_diagonal, z1prime_matrix};
use fanout_core::simulator::{
    compact_schedule, distance_up_to_phase, ideal_fanout, operator_norm, schedule_restricted_unitary,
    state_fidelity, StateVector,
};
use fanout_core::spreading::{
    aqft_spread, decompose, fanout_spread, qr_weight_with, verify_lemma, Region, WeightMethod,
};

const FIDELITY_TOL: f64 = 1e-10;
const OPERATOR_TOL: f64 = 1e-10;
const LEMMA_TOL: f64 = 1e-12;
const AQFT_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
const RANDOM_TRIALS: usize = 100;
const RANDOM_OPERATORS: usize = 50;

const BROADCAST_BUDGET: Duration = Duration::from_secs(60);
const FANOUT_BUDGET: Duration = Duration::from_secs(300);
const SCALING_BUDGET: Duration = Duration::from_secs(120);
const LEMMA_BUDGET: Duration = Duration::from_secs(120);
const AQFT_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let mut v: [Complex64; 2] = std::array::from_fn(|_| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

fn random_operator(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn within_budget(start: Instant, budget: Duration) -> std::result::Result<(), String> {
    let spent = start.elapsed();
    if spent <= budget {
        Ok(())
    } else {
        Err(format!("took {spent:.1?}, budget {budget:?}"))
    }
}

/// Broadcast of a random qubit onto fresh qubits matches `psi0|0..0> + psi1|1..1>`.
fn broadcast_map() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let zero = [c(1.0, 0.0), c(0.0, 0.0)];
    for (dimension, alpha) in [(1, 0.5), (1, 1.0), (1, 3.0), (2, 2.0), (2, 4.0)] {
        for n in 2..=10 {
            let layout = LatticeLayout::for_qubits(dimension, n).map_err(|e| e.to_string())?;
            let assignment = QubitAssignment::new(&layout, n, Placement::Canonical).map_err(|e| e.to_string())?;
            let plan = plan_broadcast(&assignment, alpha, 0).map_err(|e| e.to_string())?;
            let (schedule, sites) = compact_schedule(&plan.schedule().map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            if sites != (0..n).collect::<Vec<_>>() {
                return Err(format!("n={n}: broadcast skipped a qubit"));
            }
            for _ in 0..RANDOM_TRIALS {
                let psi = random_qubit(&mut rng);
                let mut qubits = vec![zero; n];
                qubits[0] = psi;
                let mut state = StateVector::product(&qubits).map_err(|e| e.to_string())?;
                state.run_schedule(&schedule).map_err(|e| e.to_string())?;
                let mut target = vec![c(0.0, 0.0); 1 << n];
                target[0] = psi[0];
                target[(1 << n) - 1] = psi[1];
                let target = StateVector::from_amplitudes(target).map_err(|e| e.to_string())?;
                worst = worst.max(1.0 - state_fidelity(&state, &target).map_err(|e| e.to_string())?);
            }
        }
    }
    within_budget(start, BROADCAST_BUDGET)?;
    let line = format!("worst infidelity {worst:.3e} (tol {FIDELITY_TOL:e})");
    if worst <= FIDELITY_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Restricted fanout unitary against the ideal permutation.
fn fanout_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst_norm = 0.0f64;
    let mut worst_leak = 0.0f64;
    for (dimension, alpha) in [(1, 0.0), (1, 1.0), (1, 2.5), (2, 1.0), (2, 4.0)] {
        for n in 2..=6 {
            let layout = LatticeLayout::for_fanout(dimension, n).map_err(|e| e.to_string())?;
            let assignment = QubitAssignment::fanout(&layout, n).map_err(|e| e.to_string())?;
            let plan = plan_fanout(&assignment, alpha).map_err(|e| e.to_string())?;
            let (schedule, sites) = compact_schedule(&plan.schedule().map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let index = |s: &usize| sites.binary_search(s).expect("touched site");
            let data: Vec<usize> = assignment.data_sites().iter().map(index).collect();
            let ancillae: Vec<usize> = assignment.ancilla_sites().iter().map(index).collect();
            if data.windows(2).any(|w| w[0] > w[1]) {
                return Err(format!("D={dimension} n={n}: data qubits out of order after compaction"));
            }
            let (u, leak) =
                schedule_restricted_unitary(&schedule, sites.len(), &ancillae).map_err(|e| e.to_string())?;
            let ideal = ideal_fanout(n).map_err(|e| e.to_string())?;
            worst_norm = worst_norm.max(distance_up_to_phase(&u, &ideal).map_err(|e| e.to_string())?);
            worst_leak = worst_leak.max(leak);
        }
    }
    within_budget(start, FANOUT_BUDGET)?;
    let line = format!(
        "worst operator-norm error {worst_norm:.3e} (tol {OPERATOR_TOL:e}), worst ancilla leak {worst_leak:.3e} (tol {FIDELITY_TOL:e})"
    );
    if worst_norm <= OPERATOR_TOL && worst_leak <= FIDELITY_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Net fanout makespan is exactly twice the broadcast makespan.
fn makespan_identity() -> Outcome {
    let mut cases = 0;
    for dimension in 1..=3 {
        for alpha in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0] {
            for n in [2, 3, 5, 8, 16, 33, 64, 100] {
                let layout = LatticeLayout::for_fanout(dimension, n).map_err(|e| e.to_string())?;
                let assignment = QubitAssignment::fanout(&layout, n).map_err(|e| e.to_string())?;
                let plan = plan_fanout(&assignment, alpha).map_err(|e| e.to_string())?;
                let anc = assignment.ancilla_sites();
                let broadcast = plan_broadcast_over(&layout, anc, anc[0], alpha).map_err(|e| e.to_string())?;
                let net = plan.makespan_net();
                if net != 2.0 * broadcast.makespan() {
                    return Err(format!("D={dimension} alpha={alpha} n={n}: {net} vs 2 x {}", broadcast.makespan()));
                }
                if n <= 16 {
                    let materialised = plan.schedule().map_err(|e| e.to_string())?.net_makespan();
                    let single = broadcast.schedule().map_err(|e| e.to_string())?.makespan();
                    if materialised != 2.0 * single {
                        return Err(format!("D={dimension} alpha={alpha} n={n}: schedule {materialised} vs 2 x {single}"));
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (alpha, D, n) cases, bitwise equal"))
}

/// Fitted broadcast-time regimes over `n = 2^4 .. 2^16`.
fn scaling_regimes() -> Outcome {
    let start = Instant::now();
    let cases = [(1, 0.5), (1, 1.0), (1, 1.5), (1, 3.0), (2, 1.0), (2, 2.0), (3, 1.5)];
    let mut details = Vec::new();
    let mut pass = true;
    for (dimension, alpha) in cases {
        let study = scaling_study(alpha, dimension, &scaling_samples()).map_err(|e| e.to_string())?;
        pass &= study.pass;
        details.push(format!(
            "D={dimension} alpha={alpha} {} {:.4} (residual {:.4}){}",
            study.regime_tag,
            study.fit.value,
            study.fit.residual,
            if study.pass { "" } else { " mismatch" }
        ));
    }
    within_budget(start, SCALING_BUDGET)?;
    let line = details.join("; ");
    if pass {
        Ok(line)
    } else {
        Err(line)
    }
}

fn scaling_samples() -> Vec<usize> {
    (4..=16).map(|k| 1usize << k).collect()
}

/// Logarithmic regime in three dimensions, reported but not gated.
fn three_dimensional_note() -> String {
    match scaling_study(3.0, 3, &scaling_samples()) {
        Ok(s) => format!(
            "D=3 alpha=3 logarithmic slope {:.4}, residual {:.4} ({:.1}% of slope, limit 5%), {}",
            s.fit.value,
            s.fit.residual,
            100.0 * s.fit.residual / s.fit.value,
            if s.pass { "within tolerance" } else { "outside tolerance" }
        ),
        Err(e) => format!("D=3 alpha=3 failed: {e}"),
    }
}

/// Weight of the conjugated `Z_1` at the far end is exactly 1.
fn lemma_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst_weight = 0.0f64;
    let mut worst_closed = 0.0f64;
    for n in 2..=8 {
        let report = verify_lemma(n).map_err(|e| e.to_string())?;
        worst_weight = worst_weight.max((report.weight - 1.0).abs());
        let dense = conjugate_diagonal(&qft_unitary(n).map_err(|e| e.to_string())?, &z1_diagonal(n))
            .map_err(|e| e.to_string())?;
        let closed = z1prime_matrix(n).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max(operator_norm(&(dense - closed)));
    }
    within_budget(start, LEMMA_BUDGET)?;
    let line = format!(
        "weight error {worst_weight:.3e} (tol {LEMMA_TOL:e}), closed form error {worst_closed:.3e} (tol {OPERATOR_TOL:e})"
    );
    if worst_weight <= LEMMA_TOL && worst_closed <= OPERATOR_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Banded transform weights stay above `1 - 2 eps`.
fn aqft_spreading() -> Outcome {
    let start = Instant::now();
    let mut worst_margin = f64::INFINITY;
    let mut exact_error = 0.0f64;
    for n in 2..=8 {
        for band in 1..=n {
            let r = aqft_spread(n, band).map_err(|e| e.to_string())?;
            worst_margin = worst_margin.min(r.weight - (1.0 - 2.0 * r.epsilon));
            if band == n {
                exact_error = exact_error.max(r.epsilon).max((r.weight - 1.0).abs());
            }
        }
    }
    within_budget(start, AQFT_BUDGET)?;
    let line = format!(
        "smallest margin above 1 - 2 eps {worst_margin:.3e} (tol {AQFT_TOL:e}), full-band error {exact_error:.3e}"
    );
    if worst_margin >= -AQFT_TOL && exact_error <= AQFT_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

/// `H^n U` moves a state on the first qubit to the last.
fn state_transfer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = FRAC_1_SQRT_2;
    let fixed = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(h, 0.0), c(h, 0.0)],
        [c(h, 0.0), c(-h, 0.0)],
        [c(h, 0.0), c(0.0, h)],
        [c(h, 0.0), c(0.0, -h)],
    ];
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let v = state_transfer_unitary(n).map_err(|e| e.to_string())?;
        let dim = 1usize << n;
        let half = dim / 2;
        let inputs = fixed.iter().copied().chain((0..RANDOM_TRIALS).map(|_| random_qubit(&mut rng)));
        for psi in inputs {
            let out = v.column(0) * psi[0] + v.column(half) * psi[1];
            let overlap = out[0].conj() * psi[0] + out[1].conj() * psi[1];
            worst = worst.max(1.0 - overlap.norm_sqr());
        }
    }
    let line = format!("worst infidelity {worst:.3e} (tol {FIDELITY_TOL:e})");
    if worst <= FIDELITY_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Same weight for the fanout-conjugated `X_1`.
fn fanout_spreading() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=8 {
        worst = worst.max((fanout_spread(n).map_err(|e| e.to_string())?.weight - 1.0).abs());
    }
    let line = format!("weight error {worst:.3e} (tol {LEMMA_TOL:e})");
    if worst <= LEMMA_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

fn power(exponent: Rational64, log_divisor: bool) -> RegimeKind {
    RegimeKind::Power { exponent, log_divisor }
}

/// Tabulated regimes and exponents, compared exactly.
fn bound_formulas() -> Outcome {
    let q = Rational64::new;
    let i = Rational64::from_integer;
    let mut checks: Vec<(String, fanout_core::Result<ScalingRegime>, RegimeKind)> = Vec::new();
    for d in 1..=3i64 {
        let du = d as usize;
        checks.push((format!("lr a=D D={d}"), lr_lower_bound_exact(i(d), du), RegimeKind::Constant));
        checks.push((format!("lr a=2D+1 D={d}"), lr_lower_bound_exact(i(2 * d + 1), du), power(q(1, d + 1), false)));
        checks.push((format!("lr a=2D D={d}"), lr_lower_bound_exact(i(2 * d), du), RegimeKind::Logarithmic));
        checks.push((format!("lr a=3D+1/2 D={d}"), lr_lower_bound_exact(i(3 * d) + q(1, 2), du), power(i(1), false)));
        checks.push((format!("ghz a=D D={d}"), t_ghz_regime_exact(i(d), du), RegimeKind::Logarithmic));
        checks.push((format!("ghz a=D/2 D={d}"), t_ghz_regime_exact(q(d, 2), du), RegimeKind::Constant));
        checks.push((format!("ghz a=2D D={d}"), t_ghz_regime_exact(i(2 * d), du), power(q(1, d), false)));
    }
    for d in 2..=3i64 {
        checks.push((format!("lr a=3D D={d}"), lr_lower_bound_exact(i(3 * d), d as usize), power(i(1), false)));
    }
    checks.push(("ghz a=3/2 D=1".into(), t_ghz_regime_exact(q(3, 2), 1), power(q(1, 2), false)));
    checks.push(("ghz a=6 D=3".into(), t_ghz_regime_exact(i(6), 3), power(q(1, 3), false)));
    checks.push(("frob a=3".into(), frob_lower_bound_1d_exact(i(3)), power(i(1), false)));
    checks.push(("frob a=2".into(), frob_lower_bound_1d_exact(i(2)), power(q(1, 2), true)));
    checks.push(("frob a=5/2".into(), frob_lower_bound_1d_exact(q(5, 2)), power(i(1), true)));

    let total = checks.len();
    for (name, got, want) in checks {
        match got {
            Ok(regime) if regime.kind == want => {}
            Ok(regime) => return Err(format!("{name}: got {regime}")),
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    for (name, bad) in [
        ("lr a<D", lr_lower_bound_exact(q(1, 2), 1).is_err()),
        ("frob a=3/2", frob_lower_bound_1d_exact(q(3, 2)).is_err()),
    ] {
        if !bad {
            return Err(format!("{name} should be outside the domain"));
        }
    }
    Ok(format!("{total} regimes and 2 domain errors agree exactly"))
}

/// Enumeration against partial trace, and Pauli round trips.
fn oracle_cross_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_methods = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for k in 0..RANDOM_OPERATORS {
        let n = 1 + k % 6;
        let dim = 1usize << n;
        let op = random_operator(&mut rng, dim);
        let size = rng.gen_range(1..=n);
        let mut sites: Vec<usize> = (0..n).collect();
        for j in 0..size {
            let pick = rng.gen_range(j..n);
            sites.swap(j, pick);
        }
        let region = Region::from_sites(&sites[..size]);
        let a = qr_weight_with(&op, &region, WeightMethod::Enumerate).map_err(|e| e.to_string())?;
        let b = qr_weight_with(&op, &region, WeightMethod::PartialTrace).map_err(|e| e.to_string())?;
        worst_methods = worst_methods.max((a - b).abs());
        let back = decompose(&op, n).map_err(|e| e.to_string())?.reconstruct();
        worst_round_trip = worst_round_trip.max(operator_norm(&(back - &op)));
    }
    let line = format!(
        "method disagreement {worst_methods:.3e}, round-trip error {worst_round_trip:.3e} (tol {ORACLE_TOL:e})"
    );
    if worst_methods <= ORACLE_TOL && worst_round_trip <= ORACLE_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

fn report(number: usize, name: &str, outcome: &Outcome, elapsed: Duration) -> bool {
    let (tag, detail, ok) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("criterion {number:>2} {tag} {name} [{elapsed:.1?}]: {detail}");
    ok
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("broadcast map", broadcast_map),
        ("fanout correctness", fanout_correctness),
        ("makespan identity", makespan_identity),
        ("broadcast-time regimes", scaling_regimes),
        ("lemma exactness", lemma_exactness),
        ("approximate transform spreading", aqft_spreading),
        ("state transfer", state_transfer),
        ("fanout spreading", fanout_spreading),
        ("bound formulas", bound_formulas),
        ("oracle cross-checks", oracle_cross_checks),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        all &= report(k + 1, name, &outcome, start.elapsed());
    }
    println!("note: {}", three_dimensional_note());
    if !all {
        std::process::exit(1);
    }
}
