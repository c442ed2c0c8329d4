use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::output::Artifacts;
use super::{CliError, Settings, Verdict};
use crate::bounds::{
    fit_scaling, frob_lower_bound_1d, lr_lower_bound, regime_matches, t_ghz_regime, FitModel, FitReport,
    CONSTANT_RATIO_LIMIT, EXPONENT_TOLERANCE, FIT_DISCARD, LOG_RESIDUAL_FRACTION,
};
use crate::lattice::{LatticeLayout, QubitAssignment};
use crate::numeric::fmt17;
use crate::protocols::{plan_fanout, FanoutPlan, RoundSummary};
use crate::schedule::{parse_schedule, validate_powerlaw, write_schedule};
use crate::simulator::{
    compact_schedule, distance_up_to_phase, ideal_fanout, schedule_restricted_unitary, write_state, StateVector,
};
use crate::spreading::{
    aqft_spread_in, chain_region, fanout_spread_in, fit_decay, placement_correlation, product_input,
    verify_lemma_in, ProductInput, SpreadingReport, ENUMERATION_QUBIT_CAP,
};

/// Both fidelities must reach this for `fanout` to pass.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-10;
/// Largest data-qubit count verified by simulation.
const SIMULATION_QUBIT_CAP: usize = 6;
/// Schedules with more control entries than this are summarised, not written.
pub const SCHEDULE_TEXT_CAP: usize = 2_000_000;
/// Random product inputs used for the ancilla-return check.
const RETURN_TRIALS: u64 = 16;
/// Correlations at or below this are left out of the decay fit.
const CORRELATION_FLOOR: f64 = 1e-12;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn fanout_assignment(s: &Settings, n: usize) -> Result<QubitAssignment, CliError> {
    let layout = match &s.extents {
        Some(e) => LatticeLayout::new(e)?,
        None => LatticeLayout::for_fanout(s.dimension, n)?,
    };
    Ok(QubitAssignment::fanout(&layout, n)?)
}

#[derive(Debug, Serialize)]
struct FanoutVerification {
    fanout_fidelity: Option<f64>,
    ancilla_return_fidelity: Option<f64>,
    operator_norm_error: Option<f64>,
    makespan_net: f64,
    makespan_gross: f64,
    schedule_revalidated: Option<bool>,
}

/// Fidelities of the compacted schedule against the ideal fanout.
struct SimulationResult {
    fanout_fidelity: f64,
    operator_norm_error: f64,
    ancilla_return_fidelity: f64,
    sample_output: StateVector,
}

fn simulate_fanout(plan: &FanoutPlan, seed: u64) -> Result<SimulationResult, CliError> {
    let assignment = plan.assignment();
    let n = assignment.n();
    let (compact, sites) = compact_schedule(&plan.schedule()?)?;
    let width = sites.len();
    let position = |site: usize| sites.binary_search(&site).expect("fanout touches every qubit");
    let data: Vec<usize> = assignment.data_sites().iter().map(|&s| position(s)).collect();
    let ancillae: Vec<usize> = assignment.ancilla_sites().iter().map(|&s| position(s)).collect();

    let (restricted, leak) = schedule_restricted_unitary(&compact, width, &ancillae)?;
    // Kept qubits are the data qubits in ascending compact order.
    let mut kept = data.clone();
    kept.sort_unstable();
    let rank: Vec<usize> = data.iter().map(|q| kept.binary_search(q).expect("kept")).collect();
    let to_kept = |x: usize| {
        (0..n).fold(0, |acc, q| {
            if x >> (n - 1 - q) & 1 == 1 {
                acc | 1 << (n - 1 - rank[q])
            } else {
                acc
            }
        })
    };
    let dim = 1usize << n;
    let u = DMatrix::from_fn(dim, dim, |r, c| restricted[(to_kept(r), to_kept(c))]);
    let ideal = ideal_fanout(n)?;
    let overlap: Complex64 = ideal.iter().zip(u.iter()).map(|(f, x)| f.conj() * x).sum();
    let fanout_fidelity = (overlap.norm() / dim as f64).powi(2);
    let operator_norm_error = distance_up_to_phase(&u, &ideal)?;

    let mut ancilla_return_fidelity = 1.0 - leak;
    let mut sample_output = None;
    for trial in 0..RETURN_TRIALS {
        let states = product_input(&ProductInput::Random(seed.wrapping_add(trial)), n)?;
        let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut qubits = vec![zero; width];
        for (q, &pos) in data.iter().enumerate() {
            qubits[pos] = states[q];
        }
        let mut state = StateVector::product(&qubits)?;
        state.run_schedule(&compact)?;
        ancilla_return_fidelity = ancilla_return_fidelity.min(state.zero_probability(&ancillae)?);
        sample_output.get_or_insert(state);
    }
    Ok(SimulationResult {
        fanout_fidelity,
        operator_norm_error,
        ancilla_return_fidelity,
        sample_output: sample_output.expect("at least one trial"),
    })
}

pub(super) fn cmd_fanout(s: &Settings) -> Result<Verdict, CliError> {
    if s.root != 0 {
        return Err(usage("fanout is controlled by data qubit 0; root must be 0"));
    }
    if !s.schedule_only && s.n > SIMULATION_QUBIT_CAP {
        return Err(usage(format!(
            "simulation needs n <= {SIMULATION_QUBIT_CAP}; use --schedule-only for n = {}",
            s.n
        )));
    }
    let assignment = fanout_assignment(s, s.n)?;
    let plan = plan_fanout(&assignment, s.alpha)?;

    let mut names = vec!["schedule.txt", "rounds.json", "verification.json"];
    if !s.schedule_only {
        names.push("state.txt");
    }
    let mut out = Artifacts::prepare(&s.out, &names)?;
    out.write_json("rounds.json", &plan.summary())?;

    let mut revalidated = None;
    if plan.control_entries() <= SCHEDULE_TEXT_CAP {
        let text = write_schedule(&plan.schedule()?);
        out.write("schedule.txt", &text)?;
        let reloaded = parse_schedule(&text)?;
        revalidated = Some(validate_powerlaw(&reloaded, assignment.layout(), s.alpha)?.passed());
    } else {
        out.write(
            "schedule.txt",
            &format!(
                "# protocol=fanout alpha={} layout={} omitted: {} control entries exceed {}\n",
                fmt17(s.alpha),
                assignment.layout().id(),
                plan.control_entries(),
                SCHEDULE_TEXT_CAP
            ),
        )?;
    }

    let summary: RoundSummary = plan.summary();
    let mut report = FanoutVerification {
        fanout_fidelity: None,
        ancilla_return_fidelity: None,
        operator_norm_error: None,
        makespan_net: summary.makespan_net,
        makespan_gross: summary.makespan_gross,
        schedule_revalidated: revalidated,
    };
    let mut pass = revalidated != Some(false);
    if !s.schedule_only {
        let sim = simulate_fanout(&plan, s.seed)?;
        out.write("state.txt", &write_state(&sim.sample_output))?;
        pass &= sim.fanout_fidelity >= FIDELITY_FLOOR && sim.ancilla_return_fidelity >= FIDELITY_FLOOR;
        report.fanout_fidelity = Some(sim.fanout_fidelity);
        report.ancilla_return_fidelity = Some(sim.ancilla_return_fidelity);
        report.operator_norm_error = Some(sim.operator_norm_error);
    }
    out.write_json("verification.json", &report)?;
    Ok(Verdict::from_pass(pass))
}

#[derive(Debug, Serialize)]
struct BandReport {
    band: usize,
    #[serde(flatten)]
    report: SpreadingReport,
}

#[derive(Debug, Serialize)]
struct LemmaArtifact {
    lemma: SpreadingReport,
    aqft: Vec<BandReport>,
    fanout: SpreadingReport,
    pass: bool,
}

pub(super) fn cmd_verify_lemma(s: &Settings) -> Result<Verdict, CliError> {
    let n = s.n;
    if !(2..=ENUMERATION_QUBIT_CAP).contains(&n) {
        return Err(usage(format!("verify-lemma needs 2 <= n <= {ENUMERATION_QUBIT_CAP}, got {n}")));
    }
    let bands = s.bands.clone().unwrap_or_else(|| (1..=n).collect());
    if let Some(b) = bands.iter().find(|b| !(1..=n).contains(*b)) {
        return Err(usage(format!("band {b} outside 1..={n}")));
    }
    let mut out = Artifacts::prepare(&s.out, &["spreading.json"])?;
    let region = chain_region(n, s.region_radius)?;
    if region.is_empty() {
        return Err(usage("the region at this radius holds no qubits"));
    }

    let lemma = verify_lemma_in(n, &region)?;
    let aqft = bands
        .iter()
        .map(|&band| Ok(BandReport { band, report: aqft_spread_in(n, band, &region)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let fanout = fanout_spread_in(n, &region)?;
    let pass = lemma.pass && fanout.pass && aqft.iter().all(|b| b.report.pass);
    out.write_json("spreading.json", &LemmaArtifact { lemma, aqft, fanout, pass })?;
    Ok(Verdict::from_pass(pass))
}

/// One row of a scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub makespan_net: f64,
    pub makespan_gross: f64,
}

/// Makespans over `n` and their fit against the expected regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub alpha: f64,
    pub dimension: usize,
    pub rows: Vec<ScalingRow>,
    pub expected: String,
    pub regime_tag: &'static str,
    pub fit: FitReport,
    pub pass: bool,
}

/// Plans a fanout for each sample size (no simulation) and fits the net
/// makespans with the model of the expected regime.
pub fn scaling_study(alpha: f64, dimension: usize, samples: &[usize]) -> crate::Result<ScalingStudy> {
    let regime = t_ghz_regime(alpha, dimension)?;
    let rows = samples
        .iter()
        .map(|&n| {
            let layout = LatticeLayout::for_fanout(dimension, n)?;
            let plan = plan_fanout(&QubitAssignment::fanout(&layout, n)?, alpha)?;
            Ok(ScalingRow { n, makespan_net: plan.makespan_net(), makespan_gross: plan.makespan_gross() })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.makespan_net)).collect();
    let fit = fit_scaling(&points, FitModel::for_regime(&regime))?;
    Ok(ScalingStudy {
        alpha,
        dimension,
        rows,
        expected: regime.to_string(),
        regime_tag: regime.tag(),
        pass: regime_matches(&regime, &fit),
        fit,
    })
}

impl ScalingStudy {
    /// `alpha,D,n,makespan_net,makespan_gross,regime,fit_exponent,residual`;
    /// the last two columns repeat the fit on every row.
    pub fn to_csv(&self) -> String {
        let mut csv = String::from("alpha,D,n,makespan_net,makespan_gross,regime,fit_exponent,residual\n");
        for r in &self.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt17(self.alpha),
                self.dimension,
                r.n,
                fmt17(r.makespan_net),
                fmt17(r.makespan_gross),
                self.regime_tag,
                fmt17(self.fit.value),
                fmt17(self.fit.residual)
            ));
        }
        csv
    }
}

#[derive(Debug, Serialize)]
struct Tolerances {
    constant_ratio_limit: f64,
    log_residual_fraction: f64,
    exponent_tolerance: f64,
    discarded_smallest: usize,
}

#[derive(Debug, Serialize)]
struct LowerBounds {
    lieb_robinson: Option<String>,
    frobenius: Option<String>,
}

#[derive(Debug, Serialize)]
struct ScalingVerdict<'a> {
    alpha: f64,
    dimension: usize,
    expected: &'a str,
    fit: &'a FitReport,
    pass: bool,
    tolerances: Tolerances,
    lower_bounds: LowerBounds,
}

pub(super) fn cmd_scaling(s: &Settings) -> Result<Verdict, CliError> {
    if s.samples.is_empty() {
        return Err(usage("the sample list is empty"));
    }
    let mut out = Artifacts::prepare(&s.out, &["scaling.csv", "verdict.json"])?;
    let study = scaling_study(s.alpha, s.dimension, &s.samples)?;
    out.write("scaling.csv", &study.to_csv())?;
    let frobenius = if s.dimension == 1 {
        frob_lower_bound_1d(s.alpha).ok().map(|r| r.to_string())
    } else {
        None
    };
    let verdict = ScalingVerdict {
        alpha: s.alpha,
        dimension: s.dimension,
        expected: &study.expected,
        fit: &study.fit,
        pass: study.pass,
        tolerances: Tolerances {
            constant_ratio_limit: CONSTANT_RATIO_LIMIT,
            log_residual_fraction: LOG_RESIDUAL_FRACTION,
            exponent_tolerance: EXPONENT_TOLERANCE,
            discarded_smallest: FIT_DISCARD,
        },
        lower_bounds: LowerBounds {
            lieb_robinson: lr_lower_bound(s.alpha, s.dimension).ok().map(|r| r.to_string()),
            frobenius,
        },
    };
    out.write_json("verdict.json", &verdict)?;
    Ok(Verdict::from_pass(study.pass))
}

pub(super) fn cmd_correlation(s: &Settings) -> Result<Verdict, CliError> {
    let input = ProductInput::parse(&s.input, s.seed)?;
    let mut out = Artifacts::prepare(&s.out, &["correlation.csv", "correlation.json"])?;
    let profile = placement_correlation(s.n, s.placement, &input)?;
    let mut csv = String::from("distance,correlation\n");
    for (d, c) in profile.distances.iter().zip(&profile.correlations) {
        csv.push_str(&format!("{d},{}\n", fmt17(*c)));
    }
    out.write("correlation.csv", &csv)?;
    #[derive(Serialize)]
    struct Artifact<'a> {
        input: &'a str,
        seed: u64,
        profile: &'a crate::spreading::CorrelationProfile,
        decay: Option<crate::spreading::DecayFit>,
    }
    out.write_json(
        "correlation.json",
        &Artifact { input: &s.input, seed: s.seed, profile: &profile, decay: fit_decay(&profile, CORRELATION_FLOOR) },
    )?;
    Ok(Verdict::Pass)
}
