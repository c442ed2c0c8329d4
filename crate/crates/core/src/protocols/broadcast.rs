//! Broadcast planning: copy one qubit's amplitudes onto a register of
//! zero-initialised participants as a GHZ-like superposition.
//!
//! The doubling plan grows a cluster of already-correlated qubits. In each
//! round the whole cluster drives each of `|cluster|` fresh targets, chosen
//! as the unclaimed participants nearest to the cluster. Because every
//! cluster member holds the same bit, the diagonal control terms add up and
//! the collective strength `sum_i r_i^-alpha` sets the round duration.
//!
//! The cascade plan uses single-control CNOTs between nearby participants,
//! which beats doubling when couplings decay fast (alpha > D + 1).

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::RoundSummary;
use crate::error::{Error, Result};
use crate::lattice::edt::{squared_distance_transform, FAR};
use crate::lattice::LatticeLayout;
use crate::numeric::exact_sum;
use crate::schedule::{cnot_pulse, coupling_cap, multicontrol_pulse, ProtocolSchedule, ScheduleLayer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadcastStrategy {
    Doubling,
    Cascade,
}

/// Who drives the targets of a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Drivers {
    /// Every cluster member drives every target.
    Cluster,
    /// Target `k` is driven by the single control `controls[k]`.
    Single(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastRound {
    /// Cluster size before the round.
    pub cluster_size: usize,
    pub targets: Vec<usize>,
    pub drivers: Drivers,
    /// Largest distance from a target to its nearest cluster member.
    pub max_target_distance: f64,
    /// Zero until durations are computed.
    pub layer_duration: f64,
}

/// A broadcast schedule in compact form: the cluster order plus one round
/// descriptor per layer. Pulses are only materialised on request, since a
/// collective round over a cluster of `m` qubits carries `m` controls per
/// target.
#[derive(Debug, Clone)]
pub struct BroadcastPlan {
    layout: LatticeLayout,
    alpha: f64,
    root: usize,
    participants: Vec<usize>,
    order: Vec<usize>,
    rounds: Vec<BroadcastRound>,
    strategy: BroadcastStrategy,
}

impl BroadcastPlan {
    pub fn layout(&self) -> &LatticeLayout {
        &self.layout
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Root site.
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn participants(&self) -> &[usize] {
        &self.participants
    }

    /// Sites in the order they joined the cluster; the root comes first.
    pub fn cluster_order(&self) -> &[usize] {
        &self.order
    }

    pub fn rounds(&self) -> &[BroadcastRound] {
        &self.rounds
    }

    pub fn strategy(&self) -> BroadcastStrategy {
        self.strategy
    }

    pub fn layer_durations(&self) -> impl DoubleEndedIterator<Item = f64> + '_ {
        self.rounds.iter().map(|r| r.layer_duration)
    }

    pub fn makespan(&self) -> f64 {
        exact_sum(self.layer_durations())
    }

    /// Total number of (control, target) pairs in the materialised schedule.
    pub fn control_entries(&self) -> usize {
        self.rounds
            .iter()
            .map(|r| match r.drivers {
                Drivers::Cluster => r.cluster_size * r.targets.len(),
                Drivers::Single(_) => r.targets.len(),
            })
            .sum()
    }

    /// Materialises the layers of the plan.
    pub fn layers(&self) -> Result<Vec<ScheduleLayer>> {
        self.rounds
            .iter()
            .map(|round| {
                let pulses = match &round.drivers {
                    Drivers::Cluster => {
                        let cluster = &self.order[..round.cluster_size];
                        round
                            .targets
                            .iter()
                            .map(|&t| multicontrol_pulse(cluster, t, &self.layout, self.alpha))
                            .collect::<Result<Vec<_>>>()?
                    }
                    Drivers::Single(controls) => round
                        .targets
                        .iter()
                        .zip(controls)
                        .map(|(&t, &c)| cnot_pulse(c, t, &self.layout, self.alpha))
                        .collect::<Result<Vec<_>>>()?,
                };
                ScheduleLayer::new(pulses)
            })
            .collect()
    }

    pub fn schedule(&self) -> Result<ProtocolSchedule> {
        Ok(ProtocolSchedule::new(
            self.layers()?,
            self.alpha,
            &self.layout.id(),
            "broadcast",
        ))
    }

    pub fn summary(&self) -> RoundSummary {
        let m = self.makespan();
        RoundSummary::new(&self.rounds, self.strategy, m, m)
    }

    /// Checks the round structure: targets are fresh and distinct, the
    /// cluster grows by exactly the targets and at most doubles, and the
    /// final cluster is the participant set.
    pub fn check_invariants(&self) -> Result<()> {
        check_round_structure(&self.layout, &self.participants, self.root, &self.order, &self.rounds)
    }
}

pub(crate) fn check_round_structure(
    layout: &LatticeLayout,
    participants: &[usize],
    root: usize,
    order: &[usize],
    rounds: &[BroadcastRound],
) -> Result<()> {
    let fail = |msg: String| Err(Error::Parameter(msg));
    let mut in_cluster = vec![false; layout.len()];
    let mut is_participant = vec![false; layout.len()];
    for &p in participants {
        is_participant[p] = true;
    }
    if order.first() != Some(&root) {
        return fail("cluster order does not start at the root".into());
    }
    in_cluster[root] = true;
    let mut size = 1;
    for (k, round) in rounds.iter().enumerate() {
        if round.cluster_size != size {
            return fail(format!("round {k}: cluster size {} != {size}", round.cluster_size));
        }
        if round.targets.is_empty() || round.targets.len() > size {
            return fail(format!("round {k}: {} targets for a cluster of {size}", round.targets.len()));
        }
        for (j, &t) in round.targets.iter().enumerate() {
            if !is_participant[t] || in_cluster[t] {
                return fail(format!("round {k}: target {t} is not a fresh participant"));
            }
            if order.get(size + j) != Some(&t) {
                return fail(format!("round {k}: cluster order disagrees with targets"));
            }
            in_cluster[t] = true;
        }
        if let Drivers::Single(controls) = &round.drivers {
            if controls.len() != round.targets.len()
                || controls.iter().any(|&c| !order[..size].contains(&c))
            {
                return fail(format!("round {k}: a driver is outside the cluster"));
            }
        }
        size += round.targets.len();
    }
    if size != participants.len() || order.len() != size {
        return fail(format!("final cluster has {size} of {} participants", participants.len()));
    }
    Ok(())
}

fn check_participants(layout: &LatticeLayout, participants: &[usize], root: usize) -> Result<()> {
    let mut seen = vec![false; layout.len()];
    for &p in participants {
        crate::error::check_index(p, layout.len())?;
        if seen[p] {
            return Err(Error::Parameter(format!("participant {p} listed twice")));
        }
        seen[p] = true;
    }
    if root >= layout.len() || !seen[root] {
        return Err(Error::InvalidRoot(root));
    }
    Ok(())
}

/// Round structure of the doubling plan, without durations.
///
/// Returns the cluster order and the rounds (with `Drivers::Cluster`).
/// Targets of a round are the `|cluster|` unclaimed participants with the
/// smallest distance to the cluster, ties broken by site index.
pub fn doubling_rounds(
    layout: &LatticeLayout,
    participants: &[usize],
    root: usize,
) -> Result<(Vec<usize>, Vec<BroadcastRound>)> {
    check_participants(layout, participants, root)?;
    let mut seeds = vec![false; layout.len()];
    seeds[root] = true;
    let mut order = vec![root];
    let mut unclaimed: Vec<usize> = participants.iter().copied().filter(|&p| p != root).collect();
    let mut rounds = Vec::new();

    while !unclaimed.is_empty() {
        let field = squared_distance_transform(layout.extents(), &seeds);
        let take = order.len().min(unclaimed.len());
        let mut keyed: Vec<(i64, usize)> = unclaimed.iter().map(|&s| (field[s], s)).collect();
        if take < keyed.len() {
            keyed.select_nth_unstable(take - 1);
            keyed.truncate(take);
        }
        keyed.sort_unstable();
        debug_assert!(keyed.iter().all(|k| k.0 < FAR));

        let targets: Vec<usize> = keyed.iter().map(|k| k.1).collect();
        let max_d2 = keyed.last().map_or(0, |k| k.0);
        rounds.push(BroadcastRound {
            cluster_size: order.len(),
            targets: targets.clone(),
            drivers: Drivers::Cluster,
            max_target_distance: (max_d2 as f64).sqrt(),
            layer_duration: 0.0,
        });
        for &t in &targets {
            seeds[t] = true;
        }
        order.extend_from_slice(&targets);
        unclaimed.retain(|&s| !seeds[s]);
    }
    Ok((order, rounds))
}

fn offsets_within(dimension: usize, r2: u64) -> Vec<([i64; 3], u64)> {
    let reach = (r2 as f64).sqrt().floor() as i64;
    let span = |a: usize| if a < dimension { -reach..=reach } else { 0..=0 };
    let mut out = Vec::new();
    for x in span(0) {
        for y in span(1) {
            for z in span(2) {
                let d2 = (x * x + y * y + z * z) as u64;
                if d2 > 0 && d2 <= r2 {
                    out.push(([x, y, z], d2));
                }
            }
        }
    }
    out
}

fn neighbour(layout: &LatticeLayout, site: usize, off: &[i64; 3]) -> Option<usize> {
    let c = layout.raw_coord(site);
    let moved = [c[0] + off[0], c[1] + off[1], c[2] + off[2]];
    layout.site_at(&moved[..layout.dimension()])
}

/// Smallest squared radius that connects all participants to the root.
fn connecting_radius(layout: &LatticeLayout, is_participant: &[bool], count: usize, root: usize) -> u64 {
    let max_r2: u64 = layout.extents().iter().map(|&e| ((e - 1) * (e - 1)) as u64).sum();
    let mut r2 = 1;
    loop {
        let offs = offsets_within(layout.dimension(), r2);
        let mut seen = vec![false; layout.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut reached = 1;
        while let Some(s) = queue.pop_front() {
            for (off, _) in &offs {
                if let Some(t) = neighbour(layout, s, off) {
                    if is_participant[t] && !seen[t] {
                        seen[t] = true;
                        reached += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        if reached == count || r2 >= max_r2 {
            return r2;
        }
        r2 += 1;
    }
}

/// Round structure of the nearest-neighbour cascade.
///
/// Single-control CNOTs between participants within the smallest radius that
/// keeps them connected. Each round takes at most `|cluster|` candidates,
/// nearest first, each driven by its closest cluster member.
pub fn cascade_rounds(
    layout: &LatticeLayout,
    participants: &[usize],
    root: usize,
) -> Result<(Vec<usize>, Vec<BroadcastRound>)> {
    check_participants(layout, participants, root)?;
    let mut is_participant = vec![false; layout.len()];
    for &p in participants {
        is_participant[p] = true;
    }
    let r2 = connecting_radius(layout, &is_participant, participants.len(), root);
    let offs = offsets_within(layout.dimension(), r2);

    let mut claimed = vec![false; layout.len()];
    let mut best: Vec<Option<(u64, usize)>> = vec![None; layout.len()];
    let mut candidates: BTreeSet<(u64, usize)> = BTreeSet::new();
    let admit = |member: usize,
                     claimed: &[bool],
                     best: &mut Vec<Option<(u64, usize)>>,
                     candidates: &mut BTreeSet<(u64, usize)>| {
        for (off, d2) in &offs {
            let Some(s) = neighbour(layout, member, off) else { continue };
            if !is_participant[s] || claimed[s] {
                continue;
            }
            let offer = (*d2, member);
            match best[s] {
                Some(cur) if cur <= offer => {}
                Some(cur) => {
                    candidates.remove(&(cur.0, s));
                    candidates.insert((offer.0, s));
                    best[s] = Some(offer);
                }
                None => {
                    candidates.insert((offer.0, s));
                    best[s] = Some(offer);
                }
            }
        }
    };

    claimed[root] = true;
    admit(root, &claimed, &mut best, &mut candidates);
    let mut order = vec![root];
    let mut rounds = Vec::new();
    while order.len() < participants.len() {
        let take = order.len().min(candidates.len());
        if take == 0 {
            return Err(Error::Parameter("participants are not connected".into()));
        }
        let mut targets = Vec::with_capacity(take);
        let mut controls = Vec::with_capacity(take);
        let mut max_d2 = 0;
        for _ in 0..take {
            let (d2, s) = candidates.pop_first().expect("counted above");
            claimed[s] = true;
            targets.push(s);
            controls.push(best[s].expect("candidate has a driver").1);
            max_d2 = max_d2.max(d2);
        }
        rounds.push(BroadcastRound {
            cluster_size: order.len(),
            targets: targets.clone(),
            drivers: Drivers::Single(controls),
            max_target_distance: (max_d2 as f64).sqrt(),
            layer_duration: 0.0,
        });
        for &t in &targets {
            admit(t, &claimed, &mut best, &mut candidates);
        }
        order.extend_from_slice(&targets);
    }
    Ok((order, rounds))
}

/// Lookup table of `1/r^alpha` indexed by per-axis absolute offsets.
struct CouplingTable {
    table: Vec<f64>,
    strides: [usize; 3],
}

impl CouplingTable {
    fn new(layout: &LatticeLayout, alpha: f64) -> Self {
        let mut strides = [0usize; 3];
        strides[..layout.dimension()].copy_from_slice(layout.strides());
        let table = (0..layout.len())
            .map(|i| {
                let c = layout.raw_coord(i);
                let d2 = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) as u64;
                if d2 == 0 {
                    0.0
                } else {
                    coupling_cap(d2, alpha)
                }
            })
            .collect();
        CouplingTable { table, strides }
    }

    /// Collective strength on `target`, summed in cluster order (the same
    /// order a materialised pulse uses).
    #[inline]
    fn collective(&self, cluster: &[[i64; 3]], target: [i64; 3]) -> f64 {
        let [s0, s1, s2] = self.strides;
        let mut sum = 0.0;
        for c in cluster {
            let idx = (c[0] - target[0]).unsigned_abs() as usize * s0
                + (c[1] - target[1]).unsigned_abs() as usize * s1
                + (c[2] - target[2]).unsigned_abs() as usize * s2;
            sum += self.table[idx];
        }
        sum
    }
}

/// Fills in layer durations of collective rounds, largest round first.
/// Stops early (returning `None`) once the running total exceeds `budget`.
fn doubling_durations(
    layout: &LatticeLayout,
    alpha: f64,
    order: &[usize],
    rounds: &mut [BroadcastRound],
    budget: f64,
) -> Option<f64> {
    use rayon::prelude::*;

    let table = CouplingTable::new(layout, alpha);
    let coords: Vec<[i64; 3]> = order.iter().map(|&s| layout.raw_coord(s)).collect();
    let mut spent = Vec::with_capacity(rounds.len());
    for round in rounds.iter_mut().rev() {
        let cluster = &coords[..round.cluster_size];
        let weakest = round
            .targets
            .par_iter()
            .map(|&t| table.collective(cluster, layout.raw_coord(t)))
            .reduce(|| f64::INFINITY, f64::min);
        round.layer_duration = FRAC_PI_2 / weakest;
        spent.push(round.layer_duration);
        if exact_sum(spent.iter().copied()) > budget {
            return None;
        }
    }
    Some(exact_sum(spent))
}

fn cascade_durations(layout: &LatticeLayout, alpha: f64, rounds: &mut [BroadcastRound]) -> f64 {
    for round in rounds.iter_mut() {
        let Drivers::Single(controls) = &round.drivers else { unreachable!() };
        round.layer_duration = round
            .targets
            .iter()
            .zip(controls)
            .map(|(&t, &c)| FRAC_PI_2 / coupling_cap(layout.distance_sq_unchecked(c, t), alpha))
            .fold(0.0, f64::max);
    }
    exact_sum(rounds.iter().map(|r| r.layer_duration))
}

/// Plans a broadcast from `root` over `participants` (all sites of
/// `layout`). For alpha > D + 1 the faster of doubling and cascade is kept,
/// preferring doubling on ties.
pub fn plan_broadcast_over(
    layout: &LatticeLayout,
    participants: &[usize],
    root: usize,
    alpha: f64,
) -> Result<BroadcastPlan> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Parameter(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let (order, mut rounds) = doubling_rounds(layout, participants, root)?;
    let mut strategy = BroadcastStrategy::Doubling;
    let mut chosen = (order, rounds.clone());

    if alpha > layout.dimension() as f64 + 1.0 {
        let (c_order, mut c_rounds) = cascade_rounds(layout, participants, root)?;
        let cascade = cascade_durations(layout, alpha, &mut c_rounds);
        match doubling_durations(layout, alpha, &chosen.0, &mut rounds, cascade) {
            Some(_) => chosen.1 = rounds,
            None => {
                chosen = (c_order, c_rounds);
                strategy = BroadcastStrategy::Cascade;
            }
        }
    } else {
        doubling_durations(layout, alpha, &chosen.0, &mut rounds, f64::INFINITY);
        chosen.1 = rounds;
    }

    Ok(BroadcastPlan {
        layout: layout.clone(),
        alpha,
        root,
        participants: participants.to_vec(),
        order: chosen.0,
        rounds: chosen.1,
        strategy,
    })
}

/// Cascade-only plan, for comparison.
pub fn plan_cascade_over(
    layout: &LatticeLayout,
    participants: &[usize],
    root: usize,
    alpha: f64,
) -> Result<BroadcastPlan> {
    let (order, mut rounds) = cascade_rounds(layout, participants, root)?;
    cascade_durations(layout, alpha, &mut rounds);
    Ok(BroadcastPlan {
        layout: layout.clone(),
        alpha,
        root,
        participants: participants.to_vec(),
        order,
        rounds,
        strategy: BroadcastStrategy::Cascade,
    })
}
