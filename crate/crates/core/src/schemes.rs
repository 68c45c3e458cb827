//! Association schemes: the max-SINR baseline, greedy aggregate-interference
//! minimization, greedy energy-efficiency maximization, flow/energy
//! accounting and an exhaustive small-instance oracle.
//!
//! Both optimizers are single-hop rerouting loops over one user at a time:
//! pick the worst region (worst-interfered user, or worst flow-per-watt
//! user), try the best cross-tier reassignment, recompute the global
//! objective and accept only strict improvements; the first non-improving
//! candidate is reverted and ends the loop. Strict acceptance makes the
//! recorded objective traces strictly monotone and guarantees termination.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::channel::{aggregate_interference, received_power, InterferenceReport};
use crate::geometry::torus_distance;
use crate::model::{
    Association, ScenarioConfig, ServingCell, Station, StationId, TierId, UserId, UserTerminal,
};
use crate::scalar::{Scalar, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("user {user} has no reachable station in any accessible tier")]
    Infeasible { user: UserId },
    #[error("iteration cap must be >= 1")]
    InvalidCap,
    #[error("search space of {size} associations exceeds the {limit} limit")]
    SearchSpaceExceeded { size: u128, limit: u128 },
}

/// Which global objective an optimizer or the oracle drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Sum over users of received co-channel interference; minimized.
    AggregateInterference,
    /// Network flow per consumed watt; maximized.
    EnergyEfficiency,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveKind::AggregateInterference => f.write_str("aggregate-interference"),
            ObjectiveKind::EnergyEfficiency => f.write_str("energy-efficiency"),
        }
    }
}

/// One accepted or rejected reassignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    pub user: UserId,
    pub from: ServingCell,
    pub to: ServingCell,
}

/// Objective values along an optimizer run: the initial value, one value
/// per accepted move, and (when the loop ended by rejection) the final
/// rejected candidate's value.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace<S> {
    objective: ObjectiveKind,
    values: Vec<S>,
    moves: Vec<MoveRecord>,
    rejected_tail: bool,
}

impl<S: Scalar> OptimizerTrace<S> {
    fn new(objective: ObjectiveKind, initial: S) -> Self {
        Self {
            objective,
            values: vec![initial],
            moves: Vec::new(),
            rejected_tail: false,
        }
    }

    fn push(&mut self, record: MoveRecord, value: S) {
        self.moves.push(record);
        self.values.push(value);
    }

    fn mark_rejected(&mut self) {
        self.rejected_tail = true;
    }

    pub fn objective(&self) -> ObjectiveKind {
        self.objective
    }

    /// All recorded objective values, including a trailing rejected
    /// candidate when present.
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn moves(&self) -> &[MoveRecord] {
        &self.moves
    }

    pub fn rejected_tail(&self) -> bool {
        self.rejected_tail
    }

    /// The accepted prefix: strictly decreasing for interference, strictly
    /// increasing for energy efficiency.
    pub fn accepted(&self) -> &[S] {
        if self.rejected_tail {
            &self.values[..self.values.len() - 1]
        } else {
            &self.values
        }
    }

    pub fn final_value(&self) -> S {
        *self
            .accepted()
            .last()
            .expect("trace holds the initial value")
    }

    /// Whether the accepted prefix is strictly monotone in the objective's
    /// improving direction.
    pub fn is_monotone(&self) -> bool {
        let accepted = self.accepted();
        accepted.windows(2).all(|w| match self.objective {
            ObjectiveKind::AggregateInterference => w[1] < w[0],
            ObjectiveKind::EnergyEfficiency => w[1] > w[0],
        })
    }

    /// Text table (iteration, objective, move) for debugging and plotting.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "iter\t{}\tmove", self.objective).expect("string write");
        writeln!(out, "0\t{}\t-", self.values[0]).expect("string write");
        for (i, (mv, value)) in self.moves.iter().zip(&self.values[1..]).enumerate() {
            let rejected = self.rejected_tail && i + 1 == self.moves.len();
            writeln!(
                out,
                "{}\t{}\tuser {}: {}/{} -> {}/{}{}",
                i + 1,
                value,
                mv.user,
                mv.from.tier,
                mv.from.station,
                mv.to.tier,
                mv.to.station,
                if rejected { " (rejected)" } else { "" }
            )
            .expect("string write");
        }
        out
    }
}

/// Total network flow and its per-user breakdown, bit/s.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport<S> {
    pub total_bps: S,
    pub per_user_bps: BTreeMap<UserId, S>,
}

/// Flow, consumed power and their ratio (bit per joule).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport<S> {
    pub flow_bps: S,
    pub power_w: S,
    pub efficiency_bpj: S,
    pub per_user_flow: BTreeMap<UserId, S>,
}

fn stations_by_tier<S: Scalar>(stations: &[Station<S>]) -> BTreeMap<TierId, Vec<&Station<S>>> {
    let mut map: BTreeMap<TierId, Vec<&Station<S>>> = BTreeMap::new();
    for station in stations {
        map.entry(station.tier).or_default().push(station);
    }
    for list in map.values_mut() {
        list.sort_by_key(|s| s.id);
    }
    map
}

fn nearest_station<'a, S: Scalar>(
    position: Vec2<S>,
    candidates: &[&'a Station<S>],
    scenario: &ScenarioConfig<S>,
) -> Option<&'a Station<S>> {
    let mut best: Option<(S, &Station<S>)> = None;
    for station in candidates {
        let d = torus_distance(position, station.position, &scenario.window);
        let better = match &best {
            None => true,
            Some((bd, bs)) => d < *bd || (d == *bd && station.id < bs.id),
        };
        if better {
            best = Some((d, station));
        }
    }
    best.map(|(_, s)| s)
}

/// Baseline association: every user independently picks the (tier, station)
/// maximizing its own SINR against the all-stations-active interference
/// field, ties broken by lowest station id.
pub fn associate_max_sinr<S: Scalar>(
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> Result<Association, SchemeError> {
    let by_tier = stations_by_tier(stations);
    let noise = scenario.channel.noise_power_w;
    let mut assoc = Association::new();

    for user in users {
        // Received power per tier: the per-tier total and the loudest
        // station; within a tier the SINR argmax is the max-power station.
        let mut tier_stats: BTreeMap<TierId, (S, S, StationId)> = BTreeMap::new();
        let mut grand_total = S::zero();
        for (&tier_id, list) in &by_tier {
            let tier = scenario.tier(tier_id).expect("tier exists");
            let mut total = S::zero();
            let mut best: Option<(S, StationId)> = None;
            for station in list {
                let d = torus_distance(user.position, station.position, &scenario.window);
                let p = received_power(tier.tx_power_w, d, &scenario.channel);
                total += p;
                let better = match &best {
                    None => true,
                    Some((bp, bid)) => p > *bp || (p == *bp && station.id < *bid),
                };
                if better {
                    best = Some((p, station.id));
                }
            }
            if let Some((p, id)) = best {
                tier_stats.insert(tier_id, (total, p, id));
                grand_total += total;
            }
        }

        let mut chosen: Option<(S, ServingCell)> = None;
        for &tier_id in &user.accessible_tiers {
            let Some(&(tier_total, desired, station)) = tier_stats.get(&tier_id) else {
                continue;
            };
            let interference = match scenario.frequency_plan {
                crate::model::FrequencyPlan::PerTierBands => tier_total - desired,
                crate::model::FrequencyPlan::FullReuse => grand_total - desired,
            };
            let denom = interference + noise;
            let value = if denom == S::zero() {
                S::infinity()
            } else {
                desired / denom
            };
            let cell = ServingCell {
                tier: tier_id,
                station,
            };
            let better = match &chosen {
                None => true,
                Some((bv, bc)) => value > *bv || (value == *bv && station < bc.station),
            };
            if better {
                chosen = Some((value, cell));
            }
        }

        match chosen {
            Some((_, cell)) => {
                assoc.set(user.id, cell);
            }
            None => return Err(SchemeError::Infeasible { user: user.id }),
        }
    }
    Ok(assoc)
}

/// Greedy aggregate-interference minimization. Each iteration reroutes the
/// worst-interfered user into the accessible tier with the largest positive
/// tolerance headroom (tolerance minus current mean per-receiver
/// interference, current tier excluded), onto that tier's nearest station.
/// The move is kept only if the aggregate strictly drops; the first
/// non-improving candidate is reverted and stops the loop, as does
/// exhausted headroom or the iteration cap.
pub fn minimize_interference<S: Scalar>(
    initial: &Association,
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
    cap: usize,
) -> Result<(Association, OptimizerTrace<S>), SchemeError> {
    if cap == 0 {
        return Err(SchemeError::InvalidCap);
    }
    let by_tier = stations_by_tier(stations);
    let mut assoc = initial.clone();
    let mut report = aggregate_interference(&assoc, users, stations, scenario);
    let mut trace = OptimizerTrace::new(ObjectiveKind::AggregateInterference, report.aggregate_w);
    let users_by_id: BTreeMap<UserId, &UserTerminal<S>> = users.iter().map(|u| (u.id, u)).collect();

    for _ in 0..cap {
        let Some((user_id, _)) = worst_interfered_user(&report) else {
            break; // nobody served
        };
        let user = users_by_id[&user_id];
        let current = assoc.get(user_id).expect("association is total");

        // Destination: accessible tier with the largest positive headroom,
        // ties by lowest tier id; the current tier never counts.
        let mut destination: Option<(S, TierId)> = None;
        for &tier_id in &user.accessible_tiers {
            if tier_id == current.tier {
                continue;
            }
            let Some(tier) = scenario.tier(tier_id) else {
                continue;
            };
            if by_tier.get(&tier_id).is_none_or(|l| l.is_empty()) {
                continue;
            }
            let mean = report
                .per_tier_mean_w
                .get(&tier_id)
                .copied()
                .unwrap_or_else(S::zero);
            let headroom = tier.interference_tolerance_w - mean;
            if !(headroom > S::zero()) {
                continue;
            }
            let better = match &destination {
                None => true,
                Some((bh, _)) => headroom > *bh,
            };
            if better {
                destination = Some((headroom, tier_id));
            }
        }
        let Some((_, dest_tier)) = destination else {
            break; // no tier has positive headroom
        };
        let target = nearest_station(user.position, &by_tier[&dest_tier], scenario)
            .expect("destination tier has stations");
        let candidate = ServingCell {
            tier: dest_tier,
            station: target.id,
        };

        let previous = assoc.set(user_id, candidate).expect("user was served");
        let new_report = aggregate_interference(&assoc, users, stations, scenario);
        trace.push(
            MoveRecord {
                user: user_id,
                from: previous,
                to: candidate,
            },
            new_report.aggregate_w,
        );
        if new_report.aggregate_w < report.aggregate_w {
            report = new_report;
            debug_assert!(assoc.validate(users, stations, scenario).is_ok());
        } else {
            assoc.set(user_id, previous);
            trace.mark_rejected();
            break;
        }
    }
    Ok((assoc, trace))
}

fn worst_interfered_user<S: Scalar>(report: &InterferenceReport<S>) -> Option<(UserId, S)> {
    let mut worst: Option<(UserId, S)> = None;
    for (&user, &value) in &report.per_user_w {
        let better = match &worst {
            None => true,
            Some((_, wv)) => value > *wv, // ties keep the lowest user id
        };
        if better {
            worst = Some((user, value));
        }
    }
    worst
}

/// Shannon-rate network flow: each served user contributes
/// `B_k · log₂(1 + min(SINR, ceiling))` for its serving tier's bandwidth.
pub fn network_flow<S: Scalar>(
    assoc: &Association,
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> FlowReport<S> {
    let report = aggregate_interference(assoc, users, stations, scenario);
    let by_id: BTreeMap<StationId, &Station<S>> = stations.iter().map(|s| (s.id, s)).collect();
    let noise = scenario.channel.noise_power_w;
    let mut per_user = BTreeMap::new();
    let mut total = S::zero();
    for user in users {
        let Some(serving) = assoc.get(user.id) else {
            continue;
        };
        let tier = scenario.tier(serving.tier).expect("tier exists");
        let server = by_id[&serving.station];
        let d = torus_distance(user.position, server.position, &scenario.window);
        let desired = received_power(tier.tx_power_w, d, &scenario.channel);
        let denom = report.per_user_w[&user.id] + noise;
        let sinr = if denom == S::zero() {
            S::infinity()
        } else {
            desired / denom
        };
        let clamped = sinr.min(scenario.sinr_ceiling);
        let rate = tier.bandwidth_hz * (S::one() + clamped).log2();
        per_user.insert(user.id, rate);
        total += rate;
    }
    FlowReport {
        total_bps: total,
        per_user_bps: per_user,
    }
}

/// Power consumed by the network: every station with at least one served
/// user draws its transmit plus circuit power; idle stations draw nothing.
pub fn total_power<S: Scalar>(
    assoc: &Association,
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> S {
    let counts = assoc.served_counts();
    stations
        .iter()
        .filter(|s| counts.contains_key(&s.id))
        .map(|s| {
            let tier = scenario.tier(s.tier).expect("tier exists");
            tier.tx_power_w + tier.circuit_power_w
        })
        .sum()
}

/// Flow, power and bit-per-joule efficiency of an association. Zero flow at
/// zero power yields zero efficiency by convention.
pub fn energy_efficiency<S: Scalar>(
    assoc: &Association,
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> EnergyReport<S> {
    let flow = network_flow(assoc, users, stations, scenario);
    let power = total_power(assoc, stations, scenario);
    let efficiency = if power > S::zero() {
        flow.total_bps / power
    } else {
        S::zero()
    };
    EnergyReport {
        flow_bps: flow.total_bps,
        power_w: power,
        efficiency_bpj: efficiency,
        per_user_flow: flow.per_user_bps,
    }
}

/// Greedy energy-efficiency maximization. Each iteration picks the user
/// with the smallest flow per watt-share (its serving station's draw split
/// equally over that station's users), evaluates the nearest station of
/// every accessible tier as a candidate, applies the best one and keeps it
/// only if the global efficiency strictly rises; the first non-improving
/// best candidate is reverted and stops the loop.
pub fn optimize_energy_efficiency<S: Scalar>(
    initial: &Association,
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
    cap: usize,
) -> Result<(Association, OptimizerTrace<S>), SchemeError> {
    if cap == 0 {
        return Err(SchemeError::InvalidCap);
    }
    let by_tier = stations_by_tier(stations);
    let mut assoc = initial.clone();
    let mut report = energy_efficiency(&assoc, users, stations, scenario);
    let mut trace = OptimizerTrace::new(ObjectiveKind::EnergyEfficiency, report.efficiency_bpj);
    let users_by_id: BTreeMap<UserId, &UserTerminal<S>> = users.iter().map(|u| (u.id, u)).collect();

    for _ in 0..cap {
        let Some(user_id) = worst_flow_per_watt_user(&assoc, &report, scenario) else {
            break;
        };
        let user = users_by_id[&user_id];
        let current = assoc.get(user_id).expect("association is total");

        // Candidates: the nearest station of each accessible tier, skipping
        // the current server itself.
        let mut best: Option<(S, ServingCell, EnergyReport<S>)> = None;
        for &tier_id in &user.accessible_tiers {
            let Some(list) = by_tier.get(&tier_id) else {
                continue;
            };
            let Some(target) = nearest_station(user.position, list, scenario) else {
                continue;
            };
            let candidate = ServingCell {
                tier: tier_id,
                station: target.id,
            };
            if candidate == current {
                continue;
            }
            assoc.set(user_id, candidate);
            let cand_report = energy_efficiency(&assoc, users, stations, scenario);
            assoc.set(user_id, current);
            let better = match &best {
                None => true,
                Some((bv, bc, _)) => {
                    cand_report.efficiency_bpj > *bv
                        || (cand_report.efficiency_bpj == *bv && candidate < *bc)
                }
            };
            if better {
                best = Some((cand_report.efficiency_bpj, candidate, cand_report));
            }
        }
        let Some((value, candidate, cand_report)) = best else {
            break; // nowhere to move
        };

        assoc.set(user_id, candidate);
        trace.push(
            MoveRecord {
                user: user_id,
                from: current,
                to: candidate,
            },
            value,
        );
        if value > report.efficiency_bpj {
            report = cand_report;
            debug_assert!(assoc.validate(users, stations, scenario).is_ok());
        } else {
            assoc.set(user_id, current);
            trace.mark_rejected();
            break;
        }
    }
    Ok((assoc, trace))
}

fn worst_flow_per_watt_user<S: Scalar>(
    assoc: &Association,
    report: &EnergyReport<S>,
    scenario: &ScenarioConfig<S>,
) -> Option<UserId> {
    let counts = assoc.served_counts();
    let mut worst: Option<(S, UserId)> = None;
    for (user, cell) in assoc.iter() {
        let tier = scenario.tier(cell.tier).expect("tier exists");
        let served = S::from_usize(counts[&cell.station]).expect("count fits");
        let share = (tier.tx_power_w + tier.circuit_power_w) / served;
        let flow = report
            .per_user_flow
            .get(&user)
            .copied()
            .unwrap_or_else(S::zero);
        let metric = flow / share;
        let better = match &worst {
            None => true,
            Some((wm, _)) => metric < *wm, // ties keep the lowest user id
        };
        if better {
            worst = Some((metric, user));
        }
    }
    worst.map(|(_, u)| u)
}

/// Result of the exhaustive search, with the number of associations tried.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult<S> {
    pub association: Association,
    pub objective_value: S,
    pub evaluations: u64,
}

const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Enumerate every total association (each user over all stations of its
/// accessible tiers, in (tier, station) order) and return the global
/// optimum of the chosen objective. Ties resolve to the first optimum in
/// lexicographic (user id, candidate) enumeration order. Refuses search
/// spaces beyond 10⁶ associations.
pub fn brute_force_best_association<S: Scalar>(
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
    objective: ObjectiveKind,
) -> Result<BruteForceResult<S>, SchemeError> {
    let by_tier = stations_by_tier(stations);
    let mut sorted_users: Vec<&UserTerminal<S>> = users.iter().collect();
    sorted_users.sort_by_key(|u| u.id);

    let mut candidates: Vec<Vec<ServingCell>> = Vec::with_capacity(sorted_users.len());
    let mut size: u128 = 1;
    for user in &sorted_users {
        let mut cells = Vec::new();
        for &tier_id in &user.accessible_tiers {
            if let Some(list) = by_tier.get(&tier_id) {
                cells.extend(list.iter().map(|s| ServingCell {
                    tier: tier_id,
                    station: s.id,
                }));
            }
        }
        if cells.is_empty() {
            return Err(SchemeError::Infeasible { user: user.id });
        }
        size = size.saturating_mul(cells.len() as u128);
        candidates.push(cells);
    }
    if size > BRUTE_FORCE_LIMIT {
        return Err(SchemeError::SearchSpaceExceeded {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let evaluate = |assoc: &Association| -> S {
        match objective {
            ObjectiveKind::AggregateInterference => {
                aggregate_interference(assoc, users, stations, scenario).aggregate_w
            }
            ObjectiveKind::EnergyEfficiency => {
                energy_efficiency(assoc, users, stations, scenario).efficiency_bpj
            }
        }
    };

    let mut indices = vec![0usize; sorted_users.len()];
    let mut best: Option<(S, Association)> = None;
    let mut evaluations = 0u64;
    loop {
        let assoc = Association::from_iter(
            sorted_users
                .iter()
                .enumerate()
                .map(|(slot, u)| (u.id, candidates[slot][indices[slot]])),
        );
        let value = evaluate(&assoc);
        evaluations += 1;
        let better = match (&best, objective) {
            (None, _) => true,
            (Some((bv, _)), ObjectiveKind::AggregateInterference) => value < *bv,
            (Some((bv, _)), ObjectiveKind::EnergyEfficiency) => value > *bv,
        };
        if better {
            best = Some((value, assoc));
        }

        // mixed-radix increment, last user fastest
        let mut pos = indices.len();
        loop {
            if pos == 0 {
                let (objective_value, association) = best.expect("at least one evaluation");
                return Ok(BruteForceResult {
                    association,
                    objective_value,
                    evaluations,
                });
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < candidates[pos].len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}
