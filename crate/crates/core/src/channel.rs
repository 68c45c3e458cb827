//! Received power, SINR, interference reports and conflict-domain
//! classification.
//!
//! Only stations with at least one served user transmit; idle stations are
//! silent. Co-channel interference follows the scenario's frequency plan
//! (per-tier bands by default, so rerouting a user across tiers changes the
//! interference field). All distances are torus distances in original
//! coordinates with true powers.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{torus_distance, EntityRef, LinkKind, LinkSpec, LinkWeight};
use crate::model::{
    Association, ChannelModel, ScenarioConfig, ServingCell, Station, StationId, TierId, UserId,
    UserTerminal,
};
use crate::scalar::{Scalar, Vec2};

/// Path-loss received power `P · max(d, d_min)^(−α)`.
pub fn received_power<S: Scalar>(tx_power_w: S, distance_km: S, channel: &ChannelModel<S>) -> S {
    let d = distance_km.max(channel.reference_distance_km);
    tx_power_w * d.powf(-channel.path_loss_exponent)
}

/// Per-user and network-wide interference summary.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceReport<S> {
    /// Aggregate co-channel interference seen by each user, watts.
    pub per_user_w: BTreeMap<UserId, S>,
    /// Sum over users, the interference-minimization objective.
    pub aggregate_w: S,
    /// Mean per-receiver interference among users served in each tier
    /// (0 for tiers serving nobody).
    pub per_tier_mean_w: BTreeMap<TierId, S>,
}

/// Stations that currently transmit (serve at least one user), grouped for
/// co-channel lookups.
struct ActiveSet<'a, S> {
    stations: Vec<&'a Station<S>>,
}

impl<'a, S: Scalar> ActiveSet<'a, S> {
    fn build(assoc: &Association, stations: &'a [Station<S>]) -> Self {
        let counts = assoc.served_counts();
        let mut active: Vec<&Station<S>> = stations
            .iter()
            .filter(|s| counts.contains_key(&s.id))
            .collect();
        active.sort_by_key(|s| s.id);
        Self { stations: active }
    }
}

/// Sum of received powers from all active co-channel stations other than
/// the user's server.
pub fn interference_at_user<S: Scalar>(
    user: &UserTerminal<S>,
    assoc: &Association,
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> S {
    let Some(serving) = assoc.get(user.id) else {
        return S::zero();
    };
    let active = ActiveSet::build(assoc, stations);
    interference_with_active(user.position, serving, &active, scenario)
}

fn interference_with_active<S: Scalar>(
    position: Vec2<S>,
    serving: ServingCell,
    active: &ActiveSet<'_, S>,
    scenario: &ScenarioConfig<S>,
) -> S {
    let mut total = S::zero();
    for station in &active.stations {
        if station.id == serving.station {
            continue;
        }
        if !scenario
            .frequency_plan
            .co_channel(serving.tier, station.tier)
        {
            continue;
        }
        let tier = scenario
            .tier(station.tier)
            .expect("station tier present in scenario");
        let d = torus_distance(position, station.position, &scenario.window);
        total += received_power(tier.tx_power_w, d, &scenario.channel);
    }
    total
}

/// Post-association SINR of a served user: desired power over co-channel
/// interference plus noise. Returns +∞ when both are zero
/// (interference-free, noiseless).
pub fn sinr<S: Scalar>(
    user: &UserTerminal<S>,
    serving: ServingCell,
    stations: &[Station<S>],
    assoc: &Association,
    scenario: &ScenarioConfig<S>,
) -> S {
    let server = stations
        .iter()
        .find(|s| s.id == serving.station)
        .expect("serving station exists");
    let tier = scenario.tier(serving.tier).expect("serving tier exists");
    let d = torus_distance(user.position, server.position, &scenario.window);
    let desired = received_power(tier.tx_power_w, d, &scenario.channel);
    let interference = interference_at_user(user, assoc, stations, scenario);
    let denom = interference + scenario.channel.noise_power_w;
    if denom == S::zero() {
        S::infinity()
    } else {
        desired / denom
    }
}

/// Interference seen by every user under the given association, plus the
/// aggregate and per-tier means.
pub fn aggregate_interference<S: Scalar>(
    assoc: &Association,
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> InterferenceReport<S> {
    let active = ActiveSet::build(assoc, stations);
    let mut per_user = BTreeMap::new();
    let mut aggregate = S::zero();
    let mut tier_sum: BTreeMap<TierId, (S, usize)> = BTreeMap::new();
    for user in users {
        let Some(serving) = assoc.get(user.id) else {
            continue;
        };
        let value = interference_with_active(user.position, serving, &active, scenario);
        per_user.insert(user.id, value);
        aggregate += value;
        let entry = tier_sum.entry(serving.tier).or_insert((S::zero(), 0));
        entry.0 += value;
        entry.1 += 1;
    }
    let per_tier_mean_w = scenario
        .tier_ids()
        .map(|tier| {
            let mean = match tier_sum.get(&tier) {
                Some((sum, n)) if *n > 0 => *sum / S::from_usize(*n).expect("count fits"),
                _ => S::zero(),
            };
            (tier, mean)
        })
        .collect();
    InterferenceReport {
        per_user_w: per_user,
        aggregate_w: aggregate,
        per_tier_mean_w,
    }
}

/// Derive the link set of an association for topology export: one desired
/// link per served user (weighted by its received signal power) and one
/// interference link from every active co-channel station to every victim
/// user (weighted by the received interference power).
pub fn links_from_association<S: Scalar>(
    assoc: &Association,
    users: &[UserTerminal<S>],
    stations: &[Station<S>],
    scenario: &ScenarioConfig<S>,
) -> Vec<LinkSpec<S>> {
    let active = ActiveSet::build(assoc, stations);
    let mut links = Vec::new();
    for user in users {
        let Some(serving) = assoc.get(user.id) else {
            continue;
        };
        for station in &active.stations {
            let d = torus_distance(user.position, station.position, &scenario.window);
            let tier = scenario.tier(station.tier).expect("tier exists");
            let power = received_power(tier.tx_power_w, d, &scenario.channel);
            let kind = if station.id == serving.station {
                LinkKind::Desired
            } else if scenario
                .frequency_plan
                .co_channel(serving.tier, station.tier)
            {
                LinkKind::Interference
            } else {
                continue;
            };
            links.push(LinkSpec {
                from: EntityRef::Station {
                    tier: station.tier,
                    station: station.id,
                },
                to: EntityRef::User { user: user.id },
                kind,
                weight: LinkWeight::Finite(power),
            });
        }
    }
    links
}

/// Partition of the active stations into mutually interfering conflict
/// groups and the non-conflict remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictPartition {
    /// Connected components (size ≥ 2) of the above-threshold
    /// cross-interference graph.
    pub conflict_groups: Vec<BTreeSet<(TierId, StationId)>>,
    /// Active stations with all pairwise cross-interference below threshold.
    pub non_conflict: BTreeSet<(TierId, StationId)>,
}

/// Classify active stations into conflict/non-conflict domains: two
/// co-channel active stations conflict when either one's signal at the
/// other's nearest served user exceeds `threshold_w`. Groups are the
/// connected components of size ≥ 2.
pub fn classify_conflict_domains<S: Scalar>(
    stations: &[Station<S>],
    users: &[UserTerminal<S>],
    assoc: &Association,
    scenario: &ScenarioConfig<S>,
    threshold_w: S,
) -> ConflictPartition {
    let active = ActiveSet::build(assoc, stations);
    let n = active.stations.len();

    // Representative receiver per active station: its served user nearest
    // to it, ties by lowest user id.
    let mut rep_user: BTreeMap<StationId, Vec2<S>> = BTreeMap::new();
    for station in &active.stations {
        let mut best: Option<(S, UserId, Vec2<S>)> = None;
        for user in users {
            if assoc.get(user.id).map(|c| c.station) != Some(station.id) {
                continue;
            }
            let d = torus_distance(user.position, station.position, &scenario.window);
            let better = match &best {
                None => true,
                Some((bd, bid, _)) => d < *bd || (d == *bd && user.id < *bid),
            };
            if better {
                best = Some((d, user.id, user.position));
            }
        }
        if let Some((_, _, pos)) = best {
            rep_user.insert(station.id, pos);
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = active.stations[i];
            let b = active.stations[j];
            if !scenario.frequency_plan.co_channel(a.tier, b.tier) {
                continue;
            }
            let tier_a = scenario.tier(a.tier).expect("tier exists");
            let tier_b = scenario.tier(b.tier).expect("tier exists");
            let a_hits_b = rep_user.get(&b.id).map(|victim| {
                let d = torus_distance(a.position, *victim, &scenario.window);
                received_power(tier_a.tx_power_w, d, &scenario.channel) > threshold_w
            });
            let b_hits_a = rep_user.get(&a.id).map(|victim| {
                let d = torus_distance(b.position, *victim, &scenario.window);
                received_power(tier_b.tx_power_w, d, &scenario.channel) > threshold_w
            });
            if a_hits_b == Some(true) || b_hits_a == Some(true) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }

    let mut visited = vec![false; n];
    let mut conflict_groups = Vec::new();
    let mut non_conflict = BTreeSet::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(i) = stack.pop() {
            component.push(i);
            for &j in &adjacency[i] {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        let keys: BTreeSet<(TierId, StationId)> = component
            .iter()
            .map(|&i| (active.stations[i].tier, active.stations[i].id))
            .collect();
        if keys.len() >= 2 {
            conflict_groups.push(keys);
        } else {
            non_conflict.extend(keys);
        }
    }

    ConflictPartition {
        conflict_groups,
        non_conflict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::MobilityState;
    use crate::model::{FrequencyPlan, SimWindow, TierConfig, UserId};
    use approx::assert_relative_eq;
    use std::collections::BTreeSet;

    fn channel(alpha: f64) -> ChannelModel<f64> {
        ChannelModel {
            path_loss_exponent: alpha,
            noise_power_w: 0.0,
            reference_distance_km: 0.001,
        }
    }

    fn scenario(tiers: Vec<TierConfig<f64>>, alpha: f64, noise: f64) -> ScenarioConfig<f64> {
        ScenarioConfig {
            tiers,
            window: SimWindow::new(100.0),
            channel: ChannelModel {
                noise_power_w: noise,
                ..channel(alpha)
            },
            frequency_plan: FrequencyPlan::PerTierBands,
            sinr_ceiling: 1.0e6,
        }
    }

    fn tier(k: u32, power: f64) -> TierConfig<f64> {
        TierConfig {
            tier_id: TierId(k),
            tx_power_w: power,
            station_intensity: 1.0,
            bandwidth_hz: 1.0e6,
            circuit_power_w: 0.0,
            interference_tolerance_w: 1.0,
        }
    }

    fn station(id: u32, k: u32, x: f64, y: f64) -> Station<f64> {
        Station {
            id: StationId(id),
            tier: TierId(k),
            position: Vec2::new(x, y),
        }
    }

    fn user(id: u32, x: f64, y: f64, tiers: &[u32]) -> UserTerminal<f64> {
        UserTerminal {
            id: UserId(id),
            position: Vec2::new(x, y),
            mobility_state: MobilityState::at_rest(),
            accessible_tiers: tiers.iter().map(|k| TierId(*k)).collect::<BTreeSet<_>>(),
        }
    }

    fn serve(user: u32, k: u32, st: u32) -> (UserId, ServingCell) {
        (
            UserId(user),
            ServingCell {
                tier: TierId(k),
                station: StationId(st),
            },
        )
    }

    #[test]
    fn received_power_formula() {
        let ch = channel(4.0);
        assert_relative_eq!(received_power(1.0, 1.0, &ch), 1.0);
        assert_relative_eq!(received_power(2.0, 2.0, &ch), 0.125);
    }

    #[test]
    fn zero_distance_clamps_to_reference() {
        let ch = channel(4.0);
        let clamped = received_power(3.0, 0.0, &ch);
        assert!(clamped.is_finite());
        assert_relative_eq!(clamped, 3.0 * 0.001_f64.powf(-4.0));
    }

    #[test]
    fn sinr_balances_interference_and_noise() {
        // desired 1 W (P=1 at d=1), one active co-channel interferer giving
        // 0.5 W (P=0.5 at d=1), noise 0.5 W → SINR 1.0.
        let sc = scenario(vec![tier(1, 1.0), tier(2, 0.5)], 4.0, 0.5);
        let mut sc = sc;
        sc.frequency_plan = FrequencyPlan::FullReuse;
        let stations = vec![station(1, 1, 10.0, 10.0), station(2, 2, 10.0, 12.0)];
        let users = [user(1, 10.0, 11.0, &[1, 2]), user(2, 10.0, 13.0, &[2])];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 2, 2)]);
        let value = sinr(
            &users[0],
            assoc.get(UserId(1)).unwrap(),
            &stations,
            &assoc,
            &sc,
        );
        assert_relative_eq!(value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn sinr_noise_limited() {
        let sc = scenario(vec![tier(1, 1.0e-6)], 4.0, 1.0e-9);
        let stations = vec![station(1, 1, 10.0, 10.0)];
        let users = [user(1, 10.0, 11.0, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1)]);
        let value = sinr(
            &users[0],
            assoc.get(UserId(1)).unwrap(),
            &stations,
            &assoc,
            &sc,
        );
        assert_relative_eq!(value, 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn sinr_degenerate_case_is_infinite() {
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        let stations = vec![station(1, 1, 10.0, 10.0)];
        let users = [user(1, 10.0, 11.0, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1)]);
        let value = sinr(
            &users[0],
            assoc.get(UserId(1)).unwrap(),
            &stations,
            &assoc,
            &sc,
        );
        assert!(value.is_infinite());
    }

    #[test]
    fn interference_empty_without_cochannel_actives() {
        let sc = scenario(vec![tier(1, 1.0), tier(2, 1.0)], 4.0, 0.0);
        let stations = vec![station(1, 1, 10.0, 10.0), station(2, 2, 12.0, 10.0)];
        let users = [user(1, 11.0, 10.0, &[1]), user(2, 13.0, 10.0, &[2])];
        // user 1 in tier 1, user 2 in tier 2: different bands, no interference
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 2, 2)]);
        assert_eq!(interference_at_user(&users[0], &assoc, &stations, &sc), 0.0);
    }

    #[test]
    fn interference_sums_over_interferers() {
        // Two co-channel active interferers delivering 0.1 and 0.05 W.
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        // distances chosen so P·d^−4 = 0.1 and 0.05
        let d1 = 0.1_f64.powf(-1.0 / 4.0);
        let d2 = 0.05_f64.powf(-1.0 / 4.0);
        let stations = vec![
            station(1, 1, 50.0, 50.0),
            station(2, 1, 50.0 + d1, 50.0),
            station(3, 1, 50.0 - d2, 50.0),
        ];
        let users = [
            user(1, 50.0, 50.0, &[1]),
            user(2, 50.0 + d1, 50.1, &[1]),
            user(3, 50.0 - d2, 50.1, &[1]),
        ];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2), serve(3, 1, 3)]);
        let got = interference_at_user(&users[0], &assoc, &stations, &sc);
        assert_relative_eq!(got, 0.15, max_relative = 1e-12);
    }

    #[test]
    fn single_interferer_alpha_three() {
        let sc = scenario(vec![tier(1, 1.0)], 3.0, 0.0);
        let stations = vec![station(1, 1, 50.0, 50.0), station(2, 1, 52.0, 50.0)];
        let users = [user(1, 50.0, 50.0, &[1]), user(2, 52.0, 50.1, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2)]);
        let got = interference_at_user(&users[0], &assoc, &stations, &sc);
        assert_relative_eq!(got, 0.125, max_relative = 1e-12);
    }

    #[test]
    fn aggregate_is_sum_of_per_user() {
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        let d = 0.1_f64.powf(-1.0 / 4.0);
        let stations = vec![station(1, 1, 50.0, 50.0), station(2, 1, 50.0 + d, 50.0)];
        let users = vec![user(1, 50.0, 50.0, &[1]), user(2, 50.0 + d, 50.0, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2)]);
        let report = aggregate_interference(&assoc, &users, &stations, &sc);
        assert_relative_eq!(report.aggregate_w, 0.2, max_relative = 1e-12);
        let resum: f64 = report.per_user_w.values().sum();
        assert_relative_eq!(report.aggregate_w, resum, max_relative = 1e-12);
    }

    #[test]
    fn per_tier_means_default_to_zero() {
        let sc = scenario(vec![tier(1, 1.0), tier(2, 1.0), tier(3, 1.0)], 4.0, 0.0);
        let stations = vec![station(1, 1, 10.0, 10.0)];
        let users = vec![user(1, 11.0, 10.0, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1)]);
        let report = aggregate_interference(&assoc, &users, &stations, &sc);
        assert_eq!(report.per_tier_mean_w[&TierId(2)], 0.0);
        assert_eq!(report.per_tier_mean_w[&TierId(3)], 0.0);
    }

    #[test]
    fn cross_band_stations_never_conflict() {
        let sc = scenario(vec![tier(1, 1.0), tier(2, 1.0)], 4.0, 0.0);
        let stations = vec![station(1, 1, 10.0, 10.0), station(2, 2, 10.1, 10.0)];
        let users = vec![user(1, 10.0, 10.1, &[1]), user(2, 10.1, 10.1, &[2])];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 2, 2)]);
        let partition = classify_conflict_domains(&stations, &users, &assoc, &sc, 1e-9);
        assert!(partition.conflict_groups.is_empty());
        assert_eq!(partition.non_conflict.len(), 2);
    }

    #[test]
    fn close_cochannel_stations_form_a_conflict_group() {
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        let stations = vec![station(1, 1, 10.0, 10.0), station(2, 1, 10.1, 10.0)];
        let users = vec![user(1, 10.0, 10.05, &[1]), user(2, 10.1, 10.05, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2)]);
        // mutual received power at the neighbours' users is ~1/0.1⁴ ≫ threshold
        let partition = classify_conflict_domains(&stations, &users, &assoc, &sc, 1.0);
        assert_eq!(partition.conflict_groups.len(), 1);
        assert_eq!(partition.conflict_groups[0].len(), 2);
        assert!(partition.non_conflict.is_empty());
    }

    #[test]
    fn huge_threshold_leaves_everything_non_conflict() {
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        let stations = vec![station(1, 1, 10.0, 10.0), station(2, 1, 10.1, 10.0)];
        let users = vec![user(1, 10.0, 10.05, &[1]), user(2, 10.1, 10.05, &[1])];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2)]);
        let partition = classify_conflict_domains(&stations, &users, &assoc, &sc, 1.0e30);
        assert!(partition.conflict_groups.is_empty());
        assert_eq!(partition.non_conflict.len(), 2);
    }

    #[test]
    fn partition_covers_active_stations_exactly_once() {
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        let stations = vec![
            station(1, 1, 10.0, 10.0),
            station(2, 1, 10.2, 10.0),
            station(3, 1, 80.0, 80.0),
            station(4, 1, 40.0, 40.0), // idle
        ];
        let users = vec![
            user(1, 10.0, 10.1, &[1]),
            user(2, 10.2, 10.1, &[1]),
            user(3, 80.0, 80.1, &[1]),
        ];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2), serve(3, 1, 3)]);
        let partition = classify_conflict_domains(&stations, &users, &assoc, &sc, 1.0);
        let mut seen: BTreeSet<(TierId, StationId)> = partition.non_conflict.clone();
        for group in &partition.conflict_groups {
            for key in group {
                assert!(seen.insert(*key), "station in two classes");
            }
        }
        assert_eq!(seen.len(), 3); // idle station 4 excluded
    }

    #[test]
    fn association_links_cover_servers_and_cochannel_interferers() {
        let sc = scenario(vec![tier(1, 1.0), tier(2, 1.0)], 4.0, 0.0);
        let stations = vec![
            station(1, 1, 10.0, 10.0),
            station(2, 1, 12.0, 10.0),
            station(3, 2, 11.0, 12.0),
            station(4, 1, 40.0, 40.0), // idle
        ];
        let users = vec![
            user(1, 10.0, 10.5, &[1, 2]),
            user(2, 12.0, 10.5, &[1, 2]),
            user(3, 11.0, 12.5, &[2]),
        ];
        let assoc = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2), serve(3, 2, 3)]);
        let links = links_from_association(&assoc, &users, &stations, &sc);
        // 3 desired links; tier-1 users each see one co-channel interferer,
        // the tier-2 user sees none
        let desired = links.iter().filter(|l| l.kind == LinkKind::Desired).count();
        let interference = links
            .iter()
            .filter(|l| l.kind == LinkKind::Interference)
            .count();
        assert_eq!(desired, 3);
        assert_eq!(interference, 2);
        for l in &links {
            assert!(l.weight.finite().unwrap() >= 0.0);
        }

        // the exported links survive converged-topology construction intact
        let layouts = vec![
            crate::geometry::TierLayout {
                tier_id: TierId(1),
                points: vec![stations[0], stations[1], stations[3]],
            },
            crate::geometry::TierLayout {
                tier_id: TierId(2),
                points: vec![stations[2]],
            },
        ];
        let topo = crate::geometry::build_converged_topology(
            &layouts,
            &sc.tiers,
            &users,
            &links,
            sc.channel.path_loss_exponent,
            sc.window.center(),
        )
        .unwrap();
        assert_eq!(topo.links.len(), links.len());
    }

    #[test]
    fn removing_an_interferer_never_raises_interference() {
        let sc = scenario(vec![tier(1, 1.0)], 4.0, 0.0);
        let stations = vec![
            station(1, 1, 50.0, 50.0),
            station(2, 1, 52.0, 50.0),
            station(3, 1, 48.0, 50.0),
        ];
        let users = [
            user(1, 50.0, 50.0, &[1]),
            user(2, 52.0, 50.0, &[1]),
            user(3, 48.0, 50.0, &[1]),
        ];
        let full = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2), serve(3, 1, 3)]);
        // user 3 rehomed onto station 2's cell: station 3 goes silent
        let fewer = Association::from_iter([serve(1, 1, 1), serve(2, 1, 2), serve(3, 1, 2)]);
        let before = interference_at_user(&users[0], &full, &stations, &sc);
        let after = interference_at_user(&users[0], &fewer, &stations, &sc);
        assert!(after <= before);
    }
}
