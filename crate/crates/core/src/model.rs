//! Domain types shared by every other module: tiers, windows, channel
//! parameters, stations, user terminals and the user→station association.
//!
//! These are immutable value types; no algorithms live here beyond
//! invariant validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::mobility::MobilityState;
use crate::scalar::{Scalar, Vec2};

/// Tier index, 1-based and contiguous within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TierId(pub u32);

/// Scenario-wide unique station identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StationId(pub u32);

/// Scenario-wide unique user identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl fmt::Display for TierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One class of infrastructure stations sharing power, density, bandwidth
/// and per-receiver interference tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct TierConfig<S> {
    pub tier_id: TierId,
    /// Transmit power in watts, > 0.
    pub tx_power_w: S,
    /// Station density in stations per km², > 0.
    pub station_intensity: S,
    /// Per-link bandwidth in Hz, > 0.
    pub bandwidth_hz: S,
    /// Per-active-station overhead power in watts, ≥ 0.
    pub circuit_power_w: S,
    /// Maximum acceptable mean per-receiver interference in this tier, > 0.
    pub interference_tolerance_w: S,
}

/// Square observation window with torus (wrap-around) boundary.
///
/// The torus removes edge effects in interference sums; all sampled
/// positions lie in `[0, side_km)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimWindow<S> {
    pub side_km: S,
}

impl<S: Scalar> SimWindow<S> {
    pub fn new(side_km: S) -> Self {
        Self { side_km }
    }

    pub fn area_km2(&self) -> S {
        self.side_km * self.side_km
    }

    pub fn center(&self) -> Vec2<S> {
        let half = self.side_km / S::c(2.0);
        Vec2::new(half, half)
    }

    pub fn contains(&self, p: Vec2<S>) -> bool {
        p.x >= S::zero() && p.x < self.side_km && p.y >= S::zero() && p.y < self.side_km
    }

    /// Wrap a point back onto `[0, side)²`.
    pub fn wrap(&self, p: Vec2<S>) -> Vec2<S> {
        Vec2::new(wrap_coord(p.x, self.side_km), wrap_coord(p.y, self.side_km))
    }
}

fn wrap_coord<S: Scalar>(x: S, side: S) -> S {
    let r = x % side;
    if r < S::zero() {
        r + side
    } else {
        r
    }
}

/// Distance-based path-loss channel: received power decays as d^(−α).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel<S> {
    /// Path loss exponent α, must exceed 2 so aggregate interference stays
    /// finite on large windows.
    pub path_loss_exponent: S,
    /// Additive noise power in watts, ≥ 0.
    pub noise_power_w: S,
    /// Minimum distance clamp in km, > 0; avoids the d → 0 singularity.
    pub reference_distance_km: S,
}

/// Which tiers share spectrum. Co-channel interference only arises between
/// stations in the same band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyPlan {
    /// Every tier has its own band; co-channel interference is intra-tier.
    PerTierBands,
    /// All tiers share one band.
    FullReuse,
}

impl FrequencyPlan {
    pub fn co_channel(&self, a: TierId, b: TierId) -> bool {
        match self {
            FrequencyPlan::PerTierBands => a == b,
            FrequencyPlan::FullReuse => true,
        }
    }
}

/// An infrastructure station at a fixed position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station<S> {
    pub id: StationId,
    pub tier: TierId,
    pub position: Vec2<S>,
}

/// A mobile terminal: position, velocity state and the set of tiers its
/// radio can attach to.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTerminal<S> {
    pub id: UserId,
    pub position: Vec2<S>,
    pub mobility_state: MobilityState<S>,
    pub accessible_tiers: BTreeSet<TierId>,
}

/// The serving (tier, station) pair of one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ServingCell {
    pub tier: TierId,
    pub station: StationId,
}

/// Total user → serving-cell map; the decision variable of the optimizers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Association {
    map: BTreeMap<UserId, ServingCell>,
}

impl FromIterator<(UserId, ServingCell)> for Association {
    fn from_iter<I: IntoIterator<Item = (UserId, ServingCell)>>(iter: I) -> Self {
        Self {
            map: iter.into_iter().collect(),
        }
    }
}

impl Association {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, user: UserId) -> Option<ServingCell> {
        self.map.get(&user).copied()
    }

    /// Insert or replace a user's serving cell; returns the previous one.
    pub fn set(&mut self, user: UserId, cell: ServingCell) -> Option<ServingCell> {
        self.map.insert(user, cell)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, ServingCell)> + '_ {
        self.map.iter().map(|(u, c)| (*u, *c))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Number of users served by each station (stations with no entry are idle).
    pub fn served_counts(&self) -> BTreeMap<StationId, usize> {
        let mut counts = BTreeMap::new();
        for cell in self.map.values() {
            *counts.entry(cell.station).or_insert(0) += 1;
        }
        counts
    }

    /// Check totality and tier consistency against a scenario. O(#users).
    pub fn validate<S: Scalar>(
        &self,
        users: &[UserTerminal<S>],
        stations: &[Station<S>],
        scenario: &ScenarioConfig<S>,
    ) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        let by_id: BTreeMap<StationId, &Station<S>> = stations.iter().map(|s| (s.id, s)).collect();
        for user in users {
            match self.get(user.id) {
                None => violations.push(Violation::new(
                    format!("association[{}]", user.id),
                    "every user must be served",
                )),
                Some(cell) => {
                    if !user.accessible_tiers.contains(&cell.tier) {
                        violations.push(Violation::new(
                            format!("association[{}]", user.id),
                            "serving tier must be accessible to the user",
                        ));
                    }
                    if scenario.tier(cell.tier).is_none() {
                        violations.push(Violation::new(
                            format!("association[{}]", user.id),
                            "serving tier must exist in the scenario",
                        ));
                    }
                    match by_id.get(&cell.station) {
                        None => violations.push(Violation::new(
                            format!("association[{}]", user.id),
                            "serving station must exist",
                        )),
                        Some(st) if st.tier != cell.tier => violations.push(Violation::new(
                            format!("association[{}]", user.id),
                            "serving station must belong to the serving tier",
                        )),
                        _ => {}
                    }
                }
            }
        }
        if self.map.len() != users.len() {
            // Extra entries for unknown users also break totality.
            let known: BTreeSet<UserId> = users.iter().map(|u| u.id).collect();
            for uid in self.map.keys() {
                if !known.contains(uid) {
                    violations.push(Violation::new(
                        format!("association[{uid}]"),
                        "association references an unknown user",
                    ));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }
}

/// Static description of a K-tier network and its observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<S> {
    pub tiers: Vec<TierConfig<S>>,
    pub window: SimWindow<S>,
    pub channel: ChannelModel<S>,
    pub frequency_plan: FrequencyPlan,
    /// Cap applied to SINR before Shannon-rate evaluation; bounds the
    /// interference-free +∞ sentinel.
    pub sinr_ceiling: S,
}

impl<S: Scalar> ScenarioConfig<S> {
    pub fn tier(&self, id: TierId) -> Option<&TierConfig<S>> {
        self.tiers.iter().find(|t| t.tier_id == id)
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn tier_ids(&self) -> impl Iterator<Item = TierId> + '_ {
        self.tiers.iter().map(|t| t.tier_id)
    }
}

/// One invariant failure, naming the offending field and the constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// All invariant failures of a scenario, collected rather than short-circuited.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid scenario: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ScenarioError {
    pub violations: Vec<Violation>,
}

/// Validate every type invariant of a scenario; returns it unchanged when
/// valid, otherwise the complete list of violations. Idempotent.
pub fn validate_scenario<S: Scalar>(
    scenario: ScenarioConfig<S>,
) -> Result<ScenarioConfig<S>, ScenarioError> {
    let mut violations = Vec::new();

    if scenario.tiers.is_empty() {
        violations.push(Violation::new("tiers", "at least one tier is required"));
    }
    let mut ids: Vec<u32> = scenario.tiers.iter().map(|t| t.tier_id.0).collect();
    ids.sort_unstable();
    let contiguous = ids.iter().enumerate().all(|(i, id)| *id == i as u32 + 1);
    if !scenario.tiers.is_empty() && !contiguous {
        violations.push(Violation::new(
            "tiers",
            "tier_ids must be unique and contiguous from 1",
        ));
    }

    for tier in &scenario.tiers {
        let field = |name: &str| format!("tier[{}].{}", tier.tier_id, name);
        if !(tier.tx_power_w > S::zero()) {
            violations.push(Violation::new(
                field("tx_power_w"),
                "tx_power_w must be > 0",
            ));
        }
        if !(tier.station_intensity > S::zero()) {
            violations.push(Violation::new(
                field("station_intensity"),
                "station_intensity must be > 0",
            ));
        }
        if !(tier.bandwidth_hz > S::zero()) {
            violations.push(Violation::new(
                field("bandwidth_hz"),
                "bandwidth_hz must be > 0",
            ));
        }
        if !(tier.circuit_power_w >= S::zero()) {
            violations.push(Violation::new(
                field("circuit_power_w"),
                "circuit_power_w must be >= 0",
            ));
        }
        if !(tier.interference_tolerance_w > S::zero()) {
            violations.push(Violation::new(
                field("interference_tolerance_w"),
                "interference_tolerance_w must be > 0",
            ));
        }
    }

    if !(scenario.window.side_km > S::zero()) {
        violations.push(Violation::new("window.side_km", "side_km must be > 0"));
    }

    if !(scenario.channel.path_loss_exponent > S::c(2.0)) {
        violations.push(Violation::new(
            "channel.path_loss_exponent",
            "path_loss_exponent must exceed 2",
        ));
    }
    if !(scenario.channel.noise_power_w >= S::zero()) {
        violations.push(Violation::new(
            "channel.noise_power_w",
            "noise_power_w must be >= 0",
        ));
    }
    if !(scenario.channel.reference_distance_km > S::zero()) {
        violations.push(Violation::new(
            "channel.reference_distance_km",
            "reference_distance_km must be > 0",
        ));
    }
    if !(scenario.sinr_ceiling > S::zero()) {
        violations.push(Violation::new("sinr_ceiling", "sinr_ceiling must be > 0"));
    }

    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError { violations })
    }
}
