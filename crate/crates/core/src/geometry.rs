//! Point-process sampling, the power-normalization transform and the
//! converged (unit-power) topology.
//!
//! A station with transmit power P at location x delivers
//! `P·‖x−O‖^(−α)` to a receiver at the normalization center O. The same
//! power arrives from a virtual unit-power station at the scaled location
//! `P^(−1/α)·(x−O)`, so scaling every tier by its own factor merges a
//! K-tier deployment into one unit-power node set while preserving all
//! received powers at O. The converged topology is an analysis artifact in
//! the plane; simulation-time interference sums stay in original
//! coordinates with true powers because scaling does not commute with the
//! torus wrap.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{SimWindow, Station, StationId, TierConfig, TierId, UserId, UserTerminal};
use crate::scalar::{Scalar, Vec2};

/// Sampled station set of one tier.
#[derive(Debug, Clone, PartialEq)]
pub struct TierLayout<S> {
    pub tier_id: TierId,
    pub points: Vec<Station<S>>,
}

impl<S: Scalar> TierLayout<S> {
    /// Wrap raw positions into stations with ids `id_start, id_start+1, …`.
    pub fn from_positions(tier_id: TierId, positions: Vec<Vec2<S>>, id_start: u32) -> Self {
        let points = positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| Station {
                id: StationId(id_start + i as u32),
                tier: tier_id,
                position,
            })
            .collect();
        Self { tier_id, points }
    }
}

/// Identifier of a node in the converged topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Back-reference from a converged node to the original entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeOrigin {
    Station { tier: TierId, station: StationId },
    User { user: UserId },
}

/// A unit-power node of the converged topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergedNode<S> {
    pub id: NodeId,
    /// Position after the `P^(−1/α)` scaling, relative to the center.
    pub scaled_position: Vec2<S>,
    pub origin: NodeOrigin,
    /// Always 1 by construction; kept explicit so the invariant is checkable.
    pub normalized_power: S,
}

/// Link semantics: solid desired links, dashed interference links, and the
/// virtual infinite-bandwidth links that glue a multi-mode terminal's
/// per-tier nodes into one functional node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Desired,
    Interference,
    VirtualInterNode,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            LinkKind::Desired => "desired",
            LinkKind::Interference => "interference",
            LinkKind::VirtualInterNode => "virtual-internode",
        };
        f.write_str(token)
    }
}

/// Link weight with a reserved infinite sentinel. There are deliberately no
/// arithmetic impls; callers must go through [`LinkWeight::finite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkWeight<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> LinkWeight<S> {
    pub fn finite(self) -> Option<S> {
        match self {
            LinkWeight::Finite(w) => Some(w),
            LinkWeight::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, LinkWeight::Infinite)
    }
}

impl<S: Scalar> fmt::Display for LinkWeight<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkWeight::Finite(w) => write!(f, "{w}"),
            LinkWeight::Infinite => f.write_str("inf"),
        }
    }
}

/// A link between two converged nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyLink<S> {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: LinkKind,
    pub weight: LinkWeight<S>,
}

/// Reference to an original entity, used when supplying links to
/// [`build_converged_topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityRef {
    Station { tier: TierId, station: StationId },
    User { user: UserId },
}

/// An input link between original entities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec<S> {
    pub from: EntityRef,
    pub to: EntityRef,
    pub kind: LinkKind,
    pub weight: LinkWeight<S>,
}

/// The converged topology: unit-power nodes plus the preserved link set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedTopology<S> {
    pub center: Vec2<S>,
    pub nodes: Vec<ConvergedNode<S>>,
    pub links: Vec<TopologyLink<S>>,
}

impl<S: Scalar> ConvergedTopology<S> {
    pub fn node(&self, id: NodeId) -> Option<&ConvergedNode<S>> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_by_origin(&self, origin: NodeOrigin) -> Option<&ConvergedNode<S>> {
        self.nodes.iter().find(|n| n.origin == origin)
    }

    /// Flat text export: one `N <id> <x> <y> <tier> <origin_id>` line per
    /// node (tier 0 for user-origin nodes) and one
    /// `L <from> <to> <kind> <weight|inf>` line per link.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let (tier, origin_id) = match n.origin {
                NodeOrigin::Station { tier, station } => (tier.0, station.0),
                NodeOrigin::User { user } => (0, user.0),
            };
            writeln!(
                out,
                "N {} {} {} {} {}",
                n.id, n.scaled_position.x, n.scaled_position.y, tier, origin_id
            )
            .expect("string write");
        }
        for l in &self.links {
            writeln!(out, "L {} {} {} {}", l.from, l.to, l.kind, l.weight).expect("string write");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("intensity must be > 0")]
    InvalidIntensity,
    #[error("window side must be > 0")]
    InvalidWindow,
    #[error("tx power must be > 0 and alpha > 0")]
    InvalidScaling,
    #[error("mode set must be nonempty")]
    EmptyModes,
    #[error("link references unknown entity {0}")]
    DanglingLink(String),
    #[error("unknown tier {0}")]
    UnknownTier(TierId),
}

/// Sample a homogeneous Poisson point process on the window: the count is
/// Poisson(intensity × area) and positions are i.i.d. uniform.
/// Deterministic for a fixed seed.
pub fn sample_ppp<S: Scalar>(
    intensity: S,
    window: &SimWindow<S>,
    seed: u64,
) -> Result<Vec<Vec2<S>>, GeometryError> {
    if !(intensity > S::zero()) || !intensity.is_finite() {
        return Err(GeometryError::InvalidIntensity);
    }
    if !(window.side_km > S::zero()) {
        return Err(GeometryError::InvalidWindow);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = intensity * window.area_km2();
    let count = S::poisson_count(&mut rng, mean);
    let side = window.side_km;
    let points = (0..count)
        .map(|_| {
            let x = S::uniform(&mut rng, S::zero(), side);
            let y = S::uniform(&mut rng, S::zero(), side);
            Vec2::new(x, y)
        })
        .collect();
    Ok(points)
}

/// Scale center-relative points by `P^(−1/α)` so a unit-power transmitter
/// at the scaled location delivers the same power to the center as the
/// original `P`-power transmitter.
pub fn scale_points<S: Scalar>(
    points: &[Vec2<S>],
    tx_power_w: S,
    alpha: S,
    center: Vec2<S>,
) -> Result<Vec<Vec2<S>>, GeometryError> {
    let factor = power_scale_factor(tx_power_w, alpha)?;
    Ok(points.iter().map(|p| (*p - center) * factor).collect())
}

/// The per-tier scaling factor `P^(−1/α)`.
pub fn power_scale_factor<S: Scalar>(tx_power_w: S, alpha: S) -> Result<S, GeometryError> {
    if !(tx_power_w > S::zero()) || !(alpha > S::zero()) || !alpha.is_finite() {
        return Err(GeometryError::InvalidScaling);
    }
    Ok(tx_power_w.powf(-alpha.recip()))
}

/// Euclidean distance with coordinate-wise wrap; symmetric and bounded by
/// `side·√2/2`.
pub fn torus_distance<S: Scalar>(a: Vec2<S>, b: Vec2<S>, window: &SimWindow<S>) -> S {
    let side = window.side_km;
    let dx = wrapped_delta(a.x, b.x, side);
    let dy = wrapped_delta(a.y, b.y, side);
    dx.hypot(dy)
}

fn wrapped_delta<S: Scalar>(a: S, b: S, side: S) -> S {
    let d = (a - b).abs();
    d.min(side - d)
}

/// Merge per-tier layouts and user terminals into the converged topology:
/// stations are scaled by their tier's `P^(−1/α)`, users enter unit-power
/// (identity-scaled) at their center-relative positions, and the supplied
/// link set is carried over unchanged in cardinality.
pub fn build_converged_topology<S: Scalar>(
    layouts: &[TierLayout<S>],
    tiers: &[TierConfig<S>],
    users: &[UserTerminal<S>],
    links: &[LinkSpec<S>],
    alpha: S,
    center: Vec2<S>,
) -> Result<ConvergedTopology<S>, GeometryError> {
    let mut nodes = Vec::new();
    let mut station_nodes: BTreeMap<(TierId, StationId), NodeId> = BTreeMap::new();
    let mut user_nodes: BTreeMap<UserId, NodeId> = BTreeMap::new();
    let mut next_id = 0u32;

    for layout in layouts {
        let tier = tiers
            .iter()
            .find(|t| t.tier_id == layout.tier_id)
            .ok_or(GeometryError::UnknownTier(layout.tier_id))?;
        let factor = power_scale_factor(tier.tx_power_w, alpha)?;
        for station in &layout.points {
            let id = NodeId(next_id);
            next_id += 1;
            nodes.push(ConvergedNode {
                id,
                scaled_position: (station.position - center) * factor,
                origin: NodeOrigin::Station {
                    tier: layout.tier_id,
                    station: station.id,
                },
                normalized_power: S::one(),
            });
            station_nodes.insert((layout.tier_id, station.id), id);
        }
    }

    for user in users {
        let id = NodeId(next_id);
        next_id += 1;
        nodes.push(ConvergedNode {
            id,
            scaled_position: user.position - center,
            origin: NodeOrigin::User { user: user.id },
            normalized_power: S::one(),
        });
        user_nodes.insert(user.id, id);
    }

    let resolve = |entity: EntityRef| -> Result<NodeId, GeometryError> {
        match entity {
            EntityRef::Station { tier, station } => {
                station_nodes.get(&(tier, station)).copied().ok_or_else(|| {
                    GeometryError::DanglingLink(format!("station {station} in tier {tier}"))
                })
            }
            EntityRef::User { user } => user_nodes
                .get(&user)
                .copied()
                .ok_or_else(|| GeometryError::DanglingLink(format!("user {user}"))),
        }
    };

    let links = links
        .iter()
        .map(|spec| {
            Ok(TopologyLink {
                from: resolve(spec.from)?,
                to: resolve(spec.to)?,
                kind: spec.kind,
                weight: spec.weight,
            })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;

    Ok(ConvergedTopology {
        center,
        nodes,
        links,
    })
}

/// Virtual per-tier nodes of a split terminal, plus the star of
/// infinite-weight links joining them.
pub type MultiModeSplit<S> = (Vec<ConvergedNode<S>>, Vec<TopologyLink<S>>);

/// Map a multi-mode terminal into one virtual single-mode node per
/// accessible tier, each at the tier-appropriate scaled position, joined
/// into a functional single node by a star of infinite-weight virtual
/// links rooted at the first mode's node.
pub fn split_multimode_node<S: Scalar>(
    user: &UserTerminal<S>,
    modes: &[TierId],
    tiers: &[TierConfig<S>],
    alpha: S,
    center: Vec2<S>,
    id_start: u32,
) -> Result<MultiModeSplit<S>, GeometryError> {
    if modes.is_empty() {
        return Err(GeometryError::EmptyModes);
    }
    let mut nodes = Vec::with_capacity(modes.len());
    for (i, mode) in modes.iter().enumerate() {
        let tier = tiers
            .iter()
            .find(|t| t.tier_id == *mode)
            .ok_or(GeometryError::UnknownTier(*mode))?;
        let factor = power_scale_factor(tier.tx_power_w, alpha)?;
        nodes.push(ConvergedNode {
            id: NodeId(id_start + i as u32),
            scaled_position: (user.position - center) * factor,
            origin: NodeOrigin::User { user: user.id },
            normalized_power: S::one(),
        });
    }
    let hub = nodes[0].id;
    let links = nodes[1..]
        .iter()
        .map(|n| TopologyLink {
            from: hub,
            to: n.id,
            kind: LinkKind::VirtualInterNode,
            weight: LinkWeight::Infinite,
        })
        .collect();
    Ok((nodes, links))
}
