//! Simulation core for multi-tier heterogeneous wireless networks.
//!
//! The library covers the whole modeling chain: Poisson station and user
//! layouts on a torus window, the power-normalization transform that merges
//! all tiers into a unit-power converged topology, path-loss interference
//! and SINR metrics, Gauss–Markov user mobility, the max-SINR association
//! baseline, greedy optimizers for aggregate interference and energy
//! efficiency, and the Monte Carlo aggregation statistics used to compare
//! the schemes.
//!
//! Everything numeric is generic over [`scalar::Scalar`] (any `num-traits`
//! float); the aliases below fix `f64`, which is what the simulator binary
//! uses.

// Validation predicates are written in rejecting form (`!(x > 0)`) so that
// NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod geometry;
pub mod metrics;
pub mod mobility;
pub mod model;
pub mod scalar;
pub mod schemes;

pub use scalar::{Scalar, Vec2};

pub use model::{Association, FrequencyPlan, ServingCell, StationId, TierId, UserId, Violation};

pub use geometry::{EntityRef, LinkKind, NodeId, NodeOrigin};

pub use metrics::Scheme;

pub use schemes::{MoveRecord, ObjectiveKind};

// Double-precision aliases; the simulator binaries work entirely in f64.
pub type Point = Vec2<f64>;
pub type TierConfig = model::TierConfig<f64>;
pub type SimWindow = model::SimWindow<f64>;
pub type ChannelModel = model::ChannelModel<f64>;
pub type ScenarioConfig = model::ScenarioConfig<f64>;
pub type Station = model::Station<f64>;
pub type UserTerminal = model::UserTerminal<f64>;
pub type TierLayout = geometry::TierLayout<f64>;
pub type ConvergedNode = geometry::ConvergedNode<f64>;
pub type ConvergedTopology = geometry::ConvergedTopology<f64>;
pub type TopologyLink = geometry::TopologyLink<f64>;
pub type LinkSpec = geometry::LinkSpec<f64>;
pub type LinkWeight = geometry::LinkWeight<f64>;
pub type InterferenceReport = channel::InterferenceReport<f64>;
pub type ConflictPartition = channel::ConflictPartition;
pub type MobilityParams = mobility::MobilityParams<f64>;
pub type MobilityState = mobility::MobilityState<f64>;
pub type OptimizerTrace = schemes::OptimizerTrace<f64>;
pub type FlowReport = schemes::FlowReport<f64>;
pub type EnergyReport = schemes::EnergyReport<f64>;
pub type BruteForceResult = schemes::BruteForceResult<f64>;
pub type SweepPoint = metrics::SweepPoint<f64>;
pub type SweepResult = metrics::SweepResult<f64>;
