//! Small-instance oracle suite: on exhaustively searchable two-tier
//! instances, the greedy optimizers must land between the max-SINR
//! baseline and the brute-force optimum, with monotone traces.

use std::collections::BTreeSet;

use converge_core::channel::aggregate_interference;
use converge_core::mobility::MobilityState;
use converge_core::model::TierId;
use converge_core::schemes::{
    associate_max_sinr, brute_force_best_association, energy_efficiency, minimize_interference,
    optimize_energy_efficiency, ObjectiveKind,
};
use converge_core::{ScenarioConfig, Station, StationId, UserId, UserTerminal, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::runner::RunError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub instances: u32,
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run `instances` random two-tier instances (≤ 4 users, ≤ 6 stations) and
/// check the sandwich `optimum ≤ greedy ≤ baseline` for interference and
/// `baseline ≤ greedy ≤ optimum` for energy efficiency.
pub fn run_oracle_suite(
    config: &ExperimentConfig,
    instances: u32,
) -> Result<OracleReport, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed ^ 0x6F72_6163_6C65);
    let mut failures = Vec::new();

    for instance in 0..instances {
        let alpha = config.alphas[instance as usize % config.alphas.len()];
        let (scenario, stations, users) = random_instance(config, alpha, &mut rng);
        let cap = (users.len() * scenario.tier_count()).max(1);

        let baseline = associate_max_sinr(&users, &stations, &scenario)?;
        let baseline_i =
            aggregate_interference(&baseline, &users, &stations, &scenario).aggregate_w;
        let baseline_e = energy_efficiency(&baseline, &users, &stations, &scenario).efficiency_bpj;

        let (mini, trace_i) = minimize_interference(&baseline, &users, &stations, &scenario, cap)?;
        let greedy_i = aggregate_interference(&mini, &users, &stations, &scenario).aggregate_w;
        let (maxe, trace_e) =
            optimize_energy_efficiency(&baseline, &users, &stations, &scenario, cap)?;
        let greedy_e = energy_efficiency(&maxe, &users, &stations, &scenario).efficiency_bpj;

        let best_i = brute_force_best_association(
            &users,
            &stations,
            &scenario,
            ObjectiveKind::AggregateInterference,
        )?
        .objective_value;
        let best_e = brute_force_best_association(
            &users,
            &stations,
            &scenario,
            ObjectiveKind::EnergyEfficiency,
        )?
        .objective_value;

        if !trace_i.is_monotone() || !trace_e.is_monotone() {
            failures.push(format!("instance {instance}: non-monotone optimizer trace"));
        }
        if !(best_i <= greedy_i && greedy_i <= baseline_i) {
            failures.push(format!(
                "instance {instance}: interference sandwich broken: {best_i} <= {greedy_i} <= {baseline_i}"
            ));
        }
        if !(baseline_e <= greedy_e && greedy_e <= best_e) {
            failures.push(format!(
                "instance {instance}: efficiency sandwich broken: {baseline_e} <= {greedy_e} <= {best_e}"
            ));
        }
    }

    Ok(OracleReport {
        instances,
        failures,
    })
}

fn random_instance(
    config: &ExperimentConfig,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> (ScenarioConfig, Vec<Station>, Vec<UserTerminal>) {
    let side = 4.0;
    let mut scenario = config.scenario_for_alpha(alpha);
    scenario.tiers.truncate(2);
    scenario.window = converge_core::SimWindow::new(side);

    let n1 = rng.gen_range(1..=3usize);
    let n2 = rng.gen_range(1..=3usize);
    let mut stations = Vec::with_capacity(n1 + n2);
    for i in 0..(n1 + n2) {
        stations.push(Station {
            id: StationId(i as u32 + 1),
            tier: TierId(if i < n1 { 1 } else { 2 }),
            position: Vec2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side)),
        });
    }
    let accessible: BTreeSet<TierId> = [TierId(1), TierId(2)].into_iter().collect();
    let users = (0..rng.gen_range(1..=4u32))
        .map(|i| UserTerminal {
            id: UserId(i + 1),
            position: Vec2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side)),
            mobility_state: MobilityState::at_rest(),
            accessible_tiers: accessible.clone(),
        })
        .collect();
    (scenario, stations, users)
}
