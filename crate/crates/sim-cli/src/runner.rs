//! Monte Carlo drop and sweep execution.
//!
//! Seeds derive from (master seed, α index, λ index, drop index, attempt,
//! stream) and never from the scheme, so every scheme sees byte-identical
//! geometry and mobility per cell coordinate — comparisons across schemes
//! are paired. Drops run in parallel and reduce in fixed grid order, so a
//! (config, master seed) pair fully determines the output bytes.

use std::collections::BTreeMap;

use converge_core::channel::aggregate_interference;
use converge_core::geometry::{sample_ppp, GeometryError, TierLayout};
use converge_core::metrics::{aggregate_drops, normalize_curves, MetricsError, Provenance, Scheme};
use converge_core::mobility::{advance_users, MobilityState};
use converge_core::model::TierId;
use converge_core::schemes::{
    associate_max_sinr, energy_efficiency, minimize_interference, optimize_energy_efficiency,
    SchemeError,
};
use converge_core::{
    Association, OptimizerTrace, ScenarioConfig, Station, SweepPoint, SweepResult, UserId,
    UserTerminal,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::ExperimentConfig;

/// Worker-count override honored by [`run_sweep`].
pub const THREADS_ENV_VAR: &str = "CONVERGE_SIM_THREADS";

const MAX_RESAMPLE_ATTEMPTS: u32 = 64;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("scheme failure: {0}")]
    Scheme(#[from] SchemeError),
    #[error("geometry failure: {0}")]
    Geometry(#[from] GeometryError),
    #[error("metrics failure: {0}")]
    Metrics(#[from] MetricsError),
    #[error("drop (alpha #{alpha_idx}, lambda #{lambda_idx}, drop {drop_idx}) still infeasible after {attempts} resamples")]
    ResampleExhausted {
        alpha_idx: usize,
        lambda_idx: usize,
        drop_idx: u32,
        attempts: u32,
    },
    #[error("paired drops diverged: schemes disagree on geometry for alpha #{alpha_idx}, lambda #{lambda_idx}, drop {drop_idx}")]
    PairingMismatch {
        alpha_idx: usize,
        lambda_idx: usize,
        drop_idx: u32,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Metrics of one optimizer epoch, next to the max-SINR values the epoch
/// started from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSnapshot {
    pub baseline_interference_w: f64,
    pub baseline_mean_user_interference_w: f64,
    pub baseline_flow_bps: f64,
    pub baseline_power_w: f64,
    pub baseline_eff_bpj: f64,
    pub interference_w: f64,
    pub mean_user_interference_w: f64,
    pub flow_bps: f64,
    pub power_w: f64,
    pub eff_bpj: f64,
}

/// Everything one drop produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub seed: u64,
    /// Extra geometry draws needed before the drop was feasible.
    pub resamples: u32,
    pub user_count: usize,
    pub geometry_digest: String,
    pub snapshots: Vec<EpochSnapshot>,
    pub traces: Vec<OptimizerTrace>,
    pub final_association_digest: String,
    /// Optimizer-guarantee violations observed in this drop (monotone trace,
    /// final-vs-baseline bound). Zero in a correct build.
    pub violations: u32,
}

impl DropResult {
    pub fn mean_over_epochs(&self, f: impl Fn(&EpochSnapshot) -> f64) -> f64 {
        if self.snapshots.is_empty() {
            return 0.0;
        }
        self.snapshots.iter().map(&f).sum::<f64>() / self.snapshots.len() as f64
    }
}

/// A sweep plus its audit counters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub sweep: SweepResult,
    pub violations: u64,
    pub resampled_drops: u64,
}

fn sub_seed(
    master: u64,
    alpha_idx: usize,
    lambda_idx: usize,
    drop_idx: u32,
    attempt: u32,
    stream: &str,
    extra: u32,
) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((alpha_idx as u32).to_le_bytes());
    hasher.update((lambda_idx as u32).to_le_bytes());
    hasher.update(drop_idx.to_le_bytes());
    hasher.update(attempt.to_le_bytes());
    hasher.update(stream.as_bytes());
    hasher.update(extra.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn geometry_digest(stations: &[Station], users: &[UserTerminal]) -> String {
    let mut hasher = Sha256::new();
    for s in stations {
        hasher.update(s.tier.0.to_le_bytes());
        hasher.update(s.id.0.to_le_bytes());
        hasher.update(s.position.x.to_bits().to_le_bytes());
        hasher.update(s.position.y.to_bits().to_le_bytes());
    }
    for u in users {
        hasher.update(u.id.0.to_le_bytes());
        hasher.update(u.position.x.to_bits().to_le_bytes());
        hasher.update(u.position.y.to_bits().to_le_bytes());
        hasher.update(u.mobility_state.velocity.x.to_bits().to_le_bytes());
        hasher.update(u.mobility_state.velocity.y.to_bits().to_le_bytes());
    }
    hex_digest(hasher)
}

fn association_digest(assoc: &Association) -> String {
    let mut hasher = Sha256::new();
    for (user, cell) in assoc.iter() {
        hasher.update(user.0.to_le_bytes());
        hasher.update(cell.tier.0.to_le_bytes());
        hasher.update(cell.station.0.to_le_bytes());
    }
    hex_digest(hasher)
}

struct DropGeometry {
    stations: Vec<Station>,
    users: Vec<UserTerminal>,
    resamples: u32,
    seed: u64,
}

/// Sample stations and users for one drop coordinate, resampling with an
/// incremented attempt counter while any user has no reachable station.
fn sample_geometry(
    config: &ExperimentConfig,
    scenario: &ScenarioConfig,
    alpha_idx: usize,
    lambda_idx: usize,
    drop_idx: u32,
) -> Result<DropGeometry, RunError> {
    let lambda_users = config.lambda_users(config.lambda_factors[lambda_idx]);
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let seed = |stream: &str, extra: u32| {
            sub_seed(
                config.master_seed,
                alpha_idx,
                lambda_idx,
                drop_idx,
                attempt,
                stream,
                extra,
            )
        };

        let mut stations = Vec::new();
        let mut next_station = 1u32;
        for tier in &scenario.tiers {
            let positions = sample_ppp(
                tier.station_intensity,
                &scenario.window,
                seed("stations", tier.tier_id.0),
            )?;
            let layout = TierLayout::from_positions(tier.tier_id, positions, next_station);
            next_station += layout.points.len() as u32;
            stations.extend(layout.points);
        }

        let accessible = config.accessible_tiers.tiers_for(scenario.tier_count());
        let user_positions = sample_ppp(lambda_users, &scenario.window, seed("users", 0))?;
        let mut velocity_rng = ChaCha8Rng::seed_from_u64(seed("velocity", 0));
        let params = config.mobility_params();
        let users: Vec<UserTerminal> = user_positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| UserTerminal {
                id: UserId(i as u32 + 1),
                position,
                mobility_state: MobilityState::stationary(&params, &mut velocity_rng),
                accessible_tiers: accessible.clone(),
            })
            .collect();

        let reachable_tiers: Vec<TierId> = scenario
            .tiers
            .iter()
            .filter(|t| stations.iter().any(|s| s.tier == t.tier_id))
            .map(|t| t.tier_id)
            .collect();
        let feasible = users.iter().all(|u| {
            u.accessible_tiers
                .iter()
                .any(|t| reachable_tiers.contains(t))
        });
        if feasible {
            return Ok(DropGeometry {
                stations,
                users,
                resamples: attempt,
                seed: seed("drop", 0),
            });
        }
    }
    Err(RunError::ResampleExhausted {
        alpha_idx,
        lambda_idx,
        drop_idx,
        attempts: MAX_RESAMPLE_ATTEMPTS,
    })
}

/// Run one (scheme, α, λ, drop) cell: sample paired geometry, then for each
/// epoch associate max-SINR, optimize when the scheme asks for it, record
/// metrics and advance the users one mobility step.
pub fn run_drop(
    config: &ExperimentConfig,
    scheme: Scheme,
    alpha_idx: usize,
    lambda_idx: usize,
    drop_idx: u32,
) -> Result<DropResult, RunError> {
    let scenario = config.scenario_for_alpha(config.alphas[alpha_idx]);
    let geometry = sample_geometry(config, &scenario, alpha_idx, lambda_idx, drop_idx)?;
    let stations = geometry.stations;
    let mut users = geometry.users;
    let user_count = users.len();
    let geometry_digest = geometry_digest(&stations, &users);

    let mut mobility_rng = ChaCha8Rng::seed_from_u64(sub_seed(
        config.master_seed,
        alpha_idx,
        lambda_idx,
        drop_idx,
        geometry.resamples,
        "mobility",
        0,
    ));
    let params = config.mobility_params();
    let cap = config
        .iteration_cap
        .resolve(users.len(), scenario.tier_count());

    let mut snapshots = Vec::with_capacity(config.time_steps as usize);
    let mut traces = Vec::new();
    let mut violations = 0u32;
    let mut final_association = Association::new();

    for _epoch in 0..config.time_steps {
        let baseline = associate_max_sinr(&users, &stations, &scenario)?;
        let baseline_interference = aggregate_interference(&baseline, &users, &stations, &scenario);
        let baseline_energy = energy_efficiency(&baseline, &users, &stations, &scenario);

        let (association, trace) = match scheme {
            Scheme::MaxSinr => (baseline.clone(), None),
            Scheme::InterferenceMin => {
                let (assoc, trace) =
                    minimize_interference(&baseline, &users, &stations, &scenario, cap)?;
                (assoc, Some(trace))
            }
            Scheme::EnergyOpt => {
                let (assoc, trace) =
                    optimize_energy_efficiency(&baseline, &users, &stations, &scenario, cap)?;
                (assoc, Some(trace))
            }
        };

        let interference = if scheme == Scheme::MaxSinr {
            baseline_interference.clone()
        } else {
            aggregate_interference(&association, &users, &stations, &scenario)
        };
        let energy = if scheme == Scheme::MaxSinr {
            baseline_energy.clone()
        } else {
            energy_efficiency(&association, &users, &stations, &scenario)
        };

        if let Some(trace) = &trace {
            let monotone = trace.is_monotone();
            let bounded = match scheme {
                Scheme::InterferenceMin => {
                    interference.aggregate_w <= baseline_interference.aggregate_w
                }
                Scheme::EnergyOpt => energy.efficiency_bpj >= baseline_energy.efficiency_bpj,
                Scheme::MaxSinr => true,
            };
            let valid = association.validate(&users, &stations, &scenario).is_ok();
            if !monotone || !bounded || !valid {
                violations += 1;
            }
        }

        let per_user = |aggregate: f64| {
            if user_count == 0 {
                0.0
            } else {
                aggregate / user_count as f64
            }
        };
        snapshots.push(EpochSnapshot {
            baseline_interference_w: baseline_interference.aggregate_w,
            baseline_mean_user_interference_w: per_user(baseline_interference.aggregate_w),
            baseline_flow_bps: baseline_energy.flow_bps,
            baseline_power_w: baseline_energy.power_w,
            baseline_eff_bpj: baseline_energy.efficiency_bpj,
            interference_w: interference.aggregate_w,
            mean_user_interference_w: per_user(interference.aggregate_w),
            flow_bps: energy.flow_bps,
            power_w: energy.power_w,
            eff_bpj: energy.efficiency_bpj,
        });
        if let Some(trace) = trace {
            traces.push(trace);
        }
        final_association = association;

        advance_users(&mut users, &params, &scenario.window, &mut mobility_rng);
    }

    Ok(DropResult {
        seed: geometry.seed,
        resamples: geometry.resamples,
        user_count,
        geometry_digest,
        snapshots,
        traces,
        final_association_digest: association_digest(&final_association),
        violations,
    })
}

/// Run the complete (scheme × α × λ × drop) grid with paired seeds,
/// aggregate per-cell statistics and normalize the curves per α family
/// against the baseline scheme at the smallest user intensity.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome, RunError> {
    let mut jobs = Vec::new();
    for (scheme_idx, _) in config.schemes.iter().enumerate() {
        for alpha_idx in 0..config.alphas.len() {
            for lambda_idx in 0..config.lambda_factors.len() {
                for drop_idx in 0..config.drops {
                    jobs.push((scheme_idx, alpha_idx, lambda_idx, drop_idx));
                }
            }
        }
    }

    let pool = build_pool()?;
    let results: Vec<Result<DropResult, RunError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(scheme_idx, alpha_idx, lambda_idx, drop_idx)| {
                run_drop(
                    config,
                    config.schemes[scheme_idx],
                    alpha_idx,
                    lambda_idx,
                    drop_idx,
                )
            })
            .collect()
    });
    let mut drops: Vec<DropResult> = Vec::with_capacity(results.len());
    for result in results {
        drops.push(result?);
    }

    // paired-seed discipline: identical geometry across schemes
    let mut geometry_by_cell: BTreeMap<(usize, usize, u32), &str> = BTreeMap::new();
    for (job, drop) in jobs.iter().zip(&drops) {
        let key = (job.1, job.2, job.3);
        match geometry_by_cell.get(&key) {
            None => {
                geometry_by_cell.insert(key, &drop.geometry_digest);
            }
            Some(existing) if *existing == drop.geometry_digest => {}
            Some(_) => {
                return Err(RunError::PairingMismatch {
                    alpha_idx: job.1,
                    lambda_idx: job.2,
                    drop_idx: job.3,
                })
            }
        }
    }

    let violations: u64 = drops.iter().map(|d| d.violations as u64).sum();
    let resampled_drops: u64 = drops.iter().map(|d| d.resamples as u64).sum();

    // per-cell drop samples, keyed by (scheme_idx, alpha_idx, lambda_idx)
    let cells = config.alphas.len() * config.lambda_factors.len();
    let mut samples: Vec<CellSamples> = vec![CellSamples::default(); config.schemes.len() * cells];
    for (job, drop) in jobs.iter().zip(&drops) {
        let idx = (job.0 * config.alphas.len() + job.1) * config.lambda_factors.len() + job.2;
        let cell = &mut samples[idx];
        cell.interference
            .push(drop.mean_over_epochs(|s| s.mean_user_interference_w));
        cell.flow.push(drop.mean_over_epochs(|s| s.flow_bps));
        cell.power.push(drop.mean_over_epochs(|s| s.power_w));
        cell.efficiency.push(drop.mean_over_epochs(|s| s.eff_bpj));
    }

    let mut points = Vec::with_capacity(samples.len());
    for (scheme_idx, &scheme) in config.schemes.iter().enumerate() {
        for (alpha_idx, &alpha) in config.alphas.iter().enumerate() {
            for (lambda_idx, &lambda) in config.lambda_factors.iter().enumerate() {
                let idx = (scheme_idx * config.alphas.len() + alpha_idx)
                    * config.lambda_factors.len()
                    + lambda_idx;
                let cell = &samples[idx];
                let (mean_i, ci_i) = aggregate_drops(&cell.interference)?;
                let (mean_f, _) = aggregate_drops(&cell.flow)?;
                let (mean_p, _) = aggregate_drops(&cell.power)?;
                let (mean_e, ci_e) = aggregate_drops(&cell.efficiency)?;
                points.push(SweepPoint {
                    scheme,
                    alpha,
                    lambda_norm: lambda,
                    drops: config.drops,
                    mean_interference_w: mean_i,
                    ci95_interference_w: ci_i,
                    mean_flow_bps: mean_f,
                    mean_power_w: mean_p,
                    mean_eff_bpj: mean_e,
                    ci95_eff_bpj: ci_e,
                    norm_interference: 0.0,
                    norm_eff: 0.0,
                });
            }
        }
    }

    normalize_points(config, &mut points)?;

    Ok(SweepOutcome {
        sweep: SweepResult {
            points,
            provenance: Provenance {
                config_digest: config.digest(),
                master_seed: config.master_seed,
                resampled_drops,
            },
        },
        violations,
        resampled_drops,
    })
}

#[derive(Debug, Clone, Default)]
struct CellSamples {
    interference: Vec<f64>,
    flow: Vec<f64>,
    power: Vec<f64>,
    efficiency: Vec<f64>,
}

/// Normalize interference and efficiency means per α family by the
/// reference scheme's mean at the smallest λ, pinning that cell to 1.0.
fn normalize_points(
    config: &ExperimentConfig,
    points: &mut [SweepPoint],
) -> Result<(), MetricsError> {
    let reference_scheme = if config.schemes.contains(&Scheme::MaxSinr) {
        Scheme::MaxSinr
    } else {
        config.schemes[0]
    };
    let smallest_lambda = config
        .lambda_factors
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    for &alpha in &config.alphas {
        let reference = points
            .iter()
            .find(|p| {
                p.scheme == reference_scheme && p.alpha == alpha && p.lambda_norm == smallest_lambda
            })
            .expect("reference cell exists");
        let ref_i = reference.mean_interference_w;
        let ref_e = reference.mean_eff_bpj;
        for p in points.iter_mut().filter(|p| p.alpha == alpha) {
            p.norm_interference = normalize_curves(&[p.mean_interference_w], ref_i)?[0];
            p.norm_eff = normalize_curves(&[p.mean_eff_bpj], ref_e)?[0];
        }
    }
    Ok(())
}

fn build_pool() -> Result<rayon::ThreadPool, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV_VAR) {
        match value.trim().parse::<usize>() {
            Ok(n) if n >= 1 => builder = builder.num_threads(n),
            _ => eprintln!("ignoring {THREADS_ENV_VAR}={value}: expected a positive integer"),
        }
    }
    builder
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))
}
