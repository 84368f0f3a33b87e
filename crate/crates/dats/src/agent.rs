//! Outer training loops: delay-aware trajectory sampling (DATS) and the
//! ablation baselines.
//!
//! All agents share one skeleton: a random-controller trial fills the replay
//! buffer, then each subsequent trial retrains the ensemble and rolls one
//! episode under CEM planning. They differ only in what the planner sees and
//! what the buffer stores:
//!
//! - **DATS** plans from the current observation through the known pending
//!   action queue and stores raw aligned transitions
//!   `(s_t, executed a_t, s_{t+1})` — the learned model never depends on the
//!   delay, which is what makes it transferable across delay settings.
//! - **Blind PETS** ignores the queue entirely: it plans as if actions took
//!   effect immediately and stores the misaligned pairs
//!   `(s_t, submitted action, s_{t+1})`.
//! - **W-PETS** learns the whole augmented dynamics: transitions are
//!   augmented-state vectors and planning runs directly in augmented space.
//! - **OracleDats** is the test hook: DATS planning with the true dynamics
//!   injected and no training, isolating planner correctness from model
//!   error.

use crate::delay::DelayedEnv;
use crate::error::{Error, Result};
use crate::model::{Dynamics, EnsembleDynamicsModel, ReplayBuffer, TrainConfig};
use crate::planner::{cem_plan, CemConfig};
use crate::seeding::{self, tags};
use crate::spaces::{ActionVec, Bounds, Env};
use ndarray::Array2;
use rand::Rng;
use std::time::Instant;

/// Which agent drives the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentKind {
    Dats,
    BlindPets,
    WPets,
    OracleDats,
}

impl AgentKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "dats" => Ok(AgentKind::Dats),
            "blind-pets" => Ok(AgentKind::BlindPets),
            "w-pets" => Ok(AgentKind::WPets),
            "oracle-dats" => Ok(AgentKind::OracleDats),
            other => Err(Error::contract(format!(
                "unknown agent '{other}' (expected dats, blind-pets, w-pets or oracle-dats)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AgentKind::Dats => "dats",
            AgentKind::BlindPets => "blind-pets",
            AgentKind::WPets => "w-pets",
            AgentKind::OracleDats => "oracle-dats",
        }
    }
}

/// Hyperparameters shared by the learned agents.
#[derive(Clone, Debug)]
pub struct AgentConfig {
    /// Total trials K, including the initial random-controller trial.
    pub trials: usize,
    pub members: usize,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub cem: CemConfig,
    pub buffer_capacity: usize,
}

/// Outcome of one trial.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: usize,
    /// Episode return on the benchmark reporting scale (see `Env::score`).
    pub episode_return: f64,
    /// Sum of the environment's native per-step rewards.
    pub reward_sum: f64,
    /// Transitions collected this trial.
    pub transitions: usize,
    pub wall_time_s: f64,
    /// Mean final training NLL across members; NaN for the random trial.
    pub model_nll: f64,
}

/// Everything a learned-agent run produces.
pub struct AgentRun {
    pub model: EnsembleDynamicsModel,
    pub results: Vec<TrialResult>,
    pub buffer: ReplayBuffer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PlanningMode {
    /// Plan through the pending queue; store raw aligned transitions.
    DelayAware,
    /// Ignore the queue; store raw misaligned transitions.
    Blind,
    /// Plan in augmented space; store augmented transitions.
    Augmented,
}

impl PlanningMode {
    fn for_kind(kind: AgentKind) -> Self {
        match kind {
            AgentKind::Dats | AgentKind::OracleDats => PlanningMode::DelayAware,
            AgentKind::BlindPets => PlanningMode::Blind,
            AgentKind::WPets => PlanningMode::Augmented,
        }
    }
}

struct EpisodeOutcome {
    score: f64,
    reward_sum: f64,
    steps: usize,
}

/// Delay-Aware Trajectory Sampling: the delay-aware model-based loop.
pub fn run_dats<E: Env + Sync>(
    env: &mut DelayedEnv<E>,
    config: &AgentConfig,
    seed: u64,
) -> Result<AgentRun> {
    run_learned(AgentKind::Dats, env, config, seed)
}

/// PETS applied blindly in the delayed environment.
pub fn run_blind_pets<E: Env + Sync>(
    env: &mut DelayedEnv<E>,
    config: &AgentConfig,
    seed: u64,
) -> Result<AgentRun> {
    run_learned(AgentKind::BlindPets, env, config, seed)
}

/// PETS over the whole augmented dynamics, including the known queue shift.
pub fn run_wpets<E: Env + Sync>(
    env: &mut DelayedEnv<E>,
    config: &AgentConfig,
    seed: u64,
) -> Result<AgentRun> {
    run_learned(AgentKind::WPets, env, config, seed)
}

/// Delay-aware planning with the true dynamics injected: no training, every
/// trial is a planned episode. Isolates planner correctness from model error.
pub fn run_oracle_dats<E: Env + Sync, D: Dynamics>(
    env: &mut DelayedEnv<E>,
    oracle: &D,
    episodes: usize,
    cem: &CemConfig,
    seed: u64,
) -> Result<Vec<TrialResult>> {
    check_model_dims(oracle, env)?;
    let horizon = env.inner().spec().horizon;
    let mut results = Vec::with_capacity(episodes);
    for trial in 0..episodes {
        let start = Instant::now();
        let outcome = run_episode(
            env,
            Controller::Planned {
                model: oracle,
                mode: PlanningMode::DelayAware,
            },
            cem,
            None,
            horizon,
            seed,
            trial,
        )?;
        results.push(TrialResult {
            trial,
            episode_return: outcome.score,
            reward_sum: outcome.reward_sum,
            transitions: outcome.steps,
            wall_time_s: start.elapsed().as_secs_f64(),
            model_nll: f64::NAN,
        });
    }
    Ok(results)
}

/// Frozen-model evaluation: mean and standard deviation of the episode
/// return over `episodes` DATS-planned episodes, no training.
#[derive(Clone, Debug)]
pub struct TransferEval {
    pub mean: f64,
    pub std: f64,
    pub returns: Vec<f64>,
}

/// Evaluates a trained model in an environment with a (possibly different)
/// delay step. One cell of the transfer reward matrix.
pub fn evaluate_transfer<E: Env + Sync>(
    model: &EnsembleDynamicsModel,
    env: &mut DelayedEnv<E>,
    episodes: usize,
    cem: &CemConfig,
    seed: u64,
) -> Result<TransferEval> {
    check_model_dims(model, env)?;
    let horizon = env.inner().spec().horizon;
    let mut returns = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let outcome = run_episode(
            env,
            Controller::Planned {
                model,
                mode: PlanningMode::DelayAware,
            },
            cem,
            None,
            horizon,
            seeding::derive_seed(seed, tags::EVAL, episode as u64),
            0,
        )?;
        returns.push(outcome.score);
    }
    let mean = returns.iter().sum::<f64>() / returns.len().max(1) as f64;
    let var = if returns.len() > 1 {
        returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (returns.len() - 1) as f64
    } else {
        0.0
    };
    Ok(TransferEval {
        mean,
        std: var.sqrt(),
        returns,
    })
}

fn check_model_dims<E: Env, D: Dynamics>(model: &D, env: &DelayedEnv<E>) -> Result<()> {
    let spec = env.inner().spec();
    if model.obs_dim() != spec.obs_dim || model.action_dim() != spec.action_dim {
        return Err(Error::dims(format!(
            "model is ({}, {}) but environment needs ({}, {})",
            model.obs_dim(),
            model.action_dim(),
            spec.obs_dim,
            spec.action_dim
        )));
    }
    Ok(())
}

fn run_learned<E: Env + Sync>(
    kind: AgentKind,
    env: &mut DelayedEnv<E>,
    config: &AgentConfig,
    seed: u64,
) -> Result<AgentRun> {
    if kind == AgentKind::OracleDats {
        return Err(Error::contract(
            "the oracle agent has no training loop; use run_oracle_dats",
        ));
    }
    let mode = PlanningMode::for_kind(kind);
    let spec = env.inner().spec().clone();
    let model_obs_dim = match mode {
        PlanningMode::Augmented => env.augmented_dim(),
        _ => spec.obs_dim,
    };
    config.cem.validate(spec.action_dim)?;
    let mut buffer = ReplayBuffer::new(model_obs_dim, spec.action_dim, config.buffer_capacity);
    let mut model = EnsembleDynamicsModel::new(
        model_obs_dim,
        spec.action_dim,
        &config.hidden,
        config.members,
        seed,
    );
    let mut results = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let start = Instant::now();
        let model_nll = if trial == 0 {
            f64::NAN
        } else {
            let report = model.train(
                &buffer,
                &config.train,
                seeding::derive_seed(seed, tags::TRAIN, trial as u64),
            )?;
            report.final_mean_nll()
        };
        let controller = if trial == 0 {
            Controller::Random
        } else {
            Controller::Planned {
                model: &model,
                mode,
            }
        };
        let outcome = run_episode(
            env,
            controller,
            &config.cem,
            Some((&mut buffer, mode)),
            spec.horizon,
            seed,
            trial,
        )?;
        results.push(TrialResult {
            trial,
            episode_return: outcome.score,
            reward_sum: outcome.reward_sum,
            transitions: outcome.steps,
            wall_time_s: start.elapsed().as_secs_f64(),
            model_nll,
        });
    }
    Ok(AgentRun {
        model,
        results,
        buffer,
    })
}

enum Controller<'a, D: Dynamics> {
    Random,
    Planned { model: &'a D, mode: PlanningMode },
}

/// Rolls one episode, planning (or acting randomly) every step and
/// optionally recording transitions in the agent's view.
#[allow(clippy::too_many_arguments)]
fn run_episode<E: Env + Sync, D: Dynamics>(
    env: &mut DelayedEnv<E>,
    controller: Controller<'_, D>,
    cem: &CemConfig,
    mut record: Option<(&mut ReplayBuffer, PlanningMode)>,
    horizon: usize,
    seed: u64,
    trial: usize,
) -> Result<EpisodeOutcome> {
    let spec = env.inner().spec().clone();
    let bounds: Bounds = spec.action_bounds.clone();
    let obs_dim = spec.obs_dim;
    let action_dim = spec.action_dim;
    let delay = env.delay();

    let mut reset_rng = seeding::derived_rng(seed, tags::RESET, trial as u64);
    let mut controller_rng = seeding::derived_rng(seed, tags::CONTROLLER, trial as u64);
    let mut aug = env.delayed_reset(&mut reset_rng);

    let mut warm_start: Option<Array2<f64>> = None;
    let mut score = 0.0;
    let mut reward_sum = 0.0;
    let mut steps = 0usize;

    for t in 0..horizon {
        let action: Vec<f64> = match &controller {
            Controller::Random => (0..action_dim)
                .map(|d| controller_rng.random_range(bounds.low[d]..=bounds.high[d]))
                .collect(),
            Controller::Planned { model, mode } => {
                let plan_seed =
                    seeding::derive_seed(seed, tags::PLAN, ((trial as u64) << 32) | t as u64);
                let plan = {
                    let inner = env.inner();
                    match mode {
                        PlanningMode::DelayAware => {
                            let reward = |o: &[f64], a: &[f64]| inner.reward(o, a);
                            cem_plan(
                                *model,
                                &aug.obs,
                                &aug.pending,
                                cem,
                                &bounds,
                                &reward,
                                warm_start.as_ref(),
                                plan_seed,
                            )?
                        }
                        PlanningMode::Blind => {
                            let reward = |o: &[f64], a: &[f64]| inner.reward(o, a);
                            cem_plan(
                                *model,
                                &aug.obs,
                                &[],
                                cem,
                                &bounds,
                                &reward,
                                warm_start.as_ref(),
                                plan_seed,
                            )?
                        }
                        PlanningMode::Augmented => {
                            // Reward of an augmented state: the next executed
                            // action is the queue head (or, with no delay,
                            // the new action itself).
                            let reward = |x: &[f64], a: &[f64]| {
                                if delay == 0 {
                                    inner.reward(x, a)
                                } else {
                                    inner.reward(&x[..obs_dim], &x[obs_dim..obs_dim + action_dim])
                                }
                            };
                            cem_plan(
                                *model,
                                &aug.flat(),
                                &[],
                                cem,
                                &bounds,
                                &reward,
                                warm_start.as_ref(),
                                plan_seed,
                            )?
                        }
                    }
                };
                // Receding horizon: shift the refit mean left, pad with zero.
                let m = plan.state.mean.nrows();
                let mut shifted = Array2::zeros((m, action_dim));
                for row in 1..m {
                    for d in 0..action_dim {
                        shifted[[row - 1, d]] = plan.state.mean[[row, d]];
                    }
                }
                warm_start = Some(shifted);
                plan.action
            }
        };

        score += env.inner().score(&aug.obs);
        let step = env.delayed_step(&action)?;
        reward_sum += step.reward;
        steps += 1;

        if let Some((buffer, mode)) = record.as_mut() {
            match mode {
                PlanningMode::DelayAware => {
                    buffer.push(&aug.obs, step.executed.as_slice(), &step.state.obs)?
                }
                PlanningMode::Blind => buffer.push(&aug.obs, &action, &step.state.obs)?,
                PlanningMode::Augmented => {
                    buffer.push(&aug.flat(), &action, &step.state.flat())?
                }
            }
        }
        aug = step.state;
        if step.done {
            break;
        }
    }
    Ok(EpisodeOutcome {
        score,
        reward_sum,
        steps,
    })
}

/// Uniform-random actions within bounds; the trial-0 exploration policy.
pub fn random_action(bounds: &Bounds, rng: &mut rand_chacha::ChaCha8Rng) -> ActionVec {
    let values = (0..bounds.dim())
        .map(|d| rng.random_range(bounds.low[d]..=bounds.high[d]))
        .collect();
    ActionVec::unchecked(values)
}
