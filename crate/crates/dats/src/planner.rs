//! Delay-aware model-predictive control with the cross-entropy method.
//!
//! Planning under an `n`-step action delay happens in two phases. The
//! pending actions are already committed, so the planner first replays that
//! known prefix through the model ([`propagate_prefix`]) to estimate the
//! state where the new action will actually apply. Cross-entropy search then
//! optimizes the future action sequence from those particle states: sample a
//! population of candidate sequences, roll each through the model with
//! trajectory-sampled particles, refit the sampling distribution to the
//! elite fraction, and finally commit the first action of the best sequence
//! seen.
//!
//! Every candidate draws its actions and its particle noise from its own
//! derived rng stream, so parallel and serial evaluation produce identical
//! elites.

use crate::error::{Error, Result};
use crate::model::Dynamics;
use crate::seeding::{self, tags};
use crate::spaces::{ActionVec, Bounds};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Cross-entropy method configuration.
#[derive(Clone, Debug)]
pub struct CemConfig {
    pub population: usize,
    pub elites: usize,
    pub iterations: usize,
    /// Planning horizon `m` (steps beyond the delay prefix).
    pub horizon: usize,
    /// Trajectory-sampling particles per candidate.
    pub particles: usize,
    /// Initial sampling stddev per action dim.
    pub init_std: Vec<f64>,
    pub std_floor: f64,
    /// Distribution smoothing: `new = alpha * old + (1 - alpha) * elite fit`.
    pub alpha: f64,
    /// Add the (candidate-independent) prefix reward into reported values.
    pub include_prefix_reward: bool,
}

impl CemConfig {
    /// Defaults sized for the classic-control tasks: population 400, 40
    /// elites, 5 iterations, horizon 25, initial stddev a quarter of the
    /// action range.
    pub fn defaults(bounds: &Bounds) -> Self {
        CemConfig {
            population: 400,
            elites: 40,
            iterations: 5,
            horizon: 25,
            particles: 20,
            init_std: bounds.width().iter().map(|w| w / 4.0).collect(),
            std_floor: 1e-3,
            alpha: 0.1,
            include_prefix_reward: true,
        }
    }

    pub fn validate(&self, action_dim: usize) -> Result<()> {
        if self.elites == 0 || self.elites > self.population {
            return Err(Error::contract(format!(
                "elites ({}) must be in 1..=population ({})",
                self.elites, self.population
            )));
        }
        if self.horizon == 0 {
            return Err(Error::contract("planning horizon must be >= 1"));
        }
        if self.particles == 0 || self.iterations == 0 {
            return Err(Error::contract("particles and iterations must be >= 1"));
        }
        if self.init_std.len() != action_dim {
            return Err(Error::dims(format!(
                "init_std has dim {}, action dim is {action_dim}",
                self.init_std.len()
            )));
        }
        if !(self.std_floor > 0.0) {
            return Err(Error::contract("stddev floor must be positive"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::contract("alpha must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Iterated sampling distribution plus the best sequence seen so far.
#[derive(Clone, Debug)]
pub struct CemState {
    /// Per-slot sampling mean, `horizon x action_dim`.
    pub mean: Array2<f64>,
    /// Per-slot sampling stddev, floored elementwise.
    pub std: Array2<f64>,
    pub best_sequence: Array2<f64>,
    pub best_value: f64,
}

/// Particle estimates of the post-delay state.
#[derive(Clone, Debug)]
pub struct PrefixRollout {
    /// `particles x obs_dim` estimates of the state the next action reaches.
    pub particles: Array2<f64>,
    /// Ensemble member propagating each particle (round-robin, fixed for
    /// the particle's lifetime).
    pub member_ids: Vec<usize>,
    /// Mean over particles of the summed prefix rewards.
    pub mean_reward: f64,
}

/// A candidate sequence with its trajectory-sampled return estimate.
#[derive(Clone, Debug)]
pub struct RolloutEval {
    pub sequence: Array2<f64>,
    /// Mean over particles of the summed rewards (prefix not included).
    pub value: f64,
}

/// Result of one planning call.
#[derive(Clone, Debug)]
pub struct PlanOutcome {
    /// First action of the best sequence seen.
    pub action: Vec<f64>,
    pub state: CemState,
}

/// Spawns `particles` copies of `obs`, assigns ensemble members round-robin,
/// and rolls each forward through the pending actions in order, accumulating
/// the known reward along the way.
pub fn propagate_prefix<D, R>(
    model: &D,
    obs: &[f64],
    pending: &[ActionVec],
    particles: usize,
    reward_fn: &R,
    rng: &mut ChaCha8Rng,
) -> PrefixRollout
where
    D: Dynamics,
    R: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let obs_dim = model.obs_dim();
    debug_assert_eq!(obs.len(), obs_dim);
    let member_ids: Vec<usize> = (0..particles).map(|p| p % model.n_members()).collect();
    let mut states = Array2::zeros((particles, obs_dim));
    for p in 0..particles {
        for j in 0..obs_dim {
            states[[p, j]] = obs[j];
        }
    }
    let mut reward_sum = vec![0.0; particles];
    let mut actions = Array2::zeros((particles, model.action_dim()));
    let mut noise = Array2::zeros((particles, obs_dim));
    let mut next = Array2::zeros((particles, obs_dim));
    for step_action in pending {
        for p in 0..particles {
            for (j, v) in step_action.as_slice().iter().enumerate() {
                actions[[p, j]] = *v;
            }
            for j in 0..obs_dim {
                noise[[p, j]] = rng.sample(StandardNormal);
            }
            reward_sum[p] += reward_fn(
                states.row(p).as_slice().unwrap(),
                step_action.as_slice(),
            );
        }
        model.predict(&states, &actions, &member_ids, &noise, &mut next);
        std::mem::swap(&mut states, &mut next);
    }
    let mean_reward = if particles == 0 {
        0.0
    } else {
        reward_sum.iter().sum::<f64>() / particles as f64
    };
    PrefixRollout {
        particles: states,
        member_ids,
        mean_reward,
    }
}

/// Continues every particle through the candidate actions, accumulating
/// `reward_fn` at each step, and returns the particle-mean total.
pub fn evaluate_sequence<D, R>(
    model: &D,
    prefix: &PrefixRollout,
    candidate: &Array2<f64>,
    reward_fn: &R,
    rng: &mut ChaCha8Rng,
) -> RolloutEval
where
    D: Dynamics,
    R: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let particles = prefix.particles.nrows();
    let horizon = candidate.nrows();
    let obs_dim = model.obs_dim();
    let noise = draw_noise(rng, horizon * particles * obs_dim);
    let values = rollout_candidates(
        model,
        &prefix.particles,
        &prefix.member_ids,
        std::slice::from_ref(candidate),
        std::slice::from_ref(&noise),
        reward_fn,
    );
    RolloutEval {
        sequence: candidate.clone(),
        value: values[0],
    }
}

/// Receding-horizon planning: cross-entropy optimization of the next action
/// sequence, evaluated from the post-prefix particle states.
///
/// `warm_start`, when given, seeds the sampling mean (callers shift the
/// previous plan left by one step and pad with zeros). The returned action
/// is the first action of the best sequence seen across all iterations.
pub fn cem_plan<D, R>(
    model: &D,
    obs: &[f64],
    pending: &[ActionVec],
    config: &CemConfig,
    bounds: &Bounds,
    reward_fn: &R,
    warm_start: Option<&Array2<f64>>,
    seed: u64,
) -> Result<PlanOutcome>
where
    D: Dynamics,
    R: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let action_dim = model.action_dim();
    config.validate(action_dim)?;
    if bounds.dim() != action_dim {
        return Err(Error::dims("bounds dim does not match model action dim"));
    }
    let m = config.horizon;

    let mut prefix_rng = seeding::derived_rng(seed, tags::PREFIX, 0);
    let prefix = propagate_prefix(
        model,
        obs,
        pending,
        config.particles,
        reward_fn,
        &mut prefix_rng,
    );

    let mut mean = match warm_start {
        Some(w) => {
            if w.dim() != (m, action_dim) {
                return Err(Error::dims(format!(
                    "warm start is {:?}, expected ({m}, {action_dim})",
                    w.dim()
                )));
            }
            w.clone()
        }
        None => Array2::zeros((m, action_dim)),
    };
    clamp_rows(&mut mean, bounds);
    let mut std = Array2::zeros((m, action_dim));
    for t in 0..m {
        for d in 0..action_dim {
            std[[t, d]] = config.init_std[d].max(config.std_floor);
        }
    }

    let mut best_sequence = mean.clone();
    let mut best_value = f64::NEG_INFINITY;
    let noise_len = m * config.particles * model.obs_dim();

    for iter in 0..config.iterations {
        // Candidate actions and particle noise come from per-candidate
        // streams; batching below never touches an rng.
        let mut candidates: Vec<Array2<f64>> = Vec::with_capacity(config.population);
        let mut noises: Vec<Vec<f64>> = Vec::with_capacity(config.population);
        for c in 0..config.population {
            let idx = (iter * config.population + c) as u64;
            let mut rng = seeding::derived_rng(seed, tags::CANDIDATE, idx);
            let mut actions = Array2::zeros((m, action_dim));
            for t in 0..m {
                for d in 0..action_dim {
                    let z: f64 = rng.sample(StandardNormal);
                    actions[[t, d]] =
                        (mean[[t, d]] + std[[t, d]] * z).clamp(bounds.low[d], bounds.high[d]);
                }
            }
            candidates.push(actions);
            noises.push(draw_noise(&mut rng, noise_len));
        }

        let values = evaluate_population(
            model,
            &prefix.particles,
            &prefix.member_ids,
            &candidates,
            &noises,
            reward_fn,
        );

        // Elite selection: stable sort keeps ties deterministic.
        let mut order: Vec<usize> = (0..config.population).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
        let elite_idx = &order[..config.elites];

        if values[order[0]] > best_value {
            best_value = values[order[0]];
            best_sequence = candidates[order[0]].clone();
        }

        let ef = config.elites as f64;
        for t in 0..m {
            for d in 0..action_dim {
                let mut e_mean = 0.0;
                for &c in elite_idx {
                    e_mean += candidates[c][[t, d]];
                }
                e_mean /= ef;
                let mut e_var = 0.0;
                for &c in elite_idx {
                    let diff = candidates[c][[t, d]] - e_mean;
                    e_var += diff * diff;
                }
                let e_std = (e_var / ef).sqrt();
                mean[[t, d]] = (config.alpha * mean[[t, d]] + (1.0 - config.alpha) * e_mean)
                    .clamp(bounds.low[d], bounds.high[d]);
                std[[t, d]] =
                    (config.alpha * std[[t, d]] + (1.0 - config.alpha) * e_std).max(config.std_floor);
            }
        }
    }

    let reported_best = if config.include_prefix_reward {
        best_value + prefix.mean_reward
    } else {
        best_value
    };
    Ok(PlanOutcome {
        action: best_sequence.row(0).to_vec(),
        state: CemState {
            mean,
            std,
            best_sequence,
            best_value: reported_best,
        },
    })
}

fn draw_noise(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn clamp_rows(m: &mut Array2<f64>, bounds: &Bounds) {
    for mut row in m.outer_iter_mut() {
        for (d, v) in row.iter_mut().enumerate() {
            *v = v.clamp(bounds.low[d], bounds.high[d]);
        }
    }
}

/// Evaluates the whole population, splitting candidates into chunks that
/// roll out in parallel. Values are independent of the chunking because all
/// randomness was drawn per candidate beforehand.
fn evaluate_population<D, R>(
    model: &D,
    prefix_particles: &Array2<f64>,
    member_ids: &[usize],
    candidates: &[Array2<f64>],
    noises: &[Vec<f64>],
    reward_fn: &R,
) -> Vec<f64>
where
    D: Dynamics,
    R: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let threads = rayon::current_num_threads().max(1);
    let chunk = candidates.len().div_ceil(threads).max(1);
    candidates
        .par_chunks(chunk)
        .zip(noises.par_chunks(chunk))
        .flat_map(|(cands, noise)| {
            rollout_candidates(model, prefix_particles, member_ids, cands, noise, reward_fn)
        })
        .collect()
}

/// Rolls a block of candidates forward `m` steps from shared particle
/// states; returns the particle-mean summed reward per candidate.
fn rollout_candidates<D, R>(
    model: &D,
    prefix_particles: &Array2<f64>,
    member_ids: &[usize],
    candidates: &[Array2<f64>],
    noises: &[Vec<f64>],
    reward_fn: &R,
) -> Vec<f64>
where
    D: Dynamics,
    R: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let nc = candidates.len();
    if nc == 0 {
        return Vec::new();
    }
    let particles = prefix_particles.nrows();
    let obs_dim = model.obs_dim();
    let action_dim = model.action_dim();
    let horizon = candidates[0].nrows();
    let rows = nc * particles;

    let mut states = Array2::zeros((rows, obs_dim));
    let mut members = vec![0usize; rows];
    for c in 0..nc {
        for p in 0..particles {
            let row = c * particles + p;
            members[row] = member_ids[p];
            for j in 0..obs_dim {
                states[[row, j]] = prefix_particles[[p, j]];
            }
        }
    }
    let mut rewards = vec![0.0; rows];
    let mut actions = Array2::zeros((rows, action_dim));
    let mut noise = Array2::zeros((rows, obs_dim));
    let mut next = Array2::zeros((rows, obs_dim));

    for t in 0..horizon {
        for c in 0..nc {
            let cand_row = candidates[c].row(t);
            let noise_base = t * particles * obs_dim;
            for p in 0..particles {
                let row = c * particles + p;
                for d in 0..action_dim {
                    actions[[row, d]] = cand_row[d];
                }
                let src = noise_base + p * obs_dim;
                for j in 0..obs_dim {
                    noise[[row, j]] = noises[c][src + j];
                }
            }
        }
        for row in 0..rows {
            rewards[row] += reward_fn(
                states.row(row).as_slice().unwrap(),
                actions.row(row).as_slice().unwrap(),
            );
        }
        model.predict(&states, &actions, &members, &noise, &mut next);
        std::mem::swap(&mut states, &mut next);
    }

    (0..nc)
        .map(|c| {
            let base = c * particles;
            rewards[base..base + particles].iter().sum::<f64>() / particles as f64
        })
        .collect()
}
