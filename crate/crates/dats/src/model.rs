//! Probabilistic ensemble dynamics model.
//!
//! `B` bootstrapped Gaussian-head networks regress normalized one-step state
//! deltas from `(observation ++ action)` inputs. The ensemble captures
//! epistemic uncertainty through bootstrap disagreement and aleatoric
//! uncertainty through each member's predicted variance.
//!
//! The learned object never sees the action delay: its input dimension is
//! `obs_dim + action_dim` regardless of the delay step, which is what makes
//! one trained model reusable across delay settings.

use crate::error::{Error, Result};
use crate::neural::{
    adam_step, backward, forward, read_params, write_params, AdamState, Batch, MlpParams,
};
use crate::seeding::{self, tags};
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as IoWrite};
use std::path::Path;

const STD_FLOOR: f64 = 1e-8;

/// Per-dimension affine normalizer `x -> (x - mean) / std`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Normalizer {
    /// Identity normalizer.
    pub fn identity(dim: usize) -> Self {
        Normalizer {
            mean: Array1::zeros(dim),
            std: Array1::from_elem(dim, 1.0),
        }
    }

    /// Fits mean and (population) stddev per column, flooring std at 1e-8.
    pub fn fit(rows: &Array2<f64>) -> Self {
        let n = rows.nrows().max(1) as f64;
        let mean = rows.sum_axis(Axis(0)) / n;
        let mut var = Array1::zeros(rows.ncols());
        for row in rows.outer_iter() {
            for (j, v) in row.iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        let std = var.mapv(|v: f64| (v / n).sqrt().max(STD_FLOOR));
        Normalizer { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, rows: &Array2<f64>) -> Array2<f64> {
        let mut out = rows.clone();
        self.normalize_in_place(&mut out);
        out
    }

    pub fn normalize_in_place(&self, rows: &mut Array2<f64>) {
        for mut row in rows.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
    }

    pub fn denormalize_value(&self, j: usize, v: f64) -> f64 {
        self.mean[j] + self.std[j] * v
    }
}

/// Raw environment transitions `(obs, action, next_obs)` in a ring buffer.
///
/// Only raw, non-augmented observations are stored: the delay queue is never
/// part of the training data for the delay-aware agent.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    obs_dim: usize,
    action_dim: usize,
    capacity: usize,
    head: usize,
    len: usize,
    inserted: usize,
    obs: Vec<f64>,
    actions: Vec<f64>,
    next_obs: Vec<f64>,
}

impl ReplayBuffer {
    pub fn new(obs_dim: usize, action_dim: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        ReplayBuffer {
            obs_dim,
            action_dim,
            capacity,
            head: 0,
            len: 0,
            inserted: 0,
            obs: Vec::new(),
            actions: Vec::new(),
            next_obs: Vec::new(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total insertions ever made (monotone; exceeds `len` once wrapped).
    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn push(&mut self, obs: &[f64], action: &[f64], next_obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim || next_obs.len() != self.obs_dim {
            return Err(Error::dims(format!(
                "transition obs dims ({}, {}) do not match buffer obs_dim {}",
                obs.len(),
                next_obs.len(),
                self.obs_dim
            )));
        }
        if action.len() != self.action_dim {
            return Err(Error::dims(format!(
                "transition action dim {} does not match buffer action_dim {}",
                action.len(),
                self.action_dim
            )));
        }
        if self.len < self.capacity {
            self.obs.extend_from_slice(obs);
            self.actions.extend_from_slice(action);
            self.next_obs.extend_from_slice(next_obs);
            self.len += 1;
        } else {
            let o = self.head * self.obs_dim;
            let a = self.head * self.action_dim;
            self.obs[o..o + self.obs_dim].copy_from_slice(obs);
            self.actions[a..a + self.action_dim].copy_from_slice(action);
            self.next_obs[o..o + self.obs_dim].copy_from_slice(next_obs);
            self.head = (self.head + 1) % self.capacity;
        }
        self.inserted += 1;
        Ok(())
    }

    /// Raw training pairs: inputs `obs ++ action`, targets `next_obs - obs`.
    pub fn inputs_and_deltas(&self) -> (Array2<f64>, Array2<f64>) {
        let n = self.len;
        let in_dim = self.obs_dim + self.action_dim;
        let mut inputs = Array2::zeros((n, in_dim));
        let mut deltas = Array2::zeros((n, self.obs_dim));
        for i in 0..n {
            let o = i * self.obs_dim;
            let a = i * self.action_dim;
            for j in 0..self.obs_dim {
                inputs[[i, j]] = self.obs[o + j];
                deltas[[i, j]] = self.next_obs[o + j] - self.obs[o + j];
            }
            for j in 0..self.action_dim {
                inputs[[i, self.obs_dim + j]] = self.actions[a + j];
            }
        }
        (inputs, deltas)
    }
}

/// A state particle: an observation propagated by one fixed ensemble member.
#[derive(Clone, Debug)]
pub struct Particle {
    pub obs: Vec<f64>,
    pub member_id: usize,
}

/// Batched one-step dynamics: the interface planners consume.
///
/// `members[i]` selects the ensemble member propagating row `i`; `noise`
/// supplies one standard normal per `(row, obs dim)` so sampling is
/// reproducible independent of batching and thread schedule. Deterministic
/// implementations ignore both.
pub trait Dynamics: Sync {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn n_members(&self) -> usize;

    /// Writes sampled next observations for every row into `out`.
    fn predict(
        &self,
        obs: &Array2<f64>,
        actions: &Array2<f64>,
        members: &[usize],
        noise: &Array2<f64>,
        out: &mut Array2<f64>,
    );
}

/// Deterministic dynamics wrapped from a plain next-observation function.
/// Used as the ground-truth oracle in planner and agent checks.
pub struct FnDynamics<F: Fn(&[f64], &[f64]) -> Vec<f64> + Sync> {
    obs_dim: usize,
    action_dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &[f64]) -> Vec<f64> + Sync> FnDynamics<F> {
    pub fn new(obs_dim: usize, action_dim: usize, f: F) -> Self {
        FnDynamics {
            obs_dim,
            action_dim,
            f,
        }
    }
}

impl<F: Fn(&[f64], &[f64]) -> Vec<f64> + Sync> Dynamics for FnDynamics<F> {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn action_dim(&self) -> usize {
        self.action_dim
    }

    fn n_members(&self) -> usize {
        1
    }

    fn predict(
        &self,
        obs: &Array2<f64>,
        actions: &Array2<f64>,
        _members: &[usize],
        _noise: &Array2<f64>,
        out: &mut Array2<f64>,
    ) {
        for i in 0..obs.nrows() {
            let next = (self.f)(
                obs.row(i).as_slice().unwrap(),
                actions.row(i).as_slice().unwrap(),
            );
            for (j, v) in next.iter().enumerate() {
                out[[i, j]] = *v;
            }
        }
    }
}

/// Training hyperparameters for the ensemble.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Stop once the best epoch NLL has not improved by `early_stop_min_delta`
    /// for this many consecutive epochs.
    pub early_stop_patience: usize,
    pub early_stop_min_delta: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            early_stop_patience: 5,
            early_stop_min_delta: 1e-3,
        }
    }
}

/// Per-member training curves from one `train` call.
#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Mean training NLL per epoch, one curve per member.
    pub member_nll: Vec<Vec<f64>>,
}

impl TrainReport {
    /// Mean of the members' final epoch NLLs.
    pub fn final_mean_nll(&self) -> f64 {
        let finals: Vec<f64> = self
            .member_nll
            .iter()
            .filter_map(|c| c.last().copied())
            .collect();
        if finals.is_empty() {
            f64::NAN
        } else {
            finals.iter().sum::<f64>() / finals.len() as f64
        }
    }
}

/// Ensemble of `B` Gaussian-head networks over normalized state deltas.
#[derive(Clone, Debug)]
pub struct EnsembleDynamicsModel {
    pub members: Vec<MlpParams>,
    pub input_norm: Normalizer,
    pub target_norm: Normalizer,
    pub obs_dim: usize,
    pub action_dim: usize,
}

impl EnsembleDynamicsModel {
    pub fn new(
        obs_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        n_members: usize,
        seed: u64,
    ) -> Self {
        let in_dim = obs_dim + action_dim;
        let members = (0..n_members)
            .map(|m| {
                let mut rng = seeding::derived_rng(seed, tags::MEMBER_INIT, m as u64);
                MlpParams::init(in_dim, hidden, obs_dim, &mut rng)
            })
            .collect();
        EnsembleDynamicsModel {
            members,
            input_norm: Normalizer::identity(in_dim),
            target_norm: Normalizer::identity(obs_dim),
            obs_dim,
            action_dim,
        }
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn in_dim(&self) -> usize {
        self.obs_dim + self.action_dim
    }

    /// Trains every member on its own bootstrap resample of the buffer.
    ///
    /// Normalizers are refit on the full buffer first; members then see
    /// normalized `(obs ++ action) -> delta` pairs. Members train in
    /// parallel on derived rng streams, so results do not depend on thread
    /// scheduling.
    pub fn train(
        &mut self,
        buffer: &ReplayBuffer,
        config: &TrainConfig,
        seed: u64,
    ) -> Result<TrainReport> {
        if buffer.is_empty() {
            return Err(Error::contract("cannot train on an empty replay buffer"));
        }
        if buffer.obs_dim() != self.obs_dim || buffer.action_dim() != self.action_dim {
            return Err(Error::dims(format!(
                "buffer dims ({}, {}) do not match model dims ({}, {})",
                buffer.obs_dim(),
                buffer.action_dim(),
                self.obs_dim,
                self.action_dim
            )));
        }
        let (raw_inputs, raw_deltas) = buffer.inputs_and_deltas();
        self.input_norm = Normalizer::fit(&raw_inputs);
        self.target_norm = Normalizer::fit(&raw_deltas);
        let inputs = self.input_norm.normalize(&raw_inputs);
        let targets = self.target_norm.normalize(&raw_deltas);

        let curves: Vec<(MlpParams, Vec<f64>)> = self
            .members
            .par_iter()
            .enumerate()
            .map(|(m, params)| {
                let mut rng = seeding::derived_rng(seed, tags::TRAIN, m as u64);
                train_member(params.clone(), &inputs, &targets, config, &mut rng)
            })
            .collect();

        let mut member_nll = Vec::with_capacity(curves.len());
        for (m, (params, curve)) in curves.into_iter().enumerate() {
            self.members[m] = params;
            member_nll.push(curve);
        }
        Ok(TrainReport { member_nll })
    }

    fn normalized_inputs(&self, obs: &Array2<f64>, actions: &Array2<f64>) -> Array2<f64> {
        let n = obs.nrows();
        let mut x = Array2::zeros((n, self.in_dim()));
        for i in 0..n {
            for j in 0..self.obs_dim {
                x[[i, j]] = obs[[i, j]];
            }
            for j in 0..self.action_dim {
                x[[i, self.obs_dim + j]] = actions[[i, j]];
            }
        }
        self.input_norm.normalize_in_place(&mut x);
        x
    }

    /// One sampled next observation for a single `(obs, action)` pair.
    ///
    /// Samples the delta from the member's Gaussian in normalized target
    /// space, then de-normalizes and adds it to `obs`.
    pub fn predict_sample(
        &self,
        obs: &[f64],
        action: &[f64],
        member_id: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        if member_id >= self.n_members() {
            return Err(Error::contract(format!(
                "member_id {member_id} out of range (B = {})",
                self.n_members()
            )));
        }
        let obs_m = Array2::from_shape_vec((1, obs.len()), obs.to_vec())
            .map_err(|e| Error::dims(e.to_string()))?;
        let act_m = Array2::from_shape_vec((1, action.len()), action.to_vec())
            .map_err(|e| Error::dims(e.to_string()))?;
        let mut noise = Array2::zeros((1, self.obs_dim));
        for v in noise.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut out = Array2::zeros((1, self.obs_dim));
        self.predict(&obs_m, &act_m, &[member_id], &noise, &mut out);
        Ok(out.row(0).to_vec())
    }

    /// Deterministic prediction: the average of all member mean deltas,
    /// de-normalized and added to `obs`.
    pub fn predict_mean(&self, obs: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        let obs_m = Array2::from_shape_vec((1, obs.len()), obs.to_vec())
            .map_err(|e| Error::dims(e.to_string()))?;
        let act_m = Array2::from_shape_vec((1, action.len()), action.to_vec())
            .map_err(|e| Error::dims(e.to_string()))?;
        let x = self.normalized_inputs(&obs_m, &act_m);
        let mut avg = vec![0.0; self.obs_dim];
        for member in &self.members {
            let (means, _) = forward(member, &x)?;
            for j in 0..self.obs_dim {
                avg[j] += means[[0, j]];
            }
        }
        let b = self.n_members() as f64;
        Ok((0..self.obs_dim)
            .map(|j| obs[j] + self.target_norm.denormalize_value(j, avg[j] / b))
            .collect())
    }

    /// Member one-step mean-squared error on raw (un-normalized) deltas.
    /// Diagnostic used to compare aligned vs misaligned supervision.
    pub fn mean_squared_residual(&self, buffer: &ReplayBuffer) -> Result<f64> {
        if buffer.is_empty() {
            return Err(Error::contract("empty buffer"));
        }
        let (raw_inputs, raw_deltas) = buffer.inputs_and_deltas();
        let x = self.input_norm.normalize(&raw_inputs);
        let mut total = 0.0;
        for member in &self.members {
            let (means, _) = forward(member, &x)?;
            for i in 0..means.nrows() {
                for j in 0..self.obs_dim {
                    let pred = self.target_norm.denormalize_value(j, means[[i, j]]);
                    let err = pred - raw_deltas[[i, j]];
                    total += err * err;
                }
            }
        }
        Ok(total / (self.members.len() * raw_deltas.nrows() * self.obs_dim) as f64)
    }

    // -- checkpoint io ------------------------------------------------------

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.save_to(&mut w)
    }

    pub fn save_to<W: IoWrite>(&self, w: &mut W) -> Result<()> {
        let hidden = self.members[0]
            .hidden
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(
            w,
            "{CHECKPOINT_FORMAT_TAG} members={} obs={} act={} hidden={}",
            self.n_members(),
            self.obs_dim,
            self.action_dim,
            hidden
        )?;
        for arr in [
            &self.input_norm.mean,
            &self.input_norm.std,
            &self.target_norm.mean,
            &self.target_norm.std,
        ] {
            for v in arr.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for member in &self.members {
            write_params(w, member)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::load_from(&mut r)
    }

    pub fn load_from<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let header = header.trim_end();
        let rest = header.strip_prefix(CHECKPOINT_FORMAT_TAG).ok_or_else(|| {
            Error::Checkpoint(format!("unsupported checkpoint header '{header}'"))
        })?;
        let mut members = None;
        let mut obs_dim = None;
        let mut action_dim = None;
        let mut hidden: Option<Vec<usize>> = None;
        for field in rest.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Checkpoint(format!("malformed header field '{field}'")))?;
            match key {
                "members" => members = Some(parse_usize(value)?),
                "obs" => obs_dim = Some(parse_usize(value)?),
                "act" => action_dim = Some(parse_usize(value)?),
                "hidden" => {
                    hidden = Some(if value.is_empty() {
                        Vec::new()
                    } else {
                        value.split(',').map(parse_usize).collect::<Result<Vec<_>>>()?
                    })
                }
                other => {
                    return Err(Error::Checkpoint(format!("unknown header field '{other}'")))
                }
            }
        }
        let (n_members, obs_dim, action_dim, hidden) = match (members, obs_dim, action_dim, hidden)
        {
            (Some(m), Some(o), Some(a), Some(h)) => (m, o, a, h),
            _ => return Err(Error::Checkpoint("incomplete checkpoint header".to_string())),
        };
        if n_members == 0 {
            return Err(Error::Checkpoint("checkpoint has zero members".to_string()));
        }
        let in_dim = obs_dim + action_dim;
        let read_vec = |r: &mut R, len: usize| -> Result<Array1<f64>> {
            let mut bytes = vec![0u8; len * 8];
            std::io::Read::read_exact(r, &mut bytes)
                .map_err(|e| Error::Checkpoint(format!("truncated normalizer block: {e}")))?;
            Ok(Array1::from_vec(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ))
        };
        let input_norm = Normalizer {
            mean: read_vec(r, in_dim)?,
            std: read_vec(r, in_dim)?,
        };
        let target_norm = Normalizer {
            mean: read_vec(r, obs_dim)?,
            std: read_vec(r, obs_dim)?,
        };
        let mut loaded = Vec::with_capacity(n_members);
        for m in 0..n_members {
            let params = read_params(r)?;
            if params.in_dim != in_dim || params.out_dim != obs_dim || params.hidden != hidden {
                return Err(Error::Checkpoint(format!(
                    "member {m} architecture does not match checkpoint header"
                )));
            }
            loaded.push(params);
        }
        Ok(EnsembleDynamicsModel {
            members: loaded,
            input_norm,
            target_norm,
            obs_dim,
            action_dim,
        })
    }
}

const CHECKPOINT_FORMAT_TAG: &str = "ensemble v1";

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Checkpoint(format!("invalid integer '{s}' in header")))
}

impl Dynamics for EnsembleDynamicsModel {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn action_dim(&self) -> usize {
        self.action_dim
    }

    fn n_members(&self) -> usize {
        self.members.len()
    }

    fn predict(
        &self,
        obs: &Array2<f64>,
        actions: &Array2<f64>,
        members: &[usize],
        noise: &Array2<f64>,
        out: &mut Array2<f64>,
    ) {
        let n = obs.nrows();
        debug_assert_eq!(actions.nrows(), n);
        debug_assert_eq!(members.len(), n);
        debug_assert_eq!(noise.dim(), (n, self.obs_dim));
        debug_assert_eq!(out.dim(), (n, self.obs_dim));
        let x = self.normalized_inputs(obs, actions);

        let mut rows_per_member: Vec<Vec<usize>> = vec![Vec::new(); self.n_members()];
        for (i, &m) in members.iter().enumerate() {
            rows_per_member[m].push(i);
        }
        for (m, rows) in rows_per_member.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let sub = x.select(Axis(0), rows);
            let (means, logvars) =
                forward(&self.members[m], &sub).expect("normalized inputs are finite");
            for (k, &i) in rows.iter().enumerate() {
                for j in 0..self.obs_dim {
                    let std = (0.5 * logvars[[k, j]]).exp();
                    let sampled = means[[k, j]] + std * noise[[i, j]];
                    out[[i, j]] = obs[[i, j]] + self.target_norm.denormalize_value(j, sampled);
                }
            }
        }
    }
}

/// Bootstrap resample of `0..len` with replacement, same size.
pub fn bootstrap_indices(len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..len)).collect()
}

fn train_member(
    mut params: MlpParams,
    inputs: &Array2<f64>,
    targets: &Array2<f64>,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> (MlpParams, Vec<f64>) {
    let n = inputs.nrows();
    let mut indices = bootstrap_indices(n, rng);
    let mut optimizer = AdamState::new(&params, config.learning_rate);
    let mut curve = Vec::with_capacity(config.epochs);
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    for _epoch in 0..config.epochs {
        shuffle(&mut indices, rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in indices.chunks(config.batch_size.max(1)) {
            let batch_inputs = inputs.select(Axis(0), chunk);
            let batch_targets = targets.select(Axis(0), chunk);
            let batch = Batch::new(batch_inputs, batch_targets).expect("buffer rows are finite");
            let (loss, grads) = backward(&params, &batch).expect("shapes match");
            adam_step(&mut params, &grads, &mut optimizer);
            epoch_loss += loss;
            batches += 1;
        }
        let nll = epoch_loss / batches.max(1) as f64;
        curve.push(nll);
        if nll < best - config.early_stop_min_delta {
            best = nll;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.early_stop_patience {
                break;
            }
        }
    }
    (params, curve)
}

/// Fisher-Yates shuffle driven by the member's own stream.
fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from;
    use approx::assert_abs_diff_eq;

    /// Buffer of transitions from the 1-dim linear system s' = s + a.
    fn linear_buffer(n: usize, seed: u64) -> ReplayBuffer {
        let mut rng = rng_from(seed);
        let mut buffer = ReplayBuffer::new(1, 1, 10_000);
        for _ in 0..n {
            let s: f64 = rng.random_range(-2.0..2.0);
            let a: f64 = rng.random_range(-1.0..1.0);
            buffer.push(&[s], &[a], &[s + a]).unwrap();
        }
        buffer
    }

    #[test]
    fn normalizer_centers_and_scales() {
        let mut rng = rng_from(1);
        let mut rows = Array2::zeros((500, 3));
        for v in rows.iter_mut() {
            *v = rng.random_range(-5.0..3.0);
        }
        let norm = Normalizer::fit(&rows);
        let normalized = norm.normalize(&rows);
        let refit = Normalizer::fit(&normalized);
        for j in 0..3 {
            assert_abs_diff_eq!(refit.mean[j], 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(refit.std[j], 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn normalizer_floors_constant_columns() {
        let rows = Array2::from_elem((10, 2), 3.5);
        let norm = Normalizer::fit(&rows);
        assert!(norm.std.iter().all(|&s| s >= 1e-8));
    }

    #[test]
    fn replay_buffer_ring_semantics() {
        let mut buffer = ReplayBuffer::new(1, 1, 3);
        for k in 0..5 {
            buffer.push(&[k as f64], &[0.0], &[k as f64 + 1.0]).unwrap();
        }
        assert_eq!(buffer.len(), 3);
        assert_eq!(buffer.inserted(), 5);
        let (inputs, deltas) = buffer.inputs_and_deltas();
        // Slots 0 and 1 were overwritten by insertions 3 and 4.
        let obs: Vec<f64> = inputs.column(0).to_vec();
        assert_eq!(obs, vec![3.0, 4.0, 2.0]);
        assert!(deltas.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn replay_buffer_rejects_mismatched_dims() {
        let mut buffer = ReplayBuffer::new(2, 1, 10);
        assert!(buffer.push(&[0.0], &[0.0], &[0.0, 0.0]).is_err());
        assert!(buffer.push(&[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn training_on_empty_buffer_is_rejected() {
        let buffer = ReplayBuffer::new(1, 1, 10);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 2, 0);
        assert!(matches!(
            model.train(&buffer, &TrainConfig::default(), 0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn ensemble_fits_linear_system() {
        let buffer = linear_buffer(600, 3);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[16, 16], 3, 7);
        let config = TrainConfig {
            epochs: 400,
            batch_size: 128,
            learning_rate: 3e-3,
            early_stop_patience: 50,
            early_stop_min_delta: 1e-5,
        };
        model.train(&buffer, &config, 11).unwrap();

        // One-step prediction error < 1e-2 in normalized target units.
        let mut rng = rng_from(5);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let s: f64 = rng.random_range(-2.0..2.0);
            let a: f64 = rng.random_range(-1.0..1.0);
            let pred = model.predict_mean(&[s], &[a]).unwrap();
            let err = (pred[0] - (s + a)).abs() / model.target_norm.std[0];
            worst = worst.max(err);
        }
        assert!(worst < 1e-2, "worst normalized error {worst}");
    }

    #[test]
    fn bootstrap_members_diverge() {
        let buffer = linear_buffer(100, 4);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 2, 9);
        // Same initial parameters for both members: any divergence comes
        // from the bootstrap draws alone.
        model.members[1] = model.members[0].clone();
        let config = TrainConfig {
            epochs: 5,
            early_stop_patience: 50,
            ..TrainConfig::default()
        };
        model.train(&buffer, &config, 13).unwrap();
        assert_ne!(model.members[0].flatten(), model.members[1].flatten());
    }

    #[test]
    fn member_nll_decreases_during_training() {
        let mut rng = rng_from(8);
        let mut buffer = ReplayBuffer::new(1, 1, 10_000);
        for _ in 0..400 {
            let x: f64 = rng.random_range(-3.0..3.0);
            let eps: f64 = rng.sample(StandardNormal);
            // Treat (sin regression) as a 1-dim "dynamics" with obs x.
            buffer.push(&[x], &[0.0], &[x + x.sin() + 0.1 * eps]).unwrap();
        }
        let mut model = EnsembleDynamicsModel::new(1, 1, &[16, 16], 2, 21);
        let config = TrainConfig {
            epochs: 30,
            early_stop_patience: 30,
            ..TrainConfig::default()
        };
        let report = model.train(&buffer, &config, 23).unwrap();
        for curve in &report.member_nll {
            assert!(curve.len() >= 2);
            let first = curve.first().unwrap();
            let last = curve.last().unwrap();
            assert!(last < first, "NLL did not decrease: {first} -> {last}");
        }
        assert!(report.final_mean_nll().is_finite());
    }

    #[test]
    fn near_zero_variance_sampling_equals_mean() {
        let buffer = linear_buffer(200, 6);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 2, 1);
        model
            .train(&buffer, &TrainConfig { epochs: 10, ..TrainConfig::default() }, 2)
            .unwrap();
        // Pin the soft bounds far below any useful variance.
        for member in model.members.iter_mut() {
            member.max_logvar.fill(-59.9);
            member.min_logvar.fill(-60.0);
        }
        let mut rng = rng_from(0);
        let sample = model.predict_sample(&[0.4], &[0.2], 0, &mut rng).unwrap();
        // Member 0's mean path (not the ensemble average).
        let x = model.normalized_inputs(
            &Array2::from_shape_vec((1, 1), vec![0.4]).unwrap(),
            &Array2::from_shape_vec((1, 1), vec![0.2]).unwrap(),
        );
        let (means, _) = forward(&model.members[0], &x).unwrap();
        let expected = 0.4 + model.target_norm.denormalize_value(0, means[[0, 0]]);
        assert_abs_diff_eq!(sample[0], expected, epsilon = 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_given_rng_state() {
        let buffer = linear_buffer(200, 7);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 3, 2);
        model
            .train(&buffer, &TrainConfig { epochs: 5, ..TrainConfig::default() }, 3)
            .unwrap();
        let a = model.predict_sample(&[0.1], &[-0.3], 1, &mut rng_from(55)).unwrap();
        let b = model.predict_sample(&[0.1], &[-0.3], 1, &mut rng_from(55)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_moments_match_predicted_head() {
        let buffer = linear_buffer(300, 9);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 1, 3);
        model
            .train(&buffer, &TrainConfig { epochs: 10, ..TrainConfig::default() }, 4)
            .unwrap();
        let obs = [0.25];
        let act = [-0.4];
        let x = model.normalized_inputs(
            &Array2::from_shape_vec((1, 1), obs.to_vec()).unwrap(),
            &Array2::from_shape_vec((1, 1), act.to_vec()).unwrap(),
        );
        let (means, logvars) = forward(&model.members[0], &x).unwrap();
        let pred_mean = obs[0] + model.target_norm.denormalize_value(0, means[[0, 0]]);
        let pred_std = (0.5 * logvars[[0, 0]]).exp() * model.target_norm.std[0];

        let n = 10_000;
        let mut rng = rng_from(77);
        let samples: Vec<f64> = (0..n)
            .map(|_| model.predict_sample(&obs, &act, 0, &mut rng).unwrap()[0])
            .collect();
        let emp_mean = samples.iter().sum::<f64>() / n as f64;
        let emp_var =
            samples.iter().map(|s| (s - emp_mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let emp_std = emp_var.sqrt();

        // Mean within 3 standard errors; std within 3 of its own rough se.
        let se_mean = pred_std / (n as f64).sqrt();
        assert!(
            (emp_mean - pred_mean).abs() < 3.0 * se_mean,
            "mean {emp_mean} vs predicted {pred_mean} (se {se_mean})"
        );
        let se_std = pred_std / (2.0 * (n as f64)).sqrt();
        assert!(
            (emp_std - pred_std).abs() < 3.0 * se_std,
            "std {emp_std} vs predicted {pred_std} (se {se_std})"
        );
    }

    #[test]
    fn single_member_mean_prediction_equals_member() {
        let buffer = linear_buffer(150, 10);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 1, 4);
        model
            .train(&buffer, &TrainConfig { epochs: 5, ..TrainConfig::default() }, 5)
            .unwrap();
        // Degenerate Gaussian via pinned bounds: the sample IS the mean.
        for member in model.members.iter_mut() {
            member.max_logvar.fill(-59.9);
            member.min_logvar.fill(-60.0);
        }
        let mean = model.predict_mean(&[0.3], &[0.1]).unwrap();
        let sample = model.predict_sample(&[0.3], &[0.1], 0, &mut rng_from(1)).unwrap();
        assert_abs_diff_eq!(mean[0], sample[0], epsilon = 1e-9);
    }

    #[test]
    fn copied_members_average_to_any_single_member() {
        let buffer = linear_buffer(150, 11);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8], 3, 5);
        model
            .train(&buffer, &TrainConfig { epochs: 5, ..TrainConfig::default() }, 6)
            .unwrap();
        model.members[1] = model.members[0].clone();
        model.members[2] = model.members[0].clone();
        let ensemble = model.predict_mean(&[0.2], &[0.5]).unwrap();
        let single = {
            let mut one = model.clone();
            one.members.truncate(1);
            one.predict_mean(&[0.2], &[0.5]).unwrap()
        };
        assert_abs_diff_eq!(ensemble[0], single[0], epsilon = 1e-12);
    }

    #[test]
    fn trained_pendulum_model_predicts_held_out_steps() {
        use crate::envs::{pendulum_observe, pendulum_step, PendulumParams, PendulumState};
        let params = PendulumParams::default();
        let mut rng = rng_from(31);
        let mut draw = |rng: &mut ChaCha8Rng| PendulumState {
            theta: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            theta_dot: rng.random_range(-7.0..7.0),
        };
        let mut buffer = ReplayBuffer::new(3, 1, 10_000);
        for _ in 0..2000 {
            let state = draw(&mut rng);
            let u: f64 = rng.random_range(-2.0..2.0);
            let (next, _) = pendulum_step(state, u, &params).unwrap();
            buffer
                .push(&pendulum_observe(&state), &[u], &pendulum_observe(&next))
                .unwrap();
        }
        let mut model = EnsembleDynamicsModel::new(3, 1, &[48, 48], 3, 41);
        let config = TrainConfig {
            epochs: 40,
            ..TrainConfig::default()
        };
        model.train(&buffer, &config, 43).unwrap();

        let mut total = 0.0;
        let n_eval = 1000;
        for _ in 0..n_eval {
            let state = draw(&mut rng);
            let u: f64 = rng.random_range(-2.0..2.0);
            let (next, _) = pendulum_step(state, u, &params).unwrap();
            let pred = model.predict_mean(&pendulum_observe(&state), &[u]).unwrap();
            let truth = pendulum_observe(&next);
            let err: f64 = pred
                .iter()
                .zip(&truth)
                .map(|(p, t)| (p - t).powi(2))
                .sum::<f64>()
                .sqrt();
            total += err;
        }
        let mean_err = total / n_eval as f64;
        assert!(mean_err < 0.05, "mean held-out error {mean_err}");
    }

    #[test]
    fn checkpoint_round_trip() {
        let buffer = linear_buffer(150, 12);
        let mut model = EnsembleDynamicsModel::new(1, 1, &[8, 8], 2, 6);
        model
            .train(&buffer, &TrainConfig { epochs: 5, ..TrainConfig::default() }, 7)
            .unwrap();
        let mut buf = Vec::new();
        model.save_to(&mut buf).unwrap();
        let loaded = EnsembleDynamicsModel::load_from(&mut std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(loaded.obs_dim, 1);
        assert_eq!(loaded.action_dim, 1);
        assert_eq!(loaded.input_norm, model.input_norm);
        assert_eq!(loaded.target_norm, model.target_norm);
        for (a, b) in loaded.members.iter().zip(&model.members) {
            assert_eq!(a.flatten(), b.flatten());
        }
        // Identical predictions after the round trip.
        let a = model.predict_sample(&[0.2], &[0.4], 1, &mut rng_from(3)).unwrap();
        let b = loaded.predict_sample(&[0.2], &[0.4], 1, &mut rng_from(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_rejects_version_mismatch() {
        let model = EnsembleDynamicsModel::new(1, 1, &[4], 1, 0);
        let mut buf = Vec::new();
        model.save_to(&mut buf).unwrap();
        let mut corrupted = b"ensemble v9".to_vec();
        corrupted.extend_from_slice(&buf[11..]);
        assert!(matches!(
            EnsembleDynamicsModel::load_from(&mut std::io::Cursor::new(&corrupted)),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn fn_dynamics_wraps_ground_truth() {
        let dyn_ = FnDynamics::new(1, 1, |obs: &[f64], act: &[f64]| vec![obs[0] + act[0]]);
        let obs = Array2::from_shape_vec((2, 1), vec![1.0, 2.0]).unwrap();
        let act = Array2::from_shape_vec((2, 1), vec![0.5, -0.5]).unwrap();
        let noise = Array2::zeros((2, 1));
        let mut out = Array2::zeros((2, 1));
        dyn_.predict(&obs, &act, &[0, 0], &noise, &mut out);
        assert_eq!(out[[0, 0]], 1.5);
        assert_eq!(out[[1, 0]], 1.5);
    }
}
