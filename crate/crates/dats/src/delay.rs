//! Action-delay interaction protocol.
//!
//! The agent never touches the environment directly: actions pass through a
//! FIFO buffer of length `n`, so the action submitted at step `t` executes at
//! step `t + n`. The agent-visible state is the environment observation
//! concatenated with the `n` still-pending actions (head first) — exactly the
//! augmented state that restores the Markov property under delay.

use crate::error::{Error, Result};
use crate::spaces::{ActionVec, Env};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// FIFO queue of pending actions with fixed capacity `n`.
///
/// At every agent-visible instant the queue holds exactly `n` actions; a
/// step pops the head (executed now) and pushes the newly chosen action at
/// the tail. With `n = 0` the queue is empty and actions pass straight
/// through.
#[derive(Clone, Debug)]
pub struct ActionBuffer {
    queue: VecDeque<ActionVec>,
    capacity: usize,
}

impl ActionBuffer {
    /// A full buffer seeded with the initial action sequence.
    pub fn filled(init_actions: &[ActionVec]) -> Self {
        ActionBuffer {
            queue: init_actions.iter().cloned().collect(),
            capacity: init_actions.len(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Pushes the new action and pops the action to execute now.
    ///
    /// Returns the action pushed `n` steps earlier; for `n = 0` the new
    /// action itself.
    pub fn push_pop(&mut self, new_action: ActionVec) -> ActionVec {
        if self.capacity == 0 {
            return new_action;
        }
        self.queue.push_back(new_action);
        let head = self.queue.pop_front().expect("buffer is kept full");
        debug_assert_eq!(self.queue.len(), self.capacity);
        head
    }

    /// Pending actions in execution order (head first).
    pub fn pending(&self) -> Vec<ActionVec> {
        self.queue.iter().cloned().collect()
    }
}

/// Observation plus the flattened queue of pending actions, head first.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedState {
    pub obs: Vec<f64>,
    pub pending: Vec<ActionVec>,
}

impl AugmentedState {
    pub fn dim(&self) -> usize {
        self.obs.len() + self.pending.iter().map(|a| a.dim()).sum::<usize>()
    }

    /// Flat vector `obs ++ pending[0] ++ ... ++ pending[n-1]`.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&self.obs);
        for a in &self.pending {
            out.extend_from_slice(a.as_slice());
        }
        out
    }

    /// Splits a flat augmented vector back into observation and queue.
    pub fn from_flat(flat: &[f64], obs_dim: usize, action_dim: usize, delay: usize) -> Result<Self> {
        if flat.len() != obs_dim + delay * action_dim {
            return Err(Error::dims(format!(
                "flat augmented state has dim {}, expected {}",
                flat.len(),
                obs_dim + delay * action_dim
            )));
        }
        let obs = flat[..obs_dim].to_vec();
        let pending = (0..delay)
            .map(|i| {
                let lo = obs_dim + i * action_dim;
                ActionVec::unchecked(flat[lo..lo + action_dim].to_vec())
            })
            .collect();
        Ok(AugmentedState { obs, pending })
    }
}

/// Pure bookkeeping mirror of a delayed step, used inside planners: swap in
/// a predicted observation, drop the queue head, append the new action.
pub fn shift_augmented(
    aug: &AugmentedState,
    predicted_obs: Vec<f64>,
    new_action: ActionVec,
) -> AugmentedState {
    let pending = if aug.pending.is_empty() {
        Vec::new()
    } else {
        let mut shifted = aug.pending[1..].to_vec();
        shifted.push(new_action);
        shifted
    };
    AugmentedState {
        obs: predicted_obs,
        pending,
    }
}

/// Result of one delayed environment step.
#[derive(Clone, Debug)]
pub struct DelayedStep {
    pub state: AugmentedState,
    pub reward: f64,
    pub done: bool,
    /// The action actually applied to the inner environment this step (the
    /// one submitted `n` steps earlier).
    pub executed: ActionVec,
}

/// An environment driven through an `n`-step action buffer.
///
/// With `n = 0` the wrapper is bit-identical to the inner environment.
#[derive(Clone, Debug)]
pub struct DelayedEnv<E: Env> {
    inner: E,
    delay: usize,
    init_actions: Vec<ActionVec>,
    buffer: ActionBuffer,
    ready: bool,
}

impl<E: Env> DelayedEnv<E> {
    /// Wraps `inner` with an `n`-step delay and all-zero initial actions.
    pub fn new(inner: E, delay: usize) -> Self {
        let dim = inner.spec().action_dim;
        let init = vec![ActionVec::zeros(dim); delay];
        Self::with_init_actions(inner, delay, init).expect("zero actions match the action dim")
    }

    /// Wraps `inner` with an explicit initial action sequence of length `n`.
    pub fn with_init_actions(inner: E, delay: usize, init_actions: Vec<ActionVec>) -> Result<Self> {
        if init_actions.len() != delay {
            return Err(Error::dims(format!(
                "need {delay} initial actions, got {}",
                init_actions.len()
            )));
        }
        let dim = inner.spec().action_dim;
        if init_actions.iter().any(|a| a.dim() != dim) {
            return Err(Error::dims("initial action dim mismatch".to_string()));
        }
        Ok(DelayedEnv {
            buffer: ActionBuffer::filled(&init_actions),
            inner,
            delay,
            init_actions,
            ready: false,
        })
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut E {
        &mut self.inner
    }

    /// Augmented observation dimension `obs_dim + n * action_dim`.
    pub fn augmented_dim(&self) -> usize {
        self.inner.spec().obs_dim + self.delay * self.inner.spec().action_dim
    }

    /// Resets the inner environment, refills the buffer with the initial
    /// actions, and returns the augmented state.
    pub fn delayed_reset(&mut self, rng: &mut ChaCha8Rng) -> AugmentedState {
        let obs = self.inner.reset(rng);
        self.buffer = ActionBuffer::filled(&self.init_actions);
        self.ready = true;
        AugmentedState {
            obs,
            pending: self.buffer.pending(),
        }
    }

    /// Submits `new_action`, executes the queue head on the inner
    /// environment, and returns the shifted augmented state.
    ///
    /// The reward is the inner reward for the *executed* action, i.e. it
    /// depends only on the action submitted `n` steps earlier.
    pub fn delayed_step(&mut self, new_action: &[f64]) -> Result<DelayedStep> {
        if !self.ready {
            return Err(Error::contract("delayed_step called before delayed_reset"));
        }
        let action = ActionVec::clamped(new_action.to_vec(), &self.inner.spec().action_bounds)?;
        let executed = self.buffer.push_pop(action);
        let outcome = self.inner.step(executed.as_slice())?;
        Ok(DelayedStep {
            state: AugmentedState {
                obs: outcome.obs,
                pending: self.buffer.pending(),
            },
            reward: outcome.reward,
            done: outcome.done,
            executed,
        })
    }
}

/// Env wrapper that records every action its inner environment executes.
/// Probe for protocol tests and the verification suites.
#[derive(Clone, Debug)]
pub struct RecordingEnv<E: Env> {
    inner: E,
    pub trace: Vec<Vec<f64>>,
}

impl<E: Env> RecordingEnv<E> {
    pub fn new(inner: E) -> Self {
        RecordingEnv {
            inner,
            trace: Vec::new(),
        }
    }
}

impl<E: Env> Env for RecordingEnv<E> {
    fn spec(&self) -> &crate::spaces::EnvSpec {
        self.inner.spec()
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.trace.clear();
        self.inner.reset(rng)
    }

    fn step(&mut self, action: &[f64]) -> Result<crate::spaces::StepOutcome> {
        self.trace.push(action.to_vec());
        self.inner.step(action)
    }

    fn observe(&self) -> Vec<f64> {
        self.inner.observe()
    }

    fn reward(&self, obs: &[f64], action: &[f64]) -> f64 {
        self.inner.reward(obs, action)
    }

    fn score(&self, obs: &[f64]) -> f64 {
        self.inner.score(obs)
    }
}
