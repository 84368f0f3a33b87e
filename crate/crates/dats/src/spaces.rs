//! Shared environment contract: state/action vectors, bounds, and the
//! [`Env`] trait implemented by every concrete environment.

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;

/// A real-valued environment state. All entries are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    values: Vec<f64>,
}

impl StateVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("state vector contains non-finite entries"));
        }
        Ok(StateVec { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Per-coordinate closed interval bounds for actions.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl Bounds {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.len() != high.len() {
            return Err(Error::dims(format!(
                "bounds low has dim {}, high has dim {}",
                low.len(),
                high.len()
            )));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l <= h)) {
            return Err(Error::contract("bounds must satisfy low <= high"));
        }
        Ok(Bounds { low, high })
    }

    /// Symmetric bounds `[-b, b]` in every coordinate.
    pub fn symmetric(dim: usize, b: f64) -> Self {
        Bounds {
            low: vec![-b; dim],
            high: vec![b; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn clamp_into(&self, values: &mut [f64]) {
        for (v, (l, h)) in values.iter_mut().zip(self.low.iter().zip(&self.high)) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.dim()
            && values
                .iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    /// Interval width per coordinate.
    pub fn width(&self) -> Vec<f64> {
        self.low.iter().zip(&self.high).map(|(l, h)| h - l).collect()
    }
}

/// A bounded, finite action vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionVec {
    values: Vec<f64>,
}

impl ActionVec {
    /// Builds an action, clamping each coordinate into its bound.
    pub fn clamped(mut values: Vec<f64>, bounds: &Bounds) -> Result<Self> {
        if values.len() != bounds.dim() {
            return Err(Error::dims(format!(
                "action has dim {}, bounds have dim {}",
                values.len(),
                bounds.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("action vector contains non-finite entries"));
        }
        bounds.clamp_into(&mut values);
        Ok(ActionVec { values })
    }

    /// Builds an action without bound checking; entries must be finite.
    pub fn unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ActionVec { values }
    }

    pub fn zeros(dim: usize) -> Self {
        ActionVec {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Static description of an environment instance.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub action_bounds: Bounds,
    /// Episode horizon in steps.
    pub horizon: usize,
    /// Simulation step in seconds.
    pub dt: f64,
}

impl EnvSpec {
    pub fn new(
        state_dim: usize,
        obs_dim: usize,
        action_dim: usize,
        action_bounds: Bounds,
        horizon: usize,
        dt: f64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::contract("horizon must be positive"));
        }
        if !(dt > 0.0) {
            return Err(Error::contract("dt must be positive"));
        }
        if action_bounds.dim() != action_dim {
            return Err(Error::dims("action bounds dim != action_dim".to_string()));
        }
        Ok(EnvSpec {
            state_dim,
            obs_dim,
            action_dim,
            action_bounds,
            horizon,
            dt,
        })
    }
}

/// One environment transition.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

/// Deterministic simulated environment with a known reward function.
///
/// `step` is deterministic given `(state, action)`; all randomness enters
/// through `reset`. `reward` must be a pure function of `(obs, action)` that
/// reproduces the reward `step` returns for the same underlying state, so
/// planners can evaluate imagined rollouts without touching the simulator.
pub trait Env: Send {
    fn spec(&self) -> &EnvSpec;

    /// Resets to a random initial state and returns the observation.
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome>;

    /// Observation of the current state.
    fn observe(&self) -> Vec<f64>;

    /// The known per-step reward as a pure function of (observation, action).
    fn reward(&self, obs: &[f64], action: &[f64]) -> f64;

    /// Per-step score on the benchmark reporting scale.
    ///
    /// Learning curves and transfer matrices report episode scores, which for
    /// cart-pole coincide with the reward sum and for the pendulum use the
    /// uprightness scale (see `envs::pendulum`).
    fn score(&self, obs: &[f64]) -> f64;
}
