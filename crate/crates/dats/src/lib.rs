//! Delay-aware model-based reinforcement learning for continuous control.
//!
//! Real actuators do not respond instantly: the action chosen at step `t`
//! takes effect at step `t + n`. Ignoring that delay breaks the Markov
//! property; augmenting the state with the queue of the `n` pending actions
//! restores it. This crate provides the pieces needed to study and exploit
//! that augmentation end to end:
//!
//! - [`finite`] — exact tabular machinery: build the delay-augmented MDP,
//!   reduce MDP + policy to a Markov reward process two independent ways,
//!   and check that both reductions agree elementwise.
//! - [`envs`] — deterministic pendulum and cart-pole dynamics with
//!   analytically known reward functions.
//! - [`delay`] — the action-buffer interaction protocol and augmented-state
//!   bookkeeping for continuous environments.
//! - [`neural`] — a small Gaussian-head MLP with analytic backprop and an
//!   adaptive-moment optimizer.
//! - [`model`] — bootstrapped probabilistic ensembles over one-step state
//!   deltas, with input/target normalization and checkpointing.
//! - [`planner`] — cross-entropy-method MPC that first replays the pending
//!   action prefix through the model, then optimizes the future sequence.
//! - [`agent`] — the outer training loops: delay-aware trajectory sampling
//!   (DATS) plus the blind and whole-dynamics baselines, and frozen-model
//!   transfer evaluation across delay settings.
//! - [`experiment`] — reproducible experiment runner: config files, seeded
//!   runs, CSV/SVG artifacts, and the property-verification suites.
//!
//! The `dats` binary exposes the experiment runner; the `examples/`
//! directory holds one runnable example per major capability.

pub mod agent;
pub mod delay;
pub mod envs;
pub mod error;
pub mod experiment;
pub mod finite;
pub mod model;
pub mod neural;
pub mod planner;
pub mod seeding;
pub mod spaces;

pub use error::{Error, Result};
