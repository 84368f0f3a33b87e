//! Deterministic classic-control environments with analytically known
//! reward functions.
//!
//! Both environments are pure simulators: `step` is a deterministic function
//! of `(state, action)` and all randomness enters through seeded resets. The
//! reward is a known pure function of `(observation, action)` so planners can
//! score imagined rollouts without the simulator.

use crate::error::{Error, Result};
use crate::spaces::{Bounds, Env, EnvSpec, StepOutcome};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = PI - (PI - theta).rem_euclid(TAU);
    // rem_euclid rounding can land exactly on -pi when theta is within one
    // ulp of pi; fold it back onto the closed end of the interval.
    if w <= -PI {
        PI
    } else {
        w
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract(format!("{what} contains non-finite entries")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Pendulum
// ---------------------------------------------------------------------------

/// Pendulum pole state: angle from upright (wrapped to `(-pi, pi]`) and
/// angular velocity in rad/s (clipped to `[-8, 8]` after every step).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
}

/// Physical constants of the pendulum simulation.
#[derive(Clone, Copy, Debug)]
pub struct PendulumParams {
    pub gravity: f64,
    pub mass: f64,
    pub length: f64,
    pub dt: f64,
    pub max_speed: f64,
    pub max_torque: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        PendulumParams {
            gravity: 10.0,
            mass: 1.0,
            length: 1.0,
            dt: 0.05,
            max_speed: 8.0,
            max_torque: 2.0,
        }
    }
}

/// One semi-implicit Euler step of the pendulum.
///
/// The reward is evaluated at the pre-step state with the applied torque:
/// `-(theta^2 + 0.1 theta_dot^2 + 0.001 u^2)`.
pub fn pendulum_step(
    state: PendulumState,
    torque: f64,
    params: &PendulumParams,
) -> Result<(PendulumState, f64)> {
    check_finite(&[state.theta, state.theta_dot, torque], "pendulum step input")?;
    let u = torque.clamp(-params.max_torque, params.max_torque);
    let reward = -(wrap_angle(state.theta).powi(2)
        + 0.1 * state.theta_dot.powi(2)
        + 0.001 * u.powi(2));
    let accel = 3.0 * params.gravity / (2.0 * params.length) * state.theta.sin()
        + 3.0 / (params.mass * params.length.powi(2)) * u;
    let theta_dot = (state.theta_dot + accel * params.dt).clamp(-params.max_speed, params.max_speed);
    let theta = wrap_angle(state.theta + theta_dot * params.dt);
    Ok((PendulumState { theta, theta_dot }, reward))
}

/// Observation `(cos theta, sin theta, theta_dot)`.
///
/// The raw angle is deliberately not exposed: the wrap discontinuity at
/// +-pi corrupts delta-state regression targets.
pub fn pendulum_observe(state: &PendulumState) -> Vec<f64> {
    vec![state.theta.cos(), state.theta.sin(), state.theta_dot]
}

/// Pure reward over `(observation, torque)`; recovers the angle via atan2.
pub fn pendulum_reward(obs: &[f64], action: &[f64]) -> f64 {
    let theta = wrap_angle(obs[1].atan2(obs[0]));
    let u = action[0].clamp(-2.0, 2.0);
    -(theta.powi(2) + 0.1 * obs[2].powi(2) + 0.001 * u.powi(2))
}

/// Mechanical energy of the pole (kinetic plus gravitational, zero at the
/// hanging rest position of the rod's center of mass; used in tests only).
pub fn pendulum_energy(state: &PendulumState, params: &PendulumParams) -> f64 {
    let inertia = params.mass * params.length.powi(2) / 3.0;
    0.5 * inertia * state.theta_dot.powi(2)
        + params.mass * params.gravity * (params.length / 2.0) * (1.0 + state.theta.cos())
}

/// Swing-up pendulum environment.
#[derive(Clone, Debug)]
pub struct Pendulum {
    params: PendulumParams,
    spec: EnvSpec,
    state: PendulumState,
}

impl Pendulum {
    pub fn new() -> Self {
        Self::with_params(PendulumParams::default(), 200)
    }

    pub fn with_params(params: PendulumParams, horizon: usize) -> Self {
        let spec = EnvSpec::new(
            2,
            3,
            1,
            Bounds::symmetric(1, params.max_torque),
            horizon,
            params.dt,
        )
        .expect("pendulum spec is valid");
        Pendulum {
            params,
            spec,
            state: PendulumState {
                theta: 0.0,
                theta_dot: 0.0,
            },
        }
    }

    pub fn state(&self) -> PendulumState {
        self.state
    }

    pub fn set_state(&mut self, state: PendulumState) {
        self.state = state;
    }

    pub fn params(&self) -> &PendulumParams {
        &self.params
    }
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.state = PendulumState {
            theta: rng.random_range(-PI..PI),
            theta_dot: rng.random_range(-1.0..1.0),
        };
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        if action.len() != 1 {
            return Err(Error::dims(format!("pendulum takes 1-dim torque, got {}", action.len())));
        }
        let (next, reward) = pendulum_step(self.state, action[0], &self.params)?;
        self.state = next;
        Ok(StepOutcome {
            obs: self.observe(),
            reward,
            done: false,
        })
    }

    fn observe(&self) -> Vec<f64> {
        pendulum_observe(&self.state)
    }

    fn reward(&self, obs: &[f64], action: &[f64]) -> f64 {
        pendulum_reward(obs, action)
    }

    /// Uprightness per step (`cos theta`), the scale learning curves report.
    fn score(&self, obs: &[f64]) -> f64 {
        obs[0]
    }
}

// ---------------------------------------------------------------------------
// Cart-pole
// ---------------------------------------------------------------------------

/// Cart-pole state `(x, x_dot, theta, theta_dot)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartpoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

const CART_MASS: f64 = 1.0;
const POLE_MASS: f64 = 0.1;
const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
const POLE_HALF_LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = POLE_MASS * POLE_HALF_LENGTH;
const CART_GRAVITY: f64 = 9.8;
const CART_DT: f64 = 0.02;
const FORCE_SCALE: f64 = 10.0;
/// 12 degrees.
pub const THETA_THRESHOLD: f64 = 12.0 * PI / 180.0;
pub const X_THRESHOLD: f64 = 2.4;

fn cartpole_within_limits(x: f64, theta: f64) -> bool {
    theta.abs() <= THETA_THRESHOLD && x.abs() <= X_THRESHOLD
}

/// One explicit Euler step of the continuous-force cart-pole.
///
/// `action` is in `[-1, 1]` and scaled to a force of `+-10 N`. The reward is
/// `1` when the pre-step state is within both thresholds, else `0`; the
/// terminated flag reflects the post-step state.
pub fn cartpole_step(
    state: CartpoleState,
    action: f64,
) -> Result<(CartpoleState, f64, bool)> {
    check_finite(
        &[state.x, state.x_dot, state.theta, state.theta_dot, action],
        "cartpole step input",
    )?;
    let force = FORCE_SCALE * action.clamp(-1.0, 1.0);
    let (sin_t, cos_t) = state.theta.sin_cos();
    let temp = (force + POLE_MASS_LENGTH * state.theta_dot.powi(2) * sin_t) / TOTAL_MASS;
    let theta_acc = (CART_GRAVITY * sin_t - cos_t * temp)
        / (POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t.powi(2) / TOTAL_MASS));
    let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS;

    let reward = if cartpole_within_limits(state.x, state.theta) {
        1.0
    } else {
        0.0
    };
    let next = CartpoleState {
        x: state.x + CART_DT * state.x_dot,
        x_dot: state.x_dot + CART_DT * x_acc,
        theta: state.theta + CART_DT * state.theta_dot,
        theta_dot: state.theta_dot + CART_DT * theta_acc,
    };
    let terminated = !cartpole_within_limits(next.x, next.theta);
    Ok((next, reward, terminated))
}

/// Cart-pole observes its raw 4-dim state.
pub fn cartpole_observe(state: &CartpoleState) -> Vec<f64> {
    vec![state.x, state.x_dot, state.theta, state.theta_dot]
}

/// Pure reward: 1 inside both thresholds, 0 past either. Keeping rollouts
/// fixed-length and zeroing reward past the thresholds stands in for
/// termination inside the planner.
pub fn cartpole_reward(obs: &[f64], _action: &[f64]) -> f64 {
    if cartpole_within_limits(obs[0], obs[2]) {
        1.0
    } else {
        0.0
    }
}

/// Continuous-force cart-pole balancing environment.
#[derive(Clone, Debug)]
pub struct Cartpole {
    spec: EnvSpec,
    state: CartpoleState,
}

impl Cartpole {
    pub fn new() -> Self {
        let spec = EnvSpec::new(4, 4, 1, Bounds::symmetric(1, 1.0), 200, CART_DT)
            .expect("cartpole spec is valid");
        Cartpole {
            spec,
            state: CartpoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: 0.0,
                theta_dot: 0.0,
            },
        }
    }

    pub fn state(&self) -> CartpoleState {
        self.state
    }

    pub fn set_state(&mut self, state: CartpoleState) {
        self.state = state;
    }
}

impl Default for Cartpole {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for Cartpole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.state = CartpoleState {
            x: rng.random_range(-0.05..0.05),
            x_dot: rng.random_range(-0.05..0.05),
            theta: rng.random_range(-0.05..0.05),
            theta_dot: rng.random_range(-0.05..0.05),
        };
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        if action.len() != 1 {
            return Err(Error::dims(format!("cartpole takes 1-dim force, got {}", action.len())));
        }
        let (next, reward, done) = cartpole_step(self.state, action[0])?;
        self.state = next;
        Ok(StepOutcome {
            obs: self.observe(),
            reward,
            done,
        })
    }

    fn observe(&self) -> Vec<f64> {
        cartpole_observe(&self.state)
    }

    fn reward(&self, obs: &[f64], action: &[f64]) -> f64 {
        cartpole_reward(obs, action)
    }

    fn score(&self, obs: &[f64]) -> f64 {
        cartpole_reward(obs, &[])
    }
}

/// True next observation of the pendulum, reconstructing the state from the
/// observation. Ground-truth oracle for planner and agent checks.
pub fn pendulum_next_obs(obs: &[f64], action: &[f64]) -> Vec<f64> {
    let state = PendulumState {
        theta: obs[1].atan2(obs[0]),
        theta_dot: obs[2],
    };
    let (next, _) = pendulum_step(state, action[0], &PendulumParams::default())
        .expect("oracle inputs are finite");
    pendulum_observe(&next)
}

/// True next observation of the cart-pole (observation = state).
pub fn cartpole_next_obs(obs: &[f64], action: &[f64]) -> Vec<f64> {
    let state = CartpoleState {
        x: obs[0],
        x_dot: obs[1],
        theta: obs[2],
        theta_dot: obs[3],
    };
    let (next, _, _) = cartpole_step(state, action[0]).expect("oracle inputs are finite");
    cartpole_observe(&next)
}

/// Deterministic ground-truth dynamics for `kind`, usable wherever a learned
/// model is expected.
pub fn oracle_dynamics(kind: EnvKind) -> crate::model::FnDynamics<fn(&[f64], &[f64]) -> Vec<f64>> {
    match kind {
        EnvKind::Pendulum => crate::model::FnDynamics::new(3, 1, pendulum_next_obs),
        EnvKind::Cartpole => crate::model::FnDynamics::new(4, 1, cartpole_next_obs),
    }
}

/// Environments known to the experiment runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Pendulum,
    Cartpole,
}

impl EnvKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "pendulum" => Ok(EnvKind::Pendulum),
            "cartpole" => Ok(EnvKind::Cartpole),
            other => Err(Error::contract(format!(
                "unknown environment '{other}' (expected pendulum or cartpole)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvKind::Pendulum => "pendulum",
            EnvKind::Cartpole => "cartpole",
        }
    }

    pub fn default_horizon(&self) -> usize {
        200
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wrap_angle_stays_in_half_open_interval() {
        for k in -100..100 {
            let theta = 0.137 * k as f64;
            let w = wrap_angle(theta);
            assert!(w > -PI && w <= PI, "wrap({theta}) = {w}");
            // Same angle modulo 2 pi.
            assert!(((w - theta).rem_euclid(TAU)).min((theta - w).rem_euclid(TAU)) < 1e-9);
        }
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn pendulum_upright_equilibrium_is_fixed_point() {
        let (next, reward) = pendulum_step(
            PendulumState { theta: 0.0, theta_dot: 0.0 },
            0.0,
            &PendulumParams::default(),
        )
        .unwrap();
        assert_eq!(next.theta, 0.0);
        assert_eq!(next.theta_dot, 0.0);
        assert_eq!(reward, 0.0);
    }

    #[test]
    fn pendulum_hanging_rest_reward_is_minus_pi_squared() {
        let (_, reward) = pendulum_step(
            PendulumState { theta: PI, theta_dot: 0.0 },
            0.0,
            &PendulumParams::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(reward, -PI * PI, epsilon = 1e-12);
    }

    /// Frozen values from an independent scalar integrator implementing the
    /// same semi-implicit Euler update.
    #[test]
    fn pendulum_step_matches_reference_integrator() {
        let p = PendulumParams::default();
        let (next, reward) =
            pendulum_step(PendulumState { theta: 0.1, theta_dot: 0.5 }, 1.0, &p).unwrap();
        assert_abs_diff_eq!(next.theta, 0.13624375312425618, epsilon = 1e-12);
        assert_abs_diff_eq!(next.theta_dot, 0.7248750624851211, epsilon = 1e-12);
        assert_abs_diff_eq!(reward, -0.036, epsilon = 1e-12);

        let (next, reward) =
            pendulum_step(PendulumState { theta: -1.2, theta_dot: -3.0 }, -0.5, &p).unwrap();
        assert_abs_diff_eq!(next.theta, -1.3887014657237708, epsilon = 1e-12);
        assert_abs_diff_eq!(next.theta_dot, -3.7740293144754196, epsilon = 1e-12);
        assert_abs_diff_eq!(reward, -2.34025, epsilon = 1e-12);

        // Crosses the wrap boundary.
        let (next, reward) =
            pendulum_step(PendulumState { theta: 3.1, theta_dot: 2.0 }, 2.0, &p).unwrap();
        assert_abs_diff_eq!(next.theta, -3.0666260323383376, epsilon = 1e-12);
        assert_abs_diff_eq!(next.theta_dot, 2.331185496824968, epsilon = 1e-12);
        assert_abs_diff_eq!(reward, -10.014, epsilon = 1e-12);
    }

    #[test]
    fn pendulum_torque_is_clipped() {
        let p = PendulumParams::default();
        let (a, r_a) = pendulum_step(PendulumState { theta: 1.0, theta_dot: 0.0 }, 50.0, &p).unwrap();
        let (b, r_b) = pendulum_step(PendulumState { theta: 1.0, theta_dot: 0.0 }, 2.0, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(r_a, r_b);
    }

    #[test]
    fn pendulum_speed_is_clipped() {
        let p = PendulumParams::default();
        let (next, _) = pendulum_step(PendulumState { theta: PI / 2.0, theta_dot: 7.9 }, 2.0, &p).unwrap();
        assert_eq!(next.theta_dot, 8.0);
    }

    #[test]
    fn pendulum_rejects_non_finite_input() {
        let p = PendulumParams::default();
        assert!(pendulum_step(PendulumState { theta: f64::NAN, theta_dot: 0.0 }, 0.0, &p).is_err());
        assert!(pendulum_step(PendulumState { theta: 0.0, theta_dot: 0.0 }, f64::INFINITY, &p).is_err());
    }

    #[test]
    fn pendulum_observation_identities() {
        let obs = pendulum_observe(&PendulumState { theta: 0.0, theta_dot: 0.0 });
        assert_eq!(obs, vec![1.0, 0.0, 0.0]);
        let obs = pendulum_observe(&PendulumState { theta: PI / 2.0, theta_dot: 2.0 });
        assert_abs_diff_eq!(obs[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(obs[1], 1.0, epsilon = 1e-15);
        assert_eq!(obs[2], 2.0);
    }

    #[test]
    fn pendulum_reward_fn_examples() {
        assert_eq!(pendulum_reward(&[1.0, 0.0, 0.0], &[0.0]), 0.0);
        assert_abs_diff_eq!(pendulum_reward(&[-1.0, 0.0, 0.0], &[0.0]), -PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn reward_fn_agrees_with_step_reward() {
        let p = PendulumParams::default();
        let mut rng = rng_from(7);
        for _ in 0..10_000 {
            let state = PendulumState {
                theta: rng.random_range(-PI..PI),
                theta_dot: rng.random_range(-8.0..8.0),
            };
            let u = rng.random_range(-2.0..2.0);
            let (_, reward) = pendulum_step(state, u, &p).unwrap();
            let via_obs = pendulum_reward(&pendulum_observe(&state), &[u]);
            assert_abs_diff_eq!(reward, via_obs, epsilon = 1e-9);
        }
    }

    #[test]
    fn pendulum_reset_distribution_and_determinism() {
        let mut env = Pendulum::new();
        let a = env.reset(&mut rng_from(42));
        let b = env.reset(&mut rng_from(42));
        assert_eq!(a, b);

        let mut rng = rng_from(0);
        let mut min_t = f64::INFINITY;
        let mut max_t = f64::NEG_INFINITY;
        for _ in 0..10_000 {
            env.reset(&mut rng);
            let s = env.state();
            assert!(s.theta > -PI && s.theta <= PI);
            assert!(s.theta_dot >= -1.0 && s.theta_dot < 1.0);
            min_t = min_t.min(s.theta);
            max_t = max_t.max(s.theta);
        }
        // Empirical angle range covers nearly all of (-pi, pi).
        assert!(min_t < -3.0 && max_t > 3.0);
    }

    #[test]
    fn pendulum_steps_are_deterministic() {
        let p = PendulumParams::default();
        let s = PendulumState { theta: 0.3, theta_dot: -0.4 };
        let a = pendulum_step(s, 1.3, &p).unwrap();
        let b = pendulum_step(s, 1.3, &p).unwrap();
        assert_eq!(a.0, b.0);
        assert!(a.1 == b.1);
    }

    /// Per-step mechanical-energy drift of the torque-free pendulum is
    /// O(dt^2): quartering dt cuts the worst-case drift by ~16x.
    #[test]
    fn pendulum_energy_drift_scales_with_dt_squared() {
        let drift = |dt: f64| -> f64 {
            let params = PendulumParams {
                dt,
                max_speed: f64::INFINITY,
                max_torque: 2.0,
                ..PendulumParams::default()
            };
            let mut state = PendulumState { theta: 2.0, theta_dot: 1.0 };
            let mut worst = 0.0f64;
            for _ in 0..200 {
                let e0 = pendulum_energy(&state, &params);
                let (next, _) = pendulum_step(state, 0.0, &params).unwrap();
                let e1 = pendulum_energy(&next, &params);
                worst = worst.max((e1 - e0).abs());
                state = next;
            }
            worst
        };
        let coarse = drift(4e-3);
        let fine = drift(1e-3);
        let ratio = coarse / fine;
        assert!(
            (8.0..32.0).contains(&ratio),
            "drift ratio {ratio} not consistent with O(dt^2)"
        );
    }

    #[test]
    fn cartpole_equilibrium() {
        let (next, reward, done) = cartpole_step(
            CartpoleState { x: 0.0, x_dot: 0.0, theta: 0.0, theta_dot: 0.0 },
            0.0,
        )
        .unwrap();
        assert_eq!(next, CartpoleState { x: 0.0, x_dot: 0.0, theta: 0.0, theta_dot: 0.0 });
        assert_eq!(reward, 1.0);
        assert!(!done);
    }

    #[test]
    fn cartpole_past_angle_threshold_terminates() {
        for action in [-1.0, 0.0, 1.0] {
            let (_, reward, done) = cartpole_step(
                CartpoleState { x: 0.0, x_dot: 0.0, theta: 0.22, theta_dot: 0.0 },
                action,
            )
            .unwrap();
            assert!(done, "0.22 rad exceeds the 12 degree threshold");
            assert_eq!(reward, 0.0);
        }
    }

    /// Frozen values from an independent scalar integrator.
    #[test]
    fn cartpole_step_matches_reference_integrator() {
        let (next, reward, done) = cartpole_step(
            CartpoleState { x: 0.0, x_dot: 0.0, theta: 0.05, theta_dot: 0.0 },
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(next.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.x_dot, 0.194370546605301, epsilon = 1e-12);
        assert_abs_diff_eq!(next.theta, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(next.theta_dot, -0.2764975752871551, epsilon = 1e-12);
        assert_eq!(reward, 1.0);
        assert!(!done);

        let (next, reward, done) = cartpole_step(
            CartpoleState { x: 0.5, x_dot: -0.3, theta: 0.1, theta_dot: 0.4 },
            -0.7,
        )
        .unwrap();
        assert_abs_diff_eq!(next.x, 0.494, epsilon = 1e-15);
        assert_abs_diff_eq!(next.x_dot, -0.4378938245283194, epsilon = 1e-12);
        assert_abs_diff_eq!(next.theta, 0.10800000000000001, epsilon = 1e-15);
        assert_abs_diff_eq!(next.theta_dot, 0.63515841915186, epsilon = 1e-12);
        assert_eq!(reward, 1.0);
        assert!(!done);
    }

    #[test]
    fn cartpole_reward_fn_matches_step_exactly() {
        let mut rng = rng_from(13);
        for _ in 0..10_000 {
            let state = CartpoleState {
                x: rng.random_range(-3.0..3.0),
                x_dot: rng.random_range(-2.0..2.0),
                theta: rng.random_range(-0.4..0.4),
                theta_dot: rng.random_range(-2.0..2.0),
            };
            let a = rng.random_range(-1.0..1.0);
            let (_, reward, _) = cartpole_step(state, a).unwrap();
            assert_eq!(reward, cartpole_reward(&cartpole_observe(&state), &[a]));
        }
    }

    #[test]
    fn cartpole_reward_fn_threshold_examples() {
        assert_eq!(cartpole_reward(&[0.0, 0.0, 0.3, 0.0], &[0.0]), 0.0);
        assert_eq!(cartpole_reward(&[0.0, 0.0, 0.0, 0.0], &[0.0]), 1.0);
        assert_eq!(cartpole_reward(&[2.5, 0.0, 0.0, 0.0], &[0.0]), 0.0);
    }

    #[test]
    fn cartpole_resets_are_bounded_and_deterministic() {
        let mut env = Cartpole::new();
        let a = env.reset(&mut rng_from(5));
        let b = env.reset(&mut rng_from(5));
        assert_eq!(a, b);
        let mut rng = rng_from(1);
        for _ in 0..10_000 {
            let obs = env.reset(&mut rng);
            assert!(obs.iter().all(|v| v.abs() <= 0.05));
        }
    }

    #[test]
    fn observe_is_identity_for_cartpole() {
        let s = CartpoleState { x: 0.1, x_dot: -0.2, theta: 0.03, theta_dot: 0.5 };
        assert_eq!(cartpole_observe(&s), vec![0.1, -0.2, 0.03, 0.5]);
    }

    #[test]
    fn env_kind_parses() {
        assert_eq!(EnvKind::parse("pendulum").unwrap(), EnvKind::Pendulum);
        assert_eq!(EnvKind::parse("cartpole").unwrap(), EnvKind::Cartpole);
        assert!(EnvKind::parse("walker2d").is_err());
    }
}
