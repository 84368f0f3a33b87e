//! Exact tabular MDP machinery.
//!
//! A finite MDP with an `n`-step action delay can be handled two ways:
//!
//! 1. build the delay-augmented MDP over the product space `S × A^n`
//!    ([`augment_finite_mdp`]) and reduce it with a policy to a Markov reward
//!    process the ordinary way ([`recover_mrp`]), or
//! 2. build the delayed reward process directly from the original MDP, the
//!    policy, and the delay ([`recover_damrp`]).
//!
//! Both reductions must produce the same MRP. [`check_theorem1`] constructs
//! both sides symbolically and reports the largest elementwise discrepancy;
//! the equality is exact, so the check runs at tolerances near machine
//! precision rather than sampling trajectories.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, Array3};

const SIMPLEX_TOL: f64 = 1e-12;

/// Explicit tabular MDP `(S, A, rho, p, r)`.
#[derive(Clone, Debug)]
pub struct FiniteMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// Initial state distribution, length `n_states`.
    pub rho: Array1<f64>,
    /// Transition tensor, `p[[s, a, s']] = P(s' | s, a)`.
    pub p: Array3<f64>,
    /// Reward table, `r[[s, a]]`.
    pub r: Array2<f64>,
}

impl FiniteMdp {
    pub fn new(rho: Array1<f64>, p: Array3<f64>, r: Array2<f64>) -> Result<Self> {
        let n_states = rho.len();
        let n_actions = r.ncols();
        if n_states == 0 || n_actions == 0 {
            return Err(Error::contract("MDP needs at least one state and action"));
        }
        if p.shape() != [n_states, n_actions, n_states] || r.nrows() != n_states {
            return Err(Error::dims(format!(
                "p shape {:?} or r shape {:?} inconsistent with |S|={n_states}, |A|={n_actions}",
                p.shape(),
                r.shape()
            )));
        }
        check_simplex(rho.as_slice().unwrap(), "rho")?;
        for s in 0..n_states {
            for a in 0..n_actions {
                let row: Vec<f64> = (0..n_states).map(|s2| p[[s, a, s2]]).collect();
                check_simplex(&row, &format!("p[{s},{a}]"))?;
            }
        }
        Ok(FiniteMdp {
            n_states,
            n_actions,
            rho,
            p,
            r,
        })
    }
}

/// Policy over an (augmented) state space: `probs[[x, a]] = pi(a | x)`.
#[derive(Clone, Debug)]
pub struct FinitePolicy {
    pub probs: Array2<f64>,
}

impl FinitePolicy {
    pub fn new(probs: Array2<f64>) -> Result<Self> {
        for (x, row) in probs.outer_iter().enumerate() {
            check_simplex(row.as_slice().unwrap(), &format!("policy row {x}"))?;
        }
        Ok(FinitePolicy { probs })
    }

    /// Deterministic policy placing mass 1 on `action[x]` for each state.
    pub fn deterministic(n_states: usize, n_actions: usize, actions: &[usize]) -> Result<Self> {
        if actions.len() != n_states {
            return Err(Error::dims("one action index per state required"));
        }
        let mut probs = Array2::zeros((n_states, n_actions));
        for (x, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::contract(format!("action index {a} out of range")));
            }
            probs[[x, a]] = 1.0;
        }
        Ok(FinitePolicy { probs })
    }

    pub fn n_states(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.probs.ncols()
    }
}

/// Markov reward process `(S, rho, kappa, r_bar)`.
#[derive(Clone, Debug)]
pub struct FiniteMrp {
    pub n_states: usize,
    pub rho: Array1<f64>,
    /// State transition matrix, `kappa[[s, s']]`.
    pub kappa: Array2<f64>,
    /// State reward vector.
    pub r_bar: Array1<f64>,
}

fn check_simplex(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|&v| !(0.0..=1.0 + SIMPLEX_TOL).contains(&v)) {
        return Err(Error::contract(format!("{what} has entries outside [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::contract(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

/// Mixed-radix index arithmetic for the augmented space `S × A^n`.
///
/// `index = s * |A|^n + sum_i a_i * |A|^(n-1-i)` with `a_0` the head action
/// (the one executed next). The head is the most significant action digit,
/// so a queue shift is pure index arithmetic.
#[derive(Clone, Copy, Debug)]
pub struct AugmentedIndexer {
    pub n_states: usize,
    pub n_actions: usize,
    pub delay: usize,
}

impl AugmentedIndexer {
    pub fn new(n_states: usize, n_actions: usize, delay: usize) -> Self {
        AugmentedIndexer {
            n_states,
            n_actions,
            delay,
        }
    }

    /// Number of augmented states `|S| * |A|^n`.
    pub fn len(&self) -> usize {
        self.n_states * self.n_actions.pow(self.delay as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, s: usize, queue: &[usize]) -> usize {
        debug_assert_eq!(queue.len(), self.delay);
        let mut idx = s;
        for &a in queue {
            debug_assert!(a < self.n_actions);
            idx = idx * self.n_actions + a;
        }
        idx
    }

    /// Inverse of [`Self::encode`]; returns `(s, queue)` with the head first.
    pub fn decode(&self, mut idx: usize) -> (usize, Vec<usize>) {
        let mut queue = vec![0usize; self.delay];
        for slot in queue.iter_mut().rev() {
            *slot = idx % self.n_actions;
            idx /= self.n_actions;
        }
        (idx, queue)
    }
}

/// Reduces an MDP with a policy to the induced Markov reward process:
/// `kappa[s, s'] = sum_a p[s, a, s'] * pi(a|s)` and
/// `r_bar[s] = sum_a r[s, a] * pi(a|s)`.
pub fn recover_mrp(mdp: &FiniteMdp, policy: &FinitePolicy) -> Result<FiniteMrp> {
    if policy.n_states() != mdp.n_states || policy.n_actions() != mdp.n_actions {
        return Err(Error::dims(format!(
            "policy is {}x{}, MDP needs {}x{}",
            policy.n_states(),
            policy.n_actions(),
            mdp.n_states,
            mdp.n_actions
        )));
    }
    let n = mdp.n_states;
    let mut kappa = Array2::zeros((n, n));
    let mut r_bar = Array1::zeros(n);
    for s in 0..n {
        for a in 0..mdp.n_actions {
            let w = policy.probs[[s, a]];
            r_bar[s] += mdp.r[[s, a]] * w;
            for s2 in 0..n {
                kappa[[s, s2]] += mdp.p[[s, a, s2]] * w;
            }
        }
    }
    Ok(FiniteMrp {
        n_states: n,
        rho: mdp.rho.clone(),
        kappa,
        r_bar,
    })
}

/// Builds the tabular delay-augmented MDP over `S × A^n`.
///
/// The augmented state is `(s, a_0, ..., a_{n-1})` with `a_0` executed next.
/// Transitions move the environment with the head action, shift the queue
/// left, and append the newly chosen action at the tail; the reward is
/// `r(s, a_0)`. The initial distribution puts all queue mass on
/// `init_actions`.
pub fn augment_finite_mdp(mdp: &FiniteMdp, delay: usize, init_actions: &[usize]) -> Result<FiniteMdp> {
    if init_actions.len() != delay {
        return Err(Error::dims(format!(
            "need {delay} initial actions, got {}",
            init_actions.len()
        )));
    }
    if init_actions.iter().any(|&a| a >= mdp.n_actions) {
        return Err(Error::contract("initial action index out of range".to_string()));
    }
    if delay == 0 {
        return Ok(mdp.clone());
    }
    let ix = AugmentedIndexer::new(mdp.n_states, mdp.n_actions, delay);
    let nx = ix.len();
    let na = mdp.n_actions;

    let mut rho = Array1::zeros(nx);
    for s in 0..mdp.n_states {
        rho[ix.encode(s, init_actions)] = mdp.rho[s];
    }

    let mut p = Array3::zeros((nx, na, nx));
    let mut r = Array2::zeros((nx, na));
    for x in 0..nx {
        let (s, queue) = ix.decode(x);
        let head = queue[0];
        let mut shifted = Vec::with_capacity(delay);
        shifted.extend_from_slice(&queue[1..]);
        shifted.push(0); // tail filled per new action below
        for a_new in 0..na {
            *shifted.last_mut().unwrap() = a_new;
            r[[x, a_new]] = mdp.r[[s, head]];
            for s2 in 0..mdp.n_states {
                let x2 = ix.encode(s2, &shifted);
                p[[x, a_new, x2]] = mdp.p[[s, head, s2]];
            }
        }
    }
    FiniteMdp::new(rho, p, r)
}

/// Builds the delayed Markov reward process directly from the original MDP,
/// a policy over the augmented space, and the delay.
///
/// The kernel couples the original dynamics under the head action with the
/// deterministic queue shift and the policy's choice of the new tail action:
/// `kappa(x'|x) = p(s'|s, a_0) * [queues consistent] * pi(a_new | x)` and
/// `r_bar(x) = r(s, a_0)`. For `delay == 0` this is exactly [`recover_mrp`].
pub fn recover_damrp(
    mdp: &FiniteMdp,
    policy: &FinitePolicy,
    delay: usize,
    init_actions: &[usize],
) -> Result<FiniteMrp> {
    if delay == 0 {
        return recover_mrp(mdp, policy);
    }
    if init_actions.len() != delay {
        return Err(Error::dims(format!(
            "need {delay} initial actions, got {}",
            init_actions.len()
        )));
    }
    let ix = AugmentedIndexer::new(mdp.n_states, mdp.n_actions, delay);
    let nx = ix.len();
    if policy.n_states() != nx || policy.n_actions() != mdp.n_actions {
        return Err(Error::dims(format!(
            "policy is {}x{}, augmented space needs {}x{}",
            policy.n_states(),
            policy.n_actions(),
            nx,
            mdp.n_actions
        )));
    }

    let mut rho = Array1::zeros(nx);
    for s in 0..mdp.n_states {
        rho[ix.encode(s, init_actions)] = mdp.rho[s];
    }

    let mut kappa = Array2::zeros((nx, nx));
    let mut r_bar = Array1::zeros(nx);
    let mut next_queue = vec![0usize; delay];
    for x in 0..nx {
        let (s, queue) = ix.decode(x);
        let head = queue[0];
        r_bar[x] = mdp.r[[s, head]];
        next_queue[..delay - 1].copy_from_slice(&queue[1..]);
        for a_new in 0..mdp.n_actions {
            next_queue[delay - 1] = a_new;
            let pi = policy.probs[[x, a_new]];
            for s2 in 0..mdp.n_states {
                let x2 = ix.encode(s2, &next_queue);
                kappa[[x, x2]] = mdp.p[[s, head, s2]] * pi;
            }
        }
    }
    Ok(FiniteMrp {
        n_states: nx,
        rho,
        kappa,
        r_bar,
    })
}

/// Outcome of comparing the two MRP constructions elementwise.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub rho_max_diff: f64,
    pub kappa_max_diff: f64,
    pub r_bar_max_diff: f64,
    pub tol: f64,
}

impl EquivalenceReport {
    pub fn max_diff(&self) -> f64 {
        self.rho_max_diff.max(self.kappa_max_diff).max(self.r_bar_max_diff)
    }

    pub fn passed(&self) -> bool {
        self.max_diff() <= self.tol
    }
}

/// Compares two MRPs elementwise across `rho`, `kappa`, `r_bar`.
pub fn compare_mrps(lhs: &FiniteMrp, rhs: &FiniteMrp, tol: f64) -> Result<EquivalenceReport> {
    if lhs.n_states != rhs.n_states {
        return Err(Error::dims(format!(
            "MRPs have {} vs {} states",
            lhs.n_states, rhs.n_states
        )));
    }
    let max_abs = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max)
    };
    Ok(EquivalenceReport {
        rho_max_diff: max_abs(lhs.rho.as_slice().unwrap(), rhs.rho.as_slice().unwrap()),
        kappa_max_diff: max_abs(lhs.kappa.as_slice().unwrap(), rhs.kappa.as_slice().unwrap()),
        r_bar_max_diff: max_abs(lhs.r_bar.as_slice().unwrap(), rhs.r_bar.as_slice().unwrap()),
        tol,
    })
}

/// Constructs both sides of the delay-augmentation equivalence and reports
/// the largest elementwise difference.
///
/// Left side: reduce the augmented MDP with the policy. Right side: build the
/// delayed reward process directly. The two agree exactly, so any `tol > 0`
/// at or above machine precision passes.
pub fn check_theorem1(
    mdp: &FiniteMdp,
    policy: &FinitePolicy,
    delay: usize,
    init_actions: &[usize],
    tol: f64,
) -> Result<EquivalenceReport> {
    if !(tol > 0.0) {
        return Err(Error::contract("tolerance must be positive"));
    }
    let augmented = augment_finite_mdp(mdp, delay, init_actions)?;
    let via_augmented = recover_mrp(&augmented, policy)?;
    let direct = recover_damrp(mdp, policy, delay, init_actions)?;
    compare_mrps(&via_augmented, &direct, tol)
}

/// Random tabular instances for property checks.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        // Uniform draws normalized; renormalization error stays well under
        // the simplex tolerance.
        let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|v| v / sum).collect()
    }

    pub fn random_mdp(rng: &mut ChaCha8Rng, n_states: usize, n_actions: usize) -> FiniteMdp {
        let rho = Array1::from_vec(random_simplex(rng, n_states));
        let mut p = Array3::zeros((n_states, n_actions, n_states));
        let mut r = Array2::zeros((n_states, n_actions));
        for s in 0..n_states {
            for a in 0..n_actions {
                let row = random_simplex(rng, n_states);
                for (s2, v) in row.into_iter().enumerate() {
                    p[[s, a, s2]] = v;
                }
                r[[s, a]] = rng.random_range(-1.0..1.0);
            }
        }
        FiniteMdp::new(rho, p, r).expect("random tables are valid")
    }

    /// Random stochastic policy over the augmented space `S × A^n`.
    pub fn random_augmented_policy(
        rng: &mut ChaCha8Rng,
        n_states: usize,
        n_actions: usize,
        delay: usize,
    ) -> FinitePolicy {
        let nx = AugmentedIndexer::new(n_states, n_actions, delay).len();
        let mut probs = Array2::zeros((nx, n_actions));
        for x in 0..nx {
            for (a, v) in random_simplex(rng, n_actions).into_iter().enumerate() {
                probs[[x, a]] = v;
            }
        }
        FinitePolicy::new(probs).expect("random rows are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from;
    use ndarray::array;

    fn two_state_mdp() -> FiniteMdp {
        // |S| = 2, |A| = 2; rows chosen to match the hand-computed sums below.
        let rho = array![0.25, 0.75];
        let mut p = Array3::zeros((2, 2, 2));
        // action 0 rows
        p[[0, 0, 0]] = 0.3;
        p[[0, 0, 1]] = 0.7;
        p[[1, 0, 0]] = 0.6;
        p[[1, 0, 1]] = 0.4;
        // action 1 rows
        p[[0, 1, 0]] = 0.9;
        p[[0, 1, 1]] = 0.1;
        p[[1, 1, 0]] = 0.2;
        p[[1, 1, 1]] = 0.8;
        let r = array![[1.0, -1.0], [0.5, 2.0]];
        FiniteMdp::new(rho, p, r).unwrap()
    }

    #[test]
    fn deterministic_policy_collapses_the_mixture() {
        let mdp = two_state_mdp();
        let policy = FinitePolicy::deterministic(2, 2, &[0, 0]).unwrap();
        let mrp = recover_mrp(&mdp, &policy).unwrap();
        assert_eq!(mrp.kappa[[0, 0]], 0.3);
        assert_eq!(mrp.kappa[[0, 1]], 0.7);
        assert_eq!(mrp.kappa[[1, 0]], 0.6);
        assert_eq!(mrp.r_bar[0], 1.0);
        assert_eq!(mrp.r_bar[1], 0.5);
    }

    #[test]
    fn uniform_policy_averages_rows() {
        // Hand sum: 0.5*(0.3,0.7) + 0.5*(0.9,0.1) = (0.6, 0.4).
        let mdp = two_state_mdp();
        let probs = array![[0.5, 0.5], [0.5, 0.5]];
        let policy = FinitePolicy::new(probs).unwrap();
        let mrp = recover_mrp(&mdp, &policy).unwrap();
        assert!((mrp.kappa[[0, 0]] - 0.6).abs() < 1e-15);
        assert!((mrp.kappa[[0, 1]] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn recovered_kappa_rows_are_stochastic() {
        let mut rng = rng_from(11);
        for _ in 0..20 {
            let mdp = random::random_mdp(&mut rng, 4, 3);
            let policy = random::random_augmented_policy(&mut rng, 4, 3, 0);
            let mrp = recover_mrp(&mdp, &policy).unwrap();
            for row in mrp.kappa.outer_iter() {
                let sum: f64 = row.sum();
                assert!((sum - 1.0).abs() < 1e-12, "row sums to {sum}");
            }
        }
    }

    #[test]
    fn recover_mrp_rejects_mismatched_policy() {
        let mdp = two_state_mdp();
        let policy = random::random_augmented_policy(&mut rng_from(0), 2, 2, 1);
        assert!(matches!(
            recover_mrp(&mdp, &policy),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn augment_with_zero_delay_is_identity() {
        let mdp = two_state_mdp();
        let aug = augment_finite_mdp(&mdp, 0, &[]).unwrap();
        assert_eq!(aug.rho, mdp.rho);
        assert_eq!(aug.p, mdp.p);
        assert_eq!(aug.r, mdp.r);
    }

    #[test]
    fn augmented_state_count_is_product_space_cardinality() {
        let mdp = two_state_mdp();
        for n in 0..4 {
            let aug = augment_finite_mdp(&mdp, n, &vec![1; n]).unwrap();
            assert_eq!(aug.n_states, 2 * 2usize.pow(n as u32));
        }
    }

    #[test]
    fn augmented_rows_sum_to_one() {
        let mut rng = rng_from(5);
        let mdp = random::random_mdp(&mut rng, 3, 2);
        let aug = augment_finite_mdp(&mdp, 2, &[0, 1]).unwrap();
        for x in 0..aug.n_states {
            for a in 0..aug.n_actions {
                let sum: f64 = (0..aug.n_states).map(|x2| aug.p[[x, a, x2]]).sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn augmented_reward_is_head_action_reward() {
        let mdp = two_state_mdp();
        let n = 2;
        let aug = augment_finite_mdp(&mdp, n, &[0, 0]).unwrap();
        let ix = AugmentedIndexer::new(2, 2, n);
        for x in 0..aug.n_states {
            let (s, queue) = ix.decode(x);
            for a in 0..aug.n_actions {
                assert_eq!(aug.r[[x, a]], mdp.r[[s, queue[0]]]);
            }
        }
    }

    /// Brute-force enumeration of the n = 1 augmentation over all
    /// (state, pending, new-action) triples.
    #[test]
    fn one_step_augmentation_matches_enumeration() {
        let mdp = two_state_mdp();
        let aug = augment_finite_mdp(&mdp, 1, &[0]).unwrap();
        assert_eq!(aug.n_states, 4);
        let ix = AugmentedIndexer::new(2, 2, 1);
        for s in 0..2 {
            for pending in 0..2 {
                let x = ix.encode(s, &[pending]);
                for a_new in 0..2 {
                    for s2 in 0..2 {
                        for q2 in 0..2 {
                            let x2 = ix.encode(s2, &[q2]);
                            let expected = if q2 == a_new { mdp.p[[s, pending, s2]] } else { 0.0 };
                            assert_eq!(aug.p[[x, a_new, x2]], expected, "x={x} a={a_new} x2={x2}");
                        }
                    }
                    assert_eq!(aug.r[[x, a_new]], mdp.r[[s, pending]]);
                }
            }
        }
        // Initial mass sits on queue = [0].
        for s in 0..2 {
            assert_eq!(aug.rho[ix.encode(s, &[0])], mdp.rho[s]);
            assert_eq!(aug.rho[ix.encode(s, &[1])], 0.0);
        }
    }

    #[test]
    fn damrp_with_zero_delay_equals_recover_mrp() {
        let mdp = two_state_mdp();
        let policy = random::random_augmented_policy(&mut rng_from(3), 2, 2, 0);
        let a = recover_mrp(&mdp, &policy).unwrap();
        let b = recover_damrp(&mdp, &policy, 0, &[]).unwrap();
        assert_eq!(a.kappa, b.kappa);
        assert_eq!(a.r_bar, b.r_bar);
        assert_eq!(a.rho, b.rho);
    }

    #[test]
    fn deterministic_everything_gives_one_hot_kernel_rows() {
        // Deterministic MDP: action a from state s always lands in state a.
        let rho = array![1.0, 0.0];
        let mut p = Array3::zeros((2, 2, 2));
        for s in 0..2 {
            p[[s, 0, 0]] = 1.0;
            p[[s, 1, 1]] = 1.0;
        }
        let r = array![[0.0, 1.0], [2.0, 3.0]];
        let mdp = FiniteMdp::new(rho, p, r).unwrap();
        let n = 2;
        let nx = AugmentedIndexer::new(2, 2, n).len();
        let policy = FinitePolicy::deterministic(nx, 2, &vec![1; nx]).unwrap();
        let mrp = recover_damrp(&mdp, &policy, n, &[0, 0]).unwrap();
        for row in mrp.kappa.outer_iter() {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            assert_eq!(ones, 1);
            assert_eq!(zeros, row.len() - 1);
        }
    }

    #[test]
    fn theorem1_holds_on_seeded_random_instances() {
        let mut rng = rng_from(2024);
        for case in 0..50 {
            let n_states = 2 + (case % 3);
            let n_actions = 2 + (case % 2);
            let delay = case % 4;
            let mdp = random::random_mdp(&mut rng, n_states, n_actions);
            let policy = random::random_augmented_policy(&mut rng, n_states, n_actions, delay);
            let init: Vec<usize> = (0..delay).map(|i| i % n_actions).collect();
            let report = check_theorem1(&mdp, &policy, delay, &init, 1e-12).unwrap();
            assert!(report.passed(), "case {case}: max diff {}", report.max_diff());
        }
    }

    #[test]
    fn zero_delay_check_is_exactly_zero() {
        let mdp = two_state_mdp();
        let policy = random::random_augmented_policy(&mut rng_from(9), 2, 2, 0);
        let report = check_theorem1(&mdp, &policy, 0, &[], 1e-12).unwrap();
        assert_eq!(report.max_diff(), 0.0);
    }

    #[test]
    fn injected_fault_is_detected() {
        let mdp = two_state_mdp();
        let policy = random::random_augmented_policy(&mut rng_from(4), 2, 2, 1);
        let aug = augment_finite_mdp(&mdp, 1, &[0]).unwrap();
        let mut lhs = recover_mrp(&aug, &policy).unwrap();
        let rhs = recover_damrp(&mdp, &policy, 1, &[0]).unwrap();
        lhs.kappa[[1, 2]] += 1e-6;
        let report = compare_mrps(&lhs, &rhs, 1e-12).unwrap();
        assert!(!report.passed());
        assert!((report.kappa_max_diff - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn indexer_round_trips() {
        let ix = AugmentedIndexer::new(3, 2, 3);
        for x in 0..ix.len() {
            let (s, q) = ix.decode(x);
            assert_eq!(ix.encode(s, &q), x);
        }
    }

    #[test]
    fn check_rejects_nonpositive_tolerance() {
        let mdp = two_state_mdp();
        let policy = random::random_augmented_policy(&mut rng_from(0), 2, 2, 0);
        assert!(check_theorem1(&mdp, &policy, 0, &[], 0.0).is_err());
    }
}
