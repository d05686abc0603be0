//! Adaptive explore-then-commit policy for centered ellipsoid action sets.
//!
//! The policy runs three phases:
//!
//! 1. **Warm-up.** Round-robin play of the factor columns in doubling windows
//!    of `d, 2d, 4d, ...` rounds. After window `i` (of `n_i = d 2^{i-1}`
//!    rounds) the least-squares estimate over that window alone is tested
//!    against the threshold `alpha * U(delta_i, n_i)` with
//!    `delta_i = min(d n_i / T, 1)`; the first window whose estimate exceeds
//!    the threshold yields the norm estimate `B = ||theta_hat_i||_A`.
//! 2. **Exploration.** Round-robin play for `N_e = d * ceil(sigma sqrt(T) / B)`
//!    further rounds (at least one block), accumulating a fresh estimate.
//! 3. **Commit.** Greedy play of the oracle action of the phase-2 estimate
//!    until the horizon runs out.
//!
//! If the horizon ends mid-warm-up or mid-exploration the policy keeps playing
//! round-robin and never commits; truncation leaves the regret accounting
//! unchanged. The per-episode state is the accumulator and the cached factors,
//! so memory stays O(d^2) regardless of the horizon.

use std::sync::Arc;

use nalgebra::DVector;

use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::estimation::{confidence_width, ls_from_accumulator, RoundRobinAccumulator};
use crate::policy::{EtcType, Policy};

/// Warm-up subphase schedule: lengths double and the failure probability
/// grows with the subphase index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubphaseSchedule {
    /// Window length `n_i = d 2^{i-1}`.
    pub rounds: usize,
    /// Cumulative warm-up rounds through window `i`: `T_i = d (2^i - 1)`.
    pub cumulative: usize,
    /// Failure probability `delta_i = min(d n_i / T, 1)`.
    pub delta: f64,
}

/// Schedule entry for warm-up subphase `i >= 1`.
pub fn schedule(subphase: usize, dim: usize, horizon: usize) -> SubphaseSchedule {
    assert!(subphase >= 1, "subphases are indexed from 1");
    let rounds = dim
        .checked_mul(1usize << (subphase - 1))
        .expect("subphase window overflows usize");
    let cumulative = dim * ((1usize << subphase) - 1);
    let delta = ((dim * rounds) as f64 / horizon as f64).min(1.0);
    SubphaseSchedule {
        rounds,
        cumulative,
        delta,
    }
}

/// Exploration budget `d * ceil(sigma sqrt(T) / b)`, floored at one complete
/// block so the noiseless case still produces an estimate.
pub fn exploration_budget(dim: usize, sigma: f64, horizon: usize, norm_estimate: f64) -> usize {
    assert!(norm_estimate > 0.0, "norm estimate must be positive");
    let per_coord = (sigma * (horizon as f64).sqrt() / norm_estimate).ceil() as usize;
    dim * per_coord.max(1)
}

/// Inputs of the policy. The action set must be centered; use the reduction
/// wrapper for translated sets.
#[derive(Debug, Clone)]
pub struct E2tcConfig {
    pub alpha: f64,
    pub sigma: f64,
    pub horizon: usize,
    pub set: Arc<Ellipsoid>,
}

impl E2tcConfig {
    pub fn new(alpha: f64, sigma: f64, horizon: usize, set: Arc<Ellipsoid>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidParameter("sigma must be nonnegative".into()));
        }
        if horizon < 1 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if !set.is_centered() {
            return Err(Error::NotCentered);
        }
        Ok(Self {
            alpha,
            sigma,
            horizon,
            set,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E2tcPhase {
    Warmup { subphase: usize },
    Explore,
    Commit,
}

/// The policy state machine. One instance per episode.
#[derive(Debug, Clone)]
pub struct E2tcPolicy {
    cfg: E2tcConfig,
    phase: E2tcPhase,
    step: usize,
    acc: RoundRobinAccumulator,
    warmup_rounds: usize,
    exit_subphase: Option<usize>,
    norm_estimate: Option<f64>,
    explore_budget: Option<usize>,
    explore_done: usize,
    estimate: Option<DVector<f64>>,
    commit_action: Option<DVector<f64>>,
}

impl E2tcPolicy {
    pub fn new(cfg: E2tcConfig) -> Self {
        let dim = cfg.set.dim();
        Self {
            cfg,
            phase: E2tcPhase::Warmup { subphase: 1 },
            step: 0,
            acc: RoundRobinAccumulator::new(dim),
            warmup_rounds: 0,
            exit_subphase: None,
            norm_estimate: None,
            explore_budget: None,
            explore_done: 0,
            estimate: None,
            commit_action: None,
        }
    }

    pub fn config(&self) -> &E2tcConfig {
        &self.cfg
    }

    pub fn phase(&self) -> E2tcPhase {
        self.phase
    }

    /// Rounds observed so far.
    pub fn rounds_observed(&self) -> usize {
        self.step
    }

    /// Length of the completed warm-up (grows until the exit test passes).
    pub fn warmup_rounds(&self) -> usize {
        self.warmup_rounds
    }

    /// Norm estimate fixed at warm-up exit.
    pub fn norm_estimate(&self) -> Option<f64> {
        self.norm_estimate
    }

    /// Index of the warm-up window whose estimate passed the exit test.
    pub fn exit_subphase(&self) -> Option<usize> {
        self.exit_subphase
    }

    /// Exploration budget fixed at warm-up exit.
    pub fn explore_budget(&self) -> Option<usize> {
        self.explore_budget
    }

    /// Phase-2 estimate used by the commit action.
    pub fn estimate(&self) -> Option<&DVector<f64>> {
        self.estimate.as_ref()
    }

    fn dim(&self) -> usize {
        self.cfg.set.dim()
    }
}

impl Policy for E2tcPolicy {
    fn next_action(&mut self) -> DVector<f64> {
        assert!(
            self.step < self.cfg.horizon,
            "policy queried after the horizon"
        );
        match self.phase {
            E2tcPhase::Warmup { .. } | E2tcPhase::Explore => {
                self.cfg.set.exploration_direction(self.step % self.dim())
            }
            E2tcPhase::Commit => self
                .commit_action
                .clone()
                .expect("commit phase implies a commit action"),
        }
    }

    fn observe(&mut self, reward: f64) {
        let dim = self.dim();
        match self.phase {
            E2tcPhase::Warmup { subphase } => {
                self.acc.absorb(self.step % dim, reward);
                self.step += 1;
                self.warmup_rounds += 1;
                let window = schedule(subphase, dim, self.cfg.horizon);
                if self.acc.total_rounds() == window.rounds {
                    let est = ls_from_accumulator(&self.acc, &self.cfg.set)
                        .expect("window lengths are complete blocks");
                    let width =
                        confidence_width(window.delta, window.rounds, self.cfg.sigma, dim);
                    self.acc.reset();
                    if est.anorm > self.cfg.alpha * width {
                        self.exit_subphase = Some(subphase);
                        self.norm_estimate = Some(est.anorm);
                        self.explore_budget = Some(exploration_budget(
                            dim,
                            self.cfg.sigma,
                            self.cfg.horizon,
                            est.anorm,
                        ));
                        self.explore_done = 0;
                        self.phase = E2tcPhase::Explore;
                    } else {
                        self.phase = E2tcPhase::Warmup {
                            subphase: subphase + 1,
                        };
                    }
                }
            }
            E2tcPhase::Explore => {
                self.acc.absorb(self.step % dim, reward);
                self.step += 1;
                self.explore_done += 1;
                if self.explore_done == self.explore_budget.expect("set at warm-up exit") {
                    let est = ls_from_accumulator(&self.acc, &self.cfg.set)
                        .expect("budget is a positive multiple of d");
                    let action = self
                        .cfg
                        .set
                        .optimal_action(&est.theta_hat)
                        .expect("exit test guarantees a nonzero estimate");
                    self.estimate = Some(est.theta_hat);
                    self.commit_action = Some(action);
                    self.phase = E2tcPhase::Commit;
                }
            }
            E2tcPhase::Commit => {
                // Rewards after the commit do not change the action.
                self.step += 1;
            }
        }
    }
}

impl EtcType for E2tcPolicy {
    fn is_committed(&self) -> bool {
        self.phase == E2tcPhase::Commit
    }

    fn commit_action(&self) -> Option<&DVector<f64>> {
        self.commit_action.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{run_episode, BanditInstance, NoiseModel};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn centered_diag(entries: &[f64]) -> Arc<Ellipsoid> {
        Arc::new(Ellipsoid::centered(
            crate::ellipsoid::PdMatrix::from_diagonal(entries).unwrap(),
        ))
    }

    fn policy(alpha: f64, sigma: f64, horizon: usize, set: Arc<Ellipsoid>) -> E2tcPolicy {
        E2tcPolicy::new(E2tcConfig::new(alpha, sigma, horizon, set).unwrap())
    }

    #[test]
    fn schedule_examples() {
        let s1 = schedule(1, 3, 100);
        assert_eq!((s1.rounds, s1.cumulative), (3, 3));
        assert_abs_diff_eq!(s1.delta, 0.09);
        let s2 = schedule(2, 3, 100);
        assert_eq!((s2.rounds, s2.cumulative), (6, 9));
        assert_abs_diff_eq!(s2.delta, 0.18);
        // Clamp once d * n_i reaches the horizon.
        assert_eq!(schedule(4, 3, 70).delta, 1.0);
    }

    #[test]
    fn exploration_budget_arithmetic() {
        assert_eq!(exploration_budget(2, 1.0, 10_000, 1.0), 200);
        assert_eq!(exploration_budget(2, 1.0, 10_000, 3.0), 68);
        // Noiseless floor: one complete block.
        assert_eq!(exploration_budget(5, 0.0, 10_000, 2.0), 5);
        // Large norm estimates keep a single block.
        assert_eq!(exploration_budget(3, 1.0, 100, 1e6), 3);
    }

    #[test]
    fn config_validation() {
        let ball = Arc::new(Ellipsoid::unit_ball(2));
        assert!(E2tcConfig::new(0.0, 1.0, 10, ball.clone()).is_err());
        assert!(E2tcConfig::new(3.0, 1.0, 0, ball.clone()).is_err());
        let shifted = Arc::new(Ellipsoid::new(
            crate::ellipsoid::PdMatrix::identity(2),
            DVector::from_row_slice(&[1.0, 0.0]),
        ));
        assert!(matches!(
            E2tcConfig::new(3.0, 1.0, 10, shifted),
            Err(Error::NotCentered)
        ));
        assert!(E2tcConfig::new(3.0, 1.0, 10, ball).is_ok());
    }

    #[test]
    fn round_robin_order_on_identity() {
        let mut p = policy(3.0, 1.0, 100, Arc::new(Ellipsoid::unit_ball(2)));
        assert_eq!(p.next_action(), DVector::from_row_slice(&[1.0, 0.0]));
        p.observe(0.0);
        assert_eq!(p.next_action(), DVector::from_row_slice(&[0.0, 1.0]));
    }

    #[test]
    fn explore_actions_cycle_factor_columns() {
        let set = centered_diag(&[4.0, 1.0]);
        let mut p = policy(3.0, 1.0, 1000, set);
        for t in 0..8 {
            let a = p.next_action();
            if t % 2 == 0 {
                assert_relative_eq!(a, DVector::from_row_slice(&[2.0, 0.0]));
            } else {
                assert_relative_eq!(a, DVector::from_row_slice(&[0.0, 1.0]));
            }
            p.observe(0.1);
        }
    }

    #[test]
    fn noiseless_run_exits_first_window_and_commits_exactly() {
        let set = centered_diag(&[4.0, 1.0, 0.25]);
        let theta = DVector::from_row_slice(&[0.4, -0.3, 1.1]);
        let horizon = 200;
        let inst = BanditInstance::new(theta.clone(), NoiseModel::Gaussian { sigma: 0.0 });
        let mut p = policy(3.0, 0.0, horizon, set.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let trace = run_episode(&mut p, &inst, &set, horizon, &mut rng).unwrap();

        assert_eq!(p.exit_subphase(), Some(1));
        let norm = set.shape().mnorm(&theta);
        assert_relative_eq!(p.norm_estimate().unwrap(), norm, max_relative = 1e-10);
        assert_eq!(p.explore_budget(), Some(3));
        assert!(p.is_committed());
        assert_relative_eq!(p.estimate().unwrap(), &theta, max_relative = 1e-10);
        let oracle = set.optimal_action(&theta).unwrap();
        assert_relative_eq!(p.commit_action().unwrap(), &oracle, max_relative = 1e-9);
        assert!(trace.final_regret() <= 2.0 * norm * (3 + 3) as f64);
    }

    #[test]
    fn committed_policy_repeats_oracle_of_estimate() {
        let ball = Arc::new(Ellipsoid::unit_ball(2));
        let theta = DVector::from_row_slice(&[0.0, 3.0]);
        let inst = BanditInstance::new(theta.clone(), NoiseModel::Gaussian { sigma: 0.0 });
        let mut p = policy(3.0, 0.0, 50, ball.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        run_episode(&mut p, &inst, &ball, 50, &mut rng).unwrap();
        assert!(p.is_committed());
        for _ in 0..3 {
            assert_relative_eq!(
                p.next_action(),
                DVector::from_row_slice(&[0.0, 1.0]),
                epsilon = 1e-12
            );
            p.observe(123.0);
        }
    }

    #[test]
    fn windows_double_when_threshold_never_passes() {
        // Enormous noise level keeps the threshold out of reach.
        let ball = Arc::new(Ellipsoid::unit_ball(2));
        let mut p = policy(3.0, 1e9, 10_000, ball);
        let mut transitions = Vec::new();
        let mut prev = p.phase();
        for _ in 0..62 {
            let _ = p.next_action();
            p.observe(1.0);
            if p.phase() != prev {
                transitions.push(p.rounds_observed());
                prev = p.phase();
            }
        }
        // Subphase boundaries at cumulative rounds d(2^i - 1) = 2, 6, 14, 30, 62.
        assert_eq!(transitions, vec![2, 6, 14, 30, 62]);
        assert!(!p.is_committed());
    }

    #[test]
    fn horizon_exhaustion_keeps_round_robin() {
        let ball = Arc::new(Ellipsoid::unit_ball(3));
        let mut p = policy(3.0, 1e9, 10, ball.clone());
        for t in 0..10 {
            let a = p.next_action();
            assert_relative_eq!(a, ball.exploration_direction(t % 3));
            p.observe(0.0);
        }
        assert!(!p.is_committed());
        assert_eq!(p.norm_estimate(), None);
    }

    #[test]
    #[should_panic(expected = "after the horizon")]
    fn next_action_after_horizon_panics() {
        let ball = Arc::new(Ellipsoid::unit_ball(2));
        let mut p = policy(3.0, 1.0, 2, ball);
        for _ in 0..2 {
            let _ = p.next_action();
            p.observe(0.0);
        }
        let _ = p.next_action();
    }

    #[test]
    fn action_sequence_is_function_of_rewards() {
        let set = centered_diag(&[2.0, 1.0, 0.5]);
        let rewards: Vec<f64> = (0..300).map(|t| ((t * 37) % 11) as f64 / 3.0 - 1.5).collect();
        let run = |rewards: &[f64]| {
            let mut p = policy(3.0, 0.7, 300, set.clone());
            let mut actions = Vec::new();
            for &y in rewards {
                actions.push(p.next_action());
                p.observe(y);
            }
            actions
        };
        assert_eq!(run(&rewards), run(&rewards));
    }
}
