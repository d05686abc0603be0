//! Simulated linear bandit: reward generation, pseudo-regret accounting, and
//! the episode driver.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::policy::Policy;

/// Centered noise with sub-gaussian variance proxy `sigma^2`.
///
/// `Uniform` draws from `[-sigma, sigma]` (not variance-matched) so the proxy
/// contract holds exactly for all three models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    Rademacher { sigma: f64 },
    Uniform { sigma: f64 },
}

impl NoiseModel {
    pub fn sigma(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma }
            | NoiseModel::Rademacher { sigma }
            | NoiseModel::Uniform { sigma } => sigma,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => {
                Normal::new(0.0, sigma).expect("sigma >= 0").sample(rng)
            }
            NoiseModel::Rademacher { sigma } => {
                if rng.random_bool(0.5) {
                    sigma
                } else {
                    -sigma
                }
            }
            NoiseModel::Uniform { sigma } => {
                if sigma == 0.0 {
                    0.0
                } else {
                    rng.random_range(-sigma..=sigma)
                }
            }
        }
    }
}

/// Hidden truth of a bandit problem: parameter vector and noise model.
#[derive(Debug, Clone)]
pub struct BanditInstance {
    theta: DVector<f64>,
    noise: NoiseModel,
}

impl BanditInstance {
    pub fn new(theta: DVector<f64>, noise: NoiseModel) -> Self {
        assert!(noise.sigma() >= 0.0, "noise scale must be nonnegative");
        Self { theta, noise }
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// One reward observation `x^T theta + z`.
    pub fn pull<R: Rng + ?Sized>(&self, x: &DVector<f64>, rng: &mut R) -> f64 {
        assert_eq!(x.len(), self.theta.len(), "pull: dimension mismatch");
        x.dot(&self.theta) + self.noise.sample(rng)
    }
}

/// Gap to the oracle action, `theta^T (x*(theta) - x)`. Nonnegative up to
/// rounding for feasible `x`.
pub fn instantaneous_regret(
    inst: &BanditInstance,
    set: &Ellipsoid,
    x: &DVector<f64>,
) -> Result<f64> {
    assert!(set.contains(x), "instantaneous_regret: infeasible action");
    Ok(set.optimal_value(inst.theta())? - inst.theta().dot(x))
}

/// What the episode driver records per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Every step, with actions and rewards. Memory grows with the horizon.
    Full,
    /// Cumulative regret at steps `{1, 2, 4, ...} ∪ {T}` only; memory O(log T).
    Checkpoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub action: DVector<f64>,
    pub reward: f64,
    pub pseudo_regret: f64,
}

/// Per-episode pseudo-regret record.
///
/// Pseudo-regret is computed from the true parameter, so episode-to-episode
/// variation reflects only the policy's randomness and the noise it observed,
/// not the realized reward noise itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    horizon: usize,
    final_regret: f64,
    checkpoints: Vec<(usize, f64)>,
    steps: Option<Vec<StepRecord>>,
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn final_regret(&self) -> f64 {
        self.final_regret
    }

    /// `(step, cumulative regret)` pairs at the recorded steps (1-based).
    pub fn checkpoints(&self) -> &[(usize, f64)] {
        &self.checkpoints
    }

    /// Per-step records in [`TraceMode::Full`] runs.
    pub fn steps(&self) -> Option<&[StepRecord]> {
        self.steps.as_deref()
    }
}

fn is_checkpoint(step: usize, horizon: usize) -> bool {
    step == horizon || step.is_power_of_two()
}

/// Run one episode of `horizon` steps, verifying feasibility of every action.
///
/// Records the full per-step trace; see [`run_episode_traced`] for the
/// bounded-memory variant.
pub fn run_episode<P, R>(
    policy: &mut P,
    inst: &BanditInstance,
    set: &Ellipsoid,
    horizon: usize,
    rng: &mut R,
) -> Result<RegretTrace>
where
    P: Policy + ?Sized,
    R: Rng + ?Sized,
{
    run_episode_traced(policy, inst, set, horizon, rng, TraceMode::Full)
}

pub fn run_episode_traced<P, R>(
    policy: &mut P,
    inst: &BanditInstance,
    set: &Ellipsoid,
    horizon: usize,
    rng: &mut R,
    mode: TraceMode,
) -> Result<RegretTrace>
where
    P: Policy + ?Sized,
    R: Rng + ?Sized,
{
    assert!(horizon >= 1, "horizon must be at least 1");
    assert_eq!(inst.theta().len(), set.dim(), "instance/set dimension mismatch");
    let optimal = set.optimal_value(inst.theta())?;

    let mut cum = 0.0;
    let mut checkpoints = Vec::new();
    let mut steps = match mode {
        TraceMode::Full => Some(Vec::with_capacity(horizon)),
        TraceMode::Checkpoints => None,
    };
    // Commit-phase actions repeat; skip re-verifying an action identical to
    // the last verified one so the check is O(d) on repeats.
    let mut last_verified: Option<DVector<f64>> = None;

    for t in 0..horizon {
        let action = policy.next_action();
        let repeat = last_verified.as_ref() == Some(&action);
        if !repeat {
            if !set.contains(&action) {
                return Err(Error::PolicyViolation { step: t + 1 });
            }
            last_verified = Some(action.clone());
        }
        let reward = inst.pull(&action, rng);
        policy.observe(reward);

        let regret = optimal - inst.theta().dot(&action);
        cum += regret;
        if is_checkpoint(t + 1, horizon) {
            checkpoints.push((t + 1, cum));
        }
        if let Some(rows) = steps.as_mut() {
            rows.push(StepRecord {
                step: t + 1,
                action,
                reward,
                pseudo_regret: regret,
            });
        }
    }

    Ok(RegretTrace {
        horizon,
        final_regret: cum,
        checkpoints,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipsoid::PdMatrix;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    struct FixedPolicy(DVector<f64>);

    impl Policy for FixedPolicy {
        fn next_action(&mut self) -> DVector<f64> {
            self.0.clone()
        }
        fn observe(&mut self, _reward: f64) {}
    }

    #[test]
    fn noiseless_pull_is_inner_product() {
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[1.0, 2.0]),
            NoiseModel::Gaussian { sigma: 0.0 },
        );
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let y = inst.pull(&DVector::from_row_slice(&[1.0, 1.0]), &mut rng);
        assert_eq!(y, 3.0);
    }

    #[test]
    fn gaussian_pull_mean_is_centered() {
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[0.0, 0.0]),
            NoiseModel::Gaussian { sigma: 1.0 },
        );
        let x = DVector::zeros(2);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| inst.pull(&x, &mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.02, "empirical mean {mean}");
    }

    #[test]
    fn rademacher_support() {
        let noise = NoiseModel::Rademacher { sigma: 2.0 };
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = noise.sample(&mut rng);
            assert!(z == 2.0 || z == -2.0);
        }
    }

    #[test]
    fn all_models_are_centered() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 1_000_000usize;
        for noise in [
            NoiseModel::Gaussian { sigma: 1.5 },
            NoiseModel::Rademacher { sigma: 1.5 },
            NoiseModel::Uniform { sigma: 1.5 },
        ] {
            let mean: f64 = (0..n).map(|_| noise.sample(&mut rng)).sum::<f64>() / n as f64;
            assert!(
                mean.abs() <= 4.0 * 1.5 / 1e3,
                "{noise:?} empirical mean {mean}"
            );
        }
    }

    #[test]
    fn instantaneous_regret_examples() {
        let ball = Ellipsoid::unit_ball(2);
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[1.0, 0.0]),
            NoiseModel::Gaussian { sigma: 0.0 },
        );
        let oracle = ball.optimal_action(inst.theta()).unwrap();
        assert_abs_diff_eq!(
            instantaneous_regret(&inst, &ball, &oracle).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            instantaneous_regret(&inst, &ball, &DVector::from_row_slice(&[-1.0, 0.0])).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            instantaneous_regret(&inst, &ball, &DVector::from_row_slice(&[0.0, 1.0])).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    #[should_panic(expected = "infeasible action")]
    fn instantaneous_regret_rejects_infeasible() {
        let ball = Ellipsoid::unit_ball(2);
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[1.0, 0.0]),
            NoiseModel::Gaussian { sigma: 0.0 },
        );
        let _ = instantaneous_regret(&inst, &ball, &DVector::from_row_slice(&[2.0, 0.0]));
    }

    #[test]
    fn oracle_policy_has_zero_regret() {
        let ball = Ellipsoid::unit_ball(2);
        let theta = DVector::from_row_slice(&[0.6, -0.8]);
        let inst = BanditInstance::new(theta.clone(), NoiseModel::Gaussian { sigma: 0.5 });
        let mut policy = FixedPolicy(ball.optimal_action(&theta).unwrap());
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let trace = run_episode(&mut policy, &inst, &ball, 50, &mut rng).unwrap();
        assert_abs_diff_eq!(trace.final_regret(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn trace_has_horizon_length_and_nonnegative_regret() {
        let set = Ellipsoid::centered(PdMatrix::from_diagonal(&[2.0, 0.5]).unwrap());
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[1.0, 0.0]),
            NoiseModel::Gaussian { sigma: 0.0 },
        );
        let mut policy = FixedPolicy(set.exploration_direction(1));
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let trace = run_episode(&mut policy, &inst, &set, 10, &mut rng).unwrap();
        let steps = trace.steps().unwrap();
        assert_eq!(steps.len(), 10);
        let mut cum = 0.0;
        for row in steps {
            assert!(row.pseudo_regret >= -1e-9);
            cum += row.pseudo_regret;
        }
        assert_abs_diff_eq!(cum, trace.final_regret(), epsilon = 1e-9);
        assert!(trace.final_regret() >= 0.0);
    }

    #[test]
    fn infeasible_policy_aborts_episode() {
        let ball = Ellipsoid::unit_ball(2);
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[1.0, 0.0]),
            NoiseModel::Gaussian { sigma: 0.0 },
        );
        let mut policy = FixedPolicy(DVector::from_row_slice(&[2.0, 0.0]));
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let err = run_episode(&mut policy, &inst, &ball, 10, &mut rng).unwrap_err();
        assert!(matches!(err, Error::PolicyViolation { step: 1 }));
    }

    #[test]
    fn checkpoint_mode_records_geometric_steps() {
        let ball = Ellipsoid::unit_ball(2);
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[1.0, 0.0]),
            NoiseModel::Gaussian { sigma: 0.0 },
        );
        let mut policy = FixedPolicy(DVector::from_row_slice(&[0.0, 1.0]));
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let trace = run_episode_traced(
            &mut policy,
            &inst,
            &ball,
            100,
            &mut rng,
            TraceMode::Checkpoints,
        )
        .unwrap();
        let steps: Vec<usize> = trace.checkpoints().iter().map(|&(s, _)| s).collect();
        assert_eq!(steps, vec![1, 2, 4, 8, 16, 32, 64, 100]);
        assert!(trace.steps().is_none());
        assert_abs_diff_eq!(trace.final_regret(), 100.0, epsilon = 1e-9);
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let ball = Ellipsoid::unit_ball(3);
        let inst = BanditInstance::new(
            DVector::from_row_slice(&[0.3, 0.4, 0.5]),
            NoiseModel::Gaussian { sigma: 1.0 },
        );
        let run = || {
            let mut policy = FixedPolicy(DVector::from_row_slice(&[1.0, 0.0, 0.0]));
            let mut rng = ChaCha12Rng::seed_from_u64(77);
            run_episode(&mut policy, &inst, &ball, 200, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }
}
