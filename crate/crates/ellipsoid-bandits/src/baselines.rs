//! Comparison policies.
//!
//! - [`OraclePolicy`]: plays the oracle action of the true parameter (zero
//!   regret control arm).
//! - [`OracleEtcPolicy`]: explore-then-commit given the true norm
//!   `||theta||_A` as input, isolating the cost of estimating it.
//! - [`UniformPolicy`]: uniform random boundary play (no-learning control).
//! - [`OfulBallPolicy`]: optimism on the unit ball. The per-step
//!   argmax-of-norm over the confidence ellipsoid is solved exactly via an
//!   eigendecomposition and a safeguarded one-dimensional root-find, which is
//!   what keeps this baseline polynomial-time; general ellipsoid action sets
//!   have no known tractable equivalent and are out of scope.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::e2tc::exploration_budget;
use crate::ellipsoid::{Ellipsoid, PdMatrix};
use crate::error::{Error, Result};
use crate::estimation::{ls_from_accumulator, RoundRobinAccumulator};
use crate::policy::{EtcType, Policy};

/// Plays a fixed oracle action computed from the true parameter.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    action: DVector<f64>,
}

impl OraclePolicy {
    pub fn new(set: &Ellipsoid, theta: &DVector<f64>) -> Result<Self> {
        Ok(Self {
            action: set.optimal_action(theta)?,
        })
    }
}

impl Policy for OraclePolicy {
    fn next_action(&mut self) -> DVector<f64> {
        self.action.clone()
    }
    fn observe(&mut self, _reward: f64) {}
}

impl EtcType for OraclePolicy {
    fn is_committed(&self) -> bool {
        true
    }
    fn commit_action(&self) -> Option<&DVector<f64>> {
        Some(&self.action)
    }
}

/// Explore-then-commit with the exploration budget computed from the true
/// norm `||theta||_A` instead of a warm-up estimate.
#[derive(Debug, Clone)]
pub struct OracleEtcPolicy {
    set: Arc<Ellipsoid>,
    budget: usize,
    acc: RoundRobinAccumulator,
    step: usize,
    commit: Option<DVector<f64>>,
}

impl OracleEtcPolicy {
    pub fn new(norm_a_theta: f64, sigma: f64, horizon: usize, set: Arc<Ellipsoid>) -> Result<Self> {
        if !(norm_a_theta > 0.0 && norm_a_theta.is_finite()) {
            return Err(Error::InvalidParameter(
                "norm of theta must be positive and finite".into(),
            ));
        }
        if !set.is_centered() {
            return Err(Error::NotCentered);
        }
        let budget = exploration_budget(set.dim(), sigma, horizon, norm_a_theta);
        let acc = RoundRobinAccumulator::new(set.dim());
        Ok(Self {
            set,
            budget,
            acc,
            step: 0,
            commit: None,
        })
    }

    pub fn explore_budget(&self) -> usize {
        self.budget
    }
}

impl Policy for OracleEtcPolicy {
    fn next_action(&mut self) -> DVector<f64> {
        match &self.commit {
            Some(x) => x.clone(),
            None => self.set.exploration_direction(self.step % self.set.dim()),
        }
    }

    fn observe(&mut self, reward: f64) {
        if self.commit.is_some() {
            self.step += 1;
            return;
        }
        self.acc.absorb(self.step % self.set.dim(), reward);
        self.step += 1;
        if self.acc.total_rounds() == self.budget {
            let est = ls_from_accumulator(&self.acc, &self.set)
                .expect("budget is a positive multiple of d");
            match self.set.optimal_action(&est.theta_hat) {
                Ok(action) => self.commit = Some(action),
                // Degenerate all-zero estimate: gather one more block.
                Err(_) => self.budget += self.set.dim(),
            }
        }
    }
}

impl EtcType for OracleEtcPolicy {
    fn is_committed(&self) -> bool {
        self.commit.is_some()
    }
    fn commit_action(&self) -> Option<&DVector<f64>> {
        self.commit.as_ref()
    }
}

/// Plays uniformly random boundary points `c + S u / ||u||`.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    set: Arc<Ellipsoid>,
    rng: ChaCha12Rng,
}

impl UniformPolicy {
    pub fn new(set: Arc<Ellipsoid>, rng: ChaCha12Rng) -> Self {
        Self { set, rng }
    }
}

impl Policy for UniformPolicy {
    fn next_action(&mut self) -> DVector<f64> {
        let d = self.set.dim();
        let mut u = DVector::zeros(d);
        loop {
            for v in u.iter_mut() {
                *v = self.rng.sample(StandardNormal);
            }
            let norm = u.norm();
            if norm > 0.0 {
                return self.set.center() + self.set.factor() * (u / norm);
            }
        }
    }

    fn observe(&mut self, _reward: f64) {}
}

/// Exact maximizer of the Euclidean norm over the confidence ellipsoid
/// `{ theta : ||theta - theta_hat||_V <= beta }`.
///
/// In the eigenbasis of `V` the stationarity condition gives
/// `w_i = h_i / (mu lambda_i - 1)` with the multiplier `mu > 1/lambda_min`
/// fixed by the boundary constraint (a secular equation in `mu`, solved by
/// bisection). When `theta_hat` has no component along the smallest
/// eigenvalue's subspace the constraint may be unreachable from the regular
/// branch; the remaining budget then goes into that subspace directly (the
/// hard case, tie broken deterministically).
pub fn max_norm_over_confidence(
    theta_hat: &DVector<f64>,
    v: &PdMatrix,
    beta: f64,
) -> (DVector<f64>, f64) {
    assert!(beta >= 0.0, "confidence radius must be nonnegative");
    assert_eq!(theta_hat.len(), v.dim(), "dimension mismatch");
    if beta == 0.0 {
        return (theta_hat.clone(), theta_hat.norm());
    }
    let d = v.dim();
    let eigen = SymmetricEigen::new(v.matrix().clone());
    let lambda = &eigen.eigenvalues;
    let q = &eigen.eigenvectors;
    let h = q.tr_mul(theta_hat);

    let lambda_min = lambda.min();
    let min_space = |i: usize| lambda[i] <= lambda_min * (1.0 + 1e-10);
    let h_scale = h.norm();

    // Secular function at multiplier mu, skipping structural zeros.
    let phi = |mu: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            if h[i] != 0.0 {
                let denom = mu * lambda[i] - 1.0;
                s += lambda[i] * h[i] * h[i] / (denom * denom);
            }
        }
        s
    };

    let beta_sq = beta * beta;
    // Limit of phi over eigendirections strictly above lambda_min.
    let mut limit = 0.0;
    let mut h_min_sq = 0.0;
    for i in 0..d {
        if min_space(i) {
            h_min_sq += h[i] * h[i];
        } else {
            let denom = lambda[i] / lambda_min - 1.0;
            limit += lambda[i] * h[i] * h[i] / (denom * denom);
        }
    }

    let hard_case = h_min_sq.sqrt() <= 1e-12 * h_scale.max(1e-300) && limit <= beta_sq;
    let w = if hard_case {
        let mut w = DVector::zeros(d);
        let mut used = 0.0;
        for i in 0..d {
            if !min_space(i) && h[i] != 0.0 {
                w[i] = h[i] / (lambda[i] / lambda_min - 1.0);
                used += lambda[i] * w[i] * w[i];
            }
        }
        // Deterministic tie-break: spend the leftover budget on the first
        // (lowest-index) eigendirection of the smallest eigenvalue.
        let slack = ((beta_sq - used) / lambda_min).max(0.0).sqrt();
        let idx = (0..d).find(|&i| min_space(i)).expect("min eigenvalue exists");
        w[idx] += slack;
        w
    } else {
        let mut lo = (1.0 / lambda_min) * (1.0 + 1e-15);
        let mut hi = (1.0 / lambda_min) * 2.0;
        let mut guard = 0;
        while phi(hi) > beta_sq {
            hi *= 2.0;
            guard += 1;
            assert!(guard < 600, "secular bracket failed to expand");
        }
        for _ in 0..200 {
            if hi - lo <= 1e-12 * lo {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if phi(mid) >= beta_sq {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        DVector::from_fn(d, |i, _| {
            if h[i] == 0.0 {
                0.0
            } else {
                h[i] / (mu * lambda[i] - 1.0)
            }
        })
    };

    let theta_star = theta_hat + q * w;
    let value = theta_star.norm();
    (theta_star, value)
}

/// Optimism-in-the-face-of-uncertainty on the unit ball.
///
/// Maintains the ridge statistics `V_t = lambda I + sum x x^T` and
/// `b_t = sum y x`, and plays the direction of the norm maximizer over the
/// confidence set of radius
/// `beta_t = sigma sqrt(d log((1 + t/lambda)/delta)) + sqrt(lambda) S`.
#[derive(Debug, Clone)]
pub struct OfulBallPolicy {
    set: Arc<Ellipsoid>,
    sigma: f64,
    s_bound: f64,
    lambda: f64,
    delta: f64,
    v: DMatrix<f64>,
    b: DVector<f64>,
    t: usize,
    last_action: Option<DVector<f64>>,
}

impl OfulBallPolicy {
    /// `delta` defaults to `1/horizon`.
    pub fn new(
        sigma: f64,
        horizon: usize,
        s_bound: f64,
        lambda: f64,
        delta: Option<f64>,
        set: Arc<Ellipsoid>,
    ) -> Result<Self> {
        let d = set.dim();
        let is_ball = set.is_centered()
            && (set.shape().matrix() - DMatrix::identity(d, d)).amax() <= 1e-12;
        if !is_ball {
            return Err(Error::UnsupportedActionSet);
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter("lambda must be positive".into()));
        }
        let delta = delta.unwrap_or(1.0 / horizon as f64);
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1]".into()));
        }
        Ok(Self {
            set,
            sigma,
            s_bound,
            lambda,
            delta,
            v: DMatrix::identity(d, d) * lambda,
            b: DVector::zeros(d),
            t: 0,
            last_action: None,
        })
    }

    pub fn radius(&self) -> f64 {
        let d = self.set.dim() as f64;
        self.sigma * (d * ((1.0 + self.t as f64 / self.lambda) / self.delta).ln()).sqrt()
            + self.lambda.sqrt() * self.s_bound
    }

    pub fn ridge_estimate(&self) -> DVector<f64> {
        self.v
            .clone()
            .cholesky()
            .expect("ridge design is positive definite")
            .solve(&self.b)
    }
}

impl Policy for OfulBallPolicy {
    fn next_action(&mut self) -> DVector<f64> {
        let theta_hat = self.ridge_estimate();
        let pd = PdMatrix::new(self.v.clone()).expect("ridge design is positive definite");
        let (theta_star, _) = max_norm_over_confidence(&theta_hat, &pd, self.radius());
        let norm = theta_star.norm();
        let action = if norm <= 1e-12 {
            self.set.exploration_direction(self.t % self.set.dim())
        } else {
            theta_star / norm
        };
        self.last_action = Some(action.clone());
        action
    }

    fn observe(&mut self, reward: f64) {
        let x = self
            .last_action
            .take()
            .expect("observe is preceded by next_action");
        self.v += &x * x.transpose();
        self.b += x * reward;
        self.t += 1;
    }
}
