//! Translation wrapper for explore-then-commit policies.
//!
//! An ETC-type policy for a centered set `X` becomes a policy for `c + X`:
//! each inner exploration round is realized as two outer rounds, playing the
//! reference point `c` and then `c + x~`. Feeding the inner policy the
//! difference of the two rewards reproduces a linear bandit observation of
//! `x~` whose noise is the difference of two independent draws, so the inner
//! policy is tuned with variance proxy `2 sigma^2` and horizon `floor(T/2)`.
//! Once the inner policy commits the wrapper plays `c + x_commit` every
//! remaining round. The oracle action is equivariant under translation, so
//! the commit error is unchanged.

use std::sync::Arc;

use nalgebra::DVector;

use crate::e2tc::{E2tcConfig, E2tcPolicy};
use crate::ellipsoid::Ellipsoid;
use crate::error::Result;
use crate::policy::{EtcType, Policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairStep {
    Center,
    Shifted,
}

/// Policy for `c + X` built from an ETC-type policy for `X`.
#[derive(Debug, Clone)]
pub struct Translated<P> {
    inner: P,
    inner_horizon: usize,
    inner_rounds: usize,
    center: DVector<f64>,
    step: PairStep,
    cached_inner_action: Option<DVector<f64>>,
    pending_reward: Option<f64>,
    committed: Option<DVector<f64>>,
}

impl<P: EtcType> Translated<P> {
    /// `inner` must be tuned with variance proxy `2 sigma^2` and horizon
    /// `inner_horizon = floor(T/2)`; see [`Translated::e2tc`] for the wired-up
    /// construction.
    pub fn new(inner: P, center: DVector<f64>, inner_horizon: usize) -> Self {
        Self {
            inner,
            inner_horizon,
            inner_rounds: 0,
            center,
            step: PairStep::Center,
            cached_inner_action: None,
            pending_reward: None,
            committed: None,
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    fn latch_commit(&mut self) -> DVector<f64> {
        let x = self
            .inner
            .commit_action()
            .expect("committed inner policy has a commit action")
            .clone();
        let outer = &self.center + x;
        self.committed = Some(outer.clone());
        outer
    }
}

impl Translated<E2tcPolicy> {
    /// Adaptive explore-then-commit on an arbitrary ellipsoid: the inner
    /// policy runs on the centered copy of `set` with noise level
    /// `sqrt(2) sigma` and horizon `floor(T/2)`.
    pub fn e2tc(alpha: f64, sigma: f64, horizon: usize, set: &Ellipsoid) -> Result<Self> {
        let centered = Arc::new(Ellipsoid::centered(set.shape().clone()));
        let inner_horizon = (horizon / 2).max(1);
        let cfg = E2tcConfig::new(alpha, sigma * 2f64.sqrt(), inner_horizon, centered)?;
        Ok(Self::new(
            E2tcPolicy::new(cfg),
            set.center().clone(),
            inner_horizon,
        ))
    }
}

impl<P: EtcType> Policy for Translated<P> {
    fn next_action(&mut self) -> DVector<f64> {
        if let Some(x) = &self.committed {
            return x.clone();
        }
        match self.step {
            PairStep::Center => {
                if self.inner.is_committed() {
                    return self.latch_commit();
                }
                if self.inner_rounds >= self.inner_horizon {
                    // Inner horizon exhausted without a commit: the reference
                    // point is always feasible.
                    return self.center.clone();
                }
                self.cached_inner_action = Some(self.inner.next_action());
                self.center.clone()
            }
            PairStep::Shifted => {
                &self.center
                    + self
                        .cached_inner_action
                        .as_ref()
                        .expect("shifted step follows a buffered center step")
            }
        }
    }

    fn observe(&mut self, reward: f64) {
        if self.committed.is_some() {
            return;
        }
        match self.step {
            PairStep::Center => {
                if self.inner.is_committed() || self.inner_rounds >= self.inner_horizon {
                    return;
                }
                self.pending_reward = Some(reward);
                self.step = PairStep::Shifted;
            }
            PairStep::Shifted => {
                let first = self
                    .pending_reward
                    .take()
                    .expect("shifted step follows a buffered center step");
                // y_{2t} - y_{2t-1} = theta^T x~ + (z_{2t} - z_{2t-1}).
                self.inner.observe(reward - first);
                self.inner_rounds += 1;
                self.cached_inner_action = None;
                self.step = PairStep::Center;
            }
        }
    }
}

impl<P: EtcType> EtcType for Translated<P> {
    fn is_committed(&self) -> bool {
        self.committed.is_some() || self.inner.is_committed()
    }

    fn commit_action(&self) -> Option<&DVector<f64>> {
        self.committed.as_ref()
    }
}
