//! Policy interface consumed by the episode driver.

use nalgebra::DVector;

/// A sequential decision rule. The driver alternates `next_action` and
/// `observe`; policy state advances only in `observe`.
pub trait Policy {
    /// Action for the current round.
    fn next_action(&mut self) -> DVector<f64>;

    /// Absorb the reward of the action just played.
    fn observe(&mut self, reward: f64);
}

/// Explore-then-commit structure: after some (data-dependent) round the policy
/// plays one fixed action forever. Required by the translation wrapper for
/// non-centered action sets.
pub trait EtcType: Policy {
    fn is_committed(&self) -> bool;

    /// The action played forever once committed.
    fn commit_action(&self) -> Option<&DVector<f64>>;
}
