//! Linear stochastic bandits over ellipsoid action sets.
//!
//! The library provides:
//!
//! - [`ellipsoid`]: geometry of the action set (norms, Cholesky factor,
//!   membership, oracle action, exploration directions);
//! - [`environment`]: simulated bandit instances, sub-gaussian noise models,
//!   and the episode driver with pseudo-regret accounting;
//! - [`estimation`]: O(d)-memory least squares under the round-robin design,
//!   the confidence width used by the warm-up test, and concentration probes;
//! - [`e2tc`]: the adaptive explore-then-commit policy — a norm-estimating
//!   warm-up with doubling subphases, a fixed exploration phase sized by the
//!   norm estimate, and a greedy commit;
//! - [`reduction`]: wrapper turning any explore-then-commit policy for a
//!   centered set into one for a translated set via paired plays and
//!   differenced rewards;
//! - [`baselines`]: oracle-norm ETC, uniform random play, and a unit-ball
//!   optimistic baseline with an exact confidence-set subproblem solver;
//! - [`lowerbound`]: generators for sign-pattern hard-instance families and a
//!   matched Gaussian prior for adversarial evaluation;
//! - [`harness`]: config-driven seeded Monte-Carlo experiments with CSV/JSON
//!   output, closed-form bound reports, and runtime probes.
//!
//! Start with the runnable programs under `examples/`.

pub mod ellipsoid;
pub mod environment;
pub mod error;
pub mod estimation;
pub mod policy;

pub use ellipsoid::{Ellipsoid, PdMatrix};
pub use environment::{BanditInstance, NoiseModel, RegretTrace, TraceMode};
pub use error::{Error, Result};
pub use policy::{EtcType, Policy};
