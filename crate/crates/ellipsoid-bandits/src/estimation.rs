//! Least-squares estimation under the round-robin design.
//!
//! Playing the columns of the factor `S` cyclically makes the design matrix
//! proportional to the shape matrix: after `n = k d` rounds, `X^T X = (n/d) A`
//! and `X^T Y = S s` where `s` holds per-coordinate reward sums. The estimate
//! therefore reduces to `theta_hat = (d/n) S^{-T} s`, which needs O(d) memory
//! per episode on top of the cached factors. A generic QR path over the
//! expanded `(X, Y)` serves as the independent reference.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};

/// Condition-estimate threshold above which a design is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Per-coordinate reward sums under the round-robin design.
///
/// A block is the `d` consecutive rounds playing directions `0..d`. Rewards of
/// an unfinished block are buffered and only folded into the sums when the
/// block completes, so estimates always see a design with `X^T X` proportional
/// to `A` even if the horizon truncates mid-block.
#[derive(Debug, Clone)]
pub struct RoundRobinAccumulator {
    dim: usize,
    sums: DVector<f64>,
    complete_rounds: usize,
    counts: Vec<usize>,
    pending: Vec<f64>,
}

impl RoundRobinAccumulator {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        Self {
            dim,
            sums: DVector::zeros(dim),
            complete_rounds: 0,
            counts: vec![0; dim],
            pending: Vec::with_capacity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate the next absorbed reward must belong to.
    pub fn next_coord(&self) -> usize {
        self.total_rounds() % self.dim
    }

    /// Total rounds absorbed, including a trailing partial block.
    pub fn total_rounds(&self) -> usize {
        self.complete_rounds + self.pending.len()
    }

    /// Rounds belonging to complete blocks (a multiple of `dim`).
    pub fn complete_rounds(&self) -> usize {
        self.complete_rounds
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Per-coordinate sums over complete blocks.
    pub fn sums(&self) -> &DVector<f64> {
        &self.sums
    }

    pub fn absorb(&mut self, coord: usize, reward: f64) {
        assert_eq!(
            coord,
            self.next_coord(),
            "rewards must be absorbed in round-robin order"
        );
        self.pending.push(reward);
        self.counts[coord] += 1;
        if self.pending.len() == self.dim {
            for (j, &y) in self.pending.iter().enumerate() {
                self.sums[j] += y;
            }
            self.complete_rounds += self.dim;
            self.pending.clear();
        }
    }

    pub fn reset(&mut self) {
        self.sums.fill(0.0);
        self.complete_rounds = 0;
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.pending.clear();
    }
}

/// Least-squares estimate with its cached `A`-norm.
#[derive(Debug, Clone)]
pub struct LsEstimate {
    pub theta_hat: DVector<f64>,
    pub n_used: usize,
    pub anorm: f64,
}

/// Least squares over the complete round-robin blocks of `acc`.
///
/// Algebraically equal to [`ls_generic`] on the expanded design because
/// `X^T X = (n/d) A` and `X^T Y = S s`; the `A`-norm of the estimate collapses
/// to `(d/n) ||s||_2`. A trailing partial block is dropped. Errors with
/// [`Error::IncompleteDesign`] when no block has completed.
pub fn ls_from_accumulator(acc: &RoundRobinAccumulator, set: &Ellipsoid) -> Result<LsEstimate> {
    assert_eq!(acc.dim(), set.dim(), "accumulator/set dimension mismatch");
    let n = acc.complete_rounds();
    if n == 0 {
        return Err(Error::IncompleteDesign);
    }
    let scale = acc.dim() as f64 / n as f64;
    let theta_hat = set.factor_inv_t() * acc.sums() * scale;
    let anorm = scale * acc.sums().norm();
    Ok(LsEstimate {
        theta_hat,
        n_used: n,
        anorm,
    })
}

/// Ordinary least squares `(X^T X)^{-1} X^T Y` via a QR factorization of `X`.
///
/// Reference path only; errors with [`Error::SingularDesign`] when the
/// condition estimate from the `R` diagonal exceeds `1e12`.
pub fn ls_generic(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, d) = x.shape();
    assert_eq!(n, y.len(), "ls_generic: row count mismatch");
    if n < d {
        return Err(Error::SingularDesign(f64::INFINITY));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let mut diag_min = f64::INFINITY;
    let mut diag_max: f64 = 0.0;
    for i in 0..d {
        let v = r[(i, i)].abs();
        diag_min = diag_min.min(v);
        diag_max = diag_max.max(v);
    }
    let cond = if diag_min == 0.0 {
        f64::INFINITY
    } else {
        diag_max / diag_min
    };
    if cond > CONDITION_LIMIT {
        return Err(Error::SingularDesign(cond));
    }
    let qty = qr.q().tr_mul(y);
    r.solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign(f64::INFINITY))
}

/// High-probability bound on `||theta_hat - theta||_A` after `n` round-robin
/// samples at failure probability `delta`:
///
/// `U(delta, n)^2 = (sigma^2 d^2 / n) (1 + 2 sqrt(log(1/delta)/d) + 2 log(1/delta)/d)`.
///
/// Monotone decreasing in both `n` and `delta`.
pub fn confidence_width(delta: f64, n: usize, sigma: f64, d: usize) -> f64 {
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    assert!(n >= 1, "n must be at least 1");
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    let log_term = -(delta.ln());
    let df = d as f64;
    let u2 = sigma * sigma * df * df / n as f64
        * (1.0 + 2.0 * (log_term / df).sqrt() + 2.0 * log_term / df);
    u2.sqrt()
}

/// Monte-Carlo tail estimate of the least-squares error under Gaussian noise
/// on the round-robin design:
///
/// `P[ ||theta_hat - theta||^2_{X^T X} >= sigma^2 (d + 2 sqrt(d x) + 2 x) ]`.
///
/// The statistic is invariant to the shape matrix and the true parameter, so
/// the simulation runs on the unit ball with `theta = 0`; each trial goes
/// through the real accumulator and estimator path.
pub fn concentration_tail_estimate<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    sigma: f64,
    x: f64,
    trials: usize,
    rng: &mut R,
) -> f64 {
    assert!(x >= 0.0);
    assert!(n >= d && n % d == 0, "round-robin design needs complete blocks");
    if sigma == 0.0 {
        return 0.0;
    }
    let df = d as f64;
    let threshold = sigma * sigma * (df + 2.0 * (df * x).sqrt() + 2.0 * x);
    let ball = Ellipsoid::unit_ball(d);
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    let mut acc = RoundRobinAccumulator::new(d);
    let mut hits = 0usize;
    for _ in 0..trials {
        acc.reset();
        for t in 0..n {
            acc.absorb(t % d, normal.sample(rng));
        }
        let est = ls_from_accumulator(&acc, &ball).expect("complete blocks");
        let stat = n as f64 / df * est.anorm * est.anorm;
        if stat >= threshold {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}
