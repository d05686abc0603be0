//! Hard-instance generators for adversarial evaluation.
//!
//! [`AssouadFamily`] builds `2^d` parameter vectors on the sphere
//! `||theta||_A = B` around a base parameter, spread by a sign pattern in a
//! subspace orthogonal to both the base direction and the action-set center
//! (in whitened coordinates). Distinguishing the sign of any coordinate costs
//! either exploration or commit error, which is what makes the family hard.
//! The ambient dimension `D` reserves two coordinates for the base direction
//! and the center, leaving `d = D - 2` sign coordinates.
//!
//! [`GaussianPrior`] samples parameters with covariance `(B^2/d) A^{-1}`, so
//! the whitened parameter is isotropic and `E ||theta||_A^2 = B^2` exactly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::ellipsoid::{cholesky_factor, PdMatrix};
use crate::error::{Error, Result};

/// Seed for the deterministic completion of the orthonormal basis.
const BASIS_COMPLETION_SEED: u64 = 0x5eed_ba51u64;

/// Family of `2^d` parameters on the sphere `||theta||_A = B`.
#[derive(Debug, Clone)]
pub struct AssouadFamily {
    ambient_dim: usize,
    sign_dim: usize,
    radius: f64,
    eps: f64,
    kl_budget: f64,
    /// Orthonormal basis of whitened space, columns `[e_1..e_d, e_{d+1}, e_{d+2}]`.
    basis: DMatrix<f64>,
    s_inv_t: DMatrix<f64>,
    theta_base: DVector<f64>,
}

/// Gram-Schmidt a candidate against accepted columns; returns the normalized
/// residual when it is numerically independent.
fn orthogonalize(candidate: &DVector<f64>, accepted: &[DVector<f64>]) -> Option<DVector<f64>> {
    let mut v = candidate.clone();
    for e in accepted {
        let proj = e.dot(&v);
        v -= e * proj;
    }
    let norm = v.norm();
    if norm <= 1e-10 * candidate.norm().max(1.0) {
        None
    } else {
        Some(v / norm)
    }
}

impl AssouadFamily {
    /// Build the family around `theta_base` (which must satisfy
    /// `||theta_base||_A = radius` to 1e-9) for an action set with shape `a`
    /// and center `c`, at noise level `sigma` and horizon `horizon`.
    pub fn build(
        theta_base: &DVector<f64>,
        radius: f64,
        horizon: usize,
        sigma: f64,
        a: &PdMatrix,
        c: &DVector<f64>,
    ) -> Result<Self> {
        let ambient = theta_base.len();
        if ambient < 3 {
            return Err(Error::InvalidParameter(
                "ambient dimension must be at least 3".into(),
            ));
        }
        assert_eq!(a.dim(), ambient, "shape matrix dimension mismatch");
        assert_eq!(c.len(), ambient, "center dimension mismatch");
        if theta_base.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroParameter);
        }
        let base_norm = a.mnorm(theta_base);
        if (base_norm - radius).abs() > 1e-9 * radius.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "||theta_base||_A = {base_norm} does not match the requested radius {radius}"
            )));
        }

        let (s, s_inv_t) = cholesky_factor(a);
        let sign_dim = ambient - 2;

        // Whitened images: the base direction and the center.
        let base_image = s.tr_mul(theta_base) / base_norm;
        let center_image = s_inv_t.tr_mul(c);

        let mut tail = vec![base_image];
        let mut rng = ChaCha12Rng::seed_from_u64(BASIS_COMPLETION_SEED);
        let second = orthogonalize(&center_image, &tail).unwrap_or_else(|| {
            // Center is zero or parallel to the base direction: complete with
            // a deterministic seeded draw.
            loop {
                let g = DVector::from_fn(ambient, |_, _| rng.sample::<f64, _>(StandardNormal));
                if let Some(e) = orthogonalize(&g, &tail) {
                    break e;
                }
            }
        });
        tail.push(second);

        let mut sign_cols: Vec<DVector<f64>> = Vec::with_capacity(sign_dim);
        while sign_cols.len() < sign_dim {
            let g = DVector::from_fn(ambient, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut accepted: Vec<DVector<f64>> = sign_cols.clone();
            accepted.extend_from_slice(&tail);
            if let Some(e) = orthogonalize(&g, &accepted) {
                sign_cols.push(e);
            }
        }

        let mut basis = DMatrix::zeros(ambient, ambient);
        for (j, e) in sign_cols.iter().chain(tail.iter()).enumerate() {
            basis.column_mut(j).copy_from(e);
        }

        let (kl_budget, eps) = if sigma == 0.0 {
            (0.5 / 2f64.sqrt(), 0.0)
        } else {
            let df = sign_dim as f64;
            let root_2t = (2.0 * horizon as f64).sqrt();
            let kl_budget = (0.5 / 2f64.sqrt()).min(radius * root_2t / (sigma * df));
            let eps = (df * sigma * kl_budget / (radius * root_2t)).min(1.0);
            (kl_budget, eps)
        };

        Ok(Self {
            ambient_dim: ambient,
            sign_dim,
            radius,
            eps,
            kl_budget,
            basis,
            s_inv_t,
            theta_base: theta_base.clone(),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of sign coordinates (`ambient_dim - 2`).
    pub fn sign_dim(&self) -> usize {
        self.sign_dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Spread of the sign coordinates.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Per-coordinate information budget.
    pub fn kl_budget(&self) -> f64 {
        self.kl_budget
    }

    pub fn theta_base(&self) -> &DVector<f64> {
        &self.theta_base
    }

    /// Orthonormal basis of whitened space (columns).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Family member for a sign pattern: the whitened vector
    /// `B [ sqrt(1-eps^2) e_{d+1} + (eps/sqrt(d)) sum_i xi_i e_i ]` mapped
    /// back through the factor.
    pub fn theta(&self, xi: &[i8]) -> DVector<f64> {
        assert_eq!(xi.len(), self.sign_dim, "sign pattern length mismatch");
        assert!(
            xi.iter().all(|&s| s == 1 || s == -1),
            "sign entries must be +1 or -1"
        );
        let mut phi = self.basis.column(self.sign_dim).into_owned()
            * (1.0 - self.eps * self.eps).max(0.0).sqrt();
        let spread = self.eps / (self.sign_dim as f64).sqrt();
        for (i, &s) in xi.iter().enumerate() {
            phi += self.basis.column(i) * (s as f64 * spread);
        }
        &self.s_inv_t * phi * self.radius
    }

    /// All `2^d` sign patterns in lexicographic order.
    pub fn sign_patterns(&self) -> impl Iterator<Item = Vec<i8>> + '_ {
        let d = self.sign_dim;
        (0..1usize << d).map(move |mask| {
            (0..d)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect()
        })
    }
}

/// Flip coordinate `i` of a sign pattern.
pub fn flip_coordinate(xi: &[i8], i: usize) -> Vec<i8> {
    assert!(i < xi.len(), "flip index out of range");
    let mut out = xi.to_vec();
    out[i] = -out[i];
    out
}

/// Prior with covariance `(B^2/d) A^{-1}`.
#[derive(Debug, Clone)]
pub struct GaussianPrior {
    radius: f64,
    dim: usize,
    s_inv_t: DMatrix<f64>,
}

impl GaussianPrior {
    pub fn new(radius: f64, a: &PdMatrix) -> Self {
        let (_, s_inv_t) = cholesky_factor(a);
        Self {
            radius,
            dim: a.dim(),
            s_inv_t,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let g = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.s_inv_t * g * (self.radius / (self.dim as f64).sqrt())
    }
}
