//! Geometry of ellipsoid action sets.
//!
//! An action set is `{ x : ||x - c||_{A^{-1}} <= 1 }` for a positive definite
//! shape matrix `A` and center `c`. The module caches a factor `S` with
//! `S S^T = A` (Cholesky), whose columns are boundary points of the centered
//! set and serve as the round-robin exploration directions. Any factor with
//! `S S^T = A` yields the same design matrix `X^T X = (n/d) A` after complete
//! round-robin blocks, so the cheaper triangular factor is used instead of the
//! symmetric square root.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check at construction.
pub const SYMMETRY_RTOL: f64 = 1e-12;
/// Slack on the squared gauge for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Symmetric positive definite matrix, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix {
    m: DMatrix<f64>,
}

impl PdMatrix {
    /// Validates symmetry (relative tolerance 1e-12) and positive
    /// definiteness (a Cholesky factorization must succeed).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "shape matrix must be square with dimension >= 1".into(),
            ));
        }
        let scale = m.amax();
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        if Cholesky::new(m.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Norm associated to the matrix: `sqrt(u^T M u)`.
    pub fn mnorm(&self, u: &DVector<f64>) -> f64 {
        assert_eq!(u.len(), self.dim(), "mnorm: dimension mismatch");
        // The quadratic form of a PD matrix can round to a tiny negative.
        u.dot(&(&self.m * u)).max(0.0).sqrt()
    }
}

/// Cholesky factor pair of a PD matrix: `(S, (S^-1)^T)` with `S S^T = A`.
pub fn cholesky_factor(a: &PdMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    let chol = Cholesky::new(a.matrix().clone()).expect("validated PD matrix");
    let s = chol.l();
    let d = a.dim();
    let s_inv = s
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .expect("triangular factor of a PD matrix is invertible");
    (s, s_inv.transpose())
}

/// Ellipsoid action set `{ x : ||x - c||_{A^{-1}} <= 1 }`.
///
/// Immutable after construction; safe to share across concurrent episodes.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    a: PdMatrix,
    center: DVector<f64>,
    s: DMatrix<f64>,
    s_inv_t: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(a: PdMatrix, center: DVector<f64>) -> Self {
        assert_eq!(a.dim(), center.len(), "center dimension mismatch");
        let (s, s_inv_t) = cholesky_factor(&a);
        Self {
            a,
            center,
            s,
            s_inv_t,
        }
    }

    pub fn centered(a: PdMatrix) -> Self {
        let d = a.dim();
        Self::new(a, DVector::zeros(d))
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::centered(PdMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// The shape matrix `A`.
    pub fn shape(&self) -> &PdMatrix {
        &self.a
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn is_centered(&self) -> bool {
        self.center.iter().all(|&v| v == 0.0)
    }

    /// Factor `S` with `S S^T = A`; its columns are the exploration directions.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// Cached `(S^-1)^T`.
    pub fn factor_inv_t(&self) -> &DMatrix<f64> {
        &self.s_inv_t
    }

    /// Squared gauge `(x - c)^T A^{-1} (x - c)`, evaluated as `||S^-1 (x-c)||^2`.
    pub fn gauge_sq(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.dim(), "membership: dimension mismatch");
        let diff = x - &self.center;
        self.s_inv_t.tr_mul(&diff).norm_squared()
    }

    /// Membership test with a 1e-9 boundary slack.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.gauge_sq(x) <= 1.0 + MEMBERSHIP_TOL
    }

    /// Reward-maximizing action `c + A theta / ||theta||_A`.
    pub fn optimal_action(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        assert_eq!(theta.len(), self.dim(), "optimal_action: dimension mismatch");
        let norm = self.a.mnorm(theta);
        if norm == 0.0 {
            return Err(Error::ZeroParameter);
        }
        Ok(&self.center + self.a.matrix() * theta / norm)
    }

    /// Best achievable expected reward, `theta^T c + ||theta||_A`.
    pub fn optimal_value(&self, theta: &DVector<f64>) -> Result<f64> {
        let norm = self.a.mnorm(theta);
        if norm == 0.0 {
            return Err(Error::ZeroParameter);
        }
        Ok(theta.dot(&self.center) + norm)
    }

    /// Column `j` of the factor `S` (0-based). Lies on the boundary of the
    /// centered set `{ x : ||x||_{A^{-1}} <= 1 }`.
    pub fn exploration_direction(&self, j: usize) -> DVector<f64> {
        assert!(j < self.dim(), "exploration direction index out of range");
        self.s.column(j).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_row_slice(&[a, b])
    }

    /// Random PD matrix built as L L^T from a random lower-triangular factor
    /// with diagonal bounded away from zero.
    pub(crate) fn random_pd(dim: usize, rng: &mut ChaCha12Rng) -> PdMatrix {
        let mut l = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                l[(i, j)] = if i == j {
                    rng.random_range(0.3..2.0)
                } else {
                    rng.random_range(-1.0..1.0)
                };
            }
        }
        PdMatrix::new(&l * l.transpose()).unwrap()
    }

    #[test]
    fn mnorm_euclidean() {
        let m = PdMatrix::identity(2);
        assert_relative_eq!(m.mnorm(&vec2(3.0, 4.0)), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn mnorm_diagonal_quadratic_form() {
        let m = PdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        assert_relative_eq!(m.mnorm(&vec2(1.0, 1.0)), 5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn mnorm_zero_vector() {
        let m = PdMatrix::identity(4);
        assert_eq!(m.mnorm(&DVector::zeros(4)), 0.0);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn mnorm_rejects_dimension_mismatch() {
        PdMatrix::identity(3).mnorm(&vec2(1.0, 2.0));
    }

    #[test]
    fn pd_matrix_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(PdMatrix::new(m), Err(Error::NotSymmetric)));
    }

    #[test]
    fn pd_matrix_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(PdMatrix::new(m), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn factor_of_identity_is_identity() {
        let (s, s_inv_t) = cholesky_factor(&PdMatrix::identity(3));
        assert_relative_eq!(s, DMatrix::identity(3, 3), max_relative = 1e-14);
        assert_relative_eq!(s_inv_t, DMatrix::identity(3, 3), max_relative = 1e-14);
    }

    #[test]
    fn factor_of_diagonal_is_sqrt() {
        let a = PdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let (s, _) = cholesky_factor(&a);
        assert_relative_eq!(
            s,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            max_relative = 1e-14
        );
    }

    #[test]
    fn factor_reconstructs_random_pd() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_pd(3, &mut rng);
            let (s, s_inv_t) = cholesky_factor(&a);
            let err = (&s * s.transpose() - a.matrix()).amax();
            assert!(err <= 1e-10 * a.matrix().amax());
            let id = (&s * s_inv_t.transpose()).clone_owned();
            assert_abs_diff_eq!(id, DMatrix::identity(3, 3), epsilon = 1e-10);
        }
    }

    #[test]
    fn optimal_action_on_unit_ball() {
        let e = Ellipsoid::unit_ball(2);
        let x = e.optimal_action(&vec2(0.0, 3.0)).unwrap();
        assert_relative_eq!(x, vec2(0.0, 1.0), max_relative = 1e-12);
    }

    #[test]
    fn optimal_action_on_diagonal_ellipsoid() {
        let a = PdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let e = Ellipsoid::centered(a);
        let x = e.optimal_action(&vec2(1.0, 0.0)).unwrap();
        assert_relative_eq!(x, vec2(2.0, 0.0), max_relative = 1e-12);
        assert!(e.contains(&x));
    }

    #[test]
    fn optimal_action_translates_with_center() {
        let a = PdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let e = Ellipsoid::new(a, vec2(5.0, 5.0));
        let x = e.optimal_action(&vec2(1.0, 0.0)).unwrap();
        assert_relative_eq!(x, vec2(7.0, 5.0), max_relative = 1e-12);
    }

    #[test]
    fn optimal_action_rejects_zero_parameter() {
        let e = Ellipsoid::unit_ball(2);
        assert!(matches!(
            e.optimal_action(&DVector::zeros(2)),
            Err(Error::ZeroParameter)
        ));
    }

    #[test]
    fn membership_examples() {
        let ball = Ellipsoid::unit_ball(2);
        assert!(ball.contains(&vec2(1.0, 0.0)));
        assert!(!ball.contains(&vec2(1.1, 0.0)));
        let e = Ellipsoid::centered(PdMatrix::from_diagonal(&[4.0, 1.0]).unwrap());
        assert!(e.contains(&vec2(2.0, 0.0)));
    }

    #[test]
    fn exploration_direction_examples() {
        let e = Ellipsoid::unit_ball(3);
        assert_eq!(
            e.exploration_direction(1),
            DVector::from_row_slice(&[0.0, 1.0, 0.0])
        );
        let d = Ellipsoid::centered(PdMatrix::from_diagonal(&[4.0, 1.0]).unwrap());
        assert_relative_eq!(d.exploration_direction(0), vec2(2.0, 0.0));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn exploration_direction_rejects_bad_index() {
        Ellipsoid::unit_ball(2).exploration_direction(2);
    }

    #[test]
    fn exploration_directions_are_boundary_points() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for dim in 1..=8 {
            let e = Ellipsoid::centered(random_pd(dim, &mut rng));
            for j in 0..dim {
                let x = e.exploration_direction(j);
                assert_abs_diff_eq!(e.gauge_sq(&x), 1.0, epsilon = 1e-9);
            }
        }
    }

    /// Uniform sample from the ellipsoid: scaled Gaussian direction mapped by S.
    fn sample_feasible(e: &Ellipsoid, rng: &mut ChaCha12Rng) -> DVector<f64> {
        let d = e.dim();
        let u = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let r: f64 = rng.random_range(0.0..1.0f64).powf(1.0 / d as f64);
        e.center() + e.factor() * (u.clone() * (r / u.norm()))
    }

    #[test]
    fn optimal_action_dominates_sampled_points() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for dim in 2..=8 {
            let e = Ellipsoid::centered(random_pd(dim, &mut rng));
            let theta =
                DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            let best = theta.dot(&e.optimal_action(&theta).unwrap());
            for _ in 0..1000 {
                let x = sample_feasible(&e, &mut rng);
                assert!(best >= theta.dot(&x) - 1e-9);
            }
        }
    }

    /// Instantaneous-regret curvature bound: when theta^T A u >= 0,
    /// theta^T (x*(theta) - x*(u)) <= ||theta - u||_A^2 / ||theta||_A.
    #[test]
    fn commit_gap_bounded_by_squared_distance() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let mut checked = 0usize;
        for dim in 2..=8 {
            let e = Ellipsoid::centered(random_pd(dim, &mut rng));
            let a = e.shape().matrix().clone();
            while checked < (dim - 1) * 2500 {
                let theta =
                    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
                let u =
                    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
                if theta.dot(&(&a * &u)) < 0.0 || e.shape().mnorm(&theta) == 0.0 {
                    continue;
                }
                let gap = theta.dot(&e.optimal_action(&theta).unwrap())
                    - theta.dot(&e.optimal_action(&u).unwrap());
                let dist = e.shape().mnorm(&(&theta - &u));
                assert!(gap <= dist * dist / e.shape().mnorm(&theta) + 1e-9);
                checked += 1;
            }
        }
        assert!(checked >= 10_000);
    }

    proptest! {
        /// |a - b| >= lambda a implies |a - b| >= lambda / (1 + lambda) b.
        #[test]
        fn relative_error_transfer(a in 0.0..10.0f64, b in 0.0..10.0f64, lambda in 0.0..5.0f64) {
            prop_assume!((a - b).abs() >= lambda * a);
            prop_assert!((a - b).abs() >= lambda / (1.0 + lambda) * b - 1e-12);
        }

        #[test]
        fn gauge_of_scaled_boundary_point(seed in 0u64..500, dim in 1usize..6) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let e = Ellipsoid::centered(random_pd(dim, &mut rng));
            for j in 0..dim {
                let x = e.exploration_direction(j);
                prop_assert!((e.gauge_sq(&x) - 1.0).abs() <= 1e-9);
                prop_assert!(e.contains(&x));
            }
        }
    }
}
