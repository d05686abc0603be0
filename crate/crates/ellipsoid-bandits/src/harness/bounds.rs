//! Closed-form regret and warm-up bounds used by the report generator.

/// `1 + log(max(x, 1))`.
pub fn logbar(x: f64) -> f64 {
    1.0 + x.max(1.0).ln()
}

/// Regret bound for the adaptive policy (threshold multiplier 3) on a
/// centered set:
///
/// `6 d sigma sqrt(T) + (984 sigma^2 d^2 / B) logbar(T B^2 / (sigma^2 d^2))
///  + 290 d B + 2 T B exp((2d/3 - (2/9) sqrt(T) B / sigma)^-)`
///
/// where `B = ||theta||_A` and `(.)^-` is `min(., 0)`. The noiseless case
/// degenerates to the exploration-only bound `2 d B`.
pub fn theorem3_rhs(d: usize, sigma: f64, horizon: usize, norm: f64) -> f64 {
    assert!(norm > 0.0, "norm must be positive");
    let df = d as f64;
    if sigma == 0.0 {
        return 2.0 * df * norm;
    }
    let t = horizon as f64;
    let exponent = (2.0 * df / 3.0 - 2.0 / 9.0 * t.sqrt() * norm / sigma).min(0.0);
    6.0 * df * sigma * t.sqrt()
        + 984.0 * sigma * sigma * df * df / norm * logbar(t * norm * norm / (sigma * sigma * df * df))
        + 290.0 * df * norm
        + 2.0 * t * norm * exponent.exp()
}

/// Regret bound for the translated (paired-play) variant on an arbitrary
/// ellipsoid:
///
/// `7 d sigma sqrt(T) + (2622 sigma^2 d^2 / B) logbar(T B^2 / (4 sigma^2 d^2))
///  + 2 T B exp((2d/3 - (1/9) sqrt(T) B / sigma)^-) + 392 d B`.
pub fn theorem4_rhs(d: usize, sigma: f64, horizon: usize, norm: f64) -> f64 {
    assert!(norm > 0.0, "norm must be positive");
    let df = d as f64;
    if sigma == 0.0 {
        return 2.0 * df * norm;
    }
    let t = horizon as f64;
    let exponent = (2.0 * df / 3.0 - 1.0 / 9.0 * t.sqrt() * norm / sigma).min(0.0);
    7.0 * df * sigma * t.sqrt()
        + 2622.0 * sigma * sigma * df * df / norm
            * logbar(t * norm * norm / (4.0 * sigma * sigma * df * df))
        + 2.0 * t * norm * exponent.exp()
        + 392.0 * df * norm
}

/// Bound on the probability that the warm-up norm estimate lands outside
/// `[B/2, 3B/2]` (threshold multiplier 3):
///
/// `(164 sigma^2 d^2 / (T B^2)) logbar(T B^2 / (d^2 sigma^2)) + 48 d / T`.
pub fn lemma3_prob_rhs(d: usize, sigma: f64, horizon: usize, norm: f64) -> f64 {
    assert!(norm > 0.0, "norm must be positive");
    if sigma == 0.0 {
        return 48.0 * d as f64 / horizon as f64;
    }
    let df = d as f64;
    let t = horizon as f64;
    164.0 * sigma * sigma * df * df / (t * norm * norm)
        * logbar(t * norm * norm / (df * df * sigma * sigma))
        + 48.0 * df / t
}

/// Bound on the expected warm-up length (threshold multiplier 3):
///
/// `(164 sigma^2 d^2 / B^2) logbar(T B^2 / (sigma^2 d^2)) + 48 d`.
pub fn lemma3_length_rhs(d: usize, sigma: f64, horizon: usize, norm: f64) -> f64 {
    assert!(norm > 0.0, "norm must be positive");
    if sigma == 0.0 {
        return 48.0 * d as f64;
    }
    let df = d as f64;
    let t = horizon as f64;
    164.0 * sigma * sigma * df * df / (norm * norm)
        * logbar(t * norm * norm / (sigma * sigma * df * df))
        + 48.0 * df
}
