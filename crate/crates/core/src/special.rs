//! Incomplete gamma quantile.

use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(a, x)
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(a, x)
}

/// Inverse of `P(a, .)`: the `x` with `P(a, x) = prob`, by bisection.
pub fn gamma_p_inv(a: f64, prob: f64) -> f64 {
    assert!(a > 0.0, "shape must be positive");
    assert!((0.0..1.0).contains(&prob), "probability must lie in [0, 1)");
    if prob == 0.0 {
        return 0.0;
    }
    let mut hi = a.max(1.0);
    while gamma_p(a, hi) < prob {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_p(a, mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Quantile of a chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_quantile(dof: f64, prob: f64) -> f64 {
    2.0 * gamma_p_inv(0.5 * dof, prob)
}
