//! Standard normal tail `Q(x)` and its inverse.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// `Q(x) = Pr[Z > x]` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// The `x` with `Q(x) = eps`, by bisection on the monotone tail.
pub fn q_inv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("q_inv needs 0 < eps < 1, got {eps}")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_zero() {
        assert!(q_inv(0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_endpoints() {
        assert!(q_inv(0.0).is_err());
        assert!(q_inv(1.0).is_err());
    }
}
