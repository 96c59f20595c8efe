//! Projection onto the hyperbolic epigraph `{(x, y) : y ≥ 1/x > 0}`.
//!
//! For `p = (a, b)` outside the set the nearest point is `(t, 1/t)` where `t`
//! is the unique positive root of the stationarity polynomial
//! `t⁴ − a t³ + b t − 1`. The polynomial is −1 at the origin and tends to +∞,
//! so the root is bracketed by doubling an upper end point and then refined
//! with Newton steps that fall back to bisection whenever they leave the
//! bracket.

use crate::error::Result;
use crate::scalar::Real;
use crate::vector::Vector;

const MAX_REFINEMENT_STEPS: usize = 200;

/// Membership test; `x` must exceed the smallest normal double so `1/x` is finite.
pub fn in_hyperbola_epigraph<S: Real>(x: S, y: S) -> bool {
    x > S::lit(1e-308).max(S::min_positive_value()) && y >= S::one() / x
}

pub fn project_hyperbola_epigraph<S: Real>(p: &Vector<S>) -> Result<Vector<S>> {
    p.check_dim(2)?;
    let (a, b) = (p[0], p[1]);
    if in_hyperbola_epigraph(a, b) {
        return Ok(p.clone());
    }
    let t = stationarity_root(a, b);
    Ok(Vector::from_raw(vec![t, S::one() / t]))
}

fn quartic<S: Real>(t: S, a: S, b: S) -> (S, S, S) {
    let t2 = t * t;
    let t3 = t2 * t;
    let value = t3 * t - a * t3 + b * t - S::one();
    let slope = S::lit(4.0) * t3 - S::lit(3.0) * a * t2 + b;
    let scale = t3 * t + a.abs() * t3 + b.abs() * t + S::one();
    (value, slope, scale)
}

/// Positive root of `t⁴ − a t³ + b t − 1`, refined until the relative
/// residual is at most `1e-12` (or the bracket collapses to a few ulps).
pub fn stationarity_root<S: Real>(a: S, b: S) -> S {
    let residual_tol = S::tol(1e-12);
    let mut lo = S::zero();
    let mut hi = S::one();
    while quartic(hi, a, b).0 <= S::zero() {
        lo = hi;
        hi = hi + hi;
    }
    // the root sits near `a` when p is far to the right of the curve
    let mut t = if a > lo && a < hi { a } else { S::lit(0.5) * (lo + hi) };
    for _ in 0..MAX_REFINEMENT_STEPS {
        let (value, slope, scale) = quartic(t, a, b);
        if value.abs() <= residual_tol * scale {
            return t;
        }
        if value < S::zero() {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= S::lit(4.0) * S::epsilon() * hi {
            return S::lit(0.5) * (lo + hi);
        }
        let newton = t - value / slope;
        t = if slope > S::zero() && newton > lo && newton < hi {
            newton
        } else {
            S::lit(0.5) * (lo + hi)
        };
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(a: f64, b: f64, mut lo: f64, mut hi: f64) -> f64 {
        let f = |t: f64| t.powi(4) - a * t.powi(3) + b * t - 1.0;
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn boundary_point_is_fixed() {
        let p = Vector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(project_hyperbola_epigraph(&p).unwrap(), p);
    }

    #[test]
    fn origin_projects_to_vertex() {
        let q = project_hyperbola_epigraph(&Vector::<f64>::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-12 && (q[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_bisection_root_in_known_bracket() {
        let expected = bisect(2.0, 0.1, 2.0, 2.2);
        let q = project_hyperbola_epigraph(&Vector::new(vec![2.0, 0.1]).unwrap()).unwrap();
        assert!((q[0] - expected).abs() < 1e-12);
        assert!((q[1] - 1.0 / expected).abs() < 1e-12);
    }

    #[test]
    fn negative_quadrant_and_far_points() {
        for (a, b) in [(-5.0f64, -5.0f64), (-5.0, 5.0), (5.0, -5.0), (1e3, 0.0), (1e-3, 1.0)] {
            let t = stationarity_root(a, b);
            let f = t.powi(4) - a * t.powi(3) + b * t - 1.0;
            let scale = t.powi(4) + a.abs() * t.powi(3) + b.abs() * t + 1.0;
            assert!(t > 0.0);
            assert!(f.abs() <= 1e-12 * scale, "({a},{b}) residual {f}");
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        assert!(project_hyperbola_epigraph(&Vector::new(vec![1.0, 2.0, 3.0]).unwrap()).is_err());
    }

    #[test]
    fn single_precision() {
        let q = project_hyperbola_epigraph(&Vector::new(vec![0.0f32, 0.0]).unwrap()).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-5);
    }
}
