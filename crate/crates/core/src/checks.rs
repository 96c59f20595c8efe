//! Sampling-based certificates for operator classes.
//!
//! Each checker draws seeded pairs `(x, y)` from a cube and records the
//! worst signed margin of the defining inequality; a pair counts as a
//! violation when the margin drops below `-1e-10`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::operator::OperatorExpr;
use crate::sampling::{seeded, uniform_vector};
use crate::scalar::Real;
use crate::vector::Vector;

pub const VIOLATION_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport<S> {
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed margin; negative values indicate violations.
    pub worst_margin: S,
}

impl<S: Real> ClassReport<S> {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn sample_margins<S: Real>(
    op: &OperatorExpr<S>,
    sample_count: usize,
    seed: u64,
    box_radius: f64,
    margin: impl Fn(&Vector<S>, &Vector<S>, &Vector<S>, &Vector<S>) -> S,
) -> Result<ClassReport<S>> {
    let mut rng = seeded(seed);
    let tol = S::lit(VIOLATION_TOLERANCE);
    let mut violations = 0;
    let mut worst = S::infinity();
    for _ in 0..sample_count {
        let x: Vector<S> = uniform_vector(&mut rng, op.dim(), box_radius);
        let y: Vector<S> = uniform_vector(&mut rng, op.dim(), box_radius);
        let tx = op.apply(&x)?;
        let ty = op.apply(&y)?;
        let m = margin(&x, &y, &tx, &ty);
        if m < -tol || m.is_nan() {
            violations += 1;
        }
        worst = worst.min(m);
    }
    Ok(ClassReport {
        samples: sample_count,
        violations,
        worst_margin: worst,
    })
}

/// Margin of `‖Tx − Ty‖² ≤ ⟨x − y, Tx − Ty⟩`.
pub fn check_firm_nonexpansive<S: Real>(
    op: &OperatorExpr<S>,
    sample_count: usize,
    seed: u64,
    box_radius: f64,
) -> Result<ClassReport<S>> {
    if sample_count == 0 {
        return Err(invalid("sample_count", "must be at least 1"));
    }
    sample_margins(op, sample_count, seed, box_radius, |x, y, tx, ty| {
        let dt = tx - ty;
        (x - y).dot(&dt) - dt.norm_sq()
    })
}

/// Margin of `‖Tx − Ty‖² + ((1 − α)/α) ‖(Id − T)x − (Id − T)y‖² ≤ ‖x − y‖²`.
pub fn check_averaged<S: Real>(
    op: &OperatorExpr<S>,
    alpha: S,
    sample_count: usize,
    seed: u64,
    box_radius: f64,
) -> Result<ClassReport<S>> {
    if !(alpha > S::zero() && alpha < S::one()) {
        return Err(invalid("alpha", format!("{alpha} is outside (0, 1)")));
    }
    if sample_count == 0 {
        return Err(invalid("sample_count", "must be at least 1"));
    }
    let factor = (S::one() - alpha) / alpha;
    sample_margins(op, sample_count, seed, box_radius, |x, y, tx, ty| {
        let dx = x - y;
        let dt = tx - ty;
        let dr = &dx - &dt;
        dx.norm_sq() - dt.norm_sq() - factor * dr.norm_sq()
    })
}

/// Margin of `‖Tx − Ty‖ ≤ ‖x − y‖`.
pub fn check_nonexpansive<S: Real>(
    op: &OperatorExpr<S>,
    sample_count: usize,
    seed: u64,
    box_radius: f64,
) -> Result<ClassReport<S>> {
    sample_margins(op, sample_count, seed, box_radius, |x, y, tx, ty| {
        (x - y).norm() - (tx - ty).norm()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::compose;

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn translation_is_firm() {
        let t = OperatorExpr::translation(v(&[1.0, -2.0, 0.5]));
        let r = check_firm_nonexpansive(&t, 500, 1, 10.0).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_margin.abs() < 1e-9);
    }

    #[test]
    fn hyperbola_projector_is_firm() {
        let r = check_firm_nonexpansive(&OperatorExpr::<f64>::proj_hyperbola_epi(), 1000, 7, 5.0).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn expanding_affine_map_is_caught() {
        let bad = OperatorExpr::unchecked_affine_scale(1.5, v(&[0.0]));
        let r = check_firm_nonexpansive(&bad, 100, 2, 1.0).unwrap();
        assert!(r.violations > 0);
        assert!(r.worst_margin < 0.0);
        assert!(check_nonexpansive(&bad, 100, 2, 1.0).unwrap().violations > 0);
    }

    #[test]
    fn averaged_constants() {
        let leaf = OperatorExpr::proj_ball(v(&[0.0, 1.0]), 1.0).unwrap();
        assert!(check_averaged(&leaf, 0.5, 1000, 3, 4.0).unwrap().passed());
        let comp = compose(vec![
            OperatorExpr::proj_hyperplane(v(&[0.0, 1.0]), 0.0).unwrap(),
            OperatorExpr::proj_ball(v(&[0.0, 1.0]), 1.0).unwrap(),
            OperatorExpr::proj_hyperbola_epi(),
        ])
        .unwrap();
        assert!(check_averaged(&comp, 0.75, 1000, 4, 5.0).unwrap().passed());
        let t = OperatorExpr::translation(v(&[3.0, 1.0]));
        assert!(check_averaged(&t, 0.01, 1000, 5, 5.0).unwrap().passed());
    }

    #[test]
    fn reflection_is_not_half_averaged() {
        // x ↦ −x is nonexpansive but not averaged for any α < 1
        let refl = OperatorExpr::unchecked_affine_scale(-1.0, v(&[0.0]));
        assert!(check_nonexpansive(&refl, 100, 1, 1.0).unwrap().passed());
        assert!(!check_averaged(&refl, 0.5, 100, 1, 1.0).unwrap().passed());
    }

    #[test]
    fn argument_validation() {
        let t = OperatorExpr::identity(1);
        assert!(check_averaged(&t, 1.0, 10, 0, 1.0).is_err());
        assert!(check_averaged(&t, 0.0, 10, 0, 1.0).is_err());
        assert!(check_firm_nonexpansive(&t, 0, 0, 1.0).is_err());
    }
}
