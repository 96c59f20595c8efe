//! Product-space construction for compositions.
//!
//! A tuple `𝐱 = (x₁, …, x_m)` of points in ℝᵈ, the block map
//! `𝐓𝐱 = (T₁x₁, …, T_m x_m)`, and the cyclic right shift
//! `𝐑(x₁, …, x_m) = (x_m, x₁, …, x_{m−1})` combine into the nonexpansive
//! self-map `S𝐱 = 𝐯 + 𝐓(𝐑𝐱)`. A tuple with `‖𝐱 − S𝐱‖ ≤ ε/√m` yields the
//! point `x₀ := x_m` with `‖x₀ − T_m⋯T₁x₀‖ ≤ ε + Σ‖vᵢ‖`; the certificate
//! records every term of that telescoping estimate.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::operator::OperatorExpr;
use crate::scalar::Real;
use crate::vector::Vector;

const TRIANGLE_SLACK: f64 = 1e-10;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProductPoint<S> {
    parts: Vec<Vector<S>>,
}

impl<S: Real> ProductPoint<S> {
    pub fn new(parts: Vec<Vector<S>>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::TooFewChildren {
                kind: "product point",
                min: 2,
                found: parts.len(),
            });
        }
        let d = parts[0].dim();
        for p in &parts {
            p.check_dim(d)?;
        }
        Ok(Self { parts })
    }

    pub fn zeros(m: usize, d: usize) -> Self {
        assert!(m >= 2, "product points need at least two parts");
        Self {
            parts: vec![Vector::zeros(d); m],
        }
    }

    /// The diagonal tuple `(x, …, x)`.
    pub fn diagonal(x: &Vector<S>, m: usize) -> Self {
        assert!(m >= 2, "product points need at least two parts");
        Self {
            parts: vec![x.clone(); m],
        }
    }

    /// Splits a vector of length `m·d` into `m` parts.
    pub fn from_concatenated(v: &Vector<S>, m: usize) -> Result<Self> {
        if m < 2 || !v.dim().is_multiple_of(m) {
            return Err(invalid(
                "m",
                format!("cannot split {} coordinates into {m} parts", v.dim()),
            ));
        }
        let d = v.dim() / m;
        Self::new((0..m).map(|i| v.slice(i * d, d)).collect())
    }

    pub fn concatenated(&self) -> Vector<S> {
        Vector::concat(&self.parts)
    }

    pub fn parts(&self) -> &[Vector<S>] {
        &self.parts
    }

    pub fn m(&self) -> usize {
        self.parts.len()
    }

    pub fn part_dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn norm(&self) -> S {
        self.concatenated().norm()
    }

    pub fn distance(&self, other: &Self) -> S {
        (&self.concatenated() - &other.concatenated()).norm()
    }

    fn zip_map(&self, other: &Self, f: impl Fn(&Vector<S>, &Vector<S>) -> Vector<S>) -> Self {
        Self {
            parts: self.parts.iter().zip(&other.parts).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.parts.iter().all(Vector::is_finite)
    }
}

/// `𝐑(x₁, …, x_m) = (x_m, x₁, …, x_{m−1})`
pub fn cyclic_shift<S: Real>(x: &ProductPoint<S>) -> ProductPoint<S> {
    let mut parts = x.parts.clone();
    parts.rotate_right(1);
    ProductPoint { parts }
}

/// `𝐓(x₁, …, x_m) = (T₁x₁, …, T_m x_m)`
pub fn block_apply<S: Real>(ops: &[OperatorExpr<S>], x: &ProductPoint<S>) -> Result<ProductPoint<S>> {
    if ops.len() != x.m() {
        return Err(Error::DimensionMismatch {
            expected: ops.len(),
            found: x.m(),
        });
    }
    let parts = ops
        .iter()
        .zip(&x.parts)
        .map(|(op, p)| op.apply(p))
        .collect::<Result<_>>()?;
    Ok(ProductPoint { parts })
}

/// `S𝐱 = 𝐯 + 𝐓(𝐑𝐱)`, so that `(S𝐱)ᵢ = vᵢ + Tᵢ x_{i−1}` with `x₀ := x_m`.
pub fn shifted_cyclic_map<S: Real>(
    ops: &[OperatorExpr<S>],
    v: &ProductPoint<S>,
    x: &ProductPoint<S>,
) -> Result<ProductPoint<S>> {
    let t = block_apply(ops, &cyclic_shift(x))?;
    Ok(v.zip_map(&t, |a, b| a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessCertificate<S> {
    /// `x₀ := x_m`
    pub x0: Vector<S>,
    /// `‖x₀ − T_m⋯T₁x₀‖`
    pub composite_residual: S,
    /// `‖Tᵢ x_{i−1} − xᵢ‖` for `i = 1, …, m`.
    pub stage_residuals: Vec<S>,
    pub bound_rhs: S,
    pub pass: bool,
}

impl<S: Real> WitnessCertificate<S> {
    pub fn stage_sum(&self) -> S {
        self.stage_residuals.iter().copied().sum()
    }

    /// The telescoping chain: `composite_residual ≤ Σ stage_residuals`.
    pub fn triangle_holds(&self) -> bool {
        self.composite_residual <= self.stage_sum() + S::lit(TRIANGLE_SLACK)
    }

    /// Re-evaluates `pass` against `bound_rhs`.
    pub fn with_bound(mut self, bound_rhs: S) -> Self {
        self.bound_rhs = bound_rhs;
        self.pass = self.composite_residual <= bound_rhs + S::lit(BOUND_SLACK);
        self
    }
}

/// Measures the composite and per-stage residuals of a tuple. The bound
/// defaults to `Σ stage_residuals`, so `pass` reports the triangle chain.
pub fn verify_telescoping<S: Real>(ops: &[OperatorExpr<S>], x: &ProductPoint<S>) -> Result<WitnessCertificate<S>> {
    if ops.len() != x.m() {
        return Err(Error::DimensionMismatch {
            expected: ops.len(),
            found: x.m(),
        });
    }
    let m = x.m();
    let x0 = x.parts[m - 1].clone();
    let mut stage_residuals = Vec::with_capacity(m);
    for (i, op) in ops.iter().enumerate() {
        let prev = if i == 0 { &x0 } else { &x.parts[i - 1] };
        stage_residuals.push(op.apply(prev)?.distance(&x.parts[i]));
    }
    let mut y = x0.clone();
    for op in ops {
        y = op.apply(&y)?;
    }
    let composite_residual = x0.distance(&y);
    let stage_sum: S = stage_residuals.iter().copied().sum();
    Ok(WitnessCertificate {
        x0,
        composite_residual,
        stage_residuals,
        bound_rhs: stage_sum,
        pass: composite_residual <= stage_sum + S::lit(TRIANGLE_SLACK),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Synthesis<S> {
    pub point: ProductPoint<S>,
    pub certificate: WitnessCertificate<S>,
    pub iterations: usize,
    /// `‖𝐱 − S𝐱‖` at the returned tuple.
    pub product_residual: S,
    /// Whether `product_residual ≤ ε/√m` was reached within the budget.
    pub reached_target: bool,
    pub residual_history: Vec<S>,
}

/// Searches for a tuple with `‖𝐱 − S𝐱‖ ≤ ε/√m` by iterating the
/// half-averaged map `𝐱 ↦ (𝐱 + S𝐱)/2` from the zero tuple, then certifies
/// `x₀ = x_m` against `ε + Σ‖vᵢ‖`. Budget exhaustion is reported, and the
/// certificate is still evaluated at the final tuple.
pub fn synthesize_near_fixed_point<S: Real>(
    ops: &[OperatorExpr<S>],
    v_list: &[Vector<S>],
    epsilon: S,
    budget: usize,
) -> Result<Synthesis<S>> {
    if !(epsilon > S::zero()) {
        return Err(invalid("epsilon", "must be positive"));
    }
    if ops.len() < 2 {
        return Err(Error::TooFewChildren {
            kind: "composition",
            min: 2,
            found: ops.len(),
        });
    }
    if v_list.len() != ops.len() {
        return Err(Error::DimensionMismatch {
            expected: ops.len(),
            found: v_list.len(),
        });
    }
    let d = ops[0].dim();
    let v = ProductPoint::new(v_list.to_vec())?;
    if v.part_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.part_dim(),
        });
    }
    let m = ops.len();
    let target = epsilon / S::lit(m as f64).sqrt();
    let half = S::lit(0.5);

    let mut x = ProductPoint::zeros(m, d);
    let mut sx = shifted_cyclic_map(ops, &v, &x)?;
    let mut residual = x.distance(&sx);
    let mut history = vec![residual];
    let mut iterations = 0;
    while residual > target && iterations < budget {
        x = x.zip_map(&sx, |a, b| a.scale(half).axpy(half, b));
        if !x.is_finite() {
            return Err(Error::NonFiniteIterate {
                iteration: iterations,
                last_finite: sx.concatenated().to_f64(),
            });
        }
        sx = shifted_cyclic_map(ops, &v, &x)?;
        residual = x.distance(&sx);
        history.push(residual);
        iterations += 1;
    }
    let v_norms: S = v_list.iter().map(Vector::norm).sum();
    let certificate = verify_telescoping(ops, &x)?.with_bound(epsilon + v_norms);
    Ok(Synthesis {
        point: x,
        certificate,
        iterations,
        product_residual: residual,
        reached_target: residual <= target,
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn shift_moves_last_part_to_front() {
        let x = ProductPoint::new(vec![v(&[1.0]), v(&[2.0]), v(&[3.0])]).unwrap();
        let shifted = cyclic_shift(&x);
        assert_eq!(shifted.parts(), &[v(&[3.0]), v(&[1.0]), v(&[2.0])]);
        let mut y = x.clone();
        for _ in 0..3 {
            y = cyclic_shift(&y);
        }
        assert_eq!(y, x);
        let diag = ProductPoint::diagonal(&v(&[0.5, 1.0]), 4);
        assert_eq!(cyclic_shift(&diag), diag);
    }

    #[test]
    fn block_apply_componentwise() {
        let ops = [
            OperatorExpr::translation(v(&[1.0])),
            OperatorExpr::translation(v(&[2.0])),
        ];
        let out = block_apply(&ops, &ProductPoint::zeros(2, 1)).unwrap();
        assert_eq!(out.parts(), &[v(&[-1.0]), v(&[-2.0])]);
        let ids = [OperatorExpr::identity(2), OperatorExpr::identity(2)];
        let x = ProductPoint::new(vec![v(&[1.0, 2.0]), v(&[3.0, 4.0])]).unwrap();
        assert_eq!(block_apply(&ids, &x).unwrap(), x);
        assert!(block_apply(&ops[..1], &x).is_err());
    }

    #[test]
    fn translation_pair_certificate() {
        let ops = [
            OperatorExpr::translation(v(&[1.0])),
            OperatorExpr::translation(v(&[2.0])),
        ];
        let syn = synthesize_near_fixed_point(&ops, &[v(&[1.0]), v(&[2.0])], 1e-2, 1000).unwrap();
        assert!(syn.reached_target);
        let cert = &syn.certificate;
        assert!(cert.pass);
        assert_eq!(cert.composite_residual, 3.0);
        assert!((cert.stage_residuals[0] - 1.0).abs() < 1e-9);
        assert!((cert.stage_residuals[1] - 2.0).abs() < 1e-9);
        assert!((cert.bound_rhs - 3.01).abs() < 1e-12);
    }

    #[test]
    fn identities_stay_at_zero() {
        let ops = vec![OperatorExpr::identity(3); 3];
        let zeros = vec![Vector::zeros(3); 3];
        let syn = synthesize_near_fixed_point(&ops, &zeros, 0.5, 10).unwrap();
        assert_eq!(syn.point, ProductPoint::zeros(3, 3));
        assert_eq!(syn.certificate.composite_residual, 0.0);
        assert_eq!(syn.iterations, 0);
    }

    #[test]
    fn diagonal_fixed_point_has_zero_residuals() {
        let ops = [
            OperatorExpr::proj_ball(v(&[0.0, 0.0]), 1.0).unwrap(),
            OperatorExpr::proj_halfspace(v(&[1.0, 0.0]), 0.5).unwrap(),
        ];
        let x = v(&[0.25, 0.5]);
        let cert = verify_telescoping(&ops, &ProductPoint::diagonal(&x, 2)).unwrap();
        assert!(cert.composite_residual <= 1e-12);
        assert!(cert.stage_residuals.iter().all(|&r| r <= 1e-12));
    }

    #[test]
    fn argument_errors() {
        let ops = [OperatorExpr::identity(1), OperatorExpr::identity(1)];
        let zeros = [Vector::zeros(1), Vector::zeros(1)];
        assert!(synthesize_near_fixed_point(&ops, &zeros, 0.0, 10).is_err());
        assert!(synthesize_near_fixed_point(&ops, &zeros[..1], 0.1, 10).is_err());
        assert!(synthesize_near_fixed_point(&ops[..1], &zeros[..1], 0.1, 10).is_err());
        assert!(ProductPoint::new(vec![v(&[1.0]), v(&[1.0, 2.0])]).is_err());
        assert!(ProductPoint::from_concatenated(&v(&[1.0, 2.0, 3.0]), 2).is_err());
    }
}
