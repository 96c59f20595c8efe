//! Estimation of minimal displacement vectors.
//!
//! For an averaged operator `T` the successive differences `xₙ − xₙ₊₁` of the
//! Picard iteration converge to `v_T`, the least-norm element of the closure
//! of `ran(Id − T)`, and their norms decrease to `‖v_T‖`. Every difference is
//! itself an element of `ran(Id − T)`, so its norm is a certified upper bound
//! on `‖v_T‖` at every step.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::operator::{Node, OperatorExpr};
use crate::scalar::Real;
use crate::vector::Vector;

/// Slack for the randomized bound checks; absorbs estimator error on both
/// sides of the inequality.
pub const BOUND_TOLERANCE: f64 = 5e-3;

/// Orbits leaving this ball count as unbounded in [`diagnose_attainment`].
pub const ORBIT_RADIUS_LIMIT: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorConfig<S> {
    pub max_iter: usize,
    /// Stop once `‖dₙ − dₙ₋ₖ‖ ≤ tol` with `dₙ = xₙ − xₙ₊₁` and `k = window`.
    pub tol_residual_change: S,
    pub window: usize,
    pub record_every: usize,
    /// Starting point; the origin when absent.
    pub x0: Option<Vector<S>>,
}

impl<S: Real> Default for EstimatorConfig<S> {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            tol_residual_change: S::lit(1e-9),
            window: 100,
            record_every: 1,
            x0: None,
        }
    }
}

impl<S: Real> EstimatorConfig<S> {
    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: S) -> Self {
        self.tol_residual_change = tol;
        self
    }

    pub fn with_x0(mut self, x0: Vector<S>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.tol_residual_change > S::zero()) {
            return Err(invalid("tol_residual_change", "must be positive"));
        }
        if self.window == 0 || self.record_every == 0 {
            return Err(invalid("window", "window and record_every must be at least 1"));
        }
        Ok(())
    }

    fn start(&self, dim: usize) -> Result<Vector<S>> {
        match &self.x0 {
            Some(x0) => {
                x0.check_dim(dim)?;
                Ok(x0.clone())
            }
            None => Ok(Vector::zeros(dim)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisplacementEstimate<S> {
    pub v_hat: Vector<S>,
    /// `‖x_N − T x_N‖`, an upper bound on `‖v_T‖`.
    pub upper_bound: S,
    pub residual_history: Vec<S>,
    pub iterations: usize,
    pub converged: bool,
    /// `x_N`, the point whose displacement is `v_hat`.
    pub final_iterate: Vector<S>,
    /// True when `T` had no averagedness guarantee and `(Id + T)/2` was iterated instead.
    pub wrapped: bool,
}

pub fn estimate_displacement<S: Real>(
    op: &OperatorExpr<S>,
    cfg: &EstimatorConfig<S>,
) -> Result<DisplacementEstimate<S>> {
    estimate_displacement_observed(op, cfg, |_, _, _| {})
}

/// Like [`estimate_displacement`], calling `observer(n, ‖xₙ − xₙ₊₁‖, xₙ)`
/// after every step.
pub fn estimate_displacement_observed<S: Real>(
    op: &OperatorExpr<S>,
    cfg: &EstimatorConfig<S>,
    mut observer: impl FnMut(usize, S, &Vector<S>),
) -> Result<DisplacementEstimate<S>> {
    cfg.validate()?;
    let wrapped = op.averaged_constant().is_none();
    // (Id + T)/2 has displacement vector v_T / 2
    let scale = if wrapped { S::lit(2.0) } else { S::one() };
    let half = S::lit(0.5);

    let mut x = cfg.start(op.dim())?;
    let mut history = Vec::new();
    let mut window: VecDeque<Vector<S>> = VecDeque::with_capacity(cfg.window + 1);
    let mut converged = false;
    let mut iterations = 0;
    let mut last_recorded = usize::MAX;
    let (mut last_x, mut last_d) = (x.clone(), Vector::zeros(op.dim()));

    for n in 0..cfg.max_iter {
        let tx = op.apply(&x)?;
        let next = if wrapped { x.scale(half).axpy(half, &tx) } else { tx };
        if !next.is_finite() {
            return Err(Error::NonFiniteIterate {
                iteration: n,
                last_finite: x.to_f64(),
            });
        }
        let d = &x - &next;
        let residual = d.norm() * scale;
        iterations = n + 1;
        if n % cfg.record_every == 0 {
            history.push(residual);
            last_recorded = n;
        }
        observer(n, residual, &x);

        if window.len() == cfg.window + 1 {
            window.pop_front();
        }
        window.push_back(d.clone());
        let stable = window.len() == cfg.window + 1
            && (window.back().unwrap() - window.front().unwrap()).norm() * scale <= cfg.tol_residual_change;
        last_d = d;
        last_x = std::mem::replace(&mut x, next);
        if stable {
            converged = true;
            break;
        }
    }
    let v_hat = last_d.scale(scale);
    let upper_bound = v_hat.norm();
    if last_recorded != iterations - 1 {
        history.push(upper_bound);
    }
    Ok(DisplacementEstimate {
        v_hat,
        upper_bound,
        residual_history: history,
        iterations,
        converged,
        final_iterate: last_x,
        wrapped,
    })
}

/// Closed-form displacement vector where one is derivable from structure:
/// translations (and sums or averages of them), projectors and resolvents
/// with a fixed point, and strict contractions. `None` means unknown.
pub fn exact_displacement<S: Real>(op: &OperatorExpr<S>) -> Option<Vector<S>> {
    if let Some(a) = op.translation_offset() {
        return Some(a);
    }
    if op.averaged_constant().is_some() && op.lipschitz_bound() < S::one() {
        return Some(Vector::zeros(op.dim()));
    }
    if op.is_projector() {
        return Some(Vector::zeros(op.dim()));
    }
    match op.node() {
        Node::Resolvent(map) if map.has_fixed_point() => Some(Vector::zeros(op.dim())),
        _ => None,
    }
}

struct Displacement<S> {
    vector: Vector<S>,
    exact: bool,
    converged: bool,
}

fn exact_or_estimated<S: Real>(op: &OperatorExpr<S>, cfg: &EstimatorConfig<S>) -> Result<Displacement<S>> {
    if let Some(vector) = exact_displacement(op) {
        return Ok(Displacement {
            vector,
            exact: true,
            converged: true,
        });
    }
    let est = estimate_displacement(op, cfg)?;
    Ok(Displacement {
        vector: est.v_hat,
        exact: false,
        converged: est.converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionBoundReport<S> {
    /// `‖v̂‖` for the composition.
    pub lhs: S,
    pub lhs_upper_bound: S,
    /// `Σᵢ ‖vᵢ‖`
    pub rhs: S,
    pub component_norms: Vec<S>,
    pub exact_components: Vec<bool>,
    pub slack: S,
    pub tolerance: S,
    pub pass: bool,
    pub converged: bool,
}

pub fn check_composition_bound<S: Real>(
    ops: &[OperatorExpr<S>],
    cfg: &EstimatorConfig<S>,
) -> Result<CompositionBoundReport<S>> {
    check_composition_bound_with_tolerance(ops, cfg, S::lit(BOUND_TOLERANCE))
}

pub fn check_composition_bound_with_tolerance<S: Real>(
    ops: &[OperatorExpr<S>],
    cfg: &EstimatorConfig<S>,
    tolerance: S,
) -> Result<CompositionBoundReport<S>> {
    let comp = OperatorExpr::compose(ops.to_vec())?;
    let est = estimate_displacement(&comp, cfg)?;
    let mut converged = est.converged;
    let mut component_norms = Vec::with_capacity(ops.len());
    let mut exact_components = Vec::with_capacity(ops.len());
    for op in ops {
        let d = exact_or_estimated(op, cfg)?;
        converged &= d.converged;
        component_norms.push(d.vector.norm());
        exact_components.push(d.exact);
    }
    let lhs = est.v_hat.norm();
    let rhs: S = component_norms.iter().copied().sum();
    Ok(CompositionBoundReport {
        lhs,
        lhs_upper_bound: est.upper_bound,
        rhs,
        component_norms,
        exact_components,
        slack: rhs - lhs,
        tolerance,
        pass: lhs <= rhs + tolerance,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexComboBoundReport<S> {
    /// `‖v̂‖` for `Σ λᵢ Tᵢ`.
    pub lhs: S,
    pub lhs_upper_bound: S,
    /// `‖Σ λᵢ vᵢ‖`, the norm of the weighted sum of vectors.
    pub rhs: S,
    pub weighted_sum: Vector<S>,
    pub slack: S,
    pub tolerance: S,
    pub pass: bool,
    pub converged: bool,
}

pub fn check_convex_combo_bound<S: Real>(
    weights: &[S],
    ops: &[OperatorExpr<S>],
    cfg: &EstimatorConfig<S>,
) -> Result<ConvexComboBoundReport<S>> {
    check_convex_combo_bound_with_tolerance(weights, ops, cfg, S::lit(BOUND_TOLERANCE))
}

pub fn check_convex_combo_bound_with_tolerance<S: Real>(
    weights: &[S],
    ops: &[OperatorExpr<S>],
    cfg: &EstimatorConfig<S>,
    tolerance: S,
) -> Result<ConvexComboBoundReport<S>> {
    let combo = OperatorExpr::convex_combination(weights.to_vec(), ops.to_vec())?;
    let est = estimate_displacement(&combo, cfg)?;
    let mut converged = est.converged;
    let mut weighted_sum = Vector::zeros(combo.dim());
    for (&w, op) in weights.iter().zip(ops) {
        let d = exact_or_estimated(op, cfg)?;
        converged &= d.converged;
        weighted_sum = weighted_sum.axpy(w, &d.vector);
    }
    let lhs = est.v_hat.norm();
    let rhs = weighted_sum.norm();
    Ok(ConvexComboBoundReport {
        lhs,
        lhs_upper_bound: est.upper_bound,
        rhs,
        weighted_sum,
        slack: rhs - lhs,
        tolerance,
        pass: lhs <= rhs + tolerance,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclicReport<S> {
    /// Estimate for rotation `r`, i.e. the composition applying
    /// `T_{r+1}, …, T_m, T_1, …, T_r` in that order.
    pub estimates: Vec<Vector<S>>,
    pub iterations: Vec<usize>,
    pub max_pairwise_gap: S,
    pub all_converged: bool,
}

/// The `m` cyclic rotations of `ops`, each in application order.
pub fn cyclic_rotations<S: Real>(ops: &[OperatorExpr<S>]) -> Vec<Vec<OperatorExpr<S>>> {
    (0..ops.len())
        .map(|r| ops[r..].iter().chain(&ops[..r]).cloned().collect())
        .collect()
}

pub fn compare_cyclic_rotations<S: Real>(ops: &[OperatorExpr<S>], cfg: &EstimatorConfig<S>) -> Result<CyclicReport<S>> {
    let mut estimates = Vec::with_capacity(ops.len());
    let mut iterations = Vec::with_capacity(ops.len());
    let mut all_converged = true;
    for rotation in cyclic_rotations(ops) {
        let est = estimate_displacement(&OperatorExpr::compose(rotation)?, cfg)?;
        all_converged &= est.converged;
        iterations.push(est.iterations);
        estimates.push(est.v_hat);
    }
    let mut gap = S::zero();
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            gap = gap.max(a.distance(b));
        }
    }
    Ok(CyclicReport {
        estimates,
        iterations,
        max_pairwise_gap: gap,
        all_converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttainmentReport<S> {
    /// The orbit of `x ↦ v̂ + T x` stayed inside the radius-10⁶ ball.
    pub iterates_bounded: bool,
    /// Largest iterate norm seen.
    pub orbit_radius: S,
    pub fixed_point_residual: S,
    pub iterations: usize,
    pub final_iterate: Vector<S>,
}

/// Iterates the shifted map `x ↦ v̂ + T x`, whose fixed points witness
/// `v̂ ∈ ran(Id − T)`. A bounded orbit with a small residual is evidence for
/// attainment, divergence evidence against; neither is a proof.
pub fn diagnose_attainment<S: Real>(
    op: &OperatorExpr<S>,
    v_hat: &Vector<S>,
    cfg: &EstimatorConfig<S>,
) -> Result<AttainmentReport<S>> {
    cfg.validate()?;
    v_hat.check_dim(op.dim())?;
    let limit = S::lit(ORBIT_RADIUS_LIMIT);
    let mut x = cfg.start(op.dim())?;
    let mut radius = x.norm();
    let mut bounded = radius <= limit;
    let mut iterations = 0;
    while bounded && iterations < cfg.max_iter {
        let next = v_hat + &op.apply(&x)?;
        iterations += 1;
        if !next.is_finite() {
            bounded = false;
            break;
        }
        radius = radius.max(next.norm());
        let step = x.distance(&next);
        x = next;
        if radius > limit {
            bounded = false;
        } else if step == S::zero() {
            break;
        }
    }
    let fixed_point_residual = if x.is_finite() {
        x.distance(&(v_hat + &op.apply(&x)?))
    } else {
        S::infinity()
    };
    Ok(AttainmentReport {
        iterates_bounded: bounded,
        orbit_radius: radius,
        fixed_point_residual,
        iterations,
        final_iterate: x,
    })
}
