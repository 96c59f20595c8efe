//! The named demonstrations. Each one runs a fixed configuration and
//! records the quantities its verdict is computed from.

use std::time::Instant;

use mindisp_core::{
    compose, convex_combination, diagnose_attainment, estimate_displacement, synthesize_near_fixed_point,
    verify_telescoping, EstimatorConfig, Operator64, OperatorExpr, Vector64,
};
use serde_json::json;
use thiserror::Error;

use crate::report::{CheckRecord, ExperimentReport};

pub const DEMO_NAMES: [&str; 5] = [
    "translations",
    "convex-combo",
    "depierro-cyclic",
    "depierro-noncyclic",
    "witness",
];

/// Starting point of the De Pierro runs.
pub const DEPIERRO_X0: [f64; 2] = [-3.0, 0.5];
pub const NONCYCLIC_ESTIMATOR_BUDGET: usize = 2_000_000;
/// Picard steps allowed for the non-cyclic orbit to pass `x = 100`.
pub const NONCYCLIC_DRIFT_BUDGET: usize = 30_000_000;
pub const DRIFT_TARGET: f64 = 100.0;
pub const WITNESS_EPSILON: f64 = 1e-2;
pub const WITNESS_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("unknown demo \"{0}\" (expected one of: translations, convex-combo, depierro-cyclic, depierro-noncyclic, witness)")]
    UnknownDemo(String),
    #[error(transparent)]
    Core(#[from] mindisp_core::Error),
}

/// Overrides from the command line. `max_iter` replaces every iteration
/// budget a demo uses.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
}

impl RunOptions {
    pub fn estimator(&self, default_max_iter: usize) -> EstimatorConfig<f64> {
        let mut cfg = EstimatorConfig::default().with_max_iter(self.max_iter.unwrap_or(default_max_iter));
        if let Some(tol) = self.tol {
            cfg = cfg.with_tol(tol);
        }
        cfg
    }

    pub fn budget(&self, default: usize) -> usize {
        self.max_iter.unwrap_or(default)
    }

    pub(crate) fn to_json(&self) -> serde_json::Value {
        json!({"max_iter": self.max_iter, "tol": self.tol})
    }
}

fn v(coords: &[f64]) -> Vector64 {
    Vector64::from_f64(coords).expect("literal vectors are finite and non-empty")
}

fn translation(a: &[f64]) -> Operator64 {
    OperatorExpr::translation(v(a))
}

/// `P_{C₁}, P_{C₂}, P_{C₃}` for `C₁ = ℝ×{0}`, `C₂ = ℝ×{1}` and the epigraph of `1/x` on `x > 0`.
pub fn depierro_projectors() -> [Operator64; 3] {
    [
        OperatorExpr::proj_hyperplane(v(&[0.0, 1.0]), 0.0)
            .unwrap()
            .with_label("P1"),
        OperatorExpr::proj_hyperplane(v(&[0.0, 1.0]), 1.0)
            .unwrap()
            .with_label("P2"),
        OperatorExpr::proj_hyperbola_epi().with_label("P3"),
    ]
}

/// `P₃P₂P₁`
pub fn depierro_cyclic() -> Operator64 {
    let [p1, p2, p3] = depierro_projectors();
    compose(vec![p1, p2, p3]).unwrap()
}

/// `P₃P₁P₂`
pub fn depierro_noncyclic() -> Operator64 {
    let [p1, p2, p3] = depierro_projectors();
    compose(vec![p2, p1, p3]).unwrap()
}

pub fn run_demo(name: &str, options: &RunOptions) -> Result<ExperimentReport, DemoError> {
    let started = Instant::now();
    let (inputs, results) = match name {
        "translations" => translations(options)?,
        "convex-combo" => convex_combo(options)?,
        "depierro-cyclic" => depierro_cyclic_demo(options)?,
        "depierro-noncyclic" => depierro_noncyclic_demo(options)?,
        "witness" => witness(options)?,
        other => return Err(DemoError::UnknownDemo(other.to_string())),
    };
    let inputs = json!({"demo": name, "options": options.to_json(), "config": inputs});
    Ok(ExperimentReport::new(
        name,
        0,
        inputs,
        results,
        started.elapsed().as_secs_f64(),
    ))
}

type DemoOutput = (serde_json::Value, Vec<CheckRecord>);

fn translations(options: &RunOptions) -> Result<DemoOutput, DemoError> {
    let cfg = options.estimator(EstimatorConfig::<f64>::default().max_iter);
    let mut results = Vec::new();
    for (name, a1, a2) in [("same-sign", 1.0, 2.0), ("opposite-sign", 1.0, -2.0)] {
        let (t1, t2) = (translation(&[a1]), translation(&[a2]));
        let e1 = estimate_displacement(&t1, &cfg)?;
        let e2 = estimate_displacement(&t2, &cfg)?;
        let comp = estimate_displacement(&compose(vec![t1, t2])?, &cfg)?;
        let lhs = comp.v_hat.norm();
        let rhs = e1.v_hat.norm() + e2.v_hat.norm();
        let record = CheckRecord::new(
            name,
            if a1 * a2 >= 0.0 {
                "|v_comp − (|v1| + |v2|)| ≤ 1e-12"
            } else {
                "|v_comp − |a1 + a2|| ≤ 1e-12 and |v1| + |v2| − |v_comp| ≥ 1"
            },
        )
        .metric("a1", a1)
        .metric("a2", a2)
        .metric("v1", e1.v_hat[0])
        .metric("v2", e2.v_hat[0])
        .metric("v_comp", comp.v_hat[0])
        .metric("norm_v_comp", lhs)
        .metric("sum_of_norms", rhs)
        .metric("gap", rhs - lhs);
        let passed = if a1 * a2 >= 0.0 {
            (lhs - rhs).abs() <= 1e-12
        } else {
            (lhs - (a1 + a2).abs()).abs() <= 1e-12 && rhs - lhs >= 1.0
        };
        results.push(
            record
                .passed(passed)
                .converged(e1.converged && e2.converged && comp.converged),
        );
    }
    Ok((json!({"pairs": [[1.0, 2.0], [1.0, -2.0]]}), results))
}

fn convex_combo(options: &RunOptions) -> Result<DemoOutput, DemoError> {
    let cfg = options.estimator(EstimatorConfig::<f64>::default().max_iter);
    let mut results = Vec::new();

    let t1 = translation(&[1.0]);
    let t2 = OperatorExpr::affine_scale(0.5, v(&[0.0]))?;
    let weights = [0.5, 0.5];
    let e1 = estimate_displacement(&t1, &cfg)?;
    let e2 = estimate_displacement(&t2, &cfg)?;
    let bar = estimate_displacement(&convex_combination(weights.to_vec(), vec![t1, t2])?, &cfg)?;
    let weighted = e1.v_hat.scale(weights[0]).axpy(weights[1], &e2.v_hat);
    let lhs = bar.v_hat.norm();
    results.push(
        CheckRecord::new("strict", "|v_bar| ≤ 1e-6 and |λ1 v1 + λ2 v2| − |v_bar| > 0")
            .metric("weights", weights)
            .metric("v1", e1.v_hat[0])
            .metric("v2", e2.v_hat[0])
            .metric("v_bar", bar.v_hat[0])
            .metric("weighted_sum_norm", weighted.norm())
            .passed(lhs <= 1e-6 && weighted.norm() - lhs > 0.0)
            .converged(e1.converged && e2.converged && bar.converged),
    );

    let a = [0.7, -1.3];
    let t = translation(&a);
    let single = estimate_displacement(&t, &cfg)?;
    let bar = estimate_displacement(&convex_combination(vec![0.5, 0.5], vec![t.clone(), t])?, &cfg)?;
    let err = bar.v_hat.distance(&v(&a));
    results.push(
        CheckRecord::new(
            "repeated-translation",
            "|v_bar − a| ≤ 1e-12 and |v_bar| = |v_T| within 1e-12",
        )
        .metric("a", a)
        .metric("v_bar", bar.v_hat.coords())
        .metric("v_T", single.v_hat.coords())
        .metric("error", err)
        .passed(err <= 1e-12 && (bar.v_hat.norm() - single.v_hat.norm()).abs() <= 1e-12)
        .converged(single.converged && bar.converged),
    );
    Ok((
        json!({"strict": {"a1": 1.0, "beta2": 0.5, "weights": weights}, "repeated": {"a": a}}),
        results,
    ))
}

fn depierro_cyclic_demo(options: &RunOptions) -> Result<DemoOutput, DemoError> {
    let op = depierro_cyclic();
    let cfg = options
        .estimator(EstimatorConfig::<f64>::default().max_iter)
        .with_x0(v(&DEPIERRO_X0));
    let est = estimate_displacement(&op, &cfg)?;
    let (x, y) = (est.final_iterate[0], est.final_iterate[1]);
    let estimate = CheckRecord::new("estimate", "residual ≤ 1e-6, |y − 1| ≤ 1e-4, x ≥ 1 − 1e-4")
        .metric("iterations", est.iterations)
        .metric("residual", est.upper_bound)
        .metric("v_hat", est.v_hat.coords())
        .metric("final_iterate", [x, y])
        .passed(est.upper_bound <= 1e-6 && (y - 1.0).abs() <= 1e-4 && x >= 1.0 - 1e-4)
        .converged(est.converged);

    let att = diagnose_attainment(&op, &Vector64::zeros(2), &cfg)?;
    let (ax, ay) = (att.final_iterate[0], att.final_iterate[1]);
    let attainment = CheckRecord::new(
        "attainment",
        "orbit of x ↦ Tx bounded, ‖x − Tx‖ ≤ 1e-6, final iterate within 1e-4 of [1, ∞)×{1}",
    )
    .metric("iterates_bounded", att.iterates_bounded)
    .metric("orbit_radius", att.orbit_radius)
    .metric("fixed_point_residual", att.fixed_point_residual)
    .metric("iterations", att.iterations)
    .metric("final_iterate", [ax, ay])
    .passed(att.iterates_bounded && att.fixed_point_residual <= 1e-6 && (ay - 1.0).abs() <= 1e-4 && ax >= 1.0 - 1e-4);
    Ok((
        json!({"x0": DEPIERRO_X0, "order": ["P1", "P2", "P3"]}),
        vec![estimate, attainment],
    ))
}

fn depierro_noncyclic_demo(options: &RunOptions) -> Result<DemoOutput, DemoError> {
    let op = depierro_noncyclic();
    let mut cfg = options.estimator(NONCYCLIC_ESTIMATOR_BUDGET).with_x0(v(&DEPIERRO_X0));
    cfg.record_every = 1000;
    let est = estimate_displacement(&op, &cfg)?;
    let estimate = CheckRecord::new("estimate", "|v_hat| ≤ 1e-3")
        .metric("iterations", est.iterations)
        .metric("residual", est.upper_bound)
        .metric("v_hat", est.v_hat.coords())
        .metric("final_iterate", est.final_iterate.coords())
        .passed(est.upper_bound <= 1e-3)
        .converged(est.converged);

    // Picard orbit until the first coordinate passes the target
    let budget = options.budget(NONCYCLIC_DRIFT_BUDGET);
    let mut x = v(&DEPIERRO_X0);
    let mut iterations = 0;
    let mut increasing = true;
    let mut previous = f64::NEG_INFINITY;
    while iterations < budget && x[0] < DRIFT_TARGET {
        x = op.apply(&x)?;
        iterations += 1;
        increasing &= x[0] > previous;
        previous = x[0];
    }
    let residual = x.distance(&op.apply(&x)?);
    let drift = CheckRecord::new(
        "drift",
        "first coordinate ≥ 100 with ‖x − Tx‖ ≤ 1e-3, first coordinate strictly increasing",
    )
    .metric("iterations", iterations)
    .metric("budget", budget)
    .metric("final_iterate", x.coords())
    .metric("residual", residual)
    .metric("strictly_increasing", increasing)
    .passed(x[0] >= DRIFT_TARGET && residual <= 1e-3 && increasing);
    Ok((
        json!({"x0": DEPIERRO_X0, "order": ["P2", "P1", "P3"], "drift_target": DRIFT_TARGET}),
        vec![estimate, drift],
    ))
}

fn witness_record(
    name: &str,
    ops: &[Operator64],
    v_list: &[Vector64],
    budget: usize,
) -> Result<CheckRecord, DemoError> {
    let s = synthesize_near_fixed_point(ops, v_list, WITNESS_EPSILON, budget)?;
    let recheck = verify_telescoping(ops, &s.point)?;
    let cert = &s.certificate;
    Ok(CheckRecord::new(
        name,
        "composite_residual ≤ ε + Σ|v_i| and composite_residual ≤ Σ stage_residuals",
    )
    .metric("epsilon", WITNESS_EPSILON)
    .metric("iterations", s.iterations)
    .metric("product_residual", s.product_residual)
    .metric("reached_target", s.reached_target)
    .metric("composite_residual", cert.composite_residual)
    .metric("stage_residuals", &cert.stage_residuals)
    .metric("bound_rhs", cert.bound_rhs)
    .metric("x0", cert.x0.coords())
    .passed(cert.pass && recheck.triangle_holds() && recheck.composite_residual == cert.composite_residual))
}

fn witness(options: &RunOptions) -> Result<DemoOutput, DemoError> {
    let budget = options.budget(WITNESS_BUDGET);
    let cfg = options.estimator(EstimatorConfig::<f64>::default().max_iter);
    let pair = vec![translation(&[1.0]), translation(&[2.0])];
    let v_pair = pair
        .iter()
        .map(|op| estimate_displacement(op, &cfg).map(|e| e.v_hat))
        .collect::<Result<Vec<_>, _>>()?;
    let triple = depierro_projectors().to_vec();
    let zeros = vec![Vector64::zeros(2); 3];
    let results = vec![
        witness_record("translations", &pair, &v_pair, budget)?,
        witness_record("depierro", &triple, &zeros, budget)?,
    ];
    Ok((json!({"epsilon": WITNESS_EPSILON, "budget": budget}), results))
}

/// The tuple behind the translation witness, for CSV export.
pub fn translation_witness_point(options: &RunOptions) -> Result<mindisp_core::ProductPoint<f64>, DemoError> {
    let pair = vec![translation(&[1.0]), translation(&[2.0])];
    let s = synthesize_near_fixed_point(
        &pair,
        &[v(&[1.0]), v(&[2.0])],
        WITNESS_EPSILON,
        options.budget(WITNESS_BUDGET),
    )?;
    Ok(s.point)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(
            run_demo("figure-3", &RunOptions::default()),
            Err(DemoError::UnknownDemo(_))
        ));
    }

    #[test]
    fn translations_demo_records_the_sum() {
        let r = run_demo("translations", &RunOptions::default()).unwrap();
        let same = r.check("same-sign").unwrap();
        assert_eq!(same.number("norm_v_comp"), Some(3.0));
        assert_eq!(same.number("sum_of_norms"), Some(3.0));
        assert_eq!(r.check("opposite-sign").unwrap().number("norm_v_comp"), Some(1.0));
        assert_eq!(r.verdict, crate::report::Verdict::Pass);
    }

    #[test]
    fn orders_of_the_depierro_compositions() {
        let x = v(&[-3.0, 0.5]);
        let [p1, p2, p3] = depierro_projectors();
        let by_hand = p3.apply(&p1.apply(&p2.apply(&x).unwrap()).unwrap()).unwrap();
        assert_eq!(depierro_noncyclic().apply(&x).unwrap(), by_hand);
    }
}
