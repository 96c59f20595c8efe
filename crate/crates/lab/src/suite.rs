use std::time::Instant;

use mindisp_core::displacement::BOUND_TOLERANCE;
use mindisp_core::family::{sample_tuple, sample_weights};
use mindisp_core::sampling::seeded_stream;
use mindisp_core::{check_composition_bound, check_convex_combo_bound, compare_cyclic_rotations, Operator64};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::demos::RunOptions;
use crate::report::{CheckRecord, ExperimentReport};

/// Largest allowed distance between estimates for different rotations.
pub const CYCLIC_GAP_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("{0} must be a non-empty list")]
    EmptyList(&'static str),
    #[error("composition length {0} is below 2")]
    TooFewOperators(usize),
    #[error("dimension 0 is not allowed")]
    ZeroDimension,
    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: mindisp_core::Error },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub m_values: Vec<usize>,
    pub options: RunOptions,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            dims: vec![1, 2, 5],
            m_values: vec![2, 3, 4],
            options: RunOptions::default(),
        }
    }

    fn validate(&self) -> Result<(), SuiteError> {
        if self.trials == 0 {
            return Err(SuiteError::NoTrials);
        }
        if self.dims.is_empty() {
            return Err(SuiteError::EmptyList("dims"));
        }
        if self.m_values.is_empty() {
            return Err(SuiteError::EmptyList("m_values"));
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m < 2) {
            return Err(SuiteError::TooFewOperators(m));
        }
        if self.dims.contains(&0) {
            return Err(SuiteError::ZeroDimension);
        }
        Ok(())
    }
}

/// A sampled tuple. Trial `i` draws from stream `i` of the suite seed, so
/// it does not depend on how trials are scheduled.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: usize,
    pub dim: usize,
    pub ops: Vec<Operator64>,
    pub weights: Vec<f64>,
}

pub fn sample_trial(seed: u64, index: usize, dims: &[usize], m_values: &[usize]) -> Trial {
    let mut rng = seeded_stream(seed, index as u64);
    let m = m_values[rng.gen_range(0..m_values.len())];
    let dim = dims[rng.gen_range(0..dims.len())];
    let ops = sample_tuple(&mut rng, m, dim);
    let weights = sample_weights(&mut rng, m);
    Trial {
        index,
        dim,
        ops,
        weights,
    }
}

fn run_trial(trial: &Trial, options: &RunOptions) -> Result<[CheckRecord; 3], mindisp_core::Error> {
    let cfg = options.estimator(mindisp_core::EstimatorConfig::<f64>::default().max_iter);
    let prefix = format!("trial-{:03}", trial.index);
    let m = trial.ops.len();
    let kinds: Vec<&str> = trial.ops.iter().map(|op| op.kind_name()).collect();

    let comp = check_composition_bound(&trial.ops, &cfg)?;
    let composition = CheckRecord::new(format!("{prefix}/composition"), "lhs ≤ rhs + tolerance")
        .metric("m", m)
        .metric("dim", trial.dim)
        .metric("kinds", &kinds)
        .metric("lhs", comp.lhs)
        .metric("rhs", comp.rhs)
        .metric("slack", comp.slack)
        .metric("tolerance", comp.tolerance)
        .passed(comp.pass)
        .converged(comp.converged);

    let combo = check_convex_combo_bound(&trial.weights, &trial.ops, &cfg)?;
    let convex = CheckRecord::new(format!("{prefix}/convex-combination"), "lhs ≤ rhs + tolerance")
        .metric("m", m)
        .metric("dim", trial.dim)
        .metric("weights", &trial.weights)
        .metric("lhs", combo.lhs)
        .metric("rhs", combo.rhs)
        .metric("slack", combo.slack)
        .metric("tolerance", combo.tolerance)
        .passed(combo.pass)
        .converged(combo.converged);

    let cyc = compare_cyclic_rotations(&trial.ops, &cfg)?;
    let cyclic = CheckRecord::new(
        format!("{prefix}/cyclic"),
        "max_pairwise_gap ≤ 5e-3 when every rotation converged",
    )
    .metric("m", m)
    .metric("dim", trial.dim)
    .metric("max_pairwise_gap", cyc.max_pairwise_gap)
    .metric("iterations", &cyc.iterations)
    .passed(!cyc.all_converged || cyc.max_pairwise_gap <= CYCLIC_GAP_TOLERANCE)
    .converged(cyc.all_converged);
    Ok([composition, convex, cyclic])
}

fn summary(name: &str, per_trial: &[&CheckRecord]) -> CheckRecord {
    let converged = per_trial.iter().filter(|r| r.converged).count();
    let passes = per_trial.iter().filter(|r| r.passed).count();
    CheckRecord::new(format!("summary/{name}"), "passes = trials")
        .metric("trials", per_trial.len())
        .metric("passes", passes)
        .metric("converged", converged)
        .passed(passes == per_trial.len())
}

/// Runs the composition, convex-combination and cyclic-rotation checks on
/// `trials` sampled tuples. Individual check failures are recorded, not
/// raised.
pub fn run_random_suite(config: &SuiteConfig) -> Result<ExperimentReport, SuiteError> {
    config.validate()?;
    let started = Instant::now();
    let per_trial: Vec<[CheckRecord; 3]> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let trial = sample_trial(config.seed, i, &config.dims, &config.m_values);
            run_trial(&trial, &config.options).map_err(|source| SuiteError::Trial { trial: i, source })
        })
        .collect::<Result<_, _>>()?;

    let column = |k: usize| per_trial.iter().map(|r| &r[k]).collect::<Vec<_>>();
    let mut results = vec![
        summary("composition", &column(0)),
        summary("convex-combination", &column(1)),
        summary("cyclic", &column(2)),
    ];
    results.extend(per_trial.into_iter().flatten());

    let inputs = json!({
        "trials": config.trials,
        "seed": config.seed,
        "dims": config.dims,
        "m_values": config.m_values,
        "bound_tolerance": BOUND_TOLERANCE,
        "cyclic_gap_tolerance": CYCLIC_GAP_TOLERANCE,
        "options": config.options.to_json(),
    });
    Ok(ExperimentReport::new(
        "random-suite",
        config.seed,
        inputs,
        results,
        started.elapsed().as_secs_f64(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            run_random_suite(&SuiteConfig::new(0, 1)),
            Err(SuiteError::NoTrials)
        ));
        let mut bad = SuiteConfig::new(1, 1);
        bad.m_values = vec![1];
        assert!(matches!(run_random_suite(&bad), Err(SuiteError::TooFewOperators(1))));
    }

    #[test]
    fn trials_are_independent_of_order() {
        let a = sample_trial(9, 4, &[1, 2, 5], &[2, 3, 4]);
        let _ = sample_trial(9, 3, &[1, 2, 5], &[2, 3, 4]);
        let b = sample_trial(9, 4, &[1, 2, 5], &[2, 3, 4]);
        assert_eq!(a.ops, b.ops);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn small_suite_is_deterministic() {
        let cfg = SuiteConfig::new(6, 3);
        let r1 = run_random_suite(&cfg).unwrap();
        let r2 = run_random_suite(&cfg).unwrap();
        assert_eq!(r1.to_stable_json(), r2.to_stable_json());
        assert_eq!(r1.results.len(), 3 + 3 * 6);
        assert_eq!(r1.check("summary/composition").unwrap().number("trials"), Some(6.0));
    }
}
