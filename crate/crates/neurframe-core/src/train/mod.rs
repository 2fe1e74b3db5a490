//! Self-supervised training loop: full-batch Adam on the weighted sum of
//! smoothness, boundary-alignment, and feature-alignment terms.

pub mod data;
pub mod loss;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Adam, FieldError, Gradients, Mlp};

pub use data::{feature_weight, TrainingData};
pub use loss::{LossTerms, LossWeights};

// a step may overshoot early; past this point the loss must stay bounded
const DIVERGENCE_GRACE: usize = 500;
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("loss is not finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error(
        "loss diverged at iteration {iteration}: {total:.6e} exceeds {DIVERGENCE_FACTOR}x the initial {initial:.6e}"
    )]
    Diverged { iteration: usize, total: f64, initial: f64 },
    #[error("observer failed: {0}")]
    Observer(#[from] std::io::Error),
}

/// Everything that controls a training run. Deserializes from JSON with
/// per-field defaults; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub lambda_smooth: f64,
    pub lambda_boundary: f64,
    pub lambda_feature: f64,
    pub sigma: f64,
    pub seed: u64,
    pub minibatch: Option<usize>,
    pub log_every: usize,
    pub checkpoint_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 10_000,
            learning_rate: crate::field::adam::DEFAULT_LR,
            lambda_smooth: 1.0,
            lambda_boundary: 20.0,
            lambda_feature: 1.0,
            sigma: 10.0,
            seed: 0,
            minibatch: None,
            log_every: 1,
            checkpoint_every: None,
        }
    }
}

impl TrainConfig {
    pub fn weights(&self) -> LossWeights {
        LossWeights {
            smooth: self.lambda_smooth,
            boundary: self.lambda_boundary,
            feature: self.lambda_feature,
        }
    }
}

/// One forward pass over the batch points, term accumulation, one backward
/// pass.
pub fn loss_and_grad(
    mlp: &Mlp,
    data: &TrainingData,
    w: &LossWeights,
) -> Result<(LossTerms, Gradients), TrainError> {
    let rec = mlp.forward(&data.points)?;
    let (terms, dq) = loss::accumulate(rec.q(), &data.edges, &data.boundary, &data.feature, w);
    let grads = mlp.backward(&rec, &dq)?;
    Ok((terms, grads))
}

/// Loss terms only, without gradients.
pub fn evaluate_losses(
    mlp: &Mlp,
    data: &TrainingData,
    w: &LossWeights,
) -> Result<LossTerms, TrainError> {
    let rec = mlp.forward(&data.points)?;
    let (terms, _) = loss::accumulate(rec.q(), &data.edges, &data.boundary, &data.feature, w);
    Ok(terms)
}

fn guard(iteration: usize, total: f64, initial: f64) -> Result<(), TrainError> {
    if !total.is_finite() {
        return Err(TrainError::NonFinite { iteration });
    }
    if iteration >= DIVERGENCE_GRACE && total > DIVERGENCE_FACTOR * initial {
        return Err(TrainError::Diverged { iteration, total, initial });
    }
    Ok(())
}

/// Summary of a finished run; `totals[i]` is the weighted loss before step i.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub iterations: usize,
    pub initial: Option<LossTerms>,
    pub final_terms: Option<LossTerms>,
    pub totals: Vec<f64>,
}

/// Runs `config.iterations` Adam steps. The observer sees every iteration
/// (index, loss terms before the step, their weighted total, the network
/// after the step); with zero iterations the network is returned untouched.
pub fn train(
    mlp: &mut Mlp,
    data: &TrainingData,
    config: &TrainConfig,
    mut observer: impl FnMut(usize, &LossTerms, f64, &Mlp) -> std::io::Result<()>,
) -> Result<TrainReport, TrainError> {
    let w = config.weights();
    let mut adam = Adam::new(config.learning_rate, mlp.param_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut totals = Vec::with_capacity(config.iterations);
    let mut initial: Option<LossTerms> = None;
    let mut final_terms: Option<LossTerms> = None;

    for iteration in 0..config.iterations {
        let batch_storage;
        let batch = match config.minibatch {
            None => data,
            Some(b) => {
                batch_storage = data.subsample(&mut rng, b);
                &batch_storage
            }
        };
        let (terms, grads) = loss_and_grad(mlp, batch, &w)?;
        let total = terms.total(&w);
        let initial_total = initial.get_or_insert(terms).total(&w);
        guard(iteration, total, initial_total)?;
        adam.step(mlp, &grads)?;
        totals.push(total);
        final_terms = Some(terms);
        observer(iteration, &terms, total, mlp)?;
    }

    Ok(TrainReport { iterations: config.iterations, initial, final_terms, totals })
}

/// Header of the loss log.
pub const CSV_HEADER: &str = "iter,L_S,L_B,L_F,total";

/// One loss-log line, matching [`CSV_HEADER`].
pub fn csv_line(iteration: usize, terms: &LossTerms, total: f64) -> String {
    format!(
        "{iteration},{:.9e},{:.9e},{:.9e},{:.9e}",
        terms.smooth, terms.boundary, terms.feature, total
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, preprocess, Primitive, FEATURE_ANGLE};
    use loss::EdgeTerm;

    fn tiny_data() -> TrainingData {
        let mesh = generate_primitive(Primitive::Cube, 1).unwrap();
        let pre = preprocess(mesh, None, FEATURE_ANGLE).unwrap();
        TrainingData::new(&pre, 10.0)
    }

    fn tiny_mlp(seed: u64) -> Mlp {
        Mlp::new(&[3, 16, 16, 9], 30.0, seed)
    }

    #[test]
    fn config_defaults_and_json() {
        let d = TrainConfig::default();
        assert_eq!(d.iterations, 10_000);
        assert_eq!(d.learning_rate, 5e-5);
        assert_eq!(d.lambda_boundary, 20.0);
        assert_eq!(d.sigma, 10.0);
        assert_eq!(d.log_every, 1);

        let partial: TrainConfig = serde_json::from_str(r#"{"iterations": 25}"#).unwrap();
        assert_eq!(partial.iterations, 25);
        assert_eq!(partial.lambda_boundary, 20.0);

        let full = serde_json::to_string(&d).unwrap();
        let back: TrainConfig = serde_json::from_str(&full).unwrap();
        assert_eq!(back, d);

        assert!(serde_json::from_str::<TrainConfig>(r#"{"lamda_smooth": 1}"#).is_err());
    }

    #[test]
    fn zero_iterations_leave_the_network_untouched() {
        let mut mlp = tiny_mlp(3);
        let before = mlp.params_flat();
        let config = TrainConfig { iterations: 0, ..TrainConfig::default() };
        let report = train(&mut mlp, &tiny_data(), &config, |_, _, _, _| Ok(())).unwrap();
        assert_eq!(mlp.params_flat(), before);
        assert_eq!(report.iterations, 0);
        assert!(report.initial.is_none());
        assert!(report.totals.is_empty());
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let data = tiny_data();
        let config = TrainConfig {
            iterations: 8,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        let mut a = tiny_mlp(7);
        let mut b = tiny_mlp(7);
        train(&mut a, &data, &config, |_, _, _, _| Ok(())).unwrap();
        train(&mut b, &data, &config, |_, _, _, _| Ok(())).unwrap();
        let pa = a.params_flat();
        let pb = b.params_flat();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn short_run_reduces_the_loss() {
        let data = tiny_data();
        let config = TrainConfig {
            iterations: 200,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        let mut mlp = tiny_mlp(1);
        let report = train(&mut mlp, &data, &config, |_, _, _, _| Ok(())).unwrap();
        let first = report.totals[0];
        let last = *report.totals.last().unwrap();
        assert!(
            last < 0.8 * first,
            "loss did not drop: {first} -> {last}"
        );
    }

    #[test]
    fn minibatch_runs_and_stays_finite() {
        let data = tiny_data();
        let config = TrainConfig {
            iterations: 20,
            learning_rate: 1e-3,
            minibatch: Some(8),
            ..TrainConfig::default()
        };
        let mut mlp = tiny_mlp(2);
        let report = train(&mut mlp, &data, &config, |_, _, _, _| Ok(())).unwrap();
        assert!(report.totals.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn observer_sees_every_iteration_and_can_abort() {
        let data = tiny_data();
        let config = TrainConfig { iterations: 5, ..TrainConfig::default() };
        let mut seen = Vec::new();
        let mut mlp = tiny_mlp(3);
        train(&mut mlp, &data, &config, |i, terms, total, _| {
            seen.push((i, terms.total(&config.weights()) == total));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 5);
        assert!(seen.iter().all(|&(_, ok)| ok));

        let mut mlp = tiny_mlp(3);
        let err = train(&mut mlp, &data, &config, |_, _, _, _| {
            Err(std::io::Error::other("sink full"))
        })
        .unwrap_err();
        assert!(matches!(err, TrainError::Observer(_)));
    }

    #[test]
    fn guard_thresholds() {
        assert!(guard(0, 1.0, 1.0).is_ok());
        assert!(matches!(guard(3, f64::NAN, 1.0), Err(TrainError::NonFinite { iteration: 3 })));
        assert!(matches!(
            guard(10, f64::INFINITY, 1.0),
            Err(TrainError::NonFinite { iteration: 10 })
        ));
        // inside the grace window a large loss is tolerated
        assert!(guard(499, 50.0, 1.0).is_ok());
        assert!(guard(500, 9.9, 1.0).is_ok());
        assert!(matches!(
            guard(500, 10.1, 1.0),
            Err(TrainError::Diverged { iteration: 500, .. })
        ));
    }

    #[test]
    fn infinite_edge_weight_is_caught_immediately() {
        let mut data = tiny_data();
        data.edges.push(EdgeTerm { a: 0, b: 1, weight: f64::INFINITY });
        let mut mlp = tiny_mlp(3);
        let config = TrainConfig { iterations: 3, ..TrainConfig::default() };
        let err = train(&mut mlp, &data, &config, |_, _, _, _| Ok(())).unwrap_err();
        assert!(
            matches!(err, TrainError::NonFinite { iteration: 0 })
                || matches!(err, TrainError::Field(FieldError::NonFiniteGradient { .. })),
            "{err}"
        );
    }

    #[test]
    fn csv_format_is_stable() {
        assert_eq!(CSV_HEADER, "iter,L_S,L_B,L_F,total");
        let terms = LossTerms { smooth: 1.5, boundary: 0.25, feature: 0.0 };
        let line = csv_line(3, &terms, 6.5);
        assert_eq!(line, "3,1.500000000e0,2.500000000e-1,0.000000000e0,6.500000000e0");
    }

    // gradients of each term in isolation, against central differences
    #[test]
    fn loss_gradients_match_finite_differences() {
        let data = tiny_data();
        let mut mlp = Mlp::new(&[3, 10, 9], 30.0, 5);
        let configs = [
            LossWeights { smooth: 1.0, boundary: 0.0, feature: 0.0 },
            LossWeights { smooth: 0.0, boundary: 1.0, feature: 0.0 },
            LossWeights { smooth: 0.0, boundary: 0.0, feature: 1.0 },
            LossWeights::default(),
        ];
        for w in &configs {
            let (_, grads) = loss_and_grad(&mlp, &data, w).unwrap();
            let flat = grads.flat();
            let params = mlp.params_flat();
            let h = 1e-6;
            for k in (0..params.len()).step_by(7) {
                let mut plus = params.clone();
                plus[k] += h;
                mlp.set_params_flat(&plus).unwrap();
                let lp = evaluate_losses(&mlp, &data, w).unwrap().total(w);
                let mut minus = params.clone();
                minus[k] -= h;
                mlp.set_params_flat(&minus).unwrap();
                let lm = evaluate_losses(&mlp, &data, w).unwrap().total(w);
                let fd = (lp - lm) / (2.0 * h);
                let err = (flat[k] - fd).abs() / fd.abs().max(1e-3);
                assert!(err < 1e-5, "w {w:?} param {k}: {} vs {fd}", flat[k]);
            }
            mlp.set_params_flat(&params).unwrap();
        }
    }
}
