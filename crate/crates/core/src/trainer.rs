//! Seeded minibatch Adam training and train/test evaluation.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::LabeledDataset;
use crate::error::{QnnError, Result};
use crate::objective::{loss, loss_gradient, GradientMethod, Hypothesis, LossKind, Sample};

/// Parameters beyond this magnitude abort a run.
pub const PARAM_LIMIT: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub adam: AdamParams,
    /// Snapshot period; `0` keeps only the snapshots at 0 and `iterations`.
    pub eval_every: usize,
    pub gradient: GradientMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            batch_size: 64,
            iterations: 200,
            seed: 0,
            loss: LossKind::default(),
            adam: AdamParams::default(),
            eval_every: 10,
            gradient: GradientMethod::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint {
    pub iteration: usize,
    pub train_acc: f64,
    pub train_loss: f64,
    pub test_acc: f64,
    pub test_loss: f64,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub evals: Vec<EvalPoint>,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    pub config: TrainConfig,
    pub wall_time_secs: f64,
    /// Circuit executions spent on training gradients (evaluation
    /// snapshots excluded).
    pub gradient_evaluations: u64,
    /// Why the run stopped early, if it did.
    pub aborted: Option<String>,
}

impl RunRecord {
    pub fn final_eval(&self) -> Option<&EvalPoint> {
        self.evals.last()
    }
}

fn init_from(rng: &mut ChaCha8Rng, num_params: usize) -> Vec<f64> {
    (0..num_params).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// Independent uniform draws on `[0, 2π)`.
pub fn init_params(num_params: usize, seed: u64) -> Vec<f64> {
    init_from(&mut ChaCha8Rng::seed_from_u64(seed), num_params)
}

/// Adam moment estimates and step count.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(num_params: usize) -> Self {
        Self {
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(theta: &mut [f64], grad: &[f64], state: &mut AdamState, lr: f64, p: &AdamParams) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - p.beta1.powi(t);
    let c2 = 1.0 - p.beta2.powi(t);
    for (k, (th, &g)) in theta.iter_mut().zip(grad).enumerate() {
        state.m[k] = p.beta1 * state.m[k] + (1.0 - p.beta1) * g;
        state.v[k] = p.beta2 * state.v[k] + (1.0 - p.beta2) * g * g;
        let m_hat = state.m[k] / c1;
        let v_hat = state.v[k] / c2;
        *th -= lr * m_hat / (v_hat.sqrt() + p.eps);
    }
}

pub(crate) fn sample_at(ds: &LabeledDataset, i: usize) -> Sample<'_> {
    match (ds.features(), ds.states()) {
        (Some(f), _) => Sample::Features(&f[i]),
        (_, Some(s)) => Sample::State(&s[i]),
        _ => unreachable!("dataset holds either features or states"),
    }
}

/// Predicted class: `argmax(g₀, g₁)`, ties going to class 0.
pub fn predict(g: [f64; 2]) -> usize {
    usize::from(g[1] > g[0])
}

/// `(accuracy, mean loss)` of `theta` on `ds`.
pub fn evaluate(h: &Hypothesis, theta: &[f64], ds: &LabeledDataset, kind: LossKind) -> Result<(f64, f64)> {
    if ds.is_empty() {
        return Err(QnnError::InvalidArgument("cannot evaluate on an empty dataset".into()));
    }
    let per: Vec<(bool, f64)> = (0..ds.len())
        .into_par_iter()
        .map(|i| {
            let g = h.probabilities(sample_at(ds, i), theta)?;
            Ok((predict(g) == ds.labels[i], loss(g, ds.one_hot(i), kind)))
        })
        .collect::<Result<_>>()?;
    let correct = per.iter().filter(|(ok, _)| *ok).count();
    let total_loss: f64 = per.iter().map(|(_, l)| l).sum();
    let m = ds.len() as f64;
    Ok((correct as f64 / m, total_loss / m))
}

/// Batch-averaged loss and gradient, summed in batch order.
pub fn batch_gradient(
    h: &Hypothesis,
    theta: &[f64],
    ds: &LabeledDataset,
    batch: &[usize],
    kind: LossKind,
    method: GradientMethod,
) -> Result<(f64, Vec<f64>, u64)> {
    let per: Vec<_> = batch
        .par_iter()
        .map(|&i| loss_gradient(h, sample_at(ds, i), ds.one_hot(i), theta, kind, method))
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; theta.len()];
    let mut total = 0.0;
    let mut evals = 0;
    for lg in &per {
        total += lg.loss;
        evals += lg.evaluations;
        for (g, d) in grad.iter_mut().zip(&lg.grad) {
            *g += d;
        }
    }
    let m = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok((total / m, grad, evals))
}

/// Runs `config.iterations` Adam steps on seeded minibatches drawn without
/// replacement from `train`. Parameters and batches come from one ChaCha8
/// stream seeded with `config.seed`. A diverging run is stopped and
/// reported through [`RunRecord::aborted`].
pub fn train(h: &Hypothesis, train: &LabeledDataset, test: &LabeledDataset, config: &TrainConfig) -> Result<RunRecord> {
    if train.is_empty() || test.is_empty() {
        return Err(QnnError::InvalidArgument("train and test sets must be nonempty".into()));
    }
    if config.iterations == 0 {
        return Err(QnnError::InvalidArgument("iterations must be at least 1".into()));
    }
    if config.batch_size == 0 || config.batch_size > train.len() {
        return Err(QnnError::InvalidArgument(format!(
            "batch size {} must be in 1..={}",
            config.batch_size,
            train.len()
        )));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = init_from(&mut rng, h.num_params());
    let mut theta = initial.clone();
    let mut adam = AdamState::new(theta.len());
    let mut evals = Vec::new();
    let mut gradient_evaluations = 0;
    let mut aborted = None;

    let snapshot = |iteration: usize, theta: &[f64]| -> Result<EvalPoint> {
        let (train_acc, train_loss) = evaluate(h, theta, train, config.loss)?;
        let (test_acc, test_loss) = evaluate(h, theta, test, config.loss)?;
        Ok(EvalPoint {
            iteration,
            train_acc,
            train_loss,
            test_acc,
            test_loss,
        })
    };
    evals.push(snapshot(0, &theta)?);

    for it in 1..=config.iterations {
        let batch = sample_indices(&mut rng, train.len(), config.batch_size).into_vec();
        let (batch_loss, grad, n) = batch_gradient(h, &theta, train, &batch, config.loss, config.gradient)?;
        gradient_evaluations += n;
        if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            aborted = Some(format!("non-finite loss {batch_loss} at iteration {it}"));
            break;
        }
        adam_step(&mut theta, &grad, &mut adam, config.learning_rate, &config.adam);
        if let Some(k) = theta.iter().position(|t| !(t.abs() <= PARAM_LIMIT)) {
            aborted = Some(format!("parameter {k} = {} exceeds {PARAM_LIMIT:e} at iteration {it}", theta[k]));
            break;
        }
        if it == config.iterations || (config.eval_every > 0 && it % config.eval_every == 0) {
            evals.push(snapshot(it, &theta)?);
        }
    }

    Ok(RunRecord {
        evals,
        initial_params: initial,
        final_params: theta,
        config: config.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        gradient_evaluations,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_classifier, param_rotation_layer, CircuitTemplate, EntKind, Entangler};
    use crate::data::Samples;
    use crate::encoding::{AmplitudeEncoding, Encoding};
    use crate::statevec::StateVector;
    use std::f64::consts::PI;

    fn toy() -> (Hypothesis, LabeledDataset) {
        let t = CircuitTemplate::new(1, vec![param_rotation_layer(1, 0)]).unwrap();
        let h = Hypothesis::new(t, Encoding::Amplitude(AmplitudeEncoding::new(1)), 0).unwrap();
        let states = vec![StateVector::basis(1, 0).unwrap(), StateVector::basis(1, 1).unwrap()];
        let ds = LabeledDataset::new(Samples::States(states), vec![0, 1], "toy").unwrap();
        (h, ds)
    }

    fn toy_config(seed: u64, lr: f64, iterations: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            batch_size: 2,
            iterations,
            seed,
            eval_every: 1,
            ..TrainConfig::default()
        }
    }

    fn features_model() -> (Hypothesis, LabeledDataset) {
        let n = 3;
        let t = build_classifier(n, 2, &Entangler::Digital(EntKind::Cx)).unwrap();
        let h = Hypothesis::new(t, Encoding::Amplitude(AmplitudeEncoding::new(n)), 1).unwrap();
        let feats: Vec<Vec<f64>> = (0..40)
            .map(|i| (0..8).map(|k| ((i * 7 + k * 3) % 11) as f64 - 5.0 + 0.5).collect())
            .collect();
        let labels = (0..40).map(|i| i % 2).collect();
        (h, LabeledDataset::new(Samples::Features(feats), labels, "synthetic").unwrap())
    }

    #[test]
    fn init_params_statistics() {
        assert_eq!(init_params(10, 3), init_params(10, 3));
        assert_ne!(init_params(10, 3), init_params(10, 4));
        let p = init_params(100_000, 9);
        assert!(p.iter().all(|&x| (0.0..TAU).contains(&x)));
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((mean - PI).abs() < 0.02, "{mean}");
    }

    #[test]
    fn adam_examples() {
        let params = AdamParams::default();
        let mut theta = vec![1.0, -2.0];
        let mut st = AdamState::new(2);
        adam_step(&mut theta, &[0.0, 0.0], &mut st, 0.1, &params);
        assert_eq!(theta, vec![1.0, -2.0]);

        let mut theta = vec![1.0, -2.0];
        let mut st = AdamState::new(2);
        adam_step(&mut theta, &[0.3, -5.0], &mut st, 0.01, &params);
        assert!((theta[0] - (1.0 - 0.01)).abs() < 1e-9);
        assert!((theta[1] - (-2.0 + 0.01)).abs() < 1e-9);

        let (mut a, mut b) = (vec![0.5], vec![0.5]);
        let (mut sa, mut sb) = (AdamState::new(1), AdamState::new(1));
        adam_step(&mut a, &[0.7], &mut sa, 0.05, &params);
        adam_step(&mut b, &[0.7], &mut sb, 0.05, &params);
        assert_eq!((a, sa), (b, sb));
    }

    #[test]
    fn tie_goes_to_class_zero() {
        assert_eq!(predict([0.5, 0.5]), 0);
        assert_eq!(predict([0.4, 0.6]), 1);
    }

    #[test]
    fn evaluate_examples() {
        let (h, ds) = toy();
        // identity circuit: |0⟩ ↦ g=(1,0), |1⟩ ↦ g=(0,1)
        let (acc, l) = evaluate(&h, &[0.0; 3], &ds, LossKind::default()).unwrap();
        assert_eq!(acc, 1.0);
        assert!(l.abs() < 1e-12);
        assert_eq!(evaluate(&h, &[0.3, 1.0, 2.0], &ds, LossKind::Mse).unwrap(), evaluate(&h, &[0.3, 1.0, 2.0], &ds, LossKind::Mse).unwrap());
    }

    #[test]
    fn chance_level_with_random_parameters() {
        let (h, ds) = features_model();
        let accs: Vec<f64> = (0..20)
            .map(|s| evaluate(&h, &init_params(h.num_params(), s), &ds, LossKind::default()).unwrap().0)
            .collect();
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((mean - 0.5).abs() < 0.1, "{mean}");
    }

    #[test]
    fn zero_learning_rate_is_flat() {
        let (h, ds) = features_model();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            batch_size: 8,
            iterations: 5,
            eval_every: 1,
            ..TrainConfig::default()
        };
        let r = train(&h, &ds, &ds, &cfg).unwrap();
        assert_eq!(r.initial_params, r.final_params);
        assert_eq!(r.evals.len(), 6);
        assert!(r.evals.iter().all(|e| e.train_loss == r.evals[0].train_loss && e.test_acc == r.evals[0].test_acc));
    }

    #[test]
    fn toy_problem_converges() {
        let (h, ds) = toy();
        for seed in 0..10 {
            let r = train(&h, &ds, &ds, &toy_config(seed, 0.1, 50)).unwrap();
            assert!(r.aborted.is_none());
            assert!(r.evals.iter().any(|e| e.train_acc == 1.0), "seed {seed}");
            assert_eq!(r.final_eval().unwrap().train_acc, 1.0, "seed {seed}");
        }
    }

    #[test]
    fn toy_loss_decreases_for_most_seeds() {
        let (h, ds) = toy();
        let improved = (0..100)
            .filter(|&seed| {
                let r = train(&h, &ds, &ds, &toy_config(seed, 0.05, 30)).unwrap();
                r.final_eval().unwrap().train_loss < r.evals[0].train_loss
            })
            .count();
        assert!(improved >= 95, "{improved}");
    }

    #[test]
    fn training_is_deterministic() {
        let (h, ds) = features_model();
        let cfg = TrainConfig {
            learning_rate: 0.05,
            batch_size: 8,
            iterations: 6,
            seed: 17,
            eval_every: 2,
            ..TrainConfig::default()
        };
        let a = train(&h, &ds, &ds, &cfg).unwrap();
        let b = train(&h, &ds, &ds, &cfg).unwrap();
        assert_eq!(a.final_params, b.final_params);
        assert_eq!(a.evals, b.evals);
        assert_eq!(a.evals.iter().map(|e| e.iteration).collect::<Vec<_>>(), vec![0, 2, 4, 6]);
    }

    #[test]
    fn batch_gradient_is_average_of_samples() {
        let (h, ds) = features_model();
        let theta = init_params(h.num_params(), 2);
        let batch = [3, 17, 5, 30, 11];
        let (_, g, _) = batch_gradient(&h, &theta, &ds, &batch, LossKind::default(), GradientMethod::Adjoint).unwrap();
        let mut avg = vec![0.0; theta.len()];
        for &i in &batch {
            let lg = loss_gradient(&h, sample_at(&ds, i), ds.one_hot(i), &theta, LossKind::default(), GradientMethod::Adjoint).unwrap();
            for (a, d) in avg.iter_mut().zip(&lg.grad) {
                *a += d / batch.len() as f64;
            }
        }
        for (a, b) in g.iter().zip(&avg) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_mode_evaluation_count() {
        let (h, ds) = features_model();
        let cfg = TrainConfig {
            learning_rate: 0.01,
            batch_size: 4,
            iterations: 3,
            eval_every: 0,
            gradient: GradientMethod::ParameterShift,
            ..TrainConfig::default()
        };
        let r = train(&h, &ds, &ds, &cfg).unwrap();
        let p = h.num_params() as u64;
        assert_eq!(r.gradient_evaluations, 3 * 4 * (2 * p + 1));
        assert_eq!(r.evals.len(), 2);
    }

    #[test]
    fn divergence_aborts() {
        let (h, ds) = features_model();
        let cfg = TrainConfig {
            learning_rate: 1e7,
            batch_size: 4,
            iterations: 3,
            ..TrainConfig::default()
        };
        let r = train(&h, &ds, &ds, &cfg).unwrap();
        assert!(r.aborted.as_deref().unwrap().contains("exceeds"));
    }

    #[test]
    fn config_errors() {
        let (h, ds) = toy();
        assert!(train(&h, &ds, &ds, &TrainConfig { batch_size: 3, ..toy_config(0, 0.1, 1) }).is_err());
        assert!(train(&h, &ds, &ds, &TrainConfig { iterations: 0, ..toy_config(0, 0.1, 1) }).is_err());
    }
}
