//! ML susceptibility: train per-interpretation response predictors on CRP
//! subsets and find the training-set sizes at which prediction beats chance
//! and reaches a target accuracy.
//!
//! Accuracy is bitwise: the fraction of correctly predicted response bits
//! over `holdout x width` predictions. A sweep point beats chance when the
//! one-sided 99% Wilson lower bound on that accuracy exceeds 0.5. Bits of
//! one response are not independent trials, so the bound uses the trial
//! count deflated by the observed design effect.

mod mlp;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::CrpDataset;
use crate::encoding::{Bitstring24, Interpretation, BITS};
use crate::error::{config, domain, shape, Error, Result};
use crate::jones::Observables;

pub use mlp::{sigmoid, Mlp};
use mlp::{Adam, Workspace};

/// `Φ⁻¹(0.99)`, the one-sided 99% normal quantile.
pub const Z_99_ONE_SIDED: f64 = 2.326_347_874_040_840_8;
/// `Φ⁻¹(0.995)`, for two-sided 99% bands.
pub const Z_99_TWO_SIDED: f64 = 2.575_829_303_548_900_4;

/// Accuracy a sweep point must reach to count towards `N_65`.
pub const TARGET_ACCURACY: f64 = 0.65;

/// Relative-error denominator floor for the gradient check, so parameters
/// with a vanishing gradient compare by absolute error.
pub const GRADIENT_CHECK_FLOOR: f64 = 1e-6;
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;

/// How a challenge is presented to the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMode {
    /// The 24 challenge bits mapped `{0, 1} → {-1, +1}`.
    #[default]
    Bits,
    /// The raw `(E_x^2, Δφ)` pair, each scaled to `[-1, 1]`.
    Observables,
}

impl FeatureMode {
    pub fn dim(self) -> usize {
        match self {
            FeatureMode::Bits => BITS,
            FeatureMode::Observables => 2,
        }
    }

    fn write(self, crp: &Crp, out: &mut Vec<f64>) {
        match self {
            FeatureMode::Bits => out.extend(
                crp.challenge
                    .bits()
                    .iter()
                    .map(|&b| if b { 1.0 } else { -1.0 }),
            ),
            FeatureMode::Observables => {
                out.push(2.0 * crp.observables.ex2 - 1.0);
                out.push(crp.observables.dphi / PI - 1.0);
            }
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::Bits => "bits",
            FeatureMode::Observables => "observables",
        })
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" => Ok(FeatureMode::Bits),
            "observables" => Ok(FeatureMode::Observables),
            other => Err(domain(format!("unknown feature mode {other:?}"))),
        }
    }
}

/// One challenge-response pair as seen by the attacker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crp {
    pub challenge: Bitstring24,
    pub observables: Observables,
    pub response: u32,
}

/// Pair every challenge of `ds` with its response under `interp`.
pub fn crps_from_interpretation(ds: &CrpDataset, interp: &Interpretation) -> Result<Vec<Crp>> {
    if ds.len() != interp.responses.len() {
        return Err(shape(format!(
            "{} challenges but {} responses",
            ds.len(),
            interp.responses.len()
        )));
    }
    Ok(ds
        .challenges()
        .iter()
        .zip(ds.challenge_bits())
        .zip(interp.responses.values())
        .map(|((&observables, &challenge), &response)| Crp {
            challenge,
            observables,
            response,
        })
        .collect())
}

/// Randomly permute responses against challenges (an unlearnable control
/// with the same response marginals).
pub fn shuffle_responses(crps: &[Crp], seed: u64) -> Vec<Crp> {
    let mut responses: Vec<u32> = crps.iter().map(|c| c.response).collect();
    responses.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    crps.iter()
        .zip(responses)
        .map(|(c, response)| Crp { response, ..*c })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub train_sizes: Vec<usize>,
    pub holdout: usize,
    pub seed: u64,
    pub features: FeatureMode,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 50,
            train_sizes: vec![100, 1_000, 3_000, 10_000, 30_000, 100_000],
            holdout: 20_000,
            seed: 0,
            features: FeatureMode::Bits,
        }
    }
}

impl AttackConfig {
    fn validate_training(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(config("batch size and epochs must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.hidden.contains(&0) {
            return Err(config("hidden layer sizes must be positive"));
        }
        Ok(())
    }

    fn layer_sizes(&self, output_dim: usize) -> Vec<usize> {
        let mut sizes = vec![self.features.dim()];
        sizes.extend(&self.hidden);
        sizes.push(output_dim);
        sizes
    }
}

/// A trained (or freshly initialized) per-bit response predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub network: Mlp,
    pub features: FeatureMode,
}

impl PredictorModel {
    /// Glorot-initialized model for `response_width`-bit responses.
    pub fn new(cfg: &AttackConfig, response_width: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            network: Mlp::glorot(&cfg.layer_sizes(response_width), &mut rng)?,
            features: cfg.features,
        })
    }

    pub fn zeros(sizes: &[usize], features: FeatureMode) -> Result<Self> {
        if sizes.first() != Some(&features.dim()) {
            return Err(domain(format!("input size must be {} for {features} features", features.dim())));
        }
        Ok(Self {
            network: Mlp::zeros(sizes)?,
            features,
        })
    }

    pub fn response_width(&self) -> usize {
        self.network.output_dim()
    }

    /// Per-bit probabilities that the response bit is one, bit 0 first.
    pub fn predict(&self, crp: &Crp) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.features.dim());
        self.features.write(crp, &mut x);
        self.network.predict(&x)
    }

    fn encode(&self, crps: &[Crp]) -> (Vec<f64>, Vec<f64>) {
        let width = self.response_width();
        let mut inputs = Vec::with_capacity(crps.len() * self.features.dim());
        let mut targets = Vec::with_capacity(crps.len() * width);
        for c in crps {
            self.features.write(c, &mut inputs);
            targets.extend((0..width).map(|b| f64::from((c.response >> (width - 1 - b)) & 1)));
        }
        (inputs, targets)
    }

    /// Mean per-bit cross-entropy on `crps`.
    pub fn loss(&self, crps: &[Crp]) -> f64 {
        let (x, y) = self.encode(crps);
        self.network.loss(&x, &y, crps.len())
    }

    /// Analytic gradient of [`loss`](Self::loss) over the flat parameters.
    pub fn gradient(&self, crps: &[Crp]) -> Vec<f64> {
        let (x, y) = self.encode(crps);
        let mut grad = vec![0.0; self.network.params().len()];
        self.network
            .loss_and_gradient(&x, &y, crps.len(), &mut grad, &mut Workspace::default());
        grad
    }

    /// Distance of the nearest hidden ReLU from its kink over `crps`.
    pub fn kink_margin(&self, crps: &[Crp]) -> f64 {
        let (x, _) = self.encode(crps);
        self.network.kink_margin(&x, crps.len())
    }

    pub fn is_finite(&self) -> bool {
        self.network.params().iter().all(|p| p.is_finite())
    }
}

/// Mini-batch Adam on a fixed training set, reproducible from a seed.
pub struct Trainer {
    model: PredictorModel,
    adam: Adam,
    batch_size: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    order: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
    step: usize,
    grad: Vec<f64>,
    ws: Workspace,
    batch_x: Vec<f64>,
    batch_y: Vec<f64>,
}

impl Trainer {
    pub fn new(model: PredictorModel, train: &[Crp], cfg: &AttackConfig, seed: u64) -> Result<Self> {
        if train.is_empty() {
            return Err(domain("training set is empty"));
        }
        cfg.validate_training()?;
        let width = model.response_width();
        if width < 32 {
            if let Some(c) = train.iter().find(|c| c.response >> width != 0) {
                return Err(shape(format!("response {} wider than {width} bits", c.response)));
            }
        }
        let (inputs, targets) = model.encode(train);
        let n_params = model.network.params().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Ok(Self {
            adam: Adam::new(n_params, cfg.learning_rate),
            batch_size: cfg.batch_size,
            order: (0..train.len()).collect(),
            cursor: train.len(),
            rng,
            step: 0,
            grad: vec![0.0; n_params],
            ws: Workspace::default(),
            batch_x: Vec::new(),
            batch_y: Vec::new(),
            inputs,
            targets,
            model,
        })
    }

    fn n_samples(&self) -> usize {
        self.order.len()
    }

    /// Steps in one pass over the training set.
    pub fn steps_per_epoch(&self) -> usize {
        self.n_samples().div_ceil(self.batch_size)
    }

    /// One optimizer step on the next mini-batch; reshuffles at epoch
    /// boundaries. Returns the batch loss.
    pub fn step(&mut self) -> Result<f64> {
        if self.cursor >= self.n_samples() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let end = (self.cursor + self.batch_size).min(self.n_samples());
        let (din, dout) = (self.model.network.input_dim(), self.model.network.output_dim());
        self.batch_x.clear();
        self.batch_y.clear();
        for &i in &self.order[self.cursor..end] {
            self.batch_x.extend_from_slice(&self.inputs[i * din..(i + 1) * din]);
            self.batch_y.extend_from_slice(&self.targets[i * dout..(i + 1) * dout]);
        }
        let batch = end - self.cursor;
        self.cursor = end;
        let loss = self.model.network.loss_and_gradient(
            &self.batch_x,
            &self.batch_y,
            batch,
            &mut self.grad,
            &mut self.ws,
        );
        self.step += 1;
        if !loss.is_finite() {
            return Err(Error::Divergence { step: self.step, loss });
        }
        self.adam.step(self.model.network.params_mut(), &self.grad);
        if !self.model.is_finite() {
            return Err(Error::Divergence { step: self.step, loss: f64::NAN });
        }
        Ok(loss)
    }

    pub fn model(&self) -> &PredictorModel {
        &self.model
    }

    pub fn into_model(self) -> PredictorModel {
        self.model
    }
}

/// Train a fresh predictor for `cfg.epochs` epochs.
pub fn train_predictor(train: &[Crp], response_width: usize, cfg: &AttackConfig) -> Result<PredictorModel> {
    let model = PredictorModel::new(cfg, response_width, cfg.seed)?;
    let mut trainer = Trainer::new(model, train, cfg, cfg.seed)?;
    for _ in 0..cfg.epochs * trainer.steps_per_epoch() {
        trainer.step()?;
    }
    Ok(trainer.into_model())
}

/// Correctly predicted bits of each holdout record, where a bit is predicted
/// one when its probability is at least 0.5.
pub fn correct_per_record(model: &PredictorModel, holdout: &[Crp]) -> Vec<u32> {
    let width = model.response_width();
    holdout
        .iter()
        .map(|c| {
            model
                .predict(c)
                .iter()
                .enumerate()
                .filter(|&(b, &p)| (p >= 0.5) == ((c.response >> (width - 1 - b)) & 1 == 1))
                .count() as u32
        })
        .collect()
}

/// Correctly predicted bits over all of `holdout`.
pub fn correct_bits(model: &PredictorModel, holdout: &[Crp]) -> u64 {
    correct_per_record(model, holdout).iter().map(|&c| u64::from(c)).sum()
}

/// Fraction of correctly predicted bits over `holdout x width` predictions.
pub fn evaluate_predictor(model: &PredictorModel, holdout: &[Crp]) -> Result<f64> {
    if holdout.is_empty() {
        return Err(domain("holdout set is empty"));
    }
    let total = holdout.len() * model.response_width();
    Ok(correct_bits(model, holdout) as f64 / total as f64)
}

fn wilson(p: f64, n: f64, z: f64) -> f64 {
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - spread) / (1.0 + z2 / n)).max(0.0)
}

/// One-sided Wilson score lower bound on a binomial proportion.
pub fn wilson_lower_bound(successes: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    wilson(successes as f64 / trials as f64, trials as f64, z)
}

/// Variance inflation of per-record correct counts relative to `width`
/// independent Bernoulli trials, floored at 1.
///
/// Bits of one response share a challenge, so their correctness is
/// correlated; treating `records x width` bits as independent understates
/// the variance of the accuracy.
pub fn design_effect(counts: &[u32], width: usize) -> f64 {
    if counts.len() < 2 || width == 0 {
        return 1.0;
    }
    let n = counts.len() as f64;
    let w = width as f64;
    let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / n;
    let var = counts.iter().map(|&c| (f64::from(c) - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let p = mean / w;
    let binomial = w * p * (1.0 - p);
    if binomial > 0.0 {
        (var / binomial).max(1.0)
    } else {
        1.0
    }
}

/// Accuracy, design effect and the Wilson lower bound at the effective
/// number of independent trials `records x width / design_effect`.
pub fn clustered_lower_bound(counts: &[u32], width: usize, z: f64) -> (f64, f64, f64) {
    let trials = (counts.len() * width) as f64;
    if trials == 0.0 {
        return (0.0, 1.0, 0.0);
    }
    let accuracy = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / trials;
    let deff = design_effect(counts, width);
    (accuracy, deff, wilson(accuracy, trials / deff, z))
}

/// Result for one training-set size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub train_size: usize,
    pub accuracy: f64,
    /// Variance inflation from correlated bits within a response.
    pub design_effect: f64,
    /// One-sided 99% Wilson bound at the design-effect-adjusted trial count.
    pub lower_bound: f64,
    pub beats_chance: bool,
    pub reaches_target: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub response_width: usize,
    pub holdout: usize,
    pub points: Vec<SweepPoint>,
    /// Smallest swept size whose lower bound exceeds 0.5.
    pub n_chance: Option<usize>,
    /// Smallest swept size with accuracy of at least [`TARGET_ACCURACY`].
    pub n_65: Option<usize>,
}

/// Train and evaluate at every `cfg.train_sizes` entry.
///
/// One seeded permutation of the data puts the holdout set first and draws
/// every training set as a prefix of the remainder, so the sets are
/// disjoint and nested.
pub fn susceptibility_sweep(crps: &[Crp], response_width: usize, cfg: &AttackConfig) -> Result<AttackResult> {
    cfg.validate_training()?;
    if cfg.train_sizes.is_empty() || cfg.train_sizes.contains(&0) || cfg.holdout == 0 {
        return Err(config("train sizes and holdout must be positive"));
    }
    let largest = *cfg.train_sizes.iter().max().expect("non-empty");
    if largest + cfg.holdout > crps.len() {
        return Err(config(format!(
            "sweep needs {} CRPs (largest train size {largest} + holdout {}), dataset has {}",
            largest + cfg.holdout,
            cfg.holdout,
            crps.len()
        )));
    }
    let mut order: Vec<usize> = (0..crps.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let holdout: Vec<Crp> = order[..cfg.holdout].iter().map(|&i| crps[i]).collect();
    let pool = &order[cfg.holdout..];

    let points = cfg
        .train_sizes
        .par_iter()
        .map(|&size| -> Result<SweepPoint> {
            let train: Vec<Crp> = pool[..size].iter().map(|&i| crps[i]).collect();
            let model = train_predictor(&train, response_width, cfg)?;
            let counts = correct_per_record(&model, &holdout);
            let (accuracy, design_effect, lower_bound) =
                clustered_lower_bound(&counts, response_width, Z_99_ONE_SIDED);
            Ok(SweepPoint {
                train_size: size,
                accuracy,
                design_effect,
                lower_bound,
                beats_chance: lower_bound > 0.5,
                reaches_target: accuracy >= TARGET_ACCURACY,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let smallest = |pred: fn(&SweepPoint) -> bool| points.iter().filter(|p| pred(p)).map(|p| p.train_size).min();
    Ok(AttackResult {
        response_width,
        holdout: cfg.holdout,
        n_chance: smallest(|p| p.beats_chance),
        n_65: smallest(|p| p.reaches_target),
        points,
    })
}

/// Largest relative error between analytic gradients and central finite
/// differences (step [`GRADIENT_CHECK_STEP`]) over every parameter.
///
/// Only meaningful away from ReLU kinks; see [`PredictorModel::kink_margin`].
pub fn gradient_check(model: &PredictorModel, sample: &[Crp]) -> f64 {
    let analytic = model.gradient(sample);
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        let original = probe.network.params()[i];
        probe.network.params_mut()[i] = original + GRADIENT_CHECK_STEP;
        let up = probe.loss(sample);
        probe.network.params_mut()[i] = original - GRADIENT_CHECK_STEP;
        let down = probe.loss(sample);
        probe.network.params_mut()[i] = original;
        let numeric = (up - down) / (2.0 * GRADIENT_CHECK_STEP);
        let denom = a.abs().max(numeric.abs()).max(GRADIENT_CHECK_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}
