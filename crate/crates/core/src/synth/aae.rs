use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mapper::{FeatureMapper, PRESENCE_THRESHOLD};
use super::nn::{sigmoid, Activation, Adam, Gradients, Mlp};
use super::trajectory::Trajectory;
use super::SynthError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorKind {
    StandardGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub dim: usize,
}

impl PriorSpec {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            PriorKind::StandardGaussian => (0..self.dim).map(|_| rng.sample(StandardNormal)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AaeConfig {
    pub latent_dim: usize,
    /// Encoder emits a mean and log standard deviation per latent
    /// coordinate and codes are drawn as `μ + σ·ε`; otherwise codes are
    /// the encoder output itself.
    pub gaussian_posterior: bool,
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    /// Drop the reconstruction error on time coordinates of categories the
    /// target trajectory does not contain. The feature mapping writes 0
    /// there, which would otherwise pull decoded times toward the
    /// earliest support point.
    pub mask_absent_times: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_reconstruction: f64,
    pub lr_discriminator: f64,
    pub lr_generator: f64,
    /// Fraction of each learning rate left at the last epoch; rates fall
    /// linearly from full strength at epoch 0.
    pub lr_final_fraction: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for AaeConfig {
    fn default() -> Self {
        AaeConfig {
            latent_dim: 8,
            gaussian_posterior: true,
            encoder_hidden: vec![64, 64],
            decoder_hidden: vec![64, 64],
            discriminator_hidden: vec![64, 64],
            mask_absent_times: true,
            epochs: 3000,
            batch_size: 32,
            lr_reconstruction: 1e-3,
            lr_discriminator: 1e-4,
            lr_generator: 2e-4,
            lr_final_fraction: 0.1,
            optimizer: Optimizer::Adam { beta1: 0.5, beta2: 0.999 },
            seed: 0,
        }
    }
}

impl AaeConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::ConfigInvalid(m.to_string()));
        if self.latent_dim == 0 {
            return bad("latent_dim must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        let hidden = self.encoder_hidden.iter().chain(&self.decoder_hidden).chain(&self.discriminator_hidden);
        if hidden.clone().any(|&h| h == 0) {
            return bad("hidden layer sizes must be positive");
        }
        for (name, lr) in [
            ("lr_reconstruction", self.lr_reconstruction),
            ("lr_discriminator", self.lr_discriminator),
            ("lr_generator", self.lr_generator),
        ] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(SynthError::ConfigInvalid(format!("{name} must be a positive finite number")));
            }
        }
        if !(self.lr_final_fraction.is_finite() && self.lr_final_fraction > 0.0 && self.lr_final_fraction <= 1.0) {
            return bad("lr_final_fraction must be in (0, 1]");
        }
        if let Optimizer::Adam { beta1, beta2 } = self.optimizer {
            if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2)) {
                return bad("Adam betas must be in [0, 1)");
            }
        }
        Ok(())
    }

    fn lr_scale(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return 1.0;
        }
        1.0 - (1.0 - self.lr_final_fraction) * epoch as f64 / (self.epochs - 1) as f64
    }
}

/// Encoder `φ(H) → z`, decoder `z → φ(H)` with sigmoid outputs, and a
/// discriminator `z → logit` (positive means "drawn from the prior").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AaeModel {
    pub config: AaeConfig,
    pub prior: PriorSpec,
    pub mapper: FeatureMapper,
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub discriminator: Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub batch: usize,
    pub reconstruction: f64,
    pub discriminator: f64,
    pub generator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Training {
    pub model: AaeModel,
    pub curve: Vec<LossRecord>,
}

/// Update rule for one network in one phase.
enum Stepper {
    Sgd,
    Adam(Adam),
}

impl Stepper {
    fn new(opt: Optimizer, net: &Mlp) -> Self {
        match opt {
            Optimizer::Sgd => Stepper::Sgd,
            Optimizer::Adam { beta1, beta2 } => Stepper::Adam(Adam::new(net, beta1, beta2)),
        }
    }

    fn step(&mut self, net: &mut Mlp, grads: &Gradients, lr: f64) {
        match self {
            Stepper::Sgd => net.descend(grads, lr),
            Stepper::Adam(a) => a.step(net, grads, lr),
        }
    }
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    std::iter::once(input).chain(hidden.iter().copied()).chain(std::iter::once(output)).collect()
}

impl AaeModel {
    /// Untrained networks drawn from `rng`.
    pub fn init<R: Rng>(config: &AaeConfig, mapper: &FeatureMapper, rng: &mut R) -> Self {
        let (d, z) = (mapper.dim(), config.latent_dim);
        AaeModel {
            config: config.clone(),
            prior: PriorSpec { kind: PriorKind::StandardGaussian, dim: z },
            mapper: mapper.clone(),
            encoder: Mlp::new(
                &sizes(d, &config.encoder_hidden, z * if config.gaussian_posterior { 2 } else { 1 }),
                Activation::Tanh,
                Activation::Linear,
                rng,
            ),
            decoder: Mlp::new(&sizes(z, &config.decoder_hidden, d), Activation::Tanh, Activation::Sigmoid, rng),
            discriminator: Mlp::new(
                &sizes(z, &config.discriminator_hidden, 1),
                Activation::Tanh,
                Activation::Linear,
                rng,
            ),
        }
    }

    /// Code for encoder output `out` under noise `eps`.
    fn code(&self, out: &[f64], eps: &[f64]) -> Vec<f64> {
        let d = self.prior.dim;
        if self.config.gaussian_posterior {
            (0..d).map(|j| out[j] + out[d + j].exp() * eps[j]).collect()
        } else {
            out.to_vec()
        }
    }

    /// Gradient at the encoder output given `dL/dz`.
    fn code_backward(&self, out: &[f64], eps: &[f64], dz: &[f64]) -> Vec<f64> {
        let d = self.prior.dim;
        if self.config.gaussian_posterior {
            dz.iter().copied().chain((0..d).map(|j| dz[j] * eps[j] * out[d + j].exp())).collect()
        } else {
            dz.to_vec()
        }
    }

    /// Posterior mean (the code itself for a deterministic encoder).
    pub fn encode_mean(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.encoder.forward(x);
        out.truncate(self.prior.dim);
        out
    }

    /// One draw from the posterior.
    pub fn encode_sample<R: Rng>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let eps = self.noise(rng);
        self.code(&self.encoder.forward(x), &eps)
    }

    fn noise<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        if self.config.gaussian_posterior {
            (0..self.prior.dim).map(|_| rng.sample(StandardNormal)).collect()
        } else {
            Vec::new()
        }
    }

    /// Decodes the posterior mean.
    pub fn reconstruct(&self, x: &[f64]) -> Vec<f64> {
        self.decoder.forward(&self.encode_mean(x))
    }

    /// Probability that `z` came from the prior.
    pub fn discriminate(&self, z: &[f64]) -> f64 {
        sigmoid(self.discriminator.forward(z)[0])
    }
}

/// `max(l, 0) − l·y + ln(1 + e^{−|l|})`, the cross-entropy of `sigmoid(l)` against `y`.
pub fn bce_with_logit(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p()
}

/// Mean squared reconstruction error over the batch and all coordinates,
/// with gradients for encoder and decoder. `noise[i]` is the posterior
/// noise for `batch[i]` (ignored by a deterministic encoder). With
/// `mask_absent_times`, each time coordinate's term is multiplied by the
/// target's presence bit for that category.
pub fn reconstruction_grads(m: &AaeModel, batch: &[&[f64]], noise: &[Vec<f64>]) -> (f64, Gradients, Gradients) {
    let mut ge = Gradients::zeros(&m.encoder);
    let mut gd = Gradients::zeros(&m.decoder);
    let scale = 1.0 / (batch.len() * m.decoder.output_dim()) as f64;
    let mask = m.config.mask_absent_times;
    // features alternate presence, time per category
    let weight = |x: &[f64], i: usize| if mask && i % 2 == 1 { x[i - 1] } else { 1.0 };
    let mut loss = 0.0;
    for (x, eps) in batch.iter().zip(noise) {
        let te = m.encoder.trace(x);
        let enc_out = te.last().unwrap();
        let td = m.decoder.trace(&m.code(enc_out, eps));
        let out = td.last().unwrap();
        let g: Vec<f64> =
            out.iter().zip(x.iter()).enumerate().map(|(i, (y, t))| weight(x, i) * 2.0 * (y - t) * scale).collect();
        loss += out.iter().zip(x.iter()).enumerate().map(|(i, (y, t))| weight(x, i) * (y - t) * (y - t)).sum::<f64>()
            * scale;
        let dz = m.decoder.backward(&td, &g, &mut gd);
        m.encoder.backward(&te, &m.code_backward(enc_out, eps, &dz), &mut ge);
    }
    (loss, ge, gd)
}

/// Mean cross-entropy of the discriminator over encoder codes (label 0)
/// and prior draws (label 1).
pub fn discriminator_grads(m: &AaeModel, codes: &[Vec<f64>], prior: &[Vec<f64>]) -> (f64, Gradients) {
    let mut g = Gradients::zeros(&m.discriminator);
    let scale = 1.0 / (codes.len() + prior.len()) as f64;
    let mut loss = 0.0;
    for (z, y) in codes.iter().map(|z| (z, 0.0)).chain(prior.iter().map(|z| (z, 1.0))) {
        let t = m.discriminator.trace(z);
        let logit = t.last().unwrap()[0];
        loss += bce_with_logit(logit, y) * scale;
        m.discriminator.backward(&t, &[(sigmoid(logit) - y) * scale], &mut g);
    }
    (loss, g)
}

/// Mean cross-entropy of encoder codes against the "prior" label, with
/// gradients for the encoder only; the discriminator is held fixed.
pub fn generator_grads(m: &AaeModel, batch: &[&[f64]], noise: &[Vec<f64>]) -> (f64, Gradients) {
    let mut ge = Gradients::zeros(&m.encoder);
    let mut scratch = Gradients::zeros(&m.discriminator);
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for (x, eps) in batch.iter().zip(noise) {
        let te = m.encoder.trace(x);
        let enc_out = te.last().unwrap();
        let td = m.discriminator.trace(&m.code(enc_out, eps));
        let logit = td.last().unwrap()[0];
        loss += bce_with_logit(logit, 1.0) * scale;
        let dz = m.discriminator.backward(&td, &[(sigmoid(logit) - 1.0) * scale], &mut scratch);
        m.encoder.backward(&te, &m.code_backward(enc_out, eps, &dz), &mut ge);
    }
    (loss, ge)
}

/// Minibatch training. Each batch runs a reconstruction step,
/// a discriminator step and a generator step, in that order.
pub fn train(dataset: &[Trajectory], mapper: &FeatureMapper, config: &AaeConfig) -> Result<Training, SynthError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(SynthError::EmptyDataset);
    }
    let features = dataset.iter().map(|h| mapper.encode(h)).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut m = AaeModel::init(config, mapper, &mut rng);
    let mut rec_enc = Stepper::new(config.optimizer, &m.encoder);
    let mut rec_dec = Stepper::new(config.optimizer, &m.decoder);
    let mut disc = Stepper::new(config.optimizer, &m.discriminator);
    let mut gen = Stepper::new(config.optimizer, &m.encoder);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs * features.len().div_ceil(config.batch_size));
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let k = config.lr_scale(epoch);
        for (bi, idx) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&[f64]> = idx.iter().map(|&i| features[i].as_slice()).collect();

            let noise: Vec<Vec<f64>> = batch.iter().map(|_| m.noise(&mut rng)).collect();
            let (reconstruction, ge, gd) = reconstruction_grads(&m, &batch, &noise);
            rec_enc.step(&mut m.encoder, &ge, k * config.lr_reconstruction);
            rec_dec.step(&mut m.decoder, &gd, k * config.lr_reconstruction);

            let codes: Vec<Vec<f64>> = batch.iter().map(|x| m.encode_sample(x, &mut rng)).collect();
            let prior: Vec<Vec<f64>> = (0..batch.len()).map(|_| m.prior.sample(&mut rng)).collect();
            let (discriminator, gdisc) = discriminator_grads(&m, &codes, &prior);
            disc.step(&mut m.discriminator, &gdisc, k * config.lr_discriminator);

            let noise: Vec<Vec<f64>> = batch.iter().map(|_| m.noise(&mut rng)).collect();
            let (generator, ggen) = generator_grads(&m, &batch, &noise);
            gen.step(&mut m.encoder, &ggen, k * config.lr_generator);

            let rec = LossRecord { epoch, batch: bi, reconstruction, discriminator, generator };
            if ![reconstruction, discriminator, generator].iter().all(|l| l.is_finite())
                || !(m.encoder.all_finite() && m.decoder.all_finite() && m.discriminator.all_finite())
            {
                return Err(SynthError::NonFiniteLoss(rec));
            }
            curve.push(rec);
        }
    }
    Ok(Training { model: m, curve })
}

/// Decodes `n` prior draws. Deterministic in `seed`.
pub fn sample(model: &AaeModel, n: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z = model.prior.sample(&mut rng);
            let v = model.decoder.forward(&z);
            model.mapper.decode(&v).expect("decoder output matches mapper dimension")
        })
        .collect()
}

/// Mean squared error of `reconstruct` over the encoded dataset.
pub fn reconstruction_error(model: &AaeModel, dataset: &[Trajectory]) -> Result<f64, SynthError> {
    let mut total = 0.0;
    for h in dataset {
        let x = model.mapper.encode(h)?;
        let y = model.reconstruct(&x);
        total += x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64;
    }
    Ok(total / dataset.len().max(1) as f64)
}

/// Fraction of `(trajectory, category)` presence bits that survive
/// encode → reconstruct → threshold.
pub fn presence_accuracy(model: &AaeModel, dataset: &[Trajectory]) -> Result<f64, SynthError> {
    let (mut hit, mut total) = (0usize, 0usize);
    for h in dataset {
        let x = model.mapper.encode(h)?;
        let y = model.reconstruct(&x);
        for c in (0..x.len()).step_by(2) {
            hit += usize::from((x[c] >= PRESENCE_THRESHOLD) == (y[c] >= PRESENCE_THRESHOLD));
            total += 1;
        }
    }
    Ok(if total == 0 { 1.0 } else { hit as f64 / total as f64 })
}

/// Accuracy of the trained discriminator on posterior draws for `dataset`
/// (label 0) against as many fresh prior draws (label 1). Values near 0.5
/// mean the aggregated posterior looks like the prior.
pub fn discriminator_accuracy(model: &AaeModel, dataset: &[Trajectory], seed: u64) -> Result<f64, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0usize;
    for h in dataset {
        let z = model.encode_sample(&model.mapper.encode(h)?, &mut rng);
        correct += usize::from(model.discriminate(&z) < 0.5);
        let p = model.prior.sample(&mut rng);
        correct += usize::from(model.discriminate(&p) >= 0.5);
    }
    Ok(correct as f64 / (2 * dataset.len()).max(1) as f64)
}
