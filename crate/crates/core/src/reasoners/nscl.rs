//! Set classifier: shared per-object encoder, sum pooling, decoder.
//!
//! logit = w4 . relu(W3 z + b3) + b4, with z = sum_o relu(W2 relu(W1 x_o + b1) + b2).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ReasonerError;
use crate::perception::GroundedScene;
use crate::seed::SeedKey;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NsclConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub hidden: usize,
}

impl Default for NsclConfig {
    fn default() -> Self {
        NsclConfig { epochs: 40, learning_rate: 0.05, batch_size: 64, hidden: 64 }
    }
}

/// One-hot attribute values followed by coordinates, per object.
pub fn object_features(scene: &GroundedScene) -> Vec<Vec<f64>> {
    let schema = scene.symbolic.schema();
    let offsets = schema.value_offsets();
    let width = schema.total_values();
    scene
        .symbolic
        .rows()
        .iter()
        .enumerate()
        .map(|(o, row)| {
            let mut v = vec![0.0; width + schema.position_dims];
            for (c, &x) in row.iter().enumerate() {
                v[offsets[c] + x as usize] = 1.0;
            }
            if let Some(p) = scene.coords.get(o) {
                v[width..].copy_from_slice(p);
            }
            v
        })
        .collect()
}

/// Weights, biases and (with the same shapes) their gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
    pub w4: Vec<f64>,
    pub b4: Vec<f64>,
}

impl Params {
    fn zeros(d: usize, h: usize) -> Self {
        Params {
            w1: vec![0.0; h * d],
            b1: vec![0.0; h],
            w2: vec![0.0; h * h],
            b2: vec![0.0; h],
            w3: vec![0.0; h * h],
            b3: vec![0.0; h],
            w4: vec![0.0; h],
            b4: vec![0.0; 1],
        }
    }

    pub fn tensors(&self) -> [&Vec<f64>; 8] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3, &self.w4, &self.b4]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 8] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2, &mut self.w3, &mut self.b3, &mut self.w4, &mut self.b4]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepSets {
    pub input_dim: usize,
    pub hidden: usize,
    pub params: Params,
}

/// y = W x + b for a row-major `W` of shape (b.len(), x.len()).
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * n..(i + 1) * n];
        *o = b[i] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// `dx += W^T dy` and `dW += dy x^T`.
fn affine_back(w: &[f64], x: &[f64], dy: &[f64], dw: &mut [f64], db: &mut [f64], dx: Option<&mut [f64]>) {
    let n = x.len();
    for (i, &g) in dy.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        db[i] += g;
        for (d, &xv) in dw[i * n..(i + 1) * n].iter_mut().zip(x) {
            *d += g * xv;
        }
    }
    if let Some(dx) = dx {
        for (i, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            for (d, &wv) in dx.iter_mut().zip(&w[i * n..(i + 1) * n]) {
                *d += g * wv;
            }
        }
    }
}

/// Numerically stable log(1 + e^x).
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Trace {
    h1: Vec<Vec<f64>>,
    h2: Vec<Vec<f64>>,
    z: Vec<f64>,
    g: Vec<f64>,
    logit: f64,
}

impl DeepSets {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = Params::zeros(input_dim, hidden);
        let mut glorot = |w: &mut Vec<f64>, fan_in: usize, fan_out: usize| {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for x in w.iter_mut() {
                *x = rng.random_range(-a..a);
            }
        };
        glorot(&mut p.w1, input_dim, hidden);
        glorot(&mut p.w2, hidden, hidden);
        glorot(&mut p.w3, hidden, hidden);
        glorot(&mut p.w4, hidden, 1);
        DeepSets { input_dim, hidden, params: p }
    }

    fn forward(&self, objects: &[Vec<f64>]) -> Trace {
        let h = self.hidden;
        let p = &self.params;
        let mut z = vec![0.0; h];
        let mut h1s = Vec::with_capacity(objects.len());
        let mut h2s = Vec::with_capacity(objects.len());
        for x in objects {
            let mut h1 = vec![0.0; h];
            affine(&p.w1, &p.b1, x, &mut h1);
            relu(&mut h1);
            let mut h2 = vec![0.0; h];
            affine(&p.w2, &p.b2, &h1, &mut h2);
            relu(&mut h2);
            for (a, b) in z.iter_mut().zip(&h2) {
                *a += b;
            }
            h1s.push(h1);
            h2s.push(h2);
        }
        let mut g = vec![0.0; h];
        affine(&p.w3, &p.b3, &z, &mut g);
        relu(&mut g);
        let logit = p.b4[0] + p.w4.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        Trace { h1: h1s, h2: h2s, z, g, logit }
    }

    fn check_width(&self, objects: &[Vec<f64>]) -> Result<(), ReasonerError> {
        match objects.iter().find(|o| o.len() != self.input_dim) {
            Some(o) => Err(ReasonerError::WidthMismatch { expected: self.input_dim, found: o.len() }),
            None => Ok(()),
        }
    }

    pub fn logit(&self, objects: &[Vec<f64>]) -> Result<f64, ReasonerError> {
        self.check_width(objects)?;
        Ok(self.forward(objects).logit)
    }

    pub fn probability(&self, objects: &[Vec<f64>]) -> Result<f64, ReasonerError> {
        self.logit(objects).map(sigmoid)
    }

    pub fn predict(&self, objects: &[Vec<f64>]) -> Result<bool, ReasonerError> {
        Ok(self.probability(objects)? > 0.5)
    }

    /// Mean binary cross-entropy over the batch and its exact gradient.
    pub fn loss_and_gradient(&self, batch: &[&[Vec<f64>]], labels: &[bool]) -> (f64, Params) {
        let h = self.hidden;
        let p = &self.params;
        let mut grad = Params::zeros(self.input_dim, h);
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for (objects, &y) in batch.iter().zip(labels) {
            let t = self.forward(objects);
            let yf = y as u8 as f64;
            loss += softplus(t.logit) - yf * t.logit;
            let dlogit = (sigmoid(t.logit) - yf) * scale;
            grad.b4[0] += dlogit;
            let mut dg = vec![0.0; h];
            for i in 0..h {
                grad.w4[i] += dlogit * t.g[i];
                dg[i] = if t.g[i] > 0.0 { dlogit * p.w4[i] } else { 0.0 };
            }
            let mut dz = vec![0.0; h];
            affine_back(&p.w3, &t.z, &dg, &mut grad.w3, &mut grad.b3, Some(&mut dz));
            for ((x, h1), h2) in objects.iter().zip(&t.h1).zip(&t.h2) {
                let d2: Vec<f64> = dz.iter().zip(h2).map(|(&d, &a)| if a > 0.0 { d } else { 0.0 }).collect();
                let mut dh1 = vec![0.0; h];
                affine_back(&p.w2, h1, &d2, &mut grad.w2, &mut grad.b2, Some(&mut dh1));
                let d1: Vec<f64> = dh1.iter().zip(h1).map(|(&d, &a)| if a > 0.0 { d } else { 0.0 }).collect();
                affine_back(&p.w1, x, &d1, &mut grad.w1, &mut grad.b1, None);
            }
        }
        (loss * scale, grad)
    }
}

/// Mini-batch SGD on binary cross-entropy; deterministic given `seed`.
pub fn nscl_fit(x: &[Vec<Vec<f64>>], y: &[bool], cfg: &NsclConfig, seed: u64) -> Result<DeepSets, ReasonerError> {
    if x.is_empty() {
        return Err(ReasonerError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(ReasonerError::LengthMismatch { scenes: x.len(), labels: y.len() });
    }
    if cfg.batch_size == 0 || cfg.hidden == 0 || !(cfg.learning_rate > 0.0) {
        return Err(ReasonerError::InvalidConfig("nscl: batch_size, hidden and learning_rate must be positive".into()));
    }
    let input_dim = x.iter().flatten().map(Vec::len).next().unwrap_or(0);
    let mut rng = SeedKey::new(seed).with_str("nscl").rng();
    let mut model = DeepSets::new(input_dim, cfg.hidden, &mut rng);
    for scene in x {
        model.check_width(scene)?;
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for (batch_index, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&[Vec<f64>]> = chunk.iter().map(|&i| x[i].as_slice()).collect();
            let labels: Vec<bool> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, grad) = model.loss_and_gradient(&batch, &labels);
            if !loss.is_finite() {
                return Err(ReasonerError::NonFiniteLoss { epoch, batch: batch_index });
            }
            for (w, g) in model.params.tensors_mut().into_iter().zip(grad.tensors()) {
                for (a, b) in w.iter_mut().zip(g) {
                    *a -= cfg.learning_rate * b;
                }
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_pools_to_zero() {
        let mut rng = SeedKey::new(1).rng();
        let m = DeepSets::new(4, 8, &mut rng);
        let t = m.forward(&[]);
        assert!(t.z.iter().all(|&v| v == 0.0));
        assert!(m.logit(&[]).unwrap().is_finite());
    }

    #[test]
    fn width_checked() {
        let mut rng = SeedKey::new(1).rng();
        let m = DeepSets::new(4, 8, &mut rng);
        assert!(matches!(m.logit(&[vec![0.0; 3]]), Err(ReasonerError::WidthMismatch { .. })));
    }

    #[test]
    fn learns_a_counting_toy() {
        // positive iff exactly one object has the first flag
        let mut rng = SeedKey::new(2).rng();
        let x: Vec<Vec<Vec<f64>>> = (0..400)
            .map(|_| (0..rng.random_range(1..5)).map(|_| vec![rng.random_range(0..2) as f64, 1.0]).collect())
            .collect();
        let y: Vec<bool> = x.iter().map(|s| s.iter().filter(|o| o[0] == 1.0).count() == 1).collect();
        let m = nscl_fit(&x, &y, &NsclConfig { epochs: 200, hidden: 16, ..Default::default() }, 3).unwrap();
        let acc = x.iter().zip(&y).filter(|(s, &l)| m.predict(s).unwrap() == l).count();
        assert!(acc >= 380, "{acc}");
    }
}
