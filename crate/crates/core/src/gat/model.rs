// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layer::{GatLayerParams, LayerCache};
use super::{Adjacency, GatConfig, GatError};
use crate::scalar::Scalar;

/// All trainable tensors. Gradients and optimizer moments share this shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GatParams<T> {
    pub layers: Vec<GatLayerParams<T>>,
    /// `d_emb × C`.
    pub classifier: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> GatParams<T> {
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(GatLayerParams::zeros_like).collect(),
            classifier: Array2::zeros(self.classifier.raw_dim()),
            bias: Array1::zeros(self.bias.len()),
        }
    }

    /// Every tensor as a flat slice, in a fixed order.
    pub fn slices(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.push(l.weight.as_slice().expect("standard layout"));
            out.push(l.attn.as_slice().expect("standard layout"));
        }
        out.push(self.classifier.as_slice().expect("standard layout"));
        out.push(self.bias.as_slice().expect("standard layout"));
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(l.weight.as_slice_mut().expect("standard layout"));
            out.push(l.attn.as_slice_mut().expect("standard layout"));
        }
        out.push(self.classifier.as_slice_mut().expect("standard layout"));
        out.push(self.bias.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn num_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|x| x.is_finite()))
    }

    pub fn cast<U: Scalar>(&self) -> GatParams<U> {
        let c2 = |a: &Array2<T>| a.mapv(|x| U::of(x.to_f64_lossy()));
        GatParams {
            layers: self
                .layers
                .iter()
                .map(|l| GatLayerParams { weight: c2(&l.weight), attn: c2(&l.attn), combine: l.combine })
                .collect(),
            classifier: c2(&self.classifier),
            bias: self.bias.mapv(|x| U::of(x.to_f64_lossy())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GatModel<T> {
    pub config: GatConfig,
    pub params: GatParams<T>,
}

#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub embeddings: Array2<T>,
    pub logits: Array2<T>,
    pub probs: Array2<T>,
}

struct Trace<T> {
    caches: Vec<LayerCache<T>>,
    /// Inverted-dropout multipliers applied to each layer input.
    masks: Vec<Option<Array2<T>>>,
    out: Forward<T>,
}

fn softmax_rows<T: Scalar>(logits: &Array2<T>) -> Array2<T> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    p
}

fn check_labels(n: usize, classes: usize, labels: &[usize], mask: &[bool]) -> Result<usize, GatError> {
    if labels.len() != n || mask.len() != n {
        return Err(GatError::Dim { what: "label/mask length", expected: n, got: labels.len().min(mask.len()) });
    }
    let mut count = 0;
    for (node, (&y, &m)) in labels.iter().zip(mask).enumerate() {
        if m {
            if y >= classes {
                return Err(GatError::Label { node, label: y, classes });
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(GatError::EmptyMask);
    }
    Ok(count)
}

/// Mean negative log-probability of the true class over masked nodes.
pub fn cross_entropy_loss<T: Scalar>(probs: &Array2<T>, labels: &[usize], mask: &[bool]) -> Result<T, GatError> {
    let count = check_labels(probs.nrows(), probs.ncols(), labels, mask)?;
    let mut total = T::zero();
    for (v, (&y, &m)) in labels.iter().zip(mask).enumerate() {
        if m {
            total -= probs[[v, y]].ln();
        }
    }
    Ok(total / T::of(count as f64))
}

/// Same loss computed from logits with a stable log-softmax.
fn cross_entropy_logits<T: Scalar>(logits: &Array2<T>, labels: &[usize], mask: &[bool], count: usize) -> T {
    let mut total = T::zero();
    for (v, row) in logits.rows().into_iter().enumerate() {
        if mask[v] {
            let max = row.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
            let lse = row.iter().map(|&x| (x - max).exp()).sum::<T>().ln() + max;
            total += lse - row[labels[v]];
        }
    }
    total / T::of(count as f64)
}

impl<T: Scalar> GatModel<T> {
    /// Glorot-uniform weights and zero bias drawn from `seed`.
    pub fn new(config: GatConfig, seed: u64) -> Result<Self, GatError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(config.layers);
        let mut d_in = config.in_dim;
        for l in 0..config.layers {
            let layer = GatLayerParams::init(d_in, config.heads, config.head_dim(), config.combine(l), &mut rng);
            d_in = layer.out_dim();
            layers.push(layer);
        }
        let c = config.num_classes;
        let limit = (6.0 / (d_in + c) as f64).sqrt();
        let classifier = Array2::from_shape_simple_fn((d_in, c), || T::of(rng.gen_range(-limit..=limit)));
        let params = GatParams { layers, classifier, bias: Array1::zeros(c) };
        Ok(Self { config, params })
    }

    pub fn cast<U: Scalar>(&self) -> GatModel<U> {
        GatModel { config: self.config.clone(), params: self.params.cast() }
    }

    fn dropout_mask(&self, shape: (usize, usize), rng: Option<&mut ChaCha8Rng>) -> Option<Array2<T>> {
        let p = self.config.dropout;
        let rng = rng?;
        if p <= 0.0 {
            return None;
        }
        let keep = T::of(1.0 / (1.0 - p));
        Some(Array2::from_shape_simple_fn(shape, || if rng.gen::<f64>() < p { T::zero() } else { keep }))
    }

    fn trace(&self, adj: &Adjacency, x: &Array2<T>, mut rng: Option<&mut ChaCha8Rng>) -> Result<Trace<T>, GatError> {
        if x.ncols() != self.config.in_dim {
            return Err(GatError::Dim { what: "feature width", expected: self.config.in_dim, got: x.ncols() });
        }
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.params.layers.len());
        let mut masks = Vec::with_capacity(self.params.layers.len());
        for layer in &self.params.layers {
            let mask = self.dropout_mask(h.dim(), rng.as_deref_mut());
            if let Some(m) = &mask {
                h *= m;
            }
            let (out, cache) = layer.forward_cached(adj, h)?;
            caches.push(cache);
            masks.push(mask);
            h = out;
        }
        let logits = h.dot(&self.params.classifier) + &self.params.bias;
        let probs = softmax_rows(&logits);
        Ok(Trace { caches, masks, out: Forward { embeddings: h, logits, probs } })
    }

    /// Forward pass. Dropout is applied iff `dropout_rng` is given.
    pub fn forward(
        &self,
        adj: &Adjacency,
        x: &Array2<T>,
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Forward<T>, GatError> {
        Ok(self.trace(adj, x, dropout_rng)?.out)
    }

    /// Arg-max class per node in evaluation mode.
    pub fn predict(&self, adj: &Adjacency, x: &Array2<T>) -> Result<Vec<usize>, GatError> {
        let f = self.forward(adj, x, None)?;
        Ok(f.logits
            .rows()
            .into_iter()
            .map(|r| {
                let mut best = 0;
                for (c, &v) in r.iter().enumerate() {
                    if v > r[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }

    pub fn loss(
        &self,
        adj: &Adjacency,
        x: &Array2<T>,
        labels: &[usize],
        mask: &[bool],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<T, GatError> {
        let count = check_labels(adj.len(), self.config.num_classes, labels, mask)?;
        let f = self.forward(adj, x, dropout_rng)?;
        Ok(cross_entropy_logits(&f.logits, labels, mask, count))
    }

    /// Mean masked cross-entropy and its gradient with respect to every
    /// parameter.
    pub fn loss_and_grad(
        &self,
        adj: &Adjacency,
        x: &Array2<T>,
        labels: &[usize],
        mask: &[bool],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(T, GatParams<T>), GatError> {
        let count = check_labels(adj.len(), self.config.num_classes, labels, mask)?;
        let tr = self.trace(adj, x, dropout_rng)?;
        let loss = cross_entropy_logits(&tr.out.logits, labels, mask, count);

        let scale = T::one() / T::of(count as f64);
        let mut d_logits = tr.out.probs.clone();
        for (v, mut row) in d_logits.axis_iter_mut(Axis(0)).enumerate() {
            if mask[v] {
                row[labels[v]] -= T::one();
                row *= scale;
            } else {
                row.fill(T::zero());
            }
        }
        let d_classifier = tr.out.embeddings.t().dot(&d_logits);
        let d_bias = d_logits.sum_axis(Axis(0));
        let mut d_h = d_logits.dot(&self.params.classifier.t());

        let mut layer_grads = Vec::with_capacity(self.params.layers.len());
        for (l, layer) in self.params.layers.iter().enumerate().rev() {
            let (grad, d_in) = layer.backward(adj, &tr.caches[l], &d_h, l > 0);
            layer_grads.push(grad);
            if let Some(mut d_in) = d_in {
                if let Some(m) = &tr.masks[l] {
                    d_in *= m;
                }
                d_h = d_in;
            }
        }
        layer_grads.reverse();
        Ok((loss, GatParams { layers: layer_grads, classifier: d_classifier, bias: d_bias }))
    }
}
