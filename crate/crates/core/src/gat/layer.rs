// SPDX-License-Identifier: Apache-2.0

use ndarray::{s, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Adjacency, GatError, HeadCombine};
use crate::scalar::Scalar;

pub const LEAKY_SLOPE: f64 = 0.2;

/// One attention layer. `weight` stacks the per-head projections
/// column-wise (`d_in × K·d_head`); row `k` of `attn` is `[a_src ∥ a_dst]`
/// for head `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GatLayerParams<T> {
    pub weight: Array2<T>,
    pub attn: Array2<T>,
    pub combine: HeadCombine,
}

/// Intermediates recorded by a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache<T> {
    /// Layer input after dropout.
    pub input: Array2<T>,
    pub z: Array2<T>,
    /// Attention per head and adjacency entry, head-major.
    pub alpha: Vec<T>,
    /// Scores before LeakyReLU, same layout as `alpha`.
    pub raw: Vec<T>,
    /// Aggregation before ReLU.
    pub pre: Array2<T>,
}

fn glorot<T: Scalar>(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Array2<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || T::of(rng.gen_range(-limit..=limit)))
}

pub(crate) fn leaky<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x * T::of(LEAKY_SLOPE)
    }
}

/// Per-node source and destination scores of head `k`.
fn head_scores<T: Scalar>(z: &Array2<T>, attn: &Array2<T>, k: usize, dh: usize) -> (Vec<T>, Vec<T>) {
    let zk = z.slice(s![.., k * dh..(k + 1) * dh]);
    let a_src = attn.slice(s![k, ..dh]);
    let a_dst = attn.slice(s![k, dh..]);
    (zk.dot(&a_src).to_vec(), zk.dot(&a_dst).to_vec())
}

impl<T: Scalar> GatLayerParams<T> {
    pub fn init(d_in: usize, heads: usize, head_dim: usize, combine: HeadCombine, rng: &mut impl Rng) -> Self {
        let width = heads * head_dim;
        Self {
            weight: glorot(d_in, width, d_in, width, rng),
            attn: glorot(heads, 2 * head_dim, 2 * head_dim, 1, rng),
            combine,
        }
    }

    pub fn heads(&self) -> usize {
        self.attn.nrows()
    }

    pub fn head_dim(&self) -> usize {
        self.attn.ncols() / 2
    }

    pub fn in_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn out_dim(&self) -> usize {
        match self.combine {
            HeadCombine::Concat => self.heads() * self.head_dim(),
            HeadCombine::Mean => self.head_dim(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weight: Array2::zeros(self.weight.raw_dim()),
            attn: Array2::zeros(self.attn.raw_dim()),
            combine: self.combine,
        }
    }

    fn check(&self, adj: &Adjacency, x: &Array2<T>) -> Result<(), GatError> {
        if x.ncols() != self.in_dim() {
            return Err(GatError::Dim { what: "layer input width", expected: self.in_dim(), got: x.ncols() });
        }
        if x.nrows() != adj.len() {
            return Err(GatError::Dim { what: "layer input rows", expected: adj.len(), got: x.nrows() });
        }
        Ok(())
    }

    pub fn forward(&self, adj: &Adjacency, x: &Array2<T>) -> Result<Array2<T>, GatError> {
        Ok(self.forward_cached(adj, x.clone())?.0)
    }

    pub fn forward_cached(&self, adj: &Adjacency, x: Array2<T>) -> Result<(Array2<T>, LayerCache<T>), GatError> {
        self.check(adj, &x)?;
        let n = adj.len();
        let (heads, dh) = (self.heads(), self.head_dim());
        let entries = adj.num_entries();
        let z = x.dot(&self.weight);
        let mut pre = Array2::<T>::zeros((n, self.out_dim()));
        let mut alpha = vec![T::zero(); heads * entries];
        let mut raw = vec![T::zero(); heads * entries];
        let inv_heads = T::one() / T::of(heads as f64);
        let mut acc = vec![T::zero(); dh];
        for k in 0..heads {
            let (s_src, s_dst) = head_scores(&z, &self.attn, k, dh);
            let base = k * entries;
            for v in 0..n {
                let range = adj.range(v);
                let mut max = T::neg_infinity();
                for e in range.clone() {
                    let r = s_src[adj.source(e)] + s_dst[v];
                    raw[base + e] = r;
                    max = max.max(leaky(r));
                }
                let mut sum = T::zero();
                for e in range.clone() {
                    let w = (leaky(raw[base + e]) - max).exp();
                    alpha[base + e] = w;
                    sum += w;
                }
                acc.iter_mut().for_each(|a| *a = T::zero());
                for e in range {
                    alpha[base + e] /= sum;
                    let a = alpha[base + e];
                    let zu = z.slice(s![adj.source(e), k * dh..(k + 1) * dh]);
                    for (acc, &zj) in acc.iter_mut().zip(zu.iter()) {
                        *acc += a * zj;
                    }
                }
                match self.combine {
                    HeadCombine::Concat => {
                        for (j, &a) in acc.iter().enumerate() {
                            pre[[v, k * dh + j]] = a;
                        }
                    }
                    HeadCombine::Mean => {
                        for (j, &a) in acc.iter().enumerate() {
                            pre[[v, j]] += a * inv_heads;
                        }
                    }
                }
            }
        }
        let out = pre.mapv(|p| p.max(T::zero()));
        Ok((out, LayerCache { input: x, z, alpha, raw, pre }))
    }

    /// Gradients of the parameters and (if `want_input`) of the layer input
    /// given the gradient `d_out` of the layer output.
    pub fn backward(
        &self,
        adj: &Adjacency,
        cache: &LayerCache<T>,
        d_out: &Array2<T>,
        want_input: bool,
    ) -> (Self, Option<Array2<T>>) {
        let n = adj.len();
        let (heads, dh) = (self.heads(), self.head_dim());
        let entries = adj.num_entries();
        let z = &cache.z;
        let mut d_pre = d_out.clone();
        d_pre.zip_mut_with(&cache.pre, |d, &p| {
            if p <= T::zero() {
                *d = T::zero();
            }
        });
        let mut dz = Array2::<T>::zeros(z.raw_dim());
        let mut d_attn = Array2::<T>::zeros(self.attn.raw_dim());
        let inv_heads = T::one() / T::of(heads as f64);
        let slope = T::of(LEAKY_SLOPE);
        let mut g = vec![T::zero(); dh];
        let mut d_alpha = Vec::new();
        for k in 0..heads {
            let base = k * entries;
            let cols = k * dh..(k + 1) * dh;
            let mut ds_src = vec![T::zero(); n];
            let mut ds_dst = vec![T::zero(); n];
            for v in 0..n {
                for (j, gj) in g.iter_mut().enumerate() {
                    *gj = match self.combine {
                        HeadCombine::Concat => d_pre[[v, k * dh + j]],
                        HeadCombine::Mean => d_pre[[v, j]] * inv_heads,
                    };
                }
                let range = adj.range(v);
                d_alpha.clear();
                let mut dot = T::zero();
                for e in range.clone() {
                    let u = adj.source(e);
                    let a = cache.alpha[base + e];
                    let mut da = T::zero();
                    for (j, &gj) in g.iter().enumerate() {
                        da += gj * z[[u, cols.start + j]];
                        dz[[u, cols.start + j]] += a * gj;
                    }
                    d_alpha.push(da);
                    dot += a * da;
                }
                for (i, e) in range.enumerate() {
                    let u = adj.source(e);
                    let de = cache.alpha[base + e] * (d_alpha[i] - dot);
                    let ds = if cache.raw[base + e] > T::zero() { de } else { de * slope };
                    ds_src[u] += ds;
                    ds_dst[v] += ds;
                }
            }
            for u in 0..n {
                for j in 0..dh {
                    let zu = z[[u, cols.start + j]];
                    d_attn[[k, j]] += ds_src[u] * zu;
                    d_attn[[k, dh + j]] += ds_dst[u] * zu;
                    dz[[u, cols.start + j]] += ds_src[u] * self.attn[[k, j]] + ds_dst[u] * self.attn[[k, dh + j]];
                }
            }
        }
        let d_weight = cache.input.t().dot(&dz);
        let d_input = want_input.then(|| dz.dot(&self.weight.t()));
        (Self { weight: d_weight, attn: d_attn, combine: self.combine }, d_input)
    }
}

/// Attention coefficients of head `k` for node embeddings `h`, one value
/// per adjacency entry (see [`Adjacency::range`]).
pub fn attention_coefficients<T: Scalar>(
    layer: &GatLayerParams<T>,
    k: usize,
    adj: &Adjacency,
    h: &Array2<T>,
) -> Result<Vec<T>, GatError> {
    if k >= layer.heads() {
        return Err(GatError::Dim { what: "head index bound", expected: layer.heads(), got: k });
    }
    let (_, cache) = layer.forward_cached(adj, h.clone())?;
    let e = adj.num_entries();
    Ok(cache.alpha[k * e..(k + 1) * e].to_vec())
}
