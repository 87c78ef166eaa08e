//! GraphSAGE encoder over the stitch graph with hand-written reverse mode.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{StitchGraph, FEATURE_DIM};
use crate::math;
use crate::tensor::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Mean,
    Max,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "mean" => Some(Aggregator::Mean),
            "max" => Some(Aggregator::Max),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub layers: usize,
    pub hidden: usize,
    pub embed_dim: usize,
    pub aggregator: Aggregator,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { layers: 5, hidden: 512, embed_dim: 128, aggregator: Aggregator::Mean }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 || self.embed_dim == 0 {
            return Err(Error::ShapeMismatch { what: "model config (layers and widths must be >= 1)", expected: 1, found: 0 });
        }
        Ok(())
    }

    /// `(in, out)` width of every layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        (0..self.layers)
            .map(|l| {
                let input = if l == 0 { FEATURE_DIM } else { self.hidden };
                let output = if l + 1 == self.layers { self.embed_dim } else { self.hidden };
                (input, output)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out x 2 in`, acting on `[self ; neighbour aggregate]`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weight.cols() / 2
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

/// Encoder weights plus the dustbin score `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<Layer>,
    pub z: f64,
}

impl ModelParams {
    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer { weight: Matrix::zeros(l.weight.rows(), l.weight.cols()), bias: vec![0.0; l.bias.len()] })
                .collect(),
            z: 0.0,
        }
    }

    pub fn num_scalars(&self) -> usize {
        self.layers.iter().map(|l| l.weight.as_slice().len() + l.bias.len()).sum::<usize>() + 1
    }

    /// Every trainable scalar, layer by layer (weights then bias), `z` last.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_scalars());
        for l in &self.layers {
            v.extend_from_slice(l.weight.as_slice());
            v.extend_from_slice(&l.bias);
        }
        v.push(self.z);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_scalars() {
            return Err(Error::ShapeMismatch { what: "flat parameter vector", expected: self.num_scalars(), found: flat.len() });
        }
        let mut at = 0;
        for l in &mut self.layers {
            let w = l.weight.as_mut_slice();
            w.copy_from_slice(&flat[at..at + w.len()]);
            at += w.len();
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        self.z = flat[at];
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.layers.iter().all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    /// Checks the parameter shapes against a config.
    pub fn check(&self, cfg: &ModelConfig) -> Result<()> {
        let dims = cfg.layer_dims();
        if dims.len() != self.layers.len() {
            return Err(Error::ShapeMismatch { what: "layer count", expected: dims.len(), found: self.layers.len() });
        }
        for (l, &(i, o)) in self.layers.iter().zip(&dims) {
            if l.weight.shape() != (o, 2 * i) {
                return Err(Error::ShapeMismatch { what: "layer weight columns", expected: 2 * i, found: l.weight.cols() });
            }
            if l.bias.len() != o {
                return Err(Error::ShapeMismatch { what: "layer bias", expected: o, found: l.bias.len() });
            }
        }
        Ok(())
    }
}

/// Uniform fan-based initialization; biases zero and `z = 1`.
pub fn init_params(cfg: &ModelConfig, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = cfg
        .layer_dims()
        .into_iter()
        .map(|(i, o)| {
            let fan_in = 2 * i;
            let bound = math::sqrt(6.0 / (fan_in + o) as f64);
            let data = (0..o * fan_in).map(|_| rng.gen_range(-bound..bound)).collect();
            Layer { weight: Matrix::from_vec(o, fan_in, data), bias: vec![0.0; o] }
        })
        .collect();
    ModelParams { layers, z: 1.0 }
}

#[derive(Debug, Clone, PartialEq)]
struct LayerCache {
    input: Matrix,
    aggregate: Matrix,
    /// For max aggregation, which neighbour (0 or 1) supplied each entry.
    argmax: Vec<u8>,
    pre: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    layers: Vec<LayerCache>,
    aggregator: Aggregator,
}

fn aggregate(g: &StitchGraph, h: &Matrix, agg: Aggregator) -> (Matrix, Vec<u8>) {
    let (m, d) = h.shape();
    let mut out = Matrix::zeros(m, d);
    let mut argmax = Vec::new();
    if agg == Aggregator::Max {
        argmax = vec![0u8; m * d];
    }
    for i in 0..m {
        let [a, b] = g.neighbors(i);
        let (ha, hb) = (h.row(a), h.row(b));
        let row = out.row_mut(i);
        match agg {
            Aggregator::Mean => {
                for k in 0..d {
                    row[k] = 0.5 * (ha[k] + hb[k]);
                }
            }
            Aggregator::Max => {
                for k in 0..d {
                    if hb[k] > ha[k] {
                        row[k] = hb[k];
                        argmax[i * d + k] = 1;
                    } else {
                        row[k] = ha[k];
                    }
                }
            }
        }
    }
    (out, argmax)
}

/// Runs every layer: `h' = relu(W [h ; agg(neighbours)] + b)`. Returns the
/// final node embeddings (`M x D`).
pub fn forward(g: &StitchGraph, x: &Matrix, params: &ModelParams, agg: Aggregator) -> Result<(Matrix, ForwardCache)> {
    if x.rows() != g.node_count() {
        return Err(Error::ShapeMismatch { what: "feature rows", expected: g.node_count(), found: x.rows() });
    }
    let mut h = x.clone();
    let mut caches = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let d = layer.in_dim();
        if h.cols() != d {
            return Err(Error::ShapeMismatch { what: "layer input width", expected: d, found: h.cols() });
        }
        let (a, argmax) = aggregate(g, &h, agg);
        let m = h.rows();
        let o = layer.out_dim();
        let mut pre = Matrix::zeros(m, o);
        for i in 0..m {
            let (hi, ai) = (h.row(i), a.row(i));
            let row = pre.row_mut(i);
            for r in 0..o {
                let w = layer.weight.row(r);
                let mut s = layer.bias[r];
                for k in 0..d {
                    s += w[k] * hi[k];
                }
                for k in 0..d {
                    s += w[d + k] * ai[k];
                }
                row[r] = s;
            }
        }
        let next = pre.map(|v| if v > 0.0 { v } else { 0.0 });
        caches.push(LayerCache { input: h, aggregate: a, argmax, pre });
        h = next;
    }
    Ok((h, ForwardCache { layers: caches, aggregator: agg }))
}

/// Reverse pass. Returns parameter gradients (`z` left at zero) and the
/// gradient with respect to the input features.
pub fn backward(g: &StitchGraph, cache: &ForwardCache, grad_f: &Matrix, params: &ModelParams) -> (ModelParams, Matrix) {
    let mut grads = params.zeros_like();
    let mut dh = grad_f.clone();
    for (l, (layer, c)) in params.layers.iter().zip(&cache.layers).enumerate().rev() {
        let (m, d) = c.input.shape();
        let o = layer.out_dim();
        let mut dpre = dh;
        for (v, &p) in dpre.as_mut_slice().iter_mut().zip(c.pre.as_slice()) {
            if p <= 0.0 {
                *v = 0.0;
            }
        }
        let gl = &mut grads.layers[l];
        let mut dinput = Matrix::zeros(m, d);
        let mut dagg = Matrix::zeros(m, d);
        for i in 0..m {
            let dp = dpre.row(i);
            let (hi, ai) = (c.input.row(i), c.aggregate.row(i));
            for r in 0..o {
                let gr = dp[r];
                if gr == 0.0 {
                    continue;
                }
                gl.bias[r] += gr;
                let gw = gl.weight.row_mut(r);
                for k in 0..d {
                    gw[k] += gr * hi[k];
                    gw[d + k] += gr * ai[k];
                }
                let w = layer.weight.row(r);
                let di = dinput.row_mut(i);
                for k in 0..d {
                    di[k] += gr * w[k];
                }
                let da = dagg.row_mut(i);
                for k in 0..d {
                    da[k] += gr * w[d + k];
                }
            }
        }
        for i in 0..m {
            let nb = g.neighbors(i);
            for k in 0..d {
                let v = dagg[(i, k)];
                match cache.aggregator {
                    Aggregator::Mean => {
                        dinput[(nb[0], k)] += 0.5 * v;
                        dinput[(nb[1], k)] += 0.5 * v;
                    }
                    Aggregator::Max => {
                        let src = nb[c.argmax[i * d + k] as usize];
                        dinput[(src, k)] += v;
                    }
                }
            }
        }
        dh = dinput;
    }
    (grads, dh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(layers: usize, hidden: usize, embed_dim: usize, aggregator: Aggregator) -> ModelConfig {
        ModelConfig { layers, hidden, embed_dim, aggregator }
    }

    fn features(m: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_vec(m, FEATURE_DIM, (0..m * FEATURE_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let cfg = tiny_cfg(1, 8, 8, Aggregator::Mean);
        let a = init_params(&cfg, 3);
        assert_eq!(a, init_params(&cfg, 3));
        assert_ne!(a, init_params(&cfg, 4));
        assert_eq!(a.layers[0].weight.shape(), (8, 48));
        assert_eq!(a.layers[0].bias.len(), 8);
        assert_eq!(a.z, 1.0);
        let bound = (6.0f64 / 56.0).sqrt();
        assert!(a.layers[0].weight.as_slice().iter().all(|w| w.abs() <= bound));
        a.check(&cfg).unwrap();
    }

    #[test]
    fn zero_features_give_zero_embeddings() {
        let g = StitchGraph::from_panel_sizes(&[4, 3]);
        let p = init_params(&tiny_cfg(2, 6, 4, Aggregator::Mean), 1);
        let (f, _) = forward(&g, &Matrix::zeros(7, FEATURE_DIM), &p, Aggregator::Mean).unwrap();
        assert!(f.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_layer_matches_hand_evaluation() {
        let g = StitchGraph::from_panel_sizes(&[4]);
        let x = features(4, 9);
        let p = init_params(&tiny_cfg(1, 3, 3, Aggregator::Mean), 2);
        let (f, _) = forward(&g, &x, &p, Aggregator::Mean).unwrap();
        let w = &p.layers[0].weight;
        for i in 0..4 {
            let (prev, next) = ((i + 3) % 4, (i + 1) % 4);
            for r in 0..3 {
                let mut s = 0.0;
                for k in 0..FEATURE_DIM {
                    s += w[(r, k)] * x[(i, k)];
                    s += w[(r, FEATURE_DIM + k)] * (x[(prev, k)] + x[(next, k)]) / 2.0;
                }
                assert!((f[(i, r)] - s.max(0.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_round_trip() {
        let mut p = init_params(&tiny_cfg(2, 5, 3, Aggregator::Max), 7);
        let flat = p.to_flat();
        assert_eq!(flat.len(), p.num_scalars());
        let mut q = p.zeros_like();
        q.set_flat(&flat).unwrap();
        assert_eq!(p, q);
        assert!(p.set_flat(&flat[1..]).is_err());
    }

    fn check_gradients(agg: Aggregator, seed: u64) {
        let g = StitchGraph::from_panel_sizes(&[3]);
        let x = features(3, seed);
        let mut p = init_params(&tiny_cfg(1, 4, 4, agg), seed);
        for b in &mut p.layers[0].bias {
            *b = 0.3;
        }
        let upstream = features(3, seed + 100);
        let objective = |p: &ModelParams| {
            let (f, _) = forward(&g, &x, p, agg).unwrap();
            (0..3).map(|i| (0..4).map(|k| f[(i, k)] * upstream[(i, k)]).sum::<f64>()).sum::<f64>()
        };
        let (f, cache) = forward(&g, &x, &p, agg).unwrap();
        let grad_f = Matrix::from_vec(3, 4, (0..3).flat_map(|i| (0..4).map(move |k| (i, k))).map(|(i, k)| upstream[(i, k)]).collect());
        assert_eq!(f.shape(), grad_f.shape());
        let (grads, _) = backward(&g, &cache, &grad_f, &p);
        let analytic = grads.to_flat();
        let base = p.to_flat();
        let h = 1e-5;
        for c in 0..base.len() - 1 {
            let mut q = p.clone();
            let mut v = base.clone();
            v[c] += h;
            q.set_flat(&v).unwrap();
            let up = objective(&q);
            v[c] -= 2.0 * h;
            q.set_flat(&v).unwrap();
            let down = objective(&q);
            let fd = (up - down) / (2.0 * h);
            let err = (fd - analytic[c]).abs() / fd.abs().max(analytic[c].abs()).max(1e-8);
            assert!(err < 1e-6 || (fd - analytic[c]).abs() < 1e-9, "coord {c}: fd {fd} vs {}", analytic[c]);
        }
    }

    #[test]
    fn mean_gradients_match_finite_differences() {
        for seed in 0..5 {
            check_gradients(Aggregator::Mean, seed);
        }
    }

    #[test]
    fn max_gradients_match_finite_differences() {
        for seed in 0..5 {
            check_gradients(Aggregator::Max, seed);
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let g = StitchGraph::from_panel_sizes(&[4]);
        let p = init_params(&tiny_cfg(2, 4, 3, Aggregator::Mean), 1);
        let (f, cache) = forward(&g, &features(4, 1), &p, Aggregator::Mean).unwrap();
        let (grads, dx) = backward(&g, &cache, &Matrix::zeros(f.rows(), f.cols()), &p);
        assert!(grads.to_flat().iter().all(|&v| v == 0.0));
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn max_routes_nothing_to_losing_neighbour() {
        // node 0 has neighbours 2 and 1 in a 3-ring; make node 1 lose in every slot
        let g = StitchGraph::from_panel_sizes(&[3]);
        let mut x = Matrix::filled(3, FEATURE_DIM, 1.0);
        x.row_mut(1).iter_mut().for_each(|v| *v = -1.0);
        let p = init_params(&tiny_cfg(1, 4, 4, Aggregator::Max), 5);
        let (f, cache) = forward(&g, &x, &p, Aggregator::Max).unwrap();
        let mut up = Matrix::zeros(f.rows(), f.cols());
        up.row_mut(0).iter_mut().for_each(|v| *v = 1.0);
        let (_, dx) = backward(&g, &cache, &up, &p);
        assert!(dx.row(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = StitchGraph::from_panel_sizes(&[4]);
        let p = init_params(&tiny_cfg(1, 4, 4, Aggregator::Mean), 1);
        assert!(matches!(forward(&g, &features(3, 1), &p, Aggregator::Mean), Err(Error::ShapeMismatch { .. })));
    }
}
