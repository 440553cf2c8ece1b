//! A single fusion network over a node pair.
//!
//! The input is a `2 x d` matrix, one row per node. Each block first mixes
//! across the two rows (the same small MLP applied to every feature column),
//! then across the features of each row, both with residual connections.
//! A shared linear head turns each row into a score.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offsets of one block's tensors inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BlockLayout {
    node_w1: usize,
    node_b1: usize,
    node_w2: usize,
    node_b2: usize,
    feat_w1: usize,
    feat_b1: usize,
    feat_w2: usize,
    feat_b2: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    d: usize,
    h: usize,
    blocks: Vec<BlockLayout>,
    head_w: usize,
    head_b: usize,
    len: usize,
}

impl Layout {
    fn new(d: usize, h: usize, num_blocks: usize) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let o = at;
            at += n;
            o
        };
        let blocks = (0..num_blocks)
            .map(|_| BlockLayout {
                node_w1: take(h * 2),
                node_b1: take(h),
                node_w2: take(2 * h),
                node_b2: take(2),
                feat_w1: take(h * d),
                feat_b1: take(h),
                feat_w2: take(d * h),
                feat_b2: take(d),
            })
            .collect();
        let head_w = take(d);
        let head_b = take(1);
        Layout {
            d,
            h,
            blocks,
            head_w,
            head_b,
            len: at,
        }
    }
}

/// Number of parameters of a network with the given shape.
pub fn parameter_count(d: usize, h: usize, num_blocks: usize) -> usize {
    num_blocks * (2 * h + h + 2 * h + 2 + h * d + h + d * h + d) + d + 1
}

/// Network parameters stored flat; see [`FusionModel::tensors`] for the named view.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    layout: Layout,
    params: Vec<f64>,
}

/// Named parameter tensors, row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockTensors {
    pub node_w1: Vec<Vec<f64>>,
    pub node_b1: Vec<f64>,
    pub node_w2: Vec<Vec<f64>>,
    pub node_b2: Vec<f64>,
    pub feat_w1: Vec<Vec<f64>>,
    pub feat_b1: Vec<f64>,
    pub feat_w2: Vec<Vec<f64>>,
    pub feat_b2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTensors {
    pub blocks: Vec<BlockTensors>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    blocks: Vec<BlockCache>,
    out: [Vec<f64>; 2],
    pub scores: (f64, f64),
}

#[derive(Debug, Clone)]
struct BlockCache {
    /// Block input, row-major `2 x d`.
    x_in: Vec<f64>,
    /// Pre-activations of node mixing, `d x h`.
    node_z: Vec<f64>,
    node_mask: Vec<f64>,
    /// After node mixing, `2 x d`.
    x_mid: Vec<f64>,
    /// Pre-activations of feature mixing, `2 x h`.
    feat_z: Vec<f64>,
    feat_mask: Vec<f64>,
}

/// Dropout masks drawn from an rng during training.
pub struct Dropout<'a, R: Rng> {
    pub rate: f64,
    pub rng: &'a mut R,
}

impl<R: Rng> Dropout<'_, R> {
    fn mask(&mut self, n: usize) -> Vec<f64> {
        let keep = 1.0 - self.rate;
        (0..n)
            .map(|_| if self.rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect()
    }
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// `out[i] = b[i] + sum_j w[i * cols + j] * x[j]`
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * cols..(i + 1) * cols];
        *o = b[i] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
    }
}

impl FusionModel {
    pub fn zeros(d: usize, h: usize, num_blocks: usize) -> Self {
        let layout = Layout::new(d, h, num_blocks);
        FusionModel {
            params: vec![0.0; layout.len],
            layout,
        }
    }

    /// Uniform Glorot initialization for weights, zero biases.
    pub fn init<R: Rng>(d: usize, h: usize, num_blocks: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(d, h, num_blocks);
        let blocks = m.layout.blocks.clone();
        let mut fill = |params: &mut [f64], at: usize, rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            for v in &mut params[at..at + rows * cols] {
                *v = rng.gen_range(-a..a);
            }
        };
        for bl in &blocks {
            fill(&mut m.params, bl.node_w1, h, 2);
            fill(&mut m.params, bl.node_w2, 2, h);
            fill(&mut m.params, bl.feat_w1, h, d);
            fill(&mut m.params, bl.feat_w2, d, h);
        }
        let head = m.layout.head_w;
        fill(&mut m.params, head, 1, d);
        m
    }

    pub fn input_dim(&self) -> usize {
        self.layout.d
    }

    pub fn hidden_dim(&self) -> usize {
        self.layout.h
    }

    pub fn num_blocks(&self) -> usize {
        self.layout.blocks.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }

    fn check_input(&self, a: &[f64], b: &[f64]) -> Result<()> {
        let d = self.layout.d;
        if a.len() != d || b.len() != d {
            return Err(Error::invalid(format!(
                "pair rows have lengths {}/{} but the model expects {d}",
                a.len(),
                b.len()
            )));
        }
        Ok(())
    }

    /// Inference: no dropout, no cache.
    pub fn score(&self, a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
        self.check_input(a, b)?;
        Ok(self.run::<rand_chacha::ChaCha8Rng>(a, b, None).scores)
    }

    /// Forward pass keeping activations; dropout applies when given.
    pub fn forward<R: Rng>(
        &self,
        a: &[f64],
        b: &[f64],
        dropout: Option<&mut Dropout<'_, R>>,
    ) -> Result<ForwardCache> {
        self.check_input(a, b)?;
        Ok(self.run(a, b, dropout))
    }

    fn run<R: Rng>(&self, a: &[f64], b: &[f64], mut dropout: Option<&mut Dropout<'_, R>>) -> ForwardCache {
        let (d, h) = (self.layout.d, self.layout.h);
        let p = &self.params;
        let mut x: Vec<f64> = a.iter().chain(b).copied().collect();
        let mut caches = Vec::with_capacity(self.layout.blocks.len());
        let mut hid = vec![0.0; h];
        let mut out2 = [0.0; 2];
        let mut outd = vec![0.0; d];
        for bl in &self.layout.blocks {
            let x_in = x.clone();
            let node_mask = match dropout.as_deref_mut() {
                Some(dr) if dr.rate > 0.0 => dr.mask(d * h),
                _ => vec![1.0; d * h],
            };
            let mut node_z = vec![0.0; d * h];
            for k in 0..d {
                let u = [x_in[k], x_in[d + k]];
                let z = &mut node_z[k * h..(k + 1) * h];
                affine(&p[bl.node_w1..bl.node_w1 + 2 * h], &p[bl.node_b1..bl.node_b1 + h], &u, z);
                for (j, hj) in hid.iter_mut().enumerate() {
                    *hj = relu(z[j]) * node_mask[k * h + j];
                }
                affine(&p[bl.node_w2..bl.node_w2 + 2 * h], &p[bl.node_b2..bl.node_b2 + 2], &hid, &mut out2);
                x[k] += out2[0];
                x[d + k] += out2[1];
            }
            let x_mid = x.clone();
            let feat_mask = match dropout.as_deref_mut() {
                Some(dr) if dr.rate > 0.0 => dr.mask(2 * h),
                _ => vec![1.0; 2 * h],
            };
            let mut feat_z = vec![0.0; 2 * h];
            for r in 0..2 {
                let v = &x_mid[r * d..(r + 1) * d];
                let z = &mut feat_z[r * h..(r + 1) * h];
                affine(&p[bl.feat_w1..bl.feat_w1 + h * d], &p[bl.feat_b1..bl.feat_b1 + h], v, z);
                for (j, hj) in hid.iter_mut().enumerate() {
                    *hj = relu(z[j]) * feat_mask[r * h + j];
                }
                affine(&p[bl.feat_w2..bl.feat_w2 + d * h], &p[bl.feat_b2..bl.feat_b2 + d], &hid, &mut outd);
                for (xv, o) in x[r * d..(r + 1) * d].iter_mut().zip(&outd) {
                    *xv += o;
                }
            }
            caches.push(BlockCache {
                x_in,
                node_z,
                node_mask,
                x_mid,
                feat_z,
                feat_mask,
            });
        }
        let w = &p[self.layout.head_w..self.layout.head_w + d];
        let bias = p[self.layout.head_b];
        let score = |row: &[f64]| bias + row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        let scores = (score(&x[..d]), score(&x[d..]));
        ForwardCache {
            blocks: caches,
            out: [x[..d].to_vec(), x[d..].to_vec()],
            scores,
        }
    }

    /// Adds the parameter gradient for upstream score gradients `(ga, gb)` into `grad`.
    pub fn backward(&self, cache: &ForwardCache, ga: f64, gb: f64, grad: &mut [f64]) {
        let (d, h) = (self.layout.d, self.layout.h);
        let p = &self.params;
        let hw = self.layout.head_w;
        let mut dx = vec![0.0; 2 * d];
        for (r, g) in [ga, gb].into_iter().enumerate() {
            grad[self.layout.head_b] += g;
            for k in 0..d {
                grad[hw + k] += g * cache.out[r][k];
                dx[r * d + k] = g * p[hw + k];
            }
        }
        let mut dhid = vec![0.0; h];
        let mut hid = vec![0.0; h];
        for (bl, c) in self.layout.blocks.iter().zip(&cache.blocks).rev() {
            // feature mixing, per row; dx already holds the residual path
            for r in 0..2 {
                let v = &c.x_mid[r * d..(r + 1) * d];
                let z = &c.feat_z[r * h..(r + 1) * h];
                let mask = &c.feat_mask[r * h..(r + 1) * h];
                for j in 0..h {
                    hid[j] = relu(z[j]) * mask[j];
                }
                let dout: Vec<f64> = dx[r * d..(r + 1) * d].to_vec();
                dhid.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..d {
                    let g = dout[i];
                    if g == 0.0 {
                        continue;
                    }
                    grad[bl.feat_b2 + i] += g;
                    let row = bl.feat_w2 + i * h;
                    for j in 0..h {
                        grad[row + j] += g * hid[j];
                        dhid[j] += g * p[row + j];
                    }
                }
                for j in 0..h {
                    let dz = if z[j] > 0.0 { dhid[j] * mask[j] } else { 0.0 };
                    if dz == 0.0 {
                        continue;
                    }
                    grad[bl.feat_b1 + j] += dz;
                    let row = bl.feat_w1 + j * d;
                    for k in 0..d {
                        grad[row + k] += dz * v[k];
                        dx[r * d + k] += dz * p[row + k];
                    }
                }
            }
            // node mixing, per feature column
            for k in 0..d {
                let u = [c.x_in[k], c.x_in[d + k]];
                let z = &c.node_z[k * h..(k + 1) * h];
                let mask = &c.node_mask[k * h..(k + 1) * h];
                for j in 0..h {
                    hid[j] = relu(z[j]) * mask[j];
                }
                let dout = [dx[k], dx[d + k]];
                dhid.iter_mut().for_each(|v| *v = 0.0);
                for (i, &g) in dout.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    grad[bl.node_b2 + i] += g;
                    let row = bl.node_w2 + i * h;
                    for j in 0..h {
                        grad[row + j] += g * hid[j];
                        dhid[j] += g * p[row + j];
                    }
                }
                for j in 0..h {
                    let dz = if z[j] > 0.0 { dhid[j] * mask[j] } else { 0.0 };
                    if dz == 0.0 {
                        continue;
                    }
                    grad[bl.node_b1 + j] += dz;
                    let row = bl.node_w1 + j * 2;
                    for (r, &ur) in u.iter().enumerate() {
                        grad[row + r] += dz * ur;
                        dx[r * d + k] += dz * p[row + r];
                    }
                }
            }
        }
    }

    pub fn tensors(&self) -> ModelTensors {
        let (d, h) = (self.layout.d, self.layout.h);
        let p = &self.params;
        let mat = |at: usize, rows: usize, cols: usize| -> Vec<Vec<f64>> {
            (0..rows).map(|i| p[at + i * cols..at + (i + 1) * cols].to_vec()).collect()
        };
        let vec = |at: usize, n: usize| p[at..at + n].to_vec();
        ModelTensors {
            blocks: self
                .layout
                .blocks
                .iter()
                .map(|bl| BlockTensors {
                    node_w1: mat(bl.node_w1, h, 2),
                    node_b1: vec(bl.node_b1, h),
                    node_w2: mat(bl.node_w2, 2, h),
                    node_b2: vec(bl.node_b2, 2),
                    feat_w1: mat(bl.feat_w1, h, d),
                    feat_b1: vec(bl.feat_b1, h),
                    feat_w2: mat(bl.feat_w2, d, h),
                    feat_b2: vec(bl.feat_b2, d),
                })
                .collect(),
            head_w: vec(self.layout.head_w, d),
            head_b: p[self.layout.head_b],
        }
    }

    pub fn from_tensors(t: &ModelTensors, d: usize, h: usize) -> Result<Self> {
        let mut m = Self::zeros(d, h, t.blocks.len());
        let layout = m.layout.clone();
        let mut put_mat = |at: usize, rows: usize, cols: usize, v: &[Vec<f64>], name: &str| {
            if v.len() != rows || v.iter().any(|r| r.len() != cols) {
                return Err(Error::invalid(format!("tensor {name} is not {rows}x{cols}")));
            }
            for (i, row) in v.iter().enumerate() {
                m.params[at + i * cols..at + (i + 1) * cols].copy_from_slice(row);
            }
            Ok(())
        };
        for (bl, bt) in layout.blocks.iter().zip(&t.blocks) {
            put_mat(bl.node_w1, h, 2, &bt.node_w1, "node_w1")?;
            put_mat(bl.node_b1, 1, h, std::slice::from_ref(&bt.node_b1), "node_b1")?;
            put_mat(bl.node_w2, 2, h, &bt.node_w2, "node_w2")?;
            put_mat(bl.node_b2, 1, 2, std::slice::from_ref(&bt.node_b2), "node_b2")?;
            put_mat(bl.feat_w1, h, d, &bt.feat_w1, "feat_w1")?;
            put_mat(bl.feat_b1, 1, h, std::slice::from_ref(&bt.feat_b1), "feat_b1")?;
            put_mat(bl.feat_w2, d, h, &bt.feat_w2, "feat_w2")?;
            put_mat(bl.feat_b2, 1, d, std::slice::from_ref(&bt.feat_b2), "feat_b2")?;
        }
        put_mat(layout.head_w, 1, d, std::slice::from_ref(&t.head_w), "head_w")?;
        m.params[layout.head_b] = t.head_b;
        if !m.is_finite() {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(m)
    }
}

/// One labeled pair in standardized form.
#[derive(Debug, Clone, PartialEq)]
pub struct PairExample {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub label_a: f64,
    pub label_b: f64,
}

/// Mean squared error over both nodes of every pair, and its gradient.
pub fn loss_and_grad<R: Rng>(
    model: &FusionModel,
    batch: &[&PairExample],
    mut dropout: Option<&mut Dropout<'_, R>>,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let n = (2 * batch.len()) as f64;
    let mut grad = vec![0.0; model.params.len()];
    let mut loss = 0.0;
    for ex in batch {
        let cache = model.forward(&ex.a, &ex.b, dropout.as_deref_mut())?;
        let (sa, sb) = cache.scores;
        let (ea, eb) = (sa - ex.label_a, sb - ex.label_b);
        loss += ea * ea + eb * eb;
        model.backward(&cache, 2.0 * ea / n, 2.0 * eb / n, &mut grad);
    }
    let loss = loss / n;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!(
            "training loss is {loss} on a batch of {} pairs",
            batch.len()
        )));
    }
    Ok((loss, grad))
}

/// Loss only, dropout off.
pub fn loss(model: &FusionModel, batch: &[&PairExample]) -> Result<f64> {
    let mut total = 0.0;
    for ex in batch {
        let (sa, sb) = model.score(&ex.a, &ex.b)?;
        total += (sa - ex.label_a).powi(2) + (sb - ex.label_b).powi(2);
    }
    Ok(total / (2 * batch.len().max(1)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example(rng: &mut ChaCha8Rng, d: usize) -> PairExample {
        let label = rng.gen_bool(0.5) as u8 as f64;
        PairExample {
            a: (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            b: (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            label_a: label,
            label_b: 1.0 - label,
        }
    }

    #[test]
    fn parameter_count_matches_layout() {
        for (d, h, b) in [(14, 64, 2), (2, 2, 1), (5, 3, 3)] {
            assert_eq!(FusionModel::zeros(d, h, b).params().len(), parameter_count(d, h, b));
        }
    }

    #[test]
    fn zero_network_scores_head_bias() {
        let mut m = FusionModel::zeros(14, 8, 2);
        let hb = m.layout.head_b;
        m.params_mut()[hb] = 0.37;
        let (a, b) = m.score(&[1.0; 14], &[-3.0; 14]).unwrap();
        assert_eq!((a, b), (0.37, 0.37));
    }

    #[test]
    fn zero_mix_weights_make_blocks_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = FusionModel::init(4, 3, 2, &mut rng);
        for bl in m.layout.blocks.clone() {
            for (at, n) in [(bl.node_w2, 6), (bl.node_b2, 2), (bl.feat_w2, 12), (bl.feat_b2, 4)] {
                m.params_mut()[at..at + n].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let a = [0.5, -1.0, 2.0, 0.25];
        let b = [1.5, 0.0, -0.5, 3.0];
        let cache = m.forward::<ChaCha8Rng>(&a, &b, None).unwrap();
        assert_eq!(cache.out[0], a.to_vec());
        assert_eq!(cache.out[1], b.to_vec());
    }

    #[test]
    fn hand_worked_tiny_network() {
        // d = 2, h = 2, one block
        let mut m = FusionModel::zeros(2, 2, 1);
        let bl = m.layout.blocks[0];
        let (hw, hb) = (m.layout.head_w, m.layout.head_b);
        let p = m.params_mut();
        // node mix: z = [u0 + u1, u0 - u1], out = [z0', z1'] per row
        p[bl.node_w1..bl.node_w1 + 4].copy_from_slice(&[1.0, 1.0, 1.0, -1.0]);
        p[bl.node_w2..bl.node_w2 + 4].copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        // feature mix: z = [v0, -v1], out = [0.5 z0', 0]
        p[bl.feat_w1..bl.feat_w1 + 4].copy_from_slice(&[1.0, 0.0, 0.0, -1.0]);
        p[bl.feat_w2..bl.feat_w2 + 4].copy_from_slice(&[0.5, 0.0, 0.0, 0.0]);
        p[hw..hw + 2].copy_from_slice(&[1.0, 2.0]);
        p[hb] = 0.1;
        // rows a = (1, 2), b = (3, -1)
        // col 0: u = (1, 3): z = (4, -2) -> relu (4, 0) -> x0 += (4, 0): a0 = 5, b0 = 3
        // col 1: u = (2, -1): z = (1, 3) -> relu (1, 3) -> x1 += (1, 3): a1 = 3, b1 = 2
        // row a = (5, 3): z = (5, -3) -> (5, 0) -> out (2.5, 0) -> (7.5, 3)
        // row b = (3, 2): z = (3, -2) -> (3, 0) -> out (1.5, 0) -> (4.5, 2)
        // scores: 7.5 + 6 + 0.1 = 13.6, 4.5 + 4 + 0.1 = 8.6
        let (sa, sb) = m.score(&[1.0, 2.0], &[3.0, -1.0]).unwrap();
        assert!((sa - 13.6).abs() < 1e-12 && (sb - 8.6).abs() < 1e-12, "{sa} {sb}");
    }

    #[test]
    fn single_pair_loss_is_one() {
        let mut m = FusionModel::zeros(2, 2, 1);
        let hw = m.layout.head_w;
        m.params_mut()[hw] = 1.0;
        // scores equal the first feature: (0, 1) against labels (1, 0)
        let ex = PairExample {
            a: vec![0.0, 0.0],
            b: vec![1.0, 0.0],
            label_a: 1.0,
            label_b: 0.0,
        };
        let (l, _) = loss_and_grad::<ChaCha8Rng>(&m, &[&ex], None).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let mut m = FusionModel::zeros(3, 2, 1);
        let hb = m.layout.head_b;
        m.params_mut()[hb] = 1.0;
        let ex = PairExample {
            a: vec![0.3, 0.1, 0.2],
            b: vec![0.5, 0.5, 0.5],
            label_a: 1.0,
            label_b: 1.0,
        };
        let (l, g) = loss_and_grad::<ChaCha8Rng>(&m, &[&ex], None).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for draw in 0..3 {
            let m = FusionModel::init(5, 4, 2, &mut rng);
            let batch: Vec<PairExample> = (0..4).map(|_| example(&mut rng, 5)).collect();
            let refs: Vec<&PairExample> = batch.iter().collect();
            let err = max_gradient_error(&m, &refs, 0.0, draw);
            assert!(err < 1e-4, "draw {draw}: {err}");
            let err = max_gradient_error(&m, &refs, 0.3, draw);
            assert!(err < 1e-4, "draw {draw} with dropout: {err}");
        }
    }

    /// Relative error with the dropout masks pinned by reseeding.
    fn max_gradient_error(m: &FusionModel, batch: &[&PairExample], rate: f64, seed: u64) -> f64 {
        let eval = |model: &FusionModel| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut dr = Dropout { rate, rng: &mut r };
            loss_and_grad(model, batch, Some(&mut dr)).unwrap()
        };
        let (_, g) = eval(m);
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..m.params.len() {
            let mut plus = m.clone();
            plus.params[i] += eps;
            let mut minus = m.clone();
            minus.params[i] -= eps;
            let fd = (eval(&plus).0 - eval(&minus).0) / (2.0 * eps);
            let denom = fd.abs().max(g[i].abs()).max(1e-6);
            worst = worst.max((fd - g[i]).abs() / denom);
        }
        worst
    }

    #[test]
    fn tensors_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = FusionModel::init(14, 6, 2, &mut rng);
        let back = FusionModel::from_tensors(&m.tensors(), 14, 6).unwrap();
        assert_eq!(back, m);
        let mut bad = m.tensors();
        bad.blocks[0].feat_w1.pop();
        assert!(FusionModel::from_tensors(&bad, 14, 6).is_err());
    }
}
