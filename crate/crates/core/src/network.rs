//! Fully connected ReLU networks over a flat weight vector.
//!
//! Layer `l` occupies one contiguous block of the flat vector: its weight
//! matrix in row-major `[target][source]` order followed by one bias per
//! target neuron. Weights and bias of a neuron share the neuron's fan-in,
//! which is what the influence matrix uses to scale its rows.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSpec {
    layer_sizes: Vec<usize>,
}

impl ArchSpec {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidParameter(
                "an architecture needs an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidParameter("layer sizes must be positive".into()));
        }
        Ok(ArchSpec { layer_sizes })
    }

    /// 784-300-100-10.
    pub fn mnistfc() -> Self {
        ArchSpec {
            layer_sizes: vec![784, 300, 100, 10],
        }
    }

    /// 784-20-20-10.
    pub fn small() -> Self {
        ArchSpec {
            layer_sizes: vec![784, 20, 20, 10],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "mnistfc" => Some(Self::mnistfc()),
            "small" => Some(Self::small()),
            _ => None,
        }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Weights plus biases over all layers.
    pub fn param_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Input(usize),
    Bias,
}

/// Position of one flat parameter inside the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightSlot {
    pub layer: usize,
    pub neuron: usize,
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    offset: usize,
    inputs: usize,
    outputs: usize,
}

impl Block {
    fn weights_len(&self) -> usize {
        self.inputs * self.outputs
    }

    fn len(&self) -> usize {
        (self.inputs + 1) * self.outputs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightLayout {
    arch: ArchSpec,
    blocks: Vec<Block>,
    len: usize,
}

impl WeightLayout {
    pub fn new(arch: &ArchSpec) -> Self {
        let mut offset = 0;
        let blocks = arch
            .layer_sizes
            .windows(2)
            .map(|w| {
                let b = Block {
                    offset,
                    inputs: w[0],
                    outputs: w[1],
                };
                offset += b.len();
                b
            })
            .collect();
        WeightLayout {
            arch: arch.clone(),
            blocks,
            len: offset,
        }
    }

    pub fn arch(&self) -> &ArchSpec {
        &self.arch
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn locate(&self, i: usize) -> Option<WeightSlot> {
        if i >= self.len {
            return None;
        }
        let layer = self.blocks.partition_point(|b| b.offset + b.len() <= i);
        let b = self.blocks[layer];
        let local = i - b.offset;
        Some(if local < b.weights_len() {
            WeightSlot {
                layer,
                neuron: local / b.inputs,
                source: Source::Input(local % b.inputs),
            }
        } else {
            WeightSlot {
                layer,
                neuron: local - b.weights_len(),
                source: Source::Bias,
            }
        })
    }

    pub fn index_of(&self, slot: WeightSlot) -> Option<usize> {
        let b = self.blocks.get(slot.layer)?;
        if slot.neuron >= b.outputs {
            return None;
        }
        match slot.source {
            Source::Input(k) if k < b.inputs => Some(b.offset + slot.neuron * b.inputs + k),
            Source::Input(_) => None,
            Source::Bias => Some(b.offset + b.weights_len() + slot.neuron),
        }
    }

    /// Fan-in of the neuron that parameter `i` feeds.
    pub fn fan_in(&self, i: usize) -> Option<usize> {
        self.locate(i).map(|s| self.blocks[s.layer].inputs)
    }

    /// Per-parameter fan-in, in flat order.
    pub fn fan_ins(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len);
        for b in &self.blocks {
            out.extend(std::iter::repeat_n(b.inputs as u32, b.len()));
        }
        out
    }

    fn params<'a>(&self, layer: usize, w: &'a [f64]) -> (ArrayView2<'a, f64>, ArrayView1<'a, f64>) {
        let b = self.blocks[layer];
        let (wm, bias) = w[b.offset..b.offset + b.len()].split_at(b.weights_len());
        (
            ArrayView2::from_shape((b.outputs, b.inputs), wm).unwrap(),
            ArrayView1::from(bias),
        )
    }
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Batch {
    pub fn new(inputs: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if inputs.nrows() != labels.len() {
            return Err(Error::dim("batch labels", inputs.nrows(), labels.len()));
        }
        Ok(Batch { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Forward {
    pub loss: f64,
    pub logits: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Gradient {
    pub loss: f64,
    pub grad: Vec<f64>,
}

fn check_inputs(layout: &WeightLayout, w: &[f64], inputs: ArrayView2<f64>, labels: &[usize]) -> Result<()> {
    if w.len() != layout.len() {
        return Err(Error::dim("weight vector", layout.len(), w.len()));
    }
    if inputs.ncols() != layout.arch.input_dim() {
        return Err(Error::dim("input features", layout.arch.input_dim(), inputs.ncols()));
    }
    let classes = layout.arch.output_dim();
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidParameter(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("weights"));
    }
    Ok(())
}

/// Activations of every layer; the last entry holds the logits.
fn activations(layout: &WeightLayout, w: &[f64], inputs: ArrayView2<f64>) -> Vec<Array2<f64>> {
    let layers = layout.blocks.len();
    let mut acts: Vec<Array2<f64>> = Vec::with_capacity(layers);
    for l in 0..layers {
        let (wm, bias) = layout.params(l, w);
        let prev = if l == 0 { inputs } else { acts[l - 1].view() };
        let mut z = prev.dot(&wm.t());
        z += &bias;
        if l + 1 < layers {
            z.mapv_inplace(|v| v.max(0.0));
        }
        acts.push(z);
    }
    acts
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
fn softmax_xent(logits: &Array2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let rows = logits.nrows() as f64;
    let mut delta = logits.clone();
    let mut loss = 0.0;
    for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let shifted = row[y] - max;
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        loss += sum.ln() - shifted;
        row.mapv_inplace(|v| v / sum / rows);
        row[y] -= 1.0 / rows;
    }
    (loss / rows, delta)
}

pub fn forward(layout: &WeightLayout, w: &[f64], batch: &Batch) -> Result<Forward> {
    check_inputs(layout, w, batch.inputs.view(), &batch.labels)?;
    let logits = activations(layout, w, batch.inputs.view()).pop().unwrap();
    let (loss, _) = softmax_xent(&logits, &batch.labels);
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok(Forward { loss, logits })
}

/// Mean cross-entropy and its exact gradient in flat layout order.
pub fn grad(layout: &WeightLayout, w: &[f64], batch: &Batch) -> Result<Gradient> {
    check_inputs(layout, w, batch.inputs.view(), &batch.labels)?;
    let acts = activations(layout, w, batch.inputs.view());
    let (loss, mut delta) = softmax_xent(acts.last().unwrap(), &batch.labels);
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }

    let mut g = vec![0.0; layout.len()];
    for l in (0..layout.blocks.len()).rev() {
        let b = layout.blocks[l];
        let prev = if l == 0 {
            batch.inputs.view()
        } else {
            acts[l - 1].view()
        };
        let (gw, gb) = g[b.offset..b.offset + b.len()].split_at_mut(b.weights_len());
        let mut gw = ArrayViewMut2::from_shape((b.outputs, b.inputs), gw).unwrap();
        general_mat_mul(1.0, &delta.t(), &prev, 0.0, &mut gw);
        let bias_grad: Array1<f64> = delta.sum_axis(Axis(0));
        gb.copy_from_slice(bias_grad.as_slice().unwrap());

        if l > 0 {
            let (wm, _) = layout.params(l, w);
            let mut back = delta.dot(&wm);
            back.zip_mut_with(&acts[l - 1], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    Ok(Gradient { loss, grad: g })
}

/// Fraction of rows whose arg-max logit equals the label (ties go to the
/// lower class index).
pub fn accuracy(layout: &WeightLayout, w: &[f64], batch: &Batch) -> Result<f64> {
    let out = forward(layout, w, batch)?;
    Ok(accuracy_from_logits(&out.logits, &batch.labels))
}

pub fn accuracy_from_logits(logits: &Array2<f64>, labels: &[usize]) -> f64 {
    let correct = logits
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(row, &y)| argmax(row) == y)
        .count();
    correct as f64 / labels.len() as f64
}

fn argmax(row: &ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}
