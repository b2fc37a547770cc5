//! Fixed-architecture feedforward networks: forward evaluation, the max-row-l1
//! parameter norm, and the flat packing used by the numerical searches.

use crate::error::ShapeError;
use serde::{Deserialize, Serialize};

/// Scalar activation. Both supported choices are 1-Lipschitz and map 0 to 0,
/// which the kernel decay bounds rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Relu => {
                if t > 0.0 {
                    t
                } else {
                    0.0
                }
            }
            Activation::Identity => t,
        }
    }
}

/// Layer widths (m0, m1, ..., ml) plus the activation convention.
///
/// The last layer is affine by default; set `output_activation_applied` to
/// apply the activation there as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    widths: Vec<usize>,
    activation: Activation,
    output_activation_applied: bool,
}

impl Architecture {
    pub fn new(widths: Vec<usize>, activation: Activation) -> Result<Self, ShapeError> {
        if widths.len() < 2 {
            return Err(ShapeError::TooFewLayers(widths.len()));
        }
        if let Some(index) = widths.iter().position(|&w| w == 0) {
            return Err(ShapeError::ZeroWidth { index });
        }
        Ok(Self {
            widths,
            activation,
            output_activation_applied: false,
        })
    }

    pub fn with_output_activation(mut self, applied: bool) -> Self {
        self.output_activation_applied = applied;
        self
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn output_activation_applied(&self) -> bool {
        self.output_activation_applied
    }

    /// Input dimension s = m0.
    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Output dimension t = ml.
    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Number of layer functions l.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    /// (rows, cols) of each weight matrix, in layer order.
    pub fn layer_dims(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.widths.windows(2).map(|w| (w[1], w[0]))
    }

    /// Total packed length: sum of m_k * (m_{k-1} + 1).
    pub fn param_len(&self) -> usize {
        self.layer_dims().map(|(r, c)| r * (c + 1)).sum()
    }
}

/// Weights and bias of one layer; `weights` is row-major with shape rows x cols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Trainable parameters theta of a network, one `LayerParams` per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    layers: Vec<LayerParams>,
}

impl ParamVector {
    pub fn new(layers: Vec<LayerParams>) -> Self {
        Self { layers }
    }

    pub fn zeros(arch: &Architecture) -> Self {
        let layers = arch
            .layer_dims()
            .map(|(rows, cols)| LayerParams {
                weights: vec![0.0; rows * cols],
                bias: vec![0.0; rows],
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    /// Checks that the shapes match `arch`, naming the offending layer.
    pub fn check_shape(&self, arch: &Architecture) -> Result<(), ShapeError> {
        if self.layers.len() != arch.depth() {
            return Err(ShapeError::LayerMismatch {
                layer: 0,
                expected: arch.depth(),
                got: self.layers.len(),
            });
        }
        for (k, ((rows, cols), layer)) in arch.layer_dims().zip(&self.layers).enumerate() {
            if layer.weights.len() != rows * cols || layer.bias.len() != rows {
                return Err(ShapeError::LayerMismatch {
                    layer: k + 1,
                    expected: rows * (cols + 1),
                    got: layer.weights.len() + layer.bias.len(),
                });
            }
        }
        Ok(())
    }
}

/// Forward pass z^(l) through the network.
///
/// Hidden layers apply the activation; the last layer is affine unless the
/// architecture says otherwise.
pub fn forward(arch: &Architecture, theta: &ParamVector, x: &[f64]) -> Result<Vec<f64>, ShapeError> {
    theta.check_shape(arch)?;
    if x.len() != arch.input_dim() {
        return Err(ShapeError::InputDim {
            expected: arch.input_dim(),
            got: x.len(),
        });
    }
    Ok(forward_packed(arch, &pack(theta), x))
}

/// Forward pass on a packed parameter slice. The slice length must equal
/// `arch.param_len()`; this is the hot path and does not re-validate.
pub fn forward_packed(arch: &Architecture, flat: &[f64], x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(flat.len(), arch.param_len());
    debug_assert_eq!(x.len(), arch.input_dim());
    let sigma = arch.activation();
    let depth = arch.depth();
    let mut z: Vec<f64> = x.to_vec();
    let mut next: Vec<f64> = Vec::new();
    let mut offset = 0;
    for (k, (rows, cols)) in arch.layer_dims().enumerate() {
        let weights = &flat[offset..offset + rows * cols];
        let bias = &flat[offset + rows * cols..offset + rows * (cols + 1)];
        offset += rows * (cols + 1);
        next.clear();
        next.reserve(rows);
        for r in 0..rows {
            let row = &weights[r * cols..(r + 1) * cols];
            let mut acc = bias[r];
            for (w, zi) in row.iter().zip(&z) {
                acc += w * zi;
            }
            let last = k + 1 == depth;
            next.push(if last && !arch.output_activation_applied() {
                acc
            } else {
                sigma.apply(acc)
            });
        }
        std::mem::swap(&mut z, &mut next);
    }
    z
}

/// The parameter norm: max over every neuron row of |row weights|_1 + |bias|.
pub fn param_norm(theta: &ParamVector) -> f64 {
    let mut best = 0.0f64;
    for layer in theta.layers() {
        let rows = layer.bias.len();
        let cols = layer.weights.len().checked_div(rows).unwrap_or(0);
        for r in 0..rows {
            let mut sum = layer.bias[r].abs();
            for w in &layer.weights[r * cols..(r + 1) * cols] {
                sum += w.abs();
            }
            best = best.max(sum);
        }
    }
    best
}

/// `param_norm` on a packed slice.
pub fn param_norm_packed(arch: &Architecture, flat: &[f64]) -> f64 {
    debug_assert_eq!(flat.len(), arch.param_len());
    let mut best = 0.0f64;
    let mut offset = 0;
    for (rows, cols) in arch.layer_dims() {
        let weights = &flat[offset..offset + rows * cols];
        let bias = &flat[offset + rows * cols..offset + rows * (cols + 1)];
        offset += rows * (cols + 1);
        for r in 0..rows {
            let mut sum = bias[r].abs();
            for w in &weights[r * cols..(r + 1) * cols] {
                sum += w.abs();
            }
            best = best.max(sum);
        }
    }
    best
}

/// Flat packing: layer-major; within a layer the weight rows in row-major
/// order, then the bias vector. For the 2-2-1 architecture this is
/// (w1, w2, w3, w4, b1, b2, w5, w6, b3).
pub fn pack(theta: &ParamVector) -> Vec<f64> {
    let mut flat = Vec::new();
    for layer in theta.layers() {
        flat.extend_from_slice(&layer.weights);
        flat.extend_from_slice(&layer.bias);
    }
    flat
}

/// Inverse of [`pack`]; errors on length mismatch.
pub fn unpack(arch: &Architecture, flat: &[f64]) -> Result<ParamVector, ShapeError> {
    if flat.len() != arch.param_len() {
        return Err(ShapeError::PackedLen {
            expected: arch.param_len(),
            got: flat.len(),
        });
    }
    let mut layers = Vec::with_capacity(arch.depth());
    let mut offset = 0;
    for (rows, cols) in arch.layer_dims() {
        let weights = flat[offset..offset + rows * cols].to_vec();
        let bias = flat[offset + rows * cols..offset + rows * (cols + 1)].to_vec();
        offset += rows * (cols + 1);
        layers.push(LayerParams { weights, bias });
    }
    Ok(ParamVector { layers })
}
