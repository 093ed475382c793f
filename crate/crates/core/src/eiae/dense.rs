//! Fully connected networks with leaky-ReLU hidden layers and a hand-written
//! reverse pass.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.01;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`.
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub activation: bool,
}

/// Stack of affine layers; rows of the input matrix are independent samples.
#[derive(Debug)]
pub struct DenseNet {
    layers: Vec<DenseLayer>,
    /// Changes whenever parameters change, so caches from older forward
    /// passes can be recognized.
    version: u64,
}

impl Clone for DenseNet {
    fn clone(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            version: fresh_id(),
        }
    }
}

impl PartialEq for DenseNet {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

/// Activations kept by a forward pass for the matching backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every layer.
    inputs: Vec<DMatrix<f64>>,
    /// Pre-activation of every layer.
    pre: Vec<DMatrix<f64>>,
    version: u64,
}

/// Gradients of a scalar with respect to every layer and the input.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub input: DMatrix<f64>,
}

impl DenseGrads {
    /// Same order as [`DenseNet::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn leaky_slope(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

impl DenseNet {
    /// Every layer but the last is activated.
    pub fn from_layers(layers: Vec<(DMatrix<f64>, DVector<f64>)>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Argument("a network needs at least one layer".into()));
        }
        let n = layers.len();
        let mut built = Vec::with_capacity(n);
        for (i, (weight, bias)) in layers.into_iter().enumerate() {
            if weight.nrows() != bias.len() {
                return Err(Error::Argument(format!("layer {i}: bias length differs from output width")));
            }
            if let Some(prev) = built.last().map(|l: &DenseLayer| l.weight.nrows()) {
                if prev != weight.ncols() {
                    return Err(Error::Argument(format!(
                        "layer {i} expects {} inputs but the previous layer emits {prev}",
                        weight.ncols()
                    )));
                }
            }
            if weight.iter().chain(bias.iter()).any(|x| !x.is_finite()) {
                return Err(Error::Argument(format!("layer {i} has non-finite parameters")));
            }
            built.push(DenseLayer {
                weight,
                bias,
                activation: i + 1 < n,
            });
        }
        Ok(Self {
            layers: built,
            version: fresh_id(),
        })
    }

    /// Glorot-uniform weights and zero biases for widths `dims[0] → … → dims[last]`.
    pub fn random(dims: &[usize], rng: &mut impl Rng) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Argument("network widths must be positive, at least two".into()));
        }
        let layers = dims
            .windows(2)
            .map(|w| {
                let a = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let weight = DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-a..a));
                (weight, DVector::zeros(w[1]))
            })
            .collect();
        Self::from_layers(layers)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Argument("network needs at least two widths".into()));
        }
        Self::from_layers(
            dims.windows(2)
                .map(|w| (DMatrix::zeros(w[1], w[0]), DVector::zeros(w[1])))
                .collect(),
        )
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").weight.nrows()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// All weights (column-major per layer) then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weight.len();
            l.weight.as_mut_slice().copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.as_mut_slice().copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        self.version = fresh_id();
        Ok(())
    }

    /// Row-wise forward pass.
    pub fn forward(&self, input: &DMatrix<f64>) -> Result<(DMatrix<f64>, ForwardCache)> {
        if input.ncols() != self.input_dim() {
            return Err(Error::Argument(format!(
                "network takes {} inputs, got {}",
                self.input_dim(),
                input.ncols()
            )));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for l in &self.layers {
            let mut z = &x * l.weight.transpose();
            for mut row in z.row_iter_mut() {
                row += l.bias.transpose();
            }
            let out = if l.activation { z.map(leaky) } else { z.clone() };
            inputs.push(x);
            pre.push(z);
            x = out;
        }
        Ok((
            x,
            ForwardCache {
                inputs,
                pre,
                version: self.version,
            },
        ))
    }

    /// Reverse pass for `cache`, given the gradient of a scalar with respect
    /// to the forward output.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &DMatrix<f64>) -> Result<DenseGrads> {
        if cache.version != self.version {
            return Err(Error::StaleCache);
        }
        let rows = cache.inputs[0].nrows();
        if grad_output.nrows() != rows || grad_output.ncols() != self.output_dim() {
            return Err(Error::Argument("output gradient shape does not match the forward pass".into()));
        }
        let n = self.layers.len();
        let mut weights = vec![DMatrix::zeros(0, 0); n];
        let mut biases = vec![DVector::zeros(0); n];
        let mut g = grad_output.clone();
        for i in (0..n).rev() {
            let l = &self.layers[i];
            if l.activation {
                g.zip_apply(&cache.pre[i], |gi, z| *gi *= leaky_slope(z));
            }
            weights[i] = g.transpose() * &cache.inputs[i];
            biases[i] = g.row_sum().transpose();
            g = &g * &l.weight;
        }
        Ok(DenseGrads {
            weights,
            biases,
            input: g,
        })
    }
}
