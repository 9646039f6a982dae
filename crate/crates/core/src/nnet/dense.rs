use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Rectifier,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Rectifier subgradient at 0 is 0.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weight: Tensor2,
    pub bias: Tensor2,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    x: Vec<f64>,
    z: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            weight: Tensor2::zeros(outputs, inputs),
            bias: Tensor2::zeros(outputs, 1),
            activation,
        }
    }

    pub fn init<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        Self {
            weight: Tensor2::uniform(outputs, inputs, bound, rng),
            bias: Tensor2::uniform(outputs, 1, bound, rng),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows()
    }

    pub fn tensors(&self) -> [&Tensor2; 2] {
        [&self.weight, &self.bias]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor2; 2] {
        [&mut self.weight, &mut self.bias]
    }

    fn check(&self, x_len: usize) -> Result<()> {
        if self.bias.shape() != (self.outputs(), 1) {
            return Err(Error::Shape("dense bias does not match weight rows".into()));
        }
        if x_len != self.inputs() {
            return Err(Error::Shape(format!(
                "dense input has length {x_len}, expected {}",
                self.inputs()
            )));
        }
        Ok(())
    }
}

/// `y = act(W x + b)`.
pub fn dense_forward(params: &DenseParams, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
    params.check(x.len())?;
    let mut z = params.bias.data().to_vec();
    params.weight.matvec_add(x, &mut z);
    let y = z.iter().map(|&v| params.activation.apply(v)).collect();
    Ok((y, DenseCache { x: x.to_vec(), z }))
}

/// Adds parameter gradients into `grads` and returns `dL/dx`.
pub fn dense_backward_into(
    params: &DenseParams,
    cache: &DenseCache,
    grad_y: &[f64],
    grads: &mut DenseParams,
) -> Result<Vec<f64>> {
    params.check(cache.x.len())?;
    if grad_y.len() != params.outputs() || cache.z.len() != params.outputs() {
        return Err(Error::Shape(format!(
            "dense upstream gradient has length {}, expected {}",
            grad_y.len(),
            params.outputs()
        )));
    }
    if grads.weight.shape() != params.weight.shape() {
        return Err(Error::Shape("dense gradient buffer does not match parameters".into()));
    }
    let dz: Vec<f64> = grad_y
        .iter()
        .zip(&cache.z)
        .map(|(&g, &z)| g * params.activation.derivative(z))
        .collect();
    grads.weight.add_outer(&dz, &cache.x);
    grads.bias.add_column(&dz);
    let mut dx = vec![0.0; params.inputs()];
    params.weight.tr_matvec_add(&dz, &mut dx);
    Ok(dx)
}

pub fn dense_backward(
    params: &DenseParams,
    cache: &DenseCache,
    grad_y: &[f64],
) -> Result<(DenseParams, Vec<f64>)> {
    let mut grads = DenseParams::zeros(params.inputs(), params.outputs(), params.activation);
    let dx = dense_backward_into(params, cache, grad_y, &mut grads)?;
    Ok((grads, dx))
}
