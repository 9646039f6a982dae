use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::{dense_backward_into, dense_forward, Activation, DenseCache, DenseParams};
use super::lstm::{lstm_backward_into, lstm_forward, LstmCache, LstmParams};
use super::tensor::Tensor2;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AQNT";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 * 8;

/// Network sizes. Both dense layers are `hidden` wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QNetDims {
    pub input_dim: usize,
    pub hidden: usize,
    pub vocab_size: usize,
}

/// LSTM encoder, two rectifier layers, and a linear head with one unit per
/// attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetworkParams {
    pub lstm: LstmParams,
    pub hidden1: DenseParams,
    pub hidden2: DenseParams,
    pub output: DenseParams,
}

/// Gradients share the parameter layout.
pub type GradientBundle = QNetworkParams;

#[derive(Debug, Clone)]
pub struct QCache {
    lstm: LstmCache,
    hidden1: DenseCache,
    hidden2: DenseCache,
    output: DenseCache,
}

impl QNetworkParams {
    pub fn zeros(dims: QNetDims) -> Self {
        let QNetDims {
            input_dim: d,
            hidden: h,
            vocab_size: v,
        } = dims;
        Self {
            lstm: LstmParams::zeros(d, h),
            hidden1: DenseParams::zeros(h, h, Activation::Rectifier),
            hidden2: DenseParams::zeros(h, h, Activation::Rectifier),
            output: DenseParams::zeros(h, v, Activation::Identity),
        }
    }

    pub fn init<R: Rng + ?Sized>(dims: QNetDims, rng: &mut R) -> Self {
        let QNetDims {
            input_dim: d,
            hidden: h,
            vocab_size: v,
        } = dims;
        let lstm = LstmParams::init(d, h, rng);
        let hidden1 = DenseParams::init(h, h, Activation::Rectifier, rng);
        let hidden2 = DenseParams::init(h, h, Activation::Rectifier, rng);
        let output = DenseParams::init(h, v, Activation::Identity, rng);
        Self {
            lstm,
            hidden1,
            hidden2,
            output,
        }
    }

    pub fn dims(&self) -> QNetDims {
        QNetDims {
            input_dim: self.lstm.input_dim(),
            hidden: self.lstm.hidden(),
            vocab_size: self.output.outputs(),
        }
    }

    /// All parameter tensors in declaration order.
    pub fn tensors(&self) -> Vec<&Tensor2> {
        let mut out = self.lstm.tensors();
        out.extend(self.hidden1.tensors());
        out.extend(self.hidden2.tensors());
        out.extend(self.output.tensors());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut out = self.lstm.tensors_mut();
        out.extend(self.hidden1.tensors_mut());
        out.extend(self.hidden2.tensors_mut());
        out.extend(self.output.tensors_mut());
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data().len()).sum()
    }

    pub fn fill(&mut self, value: f64) {
        self.tensors_mut().into_iter().for_each(|t| t.fill(value));
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        let (a, b) = (self.tensors(), other.tensors());
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.shape() == y.shape())
    }

    fn check(&self) -> Result<()> {
        let h = self.lstm.hidden();
        let ok = self.hidden1.inputs() == h
            && self.hidden1.outputs() == h
            && self.hidden2.inputs() == h
            && self.hidden2.outputs() == h
            && self.output.inputs() == h;
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("dense layers must be as wide as the LSTM state".into()))
        }
    }

    /// Q-values for every attribute given the embedded window.
    pub fn forward(&self, inputs: &[&[f64]]) -> Result<(Vec<f64>, QCache)> {
        self.check()?;
        let (h, lstm) = lstm_forward(&self.lstm, inputs)?;
        let (a1, hidden1) = dense_forward(&self.hidden1, &h)?;
        let (a2, hidden2) = dense_forward(&self.hidden2, &a1)?;
        let (q, output) = dense_forward(&self.output, &a2)?;
        Ok((
            q,
            QCache {
                lstm,
                hidden1,
                hidden2,
                output,
            },
        ))
    }

    pub fn q_values(&self, inputs: &[&[f64]]) -> Result<Vec<f64>> {
        Ok(self.forward(inputs)?.0)
    }

    /// Adds `dL/dtheta` into `grads` given `dL/dq`; returns input gradients.
    pub fn backward_into(
        &self,
        cache: &QCache,
        grad_q: &[f64],
        grads: &mut GradientBundle,
    ) -> Result<Vec<Vec<f64>>> {
        if !self.same_shape(grads) {
            return Err(Error::Shape("gradient bundle does not match parameters".into()));
        }
        let d2 = dense_backward_into(&self.output, &cache.output, grad_q, &mut grads.output)?;
        let d1 = dense_backward_into(&self.hidden2, &cache.hidden2, &d2, &mut grads.hidden2)?;
        let dh = dense_backward_into(&self.hidden1, &cache.hidden1, &d1, &mut grads.hidden1)?;
        lstm_backward_into(&self.lstm, &cache.lstm, &dh, &mut grads.lstm)
    }

    /// Binary checkpoint: magic, u32 version, u64 `d, H, k, V`, then every
    /// tensor in declaration order as little-endian f64.
    pub fn to_bytes(&self, window: usize) -> Vec<u8> {
        let dims = self.dims();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.num_params());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for n in [dims.input_dim, dims.hidden, window, dims.vocab_size] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for t in self.tensors() {
            for x in t.data() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    /// Parses a checkpoint, returning the parameters and the stored window length.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize)> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(Error::Checkpoint("not a network checkpoint".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "network checkpoint version {version}, expected {VERSION}"
            )));
        }
        let word = |i: usize| {
            let at = 8 + 8 * i;
            u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize
        };
        let dims = QNetDims {
            input_dim: word(0),
            hidden: word(1),
            vocab_size: word(3),
        };
        let window = word(2);
        if dims.input_dim == 0 || dims.hidden == 0 || dims.vocab_size == 0 || window == 0 {
            return Err(Error::Checkpoint("network checkpoint has a zero dimension".into()));
        }
        let mut params = Self::zeros(dims);
        let body = &bytes[HEADER_LEN..];
        if body.len() != 8 * params.num_params() {
            return Err(Error::Checkpoint(format!(
                "network checkpoint body is {} bytes, expected {}",
                body.len(),
                8 * params.num_params()
            )));
        }
        let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        for t in params.tensors_mut() {
            for slot in t.data_mut() {
                *slot = values.next().expect("length checked");
            }
        }
        if !params.is_finite() {
            return Err(Error::Checkpoint("network checkpoint has non-finite values".into()));
        }
        Ok((params, window))
    }

    pub fn save(&self, path: impl AsRef<Path>, window: usize) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes(window))
            .map_err(|e| Error::io(format!("writing network {}", path.display()), e))
    }

    /// Loads a checkpoint and rejects it unless its dimensions match.
    pub fn load_expecting(path: impl AsRef<Path>, dims: QNetDims, window: usize) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path)
            .map_err(|e| Error::io(format!("reading network {}", path.display()), e))?;
        let (params, stored_window) = Self::from_bytes(&bytes)?;
        if params.dims() != dims || stored_window != window {
            return Err(Error::Checkpoint(format!(
                "network checkpoint has dims {:?} with k={stored_window}, expected {dims:?} with k={window}",
                params.dims()
            )));
        }
        Ok(params)
    }
}
