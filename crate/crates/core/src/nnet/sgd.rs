use super::dense::DenseParams;
use super::lstm::LstmParams;
use super::qnet::QNetworkParams;
use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// A fixed, ordered list of parameter tensors.
pub trait ParamSet {
    fn tensors(&self) -> Vec<&Tensor2>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor2>;
}

impl ParamSet for QNetworkParams {
    fn tensors(&self) -> Vec<&Tensor2> {
        QNetworkParams::tensors(self)
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        QNetworkParams::tensors_mut(self)
    }
}

impl ParamSet for LstmParams {
    fn tensors(&self) -> Vec<&Tensor2> {
        LstmParams::tensors(self)
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        LstmParams::tensors_mut(self)
    }
}

impl ParamSet for DenseParams {
    fn tensors(&self) -> Vec<&Tensor2> {
        DenseParams::tensors(self).to_vec()
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        DenseParams::tensors_mut(self).into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdStats {
    /// Global L2 norm of the raw gradient.
    pub grad_norm: f64,
    /// Factor applied by clipping (1 when not clipped).
    pub scale: f64,
}

/// `theta <- theta - lr * clip(grad)`, where `clip` rescales the whole
/// gradient to norm `max_norm` when it is larger.
pub fn sgd_step<P: ParamSet + ?Sized>(
    params: &mut P,
    grads: &P,
    lr: f64,
    max_norm: Option<f64>,
) -> Result<SgdStats> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::Argument(format!("learning rate must be >= 0, got {lr}")));
    }
    let g = grads.tensors();
    let mut p = params.tensors_mut();
    if g.len() != p.len() || g.iter().zip(&p).any(|(a, b)| a.shape() != b.shape()) {
        return Err(Error::Shape("gradients are not congruent with parameters".into()));
    }
    let sum_sq: f64 = g.iter().map(|t| t.sum_sq()).sum();
    let grad_norm = sum_sq.sqrt();
    if !grad_norm.is_finite() {
        let bad = g.iter().position(|t| !t.is_finite()).unwrap_or(0);
        return Err(Error::Numerical(format!(
            "non-finite gradient (tensor {bad}, norm {grad_norm})"
        )));
    }
    let scale = match max_norm {
        Some(c) if grad_norm > c => c / grad_norm,
        _ => 1.0,
    };
    let step = lr * scale;
    if step != 0.0 {
        for (param, grad) in p.iter_mut().zip(&g) {
            param.axpy(-step, grad);
        }
    }
    Ok(SgdStats { grad_norm, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::{Activation, QNetDims};

    fn scalar_layer(value: f64) -> DenseParams {
        let mut p = DenseParams::zeros(1, 1, Activation::Identity);
        p.weight.set(0, 0, value);
        p
    }

    #[test]
    fn scalar_arithmetic() {
        let mut p = scalar_layer(1.0);
        sgd_step(&mut p, &scalar_layer(2.0), 0.1, None).unwrap();
        assert!((p.weight.get(0, 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_or_rate_leaves_params() {
        let dims = QNetDims { input_dim: 2, hidden: 3, vocab_size: 4 };
        let mut p = QNetworkParams::zeros(dims);
        p.fill(0.7);
        let before = p.clone();
        sgd_step(&mut p, &QNetworkParams::zeros(dims), 0.5, Some(5.0)).unwrap();
        assert_eq!(p, before);
        let mut g = QNetworkParams::zeros(dims);
        g.fill(3.0);
        sgd_step(&mut p, &g, 0.0, None).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn clipping_bounds_the_step() {
        let mut p = scalar_layer(0.0);
        let stats = sgd_step(&mut p, &scalar_layer(10.0), 1.0, Some(5.0)).unwrap();
        assert_eq!(stats.grad_norm, 10.0);
        assert_eq!(stats.scale, 0.5);
        assert_eq!(p.weight.get(0, 0), -5.0);
    }

    #[test]
    fn non_finite_gradient_halts() {
        let mut p = scalar_layer(1.0);
        let err = sgd_step(&mut p, &scalar_layer(f64::NAN), 0.1, None).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        assert_eq!(p.weight.get(0, 0), 1.0);
    }

    #[test]
    fn incongruent_shapes_fail() {
        let mut p = DenseParams::zeros(2, 1, Activation::Identity);
        assert!(sgd_step(&mut p, &scalar_layer(1.0), 0.1, None).is_err());
    }
}
