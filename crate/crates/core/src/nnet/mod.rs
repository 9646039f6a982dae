//! Small dense-network toolkit: matrices, an LSTM cell with BPTT, dense
//! layers, the Q-network assembly, SGD with global-norm clipping, and a
//! finite-difference gradient checker.

mod dense;
mod gradcheck;
mod lstm;
mod qnet;
mod sgd;
mod tensor;

pub use dense::{dense_backward, dense_backward_into, dense_forward, Activation, DenseCache, DenseParams};
pub use gradcheck::{
    finite_difference_check, relative_error, td_loss, td_loss_gradient, GradCheckReport,
    RELATIVE_FLOOR,
};
pub use lstm::{lstm_backward, lstm_backward_into, lstm_forward, LstmCache, LstmGate, LstmParams};
pub use qnet::{GradientBundle, QCache, QNetDims, QNetworkParams};
pub use sgd::{sgd_step, ParamSet, SgdStats};
pub use tensor::Tensor2;
