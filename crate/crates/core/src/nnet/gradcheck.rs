use super::qnet::QNetworkParams;
use crate::error::Result;

/// Below this magnitude the relative error is measured against the floor,
/// since both routes agree only to roughly 1e-10 absolute.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// `|a - n| / max(|a|, |n|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
    (analytic - numeric).abs() / denom
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub max_abs_error: f64,
    pub loss: f64,
    pub parameters_checked: usize,
}

/// Squared TD error `(target - q[action])^2` of the network on an embedded window.
pub fn td_loss(net: &QNetworkParams, inputs: &[&[f64]], action: usize, target: f64) -> Result<f64> {
    let q = net.q_values(inputs)?;
    let diff = target - q[action];
    Ok(diff * diff)
}

/// Analytic gradient of `(target - q[action])^2` w.r.t. every parameter.
pub fn td_loss_gradient(
    net: &QNetworkParams,
    inputs: &[&[f64]],
    action: usize,
    target: f64,
) -> Result<(f64, QNetworkParams)> {
    let (q, cache) = net.forward(inputs)?;
    let diff = target - q[action];
    let mut grad_q = vec![0.0; q.len()];
    grad_q[action] = -2.0 * diff;
    let mut grads = QNetworkParams::zeros(net.dims());
    net.backward_into(&cache, &grad_q, &mut grads)?;
    Ok((diff * diff, grads))
}

/// Perturbs every parameter by `+-eps` and compares the central difference
/// of the squared TD error with the backpropagated gradient.
pub fn finite_difference_check(
    net: &QNetworkParams,
    inputs: &[&[f64]],
    action: usize,
    target: f64,
    eps: f64,
) -> Result<GradCheckReport> {
    let (loss, grads) = td_loss_gradient(net, inputs, action, target)?;
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|t| t.data().to_vec()).collect();
    let mut probe = net.clone();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        max_abs_error: 0.0,
        loss,
        parameters_checked: 0,
    };
    let shapes: Vec<usize> = net.tensors().iter().map(|t| t.data().len()).collect();
    let mut flat = 0;
    for (ti, &len) in shapes.iter().enumerate() {
        for e in 0..len {
            let original = probe.tensors()[ti].data()[e];
            probe.tensors_mut()[ti].data_mut()[e] = original + eps;
            let plus = td_loss(&probe, inputs, action, target)?;
            probe.tensors_mut()[ti].data_mut()[e] = original - eps;
            let minus = td_loss(&probe, inputs, action, target)?;
            probe.tensors_mut()[ti].data_mut()[e] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[flat];
            report.max_abs_error = report.max_abs_error.max((a - numeric).abs());
            report.max_relative_error = report.max_relative_error.max(relative_error(a, numeric));
            report.parameters_checked += 1;
            flat += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::QNetDims;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case(seed: u64) -> (QNetworkParams, Vec<Vec<f64>>, usize, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = QNetDims { input_dim: 3, hidden: 4, vocab_size: 4 };
        let net = QNetworkParams::init(dims, &mut rng);
        let xs = (0..4).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        (net, xs, rng.random_range(0..4), rng.random_range(-2.0..10.0))
    }

    fn refs(xs: &[Vec<f64>]) -> Vec<&[f64]> {
        xs.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn default_dims_pass() {
        let (net, xs, a, y) = case(7);
        let r = finite_difference_check(&net, &refs(&xs), a, y, 1e-5).unwrap();
        assert!(r.max_relative_error < 1e-4, "{r:?}");
        assert_eq!(r.parameters_checked, net.num_params());
    }

    #[test]
    fn coarse_step_is_worse() {
        let (net, xs, a, y) = case(8);
        let fine = finite_difference_check(&net, &refs(&xs), a, y, 1e-5).unwrap();
        let coarse = finite_difference_check(&net, &refs(&xs), a, y, 1e-1).unwrap();
        assert!(coarse.max_abs_error > fine.max_abs_error);
    }

    #[test]
    fn zero_network_with_zero_target_is_flat() {
        let net = QNetworkParams::zeros(QNetDims { input_dim: 2, hidden: 3, vocab_size: 3 });
        let xs = vec![vec![0.5, -0.5]; 2];
        let r = finite_difference_check(&net, &refs(&xs), 1, 0.0, 1e-5).unwrap();
        assert_eq!(r.loss, 0.0);
        assert!(r.max_abs_error < 1e-12);
        assert!(r.max_relative_error < 1e-4);
    }
}
