use rand::Rng;

use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// Weights for one gate: `W (H x d)`, `U (H x H)`, `b (H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGate {
    pub w: Tensor2,
    pub u: Tensor2,
    pub b: Tensor2,
}

impl LstmGate {
    fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w: Tensor2::zeros(hidden, input_dim),
            u: Tensor2::zeros(hidden, hidden),
            b: Tensor2::zeros(hidden, 1),
        }
    }

    fn uniform<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let wb = 1.0 / (input_dim as f64).sqrt();
        let ub = 1.0 / (hidden as f64).sqrt();
        Self {
            w: Tensor2::uniform(hidden, input_dim, wb, rng),
            u: Tensor2::uniform(hidden, hidden, ub, rng),
            b: Tensor2::uniform(hidden, 1, ub, rng),
        }
    }

    /// `W x + U h + b`.
    fn preactivation(&self, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut z = self.b.data().to_vec();
        self.w.matvec_add(x, &mut z);
        self.u.matvec_add(h, &mut z);
        z
    }

    fn accumulate(&mut self, dz: &[f64], x: &[f64], h_prev: &[f64]) {
        self.w.add_outer(dz, x);
        self.u.add_outer(dz, h_prev);
        self.b.add_column(dz);
    }

    fn tensors(&self) -> [&Tensor2; 3] {
        [&self.w, &self.u, &self.b]
    }

    fn tensors_mut(&mut self) -> [&mut Tensor2; 3] {
        [&mut self.w, &mut self.u, &mut self.b]
    }
}

/// LSTM cell parameters. Gates are stored in the order input, forget,
/// output, cell candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input: LstmGate,
    pub forget: LstmGate,
    pub output: LstmGate,
    pub cell: LstmGate,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input: LstmGate::zeros(input_dim, hidden),
            forget: LstmGate::zeros(input_dim, hidden),
            output: LstmGate::zeros(input_dim, hidden),
            cell: LstmGate::zeros(input_dim, hidden),
        }
    }

    /// Uniform in `+-1/sqrt(fan_in)` with the forget-gate bias set to 1.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let input = LstmGate::uniform(input_dim, hidden, rng);
        let mut forget = LstmGate::uniform(input_dim, hidden, rng);
        forget.b.fill(1.0);
        let output = LstmGate::uniform(input_dim, hidden, rng);
        let cell = LstmGate::uniform(input_dim, hidden, rng);
        Self {
            input,
            forget,
            output,
            cell,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input.w.cols()
    }

    pub fn hidden(&self) -> usize {
        self.input.w.rows()
    }

    pub fn tensors(&self) -> Vec<&Tensor2> {
        [&self.input, &self.forget, &self.output, &self.cell]
            .into_iter()
            .flat_map(LstmGate::tensors)
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        [
            &mut self.input,
            &mut self.forget,
            &mut self.output,
            &mut self.cell,
        ]
        .into_iter()
        .flat_map(LstmGate::tensors_mut)
        .collect()
    }

    fn check_shapes(&self) -> Result<()> {
        let (h, d) = (self.hidden(), self.input_dim());
        for gate in [&self.input, &self.forget, &self.output, &self.cell] {
            if gate.w.shape() != (h, d) || gate.u.shape() != (h, h) || gate.b.shape() != (h, 1) {
                return Err(Error::Shape("inconsistent LSTM gate shapes".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Activations retained by [`lstm_forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    input_dim: usize,
    hidden: usize,
    steps: Vec<StepCache>,
}

impl LstmCache {
    pub fn steps(&self) -> usize {
        self.steps.len()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Runs the cell over `inputs` from zero initial state and returns the final
/// hidden state.
///
/// `i, f, o = sigmoid(W x + U h + b)`, `g = tanh(W_g x + U_g h + b_g)`,
/// `c = f * c_prev + i * g`, `h = o * tanh(c)`.
pub fn lstm_forward(params: &LstmParams, inputs: &[&[f64]]) -> Result<(Vec<f64>, LstmCache)> {
    params.check_shapes()?;
    let (d, hdim) = (params.input_dim(), params.hidden());
    if inputs.is_empty() {
        return Err(Error::Shape("LSTM needs at least one input step".into()));
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
        return Err(Error::Shape(format!(
            "LSTM input has dimension {}, expected {d}",
            bad.len()
        )));
    }
    let mut h = vec![0.0; hdim];
    let mut c = vec![0.0; hdim];
    let mut steps = Vec::with_capacity(inputs.len());
    for x in inputs {
        let mut i = params.input.preactivation(x, &h);
        let mut f = params.forget.preactivation(x, &h);
        let mut o = params.output.preactivation(x, &h);
        let mut g = params.cell.preactivation(x, &h);
        i.iter_mut().for_each(|v| *v = sigmoid(*v));
        f.iter_mut().for_each(|v| *v = sigmoid(*v));
        o.iter_mut().for_each(|v| *v = sigmoid(*v));
        g.iter_mut().for_each(|v| *v = v.tanh());
        let c_next: Vec<f64> = (0..hdim).map(|j| f[j] * c[j] + i[j] * g[j]).collect();
        let tanh_c: Vec<f64> = c_next.iter().map(|v| v.tanh()).collect();
        let h_next: Vec<f64> = (0..hdim).map(|j| o[j] * tanh_c[j]).collect();
        steps.push(StepCache {
            x: x.to_vec(),
            h_prev: std::mem::replace(&mut h, h_next),
            c_prev: std::mem::replace(&mut c, c_next),
            i,
            f,
            o,
            g,
            tanh_c,
        });
    }
    Ok((
        h,
        LstmCache {
            input_dim: d,
            hidden: hdim,
            steps,
        },
    ))
}

/// Backpropagation through time from a gradient on the final hidden state.
/// Parameter gradients are added into `grads`; returns the gradient with
/// respect to each input step.
pub fn lstm_backward_into(
    params: &LstmParams,
    cache: &LstmCache,
    grad_h: &[f64],
    grads: &mut LstmParams,
) -> Result<Vec<Vec<f64>>> {
    let (d, hdim) = (params.input_dim(), params.hidden());
    if cache.input_dim != d || cache.hidden != hdim {
        return Err(Error::Shape("LSTM cache does not match parameters".into()));
    }
    if grad_h.len() != hdim {
        return Err(Error::Shape(format!(
            "upstream gradient has length {}, expected {hdim}",
            grad_h.len()
        )));
    }
    if grads.input_dim() != d || grads.hidden() != hdim {
        return Err(Error::Shape("LSTM gradient buffer does not match parameters".into()));
    }

    let mut dh = grad_h.to_vec();
    let mut dc = vec![0.0; hdim];
    let mut d_inputs = vec![Vec::new(); cache.steps.len()];
    let (mut di, mut df, mut d_o, mut dg) =
        (vec![0.0; hdim], vec![0.0; hdim], vec![0.0; hdim], vec![0.0; hdim]);

    for (t, s) in cache.steps.iter().enumerate().rev() {
        for j in 0..hdim {
            let tc = s.tanh_c[j];
            dc[j] += dh[j] * s.o[j] * (1.0 - tc * tc);
            d_o[j] = dh[j] * tc * s.o[j] * (1.0 - s.o[j]);
            di[j] = dc[j] * s.g[j] * s.i[j] * (1.0 - s.i[j]);
            df[j] = dc[j] * s.c_prev[j] * s.f[j] * (1.0 - s.f[j]);
            dg[j] = dc[j] * s.i[j] * (1.0 - s.g[j] * s.g[j]);
            dc[j] *= s.f[j];
        }
        grads.input.accumulate(&di, &s.x, &s.h_prev);
        grads.forget.accumulate(&df, &s.x, &s.h_prev);
        grads.output.accumulate(&d_o, &s.x, &s.h_prev);
        grads.cell.accumulate(&dg, &s.x, &s.h_prev);

        let mut dx = vec![0.0; d];
        let mut dh_prev = vec![0.0; hdim];
        for (gate, dz) in [
            (&params.input, &di),
            (&params.forget, &df),
            (&params.output, &d_o),
            (&params.cell, &dg),
        ] {
            gate.w.tr_matvec_add(dz, &mut dx);
            gate.u.tr_matvec_add(dz, &mut dh_prev);
        }
        d_inputs[t] = dx;
        dh = dh_prev;
    }
    Ok(d_inputs)
}

/// Allocating form of [`lstm_backward_into`]: `(parameter grads, input grads)`.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    grad_h: &[f64],
) -> Result<(LstmParams, Vec<Vec<f64>>)> {
    let mut grads = LstmParams::zeros(params.input_dim(), params.hidden());
    let d_inputs = lstm_backward_into(params, cache, grad_h, &mut grads)?;
    Ok((grads, d_inputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn refs(xs: &[Vec<f64>]) -> Vec<&[f64]> {
        xs.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn zero_parameters_give_zero_state() {
        let p = LstmParams::zeros(3, 5);
        let xs = vec![vec![1.0, -2.0, 0.5]; 4];
        let (h, cache) = lstm_forward(&p, &refs(&xs)).unwrap();
        assert_eq!(h, vec![0.0; 5]);
        assert_eq!(cache.steps(), 4);
    }

    #[test]
    fn scalar_cell_by_hand() {
        let mut p = LstmParams::zeros(1, 1);
        p.input.w.set(0, 0, 0.5);
        p.input.b.set(0, 0, 0.1);
        p.forget.w.set(0, 0, -0.3);
        p.forget.b.set(0, 0, 1.0);
        p.output.w.set(0, 0, 0.8);
        p.output.b.set(0, 0, -0.2);
        p.cell.w.set(0, 0, 1.2);
        p.cell.b.set(0, 0, 0.05);
        let (h, _) = lstm_forward(&p, &[&[2.0]]).unwrap();
        // i = s(1.1), o = s(1.4), g = tanh(2.45), c = i g, h = o tanh(c)
        let expected = 0.504_287_123_525_485_1;
        assert!((h[0] - expected).abs() < 1e-12, "{}", h[0]);
    }

    #[test]
    fn wrong_input_dim_is_rejected() {
        let p = LstmParams::zeros(3, 2);
        assert!(matches!(lstm_forward(&p, &[&[1.0, 2.0]]), Err(Error::Shape(_))));
        assert!(matches!(lstm_forward(&p, &[]), Err(Error::Shape(_))));
    }

    #[test]
    fn mismatched_cache_is_rejected() {
        let p = LstmParams::zeros(3, 2);
        let (_, cache) = lstm_forward(&p, &[&[1.0, 2.0, 3.0]]).unwrap();
        let other = LstmParams::zeros(3, 4);
        assert!(lstm_backward(&other, &cache, &[0.0; 4]).is_err());
        assert!(lstm_backward(&p, &cache, &[0.0; 3]).is_err());
    }

    fn random_case(seed: u64) -> (LstmParams, Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = LstmParams::init(3, 4, &mut rng);
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let upstream: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        (p, xs, upstream)
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let (p, xs, _) = random_case(1);
        let (_, cache) = lstm_forward(&p, &refs(&xs)).unwrap();
        let (g, dx) = lstm_backward(&p, &cache, &[0.0; 4]).unwrap();
        assert!(g.tensors().iter().all(|t| t.data().iter().all(|&v| v == 0.0)));
        assert!(dx.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_are_linear_in_upstream() {
        let (p, xs, up) = random_case(2);
        let (_, cache) = lstm_forward(&p, &refs(&xs)).unwrap();
        let (g1, dx1) = lstm_backward(&p, &cache, &up).unwrap();
        let doubled: Vec<f64> = up.iter().map(|v| 2.0 * v).collect();
        let (g2, dx2) = lstm_backward(&p, &cache, &doubled).unwrap();
        for (a, b) in g1.tensors().iter().zip(g2.tensors()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((2.0 * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
        for (x, y) in dx1.iter().flatten().zip(dx2.iter().flatten()) {
            assert!((2.0 * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    /// Central differences of `c . h_final` against the analytic gradient.
    #[test]
    fn matches_finite_differences() {
        let eps = 1e-5;
        for seed in 0..5 {
            let (p, xs, up) = random_case(100 + seed);
            let objective = |q: &LstmParams, xs: &[Vec<f64>]| -> f64 {
                let (h, _) = lstm_forward(q, &refs(xs)).unwrap();
                h.iter().zip(&up).map(|(a, b)| a * b).sum()
            };
            let (_, cache) = lstm_forward(&p, &refs(&xs)).unwrap();
            let (g, dx) = lstm_backward(&p, &cache, &up).unwrap();

            let mut worst: f64 = 0.0;
            let analytic: Vec<f64> = g.tensors().iter().flat_map(|t| t.data().to_vec()).collect();
            let mut idx = 0;
            let n_tensors = p.tensors().len();
            for ti in 0..n_tensors {
                let len = p.tensors()[ti].data().len();
                for e in 0..len {
                    let mut plus = p.clone();
                    plus.tensors_mut()[ti].data_mut()[e] += eps;
                    let mut minus = p.clone();
                    minus.tensors_mut()[ti].data_mut()[e] -= eps;
                    let numeric = (objective(&plus, &xs) - objective(&minus, &xs)) / (2.0 * eps);
                    worst = worst.max(crate::nnet::relative_error(analytic[idx], numeric));
                    idx += 1;
                }
            }
            for t in 0..xs.len() {
                for e in 0..3 {
                    let mut plus = xs.clone();
                    plus[t][e] += eps;
                    let mut minus = xs.clone();
                    minus[t][e] -= eps;
                    let numeric = (objective(&p, &plus) - objective(&p, &minus)) / (2.0 * eps);
                    worst = worst.max(crate::nnet::relative_error(dx[t][e], numeric));
                }
            }
            assert!(worst < 1e-4, "seed {seed}: max relative error {worst}");
        }
    }
}
