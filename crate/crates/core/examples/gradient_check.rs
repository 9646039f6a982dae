//! Compare backpropagated gradients of the squared TD error with central
//! finite differences on a few random small networks.
//!
//!     cargo run --release --example gradient_check

use attrec::nnet::{finite_difference_check, QNetDims, QNetworkParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> attrec::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for trial in 0..5 {
        let dims = QNetDims { input_dim: 3, hidden: 4, vocab_size: 5 };
        let net = QNetworkParams::init(dims, &mut rng);
        let inputs: Vec<Vec<f64>> = (0..4).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
        let action = rng.random_range(0..dims.vocab_size);
        for eps in [1e-1, 1e-5] {
            let r = finite_difference_check(&net, &refs, action, 1.5, eps)?;
            println!(
                "trial {trial} eps {eps:.0e}: {} params, loss {:.4}, max rel err {:.2e}",
                r.parameters_checked, r.loss, r.max_relative_error
            );
        }
    }
    Ok(())
}
