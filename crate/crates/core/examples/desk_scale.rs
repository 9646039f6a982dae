//! One seed of the desk-scale comparison: V = 200, 20k train / 2k test
//! sessions, ten epochs. Takes a few minutes in release mode.
//!
//!     cargo run --release --example desk_scale -- [seed]

use std::time::Instant;

use attrec::eval::compare;
use attrec::experiment::{generate_data, run_on_data, ExperimentConfig};

fn main() -> attrec::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut cfg = ExperimentConfig { seed, ..Default::default() };
    cfg.data.num_sessions = 22_000;
    cfg.data.train_ratio = 20.0 / 22.0;
    cfg.agent.gamma = 0.5;
    cfg.agent.learning_rate = 1e-2;
    cfg.agent.epochs = 10;
    let cfg = cfg.resolve()?;

    let start = Instant::now();
    let data = generate_data(&cfg)?;
    let out = run_on_data(&cfg, &data, |e| {
        println!("epoch {}: mean loss {:.4} ({:.0?})", e.epoch, e.mean_loss, start.elapsed())
    })?;
    print!("{}", compare(&out.reports)?.to_text());
    Ok(())
}
