//! Sample sessions from a planted Markov chain and write them to disk in
//! the JSON-lines session format.
//!
//!     cargo run --release --example generate_sessions -- [out_dir]

use std::path::PathBuf;

use attrec::data::{fit_normalizer, generate_sessions, write_sessions, AttributeVocab, PlantedChain};

fn main() -> attrec::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "generated".into()));
    std::fs::create_dir_all(&out).map_err(|e| attrec::Error::Data(e.to_string()))?;

    let chain = PlantedChain { vocab_size: 50, ..Default::default() };
    let gen = chain.build(1_000, 42)?;
    let sessions = generate_sessions(&gen)?;
    let vocab = AttributeVocab::synthetic(chain.vocab_size)?;
    vocab.save(out.join("vocab.txt"))?;
    write_sessions(out.join("sessions.jsonl"), &sessions, &vocab)?;

    let events: usize = sessions.iter().map(|s| s.events.len()).sum();
    let purchases = sessions.iter().filter(|s| s.purchased).count();
    let stats = fit_normalizer(&sessions, 95.0)?;
    println!("{} sessions, {events} events, {purchases} purchases", sessions.len());
    println!("p95 dwell cap: {:.0} ms", stats.cap);
    let first = &sessions[0];
    let names: Vec<&str> = first.attributes().map(|a| vocab.name(a).unwrap()).collect();
    println!("{}: {}", first.id, names.join(" -> "));
    println!("written to {}", out.display());
    Ok(())
}
