//! Repetition at low temperature: m-gram repetition rates per temperature,
//! and how many pivots survive deduplication of repeated contexts.
//!
//! ```bash
//! cargo run --release --example repetition_diagnostics
//! ```

use gofmark::prng::{mix64, SecretKey};
use gofmark::schemes::SchemeSpec;
use gofmark::textsim::{dedupe_pivots, generate_watermarked, repetition_rate, SimModel, SimParams};

fn main() -> gofmark::Result<()> {
    let base = SimModel::new(SimParams::default())?;
    let runs = 50u64;
    println!("{:>5} {:>8} {:>8} {:>8} {:>12}", "T", "rep m=1", "rep m=2", "rep m=4", "kept pivots");
    for t in [0.1, 0.3, 0.7, 1.0] {
        let mut acc = [0.0; 4];
        for r in 0..runs {
            let model = base.reseeded(mix64(r));
            let rec = generate_watermarked(&model, SchemeSpec::gumbel(), &SecretKey::from_u64(r), 400, t)?;
            acc[0] += repetition_rate(&rec.tokens, 1)?;
            acc[1] += repetition_rate(&rec.tokens, 2)?;
            acc[2] += repetition_rate(&rec.tokens, 4)?;
            acc[3] += dedupe_pivots(&rec.pivots).len() as f64;
        }
        let a = acc.map(|x| x / runs as f64);
        println!("{t:>5} {:>8.3} {:>8.3} {:>8.3} {:>12.1}", a[0], a[1], a[2], a[3]);
    }
    Ok(())
}
