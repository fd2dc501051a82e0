//! Generate one Gumbel-max watermarked text, recompute its pivots from the
//! tokens alone, and run every detector against Monte-Carlo critical values.
//!
//! ```bash
//! cargo run --release --example watermark_and_detect
//! ```

use gofmark::calibrate::mc_critical_batch;
use gofmark::detect::{detect, Detector};
use gofmark::prng::SecretKey;
use gofmark::schemes::SchemeSpec;
use gofmark::textsim::{extract_pivots, generate_plain, generate_watermarked, SimModel, SimParams};

fn main() -> gofmark::Result<()> {
    let model = SimModel::new(SimParams { seed: 11, ..SimParams::default() })?;
    let key = SecretKey::from_hex("c0ffee")?;
    let scheme = SchemeSpec::gumbel();
    let n = 200;

    let marked = generate_watermarked(&model, scheme, &key, n, 0.7)?;
    let plain = generate_plain(&model, n, 0.7, 99)?;
    // The detector only sees tokens and the key.
    let observed = extract_pivots(&marked.tokens, &key, scheme, model.window(), model.vocab_size())?;
    assert_eq!(observed, marked.pivots);
    let human = extract_pivots(&plain, &key, scheme, model.window(), model.vocab_size())?;

    let detectors = Detector::all_for(scheme);
    let criticals = mc_critical_batch(scheme, &detectors, n, 0.01, 5000, 1)?;
    println!("{:<6} {:>12} {:>12} {:>10} {:>10}", "test", "gamma", "T(marked)", "marked", "plain");
    for (d, c) in detectors.iter().zip(&criticals) {
        let a = detect(&observed, *d, c)?;
        let b = detect(&human, *d, c)?;
        println!("{:<6} {:>12.4} {:>12.4} {:>10} {:>10}", d.to_string(), c.gamma, a.statistic, a.reject, b.reject);
    }
    Ok(())
}
