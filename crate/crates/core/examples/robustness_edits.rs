//! Deletion, substitution and information-rich edits on one watermarked
//! text, and what each does to a two-sided and a one-sided detector.
//!
//! ```bash
//! cargo run --release --example robustness_edits
//! ```

use gofmark::calibrate::mc_critical_batch;
use gofmark::detect::Detector;
use gofmark::edits::{delete_tokens, inforich_edit, substitute_tokens};
use gofmark::prng::SecretKey;
use gofmark::schemes::{PivotSeq, SchemeSpec};
use gofmark::textsim::{extract_pivots, generate_watermarked, SimModel, SimParams};

fn main() -> gofmark::Result<()> {
    let model = SimModel::new(SimParams { seed: 3, ..SimParams::default() })?;
    let key = SecretKey::from_u64(77);
    let scheme = SchemeSpec::gumbel();
    let rec = generate_watermarked(&model, scheme, &key, 300, 1.0)?;
    let (m, v) = (model.window(), model.vocab_size());
    let dets: Vec<Detector> = vec!["Kui".parse()?, "Ars".parse()?];

    let variants: Vec<(&str, PivotSeq)> = vec![
        ("none", rec.pivots.clone()),
        ("Del@0.2", extract_pivots(&delete_tokens(&rec.tokens, 0.2, 1)?, &key, scheme, m, v)?),
        ("Sub@0.2", extract_pivots(&substitute_tokens(&rec.tokens, 0.2, 1, v)?, &key, scheme, m, v)?),
        ("Info@0.3", inforich_edit(&rec.pivots, 0.3, 1, scheme)?),
    ];
    for (label, p) in variants {
        let crit = mc_critical_batch(scheme, &dets, p.len(), 0.01, 5000, 1)?;
        print!("{label:<9} n={:<4}", p.len());
        for (d, c) in dets.iter().zip(&crit) {
            let t = d.statistic(&p)?;
            print!("  {d}: {t:>9.3} / {:>8.3} {}", c.gamma, if t > c.gamma { "detected" } else { "missed  " });
        }
        println!();
    }
    Ok(())
}
