//! The three decoders on one fixed next-token distribution: chosen tokens,
//! their pivots, and the null p-values a detector would compute.
//!
//! ```bash
//! cargo run --release --example scheme_tour
//! ```

use gofmark::prng::{derive_seed, SecretKey};
use gofmark::schemes::{
    gumbel_decode, gumbel_pivot, inverse_decode, inverse_pivot, synthid_decode, synthid_pivot, NtpDist, NullLaw,
    SchemeSpec,
};

fn main() -> gofmark::Result<()> {
    let p = NtpDist::from_weights(&[5.0, 3.0, 1.0, 0.5, 0.5])?;
    let key = SecretKey::from_u64(2024);
    let rounds = 30;
    let laws = [SchemeSpec::gumbel(), SchemeSpec::inverse(), SchemeSpec::synthid(rounds)?].map(NullLaw::new);
    let mut counts = [[0usize; 5]; 3];
    println!("ctx  gumbel(w, y, p)        inverse(w, y, p)       synthid(w, y, p)");
    for ctx in 0..2000u32 {
        let seed = derive_seed(&key, &[ctx])?;
        let g = gumbel_decode(&p, seed)?;
        let i = inverse_decode(&p, seed)?;
        let fresh = gofmark::prng::uniform(derive_seed(&key, &[ctx, u32::MAX - 1])?, 0);
        let s = synthid_decode(&p, seed, rounds, fresh)?;
        let ys = [gumbel_pivot(g, seed), inverse_pivot(i, seed, 5)?, synthid_pivot(s, seed, rounds, 5)];
        for (c, w) in counts.iter_mut().zip([g, i, s]) {
            c[w as usize] += 1;
        }
        if ctx < 5 {
            print!("{ctx:<4}");
            for ((w, y), law) in [g, i, s].iter().zip(ys).zip(&laws) {
                print!(" ({w}, {y:.3}, {:.3})     ", law.pvalue(y));
            }
            println!();
        }
    }
    println!("\nfrequencies over 2000 contexts vs P = {:?}", p.probs());
    for (name, c) in ["gumbel", "inverse", "synthid"].iter().zip(counts) {
        let f: Vec<String> = c.iter().map(|&k| format!("{:.3}", k as f64 / 2000.0)).collect();
        println!("{name:<8} {}", f.join(" "));
    }
    Ok(())
}
