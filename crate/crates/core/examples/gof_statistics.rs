//! All eight goodness-of-fit statistics on a uniform sample and on a sample
//! whose upper tail is inflated, the shape a watermark leaves on p-values.
//!
//! ```bash
//! cargo run --release --example gof_statistics
//! ```

use gofmark::gof::{GofTest, PValueSeq};
use gofmark::prng::{stream, uniform};

fn main() -> gofmark::Result<()> {
    let n = 400;
    let seed = stream(5, 0);
    let null: Vec<f64> = (0..n).map(|i| uniform(seed, i)).collect();
    // 10% of the p-values pushed towards 0.
    let marked: Vec<f64> = null.iter().enumerate().map(|(i, &p)| if i % 10 == 0 { p * 0.01 } else { p }).collect();
    let (a, b) = (PValueSeq::new(null)?, PValueSeq::new(marked)?);
    println!("{:<22} {:>10} {:>10}", "test", "uniform", "marked");
    let mut tests = GofTest::all();
    tests.push("Phi:s=1".parse()?);
    tests.push("Chi:bins=20".parse()?);
    for t in tests {
        println!("{:<22} {:>10.4} {:>10.4}", t.to_string(), t.evaluate(&a)?.value, t.evaluate(&b)?.value);
    }
    Ok(())
}
