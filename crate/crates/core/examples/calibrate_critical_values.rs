//! Monte-Carlo critical values, the chi-squared shortcut for Neyman and
//! chi-squared tests, and the on-disk cache.
//!
//! ```bash
//! cargo run --release --example calibrate_critical_values
//! ```

use gofmark::calibrate::{asymptotic_critical, CriticalKey, CriticalTable};
use gofmark::detect::Detector;
use gofmark::gof::GofTest;
use gofmark::schemes::SchemeSpec;

fn main() -> gofmark::Result<()> {
    let scheme = SchemeSpec::synthid(30)?;
    let dets = Detector::all_for(scheme);
    let (n, alpha, b, seed) = (400, 0.01, 20_000, 7);
    let mut table = CriticalTable::new();
    let (records, fresh) = table.ensure(scheme, &dets, n, alpha, b, seed)?;
    println!("calibrated {fresh} detectors for {scheme}, n = {n}, B = {b}");
    for r in &records {
        let asym = asymptotic_critical(r.detector, alpha).map(|g| format!("{g:.4}")).unwrap_or_else(|_| "-".into());
        println!("  {:<6} MC {:>10.4}   chi2 {asym:>8}", r.detector.to_string(), r.gamma);
    }
    let dir = std::env::temp_dir().join("gofmark-example-cache");
    let path = dir.join("criticals.csv");
    table.save(&path)?;
    let back = CriticalTable::load(&path)?;
    let key = CriticalKey { scheme, detector: Detector::Gof(GofTest::Kui), n, alpha, b, seed };
    println!("cache {} holds Kui gamma {:.6}", path.display(), back.get(&key).expect("stored").gamma);
    Ok(())
}
