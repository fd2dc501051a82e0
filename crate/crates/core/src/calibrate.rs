//! Critical values: Monte-Carlo calibration under the null, chi-squared
//! asymptotics, and a persistent cache.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::detect::{Detector, Evaluator};
use crate::error::{invalid, Error, Result};
use crate::gof::GofTest;
use crate::prng::stream;
use crate::schemes::{NullLaw, SchemeSpec};
use crate::special::chi2_upper_quantile;

pub const DEFAULT_B: usize = 100_000;
pub const MIN_TABLE_B: usize = 1000;
pub const CACHE_HEADER: &str = "scheme,detector,params,n,alpha,B,seed,gamma";

/// Replicates simulated per rayon task; fixes the work split independently of thread count.
const CHUNK: usize = 256;

/// The `⌈(1 − α)(B + 1)⌉`-th order statistic of `stats` (1-based).
///
/// Requires `α (B + 1) ≥ 1` so that the index does not exceed `B`.
pub fn conservative_quantile(stats: &mut [f64], alpha: f64) -> Result<f64> {
    let b = stats.len();
    check_alpha(alpha)?;
    let idx = order_index(b, alpha)?;
    let (_, nth, _) = stats.select_nth_unstable_by(idx - 1, f64::total_cmp);
    Ok(*nth)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha = {alpha} outside (0,1)"));
    }
    Ok(())
}

fn order_index(b: usize, alpha: f64) -> Result<usize> {
    // The epsilon absorbs rounding in (1 − α)(B + 1) when it is an integer.
    let idx = ((1.0 - alpha) * (b as f64 + 1.0) - 1e-9).ceil().max(1.0) as usize;
    if idx > b {
        let min_b = ((1.0 / alpha) - 1.0 - 1e-9).ceil() as usize;
        return Err(Error::InsufficientSimulation { alpha, b, min_b });
    }
    Ok(idx)
}

/// Null statistics: `result[d][r]` is detector `d` on replicate `r`.
///
/// Replicate `r` draws `n` i.i.d. pivots from the null law with seed
/// `mix64(seed ^ r)`, so the output does not depend on the thread count.
pub fn simulate_null(
    scheme: SchemeSpec,
    detectors: &[Detector],
    n: usize,
    b: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 || b == 0 {
        return invalid("need n >= 1 and B >= 1");
    }
    let evaluator = Evaluator::new(scheme, detectors)?;
    let law = NullLaw::new(scheme);
    let chunks: Vec<Vec<f64>> = (0..b.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let mut ev = evaluator.clone();
            let mut ys = Vec::with_capacity(n);
            let mut out = Vec::with_capacity(detectors.len());
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(b);
            let mut flat = Vec::with_capacity((hi - lo) * detectors.len());
            for r in lo..hi {
                law.sample_into(stream(seed, r as u64), n, &mut ys);
                ev.evaluate(&ys, &mut out)?;
                flat.extend_from_slice(&out);
            }
            Ok(flat)
        })
        .collect::<Result<_>>()?;
    let mut by_detector = vec![Vec::with_capacity(b); detectors.len()];
    for flat in chunks {
        for row in flat.chunks_exact(detectors.len()) {
            for (d, &v) in row.iter().enumerate() {
                by_detector[d].push(v);
            }
        }
    }
    Ok(by_detector)
}

/// Monte-Carlo critical value for one detector.
pub fn mc_critical(
    scheme: SchemeSpec,
    detector: Detector,
    n: usize,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<f64> {
    Ok(mc_critical_batch(scheme, &[detector], n, alpha, b, seed)?[0].gamma)
}

/// Critical values for several detectors from one shared set of null replicates.
pub fn mc_critical_batch(
    scheme: SchemeSpec,
    detectors: &[Detector],
    n: usize,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<Vec<CriticalRecord>> {
    check_alpha(alpha)?;
    order_index(b, alpha)?;
    let stats = simulate_null(scheme, detectors, n, b, seed)?;
    detectors
        .iter()
        .zip(stats)
        .map(|(&detector, mut s)| {
            let gamma = conservative_quantile(&mut s, alpha)?;
            Ok(CriticalRecord { scheme, detector, n, alpha, b, seed, gamma })
        })
        .collect()
}

/// `(1 − α)` quantile of `χ²_k` for Neyman(k) and `χ²_{k−1}` for chi-squared with `k` bins.
pub fn asymptotic_critical(detector: Detector, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let df = match detector {
        Detector::Gof(GofTest::Ney { k }) if k >= 1 => k as f64,
        Detector::Gof(GofTest::Chi { bins }) if bins >= 2 => (bins - 1) as f64,
        other => {
            return Err(Error::MissingCritical(format!("{other} has no chi-squared asymptotic critical value")))
        }
    };
    Ok(chi2_upper_quantile(df, alpha))
}

/// One calibrated critical value with everything that determines it.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRecord {
    pub scheme: SchemeSpec,
    pub detector: Detector,
    pub n: usize,
    pub alpha: f64,
    pub b: usize,
    pub seed: u64,
    pub gamma: f64,
}

impl CriticalRecord {
    fn same_key(&self, other: &CriticalRecord) -> bool {
        self.scheme == other.scheme
            && self.detector.name() == other.detector.name()
            && self.detector.params() == other.detector.params()
            && self.n == other.n
            && self.alpha.to_bits() == other.alpha.to_bits()
            && self.b == other.b
            && self.seed == other.seed
    }

    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.16e}",
            self.scheme,
            self.detector.name(),
            self.detector.params(),
            self.n,
            self.alpha,
            self.b,
            self.seed,
            self.gamma
        )
    }

    fn parse_line(line: &str, line_no: usize) -> Result<Self> {
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", fields.len())));
        }
        let scheme = fields[0].parse().map_err(|e: Error| err(e.to_string()))?;
        let detector = format!("{}:{}", fields[1], fields[2])
            .parse::<Detector>()
            .map_err(|e| err(e.to_string()))?;
        let num = |i: usize, what: &str| -> Result<u64> {
            fields[i].parse().map_err(|_| err(format!("bad {what} {:?}", fields[i])))
        };
        let float = |i: usize, what: &str| -> Result<f64> {
            fields[i].parse().map_err(|_| err(format!("bad {what} {:?}", fields[i])))
        };
        let rec = CriticalRecord {
            scheme,
            detector,
            n: num(3, "n")? as usize,
            alpha: float(4, "alpha")?,
            b: num(5, "B")? as usize,
            seed: num(6, "seed")?,
            gamma: float(7, "gamma")?,
        };
        rec.validate().map_err(|e| err(e.to_string()))?;
        Ok(rec)
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !self.gamma.is_finite() {
            return invalid("critical value must be finite");
        }
        if self.b < MIN_TABLE_B {
            return invalid(format!("B = {} below the minimum of {MIN_TABLE_B} for stored criticals", self.b));
        }
        Ok(())
    }
}

/// Lookup key of a [`CriticalTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalKey {
    pub scheme: SchemeSpec,
    pub detector: Detector,
    pub n: usize,
    pub alpha: f64,
    pub b: usize,
    pub seed: u64,
}

impl CriticalKey {
    fn record(&self, gamma: f64) -> CriticalRecord {
        CriticalRecord {
            scheme: self.scheme,
            detector: self.detector,
            n: self.n,
            alpha: self.alpha,
            b: self.b,
            seed: self.seed,
            gamma,
        }
    }
}

/// Exact-match cache of critical values, persisted as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticalTable {
    records: Vec<CriticalRecord>,
}

impl CriticalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[CriticalRecord] {
        &self.records
    }

    pub fn put(&mut self, record: CriticalRecord) -> Result<()> {
        record.validate()?;
        match self.records.iter_mut().find(|r| r.same_key(&record)) {
            Some(existing) => *existing = record,
            None => self.records.push(record),
        }
        Ok(())
    }

    pub fn get(&self, key: &CriticalKey) -> Option<&CriticalRecord> {
        let probe = key.record(0.0);
        self.records.iter().find(|r| r.same_key(&probe))
    }

    /// Cached value, or calibrate every missing detector in one shared batch.
    ///
    /// Returns the records in `detectors` order and how many were newly calibrated.
    pub fn ensure(
        &mut self,
        scheme: SchemeSpec,
        detectors: &[Detector],
        n: usize,
        alpha: f64,
        b: usize,
        seed: u64,
    ) -> Result<(Vec<CriticalRecord>, usize)> {
        let key = |detector| CriticalKey { scheme, detector, n, alpha, b, seed };
        let missing: Vec<Detector> =
            detectors.iter().copied().filter(|&d| self.get(&key(d)).is_none()).collect();
        if !missing.is_empty() {
            for rec in mc_critical_batch(scheme, &missing, n, alpha, b, seed)? {
                self.put(rec)?;
            }
        }
        let records = detectors
            .iter()
            .map(|&d| self.get(&key(d)).cloned().ok_or_else(|| Error::MissingCritical(d.to_string())))
            .collect::<Result<_>>()?;
        Ok((records, missing.len()))
    }

    /// Reads a cache file; a missing file is an empty table.
    pub fn load(path: &Path) -> Result<Self> {
        let file = match fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::new()),
            Err(e) => return Err(e.into()),
        };
        let mut table = Self::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            if line_no == 1 {
                if line.trim() != CACHE_HEADER {
                    return Err(Error::Parse { line: 1, msg: format!("expected header {CACHE_HEADER:?}") });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            table.put(CriticalRecord::parse_line(line.trim(), line_no)?).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
        }
        Ok(table)
    }

    /// Writes the whole table, replacing the file atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
            writeln!(f, "{CACHE_HEADER}")?;
            for r in &self.records {
                writeln!(f, "{}", r.to_line())?;
            }
            f.flush()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// `cache_put`: store a record and persist the table.
pub fn cache_put(path: &Path, record: CriticalRecord) -> Result<()> {
    let mut table = CriticalTable::load(path)?;
    table.put(record)?;
    table.save(path)
}

/// `cache_get`: exact-match lookup in a cache file.
pub fn cache_get(path: &Path, key: &CriticalKey) -> Result<Option<CriticalRecord>> {
    Ok(CriticalTable::load(path)?.get(key).cloned())
}
