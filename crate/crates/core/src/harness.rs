//! Experiment sweeps: Type I / Type II tables, robustness under edits, and
//! the repetition and CDF diagnostics.
//!
//! Trial `i` of every cell uses the same trial seed `mix64(master ^ i)`, so
//! cells that differ only in `n`, the edit, or the detector see the same
//! documents. Texts are generated once at the largest length; shorter lengths
//! are prefixes, which is exact because generation is sequential.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{CriticalTable, DEFAULT_B, MIN_TABLE_B};
use crate::detect::{Detector, Evaluator};
use crate::edits::{delete_tokens, inforich_edit, substitute_tokens, EditKind, EditSpec};
use crate::error::{invalid, Error, Result};
use crate::prng::{mix64, SecretKey};
use crate::schemes::{NullLaw, PivotSeq, SchemeSpec};
use crate::textsim::{
    dedupe_pivots, extract_pivots, generate_plain, generate_watermarked, repetition_rate, SimModel, SimParams,
};

pub const RESULTS_HEADER: &str = "scheme,detector,T,n,edit,rate,metric,value,trials,seed";

const MODEL_SALT: u64 = 0x4D4F_4445_4C00_0001;
const KEY_SALT: u64 = 0x4B45_5900_0000_0002;
const PLAIN_SALT: u64 = 0x504C_4149_4E00_0003;
const EDIT_SALT: u64 = 0x4544_4954_0000_0004;

/// JSON experiment description. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `gumbel`, `inverse`, `synthid:<k>`.
    pub schemes: Vec<String>,
    /// Empty means every detector the scheme supports.
    pub detectors: Vec<String>,
    pub temperatures: Vec<f64>,
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub alpha: f64,
    /// `Del@0.2`, `Sub@0.1`, `Info@0.3`.
    pub edits: Vec<String>,
    pub model: SimParams,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub calibration_b: usize,
    pub calibration_seed: u64,
    /// Critical-value cache; defaults to `<out_dir>/criticals.csv`.
    pub cache: Option<PathBuf>,
    /// Also report Type II on deduplicated pivots.
    pub dedupe: bool,
    pub repetition_windows: Vec<usize>,
    pub diagnostic_runs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: vec!["gumbel".into(), "inverse".into(), "synthid:30".into()],
            detectors: Vec::new(),
            temperatures: vec![0.1, 0.3, 0.7, 1.0],
            lengths: vec![200, 400],
            trials: 1000,
            alpha: 0.01,
            edits: Vec::new(),
            model: SimParams::default(),
            master_seed: 0,
            out_dir: PathBuf::from("results"),
            calibration_b: DEFAULT_B,
            calibration_seed: 0x0CA1_1B2A_7E00_0001,
            cache: None,
            dedupe: false,
            repetition_windows: vec![1, 2, 3, 4],
            diagnostic_runs: 100,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache.clone().unwrap_or_else(|| self.out_dir.join("criticals.csv"))
    }

    /// Parses and checks everything; the result drives the sweeps.
    pub fn plan(&self) -> Result<Plan> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return cfg(format!("alpha {} outside (0,1)", self.alpha));
        }
        if self.calibration_b < MIN_TABLE_B {
            return cfg(format!("calibration_b must be at least {MIN_TABLE_B}"));
        }
        if self.schemes.is_empty() || self.temperatures.is_empty() || self.lengths.is_empty() {
            return cfg("schemes, temperatures and lengths must be nonempty".into());
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return cfg(format!("temperature {t} must be positive"));
        }
        if self.lengths.contains(&0) {
            return cfg("lengths must be at least 1".into());
        }
        if self.repetition_windows.contains(&0) {
            return cfg("repetition windows must be at least 1".into());
        }
        SimModel::new(self.model)?;
        let schemes: Vec<SchemeSpec> = self.schemes.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        let requested: Vec<Detector> = self.detectors.iter().map(|d| d.parse()).collect::<Result<_>>()?;
        let detectors = schemes
            .iter()
            .map(|&s| {
                let dets: Vec<Detector> = if requested.is_empty() {
                    Detector::all_for(s)
                } else {
                    requested.iter().copied().filter(|d| d.supports(s).is_ok()).collect()
                };
                if dets.is_empty() {
                    return Err(Error::Config(format!("no requested detector supports {s}")));
                }
                Ok(dets)
            })
            .collect::<Result<_>>()?;
        let edits = self.edits.iter().map(|e| e.parse()).collect::<Result<_>>()?;
        let mut lengths = self.lengths.clone();
        lengths.sort_unstable();
        lengths.dedup();
        Ok(Plan { schemes, detectors, edits, lengths })
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub schemes: Vec<SchemeSpec>,
    /// Per scheme; detectors a scheme does not support are dropped.
    pub detectors: Vec<Vec<Detector>>,
    pub edits: Vec<EditSpec>,
    /// Sorted, deduplicated.
    pub lengths: Vec<usize>,
}

/// One cell of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: SchemeSpec,
    pub detector: Detector,
    pub temperature: f64,
    pub n: usize,
    /// `none`, `dedupe`, or an edit label such as `Del`.
    pub edit: String,
    pub rate: f64,
    /// `type1` or `type2`.
    pub metric: &'static str,
    pub value: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.detector,
            self.temperature,
            self.n,
            self.edit,
            self.rate,
            self.metric,
            self.value,
            self.trials,
            self.seed
        )
    }
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(RESULTS_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r.to_csv_line());
        text.push('\n');
    }
    write_file(path, text.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Seeds of trial `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub trial: u64,
    pub model: u64,
    pub key: u64,
    pub plain: u64,
    pub edit: u64,
}

impl TrialSeeds {
    pub fn new(master: u64, index: u64) -> Self {
        let trial = mix64(master ^ index);
        Self {
            trial,
            model: mix64(trial ^ MODEL_SALT),
            key: mix64(trial ^ KEY_SALT),
            plain: mix64(trial ^ PLAIN_SALT),
            edit: mix64(trial ^ EDIT_SALT),
        }
    }
}

/// Runs sweeps against one configuration and one critical-value table.
#[derive(Debug)]
pub struct Runner {
    config: ExperimentConfig,
    plan: Plan,
    model: SimModel,
    table: CriticalTable,
    /// Log auto-calibration to stderr.
    pub verbose: bool,
}

impl Runner {
    /// Loads the cache at [`ExperimentConfig::cache_path`] if it exists.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let table = CriticalTable::load(&config.cache_path())?;
        Self::with_table(config, table)
    }

    pub fn with_table(config: ExperimentConfig, table: CriticalTable) -> Result<Self> {
        let plan = config.plan()?;
        let model = SimModel::new(config.model)?;
        Ok(Self { config, plan, model, table, verbose: false })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    pub fn table(&self) -> &CriticalTable {
        &self.table
    }

    pub fn save_table(&self) -> Result<()> {
        self.table.save(&self.config.cache_path())
    }

    /// Critical values for every (scheme, detector, length) of the plan.
    pub fn calibrate_all(&mut self) -> Result<usize> {
        let mut fresh = 0;
        for (si, &scheme) in self.plan.schemes.clone().iter().enumerate() {
            let dets = self.plan.detectors[si].clone();
            for &n in &self.plan.lengths.clone() {
                fresh += self.criticals(scheme, &dets, n)?.1;
            }
        }
        Ok(fresh)
    }

    fn criticals(&mut self, scheme: SchemeSpec, dets: &[Detector], n: usize) -> Result<(Vec<f64>, usize)> {
        let (b, seed, alpha) = (self.config.calibration_b, self.config.calibration_seed, self.config.alpha);
        let (records, fresh) = self.table.ensure(scheme, dets, n, alpha, b, seed)?;
        if fresh > 0 && self.verbose {
            eprintln!("calibrated {fresh} detector(s) for {scheme} at n = {n} (B = {b})");
        }
        Ok((records.iter().map(|r| r.gamma).collect(), fresh))
    }

    /// Per detector, how many samples land on the counted side of the critical value.
    ///
    /// `count_rejections` counts `T > γ` (Type I); otherwise `T ≤ γ` (Type II).
    fn count_errors(
        &mut self,
        scheme: SchemeSpec,
        dets: &[Detector],
        samples: &[Vec<f64>],
        count_rejections: bool,
    ) -> Result<Vec<usize>> {
        let lengths: BTreeSet<usize> = samples.iter().map(Vec::len).collect();
        if lengths.contains(&0) {
            return invalid("a sample lost every pivot");
        }
        let mut gammas = std::collections::BTreeMap::new();
        for n in lengths {
            gammas.insert(n, self.criticals(scheme, dets, n)?.0);
        }
        let evaluator = Evaluator::new(scheme, dets)?;
        let flags: Vec<Vec<bool>> = samples
            .par_iter()
            .map_init(
                || (evaluator.clone(), Vec::new()),
                |(ev, out), ys| -> Result<Vec<bool>> {
                    ev.evaluate(ys, out)?;
                    let g = &gammas[&ys.len()];
                    Ok(out.iter().zip(g).map(|(&t, &g)| (t > g) == count_rejections).collect())
                },
            )
            .collect::<Result<_>>()?;
        let mut counts = vec![0; dets.len()];
        for f in flags {
            for (c, hit) in counts.iter_mut().zip(f) {
                *c += hit as usize;
            }
        }
        Ok(counts)
    }

    fn max_len(&self) -> usize {
        *self.plan.lengths.last().expect("nonempty")
    }

    fn trial_model(&self, seeds: &TrialSeeds) -> SimModel {
        self.model.reseeded(seeds.model)
    }

    fn push_rows(
        &self,
        rows: &mut Vec<ResultRow>,
        cell: Cell,
        dets: &[Detector],
        counts: &[usize],
        metric: &'static str,
    ) {
        let trials = self.config.trials;
        for (&detector, &c) in dets.iter().zip(counts) {
            rows.push(ResultRow {
                scheme: cell.scheme,
                detector,
                temperature: cell.temperature,
                n: cell.n,
                edit: cell.edit.to_string(),
                rate: cell.rate,
                metric,
                value: c as f64 / trials as f64,
                trials,
                seed: self.config.master_seed,
            });
        }
    }

    /// False-positive rate on unwatermarked text, per (scheme, T, n, detector).
    pub fn run_type1(&mut self) -> Result<Vec<ResultRow>> {
        let (trials, max_n) = (self.config.trials, self.max_len());
        let mut rows = Vec::new();
        for &temperature in &self.config.temperatures.clone() {
            let texts: Vec<(Vec<u32>, SecretKey)> = (0..trials as u64)
                .into_par_iter()
                .map(|i| {
                    let s = TrialSeeds::new(self.config.master_seed, i);
                    let tokens = generate_plain(&self.trial_model(&s), max_n, temperature, s.plain)?;
                    Ok((tokens, SecretKey::from_u64(s.key)))
                })
                .collect::<Result<_>>()?;
            for (si, &scheme) in self.plan.schemes.clone().iter().enumerate() {
                let dets = self.plan.detectors[si].clone();
                let (m, v) = (self.model.window(), self.model.vocab_size());
                let pivots: Vec<Vec<f64>> = texts
                    .par_iter()
                    .map(|(tokens, key)| Ok(extract_pivots(tokens, key, scheme, m, v)?.values()))
                    .collect::<Result<_>>()?;
                for &n in &self.plan.lengths.clone() {
                    let samples: Vec<Vec<f64>> = pivots.iter().map(|p| p[..n].to_vec()).collect();
                    let counts = self.count_errors(scheme, &dets, &samples, true)?;
                    let cell = Cell { scheme, temperature, n, edit: "none", rate: 0.0 };
                    self.push_rows(&mut rows, cell, &dets, &counts, "type1");
                }
            }
        }
        Ok(rows)
    }

    /// Miss rate on watermarked text; with `dedupe` also on deduplicated pivots.
    pub fn run_type2(&mut self) -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        let dedupe = self.config.dedupe;
        for (si, &scheme) in self.plan.schemes.clone().iter().enumerate() {
            let dets = self.plan.detectors[si].clone();
            for &temperature in &self.config.temperatures.clone() {
                let texts = self.watermarked(scheme, temperature)?;
                for &n in &self.plan.lengths.clone() {
                    let raw: Vec<PivotSeq> = texts.iter().map(|(p, _, _)| prefix(p, n)).collect::<Result<_>>()?;
                    let samples: Vec<Vec<f64>> = raw.iter().map(PivotSeq::values).collect();
                    let counts = self.count_errors(scheme, &dets, &samples, false)?;
                    let cell = Cell { scheme, temperature, n, edit: "none", rate: 0.0 };
                    self.push_rows(&mut rows, cell, &dets, &counts, "type2");
                    if dedupe {
                        let samples: Vec<Vec<f64>> = raw.iter().map(|p| dedupe_pivots(p).values()).collect();
                        let counts = self.count_errors(scheme, &dets, &samples, false)?;
                        let cell = Cell { edit: "dedupe", ..cell };
                        self.push_rows(&mut rows, cell, &dets, &counts, "type2");
                    }
                }
            }
        }
        Ok(rows)
    }

    /// Type II after each configured edit, next to the unedited baseline.
    ///
    /// Token edits re-extract pivots from the edited text, so their length is
    /// `n − ⌊rate · n⌋`; critical values are calibrated at that length.
    pub fn run_robustness(&mut self) -> Result<Vec<ResultRow>> {
        if self.plan.edits.is_empty() {
            return Err(Error::Config("robustness needs at least one edit".into()));
        }
        let (m, v) = (self.model.window(), self.model.vocab_size());
        let mut rows = Vec::new();
        for (si, &scheme) in self.plan.schemes.clone().iter().enumerate() {
            let dets = self.plan.detectors[si].clone();
            for &temperature in &self.config.temperatures.clone() {
                let texts = self.watermarked(scheme, temperature)?;
                for &n in &self.plan.lengths.clone() {
                    let samples: Vec<Vec<f64>> =
                        texts.iter().map(|(p, _, _)| Ok(prefix(p, n)?.values())).collect::<Result<_>>()?;
                    let counts = self.count_errors(scheme, &dets, &samples, false)?;
                    let cell = Cell { scheme, temperature, n, edit: "none", rate: 0.0 };
                    self.push_rows(&mut rows, cell, &dets, &counts, "type2");
                    for &edit in &self.plan.edits.clone() {
                        let samples: Vec<Vec<f64>> = texts
                            .par_iter()
                            .map(|(pivots, key, seeds)| {
                                let tokens: Vec<u32> = pivots.pivots()[..n].iter().map(|p| p.token).collect();
                                let edited = match edit.kind {
                                    EditKind::Delete => {
                                        let t = delete_tokens(&tokens, edit.rate, seeds.edit)?;
                                        extract_pivots(&t, key, scheme, m, v)?
                                    }
                                    EditKind::Substitute => {
                                        let t = substitute_tokens(&tokens, edit.rate, seeds.edit, v)?;
                                        extract_pivots(&t, key, scheme, m, v)?
                                    }
                                    EditKind::InfoRich => inforich_edit(&prefix(pivots, n)?, edit.rate, seeds.edit, scheme)?,
                                };
                                Ok(edited.values())
                            })
                            .collect::<Result<_>>()?;
                        let counts = self.count_errors(scheme, &dets, &samples, false)?;
                        let cell = Cell { scheme, temperature, n, edit: edit.kind.label(), rate: edit.rate };
                        self.push_rows(&mut rows, cell, &dets, &counts, "type2");
                    }
                }
            }
        }
        Ok(rows)
    }

    /// Watermarked texts at the largest length, one per trial.
    fn watermarked(&self, scheme: SchemeSpec, temperature: f64) -> Result<Vec<(PivotSeq, SecretKey, TrialSeeds)>> {
        let max_n = self.max_len();
        (0..self.config.trials as u64)
            .into_par_iter()
            .map(|i| {
                let s = TrialSeeds::new(self.config.master_seed, i);
                let key = SecretKey::from_u64(s.key);
                let rec = generate_watermarked(&self.trial_model(&s), scheme, &key, max_n, temperature)?;
                Ok((rec.pivots, key, s))
            })
            .collect()
    }

    /// Writes `cdf.csv`, `repetition.csv` and `top_prob.csv` under `out_dir`.
    ///
    /// Runs are watermarked texts at the largest configured length; the CDF
    /// dump uses the first run of each (scheme, T).
    pub fn report_diagnostics(&self) -> Result<DiagnosticFiles> {
        let runs = self.config.diagnostic_runs;
        if runs == 0 {
            return invalid("diagnostic_runs must be at least 1");
        }
        let max_n = self.max_len();
        let windows = &self.config.repetition_windows;
        let mut cdf = String::from("scheme,T,i,value,uniform\n");
        let mut rep = String::from("scheme,T,m,rate\n");
        let mut hist = String::from("scheme,T,bin_lo,bin_hi,fraction\n");
        for &scheme in &self.plan.schemes {
            let law = NullLaw::new(scheme);
            for &temperature in &self.config.temperatures {
                let recs: Vec<_> = (0..runs as u64)
                    .into_par_iter()
                    .map(|i| {
                        let s = TrialSeeds::new(self.config.master_seed, i);
                        let key = SecretKey::from_u64(s.key);
                        generate_watermarked(&self.trial_model(&s), scheme, &key, max_n, temperature)
                    })
                    .collect::<Result<_>>()?;
                let mut f: Vec<f64> = recs[0].pivots.pivots().iter().map(|p| law.cdf(p.y)).collect();
                f.sort_by(f64::total_cmp);
                for (i, x) in f.iter().enumerate() {
                    let _ = writeln!(cdf, "{scheme},{temperature},{},{x},{}", i + 1, (i + 1) as f64 / max_n as f64);
                }
                for &m in windows {
                    let mut total = 0.0;
                    for r in &recs {
                        total += repetition_rate(&r.tokens, m)?;
                    }
                    let _ = writeln!(rep, "{scheme},{temperature},{m},{}", total / runs as f64);
                }
                for (b, frac) in top_prob_histogram(recs.iter().flat_map(|r| r.top_probs.iter().copied()))
                    .iter()
                    .enumerate()
                {
                    let _ = writeln!(
                        hist,
                        "{scheme},{temperature},{},{},{frac}",
                        b as f64 / HIST_BINS as f64,
                        (b + 1) as f64 / HIST_BINS as f64
                    );
                }
            }
        }
        let dir = &self.config.out_dir;
        let files = DiagnosticFiles {
            cdf: dir.join("cdf.csv"),
            repetition: dir.join("repetition.csv"),
            top_prob: dir.join("top_prob.csv"),
        };
        write_file(&files.cdf, cdf.as_bytes())?;
        write_file(&files.repetition, rep.as_bytes())?;
        write_file(&files.top_prob, hist.as_bytes())?;
        Ok(files)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    scheme: SchemeSpec,
    temperature: f64,
    n: usize,
    edit: &'static str,
    rate: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagnosticFiles {
    pub cdf: PathBuf,
    pub repetition: PathBuf,
    pub top_prob: PathBuf,
}

pub const HIST_BINS: usize = 50;

/// Fractions of values in 50 equal bins of `[0, 1]`; 1.0 goes to the last bin.
pub fn top_prob_histogram(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut counts = [0usize; HIST_BINS];
    let mut total = 0usize;
    for v in values {
        counts[((v * HIST_BINS as f64) as usize).min(HIST_BINS - 1)] += 1;
        total += 1;
    }
    counts.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect()
}

fn prefix(pivots: &PivotSeq, n: usize) -> Result<PivotSeq> {
    PivotSeq::new(pivots.scheme(), pivots.pivots()[..n].to_vec())
}

/// [`Runner::run_type1`] with the cache at the configured path, saved afterwards.
pub fn run_type1(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    with_runner(config, Runner::run_type1)
}

pub fn run_type2(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    with_runner(config, Runner::run_type2)
}

pub fn run_robustness(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    with_runner(config, Runner::run_robustness)
}

pub fn report_diagnostics(config: &ExperimentConfig) -> Result<DiagnosticFiles> {
    Runner::with_table(config.clone(), CriticalTable::new())?.report_diagnostics()
}

fn with_runner<T>(config: &ExperimentConfig, f: impl FnOnce(&mut Runner) -> Result<T>) -> Result<T> {
    let mut runner = Runner::new(config.clone())?;
    let out = f(&mut runner)?;
    runner.save_table()?;
    Ok(out)
}

/// Writes `rows` to `<out_dir>/results.csv` and returns the path.
pub fn write_results_to(config: &ExperimentConfig, rows: &[ResultRow]) -> Result<PathBuf> {
    let path = config.out_dir.join("results.csv");
    write_results(&path, rows)?;
    Ok(path)
}

/// Values of column `name` from a headed CSV, or of every line of a one-column file without header.
pub fn read_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, first)) = lines.next() else {
        return Err(Error::Parse { line: 1, msg: "empty file".into() });
    };
    let header: Vec<&str> = first.split(',').map(str::trim).collect();
    let (col, data): (usize, Vec<(usize, &str)>) = match header.iter().position(|h| *h == name) {
        Some(c) => (c, lines.collect()),
        None if header.len() == 1 && header[0].parse::<f64>().is_ok() => {
            (0, std::iter::once((0, first)).chain(lines).collect())
        }
        None => return Err(Error::Parse { line: 1, msg: format!("no column named {name:?}") }),
    };
    data.into_iter()
        .map(|(i, l)| {
            l.split(',')
                .nth(col)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("bad {name} value in {l:?}") })
        })
        .collect()
}
