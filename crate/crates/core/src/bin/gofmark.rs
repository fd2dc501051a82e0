use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gofmark::calibrate::CriticalTable;
use gofmark::detect::{detect, Detector};
use gofmark::harness::{read_column, write_results, ExperimentConfig, ResultRow, Runner, TrialSeeds};
use gofmark::prng::SecretKey;
use gofmark::schemes::{PivotSeq, SchemeSpec};
use gofmark::textsim::{extract_pivots, generate_watermarked, SimModel};
use gofmark::Error;

#[derive(Parser)]
#[command(name = "gofmark", about = "Goodness-of-fit watermark detection on a synthetic language model")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// JSON experiment config; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fill the critical-value cache for every scheme, detector and length.
    Calibrate,
    /// Type I sweep on unwatermarked text.
    Type1,
    /// Type II sweep on watermarked text.
    Type2,
    /// Type II under the configured edits.
    Robustness,
    /// CDF dump, repetition table and top-probability histogram.
    Diagnostics,
    /// One watermarked text as `t,token,pivot,pvalue,top_prob`.
    Generate {
        #[arg(long, default_value = "gumbel")]
        scheme: String,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        /// Hex key; defaults to the key of trial 0.
        #[arg(long)]
        key: Option<String>,
    },
    /// Test one text against a calibrated critical value.
    Detect {
        /// CSV with a `pivot` column.
        #[arg(long, conflicts_with = "tokens")]
        pivots: Option<PathBuf>,
        /// CSV with a `token` column; needs `--key`.
        #[arg(long, requires = "key")]
        tokens: Option<PathBuf>,
        #[arg(long)]
        key: Option<String>,
        #[arg(long, default_value = "gumbel")]
        scheme: String,
        /// Context window; defaults to the model's.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value = "Phi")]
        test: String,
        /// Overrides the config's alpha.
        #[arg(long)]
        alpha: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 3,
                _ => 2,
            })
        }
    }
}

fn run(cli: Cli) -> gofmark::Result<()> {
    let mut config = match &cli.shared.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.shared.seed {
        config.master_seed = seed;
    }
    if let Some(out) = cli.shared.out {
        config.out_dir = out;
    }
    if let Some(n) = cli.shared.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Calibrate => {
            let mut runner = runner(config)?;
            let fresh = runner.calibrate_all()?;
            runner.save_table()?;
            println!("{fresh} new critical value(s); cache {}", runner.config().cache_path().display());
        }
        Command::Type1 => sweep(config, Runner::run_type1)?,
        Command::Type2 => sweep(config, Runner::run_type2)?,
        Command::Robustness => sweep(config, Runner::run_robustness)?,
        Command::Diagnostics => {
            let files = Runner::with_table(config, CriticalTable::new())?.report_diagnostics()?;
            for f in [files.cdf, files.repetition, files.top_prob] {
                println!("{}", f.display());
            }
        }
        Command::Generate { scheme, n, temperature, key } => {
            let scheme: SchemeSpec = scheme.parse()?;
            // Same document and key as trial 0 of a sweep.
            let seeds = TrialSeeds::new(config.master_seed, 0);
            let model = SimModel::new(config.model)?.reseeded(seeds.model);
            let key = match key {
                Some(hex) => SecretKey::from_hex(&hex)?,
                None => SecretKey::from_u64(seeds.key),
            };
            let rec = generate_watermarked(&model, scheme, &key, n, temperature)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let path = config.out_dir.join("generated.csv");
            rec.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            println!("{}", path.display());
            println!("key {}", key.to_hex());
        }
        Command::Detect { pivots, tokens, key, scheme, m, test, alpha } => {
            let scheme: SchemeSpec = scheme.parse()?;
            let detector: Detector = test.parse()?;
            if let Some(a) = alpha {
                config.alpha = a;
            }
            let seq = match (pivots, tokens) {
                (Some(path), None) => PivotSeq::from_values(scheme, &read_column(&path, "pivot")?)?,
                (None, Some(path)) => {
                    let key = SecretKey::from_hex(key.as_deref().unwrap_or_default())?;
                    let ids = read_column(&path, "token")?
                        .into_iter()
                        .map(token_id)
                        .collect::<gofmark::Result<Vec<u32>>>()?;
                    let m = m.unwrap_or(config.model.window);
                    extract_pivots(&ids, &key, scheme, m, config.model.vocab_size)?
                }
                _ => return Err(Error::Config("detect needs --pivots or --tokens".into())),
            };
            let mut table = CriticalTable::load(&config.cache_path())?;
            let (records, _) =
                table.ensure(scheme, &[detector], seq.len(), config.alpha, config.calibration_b, config.calibration_seed)?;
            table.save(&config.cache_path())?;
            let v = detect(&seq, detector, &records[0])?;
            println!("detector,n,alpha,statistic,gamma,reject");
            println!("{},{},{},{},{},{}", v.detector, v.n, v.alpha, v.statistic, v.gamma, v.reject);
        }
    }
    Ok(())
}

fn runner(config: ExperimentConfig) -> gofmark::Result<Runner> {
    let mut r = Runner::new(config)?;
    r.verbose = true;
    Ok(r)
}

fn sweep(
    config: ExperimentConfig,
    f: impl FnOnce(&mut Runner) -> gofmark::Result<Vec<ResultRow>>,
) -> gofmark::Result<()> {
    let mut runner = runner(config)?;
    let rows = f(&mut runner)?;
    runner.save_table()?;
    let path = runner.config().out_dir.join("results.csv");
    write_results(&path, &rows)?;
    println!("{} rows -> {}", rows.len(), path.display());
    Ok(())
}

fn token_id(v: f64) -> gofmark::Result<u32> {
    if v.fract() != 0.0 || !(0.0..u32::MAX as f64).contains(&v) {
        return Err(Error::InvalidArgument(format!("token id {v} is not a valid id")));
    }
    Ok(v as u32)
}
