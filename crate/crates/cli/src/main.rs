use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use effitest_core::report::config::{parse_formats, parse_lambda, AnalysisConfig, InputSpec, DEFAULT_SEED};
use effitest_core::report::fixture::write_fixture;
use effitest_core::report::run_and_write;
use effitest_core::sim::{adf_tau_below, validation_battery};
use effitest_core::{Error, PeriodScheme, Result};

#[derive(Parser)]
#[command(name = "effitest", version, about = "Weak-form market efficiency test battery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full battery and write tables and plots.
    Analyze(Box<AnalyzeArgs>),
    /// Run the Monte-Carlo size and power checks.
    ValidateMc {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Regenerate the seeded synthetic two-market dataset.
    Fixture {
        /// Target directory (default `fixtures`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Config file (same as --config).
    config_path: Option<PathBuf>,
    #[arg(long, conflicts_with = "config_path")]
    config: Option<PathBuf>,
    /// Price CSV; give twice for a two-market run. Replaces config inputs.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Index name per --input, in order.
    #[arg(long)]
    index_name: Vec<String>,
    #[arg(long)]
    date_col: Option<String>,
    #[arg(long)]
    price_col: Option<String>,
    /// `default` or `label=YYYY-MM-DD..YYYY-MM-DD,...`
    #[arg(long)]
    scheme: Option<String>,
    /// appendix | paper_table
    #[arg(long)]
    acf_mode: Option<String>,
    /// none | drift | drift_trend
    #[arg(long)]
    adf_model: Option<String>,
    /// returns | log_prices
    #[arg(long)]
    adf_target: Option<String>,
    /// Number or daily | monthly | quarterly | annual
    #[arg(long)]
    hp_lambda: Option<String>,
    /// Comma-separated subset of markdown,csv,json
    #[arg(long)]
    formats: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    plots: Option<String>,
    /// Output directory; falls back to the config, then EFFITEST_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(args: AnalyzeArgs) -> Result<AnalysisConfig> {
    let mut defaults = AnalysisConfig::default();
    if let Some(dir) = std::env::var_os("EFFITEST_OUT") {
        defaults.output_dir = PathBuf::from(dir);
    }
    let mut cfg = match args.config.or(args.config_path) {
        Some(path) => AnalysisConfig::from_file_onto(defaults, &path)?,
        None => defaults,
    };
    if !args.input.is_empty() {
        cfg.inputs = args.input.iter().map(InputSpec::new).collect();
    }
    if args.index_name.len() > cfg.inputs.len() {
        return Err(Error::Config(format!(
            "{} --index-name values for {} inputs",
            args.index_name.len(),
            cfg.inputs.len()
        )));
    }
    for (input, name) in cfg.inputs.iter_mut().zip(&args.index_name) {
        input.index_name = name.clone();
    }
    for input in &mut cfg.inputs {
        if let Some(c) = &args.date_col {
            input.schema.date_column = c.clone();
        }
        if let Some(c) = &args.price_col {
            input.schema.price_column = c.clone();
            input.schema.price_fallback = None;
        }
    }
    if let Some(s) = args.scheme {
        cfg.scheme = PeriodScheme::parse(&s)?;
    }
    if let Some(s) = args.acf_mode {
        cfg.acf_mode = s.parse()?;
    }
    if let Some(s) = args.adf_model {
        cfg.adf_model = s.parse()?;
    }
    if let Some(s) = args.adf_target {
        cfg.adf_target = s.parse()?;
    }
    if let Some(s) = args.hp_lambda {
        cfg.hp_lambda = parse_lambda(&s)?;
    }
    if let Some(s) = args.formats {
        cfg.formats = parse_formats(&s)?;
    }
    if let Some(s) = args.plots {
        cfg.set("plots", &s)?;
    }
    if let Some(dir) = args.out {
        cfg.output_dir = dir;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let cfg = build_config(args)?;
    let (analysis, files) = run_and_write(&cfg)?;
    for w in &analysis.report.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} files to {}", files.len(), cfg.output_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn validate_mc(seed: u64) -> Result<ExitCode> {
    let started = Instant::now();
    let mut all_pass = true;
    for c in validation_battery(seed)? {
        let ok = c.passed();
        all_pass &= ok;
        println!(
            "[{}] {}: rate {:.4} (+/- {:.4}) over {} trials, band [{:.2}, {:.2}]",
            if ok { "PASS" } else { "FAIL" },
            c.label,
            c.result.rejection_rate,
            c.result.ci_halfwidth,
            c.result.trials,
            c.lower,
            c.upper
        );
    }
    let frac = adf_tau_below(5000, 200, -10.0, seed)?;
    let ok = frac >= 0.99;
    all_pass &= ok;
    println!(
        "[{}] ADF tau < -10 on i.i.d. returns, n=5000: {:.4} of 200 trials (need >= 0.99)",
        if ok { "PASS" } else { "FAIL" },
        frac
    );
    println!("elapsed {:.1} s", started.elapsed().as_secs_f64());
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn fixture(out: Option<PathBuf>, seed: u64) -> Result<ExitCode> {
    let dir = out.unwrap_or_else(|| PathBuf::from("fixtures"));
    let files = write_fixture(&dir, seed)?;
    for f in files {
        println!("{}", dir.join(f).display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(*args),
        Command::ValidateMc { seed } => validate_mc(seed),
        Command::Fixture { out, seed } => fixture(out, seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
