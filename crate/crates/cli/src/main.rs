//! `fse`: damage, conceal and benchmark 8-bit grayscale PGM images.
//!
//! Exit codes: 0 success, 1 usage error, 2 processing error.

mod report;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fse::conceal::{DEFAULT_BLOCK, DEFAULT_BORDER, DEFAULT_FFT_SIZE};
use fse::{
    conceal, generate_pattern, pgm, sweep, write_csv, ConcealConfig, Denominator, EngineConfig,
    LossPattern, SampleGrid, WeightConfig,
};

use report::{ConfigEcho, JobEntry, Outputs, RunReport, Timing};

#[derive(Parser)]
#[command(
    name = "fse",
    version,
    about = "Block-loss concealment by frequency selective extrapolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Set the lost pixels of an image to the fill value.
    Damage(DamageArgs),
    /// Conceal lost blocks.
    Conceal(ConcealArgs),
    /// PSNR over iterations, with and without compensation, as CSV.
    Sweep(SweepArgs),
}

/// A mask PGM (0 = lost, 255 = received) or `gen:BLOCK,SPACING`.
#[derive(Clone, Debug)]
enum PatternArg {
    Generated { block: usize, spacing: usize },
    File(PathBuf),
}

impl FromStr for PatternArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let Some(spec) = s.strip_prefix("gen:") else {
            return Ok(PatternArg::File(PathBuf::from(s)));
        };
        let (block, spacing) = spec
            .split_once(',')
            .ok_or_else(|| format!("expected gen:BLOCK,SPACING, got {s:?}"))?;
        let positive = |v: &str| match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("expected a positive integer, got {v:?}")),
        };
        Ok(PatternArg::Generated {
            block: positive(block)?,
            spacing: positive(spacing)?,
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DenominatorArg {
    Modulus,
    Complex,
}

impl From<DenominatorArg> for Denominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Modulus => Denominator::Modulus,
            DenominatorArg::Complex => Denominator::Complex,
        }
    }
}

fn parse_rho(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    WeightConfig::new(v)
        .map(|w| w.rho_hat())
        .map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

#[derive(Clone, Debug)]
struct Checkpoints(Vec<usize>);

/// `a,b,c` or `start:step:end` (inclusive); must be strictly ascending.
fn parse_checkpoints(s: &str) -> Result<Checkpoints, String> {
    let number = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid checkpoint {v:?}"))
    };
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, step, end] = parts[..] else {
            return Err(format!("expected START:STEP:END, got {s:?}"));
        };
        let (start, step, end) = (number(start)?, number(step)?, number(end)?);
        if step == 0 {
            return Err("checkpoint step must be positive".into());
        }
        (start..=end).step_by(step).collect()
    } else {
        s.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err("no checkpoints".into());
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err("checkpoints must be strictly ascending".into());
    }
    Ok(Checkpoints(values))
}

#[derive(Args)]
struct PatternOpts {
    /// Mask PGM (0 = lost, 255 = received) or gen:BLOCK,SPACING.
    #[arg(long)]
    pattern: PatternArg,
    /// Block size used to split mask files into jobs.
    #[arg(long, default_value_t = DEFAULT_BLOCK, value_parser = parse_positive)]
    block: usize,
    /// Support frame width around each block; also the edge clearance of
    /// generated patterns.
    #[arg(long, default_value_t = DEFAULT_BORDER)]
    border: usize,
}

#[derive(Args)]
struct EngineOpts {
    /// Weighting decay per pixel of distance.
    #[arg(long, default_value_t = WeightConfig::DEFAULT_RHO_HAT, value_parser = parse_rho)]
    rho: f64,
    /// Edge length of the extrapolation area.
    #[arg(long, default_value_t = DEFAULT_FFT_SIZE, value_parser = parse_positive)]
    fft: usize,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    fast: Switch,
    #[arg(long, value_enum, default_value_t = DenominatorArg::Modulus)]
    denominator: DenominatorArg,
    /// Run jobs on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct DamageArgs {
    image: PathBuf,
    #[command(flatten)]
    pattern: PatternOpts,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the pattern as a mask PGM.
    #[arg(long)]
    mask_out: Option<PathBuf>,
}

#[derive(Args)]
struct ConcealArgs {
    image: PathBuf,
    #[command(flatten)]
    pattern: PatternOpts,
    #[command(flatten)]
    engine: EngineOpts,
    #[arg(long, default_value_t = 250)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    odc: Switch,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    image: PathBuf,
    #[command(flatten)]
    pattern: PatternOpts,
    #[command(flatten)]
    engine: EngineOpts,
    /// Iteration counts, as a list `5,10,20` or a range `5:5:500`.
    #[arg(long, default_value = "5:5:500", value_parser = parse_checkpoints)]
    checkpoints: Checkpoints,
    #[arg(long)]
    csv: PathBuf,
    /// Value of the `image` column; defaults to the file stem.
    #[arg(long)]
    label: Option<String>,
}

fn read_image(path: &Path) -> Result<SampleGrid> {
    pgm::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load_pattern(opts: &PatternOpts, image: &SampleGrid) -> Result<LossPattern> {
    let pattern = match &opts.pattern {
        PatternArg::Generated { block, spacing } => {
            generate_pattern(image.dims(), *block, *spacing, opts.border)
                .context("generating pattern")?
        }
        PatternArg::File(path) => LossPattern::from_mask_grid(&read_image(path)?, opts.block)
            .with_context(|| format!("loading mask {}", path.display()))?,
    };
    if pattern.dims() != image.dims() {
        anyhow::bail!(
            "pattern is {} but image is {}",
            pattern.dims(),
            image.dims()
        );
    }
    Ok(pattern)
}

fn conceal_config(
    engine: &EngineOpts,
    border: usize,
    iterations: usize,
    odc: bool,
) -> ConcealConfig {
    ConcealConfig {
        weights: WeightConfig::new(engine.rho).expect("validated by the parser"),
        engine: EngineConfig {
            max_iterations: iterations,
            odc_enabled: odc,
            fast_path: engine.fast.is_on(),
            denominator: engine.denominator.into(),
            ..EngineConfig::default()
        },
        border,
        fft_size: engine.fft,
        parallel: !engine.serial,
    }
}

fn write_image(grid: &SampleGrid, path: &Path) -> Result<()> {
    pgm::write(grid, path).with_context(|| format!("writing {}", path.display()))
}

fn run_damage(args: &DamageArgs) -> Result<()> {
    let image = read_image(&args.image)?;
    let pattern = load_pattern(&args.pattern, &image)?;
    write_image(&pattern.damage(&image)?, &args.output)?;
    if let Some(mask) = &args.mask_out {
        write_image(&pattern.to_mask_grid(), mask)?;
    }
    Ok(())
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_conceal(args: &ConcealArgs) -> Result<()> {
    let mut timing = Timing::default();
    let start = Instant::now();
    let image = read_image(&args.image)?;
    let pattern = load_pattern(&args.pattern, &image)?;
    timing.read = millis(start);

    let cfg = conceal_config(
        &args.engine,
        args.pattern.border,
        args.iters,
        args.odc.is_on(),
    );
    let start = Instant::now();
    let outcome = conceal(&image, &pattern, &cfg)?;
    timing.conceal = millis(start);

    let start = Instant::now();
    write_image(&outcome.image, &args.output)?;
    timing.write = millis(start);

    if let Some(path) = &args.report {
        let report = RunReport {
            config: ConfigEcho {
                rho: cfg.weights.rho_hat(),
                border: cfg.border,
                fft: cfg.fft_size,
                iterations: args.iters,
                odc: cfg.engine.odc_enabled,
                fast: cfg.engine.fast_path,
                denominator: match cfg.engine.denominator {
                    Denominator::Modulus => "modulus",
                    Denominator::Complex => "complex",
                },
                parallel: cfg.parallel,
            },
            jobs: outcome.jobs.iter().map(JobEntry::from).collect(),
            timing_ms: timing,
            outputs: Outputs {
                image: args.output.display().to_string(),
                report: Some(path.display().to_string()),
            },
        };
        let json = serde_json::to_string_pretty(&report)? + "\n";
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let image = read_image(&args.image)?;
    let pattern = load_pattern(&args.pattern, &image)?;
    let label = args.label.clone().unwrap_or_else(|| {
        args.image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let last = *args
        .checkpoints
        .0
        .last()
        .expect("parser rejects empty lists");
    let cfg = conceal_config(&args.engine, args.pattern.border, last, true);
    let records = sweep(&label, &image, &pattern, &cfg, &args.checkpoints.0)?;
    let file =
        fs::File::create(&args.csv).with_context(|| format!("creating {}", args.csv.display()))?;
    write_csv(&records, BufWriter::new(file))
        .with_context(|| format!("writing {}", args.csv.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Damage(args) => run_damage(args),
        Command::Conceal(args) => run_conceal(args),
        Command::Sweep(args) => run_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
