use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chansim::antenna::{
    read_plane_cut_csv, reconstruct_from_cuts, synthesize_3gpp, write_ant3d, AntennaError, CutPlane, ThreeGppParams,
    ANT3D_FORMAT_VERSION, DEFAULT_GRID_STEP_DEG,
};
use chansim::batch::{run_batch, BatchError, ARTIFACT_VERSION, MANIFEST_FILE, MANIFEST_FORMAT_VERSION};
use chansim::config::{parse_config, ConfigError};
use chansim::stats::{empirical_cdf, ks_two_sample, log10_ds_stats, write_cdf_csv, SampleSet, StatsError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chansim", about = "Directional channel simulation toolkit", disable_version_flag = true)]
struct Cli {
    /// Job configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the configuration file.
    #[arg(long, global = true)]
    seed: Option<u32>,
    /// Output directory or file, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print artifact and file format versions.
    #[arg(short = 'V', long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of realizations and export CSV files plus a manifest.
    Generate {
        /// Override the number of realizations.
        #[arg(long)]
        n: Option<usize>,
        /// Override the worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Log10 delay-spread statistics for one CSV column.
    Stats {
        /// CSV file with a header row.
        input: PathBuf,
        /// Column holding delay spreads in ns.
        #[arg(long, default_value = "omni_rms_ds_ns")]
        column: String,
    },
    /// Antenna pattern tools.
    #[command(subcommand)]
    Antenna(AntennaCommand),
    /// Statistical validation.
    #[command(subcommand)]
    Validate(ValidateCommand),
}

#[derive(Subcommand)]
enum AntennaCommand {
    /// Build a 3D pattern from vertical and horizontal plane cuts.
    ImportCuts {
        #[arg(long)]
        vcut: PathBuf,
        #[arg(long)]
        hcut: PathBuf,
        /// Peak gain in dBi shared by both cuts.
        #[arg(long)]
        peak_gain_dbi: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP_DEG)]
        step_deg: f64,
    },
    /// Synthesize a 3GPP element pattern.
    #[command(name = "synth-3gpp")]
    Synth3gpp(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 65.0)]
    theta_3db_deg: f64,
    #[arg(long, default_value_t = 65.0)]
    phi_3db_deg: f64,
    #[arg(long, default_value_t = 30.0)]
    sla_v_db: f64,
    #[arg(long, default_value_t = 30.0)]
    a_max_db: f64,
    #[arg(long, default_value_t = 8.0)]
    peak_gain_dbi: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP_DEG)]
    step_deg: f64,
    /// Rescale so the pattern integrates to 4π.
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand)]
enum ValidateCommand {
    /// Two-sample Kolmogorov-Smirnov test between two CSV columns.
    Ks {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "omni_rms_ds_ns")]
        column: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

/// Error categories; each maps to its own exit code.
enum CliError {
    Usage(String),
    Config(String),
    Antenna(String),
    Io(String),
    Data(String),
    Generation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Antenna(_) => 4,
            CliError::Io(_) => 5,
            CliError::Data(_) => 6,
            CliError::Generation(_) => 7,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Config(m) => ("config error", m),
            CliError::Antenna(m) => ("antenna error", m),
            CliError::Io(m) => ("io error", m),
            CliError::Data(m) => ("data error", m),
            CliError::Generation(m) => ("generation error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AntennaError> for CliError {
    fn from(e: AntennaError) -> Self {
        match e {
            AntennaError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Antenna(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BatchError> for CliError {
    fn from(e: BatchError) -> Self {
        let msg = e.to_string();
        match e {
            BatchError::Config(_) => CliError::Config(msg),
            BatchError::Antenna { .. } => CliError::Antenna(msg),
            BatchError::Output { .. } => CliError::Io(msg),
            BatchError::Channel(_) | BatchError::Calibration(_) => CliError::Generation(msg),
        }
    }
}

fn version_text() -> String {
    format!(
        "chansim {ARTIFACT_VERSION}\nant3d format {ANT3D_FORMAT_VERSION}\nmanifest format {MANIFEST_FORMAT_VERSION}"
    )
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path, CliError> {
    out.as_deref()
        .ok_or_else(|| CliError::Usage("--out is required for this command".into()))
}

/// Reads one numeric column from a CSV file with a header row.
fn read_column(path: &Path, column: &str) -> Result<SampleSet, CliError> {
    let name = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    let idx = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{name}: {e}")))?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::Data(format!("{name}: no column '{column}'")))?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{name}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record
            .get(idx)
            .ok_or_else(|| CliError::Data(format!("{name}: line {line}: missing column")))?;
        let v: f64 = field
            .parse()
            .map_err(|_| CliError::Data(format!("{name}: line {line}: bad number '{field}'")))?;
        values.push(v);
    }
    Ok(SampleSet::new(column, values)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.version {
        println!("{}", version_text());
        return Ok(());
    }
    let command = cli
        .command
        .ok_or_else(|| CliError::Usage("no command given (try --help)".into()))?;
    match command {
        Command::Generate { n, workers } => {
            let path = cli
                .config
                .ok_or_else(|| CliError::Usage("generate needs --config".into()))?;
            let mut job = parse_config(&path)?;
            if let Some(s) = cli.seed {
                job.config.seed = s;
            }
            if let Some(out) = cli.out {
                job.output_dir = out;
            }
            if let Some(n) = n {
                job.config.n_realizations = n;
            }
            if let Some(w) = workers {
                job.worker_count = w;
            }
            let m = run_batch(&job)?;
            println!(
                "wrote {} files and {} to {}",
                m.files.len(),
                MANIFEST_FILE,
                job.output_dir.display()
            );
            if let Some(s) = m.summary.directional_log10_ds {
                println!("directional log10 DS: mean {:.4}, std {:.4}, n {}", s.mu_log10, s.sigma_log10, s.n);
            }
            if let Some(s) = m.summary.omni_log10_ds {
                println!("omni log10 DS: mean {:.4}, std {:.4}, n {}", s.mu_log10, s.sigma_log10, s.n);
            }
        }
        Command::Stats { input, column } => {
            let samples = read_column(&input, &column)?;
            let s = log10_ds_stats(&samples)?;
            println!("mu_log10 {}", s.mu_log10);
            println!("sigma_log10 {}", s.sigma_log10);
            println!("n {}", s.n);
            println!("excluded {}", s.excluded);
            if let Some(out) = cli.out {
                let positive: Vec<f64> = samples.values().iter().copied().filter(|v| *v > 0.0).collect();
                let cdf = empirical_cdf(&SampleSet::new(column, positive)?)?;
                write_cdf_csv(&cdf, &out)?;
                println!("cdf written to {}", out.display());
            }
        }
        Command::Antenna(AntennaCommand::ImportCuts {
            vcut,
            hcut,
            peak_gain_dbi,
            step_deg,
        }) => {
            let out = require_out(&cli.out)?;
            let v = read_plane_cut_csv(&vcut, CutPlane::Vertical)?;
            let h = read_plane_cut_csv(&hcut, CutPlane::Horizontal)?;
            let p = reconstruct_from_cuts(&v, &h, peak_gain_dbi, step_deg)?;
            write_ant3d(&p, out)?;
            println!("pattern written to {} (peak {} dBi)", out.display(), p.peak_gain_dbi());
        }
        Command::Antenna(AntennaCommand::Synth3gpp(a)) => {
            let out = require_out(&cli.out)?;
            let params = ThreeGppParams {
                theta_3db_deg: a.theta_3db_deg,
                phi_3db_deg: a.phi_3db_deg,
                sla_v_db: a.sla_v_db,
                a_max_db: a.a_max_db,
                element_peak_gain_dbi: a.peak_gain_dbi,
            };
            let mut p = synthesize_3gpp(&params, a.step_deg)?;
            if a.normalize {
                p = p.normalize_to_4pi()?;
            }
            write_ant3d(&p, out)?;
            println!("pattern written to {} (peak {} dBi)", out.display(), p.peak_gain_dbi());
        }
        Command::Validate(ValidateCommand::Ks { a, b, column, alpha }) => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::Usage(format!("--alpha must be in (0, 1), got {alpha}")));
            }
            let r = ks_two_sample(&read_column(&a, &column)?, &read_column(&b, &column)?)?;
            println!("statistic {}", r.statistic);
            println!("p_value {}", r.p_value);
            println!("{}", if r.rejects(alpha) { "reject" } else { "accept" });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chansim: {e}");
            ExitCode::from(e.code())
        }
    }
}
