use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beamsched::config::{parse_quantity, Kind};
use beamsched::trace::{summary_text, write_manifest, write_ne_dump, write_trace_csv, ManifestEntry, RunSummary};
use beamsched::{
    default_config_text, load_config, ConfigFile, Error, Protocol, RunTrace, Scenario, SimConfig,
    SweepAxis, SweepValue,
};
use clap::{Args, Parser, Subcommand};

/// Multi-operator mm-Wave beam-scheduling simulator.
#[derive(Debug, Parser)]
#[command(name = "beamsched", version)]
struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one protocol.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write per-block game diagnostics to ne_dump.csv.
        #[arg(long)]
        ne_dump: bool,
    },
    /// One run per value of a scenario parameter, sharing random numbers.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. pi/9,pi/36 or "10 dB,20 dB".
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Print the default scenario file.
    DefaultConfig {
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file; the built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "MMWAVE_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    ConfigMissing(String),
    ConfigMalformed(String),
    Flags(String),
    Runtime(String),
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ConfigMissing(_) => 3,
            CliError::ConfigMalformed(_) => 4,
            CliError::Flags(_) => 5,
            CliError::Runtime(_) => 6,
            CliError::Output(_) => 7,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::ConfigMissing(m)
            | CliError::ConfigMalformed(m)
            | CliError::Flags(m)
            | CliError::Runtime(m)
            | CliError::Output(m) => m,
        }
    }
}

fn output_err(path: &Path, e: io::Error) -> CliError {
    CliError::Output(format!("cannot write {}: {e}", path.display()))
}

struct Loaded {
    scenario: Scenario,
    config: SimConfig,
    source: String,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let (file, source) = match &common.config {
        Some(path) => {
            let file = load_config(path).map_err(|e| match e {
                Error::Io(io) => CliError::ConfigMissing(format!("cannot read config {}: {io}", path.display())),
                other => CliError::ConfigMalformed(other.to_string()),
            })?;
            (file, path.display().to_string())
        }
        None => (ConfigFile::default(), "<default>".to_string()),
    };
    let (scenario, mut config) = file.resolve().map_err(|e| {
        CliError::ConfigMalformed(format!("{source}: {e}"))
    })?;
    if let Some(p) = &common.protocol {
        config.protocol = p.parse::<Protocol>().map_err(|e| CliError::Flags(e.to_string()))?;
    }
    if let Some(n) = common.epochs {
        config.epochs = n;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    Ok(Loaded { scenario, config, source })
}

fn parse_sweep_value(axis: SweepAxis, text: &str) -> Result<SweepValue, CliError> {
    let bad = |e: String| CliError::Flags(format!("bad {} value `{text}`: {e}", axis.name()));
    let t = text.trim();
    Ok(match axis {
        SweepAxis::BeamWidth => SweepValue::BeamWidth(parse_quantity(t, Kind::Angle).map_err(|e| bad(e.to_string()))?),
        SweepAxis::Msr => SweepValue::Msr(parse_quantity(t, Kind::Ratio).map_err(|e| bad(e.to_string()))?),
        SweepAxis::UeCount => SweepValue::UeCount(t.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
        SweepAxis::Feedback => SweepValue::Feedback(t.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
        SweepAxis::Protocol => SweepValue::Protocol(t.parse().map_err(|e: Error| bad(e.to_string()))?),
    })
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| output_err(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| output_err(path, e))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| output_err(dir, e))
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn cmd_run(common: &Common, ne_dump: bool, verbose: u8) -> Result<(), CliError> {
    let Loaded { scenario, mut config, source } = load(common)?;
    if ne_dump && config.protocol != Protocol::Game {
        return Err(CliError::Flags(format!(
            "--ne-dump only applies to the game protocol, not {}",
            config.protocol
        )));
    }
    config.record_blocks = ne_dump;
    prepare_out(&common.out)?;
    if verbose > 0 {
        eprintln!("running {} for {} epochs (seed {})", config.protocol, config.epochs, config.seed);
    }
    let trace = beamsched::run(&scenario, &config).map_err(|e| CliError::Runtime(e.to_string()))?;
    let out = &common.out;
    write_file(&out.join("trace.csv"), |w| write_trace_csv(w, &trace))?;
    if ne_dump {
        write_file(&out.join("ne_dump.csv"), |w| write_ne_dump(w, &trace))?;
    }
    let entry = ManifestEntry {
        file: "trace.csv".into(),
        label: config.protocol.to_string(),
        protocol: config.protocol.to_string(),
        seed: config.seed,
        epochs: config.epochs,
        config: source,
    };
    write_file(&out.join("manifest.csv"), |w| write_manifest(w, &[entry]))?;
    let summary = summary_text(&[RunSummary::new(config.protocol.to_string(), &trace, scenario.p_avg)]);
    write_file(&out.join("summary.txt"), |w| w.write_all(summary.as_bytes()))?;
    print!("{summary}");
    Ok(())
}

fn cmd_sweep(common: &Common, axis: &str, values: &[String], verbose: u8) -> Result<(), CliError> {
    let axis: SweepAxis = axis.parse().map_err(|e: Error| CliError::Flags(e.to_string()))?;
    if axis == SweepAxis::Protocol && common.protocol.is_some() {
        return Err(CliError::Flags("--protocol cannot be combined with --axis protocol".into()));
    }
    let labels: Vec<String> = values.iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if labels.is_empty() {
        return Err(CliError::Flags("--values is empty".into()));
    }
    let points = labels
        .iter()
        .map(|v| parse_sweep_value(axis, v))
        .collect::<Result<Vec<_>, _>>()?;
    let Loaded { scenario, config, source } = load(common)?;
    prepare_out(&common.out)?;
    if verbose > 0 {
        eprintln!("sweeping {} over {} values, {} epochs each", axis.name(), points.len(), config.epochs);
    }
    let traces: Vec<RunTrace> =
        beamsched::sweep(&scenario, &config, &points).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut manifest = Vec::new();
    let mut summaries = Vec::new();
    for (i, (label, trace)) in labels.iter().zip(&traces).enumerate() {
        let name = format!("trace_{i:02}_{}.csv", file_label(label));
        write_file(&common.out.join(&name), |w| write_trace_csv(w, trace))?;
        manifest.push(ManifestEntry {
            file: name,
            label: format!("{}={label}", axis.name()),
            protocol: trace.protocol.to_string(),
            seed: trace.seed,
            epochs: trace.epochs.len(),
            config: source.clone(),
        });
        summaries.push(RunSummary::new(format!("{}={label}", axis.name()), trace, scenario.p_avg));
    }
    write_file(&common.out.join("manifest.csv"), |w| write_manifest(w, &manifest))?;
    let summary = summary_text(&summaries);
    write_file(&common.out.join("summary.txt"), |w| w.write_all(summary.as_bytes()))?;
    print!("{summary}");
    Ok(())
}

fn cmd_default_config(out: Option<&Path>) -> Result<(), CliError> {
    let text = default_config_text();
    match out {
        Some(path) => fs::write(path, text).map_err(|e| output_err(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(format!("cannot write to stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, ne_dump } => cmd_run(common, *ne_dump, cli.verbose),
        Command::Sweep { common, axis, values } => cmd_sweep(common, axis, values, cli.verbose),
        Command::DefaultConfig { out } => cmd_default_config(out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
