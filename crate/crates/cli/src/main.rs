use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iai_core::harness::{
    line_chart_svg, run_to_dir, sweep_to_dir, verify_blanket, write_file, ExperimentConfig,
    Series, METRICS_FILE, METRICS_HEADER,
};
use iai_core::Error;
use log::{error, info};

const BLANKET_REPORT_FILE: &str = "blanket_report.json";
const PLOTS_FILE: &str = "plots.svg";
const PLOTTED: [&str; 4] = ["drive", "energy", "hydration", "core_temp"];

#[derive(Parser)]
#[command(name = "iai", version, about = "Homeostatic agents in a factored gridworld")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every seed in the config and write the metrics table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check the blanket on the factored world and the coupled control.
    VerifyBlanket {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarise an output directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plots: bool,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
    Blanket,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Blanket => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::SchemaMismatch(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IAI_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(msg) | Failure::Runtime(msg) => error!("{msg}"),
                Failure::Blanket => error!("blanket verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string()))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, seed, out } => {
            let cfg = load(&config)?;
            let log = run_to_dir(&cfg, seed, &out)?;
            println!(
                "seed {seed}: {} steps, {:?}, written to {}",
                log.records.len(),
                log.status,
                out.display()
            );
        }
        Command::Sweep { config, out, jobs } => {
            if jobs == 0 {
                return Err(Failure::Config("--jobs must be at least 1".into()));
            }
            let cfg = load(&config)?;
            let table = sweep_to_dir(&cfg, jobs, &out)?;
            println!("{} seeds, metrics in {}", table.rows.len(), out.join(METRICS_FILE).display());
        }
        Command::VerifyBlanket { config, out } => {
            let cfg = load(&config)?;
            let report = verify_blanket(&cfg)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            write_file(out.join(BLANKET_REPORT_FILE), &json)?;
            for v in [&report.factored, &report.coupled] {
                println!(
                    "{:?}: cmi {:.5} nats, verdict {:?}, max |di'/de| {:.3e}",
                    v.variant, v.cmi.cmi_nats, v.cmi.verdict, v.max_internal_from_external
                );
            }
            println!(
                "thresholds [{:.5}, {:.5}], ratio {:.2}",
                report.thresholds.tol_lo, report.thresholds.tol_hi, report.cmi_ratio
            );
            if !report.passed() {
                return Err(Failure::Blanket);
            }
        }
        Command::Report { input, plots } => report(&input, plots)?,
    }
    Ok(())
}

fn csv_files(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with(prefix) && name.ends_with(".csv")
        })
        .collect();
    files.sort();
    Ok(files)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn report(dir: &Path, plots: bool) -> Result<(), Failure> {
    let metrics = csv_files(dir, "metrics")?;
    if metrics.is_empty() {
        return Err(Failure::Config(format!("no metrics CSV in {}", dir.display())));
    }
    for path in &metrics {
        let text = read(path)?;
        let mut lines = text.lines();
        if lines.next() != Some(METRICS_HEADER) {
            return Err(Failure::Config(format!("{}: unexpected header", path.display())));
        }
        println!("{}", path.display());
        let names: Vec<&str> = METRICS_HEADER.split(',').collect();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            let fields: Vec<String> = names
                .iter()
                .zip(&cells)
                .skip(1)
                .map(|(n, v)| format!("{n}={}", v.parse::<f64>().map_or(v.to_string(), |x| format!("{x:.4}"))))
                .collect();
            println!("  {:>6}  {}", cells[0], fields.join(" "));
        }
    }
    if plots {
        let logs = csv_files(dir, "log_")?;
        let mut panels: Vec<(&str, Vec<Series<'_>>)> = PLOTTED.iter().map(|&n| (n, Vec::new())).collect();
        let mut labels = Vec::new();
        let mut columns = Vec::new();
        for path in &logs {
            let text = read(path)?;
            let mut lines = text.lines();
            let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
            let idx: Vec<usize> = PLOTTED
                .iter()
                .map(|n| {
                    header.iter().position(|h| h == n).ok_or_else(|| {
                        Failure::Config(format!("{}: missing column {n}", path.display()))
                    })
                })
                .collect::<Result<_, _>>()?;
            let mut cols = vec![Vec::new(); PLOTTED.len()];
            for line in lines {
                let cells: Vec<&str> = line.split(',').collect();
                for (c, &i) in cols.iter_mut().zip(&idx) {
                    c.push(cells.get(i).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN));
                }
            }
            labels.push(path.file_stem().unwrap_or_default().to_string_lossy().into_owned());
            columns.push(cols);
        }
        for (label, cols) in labels.iter().zip(columns) {
            for (panel, values) in panels.iter_mut().zip(cols) {
                panel.1.push(Series { label, values });
            }
        }
        let svg = line_chart_svg(&dir.display().to_string(), &panels);
        write_file(dir.join(PLOTS_FILE), &svg)?;
        info!("{} logs plotted", logs.len());
        println!("plots written to {}", dir.join(PLOTS_FILE).display());
    }
    Ok(())
}
