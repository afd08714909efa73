use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use axiflow::config::SimConfig;
use axiflow::diagnostics::{
    append_csv_row, decay_fit, parse_csv, DecaySample, DiagnosticsRecord, CSV_HEADER,
};
use axiflow::momentum::{read_checkpoint, run, run_resumed, RunCallbacks, RunOutput};
use axiflow::verify::{all_pass, format_table, run_suite, Suite};
use axiflow::Error;
use clap::{Parser, Subcommand};
use serde_json::json;

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "axiflow", version, about = "Axisymmetric variable-density Navier-Stokes solver")]
struct Cli {
    /// Worker threads for data-parallel loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Serial mode: one thread, bit-reproducible output.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write diagnostics, checkpoints and a run manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out.dir`; default `axiflow-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Checkpoint directory to continue from.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a verification suite and print one row per claim.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(Suite::NAMES))]
        suite: String,
    },
    /// Fit decay exponents to a diagnostics CSV.
    DecayFit {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        p: f64,
        /// Fit window `a,b` in t (default: the whole series after t = 0).
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(a < b) {
        return Err("window needs a < b".into());
    }
    Ok((a, b))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Parse { .. } | Error::Invalid(_) | Error::InvalidGrid(_) => {
            EXIT_CONFIG
        }
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Streams every record to the CSV as soon as it exists, so an aborted run
/// leaves the rows computed so far on disk.
struct CsvSink {
    out: BufWriter<File>,
}

impl RunCallbacks for CsvSink {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> axiflow::Result<()> {
        let mut line = String::new();
        append_csv_row(&mut line, record);
        self.out.write_all(line.as_bytes())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Opens `diagnostics.csv`. A resumed run keeps the rows up to the checkpoint
/// time and appends after them.
fn open_csv(path: &Path, resume_t: Option<f64>) -> axiflow::Result<CsvSink> {
    let mut kept = format!("{CSV_HEADER}\n");
    if let (Some(t0), Ok(text)) = (resume_t, fs::read_to_string(path)) {
        for line in text.lines().skip(1) {
            let t: Option<f64> = line.split(',').next().and_then(|v| v.parse().ok());
            if t.is_some_and(|t| t <= t0) {
                kept.push_str(line);
                kept.push('\n');
            }
        }
    }
    fs::write(path, kept)?;
    let file = OpenOptions::new().append(true).open(path)?;
    Ok(CsvSink {
        out: BufWriter::new(file),
    })
}

fn simulate(
    config_path: &Path,
    out: Option<PathBuf>,
    resume: Option<PathBuf>,
    threads: usize,
) -> axiflow::Result<()> {
    let clock = Instant::now();
    let mut config = SimConfig::from_file(config_path)?;
    let dir = out
        .or_else(|| config.out.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("axiflow-out"));
    config.out.dir = Some(dir.to_string_lossy().into_owned());
    fs::create_dir_all(&dir)?;
    let checkpoint = resume.as_deref().map(read_checkpoint).transpose()?;
    let mut sink = open_csv(&dir.join("diagnostics.csv"), checkpoint.as_ref().map(|c| c.state.t))?;
    let result = match checkpoint {
        Some(c) => run_resumed(&config, c, &mut sink),
        None => run(&config, &mut sink),
    };
    let status = match &result {
        Ok(_) => "completed".to_string(),
        Err(e) => format!("failed: {e}"),
    };
    let summary = result.as_ref().ok().map(|o: &RunOutput| {
        json!({
            "steps": o.steps,
            "t_final": o.state.t,
            "initial_energy": o.initial_energy,
            "max_div": o.max_div,
            "max_courant": o.max_courant,
            "dissipation_integral": o.accumulators.dissipation,
        })
    });
    let manifest = json!({
        "program": "axiflow",
        "version": env!("CARGO_PKG_VERSION"),
        "config_file": config_path.to_string_lossy(),
        "config": config.to_text(),
        "resume_hash": config.resume_hash(),
        "resumed_from": resume.map(|p| p.to_string_lossy().into_owned()),
        "threads": threads,
        "status": status,
        "run": summary,
        "wall_time_s": clock.elapsed().as_secs_f64(),
    });
    fs::write(dir.join("run_manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    let o = result?;
    println!(
        "completed {} steps to t = {:.6}; output in {}",
        o.steps,
        o.state.t,
        dir.display()
    );
    Ok(())
}

fn verify(name: &str) -> axiflow::Result<bool> {
    let suite = Suite::parse(name).expect("validated by clap");
    let claims = run_suite(suite)?;
    print!("{}", format_table(&claims));
    let ok = all_pass(&claims);
    println!("suite {name}: {}", if ok { "pass" } else { "FAIL" });
    Ok(ok)
}

fn decay_fit_cmd(series: &Path, p: f64, window: Option<(f64, f64)>) -> axiflow::Result<()> {
    let text = fs::read_to_string(series)?;
    let records = parse_csv(&text)?;
    let samples: Vec<DecaySample> = records.iter().map(DecaySample::from_csv_row).collect();
    let window = window.unwrap_or_else(|| {
        let t_last = samples.last().map_or(0.0, |s| s.t);
        (f64::MIN_POSITIVE, t_last)
    });
    let fit = decay_fit(&samples, window, p)?;
    println!("p = {p}, window t in [{}, {}], {} points", fit.window.0, fit.window.1, fit.points);
    println!("|u|^2       fitted {:.3}  reference {:.3}", fit.slope_u, fit.reference_u);
    println!("|grad u|^2  fitted {:.3}  reference {:.3}", fit.slope_grad, fit.reference_grad);
    if let Some(h) = fit.slope_higher {
        println!("higher      fitted {h:.3}  reference {:.3}", fit.reference_higher);
    }
    if fit.reference_u == 0.0 {
        println!("note: reference exponent 0, no decay asserted for p = 2");
    }
    if let Some(w) = &fit.warning {
        println!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let threads = if cli.strict {
        1
    } else {
        cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Simulate { config, out, resume } => {
            if !config.is_file() {
                eprintln!("error: config file {} not found", config.display());
                return ExitCode::from(EXIT_USAGE);
            }
            simulate(&config, out, resume, threads).map(|_| true)
        }
        Command::Verify { suite } => verify(&suite),
        Command::DecayFit { series, p, window } => decay_fit_cmd(&series, p, window).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NUMERICAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
