//! Command line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::gen::{generate, GeneratorParams};
use crate::graphview::{build_n1, build_n2, encode_3sat, to_graph, relative_two_core_size, Formula3Sat};
use crate::gtfs::load_gtfs;
use crate::harness::config::parse_config;
use crate::harness::output::write_results;
use crate::harness::{run_sweep, SweepConfig};
use crate::metrics::{ccdf, metrics_report, METRICS_CSV_HEADER};
use crate::model::{read_hsd, write_hsd, Instance};
use crate::reduce::{format_report, reduce_to_core};
use crate::solve::{solve_pipeline, Budget, SolveError};

#[derive(Debug, Parser)]
#[command(name = "stationcover", version, about = "Station cover / hitting set laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random instance.
    Generate {
        #[arg(long, default_value_t = 2000)]
        stations: usize,
        #[arg(long, default_value_t = 10.0)]
        ratio: f64,
        #[arg(long = "delta-s", default_value_t = 2.0)]
        delta_s: f64,
        /// Power-law exponent of station weights, or `inf` for uniform weights.
        #[arg(long, default_value = "inf")]
        beta: String,
        #[arg(long, default_value_t = 0.5)]
        temperature: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write only the largest component.
        #[arg(long)]
        largest_component: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Apply the dominance rules; print core statistics and write the core.
    Reduce {
        input: PathBuf,
        #[arg(short, long, default_value = "core.hsd")]
        output: PathBuf,
        /// Also write the removal trace here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exact minimum cover after reduction.
    Solve {
        input: PathBuf,
        /// Time budget such as `10s`, `500ms` or `2m`.
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// One table row of instance metrics as CSV.
    Metrics {
        input: PathBuf,
        #[arg(long)]
        largest_component: bool,
        /// Print the station degree CCDF instead.
        #[arg(long)]
        ccdf: bool,
    },
    /// Convert a GTFS directory to the instance format.
    IngestGtfs {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        largest_component: bool,
    },
    /// Run a generator sweep and write CSV (and optionally SVG charts).
    Sweep {
        /// Flat key = value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        thinned: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Instance over the input's station graph whose core has complexity 1.
    ConstructN1 {
        input: PathBuf,
        #[arg(long)]
        designated: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Instance over the input's station graph whose core is its 2-core.
    ConstructN2 {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Encode a DIMACS 3-CNF formula as an instance.
    EncodeSat {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// `10s`, `250ms`, `2m`, or a bare number of seconds.
pub fn parse_duration(text: &str) -> Result<Duration, String> {
    let t = text.trim();
    let (num, scale) = if let Some(v) = t.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = t.strip_suffix('s') {
        (v, 1.0)
    } else if let Some(v) = t.strip_suffix('m') {
        (v, 60.0)
    } else if let Some(v) = t.strip_suffix('h') {
        (v, 3600.0)
    } else {
        (t, 1.0)
    };
    let value: f64 = num.trim().parse().map_err(|_| format!("bad duration `{text}`"))?;
    if !(value >= 0.0) || !value.is_finite() {
        return Err(format!("bad duration `{text}`"));
    }
    Ok(Duration::from_secs_f64(value * scale))
}

fn parse_beta(text: &str) -> Result<f64, String> {
    match text {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| format!("bad beta `{t}`")),
    }
}

fn read_instance(path: &Path) -> Result<Instance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_hsd(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn names(instance: &Instance, ids: &[u32]) -> String {
    ids.iter()
        .map(|&s| instance.station_name(s))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs a parsed command, printing results to stdout.
pub fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Generate {
            stations,
            ratio,
            delta_s,
            beta,
            temperature,
            seed,
            largest_component,
            output,
        } => {
            let params = GeneratorParams {
                n_stations: stations,
                ratio,
                target_delta_s: delta_s,
                beta: parse_beta(&beta)?,
                temperature,
                seed,
            };
            let g = generate(&params).map_err(|e| e.to_string())?;
            let inst = if largest_component { &g.largest } else { &g.full };
            write_text(&output, &write_hsd(inst))?;
            println!(
                "a {}\nstations {}\nconnections {}\nlargest_component_stations {}",
                g.world.a,
                inst.station_count(),
                inst.connection_count(),
                g.largest.station_count()
            );
        }
        Command::Reduce { input, output, report } => {
            let inst = read_instance(&input)?;
            let mut r = reduce_to_core(&inst);
            r.relative_two_core_size = Some(relative_two_core_size(&inst));
            let text = format_report(&inst, &r);
            for line in text.lines().take_while(|l| !l.starts_with("station ") && !l.starts_with("connection ")) {
                println!("{line}");
            }
            write_text(&output, &write_hsd(&r.core))?;
            if let Some(path) = report {
                write_text(&path, &text)?;
            }
        }
        Command::Solve { input, budget, max_nodes } => {
            let inst = read_instance(&input)?;
            let budget = Budget {
                max_nodes,
                time_limit: budget.as_deref().map(parse_duration).transpose()?,
            };
            match solve_pipeline(&inst, budget) {
                Ok((cover, report)) => {
                    println!("optimum {}", cover.len());
                    println!("cover {}", names(&inst, &cover));
                    print!("{}", format_report(&inst, &report));
                }
                Err(SolveError::BudgetExhausted { best }) => {
                    println!("best_bound {}", best.len());
                    println!("cover {}", names(&inst, &best));
                    return Err(format!("budget exhausted; best cover has {} stations", best.len()));
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        Command::Metrics {
            input,
            largest_component,
            ccdf: want_ccdf,
        } => {
            let mut inst = read_instance(&input)?;
            if largest_component {
                inst = inst.largest_component().map_err(|e| e.to_string())?;
            }
            if want_ccdf {
                let degrees: Vec<u64> = (0..inst.station_count() as u32)
                    .map(|s| inst.degree(s) as u64)
                    .filter(|&d| d > 0)
                    .collect();
                println!("value,fraction");
                for (v, f) in ccdf(&degrees).map_err(|e| e.to_string())? {
                    println!("{v},{f}");
                }
            } else {
                let report = metrics_report(&inst).map_err(|e| e.to_string())?;
                println!("{METRICS_CSV_HEADER}");
                println!("{}", report.csv_row());
            }
        }
        Command::IngestGtfs {
            dir,
            output,
            largest_component,
        } => {
            let mut inst = load_gtfs(&dir).map_err(|e| e.to_string())?;
            if largest_component {
                inst = inst.largest_component().map_err(|e| e.to_string())?;
            }
            write_text(&output, &write_hsd(&inst))?;
            println!("stations {}\nconnections {}", inst.station_count(), inst.connection_count());
        }
        Command::Sweep {
            config,
            preset,
            thinned,
            output,
            svg,
            threads,
        } => {
            let mut cfg = match (&config, &preset) {
                (Some(path), _) => {
                    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    parse_config(&text)?
                }
                (None, Some(name)) => SweepConfig::preset(name).ok_or_else(|| format!("unknown preset `{name}`"))?,
                (None, None) => SweepConfig::main(),
            };
            if thinned {
                cfg = cfg.thinned();
            }
            let out = output
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("sweep.csv"));
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| e.to_string())?;
            let results = pool.install(|| run_sweep(&cfg))?;
            write_results(&results, &out, svg).map_err(|e| format!("{}: {e}", out.display()))?;
            for f in &results.failures {
                eprintln!("failed: T={} beta={} sample={}: {}", f.temperature, f.beta, f.sample, f.message);
            }
            println!("rows {}\nfailures {}\noutput {}", results.rows.len(), results.failures.len(), out.display());
        }
        Command::ConstructN1 {
            input,
            designated,
            output,
        } => {
            let graph = to_graph(&read_instance(&input)?);
            let inst = build_n1(&graph, designated.as_deref()).map_err(|e| e.to_string())?;
            write_text(&output, &write_hsd(&inst))?;
        }
        Command::ConstructN2 { input, output } => {
            let graph = to_graph(&read_instance(&input)?);
            let inst = build_n2(&graph).map_err(|e| e.to_string())?;
            write_text(&output, &write_hsd(&inst))?;
        }
        Command::EncodeSat { input, output } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let formula = Formula3Sat::from_dimacs(&text).map_err(|e| e.to_string())?;
            let (inst, _) = encode_3sat(&formula).map_err(|e| e.to_string())?;
            write_text(&output, &write_hsd(&inst))?;
            println!("variables {}\nclauses {}", formula.num_vars, formula.clauses.len());
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
