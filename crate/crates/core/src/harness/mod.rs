//! Parameter sweeps over the generator, with per-sample rows and per-cell
//! means.

pub mod cli;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::gen::{generate, GeneratorParams};
use crate::metrics::metrics_report;

/// Generator settings shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseParams {
    pub n_stations: usize,
    pub ratio: f64,
    pub target_delta_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: BaseParams,
    pub temperatures: Vec<f64>,
    /// May contain `f64::INFINITY`.
    pub betas: Vec<f64>,
    pub samples: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

pub const PRESETS: [&str; 4] = ["main", "ratio4", "deg5", "thinned"];

/// `k / denominator` for k in 0..=denominator: grids without accumulated
/// rounding, so values print as short decimals.
fn unit_grid(denominator: u32) -> Vec<f64> {
    (0..=denominator).map(|k| k as f64 / denominator as f64).collect()
}

impl SweepConfig {
    /// Full grid on the main setting: T in steps of 0.05, beta from 2 to 5
    /// in steps of 0.25 plus uniform weights, ten samples per cell.
    pub fn main() -> Self {
        let mut betas: Vec<f64> = (0..=12).map(|k| 2.0 + k as f64 / 4.0).collect();
        betas.push(f64::INFINITY);
        Self {
            base: BaseParams {
                n_stations: 2000,
                ratio: 10.0,
                target_delta_s: 2.0,
            },
            temperatures: unit_grid(20),
            betas,
            samples: 10,
            master_seed: 1,
            output: None,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        let mut cfg = Self::main();
        match name {
            "main" => {}
            "ratio4" => cfg.base.ratio = 4.0,
            "deg5" => cfg.base.target_delta_s = 5.0,
            "thinned" => cfg = cfg.thinned(),
            _ => return None,
        }
        Some(cfg)
    }

    /// Same base setting on the reduced grid: T in steps of 0.1,
    /// beta in {2, 2.5, 3, 3.5, 5, inf}, three samples.
    pub fn thinned(mut self) -> Self {
        self.temperatures = unit_grid(10);
        self.betas = vec![2.0, 2.5, 3.0, 3.5, 5.0, f64::INFINITY];
        self.samples = 3;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.temperatures.is_empty() || self.betas.is_empty() {
            return Err("temperature and beta grids must be non-empty".into());
        }
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        Ok(())
    }

    pub fn params(&self, temperature: f64, beta: f64, sample: usize) -> GeneratorParams {
        GeneratorParams {
            n_stations: self.base.n_stations,
            ratio: self.base.ratio,
            target_delta_s: self.base.target_delta_s,
            beta,
            temperature,
            seed: derive_seed(self.master_seed, temperature, beta, sample),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Per-instance seed from the master seed and the cell coordinates, so a
/// row does not depend on scheduling or on the rest of the grid.
pub fn derive_seed(master: u64, temperature: f64, beta: f64, sample: usize) -> u64 {
    let mut h = splitmix64(master);
    for part in [temperature.to_bits(), beta.to_bits(), sample as u64] {
        h = splitmix64(h ^ part);
    }
    h
}

/// One generated sample, measured on its largest component.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub temperature: f64,
    pub beta: f64,
    pub sample: usize,
    pub seed: u64,
    pub n_stations_lcc: usize,
    pub ratio_lcc: f64,
    pub delta_s_lcc: f64,
    pub kappa: f64,
    pub beta_hat: Option<f64>,
    pub ks: Option<f64>,
    pub two_core_frac: f64,
    pub core_frac: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub temperature: f64,
    pub beta: f64,
    pub sample: usize,
    pub message: String,
}

/// Mean values over the samples of one (T, beta) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMean {
    pub temperature: f64,
    pub beta: f64,
    pub samples: usize,
    pub kappa: f64,
    pub core_frac: f64,
    pub two_core_frac: f64,
    pub delta_s_lcc: f64,
    pub n_stations_lcc: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResults {
    /// Ordered by temperature, beta, sample as listed in the config.
    pub rows: Vec<SampleRow>,
    pub failures: Vec<CellFailure>,
}

/// Total order on f64 keys for grouping (all grid values are finite or +inf).
fn key(x: f64) -> u64 {
    x.to_bits()
}

impl SweepResults {
    /// Per-cell means in grid order (temperature-major).
    pub fn cell_means(&self) -> Vec<CellMean> {
        let mut order: Vec<(u64, u64)> = Vec::new();
        let mut groups: BTreeMap<(u64, u64), Vec<&SampleRow>> = BTreeMap::new();
        for row in &self.rows {
            let k = (key(row.temperature), key(row.beta));
            groups.entry(k).or_insert_with(|| {
                order.push(k);
                Vec::new()
            });
            groups.get_mut(&k).unwrap().push(row);
        }
        order
            .into_iter()
            .map(|k| {
                let rows = &groups[&k];
                let n = rows.len() as f64;
                let mean = |f: &dyn Fn(&SampleRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
                CellMean {
                    temperature: rows[0].temperature,
                    beta: rows[0].beta,
                    samples: rows.len(),
                    kappa: mean(&|r| r.kappa),
                    core_frac: mean(&|r| r.core_frac),
                    two_core_frac: mean(&|r| r.two_core_frac),
                    delta_s_lcc: mean(&|r| r.delta_s_lcc),
                    n_stations_lcc: mean(&|r| r.n_stations_lcc as f64),
                }
            })
            .collect()
    }

    /// Share of per-sample values within 5% (relative) of their cell mean,
    /// for core fraction and kappa together. Cells with a zero mean count
    /// exact zeros as within.
    pub fn variance_diagnostic(&self) -> f64 {
        let means = self.cell_means();
        let lookup: BTreeMap<(u64, u64), &CellMean> = means
            .iter()
            .map(|m| ((key(m.temperature), key(m.beta)), m))
            .collect();
        let within = |v: f64, m: f64| (v - m).abs() <= 0.05 * m.abs() || (m == 0.0 && v == 0.0);
        let mut hits = 0usize;
        let mut total = 0usize;
        for r in &self.rows {
            let m = lookup[&(key(r.temperature), key(r.beta))];
            for (v, mv) in [(r.core_frac, m.core_frac), (r.kappa, m.kappa)] {
                total += 1;
                if within(v, mv) {
                    hits += 1;
                }
            }
        }
        if total == 0 {
            1.0
        } else {
            hits as f64 / total as f64
        }
    }
}

/// Generates and measures a single sample.
pub fn run_sample(config: &SweepConfig, temperature: f64, beta: f64, sample: usize) -> Result<SampleRow, String> {
    let params = config.params(temperature, beta, sample);
    let generated = generate(&params).map_err(|e| e.to_string())?;
    let lcc = &generated.largest;
    let report = metrics_report(lcc).map_err(|e| e.to_string())?;
    Ok(SampleRow {
        temperature,
        beta,
        sample,
        seed: params.seed,
        n_stations_lcc: report.stations,
        ratio_lcc: report.ratio,
        delta_s_lcc: report.delta_s,
        kappa: report.kappa,
        beta_hat: report.beta_hat,
        ks: report.ks,
        two_core_frac: report.two_core_frac,
        core_frac: report.core_frac,
    })
}

/// Runs every (T, beta, sample) job on the rayon pool. Failures are
/// collected per sample and do not stop the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResults, String> {
    config.validate()?;
    let jobs: Vec<(f64, f64, usize)> = config
        .temperatures
        .iter()
        .flat_map(|&t| {
            config
                .betas
                .iter()
                .flat_map(move |&b| (0..config.samples).map(move |s| (t, b, s)))
        })
        .collect();
    let outcomes: Vec<Result<SampleRow, CellFailure>> = jobs
        .par_iter()
        .map(|&(t, b, s)| {
            run_sample(config, t, b, s).map_err(|message| {
                log::warn!("sample T={t} beta={b} #{s} failed: {message}");
                CellFailure {
                    temperature: t,
                    beta: b,
                    sample: s,
                    message,
                }
            })
        })
        .collect();
    let mut results = SweepResults::default();
    for outcome in outcomes {
        match outcome {
            Ok(row) => results.rows.push(row),
            Err(f) => results.failures.push(f),
        }
    }
    Ok(results)
}
