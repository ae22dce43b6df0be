//! Flat `key = value` sweep configuration files.
//!
//! ```text
//! # comment
//! preset = main          # optional starting point, applied first
//! thinned = true
//! stations = 2000
//! ratio = 10
//! delta_s = 2
//! temperatures = 0:0.1:1 # or a list: 0, 0.25, 0.5
//! betas = 2, 2.5, 3, inf
//! samples = 3
//! seed = 7
//! output = results/main.csv
//! ```

use std::path::PathBuf;

use super::SweepConfig;

fn parse_f64(v: &str) -> Result<f64, String> {
    match v.trim() {
        "inf" | "Inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("not a number: `{t}`")),
    }
}

/// `a, b, c` or `start:step:end` (inclusive, values rounded to 1e-9).
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let v = v.trim();
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range must be start:step:end, got `{v}`"));
        }
        let (start, step, end) = (parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
        if !(step > 0.0) || !step.is_finite() || end < start {
            return Err(format!("bad range `{v}`"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count)
            .map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    v.split(',').map(parse_f64).collect()
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        t => Err(format!("not a boolean: `{t}`")),
    }
}

/// Parses a configuration text. Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<SweepConfig, String> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        entries.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    let mut cfg = SweepConfig::main();
    if let Some((line, _, name)) = entries.iter().find(|e| e.1 == "preset") {
        cfg = SweepConfig::preset(name).ok_or_else(|| format!("line {line}: unknown preset `{name}`"))?;
    }
    if let Some((line, _, v)) = entries.iter().find(|e| e.1 == "thinned") {
        if parse_bool(v).map_err(|e| format!("line {line}: {e}"))? {
            cfg = cfg.thinned();
        }
    }
    for (line, k, v) in &entries {
        let at = |e: String| format!("line {line}: {e}");
        match k.as_str() {
            "preset" | "thinned" => {}
            "stations" => cfg.base.n_stations = v.parse().map_err(|_| at(format!("bad integer `{v}`")))?,
            "ratio" => cfg.base.ratio = parse_f64(v).map_err(at)?,
            "delta_s" => cfg.base.target_delta_s = parse_f64(v).map_err(at)?,
            "temperatures" => cfg.temperatures = parse_grid(v).map_err(at)?,
            "betas" => cfg.betas = parse_grid(v).map_err(at)?,
            "samples" => cfg.samples = v.parse().map_err(|_| at(format!("bad integer `{v}`")))?,
            "seed" => cfg.master_seed = v.parse().map_err(|_| at(format!("bad integer `{v}`")))?,
            "output" => cfg.output = Some(PathBuf::from(v)),
            other => return Err(at(format!("unknown key `{other}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
