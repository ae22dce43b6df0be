//! Random station cover instances with tunable heterogeneity and locality.
//!
//! Stations and connections get uniform positions on the unit circle.
//! Stations carry Pareto weights with exponent `beta` (all 1 for
//! `beta = inf`), connections weight 1. Station `s` joins connection `c`
//! with probability `min(1, (a * w(s) * w(c) / dist(s, c))^(1 / T))`, a step
//! function at `T = 0`. The scale `a` is calibrated so the expected mean
//! station degree hits a target.

use std::sync::Once;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, ModelError, StationId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("position {0} outside [0, 1)")]
    OutOfRange(f64),
    #[error("power-law exponent {0} must be at least 2 (finite mean needs > 2)")]
    BetaTooSmall(f64),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("target mean station degree {target} unreachable: achievable range is [{low}, {high}]")]
    Unreachable { target: f64, low: f64, high: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Distance on the circle of circumference 1.
pub fn circle_distance(x: f64, y: f64) -> Result<f64, GenError> {
    for v in [x, y] {
        if !(0.0..1.0).contains(&v) {
            return Err(GenError::OutOfRange(v));
        }
    }
    Ok(torus_distance(x, y))
}

#[inline]
fn torus_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

/// Inverse-CDF Pareto weight with lower bound 1: `(1 - u)^(-1 / (beta - 1))`.
pub fn pareto_weight(u: f64, beta: f64) -> f64 {
    (1.0 - u).powf(-1.0 / (beta - 1.0))
}

/// `n` station weights. `beta = inf` gives uniform weights; `beta = 2`
/// (infinite mean) is accepted with a warning, smaller values are rejected.
pub fn sample_weights<R: Rng>(n: usize, beta: f64, rng: &mut R) -> Result<Vec<f64>, GenError> {
    if beta.is_nan() || beta < 2.0 {
        return Err(GenError::BetaTooSmall(beta));
    }
    if beta == 2.0 {
        static WARNED: Once = Once::new();
        WARNED.call_once(|| log::warn!("beta = 2 gives infinite-mean station weights"));
    }
    if beta.is_infinite() {
        return Ok(vec![1.0; n]);
    }
    Ok((0..n).map(|_| pareto_weight(rng.gen::<f64>(), beta)).collect())
}

/// Membership probability for scale `a`, weights, distance and temperature.
pub fn membership_probability(a: f64, w_station: f64, w_connection: f64, dist: f64, temperature: f64) -> f64 {
    let reach = a * w_station * w_connection;
    if temperature == 0.0 {
        return if dist <= reach { 1.0 } else { 0.0 };
    }
    if dist <= reach {
        return 1.0;
    }
    (reach / dist).powf(1.0 / temperature)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_stations: usize,
    /// |S| / |C|.
    pub ratio: f64,
    pub target_delta_s: f64,
    /// Power-law exponent of station weights; `f64::INFINITY` for uniform.
    pub beta: f64,
    pub temperature: f64,
    pub seed: u64,
}

impl GeneratorParams {
    /// |S| = 2000, |S|/|C| = 10, mean station degree 2.
    pub fn main(beta: f64, temperature: f64, seed: u64) -> Self {
        Self {
            n_stations: 2000,
            ratio: 10.0,
            target_delta_s: 2.0,
            beta,
            temperature,
            seed,
        }
    }

    pub fn connection_count(&self) -> usize {
        (self.n_stations as f64 / self.ratio).round() as usize
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_stations == 0 {
            return Err(GenError::InvalidParams("n_stations must be at least 1".into()));
        }
        if !(self.ratio > 0.0) {
            return Err(GenError::InvalidParams("ratio must be positive".into()));
        }
        if !(self.target_delta_s > 0.0) {
            return Err(GenError::InvalidParams("target mean degree must be positive".into()));
        }
        if !(self.temperature >= 0.0) || self.temperature.is_infinite() {
            return Err(GenError::InvalidParams("temperature must be finite and non-negative".into()));
        }
        if self.beta.is_nan() || self.beta < 2.0 {
            return Err(GenError::BetaTooSmall(self.beta));
        }
        if self.connection_count() == 0 {
            return Err(GenError::InvalidParams("ratio leaves no connections".into()));
        }
        Ok(())
    }
}

/// Sampled positions and weights plus the calibrated scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWorld {
    pub station_pos: Vec<f64>,
    pub station_weight: Vec<f64>,
    pub connection_pos: Vec<f64>,
    pub connection_weight: Vec<f64>,
    pub a: f64,
}

impl SampledWorld {
    pub fn sample<R: Rng>(n_stations: usize, n_connections: usize, beta: f64, rng: &mut R) -> Result<Self, GenError> {
        let station_pos: Vec<f64> = (0..n_stations).map(|_| rng.gen::<f64>()).collect();
        let station_weight = sample_weights(n_stations, beta, rng)?;
        let connection_pos: Vec<f64> = (0..n_connections).map(|_| rng.gen::<f64>()).collect();
        Ok(Self {
            station_pos,
            station_weight,
            connection_pos,
            connection_weight: vec![1.0; n_connections],
            a: 1.0,
        })
    }

    pub fn distance(&self, s: usize, c: usize) -> f64 {
        torus_distance(self.station_pos[s], self.connection_pos[c])
    }

    pub fn probability(&self, s: usize, c: usize, temperature: f64) -> f64 {
        membership_probability(
            self.a,
            self.station_weight[s],
            self.connection_weight[c],
            self.distance(s, c),
            temperature,
        )
    }

    /// Exact expected mean station degree for scale `a`.
    pub fn expected_mean_degree(&self, a: f64, temperature: f64) -> f64 {
        ExpectedDegree::new(self).mean(a, temperature)
    }
}

/// Precomputed `ln(w_s w_c / dist)` per pair, so evaluating the expected
/// degree for a new `a` needs one exponential per pair.
struct ExpectedDegree {
    log_reach: Vec<f64>,
    n_stations: usize,
}

impl ExpectedDegree {
    fn new(world: &SampledWorld) -> Self {
        let mut log_reach = Vec::with_capacity(world.station_pos.len() * world.connection_pos.len());
        for c in 0..world.connection_pos.len() {
            let lwc = world.connection_weight[c].ln();
            for s in 0..world.station_pos.len() {
                let d = world.distance(s, c);
                log_reach.push(world.station_weight[s].ln() + lwc - d.ln());
            }
        }
        Self {
            log_reach,
            n_stations: world.station_pos.len(),
        }
    }

    fn mean(&self, a: f64, temperature: f64) -> f64 {
        let la = a.ln();
        let total: f64 = if temperature == 0.0 {
            self.log_reach.iter().filter(|&&g| la + g >= 0.0).count() as f64
        } else {
            let inv_t = 1.0 / temperature;
            self.log_reach
                .iter()
                .map(|&g| {
                    let x = la + g;
                    if x >= 0.0 {
                        1.0
                    } else {
                        (x * inv_t).exp()
                    }
                })
                .sum()
        };
        total / self.n_stations as f64
    }
}

pub const CALIBRATION_BRACKET: (f64, f64) = (1e-9, 1e3);
pub const CALIBRATION_TOLERANCE: f64 = 1e-3;
pub const CALIBRATION_MAX_ITER: usize = 60;

/// Bisection (on log a) for the scale whose exact expected mean station
/// degree is within [`CALIBRATION_TOLERANCE`] of the target. The expected
/// degree is nondecreasing in `a`. After [`CALIBRATION_MAX_ITER`] steps the
/// closer bracket end is returned.
pub fn calibrate_a(world: &SampledWorld, target_delta_s: f64, temperature: f64) -> Result<f64, GenError> {
    let expected = ExpectedDegree::new(world);
    let (mut lo, mut hi) = CALIBRATION_BRACKET;
    let f_lo = expected.mean(lo, temperature);
    let f_hi = expected.mean(hi, temperature);
    if !(target_delta_s > 0.0) || target_delta_s < f_lo - CALIBRATION_TOLERANCE || target_delta_s > f_hi + CALIBRATION_TOLERANCE {
        return Err(GenError::Unreachable {
            target: target_delta_s,
            low: f_lo,
            high: f_hi,
        });
    }
    if (f_lo - target_delta_s).abs() <= CALIBRATION_TOLERANCE {
        return Ok(lo);
    }
    if (f_hi - target_delta_s).abs() <= CALIBRATION_TOLERANCE {
        return Ok(hi);
    }
    let (mut g_lo, mut g_hi) = (f_lo, f_hi);
    for _ in 0..CALIBRATION_MAX_ITER {
        let mid = (lo * hi).sqrt();
        let g = expected.mean(mid, temperature);
        if (g - target_delta_s).abs() <= CALIBRATION_TOLERANCE {
            return Ok(mid);
        }
        if g < target_delta_s {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }
    Ok(if (target_delta_s - g_lo).abs() <= (g_hi - target_delta_s).abs() {
        lo
    } else {
        hi
    })
}

/// A generated instance and its largest component.
#[derive(Debug, Clone)]
pub struct Generated {
    /// All stations, isolated ones included; empty connections dropped.
    pub full: Instance,
    pub largest: Instance,
    pub world: SampledWorld,
}

/// Station token for index `i` of `n`, zero padded so token order equals
/// index order.
pub fn station_token(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len();
    format!("s{i:0width$}")
}

/// One independent draw per (connection, station) pair, connection-major.
/// Connections that come out empty are dropped.
pub fn draw_memberships<R: Rng>(world: &SampledWorld, temperature: f64, rng: &mut R) -> Vec<Vec<StationId>> {
    let n = world.station_pos.len();
    let mut connections = Vec::with_capacity(world.connection_pos.len());
    for c in 0..world.connection_pos.len() {
        let mut members = Vec::new();
        for s in 0..n {
            let u: f64 = rng.gen();
            if u < world.probability(s, c, temperature) {
                members.push(s as StationId);
            }
        }
        if !members.is_empty() {
            connections.push(members);
        }
    }
    connections
}

/// Samples a world, calibrates `a`, then draws every (station, connection)
/// membership independently. Connections list their stations in token order.
pub fn generate(params: &GeneratorParams) -> Result<Generated, GenError> {
    params.validate()?;
    let n = params.n_stations;
    let m = params.connection_count();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut world = SampledWorld::sample(n, m, params.beta, &mut rng)?;
    world.a = calibrate_a(&world, params.target_delta_s, params.temperature)?;
    let connections = draw_memberships(&world, params.temperature, &mut rng);
    let names: Vec<String> = (0..n).map(|i| station_token(i, n)).collect();
    let full = Instance::from_indexed(names, connections)?;
    let largest = full.largest_component()?;
    Ok(Generated { full, largest, world })
}
