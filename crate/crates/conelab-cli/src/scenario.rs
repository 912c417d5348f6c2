//! Run configuration: one JSON document fixes every knob of a laboratory
//! run, and its resolved form is embedded in all outputs.

use serde::{Deserialize, Serialize};

use conelab::nullflow::NumericConfig;
use conelab::verification::VerifyConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleScenario {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleScenario {
    fn default() -> Self {
        OracleScenario {
            t_min: -3.0,
            t_max: 3.0,
            x_min: -3.0,
            x_max: -0.05,
            h: 0.05,
            samples: 10_000,
            seed: 20260810,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloudScenario {
    pub n: usize,
    pub seed: u64,
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
}

impl Default for CloudScenario {
    fn default() -> Self {
        CloudScenario {
            n: 10_000,
            seed: 17,
            t_range: (-4.0, 2.0),
            x_range: (-5.0, -0.02),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub tol: f64,
    pub x_stop: f64,
    pub s_min: f64,
    pub margin: f64,
    /// Number of generator seeds spanning the wedge (inclusive of both
    /// edges).
    pub strain_seeds: usize,
    /// Generator seeds below and above the wedge.
    pub outer_seeds_below: Vec<f64>,
    pub outer_seeds_above: Vec<f64>,
    /// Seed points `(t, x)` of leftward generators for the null-infinity
    /// line.
    pub infinity_seeds: Vec<(f64, f64)>,
    /// Endpoint sample range and count for the boundary-map runs.
    pub map_endpoints: (f64, f64, usize),
    pub oracle: OracleScenario,
    pub cloud: CloudScenario,
    pub out_dir: String,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            tol: 1e-10,
            x_stop: -1e-6,
            s_min: -10.0,
            margin: 1e-9,
            strain_seeds: 33,
            outer_seeds_below: vec![-3.0, -2.55, -2.1, -1.65, -1.2],
            outer_seeds_above: vec![-0.4, -0.05, 0.3, 0.65, 1.0],
            infinity_seeds: vec![
                (-2.0, -1.0),
                (-1.4, -1.0),
                (-0.8, -1.0),
                (-0.2, -1.0),
                (0.4, -1.0),
                (1.0, -1.0),
            ],
            map_endpoints: (-2.0, 1.0, 41),
            oracle: OracleScenario::default(),
            cloud: CloudScenario::default(),
            out_dir: "out".into(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err("tol must be positive and finite".into());
        }
        if !(self.x_stop < 0.0 && self.s_min < self.x_stop) {
            return Err("window must satisfy s_min < x_stop < 0".into());
        }
        if self.margin <= 0.0 {
            return Err("margin must be positive".into());
        }
        if self.strain_seeds == 1 {
            return Err("strain_seeds must be 0 or at least 2".into());
        }
        if self.map_endpoints.2 < 3 {
            return Err("map_endpoints needs at least 3 samples".into());
        }
        if self.oracle.h <= 0.0
            || self.oracle.x_max >= 0.0
            || self.oracle.t_min >= self.oracle.t_max
            || self.oracle.x_min >= self.oracle.x_max
        {
            return Err("oracle box is invalid".into());
        }
        if self.cloud.x_range.1 >= 0.0 || self.cloud.t_range.0 >= self.cloud.t_range.1 {
            return Err("cloud ranges are invalid".into());
        }
        for &(_, x) in &self.infinity_seeds {
            if x >= 0.0 {
                return Err("infinity seeds must lie in the half-plane x < 0".into());
            }
        }
        Ok(())
    }

    pub fn numeric(&self) -> NumericConfig<f64> {
        NumericConfig {
            tol: self.tol,
            x_stop: self.x_stop,
            s_min: self.s_min,
            margin: self.margin,
            max_step_frac: 0.01,
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            numeric: self.numeric(),
            strain_count: self.strain_seeds,
            map_samples: self.map_endpoints.2,
            oracle_h: self.oracle.h,
            oracle_samples: self.oracle.samples,
            oracle_seed: self.oracle.seed,
            cloud_samples: self.cloud.n,
            cloud_seed: self.cloud.seed,
        }
    }

    /// Generator seeds for the timelike line: the wedge span plus the outer
    /// seeds, ascending.
    pub fn t_seeds(&self) -> Vec<f64> {
        let n = self.strain_seeds;
        let mut seeds: Vec<f64> = if n >= 2 {
            (0..n)
                .map(|k| -1.0 + 0.5 * k as f64 / (n - 1) as f64)
                .collect()
        } else {
            Vec::new()
        };
        seeds.extend(&self.outer_seeds_below);
        seeds.extend(&self.outer_seeds_above);
        seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seeds
    }

    /// Endpoint samples for the boundary-map runs, with the entry nearest
    /// zero snapped onto zero so the jump point itself is sampled.
    pub fn map_samples(&self) -> Vec<f64> {
        let (lo, hi, n) = self.map_endpoints;
        let mut out: Vec<f64> = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect();
        if lo < 0.0 && hi > 0.0 {
            let nearest = out
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            out[nearest] = 0.0;
        }
        out
    }
}
