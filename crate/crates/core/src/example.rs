//! The bundled two-dimensional gap example and its end-to-end report.
//!
//! `f = (0, 1)`, `g = (1, eta(x2))` with `eta(x2) = sin(pi (x2 - 1/2))/2 - 1/2`,
//! cost `(x1 - 1)^2`, target `{1} x [0, 1] x {1}` in `(t, x1, x2)`, energy bound 1.
//! The reference `zbar` drifts with `u = 0`; `z_r` appends an impulse of size `r`
//! at `x2 = 1` where `eta` vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremality::{search_multipliers, SearchConfig, SearchReport};
use crate::linalg;
use crate::processes::{
    cost, distance_d, distance_dinf, integrate_extended, is_feasible, strict_neighborhood_probe,
    ExtendedProcess, PiecewiseControl, ProbeConfig, ProbeReport, Scenario,
};

pub const EXAMPLE_JSON: &str = include_str!("../data/example_4_4.json");

pub fn example_scenario() -> Scenario {
    Scenario::from_json(EXAMPLE_JSON).expect("bundled scenario is valid")
}

/// `(w0, w) = (1, 0)` on `[0, 1]`.
pub fn reference_process(sc: &Scenario) -> Result<ExtendedProcess> {
    integrate_extended(sc, &PiecewiseControl::constant(1.0, vec![1.0, 0.0])?)
}

/// `(1, 0)` on `[0, 1]`, then `(0, 1)` on `(1, 1 + r]`.
pub fn gap_process(sc: &Scenario, r: f64) -> Result<ExtendedProcess> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let control = PiecewiseControl::new(vec![0.0, 1.0, 1.0 + r], vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    integrate_extended(sc, &control)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleConfig {
    /// RK4 steps per unit horizon; `None` keeps the scenario's integrator.
    pub grid: Option<usize>,
    pub probe_samples: usize,
    /// Probe radius as a fraction of `r`.
    pub probe_fraction: f64,
    pub seed: u64,
}

impl Default for ExampleConfig {
    fn default() -> Self {
        Self {
            grid: None,
            probe_samples: 2000,
            probe_fraction: 0.4,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSection {
    pub final_point: Vec<f64>,
    pub final_point_error: f64,
    pub energy: f64,
    pub feasible: bool,
    pub cost: f64,
    pub cost_error: f64,
    pub probe: ProbeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub r: f64,
    pub feasible: bool,
    pub target_distance: f64,
    pub final_point: Vec<f64>,
    pub final_point_error: f64,
    pub energy: f64,
    pub energy_error: f64,
    pub d: f64,
    pub d_error: f64,
    pub d_inf: f64,
    pub cost: f64,
    /// Against `(1 - r)^2`.
    pub cost_error: f64,
    pub below_reference: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub scenario: String,
    pub reference: ReferenceSection,
    pub gap_family: Vec<GapEntry>,
    pub cost_note: String,
    pub k_cone_generators: Vec<Vec<f64>>,
    pub extremality: SearchReport,
}

fn with_grid(sc: &Scenario, grid: Option<usize>) -> Scenario {
    let mut sc = sc.clone();
    if let Some(n) = grid {
        sc.integrator.rel_step = 1.0 / n.max(1) as f64;
        sc.integrator.max_step = None;
    }
    sc
}

/// Runs the whole example: reference, gap family, probes and the multiplier search.
pub fn example_4_4_report(sc: &Scenario, radii: &[f64], cfg: &ExampleConfig) -> Result<ExampleReport> {
    let sc = with_grid(sc, cfg.grid);
    let zbar = reference_process(&sc)?;
    let expected = [1.0, 0.0, 1.0];
    let probe_cfg = ProbeConfig {
        seed: cfg.seed,
        ..ProbeConfig::default()
    };
    let reference = ReferenceSection {
        final_point: zbar.final_point(),
        final_point_error: linalg::dist(&zbar.final_point(), &expected),
        energy: zbar.final_energy(),
        feasible: is_feasible(&sc, &zbar).feasible,
        cost: cost(&sc, &zbar)?,
        cost_error: (cost(&sc, &zbar)? - 1.0).abs(),
        probe: strict_neighborhood_probe(&sc, &zbar, 0.2, cfg.probe_samples.max(1), &probe_cfg)?,
    };
    let mut gap_family = Vec::new();
    for &r in radii {
        let z = gap_process(&sc, r)?;
        let feas = is_feasible(&sc, &z);
        let c = cost(&sc, &z)?;
        let d = distance_d(&z, &zbar);
        let probe = if feas.feasible && cfg.probe_samples > 0 {
            Some(strict_neighborhood_probe(&sc, &z, cfg.probe_fraction * r, cfg.probe_samples, &probe_cfg)?)
        } else {
            None
        };
        gap_family.push(GapEntry {
            r,
            feasible: feas.feasible,
            target_distance: feas.target_distance,
            final_point: z.final_point(),
            final_point_error: linalg::dist(&z.final_point(), &[1.0, r, 1.0]),
            energy: z.final_energy(),
            energy_error: (z.final_energy() - r).abs(),
            d,
            d_error: (d - r).abs(),
            d_inf: distance_dinf(&z, &zbar),
            cost: c,
            cost_error: (c - (1.0 - r).powi(2)).abs(),
            below_reference: feas.feasible && c < reference.cost,
            probe,
        });
    }
    let k_cone = sc.target.clarke_tangent_cone(&expected)?;
    let extremality = search_multipliers(&sc, &zbar, &k_cone, &SearchConfig::from_scenario(&sc))?;
    Ok(ExampleReport {
        scenario: sc.name.clone(),
        reference,
        gap_family,
        cost_note: "the cost of z_r is (x1 - 1)^2 at x1 = r, i.e. (1 - r)^2; a linear 1 - r would not match this cost".into(),
        k_cone_generators: k_cone.generators()?.to_vec(),
        extremality,
    })
}
