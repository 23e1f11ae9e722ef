//! Sampling the strict-sense neighbourhood of an extended process.
//!
//! A negative result is evidence of isolation, not a proof: only finitely
//! many piecewise-constant controls are tried.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::distance_controls;
use super::integrate::{cost, integrate_extended, is_feasible, ExtendedControl, ExtendedProcess, PiecewiseControl};
use super::scenario::Scenario;
use crate::cones::certificates::rng;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Uniform cells of a perturbed control (reference breakpoints are added).
    pub cells: usize,
    pub seed: u64,
    /// Lower clamp on `w0`, keeping every sample a strict-sense process.
    pub w0_min: f64,
    /// Halvings of the perturbation amplitude before falling back to the reference.
    pub max_rejections: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            cells: 16,
            seed: 0,
            w0_min: 1e-6,
            max_rejections: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub sample: usize,
    pub distance: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub radius: f64,
    pub samples: usize,
    pub feasible_found: bool,
    /// Least cost over feasible samples; `None` stands for `+inf`.
    pub best_cost: Option<f64>,
    pub feasible_count: usize,
    /// First feasible samples, by sample index.
    pub witnesses: Vec<ProbeWitness>,
    pub max_distance: f64,
    pub min_target_distance: f64,
}

const MAX_WITNESSES: usize = 10;

/// Puts `(w0, w)` back on `{w0 + |w| = 1, w0 >= w0_min, w ∈ C}`.
fn normalize(sc: &Scenario, w0: f64, w: &[f64], w0_min: f64) -> Vec<f64> {
    let w = sc.control_cone.project(w);
    let w0 = w0.max(0.0);
    let total = w0 + linalg::norm(&w);
    let (mut a, mut b) = if total < 1e-12 {
        (1.0, vec![0.0; w.len()])
    } else {
        (w0 / total, linalg::scale(&w, 1.0 / total))
    };
    if a < w0_min {
        a = w0_min;
        let nb = linalg::norm(&b);
        if nb > 0.0 {
            b = linalg::scale(&b, (1.0 - w0_min) / nb);
        }
    }
    let mut v = vec![a];
    v.extend(b);
    v
}

/// Reference control with breakpoints only where the value changes.
fn compress(c: &ExtendedControl) -> ExtendedControl {
    let mut bp = vec![0.0];
    let mut vals: Vec<Vec<f64>> = Vec::new();
    for (k, v) in c.values.iter().enumerate() {
        match vals.last() {
            Some(last) if linalg::dist(last, v) <= 1e-12 => {}
            Some(_) => {
                bp.push(c.breakpoints[k]);
                vals.push(v.clone());
            }
            None => vals.push(v.clone()),
        }
    }
    bp.push(c.horizon());
    PiecewiseControl {
        breakpoints: bp,
        values: vals,
    }
}

fn value_at(c: &ExtendedControl, s: f64) -> &[f64] {
    let k = c.breakpoints.partition_point(|&b| b <= s).saturating_sub(1);
    &c.values[k.min(c.values.len() - 1)]
}

fn clamped_reference(sc: &Scenario, reference: &ExtendedControl, w0_min: f64) -> ExtendedControl {
    PiecewiseControl {
        breakpoints: reference.breakpoints.clone(),
        values: reference
            .values
            .iter()
            .map(|v| {
                if v[0] >= w0_min {
                    v.clone()
                } else {
                    normalize(sc, v[0], &v[1..], w0_min)
                }
            })
            .collect(),
    }
}

fn perturbed(sc: &Scenario, reference: &ExtendedControl, amp: f64, s_shift: f64, cfg: &ProbeConfig, noise: &[f64]) -> ExtendedControl {
    let s_new = (reference.horizon() + s_shift).max(1e-9);
    let mut bp: Vec<f64> = (0..=cfg.cells).map(|i| s_new * i as f64 / cfg.cells as f64).collect();
    bp.extend(reference.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < s_new));
    bp.sort_by(f64::total_cmp);
    bp.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    *bp.last_mut().expect("nonempty") = s_new;
    let width = reference.values[0].len();
    let values = bp
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let base = value_at(reference, 0.5 * (w[0] + w[1]));
            let jitter = |j: usize| amp * noise[(k * width + j) % noise.len()];
            let w0 = base[0] + jitter(0);
            let ww: Vec<f64> = (1..width).map(|j| base[j] + jitter(j)).collect();
            normalize(sc, w0, &ww, cfg.w0_min)
        })
        .collect();
    PiecewiseControl { breakpoints: bp, values }
}

fn sample_control(sc: &Scenario, reference: &ExtendedControl, r: f64, index: usize, cfg: &ProbeConfig) -> ExtendedControl {
    let base = clamped_reference(sc, reference, cfg.w0_min);
    if index == 0 {
        return base;
    }
    let mut rng = rng(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64));
    let s_ref = reference.horizon();
    let mut amp = rng.gen::<f64>() * (2.0 * r / s_ref).min(1.0);
    let mut shift = rng.gen_range(-0.5..0.5) * r;
    let width = reference.values[0].len();
    let noise: Vec<f64> = (0..(cfg.cells + reference.cells() + 2) * width)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    for _ in 0..cfg.max_rejections {
        let c = perturbed(sc, reference, amp, shift, cfg, &noise);
        if distance_controls(&c, reference) < r {
            return c;
        }
        amp *= 0.5;
        shift *= 0.5;
    }
    base
}

/// Samples `n` embedded strict-sense controls within `d < r` of `zhat`,
/// integrates them and reports whether any reaches the target.
pub fn strict_neighborhood_probe(
    sc: &Scenario,
    zhat: &ExtendedProcess,
    r: f64,
    n: usize,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("probe needs at least one sample".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("probe radius must be positive".into()));
    }
    let reference = compress(&zhat.control());
    let outcomes: Vec<Result<(f64, bool, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let c = sample_control(sc, &reference, r, k, cfg);
            let d = distance_controls(&c, &reference);
            let z = integrate_extended(sc, &c)?;
            let feas = is_feasible(sc, &z);
            Ok((d, feas.feasible, cost(sc, &z)?, feas.target_distance))
        })
        .collect();
    let mut report = ProbeReport {
        radius: r,
        samples: n,
        feasible_found: false,
        best_cost: None,
        feasible_count: 0,
        witnesses: Vec::new(),
        max_distance: 0.0,
        min_target_distance: f64::INFINITY,
    };
    for (k, o) in outcomes.into_iter().enumerate() {
        let (d, feasible, c, td) = o?;
        report.max_distance = report.max_distance.max(d);
        report.min_target_distance = report.min_target_distance.min(td);
        if feasible {
            report.feasible_found = true;
            report.feasible_count += 1;
            report.best_cost = Some(report.best_cost.map_or(c, |b: f64| b.min(c)));
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(ProbeWitness {
                    sample: k,
                    distance: d,
                    cost: c,
                });
            }
        }
    }
    Ok(report)
}
