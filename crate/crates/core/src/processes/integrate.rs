//! Fixed-step RK4 for strict-sense and extended (graph-completion) processes.

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::linalg;

/// Piecewise-constant control: value `values[k]` on `[breakpoints[k], breakpoints[k + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseControl {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PiecewiseControl {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints for {} control values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidArgument("control grid must start at 0".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("control grid must be strictly increasing".into()));
        }
        let d = values[0].len();
        if let Some(v) = values.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        Ok(Self { breakpoints, values })
    }

    /// A single constant value on `[0, horizon]`.
    pub fn constant(horizon: f64, value: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![value])
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().expect("nonempty grid")
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }
}

/// Extended control `(w0, w)` as one piecewise-constant path; `values[k] = [w0, w1, .., wm]`.
pub type ExtendedControl = PiecewiseControl;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictProcess {
    pub horizon: f64,
    /// Integration nodes `0 = t_0 < .. < t_N = T`.
    pub nodes: Vec<f64>,
    /// Control on `[t_k, t_{k+1})`, one entry per interval.
    pub u: Vec<Vec<f64>>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

impl StrictProcess {
    pub fn final_state(&self) -> &[f64] {
        self.x.last().expect("nonempty trajectory")
    }

    pub fn final_energy(&self) -> f64 {
        *self.v.last().expect("nonempty trajectory")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedProcess {
    pub s_final: f64,
    /// Integration nodes `0 = s_0 < .. < s_N = S`.
    pub nodes: Vec<f64>,
    /// Controls on `[s_k, s_{k+1})`, one entry per interval.
    pub w0: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub y0: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
}

impl ExtendedProcess {
    pub fn final_time(&self) -> f64 {
        *self.y0.last().expect("nonempty trajectory")
    }

    pub fn final_state(&self) -> &[f64] {
        self.y.last().expect("nonempty trajectory")
    }

    pub fn final_energy(&self) -> f64 {
        *self.beta.last().expect("nonempty trajectory")
    }

    /// `(y0(S), y(S))`.
    pub fn final_point(&self) -> Vec<f64> {
        let mut p = vec![self.final_time()];
        p.extend_from_slice(self.final_state());
        p
    }

    pub fn intervals(&self) -> usize {
        self.w0.len()
    }

    /// Controls as one piecewise path on the node grid.
    pub fn control(&self) -> ExtendedControl {
        PiecewiseControl {
            breakpoints: self.nodes.clone(),
            values: self
                .w0
                .iter()
                .zip(&self.w)
                .map(|(a, w)| {
                    let mut v = vec![*a];
                    v.extend_from_slice(w);
                    v
                })
                .collect(),
        }
    }

    /// Largest `|w0 + |w| - 1|` over intervals.
    pub fn simplex_residual(&self) -> f64 {
        self.w0
            .iter()
            .zip(&self.w)
            .map(|(a, w)| (a + linalg::norm(w) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Substep grid: each control cell split into equal steps no longer than `h`.
fn substeps(breakpoints: &[f64], h: f64) -> Vec<(f64, f64, usize)> {
    let mut out = Vec::new();
    for (k, w) in breakpoints.windows(2).enumerate() {
        let len = w[1] - w[0];
        let count = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        for j in 0..count {
            let a = w[0] + len * j as f64 / count as f64;
            let b = if j + 1 == count {
                w[1]
            } else {
                w[0] + len * (j + 1) as f64 / count as f64
            };
            out.push((a, b, k));
        }
    }
    out
}

pub(crate) struct Rk4Workspace {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            stage: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// One RK4 step of `dy/ds = f(y) w0 + sum g_i(y) w_i` with frozen controls.
pub(crate) fn rk4_step(sc: &Scenario, y: &[f64], w0: f64, w: &[f64], h: f64, ws: &mut Rk4Workspace) -> Result<Vec<f64>> {
    let n = y.len();
    let Rk4Workspace { k, stage, tmp } = ws;
    sc.dynamics(y, w0, w, &mut k[0], tmp)?;
    for (i, c) in [0.5, 0.5, 1.0].into_iter().enumerate() {
        for j in 0..n {
            stage[j] = y[j] + c * h * k[i][j];
        }
        let (_, next) = k.split_at_mut(i + 1);
        sc.dynamics(stage, w0, w, &mut next[0], tmp)?;
    }
    Ok((0..n)
        .map(|j| y[j] + h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]))
        .collect())
}

fn check_controls(sc: &Scenario, values: &[Vec<f64>]) -> Result<()> {
    for (cell, u) in values.iter().enumerate() {
        if u.len() != sc.m() {
            return Err(Error::DimensionMismatch {
                expected: sc.m(),
                found: u.len(),
            });
        }
        let d = sc.control_cone.distance(u);
        if d > sc.tolerances.membership {
            return Err(Error::ControlOutsideCone { cell, distance: d });
        }
    }
    Ok(())
}

/// Strict-sense process on `[0, T]` driven by `u`.
pub fn integrate_strict(sc: &Scenario, u: &PiecewiseControl) -> Result<StrictProcess> {
    integrate_strict_with_step(sc, u, sc.integrator.step_for(u.horizon()))
}

pub fn integrate_strict_with_step(sc: &Scenario, u: &PiecewiseControl, h: f64) -> Result<StrictProcess> {
    check_controls(sc, &u.values)?;
    let steps = substeps(&u.breakpoints, h);
    let mut ws = Rk4Workspace::new(sc.n);
    let mut nodes = Vec::with_capacity(steps.len() + 1);
    let mut x = Vec::with_capacity(steps.len() + 1);
    let mut v = Vec::with_capacity(steps.len() + 1);
    let mut uu = Vec::with_capacity(steps.len());
    nodes.push(0.0);
    x.push(sc.initial_state.clone());
    v.push(0.0);
    for (a, b, k) in steps {
        let ctrl = &u.values[k];
        let next = rk4_step(sc, x.last().unwrap(), 1.0, ctrl, b - a, &mut ws)?;
        x.push(next);
        v.push(v.last().unwrap() + linalg::norm(ctrl) * (b - a));
        nodes.push(b);
        uu.push(ctrl.clone());
    }
    Ok(StrictProcess {
        horizon: u.horizon(),
        nodes,
        u: uu,
        x,
        v,
    })
}

/// Extended process on `[0, S]`; each control value is `[w0, w1, .., wm]`.
pub fn integrate_extended(sc: &Scenario, control: &ExtendedControl) -> Result<ExtendedProcess> {
    integrate_extended_with_step(sc, control, sc.integrator.step_for(control.horizon()))
}

pub fn integrate_extended_with_step(sc: &Scenario, control: &ExtendedControl, h: f64) -> Result<ExtendedProcess> {
    let tol = sc.tolerances;
    for (cell, val) in control.values.iter().enumerate() {
        if val.len() != sc.m() + 1 {
            return Err(Error::DimensionMismatch {
                expected: sc.m() + 1,
                found: val.len(),
            });
        }
        let w0 = val[0];
        let w = &val[1..];
        let residual = (w0 + linalg::norm(w) - 1.0).abs();
        if w0 < -tol.simplex || residual > tol.simplex {
            return Err(Error::SimplexViolation { cell, residual });
        }
        let d = sc.control_cone.distance(w);
        if d > tol.membership {
            return Err(Error::ControlOutsideCone { cell, distance: d });
        }
    }
    let steps = substeps(&control.breakpoints, h);
    let mut ws = Rk4Workspace::new(sc.n);
    let cap = steps.len() + 1;
    let mut z = ExtendedProcess {
        s_final: control.horizon(),
        nodes: Vec::with_capacity(cap),
        w0: Vec::with_capacity(cap),
        w: Vec::with_capacity(cap),
        y0: Vec::with_capacity(cap),
        y: Vec::with_capacity(cap),
        beta: Vec::with_capacity(cap),
    };
    z.nodes.push(0.0);
    z.y0.push(0.0);
    z.y.push(sc.initial_state.clone());
    z.beta.push(0.0);
    for (a, b, k) in steps {
        let val = &control.values[k];
        let (w0, w) = (val[0].max(0.0), &val[1..]);
        let hstep = b - a;
        let next = rk4_step(sc, z.y.last().unwrap(), w0, w, hstep, &mut ws)?;
        z.y.push(next);
        z.y0.push(z.y0.last().unwrap() + w0 * hstep);
        z.beta.push(z.beta.last().unwrap() + linalg::norm(w) * hstep);
        z.nodes.push(b);
        z.w0.push(w0);
        z.w.push(w.to_vec());
    }
    Ok(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub target_distance: f64,
    /// `K - beta(S)`; `None` when `K = +inf`.
    pub energy_slack: Option<f64>,
}

fn feasibility(sc: &Scenario, final_point: &[f64], energy: f64) -> FeasibilityReport {
    let target_distance = sc.target.distance_unchecked(final_point);
    let energy_slack = sc.energy_bound.map(|k| k - energy);
    let feasible = target_distance <= sc.tolerances.membership
        && energy_slack.map_or(true, |s| s >= -sc.tolerances.energy);
    FeasibilityReport {
        feasible,
        target_distance,
        energy_slack,
    }
}

/// `(y0, y, beta)(S) ∈ target x [0, K]`.
pub fn is_feasible(sc: &Scenario, z: &ExtendedProcess) -> FeasibilityReport {
    feasibility(sc, &z.final_point(), z.final_energy())
}

pub fn is_feasible_strict(sc: &Scenario, p: &StrictProcess) -> FeasibilityReport {
    let mut pt = vec![p.horizon];
    pt.extend_from_slice(p.final_state());
    feasibility(sc, &pt, p.final_energy())
}

/// `Psi(y0(S), y(S))`.
pub fn cost(sc: &Scenario, z: &ExtendedProcess) -> Result<f64> {
    sc.cost_at(z.final_time(), z.final_state())
}

pub fn cost_strict(sc: &Scenario, p: &StrictProcess) -> Result<f64> {
    sc.cost_at(p.horizon, p.final_state())
}
