//! Control problems: dynamics, control cone, target, cost and tolerances.

use serde::{Deserialize, Serialize};

use crate::cones::SetDescriptor;
use crate::error::{Error, Result};
use crate::fields::{parse_expr, Expr, Smoothness, Variables, VectorFieldExpr};
use crate::linalg::{self, nnls};
use crate::lp::{self, LpOutcome, Row};

/// Closed control cone `C = C1 x C2` with `C1 = R^{m1}` and `C2` pointed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlCone {
    /// `R^dim_+`
    Orthant { dim: usize },
    /// `[0, +inf)`
    HalfLine,
    /// `R^lines x span+(generators)`; generators live in `R^pointed_dim`.
    LinesTimesPointed {
        lines: usize,
        pointed_dim: usize,
        #[serde(default)]
        generators: Vec<Vec<f64>>,
    },
}

impl ControlCone {
    pub fn m1(&self) -> usize {
        match self {
            ControlCone::LinesTimesPointed { lines, .. } => *lines,
            _ => 0,
        }
    }

    pub fn m2(&self) -> usize {
        match self {
            ControlCone::Orthant { dim } => *dim,
            ControlCone::HalfLine => 1,
            ControlCone::LinesTimesPointed { pointed_dim, .. } => *pointed_dim,
        }
    }

    pub fn m(&self) -> usize {
        self.m1() + self.m2()
    }

    /// Generators of `C2`.
    pub fn pointed_generators(&self) -> Vec<Vec<f64>> {
        match self {
            ControlCone::Orthant { dim } => (0..*dim).map(|i| linalg::unit(*dim, i)).collect(),
            ControlCone::HalfLine => vec![vec![1.0]],
            ControlCone::LinesTimesPointed { generators, .. } => generators.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gens = self.pointed_generators();
        let d = self.m2();
        for g in &gens {
            if g.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: g.len(),
                });
            }
        }
        if gens.is_empty() {
            return Ok(());
        }
        // Pointed iff the only nonnegative combination summing to zero is trivial.
        let k = gens.len();
        let mut rows = Vec::new();
        for i in 0..d {
            let a: Vec<f64> = gens.iter().map(|g| g[i]).collect();
            rows.push(Row { a: a.clone(), b: 0.0 });
            rows.push(Row {
                a: linalg::scale(&a, -1.0),
                b: 0.0,
            });
        }
        for j in 0..k {
            rows.push(Row {
                a: linalg::scale(&linalg::unit(k, j), -1.0),
                b: 0.0,
            });
        }
        let norms: Vec<f64> = gens.iter().map(|g| linalg::norm(g)).collect();
        match lp::maximize(&norms, &rows, 1.0, 1e-12) {
            LpOutcome::Optimal { value, .. } if value > 1e-9 => Err(Error::InvalidArgument(
                "pointed part of the control cone contains a line".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let m1 = self.m1();
        let mut out = w[..m1].to_vec();
        let tail = &w[m1..];
        let p = match self {
            ControlCone::Orthant { .. } | ControlCone::HalfLine => tail.iter().map(|x| x.max(0.0)).collect(),
            ControlCone::LinesTimesPointed { generators, .. } => nnls(tail.len(), generators, tail).fitted,
        };
        out.extend(p);
        out
    }

    pub fn distance(&self, w: &[f64]) -> f64 {
        linalg::dist(w, &self.project(w))
    }

    /// Unit directions whose conic hull (with both signs on the line part)
    /// is the cone: `±e_i` for `i < m1`, then normalized generators of `C2`.
    pub fn unit_directions(&self) -> Vec<Vec<f64>> {
        let m = self.m();
        let m1 = self.m1();
        let mut out = Vec::new();
        for i in 0..m1 {
            out.push(linalg::unit(m, i));
            out.push(linalg::scale(&linalg::unit(m, i), -1.0));
        }
        for g in self.pointed_generators() {
            if let Some(u) = linalg::normalized(&g) {
                let mut v = vec![0.0; m1];
                v.extend(u);
                out.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    /// Maximal RK4 step as a fraction of the horizon.
    pub rel_step: f64,
    /// Absolute maximal step; overrides `rel_step` when set.
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_step: 1e-3,
            max_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn step_for(&self, horizon: f64) -> f64 {
        self.max_step.unwrap_or(self.rel_step * horizon).max(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub membership: f64,
    pub simplex: f64,
    pub energy: f64,
    pub hamiltonian: f64,
    pub transversality: f64,
    pub adjoint: f64,
    pub nontriviality: f64,
    pub w0_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            membership: 1e-8,
            simplex: 1e-10,
            energy: 1e-8,
            hamiltonian: 1e-6,
            transversality: 1e-8,
            adjoint: 1e-8,
            nontriviality: 1e-9,
            w0_min: 1e-6,
        }
    }
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
    pub f: Vec<String>,
    pub g: Vec<Vec<String>>,
    #[serde(default)]
    pub smoothness: Option<SmoothnessSpec>,
    /// Final cost over `(t, x1..xn)`.
    pub cost: String,
    pub control_cone: ControlCone,
    pub target: SetDescriptor,
    /// `null` stands for `K = +inf`.
    pub energy_bound: Option<f64>,
    pub initial_state: Vec<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bracket_length")]
    pub max_bracket_length: usize,
}

fn default_bracket_length() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessSpec {
    #[serde(default = "infinite")]
    pub f: Smoothness,
    #[serde(default)]
    pub g: Vec<Smoothness>,
}

fn infinite() -> Smoothness {
    Smoothness::Infinite
}

/// A validated control problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub f: VectorFieldExpr,
    pub g: Vec<VectorFieldExpr>,
    pub cost: Expr,
    cost_gradient: Vec<Expr>,
    pub control_cone: ControlCone,
    pub target: SetDescriptor,
    pub energy_bound: Option<f64>,
    pub initial_state: Vec<f64>,
    pub integrator: IntegratorConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub max_bracket_length: usize,
    source: ScenarioFile,
}

fn field_error(which: &str, e: Error) -> Error {
    match e {
        Error::Parse { position, message } => Error::Parse {
            position,
            message: format!("{which}: {message}"),
        },
        Error::UnknownIdentifier { name, position } => Error::UnknownIdentifier {
            name: format!("{name}` in `{which}"),
            position,
        },
        other => other,
    }
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let n = file.n;
        if n == 0 {
            return Err(Error::InvalidArgument("state dimension n must be positive".into()));
        }
        if file.m1 + file.m2 != file.m {
            return Err(Error::InvalidArgument(format!(
                "m1 + m2 = {} + {} differs from m = {}",
                file.m1, file.m2, file.m
            )));
        }
        file.control_cone.validate()?;
        if file.control_cone.m1() != file.m1 || file.control_cone.m2() != file.m2 {
            return Err(Error::InvalidArgument(format!(
                "control cone has (m1, m2) = ({}, {}), scenario declares ({}, {})",
                file.control_cone.m1(),
                file.control_cone.m2(),
                file.m1,
                file.m2
            )));
        }
        if file.g.len() != file.m {
            return Err(Error::DimensionMismatch {
                expected: file.m,
                found: file.g.len(),
            });
        }
        let smooth = file.smoothness.clone().unwrap_or(SmoothnessSpec {
            f: Smoothness::Infinite,
            g: Vec::new(),
        });
        let f = VectorFieldExpr::parse_in(&file.f, n)
            .map_err(|e| field_error("f", e))?
            .with_smoothness(smooth.f);
        let g = file
            .g
            .iter()
            .enumerate()
            .map(|(i, comps)| {
                let cls = smooth.g.get(i).copied().unwrap_or(Smoothness::Infinite);
                VectorFieldExpr::parse_in(comps, n)
                    .map(|v| v.with_smoothness(cls))
                    .map_err(|e| field_error(&format!("g{}", i + 1), e))
            })
            .collect::<Result<Vec<_>>>()?;
        let cost = parse_expr(&file.cost, Variables::TimeState { n }).map_err(|e| field_error("cost", e))?;
        let cost_gradient = (0..=n).map(|i| cost.derivative(i)).collect();
        file.target.validate()?;
        if file.target.dim() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: file.target.dim(),
            });
        }
        if file.initial_state.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: file.initial_state.len(),
            });
        }
        if let Some(k) = file.energy_bound {
            if !(k > 0.0) {
                return Err(Error::InvalidArgument("energy_bound must be positive or null".into()));
            }
        }
        if file.max_bracket_length == 0 {
            return Err(Error::InvalidArgument("max_bracket_length must be at least 1".into()));
        }
        Ok(Scenario {
            name: file.name.clone(),
            n,
            f,
            g,
            cost,
            cost_gradient,
            control_cone: file.control_cone.clone(),
            target: file.target.clone(),
            energy_bound: file.energy_bound,
            initial_state: file.initial_state.clone(),
            integrator: file.integrator,
            tolerances: file.tolerances,
            seed: file.seed,
            max_bracket_length: file.max_bracket_length,
            source: file,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn file(&self) -> &ScenarioFile {
        &self.source
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn m1(&self) -> usize {
        self.control_cone.m1()
    }

    /// `Psi(t, x)`.
    pub fn cost_at(&self, t: f64, x: &[f64]) -> Result<f64> {
        let mut v = Vec::with_capacity(self.n + 1);
        v.push(t);
        v.extend_from_slice(x);
        self.cost.eval(&v).map_err(|e| Error::Eval {
            component: 0,
            message: format!("cost: {e}"),
        })
    }

    /// `DPsi(t, x)` over `(t, x)`.
    pub fn cost_gradient(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(self.n + 1);
        v.push(t);
        v.extend_from_slice(x);
        self.cost_gradient
            .iter()
            .enumerate()
            .map(|(i, e)| {
                e.eval(&v).map_err(|err| Error::Eval {
                    component: i,
                    message: format!("cost gradient: {err}"),
                })
            })
            .collect()
    }

    /// `f(y) w0 + sum g_i(y) w_i`, written into `out`.
    pub(crate) fn dynamics(&self, y: &[f64], w0: f64, w: &[f64], out: &mut [f64], tmp: &mut [f64]) -> Result<()> {
        if w0 != 0.0 {
            self.f.eval_into(y, tmp)?;
            for (o, t) in out.iter_mut().zip(tmp.iter()) {
                *o = w0 * t;
            }
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
        }
        for (gi, wi) in self.g.iter().zip(w) {
            if *wi != 0.0 {
                gi.eval_into(y, tmp)?;
                for (o, t) in out.iter_mut().zip(tmp.iter()) {
                    *o += wi * t;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_catalog() {
        let c = ControlCone::LinesTimesPointed {
            lines: 1,
            pointed_dim: 2,
            generators: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        };
        c.validate().unwrap();
        assert_eq!((c.m1(), c.m2(), c.m()), (1, 2, 3));
        let p = c.project(&[-3.0, -1.0, 0.5]);
        assert_eq!(p[0], -3.0);
        assert!(c.distance(&[5.0, 1.0, 0.5]) < 1e-12);
        assert_eq!(c.unit_directions().len(), 4);
        let bad = ControlCone::LinesTimesPointed {
            lines: 0,
            pointed_dim: 1,
            generators: vec![vec![1.0], vec![-1.0]],
        };
        assert!(bad.validate().is_err());
        assert_eq!(ControlCone::HalfLine.project(&[-2.0]), vec![0.0]);
    }

    #[test]
    fn cone_json() {
        let c: ControlCone = serde_json::from_str(r#"{"kind":"half_line"}"#).unwrap();
        assert_eq!(c, ControlCone::HalfLine);
        let c: ControlCone = serde_json::from_str(r#"{"kind":"orthant","dim":2}"#).unwrap();
        assert_eq!(c.m(), 2);
    }
}
