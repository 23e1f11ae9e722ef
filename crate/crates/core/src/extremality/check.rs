//! Residual-based checker for the conditions (i)–(vi) of a higher-order extremal.

use serde::{Deserialize, Serialize};

use super::adjoint::AdjointFlow;
use super::hamiltonian::{hamiltonian, max_hamiltonian};
use crate::brackets::{enumerate_goh_brackets, FormalBracket, GohTemplate};
use crate::cones::PolyhedralCone;
use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::processes::{integrate_extended_with_step, ExtendedProcess, Scenario, Tolerances};

/// Multipliers `(p0, p, pi, lambda)`; `p` is determined by `p(S) = p_terminal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSet {
    pub p0: f64,
    pub p_terminal: Vec<f64>,
    pub pi: f64,
    pub lambda: f64,
    /// Adjoint at the process nodes, if already integrated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_path: Option<Vec<Vec<f64>>>,
}

impl MultiplierSet {
    pub fn new(p0: f64, p_terminal: Vec<f64>, pi: f64, lambda: f64) -> Self {
        Self {
            p0,
            p_terminal,
            pi,
            lambda,
            p_path: None,
        }
    }

    /// Every component times `c` (the path too, when present).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            p0: c * self.p0,
            p_terminal: linalg::scale(&self.p_terminal, c),
            pi: c * self.pi,
            lambda: c * self.lambda,
            p_path: self
                .p_path
                .as_ref()
                .map(|path| path.iter().map(|p| linalg::scale(p, c)).collect()),
        }
    }

    /// `|p0| + sup_s |p(s)|_inf + |pi|` over a given path.
    pub fn normalization(&self, path: &[Vec<f64>]) -> f64 {
        let sup = path
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        self.p0.abs() + sup + self.pi.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubResidual {
    pub name: String,
    pub applicable: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub id: String,
    pub name: String,
    pub applicable: bool,
    /// For nontriviality this is the norm that must exceed the tolerance;
    /// otherwise the worst violation, which must not exceed it.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub parts: Vec<SubResidual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub p0: f64,
    pub p_terminal: Vec<f64>,
    pub pi: f64,
    pub lambda: f64,
    /// `beta(S) < K - tol`: the gated conditions apply.
    pub energy_interior: bool,
    pub boundary_case: bool,
    pub conditions: Vec<ConditionRecord>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl ExtremalityReport {
    pub fn condition(&self, id: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Largest residual among applicable conditions other than nontriviality.
    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .filter(|c| c.applicable && c.id != "i")
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub tolerances: Tolerances,
    pub max_bracket_length: usize,
}

impl CheckConfig {
    pub fn from_scenario(sc: &Scenario) -> Self {
        Self {
            tolerances: sc.tolerances,
            max_bracket_length: sc.max_bracket_length,
        }
    }
}

/// A bracket condition sampled along the process.
#[derive(Debug, Clone)]
pub(crate) struct BracketSamples {
    pub name: String,
    /// (5.10): `B(h)(y_k)` per node.
    pub first: Option<Vec<Vec<f64>>>,
    /// (5.11): `[f, B] w0 + sum_{j > m1} [g_j, B] w_j` at both ends of each interval.
    pub second: Option<Vec<[Vec<f64>; 2]>>,
}

/// Everything about the process and the cone that does not depend on the multipliers.
pub(crate) struct CheckContext<'a> {
    pub sc: &'a Scenario,
    pub z: &'a ExtendedProcess,
    pub k_cone: &'a PolyhedralCone,
    pub cfg: CheckConfig,
    pub flow: AdjointFlow,
    pub dpsi: Vec<f64>,
    pub interior: bool,
    pub f_nodes: Vec<Vec<f64>>,
    pub g_nodes: Vec<Vec<Vec<f64>>>,
    pub brackets: Vec<BracketSamples>,
    pub unverified_brackets: bool,
    pub state_residual: f64,
    pub purely_impulsive: bool,
}

fn bracket_name(b: &FormalBracket) -> String {
    // letters stand for control fields
    let mut s = b.to_string();
    s = s.replace('X', "g");
    s
}

impl<'a> CheckContext<'a> {
    pub fn new(sc: &'a Scenario, z: &'a ExtendedProcess, k_cone: &'a PolyhedralCone, cfg: CheckConfig) -> Result<Self> {
        if k_cone.dim() != sc.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: sc.n + 1,
                found: k_cone.dim(),
            });
        }
        if z.y.first().map(|y| y.len()) != Some(sc.n) || z.w.first().map(|w| w.len()) != Some(sc.m()) {
            return Err(Error::DimensionMismatch {
                expected: sc.n,
                found: z.y.first().map_or(0, |y| y.len()),
            });
        }
        let tol = cfg.tolerances;
        let beta = z.final_energy();
        let interior = sc.energy_bound.map_or(true, |k| beta < k - tol.energy);
        let flow = AdjointFlow::new(sc, z)?;
        let dpsi = sc.cost_gradient(z.final_time(), z.final_state())?;
        let f_nodes = z.y.iter().map(|y| sc.f.eval(y)).collect::<Result<Vec<_>>>()?;
        let g_nodes = z
            .y
            .iter()
            .map(|y| sc.g.iter().map(|g| g.eval(y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;

        // state re-integration, one RK4 step per interval
        let hmax = z
            .nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
            * (1.0 + 1e-9);
        let redo = integrate_extended_with_step(sc, &z.control(), hmax)?;
        let mut state_residual: f64 = 0.0;
        for k in 0..z.nodes.len().min(redo.nodes.len()) {
            state_residual = state_residual
                .max(linalg::dist(&z.y[k], &redo.y[k]))
                .max((z.y0[k] - redo.y0[k]).abs())
                .max((z.beta[k] - redo.beta[k]).abs());
        }
        if redo.nodes.len() != z.nodes.len() {
            state_residual = f64::INFINITY;
        }

        let m1 = sc.m1();
        let mut brackets = Vec::new();
        let mut unverified_brackets = false;
        if interior && m1 > 0 {
            let mut templates: Vec<GohTemplate> = (1..=m1 as u32)
                .map(|i| GohTemplate {
                    bracket: FormalBracket::Leaf(i),
                    admissible_k1: sc.g[i as usize - 1].smoothness().at_least(1),
                    rule_verified: true,
                })
                .collect();
            templates.extend(enumerate_goh_brackets(m1, cfg.max_bracket_length, 0, &sc.g[..m1])?);
            for t in templates {
                unverified_brackets |= !t.rule_verified;
                let field = t.field(&sc.g)?;
                let length = t.bracket.length();
                let first = if length >= 2 {
                    Some(z.y.iter().map(|y| field.eval(y)).collect::<Result<Vec<_>>>()?)
                } else {
                    None
                };
                let second_ok = t.admissible_k1
                    && sc.f.smoothness().at_least(1)
                    && sc.g[m1..].iter().all(|g| g.smoothness().at_least(1));
                let second = if second_ok {
                    let fb = sc.f.lie_bracket(&field)?;
                    let gb = sc.g[m1..]
                        .iter()
                        .map(|g| g.lie_bracket(&field))
                        .collect::<Result<Vec<_>>>()?;
                    let mut out = Vec::with_capacity(z.intervals());
                    for k in 0..z.intervals() {
                        let at = |y: &[f64]| -> Result<Vec<f64>> {
                            let mut v = linalg::scale(&fb.eval(y)?, z.w0[k]);
                            for (j, g) in gb.iter().enumerate() {
                                let wj = z.w[k][m1 + j];
                                if wj != 0.0 {
                                    linalg::axpy(&mut v, wj, &g.eval(y)?);
                                }
                            }
                            Ok(v)
                        };
                        out.push([at(&z.y[k])?, at(&z.y[k + 1])?]);
                    }
                    Some(out)
                } else {
                    None
                };
                brackets.push(BracketSamples {
                    name: bracket_name(&t.bracket),
                    first,
                    second,
                });
            }
        }
        Ok(Self {
            sc,
            z,
            k_cone,
            cfg,
            flow,
            dpsi,
            interior,
            f_nodes,
            g_nodes,
            brackets,
            unverified_brackets,
            state_residual,
            purely_impulsive: z.final_time() <= 0.0,
        })
    }

    pub fn check(&self, m: &MultiplierSet) -> Result<ExtremalityReport> {
        let sc = self.sc;
        let z = self.z;
        let tol = self.cfg.tolerances;
        let n = sc.n;
        if m.p_terminal.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.p_terminal.len(),
            });
        }
        let path = self.flow.integrate(&m.p_terminal);
        let mut notes = Vec::new();
        let mut conditions = Vec::new();

        // (i)
        let sup_p = path.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let strengthened = !self.purely_impulsive;
        let value = if strengthened {
            sup_p + m.lambda.abs()
        } else {
            m.p0.abs() + sup_p + m.lambda.abs()
        };
        conditions.push(ConditionRecord {
            id: "i".into(),
            name: "nontriviality".into(),
            applicable: true,
            residual: value,
            tolerance: tol.nontriviality,
            pass: value > tol.nontriviality,
            parts: vec![SubResidual {
                name: if strengthened { "(p, lambda) != 0" } else { "(p0, p, lambda) != 0" }.into(),
                applicable: true,
                residual: value,
            }],
            note: Some("value must exceed the tolerance".into()),
        });

        // (ii)
        let mut q = vec![m.p0];
        q.extend_from_slice(&m.p_terminal);
        linalg::axpy(&mut q, m.lambda, &self.dpsi);
        let cone_dist = linalg::norm(&self.k_cone.project(&linalg::scale(&q, -1.0)));
        let pi_res = if self.interior { m.pi.abs() } else { m.pi.max(0.0) };
        let sign_res = (-m.lambda).max(0.0);
        let res_ii = cone_dist.max(pi_res).max(sign_res);
        conditions.push(ConditionRecord {
            id: "ii".into(),
            name: "nontransversality".into(),
            applicable: true,
            residual: res_ii,
            tolerance: tol.transversality,
            pass: res_ii <= tol.transversality,
            parts: vec![
                SubResidual {
                    name: "distance to -lambda DPsi - K polar".into(),
                    applicable: true,
                    residual: cone_dist,
                },
                SubResidual {
                    name: if self.interior { "pi = 0" } else { "pi <= 0" }.into(),
                    applicable: true,
                    residual: pi_res,
                },
                SubResidual {
                    name: "lambda >= 0".into(),
                    applicable: true,
                    residual: sign_res,
                },
            ],
            note: (!self.interior).then(|| "boundary case: beta(S) within tolerance of K".to_string()),
        });

        // (iii)
        let path_res = match &m.p_path {
            Some(given) if given.len() == path.len() => given
                .iter()
                .zip(&path)
                .map(|(a, b)| linalg::dist(a, b))
                .fold(0.0, f64::max),
            Some(_) => f64::INFINITY,
            None => 0.0,
        };
        let res_iii = path_res.max(self.state_residual);
        conditions.push(ConditionRecord {
            id: "iii".into(),
            name: "hamiltonian equations".into(),
            applicable: true,
            residual: res_iii,
            tolerance: tol.adjoint,
            pass: res_iii <= tol.adjoint,
            parts: vec![
                SubResidual {
                    name: "adjoint".into(),
                    applicable: true,
                    residual: path_res,
                },
                SubResidual {
                    name: "state".into(),
                    applicable: true,
                    residual: self.state_residual,
                },
            ],
            note: None,
        });

        // (iv), (v)
        let maxh: Vec<f64> = z
            .y
            .iter()
            .zip(&path)
            .map(|(y, p)| max_hamiltonian(sc, y, p, m.p0, m.pi).map(|h| h.value))
            .collect::<Result<_>>()?;
        let mut max_res: f64 = 0.0;
        for k in 0..z.intervals() {
            for node in [k, k + 1] {
                let h = hamiltonian(sc, &z.y[node], &path[node], m.p0, m.pi, z.w0[k], &z.w[k])?;
                max_res = max_res.max((maxh[node] - h).abs());
            }
        }
        let m1 = sc.m1();
        let goh_applicable = self.interior && m1 > 0;
        let goh_res = if goh_applicable {
            (0..z.nodes.len())
                .flat_map(|k| (0..m1).map(move |i| (k, i)))
                .map(|(k, i)| dot(&path[k], &self.g_nodes[k][i]).abs())
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let res_iv = max_res.max(goh_res);
        conditions.push(ConditionRecord {
            id: "iv".into(),
            name: "first-order maximization".into(),
            applicable: true,
            residual: res_iv,
            tolerance: tol.hamiltonian,
            pass: res_iv <= tol.hamiltonian,
            parts: vec![
                SubResidual {
                    name: "max H - H(w)".into(),
                    applicable: true,
                    residual: max_res,
                },
                SubResidual {
                    name: "p . g_i = 0, i <= m1".into(),
                    applicable: goh_applicable,
                    residual: goh_res,
                },
            ],
            note: None,
        });
        let res_v = maxh.iter().fold(0.0f64, |a, h| a.max(h.abs()));
        conditions.push(ConditionRecord {
            id: "v".into(),
            name: "vanishing hamiltonian".into(),
            applicable: true,
            residual: res_v,
            tolerance: tol.hamiltonian,
            pass: res_v <= tol.hamiltonian,
            parts: vec![],
            note: None,
        });

        // (vi)
        let vi_applicable = self.interior && !self.brackets.is_empty();
        let mut parts = Vec::new();
        let mut res_vi: f64 = 0.0;
        for b in &self.brackets {
            if let Some(first) = &b.first {
                let r = first
                    .iter()
                    .zip(&path)
                    .map(|(v, p)| dot(p, v).abs())
                    .fold(0.0, f64::max);
                res_vi = res_vi.max(r);
                parts.push(SubResidual {
                    name: format!("p . {}", b.name),
                    applicable: true,
                    residual: r,
                });
            }
            if let Some(second) = &b.second {
                let r = second
                    .iter()
                    .enumerate()
                    .map(|(k, [a, c])| dot(&path[k], a).abs().max(dot(&path[k + 1], c).abs()))
                    .fold(0.0, f64::max);
                res_vi = res_vi.max(r);
                parts.push(SubResidual {
                    name: format!("p . ([f, {0}] w0 + sum [g_j, {0}] w_j)", b.name),
                    applicable: true,
                    residual: r,
                });
            }
        }
        let vi_note = if !self.interior {
            Some("not applicable: beta(S) is not below K".to_string())
        } else if sc.m1() == 0 {
            Some("not applicable: no line directions in the control cone (m1 = 0)".to_string())
        } else if self.unverified_brackets {
            Some("brackets longer than 4 use the depth regularity rule unverified".to_string())
        } else {
            None
        };
        conditions.push(ConditionRecord {
            id: "vi".into(),
            name: "higher-order conditions".into(),
            applicable: vi_applicable,
            residual: res_vi,
            tolerance: tol.hamiltonian,
            pass: !vi_applicable || res_vi <= tol.hamiltonian,
            parts,
            note: vi_note,
        });

        if !self.interior {
            notes.push("boundary case: conditions gated on beta(S) < K were not evaluated".into());
        }
        let pass = conditions.iter().all(|c| !c.applicable || c.pass);
        Ok(ExtremalityReport {
            p0: m.p0,
            p_terminal: m.p_terminal.clone(),
            pi: m.pi,
            lambda: m.lambda,
            energy_interior: self.interior,
            boundary_case: !self.interior,
            conditions,
            pass,
            notes,
        })
    }
}

/// Evaluates every condition of a higher-order extremal for the given multipliers.
pub fn check_extremal(
    sc: &Scenario,
    z: &ExtendedProcess,
    m: &MultiplierSet,
    k_cone: &PolyhedralCone,
    cfg: &CheckConfig,
) -> Result<ExtremalityReport> {
    CheckContext::new(sc, z, k_cone, *cfg)?.check(m)
}
