//! Searching for multipliers that make a process a higher-order extremal.
//!
//! The adjoint is linear in its terminal value, `p(s_k) = Phi_k P`, so every
//! condition is a linear (in)equality in `X = (p0, P, pi)` once the maximum of
//! the Hamiltonian over the control cone is written through its generators.
//! The two branches `lambda = 0` and `lambda = 1` are separate LPs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check::{CheckConfig, CheckContext, ExtremalityReport, MultiplierSet};
use crate::cones::certificates::rng;
use crate::cones::PolyhedralCone;
use crate::error::Result;
use crate::linalg::{self, dot};
use crate::lp::{maximize, LpOutcome, Row};
use crate::processes::{ExtendedProcess, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Normal,
    Abnormal,
    NoMultipliers,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Normal => "normal",
            Classification::Abnormal => "abnormal",
            Classification::NoMultipliers => "no_multipliers",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub check: CheckConfig,
    /// Extra sampled directions of the control cone used when `pi` is free.
    pub boundary_directions: usize,
    pub seed: u64,
}

impl SearchConfig {
    pub fn from_scenario(sc: &Scenario) -> Self {
        Self {
            check: CheckConfig::from_scenario(sc),
            boundary_directions: 64,
            seed: sc.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOutcome {
    pub lambda: f64,
    /// The LP found a candidate (nontrivial for `lambda = 0`).
    pub lp_feasible: bool,
    pub candidates: usize,
    /// Candidates that passed every check.
    pub verified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub classification: Classification,
    pub abnormal_feasible: bool,
    pub normal_feasible: bool,
    pub branches: Vec<BranchOutcome>,
    /// Verified multipliers normalized to `|p0| + sup|p| + |pi| + lambda = 1`.
    pub multipliers: Vec<MultiplierSet>,
    pub reports: Vec<ExtremalityReport>,
    /// Dimension of the solution space of the equality constraints.
    pub equality_null_dim: usize,
    pub notes: Vec<String>,
}

const NULL_TOL: f64 = 1e-9;
const LP_SLACK: f64 = 1e-10;
const NONTRIVIAL: f64 = 1e-7;
const NORMAL_BOUND: f64 = 1e6;
const DEDUP_ANGLE: f64 = 1e-6;

struct Constraints {
    dim: usize,
    equalities: Vec<Vec<f64>>,
    /// `a . X <= lambda * b`
    inequalities: Vec<(Vec<f64>, f64)>,
}

/// `(Phi_k^T v)` for the adjoint columns at node `k`.
fn pull_back(cols: &[Vec<Vec<f64>>], k: usize, v: &[f64]) -> Vec<f64> {
    cols.iter().map(|c| dot(&c[k], v)).collect()
}

fn row(p0: f64, p: Vec<f64>, pi: f64) -> Vec<f64> {
    let mut r = vec![p0];
    r.extend(p);
    r.push(pi);
    r
}

fn cone_samples(sc: &Scenario, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dirs = sc.control_cone.unit_directions();
    if dirs.is_empty() {
        return Vec::new();
    }
    let mut rng = rng(seed ^ 0x5eed);
    let m = sc.m();
    (0..count)
        .filter_map(|_| {
            let mut v = vec![0.0; m];
            for d in &dirs {
                linalg::axpy(&mut v, rng.gen::<f64>(), d);
            }
            linalg::normalized(&v)
        })
        .collect()
}

fn build_constraints(ctx: &CheckContext, cols: &[Vec<Vec<f64>>], cfg: &SearchConfig) -> Result<Constraints> {
    let sc = ctx.sc;
    let z = ctx.z;
    let n = sc.n;
    let m1 = sc.m1();
    let dim = n + 2;
    let mut eq = Vec::new();
    let mut ineq = Vec::new();

    // H(w) = 0 at both ends of every interval
    for k in 0..z.intervals() {
        for node in [k, k + 1] {
            let mut v = linalg::scale(&ctx.f_nodes[node], z.w0[k]);
            for (i, wi) in z.w[k].iter().enumerate() {
                linalg::axpy(&mut v, *wi, &ctx.g_nodes[node][i]);
            }
            eq.push(row(z.w0[k], pull_back(cols, node, &v), linalg::norm(&z.w[k])));
        }
    }
    if ctx.interior {
        eq.push(row(0.0, vec![0.0; n], 1.0));
        if m1 > 0 {
            for k in 0..z.nodes.len() {
                for i in 0..m1 {
                    eq.push(row(0.0, pull_back(cols, k, &ctx.g_nodes[k][i]), 0.0));
                }
            }
        }
        for b in &ctx.brackets {
            if let Some(first) = &b.first {
                for (k, v) in first.iter().enumerate() {
                    eq.push(row(0.0, pull_back(cols, k, v), 0.0));
                }
            }
            if let Some(second) = &b.second {
                for (k, [a, c]) in second.iter().enumerate() {
                    eq.push(row(0.0, pull_back(cols, k, a), 0.0));
                    eq.push(row(0.0, pull_back(cols, k + 1, c), 0.0));
                }
            }
        }
    }

    // -(p0, P) . kappa <= lambda DPsi . kappa for every generator of K
    for kappa in ctx.k_cone.generators()?.iter() {
        let a = row(-kappa[0], kappa[1..].iter().map(|v| -v).collect(), 0.0);
        ineq.push((a, dot(&ctx.dpsi, kappa)));
    }
    ineq.push((row(0.0, vec![0.0; n], 1.0), 0.0));

    // max H <= 0 at every node
    let mut dirs = sc.control_cone.unit_directions();
    if !ctx.interior {
        dirs.extend(cone_samples(sc, cfg.boundary_directions, cfg.seed));
    }
    for k in 0..z.nodes.len() {
        ineq.push((row(1.0, pull_back(cols, k, &ctx.f_nodes[k]), 0.0), 0.0));
        for u in &dirs {
            let mut v = vec![0.0; n];
            for (i, ui) in u.iter().enumerate() {
                linalg::axpy(&mut v, *ui, &ctx.g_nodes[k][i]);
            }
            ineq.push((row(0.0, pull_back(cols, k, &v), 1.0), 0.0));
        }
    }
    Ok(Constraints {
        dim,
        equalities: eq,
        inequalities: ineq,
    })
}

/// Candidates `X` from the reduced LP for one branch.
fn branch_candidates(cons: &Constraints, basis: &[Vec<f64>], lambda: f64, objectives: &[Vec<f64>]) -> (bool, Vec<Vec<f64>>) {
    let r = basis.len();
    let lift = |y: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; cons.dim];
        for (b, yi) in basis.iter().zip(y) {
            linalg::axpy(&mut x, *yi, b);
        }
        x
    };
    let reduce = |a: &[f64]| -> Vec<f64> { basis.iter().map(|b| dot(a, b)).collect() };
    let rows: Vec<Row> = cons
        .inequalities
        .iter()
        .map(|(a, b)| Row {
            a: reduce(a),
            b: lambda * b,
        })
        .collect();
    if r == 0 {
        let ok = rows.iter().all(|row| row.b >= -LP_SLACK);
        return (ok && lambda > 0.0, if ok && lambda > 0.0 { vec![vec![0.0; cons.dim]] } else { vec![] });
    }
    if lambda == 0.0 {
        let mut found = Vec::new();
        for obj in objectives {
            if let LpOutcome::Optimal { point, value } = maximize(&reduce(obj), &rows, 1.0, LP_SLACK) {
                if value > NONTRIVIAL {
                    found.push(lift(&point));
                }
            }
        }
        (!found.is_empty(), found)
    } else {
        match maximize(&vec![0.0; r], &rows, NORMAL_BOUND, LP_SLACK) {
            LpOutcome::Optimal { point, .. } => (true, vec![lift(&point)]),
            LpOutcome::Infeasible => (false, vec![]),
        }
    }
}

/// Looks for multipliers of both branches and classifies the process.
///
/// Abnormal whenever a nontrivial `lambda = 0` multiplier exists; normal when
/// only `lambda = 1` does.
pub fn search_multipliers(
    sc: &Scenario,
    z: &ExtendedProcess,
    k_cone: &PolyhedralCone,
    cfg: &SearchConfig,
) -> Result<SearchReport> {
    let ctx = CheckContext::new(sc, z, k_cone, cfg.check)?;
    let n = sc.n;
    let cols = ctx.flow.fundamental_columns();
    let cons = build_constraints(&ctx, &cols, cfg)?;
    let basis = linalg::null_space(cons.dim, &cons.equalities, NULL_TOL);

    let mut objectives = Vec::new();
    for j in 1..=n {
        objectives.push(linalg::unit(cons.dim, j));
        objectives.push(linalg::scale(&linalg::unit(cons.dim, j), -1.0));
    }
    if ctx.purely_impulsive {
        objectives.push(linalg::unit(cons.dim, 0));
        objectives.push(linalg::scale(&linalg::unit(cons.dim, 0), -1.0));
    }

    let mut notes = Vec::new();
    if !ctx.interior {
        notes.push(format!(
            "boundary case: max H over the control cone approximated with {} directions",
            cfg.boundary_directions
        ));
    }
    let mut multipliers: Vec<MultiplierSet> = Vec::new();
    let mut reports = Vec::new();
    let mut branches = Vec::new();
    for lambda in [0.0, 1.0] {
        let (lp_feasible, xs) = branch_candidates(&cons, &basis, lambda, &objectives);
        let mut verified = 0;
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for x in &xs {
            let p_terminal = x[1..=n].to_vec();
            let mut m = MultiplierSet::new(x[0], p_terminal, x[n + 1], lambda);
            let path = ctx.flow.integrate(&m.p_terminal);
            let norm = m.normalization(&path) + lambda;
            let c = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            m = m.scaled(c);
            let mut key = row(m.p0, m.p_terminal.clone(), m.pi);
            key.push(m.lambda);
            if seen.iter().any(|s| linalg::angle(s, &key) < DEDUP_ANGLE) {
                continue;
            }
            seen.push(key);
            let report = ctx.check(&m)?;
            if report.pass {
                verified += 1;
                multipliers.push(m);
                reports.push(report);
            } else {
                notes.push(format!(
                    "lambda = {lambda}: LP candidate rejected by the checker (max residual {:.3e})",
                    report.max_residual()
                ));
            }
        }
        branches.push(BranchOutcome {
            lambda,
            lp_feasible,
            candidates: seen.len(),
            verified,
        });
    }
    let abnormal = branches[0].verified > 0;
    let normal = branches[1].verified > 0;
    let unverified = branches.iter().any(|b| b.lp_feasible && b.verified == 0);
    let classification = if abnormal {
        Classification::Abnormal
    } else if unverified {
        Classification::Inconclusive
    } else if normal {
        Classification::Normal
    } else {
        Classification::NoMultipliers
    };
    Ok(SearchReport {
        classification,
        abnormal_feasible: abnormal,
        normal_feasible: normal,
        branches,
        multipliers,
        reports,
        equality_null_dim: basis.len(),
        notes,
    })
}
