//! `H(x, p, p0, pi, w0, w) = p0 w0 + p . (f(x) w0 + sum g_i(x) w_i) + pi |w|` and its
//! maximum over `C = {(w0, w) ∈ R_+ x cone : w0 + |w| = 1}`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, dot, nnls};
use crate::processes::{ControlCone, Scenario};

pub fn hamiltonian(sc: &Scenario, x: &[f64], p: &[f64], p0: f64, pi: f64, w0: f64, w: &[f64]) -> Result<f64> {
    let f = sc.f.eval(x)?;
    let mut h = p0 * w0 + w0 * dot(p, &f);
    for (g, wi) in sc.g.iter().zip(w) {
        if *wi != 0.0 {
            h += wi * dot(p, &g.eval(x)?);
        }
    }
    Ok(h + pi * linalg::norm(w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxHamiltonian {
    pub value: f64,
    pub w0: f64,
    pub w: Vec<f64>,
}

/// `max c . u` over unit vectors `u` of the cone, with a maximizer.
///
/// Outside the polar the maximizer is the normalized projection; inside the
/// polar it is a line direction (value 0) or the best extreme ray.
pub(crate) fn support_on_unit_slice(cone: &ControlCone, c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = c.len();
    if m == 0 {
        return None;
    }
    let m1 = cone.m1();
    let gens = cone.pointed_generators();
    let mut proj = c[..m1].to_vec();
    proj.extend(match cone {
        ControlCone::Orthant { .. } | ControlCone::HalfLine => c[m1..].iter().map(|x| x.max(0.0)).collect(),
        ControlCone::LinesTimesPointed { .. } => nnls(m - m1, &gens, &c[m1..]).fitted,
    });
    let pn = linalg::norm(&proj);
    if pn > 1e-15 * (1.0 + linalg::norm(c)) {
        return Some((pn, linalg::scale(&proj, 1.0 / pn)));
    }
    if m1 > 0 {
        return Some((0.0, linalg::unit(m, 0)));
    }
    cone.unit_directions()
        .into_iter()
        .map(|u| (dot(c, &u), u))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Exact maximum: `H` is affine in `w0` along `w0 + |w| = 1`, so the maximum is
/// `max(p0 + p.f, pi + sigma)` with `sigma` the support of `(p . g_i)_i` on the unit slice.
pub fn max_hamiltonian(sc: &Scenario, x: &[f64], p: &[f64], p0: f64, pi: f64) -> Result<MaxHamiltonian> {
    let a = p0 + dot(p, &sc.f.eval(x)?);
    let c = sc
        .g
        .iter()
        .map(|g| Ok(dot(p, &g.eval(x)?)))
        .collect::<Result<Vec<f64>>>()?;
    let m = c.len();
    let drift = MaxHamiltonian {
        value: a,
        w0: 1.0,
        w: vec![0.0; m],
    };
    match support_on_unit_slice(&sc.control_cone, &c) {
        Some((sigma, u)) if pi + sigma > a => Ok(MaxHamiltonian {
            value: pi + sigma,
            w0: 0.0,
            w: u,
        }),
        _ => Ok(drift),
    }
}
