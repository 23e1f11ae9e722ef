//! Graph-completion embedding `sigma(t) = t + v(t)` and its inverse.

use super::integrate::{ExtendedProcess, StrictProcess};
use crate::error::{Error, Result};
use crate::linalg;

/// Extended process of a strict-sense one: nodes transported through `sigma`,
/// `w0 = 1 / (1 + |u|)`, `w = u / (1 + |u|)`.
pub fn embed(p: &StrictProcess) -> ExtendedProcess {
    let n_int = p.u.len();
    let mut nodes = Vec::with_capacity(n_int + 1);
    let mut w0 = Vec::with_capacity(n_int);
    let mut w = Vec::with_capacity(n_int);
    nodes.push(0.0);
    for (k, u) in p.u.iter().enumerate() {
        let factor = 1.0 + linalg::norm(u);
        let dt = p.nodes[k + 1] - p.nodes[k];
        nodes.push(nodes[k] + dt * factor);
        w0.push(1.0 / factor);
        w.push(linalg::scale(u, 1.0 / factor));
    }
    ExtendedProcess {
        s_final: *nodes.last().expect("nonempty grid"),
        nodes,
        w0,
        w,
        y0: p.nodes.clone(),
        y: p.x.clone(),
        beta: p.v.clone(),
    }
}

/// Strict-sense process through the time change `t = y0(s)`; every interval
/// must have `w0 >= w0_min`.
pub fn unembed(z: &ExtendedProcess, w0_min: f64) -> Result<StrictProcess> {
    for (cell, a) in z.w0.iter().enumerate() {
        if !(*a >= w0_min) {
            return Err(Error::NotEmbedded { cell, w0: *a });
        }
    }
    let u = z
        .w0
        .iter()
        .zip(&z.w)
        .map(|(a, w)| linalg::scale(w, 1.0 / a))
        .collect();
    Ok(StrictProcess {
        horizon: z.final_time(),
        nodes: z.y0.clone(),
        u,
        x: z.y.clone(),
        v: z.beta.clone(),
    })
}
