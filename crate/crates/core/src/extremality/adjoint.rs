//! Backward RK4 for `dp/ds = -p . [Df(y) w0 + sum Dg_i(y) w_i]` along a process.

use crate::error::Result;
use crate::fields::DerivativeTensor;
use crate::processes::{ExtendedProcess, Scenario};

type Mat = Vec<Vec<f64>>;

/// Linearized dynamics sampled at the start, midpoint and end of every interval.
#[derive(Debug, Clone)]
pub struct AdjointFlow {
    n: usize,
    steps: Vec<(f64, [Mat; 3])>,
}

fn combined_jacobian(df: &DerivativeTensor, dg: &[DerivativeTensor], y: &[f64], w0: f64, w: &[f64]) -> Result<Mat> {
    let mut a = df.eval_matrix(y)?;
    a.iter_mut().flatten().for_each(|v| *v *= w0);
    for (d, wi) in dg.iter().zip(w) {
        if *wi != 0.0 {
            let m = d.eval_matrix(y)?;
            for (row, mrow) in a.iter_mut().zip(&m) {
                for (v, mv) in row.iter_mut().zip(mrow) {
                    *v += wi * mv;
                }
            }
        }
    }
    Ok(a)
}

/// `p . A` (row vector times matrix).
fn left_mul(p: &[f64], a: &Mat) -> Vec<f64> {
    let n = p.len();
    (0..n).map(|j| (0..n).map(|i| p[i] * a[i][j]).sum()).collect()
}

impl AdjointFlow {
    pub fn new(sc: &Scenario, z: &ExtendedProcess) -> Result<Self> {
        let n = sc.n;
        let df = sc.f.jacobian()?;
        let dg = sc.g.iter().map(|g| g.jacobian()).collect::<Result<Vec<_>>>()?;
        let mut tmp = vec![0.0; n];
        let mut steps = Vec::with_capacity(z.intervals());
        for k in 0..z.intervals() {
            let h = z.nodes[k + 1] - z.nodes[k];
            let (w0, w) = (z.w0[k], &z.w[k]);
            let (ya, yb) = (&z.y[k], &z.y[k + 1]);
            let mut fa = vec![0.0; n];
            let mut fb = vec![0.0; n];
            sc.dynamics(ya, w0, w, &mut fa, &mut tmp)?;
            sc.dynamics(yb, w0, w, &mut fb, &mut tmp)?;
            // cubic Hermite midpoint
            let ym: Vec<f64> = (0..n)
                .map(|i| 0.5 * (ya[i] + yb[i]) + h / 8.0 * (fa[i] - fb[i]))
                .collect();
            let mats = [
                combined_jacobian(&df, &dg, ya, w0, w)?,
                combined_jacobian(&df, &dg, &ym, w0, w)?,
                combined_jacobian(&df, &dg, yb, w0, w)?,
            ];
            steps.push((h, mats));
        }
        Ok(Self { n, steps })
    }

    /// Adjoint values at every node, ending at `p_terminal`.
    pub fn integrate(&self, p_terminal: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut out = vec![Vec::new(); self.steps.len() + 1];
        let mut p = p_terminal.to_vec();
        out[self.steps.len()] = p.clone();
        for (k, (h, [a0, am, a1])) in self.steps.iter().enumerate().rev() {
            let h = *h;
            // backward time: dp/dtau = p . A
            let k1 = left_mul(&p, a1);
            let s2: Vec<f64> = (0..n).map(|i| p[i] + 0.5 * h * k1[i]).collect();
            let k2 = left_mul(&s2, am);
            let s3: Vec<f64> = (0..n).map(|i| p[i] + 0.5 * h * k2[i]).collect();
            let k3 = left_mul(&s3, am);
            let s4: Vec<f64> = (0..n).map(|i| p[i] + h * k3[i]).collect();
            let k4 = left_mul(&s4, a0);
            p = (0..n)
                .map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
            out[k] = p.clone();
        }
        out
    }

    /// Columns `Phi e_j`: node-wise adjoint for each unit terminal vector.
    pub fn fundamental_columns(&self) -> Vec<Vec<Vec<f64>>> {
        use rayon::prelude::*;
        (0..self.n)
            .into_par_iter()
            .map(|j| self.integrate(&crate::linalg::unit(self.n, j)))
            .collect()
    }
}

pub fn integrate_adjoint(sc: &Scenario, z: &ExtendedProcess, p_terminal: &[f64]) -> Result<Vec<Vec<f64>>> {
    if p_terminal.len() != sc.n {
        return Err(crate::Error::DimensionMismatch {
            expected: sc.n,
            found: p_terminal.len(),
        });
    }
    Ok(AdjointFlow::new(sc, z)?.integrate(p_terminal))
}
