//! The control distance `d` and the uniform distance `d_inf` between extended processes.

use super::integrate::{ExtendedControl, ExtendedProcess};
use crate::linalg;

/// `int_0^upto |a(s) - b(s)| ds` for piecewise-constant paths (Euclidean norm
/// pointwise), exact on the merged breakpoints.
fn l1_difference(ba: &[f64], va: &[Vec<f64>], bb: &[f64], vb: &[Vec<f64>], upto: f64) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut s = 0.0;
    let mut total = 0.0;
    while s < upto && i < va.len() && j < vb.len() {
        let next = ba[i + 1].min(bb[j + 1]).min(upto);
        if next > s {
            total += (next - s) * linalg::dist(&va[i], &vb[j]);
        }
        s = next;
        if ba[i + 1] <= s {
            i += 1;
        }
        if bb[j + 1] <= s {
            j += 1;
        }
    }
    total
}

/// `d = |S1 - S2| + ||(w0, w)_1 - (w0, w)_2||_{L1[0, S1 ∧ S2]}`.
pub fn distance_d(z1: &ExtendedProcess, z2: &ExtendedProcess) -> f64 {
    distance_controls(&z1.control(), &z2.control())
}

pub fn distance_controls(a: &ExtendedControl, b: &ExtendedControl) -> f64 {
    let (sa, sb) = (a.horizon(), b.horizon());
    (sa - sb).abs() + l1_difference(&a.breakpoints, &a.values, &b.breakpoints, &b.values, sa.min(sb))
}

/// `(y0, y, beta)` at `s`, linear between nodes and constant after `S`.
fn state_at(z: &ExtendedProcess, s: f64) -> Vec<f64> {
    let pack = |k: usize| {
        let mut v = vec![z.y0[k]];
        v.extend_from_slice(&z.y[k]);
        v.push(z.beta[k]);
        v
    };
    let last = z.nodes.len() - 1;
    if s >= z.nodes[last] {
        return pack(last);
    }
    let k = z.nodes.partition_point(|&t| t <= s).saturating_sub(1).min(last - 1);
    let (a, b) = (z.nodes[k], z.nodes[k + 1]);
    let th = ((s - a) / (b - a)).clamp(0.0, 1.0);
    let (p, q) = (pack(k), pack(k + 1));
    p.iter().zip(&q).map(|(x, y)| x + th * (y - x)).collect()
}

/// `d_inf = |S1 - S2| + sup_s |(y0, y, beta)_1(s) - (y0, y, beta)_2(s)|` over the merged grid.
pub fn distance_dinf(z1: &ExtendedProcess, z2: &ExtendedProcess) -> f64 {
    let mut grid: Vec<f64> = z1.nodes.iter().chain(&z2.nodes).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let sup = grid
        .iter()
        .map(|&s| linalg::dist(&state_at(z1, s), &state_at(z2, s)))
        .fold(0.0, f64::max);
    (z1.s_final - z2.s_final).abs() + sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::PiecewiseControl;

    #[test]
    fn merged_grid_l1() {
        let a = PiecewiseControl::new(vec![0.0, 1.0, 2.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = PiecewiseControl::new(vec![0.0, 0.5, 2.5], vec![vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        // [0.5, 1): |(0.4, -0.8)|, [1, 2): |(-0.6, 0.2)|
        let expected = 0.5 + 0.5 * (0.16f64 + 0.64).sqrt() + (0.36f64 + 0.04).sqrt();
        assert!((distance_controls(&a, &b) - expected).abs() < 1e-15);
        assert!((distance_controls(&b, &a) - expected).abs() < 1e-15);
        assert_eq!(distance_controls(&a, &a), 0.0);
    }
}
