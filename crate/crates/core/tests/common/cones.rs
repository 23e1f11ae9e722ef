use impulsegap::cones::{transversality_report, PolyhedralCone, SetDescriptor};
use impulsegap::linalg::nnls;
use proptest::prelude::*;

use super::{check, dist, dot, norm, Property};

pub const ALL: &[Property] = &[
    ("cone duality", transversal_xor_separated),
    ("transversality trichotomy", transversal_but_not_strong_means_trivial_intersection),
    ("projection Lipschitz bound", sphere_projection_lipschitz),
    ("squared distance gradient", squared_distance_gradient),
];

fn generators(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3i32..=3, dim), 0..=4)
        .prop_map(|gs| gs.into_iter().map(|g| g.into_iter().map(f64::from).collect()).collect())
}

fn cone_pair() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (2usize..=4).prop_flat_map(|d| (Just(d), generators(d), generators(d)))
}

/// `K1 - K2 = R^n` iff every `±e_i` is a nonnegative combination of `gens1 ∪ -gens2`.
fn difference_is_everything(dim: usize, g1: &[Vec<f64>], g2: &[Vec<f64>]) -> bool {
    let mut cols: Vec<Vec<f64>> = g1.to_vec();
    cols.extend(g2.iter().map(|g| g.iter().map(|v| -v).collect::<Vec<_>>()));
    (0..dim).all(|i| {
        [1.0, -1.0].iter().all(|s| {
            let mut e = vec![0.0; dim];
            e[i] = *s;
            nnls(dim, &cols, &e).residual <= 1e-8
        })
    })
}

pub fn transversal_xor_separated() -> Result<(), String> {
    check(256, 0xc0_2e5, cone_pair(), |(dim, g1, g2)| {
        let k1 = PolyhedralCone::from_generators(dim, g1.clone()).unwrap();
        let k2 = PolyhedralCone::from_generators(dim, g2.clone()).unwrap();
        let r = transversality_report(&k1, &k2).unwrap();
        prop_assert!(r.transversal ^ r.separating_functional.is_some());
        prop_assert_eq!(r.transversal, difference_is_everything(dim, &g1, &g2));
        if let Some(lambda) = &r.separating_functional {
            prop_assert!(norm(lambda) > 0.5);
            for g in &g1 {
                prop_assert!(dot(lambda, g) >= -1e-9);
            }
            for g in &g2 {
                prop_assert!(dot(lambda, g) <= 1e-9);
            }
        }
        Ok(())
    })
}

pub fn transversal_but_not_strong_means_trivial_intersection() -> Result<(), String> {
    let strategy = (cone_pair(), prop::collection::vec(0.0f64..1.0, 4));
    check(256, 0x7a1c, strategy, |((dim, g1, g2), weights)| {
        let k1 = PolyhedralCone::from_generators(dim, g1.clone()).unwrap();
        let k2 = PolyhedralCone::from_generators(dim, g2.clone()).unwrap();
        let r = transversality_report(&k1, &k2).unwrap();
        if r.transversal && !r.strongly_transversal {
            let mut x = vec![0.0; dim];
            for (g, w) in g1.iter().zip(&weights) {
                for (xi, gi) in x.iter_mut().zip(g) {
                    *xi += w * gi;
                }
            }
            if norm(&x) > 1e-6 {
                prop_assert!(k2.distance(&x) > 1e-9);
            }
        }
        Ok(())
    })
}

pub fn sphere_projection_lipschitz() -> Result<(), String> {
    let strategy = (
        2usize..=4,
        0.5f64..3.0,
        0.05f64..0.95,
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 2),
        prop::collection::vec(-1.0f64..1.0, 2),
        prop::collection::vec(-2.0f64..2.0, 4),
    );
    check(256, 0x11b5, strategy, |(dim, radius, frac, dirs, offsets, center)| {
        let s = frac * radius;
        let c = center[..dim].to_vec();
        let sphere = SetDescriptor::sphere(c.clone(), radius);
        let pts: Vec<Vec<f64>> = dirs
            .iter()
            .zip(&offsets)
            .filter_map(|(d, o)| {
                let d = &d[..dim];
                let n = norm(d);
                (n > 1e-3).then(|| {
                    let rho = radius + 0.999 * o * s;
                    c.iter().zip(d).map(|(ci, di)| ci + rho * di / n).collect()
                })
            })
            .collect();
        prop_assume!(pts.len() == 2);
        let (x, y) = (&pts[0], &pts[1]);
        let px = sphere.project(x).unwrap();
        let py = sphere.project(y).unwrap();
        let bound = dist(x, y) / (1.0 - s / radius) + 1e-9;
        prop_assert!(dist(px.point(), py.point()) <= bound);
        Ok(())
    })
}

pub fn squared_distance_gradient() -> Result<(), String> {
    let strategy = (0usize..4, prop::collection::vec(-2.5f64..2.5, 3));
    check(256, 0x9d2, strategy, |(which, x)| {
        let set = match which {
            0 => SetDescriptor::sphere(vec![0.2, -0.1, 0.3], 1.5),
            1 => SetDescriptor::ball(vec![0.0, 0.5, 0.0], 1.0),
            2 => SetDescriptor::interval_box(vec![-1.0, 0.0, -0.5], vec![1.0, 0.5, 0.5]),
            _ => SetDescriptor::polyhedron(
                vec![vec![1.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
                vec![1.0, 0.5, 0.2],
            )
            .unwrap(),
        };
        let d = set.distance(&x).unwrap();
        if which == 0 {
            // inside the declared prox radius
            prop_assume!(d < 1.4);
        }
        let proj = set.project(&x).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (set.distance(&a).unwrap().powi(2) - set.distance(&b).unwrap().powi(2)) / (2.0 * h);
            let exact = 2.0 * (x[i] - proj.point()[i]);
            prop_assert!((fd - exact).abs() <= 1e-5, "component {}: {} vs {}", i, fd, exact);
        }
        Ok(())
    })
}
