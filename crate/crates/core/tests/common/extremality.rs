use impulsegap::cones::PolyhedralCone;
use impulsegap::example::{example_scenario, reference_process};
use impulsegap::extremality::{check_extremal, CheckConfig, MultiplierSet};
use proptest::prelude::*;

use super::{check, Property};

pub const ALL: &[Property] = &[("multiplier homogeneity", checker_is_positively_homogeneous)];

pub fn k_cone() -> PolyhedralCone {
    PolyhedralCone::from_generators(3, vec![vec![0.0, 1.0, 0.0]]).unwrap()
}

pub fn checker_is_positively_homogeneous() -> Result<(), String> {
    let sc = example_scenario();
    let z = reference_process(&sc).unwrap();
    let cfg = CheckConfig::from_scenario(&sc);
    let strategy = (
        -2.0f64..2.0,
        prop::collection::vec(-2.0f64..2.0, 2),
        -1.0f64..0.0,
        prop_oneof![Just(0.0), 0.0f64..2.0],
        any::<bool>(),
        0.1f64..3.0,
    );
    check(100, 0x4040, strategy, |(p0, p, pi, lambda, on_ray, a)| {
        let m = if on_ray {
            MultiplierSet::new(-a, vec![0.0, a], 0.0, 0.0)
        } else {
            MultiplierSet::new(p0, p, pi, lambda)
        };
        let base = check_extremal(&sc, &z, &m, &k_cone(), &cfg).unwrap();
        if on_ray {
            prop_assert!(base.pass);
        }
        for c in [0.5, 2.0, 10.0] {
            let r = check_extremal(&sc, &z, &m.scaled(c), &k_cone(), &cfg).unwrap();
            if base.pass {
                prop_assert!(r.pass);
            }
            for (x, y) in base.conditions.iter().zip(&r.conditions) {
                prop_assert_eq!(x.applicable, y.applicable);
                if x.id != "iii" {
                    prop_assert!((y.residual - c * x.residual).abs() <= 1e-9 * (1.0 + y.residual));
                }
            }
        }
        Ok(())
    })
}
