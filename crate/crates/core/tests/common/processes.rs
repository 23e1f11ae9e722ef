use impulsegap::extremality::integrate_adjoint;
use impulsegap::processes::{
    cost, cost_strict, embed, integrate_extended, integrate_strict, is_feasible,
    is_feasible_strict, unembed, PiecewiseControl, Scenario,
};
use proptest::prelude::*;

use super::{check, dist, Property};

pub const ALL: &[Property] = &[
    ("embedding round trip and cost invariance", embedding_round_trip_and_cost),
    ("simplex conservation", simplex_is_conserved),
    ("adjoint superposition", adjoint_superposition),
];

const OSCILLATOR: &str = r#"{
  "name": "oscillator",
  "n": 2, "m": 2, "m1": 0, "m2": 2,
  "f": ["x2", "-x1"],
  "g": [["1", "0"], ["0", "1 + 0.5*sin(x1)"]],
  "cost": "t + x1^2 - x2",
  "control_cone": {"kind": "orthant", "dim": 2},
  "target": {"kind": "box", "lo": [0, -0.5, -1], "hi": [3, 1.5, 1.5]},
  "energy_bound": null,
  "initial_state": [0.2, -0.1],
  "integrator": {"rel_step": 0.0005}
}"#;

pub fn oscillator() -> Scenario {
    Scenario::from_json(OSCILLATOR).unwrap()
}

fn strict_control() -> impl Strategy<Value = PiecewiseControl> {
    (1usize..=5, 0.3f64..2.0)
        .prop_flat_map(|(cells, horizon)| {
            (
                prop::collection::vec(0.2f64..1.0, cells),
                prop::collection::vec(prop::collection::vec(0.0f64..3.0, 2), cells),
                Just(horizon),
            )
        })
        .prop_map(|(lengths, values, horizon)| {
            let total: f64 = lengths.iter().sum();
            let mut bp = vec![0.0];
            for l in &lengths {
                bp.push(bp.last().unwrap() + l / total * horizon);
            }
            *bp.last_mut().unwrap() = horizon;
            PiecewiseControl::new(bp, values).unwrap()
        })
}

fn extended_control() -> impl Strategy<Value = PiecewiseControl> {
    (1usize..=5, 0.3f64..2.0)
        .prop_flat_map(|(cells, horizon)| {
            (
                prop::collection::vec(0.2f64..1.0, cells),
                prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), cells),
                Just(horizon),
            )
        })
        .prop_map(|(lengths, raw, horizon)| {
            let total: f64 = lengths.iter().sum();
            let mut bp = vec![0.0];
            for l in &lengths {
                bp.push(bp.last().unwrap() + l / total * horizon);
            }
            *bp.last_mut().unwrap() = horizon;
            let values = raw
                .into_iter()
                .map(|(a, b, c)| {
                    let n = (b * b + c * c).sqrt();
                    let scale = if n > 0.0 { (1.0 - a) / n } else { 0.0 };
                    let w0 = if n > 0.0 { a } else { 1.0 };
                    vec![w0, b * scale, c * scale]
                })
                .collect();
            PiecewiseControl::new(bp, values).unwrap()
        })
}

pub fn embedding_round_trip_and_cost() -> Result<(), String> {
    check(100, 0xe3bed, strict_control(), |u| {
        let sc = oscillator();
        let p = integrate_strict(&sc, &u).unwrap();
        let z = embed(&p);
        let back = unembed(&z, 1e-9).unwrap();
        prop_assert!((back.horizon - p.horizon).abs() <= 1e-12);
        prop_assert!(dist(back.final_state(), p.final_state()) <= 1e-12);
        // integrate the embedded control in the new time and compare
        let redo = integrate_extended(&sc, &z.control()).unwrap();
        prop_assert!((redo.final_time() - p.horizon).abs() <= 1e-8);
        prop_assert!(dist(redo.final_state(), p.final_state()) <= 1e-8);
        prop_assert!((redo.final_energy() - p.final_energy()).abs() <= 1e-8);
        let (a, b) = (cost_strict(&sc, &p).unwrap(), cost(&sc, &redo).unwrap());
        prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
        prop_assert_eq!(is_feasible_strict(&sc, &p).feasible, is_feasible(&sc, &z).feasible);
        Ok(())
    })
}

pub fn simplex_is_conserved() -> Result<(), String> {
    check(100, 0x51e, extended_control(), |c| {
        let sc = oscillator();
        let z = integrate_extended(&sc, &c).unwrap();
        prop_assert!(z.simplex_residual() <= 1e-12);
        let s = z.final_time() + z.final_energy();
        prop_assert!((s - z.s_final).abs() <= 1e-8);
        Ok(())
    })
}

pub fn adjoint_superposition() -> Result<(), String> {
    let q = || prop::collection::vec(-2.0f64..2.0, 2);
    let strategy = (extended_control(), q(), q(), -3.0f64..3.0, -3.0f64..3.0);
    check(100, 0xad1, strategy, |(c, q1, q2, a, b)| {
        let sc = oscillator();
        let z = integrate_extended(&sc, &c).unwrap();
        let combo: Vec<f64> = q1.iter().zip(&q2).map(|(x, y)| a * x + b * y).collect();
        let pc = integrate_adjoint(&sc, &z, &combo).unwrap();
        let p1 = integrate_adjoint(&sc, &z, &q1).unwrap();
        let p2 = integrate_adjoint(&sc, &z, &q2).unwrap();
        for k in 0..pc.len() {
            for i in 0..2 {
                let expect = a * p1[k][i] + b * p2[k][i];
                prop_assert!((pc[k][i] - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            }
        }
        let zero = integrate_adjoint(&sc, &z, &[0.0, 0.0]).unwrap();
        prop_assert!(zero.iter().flatten().all(|v| *v == 0.0));
        Ok(())
    })
}
