mod common;

use common::extremality::{self, k_cone};
use impulsegap::example::{example_scenario, gap_process, reference_process};
use impulsegap::extremality::{check_extremal, search_multipliers, CheckConfig, Classification, MultiplierSet, SearchConfig};
use impulsegap::processes::Scenario;

#[test]
fn checker_is_positively_homogeneous() {
    extremality::checker_is_positively_homogeneous().unwrap();
}

#[test]
fn search_results_pass_the_checker() {
    let sc = example_scenario();
    let z = reference_process(&sc).unwrap();
    let cfg = SearchConfig::from_scenario(&sc);
    let r = search_multipliers(&sc, &z, &k_cone(), &cfg).unwrap();
    assert_eq!(r.classification, Classification::Abnormal);
    assert!(!r.multipliers.is_empty());
    for m in &r.multipliers {
        let rep = check_extremal(&sc, &z, m, &k_cone(), &cfg.check).unwrap();
        assert!(rep.pass);
        assert!(rep.condition("v").unwrap().residual <= 1e-6);
    }
}

#[test]
fn boundary_energy_is_gated() {
    // z_r with K = r: beta(S) sits on the bound
    let r = 0.5;
    let mut file = example_scenario().file().clone();
    file.energy_bound = Some(r);
    let sc = Scenario::from_file(file).unwrap();
    let z = gap_process(&sc, r).unwrap();
    let k = sc.target.clarke_tangent_cone(&z.final_point()).unwrap();
    let m = MultiplierSet::new(-1.0, vec![0.0, 1.0], -0.3, 0.0);
    let rep = check_extremal(&sc, &z, &m, &k, &CheckConfig::from_scenario(&sc)).unwrap();
    assert!(rep.boundary_case);
    assert!(!rep.condition("vi").unwrap().applicable);
    let goh = &rep.condition("iv").unwrap().parts[1];
    assert!(!goh.applicable);
    // pi < 0 is allowed only in the boundary band
    let ii = rep.condition("ii").unwrap();
    assert_eq!(ii.parts[1].residual, 0.0);

    let interior = example_scenario();
    let z = gap_process(&interior, r).unwrap();
    let rep = check_extremal(&interior, &z, &m, &k, &CheckConfig::from_scenario(&interior)).unwrap();
    assert!(!rep.boundary_case);
    assert_eq!(rep.condition("ii").unwrap().parts[1].residual, 0.3);
}

#[test]
fn lambda_one_with_zero_adjoint_is_nontrivial() {
    // Psi = 0 and an unconstrained target: (p0, p, pi, lambda) = (0, 0, 0, 1) satisfies everything
    let mut file = example_scenario().file().clone();
    file.cost = "0".into();
    file.target = serde_json::from_str(r#"{"kind": "box", "lo": [null, null, null], "hi": [null, null, null]}"#).unwrap();
    let sc = Scenario::from_file(file).unwrap();
    let z = reference_process(&sc).unwrap();
    let k = sc.target.clarke_tangent_cone(&z.final_point()).unwrap();
    let m = MultiplierSet::new(0.0, vec![0.0, 0.0], 0.0, 1.0);
    let rep = check_extremal(&sc, &z, &m, &k, &CheckConfig::from_scenario(&sc)).unwrap();
    assert!(rep.condition("i").unwrap().pass);
    let r = search_multipliers(&sc, &z, &k, &SearchConfig::from_scenario(&sc)).unwrap();
    assert!(r.normal_feasible, "{r:#?}");
    assert!(!r.abnormal_feasible, "{r:#?}");
    assert_eq!(r.classification, Classification::Normal);
}

