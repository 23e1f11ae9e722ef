use impulsegap::brackets::FormalBracket;
use impulsegap::fields::{parse_expr, Variables, VectorFieldExpr};
use proptest::prelude::*;

use super::{check, Property};

pub const ALL: &[Property] = &[
    ("jacobian vs central differences", jacobian_matches_central_differences),
    ("linearity of differentiation", differentiation_is_linear),
    ("print/parse round trip", print_parse_round_trip),
    ("bracket antisymmetry", bracket_antisymmetry),
    ("bracket vs finite differences", bracket_matches_finite_differences),
    ("Jacobi identity", jacobi_identity),
    ("switch-number parity", switch_number_parity),
];

const N: usize = 3;

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (1usize..=N).prop_map(|i| format!("x{i}")),
        (-3i32..=3).prop_map(|c| format!("{c}")),
        (1i32..=9).prop_map(|c| format!("0.{c}")),
    ]
}

/// Smooth, bounded expressions on `[-1, 1]^3`.
pub fn expr_text() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (2 + ({b})^2))")),
            (inner.clone(), 0i32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(0.1*{a})")),
            inner.prop_map(|a| format!("-{a}")),
        ]
    })
}

/// Polynomial components of low degree.
fn poly_text() -> impl Strategy<Value = String> {
    prop::collection::vec((-2i32..=2, 0u32..=2, 0u32..=2, 0u32..=1), 1..=3).prop_map(|terms| {
        terms
            .iter()
            .map(|(c, a, b, d)| format!("{c}*x1^{a}*x2^{b}*x3^{d}"))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

fn field_texts() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(expr_text(), N)
}

fn field(texts: &[String]) -> VectorFieldExpr {
    VectorFieldExpr::parse(texts).unwrap()
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, N)
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

fn fd_jacobian(f: &VectorFieldExpr, x: &[f64]) -> Vec<Vec<f64>> {
    let h = 1e-5;
    let mut m = vec![vec![0.0; N]; N];
    for j in 0..N {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[j] += h;
        b[j] -= h;
        let (fa, fb) = (f.eval(&a).unwrap(), f.eval(&b).unwrap());
        for i in 0..N {
            m[i][j] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    m
}

/// `Dh2 h1 - Dh1 h2` with central-difference Jacobians.
fn fd_bracket(h1: &VectorFieldExpr, h2: &VectorFieldExpr, x: &[f64]) -> Vec<f64> {
    let (j1, j2) = (fd_jacobian(h1, x), fd_jacobian(h2, x));
    let (v1, v2) = (h1.eval(x).unwrap(), h2.eval(x).unwrap());
    (0..N)
        .map(|i| (0..N).map(|j| j2[i][j] * v1[j] - j1[i][j] * v2[j]).sum())
        .collect()
}

pub fn jacobian_matches_central_differences() -> Result<(), String> {
    check(128, 0xf1e1d, (field_texts(), prop::collection::vec(point(), 50)), |(texts, pts)| {
        let f = field(&texts);
        let jac = f.jacobian().unwrap();
        for x in &pts {
            let exact = jac.eval_matrix(x).unwrap();
            let fd = fd_jacobian(&f, x);
            for i in 0..N {
                for j in 0..N {
                    prop_assert!(close(exact[i][j], fd[i][j], 1e-6, 1e-9), "{} vs {}", exact[i][j], fd[i][j]);
                }
            }
        }
        Ok(())
    })
}

pub fn differentiation_is_linear() -> Result<(), String> {
    let strategy = (field_texts(), field_texts(), -2.0f64..2.0, -2.0f64..2.0, point());
    check(128, 0x11ea, strategy, |(ta, tb, a, b, x)| {
        let (fa, fb) = (field(&ta), field(&tb));
        let combo = fa.linear_combination(a, &fb, b).unwrap();
        let jc = combo.jacobian().unwrap().eval_matrix(&x).unwrap();
        let ja = fa.jacobian().unwrap().eval_matrix(&x).unwrap();
        let jb = fb.jacobian().unwrap().eval_matrix(&x).unwrap();
        for i in 0..N {
            for j in 0..N {
                let expect = a * ja[i][j] + b * jb[i][j];
                prop_assert!(close(jc[i][j], expect, 1e-12, 1e-12), "{} vs {}", jc[i][j], expect);
            }
        }
        Ok(())
    })
}

pub fn print_parse_round_trip() -> Result<(), String> {
    check(128, 0x9a95e, (expr_text(), prop::collection::vec(point(), 100)), |(text, pts)| {
        let e = parse_expr(&text, Variables::State { n: N }).unwrap();
        let printed = e.display(false).to_string();
        let back = parse_expr(&printed, Variables::State { n: N }).unwrap();
        for x in &pts {
            let (u, v) = (e.eval(x).unwrap(), back.eval(x).unwrap());
            prop_assert!(close(u, v, 1e-12, 1e-12), "{} -> {}: {} vs {}", text, printed, u, v);
        }
        Ok(())
    })
}

pub fn bracket_antisymmetry() -> Result<(), String> {
    check(128, 0xa5, (field_texts(), field_texts(), point()), |(t1, t2, x)| {
        let (h1, h2) = (field(&t1), field(&t2));
        let a = h1.lie_bracket(&h2).unwrap().eval(&x).unwrap();
        let b = h2.lie_bracket(&h1).unwrap().eval(&x).unwrap();
        for i in 0..N {
            prop_assert!((a[i] + b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()));
        }
        Ok(())
    })
}

pub fn bracket_matches_finite_differences() -> Result<(), String> {
    check(128, 0xfdb, (field_texts(), field_texts(), point()), |(t1, t2, x)| {
        let (h1, h2) = (field(&t1), field(&t2));
        let exact = h1.lie_bracket(&h2).unwrap().eval(&x).unwrap();
        let fd = fd_bracket(&h1, &h2, &x);
        for i in 0..N {
            prop_assert!(close(exact[i], fd[i], 1e-5, 1e-5), "{} vs {}", exact[i], fd[i]);
        }
        Ok(())
    })
}

pub fn jacobi_identity() -> Result<(), String> {
    let poly_field = || prop::collection::vec(poly_text(), N);
    let strategy = (poly_field(), poly_field(), poly_field(), prop::collection::vec(point(), 50));
    check(100, 0x7ac0b1, strategy, |(t1, t2, t3, pts)| {
        let (h1, h2, h3) = (field(&t1), field(&t2), field(&t3));
        let a = h1.lie_bracket(&h2).unwrap().lie_bracket(&h3).unwrap();
        let b = h2.lie_bracket(&h3).unwrap().lie_bracket(&h1).unwrap();
        let c = h3.lie_bracket(&h1).unwrap().lie_bracket(&h2).unwrap();
        for x in &pts {
            let (va, vb, vc) = (a.eval(x).unwrap(), b.eval(x).unwrap(), c.eval(x).unwrap());
            for i in 0..N {
                prop_assert!((va[i] + vb[i] + vc[i]).abs() <= 1e-9);
            }
        }
        Ok(())
    })
}

fn bracket_text() -> impl Strategy<Value = String> {
    (1u32..=9)
        .prop_map(|i| format!("X{i}"))
        .prop_recursive(4, 16, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| format!("[{a},{b}]")))
}

/// Independent recursion on the text: `r = 1` for a letter, `2 (r1 + r2)` for a pair.
fn switch_oracle(text: &str) -> u64 {
    let mut stack: Vec<u64> = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            'X' => {
                while chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                    chars.next();
                }
                stack.push(1);
            }
            ']' => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(2 * (a + b));
            }
            _ => {}
        }
    }
    stack.pop().unwrap()
}

pub fn switch_number_parity() -> Result<(), String> {
    check(256, 0x5e1c, bracket_text(), |text| {
        let b = FormalBracket::parse(&text).unwrap();
        let r = b.switch_number();
        prop_assert_eq!(r, switch_oracle(&text));
        if let FormalBracket::Node(..) = b {
            prop_assert!(r % 2 == 0 && r >= 4, "{}: {}", text, r);
        } else {
            prop_assert_eq!(r, 1);
        }
        prop_assert_eq!(FormalBracket::parse(&b.to_string()).unwrap(), b);
        Ok(())
    })
}
