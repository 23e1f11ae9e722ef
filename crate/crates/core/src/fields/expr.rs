//! Expression trees with exact symbolic differentiation.

use std::fmt;
use std::sync::Arc;

/// Scalar expression over indexed variables.
///
/// Variable indices are positions in the evaluation slice. For vector fields
/// `x1..xn` map to `0..n`; cost expressions put `t` at 0 and `xk` at `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
}

/// Why an expression could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalFailure {
    DivisionByZero,
    NonFinite,
    MissingVariable(usize),
}

impl fmt::Display for EvalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalFailure::DivisionByZero => write!(f, "division by zero"),
            EvalFailure::NonFinite => write!(f, "result is not finite"),
            EvalFailure::MissingVariable(i) => write!(f, "variable index {i} out of range"),
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => (*inner).clone(),
            a => Expr::Neg(Arc::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Const(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::Const(x / y),
            (Some(x), _) if x == 0.0 && !b.is_const(0.0) => Expr::Const(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match (a.as_const(), k) {
            (_, 0) => Expr::Const(1.0),
            (_, 1) => a,
            (Some(x), k) if x != 0.0 || k > 0 => Expr::Const(x.powi(k)),
            _ => Expr::Pow(Arc::new(a), k),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::Const(c.sin()),
            None => Expr::Sin(Arc::new(a)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::Const(c.cos()),
            None => Expr::Cos(Arc::new(a)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::Const(c.exp()),
            None => Expr::Exp(Arc::new(a)),
        }
    }

    pub fn eval(&self, vars: &[f64]) -> Result<f64, EvalFailure> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *vars.get(*i).ok_or(EvalFailure::MissingVariable(*i))?,
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Expr::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Expr::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Expr::Div(a, b) => {
                let d = b.eval(vars)?;
                if d == 0.0 {
                    return Err(EvalFailure::DivisionByZero);
                }
                a.eval(vars)? / d
            }
            Expr::Pow(a, k) => {
                let base = a.eval(vars)?;
                if base == 0.0 && *k < 0 {
                    return Err(EvalFailure::DivisionByZero);
                }
                base.powi(*k)
            }
            Expr::Sin(a) => a.eval(vars)?.sin(),
            Expr::Cos(a) => a.eval(vars)?.cos(),
            Expr::Exp(a) => a.eval(vars)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalFailure::NonFinite)
        }
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(j) => Expr::Const(if *j == i { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.derivative(i)),
            Expr::Add(a, b) => Expr::add(a.derivative(i), b.derivative(i)),
            Expr::Sub(a, b) => Expr::sub(a.derivative(i), b.derivative(i)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(i), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative(i)),
            ),
            Expr::Div(a, b) => {
                let num = Expr::sub(
                    Expr::mul(a.derivative(i), (**b).clone()),
                    Expr::mul((**a).clone(), b.derivative(i)),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Expr::Pow(a, k) => Expr::mul(
                Expr::mul(Expr::Const(*k as f64), Expr::pow((**a).clone(), k - 1)),
                a.derivative(i),
            ),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.derivative(i)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.derivative(i))),
            Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), a.derivative(i)),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Printer that names variables; `time_first` prints index 0 as `t`.
    pub fn display(&self, time_first: bool) -> ExprDisplay<'_> {
        ExprDisplay { expr: self, time_first }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    time_first: bool,
}

impl ExprDisplay<'_> {
    fn sub<'b>(&self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            time_first: self.time_first,
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => {
                if *c == std::f64::consts::PI {
                    write!(f, "pi")
                } else if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(i) => {
                if self.time_first {
                    if *i == 0 {
                        write!(f, "t")
                    } else {
                        write!(f, "x{i}")
                    }
                } else {
                    write!(f, "x{}", i + 1)
                }
            }
            Expr::Neg(a) => write!(f, "(-{})", self.sub(a)),
            Expr::Add(a, b) => write!(f, "({} + {})", self.sub(a), self.sub(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", self.sub(a), self.sub(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", self.sub(a), self.sub(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", self.sub(a), self.sub(b)),
            Expr::Pow(a, k) => {
                if *k < 0 {
                    write!(f, "{}^({k})", self.sub(a))
                } else {
                    write!(f, "{}^{k}", self.sub(a))
                }
            }
            Expr::Sin(a) => write!(f, "sin({})", self.sub(a)),
            Expr::Cos(a) => write!(f, "cos({})", self.sub(a)),
            Expr::Exp(a) => write!(f, "exp({})", self.sub(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(false).fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_keeps_trees_small() {
        let x = Expr::var(0);
        let e = Expr::add(Expr::mul(Expr::constant(0.0), x.clone()), Expr::mul(Expr::constant(1.0), x.clone()));
        assert_eq!(e, x);
        assert_eq!(Expr::pow(Expr::constant(2.0), 3), Expr::Const(8.0));
        assert_eq!(Expr::derivative(&Expr::constant(3.0), 0), Expr::Const(0.0));
    }

    #[test]
    fn power_rule_and_chain_rule() {
        // d/dx sin(x^2) = 2x cos(x^2)
        let e = Expr::sin(Expr::pow(Expr::var(0), 2));
        let d = e.derivative(0);
        let x = 0.7f64;
        assert!((d.eval(&[x]).unwrap() - 2.0 * x * (x * x).cos()).abs() < 1e-14);
        assert_eq!(e.derivative(1), Expr::Const(0.0));
    }

    #[test]
    fn eval_failures() {
        let e = Expr::div(Expr::constant(1.0), Expr::var(0));
        assert_eq!(e.eval(&[0.0]), Err(EvalFailure::DivisionByZero));
        assert_eq!(Expr::exp(Expr::var(0)).eval(&[1e6]), Err(EvalFailure::NonFinite));
        assert_eq!(Expr::var(3).eval(&[0.0]), Err(EvalFailure::MissingVariable(3)));
    }
}
