use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::expr::Expr;
use super::parser::{parse_expr, Variables};
use crate::error::{Error, Result};

/// Declared differentiability class `C^k` or `C^infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

impl Smoothness {
    pub fn at_least(&self, k: u32) -> bool {
        match self {
            Smoothness::Finite(c) => *c >= k,
            Smoothness::Infinite => true,
        }
    }

    pub fn min(self, other: Smoothness) -> Smoothness {
        match (self, other) {
            (Smoothness::Finite(a), Smoothness::Finite(b)) => Smoothness::Finite(a.min(b)),
            (Smoothness::Finite(a), _) | (_, Smoothness::Finite(a)) => Smoothness::Finite(a),
            _ => Smoothness::Infinite,
        }
    }

    /// One order lower, saturating at 0.
    pub fn lowered(self) -> Smoothness {
        match self {
            Smoothness::Finite(a) => Smoothness::Finite(a.saturating_sub(1)),
            Smoothness::Infinite => Smoothness::Infinite,
        }
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothness::Finite(k) => write!(f, "{k}"),
            Smoothness::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for Smoothness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Smoothness::Finite(k) => s.serialize_u32(*k),
            Smoothness::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Smoothness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(Smoothness::Finite(k)),
            Raw::Text(t) if t == "infinite" => Ok(Smoothness::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "smoothness must be a nonnegative integer or \"infinite\", got \"{t}\""
            ))),
        }
    }
}

/// Vector field on R^n given by one expression per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldExpr {
    n: usize,
    components: Vec<Expr>,
    smoothness: Smoothness,
}

impl VectorFieldExpr {
    pub fn new(components: Vec<Expr>, smoothness: Smoothness) -> Result<Self> {
        let n = components.len();
        for (i, c) in components.iter().enumerate() {
            if let Some(v) = c.max_var() {
                if v >= n {
                    return Err(Error::UnknownIdentifier {
                        name: format!("x{} in component {}", v + 1, i + 1),
                        position: 0,
                    });
                }
            }
        }
        Ok(Self {
            n,
            components,
            smoothness,
        })
    }

    /// Parses one expression per component over `x1..xn`, `n` = number of components.
    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<Self> {
        Self::parse_in(texts, texts.len())
    }

    /// Parses `texts` as a field on R^n (the component count must equal `n`).
    pub fn parse_in<S: AsRef<str>>(texts: &[S], n: usize) -> Result<Self> {
        if texts.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: texts.len(),
            });
        }
        let components = texts
            .iter()
            .map(|t| parse_expr(t.as_ref(), Variables::State { n }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components, Smoothness::Infinite)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            components: vec![Expr::constant(0.0); n],
            smoothness: Smoothness::Infinite,
        }
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.eval(x).map_err(|e| Error::Eval {
                    component: i + 1,
                    message: e.to_string(),
                })
            })
            .collect()
    }

    /// Like [`eval`](Self::eval) but writes into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (i, c) in self.components.iter().enumerate() {
            out[i] = c.eval(x).map_err(|e| Error::Eval {
                component: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Symbolic Jacobian rows `d comp_i / d x_j`, without the smoothness check.
    pub(crate) fn jacobian_exprs(&self) -> Vec<Vec<Expr>> {
        self.components
            .iter()
            .map(|c| (0..self.n).map(|j| c.derivative(j)).collect())
            .collect()
    }

    /// Order-`order` derivative tensor, exact symbolic differentiation.
    pub fn derivative(&self, order: u32) -> Result<DerivativeTensor> {
        if order == 0 {
            return Err(Error::InvalidArgument("derivative order must be positive".into()));
        }
        if let Smoothness::Finite(declared) = self.smoothness {
            if declared < order {
                return Err(Error::SmoothnessExceeded {
                    requested: order,
                    declared,
                });
            }
        }
        let mut layer: Vec<Expr> = self.components.clone();
        for _ in 0..order {
            layer = layer
                .iter()
                .flat_map(|e| (0..self.n).map(move |j| e.derivative(j)))
                .collect();
        }
        Ok(DerivativeTensor {
            n: self.n,
            order,
            entries: layer,
        })
    }

    pub fn jacobian(&self) -> Result<DerivativeTensor> {
        self.derivative(1)
    }

    /// Lie bracket `[self, other] = D other . self - D self . other`, built symbolically.
    ///
    /// The class of the result is one less than the smaller declared class.
    pub fn lie_bracket(&self, other: &VectorFieldExpr) -> Result<VectorFieldExpr> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let d_self = self.jacobian_exprs();
        let d_other = other.jacobian_exprs();
        let components = (0..self.n)
            .map(|i| {
                let mut acc = Expr::constant(0.0);
                for j in 0..self.n {
                    acc = Expr::add(acc, Expr::mul(d_other[i][j].clone(), self.components[j].clone()));
                    acc = Expr::sub(acc, Expr::mul(d_self[i][j].clone(), other.components[j].clone()));
                }
                acc
            })
            .collect();
        Ok(VectorFieldExpr {
            n: self.n,
            components,
            smoothness: self.smoothness.min(other.smoothness).lowered(),
        })
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &VectorFieldExpr, b: f64) -> Result<VectorFieldExpr> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| {
                Expr::add(
                    Expr::mul(Expr::constant(a), x.clone()),
                    Expr::mul(Expr::constant(b), y.clone()),
                )
            })
            .collect();
        Ok(VectorFieldExpr {
            n: self.n,
            components,
            smoothness: self.smoothness.min(other.smoothness),
        })
    }

    /// Component strings that parse back to an evaluation-equal field.
    pub fn to_strings(&self) -> Vec<String> {
        self.components.iter().map(|c| c.to_string()).collect()
    }
}

/// Derivative tensor of order `k`: entry `[i, j1, .., jk]` is
/// `d^k comp_i / dx_j1 .. dx_jk`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTensor {
    n: usize,
    order: u32,
    entries: Vec<Expr>,
}

impl DerivativeTensor {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.order as usize + 1]
    }

    /// Flat row-major values at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let block = self.n.pow(self.order);
        self.entries
            .iter()
            .enumerate()
            .map(|(idx, e)| {
                e.eval(x).map_err(|err| Error::Eval {
                    component: idx / block.max(1) + 1,
                    message: err.to_string(),
                })
            })
            .collect()
    }

    /// Jacobian rows at `x` (order 1 only).
    pub fn eval_matrix(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.order != 1 {
            return Err(Error::InvalidArgument("matrix view needs an order-1 tensor".into()));
        }
        let flat = self.eval(x)?;
        Ok(flat.chunks(self.n.max(1)).map(|c| c.to_vec()).collect())
    }
}
