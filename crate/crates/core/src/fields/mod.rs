//! Closed-form vector fields: expressions, parsing and exact derivatives.

pub mod expr;
pub mod field;
pub mod parser;

pub use expr::{EvalFailure, Expr};
pub use field::{DerivativeTensor, Smoothness, VectorFieldExpr};
pub use parser::{parse_expr, Variables};

/// Parses a vector field from one expression string per component.
pub fn parse_field<S: AsRef<str>>(texts: &[S]) -> crate::Result<VectorFieldExpr> {
    VectorFieldExpr::parse(texts)
}
