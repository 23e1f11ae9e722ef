//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | "+" unary | power ;
//! power    = primary [ "^" exponent ] ;
//! exponent = [ "+" | "-" ] integer | "(" [ "+" | "-" ] integer ")" ;
//! primary  = number | "pi" | variable | func "(" expr ")" | "(" expr ")" ;
//! func     = "sin" | "cos" | "exp" ;
//! variable = "x" digit { digit } | "t" ;
//! ```
//!
//! Error positions are 0-based byte offsets into the input.

use super::expr::Expr;
use crate::error::{Error, Result};

/// How identifiers map to variable slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variables {
    /// `x1..xn` map to slots `0..n`; `t` is rejected.
    State { n: usize },
    /// `t` is slot 0 and `xk` is slot `k`.
    TimeState { n: usize },
}

pub fn parse_expr(text: &str, vars: Variables) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: Variables,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat(b'/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let k = self.exponent()?;
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.eat(b'(');
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let k: i32 = digits.parse().map_err(|_| Error::Parse {
            position: start,
            message: "exponent out of range".into(),
        })?;
        if paren {
            self.expect(b')')?;
        }
        Ok(if neg { -k } else { k })
    }

    fn primary(&mut self) -> Result<Expr> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
            return self.identifier(name, start);
        }
        Err(self.error(format!("unexpected '{}'", c as char)))
    }

    fn identifier(&mut self, name: &str, start: usize) -> Result<Expr> {
        let unknown = || Error::UnknownIdentifier {
            name: name.to_string(),
            position: start,
        };
        match name {
            "pi" => return Ok(Expr::constant(std::f64::consts::PI)),
            "sin" | "cos" | "exp" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(match name {
                    "sin" => Expr::sin(arg),
                    "cos" => Expr::cos(arg),
                    _ => Expr::exp(arg),
                });
            }
            "t" => {
                return match self.vars {
                    Variables::TimeState { .. } => Ok(Expr::var(0)),
                    Variables::State { .. } => Err(unknown()),
                }
            }
            _ => {}
        }
        let Some(idx) = name.strip_prefix('x') else {
            return Err(unknown());
        };
        if idx.is_empty() || idx.starts_with('0') || !idx.bytes().all(|b| b.is_ascii_digit()) || idx.len() > 2 {
            return Err(unknown());
        }
        let k: usize = idx.parse().map_err(|_| unknown())?;
        match self.vars {
            Variables::State { n } if k <= n => Ok(Expr::var(k - 1)),
            Variables::TimeState { n } if k <= n => Ok(Expr::var(k)),
            _ => Err(unknown()),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse::<f64>().map(Expr::constant).map_err(|_| Error::Parse {
            position: start,
            message: format!("malformed number '{text}'"),
        })
    }
}
