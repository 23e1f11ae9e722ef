//! Formal iterated Lie brackets over letters `X1, X2, ...` and their
//! evaluation on vector fields.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fields::{Smoothness, VectorFieldExpr};

/// Longest bracket for which the depth regularity rule has been checked against known cases.
pub const VERIFIED_RULE_LENGTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FormalBracket {
    Leaf(u32),
    Node(Box<FormalBracket>, Box<FormalBracket>),
}

impl FormalBracket {
    pub fn leaf(letter: u32) -> Self {
        FormalBracket::Leaf(letter)
    }

    pub fn node(a: FormalBracket, b: FormalBracket) -> Self {
        FormalBracket::Node(Box::new(a), Box::new(b))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let src = text.as_bytes();
        let mut pos = 0;
        let b = parse_node(src, &mut pos)?;
        skip_ws(src, &mut pos);
        if pos < src.len() {
            return Err(Error::Parse {
                position: pos,
                message: format!("unexpected '{}' after bracket", src[pos] as char),
            });
        }
        Ok(b)
    }

    /// Number of leaves.
    pub fn length(&self) -> usize {
        match self {
            FormalBracket::Leaf(_) => 1,
            FormalBracket::Node(a, b) => a.length() + b.length(),
        }
    }

    /// `r = 1` on leaves and `r = 2 (r_1 + r_2)` on nodes.
    pub fn switch_number(&self) -> u64 {
        match self {
            FormalBracket::Leaf(_) => 1,
            FormalBracket::Node(a, b) => 2 * (a.switch_number() + b.switch_number()),
        }
    }

    /// Leaf letters, left to right.
    pub fn letters(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.visit_leaves(0, &mut |l, _| out.push(l));
        out
    }

    fn visit_leaves(&self, depth: u32, f: &mut impl FnMut(u32, u32)) {
        match self {
            FormalBracket::Leaf(l) => f(*l, depth),
            FormalBracket::Node(a, b) => {
                a.visit_leaves(depth + 1, f);
                b.visit_leaves(depth + 1, f);
            }
        }
    }

    /// Required class per letter for the pair to be an admissible `C^k` pair:
    /// `k` plus the deepest nesting at which the letter occurs.
    pub fn required_smoothness(&self, k: u32) -> BTreeMap<u32, u32> {
        let mut out = BTreeMap::new();
        self.visit_leaves(0, &mut |l, d| {
            let e = out.entry(l).or_insert(0);
            *e = (*e).max(d + k);
        });
        out
    }

    /// Whether the regularity rule is backed by known cases at this length.
    pub fn rule_verified(&self) -> bool {
        self.length() <= VERIFIED_RULE_LENGTH
    }

    /// Same shape with letters replaced by `map(letter)`.
    pub fn relabel(&self, map: &impl Fn(u32) -> u32) -> FormalBracket {
        match self {
            FormalBracket::Leaf(l) => FormalBracket::Leaf(map(*l)),
            FormalBracket::Node(a, b) => FormalBracket::node(a.relabel(map), b.relabel(map)),
        }
    }
}

fn skip_ws(src: &[u8], pos: &mut usize) {
    while *pos < src.len() && src[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_node(src: &[u8], pos: &mut usize) -> Result<FormalBracket> {
    skip_ws(src, pos);
    let err = |p: usize, m: &str| Error::Parse {
        position: p,
        message: m.to_string(),
    };
    match src.get(*pos) {
        Some(b'[') => {
            *pos += 1;
            let a = parse_node(src, pos)?;
            skip_ws(src, pos);
            if src.get(*pos) != Some(&b',') {
                return Err(err(*pos, "expected ','"));
            }
            *pos += 1;
            let b = parse_node(src, pos)?;
            skip_ws(src, pos);
            if src.get(*pos) != Some(&b']') {
                return Err(err(*pos, "expected ']'"));
            }
            *pos += 1;
            Ok(FormalBracket::node(a, b))
        }
        Some(b'X') => {
            *pos += 1;
            let start = *pos;
            while matches!(src.get(*pos), Some(c) if c.is_ascii_digit()) {
                *pos += 1;
            }
            let digits = std::str::from_utf8(&src[start..*pos]).expect("ascii digits");
            match digits.parse::<u32>() {
                Ok(k) if k >= 1 => Ok(FormalBracket::Leaf(k)),
                _ => Err(err(start, "expected a positive letter index")),
            }
        }
        Some(c) => Err(err(*pos, &format!("unexpected '{}'", *c as char))),
        None => Err(err(*pos, "unexpected end of input")),
    }
}

impl fmt::Display for FormalBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormalBracket::Leaf(l) => write!(f, "X{l}"),
            FormalBracket::Node(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl Serialize for FormalBracket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FormalBracket {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FormalBracket::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub fn parse_bracket(text: &str) -> Result<FormalBracket> {
    FormalBracket::parse(text)
}

/// A bracket together with the field assigned to each letter (`fields[k - 1]` for `Xk`).
#[derive(Debug, Clone)]
pub struct BracketAssignment {
    pub bracket: FormalBracket,
    pub fields: Vec<VectorFieldExpr>,
}

impl BracketAssignment {
    pub fn new(bracket: FormalBracket, fields: Vec<VectorFieldExpr>) -> Result<Self> {
        let a = Self { bracket, fields };
        a.field_for(0)?;
        for l in a.bracket.letters() {
            a.field_for(l)?;
        }
        Ok(a)
    }

    fn field_for(&self, letter: u32) -> Result<&VectorFieldExpr> {
        if letter == 0 {
            let n = self.fields.first().map(|f| f.dim());
            for f in &self.fields {
                if Some(f.dim()) != n {
                    return Err(Error::DimensionMismatch {
                        expected: n.unwrap_or(0),
                        found: f.dim(),
                    });
                }
            }
            return self.fields.first().ok_or(Error::UnassignedLetter(1));
        }
        self.fields
            .get(letter as usize - 1)
            .ok_or(Error::UnassignedLetter(letter))
    }

    /// Checks the `C^k` regularity requirement against declared classes.
    pub fn check_regularity(&self, k: u32) -> Result<()> {
        for (letter, required) in self.bracket.required_smoothness(k) {
            let field = self.field_for(letter)?;
            if let Smoothness::Finite(declared) = field.smoothness() {
                if declared < required {
                    return Err(Error::BracketRegularity {
                        letter,
                        required,
                        declared,
                    });
                }
            }
        }
        Ok(())
    }

    /// The bracket as a symbolic field, after the `C^0` regularity check.
    pub fn to_field(&self) -> Result<VectorFieldExpr> {
        self.check_regularity(0)?;
        self.build(&self.bracket)
    }

    fn build(&self, b: &FormalBracket) -> Result<VectorFieldExpr> {
        match b {
            FormalBracket::Leaf(l) => Ok(self.field_for(*l)?.clone()),
            FormalBracket::Node(x, y) => self.build(x)?.lie_bracket(&self.build(y)?),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.to_field()?.eval(x)
    }
}

pub fn eval_bracket(a: &BracketAssignment, x: &[f64]) -> Result<Vec<f64>> {
    a.eval(x)
}

/// A bracket whose leaves are control-field indices: letter `Xi` stands for `g_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GohTemplate {
    pub bracket: FormalBracket,
    /// Admissible for `k = 1` as well, so the second-order condition applies.
    pub admissible_k1: bool,
    pub rule_verified: bool,
}

impl GohTemplate {
    /// Distinct field indices used (1-based).
    pub fn field_indices(&self) -> Vec<u32> {
        let mut v = self.bracket.letters();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Symbolic field `B(h)` with `h` drawn from `g` (0-based slice of all control fields).
    pub fn field(&self, g: &[VectorFieldExpr]) -> Result<VectorFieldExpr> {
        build_assigned(&self.bracket, g)
    }
}

fn build_assigned(b: &FormalBracket, g: &[VectorFieldExpr]) -> Result<VectorFieldExpr> {
    match b {
        FormalBracket::Leaf(i) => g
            .get(*i as usize - 1)
            .cloned()
            .ok_or(Error::UnassignedLetter(*i)),
        FormalBracket::Node(x, y) => build_assigned(x, g)?.lie_bracket(&build_assigned(y, g)?),
    }
}

/// All shapes with `len` leaves, leaves labelled `1..=m`.
fn assigned_trees(len: usize, m: u32) -> Vec<FormalBracket> {
    if len == 1 {
        return (1..=m).map(FormalBracket::Leaf).collect();
    }
    let mut out = Vec::new();
    for left in 1..len {
        let ls = assigned_trees(left, m);
        let rs = assigned_trees(len - left, m);
        for l in &ls {
            for r in &rs {
                out.push(FormalBracket::node(l.clone(), r.clone()));
            }
        }
    }
    out
}

/// Brackets of length `2..=max_length` with leaves assigned among
/// `g_1..g_{m1}`, kept when admissible as `C^k` pairs under the classes
/// declared by `g`. Identical assigned trees appear once.
///
/// Length-1 brackets are the Goh relations themselves and are not listed.
pub fn enumerate_goh_brackets(
    m1: usize,
    max_length: usize,
    k: u32,
    g: &[VectorFieldExpr],
) -> Result<Vec<GohTemplate>> {
    if max_length == 0 {
        return Err(Error::InvalidArgument("max_length must be at least 1".into()));
    }
    if g.len() < m1 {
        return Err(Error::UnassignedLetter(g.len() as u32 + 1));
    }
    let admissible = |b: &FormalBracket, k: u32| {
        b.required_smoothness(0).iter().all(|(letter, _)| {
            let required = b.required_smoothness(k)[letter];
            g[*letter as usize - 1].smoothness().at_least(required)
        })
    };
    let mut out = Vec::new();
    for len in 2..=max_length {
        for b in assigned_trees(len, m1 as u32) {
            if admissible(&b, k) {
                out.push(GohTemplate {
                    admissible_k1: admissible(&b, k + 1),
                    rule_verified: b.rule_verified(),
                    bracket: b,
                });
            }
        }
    }
    Ok(out)
}
