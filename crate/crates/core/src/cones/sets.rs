//! The closed catalog of target sets with distance, projection and closed-form cones.

use serde::{Deserialize, Serialize};

use super::polyhedral::{PolyhedralCone, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, nnls};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    /// `{x : a_i . x <= b_i}`; no rows means the whole space.
    ConvexPolyhedron {
        dim: usize,
        #[serde(default)]
        a: Vec<Vec<f64>>,
        #[serde(default)]
        b: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    /// `null` bounds are infinite.
    Box {
        lo: Vec<Option<f64>>,
        hi: Vec<Option<f64>>,
    },
    Singleton {
        point: Vec<f64>,
    },
    Product {
        parts: Vec<SetDescriptor>,
    },
}

/// Prox-regularity radius: `Infinite` for convex sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProxRadius {
    Finite(f64),
    Infinite,
}

impl ProxRadius {
    pub fn exceeds(&self, d: f64) -> bool {
        match self {
            ProxRadius::Infinite => true,
            ProxRadius::Finite(r) => d < *r,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            ProxRadius::Infinite => true,
            ProxRadius::Finite(r) => *r > 0.0,
        }
    }

    fn min(self, other: ProxRadius) -> ProxRadius {
        match (self, other) {
            (ProxRadius::Infinite, o) | (o, ProxRadius::Infinite) => o,
            (ProxRadius::Finite(a), ProxRadius::Finite(b)) => ProxRadius::Finite(a.min(b)),
        }
    }
}

impl Serialize for ProxRadius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ProxRadius::Finite(r) => s.serialize_f64(*r),
            ProxRadius::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for ProxRadius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) if r >= 0.0 => Ok(ProxRadius::Finite(r)),
            Raw::Num(r) => Err(serde::de::Error::custom(format!("negative prox radius {r}"))),
            Raw::Text(t) if t == "infinite" => Ok(ProxRadius::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad prox radius `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDescriptor {
    #[serde(flatten)]
    pub kind: SetKind,
    /// Overrides the radius implied by the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prox_radius: Option<ProxRadius>,
}

/// Result of a metric projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    /// Nearest points; a single entry unless `multivalued`.
    pub points: Vec<Vec<f64>>,
    /// Set when the projection is not a single point (e.g. the center of a sphere);
    /// `points` then holds representatives only.
    pub multivalued: bool,
}

impl Projection {
    fn single(p: Vec<f64>) -> Self {
        Self {
            points: vec![p],
            multivalued: false,
        }
    }

    pub fn point(&self) -> &[f64] {
        &self.points[0]
    }
}

impl From<SetKind> for SetDescriptor {
    fn from(kind: SetKind) -> Self {
        SetDescriptor {
            kind,
            prox_radius: None,
        }
    }
}

impl SetDescriptor {
    pub fn polyhedron(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let dim = a.first().map(|r| r.len()).ok_or_else(|| {
            Error::InvalidArgument("polyhedron needs at least one row; use whole_space".into())
        })?;
        let s: Self = SetKind::ConvexPolyhedron { dim, a, b }.into();
        s.validate()?;
        Ok(s)
    }

    pub fn whole_space(dim: usize) -> Self {
        SetKind::ConvexPolyhedron {
            dim,
            a: vec![],
            b: vec![],
        }
        .into()
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        SetKind::Ball { center, radius }.into()
    }

    pub fn sphere(center: Vec<f64>, radius: f64) -> Self {
        SetKind::Sphere { center, radius }.into()
    }

    pub fn interval_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        SetKind::Box {
            lo: lo.into_iter().map(Some).collect(),
            hi: hi.into_iter().map(Some).collect(),
        }
        .into()
    }

    pub fn singleton(point: Vec<f64>) -> Self {
        SetKind::Singleton { point }.into()
    }

    pub fn product(parts: Vec<SetDescriptor>) -> Self {
        SetKind::Product { parts }.into()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: SetDescriptor = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Structural checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SetKind::ConvexPolyhedron { dim, a, b } => {
                if a.len() != b.len() {
                    return Err(Error::Format(format!(
                        "polyhedron has {} rows but {} offsets",
                        a.len(),
                        b.len()
                    )));
                }
                for r in a {
                    if r.len() != *dim {
                        return Err(Error::DimensionMismatch {
                            expected: *dim,
                            found: r.len(),
                        });
                    }
                }
            }
            SetKind::Ball { center, radius } | SetKind::Sphere { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return Err(Error::Format("ball/sphere needs a center and a positive radius".into()));
                }
            }
            SetKind::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::Format("box bounds must have equal nonzero length".into()));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if let (Some(l), Some(h)) = (l, h) {
                        if l > h {
                            return Err(Error::Format(format!("empty box interval [{l}, {h}]")));
                        }
                    }
                }
            }
            SetKind::Singleton { point } => {
                if point.is_empty() {
                    return Err(Error::Format("singleton needs a point".into()));
                }
            }
            SetKind::Product { parts } => {
                if parts.is_empty() {
                    return Err(Error::Format("product needs at least one part".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::ConvexPolyhedron { dim, .. } => *dim,
            SetKind::Ball { center, .. } | SetKind::Sphere { center, .. } => center.len(),
            SetKind::Box { lo, .. } => lo.len(),
            SetKind::Singleton { point } => point.len(),
            SetKind::Product { parts } => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            SetKind::Sphere { .. } => false,
            SetKind::Product { parts } => parts.iter().all(|p| p.is_convex()),
            _ => true,
        }
    }

    /// Declared r-prox-regularity radius: infinite for convex kinds, the radius for spheres,
    /// the minimum over parts for products, unless overridden.
    pub fn declared_prox_radius(&self) -> ProxRadius {
        if let Some(r) = self.prox_radius {
            return r;
        }
        match &self.kind {
            SetKind::Sphere { radius, .. } => ProxRadius::Finite(*radius),
            SetKind::Product { parts } => parts
                .iter()
                .map(|p| p.declared_prox_radius())
                .fold(ProxRadius::Infinite, ProxRadius::min),
            _ => ProxRadius::Infinite,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Metric projection `Π_S(x)`.
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        self.check_dim(x)?;
        Ok(self.project_unchecked(x))
    }

    fn project_unchecked(&self, x: &[f64]) -> Projection {
        match &self.kind {
            SetKind::ConvexPolyhedron { a, b, .. } => Projection::single(project_polyhedron(a, b, x)),
            SetKind::Ball { center, radius } => {
                let d = linalg::sub(x, center);
                let n = linalg::norm(&d);
                if n <= *radius {
                    Projection::single(x.to_vec())
                } else {
                    Projection::single(linalg::add(center, &linalg::scale(&d, radius / n)))
                }
            }
            SetKind::Sphere { center, radius } => {
                let d = linalg::sub(x, center);
                let n = linalg::norm(&d);
                if n == 0.0 {
                    // every sphere point is nearest; report the axis points as representatives
                    let dim = center.len();
                    let points = (0..dim)
                        .flat_map(|i| {
                            [1.0, -1.0].map(|s| {
                                let mut p = center.clone();
                                p[i] += s * radius;
                                p
                            })
                        })
                        .collect();
                    Projection {
                        points,
                        multivalued: true,
                    }
                } else {
                    Projection::single(linalg::add(center, &linalg::scale(&d, radius / n)))
                }
            }
            SetKind::Box { lo, hi } => Projection::single(
                x.iter()
                    .enumerate()
                    .map(|(i, &xi)| {
                        let mut v = xi;
                        if let Some(l) = lo[i] {
                            v = v.max(l);
                        }
                        if let Some(h) = hi[i] {
                            v = v.min(h);
                        }
                        v
                    })
                    .collect(),
            ),
            SetKind::Singleton { point } => Projection::single(point.clone()),
            SetKind::Product { parts } => {
                let mut offset = 0;
                let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
                let mut multivalued = false;
                for p in parts {
                    let d = p.dim();
                    let proj = p.project_unchecked(&x[offset..offset + d]);
                    multivalued |= proj.multivalued;
                    let mut next = Vec::new();
                    for c in &combos {
                        for q in &proj.points {
                            let mut v = c.clone();
                            v.extend_from_slice(q);
                            next.push(v);
                        }
                    }
                    next.truncate(64);
                    combos = next;
                    offset += d;
                }
                Projection {
                    points: combos,
                    multivalued,
                }
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SetKind::Sphere { center, radius } => (linalg::dist(x, center) - radius).abs(),
            SetKind::Product { parts } => {
                let mut offset = 0;
                let mut sq = 0.0;
                for p in parts {
                    let d = p.dim();
                    let di = p.distance_unchecked(&x[offset..offset + d]);
                    sq += di * di;
                    offset += d;
                }
                sq.sqrt()
            }
            _ => linalg::dist(x, self.project_unchecked(x).point()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.distance_unchecked(x) <= MEMBERSHIP_TOL
    }

    pub(crate) fn require_member(&self, x: &[f64]) -> Result<()> {
        let d = self.distance(x)?;
        if d > MEMBERSHIP_TOL {
            return Err(Error::NotInSet { distance: d });
        }
        Ok(())
    }

    /// Closed-form Clarke tangent cone at a point of the set.
    pub fn clarke_tangent_cone(&self, xbar: &[f64]) -> Result<PolyhedralCone> {
        self.require_member(xbar)?;
        self.tangent_unchecked(xbar)
    }

    fn tangent_unchecked(&self, xbar: &[f64]) -> Result<PolyhedralCone> {
        let dim = self.dim();
        match &self.kind {
            SetKind::ConvexPolyhedron { a, b, .. } => {
                let active: Vec<Vec<f64>> = a
                    .iter()
                    .zip(b)
                    .filter(|(row, bi)| (dot(row, xbar) - *bi).abs() <= MEMBERSHIP_TOL * (1.0 + linalg::norm(row)))
                    .map(|(row, _)| row.clone())
                    .collect();
                if active.is_empty() {
                    return Ok(PolyhedralCone::whole_space(dim));
                }
                let gens = super::polyhedral::extreme_generators(dim, &active)?;
                PolyhedralCone::from_both(dim, gens, active)
            }
            SetKind::Ball { center, radius } => {
                let d = linalg::sub(xbar, center);
                if linalg::norm(&d) < radius - MEMBERSHIP_TOL {
                    Ok(PolyhedralCone::whole_space(dim))
                } else {
                    let normal = linalg::normalized(&d).expect("boundary point away from center");
                    let mut gens = tangent_plane_generators(&normal);
                    gens.push(linalg::scale(&normal, -1.0));
                    PolyhedralCone::from_both(dim, gens, vec![normal])
                }
            }
            SetKind::Sphere { center, .. } => {
                let normal = linalg::normalized(&linalg::sub(xbar, center)).expect("point on sphere");
                let gens = tangent_plane_generators(&normal);
                PolyhedralCone::from_both(dim, gens, vec![normal.clone(), linalg::scale(&normal, -1.0)])
            }
            SetKind::Box { lo, hi } => {
                let mut gens = Vec::new();
                for i in 0..dim {
                    let at_lo = lo[i].is_some_and(|l| (xbar[i] - l).abs() <= MEMBERSHIP_TOL);
                    let at_hi = hi[i].is_some_and(|h| (xbar[i] - h).abs() <= MEMBERSHIP_TOL);
                    let e = linalg::unit(dim, i);
                    if !at_hi {
                        gens.push(e.clone());
                    }
                    if !at_lo {
                        gens.push(linalg::scale(&e, -1.0));
                    }
                }
                PolyhedralCone::from_generators(dim, gens)
            }
            SetKind::Singleton { .. } => Ok(PolyhedralCone::trivial(dim)),
            SetKind::Product { parts } => {
                let mut offset = 0;
                let mut acc: Option<PolyhedralCone> = None;
                for p in parts {
                    let d = p.dim();
                    let cone = p.tangent_unchecked(&xbar[offset..offset + d])?;
                    acc = Some(match acc {
                        None => cone,
                        Some(prev) => prev.product(&cone)?,
                    });
                    offset += d;
                }
                Ok(acc.expect("nonempty product"))
            }
        }
    }

    /// Closed-form convex normal cone; only meaningful for convex kinds.
    pub(crate) fn convex_normal_cone(&self, xbar: &[f64]) -> Result<PolyhedralCone> {
        let t = self.tangent_unchecked(xbar)?;
        super::polyhedral::polar(&t)
    }
}

fn tangent_plane_generators(normal: &[f64]) -> Vec<Vec<f64>> {
    let basis = linalg::null_space(normal.len(), &[normal.to_vec()], 1e-12);
    basis
        .into_iter()
        .flat_map(|b| {
            let neg = linalg::scale(&b, -1.0);
            [b, neg]
        })
        .collect()
}

/// Projection onto `{y : A y <= b}` through least distance programming:
/// minimize `|z|` with `-A z >= A x - b`, solved as an NNLS problem.
fn project_polyhedron(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let violated = a.iter().zip(b).any(|(r, bi)| dot(r, x) > *bi);
    if !violated {
        return x.to_vec();
    }
    // G z >= h with G = -A, h = A x - b. E = [G^T; h^T], f = e_{n+1}.
    let cols: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut c: Vec<f64> = r.iter().map(|v| -v).collect();
            c.push(dot(r, x) - bi);
            c
        })
        .collect();
    let f = linalg::unit(n + 1, n);
    let sol = nnls(n + 1, &cols, &f);
    let r = linalg::sub(&sol.fitted, &f);
    let last = r[n];
    if last.abs() < 1e-300 {
        // infeasible polyhedron: cannot happen for validated targets
        return x.to_vec();
    }
    let z: Vec<f64> = r[..n].iter().map(|v| -v / last).collect();
    linalg::add(x, &z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_target() -> SetDescriptor {
        SetDescriptor::product(vec![
            SetDescriptor::singleton(vec![1.0]),
            SetDescriptor::interval_box(vec![0.0], vec![1.0]),
            SetDescriptor::singleton(vec![1.0]),
        ])
    }

    #[test]
    fn ball_projection() {
        let s = SetDescriptor::ball(vec![0.0, 0.0], 1.0);
        let p = s.project(&[2.0, 0.0]).unwrap();
        assert_eq!(p.points, vec![vec![1.0, 0.0]]);
        assert!(!p.multivalued);
    }

    #[test]
    fn sphere_center_is_flagged() {
        let s = SetDescriptor::sphere(vec![0.0, 0.0], 1.0);
        let p = s.project(&[0.0, 0.0]).unwrap();
        assert!(p.multivalued);
        assert!(p.points.iter().all(|q| s.contains(q)));
    }

    #[test]
    fn product_box_projection() {
        let s = example_target();
        let p = s.project(&[1.0, -0.3, 1.0]).unwrap();
        assert_eq!(p.points, vec![vec![1.0, 0.0, 1.0]]);
        assert!((s.distance(&[1.0, -0.3, 1.0]).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn polyhedron_projection_matches_closed_form() {
        // unit square as a polyhedron
        let s = SetDescriptor::polyhedron(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let p = s.project(&[2.0, 3.0]).unwrap();
        assert!(linalg::dist(p.point(), &[1.0, 1.0]) < 1e-12);
        let p = s.project(&[0.5, -2.0]).unwrap();
        assert!(linalg::dist(p.point(), &[0.5, 0.0]) < 1e-12);
        // oblique halfspace x + y <= 1
        let h = SetDescriptor::polyhedron(vec![vec![1.0, 1.0]], vec![1.0]).unwrap();
        let p = h.project(&[1.0, 1.0]).unwrap();
        assert!(linalg::dist(p.point(), &[0.5, 0.5]) < 1e-12);
    }

    #[test]
    fn clarke_cone_of_example_target() {
        let s = example_target();
        let k = s.clarke_tangent_cone(&[1.0, 0.0, 1.0]).unwrap();
        assert!(k.contains(&[0.0, 3.0, 0.0]));
        assert!(!k.contains(&[0.0, -1.0, 0.0]));
        assert!(!k.contains(&[1e-3, 0.0, 0.0]));
        assert!(!k.contains(&[0.0, 0.0, 1e-3]));
    }

    #[test]
    fn clarke_cone_trivial_cases() {
        let r3 = SetDescriptor::whole_space(3);
        let k = r3.clarke_tangent_cone(&[4.0, -1.0, 2.0]).unwrap();
        assert!(k.contains(&[-5.0, 7.0, 1.0]));
        let p = SetDescriptor::singleton(vec![2.0, 2.0]);
        let k = p.clarke_tangent_cone(&[2.0, 2.0]).unwrap();
        assert!(k.is_trivial().unwrap());
        assert!(matches!(p.clarke_tangent_cone(&[0.0, 0.0]), Err(Error::NotInSet { .. })));
    }

    #[test]
    fn sphere_tangent_is_a_line() {
        let s = SetDescriptor::sphere(vec![0.0, 0.0], 1.0);
        let k = s.clarke_tangent_cone(&[1.0, 0.0]).unwrap();
        assert!(k.contains(&[0.0, -2.0]) && k.contains(&[0.0, 2.0]));
        assert!(!k.contains(&[0.1, 1.0]));
    }

    #[test]
    fn json_tagged_records() {
        let s = SetDescriptor::from_json(
            r#"{"kind":"product","parts":[{"kind":"singleton","point":[1]},{"kind":"box","lo":[0],"hi":[1]},{"kind":"singleton","point":[1]}]}"#,
        )
        .unwrap();
        assert_eq!(s, example_target());
        assert!(SetDescriptor::from_json(r#"{"kind":"union","parts":[]}"#).is_err());
        let r: SetDescriptor =
            serde_json::from_str(r#"{"kind":"sphere","center":[0,0],"radius":1,"prox_radius":"infinite"}"#).unwrap();
        assert_eq!(r.declared_prox_radius(), ProxRadius::Infinite);
    }

    #[test]
    fn prox_radius_by_kind() {
        assert_eq!(example_target().declared_prox_radius(), ProxRadius::Infinite);
        let s = SetDescriptor::product(vec![
            SetDescriptor::sphere(vec![0.0, 0.0], 2.0),
            SetDescriptor::sphere(vec![0.0], 0.5),
        ]);
        assert_eq!(s.declared_prox_radius(), ProxRadius::Finite(0.5));
    }
}
