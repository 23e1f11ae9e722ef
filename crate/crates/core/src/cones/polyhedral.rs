//! Finitely generated convex cones, polarity and transversality.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, canonical_sign, dot, nnls, normalized};

/// Absolute tolerance for every cone membership and containment test.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Largest ambient dimension for which double-description conversion is attempted.
pub const MAX_CONVERSION_DIM: usize = 6;

/// A polyhedral convex cone in V-representation (`span+ generators`),
/// H-representation (`{x : a . x <= 0}`), or both.
///
/// An empty generator list is the trivial cone `{0}`; an empty halfspace list is the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<Vec<f64>>>,
}

fn check_dims(dim: usize, vs: &[Vec<f64>]) -> Result<()> {
    for v in vs {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(())
}

impl PolyhedralCone {
    pub fn from_generators(dim: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        check_dims(dim, &generators)?;
        Ok(Self {
            dim,
            generators: Some(generators),
            halfspaces: None,
        })
    }

    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Vec<f64>>) -> Result<Self> {
        check_dims(dim, &halfspaces)?;
        Ok(Self {
            dim,
            generators: None,
            halfspaces: Some(halfspaces),
        })
    }

    /// Both representations; callers must make sure they describe the same set.
    pub fn from_both(dim: usize, generators: Vec<Vec<f64>>, halfspaces: Vec<Vec<f64>>) -> Result<Self> {
        check_dims(dim, &generators)?;
        check_dims(dim, &halfspaces)?;
        Ok(Self {
            dim,
            generators: Some(generators),
            halfspaces: Some(halfspaces),
        })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            dim,
            generators: Some(
                (0..dim)
                    .flat_map(|i| [linalg::unit(dim, i), linalg::scale(&linalg::unit(dim, i), -1.0)])
                    .collect(),
            ),
            halfspaces: Some(Vec::new()),
        }
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            generators: Some(Vec::new()),
            halfspaces: None,
        }
    }

    pub fn nonnegative_orthant(dim: usize) -> Self {
        Self {
            dim,
            generators: Some((0..dim).map(|i| linalg::unit(dim, i)).collect()),
            halfspaces: Some((0..dim).map(|i| linalg::scale(&linalg::unit(dim, i), -1.0)).collect()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stored_generators(&self) -> Option<&[Vec<f64>]> {
        self.generators.as_deref()
    }

    pub fn stored_halfspaces(&self) -> Option<&[Vec<f64>]> {
        self.halfspaces.as_deref()
    }

    /// V-representation, converting from halfspaces by double description if needed.
    pub fn generators(&self) -> Result<Cow<'_, [Vec<f64>]>> {
        if let Some(g) = &self.generators {
            return Ok(Cow::Borrowed(g));
        }
        let h = self.halfspaces.as_deref().unwrap_or(&[]);
        Ok(Cow::Owned(extreme_generators(self.dim, h)?))
    }

    /// H-representation, converting from generators if needed.
    pub fn halfspaces(&self) -> Result<Cow<'_, [Vec<f64>]>> {
        if let Some(h) = &self.halfspaces {
            return Ok(Cow::Borrowed(h));
        }
        let g = self.generators.as_deref().unwrap_or(&[]);
        // K = polar(polar(K)); polar(K) = {a : a . g <= 0} whose generators are K's facet normals.
        Ok(Cow::Owned(extreme_generators(self.dim, g)?))
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.generators {
            return nnls(self.dim, g, x).fitted;
        }
        // Moreau: x = proj_K(x) + proj_{K polar}(x), and K polar = cone(halfspace normals).
        let h = self.halfspaces.as_deref().unwrap_or(&[]);
        let polar_part = nnls(self.dim, h, x).fitted;
        linalg::sub(x, &polar_part)
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        linalg::dist(x, &self.project(x))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) <= MEMBERSHIP_TOL
    }

    /// Distance from `x` to the polar cone, `|proj_K(x)|` by Moreau decomposition.
    pub fn distance_to_polar(&self, x: &[f64]) -> f64 {
        linalg::norm(&self.project(x))
    }

    /// True when the cone is `{0}`.
    pub fn is_trivial(&self) -> Result<bool> {
        Ok(self.generators()?.iter().all(|g| linalg::norm(g) <= MEMBERSHIP_TOL))
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &PolyhedralCone) -> Result<PolyhedralCone> {
        let d = self.dim + other.dim;
        let mut gens = Vec::new();
        for g in self.generators()?.iter() {
            let mut v = g.clone();
            v.resize(d, 0.0);
            gens.push(v);
        }
        for g in other.generators()?.iter() {
            let mut v = vec![0.0; self.dim];
            v.extend_from_slice(g);
            gens.push(v);
        }
        PolyhedralCone::from_generators(d, gens)
    }
}

/// Polar cone `{p : p . k <= 0 for all k in K}`.
///
/// A V-represented cone yields an H-represented polar and vice versa.
pub fn polar(k: &PolyhedralCone) -> Result<PolyhedralCone> {
    match (&k.generators, &k.halfspaces) {
        (Some(g), Some(h)) => PolyhedralCone::from_both(k.dim, h.clone(), g.clone()),
        (Some(g), None) => PolyhedralCone::from_halfspaces(k.dim, g.clone()),
        (None, Some(h)) => PolyhedralCone::from_generators(k.dim, h.clone()),
        (None, None) => Ok(PolyhedralCone::trivial(k.dim)),
    }
}

/// Smallest convex cone containing the given vectors.
pub fn conic_hull(vectors: &[Vec<f64>]) -> Result<PolyhedralCone> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("conic hull of an empty list".into()))?;
    PolyhedralCone::from_generators(first.len(), vectors.to_vec())
}

/// Minimal V-representation of `{x : a . x <= 0 for a in rows}`: lineality basis
/// (both signs) plus the extreme rays of the pointed part.
pub fn extreme_generators(dim: usize, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if dim > MAX_CONVERSION_DIM {
        return Err(Error::Unsupported(format!(
            "representation conversion in dimension {dim} (limit {MAX_CONVERSION_DIM})"
        )));
    }
    check_dims(dim, rows)?;
    let rows: Vec<Vec<f64>> = rows.iter().filter_map(|r| normalized(r)).collect();
    let lineality = linalg::null_space(dim, &rows, 1e-10);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for l in &lineality {
        let l = canonical_sign(l.clone());
        out.push(linalg::scale(&l, -1.0));
        out.insert(out.len() - 1, l);
    }
    let pointed_dim = dim - lineality.len();
    if pointed_dim == 0 {
        return Ok(out);
    }
    // Each extreme ray is cut out by pointed_dim - 1 independent active rows.
    let need = pointed_dim - 1;
    let mut rays: Vec<Vec<f64>> = Vec::new();
    let mut consider = |active: &[usize]| {
        let mut eq: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].clone()).collect();
        eq.extend(lineality.iter().cloned());
        let ns = linalg::null_space(dim, &eq, 1e-10);
        if ns.len() != 1 {
            return;
        }
        for sign in [1.0, -1.0] {
            let r = linalg::scale(&ns[0], sign);
            if rows.iter().all(|a| dot(a, &r) <= 1e-10)
                && !rays.iter().any(|q| linalg::dist(q, &r) < 1e-8)
            {
                rays.push(r);
            }
        }
    };
    if need == 0 {
        consider(&[]);
    } else if rows.len() >= need {
        for combo in Combinations::new(rows.len(), need) {
            consider(&combo);
        }
    }
    out.extend(rays);
    Ok(out)
}

struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub transversal: bool,
    pub strongly_transversal: bool,
    /// Nonzero `lambda` with `lambda . k1 >= 0` on K1 and `lambda . k2 <= 0` on K2,
    /// present exactly when the cones are not transversal.
    pub separating_functional: Option<Vec<f64>>,
}

/// Transversality of two cones via their polars: not transversal iff
/// `(-K1 polar) ∩ (K2 polar)` contains a nonzero element.
pub fn transversality_report(k1: &PolyhedralCone, k2: &PolyhedralCone) -> Result<TransversalityReport> {
    if k1.dim != k2.dim {
        return Err(Error::DimensionMismatch {
            expected: k1.dim,
            found: k2.dim,
        });
    }
    let dim = k1.dim;
    // K1 - K2 = cone(gens1 ∪ -gens2); its polar is {mu : mu.k1 <= 0, mu.k2 >= 0}.
    let mut diff: Vec<Vec<f64>> = k1.generators()?.to_vec();
    diff.extend(k2.generators()?.iter().map(|g| linalg::scale(g, -1.0)));
    let polar_gens = extreme_generators(dim, &diff)?;
    let separating = polar_gens
        .iter()
        .find(|g| linalg::norm(g) > MEMBERSHIP_TOL)
        .map(|g| {
            let lambda = linalg::scale(g, -1.0);
            let lambda = normalized(&lambda).unwrap_or(lambda);
            // lineality directions come in both signs; report the canonical one
            if polar_gens.iter().any(|h| linalg::dist(h, &lambda) < 1e-9) {
                canonical_sign(lambda)
            } else {
                lambda
            }
        });
    let transversal = separating.is_none();
    let strongly_transversal = transversal && {
        let mut h: Vec<Vec<f64>> = k1.halfspaces()?.to_vec();
        h.extend(k2.halfspaces()?.iter().cloned());
        extreme_generators(dim, &h)?
            .iter()
            .any(|g| linalg::norm(g) > MEMBERSHIP_TOL)
    };
    Ok(TransversalityReport {
        transversal,
        strongly_transversal,
        separating_functional: separating,
    })
}
