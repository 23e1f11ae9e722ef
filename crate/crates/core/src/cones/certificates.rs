//! Sampled estimators: proximal normals, Clarke tangent membership, quasi
//! prox-regularity and the QDQ decay certificate. Verdicts are evidence, never proofs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::polyhedral::{PolyhedralCone, MEMBERSHIP_TOL};
use super::sets::{ProxRadius, SetDescriptor};
use crate::error::{Error, Result};
use crate::linalg::{self, dot};

/// Slack allowed when checking that a ratio sequence is nonincreasing.
pub const MONOTONE_SLACK: f64 = 0.10;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = linalg::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return linalg::scale(&v, 1.0 / n);
        }
    }
}

pub(crate) fn random_in_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = random_direction(rng, center.len());
    let r = radius * rng.gen::<f64>().powf(1.0 / center.len() as f64);
    linalg::add(center, &linalg::scale(&d, r))
}

/// Points of `S` within `delta` of `xbar` (always including `xbar`).
fn local_set_points(s: &SetDescriptor, xbar: &[f64], delta: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![xbar.to_vec()];
    let mut attempts = 0;
    while pts.len() < count + 1 && attempts < 20 * count + 20 {
        attempts += 1;
        let y = random_in_ball(rng, xbar, delta);
        let p = s.project(&y).expect("dimension checked by caller");
        for q in p.points {
            if linalg::dist(&q, xbar) <= delta {
                pts.push(q);
            }
        }
    }
    pts
}

/// Random unit directions inside a cone: the normalized generators plus random
/// nonnegative combinations of them.
fn cone_directions(cone: &PolyhedralCone, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let gens: Vec<Vec<f64>> = cone
        .generators()?
        .iter()
        .filter_map(|g| linalg::normalized(g))
        .collect();
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = gens.clone();
    while out.len() < count.max(gens.len()) {
        let mut v = vec![0.0; cone.dim()];
        for g in &gens {
            let w: f64 = rng.gen::<f64>().powi(3);
            linalg::axpy(&mut v, w, g);
        }
        if let Some(u) = linalg::normalized(&v) {
            out.push(u);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalNormalVerdict {
    pub member: bool,
    /// `true` when decided in closed form (convex kinds).
    pub exact: bool,
    /// A point of `S` violating `eta . (x - xbar) <= |x - xbar|^2 / (2r)`.
    pub counterexample: Option<Vec<f64>>,
}

/// Whether `eta` is a proximal normal to `S` at `xbar` with modulus `r`.
///
/// Convex kinds use the normal cone of convex analysis; otherwise the proximal
/// inequality is checked on `samples` points of `S`, local and global.
pub fn proximal_normal_membership(
    s: &SetDescriptor,
    xbar: &[f64],
    eta: &[f64],
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<ProximalNormalVerdict> {
    s.require_member(xbar)?;
    if eta.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: eta.len(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("proximal modulus must be positive".into()));
    }
    if s.is_convex() {
        let normal = s.convex_normal_cone(xbar)?;
        return Ok(ProximalNormalVerdict {
            member: normal.contains(eta),
            exact: true,
            counterexample: None,
        });
    }
    let mut rng = rng(seed);
    let scales = [1e-3, 1e-2, 0.1, 1.0, 10.0];
    let per = samples.div_ceil(scales.len()).max(1);
    for scale in scales {
        for _ in 0..per {
            let y = random_in_ball(&mut rng, xbar, scale);
            for x in s.project(&y)?.points {
                let dx = linalg::sub(&x, xbar);
                let lhs = dot(eta, &dx);
                let rhs = dot(&dx, &dx) / (2.0 * r);
                if lhs > rhs + 1e-12 * (1.0 + linalg::norm(&dx)) {
                    return Ok(ProximalNormalVerdict {
                        member: false,
                        exact: false,
                        counterexample: Some(x),
                    });
                }
            }
        }
    }
    Ok(ProximalNormalVerdict {
        member: true,
        exact: false,
        counterexample: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentVerdict {
    In,
    Out,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentEstimate {
    pub verdict: TangentVerdict,
    /// `sup d_S(x + t v) / t` per ladder step.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

fn nonincreasing(ratios: &[f64]) -> bool {
    ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK) + 1e-15)
}

/// Sampled estimate of `lim d_S(x + t v)/t` as `t -> 0`, `x -> xbar` in `S`.
///
/// For each `t` the points `x` are drawn from `S ∩ B_t(xbar)`.
pub fn clarke_tangent_membership_estimate(
    s: &SetDescriptor,
    xbar: &[f64],
    v: &[f64],
    ladder: &[f64],
    base_samples: usize,
    seed: u64,
) -> Result<TangentEstimate> {
    s.require_member(xbar)?;
    if v.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: v.len(),
        });
    }
    let vnorm = linalg::norm(v);
    if vnorm == 0.0 {
        return Ok(TangentEstimate {
            verdict: TangentVerdict::In,
            ratios: vec![0.0; ladder.len()],
            max_ratio: 0.0,
        });
    }
    let mut rng = rng(seed);
    let mut ratios = Vec::with_capacity(ladder.len());
    for &t in ladder {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("ladder values must be positive".into()));
        }
        let pts = local_set_points(s, xbar, t, base_samples, &mut rng);
        let worst = pts
            .iter()
            .map(|x| s.distance_unchecked(&linalg::add(x, &linalg::scale(v, t))) / t)
            .fold(0.0, f64::max);
        ratios.push(worst);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let first = ratios.first().copied().unwrap_or(0.0);
    let last = ratios.last().copied().unwrap_or(0.0);
    let negligible = 1e-8 * vnorm.max(1.0);
    let verdict = if last <= negligible {
        TangentVerdict::In
    } else if ratios.len() >= 2 && nonincreasing(&ratios) && last <= 0.5 * first {
        TangentVerdict::In
    } else if last >= 0.1 * vnorm && last >= 0.5 * first {
        TangentVerdict::Out
    } else {
        TangentVerdict::Inconclusive
    };
    Ok(TangentEstimate {
        verdict,
        ratios,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuasiProxCase {
    /// `(xbar + T^C) ∩ B_delta(xbar) ⊆ S`
    #[serde(rename = "(i)")]
    ConeInvariance,
    /// `S` coincides near `xbar` with an r-prox-regular set.
    #[serde(rename = "(ii)")]
    ProxRegular,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiProxEvidence {
    pub case: QuasiProxCase,
    /// Result of the sampled cone-invariance test.
    pub cone_invariance_holds: bool,
    /// Point of `xbar + T^C` within `delta` that is not in `S`.
    pub witness: Option<Vec<f64>>,
    #[serde(serialize_with = "serialize_radius")]
    #[serde(skip_deserializing, default = "default_radius")]
    pub declared_prox_radius: ProxRadius,
    pub samples: usize,
}

fn default_radius() -> ProxRadius {
    ProxRadius::Infinite
}

fn serialize_radius<S: serde::Serializer>(r: &ProxRadius, s: S) -> std::result::Result<S::Ok, S::Error> {
    r.serialize(s)
}

/// Which quasi prox-regularity condition holds at `xbar`. Case (ii) is
/// reported whenever the declared prox radius is positive; case (i) is tested
/// by sampling `(xbar + T^C(xbar)) ∩ B_delta(xbar)`.
pub fn quasi_prox_regular_certificate(
    s: &SetDescriptor,
    xbar: &[f64],
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<QuasiProxEvidence> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let cone = s.clarke_tangent_cone(xbar)?;
    let mut rng = rng(seed);
    let dirs = cone_directions(&cone, samples, &mut rng)?;
    let mut witness = None;
    'outer: for d in &dirs {
        for frac in [1.0, 0.5, 0.1, 0.01] {
            let step = frac * delta * (1.0 - 1e-12);
            let x = linalg::add(xbar, &linalg::scale(d, step));
            if s.distance_unchecked(&x) > MEMBERSHIP_TOL {
                witness = Some(x);
                break 'outer;
            }
        }
    }
    let cone_invariance_holds = witness.is_none();
    let radius = s.declared_prox_radius();
    let case = if radius.is_positive() {
        QuasiProxCase::ProxRegular
    } else if cone_invariance_holds {
        QuasiProxCase::ConeInvariance
    } else {
        QuasiProxCase::None
    };
    Ok(QuasiProxEvidence {
        case,
        cone_invariance_holds,
        witness,
        declared_prox_radius: radius,
        samples: dirs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QdqVerdict {
    Supported,
    Inconclusive,
}

/// Sampled decay certificate for the Clarke tangent cone as a QDQ approximating
/// cone with `Λ = {identity}`, `G = Π_S`, `Γ = T^C(xbar)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdqCertificate {
    pub delta_ladder: Vec<f64>,
    /// Per delta: sampled `sup |Π_S(x) - x| / delta` over `x ∈ xbar + (T^C ∩ B_delta)`.
    pub ratio_table: Vec<f64>,
    pub verdict: QdqVerdict,
    pub case: QuasiProxCase,
    /// Monotonicity slack used by the verdict.
    pub slack: f64,
}

pub fn qdq_certificate(
    s: &SetDescriptor,
    xbar: &[f64],
    delta_ladder: &[f64],
    samples: usize,
    seed: u64,
) -> Result<QdqCertificate> {
    let first_delta = delta_ladder.first().copied().unwrap_or(1.0);
    let qpr = quasi_prox_regular_certificate(s, xbar, first_delta, samples, seed)?;
    if qpr.case == QuasiProxCase::None {
        return Err(Error::NotQuasiProxRegular);
    }
    let cone = s.clarke_tangent_cone(xbar)?;
    let mut rng = rng(seed ^ 0x9e37_79b9);
    let dirs = cone_directions(&cone, samples, &mut rng)?;
    let mut ratio_table = Vec::with_capacity(delta_ladder.len());
    for &delta in delta_ladder {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("delta ladder values must be positive".into()));
        }
        let mut worst: f64 = 0.0;
        for d in &dirs {
            for frac in [1.0, 0.75, 0.5, 0.25] {
                let x = linalg::add(xbar, &linalg::scale(d, frac * delta));
                let p = s.project(&x)?;
                let h = linalg::dist(p.point(), &x);
                worst = worst.max(h / delta);
            }
        }
        ratio_table.push(worst);
    }
    let verdict = if ratio_table.len() < 2 {
        QdqVerdict::Inconclusive
    } else {
        let first = ratio_table[0];
        let last = *ratio_table.last().unwrap();
        let decays = last <= 1e-12 || last <= 0.5 * first;
        if nonincreasing(&ratio_table) && decays {
            QdqVerdict::Supported
        } else {
            QdqVerdict::Inconclusive
        }
    };
    Ok(QdqCertificate {
        delta_ladder: delta_ladder.to_vec(),
        ratio_table,
        verdict,
        case: qpr.case,
        slack: MONOTONE_SLACK,
    })
}
