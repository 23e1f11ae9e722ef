//! Polyhedral cones, set descriptors and sampled tangent/normal certificates.

pub mod certificates;
pub mod polyhedral;
pub mod sets;

pub use certificates::{
    clarke_tangent_membership_estimate, proximal_normal_membership, qdq_certificate,
    quasi_prox_regular_certificate, ProximalNormalVerdict, QdqCertificate, QdqVerdict, QuasiProxCase,
    QuasiProxEvidence, TangentEstimate, TangentVerdict,
};
pub use polyhedral::{conic_hull, polar, transversality_report, PolyhedralCone, TransversalityReport};
pub use sets::{ProxRadius, SetDescriptor, SetKind};
