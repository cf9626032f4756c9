//! Named tensors printable at a point.

use acmetric::connection::{canonical, lc_adapted, torsion, Endomorphism};
use acmetric::curvature::{
    curvature_k, einstein_residual, ricci_k, ricci_wagner, schouten, OmegaSource,
};
use acmetric::{AdaptedStructure, GeometryError, Point, TensorGrid};

pub const TENSOR_NAMES: [&str; 13] = [
    "omega",
    "psi",
    "C",
    "C-mixed",
    "Omega",
    "lc-adapted",
    "n-connection",
    "torsion",
    "schouten",
    "K",
    "ricci-wagner",
    "ricci-k",
    "einstein-residual",
];

/// The grids making up tensor `name` at `p`, each with a label. Only `K`
/// has more than one part.
pub fn named_tensor(
    s: &AdaptedStructure,
    name: &str,
    p: &Point,
    source: OmegaSource,
) -> Result<Option<Vec<(&'static str, TensorGrid)>>, GeometryError> {
    let one = |g: TensorGrid| Ok(Some(vec![("components", g)]));
    match name {
        "omega" => one(s.derived(p)?.omega),
        "psi" => one(s.derived(p)?.psi),
        "C" => one(s.derived(p)?.c_lower),
        "C-mixed" => one(s.derived(p)?.c_mixed),
        "Omega" => one(s.derived(p)?.fundamental),
        "lc-adapted" => one(lc_adapted(s, p)?.coeffs),
        "n-connection" => one(canonical(s, p)?.coeffs),
        "torsion" => one(torsion(
            s,
            &Endomorphism::Canonical,
            p,
            crate::report::TORSION_SKEW_TOL,
        )?
        .table),
        "schouten" => one(schouten(s, p)?),
        "K" => {
            let k = curvature_k(s, p)?;
            Ok(Some(vec![("frame", k.frame), ("mixed", k.mixed)]))
        }
        "ricci-wagner" => one(ricci_wagner(s, p)?),
        "ricci-k" => one(ricci_k(s, p)?),
        "einstein-residual" => one(einstein_residual(s, p, source)?),
        _ => Ok(None),
    }
}
