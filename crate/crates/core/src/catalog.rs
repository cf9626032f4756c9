//! Known structures on `R^5` with coordinates `(x, y, z, u, v)`, `ξ = ∂_v`.
//!
//! The CLI ships the same structures as JSON manifests.

use crate::chart::AdaptedChart;
use crate::structure::AdaptedStructure;

pub const COORDS: [&str; 5] = ["x", "y", "z", "u", "v"];

const Z: &str = "0";

fn identity() -> Vec<Vec<&'static str>> {
    (0..4)
        .map(|i| (0..4).map(|j| if i == j { "1" } else { Z }).collect())
        .collect()
}

/// `φ e_1 = e_3`, `φ e_2 = e_4`, `φ e_3 = -e_1`, `φ e_4 = -e_2`.
fn phi_13_24() -> Vec<Vec<&'static str>> {
    vec![
        vec![Z, Z, "-1", Z],
        vec![Z, Z, Z, "-1"],
        vec!["1", Z, Z, Z],
        vec![Z, "1", Z, Z],
    ]
}

/// `φ e_1 = e_2`, `φ e_2 = -e_1`, `φ e_3 = e_4`, `φ e_4 = -e_3`.
fn phi_12_34() -> Vec<Vec<&'static str>> {
    vec![
        vec![Z, "-1", Z, Z],
        vec!["1", Z, Z, Z],
        vec![Z, Z, Z, "-1"],
        vec![Z, Z, "1", Z],
    ]
}

const CONFORMAL: &str = "1/(1+x^2+y^2)^2";

fn conformal_metric() -> Vec<Vec<&'static str>> {
    vec![
        vec![CONFORMAL, Z, Z, Z],
        vec![Z, CONFORMAL, Z, Z],
        vec![Z, Z, "1", Z],
        vec![Z, Z, Z, "1"],
    ]
}

fn build(
    gamma: &[&str],
    domain: &[(f64, f64)],
    avoid: &[&str],
    g: &[Vec<&str>],
    phi: &[Vec<&str>],
) -> AdaptedStructure {
    let chart = AdaptedChart::from_text(&COORDS, gamma, domain, avoid).expect("catalog chart");
    AdaptedStructure::from_text(chart, g, phi).expect("catalog structure")
}

/// Flat chart, orthonormal frame, canonical `φ`.
pub fn flat() -> AdaptedStructure {
    build(&[Z; 4], &[(-1.0, 1.0); 5], &[], &identity(), &phi_13_24())
}

/// `η = dv + y dx` with an orthonormal frame: almost normal, not normal.
pub fn example1() -> AdaptedStructure {
    build(
        &["y", Z, Z, Z],
        &[(-2.0, 2.0); 5],
        &["y"],
        &identity(),
        &phi_13_24(),
    )
}

/// `η = dv + y v dx`: `dη(ξ, ·) ≠ 0`.
pub fn example2() -> AdaptedStructure {
    let domain = [
        (-2.0, 2.0),
        (-4.0, 4.0),
        (-2.0, 2.0),
        (-2.0, 2.0),
        (-3.0, 3.0),
    ];
    build(
        &["y*v", Z, Z, Z],
        &domain,
        &["y"],
        &identity(),
        &phi_13_24(),
    )
}

/// Conformally flat `(x, y)` block with `φ` rotating inside each block.
pub fn example3_qs() -> AdaptedStructure {
    build(
        &["y", Z, Z, Z],
        &[(-1.0, 1.0); 5],
        &[],
        &conformal_metric(),
        &phi_12_34(),
    )
}

/// The conformal metric with `φ` pairing `e_1, e_3` and `e_2, e_4`, rescaled
/// so that `g(φX, φY) = g(X, Y)` holds on the distribution.
pub fn example3_aqs() -> AdaptedStructure {
    let h = "1/(1+x^2+y^2)";
    let k = "-(1+x^2+y^2)";
    let phi = vec![
        vec![Z, Z, k, Z],
        vec![Z, Z, Z, k],
        vec![h, Z, Z, Z],
        vec![Z, h, Z, Z],
    ];
    build(
        &["y", Z, Z, Z],
        &[(-1.0, 1.0); 5],
        &[],
        &conformal_metric(),
        &phi,
    )
}

/// The unit pairing `e_1 ↦ e_3`, `e_2 ↦ e_4` on the conformal metric. It is
/// not compatible with `g` off the origin.
pub fn example3_aqs_unit_pairing() -> AdaptedStructure {
    build(
        &["y", Z, Z, Z],
        &[(-1.0, 1.0); 5],
        &[],
        &conformal_metric(),
        &phi_13_24(),
    )
}

/// `(name, structure)` for every shipped structure.
pub fn named() -> Vec<(&'static str, AdaptedStructure)> {
    vec![
        ("flat", flat()),
        ("example1", example1()),
        ("example2", example2()),
        ("example3-qs", example3_qs()),
        ("example3-aqs", example3_aqs()),
    ]
}

pub fn all() -> Vec<AdaptedStructure> {
    named().into_iter().map(|(_, s)| s).collect()
}
