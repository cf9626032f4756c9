//! Curvature of the internal and canonical connections.
//!
//! `R(e_a, e_b) e_c = R^d_abc e_d`; grids put the upper index first.

use rayon::prelude::*;

use crate::chart::Point;
use crate::connection::{internal_derivative, n_connection_duals, nabla_omega, Endomorphism};
use crate::error::GeometryError;
use crate::jet::Dual;
use crate::linalg::{self, Mat};
use crate::structure::{values, AdaptedStructure, Germ};
use crate::tensor::{Slot, TensorGrid};

/// Relative singular-value cut-off when restricting `Ω` to the support of `dη`.
pub const SUPPORT_REL_TOL: f64 = 1e-9;

const FRAME4: [Slot; 4] = [
    Slot::FrameUpper,
    Slot::FrameLower,
    Slot::FrameLower,
    Slot::FrameLower,
];

fn schouten_values(germ: &Germ) -> Vec<Vec<Vec<Vec<f64>>>> {
    let m = germ.m();
    let g = &germ.christoffel;
    let e = |i: usize, d: &Dual| germ.chart.e(i, d);
    (0..m)
        .map(|d| {
            (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            (0..m)
                                .map(|c| {
                                    let mut v = e(a, &g[d][b][c]) - e(b, &g[d][a][c]);
                                    for k in 0..m {
                                        v += g[d][a][k].value * g[k][b][c].value
                                            - g[d][b][k].value * g[k][a][c].value;
                                    }
                                    v
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `R^d_abc = e_a Γ^d_bc - e_b Γ^d_ac + Γ^d_ae Γ^e_bc - Γ^d_be Γ^e_ac`.
pub fn schouten(s: &AdaptedStructure, p: &Point) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let r = schouten_values(&germ);
    Ok(TensorGrid::from_fn(germ.n(), &FRAME4, |i| {
        r[i[0]][i[1]][i[2]][i[3]]
    }))
}

/// `r_ac = R^b_abc`.
fn ricci_wagner_values(germ: &Germ) -> Mat {
    let m = germ.m();
    let r = schouten_values(germ);
    (0..m)
        .map(|a| {
            (0..m)
                .map(|c| (0..m).map(|b| r[b][a][b][c]).sum())
                .collect()
        })
        .collect()
}

pub fn ricci_wagner(s: &AdaptedStructure, p: &Point) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let r = ricci_wagner_values(&germ);
    Ok(TensorGrid::from_fn(
        germ.n(),
        &[Slot::FrameLower, Slot::FrameLower],
        |i| r[i[0]][i[1]],
    ))
}

fn nabla_psi_grid(germ: &Germ) -> TensorGrid {
    let flat: Vec<Dual> = germ.psi.iter().flatten().cloned().collect();
    internal_derivative(germ, &[Slot::FrameUpper, Slot::FrameLower], &flat)
}

/// Nonzero blocks of the canonical curvature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureK {
    /// `K^d_abc = R^d_abc + 4 ω_ab ψ^d_c`
    pub frame: TensorGrid,
    /// `K^d_anc = 2 ∇_a ψ^d_c`, slots `[d, a, c]`
    pub mixed: TensorGrid,
}

pub fn curvature_k(s: &AdaptedStructure, p: &Point) -> Result<CurvatureK, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let r = schouten_values(&germ);
    let omega = values(&germ.omega);
    let psi = values(&germ.psi);
    let nabla_psi = nabla_psi_grid(&germ);
    Ok(CurvatureK {
        frame: TensorGrid::from_fn(n, &FRAME4, |i| {
            let (d, a, b, c) = (i[0], i[1], i[2], i[3]);
            r[d][a][b][c] + 4.0 * omega[a][b] * psi[d][c]
        }),
        mixed: TensorGrid::from_fn(
            n,
            &[Slot::FrameUpper, Slot::FrameLower, Slot::FrameLower],
            |i| 2.0 * nabla_psi.get(&[i[1], i[0], i[2]]),
        ),
    })
}

/// Curvature of an N-connection straight from its coefficients:
/// `K^l_ijk = E_i G^l_jk - E_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
/// - c^m_ij G^l_mk` with `[E_i, E_j] = c^m_ij E_m`.
pub fn curvature_direct(
    s: &AdaptedStructure,
    endo: &Endomorphism,
    p: &Point,
) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let m = germ.m();
    let xi = n - 1;
    let g = n_connection_duals(&germ, &endo.duals(&germ)?);
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..m {
        for b in 0..m {
            c[xi][a][b] = 2.0 * germ.omega[b][a].value;
        }
        let d = germ.xi_derivative[a].value;
        c[xi][a][xi] = d;
        c[xi][xi][a] = -d;
    }
    let slots = [
        Slot::FullUpper,
        Slot::FullLower,
        Slot::FullLower,
        Slot::FullLower,
    ];
    Ok(TensorGrid::from_fn(n, &slots, |idx| {
        let (l, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
        let mut v = germ.chart.e(i, &g[l][j][k]) - germ.chart.e(j, &g[l][i][k]);
        for q in 0..n {
            v += g[l][i][q].value * g[q][j][k].value
                - g[l][j][q].value * g[q][i][k].value
                - c[q][i][j] * g[l][q][k].value;
        }
        v
    }))
}

/// Ricci tensor of the canonical connection over the full frame:
/// `k_ab = r_ab + 4 ω_ad ψ^d_b`, `k_an = k_nn = 0`, `k_na = -∇_d ψ^d_a`.
pub fn ricci_k(s: &AdaptedStructure, p: &Point) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let m = germ.m();
    let xi = n - 1;
    let r = ricci_wagner_values(&germ);
    let omega = values(&germ.omega);
    let psi = values(&germ.psi);
    let nabla_psi = nabla_psi_grid(&germ);
    Ok(TensorGrid::from_fn(
        n,
        &[Slot::FullLower, Slot::FullLower],
        |i| {
            let (a, b) = (i[0], i[1]);
            if b == xi {
                0.0
            } else if a == xi {
                -(0..m).map(|d| nabla_psi.get(&[d, d, b])).sum::<f64>()
            } else {
                r[a][b] + 4.0 * (0..m).map(|d| omega[a][d] * psi[d][b]).sum::<f64>()
            }
        },
    ))
}

/// Which 2-form plays the role of `ω` in the Einstein criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaSource {
    /// `ω = dη` on the distribution.
    #[default]
    DEta,
    /// The fundamental form `Ω` restricted to the support of `dη`.
    FundamentalForm,
}

impl OmegaSource {
    pub fn name(self) -> &'static str {
        match self {
            OmegaSource::DEta => "d_eta",
            OmegaSource::FundamentalForm => "fundamental_form",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "d_eta" => Some(OmegaSource::DEta),
            "fundamental_form" => Some(OmegaSource::FundamentalForm),
            _ => None,
        }
    }
}

/// `(ω, ψ)` for the chosen source.
fn omega_psi(germ: &Germ, source: OmegaSource) -> Result<(Mat, Mat), GeometryError> {
    let omega = values(&germ.omega);
    let psi = values(&germ.psi);
    match source {
        OmegaSource::DEta => Ok((omega, psi)),
        OmegaSource::FundamentalForm => {
            let m = germ.m();
            let g = values(&germ.g);
            let ginv = values(&germ.ginv);
            let proj = linalg::metric_image_projector(&psi, &g, SUPPORT_REL_TOL)
                .ok_or(GeometryError::NotPositiveDefinite(f64::NAN))?;
            let big = values(&germ.fundamental);
            // Ω̂(X, Y) = Ω(ΠX, ΠY)
            let pt: Mat = (0..m)
                .map(|j| (0..m).map(|i| proj[i][j]).collect())
                .collect();
            let hat = linalg::matmul(&linalg::matmul(&pt, &big), &proj);
            let psi_hat = (0..m)
                .map(|b| {
                    (0..m)
                        .map(|a| (0..m).map(|c| ginv[b][c] * hat[a][c]).sum())
                        .collect()
                })
                .collect();
            Ok((hat, psi_hat))
        }
    }
}

/// `r_ab - 4 ω_da ψ^d_b`.
pub fn einstein_residual(
    s: &AdaptedStructure,
    p: &Point,
    source: OmegaSource,
) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let m = germ.m();
    let r = ricci_wagner_values(&germ);
    let (omega, psi) = omega_psi(&germ, source)?;
    Ok(TensorGrid::from_fn(
        germ.n(),
        &[Slot::FrameLower, Slot::FrameLower],
        |i| {
            let (a, b) = (i[0], i[1]);
            r[a][b] - 4.0 * (0..m).map(|d| omega[d][a] * psi[d][b]).sum::<f64>()
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinReport {
    pub source: OmegaSource,
    pub holds: bool,
    pub max_residual: f64,
    pub samples: usize,
    /// Max-abs residual at each sample, in sample order.
    pub per_sample: Vec<f64>,
    /// `max |∇ω|`, the parallel-torsion hypothesis.
    pub parallel_torsion_residual: f64,
}

pub fn einstein_check(
    s: &AdaptedStructure,
    samples: usize,
    seed: u64,
    tol: f64,
    source: OmegaSource,
) -> Result<EinsteinReport, GeometryError> {
    let rows: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let p = s.chart().sample(seed, i)?;
            let res = einstein_residual(s, &p, source)?.max_abs();
            let par = nabla_omega(s, &p)?.max_abs();
            Ok((res, par))
        })
        .collect::<Result<_, GeometryError>>()?;
    let max_residual = rows.iter().fold(0.0_f64, |a, r| a.max(r.0));
    Ok(EinsteinReport {
        source,
        holds: max_residual < tol,
        max_residual,
        samples,
        per_sample: rows.iter().map(|r| r.0).collect(),
        parallel_torsion_residual: rows.iter().fold(0.0_f64, |a, r| a.max(r.1)),
    })
}
