//! Levi-Civita, internal and N-connections in adapted frames.
//!
//! Coefficients over the full frame `E_0 .. E_{n-2} = e_a`, `E_{n-1} = ξ`
//! are stored as a grid with slots `[FullUpper k, FullLower i, FullLower j]`
//! meaning `∇_{E_i} E_j = Γ^k_ij E_k`.

use crate::chart::{bracket, Point};
use crate::error::GeometryError;
use crate::expr::ScalarField;
use crate::jet::Dual;
use crate::linalg::{self, Mat};
use crate::structure::{values, AdaptedStructure, DualMat, Germ};
use crate::tensor::{Slot, TensorGrid};

const FULL3: [Slot; 3] = [Slot::FullUpper, Slot::FullLower, Slot::FullLower];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    /// Levi-Civita connection from the adapted-frame block formulas.
    LeviCivita,
    /// Levi-Civita connection from coordinate Christoffel symbols.
    LeviCivitaFromCoordinates,
    /// Connection on the distribution from the frame metric alone.
    Internal,
    /// N-connection from its coefficient table.
    NConnection,
    /// N-connection assembled from the Levi-Civita connection.
    NConnectionFromLeviCivita,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs {
    pub kind: ConnectionKind,
    pub coeffs: TensorGrid,
}

/// Endomorphism `N` of the distribution, `Nξ = 0`. Matrices are indexed
/// `[b][a] = N^b_a`.
#[derive(Debug, Clone)]
pub enum Endomorphism {
    /// `N = 2ψ`.
    Canonical,
    Constant(Vec<Vec<f64>>),
    Fields(Vec<Vec<ScalarField>>),
    /// `N = 2ψ + E` with constant `E`.
    CanonicalPlus(Vec<Vec<f64>>),
}

impl Endomorphism {
    pub fn zero(m: usize) -> Self {
        Endomorphism::Constant(vec![vec![0.0; m]; m])
    }

    pub(crate) fn duals(&self, germ: &Germ) -> Result<DualMat, GeometryError> {
        let n = germ.n();
        let m = germ.m();
        let check = |lens: Vec<usize>| {
            if lens.len() != m || lens.iter().any(|c| *c != m) {
                return Err(GeometryError::Shape {
                    what: "endomorphism",
                    expected: m,
                    found: lens.len(),
                });
            }
            Ok(())
        };
        let constant = |e: &Mat| -> DualMat {
            e.iter()
                .map(|r| r.iter().map(|v| Dual::constant(n, *v)).collect())
                .collect()
        };
        let two_psi = || -> DualMat {
            germ.psi
                .iter()
                .map(|r| r.iter().map(|d| d.scale(2.0)).collect())
                .collect()
        };
        match self {
            Endomorphism::Canonical => Ok(two_psi()),
            Endomorphism::Constant(e) => {
                check(e.iter().map(Vec::len).collect())?;
                Ok(constant(e))
            }
            Endomorphism::CanonicalPlus(e) => {
                check(e.iter().map(Vec::len).collect())?;
                let e = constant(e);
                Ok(two_psi()
                    .iter()
                    .zip(&e)
                    .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect())
                    .collect())
            }
            Endomorphism::Fields(f) => {
                check(f.iter().map(Vec::len).collect())?;
                f.iter()
                    .map(|r| {
                        r.iter()
                            .map(|s| Ok(s.evaluate_jet(&germ.chart.x)?.to_dual()))
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

fn pad_duals(m: &DualMat, n: usize) -> DualMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < m.len() && j < m.len() {
                        m[i][j].clone()
                    } else {
                        Dual::zero(n)
                    }
                })
                .collect()
        })
        .collect()
}

fn grid3(n: usize, slots: &[Slot], c: &[Vec<Vec<f64>>]) -> TensorGrid {
    TensorGrid::from_fn(n, slots, |i| c[i[0]][i[1]][i[2]])
}

/// Full-frame metric as duals (`g_nn = 1`, `g_an = 0`).
fn full_metric_duals(germ: &Germ) -> DualMat {
    let n = germ.n();
    let mut g = pad_duals(&germ.g, n);
    g[n - 1][n - 1] = Dual::constant(n, 1.0);
    g
}

/// Coordinate Christoffel symbols `[q][p][r] = Γ^q_pr` of the full metric
/// `g_ab θ^a θ^b + η ⊗ η`.
fn coordinate_christoffel(germ: &Germ) -> Result<Vec<Vec<Vec<f64>>>, GeometryError> {
    let n = germ.n();
    let m = germ.m();
    let gamma = &germ.chart.gamma;
    let one = Dual::constant(n, 1.0);
    let gamma_full: Vec<Dual> = gamma
        .iter()
        .cloned()
        .chain(std::iter::once(one.clone()))
        .collect();
    // G_pq = g_pq (frame block, zero-padded) + η_p η_q
    let big: DualMat = (0..n)
        .map(|p| {
            (0..n)
                .map(|q| {
                    let eta = &gamma_full[p] * &gamma_full[q];
                    if p < m && q < m {
                        &germ.g[p][q] + &eta
                    } else {
                        eta
                    }
                })
                .collect()
        })
        .collect();
    let inv = linalg::inverse(&values(&big)).ok_or(GeometryError::SingularMetric)?;
    let d = |a: usize, b: usize, k: usize| big[a][b].grad[k];
    Ok((0..n)
        .map(|q| {
            (0..n)
                .map(|p| {
                    (0..n)
                        .map(|r| {
                            0.5 * (0..n)
                                .map(|s| inv[q][s] * (d(r, s, p) + d(p, s, r) - d(p, r, s)))
                                .sum::<f64>()
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

pub fn lc_coordinate(s: &AdaptedStructure, p: &Point) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let c = coordinate_christoffel(&germ)?;
    Ok(grid3(
        germ.n(),
        &[Slot::CoordUpper, Slot::CoordLower, Slot::CoordLower],
        &c,
    ))
}

/// Coordinate Christoffel symbols rewritten in the adapted frame:
/// `Γ̃^k_ij = B^k_q (E_i A^q_j + A^p_i A^r_j Γ^q_pr)` with `A` the frame
/// vectors and `B` the dual coframe `(dx^a, η)`.
pub fn lc_from_coordinates(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<ConnectionCoeffs, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let xi = n - 1;
    let coord = coordinate_christoffel(&germ)?;
    let a: Vec<Vec<Dual>> = (0..n).map(|j| germ.chart.basis_field(j)).collect();
    let eta: Vec<f64> = germ
        .chart
        .gamma
        .iter()
        .map(|d| d.value)
        .chain(std::iter::once(1.0))
        .collect();
    let b = |k: usize, q: usize| -> f64 {
        if k == xi {
            eta[q]
        } else if k == q {
            1.0
        } else {
            0.0
        }
    };
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let v: Vec<f64> = (0..n)
                .map(|q| {
                    let mut acc = germ.chart.e(i, &a[j][q]);
                    for pp in 0..n {
                        for r in 0..n {
                            acc += a[i][pp].value * a[j][r].value * coord[q][pp][r];
                        }
                    }
                    acc
                })
                .collect();
            for k in 0..n {
                c[k][i][j] = (0..n).map(|q| b(k, q) * v[q]).sum();
            }
        }
    }
    Ok(ConnectionCoeffs {
        kind: ConnectionKind::LeviCivitaFromCoordinates,
        coeffs: grid3(n, &FULL3, &c),
    })
}

pub(crate) fn lc_adapted_values(germ: &Germ) -> Vec<Vec<Vec<f64>>> {
    let n = germ.n();
    let m = germ.m();
    let xi = n - 1;
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                c[cc][a][b] = germ.christoffel[cc][a][b].value;
            }
            c[xi][a][b] = germ.omega[b][a].value - germ.c_lower[a][b].value;
            let mixed = germ.c_mixed[b][a].value + germ.psi[b][a].value;
            c[b][a][xi] = mixed;
            c[b][xi][a] = mixed;
        }
        c[xi][xi][a] = -germ.xi_derivative[a].value;
        c[a][xi][xi] = (0..m)
            .map(|b| germ.ginv[a][b].value * germ.xi_derivative[b].value)
            .sum();
    }
    c
}

pub fn lc_adapted(s: &AdaptedStructure, p: &Point) -> Result<ConnectionCoeffs, GeometryError> {
    let germ = s.germ(p)?;
    Ok(ConnectionCoeffs {
        kind: ConnectionKind::LeviCivita,
        coeffs: grid3(germ.n(), &FULL3, &lc_adapted_values(&germ)),
    })
}

/// `Γ^a_bc = ½ g^{ad}(e_b g_cd + e_c g_bd - e_d g_bc)` on frame slots.
pub fn internal(s: &AdaptedStructure, p: &Point) -> Result<ConnectionCoeffs, GeometryError> {
    let germ = s.germ(p)?;
    let coeffs = TensorGrid::from_fn(
        germ.n(),
        &[Slot::FrameUpper, Slot::FrameLower, Slot::FrameLower],
        |i| germ.christoffel[i[0]][i[1]][i[2]].value,
    );
    Ok(ConnectionCoeffs {
        kind: ConnectionKind::Internal,
        coeffs,
    })
}

/// `[k][i][j] = G^k_ij` as duals: `G^a_bc = Γ^a_bc`, `G^b_na = N^b_a`,
/// `G^n_na = -∂_n Γ^n_a`, everything else zero.
pub(crate) fn n_connection_duals(germ: &Germ, nmat: &DualMat) -> Vec<Vec<Vec<Dual>>> {
    let n = germ.n();
    let m = germ.m();
    let xi = n - 1;
    let mut c = vec![vec![vec![Dual::zero(n); n]; n]; n];
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                c[a][b][cc] = germ.christoffel[a][b][cc].clone();
            }
            c[b][xi][a] = nmat[b][a].clone();
        }
        c[xi][xi][a] = -&germ.xi_derivative[a];
    }
    c
}

fn n_connection_values(germ: &Germ, nmat: &DualMat) -> Vec<Vec<Vec<f64>>> {
    n_connection_duals(germ, nmat)
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| s.iter().map(|d| d.value).collect())
                .collect()
        })
        .collect()
}

pub fn n_connection(
    s: &AdaptedStructure,
    endo: &Endomorphism,
    p: &Point,
) -> Result<ConnectionCoeffs, GeometryError> {
    let germ = s.germ(p)?;
    let nmat = endo.duals(&germ)?;
    Ok(ConnectionCoeffs {
        kind: ConnectionKind::NConnection,
        coeffs: grid3(germ.n(), &FULL3, &n_connection_values(&germ, &nmat)),
    })
}

/// The canonical connection, `N = 2ψ`.
pub fn canonical(s: &AdaptedStructure, p: &Point) -> Result<ConnectionCoeffs, GeometryError> {
    n_connection(s, &Endomorphism::Canonical, p)
}

/// `∇^N_X Y = ∇̃_X Y + (∇̃_X η)(Y) ξ - η(Y) ∇̃_X ξ - η(X)(∇̃_ξ η)(Y) ξ -
/// η(X)(C + ψ - N) Y`, evaluated term by term from the Levi-Civita
/// coefficients.
pub fn n_connection_from_levi_civita(
    s: &AdaptedStructure,
    endo: &Endomorphism,
    p: &Point,
) -> Result<ConnectionCoeffs, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let m = germ.m();
    let xi = n - 1;
    let lc = lc_adapted_values(&germ);
    let nmat = values(&endo.duals(&germ)?);
    // frame components of η and ξ
    let eta: Vec<f64> = (0..n).map(|k| if k == xi { 1.0 } else { 0.0 }).collect();
    let xi_vec = eta.clone();
    // (∇̃_i η)_j = E_i(η_j) - Γ̃^l_ij η_l, with constant η_j
    let nabla_eta =
        |i: usize, j: usize| -> f64 { -(0..n).map(|l| lc[l][i][j] * eta[l]).sum::<f64>() };
    // (∇̃_i ξ)^k = Γ̃^k_il ξ^l
    let nabla_xi = |i: usize, k: usize| -> f64 { (0..n).map(|l| lc[k][i][l] * xi_vec[l]).sum() };
    let shift = |k: usize, j: usize| -> f64 {
        if k < m && j < m {
            germ.c_mixed[k][j].value + germ.psi[k][j].value - nmat[k][j]
        } else {
            0.0
        }
    };
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                c[k][i][j] = lc[k][i][j] + nabla_eta(i, j) * xi_vec[k]
                    - eta[j] * nabla_xi(i, k)
                    - eta[i] * nabla_eta(xi, j) * xi_vec[k]
                    - eta[i] * shift(k, j);
            }
        }
    }
    Ok(ConnectionCoeffs {
        kind: ConnectionKind::NConnectionFromLeviCivita,
        coeffs: grid3(n, &FULL3, &c),
    })
}

/// Torsion `S̃(X, Y, Z) = g(S(X, Y), Z)` of an N-connection.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionReport {
    /// From the closed-form component table.
    pub table: TensorGrid,
    /// From `S(X, Y) = ∇_X Y - ∇_Y X - [X, Y]` with brackets of the frame
    /// vector fields.
    pub direct: TensorGrid,
    pub cross_check: f64,
    /// Largest violation of total antisymmetry of `table`.
    pub skew_residual: f64,
    /// `max |2ω_ab - g(N e_a, e_b)|`.
    pub criterion_residual: f64,
    pub scale: f64,
    pub is_skew: bool,
}

pub fn torsion(
    s: &AdaptedStructure,
    endo: &Endomorphism,
    p: &Point,
    tol: f64,
) -> Result<TorsionReport, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let m = germ.m();
    let xi = n - 1;
    let nmat = values(&endo.duals(&germ)?);
    let g = values(&germ.g);
    // g(N e_a, e_b) = g_bc N^c_a
    let gn = |a: usize, b: usize| -> f64 { (0..m).map(|c| g[b][c] * nmat[c][a]).sum() };
    let slots = [Slot::FullLower; 3];
    let table = TensorGrid::from_fn(n, &slots, |i| match (i[0] == xi, i[1] == xi, i[2] == xi) {
        (false, false, true) => 2.0 * germ.omega[i[0]][i[1]].value,
        (false, true, false) => -gn(i[0], i[2]),
        (true, false, false) => gn(i[1], i[2]),
        _ => 0.0,
    });

    let conn = n_connection_values(&germ, &endo.duals(&germ)?);
    let fields: Vec<_> = (0..n).map(|i| germ.chart.basis_field(i)).collect();
    let full_g = germ.full_metric();
    let mut direct = TensorGrid::zeros(n, &slots);
    for i in 0..n {
        for j in 0..n {
            let br = germ.chart.to_frame(&bracket(&fields[i], &fields[j]));
            let upper: Vec<f64> = (0..n)
                .map(|l| conn[l][i][j] - conn[l][j][i] - br[l])
                .collect();
            for k in 0..n {
                let lowered = (0..n).map(|l| full_g[k][l] * upper[l]).sum();
                direct.set(&[i, j, k], lowered);
            }
        }
    }

    let mut skew_residual = 0.0_f64;
    for idx in table.indices() {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let v = table.get(&idx);
        for w in [
            table.get(&[j, i, k]),
            table.get(&[i, k, j]),
            table.get(&[k, j, i]),
        ] {
            skew_residual = skew_residual.max((v + w).abs());
        }
    }
    let mut criterion_residual = 0.0_f64;
    for a in 0..m {
        for b in 0..m {
            criterion_residual =
                criterion_residual.max((2.0 * germ.omega[a][b].value - gn(a, b)).abs());
        }
    }
    let scale = table.max_abs();
    Ok(TorsionReport {
        cross_check: table.max_abs_diff(&direct)?,
        is_skew: skew_residual < tol * (1.0 + scale),
        table,
        direct,
        skew_residual,
        criterion_residual,
        scale,
    })
}

/// `(∇^N_k g)_ij = E_k g_ij - G^l_ki g_lj - G^l_kj g_il`, slots `[k, i, j]`.
pub fn metricity_defect(
    s: &AdaptedStructure,
    endo: &Endomorphism,
    p: &Point,
) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let n = germ.n();
    let conn = n_connection_values(&germ, &endo.duals(&germ)?);
    let g = full_metric_duals(&germ);
    Ok(TensorGrid::from_fn(n, &[Slot::FullLower; 3], |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut v = germ.chart.e(k, &g[i][j]);
        for l in 0..n {
            v -= conn[l][k][i] * g[l][j].value + conn[l][k][j] * g[i][l].value;
        }
        v
    }))
}

/// Admissible tensor field given by frame components.
#[derive(Debug, Clone)]
pub struct AdmissibleField {
    slots: Vec<Slot>,
    comps: Vec<ScalarField>,
}

impl AdmissibleField {
    /// `comps` are row-major over `(n-1)^rank` frame indices.
    pub fn new(n: usize, slots: Vec<Slot>, comps: Vec<ScalarField>) -> Result<Self, GeometryError> {
        if slots
            .iter()
            .any(|s| !matches!(s, Slot::FrameLower | Slot::FrameUpper))
        {
            return Err(GeometryError::Valence(
                "admissible fields carry frame slots only".into(),
            ));
        }
        let expected = (n - 1).pow(slots.len() as u32);
        if comps.len() != expected {
            return Err(GeometryError::Shape {
                what: "admissible field components",
                expected,
                found: comps.len(),
            });
        }
        Ok(AdmissibleField { slots, comps })
    }
}

/// `∇_c t^{a..}_{b..} = e_c t + Γ^a_cd t^{d..} - Γ^d_cb t_{d..}` over the
/// internal connection; the derivative index comes first.
pub(crate) fn internal_derivative(germ: &Germ, slots: &[Slot], comps: &[Dual]) -> TensorGrid {
    let n = germ.n();
    let m = germ.m();
    let offset = |idx: &[usize]| idx.iter().fold(0, |acc, i| acc * m + i);
    let mut out_slots = vec![Slot::FrameLower];
    out_slots.extend_from_slice(slots);
    TensorGrid::from_fn(n, &out_slots, |idx| {
        let c = idx[0];
        let t = &idx[1..];
        let mut v = germ.chart.e(c, &comps[offset(t)]);
        let mut moved = t.to_vec();
        for (k, slot) in slots.iter().enumerate() {
            for d in 0..m {
                moved[k] = d;
                let coeff = match slot {
                    Slot::FrameUpper => germ.christoffel[t[k]][c][d].value,
                    _ => -germ.christoffel[d][c][t[k]].value,
                };
                v += coeff * comps[offset(&moved)].value;
            }
            moved[k] = t[k];
        }
        v
    })
}

pub fn internal_cov_deriv(
    s: &AdaptedStructure,
    t: &AdmissibleField,
    p: &Point,
) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    if t.comps
        .first()
        .is_some_and(|f| f.coords().len() != germ.n())
    {
        return Err(GeometryError::Valence(
            "field lives on another chart".into(),
        ));
    }
    let comps = t
        .comps
        .iter()
        .map(|f| Ok(f.evaluate_jet(p.coords())?.to_dual()))
        .collect::<Result<Vec<_>, GeometryError>>()?;
    Ok(internal_derivative(&germ, &t.slots, &comps))
}

fn flatten(m: &DualMat) -> Vec<Dual> {
    m.iter().flatten().cloned().collect()
}

/// `∇_c ω_ab`.
pub fn nabla_omega(s: &AdaptedStructure, p: &Point) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    Ok(internal_derivative(
        &germ,
        &[Slot::FrameLower, Slot::FrameLower],
        &flatten(&germ.omega),
    ))
}

/// `∇_c ψ^b_a`, slots `[c, b, a]`.
pub fn nabla_psi(s: &AdaptedStructure, p: &Point) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    Ok(internal_derivative(
        &germ,
        &[Slot::FrameUpper, Slot::FrameLower],
        &flatten(&germ.psi),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiConnection {
    LeviCivita,
    Canonical,
}

/// `(∇_i φ)^k_j = E_i φ^k_j + Γ^k_il φ^l_j - Γ^l_ij φ^k_l` from full frame
/// coefficients.
pub(crate) fn cov_phi_with(germ: &Germ, conn: &[Vec<Vec<f64>>]) -> TensorGrid {
    let n = germ.n();
    let phi = pad_duals(&germ.phi, n);
    TensorGrid::from_fn(
        n,
        &[Slot::FullLower, Slot::FullUpper, Slot::FullLower],
        |idx| {
            let (i, k, j) = (idx[0], idx[1], idx[2]);
            let mut v = germ.chart.e(i, &phi[k][j]);
            for l in 0..n {
                v += conn[k][i][l] * phi[l][j].value - conn[l][i][j] * phi[k][l].value;
            }
            v
        },
    )
}

/// Covariant derivative of `φ`, slots `[i, k, j]` for `(∇_{E_i} φ)^k_j`.
pub fn cov_phi(
    s: &AdaptedStructure,
    which: PhiConnection,
    p: &Point,
) -> Result<TensorGrid, GeometryError> {
    let germ = s.germ(p)?;
    let conn = match which {
        PhiConnection::LeviCivita => lc_adapted_values(&germ),
        PhiConnection::Canonical => {
            n_connection_values(&germ, &Endomorphism::Canonical.duals(&germ)?)
        }
    };
    Ok(cov_phi_with(&germ, &conn))
}
