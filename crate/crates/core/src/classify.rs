//! Nijenhuis tensors and the classification ladder.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::chart::{bracket, Point, VectorField};
use crate::connection::{cov_phi_with, lc_adapted_values, n_connection_duals, Endomorphism};
use crate::error::GeometryError;
use crate::jet::Dual;
use crate::linalg::{self, Mat};
use crate::structure::{values, AdaptedStructure, Germ};
use crate::tensor::{Slot, TensorGrid};

pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// Largest residual together with the magnitude of the quantities compared.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residual {
    pub max: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(max: f64, scale: f64) -> Self {
        Residual { max, scale }
    }

    /// `max < tol · (1 + scale)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.max < tol * (1.0 + self.scale)
    }

    pub fn merge(self, other: Residual) -> Residual {
        Residual {
            max: self.max.max(other.max),
            scale: self.scale.max(other.scale),
        }
    }
}

fn max_abs_mat(m: &Mat) -> f64 {
    linalg::max_abs(m)
}

/// `N_φ`, `N⁽¹⁾_φ = N_φ + 2dη ⊗ ξ` and `Ñ_φ = N_φ + 2φ*dη ⊗ ξ` on pairs of
/// frame vectors; slots `[i, j, k]` hold the `k`-th frame component of
/// `N(E_i, E_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NijenhuisTensors {
    pub n_phi: TensorGrid,
    pub n1: TensorGrid,
    pub n_tilde: TensorGrid,
}

struct Nijenhuis {
    n_phi: Vec<Vec<Vec<f64>>>,
    /// `dη(E_i, E_j)`
    d_eta: Mat,
    /// `dη(φE_i, φE_j)`
    d_eta_phi: Mat,
}

impl Nijenhuis {
    fn compute(germ: &Germ) -> Self {
        let n = germ.n();
        let phi_full = germ.full_phi();
        let phi_duals: Vec<Vec<Dual>> = {
            let m = germ.m();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i < m && j < m {
                                germ.phi[i][j].clone()
                            } else {
                                Dual::zero(n)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let e: Vec<VectorField> = (0..n).map(|i| germ.chart.basis_field(i)).collect();
        // φE_i has frame components φ^k_i
        let phi_e: Vec<VectorField> = (0..n)
            .map(|i| {
                let frame: Vec<Dual> = (0..n).map(|k| phi_duals[k][i].clone()).collect();
                germ.chart.frame_field(&frame)
            })
            .collect();
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| (0..n).map(|l| phi_full[k][l] * v[l]).sum())
                .collect()
        };
        let frame_bracket = |a: &VectorField, b: &VectorField| germ.chart.to_frame(&bracket(a, b));
        let mut n_phi = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                let t1 = frame_bracket(&phi_e[i], &phi_e[j]);
                let t2 = apply(&apply(&frame_bracket(&e[i], &e[j])));
                let t3 = apply(&frame_bracket(&phi_e[i], &e[j]));
                let t4 = apply(&frame_bracket(&e[i], &phi_e[j]));
                for k in 0..n {
                    n_phi[i][j][k] = t1[k] + t2[k] - t3[k] - t4[k];
                }
            }
        }
        let d_eta = germ.full_d_eta();
        let d_eta_phi = linalg::matmul(&linalg::matmul(&transpose(&phi_full), &d_eta), &phi_full);
        Nijenhuis {
            n_phi,
            d_eta,
            d_eta_phi,
        }
    }

    fn n1(&self, i: usize, j: usize, k: usize) -> f64 {
        let xi = self.d_eta.len() - 1;
        self.n_phi[i][j][k] + if k == xi { 2.0 * self.d_eta[i][j] } else { 0.0 }
    }

    fn n_tilde(&self, i: usize, j: usize, k: usize) -> f64 {
        let xi = self.d_eta.len() - 1;
        self.n_phi[i][j][k]
            + if k == xi {
                2.0 * self.d_eta_phi[i][j]
            } else {
                0.0
            }
    }

    fn n_phi_scale(&self) -> f64 {
        self.n_phi
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    fn normal(&self) -> Residual {
        let n = self.d_eta.len();
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max(self.n1(i, j, k).abs());
                }
            }
        }
        Residual::new(r, self.n_phi_scale().max(2.0 * max_abs_mat(&self.d_eta)))
    }

    fn almost_normal(&self) -> Residual {
        let n = self.d_eta.len();
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max(self.n_tilde(i, j, k).abs());
                }
            }
        }
        Residual::new(
            r,
            self.n_phi_scale().max(2.0 * max_abs_mat(&self.d_eta_phi)),
        )
    }

    /// `P N⁽¹⁾ = Ñ`.
    fn projected_residual(&self) -> Residual {
        let n = self.d_eta.len();
        let xi = n - 1;
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let projected = if k == xi { 0.0 } else { self.n1(i, j, k) };
                    r = r.max((projected - self.n_tilde(i, j, k)).abs());
                }
            }
        }
        Residual::new(r, self.n_phi_scale())
    }

    /// `N⁽¹⁾ = Ñ + 2(dη(X, Y) - dη(φX, φY)) ξ`.
    fn difference_residual(&self) -> Residual {
        let n = self.d_eta.len();
        let xi = n - 1;
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let extra = if k == xi {
                        2.0 * (self.d_eta[i][j] - self.d_eta_phi[i][j])
                    } else {
                        0.0
                    };
                    r = r.max((self.n1(i, j, k) - self.n_tilde(i, j, k) - extra).abs());
                }
            }
        }
        Residual::new(r, self.n_phi_scale())
    }

    fn grids(&self) -> NijenhuisTensors {
        let n = self.d_eta.len();
        let slots = [Slot::FullLower, Slot::FullLower, Slot::FullUpper];
        NijenhuisTensors {
            n_phi: TensorGrid::from_fn(n, &slots, |i| self.n_phi[i[0]][i[1]][i[2]]),
            n1: TensorGrid::from_fn(n, &slots, |i| self.n1(i[0], i[1], i[2])),
            n_tilde: TensorGrid::from_fn(n, &slots, |i| self.n_tilde(i[0], i[1], i[2])),
        }
    }
}

fn transpose(m: &Mat) -> Mat {
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn nijenhuis_tensors(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<NijenhuisTensors, GeometryError> {
    Ok(Nijenhuis::compute(&s.germ(p)?).grids())
}

pub fn check_projected_nijenhuis(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<Residual, GeometryError> {
    Ok(Nijenhuis::compute(&s.germ(p)?).projected_residual())
}

pub fn check_nijenhuis_difference(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<Residual, GeometryError> {
    Ok(Nijenhuis::compute(&s.germ(p)?).difference_residual())
}

/// Compares `(∇_i φ)^k_j` (slots `[i, k, j]`) with `rhs(i, k, j)`.
fn compare_cov_phi(lhs: &TensorGrid, rhs: impl Fn(usize, usize, usize) -> f64) -> Residual {
    let mut r = Residual::default();
    for idx in lhs.indices() {
        let (l, v) = (lhs.get(&idx), rhs(idx[0], idx[1], idx[2]));
        r = r.merge(Residual::new((l - v).abs(), l.abs().max(v.abs())));
    }
    r
}

fn aqs_phi_derivative(germ: &Germ) -> Residual {
    let n = germ.n();
    let xi = n - 1;
    let lhs = cov_phi_with(germ, &lc_adapted_values(germ));
    let phi = germ.full_phi();
    let psi = germ.full_psi();
    let g = germ.full_metric();
    let psi_phi = linalg::matmul(&psi, &phi);
    let phi_psi = linalg::matmul(&phi, &psi);
    compare_cov_phi(&lhs, |i, k, j| {
        let mut v = 0.0;
        if k == xi {
            v += (0..n).map(|l| g[i][l] * psi_phi[l][j]).sum::<f64>();
        }
        if j == xi {
            v -= phi_psi[k][i];
        }
        if i == xi {
            v -= phi_psi[k][j] - psi_phi[k][j];
        }
        v
    })
}

fn qs_phi_derivative(germ: &Germ) -> Residual {
    let n = germ.n();
    let xi = n - 1;
    let lhs = cov_phi_with(germ, &lc_adapted_values(germ));
    let a = linalg::matmul(&germ.full_phi(), &germ.full_psi());
    let g = germ.full_metric();
    compare_cov_phi(&lhs, |i, k, j| {
        let mut v = 0.0;
        if k == xi {
            v += (0..n).map(|l| g[i][l] * a[l][j]).sum::<f64>();
        }
        if j == xi {
            v -= a[k][i];
        }
        v
    })
}

fn canonical_phi_parallel(germ: &Germ) -> Result<Residual, GeometryError> {
    let nmat = Endomorphism::Canonical.duals(germ)?;
    let conn: Vec<Vec<Vec<f64>>> = n_connection_duals(germ, &nmat)
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| s.iter().map(|d| d.value).collect())
                .collect()
        })
        .collect();
    let lhs = cov_phi_with(germ, &conn);
    let scale = germ
        .phi
        .iter()
        .flatten()
        .flat_map(|d| d.grad.iter().copied().chain(std::iter::once(d.value)))
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok(Residual::new(lhs.max_abs(), scale))
}

/// Residual of `(∇̃_X φ)Y = g(ψφY, X)ξ - η(Y)φψX - η(X)(φψ - ψφ)Y`.
pub fn check_aqs_phi_derivative(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<Residual, GeometryError> {
    Ok(aqs_phi_derivative(&s.germ(p)?))
}

/// Residual of `(∇̃_X φ)Y = g(AY, X)ξ - η(Y)AX`, `A = φψ`.
pub fn check_qs_phi_derivative(s: &AdaptedStructure, p: &Point) -> Result<Residual, GeometryError> {
    Ok(qs_phi_derivative(&s.germ(p)?))
}

/// `max |∇^N φ|` for the canonical connection.
pub fn check_canonical_phi_parallel(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<Residual, GeometryError> {
    canonical_phi_parallel(&s.germ(p)?)
}

/// The three equivalent quasi-Sasakian conditions on an AQS structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSasakianConditions {
    /// `dη = φ*dη`
    pub forms: Residual,
    /// `φψ = ψφ`
    pub commute: Residual,
    /// `A = φψ` is `g`-symmetric
    pub symmetric: Residual,
}

fn quasi_sasakian_conditions(germ: &Germ) -> QuasiSasakianConditions {
    let m = germ.m();
    let omega = values(&germ.omega);
    let phi = values(&germ.phi);
    let psi = values(&germ.psi);
    let g = values(&germ.g);
    let pulled = linalg::matmul(&linalg::matmul(&transpose(&phi), &omega), &phi);
    let forms = Residual::new(
        linalg::max_abs_diff(&omega, &pulled),
        max_abs_mat(&omega).max(max_abs_mat(&pulled)),
    );
    let phi_psi = linalg::matmul(&phi, &psi);
    let psi_phi = linalg::matmul(&psi, &phi);
    let commute = Residual::new(
        linalg::max_abs_diff(&phi_psi, &psi_phi),
        max_abs_mat(&phi_psi).max(max_abs_mat(&psi_phi)),
    );
    // g(A e_a, e_b) = g_bc A^c_a
    let ga: Mat = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| (0..m).map(|c| g[b][c] * phi_psi[c][a]).sum())
                .collect()
        })
        .collect();
    let symmetric = Residual::new(linalg::max_abs_diff(&ga, &transpose(&ga)), max_abs_mat(&ga));
    QuasiSasakianConditions {
        forms,
        commute,
        symmetric,
    }
}

pub fn check_quasi_sasakian_conditions(
    s: &AdaptedStructure,
    p: &Point,
) -> Result<QuasiSasakianConditions, GeometryError> {
    Ok(quasi_sasakian_conditions(&s.germ(p)?))
}

/// Base criteria at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SampleCriteria {
    axioms: f64,
    contact_metric: Residual,
    normal: Residual,
    almost_normal: Residual,
    d_omega_zero: Residual,
    d_eta_xi_zero: Residual,
    qs: QuasiSasakianConditions,
}

fn sample_criteria(s: &AdaptedStructure, p: &Point) -> Result<SampleCriteria, GeometryError> {
    let germ = s.germ(p)?;
    let nij = Nijenhuis::compute(&germ);
    let omega = values(&germ.omega);
    let fundamental = values(&germ.fundamental);
    let half_xi: Vec<f64> = germ.xi_derivative.iter().map(|d| 0.5 * d.value).collect();
    let half_xi_max = half_xi.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let contact_metric = Residual::new(
        linalg::max_abs_diff(&fundamental, &omega).max(half_xi_max),
        max_abs_mat(&fundamental).max(max_abs_mat(&omega)),
    );
    let d_omega = germ.d_fundamental_form();
    let d_omega_scale = germ
        .fundamental
        .iter()
        .flatten()
        .flat_map(|d| d.grad.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    let gamma_scale = germ
        .chart
        .gamma
        .iter()
        .flat_map(|d| d.grad.iter())
        .fold(0.0_f64, |a, v| a.max(0.5 * v.abs()));
    Ok(SampleCriteria {
        axioms: s.validate_axioms(p)?.max(),
        contact_metric,
        normal: nij.normal(),
        almost_normal: nij.almost_normal(),
        d_omega_zero: Residual::new(d_omega.max_abs(), d_omega_scale),
        d_eta_xi_zero: Residual::new(half_xi_max, gamma_scale),
        qs: quasi_sasakian_conditions(&germ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    pub max_residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    /// `contact_metric`, `normal`, `almost_normal`, `almost_contact_kahler`,
    /// `aqs`, `quasi_sasakian`, `d_eta_xi_zero`, `d_Omega_zero`.
    pub verdicts: BTreeMap<String, Verdict>,
    /// The three quasi-Sasakian conditions: `forms`, `commute`, `symmetric`.
    pub quasi_sasakian_conditions: BTreeMap<String, Verdict>,
    pub axiom_residual: f64,
}

impl ClassificationReport {
    pub fn holds(&self, criterion: &str) -> bool {
        self.verdicts.get(criterion).is_some_and(|v| v.holds)
    }
}

fn aggregate(items: impl Iterator<Item = Residual>) -> Residual {
    items.fold(Residual::default(), Residual::merge)
}

/// Evaluates every criterion at `samples` points drawn with `seed`.
pub fn classify(
    s: &AdaptedStructure,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ClassificationReport, GeometryError> {
    if samples == 0 {
        return Err(GeometryError::Shape {
            what: "samples",
            expected: 1,
            found: 0,
        });
    }
    let per_sample: Vec<SampleCriteria> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let p = s.chart().sample(seed, i)?;
            sample_criteria(s, &p)
        })
        .collect::<Result<_, _>>()?;

    for (i, c) in per_sample.iter().enumerate() {
        if c.axioms >= tol {
            continue;
        }
        let flags = [
            c.qs.forms.holds(tol),
            c.qs.commute.holds(tol),
            c.qs.symmetric.holds(tol),
        ];
        if flags.iter().any(|f| *f != flags[0]) {
            return Err(GeometryError::InconsistentCriteria {
                sample: i,
                detail: format!(
                    "dη = φ*dη: {}, φψ = ψφ: {}, φψ g-symmetric: {}",
                    flags[0], flags[1], flags[2]
                ),
            });
        }
    }

    let verdict = |r: Residual| Verdict {
        holds: r.holds(tol),
        max_residual: r.max,
        samples,
    };
    let combine = |parts: &[Verdict]| Verdict {
        holds: parts.iter().all(|v| v.holds),
        max_residual: parts.iter().fold(0.0, |a, v| a.max(v.max_residual)),
        samples,
    };
    let pick = |f: fn(&SampleCriteria) -> Residual| verdict(aggregate(per_sample.iter().map(f)));

    let contact_metric = pick(|c| c.contact_metric);
    let normal = pick(|c| c.normal);
    let almost_normal = pick(|c| c.almost_normal);
    let d_omega = pick(|c| c.d_omega_zero);
    let d_eta_xi = pick(|c| c.d_eta_xi_zero);
    let forms = pick(|c| c.qs.forms);
    let commute = pick(|c| c.qs.commute);
    let symmetric = pick(|c| c.qs.symmetric);
    let ack = combine(&[almost_normal, d_omega]);
    let aqs = combine(&[ack, d_eta_xi]);
    let qs = combine(&[aqs, forms, commute, symmetric]);

    let verdicts = [
        ("contact_metric", contact_metric),
        ("normal", normal),
        ("almost_normal", almost_normal),
        ("almost_contact_kahler", ack),
        ("aqs", aqs),
        ("quasi_sasakian", qs),
        ("d_eta_xi_zero", d_eta_xi),
        ("d_Omega_zero", d_omega),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let quasi_sasakian_conditions = [
        ("forms", forms),
        ("commute", commute),
        ("symmetric", symmetric),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(ClassificationReport {
        verdicts,
        quasi_sasakian_conditions,
        axiom_residual: per_sample.iter().fold(0.0, |a, c| a.max(c.axioms)),
    })
}
