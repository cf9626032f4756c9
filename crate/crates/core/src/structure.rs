//! Almost contact metric structures in adapted charts.
//!
//! The frame metric `g_ab` and the endomorphism `φ^b_a` are given on the
//! distribution; `g(ξ, ξ) = 1`, `g(ξ, e_a) = 0` and `φξ = 0` are implicit.
//! Matrices of `φ` are stored with the upper index as row, so `phi[b][a]`
//! is `φ^b_a` and `φ e_a = φ^b_a e_b`.

use std::sync::Arc;

use crate::chart::{AdaptedChart, ChartGerm, Point};
use crate::error::GeometryError;
use crate::expr::ScalarField;
use crate::jet::{dual_sum, Dual, Jet};
use crate::linalg::{self, Mat};
use crate::tensor::{Slot, TensorGrid};

/// Smallest admissible eigenvalue magnitude of the frame metric.
pub const METRIC_EIGEN_TOL: f64 = 1e-9;

pub(crate) type DualMat = Vec<Vec<Dual>>;

pub(crate) fn values(m: &DualMat) -> Mat {
    m.iter()
        .map(|r| r.iter().map(|d| d.value).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct AdaptedStructure {
    chart: AdaptedChart,
    g: Vec<Vec<ScalarField>>,
    phi: Vec<Vec<ScalarField>>,
    pseudo: bool,
}

fn check_square(what: &'static str, m: &[Vec<ScalarField>], k: usize) -> Result<(), GeometryError> {
    if m.len() != k {
        return Err(GeometryError::Shape {
            what,
            expected: k,
            found: m.len(),
        });
    }
    for row in m {
        if row.len() != k {
            return Err(GeometryError::Shape {
                what,
                expected: k,
                found: row.len(),
            });
        }
    }
    Ok(())
}

impl AdaptedStructure {
    /// `pseudo` relaxes positive definiteness of `g` to nondegeneracy.
    pub fn new(
        chart: AdaptedChart,
        g: Vec<Vec<ScalarField>>,
        phi: Vec<Vec<ScalarField>>,
        pseudo: bool,
    ) -> Result<Self, GeometryError> {
        let m = chart.frame_dim();
        check_square("metric_frame", &g, m)?;
        check_square("phi_frame", &phi, m)?;
        Ok(AdaptedStructure {
            chart,
            g,
            phi,
            pseudo,
        })
    }

    /// Builds a structure from expression text over the chart coordinates.
    pub fn from_text(
        chart: AdaptedChart,
        g: &[Vec<&str>],
        phi: &[Vec<&str>],
    ) -> Result<Self, GeometryError> {
        let coords = chart.coords().clone();
        let parse = |rows: &[Vec<&str>]| -> Result<Vec<Vec<ScalarField>>, GeometryError> {
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|t| Ok(ScalarField::parse(t, coords.clone())?))
                        .collect()
                })
                .collect()
        };
        let g = parse(g)?;
        let phi = parse(phi)?;
        AdaptedStructure::new(chart, g, phi, false)
    }

    pub fn chart(&self) -> &AdaptedChart {
        &self.chart
    }

    pub fn metric(&self) -> &[Vec<ScalarField>] {
        &self.g
    }

    pub fn phi(&self) -> &[Vec<ScalarField>] {
        &self.phi
    }

    pub fn is_pseudo(&self) -> bool {
        self.pseudo
    }

    pub fn with_phi(&self, phi: Vec<Vec<ScalarField>>) -> Result<Self, GeometryError> {
        AdaptedStructure::new(self.chart.clone(), self.g.clone(), phi, self.pseudo)
    }

    pub fn with_metric(&self, g: Vec<Vec<ScalarField>>) -> Result<Self, GeometryError> {
        AdaptedStructure::new(self.chart.clone(), g, self.phi.clone(), self.pseudo)
    }

    /// Coordinate components `(Γ^n_1, .., Γ^n_{n-1}, 1)` of `η`.
    pub fn eta_components(&self) -> Vec<ScalarField> {
        let coords: Arc<[String]> = self.chart.coords().clone();
        let mut out = self.chart.gamma().to_vec();
        out.push(ScalarField::constant(1.0, coords));
        out
    }

    pub(crate) fn germ(&self, p: &Point) -> Result<Germ, GeometryError> {
        Germ::new(self, p)
    }

    pub fn validate_axioms(&self, p: &Point) -> Result<AxiomResiduals, GeometryError> {
        let x = p.coords();
        let m = self.chart.frame_dim();
        let n = self.chart.dim();
        let eval = |rows: &[Vec<ScalarField>]| -> Result<Mat, GeometryError> {
            rows.iter()
                .map(|r| r.iter().map(|f| Ok(f.evaluate(x)?)).collect())
                .collect()
        };
        let g = eval(&self.g)?;
        let phi = eval(&self.phi)?;
        let mut gamma = self
            .chart
            .gamma()
            .iter()
            .map(|f| f.evaluate(x))
            .collect::<Result<Vec<_>, _>>()?;
        gamma.push(1.0);

        let phi2 = linalg::matmul(&phi, &phi);
        let mut axiom1 = 0.0_f64;
        let mut axiom3 = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                let delta = if a == b { 1.0 } else { 0.0 };
                axiom1 = axiom1.max((phi2[a][b] + delta).abs());
                let pulled: f64 = (0..m)
                    .flat_map(|c| (0..m).map(move |d| (c, d)))
                    .map(|(c, d)| phi[c][a] * phi[d][b] * g[c][d])
                    .sum();
                axiom3 = axiom3.max((pulled - g[a][b]).abs());
            }
        }

        // Full frame representation: ξ is the last basis vector, η the last
        // coframe element, so these consequences hold by construction.
        let full_phi = pad(&phi, n);
        let full_g = {
            let mut out = pad(&g, n);
            out[n - 1][n - 1] = 1.0;
            out
        };
        let mut eta_frame = vec![0.0; n];
        eta_frame[n - 1] = 1.0;
        let mut xi_coord = vec![0.0; n];
        xi_coord[n - 1] = 1.0;
        let eta_of_xi: f64 = gamma.iter().zip(&xi_coord).map(|(a, b)| a * b).sum();
        let axiom2 = (eta_of_xi - 1.0).abs();
        let phi_xi = (0..n).fold(0.0_f64, |acc, k| acc.max(full_phi[k][n - 1].abs()));
        let eta_phi = (0..n).fold(0.0_f64, |acc, k| acc.max(full_phi[n - 1][k].abs()));
        let eta_metric = (0..n).fold(0.0_f64, |acc, k| {
            acc.max((full_g[k][n - 1] - eta_frame[k]).abs())
        });
        Ok(AxiomResiduals {
            axiom1,
            axiom2,
            axiom3,
            phi_xi,
            eta_phi,
            eta_metric,
        })
    }

    pub fn derived(&self, p: &Point) -> Result<DerivedTensors, GeometryError> {
        let germ = self.germ(p)?;
        let n = self.chart.dim();
        let grid =
            |slots: &[Slot], m: &DualMat| TensorGrid::from_fn(n, slots, |i| m[i[0]][i[1]].value);
        let lower = [Slot::FrameLower, Slot::FrameLower];
        let mixed = [Slot::FrameUpper, Slot::FrameLower];
        let psi = values(&germ.psi);
        let trace_psi_sq = linalg::matmul(&psi, &psi)
            .iter()
            .enumerate()
            .map(|(a, row)| row[a])
            .sum();
        Ok(DerivedTensors {
            fundamental: grid(&lower, &germ.fundamental),
            omega: grid(&lower, &germ.omega),
            psi: grid(&mixed, &germ.psi),
            c_lower: grid(&lower, &germ.c_lower),
            c_mixed: grid(&mixed, &germ.c_mixed),
            trace_psi_sq,
        })
    }

    /// Exterior derivative of a coordinate `degree`-form whose components
    /// are listed row-major over `n^degree` coordinate indices.
    pub fn exterior_derivative(
        &self,
        degree: usize,
        form: &[ScalarField],
        p: &Point,
    ) -> Result<TensorGrid, GeometryError> {
        let n = self.chart.dim();
        let expected = n.pow(degree as u32);
        if form.len() != expected {
            return Err(GeometryError::Shape {
                what: "form components",
                expected,
                found: form.len(),
            });
        }
        let comps = form
            .iter()
            .map(|f| Ok(f.evaluate_jet(p.coords())?.to_dual()))
            .collect::<Result<Vec<_>, GeometryError>>()?;
        Ok(exterior_derivative_duals(n, degree, &comps))
    }

    /// `dη` in coordinate components.
    pub fn d_eta(&self, p: &Point) -> Result<TensorGrid, GeometryError> {
        self.exterior_derivative(1, &self.eta_components(), p)
    }

    /// `dΩ` in coordinate components.
    pub fn d_fundamental_form(&self, p: &Point) -> Result<TensorGrid, GeometryError> {
        let germ = self.germ(p)?;
        Ok(germ.d_fundamental_form())
    }
}

fn pad(m: &Mat, n: usize) -> Mat {
    let mut out = vec![vec![0.0; n]; n];
    for (i, row) in m.iter().enumerate() {
        out[i][..row.len()].copy_from_slice(row);
    }
    out
}

/// `(dα)_{i_0..i_p} = (p+1)^{-1} Σ_k (-1)^k ∂_{i_k} α_{i_0..î_k..i_p}`.
pub(crate) fn exterior_derivative_duals(n: usize, degree: usize, comps: &[Dual]) -> TensorGrid {
    let slots = vec![Slot::CoordLower; degree + 1];
    let norm = 1.0 / (degree + 1) as f64;
    TensorGrid::from_fn(n, &slots, |idx| {
        let mut sum = 0.0;
        for k in 0..=degree {
            let offset = idx
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .fold(0, |acc, (_, i)| acc * n + i);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * comps[offset].grad[idx[k]];
        }
        norm * sum
    })
}

/// Per-axiom max-abs residuals at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomResiduals {
    /// `φ² = -I + η⊗ξ`
    pub axiom1: f64,
    /// `η(ξ) = 1`
    pub axiom2: f64,
    /// `g(φX, φY) = g(X, Y) - η(X)η(Y)`
    pub axiom3: f64,
    /// `φξ = 0`
    pub phi_xi: f64,
    /// `η∘φ = 0`
    pub eta_phi: f64,
    /// `η(X) = g(X, ξ)`
    pub eta_metric: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        [
            self.axiom1,
            self.axiom2,
            self.axiom3,
            self.phi_xi,
            self.eta_phi,
            self.eta_metric,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Tensors derived from the structure at one point, in frame components.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedTensors {
    /// `Ω_ab = g(e_a, φ e_b)`
    pub fundamental: TensorGrid,
    /// `ω_ab = dη(e_a, e_b)`
    pub omega: TensorGrid,
    /// `ψ^b_a` with `g(ψ e_a, e_b) = ω_ab`
    pub psi: TensorGrid,
    /// `C_ab = ½ ∂_n g_ab`
    pub c_lower: TensorGrid,
    /// `C^b_a = g^{bc} C_ca`
    pub c_mixed: TensorGrid,
    /// `ψ^a_b ψ^b_a`
    pub trace_psi_sq: f64,
}

/// Everything needed at a point, with one derivative left on every derived
/// quantity.
#[derive(Debug, Clone)]
pub(crate) struct Germ {
    pub(crate) chart: ChartGerm,
    pub(crate) g: DualMat,
    pub(crate) ginv: DualMat,
    pub(crate) phi: DualMat,
    pub(crate) omega: DualMat,
    pub(crate) psi: DualMat,
    pub(crate) c_lower: DualMat,
    pub(crate) c_mixed: DualMat,
    pub(crate) fundamental: DualMat,
    pub(crate) xi_derivative: Vec<Dual>,
    /// `christoffel[a][b][c] = Γ^a_bc` of the internal connection.
    pub(crate) christoffel: Vec<Vec<Vec<Dual>>>,
}

fn jets(rows: &[Vec<ScalarField>], x: &[f64]) -> Result<Vec<Vec<Jet>>, GeometryError> {
    rows.iter()
        .map(|r| r.iter().map(|f| Ok(f.evaluate_jet(x)?)).collect())
        .collect()
}

fn inverse_dual(g: &DualMat) -> Result<DualMat, GeometryError> {
    let gv = values(g);
    let inv = linalg::inverse(&gv).ok_or(GeometryError::SingularMetric)?;
    let m = gv.len();
    let n = g[0][0].dim();
    let mut out: DualMat = inv
        .iter()
        .map(|r| r.iter().map(|v| Dual::constant(n, *v)).collect())
        .collect();
    for k in 0..n {
        let dk: Mat = g
            .iter()
            .map(|r| r.iter().map(|d| d.grad[k]).collect())
            .collect();
        let prod = linalg::matmul(&linalg::matmul(&inv, &dk), &inv);
        for i in 0..m {
            for j in 0..m {
                out[i][j].grad[k] = -prod[i][j];
            }
        }
    }
    Ok(out)
}

impl Germ {
    fn new(s: &AdaptedStructure, p: &Point) -> Result<Self, GeometryError> {
        let chart = s.chart.germ(p)?;
        let x = p.coords();
        let n = chart.n();
        let m = n - 1;
        let xi = n - 1;
        let g_raw = jets(&s.g, x)?;
        let phi_jets = jets(&s.phi, x)?;

        let scale = g_raw
            .iter()
            .flatten()
            .fold(0.0_f64, |a, j| a.max(j.value.abs()));
        let mut asym = 0.0_f64;
        for a in 0..m {
            for b in 0..a {
                asym = asym.max((g_raw[a][b].value - g_raw[b][a].value).abs());
            }
        }
        if asym > 1e-12 * (1.0 + scale) {
            return Err(GeometryError::AsymmetricMetric(asym));
        }
        // upper triangle is authoritative so everything downstream is exactly symmetric
        let g_jets: Vec<Vec<Jet>> = (0..m)
            .map(|a| (0..m).map(|b| g_raw[a.min(b)][a.max(b)].clone()).collect())
            .collect();
        let g: DualMat = g_jets
            .iter()
            .map(|r| r.iter().map(Jet::to_dual).collect())
            .collect();
        let eig = linalg::symmetric_eigenvalues(&values(&g));
        if s.pseudo {
            let smallest = eig.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
            if smallest <= METRIC_EIGEN_TOL {
                return Err(GeometryError::SingularMetric);
            }
        } else {
            let smallest = eig.iter().fold(f64::INFINITY, |a, e| a.min(*e));
            if smallest <= METRIC_EIGEN_TOL {
                return Err(GeometryError::NotPositiveDefinite(smallest));
            }
        }
        let ginv = inverse_dual(&g)?;
        let phi: DualMat = phi_jets
            .iter()
            .map(|r| r.iter().map(Jet::to_dual).collect())
            .collect();
        let omega = chart.omega();
        let psi: DualMat = (0..m)
            .map(|b| {
                (0..m)
                    .map(|a| dual_sum(n, (0..m).map(|c| &ginv[b][c] * &omega[a][c])))
                    .collect()
            })
            .collect();
        let c_lower: DualMat = g_jets
            .iter()
            .map(|r| r.iter().map(|j| j.partial(xi).scale(0.5)).collect())
            .collect();
        let c_mixed: DualMat = (0..m)
            .map(|b| {
                (0..m)
                    .map(|a| dual_sum(n, (0..m).map(|c| &ginv[b][c] * &c_lower[c][a])))
                    .collect()
            })
            .collect();
        let fundamental: DualMat = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| dual_sum(n, (0..m).map(|c| &g[a][c] * &phi[c][b])))
                    .collect()
            })
            .collect();
        // e_b g_cd
        let eg: Vec<Vec<Vec<Dual>>> = (0..m)
            .map(|b| {
                (0..m)
                    .map(|c| (0..m).map(|d| chart.e_jet(b, &g_jets[c][d])).collect())
                    .collect()
            })
            .collect();
        let christoffel = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        (0..m)
                            .map(|c| {
                                dual_sum(
                                    n,
                                    (0..m).map(|d| {
                                        let t = &(&eg[b][c][d] + &eg[c][b][d]) - &eg[d][b][c];
                                        &ginv[a][d] * &t
                                    }),
                                )
                                .scale(0.5)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let xi_derivative = chart.xi_derivative();
        Ok(Germ {
            chart,
            g,
            ginv,
            phi,
            omega,
            psi,
            c_lower,
            c_mixed,
            fundamental,
            xi_derivative,
            christoffel,
        })
    }

    pub(crate) fn n(&self) -> usize {
        self.chart.n()
    }

    pub(crate) fn m(&self) -> usize {
        self.chart.n() - 1
    }

    /// Frame metric on all of `TM` with `ξ` last.
    pub(crate) fn full_metric(&self) -> Mat {
        let n = self.n();
        let mut out = pad(&values(&self.g), n);
        out[n - 1][n - 1] = 1.0;
        out
    }

    /// `φ` on all of `TM` (row = upper index), `φξ = 0`.
    pub(crate) fn full_phi(&self) -> Mat {
        pad(&values(&self.phi), self.n())
    }

    pub(crate) fn full_psi(&self) -> Mat {
        pad(&values(&self.psi), self.n())
    }

    /// `D_ij = dη(E_i, E_j)` on all of `TM`.
    pub(crate) fn full_d_eta(&self) -> Mat {
        let n = self.n();
        let xi = n - 1;
        let mut out = pad(&values(&self.omega), n);
        for a in 0..xi {
            let half = 0.5 * self.xi_derivative[a].value;
            out[xi][a] = half;
            out[a][xi] = -half;
        }
        out
    }

    pub(crate) fn d_fundamental_form(&self) -> TensorGrid {
        let n = self.n();
        let m = self.m();
        let comps: Vec<Dual> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i < m && j < m {
                    self.fundamental[i][j].clone()
                } else {
                    Dual::zero(n)
                }
            })
            .collect();
        exterior_derivative_duals(n, 2, &comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn flat_axioms_and_derived() {
        let s = catalog::flat();
        let p = s.chart().sample(5, 0).unwrap();
        let ax = s.validate_axioms(&p).unwrap();
        assert_eq!(ax.max(), 0.0);
        let d = s.derived(&p).unwrap();
        assert_eq!(d.omega.max_abs(), 0.0);
        assert_eq!(d.psi.max_abs(), 0.0);
        assert_eq!(d.c_lower.max_abs(), 0.0);
        assert_eq!(d.trace_psi_sq, 0.0);
        // canonical pairs e_1 -> e_3, e_2 -> e_4
        assert_eq!(d.fundamental.get(&[2, 0]), 1.0);
        assert_eq!(d.fundamental.get(&[0, 2]), -1.0);
        assert_eq!(d.fundamental.get(&[3, 1]), 1.0);
        assert_eq!(d.fundamental.get(&[1, 3]), -1.0);
    }

    #[test]
    fn example1_axioms_and_psi() {
        let s = catalog::example1();
        for i in 0..32 {
            let p = s.chart().sample(42, i).unwrap();
            let ax = s.validate_axioms(&p).unwrap();
            assert!(ax.max() < 1e-12);
            assert_eq!(ax.axiom2, 0.0);
            assert_eq!(ax.phi_xi, 0.0);
            assert_eq!(ax.eta_phi, 0.0);
            assert_eq!(ax.eta_metric, 0.0);
            let d = s.derived(&p).unwrap();
            assert_eq!(d.psi.get(&[1, 0]), -0.5);
            assert_eq!(d.psi.get(&[0, 1]), 0.5);
            assert_eq!(d.trace_psi_sq, -0.5);
        }
    }

    #[test]
    fn doubled_phi_breaks_first_axiom_by_three() {
        let s = catalog::flat();
        let coords = s.chart().coords().clone();
        let doubled = s
            .phi()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|f| ScalarField::parse(&format!("2*({f})"), coords.clone()).unwrap())
                    .collect()
            })
            .collect();
        let s2 = s.with_phi(doubled).unwrap();
        let p = s2.chart().sample(0, 0).unwrap();
        assert_eq!(s2.validate_axioms(&p).unwrap().axiom1, 3.0);
    }

    #[test]
    fn example3_psi_at_origin() {
        let s = catalog::example3_qs();
        let p = s.chart().point(&[0.0; 5]).unwrap();
        let d = s.derived(&p).unwrap();
        assert_eq!(d.c_lower.max_abs(), 0.0);
        assert!((d.psi.get(&[1, 0]) + 0.5).abs() < 1e-15);
        // ψ^2_1 = -½ (1 + x² + y²)² away from the origin
        let p = s.chart().point(&[0.5, -0.3, 0.0, 0.2, 0.1]).unwrap();
        let d = s.derived(&p).unwrap();
        let f = 1.0 + 0.25 + 0.09;
        assert!((d.psi.get(&[1, 0]) + 0.5 * f * f).abs() < 1e-13);
    }

    #[test]
    fn singular_and_indefinite_metrics_are_rejected() {
        let chart = catalog::example1().chart().clone();
        let z = "0";
        let g = vec![
            vec!["1", z, z, z],
            vec![z, "-1", z, z],
            vec![z, z, "1", z],
            vec![z, z, z, "1"],
        ];
        let phi = vec![vec![z; 4]; 4];
        let s = AdaptedStructure::from_text(chart.clone(), &g, &phi).unwrap();
        let p = chart.sample(0, 0).unwrap();
        assert!(matches!(
            s.derived(&p),
            Err(GeometryError::NotPositiveDefinite(_))
        ));
        let pseudo = AdaptedStructure::new(
            s.chart().clone(),
            s.metric().to_vec(),
            s.phi().to_vec(),
            true,
        )
        .unwrap();
        assert!(pseudo.derived(&p).is_ok());
        let asym = vec![
            vec!["1", "0.5", z, z],
            vec![z, "1", z, z],
            vec![z, z, "1", z],
            vec![z, z, z, "1"],
        ];
        let s = AdaptedStructure::from_text(chart, &asym, &phi).unwrap();
        assert!(matches!(
            s.derived(&p),
            Err(GeometryError::AsymmetricMetric(_))
        ));
    }

    #[test]
    fn d_eta_matches_bracket_formula() {
        for s in [
            catalog::example1(),
            catalog::example2(),
            catalog::example3_qs(),
        ] {
            for i in 0..16 {
                let p = s.chart().sample(9, i).unwrap();
                let de = s.d_eta(&p).unwrap();
                let omega = s.chart().omega_frame(&p).unwrap();
                let dxi = s.chart().d_eta_xi(&p).unwrap();
                let gamma: Vec<f64> = s
                    .chart()
                    .gamma()
                    .iter()
                    .map(|f| f.evaluate(p.coords()).unwrap())
                    .collect();
                // evaluate dη on e_a = ∂_a - Γ_a ∂_n and ξ = ∂_n
                let on = |u: &[f64], v: &[f64]| -> f64 {
                    let mut acc = 0.0;
                    for i in 0..5 {
                        for j in 0..5 {
                            acc += de.get(&[i, j]) * u[i] * v[j];
                        }
                    }
                    acc
                };
                let e = |a: usize| -> Vec<f64> {
                    let mut v = vec![0.0; 5];
                    v[a] = 1.0;
                    v[4] = -gamma[a];
                    v
                };
                let xi = [0.0, 0.0, 0.0, 0.0, 1.0];
                for a in 0..4 {
                    assert!((on(&xi, &e(a)) - 0.5 * dxi[a]).abs() < 1e-10);
                    for b in 0..4 {
                        assert!((on(&e(a), &e(b)) - omega.get(&[a, b])).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn d_of_constant_two_form_vanishes() {
        let s = catalog::flat();
        let coords = s.chart().coords().clone();
        let form: Vec<ScalarField> = (0..25)
            .map(|k| {
                let (i, j) = (k / 5, k % 5);
                let v = (i as f64) - (j as f64);
                ScalarField::constant(v, coords.clone())
            })
            .collect();
        let p = s.chart().sample(1, 1).unwrap();
        assert_eq!(s.exterior_derivative(2, &form, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn example1_fundamental_form_is_closed() {
        let s = catalog::example1();
        for i in 0..32 {
            let p = s.chart().sample(42, i).unwrap();
            assert_eq!(s.d_fundamental_form(&p).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn lowering_psi_gives_omega() {
        for s in catalog::all() {
            for i in 0..16 {
                let p = s.chart().sample(3, i).unwrap();
                let d = s.derived(&p).unwrap();
                let germ = s.germ(&p).unwrap();
                let g = values(&germ.g);
                for a in 0..4 {
                    for b in 0..4 {
                        let lowered: f64 = (0..4).map(|e| g[b][e] * d.psi.get(&[e, a])).sum();
                        assert!((lowered - d.omega.get(&[a, b])).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_metric_derivative_matches_quotient_rule() {
        let s = catalog::example3_qs();
        let p = s.chart().point(&[0.4, -0.2, 0.1, 0.0, 0.3]).unwrap();
        let germ = s.germ(&p).unwrap();
        let (x, y) = (0.4_f64, -0.2_f64);
        let w = 1.0 + x * x + y * y;
        // g^11 = w², ∂_x g^11 = 4 x w
        assert!((germ.ginv[0][0].value - w * w).abs() < 1e-14);
        assert!((germ.ginv[0][0].grad[0] - 4.0 * x * w).abs() < 1e-13);
        assert!((germ.ginv[0][0].grad[1] - 4.0 * y * w).abs() < 1e-13);
    }
}
