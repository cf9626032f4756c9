//! Adapted charts.
//!
//! Coordinates are `x^1 .. x^n` with `ξ = ∂_n`. The distribution is spanned
//! by `e_a = ∂_a - Γ^n_a ∂_n`, and the contact form has coordinate components
//! `η = (Γ^n_1, .., Γ^n_{n-1}, 1)`. Exterior derivatives carry the ½
//! alternation factor, so `dη(e_a, e_b) = ω_ab` with
//! `[e_a, e_b] = 2 ω_ba ∂_n`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, ParseError};
use crate::expr::ScalarField;
use crate::jet::{Dual, Jet};
use crate::linalg;
use crate::tensor::{Slot, TensorGrid};

/// Samples closer than this to a zero of an `avoid` expression are redrawn.
pub const AVOID_THRESHOLD: f64 = 1e-6;
pub const MAX_REDRAWS: usize = 1000;
/// Relative singular-value cut-off for the rank of `ω`.
pub const RANK_REL_TOL: f64 = 1e-9;
/// Absolute threshold below which `∂_n Γ^n_a` counts as zero.
pub const XI_DERIVATIVE_TOL: f64 = 1e-9;
pub const MAX_JACOBIAN_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct AdaptedChart {
    coords: Arc<[String]>,
    gamma: Vec<ScalarField>,
    domain: Vec<(f64, f64)>,
    avoid: Vec<ScalarField>,
}

/// A point of the chart domain at which every `avoid` field is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    x: Vec<f64>,
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.x
    }
}

impl AdaptedChart {
    pub fn new(
        coords: Arc<[String]>,
        gamma: Vec<ScalarField>,
        domain: Vec<(f64, f64)>,
        avoid: Vec<ScalarField>,
    ) -> Result<Self, GeometryError> {
        let n = coords.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(GeometryError::BadDimension(n));
        }
        if gamma.len() != n - 1 {
            return Err(GeometryError::Shape {
                what: "gamma",
                expected: n - 1,
                found: gamma.len(),
            });
        }
        if domain.len() != n {
            return Err(GeometryError::Shape {
                what: "domain",
                expected: n,
                found: domain.len(),
            });
        }
        Ok(AdaptedChart {
            coords,
            gamma,
            domain,
            avoid,
        })
    }

    /// Builds a chart from expression text, e.g. for fixtures and tests.
    pub fn from_text(
        coords: &[&str],
        gamma: &[&str],
        domain: &[(f64, f64)],
        avoid: &[&str],
    ) -> Result<Self, GeometryError> {
        let coords: Arc<[String]> = coords.iter().map(|s| s.to_string()).collect();
        let parse = |s: &&str| ScalarField::parse(s, coords.clone());
        let gamma = gamma.iter().map(parse).collect::<Result<_, _>>()?;
        let avoid = avoid.iter().map(parse).collect::<Result<_, _>>()?;
        AdaptedChart::new(coords.clone(), gamma, domain.to_vec(), avoid)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn frame_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn gamma(&self) -> &[ScalarField] {
        &self.gamma
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn parse_field(&self, text: &str) -> Result<ScalarField, ParseError> {
        ScalarField::parse(text, self.coords.clone())
    }

    /// Validates `x` against the domain box and the `avoid` list.
    pub fn point(&self, x: &[f64]) -> Result<Point, GeometryError> {
        if x.len() != self.dim() {
            return Err(crate::error::EvalError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            }
            .into());
        }
        for (coord, (&value, &(lo, hi))) in x.iter().zip(&self.domain).enumerate() {
            if !(lo..=hi).contains(&value) {
                return Err(GeometryError::OutsideDomain {
                    coord,
                    value,
                    lo,
                    hi,
                });
            }
        }
        self.check_avoid(x)?;
        Ok(Point { x: x.to_vec() })
    }

    fn check_avoid(&self, x: &[f64]) -> Result<(), GeometryError> {
        for (index, f) in self.avoid.iter().enumerate() {
            let value = f.evaluate(x)?.abs();
            if value < AVOID_THRESHOLD {
                return Err(GeometryError::AvoidedPoint { index, value });
            }
        }
        Ok(())
    }

    /// Deterministic sample number `index` for `seed`, independent of the
    /// order in which samples are requested.
    pub fn sample(&self, seed: u64, index: usize) -> Result<Point, GeometryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        for _ in 0..=MAX_REDRAWS {
            let x: Vec<f64> = self
                .domain
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect();
            match self.check_avoid(&x) {
                Ok(()) => return Ok(Point { x }),
                Err(GeometryError::AvoidedPoint { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(GeometryError::SamplingExhausted(MAX_REDRAWS))
    }

    pub fn samples(&self, seed: u64, count: usize) -> Result<Vec<Point>, GeometryError> {
        (0..count).map(|i| self.sample(seed, i)).collect()
    }

    pub(crate) fn germ(&self, p: &Point) -> Result<ChartGerm, GeometryError> {
        let gamma = self
            .gamma
            .iter()
            .map(|f| f.evaluate_jet(&p.x))
            .collect::<Result<_, _>>()?;
        Ok(ChartGerm::new(p.x.clone(), gamma))
    }

    fn check_frame_index(&self, a: usize) -> Result<(), GeometryError> {
        if a >= self.frame_dim() {
            return Err(GeometryError::FrameIndex {
                index: a,
                dim: self.frame_dim(),
            });
        }
        Ok(())
    }

    /// `e_a f = ∂_a f - Γ^n_a ∂_n f` at `p` (0-based `a`).
    pub fn frame_apply(&self, a: usize, f: &ScalarField, p: &Point) -> Result<f64, GeometryError> {
        self.check_frame_index(a)?;
        let jet = f.evaluate_jet(&p.x)?;
        let gamma_a = self.gamma[a].evaluate(&p.x)?;
        Ok(jet.grad[a] - gamma_a * jet.grad[self.dim() - 1])
    }

    /// `ω_ab` from `ω_ba = ½ (e_b Γ^n_a - e_a Γ^n_b)`.
    pub fn omega_frame(&self, p: &Point) -> Result<TensorGrid, GeometryError> {
        let germ = self.germ(p)?;
        let omega = germ.omega();
        Ok(TensorGrid::from_fn(
            self.dim(),
            &[Slot::FrameLower, Slot::FrameLower],
            |i| omega[i[0]][i[1]].value,
        ))
    }

    /// Coordinate components of `[e_a, e_b]`, computed from the vector fields
    /// themselves rather than from the `ω` formula.
    pub fn frame_bracket(&self, a: usize, b: usize, p: &Point) -> Result<Vec<f64>, GeometryError> {
        self.check_frame_index(a)?;
        self.check_frame_index(b)?;
        let germ = self.germ(p)?;
        Ok(bracket(&germ.basis_field(a), &germ.basis_field(b)))
    }

    /// `∂_n Γ^n_a`, which equals `2 dη(ξ, e_a)`.
    pub fn d_eta_xi(&self, p: &Point) -> Result<Vec<f64>, GeometryError> {
        let germ = self.germ(p)?;
        Ok(germ.xi_derivative_values())
    }

    /// `2p` from the matrix rank of `ω`, plus one when `∂_n Γ^n_a = 0`.
    pub fn rank_at(&self, p: &Point) -> Result<usize, GeometryError> {
        let germ = self.germ(p)?;
        Ok(germ.rank())
    }
}

/// Second-order data of the chart at one point.
#[derive(Debug, Clone)]
pub(crate) struct ChartGerm {
    pub(crate) x: Vec<f64>,
    pub(crate) gamma_jets: Vec<Jet>,
    pub(crate) gamma: Vec<Dual>,
}

impl ChartGerm {
    fn new(x: Vec<f64>, gamma_jets: Vec<Jet>) -> Self {
        let gamma = gamma_jets.iter().map(Jet::to_dual).collect();
        ChartGerm {
            x,
            gamma_jets,
            gamma,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.x.len()
    }

    pub(crate) fn xi(&self) -> usize {
        self.x.len() - 1
    }

    /// `E_i f` as a dual, with `E_a = e_a` and `E_{n-1} = ξ` (0-based).
    pub(crate) fn e_jet(&self, i: usize, f: &Jet) -> Dual {
        let xi = self.xi();
        if i == xi {
            return f.partial(xi);
        }
        &f.partial(i) - &(&self.gamma[i] * &f.partial(xi))
    }

    /// `E_i f` at the point.
    pub(crate) fn e(&self, i: usize, f: &Dual) -> f64 {
        let xi = self.xi();
        if i == xi {
            return f.grad[xi];
        }
        f.grad[i] - self.gamma[i].value * f.grad[xi]
    }

    /// `∂_n Γ^n_a` as duals.
    pub(crate) fn xi_derivative(&self) -> Vec<Dual> {
        let xi = self.xi();
        self.gamma_jets.iter().map(|j| j.partial(xi)).collect()
    }

    pub(crate) fn xi_derivative_values(&self) -> Vec<f64> {
        let xi = self.xi();
        self.gamma_jets.iter().map(|j| j.grad[xi]).collect()
    }

    /// `ω_ab = ½ (e_a Γ^n_b - e_b Γ^n_a)` as duals.
    pub(crate) fn omega(&self) -> Vec<Vec<Dual>> {
        let m = self.n() - 1;
        let e_gamma: Vec<Vec<Dual>> = (0..m)
            .map(|a| (0..m).map(|b| self.e_jet(a, &self.gamma_jets[b])).collect())
            .collect();
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| (&e_gamma[a][b] - &e_gamma[b][a]).scale(0.5))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn rank(&self) -> usize {
        let omega: Vec<Vec<f64>> = self
            .omega()
            .iter()
            .map(|row| row.iter().map(|d| d.value).collect())
            .collect();
        let even = linalg::rank(&omega, RANK_REL_TOL);
        let odd = self
            .xi_derivative_values()
            .iter()
            .all(|v| v.abs() <= XI_DERIVATIVE_TOL);
        even + usize::from(odd)
    }

    /// Coordinate components of the frame vector `E_i`.
    pub(crate) fn basis_field(&self, i: usize) -> VectorField {
        let n = self.n();
        let xi = self.xi();
        let mut v: Vec<Dual> = (0..n).map(|_| Dual::zero(n)).collect();
        v[i] = Dual::constant(n, 1.0);
        if i != xi {
            v[xi] = -&self.gamma[i];
        }
        v
    }

    /// Frame components `(X^a, η(X))` of a coordinate vector.
    pub(crate) fn to_frame(&self, v: &[f64]) -> Vec<f64> {
        let xi = self.xi();
        let mut out = v.to_vec();
        out[xi] = v[xi] + (0..xi).map(|a| self.gamma[a].value * v[a]).sum::<f64>();
        out
    }

    /// Coordinate field of a vector given by dual frame components.
    pub(crate) fn frame_field(&self, frame: &[Dual]) -> VectorField {
        let xi = self.xi();
        let mut v = frame.to_vec();
        let mut last = frame[xi].clone();
        for a in 0..xi {
            last = &last - &(&self.gamma[a] * &frame[a]);
        }
        v[xi] = last;
        v
    }
}

/// Coordinate components of a vector field, each known to first order.
pub(crate) type VectorField = Vec<Dual>;

/// `[V, W]^k = V^i ∂_i W^k - W^i ∂_i V^k`.
pub(crate) fn bracket(v: &VectorField, w: &VectorField) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| v[i].value * w[k].grad[i] - w[i].value * v[k].grad[i])
                .sum()
        })
        .collect()
}

/// Change of adapted chart `x^a = x^a(x^{a'})`, `x^n = x^{n'} + x^n(x^{a'})`.
///
/// Fields are expressed over the source (primed) coordinates.
#[derive(Debug, Clone)]
pub struct Transition {
    frame_map: Vec<ScalarField>,
    shift: ScalarField,
}

impl Transition {
    pub fn new(frame_map: Vec<ScalarField>, shift: ScalarField) -> Result<Self, GeometryError> {
        let n = shift.coords().len();
        if frame_map.len() + 1 != n {
            return Err(GeometryError::Shape {
                what: "transition frame map",
                expected: n - 1,
                found: frame_map.len(),
            });
        }
        for f in frame_map.iter().chain(std::iter::once(&shift)) {
            if f.referenced().contains(&(n - 1)) {
                return Err(GeometryError::Valence(format!(
                    "transition component `{f}` depends on the ξ coordinate"
                )));
            }
        }
        Ok(Transition { frame_map, shift })
    }

    pub fn identity(chart: &AdaptedChart) -> Self {
        let coords = chart.coords().clone();
        let frame_map = coords[..coords.len() - 1]
            .iter()
            .map(|c| ScalarField::parse(c, coords.clone()).expect("coordinate name parses"))
            .collect();
        Transition {
            frame_map,
            shift: ScalarField::constant(0.0, coords),
        }
    }

    /// Target-chart coordinates of the source point `x'`.
    pub fn image(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let mut out = self
            .frame_map
            .iter()
            .map(|f| f.evaluate(x))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(x[x.len() - 1] + self.shift.evaluate(x)?);
        Ok(out)
    }

    /// `∂x^a / ∂x^{a'}` at `x'`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, GeometryError> {
        let m = self.frame_map.len();
        self.frame_map
            .iter()
            .map(|f| Ok(f.evaluate_jet(x)?.grad[..m].to_vec()))
            .collect()
    }
}

type JacobianPair = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn checked_jacobians(transition: &Transition, x: &[f64]) -> Result<JacobianPair, GeometryError> {
    let jac = transition.jacobian(x)?;
    let cond = linalg::condition_number(&jac);
    // also rejects a NaN condition number
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(cond < MAX_JACOBIAN_CONDITION) {
        return Err(GeometryError::SingularJacobian(cond));
    }
    let inv = linalg::inverse(&jac).ok_or(GeometryError::SingularJacobian(f64::INFINITY))?;
    Ok((jac, inv))
}

/// Applies `t^a ↦ up^a_{a'} t^{a'}` on upper slots and
/// `t_b ↦ down^{b'}_b t_{b'}` on lower slots.
fn transform(
    t: &TensorGrid,
    up: &[Vec<f64>],
    down: &[Vec<f64>],
) -> Result<TensorGrid, GeometryError> {
    if t.slots()
        .iter()
        .any(|s| !matches!(s, Slot::FrameLower | Slot::FrameUpper))
    {
        return Err(GeometryError::Valence(
            "coordinate changes act on admissible tensors with frame slots".into(),
        ));
    }
    let mut current = t.clone();
    for (k, slot) in t.slots().iter().enumerate() {
        let prev = current.clone();
        let m = prev.shape()[k];
        current = TensorGrid::from_fn(t.dim(), t.slots(), |idx| {
            let mut src = idx.to_vec();
            (0..m)
                .map(|j| {
                    src[k] = j;
                    let coeff = match slot {
                        Slot::FrameUpper => up[idx[k]][j],
                        _ => down[j][idx[k]],
                    };
                    coeff * prev.get(&src)
                })
                .sum()
        });
    }
    Ok(current)
}

/// Components in the target chart of an admissible tensor given in the
/// source chart at `x'`.
pub fn change_chart(
    chart: &AdaptedChart,
    transition: &Transition,
    t: &TensorGrid,
    x_source: &[f64],
) -> Result<TensorGrid, GeometryError> {
    if t.dim() != chart.dim() || x_source.len() != chart.dim() {
        return Err(GeometryError::Valence("dimension mismatch".into()));
    }
    let (jac, inv) = checked_jacobians(transition, x_source)?;
    transform(t, &jac, &inv)
}

/// Inverse of [`change_chart`]: target-chart components back to the source.
pub fn pull_back(
    chart: &AdaptedChart,
    transition: &Transition,
    t: &TensorGrid,
    x_source: &[f64],
) -> Result<TensorGrid, GeometryError> {
    if t.dim() != chart.dim() || x_source.len() != chart.dim() {
        return Err(GeometryError::Valence("dimension mismatch".into()));
    }
    let (jac, inv) = checked_jacobians(transition, x_source)?;
    transform(t, &inv, &jac)
}
