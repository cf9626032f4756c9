//! Forward-mode differentiation carriers.
//!
//! [`Jet`] tracks value, gradient and Hessian of a scalar with respect to the
//! chart coordinates and is what expression evaluation produces. [`Dual`] is
//! its first-order truncation: derived quantities such as the frame metric
//! derivatives or the nonholonomy form are built as duals so that one more
//! frame derivative can still be taken of them.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::EvalError;

/// Value, gradient and Hessian of a scalar at a point.
///
/// The Hessian is stored row-major and is symmetric bit-for-bit: every
/// operation fills the upper triangle and mirrors it.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Jet {
    pub fn constant(n: usize, value: f64) -> Self {
        Jet {
            value,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    pub fn variable(n: usize, index: usize, value: f64) -> Self {
        let mut jet = Jet::constant(n, value);
        jet.grad[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| self.hess[i * n..(i + 1) * n].to_vec())
            .collect()
    }

    /// First-order truncation.
    pub fn to_dual(&self) -> Dual {
        Dual {
            value: self.value,
            grad: self.grad.clone(),
        }
    }

    /// `∂_k` of this jet, which is known to first order.
    pub fn partial(&self, k: usize) -> Dual {
        let n = self.dim();
        Dual {
            value: self.grad[k],
            grad: self.hess[k * n..(k + 1) * n].to_vec(),
        }
    }

    fn fill_hess(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = entry(i, j);
                hess[i * n + j] = v;
                hess[j * n + i] = v;
            }
        }
        hess
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.dim();
        Jet {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess: Jet::fill_hess(n, |i, j| {
                f1 * self.hess[i * n + j] + f2 * (self.grad[i] * self.grad[j])
            }),
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        Jet {
            value: self.value + other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a + b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        Jet {
            value: self.value - other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a - b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.dim();
        let (a, b) = (self.value, other.value);
        Jet {
            value: a * b,
            grad: zip_with(&self.grad, &other.grad, |ga, gb| a * gb + b * ga),
            hess: Jet::fill_hess(n, |i, j| {
                a * other.hess[i * n + j]
                    + b * self.hess[i * n + j]
                    + (self.grad[i] * other.grad[j] + other.grad[i] * self.grad[j])
            }),
        }
    }

    pub fn recip(&self) -> Result<Jet, EvalError> {
        let v = self.value;
        if v == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, EvalError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, k: i32) -> Result<Jet, EvalError> {
        if k == 0 {
            return Ok(Jet::constant(self.dim(), 1.0));
        }
        let v = self.value;
        if k < 0 && v == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        let kf = f64::from(k);
        Ok(self.chain(
            v.powi(k),
            kf * v.powi(k - 1),
            kf * (kf - 1.0) * v.powi(k - 2),
        ))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Jet, EvalError> {
        let v = self.value;
        if v <= 0.0 {
            return Err(EvalError::LogOfNonPositive(v));
        }
        Ok(self.chain(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sqrt(&self) -> Result<Jet, EvalError> {
        let v = self.value;
        if v < 0.0 {
            return Err(EvalError::SqrtOfNegative(v));
        }
        if v == 0.0 {
            return Err(EvalError::SqrtAtZero);
        }
        let s = v.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (s * v)))
    }
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// Value and gradient of a scalar at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual {
    pub fn constant(n: usize, value: f64) -> Self {
        Dual {
            value,
            grad: vec![0.0; n],
        }
    }

    pub fn zero(n: usize) -> Self {
        Dual::constant(n, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn scale(&self, s: f64) -> Dual {
        Dual {
            value: self.value * s,
            grad: self.grad.iter().map(|g| g * s).collect(),
        }
    }

    pub fn recip(&self) -> Result<Dual, EvalError> {
        if self.value == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        let d = -1.0 / (self.value * self.value);
        Ok(Dual {
            value: 1.0 / self.value,
            grad: self.grad.iter().map(|g| d * g).collect(),
        })
    }
}

impl Add for &Dual {
    type Output = Dual;
    fn add(self, rhs: &Dual) -> Dual {
        Dual {
            value: self.value + rhs.value,
            grad: zip_with(&self.grad, &rhs.grad, |a, b| a + b),
        }
    }
}

impl Sub for &Dual {
    type Output = Dual;
    fn sub(self, rhs: &Dual) -> Dual {
        Dual {
            value: self.value - rhs.value,
            grad: zip_with(&self.grad, &rhs.grad, |a, b| a - b),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &Dual {
    type Output = Dual;
    fn mul(self, rhs: &Dual) -> Dual {
        let (a, b) = (self.value, rhs.value);
        Dual {
            value: a * b,
            grad: zip_with(&self.grad, &rhs.grad, |ga, gb| a * gb + b * ga),
        }
    }
}

impl Neg for &Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<Dual> for Dual {
            type Output = Dual;
            fn $m(self, rhs: Dual) -> Dual { (&self).$m(&rhs) }
        }
        impl $tr<&Dual> for Dual {
            type Output = Dual;
            fn $m(self, rhs: &Dual) -> Dual { (&self).$m(rhs) }
        }
        impl $tr<Dual> for &Dual {
            type Output = Dual;
            fn $m(self, rhs: Dual) -> Dual { self.$m(&rhs) }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self.scale(-1.0)
    }
}

/// Sum of duals; `n` is needed for the empty sum.
pub fn dual_sum(n: usize, items: impl IntoIterator<Item = Dual>) -> Dual {
    items.into_iter().fold(Dual::zero(n), |acc, d| &acc + &d)
}
