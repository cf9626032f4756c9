use std::fmt;

use crate::error::GeometryError;

/// Index slot tag of a [`TensorGrid`].
///
/// Frame slots range over the `n - 1` directions `e_a` spanning the
/// distribution. Full slots range over `e_1 .. e_{n-1}, ξ`, with `ξ` last.
/// Coordinate slots range over the `n` chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    FrameLower,
    FrameUpper,
    FullLower,
    FullUpper,
    CoordLower,
    CoordUpper,
}

impl Slot {
    fn extent(self, n: usize) -> usize {
        match self {
            Slot::FrameLower | Slot::FrameUpper => n - 1,
            _ => n,
        }
    }

    fn is_full(self) -> bool {
        matches!(self, Slot::FullLower | Slot::FullUpper)
    }
}

/// Dense real components of a tensor at a point, row-major in slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    n: usize,
    slots: Vec<Slot>,
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TensorGrid {
    /// Zero grid on an `n`-dimensional manifold.
    pub fn zeros(n: usize, slots: &[Slot]) -> Self {
        let shape: Vec<usize> = slots.iter().map(|s| s.extent(n)).collect();
        let len = shape.iter().product();
        TensorGrid {
            n,
            slots: slots.to_vec(),
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn from_fn(n: usize, slots: &[Slot], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut grid = TensorGrid::zeros(n, slots);
        let mut idx = vec![0; slots.len()];
        for k in 0..grid.data.len() {
            grid.data[k] = f(&idx);
            grid.advance(&mut idx);
        }
        grid
    }

    pub fn from_data(n: usize, slots: &[Slot], data: Vec<f64>) -> Result<Self, GeometryError> {
        let mut grid = TensorGrid::zeros(n, slots);
        if data.len() != grid.data.len() {
            return Err(GeometryError::Valence(format!(
                "{} components supplied for shape {:?}",
                data.len(),
                grid.shape
            )));
        }
        grid.data = data;
        Ok(grid)
    }

    fn advance(&self, idx: &mut [usize]) {
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < self.shape[k] {
                return;
            }
            idx[k] = 0;
        }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter().zip(&self.shape).fold(0, |acc, (i, s)| {
            debug_assert!(i < s);
            acc * s + i
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = self.offset(idx);
        self.data[k] = value;
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let mut idx = vec![0; self.shape.len()];
        (0..self.data.len()).map(move |_| {
            let out = idx.clone();
            self.advance(&mut idx);
            out
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &TensorGrid) -> Result<f64, GeometryError> {
        if self.shape != other.shape {
            return Err(GeometryError::Valence(format!(
                "shape {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TensorGrid {
        TensorGrid {
            data: self.data.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    /// Largest component touching a ξ/η slot; zero for admissible tensors.
    pub fn transversal_defect(&self) -> f64 {
        let xi = self.n - 1;
        self.indices()
            .filter(|idx| {
                idx.iter()
                    .zip(&self.slots)
                    .any(|(i, s)| s.is_full() && *i == xi)
            })
            .fold(0.0, |m, idx| m.max(self.get(&idx).abs()))
    }

    pub fn is_admissible(&self, tol: f64) -> bool {
        self.transversal_defect() <= tol
    }
}

impl fmt::Display for TensorGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for idx in self.indices() {
            let v = self.get(&idx);
            let label: Vec<String> = idx
                .iter()
                .zip(&self.slots)
                .map(|(i, s)| {
                    if s.is_full() && *i == self.n - 1 {
                        "n".to_string()
                    } else {
                        (i + 1).to_string()
                    }
                })
                .collect();
            writeln!(f, "[{}] {v:.16e}", label.join(","))?;
        }
        Ok(())
    }
}
