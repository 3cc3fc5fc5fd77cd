//! Extended-real min-plus algebra: dense kernels, composition, application.
//!
//! Values live in `R ∪ {+inf}`. Addition saturates at `+inf` (IEEE does this
//! for us as long as `-inf` never enters), `NaN` and `-inf` are rejected at
//! construction. Only values propagate, never argmins, so every operation is
//! independent of scan order and row-parallel execution is bit-identical to
//! the sequential one.
//!
//! Kernels produced by the action pipeline are snapped onto a dyadic lattice
//! (`ACTION_QUANTUM`). Sums of lattice values are exact in `f64` while their
//! magnitude stays below [`EXACT_RANGE`], which makes composition exactly
//! associative and lets commutation residuals of a kernel with itself vanish
//! bitwise.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};

/// Lattice step for action values, `2^-36`.
pub const ACTION_QUANTUM: f64 = 1.0 / 68_719_476_736.0;

/// Magnitude below which sums of lattice values are exact, `2^16`.
pub const EXACT_RANGE: f64 = 65_536.0;

const QUANTUM_INV: f64 = 68_719_476_736.0;

/// Round a finite value to the nearest multiple of [`ACTION_QUANTUM`].
/// `+inf` passes through; `-0.0` becomes `+0.0`.
pub fn quantize(v: f64) -> f64 {
    if v.is_finite() {
        (v * QUANTUM_INV).round() / QUANTUM_INV + 0.0
    } else {
        v
    }
}

pub(crate) fn check_extended(values: &[f64]) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::InvalidValue(format!("entry {pos} is {}", values[pos])));
    }
    Ok(())
}

/// Sup-norm distance with `(+inf, +inf)` counted as 0 and `(+inf, finite)` as `+inf`.
pub fn sup_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { expected: a.len(), actual: b.len() });
    }
    let mut d = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let e = if x == f64::INFINITY && y == f64::INFINITY {
            0.0
        } else {
            (x - y).abs()
        };
        if e > d {
            d = e;
        }
    }
    Ok(d)
}

/// Dense square matrix over the min-plus semiring, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MinPlusMatrix {
    size: usize,
    data: Vec<f64>,
}

impl MinPlusMatrix {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::ShapeMismatch { expected: size * size, actual: data.len() });
        }
        check_extended(&data)?;
        Ok(Self { size, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(size, data)
    }

    /// 0 on the diagonal, `+inf` elsewhere.
    pub fn identity(size: usize) -> Self {
        let mut data = vec![f64::INFINITY; size * size];
        for i in 0..size {
            data[i * size + i] = 0.0;
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.size).map(|i| self.get(i, j)).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.get(i, i)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    fn first_degenerate_row(&self) -> Option<usize> {
        (0..self.size).find(|&i| self.row(i).iter().all(|v| *v == f64::INFINITY))
    }

    fn first_degenerate_column(&self) -> Option<usize> {
        (0..self.size).find(|&j| (0..self.size).all(|i| self.get(i, j) == f64::INFINITY))
    }

    /// `out[i][j] = min_z (self[i][z] + other[z][j])`.
    pub fn compose(&self, other: &MinPlusMatrix) -> Result<MinPlusMatrix> {
        if self.size != other.size {
            return Err(Error::ShapeMismatch { expected: self.size, actual: other.size });
        }
        if let Some(i) = self.first_degenerate_row() {
            return Err(Error::DegenerateKernel(format!("row {i} of the left factor is all +inf")));
        }
        if let Some(i) = other.first_degenerate_row() {
            return Err(Error::DegenerateKernel(format!("row {i} of the right factor is all +inf")));
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &MinPlusMatrix) -> MinPlusMatrix {
        let n = self.size;
        let mut data = vec![f64::INFINITY; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, out)| {
            let left = &self.data[i * n..(i + 1) * n];
            for (z, &a) in left.iter().enumerate() {
                if a == f64::INFINITY {
                    continue;
                }
                let right = &other.data[z * n..(z + 1) * n];
                for (o, &b) in out.iter_mut().zip(right) {
                    let v = a + b;
                    if v < *o {
                        *o = v;
                    }
                }
            }
        });
        MinPlusMatrix { size: n, data }
    }

    /// `out[j] = min_i (u[i] + self[i][j])`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.size {
            return Err(Error::ShapeMismatch { expected: self.size, actual: u.len() });
        }
        let n = self.size;
        let chunk = 64usize;
        let mut out = vec![f64::INFINITY; n];
        out.par_chunks_mut(chunk).enumerate().for_each(|(c, block)| {
            let j0 = c * chunk;
            for (i, &ui) in u.iter().enumerate() {
                if ui == f64::INFINITY {
                    continue;
                }
                let row = &self.data[i * n + j0..i * n + j0 + block.len()];
                for (o, &k) in block.iter_mut().zip(row) {
                    let v = ui + k;
                    if v < *o {
                        *o = v;
                    }
                }
            }
        });
        Ok(out)
    }

    pub fn transpose(&self) -> MinPlusMatrix {
        let n = self.size;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        MinPlusMatrix { size: n, data }
    }

    /// Entrywise minimum (the semiring sum).
    pub fn min_with(&self, other: &MinPlusMatrix) -> Result<MinPlusMatrix> {
        if self.size != other.size {
            return Err(Error::ShapeMismatch { expected: self.size, actual: other.size });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.min(*b)).collect();
        Ok(MinPlusMatrix { size: self.size, data })
    }

    /// Add `c` to every entry (`+inf` stays `+inf`).
    pub fn shifted(&self, c: f64) -> MinPlusMatrix {
        let data = self.data.iter().map(|v| v + c).collect();
        MinPlusMatrix { size: self.size, data }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<MinPlusMatrix> {
        MinPlusMatrix::new(self.size, self.data.iter().map(|&v| f(v)).collect())
    }
}

/// Elapsed time as an integer number of ticks of fixed length, so that
/// time arithmetic along compositions stays exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSpan {
    pub ticks: u64,
    pub tick: f64,
}

impl TimeSpan {
    pub fn new(ticks: u64, tick: f64) -> Self {
        Self { ticks, tick }
    }

    pub fn zero() -> Self {
        Self { ticks: 0, tick: 1.0 }
    }

    pub fn seconds(&self) -> f64 {
        self.ticks as f64 * self.tick
    }

    pub fn plus(&self, other: &TimeSpan) -> Result<TimeSpan> {
        if self.ticks == 0 {
            return Ok(*other);
        }
        if other.ticks == 0 {
            return Ok(*self);
        }
        if self.tick.to_bits() != other.tick.to_bits() {
            return Err(Error::InvalidValue(format!(
                "cannot add times with tick {} and {}",
                self.tick, other.tick
            )));
        }
        Ok(TimeSpan { ticks: self.ticks + other.ticks, tick: self.tick })
    }
}

/// Discrete time-`t` action kernel: `entry(i, j) ≈ h^t(x_i, x_j)`, start `x_i`, end `x_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionKernel {
    grid: TorusGrid,
    time: TimeSpan,
    matrix: MinPlusMatrix,
}

impl ActionKernel {
    pub fn new(grid: TorusGrid, time: TimeSpan, matrix: MinPlusMatrix) -> Result<Self> {
        if matrix.size() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), actual: matrix.size() });
        }
        if let Some(i) = matrix.first_degenerate_row() {
            return Err(Error::DegenerateKernel(format!("row {i} is all +inf")));
        }
        if let Some(j) = matrix.first_degenerate_column() {
            return Err(Error::DegenerateKernel(format!("column {j} is all +inf")));
        }
        Ok(Self { grid, time, matrix })
    }

    pub fn identity(grid: TorusGrid) -> Self {
        Self { grid, time: TimeSpan::zero(), matrix: MinPlusMatrix::identity(grid.len()) }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time.seconds()
    }

    pub fn span(&self) -> TimeSpan {
        self.time
    }

    pub fn matrix(&self) -> &MinPlusMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn row_field(&self, i: usize) -> Result<ScalarField> {
        ScalarField::new(self.grid, self.matrix.row(i).to_vec())
    }
}

fn same_grid(a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Min-plus product: the discrete `h^{t+s}` from `h^t` and `h^s`.
pub fn compose(k1: &ActionKernel, k2: &ActionKernel) -> Result<ActionKernel> {
    same_grid(&k1.grid, &k2.grid)?;
    let time = k1.time.plus(&k2.time)?;
    let matrix = k1.matrix.compose(&k2.matrix)?;
    Ok(ActionKernel { grid: k1.grid, time, matrix })
}

/// Lax–Oleinik step: `out(x_j) = min_i (u(x_i) + K(x_i, x_j))`.
pub fn apply(u: &ScalarField, k: &ActionKernel) -> Result<ScalarField> {
    same_grid(u.grid(), &k.grid)?;
    let values = k.matrix.apply(u.values())?;
    ScalarField::new(k.grid, values)
}

/// Swap start and end points, the kernel of the reversed Hamiltonian.
pub fn transpose(k: &ActionKernel) -> ActionKernel {
    ActionKernel { grid: k.grid, time: k.time, matrix: k.matrix.transpose() }
}

pub fn kernel_sup_distance(a: &ActionKernel, b: &ActionKernel) -> Result<f64> {
    same_grid(&a.grid, &b.grid)?;
    sup_distance(a.matrix.data(), b.matrix.data())
}

pub fn field_sup_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    same_grid(a.grid(), b.grid())?;
    sup_distance(a.values(), b.values())
}
