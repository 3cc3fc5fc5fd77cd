//! Uniform periodic grids on the flat torus and scalar fields over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or vector with up to two components. One-dimensional data
/// uses the first component and keeps the second at zero.
pub type Point = [f64; 2];

/// Reduce a coordinate difference to its minimal representative in `[-1/2, 1/2)`.
pub fn torus_displacement(x: f64, y: f64) -> f64 {
    let d = y - x;
    let r = d - d.round();
    if r >= 0.5 {
        r - 1.0
    } else if r < -0.5 {
        r + 1.0
    } else {
        r
    }
}

/// Uniform grid with `n` nodes per axis on `T^dim`, `dim` in {1, 2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidValue(format!("grid dimension {dim} not in {{1,2}}")));
        }
        if n < 4 {
            return Err(Error::InvalidValue(format!("grid needs at least 4 nodes per axis, got {n}")));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Total number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis integer indices of a flat node index (row-major, axis 0 slowest).
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flat_index(&self, multi: [usize; 2]) -> usize {
        if self.dim == 1 {
            multi[0] % self.n
        } else {
            (multi[0] % self.n) * self.n + multi[1] % self.n
        }
    }

    pub fn coords(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let n = self.n as f64;
        if self.dim == 1 {
            [m[0] as f64 / n, 0.0]
        } else {
            [m[0] as f64 / n, m[1] as f64 / n]
        }
    }

    /// Nearest node to a torus point.
    pub fn nearest(&self, x: Point) -> usize {
        let n = self.n as f64;
        let snap = |c: f64| -> usize {
            let k = (c.rem_euclid(1.0) * n).round() as usize;
            k % self.n
        };
        if self.dim == 1 {
            snap(x[0])
        } else {
            self.flat_index([snap(x[0]), snap(x[1])])
        }
    }

    /// Minimal signed cell offsets from node `i` to node `j`, each in `[-n/2, n/2)`.
    pub fn cell_offset(&self, i: usize, j: usize) -> [i64; 2] {
        let a = self.multi_index(i);
        let b = self.multi_index(j);
        let n = self.n as i64;
        let reduce = |d: i64| -> i64 {
            let r = d.rem_euclid(n);
            if 2 * r >= n {
                r - n
            } else {
                r
            }
        };
        let d0 = reduce(b[0] as i64 - a[0] as i64);
        if self.dim == 1 {
            [d0, 0]
        } else {
            [d0, reduce(b[1] as i64 - a[1] as i64)]
        }
    }

    /// Minimal displacement from node `i` to node `j` in torus units.
    pub fn displacement(&self, i: usize, j: usize) -> Point {
        let c = self.cell_offset(i, j);
        let n = self.n as f64;
        [c[0] as f64 / n, c[1] as f64 / n]
    }

    /// Euclidean torus distance between two nodes.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let d = self.displacement(i, j);
        d[0].hypot(d[1])
    }

    /// Whether an axis offset sits exactly at the antipode, where both
    /// `+n/2` and `-n/2` cells are minimal representatives.
    pub fn is_antipodal(&self, offset: i64) -> bool {
        self.n.is_multiple_of(2) && offset.unsigned_abs() as usize * 2 == self.n
    }
}

/// One extended-real value per grid node. `+inf` marks unreachable nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), actual: values.len() });
        }
        crate::minplus::check_extended(&values)?;
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::InvalidValue("field has no finite entry".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    /// Zero at `node`, `+inf` elsewhere.
    pub fn point_datum(grid: TorusGrid, node: usize) -> Result<Self> {
        if node >= grid.len() {
            return Err(Error::InvalidValue(format!("node {node} out of range")));
        }
        let mut values = vec![f64::INFINITY; grid.len()];
        values[node] = 0.0;
        Self::new(grid, values)
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Add a constant to every finite entry.
    pub fn shifted(&self, c: f64) -> Self {
        let values = self.values.iter().map(|v| v + c).collect();
        Self { grid: self.grid, values }
    }

    /// Snap every finite entry onto the action lattice (see [`crate::minplus::quantize`]).
    pub fn quantized(&self) -> Self {
        let values = self.values.iter().map(|&v| crate::minplus::quantize(v)).collect();
        Self { grid: self.grid, values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_coordinate_maps_are_inverse() {
        for dim in 1..=2 {
            let g = TorusGrid::new(dim, 6).unwrap();
            for i in 0..g.len() {
                assert_eq!(g.nearest(g.coords(i)), i);
                assert_eq!(g.flat_index(g.multi_index(i)), i);
            }
        }
    }

    #[test]
    fn displacement_is_minimal_representative() {
        assert!((torus_displacement(0.1, 0.9) + 0.2).abs() < 1e-15);
        assert!((torus_displacement(0.9, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(torus_displacement(0.0, 0.5), -0.5);
        assert_eq!(torus_displacement(0.25, 0.25), 0.0);

        let g = TorusGrid::new(1, 8).unwrap();
        assert_eq!(g.cell_offset(0, 7), [-1, 0]);
        assert_eq!(g.cell_offset(7, 0), [1, 0]);
        assert_eq!(g.cell_offset(0, 4), [-4, 0]);
        assert_eq!(g.cell_offset(4, 0), [-4, 0]);
        assert!(g.is_antipodal(-4));
        assert_eq!(g.displacement(1, 3), [0.25, 0.0]);
    }

    #[test]
    fn rejects_bad_grids_and_fields() {
        assert!(TorusGrid::new(3, 8).is_err());
        assert!(TorusGrid::new(1, 3).is_err());
        let g = TorusGrid::new(1, 4).unwrap();
        assert!(ScalarField::new(g, vec![f64::INFINITY; 4]).is_err());
        assert!(ScalarField::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ScalarField::new(g, vec![0.0, f64::NEG_INFINITY, 0.0, 0.0]).is_err());
        assert!(ScalarField::new(g, vec![0.0; 3]).is_err());
        assert!(ScalarField::point_datum(g, 2).is_ok());
    }
}
