//! Discrete Legendre–Fenchel transforms between Hamiltonians and Lagrangians.
//!
//! Conjugation is a brute-force max over a symmetric uniform grid, per
//! torus node. Results are exact maxima of sampled values, so order of
//! scanning never matters and reflecting the grids reflects the output
//! bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Point, TorusGrid};
use crate::hamiltonian::HamiltonianSpec;

/// Uniform grid on `[-half_width, half_width]^dim` with `m` nodes per axis,
/// exactly symmetric under negation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricGrid {
    dim: usize,
    m: usize,
    half_width: f64,
}

impl SymmetricGrid {
    pub fn new(dim: usize, m: usize, half_width: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) || m < 2 || !(half_width > 0.0) {
            return Err(Error::InvalidValue(format!(
                "symmetric grid needs dim in {{1,2}}, m >= 2, half_width > 0 (got {dim}, {m}, {half_width})"
            )));
        }
        Ok(Self { dim, m, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.m - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis_node(&self, k: usize) -> f64 {
        self.half_width * (2.0 * k as f64 - (self.m - 1) as f64) / (self.m - 1) as f64
    }

    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.m, idx % self.m]
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let a = self.axis_indices(idx);
        if self.dim == 1 {
            [self.axis_node(a[0]), 0.0]
        } else {
            [self.axis_node(a[0]), self.axis_node(a[1])]
        }
    }

    /// Index of the node mirrored through the origin.
    pub fn mirror(&self, idx: usize) -> usize {
        let a = self.axis_indices(idx);
        if self.dim == 1 {
            self.m - 1 - a[0]
        } else {
            (self.m - 1 - a[0]) * self.m + (self.m - 1 - a[1])
        }
    }

    /// Sub-grid on the inner half box: nodes with `|coord| <= half_width / 2`.
    pub fn inner_half(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let p = self.point(i);
                p[0].abs() <= 0.5 * self.half_width && p[1].abs() <= 0.5 * self.half_width
            })
            .collect()
    }

    fn on_edge(&self, idx: usize) -> [i8; 2] {
        let a = self.axis_indices(idx);
        let side = |k: usize| -> i8 {
            if k == 0 {
                -1
            } else if k == self.m - 1 {
                1
            } else {
                0
            }
        };
        if self.dim == 1 {
            [side(a[0]), 0]
        } else {
            [side(a[0]), side(a[1])]
        }
    }
}

fn dot(a: Point, b: Point, dim: usize) -> f64 {
    if dim == 1 {
        a[0] * b[0]
    } else {
        a[0] * b[0] + a[1] * b[1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TransformedFrom(String),
    PointwiseMin,
    Envelope,
    Sampled,
}

/// `L(x_i, q_j)` on the torus grid times a symmetric velocity grid.
/// `+inf` marks excluded velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianTable {
    grid: TorusGrid,
    q_grid: SymmetricGrid,
    values: Vec<f64>,
    provenance: Provenance,
}

impl LagrangianTable {
    pub fn new(grid: TorusGrid, q_grid: SymmetricGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if grid.dim() != q_grid.dim() {
            return Err(Error::GridMismatch("torus and velocity grids differ in dimension".into()));
        }
        let expected = grid.len() * q_grid.len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, actual: values.len() });
        }
        crate::minplus::check_extended(&values)?;
        for i in 0..grid.len() {
            if values[i * q_grid.len()..(i + 1) * q_grid.len()].iter().all(|v| v.is_infinite()) {
                return Err(Error::InvalidValue(format!("lagrangian row {i} has no finite entry")));
            }
        }
        Ok(Self { grid, q_grid, values, provenance })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn q_grid(&self) -> &SymmetricGrid {
        &self.q_grid
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x_index: usize, q_index: usize) -> f64 {
        self.values[x_index * self.q_grid.len() + q_index]
    }

    pub fn row(&self, x_index: usize) -> &[f64] {
        let w = self.q_grid.len();
        &self.values[x_index * w..(x_index + 1) * w]
    }

    /// `x_index,q_index,value` rows, x-major.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("x_index,q_index,value\n");
        let w = self.q_grid.len();
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", k / w, k % w, crate::io::fmt_csv(*v));
        }
        s
    }

    /// Table with `q ↦ -q`, the Lagrangian of the reversed Hamiltonian.
    pub fn reflected(&self) -> Self {
        let w = self.q_grid.len();
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.grid.len() {
            for k in 0..w {
                values[i * w + k] = self.values[i * w + self.q_grid.mirror(k)];
            }
        }
        Self { grid: self.grid, q_grid: self.q_grid, values, provenance: self.provenance.clone() }
    }

    /// Per-axis linear interpolation in `q`. Computed from `|q|` with
    /// mirrored indices so that `interpolate(i, -q)` on the reflected table
    /// equals `interpolate(i, q)` here bit for bit.
    pub fn interpolate(&self, x_index: usize, q: Point) -> Result<f64> {
        let g = &self.q_grid;
        let m = g.m;
        let center = (m - 1) as f64 / 2.0;
        let step = g.step();
        let mut idx = [[0usize; 2]; 2];
        let mut w = [0.0f64; 2];
        for a in 0..g.dim {
            let s = q[a].abs() / step + center;
            if s > (m - 1) as f64 * (1.0 + 1e-12) {
                return Err(Error::Coverage { q, half_width: g.half_width });
            }
            let mut k = s.floor() as usize;
            let mut frac = s - k as f64;
            if k >= m - 1 {
                k = m - 1;
                frac = 0.0;
            }
            let k1 = (k + 1).min(m - 1);
            if q[a] < 0.0 {
                idx[a] = [m - 1 - k, m - 1 - k1];
            } else {
                idx[a] = [k, k1];
            }
            w[a] = frac;
        }
        let row = self.row(x_index);
        let val = |i0: usize, i1: usize| -> f64 {
            if g.dim == 1 {
                row[i0]
            } else {
                row[i0 * m + i1]
            }
        };
        let lerp = |a: f64, b: f64, t: f64| -> f64 {
            if t == 0.0 {
                a
            } else {
                (1.0 - t) * a + t * b
            }
        };
        let v = if g.dim == 1 {
            lerp(val(idx[0][0], 0), val(idx[0][1], 0), w[0])
        } else {
            let lo = lerp(val(idx[0][0], idx[1][0]), val(idx[0][0], idx[1][1]), w[1]);
            let hi = lerp(val(idx[0][1], idx[1][0]), val(idx[0][1], idx[1][1]), w[1]);
            lerp(lo, hi, w[0])
        };
        Ok(v + 0.0)
    }
}

/// Sampled `H(x_i, p_k)` recovered by conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledHamiltonian {
    pub grid: TorusGrid,
    pub p_grid: SymmetricGrid,
    pub values: Vec<f64>,
}

impl SampledHamiltonian {
    pub fn from_spec(spec: &HamiltonianSpec, grid: TorusGrid, p_grid: SymmetricGrid) -> Self {
        let mut values = Vec::with_capacity(grid.len() * p_grid.len());
        for i in 0..grid.len() {
            let x = grid.coords(i);
            for k in 0..p_grid.len() {
                values.push(spec.evaluate(x, p_grid.point(k)));
            }
        }
        Self { grid, p_grid, values }
    }

    pub fn value(&self, x_index: usize, p_index: usize) -> f64 {
        self.values[x_index * self.p_grid.len() + p_index]
    }
}

struct Conjugate {
    values: Vec<f64>,
    argmax: Vec<usize>,
}

/// `out[b] = max_a (⟨a, b⟩ - f[a])` per torus node, skipping `+inf` samples.
fn conjugate_rows(nodes: usize, src: &SymmetricGrid, f: &[f64], dst: &SymmetricGrid) -> Conjugate {
    let ns = src.len();
    let nd = dst.len();
    let dim = src.dim();
    let src_pts: Vec<Point> = (0..ns).map(|k| src.point(k)).collect();
    let dst_pts: Vec<Point> = (0..nd).map(|k| dst.point(k)).collect();
    let rows: Vec<(Vec<f64>, Vec<usize>)> = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let fi = &f[i * ns..(i + 1) * ns];
            let mut vals = Vec::with_capacity(nd);
            let mut args = Vec::with_capacity(nd);
            for &b in &dst_pts {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (a, (&pa, &fa)) in src_pts.iter().zip(fi).enumerate() {
                    if fa == f64::INFINITY {
                        continue;
                    }
                    let v = dot(pa, b, dim) - fa;
                    if v > best {
                        best = v;
                        arg = a;
                    }
                }
                vals.push(best + 0.0);
                args.push(arg);
            }
            (vals, args)
        })
        .collect();
    let mut values = Vec::with_capacity(nodes * nd);
    let mut argmax = Vec::with_capacity(nodes * nd);
    for (v, a) in rows {
        values.extend(v);
        argmax.extend(a);
    }
    Conjugate { values, argmax }
}

/// `L(x,q) = max_{p in p_grid} (⟨p,q⟩ - H(x,p))`.
///
/// A maximizer on the edge of the momentum box is accepted only when the
/// objective does not increase one step further out; otherwise the sup is
/// not attained in the box and the transform fails.
pub fn legendre_transform(
    spec: &HamiltonianSpec,
    grid: &TorusGrid,
    p_grid: &SymmetricGrid,
    q_grid: &SymmetricGrid,
) -> Result<LagrangianTable> {
    if p_grid.dim() != grid.dim() || q_grid.dim() != grid.dim() {
        return Err(Error::GridMismatch("momentum/velocity grid dimension differs from the torus grid".into()));
    }
    if p_grid.m() < 9 {
        return Err(Error::InvalidValue(format!("momentum grid needs at least 9 nodes per axis, got {}", p_grid.m())));
    }
    let sampled = SampledHamiltonian::from_spec(spec, *grid, *p_grid);
    let conj = conjugate_rows(grid.len(), p_grid, &sampled.values, q_grid);
    let dim = grid.dim();
    let step = p_grid.step();
    let nq = q_grid.len();
    for i in 0..grid.len() {
        let x = grid.coords(i);
        for k in 0..nq {
            let arg = conj.argmax[i * nq + k];
            let edge = p_grid.on_edge(arg);
            if edge == [0, 0] {
                continue;
            }
            let q = q_grid.point(k);
            let best = conj.values[i * nq + k];
            let p = p_grid.point(arg);
            for a in 0..dim {
                if edge[a] == 0 {
                    continue;
                }
                let mut beyond = p;
                beyond[a] += edge[a] as f64 * step;
                let v = dot(beyond, q, dim) - spec.evaluate(x, beyond);
                if v > best + 1e-12 * (1.0 + best.abs()) {
                    return Err(Error::BoundaryAttainment { x_index: i, arg: q });
                }
            }
        }
    }
    let name = serde_json::to_string(&spec.family).unwrap_or_default();
    LagrangianTable::new(*grid, *q_grid, conj.values, Provenance::TransformedFrom(name))
}

/// `H_rec(x,p) = max_q (⟨p,q⟩ - L(x,q))` at every node of `p_grid`.
///
/// A maximizer on the edge of the velocity box fails when the linear
/// extrapolation of `L` past the edge would still increase the objective.
pub fn conjugate_back(table: &LagrangianTable, p_grid: &SymmetricGrid) -> Result<SampledHamiltonian> {
    let q_grid = table.q_grid;
    if p_grid.dim() != q_grid.dim() {
        return Err(Error::GridMismatch("momentum and velocity grids differ in dimension".into()));
    }
    let conj = conjugate_rows(table.grid.len(), &q_grid, &table.values, p_grid);
    let dim = q_grid.dim();
    let np = p_grid.len();
    let m = q_grid.m();
    for i in 0..table.grid.len() {
        for k in 0..np {
            let arg = conj.argmax[i * np + k];
            let edge = q_grid.on_edge(arg);
            if edge == [0, 0] {
                continue;
            }
            let p = p_grid.point(k);
            let q = q_grid.point(arg);
            let best = conj.values[i * np + k];
            let ai = q_grid.axis_indices(arg);
            for a in 0..dim {
                if edge[a] == 0 {
                    continue;
                }
                let mut inner = ai;
                inner[a] = if edge[a] > 0 { m - 2 } else { 1 };
                let inner_idx = if dim == 1 { inner[0] } else { inner[0] * m + inner[1] };
                let l_edge = table.value(i, arg);
                let l_inner = table.value(i, inner_idx);
                if l_inner == f64::INFINITY {
                    continue;
                }
                let mut beyond = q;
                beyond[a] += edge[a] as f64 * q_grid.step();
                let l_beyond = 2.0 * l_edge - l_inner;
                let v = dot(p, beyond, dim) - l_beyond;
                if v > best + 1e-12 * (1.0 + best.abs()) {
                    return Err(Error::BoundaryAttainment { x_index: i, arg: p });
                }
            }
        }
    }
    Ok(SampledHamiltonian { grid: table.grid, p_grid: *p_grid, values: conj.values })
}

/// Legendre transform of sampled Hamiltonian values onto `q_grid` (no boundary check).
pub fn transform_samples(h: &SampledHamiltonian, q_grid: &SymmetricGrid) -> Result<LagrangianTable> {
    let conj = conjugate_rows(h.grid.len(), &h.p_grid, &h.values, q_grid);
    LagrangianTable::new(h.grid, *q_grid, conj.values, Provenance::Sampled)
}

/// Entrywise minimum of two tables on identical grids. The result need not be convex.
pub fn pointwise_min(t1: &LagrangianTable, t2: &LagrangianTable) -> Result<LagrangianTable> {
    if t1.grid != t2.grid || t1.q_grid != t2.q_grid {
        return Err(Error::GridMismatch("lagrangian tables live on different grids".into()));
    }
    let values = t1.values.iter().zip(&t2.values).map(|(a, b)| a.min(*b)).collect();
    LagrangianTable::new(t1.grid, t1.q_grid, values, Provenance::PointwiseMin)
}

/// Discrete convex envelope `L**` via conjugation through `p_grid` and back.
pub fn convex_envelope(table: &LagrangianTable, p_grid: &SymmetricGrid) -> Result<LagrangianTable> {
    let h = conjugate_rows(table.grid.len(), &table.q_grid, &table.values, p_grid);
    let back = conjugate_rows(table.grid.len(), p_grid, &h.values, &table.q_grid);
    LagrangianTable::new(table.grid, table.q_grid, back.values, Provenance::Envelope)
}

/// `σ_a(x,q) = max {⟨q,p⟩ : p in p_grid, H(x,p) <= a}`.
pub fn support_function(spec: &HamiltonianSpec, a: f64, x: Point, q: Point, p_grid: &SymmetricGrid) -> Result<f64> {
    let dim = p_grid.dim();
    let mut best = f64::NEG_INFINITY;
    for k in 0..p_grid.len() {
        let p = p_grid.point(k);
        if spec.evaluate(x, p) <= a {
            best = best.max(dot(q, p, dim));
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::EmptySublevel { x_index: 0, level: a });
    }
    Ok(best + 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvolutionReport {
    /// `max |H** - H|` over the inner half of the momentum grid.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Transform `spec`, conjugate back onto the inner half of `p_grid` (same
/// spacing, half the width), and compare with `spec` there.
pub fn involution_check(
    spec: &HamiltonianSpec,
    grid: &TorusGrid,
    p_grid: &SymmetricGrid,
    q_grid: &SymmetricGrid,
    tolerance: f64,
) -> Result<InvolutionReport> {
    let table = legendre_transform(spec, grid, p_grid, q_grid)?;
    let inner = SymmetricGrid::new(p_grid.dim(), (p_grid.m() - 1) / 2 + 1, 0.5 * p_grid.half_width())?;
    let back = conjugate_back(&table, &inner)?;
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let x = grid.coords(i);
        for k in 0..inner.len() {
            worst = worst.max((back.value(i, k) - spec.evaluate(x, inner.point(k))).abs());
        }
    }
    Ok(InvolutionReport { max_deviation: worst, tolerance, pass: worst <= tolerance })
}

/// Default tolerance for conjugation round trips, `2 max(Δp, Δq)^2`.
pub fn default_tol_legendre(p_grid: &SymmetricGrid, q_grid: &SymmetricGrid) -> f64 {
    let d = p_grid.step().max(q_grid.step());
    2.0 * d * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Potential, Symbol};

    fn setup(m: usize, w: f64) -> (TorusGrid, SymmetricGrid) {
        (TorusGrid::new(1, 8).unwrap(), SymmetricGrid::new(1, m, w).unwrap())
    }

    fn free() -> HamiltonianSpec {
        HamiltonianSpec::x_independent(Symbol::quadratic(), 5.0, 5.0).unwrap()
    }

    fn tilted(t: f64) -> HamiltonianSpec {
        HamiltonianSpec::x_independent(Symbol { radial: vec![(2, 0.5)], tilt: [t, 0.0], offset: 0.0 }, 5.0, 5.0).unwrap()
    }

    #[test]
    fn grid_is_exactly_symmetric() {
        let g = SymmetricGrid::new(1, 257, 5.0).unwrap();
        for k in 0..g.m() {
            assert_eq!(g.axis_node(k), -g.axis_node(g.m() - 1 - k));
        }
        assert_eq!(g.axis_node(128), 0.0);
    }

    #[test]
    fn quadratic_is_self_dual() {
        let (grid, pg) = setup(257, 5.0);
        let t = legendre_transform(&free(), &grid, &pg, &pg).unwrap();
        let dp = pg.step();
        for k in 0..pg.len() {
            let q = pg.point(k)[0];
            assert!((t.value(3, k) - q * q / 2.0).abs() <= dp * dp / 2.0);
        }
    }

    #[test]
    fn tilt_shifts_conjugate() {
        let (grid, pg) = setup(257, 5.0);
        let qg = SymmetricGrid::new(1, 129, 2.5).unwrap();
        let t = legendre_transform(&tilted(1.0), &grid, &pg, &qg).unwrap();
        let dp = pg.step();
        for k in 0..qg.len() {
            let q = qg.point(k)[0];
            assert!((t.value(0, k) - (q - 1.0).powi(2) / 2.0).abs() <= dp * dp / 2.0);
        }
    }

    #[test]
    fn potential_enters_with_opposite_sign() {
        let (grid, pg) = setup(257, 5.0);
        let h = HamiltonianSpec::pendulum(Potential::cos(1.0, 1), 5.0, 5.0).unwrap();
        let t = legendre_transform(&h, &grid, &pg, &pg).unwrap();
        assert_eq!(t.value(0, 128), -1.0);
    }

    #[test]
    fn boundary_attainment_is_an_error() {
        let (grid, pg) = setup(65, 2.0);
        let qg = SymmetricGrid::new(1, 65, 5.0).unwrap();
        assert!(matches!(legendre_transform(&free(), &grid, &pg, &qg), Err(Error::BoundaryAttainment { .. })));
        // exact tangency at the edge is fine
        assert!(legendre_transform(&free(), &grid, &pg, &pg).is_ok());
    }

    #[test]
    fn round_trip_recovers_convex_h() {
        let (grid, pg) = setup(257, 5.0);
        let t = legendre_transform(&free(), &grid, &pg, &pg).unwrap();
        let tol = default_tol_legendre(&pg, &pg);
        let inner = SymmetricGrid::new(1, 129, 2.5).unwrap();
        let back = conjugate_back(&t, &inner).unwrap();
        for k in 0..inner.len() {
            let p = inner.point(k)[0];
            assert!((back.value(0, k) - p * p / 2.0).abs() <= tol);
        }
    }

    #[test]
    fn min_of_tilted_lagrangians_biconjugates_to_max_hamiltonian() {
        // the velocity box plus the tilt must stay inside the momentum box
        let (grid, pg) = setup(257, 5.0);
        let qg = SymmetricGrid::new(1, 129, 2.5).unwrap();
        let l1 = legendre_transform(&tilted(1.0), &grid, &pg, &qg).unwrap();
        let l2 = legendre_transform(&tilted(-1.0), &grid, &pg, &qg).unwrap();
        let lmin = pointwise_min(&l1, &l2).unwrap();
        let inner = SymmetricGrid::new(1, 65, 1.25).unwrap();
        let back = conjugate_back(&lmin, &inner).unwrap();
        let tol = default_tol_legendre(&pg, &pg);
        for k in 0..inner.len() {
            let p = inner.point(k)[0];
            let oracle = (p * p / 2.0 + p).max(p * p / 2.0 - p);
            assert!((back.value(2, k) - oracle).abs() <= tol, "p={p}");
        }
    }

    #[test]
    fn point_mass_lagrangian_conjugates_to_linear() {
        let (grid, qg) = setup(11, 1.0);
        let mut values = vec![f64::INFINITY; grid.len() * qg.len()];
        for i in 0..grid.len() {
            values[i * qg.len() + 7] = 0.0;
        }
        let t = LagrangianTable::new(grid, qg, values, Provenance::Sampled).unwrap();
        let pg = SymmetricGrid::new(1, 9, 3.0).unwrap();
        let back = conjugate_back(&t, &pg).unwrap();
        let q0 = qg.point(7)[0];
        for k in 0..pg.len() {
            assert_eq!(back.value(0, k), pg.point(k)[0] * q0 + 0.0);
        }
    }

    #[test]
    fn pointwise_min_examples() {
        let (grid, pg) = setup(257, 5.0);
        let qg = SymmetricGrid::new(1, 81, 2.5).unwrap();
        let a = legendre_transform(&free(), &grid, &pg, &qg).unwrap();
        assert_eq!(pointwise_min(&a, &a).unwrap().values(), a.values());
        let shifted = HamiltonianSpec::x_independent(Symbol { radial: vec![(2, 0.5)], tilt: [0.0; 2], offset: -1.0 }, 5.0, 5.0).unwrap();
        let b = legendre_transform(&shifted, &grid, &pg, &qg).unwrap();
        assert_eq!(pointwise_min(&a, &b).unwrap().values(), a.values());
        let c = legendre_transform(&tilted(1.0), &grid, &pg, &qg).unwrap();
        let m = pointwise_min(&a, &c).unwrap();
        let l = m.interpolate(0, [0.5, 0.0]).unwrap();
        assert!((l - 0.125).abs() <= 2.0 * pg.step() * pg.step(), "{l}");
        let other = TorusGrid::new(1, 9).unwrap();
        let d = legendre_transform(&free(), &other, &pg, &qg).unwrap();
        assert!(pointwise_min(&a, &d).is_err());
    }

    #[test]
    fn support_function_examples() {
        let pg = SymmetricGrid::new(1, 201, 2.0).unwrap();
        let v = support_function(&free(), 0.5, [0.3, 0.0], [2.0, 0.0], &pg).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!(matches!(support_function(&free(), -0.1, [0.3, 0.0], [1.0, 0.0], &pg), Err(Error::EmptySublevel { .. })));
    }

    #[test]
    fn interpolation_is_reflection_symmetric() {
        let (grid, qg) = setup(33, 5.0);
        let pg = SymmetricGrid::new(1, 45, 6.0).unwrap();
        let t = legendre_transform(&tilted(0.7), &grid, &pg, &qg).unwrap();
        let r = t.reflected();
        for k in 0..200 {
            let q = -4.9 + 0.049 * k as f64;
            assert_eq!(t.interpolate(1, [q, 0.0]).unwrap().to_bits(), r.interpolate(1, [-q, 0.0]).unwrap().to_bits());
        }
        assert!(matches!(t.interpolate(0, [5.5, 0.0]), Err(Error::Coverage { .. })));
    }
}
