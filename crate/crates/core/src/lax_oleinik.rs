//! One-step action kernels and their min-plus powers.
//!
//! The base step of duration `δ` joins two nodes by a straight segment at
//! constant velocity `q = Δ/δ` and charges the trapezoid action
//! `δ (L(x_i, q) + L(x_j, q)) / 2`. Longer times are min-plus powers of the
//! base kernel, built by repeated doubling. Times are tracked as integer
//! multiples of `δ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use crate::hamiltonian::HamiltonianSpec;
use crate::legendre::LagrangianTable;
use crate::minplus::{self, quantize, ActionKernel, MinPlusMatrix, TimeSpan};

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_Q_MAX: f64 = 5.0;

/// Quadrature for the action of one straight step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `δ (L(x_i,q) + L(x_j,q)) / 2`.
    TrapezoidEndpoint,
    /// `δ (L(x_i,q) + 4 L(m,q) + L(x_j,q)) / 6` with `m` the midpoint of the
    /// step; at half-nodes `L(m,q)` is the four-point cubic interpolant.
    #[default]
    Simpson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub delta: f64,
    pub q_max: f64,
    pub t_max: f64,
    #[serde(default)]
    pub scheme: Scheme,
}

impl EvolutionPlan {
    /// Checks that one step can reach a neighbouring node (`δ·Q_max >= Δx`).
    pub fn new(delta: f64, q_max: f64, t_max: f64, grid: &TorusGrid) -> Result<Self> {
        if !(delta > 0.0) || !(q_max > 0.0) || !(t_max >= delta) {
            return Err(Error::InvalidValue(format!(
                "plan needs delta > 0, q_max > 0, t_max >= delta (got {delta}, {q_max}, {t_max})"
            )));
        }
        if delta * q_max < grid.spacing() {
            return Err(Error::DegenerateKernel(format!(
                "delta*q_max = {} is below the grid spacing {}; the base kernel is disconnected",
                delta * q_max,
                grid.spacing()
            )));
        }
        Ok(Self { delta, q_max, t_max, scheme: Scheme::default() })
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    /// Number of base steps that make up `t`.
    pub fn steps_for(&self, t: f64) -> Result<u64> {
        let k = (t / self.delta).round();
        if !(k >= 1.0) || ((k * self.delta) - t).abs() > 1e-9 * t.abs().max(self.delta) {
            return Err(Error::Unrepresentable {
                t,
                reason: format!("not a positive multiple of delta = {}", self.delta),
            });
        }
        Ok(k as u64)
    }

    pub fn time_of(&self, steps: u64) -> f64 {
        steps as f64 * self.delta
    }

    pub fn max_steps(&self) -> u64 {
        ((self.t_max / self.delta) + 1e-9).floor() as u64
    }

    pub fn span(&self, steps: u64) -> TimeSpan {
        TimeSpan::new(steps, self.delta)
    }
}

/// One-step kernel from a Lagrangian table with the default scheme.
pub fn base_kernel(table: &LagrangianTable, delta: f64, q_max: f64) -> Result<ActionKernel> {
    base_kernel_with(table, delta, q_max, Scheme::default())
}

/// Per-axis interpolation stencil at half-index `h` (node `h/2` when even).
fn midpoint_stencil(h: i64, n: i64) -> ([usize; 4], [f64; 4], usize) {
    let h = h.rem_euclid(2 * n);
    if h % 2 == 0 {
        ([(h / 2) as usize, 0, 0, 0], [1.0, 0.0, 0.0, 0.0], 1)
    } else {
        let k = (h - 1) / 2;
        let idx = [-1, 0, 1, 2].map(|d| (k + d).rem_euclid(n) as usize);
        (idx, [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0], 4)
    }
}

fn midpoint_value(table: &LagrangianTable, grid: &TorusGrid, half: [i64; 2], q: [f64; 2]) -> Result<f64> {
    let n = grid.n() as i64;
    let (ix, wx, cx) = midpoint_stencil(half[0], n);
    let (iy, wy, cy) = if grid.dim() == 2 { midpoint_stencil(half[1], n) } else { ([0; 4], [1.0, 0.0, 0.0, 0.0], 1) };
    let mut acc = 0.0;
    for b in 0..cy {
        let mut row = 0.0;
        for a in 0..cx {
            let node = grid.flat_index([ix[a], iy[b]]);
            let l = table.interpolate(node, q)?;
            if l == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            row += wx[a] * l;
        }
        acc += wy[b] * row;
    }
    Ok(acc)
}

/// One-step kernel from a Lagrangian table.
///
/// Velocities beyond `q_max` in sup norm are forbidden (`+inf`). At an
/// antipodal offset both minimal representatives are tried and the cheaper
/// one kept. Entries are snapped to the action lattice. Both schemes are
/// symmetric in the endpoints, so reversing `q` transposes the kernel.
pub fn base_kernel_with(table: &LagrangianTable, delta: f64, q_max: f64, scheme: Scheme) -> Result<ActionKernel> {
    if !(delta > 0.0) {
        return Err(Error::InvalidValue(format!("delta must be positive, got {delta}")));
    }
    if table.q_grid().half_width() < q_max * (1.0 - 1e-12) {
        return Err(Error::Coverage { q: [q_max, q_max], half_width: table.q_grid().half_width() });
    }
    let grid = *table.grid();
    let n = grid.len();
    let nf = grid.n() as f64;
    let cap = q_max * (1.0 + 1e-12);
    let mut data = vec![f64::INFINITY; n * n];
    data.par_chunks_mut(n).enumerate().try_for_each(|(i, row)| -> Result<()> {
        let mi = grid.multi_index(i);
        for (j, out) in row.iter_mut().enumerate() {
            let off = grid.cell_offset(i, j);
            let mut choices: [[i64; 2]; 4] = [off; 4];
            let mut count = 1;
            for a in 0..grid.dim() {
                if grid.is_antipodal(off[a]) {
                    for c in 0..count {
                        let mut alt = choices[c];
                        alt[a] = -alt[a];
                        choices[count + c] = alt;
                    }
                    count *= 2;
                }
            }
            let mut best = f64::INFINITY;
            for c in &choices[..count] {
                let q = [(c[0] as f64 / nf) / delta, (c[1] as f64 / nf) / delta];
                if q[0].abs() > cap || q[1].abs() > cap {
                    continue;
                }
                let ends = table.interpolate(i, q)? + table.interpolate(j, q)?;
                let v = match scheme {
                    Scheme::TrapezoidEndpoint => delta * ends / 2.0,
                    Scheme::Simpson => {
                        let half = [2 * mi[0] as i64 + c[0], 2 * mi[1] as i64 + c[1]];
                        let mid = midpoint_value(table, &grid, half, q)?;
                        delta * (ends + 4.0 * mid) / 6.0
                    }
                };
                if v < best {
                    best = v;
                }
            }
            *out = quantize(best);
        }
        Ok(())
    })?;
    ActionKernel::new(grid, TimeSpan::new(1, delta), MinPlusMatrix::new(n, data)?)
}

/// Doubling powers `K^(2^k)` of a base kernel.
#[derive(Clone, Debug)]
pub struct KernelPowers {
    doublings: Vec<ActionKernel>,
}

impl KernelPowers {
    /// Precompute `K^(2^k)` for all `2^k <= max_steps`.
    pub fn new(base: ActionKernel, max_steps: u64) -> Result<Self> {
        let mut doublings = vec![base];
        while (1u64 << doublings.len()) <= max_steps.max(1) {
            let last = doublings.last().expect("non-empty");
            let next = minplus::compose(last, last)?;
            doublings.push(next);
        }
        Ok(Self { doublings })
    }

    pub fn base(&self) -> &ActionKernel {
        &self.doublings[0]
    }

    pub fn doublings(&self) -> &[ActionKernel] {
        &self.doublings
    }

    pub fn max_steps(&self) -> u64 {
        (1u64 << self.doublings.len()) - 1
    }

    /// `K^steps` as a product of doubling powers, lowest bit first.
    pub fn power(&self, steps: u64) -> Result<ActionKernel> {
        if steps == 0 || steps > self.max_steps() {
            return Err(Error::Unrepresentable {
                t: steps as f64 * self.base().span().tick,
                reason: format!("{steps} steps outside 1..={}", self.max_steps()),
            });
        }
        let mut acc: Option<ActionKernel> = None;
        for (k, d) in self.doublings.iter().enumerate() {
            if steps & (1 << k) != 0 {
                acc = Some(match acc {
                    None => d.clone(),
                    Some(a) => minplus::compose(&a, d)?,
                });
            }
        }
        Ok(acc.expect("steps >= 1"))
    }
}

/// `h^t` for a representable time `t` of the plan.
pub fn kernel_at(plan: &EvolutionPlan, base: &ActionKernel, t: f64) -> Result<ActionKernel> {
    let steps = plan.steps_for(t)?;
    KernelPowers::new(base.clone(), steps)?.power(steps)
}

/// `S(t)u = apply(u, h^t)`.
pub fn evolve(u: &ScalarField, plan: &EvolutionPlan, base: &ActionKernel, t: f64) -> Result<ScalarField> {
    minplus::apply(u, &kernel_at(plan, base, t)?)
}

/// Exact kernel `h^t(x,y) = min_k t L((y - x + k)/t)` of an x-independent Hamiltonian.
pub fn hopf_lax_kernel(spec: &HamiltonianSpec, grid: &TorusGrid, t: f64) -> Result<ActionKernel> {
    if !spec.is_x_independent() {
        return Err(Error::NotXIndependent);
    }
    if !(t > 0.0) {
        return Err(Error::InvalidValue(format!("time must be positive, got {t}")));
    }
    let n = grid.len();
    let dim = grid.dim();
    // The kernel depends only on the displacement; tabulate it once per offset.
    let mut by_offset = std::collections::HashMap::new();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = grid.displacement(i, j);
            let key = (d[0].to_bits(), d[1].to_bits());
            let v = match by_offset.get(&key) {
                Some(v) => *v,
                None => {
                    let mut best = f64::INFINITY;
                    let windings: &[i32] = &[-1, 0, 1];
                    for &w0 in windings {
                        for &w1 in if dim == 2 { windings } else { &[0][..] } {
                            let q = [(d[0] + w0 as f64) / t, (d[1] + w1 as f64) / t];
                            best = best.min(t * spec.x_independent_lagrangian(q, dim)?);
                        }
                    }
                    by_offset.insert(key, best);
                    best
                }
            };
            data[i * n + j] = v;
        }
    }
    ActionKernel::new(*grid, TimeSpan::new(1, t), MinPlusMatrix::new(n, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Potential, Symbol};
    use crate::legendre::{legendre_transform, SymmetricGrid};

    fn table(spec: &HamiltonianSpec, n: usize) -> LagrangianTable {
        let grid = TorusGrid::new(1, n).unwrap();
        let g = SymmetricGrid::new(1, 257, 5.0).unwrap();
        legendre_transform(spec, &grid, &g, &g).unwrap()
    }

    fn free() -> HamiltonianSpec {
        HamiltonianSpec::x_independent(Symbol::quadratic(), 5.0, 5.0).unwrap()
    }

    #[test]
    fn base_kernel_examples() {
        let n = 64;
        let k = base_kernel(&table(&free(), n), 0.1, 5.0).unwrap();
        let dx = 1.0 / n as f64;
        assert!((k.get(0, 1) - dx * dx / 0.2).abs() < 1e-10);

        let pend = HamiltonianSpec::pendulum(Potential::cos(1.0, 1), 5.0, 5.0).unwrap();
        let kp = base_kernel(&table(&pend, n), 0.1, 5.0).unwrap();
        let grid = TorusGrid::new(1, n).unwrap();
        for i in 0..n {
            let v = (std::f64::consts::TAU * grid.coords(i)[0]).cos();
            assert!((kp.get(i, i) + 0.1 * v).abs() < 1e-10);
        }

        // reach 0.1 * 1.0 = 0.1 covers 6 cells at n = 64
        let kc = base_kernel(&table(&free(), n), 0.1, 1.0).unwrap();
        assert!(kc.get(0, 6).is_finite());
        assert_eq!(kc.get(0, 7), f64::INFINITY);
    }

    #[test]
    fn plan_validation() {
        let grid = TorusGrid::new(1, 64).unwrap();
        assert!(EvolutionPlan::new(0.1, 0.1, 1.0, &grid).is_err());
        let plan = EvolutionPlan::new(0.1, 5.0, 1.0, &grid).unwrap();
        assert_eq!(plan.steps_for(0.8).unwrap(), 8);
        assert!(plan.steps_for(0.15).is_err());
        assert!(plan.steps_for(0.0).is_err());
        assert_eq!(plan.max_steps(), 10);
    }

    #[test]
    fn powers_match_any_association() {
        let base = base_kernel(&table(&HamiltonianSpec::pendulum(Potential::cos(1.0, 1), 5.0, 5.0).unwrap(), 32), 0.1, 5.0).unwrap();
        let grid = *base.grid();
        let plan = EvolutionPlan::new(0.1, 5.0, 2.0, &grid).unwrap();
        assert_eq!(kernel_at(&plan, &base, 0.1).unwrap(), base);
        let k2 = minplus::compose(&base, &base).unwrap();
        let left = minplus::compose(&minplus::compose(&k2, &base).unwrap(), &base).unwrap();
        let k4 = kernel_at(&plan, &base, 0.4).unwrap();
        assert_eq!(k4.matrix(), left.matrix());
        assert_eq!(k4.matrix(), minplus::compose(&k2, &k2).unwrap().matrix());
        assert_eq!(k4.span().ticks, 4);
    }

    #[test]
    fn constant_datum_is_stationary_for_free_particle() {
        let base = base_kernel(&table(&free(), 32), 0.1, 5.0).unwrap();
        let plan = EvolutionPlan::new(0.1, 5.0, 1.0, base.grid()).unwrap();
        let u = ScalarField::constant(*base.grid(), 2.5).unwrap();
        let out = evolve(&u, &plan, &base, 0.7).unwrap();
        assert!(out.values().iter().all(|&v| v == 2.5));
        let p = ScalarField::point_datum(*base.grid(), 3).unwrap();
        let row = evolve(&p, &plan, &base, 0.4).unwrap();
        assert_eq!(row.values(), kernel_at(&plan, &base, 0.4).unwrap().matrix().row(3));
    }

    #[test]
    fn hopf_lax_closed_form() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let k = hopf_lax_kernel(&free(), &grid, 0.5).unwrap();
        for j in 0..32 {
            let d = grid.distance(0, j);
            assert!((k.get(0, j) - d * d).abs() < 1e-12);
        }
        let k = hopf_lax_kernel(&free(), &grid, 100.0).unwrap();
        for j in 0..32 {
            let d = grid.distance(0, j);
            assert!((k.get(0, j) - d * d / 200.0).abs() < 1e-15);
            assert!(k.get(0, j) <= 1.25e-3 + 1e-15);
        }
        let pend = HamiltonianSpec::pendulum(Potential::cos(1.0, 1), 5.0, 5.0).unwrap();
        assert!(matches!(hopf_lax_kernel(&pend, &grid, 1.0), Err(Error::NotXIndependent)));
    }

    #[test]
    fn reversed_base_kernel_is_transpose() {
        let spec = HamiltonianSpec::pendulum(
            Potential::new(vec![
                crate::hamiltonian::TrigTerm { amplitude: 1.0, wave: [1, 0], kind: crate::hamiltonian::Trig::Cos },
                crate::hamiltonian::TrigTerm { amplitude: 0.4, wave: [2, 0], kind: crate::hamiltonian::Trig::Sin },
            ]),
            5.0,
            5.0,
        )
        .unwrap();
        let tilted = HamiltonianSpec::composed(
            crate::hamiltonian::ScalarMap::Exp,
            HamiltonianSpec::x_independent(Symbol { radial: vec![(2, 0.5)], tilt: [0.3, 0.0], offset: 0.0 }, 5.0, 5.0).unwrap(),
        )
        .unwrap();
        for s in [spec, tilted] {
            let k = base_kernel(&table(&s, 20), 0.1, 5.0).unwrap();
            let kr = base_kernel(&table(&s.reversed(), 20), 0.1, 5.0).unwrap();
            assert_eq!(kr.matrix().data(), minplus::transpose(&k).matrix().data());
        }
    }
}
