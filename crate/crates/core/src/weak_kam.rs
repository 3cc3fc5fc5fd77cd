//! Critical value, Peierls barrier, Aubry set, critical semidistance and
//! weak KAM solutions on top of the action kernels.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use crate::hamiltonian::HamiltonianSpec;
use crate::io::fmt_csv;
use crate::lax_oleinik::{kernel_at, EvolutionPlan};
use crate::legendre::{SampledHamiltonian, SymmetricGrid};
use crate::minplus::{self, quantize, sup_distance, ActionKernel, MinPlusMatrix};

pub const DEFAULT_TOL_C: f64 = 1e-3;
pub const DEFAULT_CAUCHY_TOL: f64 = 1e-6;
pub const DEFAULT_TOL_FIX: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalData {
    pub c_est: f64,
    /// `(t, -min_y h^t(y,y) / t)` along doubled times.
    pub c_history: Vec<(f64, f64)>,
    pub converged: bool,
    /// Constant added to `L` (equivalently subtracted from `H`) to bring the
    /// critical value to zero.
    pub normalization: f64,
}

impl CriticalData {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

fn doubling_times(plan: &EvolutionPlan, t_max: f64) -> Result<u32> {
    if !(t_max >= plan.delta) {
        return Err(Error::InvalidValue(format!("t_max = {t_max} is shorter than one step")));
    }
    let steps = ((t_max / plan.delta) * (1.0 + 1e-12)).floor() as u64;
    Ok(63 - steps.leading_zeros())
}

/// Diagonal-rate estimate `c = -min_y h^T(y,y) / T` at the largest doubled
/// `T = δ 2^k <= t_max`.
pub fn critical_value(plan: &EvolutionPlan, base: &ActionKernel, t_max: f64, tol_c: f64) -> Result<CriticalData> {
    let levels = doubling_times(plan, t_max)?;
    let mut k = base.clone();
    let mut history = Vec::with_capacity(levels as usize + 1);
    for level in 0..=levels {
        if level > 0 {
            k = minplus::compose(&k, &k)?;
        }
        let t = plan.time_of(1u64 << level);
        let d = k.matrix().diagonal().into_iter().fold(f64::INFINITY, f64::min);
        if d == f64::INFINITY {
            if level == levels {
                return Err(Error::DegenerateKernel(format!(
                    "no closed path of duration {t}; the base kernel is disconnected"
                )));
            }
            continue;
        }
        history.push((t, -d / t + 0.0));
    }
    let c_est = history.last().expect("at least one finite level").1 + 0.0;
    let converged = history.len() >= 2 && {
        let a = history[history.len() - 2].1;
        (c_est - a).abs() <= tol_c
    };
    Ok(CriticalData { c_est, c_history: history, converged, normalization: c_est })
}

/// Limit of the normalized kernels `h^t + c t`.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierMatrix {
    grid: TorusGrid,
    entries: MinPlusMatrix,
    liminf: MinPlusMatrix,
    pub t_final: f64,
    pub cauchy_gap: f64,
    pub converged: bool,
}

impl BarrierMatrix {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// The Cauchy limit when it converged, else the running minimum.
    pub fn entries(&self) -> &MinPlusMatrix {
        if self.converged {
            &self.entries
        } else {
            &self.liminf
        }
    }

    /// Last normalized kernel of the doubling sequence.
    pub fn last_kernel(&self) -> &MinPlusMatrix {
        &self.entries
    }

    /// Entrywise minimum over all visited normalized kernels.
    pub fn liminf(&self) -> &MinPlusMatrix {
        &self.liminf
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.entries().get(y, x)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries().diagonal()
    }

    pub fn transpose(&self) -> Self {
        Self {
            grid: self.grid,
            entries: self.entries.transpose(),
            liminf: self.liminf.transpose(),
            t_final: self.t_final,
            cauchy_gap: self.cauchy_gap,
            converged: self.converged,
        }
    }

    /// Worst violation of `h(y,x) <= h(y,z) + h(z,x)` over all triples.
    pub fn triangle_defect(&self) -> f64 {
        let h = self.entries();
        let hh = h.compose_unchecked(h);
        h.data()
            .iter()
            .zip(hh.data())
            .map(|(a, b)| if *a == f64::INFINITY { 0.0 } else { a - b })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        crate::io::matrix_to_csv(self.entries())
    }
}

/// Doubles `h^t + c t` until successive kernels are within `cauchy_tol`.
pub fn peierls_barrier(
    plan: &EvolutionPlan,
    base: &ActionKernel,
    crit: &CriticalData,
    cauchy_tol: f64,
    t_max: f64,
) -> Result<BarrierMatrix> {
    if !(cauchy_tol > 0.0) {
        return Err(Error::InvalidValue(format!("cauchy_tol must be positive, got {cauchy_tol}")));
    }
    let levels = doubling_times(plan, t_max)?;
    let shift = quantize(crit.c_est * plan.delta);
    let mut k = base.matrix().shifted(shift);
    let mut liminf = k.clone();
    let mut gap = f64::INFINITY;
    let mut level = 0;
    while level < levels {
        let next = k.compose(&k)?;
        gap = sup_distance(next.data(), k.data())?;
        liminf = liminf.min_with(&next)?;
        k = next;
        level += 1;
        if gap <= cauchy_tol {
            break;
        }
    }
    Ok(BarrierMatrix {
        grid: *base.grid(),
        entries: k,
        liminf,
        t_final: plan.time_of(1u64 << level),
        cauchy_gap: gap,
        converged: gap <= cauchy_tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AubrySet {
    pub members: Vec<usize>,
    pub epsilon: f64,
    pub diag_values: Vec<f64>,
}

impl AubrySet {
    pub fn contains(&self, y: usize) -> bool {
        self.members.binary_search(&y).is_ok()
    }

    pub fn to_csv(&self, grid: &TorusGrid) -> String {
        let mut s = String::from("i,x,y,diag\n");
        for &i in &self.members {
            let c = grid.coords(i);
            let _ = writeln!(s, "{i},{},{},{}", fmt_csv(c[0]), fmt_csv(c[1]), fmt_csv(self.diag_values[i]));
        }
        s
    }
}

/// One node per connected cluster of the Aubry set (torus neighbours along
/// the axes), the member with the smallest diagonal, ties to the lowest index.
pub fn aubry_representatives(aubry: &AubrySet, grid: &TorusGrid) -> Vec<usize> {
    let n = grid.n() as i64;
    let mut seen = vec![false; grid.len()];
    let mut reps = Vec::new();
    for &start in &aubry.members {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut best = start;
        let mut stack = vec![start];
        while let Some(y) = stack.pop() {
            let d = aubry.diag_values[y];
            if d < aubry.diag_values[best] || (d == aubry.diag_values[best] && y < best) {
                best = y;
            }
            let m = grid.multi_index(y);
            for axis in 0..grid.dim() {
                for step in [-1i64, 1] {
                    let mut nb = m;
                    nb[axis] = (m[axis] as i64 + step).rem_euclid(n) as usize;
                    let j = grid.flat_index(nb);
                    if !seen[j] && aubry.contains(j) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        reps.push(best);
    }
    reps.sort_unstable();
    reps
}

/// `i,x,y,u_<source>...` with one column per solution.
pub fn solutions_to_csv(solutions: &[WeakKamSolution], grid: &TorusGrid) -> String {
    let mut s = String::from("i,x,y");
    for sol in solutions {
        let _ = write!(s, ",u_{}", sol.source);
    }
    s.push('\n');
    for i in 0..grid.len() {
        let c = grid.coords(i);
        let _ = write!(s, "{i},{},{}", fmt_csv(c[0]), fmt_csv(c[1]));
        for sol in solutions {
            let _ = write!(s, ",{}", fmt_csv(sol.field.values()[i]));
        }
        s.push('\n');
    }
    s
}

/// Threshold for the barrier diagonal: `Δx²`.
///
/// Near a strict maximum of the potential the diagonal grows like the square
/// of the distance with a coefficient well above 1 (about `2π` for the
/// pendulum), so this keeps the nodes at the maximum and rejects their
/// neighbours, while exact zeros (rest curves of cost zero) always pass.
pub fn default_aubry_epsilon(grid: &TorusGrid, _plan: &EvolutionPlan) -> f64 {
    grid.spacing() * grid.spacing()
}

pub fn aubry_set(barrier: &BarrierMatrix, epsilon: f64) -> Result<AubrySet> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidValue(format!("epsilon must be positive, got {epsilon}")));
    }
    let diag = barrier.diagonal();
    let members: Vec<usize> = (0..diag.len()).filter(|&i| diag[i] <= epsilon).collect();
    if members.is_empty() {
        return Err(Error::EmptyAubrySet(epsilon));
    }
    Ok(AubrySet { members, epsilon, diag_values: diag })
}

/// `S_a(y,x) = min_{0 <= t <= T} h^t(y,x) + a t` over the step lattice, with
/// `t = 0` contributing the identity.
///
/// Computed as the min-plus closure `(I ⊕ (h^δ + aδ))^(2^K)` with
/// `δ 2^K >= t_max`, which covers every multiple of `δ` up to that time.
pub fn critical_semidistance(
    plan: &EvolutionPlan,
    base: &ActionKernel,
    crit: &CriticalData,
    a: f64,
    t_max: f64,
    tol_c: f64,
) -> Result<MinPlusMatrix> {
    if a < crit.c_est - tol_c {
        return Err(Error::BelowCritical { a, c: crit.c_est });
    }
    if !(t_max >= plan.delta) {
        return Err(Error::InvalidValue(format!("t_max = {t_max} is shorter than one step")));
    }
    let n = base.grid().len();
    let step = base.matrix().shifted(quantize(a * plan.delta));
    let mut c = step.min_with(&MinPlusMatrix::identity(n))?;
    let mut reach = 1u64;
    while (reach as f64) * plan.delta < t_max * (1.0 - 1e-12) {
        c = c.compose(&c)?;
        reach *= 2;
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakKamSolution {
    pub source: usize,
    /// False when the source node is outside the detected Aubry set; the row is
    /// still returned but is not guaranteed to be a solution.
    pub in_aubry: bool,
    pub field: ScalarField,
}

/// Row `h(y, ·)` of the barrier.
pub fn weak_kam_solution(barrier: &BarrierMatrix, aubry: &AubrySet, y: usize) -> Result<WeakKamSolution> {
    if y >= barrier.grid().len() {
        return Err(Error::InvalidValue(format!("node {y} outside the grid")));
    }
    let field = ScalarField::new(*barrier.grid(), barrier.entries().row(y).to_vec())?;
    Ok(WeakKamSolution { source: y, in_aubry: aubry.contains(y), field })
}

/// `(max(0, max(u - S(t)u - ct)), sup|u - S(t)u - ct|)`.
pub fn solution_residual(
    u: &ScalarField,
    plan: &EvolutionPlan,
    base: &ActionKernel,
    crit: &CriticalData,
    t_probe: f64,
) -> Result<(f64, f64)> {
    let k = kernel_at(plan, base, t_probe)?;
    residual_with_kernel(u, &k, crit.c_est)
}

pub(crate) fn residual_with_kernel(u: &ScalarField, k: &ActionKernel, c: f64) -> Result<(f64, f64)> {
    let ct = c * k.time();
    let moved = minplus::apply(u, k)?.shifted(ct);
    let mut sub = 0.0f64;
    for (a, b) in u.values().iter().zip(moved.values()) {
        if a.is_finite() && b.is_finite() {
            sub = sub.max(a - b);
        }
    }
    let sup = sup_distance(u.values(), moved.values())?;
    Ok((sub, sup))
}

/// Nodes where `min_p H(y,p)` reaches the critical level within `tol`.
pub fn equilibrium_set(spec: &HamiltonianSpec, grid: &TorusGrid, p_grid: &SymmetricGrid, c: f64, tol: f64) -> Vec<usize> {
    let sampled = SampledHamiltonian::from_spec(spec, *grid, *p_grid);
    (0..grid.len())
        .filter(|&i| {
            let m = (0..p_grid.len()).map(|k| sampled.value(i, k)).fold(f64::INFINITY, f64::min);
            m >= c - tol
        })
        .collect()
}
