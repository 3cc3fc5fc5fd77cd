//! Hamiltonian → Lagrangian table → base kernel → doubling powers, bundled.

use crate::error::Result;
use crate::grid::{ScalarField, TorusGrid};
use crate::hamiltonian::{HamiltonianSpec, Symbol};
use crate::lax_oleinik::{base_kernel_with, hopf_lax_kernel, EvolutionPlan, KernelPowers};
use crate::legendre::{legendre_transform, LagrangianTable, SymmetricGrid};
use crate::minplus::{self, ActionKernel};

/// Nodes per axis of the momentum and velocity grids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub m_p: usize,
    pub m_q: usize,
}

impl Resolution {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self { m_p: 257, m_q: 257 }
        } else {
            Self { m_p: 33, m_q: 33 }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pipeline {
    spec: HamiltonianSpec,
    grid: TorusGrid,
    plan: EvolutionPlan,
    p_grid: SymmetricGrid,
    table: LagrangianTable,
    powers: KernelPowers,
}

impl Pipeline {
    pub fn build(spec: &HamiltonianSpec, grid: TorusGrid, plan: EvolutionPlan, res: Resolution) -> Result<Self> {
        let p_grid = SymmetricGrid::new(grid.dim(), res.m_p, spec.p_max)?;
        let q_grid = SymmetricGrid::new(grid.dim(), res.m_q, plan.q_max)?;
        let table = legendre_transform(spec, &grid, &p_grid, &q_grid)?;
        let base = base_kernel_with(&table, plan.delta, plan.q_max, plan.scheme)?;
        let powers = KernelPowers::new(base, plan.max_steps())?;
        Ok(Self { spec: spec.clone(), grid, plan, p_grid, table, powers })
    }

    /// Same discretization applied to `H(x, -p)`.
    pub fn reversed(&self) -> Result<Self> {
        let res = Resolution { m_p: self.p_grid.m(), m_q: self.table.q_grid().m() };
        Self::build(&self.spec.reversed(), self.grid, self.plan, res)
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn plan(&self) -> &EvolutionPlan {
        &self.plan
    }

    pub fn p_grid(&self) -> &SymmetricGrid {
        &self.p_grid
    }

    pub fn table(&self) -> &LagrangianTable {
        &self.table
    }

    pub fn base(&self) -> &ActionKernel {
        self.powers.base()
    }

    pub fn powers(&self) -> &KernelPowers {
        &self.powers
    }

    pub fn kernel(&self, t: f64) -> Result<ActionKernel> {
        self.powers.power(self.plan.steps_for(t)?)
    }

    pub fn evolve(&self, u: &ScalarField, t: f64) -> Result<ScalarField> {
        minplus::apply(u, &self.kernel(t)?)
    }
}

/// Sup error of the discrete kernel of `p²/2` at time `t` against the exact
/// Hopf–Lax kernel `dist²/2t`, on the given grid and plan.
pub fn hopf_lax_error(grid: TorusGrid, plan: EvolutionPlan, res: Resolution, t: f64) -> Result<f64> {
    let free = HamiltonianSpec::x_independent(Symbol::quadratic(), plan.q_max, plan.q_max)?;
    let pipe = Pipeline::build(&free, grid, EvolutionPlan { t_max: plan.t_max.max(t), ..plan }, res)?;
    let exact = hopf_lax_kernel(&free, &grid, t)?;
    minplus::kernel_sup_distance(&pipe.kernel(t)?, &exact)
}
