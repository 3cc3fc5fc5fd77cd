//! Commutation of two Hamiltonians through their action kernels, commuting
//! constructions, multi-time evolution and the same-solutions checks.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use crate::hamiltonian::{bracket_samples, empirical_range, poisson_bracket, HamiltonianSpec, ScalarMap};
use crate::io::fmt_csv;
use crate::lax_oleinik::{EvolutionPlan, Scheme};
use crate::legendre::{convex_envelope, legendre_transform, pointwise_min, LagrangianTable, SymmetricGrid};
use crate::minplus::{self, sup_distance, ActionKernel};
use crate::pipeline::{hopf_lax_error, Pipeline, Resolution};
use crate::weak_kam::{aubry_set, critical_value, peierls_barrier, residual_with_kernel, AubrySet, BarrierMatrix, CriticalData};

pub const DEFAULT_TOL_THM: f64 = 5e-2;
pub const DEFAULT_MAX_ITERS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CommutingWithinTol,
    NonCommuting,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeResidual {
    pub t: f64,
    pub s: f64,
    pub residual: f64,
}

/// Worst residual over the probes at one discretization level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrendLevel {
    pub n: usize,
    pub delta: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    pub pair: String,
    pub residual_grid: Vec<ProbeResidual>,
    pub tol_comm: f64,
    pub verdict: Verdict,
    pub refinement_trend: Vec<TrendLevel>,
    pub bracket_summary: f64,
}

impl CommutationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn residuals_csv(&self) -> String {
        let mut s = String::from("t,s,residual\n");
        for r in &self.residual_grid {
            let _ = writeln!(s, "{},{},{}", fmt_csv(r.t), fmt_csv(r.s), fmt_csv(r.residual));
        }
        s
    }
}

fn same_discretization(a: &Pipeline, b: &Pipeline) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("pipelines live on different grids".into()));
    }
    if a.plan().delta != b.plan().delta {
        return Err(Error::GridMismatch(format!(
            "pipelines use different steps ({} vs {})",
            a.plan().delta,
            b.plan().delta
        )));
    }
    Ok(())
}

/// `sup |K_H^t ⊗ K_G^s − K_G^s ⊗ K_H^t|` at each probe.
pub fn commutation_residual(h: &Pipeline, g: &Pipeline, probes: &[(f64, f64)]) -> Result<Vec<ProbeResidual>> {
    same_discretization(h, g)?;
    probes
        .par_iter()
        .map(|&(t, s)| {
            let kh = h.kernel(t)?;
            let kg = g.kernel(s)?;
            let hg = minplus::compose(&kh, &kg)?;
            let gh = minplus::compose(&kg, &kh)?;
            Ok(ProbeResidual { t, s, residual: minplus::kernel_sup_distance(&hg, &gh)? })
        })
        .collect()
}

/// A grid level of a refinement ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Level {
    pub n: usize,
    pub delta: f64,
}

impl Level {
    /// `count` levels starting at `(n, δ)`, each halving both `Δx` and `δ`.
    pub fn ladder(n: usize, delta: f64, count: usize) -> Vec<Level> {
        (0..count).map(|k| Level { n: n << k, delta: delta / (1u64 << k) as f64 }).collect()
    }
}

/// Largest residual ratio between successive levels that still counts as
/// shrinking (a halving with 40% slack).
pub const TREND_RATIO: f64 = 0.7;

/// Hopf–Lax error constant `C = err / (Δx + δ)` of `p²/2` at `t = 1`.
pub fn hopf_lax_constant(dim: usize, level: Level, q_max: f64) -> Result<f64> {
    let grid = TorusGrid::new(dim, level.n)?;
    let plan = EvolutionPlan::new(level.delta, q_max, 1.0, &grid)?;
    Ok(hopf_lax_error(grid, plan, Resolution::for_dim(dim), 1.0)? / (grid.spacing() + level.delta))
}

/// Default commutation tolerance: ten times the Hopf–Lax error constant of
/// the coarsest level.
pub fn default_tol_comm(dim: usize, level: Level, q_max: f64) -> Result<f64> {
    Ok(10.0 * hopf_lax_constant(dim, level, q_max)?)
}

/// Every refinement shrinks the residual by at least [`TREND_RATIO`], or it is already zero.
pub fn trend_decreasing(trend: &[TrendLevel]) -> bool {
    trend
        .windows(2)
        .all(|w| (w[0].residual == 0.0 && w[1].residual == 0.0) || w[1].residual <= TREND_RATIO * w[0].residual)
}

/// Three-valued verdict: within tolerance at every probe and shrinking
/// under refinement, above tolerance and not shrinking, or neither.
pub fn verdict(residuals: &[ProbeResidual], trend: &[TrendLevel], tol_comm: f64) -> Verdict {
    let within = residuals.iter().all(|r| r.residual <= tol_comm);
    let decreasing = trend_decreasing(trend);
    match (within, decreasing) {
        (true, true) => Verdict::CommutingWithinTol,
        (false, false) => Verdict::NonCommuting,
        _ => Verdict::Inconclusive,
    }
}

/// Everything needed to rebuild a pair of pipelines at several levels.
#[derive(Clone, Debug)]
pub struct PairSetup {
    pub h: HamiltonianSpec,
    pub g: HamiltonianSpec,
    pub dim: usize,
    pub q_max: f64,
    pub t_max: f64,
    pub res: Resolution,
    pub scheme: Scheme,
}

impl PairSetup {
    /// Default resolution and scheme for `dim`.
    pub fn new(h: HamiltonianSpec, g: HamiltonianSpec, dim: usize, q_max: f64, t_max: f64) -> Self {
        Self { h, g, dim, q_max, t_max, res: Resolution::for_dim(dim), scheme: Scheme::default() }
    }

    pub fn build(&self, level: Level) -> Result<(Pipeline, Pipeline)> {
        let grid = TorusGrid::new(self.dim, level.n)?;
        let plan = EvolutionPlan::new(level.delta, self.q_max, self.t_max, &grid)?.with_scheme(self.scheme);
        Ok((Pipeline::build(&self.h, grid, plan, self.res)?, Pipeline::build(&self.g, grid, plan, self.res)?))
    }
}

/// Residuals on the first level, worst residual per level, and the verdict.
pub fn commutation_report(
    pair: &str,
    setup: &PairSetup,
    levels: &[Level],
    probes: &[(f64, f64)],
    tol_comm: Option<f64>,
) -> Result<CommutationReport> {
    let first = *levels
        .first()
        .ok_or_else(|| Error::InvalidValue("at least one refinement level is needed".into()))?;
    let tol_comm = match tol_comm {
        Some(t) => t,
        None => default_tol_comm(setup.dim, first, setup.q_max)?,
    };
    let mut residual_grid = Vec::new();
    let mut trend = Vec::with_capacity(levels.len());
    for (k, &level) in levels.iter().enumerate() {
        let (ph, pg) = setup.build(level)?;
        let r = commutation_residual(&ph, &pg, probes)?;
        let worst = r.iter().fold(0.0f64, |m, p| m.max(p.residual));
        trend.push(TrendLevel { n: level.n, delta: level.delta, residual: worst });
        if k == 0 {
            residual_grid = r;
        }
    }
    let grid = TorusGrid::new(setup.dim, first.n)?;
    let p_max = setup.h.p_max.min(setup.g.p_max);
    let samples = bracket_samples(&grid, p_max.min(2.0), 9, (first.n / 16).max(1));
    let bracket = poisson_bracket(&setup.g, &setup.h, &samples, setup.dim, crate::hamiltonian::DEFAULT_FD_STEP)?;
    Ok(CommutationReport {
        pair: pair.to_string(),
        verdict: verdict(&residual_grid, &trend, tol_comm),
        residual_grid,
        tol_comm,
        refinement_trend: trend,
        bracket_summary: bracket.max_abs(),
    })
}

/// `f(H)` after checking that `f` is convex and increasing on the observed range of `H`.
pub fn build_composed_partner(h: &HamiltonianSpec, f: ScalarMap, grid: &TorusGrid, p_resolution: usize) -> Result<HamiltonianSpec> {
    if f == ScalarMap::Identity {
        return Ok(h.clone());
    }
    let (lo, hi) = empirical_range(h, grid, p_resolution);
    f.audit_range(lo, hi, 257)?;
    HamiltonianSpec::composed(f, h.clone())
}

/// `max(H1, H2)` with two independent Lagrangians for cross-validation.
#[derive(Clone, Debug)]
pub struct MaxPartner {
    pub spec: HamiltonianSpec,
    /// Legendre transform of the pointwise maximum.
    pub direct: LagrangianTable,
    /// Convex envelope of the pointwise minimum of the two Lagrangians.
    pub envelope: LagrangianTable,
    /// Largest disagreement on the inner half of the velocity box.
    pub gap: f64,
}

/// The inputs are assumed to commute; this is not rechecked here.
pub fn build_max_partner(
    h1: &HamiltonianSpec,
    h2: &HamiltonianSpec,
    grid: &TorusGrid,
    p_grid: &SymmetricGrid,
    q_grid: &SymmetricGrid,
    tol_legendre: f64,
) -> Result<MaxPartner> {
    if h1 == h2 {
        let direct = legendre_transform(h1, grid, p_grid, q_grid)?;
        return Ok(MaxPartner { spec: h1.clone(), envelope: direct.clone(), direct, gap: 0.0 });
    }
    let spec = HamiltonianSpec::max_of(h1.clone(), h2.clone())?;
    let direct = legendre_transform(&spec, grid, p_grid, q_grid)?;
    let l1 = legendre_transform(h1, grid, p_grid, q_grid)?;
    let l2 = legendre_transform(h2, grid, p_grid, q_grid)?;
    let envelope = convex_envelope(&pointwise_min(&l1, &l2)?, p_grid)?;
    let inner = q_grid.inner_half();
    let mut gap = 0.0f64;
    for x in 0..grid.len() {
        for &k in &inner {
            gap = gap.max((direct.value(x, k) - envelope.value(x, k)).abs());
        }
    }
    if gap > tol_legendre {
        return Err(Error::Inconsistent(format!(
            "max-Hamiltonian Lagrangians disagree by {gap:e} (tolerance {tol_legendre:e})"
        )));
    }
    Ok(MaxPartner { spec, direct, envelope, gap })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcatenationReport {
    pub samples: usize,
    /// `max(h_G^t − Σ h_{σ(i)}^{t_i})` over the sampled concatenations.
    pub worst_defect: f64,
}

/// Concatenations of `H1`/`H2` pieces never beat the max-Hamiltonian kernel.
///
/// Each sample picks a pair of nodes, a total time `t` (in steps), a split
/// into at most `max_pieces` positive pieces, and a factor per piece.
pub fn concatenation_check(
    h1: &Pipeline,
    h2: &Pipeline,
    g: &Pipeline,
    max_pieces: usize,
    samples: usize,
    seed: u64,
) -> Result<ConcatenationReport> {
    same_discretization(h1, g)?;
    same_discretization(h2, g)?;
    let n = g.grid().len();
    let max_steps = g.plan().max_steps().min(h1.plan().max_steps()).min(h2.plan().max_steps());
    let max_pieces = max_pieces.max(1);
    if max_steps < max_pieces as u64 {
        return Err(Error::InvalidValue("plan too short for the requested number of pieces".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let pieces = rng.gen_range(1..=max_pieces);
        let total = rng.gen_range(pieces as u64..=max_steps);
        let mut cuts: Vec<u64> = Vec::with_capacity(pieces + 1);
        cuts.push(0);
        while cuts.len() < pieces {
            let c = rng.gen_range(1..total);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.push(total);
        cuts.sort_unstable();
        let y = rng.gen_range(0..n);
        let x = rng.gen_range(0..n);
        let mut acc: Option<ActionKernel> = None;
        for w in cuts.windows(2) {
            let which = if rng.gen_bool(0.5) { h1 } else { h2 };
            let k = which.powers().power(w[1] - w[0])?;
            acc = Some(match acc {
                None => k,
                Some(a) => minplus::compose(&a, &k)?,
            });
        }
        let concat = acc.expect("at least one piece").get(y, x);
        let direct = g.powers().power(total)?.get(y, x);
        let defect = if direct == f64::INFINITY { f64::NEG_INFINITY } else { direct - concat };
        worst = worst.max(defect);
    }
    Ok(ConcatenationReport { samples, worst_defect: worst.max(0.0) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    H,
    G,
}

/// One run of a single Hamiltonian for a duration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Leg {
    pub side: Side,
    pub time: f64,
}

pub type Schedule = Vec<Leg>;

/// `[(H,t),(G,s)]`, `[(G,s),(H,t)]`, and `pieces` alternating slices of each.
pub fn standard_schedules(t: f64, s: f64, pieces: usize) -> Vec<Schedule> {
    let pieces = pieces.max(1);
    let mut alternating = Vec::with_capacity(2 * pieces);
    for _ in 0..pieces {
        alternating.push(Leg { side: Side::H, time: t / pieces as f64 });
        alternating.push(Leg { side: Side::G, time: s / pieces as f64 });
    }
    vec![
        vec![Leg { side: Side::H, time: t }, Leg { side: Side::G, time: s }],
        vec![Leg { side: Side::G, time: s }, Leg { side: Side::H, time: t }],
        alternating,
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiTimeResult {
    pub finals: Vec<ScalarField>,
    /// Largest pairwise sup distance between final fields.
    pub gap: f64,
}

impl MultiTimeResult {
    /// One column per schedule.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i");
        for k in 0..self.finals.len() {
            let _ = write!(s, ",schedule_{k}");
        }
        s.push('\n');
        let len = self.finals.first().map_or(0, |f| f.values().len());
        for i in 0..len {
            let _ = write!(s, "{i}");
            for f in &self.finals {
                let _ = write!(s, ",{}", fmt_csv(f.values()[i]));
            }
            s.push('\n');
        }
        s
    }
}

fn steps_total(plan: &EvolutionPlan, schedule: &[Leg], side: Side) -> Result<u64> {
    schedule
        .iter()
        .filter(|l| l.side == side)
        .map(|l| plan.steps_for(l.time))
        .sum()
}

/// Evolves `u0` along each schedule. All schedules must share the H and G totals.
pub fn multi_time_evolve(u0: &ScalarField, h: &Pipeline, g: &Pipeline, schedules: &[Schedule]) -> Result<MultiTimeResult> {
    same_discretization(h, g)?;
    if schedules.is_empty() {
        return Err(Error::InvalidValue("no schedules given".into()));
    }
    let plan = h.plan();
    let totals = (steps_total(plan, &schedules[0], Side::H)?, steps_total(plan, &schedules[0], Side::G)?);
    for sch in &schedules[1..] {
        let other = (steps_total(plan, sch, Side::H)?, steps_total(plan, sch, Side::G)?);
        if other != totals {
            return Err(Error::InvalidValue(format!(
                "schedule totals differ: {totals:?} vs {other:?} steps"
            )));
        }
    }
    let u0 = u0.quantized();
    let finals = schedules
        .par_iter()
        .map(|sch| {
            let mut u = u0.clone();
            for leg in sch {
                let p = if leg.side == Side::H { h } else { g };
                u = p.evolve(&u, leg.time)?;
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gap = 0.0f64;
    for a in 0..finals.len() {
        for b in a + 1..finals.len() {
            gap = gap.max(sup_distance(finals[a].values(), finals[b].values())?);
        }
    }
    Ok(MultiTimeResult { finals, gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    SameSolutions,
    SameBarrier,
    SameAubry,
    SupCommutes,
    CommonSolution,
    MultiTime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub theorem: TheoremTag,
    pub gaps: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl TheoremVerdict {
    pub fn new(theorem: TheoremTag, gaps: Vec<f64>, tolerance: f64) -> Self {
        let pass = gaps.iter().all(|g| *g <= tolerance);
        Self { theorem, gaps, tolerance, pass }
    }
}

/// Critical value, barrier and Aubry set of one pipeline.
#[derive(Clone, Debug)]
pub struct WeakKamData {
    pub critical: CriticalData,
    pub barrier: BarrierMatrix,
    pub aubry: AubrySet,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakKamSettings {
    pub t_max: f64,
    pub tol_c: f64,
    pub cauchy_tol: f64,
    /// `None` uses the grid default.
    pub epsilon: Option<f64>,
}

impl WeakKamData {
    pub fn compute(p: &Pipeline, settings: &WeakKamSettings) -> Result<Self> {
        let critical = critical_value(p.plan(), p.base(), settings.t_max, settings.tol_c)?;
        let barrier = peierls_barrier(p.plan(), p.base(), &critical, settings.cauchy_tol, settings.t_max)?;
        let eps = settings
            .epsilon
            .unwrap_or_else(|| crate::weak_kam::default_aubry_epsilon(p.grid(), p.plan()));
        let aubry = aubry_set(&barrier, eps)?;
        Ok(Self { critical, barrier, aubry })
    }
}

/// Same barrier, same Aubry set, and rows of each barrier over the Aubry set
/// solving the other equation.
///
/// The cross residuals are the super residuals at one step of `probe`.
pub fn verify_same_solutions(
    h: &Pipeline,
    g: &Pipeline,
    dh: &WeakKamData,
    dg: &WeakKamData,
    probe: f64,
    tol_thm: f64,
) -> Result<Vec<TheoremVerdict>> {
    same_discretization(h, g)?;
    let barrier_gap = sup_distance(dh.barrier.entries().data(), dg.barrier.entries().data())?;
    let sym_diff = dh
        .aubry
        .members
        .iter()
        .filter(|y| !dg.aubry.contains(**y))
        .chain(dg.aubry.members.iter().filter(|y| !dh.aubry.contains(**y)))
        .count();
    let kh = h.kernel(probe)?;
    let kg = g.kernel(probe)?;
    let cross = |from: &WeakKamData, k: &ActionKernel, c: f64| -> Result<f64> {
        let mut worst = 0.0f64;
        for &y in &from.aubry.members {
            let u = ScalarField::new(*h.grid(), from.barrier.entries().row(y).to_vec())?;
            worst = worst.max(residual_with_kernel(&u, k, c)?.1);
        }
        Ok(worst)
    };
    let h_in_g = cross(dh, &kg, dg.critical.c_est)?;
    let g_in_h = cross(dg, &kh, dh.critical.c_est)?;
    Ok(vec![
        TheoremVerdict::new(TheoremTag::SameBarrier, vec![barrier_gap], tol_thm),
        TheoremVerdict::new(TheoremTag::SameAubry, vec![sym_diff as f64], 0.0),
        TheoremVerdict::new(TheoremTag::SameSolutions, vec![h_in_g, g_in_h], tol_thm),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommonSolution {
    pub field: ScalarField,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
    /// Super residuals for `H` at `t` and for `G` at `s`.
    pub residual_h: f64,
    pub residual_g: f64,
}

/// Iterates `u <- S_G(s) S_H(t) u + c_H t + c_G s` from `u = 0`.
#[allow(clippy::too_many_arguments)]
pub fn common_solution(
    h: &Pipeline,
    g: &Pipeline,
    c_h: f64,
    c_g: f64,
    t: f64,
    s: f64,
    max_iters: usize,
    fix_tol: f64,
) -> Result<CommonSolution> {
    same_discretization(h, g)?;
    let kh = h.kernel(t)?;
    let kg = g.kernel(s)?;
    let shift = c_h * kh.time() + c_g * kg.time();
    let mut u = ScalarField::constant(*h.grid(), 0.0)?;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iters {
        let next = minplus::apply(&minplus::apply(&u, &kh)?, &kg)?.shifted(shift);
        change = sup_distance(next.values(), u.values())?;
        u = next;
        iterations += 1;
        if change <= fix_tol {
            break;
        }
    }
    let residual_h = residual_with_kernel(&u, &kh, c_h)?.1;
    let residual_g = residual_with_kernel(&u, &kg, c_g)?.1;
    Ok(CommonSolution {
        field: u,
        iterations,
        converged: change <= fix_tol,
        last_change: change,
        residual_h,
        residual_g,
    })
}

/// `cos 2πx` (plus `cos 2πy` in 2-D), a smooth Lipschitz test datum.
pub fn default_datum(grid: &TorusGrid) -> Result<ScalarField> {
    let dim = grid.dim();
    ScalarField::from_fn(*grid, |x| {
        let tau = 2.0 * std::f64::consts::PI;
        if dim == 1 {
            (tau * x[0]).cos()
        } else {
            (tau * x[0]).cos() + (tau * x[1]).cos()
        }
    })
}

/// [`standard_schedules`] with the most pieces (up to `max_pieces`) that keep
/// every slice on the step lattice.
pub fn schedules_for(plan: &EvolutionPlan, t: f64, s: f64, max_pieces: usize) -> Result<Vec<Schedule>> {
    let (nt, ns) = (plan.steps_for(t)?, plan.steps_for(s)?);
    let pieces = (1..=max_pieces.max(1))
        .rev()
        .find(|&k| nt % k as u64 == 0 && ns % k as u64 == 0)
        .unwrap_or(1);
    Ok(standard_schedules(t, s, pieces))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremSuite {
    pub verdicts: Vec<TheoremVerdict>,
    pub common: CommonSolution,
    pub multitime: MultiTimeResult,
}

impl TheoremSuite {
    pub fn to_json(&self, pair: &str) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            pair: &'a str,
            verdicts: &'a [TheoremVerdict],
            common_solution_iterations: usize,
            common_solution_converged: bool,
            common_solution_last_change: f64,
            multitime_gap: f64,
        }
        serde_json::to_string_pretty(&Out {
            pair,
            verdicts: &self.verdicts,
            common_solution_iterations: self.common.iterations,
            common_solution_converged: self.common.converged,
            common_solution_last_change: self.common.last_change,
            multitime_gap: self.multitime.gap,
        })
        .expect("plain data serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteSettings {
    pub weak_kam: WeakKamSettings,
    /// `(t, s)` used for the cross residuals, the common solution and the interleavings.
    pub probe: (f64, f64),
    pub tol_thm: f64,
    pub tol_fix: f64,
    pub max_iters: usize,
    /// Largest commutation residual at this level; the interleaving gap is held to twice it.
    pub max_residual: f64,
}

/// Same-solution checks, the common fixed point and the multi-time interleavings.
pub fn theorem_suite(h: &Pipeline, g: &Pipeline, settings: &SuiteSettings) -> Result<TheoremSuite> {
    let (t, s) = settings.probe;
    let dh = WeakKamData::compute(h, &settings.weak_kam)?;
    let dg = WeakKamData::compute(g, &settings.weak_kam)?;
    let mut verdicts = verify_same_solutions(h, g, &dh, &dg, t, settings.tol_thm)?;
    let common = common_solution(
        h,
        g,
        dh.critical.c_est,
        dg.critical.c_est,
        t,
        s,
        settings.max_iters,
        settings.tol_fix,
    )?;
    let mut cv = TheoremVerdict::new(TheoremTag::CommonSolution, vec![common.residual_h, common.residual_g], settings.tol_thm);
    cv.pass &= common.converged;
    verdicts.push(cv);
    let u0 = default_datum(h.grid())?;
    let multitime = multi_time_evolve(&u0, h, g, &schedules_for(h.plan(), t, s, 4)?)?;
    verdicts.push(TheoremVerdict::new(TheoremTag::MultiTime, vec![multitime.gap], 2.0 * settings.max_residual));
    Ok(TheoremSuite { verdicts, common, multitime })
}

pub fn verdicts_json(verdicts: &[TheoremVerdict]) -> String {
    serde_json::to_string_pretty(verdicts).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Potential, Symbol};

    fn free() -> HamiltonianSpec {
        HamiltonianSpec::x_independent(Symbol::quadratic(), 5.0, 5.0).unwrap()
    }

    fn quartic() -> HamiltonianSpec {
        HamiltonianSpec::x_independent(Symbol { radial: vec![(4, 0.25), (2, 0.5)], tilt: [0.0; 2], offset: 0.0 }, 5.0, 5.0)
            .unwrap()
    }

    fn pendulum(p: Potential) -> HamiltonianSpec {
        HamiltonianSpec::pendulum(p, 5.0, 5.0).unwrap()
    }

    fn pair(h: &HamiltonianSpec, g: &HamiltonianSpec, n: usize, t_max: f64) -> (Pipeline, Pipeline) {
        PairSetup::new(h.clone(), g.clone(), 1, 5.0, t_max).build(Level { n, delta: 0.1 }).unwrap()
    }

    #[test]
    fn self_commutation_is_exact() {
        let (h, _) = pair(&pendulum(Potential::cos(1.0, 1)), &free(), 32, 0.8);
        let r = commutation_residual(&h, &h, &[(0.8, 0.4), (0.3, 0.7)]).unwrap();
        assert!(r.iter().all(|p| p.residual == 0.0));
    }

    #[test]
    fn residual_is_symmetric_in_the_pair() {
        let (h, g) = pair(&pendulum(Potential::cos(1.0, 1)), &pendulum(Potential::sin(1.0, 1)), 32, 0.8);
        let a = commutation_residual(&h, &g, &[(0.8, 0.4)]).unwrap()[0].residual;
        let b = commutation_residual(&g, &h, &[(0.4, 0.8)]).unwrap()[0].residual;
        assert_eq!(a, b);
        assert!(a >= 0.1);
    }

    #[test]
    fn x_independent_kernels_commute() {
        let (h, g) = pair(&free(), &quartic(), 32, 0.8);
        let r = commutation_residual(&h, &g, &[(0.8, 0.4)]).unwrap();
        assert_eq!(r[0].residual, 0.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let (h, _) = pair(&free(), &free(), 32, 0.8);
        let (g, _) = pair(&free(), &free(), 16, 0.8);
        assert!(matches!(commutation_residual(&h, &g, &[(0.1, 0.1)]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn verdict_logic() {
        let lv = |r: &[f64]| r.iter().map(|&residual| TrendLevel { n: 0, delta: 0.0, residual }).collect::<Vec<_>>();
        let probes = |r: f64| vec![ProbeResidual { t: 1.0, s: 1.0, residual: r }];
        assert_eq!(verdict(&probes(0.0), &lv(&[0.0, 0.0]), 1e-2), Verdict::CommutingWithinTol);
        assert_eq!(verdict(&probes(1e-3), &lv(&[1e-3, 4e-4]), 1e-2), Verdict::CommutingWithinTol);
        assert_eq!(verdict(&probes(0.5), &lv(&[0.5, 0.49]), 1e-2), Verdict::NonCommuting);
        assert_eq!(verdict(&probes(0.5), &lv(&[0.5, 0.2]), 1e-2), Verdict::Inconclusive);
        assert_eq!(verdict(&probes(1e-3), &lv(&[1e-3, 1e-3]), 1e-2), Verdict::Inconclusive);
    }

    #[test]
    fn composed_partner_audits_the_range() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let h = pendulum(Potential::cos(1.0, 1));
        assert_eq!(build_composed_partner(&h, ScalarMap::Identity, &grid, 65).unwrap(), h);
        assert!(build_composed_partner(&h, ScalarMap::Exp, &grid, 65).is_ok());
        // p²/2 + cos reaches -1, where h + h² is decreasing
        assert!(matches!(
            build_composed_partner(&h, ScalarMap::SquarePlusIdentity, &grid, 65),
            Err(Error::MapAudit { .. })
        ));
        let lifted = pendulum(Potential::new(vec![
            crate::hamiltonian::TrigTerm { amplitude: 0.25, wave: [1, 0], kind: crate::hamiltonian::Trig::Cos },
        ]));
        assert!(build_composed_partner(&lifted, ScalarMap::SquarePlusIdentity, &grid, 65).is_ok());
    }

    #[test]
    fn max_partner_constructions_agree() {
        let grid = TorusGrid::new(1, 8).unwrap();
        let pg = SymmetricGrid::new(1, 257, 5.0).unwrap();
        let tol = crate::legendre::default_tol_legendre(&pg, &pg);
        let same = build_max_partner(&free(), &free(), &grid, &pg, &pg, tol).unwrap();
        assert_eq!(same.spec, free());
        assert_eq!(same.direct.values(), same.envelope.values());
        let lifted = HamiltonianSpec::x_independent(Symbol { radial: vec![(2, 0.5)], tilt: [0.0; 2], offset: 0.5 }, 5.0, 5.0).unwrap();
        let m = build_max_partner(&lifted, &quartic(), &grid, &pg, &pg, tol).unwrap();
        assert!(m.gap <= tol);
        let qg = SymmetricGrid::new(1, 129, 2.5).unwrap();
        let tilt = |a: f64| HamiltonianSpec::x_independent(Symbol { radial: vec![(2, 0.5)], tilt: [a, 0.0], offset: 0.0 }, 5.0, 5.0).unwrap();
        let m = build_max_partner(&tilt(1.0), &tilt(-1.0), &grid, &pg, &qg, crate::legendre::default_tol_legendre(&pg, &qg)).unwrap();
        assert!(m.gap <= crate::legendre::default_tol_legendre(&pg, &qg));
    }

    #[test]
    fn concatenations_never_beat_the_max_kernel() {
        let lifted = HamiltonianSpec::x_independent(Symbol { radial: vec![(2, 0.5)], tilt: [0.0; 2], offset: 0.5 }, 5.0, 5.0).unwrap();
        let g = HamiltonianSpec::max_of(lifted.clone(), quartic()).unwrap();
        let (p1, p2) = pair(&lifted, &quartic(), 32, 1.5);
        let (pg, _) = pair(&g, &g, 32, 1.5);
        let r = concatenation_check(&p1, &p2, &pg, 3, 50, 7).unwrap();
        assert_eq!(r.samples, 50);
        assert!(r.worst_defect <= 1e-9, "{}", r.worst_defect);
    }

    #[test]
    fn multi_time_gaps() {
        let (h, g) = pair(&free(), &quartic(), 32, 0.8);
        let u0 = ScalarField::from_fn(*h.grid(), |x| (2.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
        let single = multi_time_evolve(&u0, &h, &g, &standard_schedules(0.8, 0.4, 4)[..1]).unwrap();
        assert_eq!(single.gap, 0.0);
        let all = multi_time_evolve(&u0, &h, &g, &standard_schedules(0.8, 0.4, 4)).unwrap();
        assert_eq!(all.gap, 0.0);
        let bad = vec![vec![Leg { side: Side::H, time: 0.8 }], vec![Leg { side: Side::H, time: 0.4 }]];
        assert!(multi_time_evolve(&u0, &h, &g, &bad).is_err());
        let (h, g) = pair(&pendulum(Potential::cos(1.0, 1)), &pendulum(Potential::sin(1.0, 1)), 32, 0.8);
        let neg = multi_time_evolve(&u0, &h, &g, &standard_schedules(0.8, 0.8, 4)).unwrap();
        assert!(neg.gap >= 0.05);
    }

    #[test]
    fn identical_pair_passes_every_theorem_check() {
        let h = pendulum(Potential::cos(1.0, 1));
        let (ph, pg) = pair(&h, &h, 32, 6.4);
        let settings = WeakKamSettings { t_max: 6.4, tol_c: 1e-3, cauchy_tol: 1e-6, epsilon: None };
        let dh = WeakKamData::compute(&ph, &settings).unwrap();
        let dg = WeakKamData::compute(&pg, &settings).unwrap();
        let v = verify_same_solutions(&ph, &pg, &dh, &dg, 0.8, DEFAULT_TOL_THM).unwrap();
        assert!(v.iter().all(|x| x.pass && x.gaps.iter().all(|g| *g <= 1e-9)), "{v:?}");
        let cs = common_solution(&ph, &pg, dh.critical.c_est, dg.critical.c_est, 0.4, 0.4, DEFAULT_MAX_ITERS, 1e-6).unwrap();
        assert!(cs.converged);
        assert_eq!(cs.residual_h, cs.residual_g);
        assert!(cs.residual_h <= 1e-6);
        let json = verdicts_json(&v);
        assert!(json.contains("\"same_barrier\""));
    }

    #[test]
    fn x_independent_common_solution_is_constant() {
        let (h, g) = pair(&free(), &quartic(), 32, 0.8);
        let cs = common_solution(&h, &g, 0.0, 0.0, 0.4, 0.4, DEFAULT_MAX_ITERS, 1e-6).unwrap();
        assert!(cs.converged);
        assert!(cs.field.values().iter().all(|v| *v == 0.0));
        assert_eq!((cs.residual_h, cs.residual_g), (0.0, 0.0));
    }
}
