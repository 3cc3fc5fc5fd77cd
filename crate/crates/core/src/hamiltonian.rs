//! Declarative convex Hamiltonian families on `T^d × R^d`.
//!
//! Every family is continuous, convex in `p` and superlinear, with
//! superlinear lower and upper radial bounds `α(|p|) <= H(x,p) <= β(|p|)`
//! that are declared by construction rather than inferred from samples.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Point, TorusGrid};

pub const DEFAULT_TOL_CONVEX: f64 = 1e-9;
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Cos,
    Sin,
}

/// `amplitude * cos|sin(2π ⟨wave, x⟩)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub wave: [i32; 2],
    pub kind: Trig,
}

/// Trigonometric polynomial on the torus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub terms: Vec<TrigTerm>,
}

impl Potential {
    pub fn new(terms: Vec<TrigTerm>) -> Self {
        Self { terms }
    }

    pub fn cos(amplitude: f64, k: i32) -> Self {
        Self::new(vec![TrigTerm { amplitude, wave: [k, 0], kind: Trig::Cos }])
    }

    pub fn sin(amplitude: f64, k: i32) -> Self {
        Self::new(vec![TrigTerm { amplitude, wave: [k, 0], kind: Trig::Sin }])
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let arg = TAU * (t.wave[0] as f64 * x[0] + t.wave[1] as f64 * x[1]);
                match t.kind {
                    Trig::Cos => t.amplitude * arg.cos(),
                    Trig::Sin => t.amplitude * arg.sin(),
                }
            })
            .sum()
    }

    /// `Σ |amplitude|`, a bound on `|V|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }
}

/// x-independent symbol `Σ_k a_k |p|^k + ⟨tilt, p⟩ + offset`, with `k >= 1` and `a_k >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub radial: Vec<(u32, f64)>,
    #[serde(default)]
    pub tilt: [f64; 2],
    #[serde(default)]
    pub offset: f64,
}

impl Symbol {
    pub fn quadratic() -> Self {
        Self { radial: vec![(2, 0.5)], tilt: [0.0; 2], offset: 0.0 }
    }

    fn radial_value(&self, r: f64) -> f64 {
        self.radial.iter().map(|&(k, a)| a * r.powi(k as i32)).sum()
    }

    fn radial_slope(&self, r: f64) -> f64 {
        self.radial
            .iter()
            .map(|&(k, a)| a * k as f64 * r.powi(k as i32 - 1))
            .sum()
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.radial_value(p[0].hypot(p[1])) + (self.tilt[0] * p[0] + self.tilt[1] * p[1]) + self.offset
    }

    /// Conjugate of the radial part, `sup_{r >= 0} (r s - g(r))`.
    fn radial_conjugate(&self, s: f64) -> f64 {
        if self.radial_slope(0.0) >= s {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.radial_slope(hi) < s {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.radial_slope(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let r = 0.5 * (lo + hi);
        r * s - self.radial_value(r)
    }

    /// Exact Fenchel conjugate `L(q) = ℓ(|q - tilt|) - offset`.
    pub fn lagrangian(&self, q: Point) -> f64 {
        let s = (q[0] - self.tilt[0]).hypot(q[1] - self.tilt[1]);
        self.radial_conjugate(s) - self.offset
    }

    fn validate(&self) -> Result<()> {
        if self.radial.iter().any(|&(k, a)| k == 0 || !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::Config("symbol terms need power >= 1 and coefficient >= 0".into()));
        }
        if !self.radial.iter().any(|&(k, a)| k >= 2 && a > 0.0) {
            return Err(Error::Config("symbol needs a positive term of power >= 2 to be superlinear".into()));
        }
        Ok(())
    }
}

/// Convex scalar maps that may be composed with a Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum ScalarMap {
    Identity,
    Shift { by: f64 },
    Affine { scale: f64, offset: f64 },
    /// `h + h^2`, increasing only for `h > -1/2`.
    SquarePlusIdentity,
    Exp,
}

impl ScalarMap {
    pub fn apply(&self, h: f64) -> f64 {
        match *self {
            ScalarMap::Identity => h,
            ScalarMap::Shift { by } => h + by,
            ScalarMap::Affine { scale, offset } => scale * h + offset,
            ScalarMap::SquarePlusIdentity => h + h * h,
            ScalarMap::Exp => h.exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarMap::Identity => "identity",
            ScalarMap::Shift { .. } => "shift",
            ScalarMap::Affine { .. } => "affine",
            ScalarMap::SquarePlusIdentity => "square_plus_identity",
            ScalarMap::Exp => "exp",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ScalarMap::Affine { scale, offset } if !(scale > 0.0) || !offset.is_finite() => {
                Err(Error::Config(format!("affine map needs scale > 0, got {scale}")))
            }
            ScalarMap::Shift { by } if !by.is_finite() => Err(Error::Config("shift must be finite".into())),
            _ => Ok(()),
        }
    }

    /// Smallest value of the map on `[lo, +inf)`.
    fn inf_from(&self, lo: f64) -> f64 {
        match self {
            ScalarMap::SquarePlusIdentity if lo < -0.5 => -0.25,
            _ => self.apply(lo),
        }
    }

    /// Check that the map is convex and increasing on `[lo, hi]` by sampling.
    pub fn audit_range(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let fail = || Error::MapAudit { map: self.name().to_string(), lo, hi };
        if !(hi >= lo) {
            return Err(fail());
        }
        let samples = samples.max(3);
        let pts: Vec<f64> = (0..samples)
            .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
            .collect();
        let vals: Vec<f64> = pts.iter().map(|&h| self.apply(h)).collect();
        for w in vals.windows(2) {
            if w[1] < w[0] {
                return Err(fail());
            }
        }
        if hi > lo {
            for k in 0..samples - 2 {
                let mid = self.apply(0.5 * (pts[k] + pts[k + 2]));
                let chord = 0.5 * (vals[k] + vals[k + 2]);
                if mid > chord + DEFAULT_TOL_CONVEX * (1.0 + chord.abs()) {
                    return Err(fail());
                }
            }
            // strictly increasing at the left end: f'(lo) > 0
            let h = (hi - lo) * 1e-6;
            if self.apply(lo + h) <= self.apply(lo) {
                return Err(fail());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    XIndependent { symbol: Symbol },
    /// `|p|^k / k + V(x)`.
    Mechanical { kinetic_power: f64, potential: Potential },
    Composed { map: ScalarMap, inner: Box<HamiltonianSpec> },
    Max { first: Box<HamiltonianSpec>, second: Box<HamiltonianSpec> },
    /// `H(x, -p)`.
    Reversed { inner: Box<HamiltonianSpec> },
}

/// A Hamiltonian together with the momentum and velocity box half-widths
/// used to sample it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub family: Family,
    pub p_max: f64,
    pub q_max: f64,
}

impl HamiltonianSpec {
    pub fn new(family: Family, p_max: f64, q_max: f64) -> Result<Self> {
        if !(p_max > 0.0) || !(q_max > 0.0) {
            return Err(Error::Config(format!("box half-widths must be positive, got p_max={p_max}, q_max={q_max}")));
        }
        match &family {
            Family::XIndependent { symbol } => symbol.validate()?,
            Family::Mechanical { kinetic_power, potential } => {
                if !(*kinetic_power > 1.0) {
                    return Err(Error::Config(format!("kinetic power must exceed 1, got {kinetic_power}")));
                }
                if potential.terms.iter().any(|t| !t.amplitude.is_finite()) {
                    return Err(Error::Config("potential amplitudes must be finite".into()));
                }
            }
            Family::Composed { map, .. } => map.validate()?,
            Family::Max { .. } | Family::Reversed { .. } => {}
        }
        Ok(Self { family, p_max, q_max })
    }

    pub fn x_independent(symbol: Symbol, p_max: f64, q_max: f64) -> Result<Self> {
        Self::new(Family::XIndependent { symbol }, p_max, q_max)
    }

    /// `|p|^2/2 + V(x)`.
    pub fn pendulum(potential: Potential, p_max: f64, q_max: f64) -> Result<Self> {
        Self::new(Family::Mechanical { kinetic_power: 2.0, potential }, p_max, q_max)
    }

    pub fn composed(map: ScalarMap, inner: HamiltonianSpec) -> Result<Self> {
        let (p, q) = (inner.p_max, inner.q_max);
        Self::new(Family::Composed { map, inner: Box::new(inner) }, p, q)
    }

    pub fn max_of(first: HamiltonianSpec, second: HamiltonianSpec) -> Result<Self> {
        let p = first.p_max.max(second.p_max);
        let q = first.q_max.min(second.q_max);
        Self::new(Family::Max { first: Box::new(first), second: Box::new(second) }, p, q)
    }

    pub fn reversed(&self) -> Self {
        Self {
            family: Family::Reversed { inner: Box::new(self.clone()) },
            p_max: self.p_max,
            q_max: self.q_max,
        }
    }

    /// `H - c`, used to normalize a critical value to zero.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            family: Family::Composed { map: ScalarMap::Shift { by: -c }, inner: Box::new(self.clone()) },
            p_max: self.p_max,
            q_max: self.q_max,
        }
    }

    pub fn evaluate(&self, x: Point, p: Point) -> f64 {
        match &self.family {
            Family::XIndependent { symbol } => symbol.eval(p),
            Family::Mechanical { kinetic_power, potential } => {
                p[0].hypot(p[1]).powf(*kinetic_power) / kinetic_power + potential.eval(x)
            }
            Family::Composed { map, inner } => map.apply(inner.evaluate(x, p)),
            Family::Max { first, second } => first.evaluate(x, p).max(second.evaluate(x, p)),
            Family::Reversed { inner } => inner.evaluate(x, [-p[0], -p[1]]),
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match &self.family {
            Family::XIndependent { .. } => true,
            Family::Mechanical { potential, .. } => potential.terms.iter().all(|t| t.amplitude == 0.0),
            Family::Composed { inner, .. } | Family::Reversed { inner } => inner.is_x_independent(),
            Family::Max { first, second } => first.is_x_independent() && second.is_x_independent(),
        }
    }

    /// Declared superlinear lower bound `α(|p|)`.
    pub fn lower_bound(&self, r: f64) -> f64 {
        match &self.family {
            Family::XIndependent { symbol } => {
                symbol.radial_value(r) - symbol.tilt[0].hypot(symbol.tilt[1]) * r + symbol.offset
            }
            Family::Mechanical { kinetic_power, potential } => {
                r.powf(*kinetic_power) / kinetic_power - potential.amplitude_bound()
            }
            Family::Composed { map, inner } => map.inf_from(inner.lower_bound(r)),
            Family::Max { first, second } => first.lower_bound(r).max(second.lower_bound(r)),
            Family::Reversed { inner } => inner.lower_bound(r),
        }
    }

    /// Declared superlinear upper bound `β(|p|)`.
    pub fn upper_bound(&self, r: f64) -> f64 {
        match &self.family {
            Family::XIndependent { symbol } => {
                symbol.radial_value(r) + symbol.tilt[0].hypot(symbol.tilt[1]) * r + symbol.offset
            }
            Family::Mechanical { kinetic_power, potential } => {
                r.powf(*kinetic_power) / kinetic_power + potential.amplitude_bound()
            }
            Family::Composed { map, inner } => {
                map.apply(inner.lower_bound(r)).max(map.apply(inner.upper_bound(r)))
            }
            Family::Max { first, second } => first.upper_bound(r).max(second.upper_bound(r)),
            Family::Reversed { inner } => inner.upper_bound(r),
        }
    }

    /// Exact Lagrangian of an x-independent spec at velocity `q`.
    ///
    /// Closed form for symbols; otherwise the concave one-dimensional
    /// maximization of `p q - H(p)` is solved by golden-section search.
    pub fn x_independent_lagrangian(&self, q: Point, dim: usize) -> Result<f64> {
        if !self.is_x_independent() {
            return Err(Error::NotXIndependent);
        }
        match &self.family {
            Family::XIndependent { symbol } => return Ok(symbol.lagrangian(q)),
            Family::Reversed { inner } => {
                if let Family::XIndependent { symbol } = &inner.family {
                    return Ok(symbol.lagrangian([-q[0], -q[1]]));
                }
            }
            _ => {}
        }
        if dim != 1 {
            return Err(Error::Inconsistent(
                "exact conjugate of a composite x-independent family is only available in one dimension".into(),
            ));
        }
        let f = |p: f64| p * q[0] - self.evaluate([0.0, 0.0], [p, 0.0]);
        let mut lo = -4.0 * self.p_max;
        let mut hi = 4.0 * self.p_max;
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut a = hi - g * (hi - lo);
        let mut b = lo + g * (hi - lo);
        let (mut fa, mut fb) = (f(a), f(b));
        for _ in 0..300 {
            if fa < fb {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = f(b);
            } else {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = f(a);
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        Ok(f(0.5 * (lo + hi)))
    }
}

/// Finite-difference Poisson bracket samples `{G, H}(x, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketSample {
    pub points: Vec<(Point, Point)>,
    pub values: Vec<f64>,
    pub fd_step: f64,
}

impl BracketSample {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn central_gradient(spec: &HamiltonianSpec, x: Point, p: Point, dim: usize, h: f64) -> (Point, Point) {
    let mut dx = [0.0; 2];
    let mut dp = [0.0; 2];
    for a in 0..dim {
        let mut xp = x;
        let mut xm = x;
        xp[a] += h;
        xm[a] -= h;
        dx[a] = (spec.evaluate(xp, p) - spec.evaluate(xm, p)) / (2.0 * h);
        let mut pp = p;
        let mut pm = p;
        pp[a] += h;
        pm[a] -= h;
        dp[a] = (spec.evaluate(x, pp) - spec.evaluate(x, pm)) / (2.0 * h);
    }
    (dx, dp)
}

/// `{G, H} = ⟨D_x G, D_p H⟩ - ⟨D_x H, D_p G⟩` by central differences.
pub fn poisson_bracket(
    g: &HamiltonianSpec,
    h: &HamiltonianSpec,
    samples: &[(Point, Point)],
    dim: usize,
    fd_step: f64,
) -> Result<BracketSample> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidValue(format!("fd_step must be positive, got {fd_step}")));
    }
    let values = samples
        .iter()
        .map(|&(x, p)| {
            let (gx, gp) = central_gradient(g, x, p, dim, fd_step);
            let (hx, hp) = central_gradient(h, x, p, dim, fd_step);
            let a: f64 = (0..dim).map(|k| gx[k] * hp[k]).sum();
            let b: f64 = (0..dim).map(|k| hx[k] * gp[k]).sum();
            a - b
        })
        .collect::<Vec<_>>();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidValue("non-finite bracket value".into()));
    }
    Ok(BracketSample { points: samples.to_vec(), values, fd_step })
}

/// Regular sample set: every `stride`-th grid node crossed with a momentum lattice.
pub fn bracket_samples(grid: &TorusGrid, p_max: f64, per_axis: usize, stride: usize) -> Vec<(Point, Point)> {
    let per_axis = per_axis.max(2);
    let ps: Vec<f64> = (0..per_axis)
        .map(|k| -p_max + 2.0 * p_max * k as f64 / (per_axis - 1) as f64)
        .collect();
    let mut out = Vec::new();
    for i in (0..grid.len()).step_by(stride.max(1)) {
        let x = grid.coords(i);
        if grid.dim() == 1 {
            for &p in &ps {
                out.push((x, [p, 0.0]));
            }
        } else {
            for &p0 in &ps {
                for &p1 in &ps {
                    out.push((x, [p0, p1]));
                }
            }
        }
    }
    out
}

/// Result of scanning a Hamiltonian over the grid and momentum box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub h_min: f64,
    pub argmin: (Point, Point),
    pub h_max: f64,
    pub argmax: (Point, Point),
    /// `(|p|, min_x H, max_x H)` per sampled radius.
    pub radial_envelope: Vec<(f64, f64, f64)>,
    /// `min (H - α(|p|))`; non-negative when the declared lower bound holds.
    pub lower_slack: f64,
    /// `min (β(|p|) - H)`; non-negative when the declared upper bound holds.
    pub upper_slack: f64,
    pub max_convexity_excess: f64,
    pub convexity_pass: bool,
}

/// Scan `[-p_max, p_max]^d` at `p_resolution` nodes per axis at every grid node.
pub fn coercivity_audit(spec: &HamiltonianSpec, grid: &TorusGrid, p_resolution: usize) -> Result<AuditReport> {
    coercivity_audit_with_tol(spec, grid, p_resolution, DEFAULT_TOL_CONVEX)
}

pub fn coercivity_audit_with_tol(
    spec: &HamiltonianSpec,
    grid: &TorusGrid,
    p_resolution: usize,
    tol_convex: f64,
) -> Result<AuditReport> {
    if p_resolution < 3 {
        return Err(Error::InvalidValue(format!("p_resolution must be at least 3, got {p_resolution}")));
    }
    let dim = grid.dim();
    let m = p_resolution;
    let axis: Vec<f64> = (0..m)
        .map(|k| spec.p_max * (2.0 * k as f64 - (m - 1) as f64) / (m - 1) as f64)
        .collect();
    let np = if dim == 1 { m } else { m * m };
    let p_of = |k: usize| -> Point {
        if dim == 1 {
            [axis[k], 0.0]
        } else {
            [axis[k / m], axis[k % m]]
        }
    };

    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    let mut argmin = ([0.0; 2], [0.0; 2]);
    let mut argmax = argmin;
    let mut lower_slack = f64::INFINITY;
    let mut upper_slack = f64::INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    let mut radial: std::collections::BTreeMap<u64, (f64, f64, f64)> = Default::default();

    let mut values = vec![0.0; np];
    for xi in 0..grid.len() {
        let x = grid.coords(xi);
        for (k, v) in values.iter_mut().enumerate() {
            *v = spec.evaluate(x, p_of(k));
        }
        for (k, &v) in values.iter().enumerate() {
            let p = p_of(k);
            let r = p[0].hypot(p[1]);
            if v < h_min {
                h_min = v;
                argmin = (x, p);
            }
            if v > h_max {
                h_max = v;
                argmax = (x, p);
            }
            lower_slack = lower_slack.min(v - spec.lower_bound(r));
            upper_slack = upper_slack.min(spec.upper_bound(r) - v);
            let e = radial.entry(r.to_bits()).or_insert((r, f64::INFINITY, f64::NEG_INFINITY));
            e.1 = e.1.min(v);
            e.2 = e.2.max(v);
        }
        // midpoint convexity over index pairs whose midpoint is a node
        for a in 0..np {
            for b in (a + 1)..np {
                let (ia, ib) = if dim == 1 { ([a, 0], [b, 0]) } else { ([a / m, a % m], [b / m, b % m]) };
                if (ia[0] + ib[0]) % 2 != 0 || (ia[1] + ib[1]) % 2 != 0 {
                    continue;
                }
                let mid = if dim == 1 {
                    (ia[0] + ib[0]) / 2
                } else {
                    (ia[0] + ib[0]) / 2 * m + (ia[1] + ib[1]) / 2
                };
                let chord = 0.5 * (values[a] + values[b]);
                let excess = values[mid] - chord;
                max_excess = max_excess.max(excess);
                let tol = tol_convex * (1.0 + values[a].abs() + values[b].abs());
                if excess > tol {
                    return Err(Error::Convexity { x, p: p_of(a), p2: p_of(b), excess });
                }
            }
        }
    }
    let mut radial_envelope: Vec<(f64, f64, f64)> = radial.into_values().collect();
    radial_envelope.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(AuditReport {
        h_min,
        argmin,
        h_max,
        argmax,
        radial_envelope,
        lower_slack,
        upper_slack,
        max_convexity_excess: max_excess,
        convexity_pass: true,
    })
}

/// `[min, max]` of a spec over grid nodes and the momentum box.
pub fn empirical_range(spec: &HamiltonianSpec, grid: &TorusGrid, p_resolution: usize) -> (f64, f64) {
    let m = p_resolution.max(3);
    let axis: Vec<f64> = (0..m)
        .map(|k| spec.p_max * (2.0 * k as f64 - (m - 1) as f64) / (m - 1) as f64)
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for xi in 0..grid.len() {
        let x = grid.coords(xi);
        let mut visit = |p: Point| {
            let v = spec.evaluate(x, p);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        if grid.dim() == 1 {
            axis.iter().for_each(|&p| visit([p, 0.0]));
        } else {
            for &a in &axis {
                for &b in &axis {
                    visit([a, b]);
                }
            }
        }
    }
    (lo, hi)
}

/// Numerical conjugate of a radial bound, `sup_{r >= 0} (r s - f(r))`.
pub fn radial_conjugate(f: impl Fn(f64) -> f64, s: f64, r_max: f64) -> f64 {
    let samples = 4000;
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 0;
    for k in 0..=samples {
        let r = r_max * k as f64 / samples as f64;
        let v = r * s - f(r);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let step = r_max / samples as f64;
    let mut lo = (best_k as f64 - 1.0).max(0.0) * step;
    let mut hi = (best_k as f64 + 1.0).min(samples as f64) * step;
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if m1 * s - f(m1) < m2 * s - f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let r = 0.5 * (lo + hi);
    best.max(r * s - f(r))
}
