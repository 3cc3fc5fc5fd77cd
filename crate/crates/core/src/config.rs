//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! output = "out"
//!
//! [grid]
//! dim = 1
//! n = 128
//!
//! [plan]
//! delta = 0.1
//! t_max = 51.2
//! probes = [[0.8, 0.4], [0.8, 0.8]]
//!
//! [hamiltonians.pendulum]
//! family = "mechanical"
//! potential = [{ amplitude = 1.0, wave = [1, 0], kind = "cos" }]
//!
//! [hamiltonians.exp_pendulum]
//! family = "composed"
//! map = "exp"
//! inner = "pendulum"
//! ```
//!
//! Composite families (`composed`, `max`, `reversed`) refer to other entries by name.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::commutation::Level;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::hamiltonian::{HamiltonianSpec, Potential, ScalarMap, Symbol, TrigTerm};
use crate::lax_oleinik::{EvolutionPlan, Scheme, DEFAULT_DELTA, DEFAULT_Q_MAX};
use crate::pipeline::Resolution;
use crate::weak_kam::{DEFAULT_CAUCHY_TOL, DEFAULT_TOL_C, DEFAULT_TOL_FIX};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
    grid: RawGrid,
    #[serde(default)]
    plan: RawPlan,
    #[serde(default)]
    tolerances: RawTolerances,
    resolution: Option<RawResolution>,
    #[serde(default)]
    hamiltonians: BTreeMap<String, RawHamiltonian>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default = "one")]
    dim: usize,
    n: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_q_max")]
    q_max: f64,
    #[serde(default = "default_t_max")]
    t_max: f64,
    #[serde(default = "default_probes")]
    probes: Vec<[f64; 2]>,
    #[serde(default)]
    scheme: Scheme,
    #[serde(default = "default_levels")]
    levels: usize,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_q_max() -> f64 {
    DEFAULT_Q_MAX
}
fn default_t_max() -> f64 {
    51.2
}
fn default_probes() -> Vec<[f64; 2]> {
    vec![[0.8, 0.4], [0.8, 0.8], [0.4, 0.8]]
}
fn default_levels() -> usize {
    2
}

impl Default for RawPlan {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            q_max: DEFAULT_Q_MAX,
            t_max: default_t_max(),
            probes: default_probes(),
            scheme: Scheme::default(),
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    tol_c: Option<f64>,
    tol_fix: Option<f64>,
    tol_comm: Option<f64>,
    tol_thm: Option<f64>,
    epsilon_aubry: Option<f64>,
    tol_legendre: Option<f64>,
    cauchy_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResolution {
    m_p: usize,
    m_q: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawMap {
    Name(String),
    Full(ScalarMap),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawHamiltonian {
    XIndependent {
        radial: Vec<(u32, f64)>,
        #[serde(default)]
        tilt: [f64; 2],
        #[serde(default)]
        offset: f64,
        p_max: Option<f64>,
        q_max: Option<f64>,
    },
    Mechanical {
        #[serde(default = "two")]
        kinetic_power: f64,
        #[serde(default)]
        potential: Vec<TrigTerm>,
        p_max: Option<f64>,
        q_max: Option<f64>,
    },
    Composed {
        map: RawMap,
        inner: String,
    },
    Max {
        first: String,
        second: String,
    },
    Reversed {
        inner: String,
    },
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub tol_c: f64,
    pub tol_fix: f64,
    pub tol_thm: f64,
    pub cauchy_tol: f64,
    /// `None` means the documented grid-dependent default.
    pub tol_comm: Option<f64>,
    pub epsilon_aubry: Option<f64>,
    pub tol_legendre: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub grid: TorusGrid,
    pub plan: EvolutionPlan,
    pub probes: Vec<(f64, f64)>,
    pub levels: usize,
    pub resolution: Resolution,
    pub tolerances: Tolerances,
    pub hamiltonians: BTreeMap<String, HamiltonianSpec>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn map_from(raw: RawMap) -> Result<ScalarMap> {
    match raw {
        RawMap::Full(m) => Ok(m),
        RawMap::Name(name) => match name.as_str() {
            "identity" => Ok(ScalarMap::Identity),
            "exp" => Ok(ScalarMap::Exp),
            "square_plus_identity" => Ok(ScalarMap::SquarePlusIdentity),
            other => Err(Error::Config(format!(
                "unknown map {other:?}; parameterized maps need a table such as {{ map = \"affine\", scale = 2.0, offset = 0.0 }}"
            ))),
        },
    }
}

fn resolve(
    name: &str,
    raw: &BTreeMap<String, RawHamiltonian>,
    done: &mut BTreeMap<String, HamiltonianSpec>,
    visiting: &mut BTreeSet<String>,
    q_default: f64,
) -> Result<HamiltonianSpec> {
    if let Some(spec) = done.get(name) {
        return Ok(spec.clone());
    }
    let entry = raw
        .get(name)
        .ok_or_else(|| Error::Config(format!("hamiltonian {name:?} is not defined")))?;
    if !visiting.insert(name.to_string()) {
        return Err(Error::Config(format!("hamiltonian {name:?} refers to itself")));
    }
    let mut sub = |n: &str| resolve(n, raw, done, visiting, q_default);
    let spec = match entry {
        RawHamiltonian::XIndependent { radial, tilt, offset, p_max, q_max } => HamiltonianSpec::x_independent(
            Symbol { radial: radial.clone(), tilt: *tilt, offset: *offset },
            p_max.unwrap_or(q_default),
            q_max.unwrap_or(q_default),
        )?,
        RawHamiltonian::Mechanical { kinetic_power, potential, p_max, q_max } => HamiltonianSpec::new(
            crate::hamiltonian::Family::Mechanical {
                kinetic_power: *kinetic_power,
                potential: Potential::new(potential.clone()),
            },
            p_max.unwrap_or(q_default),
            q_max.unwrap_or(q_default),
        )?,
        RawHamiltonian::Composed { map, inner } => {
            let map = map_from(match map {
                RawMap::Name(s) => RawMap::Name(s.clone()),
                RawMap::Full(m) => RawMap::Full(*m),
            })?;
            HamiltonianSpec::composed(map, sub(inner)?)?
        }
        RawHamiltonian::Max { first, second } => HamiltonianSpec::max_of(sub(first)?, sub(second)?)?,
        RawHamiltonian::Reversed { inner } => sub(inner)?.reversed(),
    };
    visiting.remove(name);
    done.insert(name.to_string(), spec.clone());
    Ok(spec)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let grid = TorusGrid::new(raw.grid.dim, raw.grid.n).map_err(|e| Error::Config(e.to_string()))?;
        let p = &raw.plan;
        positive("plan.delta", p.delta)?;
        positive("plan.q_max", p.q_max)?;
        positive("plan.t_max", p.t_max)?;
        let plan = EvolutionPlan::new(p.delta, p.q_max, p.t_max, &grid)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_scheme(p.scheme);
        if p.levels == 0 {
            return Err(Error::Config("plan.levels must be at least 1".into()));
        }
        let mut probes = Vec::with_capacity(p.probes.len());
        for &[t, s] in &p.probes {
            plan.steps_for(t).map_err(|e| Error::Config(e.to_string()))?;
            plan.steps_for(s).map_err(|e| Error::Config(e.to_string()))?;
            probes.push((t, s));
        }
        let t = &raw.tolerances;
        let opt = |name: &str, v: Option<f64>| v.map(|v| positive(name, v)).transpose();
        let tolerances = Tolerances {
            tol_c: positive("tol_c", t.tol_c.unwrap_or(DEFAULT_TOL_C))?,
            tol_fix: positive("tol_fix", t.tol_fix.unwrap_or(DEFAULT_TOL_FIX))?,
            tol_thm: positive("tol_thm", t.tol_thm.unwrap_or(crate::commutation::DEFAULT_TOL_THM))?,
            cauchy_tol: positive("cauchy_tol", t.cauchy_tol.unwrap_or(DEFAULT_CAUCHY_TOL))?,
            tol_comm: opt("tol_comm", t.tol_comm)?,
            epsilon_aubry: opt("epsilon_aubry", t.epsilon_aubry)?,
            tol_legendre: opt("tol_legendre", t.tol_legendre)?,
        };
        let resolution = match raw.resolution {
            Some(r) => Resolution { m_p: r.m_p, m_q: r.m_q },
            None => Resolution::for_dim(grid.dim()),
        };
        let mut hamiltonians = BTreeMap::new();
        for name in raw.hamiltonians.keys() {
            let mut visiting = BTreeSet::new();
            resolve(name, &raw.hamiltonians, &mut hamiltonians, &mut visiting, p.q_max)
                .map_err(|e| if e.is_config() { e } else { Error::Config(format!("hamiltonian {name:?}: {e}")) })?;
        }
        Ok(Self {
            seed: raw.seed,
            output: raw.output,
            grid,
            plan,
            probes,
            levels: p.levels,
            resolution,
            tolerances,
            hamiltonians,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn hamiltonian(&self, name: &str) -> Result<&HamiltonianSpec> {
        self.hamiltonians
            .get(name)
            .ok_or_else(|| Error::Config(format!("hamiltonian {name:?} is not defined")))
    }

    /// Replace the node count, keeping everything else.
    pub fn with_grid_n(mut self, n: usize) -> Result<Self> {
        let grid = TorusGrid::new(self.grid.dim(), n).map_err(|e| Error::Config(e.to_string()))?;
        self.plan = EvolutionPlan::new(self.plan.delta, self.plan.q_max, self.plan.t_max, &grid)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_scheme(self.plan.scheme);
        self.grid = grid;
        Ok(self)
    }

    /// Parse `"t,s;t,s;..."` and replace the probe list.
    pub fn with_probes(mut self, spec: &str) -> Result<Self> {
        let mut probes = Vec::new();
        for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (t, s) = item
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("probe {item:?} is not of the form t,s")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("probe time {v:?} is not a number")))
            };
            let (t, s) = (parse(t)?, parse(s)?);
            self.plan.steps_for(t).map_err(|e| Error::Config(e.to_string()))?;
            self.plan.steps_for(s).map_err(|e| Error::Config(e.to_string()))?;
            probes.push((t, s));
        }
        if probes.is_empty() {
            return Err(Error::Config("empty probe list".into()));
        }
        self.probes = probes;
        Ok(self)
    }

    /// Configured level followed by `levels - 1` joint refinements.
    pub fn ladder(&self) -> Vec<Level> {
        Level::ladder(self.grid.n(), self.plan.delta, self.levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 3

[grid]
n = 32

[plan]
delta = 0.1
t_max = 6.4
probes = [[0.8, 0.4]]

[tolerances]
tol_comm = 0.05

[hamiltonians.pendulum]
family = "mechanical"
potential = [{ amplitude = 1.0, wave = [1, 0], kind = "cos" }]

[hamiltonians.exp_pendulum]
family = "composed"
map = "exp"
inner = "pendulum"

[hamiltonians.lifted]
family = "composed"
map = { map = "affine", scale = 2.0, offset = 1.0 }
inner = "pendulum"

[hamiltonians.free]
family = "x_independent"
radial = [[2, 0.5]]

[hamiltonians.both]
family = "max"
first = "free"
second = "pendulum"

[hamiltonians.back]
family = "reversed"
inner = "both"
"#;

    #[test]
    fn parses_and_resolves_names() {
        let c = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.grid.n(), 32);
        assert_eq!(c.probes, vec![(0.8, 0.4)]);
        assert_eq!(c.tolerances.tol_comm, Some(0.05));
        assert_eq!(c.tolerances.tol_c, DEFAULT_TOL_C);
        assert_eq!(c.hamiltonians.len(), 6);
        let pend = c.hamiltonian("pendulum").unwrap();
        assert_eq!(pend.evaluate([0.0, 0.0], [1.0, 0.0]), 1.5);
        let e = c.hamiltonian("exp_pendulum").unwrap();
        assert_eq!(e.evaluate([0.0, 0.0], [0.0, 0.0]), 1f64.exp());
        let back = c.hamiltonian("back").unwrap();
        assert_eq!(back.evaluate([0.25, 0.0], [-1.0, 0.0]), 0.5f64.max(0.5 + (std::f64::consts::FRAC_PI_2).cos()));
        assert!(c.hamiltonian("missing").unwrap_err().is_config());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |s: &str| RunConfig::from_toml(s).unwrap_err();
        assert!(bad("[grid]\nn = 2\n").is_config());
        assert!(bad("[grid]\nn = 32\n[plan]\ndelta = -1.0\n").is_config());
        assert!(bad("[grid]\nn = 32\n[plan]\ndelta = 0.001\n").is_config());
        assert!(bad("[grid]\nn = 32\n[plan]\nprobes = [[0.15, 0.1]]\n").is_config());
        assert!(bad("[grid]\nn = 32\n[tolerances]\ntol_c = 0.0\n").is_config());
        assert!(bad("[grid]\nn = 32\nbogus = 1\n").is_config());
        assert!(bad("[grid]\nn = 32\n[hamiltonians.a]\nfamily = \"reversed\"\ninner = \"a\"\n").is_config());
        assert!(bad("[grid]\nn = 32\n[hamiltonians.a]\nfamily = \"composed\"\nmap = \"cube\"\ninner = \"b\"\n").is_config());
        assert!(bad("[grid]\nn = 32\n[hamiltonians.a]\nfamily = \"mechanical\"\nkinetic_power = 1.0\n").is_config());
    }

    #[test]
    fn overrides() {
        let c = RunConfig::from_toml(SAMPLE).unwrap();
        let c = c.with_grid_n(64).unwrap().with_probes("0.2,0.4; 0.8,0.8").unwrap();
        assert_eq!(c.grid.n(), 64);
        assert_eq!(c.probes, vec![(0.2, 0.4), (0.8, 0.8)]);
        assert!(c.clone().with_probes("0.2").is_err());
        assert!(c.clone().with_probes("0.25,0.2").is_err());
        assert!(c.with_grid_n(1).is_err());
    }
}
