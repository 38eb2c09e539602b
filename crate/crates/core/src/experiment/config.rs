//! TOML experiment description and its translation into library objects.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::graph::Graph;
use crate::lumped::{CountDistribution, InitialCounts};
use crate::model::{InfluenceIntensities, IntensitySchedule, NetworkModel, ProbabilityVector, RateMatrix};
use crate::ssa::InitialOpinions;
use crate::topology::TopologySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub influence: InfluenceSection,
    pub graph: GraphSection,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub opinions: usize,
    /// Off-diagonal rates shared by every agent, row-major; the diagonal is
    /// ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<Vec<f64>>>,
    /// One off-diagonal rate matrix per agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_rates: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Segment>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub start: f64,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// `empty`, `complete`, `star`, `smallworld` or `file`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Edge-list file, relative paths resolved against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Master,
    Lumped,
    Marginal,
    Pair,
    Ssa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub solver: Solver,
    /// Horizon of transient outputs; steady-state only when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Grid spacing, default `t_end / 100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    /// `binomial[:p]`, `uniform`, `deterministic[:k]`, `iid:p1,..,pM`,
    /// `all:j` or `fixed:s1,..,sN` (opinions 1-based).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    /// Write per-replication event logs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<bool>,
    /// Export the master generator in coordinate format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_generator: Option<bool>,
    /// Filled in by the runner; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replication_seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Stationary moments of the count chain over a list of `(lambda1, lambda2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda: Vec<[f64; 2]>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (cfg.graph.file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds and checks everything the run needs without solving anything.
    pub fn resolve(&self) -> Result<Resolved, ExperimentError> {
        let m = self.model.opinions;
        let graph = self.graph.build()?;
        let n = graph.node_count();
        let agents = match (&self.model.rates, &self.model.agent_rates) {
            (Some(r), None) => {
                check_square(r, m, "model.rates")?;
                let q = RateMatrix::from_off_diagonal(r.clone()).map_err(field("model.rates"))?;
                vec![q; n]
            }
            (None, Some(all)) => {
                if all.len() != n {
                    return Err(invalid("model.agent_rates", format!("expected {n} matrices, got {}", all.len())));
                }
                all.iter()
                    .enumerate()
                    .map(|(r, rows)| {
                        let name = format!("model.agent_rates[{}]", r + 1);
                        check_square(rows, m, &name)?;
                        RateMatrix::from_off_diagonal(rows.clone()).map_err(field(&name))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            _ => return Err(invalid("model", "give exactly one of `rates` and `agent_rates`")),
        };
        let schedule = self.influence.schedule(m)?;
        let network = NetworkModel::new(graph, agents, schedule).map_err(field("model"))?;
        let run = &self.run;
        if let Some(t) = run.t_end {
            if !(t > 0.0) || !t.is_finite() {
                return Err(invalid("run.t_end", format!("must be positive, got {t}")));
            }
        }
        let grid = match run.t_end {
            Some(t_end) => {
                let step = run.grid_step.unwrap_or(t_end / 100.0);
                if !(step > 0.0) || !step.is_finite() {
                    return Err(invalid("run.grid_step", format!("must be positive, got {step}")));
                }
                make_grid(t_end, step)
            }
            None => Vec::new(),
        };
        if run.replications == Some(0) {
            return Err(invalid("run.replications", "must be at least 1"));
        }
        if let Some(b) = run.burn_in {
            if !(b >= 0.0) {
                return Err(invalid("run.burn_in", format!("must be nonnegative, got {b}")));
            }
        }
        let initial = InitialSpec::parse(run.initial.as_deref().unwrap_or("binomial"), m, n)?;
        let resolved = Resolved {
            network,
            grid,
            initial,
        };
        resolved.check_solver(self)?;
        Ok(resolved)
    }
}

fn check_square(rows: &[Vec<f64>], m: usize, name: &str) -> Result<(), ExperimentError> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(invalid(name, format!("expected a {m}x{m} matrix")));
    }
    Ok(())
}

pub(crate) fn make_grid(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    grid.push(t_end);
    grid
}

fn invalid(name: &str, msg: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Validation(format!("{name}: {msg}"))
}

fn field(name: &str) -> impl Fn(crate::Error) -> ExperimentError + '_ {
    move |e| invalid(name, e)
}

impl InfluenceSection {
    pub fn schedule(&self, m: usize) -> Result<IntensitySchedule, ExperimentError> {
        let lam = |v: &[f64], name: &str| -> Result<InfluenceIntensities, ExperimentError> {
            if v.len() != m {
                return Err(invalid(name, format!("expected {m} intensities, got {}", v.len())));
            }
            InfluenceIntensities::new(v.to_vec()).map_err(field(name))
        };
        match (&self.lambda, &self.segments) {
            (Some(l), None) => Ok(IntensitySchedule::constant(lam(l, "influence.lambda")?)),
            (None, Some(segs)) => {
                let parts = segs
                    .iter()
                    .enumerate()
                    .map(|(k, s)| Ok((s.start, lam(&s.lambda, &format!("influence.segments[{}].lambda", k + 1))?)))
                    .collect::<Result<Vec<_>, ExperimentError>>()?;
                IntensitySchedule::new(parts).map_err(field("influence.segments"))
            }
            _ => Err(invalid("influence", "give exactly one of `lambda` and `segments`")),
        }
    }
}

impl GraphSection {
    pub fn topology(&self) -> Result<Option<TopologySpec>, ExperimentError> {
        let n = || self.n.ok_or_else(|| invalid("graph.n", "missing"));
        let spec = match self.kind.as_str() {
            "empty" | "noninteracting" => TopologySpec::Empty { n: n()? },
            "complete" => TopologySpec::Complete { n: n()? },
            "star" => TopologySpec::Star { n: n()? },
            "smallworld" => TopologySpec::SmallWorld {
                n: n()?,
                k: self.k.ok_or_else(|| invalid("graph.k", "missing"))?,
                p: self.p.ok_or_else(|| invalid("graph.p", "missing"))?,
                seed: self.seed.unwrap_or(0),
            },
            "file" => return Ok(None),
            other => return Err(invalid("graph.kind", format!("unknown topology `{other}`"))),
        };
        spec.validate().map_err(field("graph"))?;
        Ok(Some(spec))
    }

    pub fn build(&self) -> Result<Graph, ExperimentError> {
        match self.topology()? {
            Some(spec) => spec.generate().map_err(field("graph")),
            None => {
                let path = self.file.as_ref().ok_or_else(|| invalid("graph.file", "missing"))?;
                let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
                let g = Graph::parse_edge_list(&text).map_err(field("graph.file"))?;
                if let Some(n) = self.n {
                    if n != g.node_count() {
                        return Err(invalid("graph.n", format!("file has {} nodes", g.node_count())));
                    }
                }
                Ok(g)
            }
        }
    }
}

/// Parsed `run.initial`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Independent agents with this opinion law; `None` means the stand-alone
    /// stationary law of each agent.
    Iid(Option<ProbabilityVector>),
    /// Uniform law of the opinion-1 count (two opinions).
    UniformCount,
    /// Exactly `k` agents, the first ones, hold opinion 1.
    Deterministic(usize),
    Fixed(Vec<usize>),
}

impl InitialSpec {
    pub fn parse(s: &str, m: usize, n: usize) -> Result<Self, ExperimentError> {
        let bad = |msg: String| invalid("run.initial", msg);
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let numbers = |a: &str| -> Result<Vec<f64>, ExperimentError> {
            a.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad(format!("bad number `{x}`"))))
                .collect()
        };
        let opinion = |x: f64| -> Result<usize, ExperimentError> {
            if x.fract() != 0.0 || x < 1.0 || x > m as f64 {
                return Err(bad(format!("opinion {x} is not in 1..={m}")));
            }
            Ok(x as usize - 1)
        };
        match (kind, arg) {
            ("binomial", None) => Ok(Self::Iid(None)),
            ("binomial", Some(a)) => {
                let p = numbers(a)?;
                if m != 2 || p.len() != 1 {
                    return Err(bad("binomial:p needs two opinions and one probability".into()));
                }
                let pv = ProbabilityVector::new(vec![p[0], 1.0 - p[0]]).map_err(|e| bad(e.to_string()))?;
                Ok(Self::Iid(Some(pv)))
            }
            ("iid", Some(a)) => {
                let p = numbers(a)?;
                if p.len() != m {
                    return Err(bad(format!("expected {m} probabilities")));
                }
                Ok(Self::Iid(Some(ProbabilityVector::new(p).map_err(|e| bad(e.to_string()))?)))
            }
            ("uniform", None) if m == 2 => Ok(Self::UniformCount),
            ("deterministic", a) if m == 2 => {
                let k = a.map(|a| a.parse::<usize>().map_err(|_| bad(format!("bad count `{a}`")))).transpose()?;
                let k = k.unwrap_or(0);
                if k > n {
                    return Err(bad(format!("count {k} exceeds {n} agents")));
                }
                Ok(Self::Deterministic(k))
            }
            ("all", Some(a)) => {
                let j = opinion(a.parse::<f64>().map_err(|_| bad(format!("bad opinion `{a}`")))?)?;
                Ok(Self::Fixed(vec![j; n]))
            }
            ("fixed", Some(a)) => {
                let v = numbers(a)?.into_iter().map(opinion).collect::<Result<Vec<_>, _>>()?;
                if v.len() != n {
                    return Err(bad(format!("expected {n} opinions, got {}", v.len())));
                }
                Ok(Self::Fixed(v))
            }
            _ => Err(bad(format!("unrecognised initial law `{s}`"))),
        }
    }

    /// Law of the opinion-1 count for exchangeable two-opinion models.
    pub fn counts(&self, network: &NetworkModel) -> Result<CountDistribution, ExperimentError> {
        let n = network.agent_count();
        let spec = match self {
            Self::Iid(None) => InitialCounts::Binomial(network.agent(0).stationary()[0]),
            Self::Iid(Some(p)) => InitialCounts::Binomial(p[0]),
            Self::UniformCount => InitialCounts::Uniform,
            Self::Deterministic(k) => InitialCounts::Deterministic(*k),
            Self::Fixed(v) => InitialCounts::Deterministic(v.iter().filter(|&&s| s == 0).count()),
        };
        spec.distribution(n).map_err(field("run.initial"))
    }

    /// Per-agent opinion laws, when the initial law is a product.
    pub fn marginals(&self, network: &NetworkModel) -> Result<Vec<ProbabilityVector>, ExperimentError> {
        let n = network.agent_count();
        let m = network.opinions();
        match self {
            Self::Iid(None) => Ok(network.agents().iter().map(|q| q.stationary()).collect()),
            Self::Iid(Some(p)) => Ok(vec![p.clone(); n]),
            Self::Deterministic(k) => Ok((0..n)
                .map(|r| ProbabilityVector::point_mass(m, usize::from(r >= *k)).expect("two opinions"))
                .collect()),
            Self::Fixed(v) => Ok(v
                .iter()
                .map(|&s| ProbabilityVector::point_mass(m, s).expect("opinion checked"))
                .collect()),
            Self::UniformCount => Err(invalid(
                "run.initial",
                "a uniform count law is not a product law; use the lumped or ssa solver",
            )),
        }
    }

    pub fn for_simulation(&self, network: &NetworkModel) -> Result<InitialOpinions, ExperimentError> {
        match self {
            Self::Iid(None) => {
                if !network.has_identical_agents() {
                    let v = self.marginals(network)?;
                    if v.windows(2).any(|w| w[0] != w[1]) {
                        return Err(invalid(
                            "run.initial",
                            "agents differ; give an explicit `iid:` or `fixed:` law",
                        ));
                    }
                }
                Ok(InitialOpinions::Iid(network.agent(0).stationary()))
            }
            Self::Iid(Some(p)) => Ok(InitialOpinions::Iid(p.clone())),
            Self::UniformCount | Self::Deterministic(_) => Ok(InitialOpinions::Count(self.counts(network)?)),
            Self::Fixed(v) => Ok(InitialOpinions::Fixed(v.clone())),
        }
    }
}

/// A checked configuration ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub network: NetworkModel,
    pub grid: Vec<f64>,
    pub initial: InitialSpec,
}

impl Resolved {
    /// Two-state rates `(q12, q21)` when the network is a peer assembly:
    /// identical two-opinion agents on a complete graph.
    pub fn peer_assembly_rates(&self) -> Option<(f64, f64)> {
        let net = &self.network;
        let n = net.agent_count();
        let complete = net.graph().edge_count() == n * (n - 1) / 2;
        if net.opinions() != 2 || !net.has_identical_agents() || !complete || n < 2 {
            return None;
        }
        let q = net.agent(0);
        Some((q.rate(0, 1), q.rate(1, 0)))
    }

    fn check_solver(&self, cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
        let run = &cfg.run;
        let net = &self.network;
        let needs_pa = |name: &str| {
            self.peer_assembly_rates()
                .map(|_| ())
                .ok_or_else(|| invalid("run.solver", format!("{name} needs identical two-opinion agents on a complete graph")))
        };
        match run.solver {
            Solver::Master => {
                crate::master::MasterSpace::new(net.agent_count(), net.opinions()).map_err(field("run.solver"))?;
                if run.t_end.is_some() {
                    self.initial.marginals(net)?;
                }
            }
            Solver::Lumped => needs_pa("lumped")?,
            Solver::Pair => {
                needs_pa("pair")?;
                if net.schedule().segments().any(|(_, l)| !l.is_unbiased()) {
                    return Err(invalid("influence", "pair equations need equal intensities"));
                }
                if run.t_end.is_none() && !net.schedule().is_constant() {
                    return Err(invalid("run.t_end", "required with a schedule"));
                }
            }
            Solver::Marginal => {
                if !net.has_identical_agents() {
                    return Err(invalid("model", "marginal equations need identical agents"));
                }
                if net.schedule().segments().any(|(_, l)| !l.is_unbiased()) {
                    return Err(invalid("influence", "marginal equations need equal intensities"));
                }
                if run.t_end.is_none() {
                    return Err(invalid("run.t_end", "required by the marginal solver"));
                }
                self.initial.marginals(net)?;
            }
            Solver::Ssa => {
                if run.t_end.is_none() {
                    return Err(invalid("run.t_end", "required by the ssa solver"));
                }
                self.initial.for_simulation(net)?;
            }
        }
        if cfg.sweep.is_some() && run.solver != Solver::Lumped {
            return Err(invalid("sweep", "only the lumped solver supports sweeps"));
        }
        Ok(())
    }
}
