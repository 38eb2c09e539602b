//! Named experiment setups for the peer-assembly and topology studies.
//!
//! Each preset is a list of plain configurations; nothing here computes
//! anything.

use std::path::{Path, PathBuf};

use super::config::{
    ExperimentConfig, Format, GraphSection, InfluenceSection, ModelSection, OutputSection, RunSection, Segment,
    Solver, SweepSection,
};
use super::runner::run_to_dir;
use super::ExperimentError;

pub const PRESETS: [&str; 9] = [
    "table1",
    "uipa-sim1",
    "uipa-herd",
    "bipa-dist",
    "bipa-mv",
    "bipa-oprev",
    "bipa-step",
    "multitopo-u",
    "multitopo-b1",
];

pub const DEFAULT_PRESET_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub name: String,
    pub config: ExperimentConfig,
}

fn graph(kind: &str, n: usize) -> GraphSection {
    GraphSection {
        kind: kind.into(),
        n: Some(n),
        k: None,
        p: None,
        seed: None,
        file: None,
    }
}

fn run(solver: Solver) -> RunSection {
    RunSection {
        solver,
        t_end: None,
        grid_step: None,
        replications: None,
        seed: None,
        burn_in: None,
        initial: None,
        events: None,
        export_generator: None,
        replication_seeds: None,
    }
}

/// Unit stand-alone rates `q12 = q21 = 1`, used throughout.
fn config(graph: GraphSection, influence: InfluenceSection, run: RunSection) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelSection {
            opinions: 2,
            rates: Some(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            agent_rates: None,
        },
        influence,
        graph,
        run,
        output: OutputSection {
            dir: None,
            format: Format::Csv,
        },
        sweep: None,
    }
}

fn constant(l1: f64, l2: f64) -> InfluenceSection {
    InfluenceSection {
        lambda: Some(vec![l1, l2]),
        segments: None,
    }
}

fn steps(parts: &[(f64, f64, f64)]) -> InfluenceSection {
    InfluenceSection {
        lambda: None,
        segments: Some(
            parts
                .iter()
                .map(|&(start, l1, l2)| Segment {
                    start,
                    lambda: vec![l1, l2],
                })
                .collect(),
        ),
    }
}

fn named(name: String, config: ExperimentConfig) -> PresetRun {
    PresetRun { name, config }
}

/// Lumped theory (mean and percentile bands) plus simulated realizations on
/// the same horizon and initial law.
fn theory_and_paths(
    prefix: &str,
    n: usize,
    influence: InfluenceSection,
    initial: &str,
    t_end: f64,
    step: f64,
    realizations: usize,
    seed: u64,
) -> Vec<PresetRun> {
    let mut theory = run(Solver::Lumped);
    theory.t_end = Some(t_end);
    theory.grid_step = Some(step);
    theory.initial = Some(initial.into());
    let mut paths = theory.clone();
    paths.solver = Solver::Ssa;
    paths.replications = Some(realizations);
    paths.seed = Some(seed);
    vec![
        named(format!("{prefix}-theory"), config(graph("complete", n), influence.clone(), theory)),
        named(format!("{prefix}-paths"), config(graph("complete", n), influence, paths)),
    ]
}

fn topology_study(l1: f64, l2: f64, seed: u64) -> Vec<PresetRun> {
    let n = 100;
    let mut sw = graph("smallworld", n);
    sw.k = Some(1);
    sw.p = Some(0.2);
    sw.seed = Some(seed);
    let graphs = [
        ("noninteracting", graph("empty", n)),
        ("complete", graph("complete", n)),
        ("smallworld", sw),
        ("star", graph("star", n)),
    ];
    graphs
        .into_iter()
        .map(|(name, g)| {
            let mut r = run(Solver::Ssa);
            r.t_end = Some(1000.0);
            r.grid_step = Some(1.0);
            r.replications = Some(10);
            r.seed = Some(seed);
            r.events = Some(false);
            named(name.into(), config(g, constant(l1, l2), r))
        })
        .collect()
}

/// The configurations behind a preset.
pub fn preset(name: &str, seed: Option<u64>) -> Result<Vec<PresetRun>, ExperimentError> {
    let seed = seed.unwrap_or(DEFAULT_PRESET_SEED);
    let runs = match name {
        "table1" => {
            let mut cfg = config(graph("complete", 100), constant(10.0, 10.0), run(Solver::Lumped));
            cfg.sweep = Some(SweepSection {
                lambda: vec![[0.0, 0.0], [2.0, 2.0], [10.0, 10.0]],
            });
            vec![named("table1".into(), cfg)]
        }
        "uipa-sim1" => {
            let mut runs = Vec::new();
            for init in ["binomial", "uniform", "deterministic:0"] {
                for l in [0.0, 2.0, 10.0] {
                    let tag = init.split(':').next().unwrap();
                    runs.extend(theory_and_paths(
                        &format!("{tag}-lambda{l}"),
                        100,
                        constant(l, l),
                        init,
                        5.0,
                        0.05,
                        5,
                        seed,
                    ));
                }
            }
            runs
        }
        "uipa-herd" => [10.0, 20.0, 200.0]
            .into_iter()
            .flat_map(|l| theory_and_paths(&format!("lambda{l}"), 20, constant(l, l), "binomial", 50.0, 0.1, 1, seed))
            .collect(),
        "bipa-dist" => [0.0, 0.5, 1.0, 2.0, 5.0, 10.0]
            .into_iter()
            .map(|l1| named(format!("lambda1-{l1}"), config(graph("complete", 100), constant(l1, 0.0), run(Solver::Lumped))))
            .collect(),
        "bipa-mv" => {
            let mut cfg = config(graph("complete", 100), constant(0.0, 0.0), run(Solver::Lumped));
            cfg.sweep = Some(SweepSection {
                lambda: (0..=100).map(|i| [i as f64 * 0.5, 0.0]).collect(),
            });
            vec![named("bipa-mv".into(), cfg)]
        }
        "bipa-oprev" => theory_and_paths(
            "oprev",
            100,
            steps(&[(0.0, 20.0, 0.0), (2.0, 20.0, 10.0), (4.0, 20.0, 20.0), (6.0, 20.0, 30.0), (8.0, 20.0, 40.0)]),
            "binomial",
            10.0,
            0.05,
            3,
            seed,
        ),
        "bipa-step" => theory_and_paths(
            "step",
            100,
            steps(&[(0.0, 0.0, 0.0), (1.0, 20.0, 0.0), (4.0, 20.0, 20.0), (7.0, 16.0, 20.0)]),
            "binomial",
            10.0,
            0.05,
            3,
            seed,
        ),
        "multitopo-u" => topology_study(10.0, 10.0, seed),
        "multitopo-b1" => topology_study(1.0, 0.0, seed),
        other => return Err(ExperimentError::UnknownPreset(other.to_string())),
    };
    Ok(runs)
}

/// Runs every configuration of a preset into `out_dir/<run name>/`.
pub fn run_preset(name: &str, out_dir: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut dirs = Vec::new();
    for r in preset(name, seed)? {
        let dir = out_dir.join(&r.name);
        run_to_dir(&r.config, &dir)?;
        dirs.push(dir);
    }
    Ok(dirs)
}
