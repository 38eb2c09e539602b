//! Dispatches a resolved configuration to its solver and collects tables.

use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Resolved, Solver};
use super::output::{Cell, RunOutput, Table};
use super::ExperimentError;
use crate::lumped::{
    peer_assembly_transient_scheduled, uipa_mean, uipa_variance, BirthDeathChain, CountDistribution,
};
use crate::marginal::{
    marginal_ode_solve, pair_joint_ode_solve, pair_joint_stationary, variance_from_pair, MarginalField,
    PairJointState,
};
use crate::master::{build_master_generator, master_steady_state, master_transient, DEFAULT_MAX_STATES};
use crate::model::{InfluenceIntensities, IntensitySchedule, NetworkModel};
use crate::ode::OdeOptions;
use crate::rng::derive_seed;
use crate::ssa::run_ensemble;
use crate::stats::{empirical_count_distribution, ensemble_moments, Window};

/// Runs `cfg` in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    let resolved = cfg.resolve()?;
    let echo = resolved_config(cfg, &resolved);
    let tables = match cfg.run.solver {
        Solver::Master => run_master(&echo, &resolved)?,
        Solver::Lumped => run_lumped(&echo, &resolved)?,
        Solver::Marginal => run_marginal(&resolved)?,
        Solver::Pair => run_pair(&resolved)?,
        Solver::Ssa => run_ssa(&echo, &resolved)?,
    };
    let mut out = RunOutput {
        solver: format!("{:?}", cfg.run.solver).to_lowercase(),
        resolved_config: echo.to_toml(),
        tables,
        files: Vec::new(),
    };
    if cfg.run.solver == Solver::Master && cfg.run.export_generator == Some(true) {
        let lambdas = resolved.network.schedule().at(0.0);
        let gen = build_master_generator(&resolved.network, lambdas, DEFAULT_MAX_STATES).map_err(solver_err)?;
        out.files.push((
            "generator.txt".into(),
            "master generator at t = 0: header `size nnz`, then 0-based `row col value`".into(),
            gen.to_coordinate_text(),
        ));
    }
    Ok(out)
}

/// Runs `cfg` and writes its outputs under `out_dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let out = execute(cfg)?;
    out.write(out_dir, cfg.output.format)
}

fn solver_err(e: crate::Error) -> ExperimentError {
    ExperimentError::Validation(format!("run: {e}"))
}

/// The configuration with every default and derived seed spelled out.
fn resolved_config(cfg: &ExperimentConfig, resolved: &Resolved) -> ExperimentConfig {
    let mut echo = cfg.clone();
    if echo.graph.kind == "smallworld" && echo.graph.seed.is_none() {
        echo.graph.seed = Some(0);
    }
    if echo.run.initial.is_none() {
        echo.run.initial = Some("binomial".into());
    }
    if cfg.run.solver == Solver::Ssa {
        let seed = cfg.run.seed.unwrap_or(0);
        let reps = cfg.run.replications.unwrap_or(1);
        echo.run.seed = Some(seed);
        echo.run.replications = Some(reps);
        echo.run.replication_seeds = Some((0..reps as u64).map(|k| derive_seed(seed, k)).collect());
        if echo.run.burn_in.is_none() {
            echo.run.burn_in = Some(default_burn_in(&resolved.network));
        }
        if echo.run.events.is_none() {
            echo.run.events = Some(true);
        }
    } else {
        echo.run.replication_seeds = None;
    }
    if let (Some(t), None) = (cfg.run.t_end, cfg.run.grid_step) {
        echo.run.grid_step = Some(t / 100.0);
    }
    echo
}

/// Ten relaxation times of the slowest stand-alone agent: `10 / (q12 + q21)`
/// for two opinions, `10 / -trace(Q)` in general.
pub fn default_burn_in(network: &NetworkModel) -> f64 {
    let slowest = network
        .agents()
        .iter()
        .map(|q| (0..q.opinions()).map(|i| -q.rate(i, i)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    10.0 / slowest
}

/// Advances a solution across schedule segments. `advance(lambda, state,
/// times)` solves within one segment from `state` at relative `times`.
fn piecewise<S: Clone>(
    schedule: &IntensitySchedule,
    grid: &[f64],
    init: S,
    mut advance: impl FnMut(&InfluenceIntensities, &S, &[f64]) -> Result<Vec<S>, ExperimentError>,
) -> Result<Vec<S>, ExperimentError> {
    let mut out = Vec::with_capacity(grid.len());
    let mut state = init;
    let mut gi = 0;
    for k in 0..schedule.segment_count() {
        if gi >= grid.len() {
            break;
        }
        let (start, end) = (schedule.start(k), schedule.end(k));
        let last = k + 1 == schedule.segment_count();
        let mut local = Vec::new();
        while gi < grid.len() && (last || grid[gi] < end) {
            local.push(grid[gi] - start);
            gi += 1;
        }
        let taken = local.len();
        let carry = !last && gi < grid.len();
        if carry {
            local.push(end - start);
        }
        let res = advance(schedule.at(start), &state, &local)?;
        out.extend_from_slice(&res[..taken]);
        if carry {
            state = res[taken].clone();
        }
    }
    Ok(out)
}

fn moments_table() -> Table {
    Table::new(
        "moments",
        &["statistic", "value", "std_error", "n"],
        "statistics of n1/N; n is the number of batch means (0 for exact values)",
    )
}

fn exact(t: &mut Table, name: &str, v: f64) {
    t.push(vec![name.into(), v.into(), 0.0.into(), 0usize.into()]);
}

fn count_table(name: &str, p: &[f64], description: &str) -> Table {
    let mut t = Table::new(name, &["i", "p"], description);
    for (i, &x) in p.iter().enumerate() {
        t.push(vec![i.into(), x.into()]);
    }
    t
}

fn last_intensities(network: &NetworkModel) -> &InfluenceIntensities {
    let s = network.schedule();
    s.at(s.start(s.segment_count() - 1))
}

fn run_master(_cfg: &ExperimentConfig, r: &Resolved) -> Result<Vec<Table>, ExperimentError> {
    let net = &r.network;
    let gen = build_master_generator(net, last_intensities(net), DEFAULT_MAX_STATES).map_err(solver_err)?;
    let space = *gen.space();
    let pi = master_steady_state(&gen).map_err(solver_err)?;
    let counts = space.count_distribution(pi.as_slice(), 0).map_err(solver_err)?;
    let (mean, var) = CountDistribution::new(counts.clone()).moments();
    let mut tables = vec![
        count_table("stationary", pi.as_slice(), "stationary law of the joint configuration, i = state index"),
        count_table("stationary_counts", counts.as_slice(), "stationary law of n1"),
    ];
    let mut m = moments_table();
    exact(&mut m, "mean", mean);
    exact(&mut m, "var", var);
    tables.push(m);
    if !r.grid.is_empty() {
        let p0 = space.product(&r.initial.marginals(net)?).map_err(solver_err)?;
        let traj = piecewise(net.schedule(), &r.grid, p0, |l, p, times| {
            let g = build_master_generator(net, l, DEFAULT_MAX_STATES).map_err(solver_err)?;
            Ok(master_transient(&g, p, times).map_err(solver_err)?.states)
        })?;
        let mut marg = Table::new("marginals", &["t", "agent", "opinion", "prob"], "per-agent opinion laws");
        let mut tr = Table::new("transient", &["t", "i", "p"], "law of n1 over time");
        for (t, p) in r.grid.iter().zip(&traj) {
            for a in 0..space.agents() {
                let row = space.marginal(p.as_slice(), a).map_err(solver_err)?;
                for (j, &x) in row.as_slice().iter().enumerate() {
                    marg.push(vec![(*t).into(), (a + 1).into(), (j + 1).into(), x.into()]);
                }
            }
            let c = space.count_distribution(p.as_slice(), 0).map_err(solver_err)?;
            for (i, &x) in c.as_slice().iter().enumerate() {
                tr.push(vec![(*t).into(), i.into(), x.into()]);
            }
        }
        tables.push(marg);
        tables.push(tr);
    }
    Ok(tables)
}

fn run_lumped(cfg: &ExperimentConfig, r: &Resolved) -> Result<Vec<Table>, ExperimentError> {
    let net = &r.network;
    let n = net.agent_count();
    let (q12, q21) = r.peer_assembly_rates().expect("checked by resolve");
    let l = last_intensities(net);
    let chain = BirthDeathChain::peer_assembly(n, q12, q21, l.get(0), l.get(1)).map_err(solver_err)?;
    let pbar = chain.steady_state().map_err(solver_err)?;
    let (mean, var) = pbar.moments();
    let pct = |d: &CountDistribution, q: f64| d.percentile(q).map(|i| i as f64 / n as f64).map_err(solver_err);
    let mut m = moments_table();
    exact(&mut m, "mean", mean);
    exact(&mut m, "var", var);
    exact(&mut m, "p2.5", pct(&pbar, 0.025)?);
    exact(&mut m, "p97.5", pct(&pbar, 0.975)?);
    if l.is_unbiased() {
        exact(&mut m, "mean_closed_form", uipa_mean(q12, q21).map_err(solver_err)?);
        exact(&mut m, "var_closed_form", uipa_variance(n, q12, q21, l.get(0)).map_err(solver_err)?);
    }
    let mut tables = vec![count_table("stationary", pbar.as_slice(), "stationary law of n1"), m];
    if !r.grid.is_empty() {
        let p0 = r.initial.counts(net)?;
        let traj = peer_assembly_transient_scheduled(n, q12, q21, net.schedule(), &p0, &r.grid).map_err(solver_err)?;
        let mut tr = Table::new("transient", &["t", "i", "p"], "law of n1 over time");
        let mut summary = Table::new(
            "transient_summary",
            &["t", "mean", "p2.5", "p97.5"],
            "mean and 2.5/97.5 percentiles of n1/N over time",
        );
        for (t, d) in r.grid.iter().zip(&traj) {
            for (i, &x) in d.as_slice().iter().enumerate() {
                tr.push(vec![(*t).into(), i.into(), x.into()]);
            }
            summary.push(vec![(*t).into(), d.moments().0.into(), pct(d, 0.025)?.into(), pct(d, 0.975)?.into()]);
        }
        tables.push(tr);
        tables.push(summary);
    }
    if let Some(sweep) = &cfg.sweep {
        let mut t = Table::new(
            "sweep",
            &["lambda1", "lambda2", "mean", "var"],
            "stationary mean and variance of n1/N",
        );
        for &[l1, l2] in &sweep.lambda {
            let d = BirthDeathChain::peer_assembly(n, q12, q21, l1, l2)
                .and_then(|c| c.steady_state())
                .map_err(|e| ExperimentError::Validation(format!("sweep.lambda: {e}")))?;
            let (mean, var) = d.moments();
            t.push(vec![l1.into(), l2.into(), mean.into(), var.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn run_marginal(r: &Resolved) -> Result<Vec<Table>, ExperimentError> {
    let net = &r.network;
    let init = MarginalField::new(r.initial.marginals(net)?).map_err(solver_err)?;
    let fields = piecewise(net.schedule(), &r.grid, init, |l, f, times| {
        marginal_ode_solve(net, l, f, times, OdeOptions::default()).map_err(solver_err)
    })?;
    let mut t = Table::new("marginals", &["t", "agent", "opinion", "prob"], "per-agent opinion laws");
    for (time, f) in r.grid.iter().zip(&fields) {
        for a in 0..f.agents() {
            for (j, &x) in f.row(a).iter().enumerate() {
                t.push(vec![(*time).into(), (a + 1).into(), (j + 1).into(), x.into()]);
            }
        }
    }
    Ok(vec![t])
}

/// Pair probabilities implied by an exchangeable law of the opinion-1 count.
pub fn pair_state_from_counts(d: &CountDistribution) -> Result<PairJointState, crate::Error> {
    let n = d.agents() as f64;
    let (mut p11, mut p22) = (0.0, 0.0);
    for (k, &p) in d.as_slice().iter().enumerate() {
        let k = k as f64;
        p11 += p * k * (k - 1.0);
        p22 += p * (n - k) * (n - k - 1.0);
    }
    PairJointState::new(p11 / (n * (n - 1.0)), p22 / (n * (n - 1.0)))
}

fn run_pair(r: &Resolved) -> Result<Vec<Table>, ExperimentError> {
    let net = &r.network;
    let n = net.agent_count();
    let (q12, q21) = r.peer_assembly_rates().expect("checked by resolve");
    let l = last_intensities(net).get(0);
    let pi11 = pair_joint_stationary(n, q12, q21, l).map_err(solver_err)?;
    let mut m = moments_table();
    exact(&mut m, "mean", net.agent(0).stationary()[0]);
    exact(&mut m, "var", variance_from_pair(n, q12, q21, pi11));
    exact(&mut m, "pi11", pi11);
    let mut tables = vec![m];
    if !r.grid.is_empty() {
        let init = pair_state_from_counts(&r.initial.counts(net)?).map_err(solver_err)?;
        let traj = piecewise(net.schedule(), &r.grid, init, |l, s, times| {
            pair_joint_ode_solve(n, q12, q21, l.get(0), *s, times).map_err(solver_err)
        })?;
        let mut t = Table::new(
            "pair",
            &["t", "pi11", "pi22", "pi12"],
            "joint opinion law of two distinct agents",
        );
        for (time, s) in r.grid.iter().zip(&traj) {
            t.push(vec![(*time).into(), s.p11.into(), s.p22.into(), s.p12().into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn run_ssa(echo: &ExperimentConfig, r: &Resolved) -> Result<Vec<Table>, ExperimentError> {
    let net = &r.network;
    let run = &echo.run;
    let t_end = *r.grid.last().expect("ssa has a horizon");
    let reps = run.replications.expect("filled by echo");
    let seed = run.seed.expect("filled by echo");
    let init = r.initial.for_simulation(net)?;
    let ens = run_ensemble(net, &init, t_end, reps, seed).map_err(solver_err)?;
    let m = net.opinions();
    let mut cols = vec!["t".to_string(), "replicate".to_string()];
    cols.extend((1..=m).map(|j| format!("n{j}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut counts = Table::new("counts", &col_refs, "opinion counts of each replicate on the grid");
    let mut tables = Vec::new();
    for (k, path) in ens.paths.iter().enumerate() {
        let traj = path.count_trajectory(&r.grid).map_err(solver_err)?;
        for (t, row) in r.grid.iter().zip(traj) {
            let mut cells: Vec<Cell> = vec![(*t).into(), (k + 1).into()];
            cells.extend(row.into_iter().map(Cell::from));
            counts.push(cells);
        }
        if run.events == Some(true) {
            let mut ev = Table::new(
                &format!("events_{}", k + 1),
                &["t", "agent", "from", "to"],
                "opinion changes of one replicate (agents and opinions 1-based)",
            );
            for e in &path.events {
                ev.push(vec![
                    e.time.into(),
                    (e.agent as usize + 1).into(),
                    (e.from as usize + 1).into(),
                    (e.to as usize + 1).into(),
                ]);
            }
            tables.push(ev);
        }
    }
    tables.insert(0, counts);
    // moments need a window after burn-in; short transient runs have none
    let burn_in = run.burn_in.expect("filled by echo");
    if burn_in < t_end {
        let window = Window::new(burn_in, t_end);
        let mo = ensemble_moments(&ens, 0, window).map_err(solver_err)?;
        let mut t = moments_table();
        for (name, e) in [("mean", mo.mean), ("var", mo.variance)] {
            t.push(vec![name.into(), e.value.into(), e.std_error.into(), e.samples.into()]);
        }
        tables.push(t);
        let h = empirical_count_distribution(&ens, 0, window).map_err(solver_err)?;
        let mut t = Table::new("histogram", &["i", "p", "stderr"], "time-weighted law of n1 after burn-in");
        for (i, (&p, &se)) in h.distribution.as_slice().iter().zip(&h.std_error).enumerate() {
            t.push(vec![i.into(), p.into(), se.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}
