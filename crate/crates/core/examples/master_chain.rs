//! Exact joint chain of a small heterogeneous network: steady state,
//! per-agent marginals and the transient from a fixed configuration.

use opinet::master::{build_master_generator, master_steady_state, master_transient};
use opinet::{Graph, InfluenceIntensities, IntensitySchedule, NetworkModel, RateMatrix};

fn main() -> opinet::Result<()> {
    // a path 0 - 1 - 2 - 3 with one stubborn end
    let graph = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)])?;
    let mut agents = vec![RateMatrix::two_state(1.0, 1.0)?; 4];
    agents[0] = RateMatrix::two_state(0.1, 2.0)?;
    let lambda = InfluenceIntensities::new(vec![3.0, 1.0])?;
    let net = NetworkModel::new(graph, agents, IntensitySchedule::constant(lambda.clone()))?;
    let gen = build_master_generator(&net, &lambda, 1 << 16)?;
    println!("{} states, {} off-diagonal entries", gen.space().size(), gen.off_diagonal_nnz());

    let pi = master_steady_state(&gen)?;
    for r in 0..4 {
        println!("agent {r}: P(opinion 1) = {:.5}", gen.space().marginal(pi.as_slice(), r)?.as_slice()[0]);
    }
    println!("law of n1: {:?}", gen.space().count_distribution(pi.as_slice(), 0)?.as_slice());

    let mut p0 = vec![0.0; gen.space().size()];
    p0[gen.space().encode(&[1, 1, 1, 1])] = 1.0;
    let p0 = opinet::ProbabilityVector::new(p0)?;
    let grid = [0.5, 1.0, 2.0, 4.0];
    let traj = master_transient(&gen, &p0, &grid)?;
    for (t, p) in grid.iter().zip(&traj.states) {
        let m = gen.space().count_distribution(p.as_slice(), 0)?;
        let mean: f64 = m.as_slice().iter().enumerate().map(|(i, x)| i as f64 * x).sum();
        println!("t={t}: E[n1] = {mean:.4}");
    }
    Ok(())
}
