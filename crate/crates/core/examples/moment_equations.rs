//! Marginal equations on a small world, and the pair-joint equations that
//! give the variance of n1/N on a complete graph.

use opinet::marginal::{marginal_ode_solve, pair_joint_ode_solve, pair_joint_stationary, variance_from_pair, MarginalField, PairJointState};
use opinet::ode::OdeOptions;
use opinet::{BirthDeathChain, InfluenceIntensities, IntensitySchedule, NetworkModel, ProbabilityVector, RateMatrix, TopologySpec};

fn main() -> opinet::Result<()> {
    let graph = TopologySpec::SmallWorld { n: 50, k: 2, p: 0.2, seed: 3 }.generate()?;
    let lambda = InfluenceIntensities::unbiased(2, 5.0)?;
    let net = NetworkModel::identical(graph, RateMatrix::two_state(1.0, 1.0)?, IntensitySchedule::constant(lambda.clone()))?;
    let start = MarginalField::uniform_rows(50, &ProbabilityVector::point_mass(2, 1)?);
    let grid = [0.0, 0.5, 1.0, 2.0, 5.0];
    for (t, f) in grid.iter().zip(marginal_ode_solve(&net, &lambda, &start, &grid, OdeOptions::default())?) {
        let avg = f.rows().iter().map(|r| r[0]).sum::<f64>() / 50.0;
        println!("t={t}: mean P(opinion 1) = {avg:.5}");
    }

    let (n, l) = (100, 10.0);
    let traj = pair_joint_ode_solve(n, 1.0, 1.0, l, PairJointState::independent(0.5)?, &[0.1, 1.0, 10.0])?;
    for s in &traj {
        println!("pi11 = {:.6}, variance {:.6}", s.p11, variance_from_pair(n, 1.0, 1.0, s.p11));
    }
    let pi11 = pair_joint_stationary(n, 1.0, 1.0, l)?;
    let exact = BirthDeathChain::peer_assembly(n, 1.0, 1.0, l, l)?.steady_state()?.moments().1;
    println!("stationary variance: pair {:.6}, count chain {exact:.6}", variance_from_pair(n, 1.0, 1.0, pi11));
    Ok(())
}
