use opinet::marginal::{marginal_ode_solve, pair_joint_ode_solve, pair_joint_stationary, MarginalField, PairJointState};
use opinet::master::{build_master_generator, master_transient};
use opinet::ode::OdeOptions;
use opinet::uniformization::transient;
use opinet::{Graph, InfluenceIntensities, IntensitySchedule, NetworkModel, ProbabilityVector, RateMatrix, TopologySpec};

fn rates3() -> RateMatrix {
    RateMatrix::from_off_diagonal(vec![
        vec![0.0, 0.5, 1.5],
        vec![1.0, 0.0, 0.2],
        vec![0.7, 0.9, 0.0],
    ])
    .unwrap()
}

fn network(graph: Graph, q: RateMatrix, l: f64) -> NetworkModel {
    let m = q.opinions();
    NetworkModel::identical(
        graph,
        q,
        IntensitySchedule::constant(InfluenceIntensities::unbiased(m, l).unwrap()),
    )
    .unwrap()
}

#[test]
fn equal_rows_follow_the_stand_alone_law() {
    let q = rates3();
    let graph = TopologySpec::SmallWorld { n: 30, k: 2, p: 0.2, seed: 4 }.generate().unwrap();
    let net = network(graph, q.clone(), 7.0);
    let row = ProbabilityVector::new(vec![0.6, 0.3, 0.1]).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.2).collect();
    let lam = net.schedule().at(0.0).clone();
    let fields = marginal_ode_solve(&net, &lam, &MarginalField::uniform_rows(30, &row), &grid, OdeOptions::default()).unwrap();
    let alone = transient(&q, row.as_slice(), &grid).unwrap();
    for (f, p) in fields.iter().zip(&alone) {
        for r in 0..30 {
            let d = f.row(r).iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d < 1e-9);
        }
    }
}

#[test]
fn rows_keep_unit_sum_and_reach_consensus_on_disconnected_graphs() {
    let q = rates3();
    let graph = Graph::from_edges(7, [(0, 1), (1, 2), (4, 5)]).unwrap();
    let net = network(graph, q.clone(), 12.0);
    let rows: Vec<ProbabilityVector> = (0..7).map(|r| ProbabilityVector::point_mass(3, r % 3).unwrap()).collect();
    let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.5).collect();
    let lam = net.schedule().at(0.0).clone();
    let fields = marginal_ode_solve(&net, &lam, &MarginalField::new(rows).unwrap(), &grid, OdeOptions::default()).unwrap();
    for f in &fields {
        for r in 0..7 {
            assert!((f.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
    let pi = q.stationary();
    for r in 0..7 {
        assert!(pi.max_abs_diff(fields.last().unwrap().row(r)) < 1e-8);
    }
}

#[test]
fn mean_trajectory_ignores_intensity() {
    let q = RateMatrix::two_state(1.0, 1.0).unwrap();
    let graph = TopologySpec::Complete { n: 100 }.generate().unwrap();
    let row = ProbabilityVector::point_mass(2, 1).unwrap();
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    let means: Vec<Vec<f64>> = [0.0, 2.0, 10.0]
        .iter()
        .map(|&l| {
            let net = network(graph.clone(), q.clone(), l);
            let lam = net.schedule().at(0.0).clone();
            marginal_ode_solve(&net, &lam, &MarginalField::uniform_rows(100, &row), &grid, OdeOptions::default())
                .unwrap()
                .iter()
                .map(|f| f.row(0)[0])
                .collect()
        })
        .collect();
    for k in 0..grid.len() {
        assert!((means[0][k] - means[1][k]).abs() < 1e-10);
        assert!((means[0][k] - means[2][k]).abs() < 1e-10);
    }
}

#[test]
fn pair_equations_settle_on_the_stationary_point() {
    for (n, q12, q21, l) in [(100, 1.0, 1.0, 10.0), (7, 0.3, 2.0, 40.0), (2, 1.0, 3.0, 0.5)] {
        let out = pair_joint_ode_solve(n, q12, q21, l, PairJointState::independent(0.9).unwrap(), &[500.0]).unwrap();
        let want = pair_joint_stationary(n, q12, q21, l).unwrap();
        assert!((out[0].p11 - want).abs() < 1e-12);
    }
}

#[test]
fn pair_matches_master_at_six_agents() {
    let n = 6;
    let net = network(TopologySpec::Complete { n }.generate().unwrap(), RateMatrix::two_state(1.0, 1.0).unwrap(), 3.0);
    let gen = build_master_generator(&net, net.schedule().at(0.0), 64).unwrap();
    let p0 = gen.space().product(&vec![ProbabilityVector::uniform(2); n]).unwrap();
    let grid: Vec<f64> = (0..=25).map(|i| i as f64 * 0.2).collect();
    let exact = master_transient(&gen, &p0, &grid).unwrap();
    let init = PairJointState::new(0.25, 0.25).unwrap();
    let pair = pair_joint_ode_solve(n, 1.0, 1.0, 3.0, init, &grid).unwrap();
    for (p, s) in exact.states.iter().zip(&pair) {
        let j = gen.space().pair_joint(p.as_slice(), 2, 4).unwrap();
        assert!((j[0][0] - s.p11).abs() < 1e-8);
        assert!((j[1][1] - s.p22).abs() < 1e-8);
        assert!((j[0][1] - s.p12()).abs() < 1e-8);
        assert!((j[0][1] - j[1][0]).abs() < 1e-12);
    }
}
