use opinet::master::{
    build_master_generator, build_noninteracting_generator, master_steady_state, master_transient,
};
use opinet::rng::rng_for;
use opinet::{
    Graph, InfluenceIntensities, IntensitySchedule, MasterSpace, NetworkModel, ProbabilityVector, RateMatrix,
    TopologySpec,
};
use rand::Rng;

fn network(graph: Graph, q: RateMatrix, lambda: Vec<f64>) -> NetworkModel {
    NetworkModel::identical(
        graph,
        q,
        IntensitySchedule::constant(InfluenceIntensities::new(lambda).unwrap()),
    )
    .unwrap()
}

/// exp(G t) by scaling and squaring of a truncated Taylor series.
fn expm(g: &[f64], n: usize, t: f64) -> Vec<f64> {
    let norm = g.iter().fold(0.0f64, |a, x| a.max(x.abs())) * n as f64 * t;
    let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
    let h = t / 2f64.powi(squarings);
    let mul = |a: &[f64], b: &[f64]| {
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    c[i * n + j] += a[i * n + k] * b[k * n + j];
                }
            }
        }
        c
    };
    let a: Vec<f64> = g.iter().map(|x| x * h).collect();
    let mut term: Vec<f64> = (0..n * n).map(|i| f64::from(u8::from(i % (n + 1) == 0))).collect();
    let mut sum = term.clone();
    for k in 1..30 {
        term = mul(&term, &a).iter().map(|x| x / k as f64).collect();
        for (s, x) in sum.iter_mut().zip(&term) {
            *s += x;
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

#[test]
fn three_agent_noninteracting_support_is_single_flips() {
    let net = network(
        TopologySpec::Complete { n: 3 }.generate().unwrap(),
        RateMatrix::two_state(0.7, 1.3).unwrap(),
        vec![0.0, 0.0],
    );
    let gen = build_noninteracting_generator(&net, 64).unwrap();
    let space = gen.space();
    for i in 0..8 {
        let row_sum: f64 = (0..8).map(|j| gen.entry(i, j)).sum();
        assert!(row_sum.abs() < 1e-12);
        for j in 0..8 {
            if i == j {
                continue;
            }
            let (a, b) = (space.decode(i), space.decode(j));
            let hamming = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            assert_eq!(gen.entry(i, j) > 0.0, hamming == 1, "{i} -> {j}");
            assert!(gen.entry(i, j) >= 0.0);
        }
    }
}

#[test]
fn interacting_generator_rows_and_support() {
    let graph = TopologySpec::SmallWorld { n: 6, k: 1, p: 0.5, seed: 2 }.generate().unwrap();
    let q = RateMatrix::from_off_diagonal(vec![
        vec![0.0, 0.4, 1.1],
        vec![0.9, 0.0, 0.3],
        vec![0.2, 1.7, 0.0],
    ])
    .unwrap();
    let net = network(graph, q, vec![3.0, 0.5, 8.0]);
    let gen = build_master_generator(&net, net.schedule().at(0.0), 1 << 12).unwrap();
    let space = gen.space();
    for i in 0..space.size() {
        let mut sum = gen.diagonal(i);
        for (j, v) in gen.row(i) {
            if j == i {
                continue;
            }
            assert!(v >= 0.0);
            sum += v;
            let (a, b) = (space.decode(i), space.decode(j));
            assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 1);
        }
        assert!(sum.abs() <= 1e-10);
    }
}

#[test]
fn single_agent_transient_matches_dense_exponential() {
    let q = RateMatrix::from_off_diagonal(vec![
        vec![0.0, 2.0, 0.5],
        vec![1.0, 0.0, 3.0],
        vec![0.25, 0.75, 0.0],
    ])
    .unwrap();
    let net = network(Graph::empty(1), q.clone(), vec![0.0; 3]);
    let gen = build_master_generator(&net, net.schedule().at(0.0), 8).unwrap();
    let p0 = ProbabilityVector::new(vec![0.2, 0.5, 0.3]).unwrap();
    let grid = [0.0, 0.3, 1.0, 4.0];
    let traj = master_transient(&gen, &p0, &grid).unwrap();
    let g: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| q.rate(i, j)).collect();
    for (t, p) in grid.iter().zip(&traj.states) {
        let e = expm(&g, 3, *t);
        for j in 0..3 {
            let want: f64 = (0..3).map(|i| p0[i] * e[i * 3 + j]).sum();
            assert!((p[j] - want).abs() < 1e-10, "t={t}");
        }
    }
}

#[test]
fn symmetric_unbiased_example_keeps_uniform_marginals() {
    let net = network(
        TopologySpec::Complete { n: 3 }.generate().unwrap(),
        RateMatrix::two_state(1.0, 1.0).unwrap(),
        vec![4.0, 4.0],
    );
    let gen = build_master_generator(&net, net.schedule().at(0.0), 64).unwrap();
    let space = gen.space();
    let p0 = space.product(&vec![ProbabilityVector::uniform(2); 3]).unwrap();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
    for p in master_transient(&gen, &p0, &grid).unwrap().states {
        for r in 0..3 {
            assert!(space.marginal(p.as_slice(), r).unwrap().max_abs_diff(&[0.5, 0.5]) < 1e-12);
        }
    }
}

#[test]
fn transient_preserves_mass_and_sign() {
    let net = network(
        TopologySpec::Star { n: 7 }.generate().unwrap(),
        RateMatrix::two_state(0.3, 2.0).unwrap(),
        vec![50.0, 1.0],
    );
    let gen = build_master_generator(&net, net.schedule().at(0.0), 1 << 10).unwrap();
    let p0 = ProbabilityVector::point_mass(gen.space().size(), 5).unwrap();
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    for p in master_transient(&gen, &p0, &grid).unwrap().states {
        let s: f64 = p.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(p.as_slice().iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn unbiased_steady_state_is_consensus_on_any_topology() {
    let mut rng = rng_for(21, 0);
    for (n, m) in [(5, 2), (4, 3), (6, 2)] {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.4) {
                    edges.push((u, v));
                }
            }
        }
        let graph = Graph::from_edges(n, edges).unwrap();
        let rows = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.0 } else { rng.random_range(0.2..2.0) }).collect())
            .collect();
        let q = RateMatrix::from_off_diagonal(rows).unwrap();
        let net = network(graph, q.clone(), vec![rng.random_range(1.0..20.0); m]);
        let gen = build_master_generator(&net, net.schedule().at(0.0), 1 << 12).unwrap();
        let pi = master_steady_state(&gen).unwrap();
        let target = q.stationary();
        for r in 0..n {
            let mr = gen.space().marginal(pi.as_slice(), r).unwrap();
            assert!(mr.max_abs_diff(target.as_slice()) < 1e-8);
        }
    }
}

#[test]
fn relabelling_agents_keeps_count_law() {
    let net = network(
        TopologySpec::Complete { n: 4 }.generate().unwrap(),
        RateMatrix::two_state(1.0, 0.4).unwrap(),
        vec![3.0, 1.0],
    );
    let gen = build_master_generator(&net, net.schedule().at(0.0), 64).unwrap();
    let space = MasterSpace::new(4, 2).unwrap();
    let laws: Vec<ProbabilityVector> = [0.1, 0.6, 0.9, 0.35]
        .iter()
        .map(|&p| ProbabilityVector::new(vec![p, 1.0 - p]).unwrap())
        .collect();
    let mut permuted = laws.clone();
    permuted.rotate_left(1);
    permuted.swap(0, 2);
    let grid = [0.0, 0.5, 2.0];
    let a = master_transient(&gen, &space.product(&laws).unwrap(), &grid).unwrap();
    let b = master_transient(&gen, &space.product(&permuted).unwrap(), &grid).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        let cx = space.count_distribution(x.as_slice(), 0).unwrap();
        let cy = space.count_distribution(y.as_slice(), 0).unwrap();
        assert!(cx.max_abs_diff(cy.as_slice()) < 1e-13);
    }
}

#[test]
fn product_law_has_outer_product_pair_joint() {
    let space = MasterSpace::new(3, 3).unwrap();
    let laws = vec![
        ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
        ProbabilityVector::new(vec![0.6, 0.1, 0.3]).unwrap(),
        ProbabilityVector::uniform(3),
    ];
    let pi = space.product(&laws).unwrap();
    let j = space.pair_joint(pi.as_slice(), 0, 1).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            assert!((j[a][b] - laws[0][a] * laws[1][b]).abs() < 1e-15);
        }
    }
}
