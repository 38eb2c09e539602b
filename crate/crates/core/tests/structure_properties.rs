use opinet::topology::parse_topology_spec;
use opinet::{Graph, InfluenceIntensities, IntensitySchedule, MasterSpace, RateMatrix, TopologySpec};
use proptest::prelude::*;

proptest! {
    #[test]
    fn small_world_keeps_degree_sum(n in 5usize..80, k in 1usize..4, p in 0.0f64..=1.0, seed in any::<u64>()) {
        prop_assume!(2 * k < n);
        let g = TopologySpec::SmallWorld { n, k, p, seed }.generate().unwrap();
        let sum: usize = (0..n).map(|r| g.degree(r)).sum();
        prop_assert_eq!(sum, 2 * n * k);
        for &(u, v) in g.edges() {
            prop_assert!(u != v);
            prop_assert!(g.has_edge(v, u));
        }
        prop_assert_eq!(&g, &TopologySpec::SmallWorld { n, k, p, seed }.generate().unwrap());
    }

    #[test]
    fn edge_list_roundtrip(n in 2usize..40, k in 1usize..3, p in 0.0f64..=1.0, seed in any::<u64>()) {
        prop_assume!(2 * k < n);
        let g = TopologySpec::SmallWorld { n, k, p, seed }.generate().unwrap();
        prop_assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn state_encoding_roundtrip(agents in 1usize..7, opinions in 2usize..5, salt in any::<u64>()) {
        let space = MasterSpace::new(agents, opinions).unwrap();
        prop_assert_eq!(space.size(), opinions.pow(agents as u32));
        let idx = (salt % space.size() as u64) as usize;
        let s = space.decode(idx);
        prop_assert!(s.iter().all(|&x| x < opinions));
        prop_assert_eq!(space.encode(&s), idx);
    }

    #[test]
    fn stationary_law_is_balanced(a in 0.01f64..10.0, b in 0.01f64..10.0, c in 0.0f64..5.0) {
        let q = RateMatrix::from_off_diagonal(vec![vec![0.0, a, c], vec![b, 0.0, a], vec![c, b, 0.0]]).unwrap();
        let pi = q.stationary();
        for j in 0..3 {
            let flow: f64 = (0..3).map(|i| pi.as_slice()[i] * q.rate(i, j)).sum();
            prop_assert!(flow.abs() < 1e-12);
        }
    }
}

#[test]
fn fixed_topologies() {
    let star = TopologySpec::Star { n: 6 }.generate().unwrap();
    assert_eq!(star.degree(0), 5);
    assert!((1..6).all(|r| star.degree(r) == 1));
    assert_eq!(TopologySpec::Complete { n: 10 }.generate().unwrap().edge_count(), 45);
    assert_eq!(TopologySpec::Empty { n: 4 }.generate().unwrap().edge_count(), 0);
    let ring = TopologySpec::SmallWorld { n: 10, k: 1, p: 0.0, seed: 9 }.generate().unwrap();
    assert!((0..10).all(|r| ring.has_edge(r, (r + 1) % 10)));
}

#[test]
fn spec_strings() {
    assert_eq!(
        parse_topology_spec("smallworld:100,k=1,p=0.2,seed=3").unwrap(),
        TopologySpec::SmallWorld { n: 100, k: 1, p: 0.2, seed: 3 }
    );
    assert_eq!(parse_topology_spec("noninteracting:5").unwrap(), TopologySpec::Empty { n: 5 });
    assert!(parse_topology_spec("smallworld:4,k=2").is_err());
    assert!(parse_topology_spec("ring:10").is_err());
    assert!(parse_topology_spec("star:x").is_err());
}

#[test]
fn rejects_bad_inputs() {
    assert!(RateMatrix::from_rows(vec![vec![-1.0, 1.0], vec![2.0, -1.0]]).is_err());
    assert!(RateMatrix::from_off_diagonal(vec![vec![0.0, -0.5], vec![1.0, 0.0]]).is_err());
    assert!(InfluenceIntensities::new(vec![1.0, f64::NAN]).is_err());
    assert!(InfluenceIntensities::new(vec![-1.0, 0.0]).is_err());
    let l = |x: f64| InfluenceIntensities::new(vec![x, x]).unwrap();
    assert!(IntensitySchedule::new(vec![(1.0, l(0.0))]).is_err());
    assert!(IntensitySchedule::new(vec![(0.0, l(0.0)), (0.0, l(1.0))]).is_err());
    assert!(Graph::from_edges(3, [(0, 0)]).is_err());
    assert!(Graph::from_edges(3, [(0, 3)]).is_err());
}
