use opinet::lumped::peer_assembly_transient_scheduled;
use opinet::ssa::{run_ensemble, simulate_path};
use opinet::stats::{batch_occupancy, empirical_count_distribution, ensemble_moments, time_average_moments, Window};
use opinet::{
    BirthDeathChain, Ensemble, Graph, InfluenceIntensities, InitialOpinions, IntensitySchedule, NetworkModel,
    ProbabilityVector, RateMatrix, SamplePath, TopologySpec,
};

fn two_state(graph: Graph, l1: f64, l2: f64) -> NetworkModel {
    NetworkModel::identical(
        graph,
        RateMatrix::two_state(1.0, 1.0).unwrap(),
        IntensitySchedule::constant(InfluenceIntensities::new(vec![l1, l2]).unwrap()),
    )
    .unwrap()
}

fn complete(n: usize) -> Graph {
    TopologySpec::Complete { n }.generate().unwrap()
}

#[test]
fn lone_agent_spends_half_its_time_in_each_opinion() {
    let net = two_state(Graph::empty(1), 0.0, 0.0);
    let path = simulate_path(&net, &[0], 20_000.0, 3).unwrap();
    let m = time_average_moments(&path, 0, 0.0, 20_000.0).unwrap();
    assert!((m.mean.value - 0.5).abs() <= 3.0 * m.mean.std_error, "{m:?}");
}

#[test]
fn iid_initial_counts_are_binomial() {
    let init = InitialOpinions::Iid(ProbabilityVector::uniform(2));
    let counts: Vec<f64> = (0..2000)
        .map(|s| init.sample(100, 2, s).unwrap().iter().filter(|&&x| x == 0).count() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    assert!((mean - 50.0).abs() < 3.0 * (25.0f64 / 2000.0).sqrt());
    assert!((var - 25.0).abs() < 3.0);
}

#[test]
fn all_in_second_opinion_means_no_first() {
    let s = InitialOpinions::All(1).sample(100, 2, 0).unwrap();
    assert!(s.iter().all(|&x| x == 1));
}

#[test]
fn strong_unbiased_influence_herds() {
    let n = 20;
    let net = two_state(complete(n), 200.0, 200.0);
    let init = InitialOpinions::Iid(ProbabilityVector::uniform(2));
    let ens = run_ensemble(&net, &init, 200.0, 4, 8).unwrap();
    let best = ens
        .paths
        .iter()
        .map(|p| {
            let occ = batch_occupancy(p, Window::new(0.0, 200.0), n + 1, |_, c| c[0]).unwrap();
            occ.iter().map(|row| row[0] + row[n]).sum::<f64>() / occ.len() as f64
        })
        .fold(0.0, f64::max);
    assert!(best >= 0.5, "largest unanimous fraction {best}");
}

#[test]
fn stepwise_schedule_tracks_the_count_chain() {
    let n = 30;
    let schedule = IntensitySchedule::new(vec![
        (0.0, InfluenceIntensities::new(vec![0.0, 0.0]).unwrap()),
        (1.0, InfluenceIntensities::new(vec![20.0, 0.0]).unwrap()),
        (2.5, InfluenceIntensities::new(vec![5.0, 20.0]).unwrap()),
    ])
    .unwrap();
    let net = NetworkModel::identical(complete(n), RateMatrix::two_state(1.0, 1.0).unwrap(), schedule.clone()).unwrap();
    let init = InitialOpinions::All(1);
    let grid = [0.5, 1.0, 1.5, 2.5, 3.0, 4.0];
    let ens = run_ensemble(&net, &init, 4.0, 400, 5).unwrap();
    let p0 = opinet::CountDistribution::from_vec((0..=n).map(|i| f64::from(u8::from(i == 0))).collect()).unwrap();
    let theory = peer_assembly_transient_scheduled(n, 1.0, 1.0, &schedule, &p0, &grid).unwrap();
    for (k, t) in grid.iter().enumerate() {
        let xs: Vec<f64> = ens
            .paths
            .iter()
            .map(|p| p.counts(0, &[*t]).unwrap()[0] as f64 / n as f64)
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        let want = theory[k].moments().0;
        assert!((m - want).abs() <= 4.0 * sd / (xs.len() as f64).sqrt(), "t={t}: {m} vs {want}");
    }
}

#[test]
fn small_peer_assembly_histogram_matches_count_chain() {
    let n = 6;
    let net = two_state(complete(n), 3.0, 1.0);
    let init = InitialOpinions::Iid(ProbabilityVector::uniform(2));
    let ens = run_ensemble(&net, &init, 3000.0, 4, 17).unwrap();
    let h = empirical_count_distribution(&ens, 0, Window::new(5.0, 3000.0)).unwrap();
    let pbar = BirthDeathChain::peer_assembly(n, 1.0, 1.0, 3.0, 1.0).unwrap().steady_state().unwrap();
    let tv = 0.5 * h.distribution.as_slice().iter().zip(pbar.as_slice()).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let err: f64 = 0.5 * h.std_error.iter().sum::<f64>();
    assert!(tv <= 3.0 * err, "tv {tv} vs error {err}");
}

#[test]
fn star_histogram_is_bimodal_and_wider_than_complete() {
    let n = 100;
    let init = InitialOpinions::Iid(ProbabilityVector::uniform(2));
    let star = run_ensemble(&two_state(TopologySpec::Star { n }.generate().unwrap(), 10.0, 10.0), &init, 500.0, 4, 2).unwrap();
    let full = run_ensemble(&two_state(complete(n), 10.0, 10.0), &init, 500.0, 4, 2).unwrap();
    let w = Window::new(5.0, 500.0);
    let h = empirical_count_distribution(&star, 0, w).unwrap();
    // ten bins of ten counts, the last one also holding n = 100
    let mut bins = [0.0; 10];
    for (i, &p) in h.distribution.as_slice().iter().enumerate() {
        bins[(i / 10).min(9)] += p;
    }
    let peaks: Vec<usize> = (0..10)
        .filter(|&i| (i == 0 || bins[i] > bins[i - 1]) && (i == 9 || bins[i] > bins[i + 1]))
        .collect();
    assert_eq!(peaks.len(), 2, "{bins:?}");
    let middle = bins[peaks[0] + 1..peaks[1]].iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(middle < bins[peaks[0]] && middle < bins[peaks[1]]);
    let vs = ensemble_moments(&star, 0, w).unwrap().variance.value;
    let vc = ensemble_moments(&full, 0, w).unwrap().variance.value;
    assert!(vs > vc);
}

#[test]
fn batch_error_shrinks_like_inverse_root_window() {
    let net = two_state(complete(100), 0.0, 0.0);
    let paths: Vec<SamplePath> = (0..4).map(|s| simulate_path(&net, &vec![0; 100], 20_010.0, 99 + s).unwrap()).collect();
    let lens = [1250.0, 5000.0, 20_000.0];
    let pts: Vec<(f64, f64)> = lens
        .iter()
        .map(|&l| {
            let y = paths
                .iter()
                .map(|p| time_average_moments(p, 0, 10.0, 10.0 + l).unwrap().mean.std_error.ln())
                .sum::<f64>()
                / paths.len() as f64;
            (f64::ln(l), y)
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}

fn reserialize(p: &SamplePath) -> SamplePath {
    let text: String = p
        .events
        .iter()
        .map(|e| format!("{:?},{},{},{}\n", e.time, e.agent, e.from, e.to))
        .collect();
    let events = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            opinet::ssa::Event {
                time: f[0].parse().unwrap(),
                agent: f[1].parse().unwrap(),
                from: f[2].parse().unwrap(),
                to: f[3].parse().unwrap(),
            }
        })
        .collect();
    SamplePath { events, ..p.clone() }
}

#[test]
fn estimators_ignore_serialization_and_replicate_order() {
    let net = two_state(TopologySpec::SmallWorld { n: 40, k: 2, p: 0.1, seed: 1 }.generate().unwrap(), 4.0, 1.0);
    let init = InitialOpinions::Iid(ProbabilityVector::uniform(2));
    let ens = run_ensemble(&net, &init, 200.0, 5, 12).unwrap();
    let w = Window::new(5.0, 200.0);
    let a = ensemble_moments(&ens, 0, w).unwrap();
    let round = Ensemble {
        master_seed: ens.master_seed,
        paths: ens.paths.iter().map(reserialize).collect(),
    };
    assert_eq!(round, ens);
    let mut rev = ens.clone();
    rev.paths.reverse();
    let b = ensemble_moments(&rev, 0, w).unwrap();
    assert!((a.mean.value - b.mean.value).abs() < 1e-12);
    assert!((a.variance.value - b.variance.value).abs() < 1e-12);
    assert!((a.variance.std_error - b.variance.std_error).abs() < 1e-12);
}
