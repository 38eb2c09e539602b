//! Piecewise-constant intensities: the count chain transient against the
//! average of simulated paths.

use opinet::lumped::peer_assembly_transient_scheduled;
use opinet::ssa::run_ensemble;
use opinet::{InfluenceIntensities, InitialCounts, InitialOpinions, IntensitySchedule, NetworkModel, ProbabilityVector, RateMatrix, TopologySpec};

fn main() -> opinet::Result<()> {
    let n = 100;
    let l = |a: f64, b: f64| InfluenceIntensities::new(vec![a, b]);
    let schedule = IntensitySchedule::new(vec![(0.0, l(0.0, 0.0)?), (1.0, l(20.0, 0.0)?), (4.0, l(20.0, 20.0)?), (7.0, l(16.0, 20.0)?)])?;
    let net = NetworkModel::identical(TopologySpec::Complete { n }.generate()?, RateMatrix::two_state(1.0, 1.0)?, schedule.clone())?;

    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
    let theory = peer_assembly_transient_scheduled(n, 1.0, 1.0, &schedule, &InitialCounts::Binomial(0.5).distribution(n)?, &grid)?;
    let ens = run_ensemble(&net, &InitialOpinions::Iid(ProbabilityVector::uniform(2)), 10.0, 50, 11)?;
    println!("{:>5} {:>8} {:>8} {:>8} {:>8}", "t", "mean", "p2.5", "p97.5", "sim");
    for (k, t) in grid.iter().enumerate() {
        let d = &theory[k];
        let sim = ens.paths.iter().map(|p| p.counts(0, &[*t]).map(|c| c[0] as f64)).sum::<opinet::Result<f64>>()? / (50 * n) as f64;
        println!(
            "{t:>5} {:>8.4} {:>8.2} {:>8.2} {sim:>8.4}",
            d.moments().0,
            d.percentile(0.025)? as f64 / n as f64,
            d.percentile(0.975)? as f64 / n as f64
        );
    }
    Ok(())
}
