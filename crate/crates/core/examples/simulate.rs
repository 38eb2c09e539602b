//! Simulate replicate paths on a star and estimate moments and the
//! occupancy histogram with batch-means errors.

use opinet::ssa::run_ensemble;
use opinet::stats::{empirical_count_distribution, ensemble_moments, Window};
use opinet::{InfluenceIntensities, InitialOpinions, IntensitySchedule, NetworkModel, ProbabilityVector, RateMatrix, TopologySpec};

fn main() -> opinet::Result<()> {
    let n = 100;
    let net = NetworkModel::identical(
        TopologySpec::Star { n }.generate()?,
        RateMatrix::two_state(1.0, 1.0)?,
        IntensitySchedule::constant(InfluenceIntensities::unbiased(2, 10.0)?),
    )?;
    let init = InitialOpinions::Iid(ProbabilityVector::uniform(2));
    let ens = run_ensemble(&net, &init, 500.0, 4, 2024)?;
    println!("seeds {:?}, events {:?}", ens.seeds(), ens.paths.iter().map(|p| p.events.len()).collect::<Vec<_>>());

    let w = Window::new(5.0, 500.0);
    let m = ensemble_moments(&ens, 0, w)?;
    println!("mean {:.4} +- {:.4}", m.mean.value, m.mean.std_error);
    println!("var  {:.4} +- {:.4}", m.variance.value, m.variance.std_error);
    let h = empirical_count_distribution(&ens, 0, w)?;
    // ten bins, the last one also holding n1 = N
    for lo in (0..n).step_by(10) {
        let hi = if lo + 10 == n { n } else { lo + 9 };
        let mass: f64 = h.distribution.as_slice()[lo..=hi].iter().sum();
        println!("{lo:>3}..{hi:<3} {}", "#".repeat((mass * 200.0) as usize));
    }
    Ok(())
}
