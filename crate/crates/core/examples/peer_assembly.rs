//! Count chain for identical agents on a complete graph: stationary moments
//! against the closed forms, and how bias moves the mean.

use opinet::lumped::{uipa_mean, uipa_variance};
use opinet::{BirthDeathChain, InitialCounts};

fn main() -> opinet::Result<()> {
    let n = 100;
    for l in [0.0, 2.0, 10.0, 100.0] {
        let p = BirthDeathChain::peer_assembly(n, 1.0, 1.0, l, l)?.steady_state()?;
        let (mean, var) = p.moments();
        println!(
            "lambda={l:>5}: mean {mean:.4} (closed {:.4}), var {var:.5} (closed {:.5}), modes {:?}",
            uipa_mean(1.0, 1.0)?,
            uipa_variance(n, 1.0, 1.0, l)?,
            p.modes()
        );
    }
    for l1 in [0.0, 1.0, 5.0, 20.0] {
        let (mean, var) = BirthDeathChain::peer_assembly(n, 1.0, 1.0, l1, 0.0)?.steady_state()?.moments();
        println!("lambda1={l1:>4}, lambda2=0: mean {mean:.4}, var {var:.5}");
    }
    let chain = BirthDeathChain::peer_assembly(20, 1.0, 1.0, 200.0, 200.0)?;
    let p0 = InitialCounts::Binomial(0.5).distribution(20)?;
    let grid = [0.01, 0.05, 0.2, 1.0];
    for (t, d) in grid.iter().zip(chain.transient(&p0, &grid)?) {
        println!("herding, t={t}: P(n1 in {{0, 20}}) = {:.3}", d.as_slice()[0] + d.as_slice()[20]);
    }
    Ok(())
}
