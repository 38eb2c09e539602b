//! A single agent: stationary law, variance and relaxation from a point mass.

use opinet::model::stand_alone_variance;
use opinet::uniformization::transient;
use opinet::RateMatrix;

fn main() -> opinet::Result<()> {
    let q = RateMatrix::from_off_diagonal(vec![
        vec![0.0, 1.0, 0.5],
        vec![0.3, 0.0, 0.2],
        vec![0.8, 0.4, 0.0],
    ])?;
    let pi = q.stationary();
    println!("stationary: {:?}", pi.as_slice());
    let two = RateMatrix::two_state(1.0, 3.0)?;
    println!("two-state agent: stationary {:?}, variance {:.6}", two.stationary().as_slice(), stand_alone_variance(&two)?);

    let grid = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];
    for (t, p) in grid.iter().zip(transient(&q, &[1.0, 0.0, 0.0], &grid)?) {
        println!("t={t:>4}: {:.5} {:.5} {:.5}", p[0], p[1], p[2]);
    }
    Ok(())
}
