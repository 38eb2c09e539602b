use opinet::lumped::{uipa_mean, uipa_variance, InitialCounts};
use opinet::BirthDeathChain;
use proptest::prelude::*;

fn steady(n: usize, q12: f64, q21: f64, l1: f64, l2: f64) -> opinet::CountDistribution {
    BirthDeathChain::peer_assembly(n, q12, q21, l1, l2)
        .unwrap()
        .steady_state()
        .unwrap()
}

proptest! {
    #[test]
    fn balance_and_symmetry(
        n in 2usize..120,
        q12 in 0.05f64..5.0,
        q21 in 0.05f64..5.0,
        l1 in 0.0f64..100.0,
        l2 in 0.0f64..100.0,
    ) {
        let chain = BirthDeathChain::peer_assembly(n, q12, q21, l1, l2).unwrap();
        let p = chain.steady_state().unwrap();
        prop_assert!(chain.balance_residual(&p) < 1e-10);
        let s = p.as_slice();
        for j in 0..n {
            let lhs = s[j] * chain.mu(j + 1);
            let rhs = s[j + 1] * chain.nu(j);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300));
        }
        let mirrored = steady(n, q21, q12, l2, l1);
        for i in 0..=n {
            prop_assert!((s[i] - mirrored.as_slice()[n - i]).abs() < 1e-12);
        }
    }
}

#[test]
fn unbiased_moments_match_closed_forms() {
    for n in [2, 3, 10, 100] {
        for l in [0.0, 0.5, 2.0, 10.0, 200.0] {
            let (mean, var) = steady(n, 1.3, 0.6, l, l).moments();
            let cm = uipa_mean(1.3, 0.6).unwrap();
            let cv = uipa_variance(n, 1.3, 0.6, l).unwrap();
            assert!((mean - cm).abs() < 1e-10, "n={n} l={l}");
            assert!((var - cv).abs() / cv < 1e-10, "n={n} l={l}");
        }
    }
}

#[test]
fn unbiased_variances_at_hundred_agents() {
    for (l, v) in [(0.0, 0.0025), (2.0, 0.0050), (10.0, 0.0144)] {
        let (_, var) = steady(100, 1.0, 1.0, l, l).moments();
        assert!((var - v).abs() < 5e-5, "lambda {l}: {var}");
    }
}

#[test]
fn variance_grows_with_intensity() {
    let vars: Vec<f64> = (0..40).map(|i| steady(50, 1.0, 2.0, i as f64 * 2.5, i as f64 * 2.5).moments().1).collect();
    assert!(vars.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn unilateral_promotion_pushes_the_mean_to_one() {
    let means: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0, 1000.0]
        .iter()
        .map(|&l| steady(100, 1.0, 1.0, l, 0.0).moments().0)
        .collect();
    assert!(means.windows(2).all(|w| w[1] >= w[0]));
    assert!(*means.last().unwrap() > 0.99);
}

#[test]
fn mean_relaxes_at_the_stand_alone_rate() {
    let n = 100;
    let chain = BirthDeathChain::peer_assembly(n, 1.0, 1.0, 0.0, 0.0).unwrap();
    let p0 = InitialCounts::Deterministic(0).distribution(n).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
    for (t, p) in grid.iter().zip(chain.transient(&p0, &grid).unwrap()) {
        let exact = 0.5 * (1.0 - (-2.0 * t).exp());
        assert!((p.moments().0 - exact).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn transient_conserves_probability() {
    let chain = BirthDeathChain::peer_assembly(60, 0.4, 1.7, 30.0, 5.0).unwrap();
    let p0 = InitialCounts::Uniform.distribution(60).unwrap();
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    for p in chain.transient(&p0, &grid).unwrap() {
        let s: f64 = p.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-10);
    }
}
