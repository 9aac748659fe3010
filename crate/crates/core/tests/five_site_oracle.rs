mod common;

use std::time::Instant;

use common::{l1_ball_count, StarOracle};
use zn_elliptic::minimizer::{minimize_constrained, SolverOptions};
use zn_elliptic::{LatticeBox, ProblemParams, Site};

// Frozen from `StarOracle` (200 starts, seed 2024, stationarity 1e-12);
// `oracle_reproduces_frozen_values` keeps them honest.
const LAMBDA0: f64 = 2.092_817_305_748_860_6;
const LAMBDA: f64 = 1.046_408_652_874_430_3;

fn oracle() -> StarOracle {
    StarOracle {
        a: 1.0,
        beta: 1.0,
        p: 2.0,
        q: 4.0,
    }
}

#[test]
fn oracle_reproduces_frozen_values() {
    for seed in [2024, 7] {
        let m = oracle().minimize(200, seed, 1e-12);
        assert!(m.stationarity <= 1e-12, "stationarity {}", m.stationarity);
        assert!((m.lambda0 - LAMBDA0).abs() <= 1e-12, "{}", m.lambda0);
        assert!((m.lambda - LAMBDA).abs() <= 1e-12, "{}", m.lambda);
    }
}

#[test]
fn oracle_partials_match_difference_quotients() {
    let o = oracle();
    let w = [0.9, 0.3, 0.2, 0.25, 0.1];
    for i in 0..5 {
        let h = 1e-6;
        let (mut up, mut down) = (w, w);
        up[i] += h;
        down[i] -= h;
        let fd = (o.objective(&up) - o.objective(&down)) / (2.0 * h);
        assert!((fd - o.partial(&w, i)).abs() < 1e-8, "coordinate {i}");
    }
}

#[test]
fn radius_one_box_is_the_star() {
    let bx = LatticeBox::new(2, 1).unwrap();
    assert_eq!(bx.len() as u64, l1_ball_count(2, 1));
    assert_eq!(l1_ball_count(3, 4), 129);
    assert_eq!(LatticeBox::new(3, 4).unwrap().len(), 129);
}

#[test]
fn solver_matches_oracle_on_five_sites() {
    let params = ProblemParams::constant(2, 2.0, 4.0, 1.0, 1.0, 1.0).unwrap();
    let bx = LatticeBox::new(2, 1).unwrap();
    let start = Instant::now();
    let r = minimize_constrained(&params, &bx, None, &SolverOptions::default()).unwrap();
    let elapsed = start.elapsed();
    assert!(r.converged);
    assert!((r.lambda0 - LAMBDA0).abs() <= 1e-8, "{}", r.lambda0);
    assert!((r.lambda - LAMBDA).abs() <= 1e-8, "{}", r.lambda);
    assert!(elapsed.as_secs_f64() < 1.0);

    let m = oracle().minimize(50, 2024, 1e-12);
    assert!((r.u0.value_at(&Site::origin(2)).unwrap() - m.u[0]).abs() < 1e-6);
    for leaf in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        assert!((r.u0.value_at(&Site::from(leaf)).unwrap() - m.u[1]).abs() < 1e-6);
    }
}
