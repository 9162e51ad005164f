use std::f64::consts::PI;

use torus_energy::geometry::wrap_offset;
use torus_energy::minimize::{
    lattice_points, minimize_points, read_points_csv, regime_classifier, regime_classifier_metrics,
    uniformity_metrics, write_points_csv, Init, MinimizeConfig, Optimizer, Regime, DEFAULT_DELTA,
};
use torus_energy::{KernelSpec, Space};

#[test]
fn riesz_one_spreads_sixty_four_points() {
    let cfg = MinimizeConfig::new(
        KernelSpec::riesz(1.0),
        Space::Torus(2),
        64,
        Optimizer::Gradient { max_iters: 300, tol: 1e-8, max_step: 0.1 },
        Init::Random { seed: 21 },
    );
    let r = minimize_points(&cfg).unwrap();
    assert!(r.energy < r.initial_energy);
    assert!(r.energy_trace.windows(2).all(|w| w[1].energy <= w[0].energy));
    assert!(r.diagnostics.covering_radius < r.initial_diagnostics.covering_radius);
    let v = regime_classifier(&r, 1.0, 2);
    assert_eq!(v.regime, Regime::Spread);
    assert!(v.passes, "{v:?}");
}

#[test]
fn gradient_descent_is_translation_equivariant() {
    let base: Vec<Vec<f64>> = {
        let mut rng = torus_energy::rng::stream(3, 0);
        use rand::Rng as _;
        (0..12).map(|_| vec![rng.random::<f64>() * 6.0, rng.random::<f64>() * 6.0]).collect()
    };
    let t = [0.731, -1.204];
    let shifted: Vec<Vec<f64>> = base.iter().map(|p| vec![p[0] + t[0], p[1] + t[1]]).collect();
    let run = |pts: Vec<Vec<f64>>| {
        let cfg = MinimizeConfig::new(
            KernelSpec::riesz(0.5),
            Space::Torus(2),
            12,
            Optimizer::Gradient { max_iters: 60, tol: 1e-10, max_step: 0.1 },
            Init::Custom { points: pts },
        );
        minimize_points(&cfg).unwrap()
    };
    let (a, b) = (run(base), run(shifted));
    for (p, q) in a.points.iter().zip(&b.points) {
        for k in 0..2 {
            assert!(wrap_offset(q[k] - p[k] - t[k]).abs() < 1e-8);
        }
    }
}

#[test]
fn two_clusters_fail_the_spread_regime() {
    let pts: Vec<Vec<f64>> = (0..16).map(|i| if i % 2 == 0 { vec![0.0, 0.0] } else { vec![PI, PI] }).collect();
    let m = uniformity_metrics(&pts, None, DEFAULT_DELTA).unwrap();
    assert_eq!(m.cluster_count, 2);
    let v = regime_classifier_metrics(&m, None, 1.0, 2);
    assert!(!v.passes);
    assert!(regime_classifier_metrics(&m, None, -3.0, 2).passes);
}

#[test]
fn lattice_is_already_spread() {
    let pts = lattice_points(4, 2);
    let m = uniformity_metrics(&pts, None, DEFAULT_DELTA).unwrap();
    assert_eq!(m.cluster_count, 16);
    assert!((m.covering_radius - PI * 2f64.sqrt() / 4.0).abs() < 1e-12);
}

#[test]
fn configuration_csv_round_trip() {
    let pts = lattice_points(3, 2);
    let mut buf = Vec::new();
    write_points_csv(&pts, &mut buf).unwrap();
    assert_eq!(read_points_csv(buf.as_slice()).unwrap(), pts);
}

#[test]
fn restarts_are_reproducible() {
    let cfg = MinimizeConfig::new(
        KernelSpec::riesz(0.0),
        Space::Torus(1),
        6,
        Optimizer::gradient(),
        Init::Random { seed: 99 },
    )
    .with_restarts(4);
    let a = minimize_points(&cfg).unwrap();
    let b = minimize_points(&cfg).unwrap();
    assert_eq!(a.points, b.points);
    assert_eq!(a.restart_energies, b.restart_energies);
}
