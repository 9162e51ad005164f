use std::f64::consts::PI;

use torus_energy::fourier::{cosine_coefficient, multi_indices, nonnegativity_scan};
use torus_energy::subharmonic::{
    check_profile_conditions, max_principle_check, scan_entire_subharmonicity, submean_check,
    ProfileCheckConfig, ScanConfig, ScanQuadrature,
};
use torus_energy::{DiscreteMeasure, KernelSpec, Measure, Point, ProfileSpec, Quadrature, Space, Verdict};

fn small_scan(seed: u64) -> ScanConfig {
    ScanConfig { n_pairs: 40, radii_per_pair: 2, quadrature: ScanQuadrature::Mc { n: 4000 }, seed, ..Default::default() }
}

#[test]
fn scans_are_deterministic() {
    let k = KernelSpec::riesz(1.0);
    let a = scan_entire_subharmonicity(&k, Space::Torus(2), &small_scan(4)).unwrap();
    let b = scan_entire_subharmonicity(&k, Space::Torus(2), &small_scan(4)).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn tensor_scan_agrees_with_monte_carlo_on_torus() {
    let k = KernelSpec::riesz(1.0);
    let cfg = ScanConfig { quadrature: ScanQuadrature::Tensor { n: 32 }, ..small_scan(8) };
    let rep = scan_entire_subharmonicity(&k, Space::Torus(2), &cfg).unwrap();
    assert!(rep.verdict.is_pass());
}

#[test]
fn negative_riesz_is_not_subharmonic_on_sphere() {
    let y = Point::sphere([0.0, 0.0, 1.0]).unwrap();
    let x = Point::sphere_normalized([(PI / 4.0).sin(), 0.0, (PI / 4.0).cos()]).unwrap();
    let s = submean_check(&KernelSpec::riesz(-1.0), &y, &x, 0.2, Quadrature::Tensor { n: 64 }).unwrap();
    assert!(s.margin < -4.0 * s.error_scale());
    let rep = scan_entire_subharmonicity(&KernelSpec::riesz(-1.0), Space::Sphere2, &small_scan(1)).unwrap();
    assert_eq!(rep.verdict, Verdict::Fails);
    assert!(rep.witness.is_some());
}

#[test]
fn point_mass_potential_peaks_at_the_atom() {
    let mu = Measure::Discrete(DiscreteMeasure::dirac(Point::torus(&[1.0, 2.0]).unwrap()));
    let rep = max_principle_check(&KernelSpec::riesz(1.0), &mu, 64, 1e-9).unwrap();
    assert!(rep.passes && rep.attained_near_support);
}

#[test]
fn max_principle_rejects_signed_measures() {
    let mu = DiscreteMeasure::new(
        Space::Torus(2),
        vec![Point::torus(&[0.0, 0.0]).unwrap(), Point::torus(&[1.0, 1.0]).unwrap()],
        vec![1.0, -0.5],
    )
    .unwrap();
    assert!(max_principle_check(&KernelSpec::riesz(0.0), &Measure::Discrete(mu), 16, 1e-6).is_err());
}

#[test]
fn riesz_profile_satisfies_the_conditions() {
    let rep = check_profile_conditions(&ProfileSpec::riesz(1.0, 2).unwrap(), &ProfileCheckConfig::default()).unwrap();
    assert!(rep.all_pass, "{rep:?}");
    assert!(rep.riesz_equivalent.applicable);
}

#[test]
fn coefficients_converge_under_refinement() {
    let f = ProfileSpec::riesz(1.0, 2).unwrap();
    for n in multi_indices(2, 3) {
        let a = cosine_coefficient(&f, &n, 128).unwrap();
        let b = cosine_coefficient(&f, &n, 256).unwrap();
        assert!((a - b).abs() < 1e-8, "{n:?}: {a} vs {b}");
    }
}

#[test]
fn scan_report_csv_has_one_row_per_index() {
    let rep = nonnegativity_scan(&ProfileSpec::affine(PI, vec![1.0]).unwrap(), 5, 128, false).unwrap();
    assert!(rep.nonnegative_verdict);
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
}
