//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p torus-energy --test acceptance`. The process exits
//! with status 1 when any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng as _;
use torus_energy::energy::{energy_discrete, energy_grid, energy_signed, equally_spaced_circle_energy, g_ratio};
use torus_energy::fourier::{cosine_coefficient, nonnegativity_scan};
use torus_energy::geometry::{uniform_point, wrap_offset};
use torus_energy::kernels::{kernel_eval, pair_gradient};
use torus_energy::minimize::{
    minimize_points, normalized_energy, regime_classifier, separability_identity, Init, MinimizeConfig, Optimizer,
};
use torus_energy::rng;
use torus_energy::subharmonic::{
    max_principle_check, scan_entire_subharmonicity, submean_check, ScanConfig, ScanQuadrature,
};
use torus_energy::*;

struct Outcome {
    pass: bool,
    detail: String,
    limit: Option<Duration>,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, limit: None }
}

fn within(mut o: Outcome, limit: Duration) -> Outcome {
    o.limit = Some(limit);
    o
}

fn t2() -> Space {
    Space::Torus(2)
}

fn gaps(xs: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (0..n).map(|i| if i + 1 < n { v[i + 1] - v[i] } else { v[0] + 2.0 * PI - v[n - 1] }).collect()
}

fn circle_equilibrium() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for n in [8usize, 16] {
        let kernel = KernelSpec::riesz(0.0);
        let cfg = MinimizeConfig::new(kernel.clone(), Space::Torus(1), n, Optimizer::gradient(), Init::Random { seed: 7 })
            .with_restarts(20);
        let r = minimize_points(&cfg).expect("minimize");
        let g = gaps(&r.points.iter().map(|p| p[0]).collect::<Vec<_>>());
        let spread = g.iter().copied().fold(0.0, f64::max) - g.iter().copied().fold(f64::INFINITY, f64::min);
        let oracle = equally_spaced_circle_energy(&kernel, n);
        let err = (r.energy - oracle).abs();
        pass &= spread < 1e-3 && err <= 1e-6;
        details.push(format!("N={n}: gap spread {spread:.2e}, |E − E_eq| {err:.2e}"));
    }
    within(outcome(pass, details.join("; ")), Duration::from_secs(30))
}

fn smooth_density(seed: u64) -> impl Fn(&[f64]) -> f64 {
    let mut rng = rng::stream(seed, 0);
    let terms: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let k1 = rng.random_range(-3i32..=3) as f64;
            let k2 = rng.random_range(1i32..=3) as f64 * if rng.random::<bool>() { 1.0 } else { -1.0 };
            (k1, k2, rng.random::<f64>() * 2.0 * PI, rng.random::<f64>())
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.3).sum();
    let scale = 0.9 / total;
    move |x: &[f64]| 1.0 + terms.iter().map(|(a, b, ph, amp)| scale * amp * (a * x[0] + b * x[1] + ph).cos()).sum::<f64>()
}

fn uniform_minimality() -> Outcome {
    let mut worst = f64::INFINITY;
    for s in [0.0, 1.0] {
        let kernel = KernelSpec::riesz_shifted(s, t2());
        let sigma = energy_grid(&kernel, &GridMeasure::uniform(2, 64).unwrap(), DiagonalPolicy::AnalyticCell)
            .unwrap()
            .value;
        for seed in 0..20 {
            let g = GridMeasure::from_fn(2, 64, smooth_density(seed)).unwrap();
            let g = g.scaled(1.0 / g.total_mass());
            let e = energy_grid(&kernel, &g, DiagonalPolicy::AnalyticCell).unwrap().value;
            worst = worst.min(e - sigma);
        }
    }
    within(
        outcome(worst >= -1e-6, format!("min I(gσ) − I(σ) over 40 instances = {worst:.3e}")),
        Duration::from_secs(60),
    )
}

fn anneal_run(s: f64, n: usize, seed: u64) -> (KernelSpec, torus_energy::MinimizeResult) {
    let kernel = KernelSpec::riesz_shifted(s, t2());
    let cfg = MinimizeConfig::new(kernel.clone(), t2(), n, Optimizer::anneal(20_000 * n, seed), Init::Random { seed });
    (kernel, minimize_points(&cfg).expect("anneal"))
}

fn collapse_regime() -> Outcome {
    let mut good = 0;
    let mut worst_err: f64 = 0.0;
    for seed in 0..10 {
        let (kernel, r) = anneal_run(-3.0, 8, seed);
        let verdict = regime_classifier(&r, -3.0, 2);
        let ok = verdict.passes && {
            let a = r.diagnostics.clusters[0].size;
            let mut ideal = vec![vec![0.0, 0.0]; a];
            ideal.extend(vec![vec![PI, PI]; 8 - a]);
            let err = (r.energy - normalized_energy(&kernel, t2(), &ideal)).abs();
            worst_err = worst_err.max(err);
            err <= 1e-6
        };
        good += ok as usize;
    }
    outcome(good >= 9, format!("{good}/10 seeds collapse to two antipodal halves; worst energy gap {worst_err:.2e}"))
}

fn projection_regime() -> Outcome {
    let mut good = 0;
    let mut worst_sep: f64 = 0.0;
    for seed in 0..10 {
        let (_, r) = anneal_run(-2.0, 16, seed);
        good += regime_classifier(&r, -2.0, 2).passes as usize;
        let (joint, split) = separability_identity(&r.points, &[1.0 / 16.0; 16]);
        worst_sep = worst_sep.max((joint - split).abs());
    }
    outcome(
        good >= 9 && worst_sep <= 1e-10,
        format!("{good}/10 seeds with both projections ≥ 0.95 concentrated; separability gap {worst_sep:.2e}"),
    )
}

fn subharmonicity_scans() -> Outcome {
    let cfg = ScanConfig {
        n_pairs: 250,
        radii_per_pair: 4,
        quadrature: ScanQuadrature::Mc { n: 20_000 },
        seed: 11,
        ..ScanConfig::default()
    };
    let mut pass = true;
    let mut details = Vec::new();
    for (space, s, want) in [
        (t2(), 1.0, Verdict::StrictlyPasses),
        (t2(), 0.0, Verdict::Passes),
        (Space::Torus(3), 1.0, Verdict::Passes),
    ] {
        let rep = scan_entire_subharmonicity(&KernelSpec::riesz(s), space, &cfg).expect("scan");
        let ok = rep.samples.len() >= 1000
            && match want {
                Verdict::StrictlyPasses => rep.verdict == Verdict::StrictlyPasses,
                _ => rep.verdict.is_pass(),
            };
        pass &= ok;
        details.push(format!("{space} s={s}: {:?} (worst z {:.2}, {} samples)", rep.verdict, rep.worst_z, rep.samples.len()));
    }
    let y = Point::sphere([0.0, 0.0, 1.0]).unwrap();
    let x = Point::sphere_normalized([(PI / 4.0).sin(), 0.0, (PI / 4.0).cos()]).unwrap();
    let sample = submean_check(&KernelSpec::riesz(-1.0), &y, &x, 0.2, Quadrature::Mc { n: 20_000, seed: 3 }).unwrap();
    let fails = sample.margin < -4.0 * sample.mean_stderr;
    pass &= fails;
    details.push(format!("sphere2 s=-1: margin {:.3e} vs 4·stderr {:.3e}", sample.margin, 4.0 * sample.mean_stderr));
    within(outcome(pass, details.join("; ")), Duration::from_secs(120))
}

fn first_maximum_principle() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for s in [0.0, 1.0] {
        for seed in 0..5 {
            let mut rng = rng::stream(seed, 1);
            let pts: Vec<Point> = (0..20).map(|_| uniform_point(t2(), &mut rng)).collect();
            let w: Vec<f64> = (0..20).map(|_| 0.1 + rng.random::<f64>()).collect();
            let mu = Measure::Discrete(DiscreteMeasure::new(t2(), pts, w).unwrap());
            let rep = max_principle_check(&KernelSpec::riesz(s), &mu, 128, 1e-6).unwrap();
            pass &= rep.passes && rep.attained_near_support;
            worst = worst.max(rep.violation);
        }
    }
    within(outcome(pass, format!("10 measures, worst violation {worst:.2e}")), Duration::from_secs(60))
}

fn random_grid(seed: u64, n: usize) -> GridMeasure {
    let mut rng = rng::stream(seed, 2);
    let offset = 2.0 * rng.random::<f64>() - 1.0;
    let m = (0..n * n).map(|_| offset + 2.0 * rng.random::<f64>() - 1.0).collect();
    GridMeasure::from_density(2, n, m).unwrap()
}

fn positive_definiteness() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut shift_gap: f64 = 0.0;
    for s in [0.0, 1.0] {
        let kernel = KernelSpec::riesz_shifted(s, t2());
        for seed in 0..50 {
            let g = random_grid(seed, 32);
            worst = worst.min(energy_signed(&kernel, &Measure::Grid(g.clone())).unwrap().value);
            let mean = g.total_mass() / g.len() as f64;
            let zero = GridMeasure::from_masses(2, 32, g.masses().iter().map(|m| m - mean).collect()).unwrap();
            let a = energy_signed(&kernel, &Measure::Grid(zero.clone())).unwrap().value;
            let b = energy_signed(&kernel.clone().with_shift(kernel.shift + 3.0), &Measure::Grid(zero)).unwrap().value;
            shift_gap = shift_gap.max((a - b).abs());
        }
    }
    within(
        outcome(worst >= -1e-6 && shift_gap <= 1e-10, format!("min signed energy {worst:.3e}; shift gap {shift_gap:.2e}")),
        Duration::from_secs(60),
    )
}

fn g_ratio_criterion() -> Outcome {
    let kernel = KernelSpec::riesz_shifted(1.0, t2());
    let mut min_g = f64::INFINITY;
    let mut min_e = f64::INFINITY;
    for seed in 0..20 {
        let mut rng = rng::stream(seed, 3);
        let mut a = vec![0.0; 32 * 32];
        let mut b = vec![0.0; 32 * 32];
        for i in 0..a.len() {
            match rng.random_range(0..3) {
                0 => a[i] = rng.random::<f64>(),
                1 => b[i] = rng.random::<f64>(),
                _ => {}
            }
        }
        let mu = GridMeasure::from_masses(2, 32, a).unwrap();
        let nu = GridMeasure::from_masses(2, 32, b).unwrap();
        let g = g_ratio(&kernel, &Measure::Grid(mu.clone()), &Measure::Grid(nu.clone())).unwrap();
        min_g = min_g.min(g.g);
        let diff = Measure::Grid(mu.sub(&nu).unwrap());
        min_e = min_e.min(energy_signed(&kernel, &diff).unwrap().value);
    }
    outcome(min_g >= 1.0 - 1e-6 && min_e >= -1e-6, format!("min G {min_g:.6}; min I(μ−ν) {min_e:.3e}"))
}

fn fourier_nonnegativity() -> Outcome {
    let ramp = ProfileSpec::affine(PI, vec![1.0]).unwrap();
    let mut ramp_err: f64 = 0.0;
    for n in 1..=16usize {
        let c = cosine_coefficient(&ramp, &[n], 256).unwrap();
        ramp_err = ramp_err.max((c - (1.0 - (n as f64 * PI).cos()) / (n * n) as f64).abs());
    }
    let riesz = nonnegativity_scan(&ProfileSpec::riesz(1.0, 2).unwrap(), 8, 256, false).unwrap();
    let bad = ProfileSpec::affine(0.0, vec![-1.0]).unwrap();
    let bad_scan = nonnegativity_scan(&bad, 4, 256, true).unwrap();
    let c1 = cosine_coefficient(&bad, &[1], 256).unwrap();
    let pass = ramp_err <= 1e-10
        && riesz.min_coefficient >= -1e-6
        && riesz.nonnegative_verdict
        && (c1 + 2.0).abs() <= 1e-8
        && !bad_scan.nonnegative_verdict;
    within(
        outcome(
            pass,
            format!(
                "ramp error {ramp_err:.1e}; Riesz s=1 d=2 min {:.4e} at {:?}; f(u)=u n=1 → {c1:.10}",
                riesz.min_coefficient, riesz.min_index
            ),
        ),
        Duration::from_secs(60),
    )
}

fn gradient_correctness() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut rng = rng::stream(5, 4);
    for s in [-2.0, 0.0, 1.0] {
        let mut done = 0;
        while done < 1000 {
            let x = uniform_point(t2(), &mut rng);
            let y = uniform_point(t2(), &mut rng);
            let w: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| wrap_offset(a - b)).collect();
            let rho = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rho < 0.05 || w.iter().any(|v| v.abs() > PI - 0.01) {
                continue;
            }
            let g = pair_gradient(s, &x, &y).unwrap();
            let k = KernelSpec::riesz(s);
            let fd: Vec<f64> = (0..2)
                .map(|i| {
                    let mut e = [0.0; 2];
                    e[i] = h;
                    let plus = x.translated(&e).unwrap();
                    e[i] = -h;
                    let minus = x.translated(&e).unwrap();
                    (kernel_eval(&k, &plus, &y).unwrap() - kernel_eval(&k, &minus, &y).unwrap()) / (2.0 * h)
                })
                .collect();
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / gn;
            worst = worst.max(err);
            done += 1;
            count += 1;
        }
    }
    outcome(worst <= 1e-5, format!("{count} pairs, worst relative error {worst:.2e}"))
}

fn naive_energy(kernel: &KernelSpec, mu: &DiscreteMeasure, include_diagonal: bool) -> f64 {
    let mut total = 0.0;
    for (i, (x, wx)) in mu.iter().enumerate() {
        let mut row = 0.0;
        for (j, (y, wy)) in mu.iter().enumerate() {
            if i == j && !include_diagonal {
                continue;
            }
            row += (wx * wy) * kernel_eval(kernel, x, y).unwrap();
        }
        total += row;
    }
    total
}

fn oracle_equivalence() -> Outcome {
    let mut mismatches = 0;
    let mut cases = 0;
    for seed in 0..20u64 {
        let mut rng = rng::stream(seed, 6);
        let d = 1 + (seed as usize % 3);
        let space = Space::Torus(d);
        let n = rng.random_range(2..=200);
        let pts: Vec<Point> = (0..n).map(|_| uniform_point(space, &mut rng)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.3).filter(|v| *v != 0.0).collect();
        let mu = DiscreteMeasure::new(space, pts[..w.len()].to_vec(), w).unwrap();
        let s = [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0][seed as usize % 6];
        let kernel = if seed % 2 == 0 { KernelSpec::riesz(s) } else { KernelSpec::riesz_shifted(s, space) };
        for diag in [false, true] {
            let fast = energy_discrete(&kernel, &mu, diag).unwrap().value;
            let slow = naive_energy(&kernel, &mu, diag);
            cases += 1;
            if fast.to_bits() != slow.to_bits() {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{cases} cases, {mismatches} bitwise mismatches"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("circle equilibrium", circle_equilibrium),
        ("uniform-measure minimality", uniform_minimality),
        ("collapse regime", collapse_regime),
        ("projection regime", projection_regime),
        ("subharmonicity scans", subharmonicity_scans),
        ("first maximum principle", first_maximum_principle),
        ("positive definiteness", positive_definiteness),
        ("G-ratio", g_ratio_criterion),
        ("Fourier nonnegativity", fourier_nonnegativity),
        ("gradient correctness", gradient_correctness),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if let Some(limit) = o.limit {
            if elapsed > limit {
                o.pass = false;
                o.detail.push_str(&format!("; runtime over {}s", limit.as_secs()));
            }
        }
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
