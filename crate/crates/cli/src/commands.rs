use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use torus_energy::energy::{energy_discrete, energy_grid, energy_signed, g_ratio, potential_field};
use torus_energy::fourier::nonnegativity_scan;
use torus_energy::minimize::{
    minimize_points, read_points_csv, regime_classifier, Init, MinimizeConfig, Optimizer,
};
use torus_energy::subharmonic::{
    check_profile_conditions, max_principle_check, scan_entire_subharmonicity, ScanQuadrature,
};
use torus_energy::{KernelSpec, Measure, ProfileSpec, Space, Verdict};

use crate::config::{read_measure, ExperimentConfig, Format};
use crate::{svg, Command, KernelArgs, Outcome};

fn apply_kernel(cfg: &mut ExperimentConfig, args: &KernelArgs) -> Result<()> {
    if let Some(s) = &args.space {
        cfg.space = Some(s.parse().map_err(|e| anyhow::anyhow!("{e}"))?);
    }
    if let Some(path) = &args.kernel {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read kernel {}", path.display()))?;
        cfg.kernel = Some(serde_json::from_str(&text).with_context(|| format!("invalid kernel {}", path.display()))?);
    }
    if let Some(s) = args.s {
        cfg.kernel = Some(KernelSpec::riesz(s));
    }
    if let Some(k) = cfg.kernel.as_mut() {
        if args.default_shift {
            let s = k.riesz_s().context("--default-shift needs a Riesz kernel")?;
            let space = cfg.space.context("--default-shift needs --space")?;
            k.shift = KernelSpec::default_riesz_shift(s, space);
        }
        if let Some(shift) = args.shift {
            k.shift = shift;
        }
    }
    Ok(())
}

fn load_measure(cfg: &mut ExperimentConfig, flag: Option<&Path>) -> Result<Measure> {
    if let Some(p) = flag {
        cfg.measure = Some(p.to_path_buf());
    }
    let path = cfg.measure.clone().context("no measure given (use --measure)")?;
    let m = read_measure(&path, cfg.space)?;
    cfg.space = Some(m.space());
    Ok(m)
}

fn load_profile(cfg: &mut ExperimentConfig, flag: Option<&Path>) -> Result<()> {
    let Some(path) = flag else { return Ok(()) };
    let text = fs::read_to_string(path).with_context(|| format!("cannot read profile {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))?;
    if value.get("profile").is_some_and(|p| p.get("profile").is_some() || p.get("table").is_some()) {
        // a config document with a "profile" block
        let doc = ExperimentConfig::load(path)?;
        cfg.profile = doc.profile;
        if value.get("fourier").is_some() {
            cfg.fourier = doc.fourier;
        }
    } else {
        cfg.profile = Some(serde_json::from_value::<ProfileSpec>(value).with_context(|| format!("invalid profile {}", path.display()))?);
    }
    Ok(())
}

/// Writes `{command, seed, config, result}` and returns the JSON text.
fn write_report(cfg: &ExperimentConfig, file: &str, command: &str, result: &impl Serialize) -> Result<String> {
    let doc = json!({ "command": command, "seed": cfg.seed, "config": cfg, "result": result });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    write_file(cfg, file, &text)?;
    Ok(text)
}

fn write_file(cfg: &ExperimentConfig, file: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join(file);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(cfg: &ExperimentConfig, json: &str, csv: Option<&str>) {
    match (cfg.format, csv) {
        (Format::Csv, Some(table)) => print!("{table}"),
        _ => print!("{json}"),
    }
}

fn to_csv(write: impl FnOnce(&mut Vec<u8>) -> torus_energy::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

pub fn dispatch(command: Command, mut cfg: ExperimentConfig) -> Result<Outcome> {
    match command {
        Command::Energy { kernel, measure, include_diagonal, potential_grid } => {
            apply_kernel(&mut cfg, &kernel)?;
            let mu = load_measure(&mut cfg, measure.as_deref())?;
            cfg.include_diagonal |= include_diagonal;
            if potential_grid.is_some() {
                cfg.potential_grid = potential_grid;
            }
            let k = cfg.kernel()?.clone();
            k.validate_for(mu.space())?;
            let report = match &mu {
                Measure::Discrete(m) => energy_discrete(&k, m, cfg.include_diagonal)?,
                Measure::Grid(g) => energy_grid(&k, g, cfg.diagonal_policy)?,
            };
            let mut table = format!("value\n{}\n", report.value);
            if let Some(n) = cfg.potential_grid {
                let rows = potential_field(&k, &mu, n)?;
                let d = rows.first().map_or(0, |r| r.0.len());
                let mut csv: String = (1..=d).map(|i| format!("x{i},")).collect();
                csv.push_str("potential\n");
                for (x, u) in rows {
                    for c in x {
                        csv.push_str(&format!("{c},"));
                    }
                    csv.push_str(&format!("{u}\n"));
                }
                write_file(&cfg, "potential.csv", &csv)?;
                table = csv;
            }
            let json = write_report(&cfg, "energy.json", "energy", &report)?;
            emit(&cfg, &json, Some(&table));
            Ok(Outcome::Pass)
        }
        Command::ScanSubharmonic { kernel, pairs, radii, mc_n, tensor_n, radius_bound } => {
            apply_kernel(&mut cfg, &kernel)?;
            let space = cfg.space.context("no space given (use --space)")?;
            let scan = &mut cfg.scan;
            scan.seed = cfg.seed;
            if let Some(p) = pairs {
                scan.n_pairs = p;
            }
            if let Some(r) = radii {
                scan.radii_per_pair = r;
            }
            if let Some(r) = radius_bound {
                scan.radius_bound = r;
            }
            match (mc_n, tensor_n) {
                (Some(_), Some(_)) => bail!("--mc-n and --tensor-n are exclusive"),
                (Some(n), None) => scan.quadrature = ScanQuadrature::Mc { n },
                (None, Some(n)) => scan.quadrature = ScanQuadrature::Tensor { n },
                (None, None) => {}
            }
            let report = scan_entire_subharmonicity(cfg.kernel()?, space, &cfg.scan)?;
            let csv = to_csv(|w| report.write_samples_csv(w))?;
            write_file(&cfg, "margins.csv", &csv)?;
            let json = write_report(&cfg, "scan.json", "scan-subharmonic", &report)?;
            emit(&cfg, &json, Some(&csv));
            eprintln!("verdict: {:?}", report.verdict);
            Ok(if report.verdict == Verdict::Fails { Outcome::Fail } else { Outcome::Pass })
        }
        Command::MaxPrinciple { kernel, measure, probe, tolerance } => {
            apply_kernel(&mut cfg, &kernel)?;
            let mu = load_measure(&mut cfg, measure.as_deref())?;
            if let Some(p) = probe {
                cfg.probe = p;
            }
            if let Some(t) = tolerance {
                cfg.tolerance = t;
            }
            let report = max_principle_check(cfg.kernel()?, &mu, cfg.probe, cfg.tolerance)?;
            let json = write_report(&cfg, "max_principle.json", "max-principle", &report)?;
            emit(&cfg, &json, None);
            Ok(if report.passes { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Minimize { kernel, n, optimizer, max_iters, moves, restarts, lattice, init_file, expect_regime } => {
            apply_kernel(&mut cfg, &kernel)?;
            let block = &mut cfg.minimize;
            if let Some(path) = &init_file {
                let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
                let points = read_points_csv(text.as_bytes())?;
                if points.is_empty() {
                    bail!("{} holds no points", path.display());
                }
                block.n = points.len();
                if cfg.space.is_none() {
                    cfg.space = Some(Space::Torus(points[0].len()));
                }
                block.init = Some(Init::Custom { points });
            } else if lattice {
                block.init = Some(Init::Lattice);
            }
            if let Some(n) = n {
                block.n = n;
            }
            if let Some(r) = restarts {
                block.restarts = r;
            }
            let collapsing = cfg.kernel.as_ref().and_then(KernelSpec::riesz_s).is_some_and(|s| s <= -2.0);
            let default_anneal = || Optimizer::anneal(20_000 * block.n, cfg.seed);
            let mut opt = match optimizer.as_deref() {
                Some("gradient") => Optimizer::gradient(),
                Some("anneal") => default_anneal(),
                Some(other) => bail!("unknown optimizer {other:?} (gradient or anneal)"),
                None => match &block.optimizer {
                    Some(o) => o.clone(),
                    None if collapsing => default_anneal(),
                    None => Optimizer::gradient(),
                },
            };
            match &mut opt {
                Optimizer::Gradient { max_iters: m, .. } => {
                    if let Some(v) = max_iters {
                        *m = v;
                    }
                }
                Optimizer::Anneal { moves: m, seed, .. } => {
                    *seed = cfg.seed;
                    if let Some(v) = moves {
                        *m = v;
                    }
                }
            }
            block.optimizer = Some(opt.clone());
            let init = match &block.init {
                None | Some(Init::Random { .. }) => Init::Random { seed: cfg.seed },
                Some(other) => other.clone(),
            };
            block.init = Some(init.clone());
            let space = cfg.space.context("no space given (use --space)")?;
            let block = &cfg.minimize;
            let mc = MinimizeConfig {
                kernel: cfg.kernel()?.clone(),
                space,
                n: block.n,
                optimizer: opt,
                init,
                restarts: block.restarts,
                delta: block.delta,
            };
            let result = minimize_points(&mc)?;
            let verdict = match (mc.kernel.riesz_s(), space.torus_dim()) {
                (Some(s), Some(d)) => Some(regime_classifier(&result, s, d)),
                _ => None,
            };
            write_file(&cfg, "points.csv", &to_csv(|w| result.write_points_csv(w))?)?;
            let trace = to_csv(|w| result.write_trace_csv(w))?;
            write_file(&cfg, "trace.csv", &trace)?;
            write_file(&cfg, "plot.svg", &svg::scatter(&result.points))?;
            let summary = json!({
                "energy": result.energy,
                "initial_energy": result.initial_energy,
                "converged": result.converged,
                "iterations": result.iterations,
                "best_restart": result.best_restart,
                "restart_energies": result.restart_energies,
                "diagnostics": result.diagnostics,
                "initial_diagnostics": result.initial_diagnostics,
                "regime": verdict,
            });
            let json = write_report(&cfg, "diagnostics.json", "minimize", &summary)?;
            emit(&cfg, &json, Some(&trace));
            let failed = expect_regime && !verdict.as_ref().is_some_and(|v| v.passes);
            Ok(if failed { Outcome::Fail } else { Outcome::Pass })
        }
        Command::Fourier { profile, n_max, resolution, expect_nonnegative } => {
            load_profile(&mut cfg, profile.as_deref())?;
            if let Some(n) = n_max {
                cfg.fourier.n_max = n;
            }
            if let Some(r) = resolution {
                cfg.fourier.resolution = r;
            }
            let report = nonnegativity_scan(cfg.profile()?, cfg.fourier.n_max, cfg.fourier.resolution, true)?;
            if let Some(w) = &report.override_warning {
                eprintln!("warning: {w}");
            }
            let csv = to_csv(|w| report.write_csv(w))?;
            write_file(&cfg, "coefficients.csv", &csv)?;
            let json = write_report(&cfg, "fourier.json", "fourier", &report)?;
            emit(&cfg, &json, Some(&csv));
            Ok(if expect_nonnegative && !report.nonnegative_verdict { Outcome::Fail } else { Outcome::Pass })
        }
        Command::CheckProfile { profile } => {
            load_profile(&mut cfg, profile.as_deref())?;
            cfg.profile_check.seed = cfg.seed;
            let report = check_profile_conditions(cfg.profile()?, &cfg.profile_check)?;
            let json = write_report(&cfg, "profile_check.json", "check-profile", &report)?;
            emit(&cfg, &json, None);
            Ok(if report.all_pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::GRatio { kernel, mu, nu } => {
            apply_kernel(&mut cfg, &kernel)?;
            let mu = load_measure(&mut cfg, mu.as_deref())?;
            if let Some(p) = nu {
                cfg.second_measure = Some(p);
            }
            let path = cfg.second_measure.clone().context("no second measure given (use --nu)")?;
            let nu = read_measure(&path, cfg.space)?;
            let k = cfg.kernel()?.clone();
            let g = g_ratio(&k, &mu, &nu)?;
            let diff = energy_signed(&k, &mu.add(&nu.scaled(-1.0))?)?;
            let pass = g.g >= 1.0 - cfg.tolerance && diff.value >= -cfg.tolerance;
            let result = json!({ "g_ratio": g, "difference_energy": diff, "passes": pass });
            let json = write_report(&cfg, "g_ratio.json", "g-ratio", &result)?;
            emit(&cfg, &json, None);
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
    }
}
