//! Cosine Fourier coefficients of profiles and torus kernels.
//!
//! For a profile `f` on `[0, π]^d` the coefficient of the multi-index `n` is
//! the plain integral `∫_{[0,π]^d} f(u) Π cos(n_i u_i) du`, with no
//! normalization. A translation-invariant kernel `K` on `T^d` has harmonic
//! coefficients `∫ K(x, y) Π cos(n_i (x_i − y_i)) dσ(y)`, σ being the
//! normalized Haar measure; for a product kernel built from `f` this equals
//! the profile coefficient divided by `π^d` (plus the shift when `n = 0`).
//!
//! Integrals use the corner rule of [`crate::quadrature`], graded toward the
//! origin where the profile may be singular. Every estimate is paired with
//! the rule at twice the resolution, and the verdict tolerance is
//! `max(1e-8, 10 × that difference)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, ProfileSpec};
use crate::quadrature::{CornerRule, NodeSet};
use crate::subharmonic::{check_profile_conditions, ProfileCheckConfig};
use crate::sum::pairwise_sum;

/// Quadrature nodes per unit length used when none is given.
pub const DEFAULT_RESOLUTION: usize = 256;

pub const COEFFICIENT_NORMALIZATION: &str =
    "unnormalized: integral of f(u) Π cos(n_i u_i) over [0, π]^d";

pub const HARMONIC_NORMALIZATION: &str =
    "∫ K(x, y) Π cos(n_i (x_i − y_i)) dσ(y), σ the normalized Haar measure";

fn check_integrable(exponent: Option<f64>, d: usize) -> Result<()> {
    match exponent {
        Some(s) if s >= d as f64 => Err(Error::Diverged(format!(
            "singularity |u|^-{s} is not integrable in dimension {d}"
        ))),
        _ => Ok(()),
    }
}

fn check_index(n: &[usize], d: usize) -> Result<()> {
    if n.len() != d {
        return Err(Error::invalid(format!("multi-index has {} entries, expected {d}", n.len())));
    }
    Ok(())
}

/// Nodes on `[0, π]^d` with precomputed profile values.
struct Tabulated {
    nodes: NodeSet,
    values: Vec<f64>,
}

impl Tabulated {
    fn new(f: &ProfileSpec, resolution: usize) -> Self {
        let d = f.dim;
        let nodes = CornerRule::with_resolution(resolution).nodes(&vec![PI; d]);
        let values = nodes.points.par_chunks_exact(d).map(|u| f.eval(u)).collect();
        Tabulated { nodes, values }
    }

    fn coefficient(&self, n: &[usize]) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|((u, w), v)| w * v * u.iter().zip(n).map(|(x, k)| (*k as f64 * x).cos()).product::<f64>())
            .collect();
        pairwise_sum(&terms)
    }
}

/// `∫_{[0,π]^d} f(u) Π cos(n_i u_i) du` with about `resolution` nodes per unit length.
pub fn cosine_coefficient(f: &ProfileSpec, n: &[usize], resolution: usize) -> Result<f64> {
    f.validate()?;
    check_index(n, f.dim)?;
    check_integrable(f.singular_exponent(), f.dim)?;
    Ok(Tabulated::new(f, resolution).coefficient(n))
}

/// All multi-indices with entries in `0..=n_max`, last axis fastest.
pub fn multi_indices(d: usize, n_max: usize) -> Vec<Vec<usize>> {
    let side = n_max + 1;
    (0..side.pow(d as u32))
        .map(|mut flat| {
            let mut idx = vec![0; d];
            for axis in (0..d).rev() {
                idx[axis] = flat % side;
                flat /= side;
            }
            idx
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierReport {
    pub profile: ProfileSpec,
    pub multi_indices: Vec<Vec<usize>>,
    pub coefficients: Vec<f64>,
    pub quadrature_resolution: usize,
    /// Largest change of a coefficient when the resolution doubles.
    pub doubling_delta: f64,
    pub tol: f64,
    pub min_coefficient: f64,
    pub min_index: Vec<usize>,
    pub nonnegative_verdict: bool,
    pub normalization: String,
    /// Whether the profile conditions were checked and passed.
    pub conditions_passed: Option<bool>,
    /// Set when the scan ran although the profile conditions failed.
    pub override_warning: Option<String>,
    pub assumptions: Vec<String>,
}

impl FourierReport {
    /// CSV with columns `n1..nd, value`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let d = self.profile.dim;
        let mut header: Vec<String> = (1..=d).map(|i| format!("n{i}")).collect();
        header.push("value".into());
        wtr.write_record(&header)?;
        for (idx, v) in self.multi_indices.iter().zip(&self.coefficients) {
            let mut row: Vec<String> = idx.iter().map(|k| k.to_string()).collect();
            row.push(v.to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Computes every coefficient with `max_i n_i ≤ n_max` and decides whether
/// all of them are nonnegative up to the quadrature tolerance.
///
/// The profile conditions are checked first; when they fail the scan is
/// refused unless `allow_failed_conditions` is set, in which case the report
/// carries a warning.
pub fn nonnegativity_scan(
    f: &ProfileSpec,
    n_max: usize,
    resolution: usize,
    allow_failed_conditions: bool,
) -> Result<FourierReport> {
    f.validate()?;
    check_integrable(f.singular_exponent(), f.dim)?;
    let conditions = check_profile_conditions(f, &ProfileCheckConfig::default())?;
    let override_warning = if conditions.all_pass {
        None
    } else {
        let failed: Vec<&str> = [
            ("subharmonicity", conditions.subharmonic.passes),
            ("strict decrease at π", conditions.decreasing_at_pi.passes),
            ("Riesz equivalence", conditions.riesz_equivalent.passes),
        ]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| *name)
        .collect();
        let msg = format!("profile fails: {}", failed.join(", "));
        if !allow_failed_conditions {
            return Err(Error::Precondition(msg));
        }
        Some(format!("{msg}; coefficients carry no sign guarantee"))
    };

    let indices = multi_indices(f.dim, n_max);
    let coarse = Tabulated::new(f, resolution);
    let fine = Tabulated::new(f, 2 * resolution);
    let pairs: Vec<(f64, f64)> = indices.par_iter().map(|n| (coarse.coefficient(n), fine.coefficient(n))).collect();
    let coefficients: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let doubling_delta = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tol = (10.0 * doubling_delta).max(1e-8);
    let (k, min_coefficient) = coefficients
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one index");
    Ok(FourierReport {
        profile: f.clone(),
        min_index: indices[k].clone(),
        multi_indices: indices,
        coefficients,
        quadrature_resolution: resolution,
        doubling_delta,
        tol,
        min_coefficient,
        nonnegative_verdict: min_coefficient >= -tol,
        normalization: COEFFICIENT_NORMALIZATION.into(),
        conditions_passed: Some(conditions.all_pass),
        override_warning,
        assumptions: vec!["nonnegative coefficients are reported as evidence; positive definiteness is not inferred from them".into()],
    })
}

/// Harmonic coefficient `∫ K(x, y) Π cos(n_i (x_i − y_i)) dσ(y)` on `T^d`.
///
/// The integral runs over the `2^d` orthants of offsets, each with the
/// corner rule graded toward the zero offset.
pub fn kernel_harmonic_coefficient(kernel: &KernelSpec, d: usize, n: &[usize], resolution: usize) -> Result<f64> {
    let space = crate::geometry::Space::torus(d)?;
    kernel.validate_for(space)?;
    check_index(n, d)?;
    check_integrable(kernel.singular_exponent(), d)?;
    let nodes = CornerRule::with_resolution(resolution).nodes(&vec![PI; d]);
    let orthants: Vec<f64> = (0..1usize << d)
        .map(|mask| {
            let terms: Vec<f64> = nodes
                .points
                .par_chunks_exact(d)
                .zip(nodes.weights.par_iter())
                .map(|(u, w)| {
                    let off: Vec<f64> =
                        u.iter().enumerate().map(|(i, x)| if mask & (1 << i) != 0 { -x } else { *x }).collect();
                    let q: f64 = off.iter().zip(n).map(|(x, k)| (*k as f64 * x).cos()).product();
                    w * kernel.eval_offset(&off) * q
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&orthants) / (2.0 * PI).powi(d as i32))
}
