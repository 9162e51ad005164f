//! Symmetric kernels `K : Ω² → [0, ∞]`.
//!
//! Three families are supported:
//!
//! * Riesz kernels `sign(s) ρ^{-s}` (`s ≠ 0`) and `-log ρ` (`s = 0`) of the
//!   geodesic distance, on any [`Space`];
//! * product-profile kernels `f(d(x_1, y_1), …, d(x_d, y_d))` on `T^d`, where
//!   `f` lives on `[0, π]^d` and sees the per-coordinate circle distances;
//! * radial tables: a function of the geodesic distance given by samples and
//!   linear interpolation.
//!
//! A nonnegative additive `shift` and an optional cap `min(K, m)` apply on
//! top of the family value. Values are extended reals: `+∞` is returned as
//! `f64::INFINITY` and is only ever produced on the diagonal of singular
//! kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{arc_gap, circle_distance, wrap_offset, Point, Space};

/// Riesz kernel value at distance `rho`.
///
/// At `rho = 0` the value is `+∞` for `s ≥ 0` and `0` for `s < 0`.
#[inline]
pub fn riesz_eval(s: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        return if s >= 0.0 { f64::INFINITY } else { 0.0 };
    }
    if s == 0.0 {
        -rho.ln()
    } else if s > 0.0 {
        rho.powf(-s)
    } else {
        -rho.powf(-s)
    }
}

/// Radial derivative `d/dρ` of the Riesz kernel.
#[inline]
fn riesz_radial_derivative(s: f64, rho: f64) -> f64 {
    if s == 0.0 {
        -1.0 / rho
    } else {
        -s.abs() * rho.powf(-s - 1.0)
    }
}

/// Certificate that a profile behaves like a Riesz kernel near the origin:
/// `c1 K_s(0, u) ≤ f(u) ≤ c2 K_s(0, u)` for `|u| < r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszCertificate {
    pub c1: f64,
    pub c2: f64,
    pub r: f64,
    pub s: f64,
}

/// Function on the cube `[0, π]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    /// Riesz profile of the Euclidean norm `|u|`.
    Riesz { s: f64 },
    /// `intercept - Σ slopes_i u_i`.
    Affine { intercept: f64, slopes: Vec<f64> },
    /// Samples on the uniform grid `k π / (points - 1)` per axis, row-major
    /// with the last axis fastest, multilinearly interpolated.
    Table { points: usize, values: Vec<f64> },
}

impl Profile {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Profile::Riesz { s } => riesz_eval(*s, norm(u)),
            Profile::Affine { intercept, slopes } => {
                intercept - slopes.iter().zip(u).map(|(b, x)| b * x).sum::<f64>()
            }
            Profile::Table { points, values } => multilinear(*points, values, u),
        }
    }

    /// Gradient in `u`, when the profile has one in closed form.
    pub fn gradient(&self, u: &[f64]) -> Option<Vec<f64>> {
        match self {
            Profile::Riesz { s } => {
                let r = norm(u);
                if r == 0.0 {
                    return None;
                }
                let g = riesz_radial_derivative(*s, r) / r;
                Some(u.iter().map(|x| g * x).collect())
            }
            Profile::Affine { slopes, .. } => Some(slopes.iter().map(|b| -b).collect()),
            Profile::Table { .. } => None,
        }
    }
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn multilinear(points: usize, values: &[f64], u: &[f64]) -> f64 {
    let d = u.len();
    let h = std::f64::consts::PI / (points - 1) as f64;
    let mut base = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for i in 0..d {
        let x = (u[i].clamp(0.0, std::f64::consts::PI)) / h;
        let k = (x.floor() as usize).min(points - 2);
        base[i] = k;
        frac[i] = x - k as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut idx = 0;
        for i in 0..d {
            let bit = (corner >> i) & 1;
            w *= if bit == 1 { frac[i] } else { 1.0 - frac[i] };
            idx = idx * points + base[i] + bit;
        }
        if w != 0.0 {
            acc += w * values[idx];
        }
    }
    acc
}

/// A profile together with its dimension and regularity metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(alias = "table")]
    pub profile: Profile,
    #[serde(alias = "d")]
    pub dim: usize,
    #[serde(default)]
    pub singular_at_zero: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riesz_equivalence: Option<RieszCertificate>,
}

impl ProfileSpec {
    pub fn new(
        profile: Profile,
        dim: usize,
        singular_at_zero: bool,
        riesz_equivalence: Option<RieszCertificate>,
    ) -> Result<Self> {
        let spec = ProfileSpec { profile, dim, singular_at_zero, riesz_equivalence };
        spec.validate()?;
        Ok(spec)
    }

    /// Riesz profile `|u|^{-s}` (or `-log|u|`) on `[0, π]^d`, with its trivial
    /// certificate.
    pub fn riesz(s: f64, dim: usize) -> Result<Self> {
        let singular = s >= 0.0;
        let cert = singular.then_some(RieszCertificate { c1: 1.0, c2: 1.0, r: 1.0, s });
        Self::new(Profile::Riesz { s }, dim, singular, cert)
    }

    pub fn affine(intercept: f64, slopes: Vec<f64>) -> Result<Self> {
        let dim = slopes.len();
        Self::new(Profile::Affine { intercept, slopes }, dim, false, None)
    }

    pub fn table(points: usize, values: Vec<f64>, dim: usize) -> Result<Self> {
        Self::new(Profile::Table { points, values }, dim, false, None)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("profile dimension must be at least 1"));
        }
        match &self.profile {
            Profile::Affine { slopes, .. } if slopes.len() != self.dim => {
                return Err(Error::invalid("affine profile needs one slope per dimension"));
            }
            Profile::Table { points, values } => {
                if *points < 2 {
                    return Err(Error::invalid("tabulated profile needs at least 2 points per axis"));
                }
                if values.len() != points.pow(self.dim as u32) {
                    return Err(Error::invalid(format!(
                        "tabulated profile expects {} values, got {}",
                        points.pow(self.dim as u32),
                        values.len()
                    )));
                }
            }
            _ => {}
        }
        if self.singular_at_zero && self.riesz_equivalence.is_none() {
            return Err(Error::invalid("a profile singular at 0 needs a Riesz-equivalence certificate"));
        }
        Ok(())
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.profile.eval(u)
    }

    /// Exponent of the singularity at the origin, if any.
    pub fn singular_exponent(&self) -> Option<f64> {
        match (&self.profile, self.riesz_equivalence) {
            (Profile::Riesz { s }, _) if *s >= 0.0 => Some(*s),
            (_, Some(c)) if self.singular_at_zero => Some(c.s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelFamily {
    Riesz {
        s: f64,
    },
    Profile {
        #[serde(flatten)]
        spec: ProfileSpec,
    },
    /// Function of the geodesic distance, linearly interpolated between
    /// increasing `distances`.
    Radial {
        distances: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Kernel description: family, additive shift and optional cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default)]
    pub shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl KernelSpec {
    pub fn riesz(s: f64) -> Self {
        KernelSpec { family: KernelFamily::Riesz { s }, shift: 0.0, cap: None }
    }

    /// Riesz kernel shifted by [`KernelSpec::default_riesz_shift`] for `space`.
    pub fn riesz_shifted(s: f64, space: Space) -> Self {
        KernelSpec { shift: Self::default_riesz_shift(s, space), ..Self::riesz(s) }
    }

    /// Smallest shift making the Riesz kernel nonnegative on `space`:
    /// `max(0, -K_s(diam))`.
    pub fn default_riesz_shift(s: f64, space: Space) -> f64 {
        (-riesz_eval(s, space.diameter())).max(0.0)
    }

    pub fn product(profile: ProfileSpec) -> Self {
        KernelSpec { family: KernelFamily::Profile { spec: profile }, shift: 0.0, cap: None }
    }

    pub fn radial(distances: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if distances.len() < 2 || distances.len() != values.len() {
            return Err(Error::invalid("radial table needs ≥ 2 matching distances and values"));
        }
        if distances.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("radial table distances must increase"));
        }
        Ok(KernelSpec { family: KernelFamily::Radial { distances, values }, shift: 0.0, cap: None })
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// `min(K, m)`; repeated truncation keeps the smallest cap.
    pub fn truncate(&self, m: f64) -> Self {
        let cap = Some(self.cap.map_or(m, |c| c.min(m)));
        KernelSpec { cap, ..self.clone() }
    }

    pub fn riesz_s(&self) -> Option<f64> {
        match self.family {
            KernelFamily::Riesz { s } => Some(s),
            _ => None,
        }
    }

    /// Exponent `s` of a `|u|^{-s}`-type diagonal singularity (`0` for log).
    /// `None` for kernels that are finite on the diagonal.
    pub fn singular_exponent(&self) -> Option<f64> {
        if self.cap.is_some() {
            return None;
        }
        match &self.family {
            KernelFamily::Riesz { s } if *s >= 0.0 => Some(*s),
            KernelFamily::Profile { spec } => spec.singular_exponent(),
            _ => None,
        }
    }

    /// Checks that the kernel can be evaluated on `space`.
    pub fn validate_for(&self, space: Space) -> Result<()> {
        if !self.shift.is_finite() || self.shift < 0.0 {
            return Err(Error::invalid("kernel shift must be a finite nonnegative number"));
        }
        match &self.family {
            KernelFamily::Riesz { s } if !s.is_finite() => Err(Error::invalid("Riesz s must be finite")),
            KernelFamily::Profile { spec } => {
                spec.validate()?;
                match space.torus_dim() {
                    Some(d) if d == spec.dim => Ok(()),
                    _ => Err(Error::invalid(format!(
                        "product kernel of dimension {} cannot act on {space}",
                        spec.dim
                    ))),
                }
            }
            _ => Ok(()),
        }
    }

    #[inline]
    fn finish(&self, v: f64) -> f64 {
        let v = v + self.shift;
        match self.cap {
            Some(m) => v.min(m),
            None => v,
        }
    }

    fn radial_value(distances: &[f64], values: &[f64], rho: f64) -> f64 {
        if rho <= distances[0] {
            return values[0];
        }
        let last = distances.len() - 1;
        if rho >= distances[last] {
            return values[last];
        }
        let k = distances.partition_point(|&d| d <= rho) - 1;
        let t = (rho - distances[k]) / (distances[k + 1] - distances[k]);
        values[k] + t * (values[k + 1] - values[k])
    }

    /// Kernel at raw coordinates on `space`. Callers guarantee validity.
    pub fn eval_coords(&self, space: Space, a: &[f64], b: &[f64]) -> f64 {
        let raw = match &self.family {
            KernelFamily::Riesz { s } => riesz_eval(*s, space.distance_coords(a, b)),
            KernelFamily::Profile { spec } => {
                let mut u = [0.0; 8];
                if a.len() <= 8 {
                    for i in 0..a.len() {
                        u[i] = circle_distance(a[i], b[i]);
                    }
                    spec.eval(&u[..a.len()])
                } else {
                    let u: Vec<f64> = a.iter().zip(b).map(|(x, y)| circle_distance(*x, *y)).collect();
                    spec.eval(&u)
                }
            }
            KernelFamily::Radial { distances, values } => {
                Self::radial_value(distances, values, space.distance_coords(a, b))
            }
        };
        self.finish(raw)
    }

    /// Kernel of a torus offset `w` (any real vector; wrapped internally).
    pub fn eval_offset(&self, w: &[f64]) -> f64 {
        let raw = match &self.family {
            KernelFamily::Riesz { s } => {
                riesz_eval(*s, w.iter().map(|x| arc_gap(*x).powi(2)).sum::<f64>().sqrt())
            }
            KernelFamily::Profile { spec } => {
                let u: Vec<f64> = w.iter().map(|x| arc_gap(*x)).collect();
                spec.eval(&u)
            }
            KernelFamily::Radial { distances, values } => {
                let rho = w.iter().map(|x| arc_gap(*x).powi(2)).sum::<f64>().sqrt();
                Self::radial_value(distances, values, rho)
            }
        };
        self.finish(raw)
    }

    /// Gradient in `x` of `K(x, y)` on the torus, where `w` is the wrapped
    /// offset `x - y` (each component in `[-π, π)`).
    pub fn gradient_offset(&self, w: &[f64]) -> Result<Vec<f64>> {
        if let Some(m) = self.cap {
            if self.eval_offset(w) >= m {
                return Ok(vec![0.0; w.len()]);
            }
        }
        match &self.family {
            KernelFamily::Riesz { s } => {
                let rho = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if rho == 0.0 {
                    return Err(Error::SingularGradient);
                }
                let g = riesz_radial_derivative(*s, rho) / rho;
                Ok(w.iter().map(|x| g * x).collect())
            }
            KernelFamily::Profile { spec } => {
                if w.iter().all(|x| *x == 0.0) {
                    return Err(Error::SingularGradient);
                }
                let u: Vec<f64> = w.iter().map(|x| x.abs()).collect();
                let g = spec
                    .profile
                    .gradient(&u)
                    .ok_or_else(|| Error::invalid("tabulated profiles have no gradient"))?;
                Ok(g.iter().zip(w).map(|(g, x)| g * x.signum()).collect())
            }
            KernelFamily::Radial { .. } => Err(Error::invalid("radial tables have no gradient")),
        }
    }
}

/// `K(x, y)`, checking that both points live on a space the kernel accepts.
pub fn kernel_eval(spec: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    if x.space() != y.space() {
        return Err(Error::invalid(format!("points live on {} and {}", x.space(), y.space())));
    }
    spec.validate_for(x.space())?;
    Ok(spec.eval_coords(x.space(), x.coords(), y.coords()))
}

/// Gradient in `x` of the Riesz kernel `K_s(x, y)` on the torus.
pub fn pair_gradient(s: f64, x: &Point, y: &Point) -> Result<Vec<f64>> {
    if x.space() != y.space() || x.space().torus_dim().is_none() {
        return Err(Error::invalid("pair_gradient needs two points on the same torus"));
    }
    let w: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| wrap_offset(a - b)).collect();
    KernelSpec::riesz(s).gradient_offset(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn riesz_values() {
        assert_eq!(riesz_eval(0.0, 1.0), 0.0);
        assert_eq!(riesz_eval(2.0, 2.0), 0.25);
        assert_eq!(riesz_eval(-2.0, 2.0), -4.0);
        assert_eq!(riesz_eval(1.0, 0.0), f64::INFINITY);
        assert_eq!(riesz_eval(0.0, 0.0), f64::INFINITY);
        assert_eq!(riesz_eval(-1.5, 0.0), 0.0);
    }

    #[test]
    fn riesz_blows_up_monotonically() {
        let mut last = riesz_eval(0.5, 1.0);
        for k in 1..40 {
            let v = riesz_eval(0.5, 0.5f64.powi(k));
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn log_kernel_on_circle() {
        let k = KernelSpec::riesz(0.0);
        let x = Point::torus(&[0.0]).unwrap();
        let y = Point::torus(&[PI]).unwrap();
        let v = kernel_eval(&k, &x, &y).unwrap();
        assert!((v + PI.ln()).abs() < 1e-15);
        let v = kernel_eval(&k.clone().with_shift(2.0), &x, &y).unwrap();
        assert!((v - (2.0 - PI.ln())).abs() < 1e-15);
        assert!((v - 0.85527).abs() < 1e-5);
    }

    #[test]
    fn product_profile_uses_circle_distances() {
        let k = KernelSpec::product(ProfileSpec::affine(PI, vec![1.0]).unwrap()).with_shift(0.5);
        let x = Point::torus(&[0.0]).unwrap();
        let y = Point::torus(&[FRAC_PI_2]).unwrap();
        assert!((kernel_eval(&k, &x, &y).unwrap() - (FRAC_PI_2 + 0.5)).abs() < 1e-15);
        let z = Point::torus(&[0.0, 1.0]).unwrap();
        assert!(kernel_eval(&k, &z, &z).is_err());
        assert!(kernel_eval(&k, &Point::sphere([0.0, 0.0, 1.0]).unwrap(), &Point::sphere([0.0, 0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn truncation_caps_values() {
        let k = KernelSpec::riesz(1.0).truncate(10.0);
        let o = Point::torus(&[0.0]).unwrap();
        assert_eq!(kernel_eval(&k, &o, &Point::torus(&[0.05]).unwrap()).unwrap(), 10.0);
        assert!((kernel_eval(&k, &o, &Point::torus(&[1.0]).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(kernel_eval(&k, &o, &o).unwrap(), 10.0);
        assert_eq!(k.truncate(20.0).cap, Some(10.0));
    }

    #[test]
    fn default_shift_makes_kernel_nonnegative_at_diameter() {
        let sp = Space::Torus(2);
        let k = KernelSpec::riesz_shifted(0.0, sp);
        assert!((k.shift - (PI * 2f64.sqrt()).ln()).abs() < 1e-15);
        assert!(k.eval_offset(&[PI, PI]).abs() < 1e-14);
        assert_eq!(KernelSpec::riesz_shifted(1.0, sp).shift, 0.0);
        assert!((KernelSpec::riesz_shifted(-2.0, sp).shift - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn profile_spec_requires_certificate_when_singular() {
        assert!(ProfileSpec::new(Profile::Riesz { s: 1.0 }, 2, true, None).is_err());
        assert!(ProfileSpec::riesz(1.0, 2).is_ok());
        assert!(ProfileSpec::table(3, vec![0.0; 8], 2).is_err());
    }

    #[test]
    fn tabulated_profile_interpolates_multilinearly() {
        // f(u1, u2) = u1 + 2 u2 is reproduced exactly by bilinear interpolation
        let n = 5;
        let h = PI / (n - 1) as f64;
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                values.push(i as f64 * h + 2.0 * j as f64 * h);
            }
        }
        let p = ProfileSpec::table(n, values, 2).unwrap();
        assert!((p.eval(&[0.3, 1.7]) - (0.3 + 3.4)).abs() < 1e-12);
        assert!((p.eval(&[PI, PI]) - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn radial_table_interpolates() {
        let k = KernelSpec::radial(vec![0.0, 1.0, 2.0], vec![3.0, 1.0, 0.0]).unwrap();
        assert!((k.eval_offset(&[0.5]) - 2.0).abs() < 1e-15);
        assert_eq!(k.eval_offset(&[3.0]), 0.0);
        assert!(KernelSpec::radial(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn quadratic_gradient_is_minus_two_w() {
        let x = Point::torus(&[1.0, 2.0]).unwrap();
        let y = Point::torus(&[0.5, 6.0]).unwrap();
        let g = pair_gradient(-2.0, &x, &y).unwrap();
        let w = [wrap_offset(1.0 - 0.5), wrap_offset(2.0 - 6.0)];
        assert!((g[0] + 2.0 * w[0]).abs() < 1e-14 && (g[1] + 2.0 * w[1]).abs() < 1e-14);
        assert_eq!(pair_gradient(1.0, &x, &x), Err(Error::SingularGradient));
    }

    #[test]
    fn kernel_json_shapes() {
        let k = KernelSpec::riesz(1.0).with_shift(0.5);
        let j = serde_json::to_value(&k).unwrap();
        assert_eq!(j, serde_json::json!({"family": "riesz", "s": 1.0, "shift": 0.5}));
        let p: KernelSpec = serde_json::from_value(serde_json::json!({
            "family": "profile", "dim": 1, "shift": 0.0,
            "profile": {"kind": "table", "points": 3, "values": [2.0, 1.0, 0.0]}
        }))
        .unwrap();
        assert!((p.eval_offset(&[FRAC_PI_2]) - 1.0).abs() < 1e-15);
    }
}
