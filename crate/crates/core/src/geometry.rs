//! Spaces, points and geodesic metrics.
//!
//! The flat torus is `T^d = (R / 2πZ)^d` with the quotient metric: the
//! distance between `x` and `y` is the Euclidean norm of the per-coordinate
//! wrapped difference, each component taken in `[-π, π)`. The circle is the
//! one-dimensional torus. The sphere `S^2` carries its great-circle metric.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Tolerance on `|x| = 1` for sphere points.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Space {
    Torus(usize),
    Circle,
    Sphere2,
}

impl Space {
    pub fn torus(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("torus dimension must be at least 1"));
        }
        Ok(Space::Torus(d))
    }

    /// Number of coordinates stored per point.
    pub fn coord_len(&self) -> usize {
        match self {
            Space::Torus(d) => *d,
            Space::Circle => 1,
            Space::Sphere2 => 3,
        }
    }

    /// Dimension when the space is a torus (the circle counts as `T^1`).
    pub fn torus_dim(&self) -> Option<usize> {
        match self {
            Space::Torus(d) => Some(*d),
            Space::Circle => Some(1),
            Space::Sphere2 => None,
        }
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        match self {
            Space::Torus(d) => *d,
            Space::Circle => 1,
            Space::Sphere2 => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Torus(d) => PI * (*d as f64).sqrt(),
            Space::Circle | Space::Sphere2 => PI,
        }
    }

    /// Distance between raw coordinate slices. Callers guarantee validity.
    #[inline]
    pub fn distance_coords(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Space::Torus(_) | Space::Circle => torus_distance_coords(a, b),
            Space::Sphere2 => sphere_angle(a, b),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Torus(d) => write!(f, "torus:{d}"),
            Space::Circle => write!(f, "circle"),
            Space::Sphere2 => write!(f, "sphere2"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "circle" => Ok(Space::Circle),
            "sphere2" => Ok(Space::Sphere2),
            other => {
                let d = other
                    .strip_prefix("torus:")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown space `{other}`")))?;
                Space::torus(d)
            }
        }
    }
}

impl TryFrom<String> for Space {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Space> for String {
    fn from(s: Space) -> String {
        s.to_string()
    }
}

/// Angle in `[0, 2π)`.
#[inline]
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Minimal representative of an angular difference, in `[-π, π)`.
///
/// A difference of exactly `±π` lies on the cut locus; it maps to `-π`.
#[inline]
pub fn wrap_offset(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Length of the shorter arc spanned by an angular difference, in `[0, π]`.
/// Depends only on `|t|`, so swapping the endpoints gives the same bits.
#[inline]
pub fn arc_gap(t: f64) -> f64 {
    let u = t.abs().rem_euclid(TAU);
    u.min(TAU - u)
}

/// Torus distance on raw coordinates (no dimension check).
#[inline]
pub fn torus_distance_coords(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let w = arc_gap(x - y);
        acc += w * w;
    }
    acc.sqrt()
}

/// Circle geodesic distance between two angles, in `[0, π]`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    arc_gap(a - b)
}

#[inline]
fn sphere_angle(a: &[f64], b: &[f64]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    dot.clamp(-1.0, 1.0).acos()
}

/// Great-circle distance between unit vectors, checking both norms.
pub fn sphere_distance_coords(a: &[f64], b: &[f64]) -> Result<f64> {
    for v in [a, b] {
        if v.len() != 3 {
            return Err(Error::invalid("sphere points need 3 coordinates"));
        }
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!("sphere point has norm {n}, expected 1")));
        }
    }
    Ok(sphere_angle(a, b))
}

/// A location on a [`Space`]. Torus coordinates are kept in `[0, 2π)`;
/// sphere coordinates form a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    space: Space,
    coords: Vec<f64>,
}

impl Point {
    /// Torus point; coordinates are wrapped into `[0, 2π)`.
    pub fn torus(coords: &[f64]) -> Result<Self> {
        let space = Space::torus(coords.len())?;
        Ok(Point { space, coords: coords.iter().map(|&c| wrap_angle(c)).collect() })
    }

    pub fn circle(angle: f64) -> Self {
        Point { space: Space::Circle, coords: vec![wrap_angle(angle)] }
    }

    /// Sphere point from a vector that must already have unit norm.
    pub fn sphere(v: [f64; 3]) -> Result<Self> {
        let n = norm3(&v);
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!("sphere point has norm {n}, expected 1")));
        }
        Ok(Point { space: Space::Sphere2, coords: v.to_vec() })
    }

    /// Sphere point from any nonzero vector, normalized.
    pub fn sphere_normalized(v: [f64; 3]) -> Result<Self> {
        let n = norm3(&v);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(Point { space: Space::Sphere2, coords: v.iter().map(|c| c / n).collect() })
    }

    /// Point on `space` from raw coordinates, normalizing as the space requires.
    pub fn on(space: Space, coords: &[f64]) -> Result<Self> {
        if coords.len() != space.coord_len() {
            return Err(Error::invalid(format!(
                "{space} expects {} coordinates, got {}",
                space.coord_len(),
                coords.len()
            )));
        }
        match space {
            Space::Torus(_) => Point::torus(coords),
            Space::Circle => Ok(Point::circle(coords[0])),
            Space::Sphere2 => Point::sphere([coords[0], coords[1], coords[2]]),
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Torus translation `x + t`, wrapped.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        if self.space.torus_dim().is_none() || t.len() != self.coords.len() {
            return Err(Error::invalid("translation requires a torus point of matching dimension"));
        }
        let coords: Vec<f64> = self.coords.iter().zip(t).map(|(c, t)| wrap_angle(c + t)).collect();
        Ok(Point { space: self.space, coords })
    }

    /// Antipode: `-z` on the torus, `-x` on the sphere.
    pub fn antipode(&self) -> Self {
        let coords = match self.space {
            Space::Sphere2 => self.coords.iter().map(|c| -c).collect(),
            _ => self.coords.iter().map(|c| wrap_angle(c + PI)).collect(),
        };
        Point { space: self.space, coords }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

fn norm3(v: &[f64]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn same_space(x: &Point, y: &Point) -> Result<()> {
    if x.space != y.space {
        return Err(Error::invalid(format!("points live on {} and {}", x.space, y.space)));
    }
    Ok(())
}

pub fn torus_distance(x: &Point, y: &Point) -> Result<f64> {
    same_space(x, y)?;
    if x.space.torus_dim().is_none() {
        return Err(Error::invalid("torus_distance needs torus points"));
    }
    Ok(torus_distance_coords(&x.coords, &y.coords))
}

pub fn sphere_distance(x: &Point, y: &Point) -> Result<f64> {
    same_space(x, y)?;
    if x.space != Space::Sphere2 {
        return Err(Error::invalid("sphere_distance needs sphere points"));
    }
    sphere_distance_coords(&x.coords, &y.coords)
}

/// Geodesic distance on the common space of `x` and `y`.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    same_space(x, y)?;
    Ok(x.space.distance_coords(&x.coords, &y.coords))
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // v_d = π^{d/2} / Γ(d/2 + 1), via v_0 = 1, v_1 = 2, v_d = 2π/d · v_{d-2}
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= TAU / k as f64;
        k += 2;
    }
    v
}

/// `σ(B(x, r))` for the normalized uniform measure σ.
///
/// Torus balls are only accepted for `r < π`, where they are isometric to
/// Euclidean balls.
pub fn ball_volume(space: Space, r: f64) -> Result<f64> {
    match space {
        Space::Torus(_) | Space::Circle => {
            let d = space.dim();
            if !(r > 0.0 && r < PI) {
                return Err(Error::range(format!("torus ball radius {r} outside (0, π)")));
            }
            Ok(unit_ball_volume(d) * r.powi(d as i32) / TAU.powi(d as i32))
        }
        Space::Sphere2 => {
            if !(r > 0.0 && r <= PI) {
                return Err(Error::range(format!("sphere cap radius {r} outside (0, π]")));
            }
            Ok((1.0 - r.cos()) / 2.0)
        }
    }
}

/// Uniform random point of the Euclidean ball of radius `r` in `R^d`.
pub(crate) fn euclidean_ball_offset(d: usize, r: f64, rng: &mut Rng, out: &mut [f64]) {
    let mut n2 = 0.0;
    for o in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *o = g;
        n2 += g * g;
    }
    let u: f64 = rng.random();
    let scale = r * u.powf(1.0 / d as f64) / n2.sqrt();
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// Orthonormal tangent frame `(e1, e2)` at a unit vector `c`.
pub(crate) fn sphere_frame(c: &[f64]) -> ([f64; 3], [f64; 3]) {
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = helper[0] * c[0] + helper[1] * c[1] + helper[2] * c[2];
    let mut e1 = [helper[0] - dot * c[0], helper[1] - dot * c[1], helper[2] - dot * c[2]];
    let n = norm3(&e1);
    e1.iter_mut().for_each(|v| *v /= n);
    let e2 = [
        c[1] * e1[2] - c[2] * e1[1],
        c[2] * e1[0] - c[0] * e1[2],
        c[0] * e1[1] - c[1] * e1[0],
    ];
    (e1, e2)
}

/// Point at geodesic distance `t` from `c` in direction angle `phi` of the frame.
pub(crate) fn sphere_exp(c: &[f64], frame: &([f64; 3], [f64; 3]), t: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = t.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (e1, e2) = frame;
    let mut p = [0.0; 3];
    for i in 0..3 {
        p[i] = ct * c[i] + st * (cp * e1[i] + sp * e2[i]);
    }
    let n = norm3(&p);
    p.iter_mut().for_each(|v| *v /= n);
    p
}

/// Uniform random point of σ on `space`.
pub fn uniform_point(space: Space, rng: &mut Rng) -> Point {
    match space {
        Space::Torus(_) | Space::Circle => {
            let coords: Vec<f64> = (0..space.coord_len()).map(|_| rng.random::<f64>() * TAU).collect();
            Point { space, coords: coords.into_iter().map(wrap_angle).collect() }
        }
        Space::Sphere2 => loop {
            let v: [f64; 3] = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            if let Ok(p) = Point::sphere_normalized(v) {
                return p;
            }
        },
    }
}

/// `n` points uniform in `B(center, r)` with respect to σ, reproducible from `seed`.
pub fn sample_ball_uniform(center: &Point, r: f64, n: usize, seed: u64) -> Result<Vec<Point>> {
    ball_volume(center.space, r)?;
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut rng = rng::stream(seed, 0);
    let space = center.space;
    let mut out = Vec::with_capacity(n);
    match space {
        Space::Torus(_) | Space::Circle => {
            let d = space.dim();
            let mut off = vec![0.0; d];
            for _ in 0..n {
                euclidean_ball_offset(d, r, &mut rng, &mut off);
                let coords = center.coords.iter().zip(&off).map(|(c, o)| wrap_angle(c + o)).collect();
                out.push(Point { space, coords });
            }
        }
        Space::Sphere2 => {
            let frame = sphere_frame(&center.coords);
            let cr = r.cos();
            for _ in 0..n {
                let z = cr + (1.0 - cr) * rng.random::<f64>();
                let t = z.clamp(-1.0, 1.0).acos();
                let phi = rng.random::<f64>() * TAU;
                let p = sphere_exp(&center.coords, &frame, t, phi);
                out.push(Point { space, coords: p.to_vec() });
            }
        }
    }
    Ok(out)
}
