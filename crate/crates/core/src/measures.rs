//! Discrete and gridded measures.
//!
//! [`DiscreteMeasure`] is a finite signed combination of point masses;
//! atoms closer than [`MERGE_TOL`] are merged on construction, and atoms
//! whose weight cancels to zero are kept (with weight 0) so that derived
//! measures stay aligned with their source. [`GridMeasure`] holds one mass
//! per cell of a uniform `n^d` grid on `T^d`, with cell centers on the
//! midpoint lattice `(k + 1/2) 2π / n`; the mass array is row-major with
//! the last axis fastest.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Point, Space};

/// Distance under which two atoms are the same point.
pub const MERGE_TOL: f64 = 1e-9;

/// Relative mass threshold defining the approximate support of a grid.
pub const GRID_SUPPORT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    space: Space,
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(space: Space, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| p.space() != space) {
            return Err(Error::invalid(format!("atom on {} in a measure on {space}", p.space())));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        let mut merged_pts: Vec<Point> = Vec::with_capacity(points.len());
        let mut merged_w: Vec<f64> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            let hit = merged_pts
                .iter()
                .position(|q| space.distance_coords(q.coords(), p.coords()) < MERGE_TOL);
            match hit {
                Some(k) => merged_w[k] += w,
                None => {
                    merged_pts.push(p);
                    merged_w.push(w);
                }
            }
        }
        Ok(DiscreteMeasure { space, points: merged_pts, weights: merged_w })
    }

    /// Equal weights `1/N` on the given points.
    pub fn uniform(space: Space, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empty configuration"));
        }
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        Self::new(space, points, vec![w; n])
    }

    pub fn zero(space: Space) -> Self {
        DiscreteMeasure { space, points: Vec::new(), weights: Vec::new() }
    }

    pub fn dirac(p: Point) -> Self {
        DiscreteMeasure { space: p.space(), points: vec![p], weights: vec![1.0] }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        crate::sum::pairwise_sum(&self.weights)
    }

    pub fn is_unsigned(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// Atoms with nonzero weight.
    pub fn support(&self) -> Vec<&Point> {
        self.iter().filter(|(_, w)| *w != 0.0).map(|(p, _)| p).collect()
    }

    pub fn scaled(&self, a: f64) -> Self {
        DiscreteMeasure {
            space: self.space,
            points: self.points.clone(),
            weights: self.weights.iter().map(|w| a * w).collect(),
        }
    }

    /// `self + other`, merging coincident atoms.
    pub fn add(&self, other: &DiscreteMeasure) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::invalid("cannot add measures on different spaces"));
        }
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        let mut w = self.weights.clone();
        w.extend_from_slice(&other.weights);
        Self::new(self.space, pts, w)
    }

    /// `(μ⁺, μ⁻)` with `μ = μ⁺ - μ⁻`, aligned with the atoms of `μ`.
    pub fn jordan_split(&self) -> (Self, Self) {
        let plus = self.weights.iter().map(|&w| w.max(0.0)).collect();
        let minus = self.weights.iter().map(|&w| (-w).max(0.0)).collect();
        (
            DiscreteMeasure { space: self.space, points: self.points.clone(), weights: plus },
            DiscreteMeasure { space: self.space, points: self.points.clone(), weights: minus },
        )
    }

    /// Pushforward under the coordinate projection `T^d → S^1`, `axis` 0-based.
    pub fn pushforward_proj(&self, axis: usize) -> Result<DiscreteMeasure> {
        let d = self
            .space
            .torus_dim()
            .ok_or_else(|| Error::invalid("coordinate projections need a torus"))?;
        if axis >= d {
            return Err(Error::range(format!("axis {axis} out of range for {}", self.space)));
        }
        let pts = self.points.iter().map(|p| Point::circle(p.coords()[axis])).collect();
        Self::new(Space::Circle, pts, self.weights.clone())
    }

    pub fn restrict(&self, region: &Region) -> Self {
        self.restrict_with(|p| region.contains(p))
    }

    pub fn restrict_with(&self, keep: impl Fn(&Point) -> bool) -> Self {
        let weights = self.iter().map(|(p, w)| if keep(p) { w } else { 0.0 }).collect();
        DiscreteMeasure { space: self.space, points: self.points.clone(), weights }
    }

    /// CSV with columns `x1, …, xk, weight`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let k = self.space.coord_len();
        let mut header: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        wtr.write_record(&header)?;
        for (p, wt) in self.iter() {
            let mut row: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
            row.push(wt.to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads `x1, …, xk[, weight]` rows; missing weights default to `1/N`.
    pub fn read_csv<R: Read>(space: Space, r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let k = space.coord_len();
        let mut pts = Vec::new();
        let mut ws: Vec<Option<f64>> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::invalid(format!("bad number `{f}`: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != k && vals.len() != k + 1 {
                return Err(Error::invalid(format!("expected {k} or {} columns, got {}", k + 1, vals.len())));
            }
            pts.push(Point::on(space, &vals[..k])?);
            ws.push(vals.get(k).copied());
        }
        if pts.is_empty() {
            return Err(Error::invalid("measure file has no atoms"));
        }
        let n = pts.len() as f64;
        let weights = ws.into_iter().map(|w| w.unwrap_or(1.0 / n)).collect();
        Self::new(space, pts, weights)
    }
}

/// Region used by [`DiscreteMeasure::restrict`] and [`GridMeasure::restrict`].
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Whole,
    /// Closed geodesic ball.
    Ball { center: Point, radius: f64 },
    Complement(Box<Region>),
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Whole => true,
            Region::Ball { center, radius } => distance(center, p).map(|d| d <= *radius).unwrap_or(false),
            Region::Complement(r) => !r.contains(p),
        }
    }

    pub fn complement(self) -> Region {
        Region::Complement(Box::new(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    dim: usize,
    resolution: usize,
    masses: Vec<f64>,
}

impl GridMeasure {
    /// Grid measure from per-cell masses.
    pub fn from_masses(dim: usize, resolution: usize, masses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("grid dimension must be at least 1"));
        }
        if resolution < 2 {
            return Err(Error::invalid("grid resolution must be at least 2"));
        }
        let cells = resolution
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::range("grid is too large"))?;
        if masses.len() != cells {
            return Err(Error::invalid(format!("expected {cells} cell masses, got {}", masses.len())));
        }
        if masses.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("cell masses must be finite"));
        }
        Ok(GridMeasure { dim, resolution, masses })
    }

    /// Grid measure `g σ` from a density `g` sampled at the cell centers.
    pub fn from_density(dim: usize, resolution: usize, density: Vec<f64>) -> Result<Self> {
        let scale = (resolution as f64).powi(dim as i32).recip();
        Self::from_masses(dim, resolution, density.into_iter().map(|g| g * scale).collect())
    }

    /// Grid measure with density `g(x)` evaluated at every cell center.
    pub fn from_fn(dim: usize, resolution: usize, g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let probe = GridMeasure { dim, resolution, masses: Vec::new() };
        let cells = resolution.pow(dim as u32);
        let density = (0..cells).map(|i| g(&probe.cell_center(i))).collect();
        Self::from_density(dim, resolution, density)
    }

    /// The uniform measure σ at the given resolution.
    pub fn uniform(dim: usize, resolution: usize) -> Result<Self> {
        let cells = resolution.checked_pow(dim as u32).unwrap_or(0);
        Self::from_masses(dim, resolution, vec![1.0 / cells as f64; cells])
    }

    pub fn zeros(dim: usize, resolution: usize) -> Result<Self> {
        Self::from_masses(dim, resolution, vec![0.0; resolution.pow(dim as u32)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> Space {
        Space::Torus(self.dim)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_width(&self) -> f64 {
        TAU / self.resolution as f64
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Density relative to σ: `mass · n^d`.
    pub fn density(&self) -> Vec<f64> {
        let scale = (self.resolution as f64).powi(self.dim as i32);
        self.masses.iter().map(|m| m * scale).collect()
    }

    /// Per-axis cell indices of a flat index.
    pub fn cell_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            idx[k] = flat % self.resolution;
            flat /= self.resolution;
        }
        idx
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let h = self.cell_width();
        self.cell_index(flat).into_iter().map(|i| (i as f64 + 0.5) * h).collect()
    }

    /// Flat index of the cell containing the torus coordinates `x`.
    pub fn cell_of(&self, x: &[f64]) -> usize {
        let h = self.cell_width();
        x.iter().fold(0, |acc, c| {
            let i = ((crate::geometry::wrap_angle(*c) / h).floor() as usize).min(self.resolution - 1);
            acc * self.resolution + i
        })
    }

    pub fn total_mass(&self) -> f64 {
        crate::sum::pairwise_sum(&self.masses)
    }

    pub fn is_unsigned(&self) -> bool {
        self.masses.iter().all(|&m| m >= 0.0)
    }

    /// Cells whose mass exceeds [`GRID_SUPPORT_REL_TOL`] times the total variation.
    pub fn support_cells(&self) -> Vec<usize> {
        let tv: f64 = self.masses.iter().map(|m| m.abs()).sum();
        let thr = GRID_SUPPORT_REL_TOL * tv;
        (0..self.masses.len()).filter(|&i| self.masses[i].abs() > thr).collect()
    }

    pub fn scaled(&self, a: f64) -> Self {
        GridMeasure { masses: self.masses.iter().map(|m| a * m).collect(), ..self.clone() }
    }

    fn check_compatible(&self, other: &GridMeasure) -> Result<()> {
        if self.dim != other.dim || self.resolution != other.resolution {
            return Err(Error::invalid("grid measures have different shapes"));
        }
        Ok(())
    }

    pub fn add(&self, other: &GridMeasure) -> Result<Self> {
        self.check_compatible(other)?;
        let masses = self.masses.iter().zip(&other.masses).map(|(a, b)| a + b).collect();
        Ok(GridMeasure { masses, ..self.clone() })
    }

    pub fn sub(&self, other: &GridMeasure) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn jordan_split(&self) -> (Self, Self) {
        let plus = self.masses.iter().map(|&m| m.max(0.0)).collect();
        let minus = self.masses.iter().map(|&m| (-m).max(0.0)).collect();
        (GridMeasure { masses: plus, ..self.clone() }, GridMeasure { masses: minus, ..self.clone() })
    }

    pub fn restrict(&self, region: &Region) -> Self {
        let space = self.space();
        self.restrict_with(|c| Point::on(space, c).map(|p| region.contains(&p)).unwrap_or(false))
    }

    /// Keeps cells whose center satisfies `keep`.
    pub fn restrict_with(&self, keep: impl Fn(&[f64]) -> bool) -> Self {
        let masses = (0..self.masses.len())
            .map(|i| if keep(&self.cell_center(i)) { self.masses[i] } else { 0.0 })
            .collect();
        GridMeasure { masses, ..self.clone() }
    }

    /// Same measure on a grid of resolution `2n`, splitting each cell evenly.
    pub fn refine(&self) -> Self {
        let n2 = self.resolution * 2;
        let share = 0.5f64.powi(self.dim as i32);
        let cells = n2.pow(self.dim as u32);
        let masses = (0..cells)
            .map(|flat| {
                let mut rem = flat;
                let mut parent = 0;
                let mut stride = 1;
                for _ in 0..self.dim {
                    parent += (rem % n2 / 2) * stride;
                    rem /= n2;
                    stride *= self.resolution;
                }
                self.masses[parent] * share
            })
            .collect();
        GridMeasure { dim: self.dim, resolution: n2, masses }
    }

    /// Marginal on the `axis`-th circle (0-based), as a one-dimensional grid.
    pub fn pushforward_proj(&self, axis: usize) -> Result<GridMeasure> {
        if axis >= self.dim {
            return Err(Error::range(format!("axis {axis} out of range for torus:{}", self.dim)));
        }
        let mut masses = vec![0.0; self.resolution];
        for (flat, m) in self.masses.iter().enumerate() {
            masses[self.cell_index(flat)[axis]] += m;
        }
        GridMeasure::from_masses(1, self.resolution, masses)
    }

    /// Atoms at the cell centers.
    pub fn to_discrete(&self) -> DiscreteMeasure {
        let space = self.space();
        let points = (0..self.masses.len())
            .map(|i| Point::torus(&self.cell_center(i)).expect("grid dimension is positive"))
            .collect();
        DiscreteMeasure { space, points, weights: self.masses.clone() }
    }

    /// CSV with columns `x1, …, xd, weight` (cell centers and masses).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_discrete().write_csv(w)
    }
}

/// Either kind of measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Discrete(DiscreteMeasure),
    Grid(GridMeasure),
}

impl Measure {
    pub fn space(&self) -> Space {
        match self {
            Measure::Discrete(m) => m.space(),
            Measure::Grid(g) => g.space(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Discrete(m) => m.total_mass(),
            Measure::Grid(g) => g.total_mass(),
        }
    }

    pub fn is_unsigned(&self) -> bool {
        match self {
            Measure::Discrete(m) => m.is_unsigned(),
            Measure::Grid(g) => g.is_unsigned(),
        }
    }

    pub fn jordan_split(&self) -> (Measure, Measure) {
        match self {
            Measure::Discrete(m) => {
                let (p, n) = m.jordan_split();
                (Measure::Discrete(p), Measure::Discrete(n))
            }
            Measure::Grid(g) => {
                let (p, n) = g.jordan_split();
                (Measure::Grid(p), Measure::Grid(n))
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Measure {
        match self {
            Measure::Discrete(m) => Measure::Discrete(m.scaled(a)),
            Measure::Grid(g) => Measure::Grid(g.scaled(a)),
        }
    }

    pub fn restrict(&self, region: &Region) -> Measure {
        match self {
            Measure::Discrete(m) => Measure::Discrete(m.restrict(region)),
            Measure::Grid(g) => Measure::Grid(g.restrict(region)),
        }
    }

    /// `self + other` for measures of the same kind and shape.
    pub fn add(&self, other: &Measure) -> Result<Measure> {
        match (self, other) {
            (Measure::Discrete(a), Measure::Discrete(b)) => Ok(Measure::Discrete(a.add(b)?)),
            (Measure::Grid(a), Measure::Grid(b)) => Ok(Measure::Grid(a.add(b)?)),
            _ => Err(Error::invalid("cannot add a discrete and a grid measure")),
        }
    }

    /// Number of atoms or cells.
    pub fn size(&self) -> usize {
        match self {
            Measure::Discrete(m) => m.len(),
            Measure::Grid(g) => g.len(),
        }
    }

    pub fn to_json(&self) -> MeasureJson {
        match self {
            Measure::Discrete(m) => MeasureJson::Discrete {
                space: m.space(),
                points: m.points().iter().map(|p| p.coords().to_vec()).collect(),
                weights: m.weights().to_vec(),
            },
            Measure::Grid(g) => MeasureJson::Grid {
                dim: g.dim(),
                resolution: g.resolution(),
                masses: g.masses().to_vec(),
            },
        }
    }
}

impl From<DiscreteMeasure> for Measure {
    fn from(m: DiscreteMeasure) -> Self {
        Measure::Discrete(m)
    }
}

impl From<GridMeasure> for Measure {
    fn from(g: GridMeasure) -> Self {
        Measure::Grid(g)
    }
}

/// JSON form of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureJson {
    Discrete { space: Space, points: Vec<Vec<f64>>, weights: Vec<f64> },
    Grid { dim: usize, resolution: usize, masses: Vec<f64> },
}

impl TryFrom<MeasureJson> for Measure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Measure> {
        match j {
            MeasureJson::Discrete { space, points, weights } => {
                let pts = points.iter().map(|c| Point::on(space, c)).collect::<Result<Vec<_>>>()?;
                Ok(Measure::Discrete(DiscreteMeasure::new(space, pts, weights)?))
            }
            MeasureJson::Grid { dim, resolution, masses } => {
                Ok(Measure::Grid(GridMeasure::from_masses(dim, resolution, masses)?))
            }
        }
    }
}
