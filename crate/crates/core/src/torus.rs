//! Flat 2-torus geometry: the sampling grid, observation masks, geodesic
//! distance, antipodal sets, and sampled geometric-control checks.
//!
//! Grid nodes sit at `(j h, i h)` for row `i` and column `j`; cell `i * n + j`
//! is the Voronoi cell of that node. A point belongs to the cell of its
//! nearest node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the fundamental domain `[0, L)²`, stored as `[x, y]`.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    n_side: usize,
    side_length: f64,
    spacing: f64,
}

impl TorusGrid {
    pub const DIMENSION: usize = 2;

    pub fn new(n_side: usize, side_length: f64) -> Result<Self> {
        if n_side < 8 || !n_side.is_multiple_of(2) {
            return Err(Error::InvalidGrid("n_side must be even ≥ 8".into()));
        }
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(Error::InvalidGrid("side_length must be positive".into()));
        }
        Ok(Self {
            n_side,
            side_length,
            spacing: side_length / n_side as f64,
        })
    }

    /// Grid on the standard `2π`-periodic torus.
    pub fn standard(n_side: usize) -> Result<Self> {
        Self::new(n_side, 2.0 * std::f64::consts::PI)
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_count(&self) -> usize {
        self.n_side * self.n_side
    }

    /// Quadrature weight of one cell (`h²`).
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn area(&self) -> f64 {
        self.side_length * self.side_length
    }

    #[inline]
    pub fn index(&self, row: isize, col: isize) -> usize {
        let n = self.n_side as isize;
        (row.rem_euclid(n) * n + col.rem_euclid(n)) as usize
    }

    #[inline]
    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.n_side, cell % self.n_side)
    }

    /// Node coordinates `[x, y]` of a cell.
    pub fn node(&self, cell: usize) -> Point {
        let (i, j) = self.row_col(cell);
        [j as f64 * self.spacing, i as f64 * self.spacing]
    }

    /// Cell whose node is nearest to `p` (any real coordinates, wrapped).
    pub fn cell_of(&self, p: Point) -> usize {
        let col = (p[0] / self.spacing).round() as isize;
        let row = (p[1] / self.spacing).round() as isize;
        self.index(row, col)
    }

    /// Wrap a point into `[0, L)²`.
    pub fn wrap(&self, p: Point) -> Point {
        let l = self.side_length;
        let w = |v: f64| {
            let r = v.rem_euclid(l);
            if r >= l {
                0.0
            } else {
                r
            }
        };
        [w(p[0]), w(p[1])]
    }

    /// The four periodic neighbours of a cell: up, down, left, right.
    pub fn neighbours(&self, cell: usize) -> [usize; 4] {
        let (i, j) = self.row_col(cell);
        let (i, j) = (i as isize, j as isize);
        [
            self.index(i - 1, j),
            self.index(i + 1, j),
            self.index(i, j - 1),
            self.index(i, j + 1),
        ]
    }
}

/// Flat-torus distance: per-axis minimum image, then Euclidean norm.
pub fn geodesic_distance(p: Point, q: Point, grid: &TorusGrid) -> f64 {
    let l = grid.side_length();
    let axis = |a: f64, b: f64| {
        let d = (a - b).abs().rem_euclid(l);
        d.min(l - d)
    };
    axis(p[0], q[0]).hypot(axis(p[1], q[1]))
}

/// Grid nodes within `tol` of the maximal distance from `p`.
///
/// The returned set is never empty: the farthest node always qualifies.
pub fn antipodal_set(p: Point, grid: &TorusGrid, tol: f64) -> Vec<usize> {
    let distances: Vec<f64> = (0..grid.cell_count())
        .map(|c| geodesic_distance(p, grid.node(c), grid))
        .collect();
    let max = distances.iter().copied().fold(0.0_f64, f64::max);
    distances
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= max - tol)
        .map(|(c, _)| c)
        .collect()
}

/// Observation region as a cell mask over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    grid: TorusGrid,
    mask: Vec<bool>,
    cells: Vec<usize>,
    connected: bool,
}

impl ObservationSet {
    /// Build from a mask; at least one cell must be observed.
    pub fn from_mask(grid: TorusGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.cell_count() {
            return Err(Error::InvalidInput(format!(
                "mask has {} cells, grid has {}",
                mask.len(),
                grid.cell_count()
            )));
        }
        let cells: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(c, &m)| m.then_some(c))
            .collect();
        if cells.is_empty() {
            return Err(Error::InvalidInput("observation set is empty".into()));
        }
        let connected = is_connected(&grid, &mask, &cells);
        Ok(Self {
            grid,
            mask,
            cells,
            connected,
        })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Point) -> bool) -> Result<Self> {
        let mask = (0..grid.cell_count()).map(|c| f(grid.node(c))).collect();
        Self::from_mask(grid, mask)
    }

    pub fn whole(grid: TorusGrid) -> Self {
        Self::from_mask(grid, vec![true; grid.cell_count()]).expect("nonempty")
    }

    /// Cells whose node lies within `half_width` of the line `y = center`.
    pub fn horizontal_strip(grid: TorusGrid, center: f64, half_width: f64) -> Result<Self> {
        let l = grid.side_length();
        Self::from_fn(grid, |p| periodic_gap(p[1], center, l) < half_width)
    }

    pub fn vertical_strip(grid: TorusGrid, center: f64, half_width: f64) -> Result<Self> {
        let l = grid.side_length();
        Self::from_fn(grid, |p| periodic_gap(p[0], center, l) < half_width)
    }

    /// Union of a horizontal strip at `y = center_y` and a vertical strip at
    /// `x = center_x`, both of the given half-width.
    pub fn cross(grid: TorusGrid, center_y: f64, center_x: f64, half_width: f64) -> Result<Self> {
        let l = grid.side_length();
        Self::from_fn(grid, |p| {
            periodic_gap(p[1], center_y, l) < half_width
                || periodic_gap(p[0], center_x, l) < half_width
        })
    }

    pub fn disc(grid: TorusGrid, center: Point, radius: f64) -> Result<Self> {
        Self::from_fn(grid, |p| geodesic_distance(p, center, &grid) < radius)
    }

    /// Quarter of the torus `[0, L/2)²`.
    pub fn quarter(grid: TorusGrid) -> Result<Self> {
        let half = grid.side_length() / 2.0;
        Self::from_fn(grid, |p| p[0] < half - 1e-12 && p[1] < half - 1e-12)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Observed cells in row-major order.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.mask[cell]
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.mask[self.grid.cell_of(p)]
    }

    pub fn measure(&self) -> f64 {
        self.grid.cell_area() * self.cells.len() as f64
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// True when some cell is unobserved (`M \ O` nonempty).
    pub fn is_proper(&self) -> bool {
        self.cells.len() < self.grid.cell_count()
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Self::from_mask(self.grid, mask)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Self::from_mask(self.grid, mask)
    }

    /// Remove the listed cells.
    pub fn without(&self, cells: &[usize]) -> Result<Self> {
        let mut mask = self.mask.clone();
        for &c in cells {
            mask[c] = false;
        }
        Self::from_mask(self.grid, mask)
    }

    /// Cells of `O` whose full 5-point stencil lies in `O`.
    pub fn interior(&self) -> Vec<usize> {
        self.cells
            .iter()
            .copied()
            .filter(|&c| self.grid.neighbours(c).iter().all(|&nb| self.mask[nb]))
            .collect()
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("observation sets live on different grids".into()));
        }
        Ok(())
    }

    /// Run-length encoding: alternating run lengths in row-major order,
    /// starting with an unobserved run (possibly of length zero).
    pub fn to_runs(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &m in &self.mask {
            if m == current {
                len += 1;
            } else {
                runs.push(len);
                current = m;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }

    pub fn from_runs(grid: TorusGrid, runs: &[usize]) -> Result<Self> {
        let mut mask = Vec::with_capacity(grid.cell_count());
        let mut value = false;
        for &r in runs {
            mask.extend(std::iter::repeat_n(value, r));
            value = !value;
        }
        if mask.len() != grid.cell_count() {
            return Err(Error::Format(format!(
                "runs cover {} cells, grid has {}",
                mask.len(),
                grid.cell_count()
            )));
        }
        Self::from_mask(grid, mask)
    }
}

fn periodic_gap(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(l);
    d.min(l - d)
}

fn is_connected(grid: &TorusGrid, mask: &[bool], cells: &[usize]) -> bool {
    let mut seen = vec![false; mask.len()];
    let mut stack = vec![cells[0]];
    seen[cells[0]] = true;
    let mut count = 0usize;
    while let Some(c) = stack.pop() {
        count += 1;
        for nb in grid.neighbours(c) {
            if mask[nb] && !seen[nb] {
                seen[nb] = true;
                stack.push(nb);
            }
        }
    }
    count == cells.len()
}

/// Serialized form of an observation mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskRecord {
    pub n_side: usize,
    pub side_length: f64,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    pub runs: Vec<usize>,
}

fn default_dimension() -> usize {
    TorusGrid::DIMENSION
}

impl From<&ObservationSet> for MaskRecord {
    fn from(o: &ObservationSet) -> Self {
        Self {
            n_side: o.grid.n_side(),
            side_length: o.grid.side_length(),
            dimension: TorusGrid::DIMENSION,
            runs: o.to_runs(),
        }
    }
}

impl TryFrom<MaskRecord> for ObservationSet {
    type Error = Error;

    fn try_from(r: MaskRecord) -> Result<Self> {
        if r.dimension != TorusGrid::DIMENSION {
            return Err(Error::Format(format!("unsupported dimension {}", r.dimension)));
        }
        let grid = TorusGrid::new(r.n_side, r.side_length)?;
        ObservationSet::from_runs(grid, &r.runs)
    }
}

impl Serialize for ObservationSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MaskRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ObservationSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = MaskRecord::deserialize(d)?;
        ObservationSet::try_from(rec).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicRay {
    pub start: Point,
    pub direction: [f64; 2],
    pub horizon: f64,
}

impl GeodesicRay {
    pub fn new(start: Point, direction: [f64; 2], horizon: f64) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("direction norm {norm} is not 1")));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        Ok(Self {
            start,
            direction,
            horizon,
        })
    }

    pub fn at(&self, t: f64) -> Point {
        [
            self.start[0] + t * self.direction[0],
            self.start[1] + t * self.direction[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GccVerdict {
    Satisfied,
    Violated,
    Undecided,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GccReport {
    pub verdict: GccVerdict,
    pub witness: Option<GeodesicRay>,
    pub rays_traced: usize,
    /// Rays that hit `O` only by a stretch shorter than the robustness margin.
    pub marginal_rays: usize,
}

enum RayOutcome {
    Miss,
    Marginal,
    Robust,
}

/// Unit directions of all rational slopes `p/q` with `|p|, |q| ≤ max`,
/// both orientations, reduced by gcd.
pub fn rational_directions(max: i32) -> Vec<[f64; 2]> {
    fn gcd(a: i32, b: i32) -> i32 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut out = Vec::new();
    for q in -max..=max {
        for p in -max..=max {
            if (p, q) == (0, 0) || gcd(p, q) != 1 {
                continue;
            }
            let n = (q as f64).hypot(p as f64);
            out.push([q as f64 / n, p as f64 / n]);
        }
    }
    out
}

fn trace_ray(o: &ObservationSet, ray: &GeodesicRay, step: f64, margin: f64) -> RayOutcome {
    let steps = (ray.horizon / step).ceil() as usize;
    let mut any_hit = false;
    let mut run = 0usize;
    let mut best = 0usize;
    let mut interior_samples = 0usize;
    for k in 1..steps {
        let t = k as f64 * step;
        if t >= ray.horizon {
            break;
        }
        interior_samples += 1;
        if o.contains_point(ray.at(t)) {
            any_hit = true;
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    if !any_hit {
        return RayOutcome::Miss;
    }
    // A stretch of r consecutive samples spans at least (r - 1) steps.
    let stretch = best.saturating_sub(1) as f64 * step;
    if best == interior_samples || stretch > margin {
        RayOutcome::Robust
    } else {
        RayOutcome::Marginal
    }
}

/// Sampled geometric control check on `(O, T)`.
///
/// Traces `n_directions` uniformly spaced directions plus every rational
/// slope with numerator and denominator bounded by 8, each from `n_offsets`
/// start points spread along the axis transverse to the ray.
pub fn check_gcc(o: &ObservationSet, horizon: f64, n_directions: usize, n_offsets: usize) -> Result<GccReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    if n_directions < 16 || n_offsets < 16 {
        return Err(Error::InvalidInput("GCC sampling needs at least 16 directions and 16 offsets".into()));
    }
    let grid = o.grid();
    let l = grid.side_length();
    let step = grid.spacing() / 4.0;
    let margin = 2.0 * grid.spacing();

    let mut directions: Vec<[f64; 2]> = (0..n_directions)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n_directions as f64;
            [theta.cos(), theta.sin()]
        })
        .collect();
    directions.extend(rational_directions(8));

    let mut traced = 0usize;
    let mut marginal = 0usize;
    for d in &directions {
        for k in 0..n_offsets {
            let s = k as f64 * l / n_offsets as f64;
            let start = if d[0].abs() >= d[1].abs() { [0.0, s] } else { [s, 0.0] };
            let ray = GeodesicRay {
                start,
                direction: *d,
                horizon,
            };
            traced += 1;
            match trace_ray(o, &ray, step, margin) {
                RayOutcome::Miss => {
                    return Ok(GccReport {
                        verdict: GccVerdict::Violated,
                        witness: Some(ray),
                        rays_traced: traced,
                        marginal_rays: marginal,
                    })
                }
                RayOutcome::Marginal => marginal += 1,
                RayOutcome::Robust => {}
            }
        }
    }
    Ok(GccReport {
        verdict: if marginal == 0 {
            GccVerdict::Satisfied
        } else {
            GccVerdict::Undecided
        },
        witness: None,
        rays_traced: traced,
        marginal_rays: marginal,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub holds: bool,
    pub gcc: GccReport,
    pub witness_p: Option<Point>,
    pub proper_subset: bool,
    pub connected: bool,
}

/// Sampling density used by [`check_hypothesis_h`] for the GCC part.
pub const DEFAULT_GCC_DIRECTIONS: usize = 64;
pub const DEFAULT_GCC_OFFSETS: usize = 32;

/// GCC on `(O, T)` plus a node `p ∈ O` whose antipodal set lies in `O`.
pub fn check_hypothesis_h(o: &ObservationSet, horizon: f64) -> Result<HypothesisReport> {
    let gcc = check_gcc(o, horizon, DEFAULT_GCC_DIRECTIONS, DEFAULT_GCC_OFFSETS)?;
    let grid = *o.grid();
    let witness_p = o
        .cells()
        .iter()
        .map(|&c| grid.node(c))
        .find(|&p| antipodal_set(p, &grid, grid.spacing()).iter().all(|&q| o.contains(q)));
    Ok(HypothesisReport {
        holds: gcc.verdict == GccVerdict::Satisfied && witness_p.is_some(),
        gcc,
        witness_p,
        proper_subset: o.is_proper(),
        connected: o.is_connected(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_construction() {
        let g = TorusGrid::standard(8).unwrap();
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        assert_eq!(TorusGrid::standard(64).unwrap().cell_count(), 4096);
        let err = TorusGrid::standard(7).unwrap_err().to_string();
        assert!(err.contains("n_side must be even ≥ 8"), "{err}");
        assert!(TorusGrid::standard(6).is_err());
        assert_eq!(g.spacing() * g.n_side() as f64, g.side_length());
    }

    #[test]
    fn index_wraps() {
        let g = TorusGrid::standard(8).unwrap();
        assert_eq!(g.index(-1, -1), 63);
        assert_eq!(g.index(8, 9), 1);
        assert_eq!(g.cell_of([2.0 * PI - 1e-9, 0.0]), 0);
    }

    #[test]
    fn distances() {
        let g = TorusGrid::standard(16).unwrap();
        assert!((geodesic_distance([0.0, 0.0], [PI, PI], &g) - PI * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(geodesic_distance([1.0, 2.0], [1.0, 2.0], &g), 0.0);
        assert!((geodesic_distance([0.0, 0.0], [1.5 * PI, 0.0], &g) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn antipodes() {
        let g = TorusGrid::standard(16).unwrap();
        let a = antipodal_set([0.0, 0.0], &g, 1e-9);
        assert_eq!(a, vec![g.cell_of([PI, PI])]);
        let unit = TorusGrid::new(16, 1.0).unwrap();
        let a = antipodal_set([0.0, 0.0], &unit, unit.spacing());
        assert!(a.contains(&unit.cell_of([0.5, 0.5])));
        for &c in &a {
            assert!(geodesic_distance(unit.node(c), [0.5, 0.5], &unit) <= unit.spacing() + 1e-12);
        }
    }

    #[test]
    fn masks_and_runs() {
        let g = TorusGrid::standard(16).unwrap();
        let o = ObservationSet::horizontal_strip(g, PI, 0.3).unwrap();
        assert!(o.is_connected());
        assert!(o.is_proper());
        let runs = o.to_runs();
        let back = ObservationSet::from_runs(g, &runs).unwrap();
        assert_eq!(back, o);
        let two = ObservationSet::disc(g, [0.0, 0.0], 0.5)
            .unwrap()
            .union(&ObservationSet::disc(g, [PI, PI], 0.5).unwrap())
            .unwrap();
        assert!(!two.is_connected());
        assert!(ObservationSet::from_mask(g, vec![false; 256]).is_err());
        let json = serde_json::to_string(&o).unwrap();
        let o2: ObservationSet = serde_json::from_str(&json).unwrap();
        assert_eq!(o2, o);
    }

    #[test]
    fn gcc_examples() {
        let g = TorusGrid::standard(32).unwrap();
        let whole = ObservationSet::whole(g);
        let r = check_gcc(&whole, 1.5 * g.spacing(), 16, 16).unwrap();
        assert_eq!(r.verdict, GccVerdict::Satisfied);

        let strip = ObservationSet::horizontal_strip(g, PI, 0.3).unwrap();
        let r = check_gcc(&strip, 100.0, 16, 16).unwrap();
        assert_eq!(r.verdict, GccVerdict::Violated);
        let w = r.witness.unwrap();
        assert_eq!(w.start, [0.0, 0.0]);
        assert_eq!(w.direction, [1.0, 0.0]);

        let cross = ObservationSet::cross(g, PI, PI, 0.4).unwrap();
        assert_eq!(check_gcc(&cross, 10.0, 32, 16).unwrap().verdict, GccVerdict::Satisfied);
        assert!(check_gcc(&cross, 10.0, 8, 16).is_err());
    }

    #[test]
    fn hypothesis_examples() {
        let g = TorusGrid::standard(32).unwrap();
        let cross = ObservationSet::cross(g, 0.0, PI, 0.4).unwrap();
        let r = check_hypothesis_h(&cross, 10.0).unwrap();
        assert!(r.holds);
        assert_eq!(r.witness_p, Some([0.0, 0.0]));

        let disc = ObservationSet::disc(g, [0.0, 0.0], 0.5).unwrap();
        assert!(!check_hypothesis_h(&disc, 10.0).unwrap().holds);

        let almost = ObservationSet::whole(g).without(&[g.cell_of([1.0, 1.0])]).unwrap();
        assert!(check_hypothesis_h(&almost, 10.0).unwrap().holds);
    }
}
