//! Discrete sets (grid masks and point clouds), Minkowski interpolation
//! `Z_s(A, B)`, outer-measure estimates, `Θ_{A,B}` and convexity /
//! homothety detection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{Grid, Layout};
use crate::modelspace::{Kind, ModelSpace, Point};

/// Upper bound on `|A|·|B|` for pair enumeration.
pub const PAIR_CAP: usize = 40_000_000;

/// A set is homothetic to another when the fit residual is at most this
/// many grid spacings.
pub const HOMOTHETY_H_FACTOR: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSet {
    pub space: ModelSpace,
    pub h: f64,
    grid: Option<Grid>,
    /// Sorted cell indices (grid masks only).
    cells: Vec<usize>,
    points: Vec<Point>,
}

/// Measure with a bracketing interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub value: f64,
    pub inner: f64,
    pub outer: f64,
}

impl Measure {
    /// Half-width of the bracket.
    pub fn error(&self) -> f64 {
        0.5 * (self.outer - self.inner)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomothetyFit {
    pub c0: f64,
    pub x0: Vec<f64>,
    pub residual: f64,
    /// `residual <= 8h`.
    pub homothetic: bool,
}

impl DiscreteSet {
    /// Grid mask from a list of cell indices.
    pub fn from_cells(grid: &Grid, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = cells.into_iter().collect();
        if let Some(&last) = set.iter().next_back() {
            if last >= grid.len() {
                return domain(format!("cell {last} outside the grid"));
            }
        }
        let cells: Vec<usize> = set.into_iter().collect();
        let points = cells.iter().map(|&i| grid.center(i)).collect();
        Ok(DiscreteSet {
            space: grid.space,
            h: grid.h(),
            grid: Some(grid.clone()),
            cells,
            points,
        })
    }

    /// Grid mask of the cells whose centers satisfy `inside`.
    pub fn rasterize(grid: &Grid, inside: impl Fn(&Point) -> bool) -> Self {
        let cells = (0..grid.len()).filter(|&i| inside(&grid.center(i)));
        Self::from_cells(grid, cells).expect("indices come from the grid")
    }

    /// Explicit point cloud with covering radius `h`.
    pub fn cloud(space: ModelSpace, points: Vec<Point>, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return domain("covering radius must be positive");
        }
        for p in &points {
            if p.len() != space.coord_len() {
                return Err(Error::Mismatch("cloud point has wrong dimension".into()));
            }
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            let key: Vec<u64> = p.coords().iter().map(|v| v.to_bits()).collect();
            if !seen.insert(key) {
                return domain("cloud points must be pairwise distinct");
            }
        }
        Ok(DiscreteSet {
            space,
            h,
            grid: None,
            cells: Vec::new(),
            points,
        })
    }

    /// Axis-aligned box `[lo, hi]` on a Cartesian grid.
    pub fn boxed(grid: &Grid, lo: &[f64], hi: &[f64]) -> Self {
        Self::rasterize(grid, |p| {
            p.coords()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| *x >= *a && *x <= *b)
        })
    }

    /// Closed geodesic ball.
    pub fn ball(grid: &Grid, center: &Point, r: f64) -> Self {
        let m = grid.space;
        Self::rasterize(grid, |p| m.dist_unchecked(p, center) <= r)
    }

    /// Convex polygon (counterclockwise vertices) on a 2-D Cartesian grid.
    pub fn convex_polygon(grid: &Grid, verts: &[[f64; 2]]) -> Self {
        Self::rasterize(grid, |p| {
            let c = p.coords();
            inside_convex(verts, [c[0], c[1]])
        })
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains_cell(&self, i: usize) -> bool {
        self.cells.binary_search(&i).is_ok()
    }

    fn require_grid(&self) -> Result<&Grid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Unsupported("operation needs a grid mask, got a point cloud".into()))
    }

    /// The mask dilated by one cell.
    pub fn dilate(&self) -> Result<Self> {
        let g = self.require_grid()?;
        let mut out: BTreeSet<usize> = self.cells.iter().copied().collect();
        for &i in &self.cells {
            out.extend(g.neighbors(i));
        }
        Self::from_cells(g, out)
    }

    /// Cells all of whose neighbors are in the mask.
    pub fn erode(&self) -> Result<Self> {
        let g = self.require_grid()?;
        let keep = self
            .cells
            .iter()
            .copied()
            .filter(|&i| {
                let nb = g.neighbors(i);
                // a cell on the outer rim of the grid has missing neighbors
                nb.len() == full_neighbor_count(g, i) && nb.iter().all(|&j| self.contains_cell(j))
            })
            .collect::<Vec<_>>();
        Self::from_cells(g, keep)
    }

    /// Total cell measure.
    pub fn raw_measure(&self) -> Result<f64> {
        let g = self.require_grid()?;
        Ok(self.cells.iter().map(|&i| g.volume(i)).sum())
    }

    /// Volume-weighted centroid of a Euclidean mask.
    pub fn centroid(&self) -> Result<Vec<f64>> {
        let g = self.require_grid()?;
        if self.space.kind != Kind::Euclidean {
            return Err(Error::Unsupported("centroid needs euclidean space".into()));
        }
        let mut c = vec![0.0; self.space.n];
        let mut w = 0.0;
        for (&i, p) in self.cells.iter().zip(&self.points) {
            let v = g.volume(i);
            w += v;
            for (ca, x) in c.iter_mut().zip(p.coords()) {
                *ca += v * x;
            }
        }
        if w == 0.0 {
            return domain("centroid of an empty set");
        }
        Ok(c.into_iter().map(|x| x / w).collect())
    }

    /// Serializes a 1-D or 2-D Cartesian mask as CSV rows of 0/1 (row
    /// index = `y`, column = `x`).
    pub fn to_csv(&self) -> Result<String> {
        let g = self.require_grid()?;
        let dims = match &g.layout {
            Layout::Cartesian { dims, .. } if dims.len() <= 2 => dims.clone(),
            _ => return Err(Error::Unsupported("CSV masks are 1-D or 2-D Cartesian".into())),
        };
        let (nx, ny) = (dims[0], dims.get(1).copied().unwrap_or(1));
        let mut out = String::new();
        for iy in 0..ny {
            let row: Vec<&str> = (0..nx)
                .map(|ix| if self.contains_cell(g.ravel([ix, iy, 0])) { "1" } else { "0" })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses the CSV written by [`DiscreteSet::to_csv`].
    pub fn from_csv(grid: &Grid, text: &str) -> Result<Self> {
        let dims = match &grid.layout {
            Layout::Cartesian { dims, .. } if dims.len() <= 2 => dims.clone(),
            _ => return Err(Error::Unsupported("CSV masks are 1-D or 2-D Cartesian".into())),
        };
        let (nx, ny) = (dims[0], dims.get(1).copied().unwrap_or(1));
        let mut cells = Vec::new();
        let mut rows = 0;
        for (iy, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if iy >= ny {
                return Err(Error::Parse {
                    line: iy + 1,
                    column: 1,
                    message: format!("expected {ny} rows"),
                });
            }
            let mut col = 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != nx {
                return Err(Error::Parse {
                    line: iy + 1,
                    column: 1,
                    message: format!("expected {nx} fields, got {}", fields.len()),
                });
            }
            for (ix, f) in fields.iter().enumerate() {
                match f.trim() {
                    "1" => cells.push(grid.ravel([ix, iy, 0])),
                    "0" => {}
                    other => {
                        return Err(Error::Parse {
                            line: iy + 1,
                            column: col,
                            message: format!("expected 0 or 1, got {other:?}"),
                        })
                    }
                }
                col += f.len() + 1;
            }
            rows += 1;
        }
        if rows != ny {
            return Err(Error::Parse {
                line: rows + 1,
                column: 1,
                message: format!("expected {ny} rows, got {rows}"),
            });
        }
        Self::from_cells(grid, cells)
    }
}

fn full_neighbor_count(g: &Grid, i: usize) -> usize {
    match &g.layout {
        Layout::Cartesian { dims, .. } => {
            let idx = g.index_of(i);
            if (0..dims.len()).all(|a| idx[a] > 0 && idx[a] + 1 < dims[a]) {
                3usize.pow(dims.len() as u32) - 1
            } else {
                usize::MAX
            }
        }
        Layout::Polar { nr, .. } => {
            if g.index_of(i)[0] + 1 < *nr {
                g.neighbors(i).len()
            } else {
                usize::MAX
            }
        }
    }
}

/// Point-in-convex-polygon test (boundary counts as inside).
pub fn inside_convex(verts: &[[f64; 2]], p: [f64; 2]) -> bool {
    let m = verts.len();
    (0..m).all(|i| {
        let a = verts[i];
        let b = verts[(i + 1) % m];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-12
    })
}

/// `Z_s(A, B)` snapped to the grid, dilated by one cell.
pub fn interpolation_set(a: &DiscreteSet, b: &DiscreteSet, s: f64) -> Result<DiscreteSet> {
    if a.space != b.space {
        return Err(Error::Mismatch("sets live on different spaces".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} outside (0,1)"));
    }
    let grid = match (a.grid(), b.grid()) {
        (Some(ga), Some(gb)) => {
            ga.same_as(gb)?;
            ga
        }
        (Some(g), None) | (None, Some(g)) => g,
        (None, None) => return Err(Error::Unsupported("interpolation needs a target grid".into())),
    };
    interpolation_set_on(a, b, s, grid)
}

/// [`interpolation_set`] snapped to an explicit target grid.
pub fn interpolation_set_on(a: &DiscreteSet, b: &DiscreteSet, s: f64, grid: &Grid) -> Result<DiscreteSet> {
    if a.space != b.space || a.space != grid.space {
        return Err(Error::Mismatch("sets live on different spaces".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} outside (0,1)"));
    }
    let pairs = a.len().saturating_mul(b.len());
    if pairs > PAIR_CAP {
        return Err(Error::SizeCap(format!("|A|·|B| = {pairs} exceeds {PAIR_CAP}")));
    }
    let m = a.space;
    let mut hit = vec![false; grid.len()];
    for x in a.points() {
        for y in b.points() {
            if m.is_cut_pair(x, y) {
                return Err(Error::CutLocus(format!("cut-locus pair {x:?}, {y:?}")));
            }
            let z = m.geodesic_unchecked(x, y, s);
            match grid.locate(&z) {
                Some(c) => hit[c] = true,
                None => return domain(format!("interpolant {z:?} leaves the grid")),
            }
        }
    }
    let z = DiscreteSet::from_cells(grid, (0..grid.len()).filter(|&i| hit[i]))?;
    z.dilate()
}

/// Cell-count measure with the `[erosion, dilation]` bracket.
pub fn measure(a: &DiscreteSet) -> Result<Measure> {
    a.require_grid()?;
    if a.is_empty() {
        return Ok(Measure {
            value: 0.0,
            inner: 0.0,
            outer: 0.0,
        });
    }
    Ok(Measure {
        value: a.raw_measure()?,
        inner: a.erode()?.raw_measure()?,
        outer: a.dilate()?.raw_measure()?,
    })
}

/// `Θ_{A,B}`: infimum of pairwise distances for `k >= 0`, supremum for `k < 0`.
pub fn theta(a: &DiscreteSet, b: &DiscreteSet, k: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return domain("theta needs nonempty sets");
    }
    if a.space != b.space {
        return Err(Error::Mismatch("sets live on different spaces".into()));
    }
    let m = a.space;
    let mut best = if k >= 0.0 { f64::INFINITY } else { 0.0 };
    for x in a.points() {
        for y in b.points() {
            let d = m.dist_unchecked(x, y);
            best = if k >= 0.0 { best.min(d) } else { best.max(d) };
        }
    }
    Ok(best)
}

/// Fits `B ≈ c0·A + x0` and reports the relative symmetric difference.
pub fn homothety_fit(a: &DiscreteSet, b: &DiscreteSet) -> Result<HomothetyFit> {
    if a.space.kind != Kind::Euclidean || b.space.kind != Kind::Euclidean {
        return Err(Error::Unsupported("homothety fit needs euclidean space".into()));
    }
    let ga = a.require_grid()?;
    let gb = b.require_grid()?;
    let (ma, mb) = (a.raw_measure()?, b.raw_measure()?);
    if ma == 0.0 || mb == 0.0 {
        return domain("homothety fit needs sets of positive measure");
    }
    let n = a.space.n;
    let c0 = (mb / ma).powf(1.0 / n as f64);
    let (ca, cb) = (a.centroid()?, b.centroid()?);
    let x0: Vec<f64> = (0..n).map(|i| cb[i] - c0 * ca[i]).collect();
    // rasterize c0·A + x0 on B's grid: a cell belongs when its center's
    // preimage falls in a cell of A
    let mut sym = 0.0;
    for i in 0..gb.len() {
        let z = gb.center(i);
        let pre: Vec<f64> = z.coords().iter().zip(&x0).map(|(zi, xi)| (zi - xi) / c0).collect();
        let in_image = ga.locate(&Point::new(&pre)).is_some_and(|j| a.contains_cell(j));
        if in_image != b.contains_cell(i) {
            sym += gb.volume(i);
        }
    }
    let residual = sym / mb;
    Ok(HomothetyFit {
        c0,
        x0,
        residual,
        homothetic: residual <= HOMOTHETY_H_FACTOR * gb.h(),
    })
}

/// `(m(conv A) − m(A)) / m(A)` on 1-D or 2-D Cartesian masks.
pub fn convexity_residual(a: &DiscreteSet) -> Result<f64> {
    let g = a.require_grid()?;
    let (h, dims) = match &g.layout {
        Layout::Cartesian { h, dims, .. } if dims.len() <= 2 => (*h, dims.clone()),
        _ => return Err(Error::Unsupported("convexity residual on 1-D/2-D Cartesian grids".into())),
    };
    if a.is_empty() {
        return Ok(0.0);
    }
    let count = a.len() as f64;
    if dims.len() == 1 {
        let span = a.cells.last().unwrap() - a.cells[0] + 1;
        return Ok((span as f64 - count) / count);
    }
    let mut corners = Vec::with_capacity(4 * a.len());
    for p in a.points() {
        let c = p.coords();
        for (dx, dy) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)] {
            corners.push([c[0] + dx * h, c[1] + dy * h]);
        }
    }
    let hull = convex_hull(corners);
    let mut extra = 0usize;
    for i in 0..g.len() {
        if a.contains_cell(i) {
            continue;
        }
        let c = g.center(i);
        if inside_convex(&hull, [c.coords()[0], c.coords()[1]]) {
            extra += 1;
        }
    }
    Ok(extra as f64 / count)
}

/// Counterclockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
