//! Regular grids on the model spaces.
//!
//! Euclidean space uses Cartesian grids. The curved surfaces use a polar
//! grid in geodesic normal coordinates around the model origin (on the
//! sphere this is a latitude/longitude grid around the pole), whose cell
//! areas are known in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::modelspace::{Kind, ModelSpace, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layout {
    /// Cells `origin + h·[i, i+1)` per axis, `x` fastest.
    Cartesian {
        origin: Vec<f64>,
        h: f64,
        dims: Vec<usize>,
    },
    /// Cells `[i·dr, (i+1)·dr) × [j·dφ, (j+1)·dφ)` in polar normal
    /// coordinates, `φ` fastest.
    Polar { r_max: f64, nr: usize, nphi: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub space: ModelSpace,
    pub layout: Layout,
}

impl Grid {
    pub fn cartesian(space: ModelSpace, origin: &[f64], h: f64, dims: &[usize]) -> Result<Self> {
        if space.kind != Kind::Euclidean {
            return Err(Error::Unsupported("Cartesian grids need euclidean space".into()));
        }
        if origin.len() != space.n || dims.len() != space.n {
            return Err(Error::Mismatch("grid dimension differs from space".into()));
        }
        if !(h > 0.0) || dims.contains(&0) {
            return domain("grid needs h > 0 and nonempty extents");
        }
        Ok(Grid {
            space,
            layout: Layout::Cartesian {
                origin: origin.to_vec(),
                h,
                dims: dims.to_vec(),
            },
        })
    }

    /// Cartesian grid covering the box `[lo, hi]` with spacing `h`
    /// (upper edge rounded up to a whole cell).
    pub fn covering(space: ModelSpace, lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        let dims: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (((b - a) / h) - 1e-9).ceil().max(1.0) as usize)
            .collect();
        Grid::cartesian(space, lo, h, &dims)
    }

    pub fn polar(space: ModelSpace, r_max: f64, nr: usize, nphi: usize) -> Result<Self> {
        if space.kind == Kind::Euclidean || space.n != 2 {
            return Err(Error::Unsupported("polar grids are built on curved surfaces (n = 2)".into()));
        }
        if !(r_max > 0.0) || r_max >= space.diameter() || nr == 0 || nphi < 3 {
            return domain("polar grid needs 0 < r_max < diameter, nr >= 1, nphi >= 3");
        }
        Ok(Grid {
            space,
            layout: Layout::Polar { r_max, nr, nphi },
        })
    }

    /// Polar grid with radial step `h` and angular count chosen so the
    /// widest ring has cells about `h` wide.
    pub fn polar_with_spacing(space: ModelSpace, r_max: f64, h: f64) -> Result<Self> {
        let nr = (r_max / h).ceil() as usize;
        let dr = r_max / nr as f64;
        let rr = space.radius();
        let widest = (0..nr)
            .map(|i| circumference(&space, (i as f64 + 1.0) * dr, rr))
            .fold(0.0, f64::max);
        let nphi = ((widest / h).ceil() as usize).max(3);
        Grid::polar(space, r_max, nr, nphi)
    }

    pub fn len(&self) -> usize {
        match &self.layout {
            Layout::Cartesian { dims, .. } => dims.iter().product(),
            Layout::Polar { nr, nphi, .. } => nr * nphi,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Resolution: the largest cell extent along any coordinate direction.
    pub fn h(&self) -> f64 {
        match &self.layout {
            Layout::Cartesian { h, .. } => *h,
            Layout::Polar { r_max, nr, nphi } => {
                let dr = r_max / *nr as f64;
                let dphi = 2.0 * PI / *nphi as f64;
                let rr = self.space.radius();
                let w = (1..=*nr)
                    .map(|i| circumference(&self.space, i as f64 * dr, rr) / (2.0 * PI) * dphi)
                    .fold(0.0, f64::max);
                dr.max(w)
            }
        }
    }

    fn unravel(&self, mut i: usize, dims: &[usize]) -> [usize; 3] {
        let mut out = [0; 3];
        for (a, &d) in dims.iter().enumerate() {
            out[a] = i % d;
            i /= d;
        }
        out
    }

    /// Multi-index of cell `i` (`[ix, iy, iz]` or `[ir, iphi, 0]`).
    pub fn index_of(&self, i: usize) -> [usize; 3] {
        match &self.layout {
            Layout::Cartesian { dims, .. } => self.unravel(i, dims),
            Layout::Polar { nphi, .. } => [i / nphi, i % nphi, 0],
        }
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        match &self.layout {
            Layout::Cartesian { dims, .. } => {
                let mut i = 0;
                for a in (0..dims.len()).rev() {
                    i = i * dims[a] + idx[a];
                }
                i
            }
            Layout::Polar { nphi, .. } => idx[0] * nphi + idx[1],
        }
    }

    /// Center of cell `i` as a point of the space.
    pub fn center(&self, i: usize) -> Point {
        match &self.layout {
            Layout::Cartesian { origin, h, dims } => {
                let idx = self.unravel(i, dims);
                let mut c = [0.0; 3];
                for a in 0..dims.len() {
                    c[a] = origin[a] + (idx[a] as f64 + 0.5) * h;
                }
                Point::new(&c[..dims.len()])
            }
            Layout::Polar { r_max, nr, nphi } => {
                let (ir, ip) = (i / nphi, i % nphi);
                let dr = r_max / *nr as f64;
                let dphi = 2.0 * PI / *nphi as f64;
                let r = (ir as f64 + 0.5) * dr;
                let phi = (ip as f64 + 0.5) * dphi;
                self.space
                    .from_normal_coords(&[r * phi.cos(), r * phi.sin()])
                    .expect("polar grid stays inside the injectivity radius")
            }
        }
    }

    /// Euclidean coordinates of the center (Cartesian grids only).
    pub fn center_coords(&self, i: usize) -> Vec<f64> {
        self.center(i).coords().to_vec()
    }

    /// Measure of cell `i`.
    pub fn volume(&self, i: usize) -> f64 {
        match &self.layout {
            Layout::Cartesian { h, dims, .. } => h.powi(dims.len() as i32),
            Layout::Polar { r_max, nr, nphi } => {
                let dr = r_max / *nr as f64;
                let dphi = 2.0 * PI / *nphi as f64;
                let ir = i / nphi;
                let (r0, r1) = (ir as f64 * dr, (ir + 1) as f64 * dr);
                let rr = self.space.radius();
                match self.space.kind {
                    Kind::Sphere => rr * rr * ((r0 / rr).cos() - (r1 / rr).cos()) * dphi,
                    _ => rr * rr * ((r1 / rr).cosh() - (r0 / rr).cosh()) * dphi,
                }
            }
        }
    }

    /// Cell containing `x`, if any.
    pub fn locate(&self, x: &Point) -> Option<usize> {
        match &self.layout {
            Layout::Cartesian { origin, h, dims } => {
                let c = x.coords();
                if c.len() != dims.len() {
                    return None;
                }
                let mut idx = [0usize; 3];
                for a in 0..dims.len() {
                    let t = ((c[a] - origin[a]) / h).floor();
                    if !(t >= 0.0 && t < dims[a] as f64) {
                        return None;
                    }
                    idx[a] = t as usize;
                }
                Some(self.ravel(idx))
            }
            Layout::Polar { r_max, nr, nphi } => {
                let v = self.space.log(&self.space.origin(), x).ok()?;
                let r = (v[1] * v[1] + v[2] * v[2]).sqrt();
                if r >= *r_max {
                    return None;
                }
                let mut phi = v[2].atan2(v[1]);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                let ir = ((r / r_max * *nr as f64) as usize).min(nr - 1);
                let ip = ((phi / (2.0 * PI) * *nphi as f64) as usize).min(nphi - 1);
                Some(ir * nphi + ip)
            }
        }
    }

    /// Cells sharing at least a corner with `i` (excluding `i`). Cells of
    /// the innermost polar ring all touch the pole and are mutual neighbors.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match &self.layout {
            Layout::Cartesian { dims, .. } => {
                let idx = self.unravel(i, dims);
                let nd = dims.len();
                let total = 3usize.pow(nd as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut j = [0usize; 3];
                    let mut ok = true;
                    let mut same = true;
                    for a in 0..nd {
                        let off = (c % 3) as isize - 1;
                        c /= 3;
                        if off != 0 {
                            same = false;
                        }
                        let v = idx[a] as isize + off;
                        if v < 0 || v >= dims[a] as isize {
                            ok = false;
                            break;
                        }
                        j[a] = v as usize;
                    }
                    if ok && !same {
                        out.push(self.ravel(j));
                    }
                }
            }
            Layout::Polar { nr, nphi, .. } => {
                let (ir, ip) = (i / nphi, i % nphi);
                for dr in [-1isize, 0, 1] {
                    let r = ir as isize + dr;
                    if r < 0 || r >= *nr as isize {
                        continue;
                    }
                    for dp in [-1isize, 0, 1] {
                        if dr == 0 && dp == 0 {
                            continue;
                        }
                        let p = (ip as isize + dp).rem_euclid(*nphi as isize) as usize;
                        out.push(r as usize * nphi + p);
                    }
                }
                if ir == 0 {
                    out.extend((0..*nphi).filter(|&p| p != ip));
                }
                out.sort_unstable();
                out.dedup();
            }
        }
        out
    }

    /// Total variation weight of a jump between cells `i` and their
    /// face-neighbors: the shared face measure. Used for perimeter estimates.
    pub fn face_neighbors(&self, i: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        match &self.layout {
            Layout::Cartesian { h, dims, .. } => {
                let idx = self.unravel(i, dims);
                let face = h.powi(dims.len() as i32 - 1);
                for a in 0..dims.len() {
                    for off in [-1isize, 1] {
                        let v = idx[a] as isize + off;
                        if v >= 0 && v < dims[a] as isize {
                            let mut j = idx;
                            j[a] = v as usize;
                            out.push((self.ravel(j), face));
                        }
                    }
                }
            }
            Layout::Polar { r_max, nr, nphi } => {
                let (ir, ip) = (i / nphi, i % nphi);
                let dr = r_max / *nr as f64;
                let dphi = 2.0 * PI / *nphi as f64;
                let rr = self.space.radius();
                let arc = |r: f64| circumference(&self.space, r, rr) / (2.0 * PI) * dphi;
                if ir > 0 {
                    out.push(((ir - 1) * nphi + ip, arc(ir as f64 * dr)));
                }
                if ir + 1 < *nr {
                    out.push(((ir + 1) * nphi + ip, arc((ir + 1) as f64 * dr)));
                }
                out.push((ir * nphi + (ip + 1) % nphi, dr));
                out.push((ir * nphi + (ip + nphi - 1) % nphi, dr));
            }
        }
        out
    }

    /// Measure of the outer boundary faces of cell `i` at the edge of the grid.
    pub fn boundary_face(&self, i: usize) -> f64 {
        match &self.layout {
            Layout::Cartesian { h, dims, .. } => {
                let idx = self.unravel(i, dims);
                let face = h.powi(dims.len() as i32 - 1);
                let mut total = 0.0;
                for a in 0..dims.len() {
                    if idx[a] == 0 {
                        total += face;
                    }
                    if idx[a] + 1 == dims[a] {
                        total += face;
                    }
                }
                total
            }
            Layout::Polar { r_max, nr, nphi } => {
                if i / nphi + 1 == *nr {
                    let rr = self.space.radius();
                    circumference(&self.space, *r_max, rr) / *nphi as f64
                } else {
                    0.0
                }
            }
        }
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::Mismatch("inputs live on different grids".into()));
        }
        Ok(())
    }
}

/// Length of the geodesic circle of radius `r`.
fn circumference(space: &ModelSpace, r: f64, rr: f64) -> f64 {
    match space.kind {
        Kind::Euclidean => 2.0 * PI * r,
        Kind::Sphere => 2.0 * PI * rr * (r / rr).sin(),
        Kind::Hyperbolic => 2.0 * PI * rr * (r / rr).sinh(),
    }
}
