//! Turning literals into grids, masks and densities.

use std::fs;
use std::path::Path;

use bbl_core::bbl::GridDensity;
use bbl_core::grid::Grid;
use bbl_core::modelspace::{Kind, ModelSpace};
use bbl_core::sets::{convex_hull, DiscreteSet};
use bbl_core::Error;
use serde::Deserialize;

use crate::literal::{SetLiteral, Shape, SpaceSpec};

/// Density file in JSON form; `values` is a row-major list of rows
/// (`y` index outer) or a flat 1-D list.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    origin: Vec<f64>,
    h: f64,
    values: serde_json::Value,
}

/// Numeric CSV: one row per `y` index, one column per `x` index. Lines
/// starting with `#` are skipped.
fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>, Error> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim_end();
        if t.trim().is_empty() || t.trim_start().starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 1;
        for field in t.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: ln + 1,
                column: col,
                message: format!("expected a number, got {:?}", field.trim()),
            })?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: col,
                    message: "density values must be finite and nonnegative".into(),
                });
            }
            row.push(v);
            col += field.len() + 1;
        }
        if let Some(first) = rows.first() {
            let want = Vec::len(first);
            if row.len() != want {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: 1,
                    message: format!("expected {want} fields, got {}", row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty density file".into(),
        });
    }
    Ok(rows)
}

fn rows_from_json(v: &serde_json::Value) -> Result<Vec<Vec<f64>>, Error> {
    let bad = |m: &str| Error::Parse {
        line: 1,
        column: 1,
        message: m.into(),
    };
    let arr = v.as_array().ok_or_else(|| bad("values must be an array"))?;
    let num = |x: &serde_json::Value| x.as_f64().filter(|v| *v >= 0.0).ok_or_else(|| bad("values must be nonnegative numbers"));
    if arr.iter().all(|x| x.is_number()) {
        return Ok(vec![arr.iter().map(num).collect::<Result<_, _>>()?]);
    }
    let rows: Vec<Vec<f64>> = arr
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| bad("values must be numbers or rows of numbers"))?
                .iter()
                .map(num)
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len() || r.is_empty()) {
        return Err(bad("rows must be nonempty and of equal length"));
    }
    Ok(rows)
}

/// Loads a density file; CSV needs `origin` and `h` from the command line.
pub fn load_density(path: &Path, origin: &[f64], h: f64) -> Result<GridDensity, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let (origin, h, rows) = if is_json {
        let f: DensityFile = serde_json::from_str(&text)?;
        let rows = rows_from_json(&f.values)?;
        (f.origin, f.h, rows)
    } else {
        (origin.to_vec(), h, parse_csv(&text)?)
    };
    let (nx, ny) = (rows[0].len(), rows.len());
    let dims: Vec<usize> = if ny == 1 { vec![nx] } else { vec![nx, ny] };
    let origin: Vec<f64> = if origin.is_empty() { vec![0.0; dims.len()] } else { origin };
    if origin.len() != dims.len() {
        return Err(Error::Mismatch(format!(
            "origin has {} coordinates, file is {}-dimensional",
            origin.len(),
            dims.len()
        )));
    }
    let grid = Grid::cartesian(ModelSpace::euclidean(dims.len())?, &origin, h, &dims)?;
    // row iy, column ix → cell ravel([ix, iy, 0])
    let mut values = vec![0.0; grid.len()];
    for (iy, row) in rows.iter().enumerate() {
        for (ix, &v) in row.iter().enumerate() {
            values[grid.ravel([ix, iy, 0])] = v;
        }
    }
    GridDensity::new(grid, values)
}

/// Mask of a literal on `grid`.
pub fn rasterize(lit: &SetLiteral, grid: &Grid, origin: &[f64]) -> Result<DiscreteSet, Error> {
    let space = grid.space;
    match &lit.shape {
        Shape::Box { lo, hi } => {
            if space.kind != Kind::Euclidean {
                return Err(Error::Unsupported("box literals need euclidean space".into()));
            }
            Ok(DiscreteSet::boxed(grid, lo, hi))
        }
        Shape::Disk { center, r } => Ok(DiscreteSet::ball(grid, &space.from_normal_coords(center)?, *r)),
        Shape::Poly(v) => {
            if space.kind != Kind::Euclidean || space.n != 2 {
                return Err(Error::Unsupported("poly literals need the euclidean plane".into()));
            }
            Ok(DiscreteSet::convex_polygon(grid, &convex_hull(v.clone())))
        }
        Shape::File(p) => {
            let d = load_density(p, origin, grid.h())?;
            d.grid.same_as(grid)?;
            d.support()
        }
    }
}

/// Density of a literal on `grid` (indicator times scale, or file values).
pub fn density(lit: &SetLiteral, grid: &Grid, origin: &[f64]) -> Result<GridDensity, Error> {
    if let Shape::File(p) = &lit.shape {
        let d = load_density(p, origin, grid.h())?;
        d.grid.same_as(grid)?;
        return d.scaled(lit.scale);
    }
    GridDensity::indicator(&rasterize(lit, grid, origin)?)?.scaled(lit.scale)
}

/// Shared grid for a group of literals: the first file's grid if any,
/// otherwise a Cartesian grid over the union of bounding boxes
/// (Euclidean) or a polar grid around the origin (curved).
pub fn shared_grid(lits: &[&SetLiteral], space: &SpaceSpec, h: f64, origin: &[f64]) -> Result<Grid, Error> {
    if !(h > 0.0) {
        return Err(Error::Domain("grid spacing must be positive".into()));
    }
    for lit in lits {
        if let Shape::File(p) = &lit.shape {
            return Ok(load_density(p, origin, h)?.grid);
        }
    }
    let dims: Vec<usize> = lits.iter().filter_map(|l| l.dim()).collect();
    let n = dims[0];
    if dims.iter().any(|&d| d != n) {
        return Err(Error::Mismatch("set literals have different dimensions".into()));
    }
    let ms = space.build(n)?;
    if ms.kind == Kind::Euclidean {
        let (mut lo, mut hi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
        for l in lits {
            let (a, b) = l.bounds().expect("non-file literal");
            for k in 0..n {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        return Grid::covering(ms, &lo, &hi, h);
    }
    let mut reach = 0.0f64;
    for l in lits {
        match &l.shape {
            Shape::Disk { center, r } => reach = reach.max(center.iter().map(|c| c * c).sum::<f64>().sqrt() + r),
            _ => return Err(Error::Unsupported("curved spaces take disk literals".into())),
        }
    }
    let r_max = (reach + 2.0 * h).min(ms.diameter() * (1.0 - 1e-9));
    Grid::polar_with_spacing(ms, r_max, h)
}
