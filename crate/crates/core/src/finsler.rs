//! Minkowski planes: Randers and Matsumoto norms, forward/backward balls
//! as inscribed polygons, exact Minkowski combinations of convex polygons,
//! and the Brunn-Minkowski deficit of a forward/backward ball pair.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Standard gravity used by the slope metric unless overridden.
pub const GRAVITY: f64 = 9.81;

/// Default number of angular samples per ball.
pub const DEFAULT_SAMPLES: usize = 1024;

/// A backward ball counts as a translate of the rescaled forward ball when
/// the fitted radial residual is at most this.
pub const HOMOTHETY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinkowskiNorm {
    /// `√⟨Qy,y⟩ + ⟨b,y⟩`.
    Randers { q: [[f64; 2]; 2], b: [f64; 2] },
    /// `|y|² / (v|y| + (g/2) y₂ sin α)`.
    Matsumoto { alpha: f64, v: f64, g: f64 },
    /// `|y| / v`.
    EuclideanScaled { v: f64 },
}

impl MinkowskiNorm {
    pub fn randers(q: [[f64; 2]; 2], b: [f64; 2]) -> Result<Self> {
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        if q[0][1] != q[1][0] || !(q[0][0] > 0.0) || !(det > 0.0) {
            return domain("Q must be symmetric positive definite");
        }
        // ⟨Q⁻¹b, b⟩ < 1
        let qib = [(q[1][1] * b[0] - q[0][1] * b[1]) / det, (q[0][0] * b[1] - q[1][0] * b[0]) / det];
        let beta = qib[0] * b[0] + qib[1] * b[1];
        if !(beta < 1.0) {
            return domain(format!("<Q^-1 b, b> = {beta} must be < 1"));
        }
        Ok(MinkowskiNorm::Randers { q, b })
    }

    pub fn matsumoto(alpha: f64, v: f64, g: f64) -> Result<Self> {
        if !(0.0..PI / 2.0).contains(&alpha) || !(v > 0.0) || !(g > 0.0) {
            return domain("slope metric needs alpha in [0, π/2), v > 0, g > 0");
        }
        if !(g * alpha.sin() < v) {
            return domain(format!("slope condition g·sin(alpha) = {} < v = {v} fails", g * alpha.sin()));
        }
        Ok(MinkowskiNorm::Matsumoto { alpha, v, g })
    }

    pub fn euclidean_scaled(v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return domain("speed must be positive");
        }
        Ok(MinkowskiNorm::EuclideanScaled { v })
    }

    /// `F(y)`.
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        let r2 = y[0] * y[0] + y[1] * y[1];
        if r2 == 0.0 {
            return 0.0;
        }
        match *self {
            MinkowskiNorm::Randers { q, b } => {
                let qyy = q[0][0] * y[0] * y[0] + 2.0 * q[0][1] * y[0] * y[1] + q[1][1] * y[1] * y[1];
                qyy.sqrt() + b[0] * y[0] + b[1] * y[1]
            }
            MinkowskiNorm::Matsumoto { alpha, v, g } => r2 / (v * r2.sqrt() + 0.5 * g * y[1] * alpha.sin()),
            MinkowskiNorm::EuclideanScaled { v } => r2.sqrt() / v,
        }
    }

    pub fn is_reversible(&self) -> bool {
        match *self {
            MinkowskiNorm::Randers { b, .. } => b == [0.0, 0.0],
            MinkowskiNorm::Matsumoto { alpha, .. } => alpha == 0.0,
            MinkowskiNorm::EuclideanScaled { .. } => true,
        }
    }
}

/// Closed counterclockwise polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl Polygon {
    /// Validates at least 3 vertices, positive signed area and simplicity.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().flatten().any(|v| !v.is_finite()) {
            return domain("polygon needs at least 3 finite vertices");
        }
        let p = Polygon { vertices };
        if !(p.signed_area() > 0.0) {
            return domain("polygon must be counterclockwise with positive area");
        }
        if !p.is_convex() {
            let m = p.vertices.len();
            for i in 0..m {
                for j in i + 2..m {
                    if i == 0 && j == m - 1 {
                        continue;
                    }
                    let (a, b) = (p.vertices[i], p.vertices[(i + 1) % m]);
                    let (c, d) = (p.vertices[j], p.vertices[(j + 1) % m]);
                    if segments_cross(a, b, c, d) {
                        return domain(format!("polygon edges {i} and {j} intersect"));
                    }
                }
            }
        }
        Ok(p)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace formula.
    pub fn signed_area(&self) -> f64 {
        let m = self.vertices.len();
        0.5 * (0..m)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % m]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Area centroid.
    pub fn centroid(&self) -> [f64; 2] {
        let m = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..m {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % m]);
            let w = a[0] * b[1] - a[1] * b[0];
            cx += (a[0] + b[0]) * w;
            cy += (a[1] + b[1]) * w;
        }
        let a6 = 6.0 * self.signed_area();
        [cx / a6, cy / a6]
    }

    /// All turns left (collinear vertices allowed).
    pub fn is_convex(&self) -> bool {
        let m = self.vertices.len();
        let scale = self
            .vertices
            .iter()
            .flatten()
            .fold(0.0f64, |a, b| a.max(b.abs()))
            .max(1.0);
        (0..m).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % m], self.vertices[(i + 2) % m]) >= -1e-12 * scale * scale)
    }

    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Self> {
        Polygon::new(self.vertices.iter().map(|&v| f(v)).collect())
    }

    /// SVG path data (`M … L … Z`) with the `y` axis flipped.
    pub fn svg_path(&self) -> String {
        let mut d = String::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = write!(d, "{}{:.6} {:.6} ", if i == 0 { "M" } else { "L" }, v[0], -v[1]);
        }
        d.push('Z');
        d
    }
}

fn check_samples(m: usize) -> Result<()> {
    if m < 16 {
        return domain(format!("need at least 16 angular samples, got {m}"));
    }
    Ok(())
}

fn unit(k: usize, m: usize) -> [f64; 2] {
    let t = 2.0 * PI * k as f64 / m as f64;
    [t.cos(), t.sin()]
}

fn ball(f: &MinkowskiNorm, c: [f64; 2], r: f64, m: usize, sign: f64) -> Result<Polygon> {
    check_samples(m)?;
    if !(r > 0.0) {
        return domain("ball radius must be positive");
    }
    let verts = (0..m)
        .map(|k| {
            let u = unit(k, m);
            let t = r / f.eval(u);
            [c[0] + sign * t * u[0], c[1] + sign * t * u[1]]
        })
        .collect();
    let p = Polygon::new(verts)?;
    if !p.is_convex() {
        return Err(Error::Domain(format!("ball of {f:?} is not convex at m = {m}")));
    }
    Ok(p)
}

/// `B⁺(x, r)`: vertices `x + r u_θ / F(u_θ)`.
pub fn forward_ball(f: &MinkowskiNorm, x: [f64; 2], r: f64, m: usize) -> Result<Polygon> {
    ball(f, x, r, m, 1.0)
}

/// `B⁻(y, R)`: vertices `y − R u_θ / F(u_θ)`.
pub fn backward_ball(f: &MinkowskiNorm, y: [f64; 2], big_r: f64, m: usize) -> Result<Polygon> {
    ball(f, y, big_r, m, -1.0)
}

/// Starts the vertex cycle at the lowest (then leftmost) vertex.
fn rotate_to_bottom(v: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let start = (0..v.len())
        .min_by(|&i, &j| v[i][1].total_cmp(&v[j][1]).then(v[i][0].total_cmp(&v[j][0])))
        .unwrap();
    v[start..].iter().chain(&v[..start]).copied().collect()
}

/// Angle of an edge vector in `[0, 2π)`.
fn edge_angle(e: [f64; 2]) -> f64 {
    let a = e[1].atan2(e[0]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Exact `(1−s)A + sB` for convex polygons by merging edge sequences.
pub fn polygon_minkowski_interpolation(a: &Polygon, b: &Polygon, s: f64) -> Result<Polygon> {
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("s = {s} outside [0,1]"));
    }
    if !a.is_convex() || !b.is_convex() {
        return Err(Error::Unsupported("Minkowski interpolation needs convex polygons".into()));
    }
    let scale = |p: &Polygon, t: f64| -> Vec<[f64; 2]> { rotate_to_bottom(&p.vertices.iter().map(|v| [t * v[0], t * v[1]]).collect::<Vec<_>>()) };
    let (pa, pb) = (scale(a, 1.0 - s), scale(b, s));
    let edges = |p: &[[f64; 2]]| -> Vec<[f64; 2]> {
        (0..p.len())
            .map(|i| {
                let (u, w) = (p[i], p[(i + 1) % p.len()]);
                [w[0] - u[0], w[1] - u[1]]
            })
            .filter(|e| e[0] != 0.0 || e[1] != 0.0)
            .collect()
    };
    let (ea, eb) = (edges(&pa), edges(&pb));
    let mut out = Vec::with_capacity(ea.len() + eb.len());
    let mut cur = [pa[0][0] + pb[0][0], pa[0][1] + pb[0][1]];
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        out.push(cur);
        let (ang_a, ang_b) = (
            ea.get(i).map_or(f64::INFINITY, |&e| edge_angle(e)),
            eb.get(j).map_or(f64::INFINITY, |&e| edge_angle(e)),
        );
        // parallel edges (up to rounding) combine into one
        let e = if (ang_a - ang_b).abs() <= 1e-12 {
            i += 1;
            j += 1;
            [ea[i - 1][0] + eb[j - 1][0], ea[i - 1][1] + eb[j - 1][1]]
        } else if ang_a < ang_b {
            i += 1;
            ea[i - 1]
        } else {
            j += 1;
            eb[j - 1]
        };
        cur = [cur[0] + e[0], cur[1] + e[1]];
    }
    // drop collinear vertices produced by parallel edges
    let m = out.len();
    let keep: Vec<[f64; 2]> = (0..m)
        .filter(|&k| cross(out[(k + m - 1) % m], out[k], out[(k + 1) % m]).abs() > 0.0)
        .map(|k| out[k])
        .collect();
    Polygon::new(keep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiBm {
    /// `area(Z_s)^{1/2}`.
    pub lhs: f64,
    /// `(1−s) area(A)^{1/2} + s area(B)^{1/2}`.
    pub rhs: f64,
    pub deficit: f64,
    /// `10·(|Δlhs| + (1−s)|Δ√area A| + s|Δ√area B|)` between `m` and `2m`.
    pub tolerance: f64,
}

fn bm_terms(f: &MinkowskiNorm, x: [f64; 2], r: f64, y: [f64; 2], big_r: f64, s: f64, m: usize) -> Result<(f64, f64, f64)> {
    let a = forward_ball(f, x, r, m)?;
    let b = backward_ball(f, y, big_r, m)?;
    let z = polygon_minkowski_interpolation(&a, &b, s)?;
    Ok((z.area().sqrt(), a.area().sqrt(), b.area().sqrt()))
}

/// Brunn-Minkowski deficit of `A = B⁺(x,r)`, `B = B⁻(y,R)`.
#[allow(clippy::too_many_arguments)]
pub fn minkowski_bm_deficit(
    f: &MinkowskiNorm,
    x: [f64; 2],
    r: f64,
    y: [f64; 2],
    big_r: f64,
    s: f64,
    m: usize,
) -> Result<MinkowskiBm> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} outside (0,1)"));
    }
    let (z1, a1, b1) = bm_terms(f, x, r, y, big_r, s, m)?;
    let (z2, a2, b2) = bm_terms(f, x, r, y, big_r, s, 2 * m)?;
    let rhs = (1.0 - s) * a1 + s * b1;
    Ok(MinkowskiBm {
        lhs: z1,
        rhs,
        deficit: z1 - rhs,
        tolerance: 10.0 * ((z2 - z1).abs() + (1.0 - s) * (a2 - a1).abs() + s * (b2 - b1).abs()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomothetyTest {
    pub homothetic: bool,
    /// `max_k |F(q_k)/R − 1|` over backward-ball vertices mapped into the
    /// rescaled forward ball's frame.
    pub residual: f64,
    /// Fitted translation taking `(R/r)·B⁺(x,r)` onto `B⁻(y,R)`.
    pub translation: [f64; 2],
}

/// Whether `B⁻(y,R)` is a translate of `(R/r)·B⁺(x,r)`.
///
/// The translation starts at the centroid difference and is refined by
/// Gauss-Newton on the radial residuals `F(p_k − t − (R/r)x) − R`, so the
/// residual measures shape, not the centroid error of inscribed polygons.
pub fn homothety_test(f: &MinkowskiNorm, x: [f64; 2], r: f64, y: [f64; 2], big_r: f64, m: usize) -> Result<HomothetyTest> {
    let a = forward_ball(f, x, r, m)?.map(|v| [v[0] * big_r / r, v[1] * big_r / r])?;
    let b = backward_ball(f, y, big_r, m)?;
    let (ca, cb) = (a.centroid(), b.centroid());
    let mut t = [cb[0] - ca[0], cb[1] - ca[1]];
    let base = [x[0] * big_r / r, x[1] * big_r / r];
    let resid = |t: [f64; 2], p: [f64; 2]| f.eval([p[0] - t[0] - base[0], p[1] - t[1] - base[1]]) / big_r - 1.0;
    for _ in 0..20 {
        // normal equations of the 2-parameter least-squares problem
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        let eps = 1e-7 * big_r;
        for &p in b.vertices() {
            let r0 = resid(t, p);
            let gx = (resid([t[0] + eps, t[1]], p) - resid([t[0] - eps, t[1]], p)) / (2.0 * eps);
            let gy = (resid([t[0], t[1] + eps], p) - resid([t[0], t[1] - eps], p)) / (2.0 * eps);
            jtj[0][0] += gx * gx;
            jtj[0][1] += gx * gy;
            jtj[1][1] += gy * gy;
            jtr[0] += gx * r0;
            jtr[1] += gy * r0;
        }
        jtj[1][0] = jtj[0][1];
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let dt = [
            (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det,
            (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det,
        ];
        t = [t[0] - dt[0], t[1] - dt[1]];
        if dt[0].hypot(dt[1]) < 1e-15 * big_r {
            break;
        }
    }
    let residual = b.vertices().iter().map(|&p| resid(t, p).abs()).fold(0.0, f64::max);
    Ok(HomothetyTest {
        homothetic: residual <= HOMOTHETY_TOL,
        residual,
        translation: t,
    })
}

/// SVG 1.1 document drawing the given polygons, one color each.
pub fn svg_document(polygons: &[(&Polygon, &str)], title: &str) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for (p, _) in polygons {
        for v in p.vertices() {
            let fv = [v[0], -v[1]];
            for a in 0..2 {
                lo[a] = lo[a].min(fv[a]);
                hi[a] = hi[a].max(fv[a]);
            }
        }
    }
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="480" height="{:.0}" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        480.0 * h / w,
        lo[0] - pad,
        lo[1] - pad,
        w,
        h
    );
    let _ = writeln!(out, "  <title>{title}</title>");
    for (p, color) in polygons {
        let _ = writeln!(
            out,
            r#"  <path d="{}" fill="none" stroke="{color}" stroke-width="{stroke:.6}"/>"#,
            p.svg_path()
        );
    }
    out.push_str("</svg>\n");
    out
}
