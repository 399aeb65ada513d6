//! Seeded fixture generators: gap-function samples, rasterized concave
//! profiles, truncated Gaussians, random boxes and convex polygons.

use rand::{Rng, SeedableRng};

use crate::bbl::GridDensity;
use crate::error::Result;
use crate::gap::GapInput;
use crate::grid::Grid;
use crate::modelspace::Point;
use crate::pmeans::Exponent;
use crate::sets::{convex_hull, inside_convex};

/// Dimensions covered by [`gap_sample`].
pub const SAMPLE_DIMS: [u32; 4] = [1, 2, 3, 5];

/// The exponent grid of the gap-function suite for dimension `n`.
pub fn sample_exponents(n: u32) -> [Exponent; 9] {
    [
        Exponent::lower_endpoint(n),
        Exponent::ratio(-1, 2 * n as i64).expect("valid ratio"),
        Exponent::finite(-1e-3),
        Exponent::finite(0.0),
        Exponent::finite(1e-3),
        Exponent::finite(0.5),
        Exponent::finite(1.0),
        Exponent::finite(3.0),
        Exponent::PosInf,
    ]
}

/// Log-uniform in `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// A random gap input: `p` from the exponent grid, `n` from
/// [`SAMPLE_DIMS`], `s ∈ {0.1, …, 0.9}`, arguments log-uniform in `[1e-3, 1e3]`.
pub fn gap_sample(rng: &mut impl Rng) -> GapInput {
    let n = SAMPLE_DIMS[rng.gen_range(0..SAMPLE_DIMS.len())];
    let ps = sample_exponents(n);
    let p = ps[rng.gen_range(0..ps.len())];
    let s = rng.gen_range(1..=9) as f64 / 10.0;
    let mut arg = || log_uniform(rng, 1e-3, 1e3);
    let (a, b, c, d) = (arg(), arg(), arg(), arg());
    GapInput::new(s, p, n, a, b, c, d).expect("sample lies in the gap domain")
}

/// `count` gap inputs from a ChaCha8 stream seeded with `seed`.
pub fn gap_samples(seed: u64, count: usize) -> Vec<GapInput> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gap_sample(&mut rng)).collect()
}

/// `height·(1 + bump·q(x))` on `[lo, hi]` with `q` a normalized concave
/// quadratic, zero elsewhere. Concave on its support, hence `p`-concave for
/// every `p <= 1`.
pub fn concave_profile_1d(grid: &Grid, lo: f64, hi: f64, height: f64, bump: f64) -> Result<GridDensity> {
    GridDensity::from_fn(grid, |x| {
        let t = x.coords()[0];
        if t >= lo && t < hi {
            let u = (t - lo) / (hi - lo);
            height * (1.0 + 4.0 * bump * u * (1.0 - u))
        } else {
            0.0
        }
    })
}

/// A random concave profile on a random interval inside `[lo, hi]`.
pub fn random_concave_1d(rng: &mut impl Rng, grid: &Grid, lo: f64, hi: f64) -> Result<GridDensity> {
    let span = hi - lo;
    let w = rng.gen_range(0.2..0.45) * span;
    let a = lo + rng.gen_range(0.0..(span - w));
    concave_profile_1d(grid, a, a + w, rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0))
}

/// Concave tent-like profile on a box: `height·(1 + bump·Π_i q_i(x_i)^{1/n})`,
/// the geometric mean of concave factors being concave.
pub fn concave_profile_box(grid: &Grid, lo: &[f64], hi: &[f64], height: f64, bump: f64) -> Result<GridDensity> {
    let n = lo.len();
    GridDensity::from_fn(grid, |x| {
        let c = x.coords();
        let mut prod = 1.0;
        for a in 0..n {
            if c[a] < lo[a] || c[a] >= hi[a] {
                return 0.0;
            }
            let u = (c[a] - lo[a]) / (hi[a] - lo[a]);
            prod *= 4.0 * u * (1.0 - u);
        }
        height * (1.0 + bump * prod.powf(1.0 / n as f64))
    })
}

/// Gaussian `exp(−|x−c|²/2σ²)` truncated to a box (log-concave).
pub fn truncated_gaussian(grid: &Grid, lo: &[f64], hi: &[f64], center: &[f64], sigma: f64) -> Result<GridDensity> {
    GridDensity::from_fn(grid, |x| {
        let c = x.coords();
        let mut r2 = 0.0;
        for a in 0..lo.len() {
            if c[a] < lo[a] || c[a] >= hi[a] {
                return 0.0;
            }
            r2 += (c[a] - center[a]).powi(2);
        }
        (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

/// Random axis-parallel box `[lo, hi]` inside `[0, extent]^n` with sides in
/// `[min_side, max_side]`.
pub fn random_box(rng: &mut impl Rng, n: usize, extent: f64, min_side: f64, max_side: f64) -> (Vec<f64>, Vec<f64>) {
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        let side = rng.gen_range(min_side..max_side);
        let a = rng.gen_range(0.0..(extent - side));
        lo.push(a);
        hi.push(a + side);
    }
    (lo, hi)
}

/// Counterclockwise convex polygon: hull of `k` random points on an
/// ellipse-ish annulus around `center`.
pub fn random_convex_polygon(rng: &mut impl Rng, center: [f64; 2], radius: f64, k: usize) -> Vec<[f64; 2]> {
    let stretch = rng.gen_range(0.5..1.5);
    let pts: Vec<[f64; 2]> = (0..k.max(3))
        .map(|_| {
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = radius * rng.gen_range(0.7..1.0);
            [center[0] + r * stretch * t.cos(), center[1] + r / stretch * t.sin()]
        })
        .collect();
    let hull = convex_hull(pts);
    if hull.len() >= 3 {
        hull
    } else {
        // degenerate draw: fall back to a triangle
        vec![
            [center[0] - radius, center[1] - radius],
            [center[0] + radius, center[1] - radius],
            [center[0], center[1] + radius],
        ]
    }
}

/// Indicator of a convex polygon on a grid.
pub fn polygon_indicator(grid: &Grid, verts: &[[f64; 2]]) -> Result<GridDensity> {
    GridDensity::from_fn(grid, |x: &Point| {
        let c = x.coords();
        if inside_convex(verts, [c[0], c[1]]) {
            1.0
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspace::ModelSpace;
    use crate::pmeans::mean;

    #[test]
    fn gap_samples_are_deterministic() {
        let draw = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| gap_sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn profiles_are_concave() {
        let e = ModelSpace::euclidean(2).unwrap();
        let g = Grid::covering(e, &[0.0, 0.0], &[1.0, 1.0], 1.0 / 32.0).unwrap();
        let f = concave_profile_box(&g, &[0.1, 0.2], &[0.9, 0.7], 1.0, 1.5).unwrap();
        let supp = f.support_cells();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let i = supp[rng.gen_range(0..supp.len())];
            let j = supp[rng.gen_range(0..supp.len())];
            let (x, y) = (g.center(i), g.center(j));
            let mid = Point::new(&[0.5 * (x.coords()[0] + y.coords()[0]), 0.5 * (x.coords()[1] + y.coords()[1])]);
            // concave ⇒ (1/2,1)-concave, up to cell snapping of the midpoint
            let want = mean(0.5, 1.0, f.value(i), f.value(j));
            assert!(f.at(&mid) >= want - 0.2, "{} {want}", f.at(&mid));
        }
    }

    #[test]
    fn polygons_are_convex_ccw() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_convex_polygon(&mut rng, [1.0, 1.0], 0.5, 8);
            let poly = crate::finsler::Polygon::new(p).unwrap();
            assert!(poly.is_convex());
        }
    }
}
