//! Borell-Brascamp-Lieb deficits on grids, the admissible (minimal) `h`,
//! the transport lower bound and the discretization error model.

mod brunn;
mod dubuc;
mod equality;

pub use brunn::{
    distorted_bm, distorted_bm_densities, holder_integral_check, quantitative_bm, quantitative_bm_from_measures,
    DistortedBm, HolderIntegral, QuantitativeBm,
};
pub use dubuc::{dubuc_construct, dubuc_fit, DubucFit};
pub use equality::{curvature_equality_residuals, equality_diagnostics, CurvatureResiduals, EqualityDiagnostics};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gap::{gap, GapInput};
use crate::grid::Grid;
use crate::modelspace::{ModelSpace, Point};
use crate::ot::{TransportPlan, WeightedCloud};
use crate::pmeans::{bbl_target_exponent, mean, Exponent};
use crate::sets::{DiscreteSet, PAIR_CAP};

/// Cells below this fraction of the maximum value are outside the support.
pub const SUPPORT_REL: f64 = 1e-12;

/// Constant of the error model `C·h·Σ TV/mass`.
pub const ERROR_C: f64 = 1.0;

/// Nonnegative piecewise-constant density on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDensity {
    pub grid: Grid,
    values: Vec<f64>,
    mass: f64,
}

impl GridDensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("{} values for {} cells", values.len(), grid.len())));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return domain(format!("density value {v} must be nonnegative and finite"));
        }
        let mass = values.iter().enumerate().map(|(i, v)| v * grid.volume(i)).sum();
        Ok(GridDensity { grid, values, mass })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: &Grid, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.center(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn indicator(set: &DiscreteSet) -> Result<Self> {
        let g = set
            .grid()
            .ok_or_else(|| Error::Unsupported("indicator needs a grid mask".into()))?;
        let mut values = vec![0.0; g.len()];
        for &i in set.cells() {
            values[i] = 1.0;
        }
        Self::new(g.clone(), values)
    }

    pub fn space(&self) -> ModelSpace {
        self.grid.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `‖·‖₁` by the midpoint rule.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * c).collect())
    }

    /// Value at an arbitrary point (0 off the grid).
    pub fn at(&self, x: &Point) -> f64 {
        self.grid.locate(x).map_or(0.0, |i| self.values[i])
    }

    /// Cells with value at least `SUPPORT_REL·max`.
    pub fn support_cells(&self) -> Vec<usize> {
        let cut = SUPPORT_REL * self.max();
        (0..self.values.len()).filter(|&i| self.values[i] > 0.0 && self.values[i] >= cut).collect()
    }

    pub fn support(&self) -> Result<DiscreteSet> {
        DiscreteSet::from_cells(&self.grid, self.support_cells())
    }

    /// Normalized density `f/‖f‖` as a cloud labelled by cell index.
    pub fn cloud(&self) -> Result<WeightedCloud> {
        let cells = self.support_cells();
        let pts: Vec<Point> = cells.iter().map(|&i| self.grid.center(i)).collect();
        let w: Vec<f64> = cells.iter().map(|&i| self.values[i] * self.grid.volume(i)).collect();
        let mut c = WeightedCloud::from_weights(self.space(), &pts, &w)?;
        c.labels = c.labels.iter().map(|&k| cells[k]).collect();
        Ok(c)
    }

    /// Total variation, counting the jump to zero across the grid's rim.
    pub fn total_variation(&self) -> f64 {
        let mut tv = 0.0;
        for i in 0..self.values.len() {
            let v = self.values[i];
            for (j, face) in self.grid.face_neighbors(i) {
                if j > i {
                    tv += (v - self.values[j]).abs() * face;
                }
            }
            if v != 0.0 {
                tv += v * self.grid.boundary_face(i);
            }
        }
        tv
    }
}

fn require_mass(f: &GridDensity, name: &str) -> Result<()> {
    if !(f.mass() > 0.0) {
        return domain(format!("{name} has zero mass"));
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} outside (0,1)"));
    }
    Ok(())
}

/// Validates a triple-independent `(s, p)` against the space dimension.
fn setup(f: &GridDensity, g: &GridDensity, s: f64, p: Exponent) -> Result<(u32, Exponent)> {
    check_s(s)?;
    if f.space() != g.space() {
        return Err(Error::Mismatch("densities live on different spaces".into()));
    }
    let n = f.space().n as u32;
    Ok((n, p.for_dimension(n)?))
}

/// `δ = ‖h‖ / M_s^{p/(1+pn)}(‖f‖, ‖g‖) − 1`.
pub fn deficit(f: &GridDensity, g: &GridDensity, h: &GridDensity, s: f64, p: Exponent) -> Result<f64> {
    let (n, p) = setup(f, g, s, p)?;
    if h.space() != f.space() {
        return Err(Error::Mismatch("densities live on different spaces".into()));
    }
    for (d, name) in [(f, "f"), (g, "g"), (h, "h")] {
        require_mass(d, name)?;
    }
    let pt = bbl_target_exponent(p, n)?;
    Ok(h.mass() / mean(s, pt.value(), f.mass(), g.mass()) - 1.0)
}

/// Smallest grid `h` satisfying the pointwise condition on all cell-center
/// pairs; several interpolants snapping to one cell take the max.
pub fn admissible_h(f: &GridDensity, g: &GridDensity, s: f64, p: Exponent) -> Result<GridDensity> {
    let (_, p) = setup(f, g, s, p)?;
    let m = f.space();
    let (fc, gc) = (f.support_cells(), g.support_cells());
    let pairs = fc.len().saturating_mul(gc.len());
    if pairs > PAIR_CAP {
        return Err(Error::SizeCap(format!("{pairs} pairs exceed {PAIR_CAP}")));
    }
    let pv = p.value();
    let gpts: Vec<Point> = gc.iter().map(|&j| g.grid.center(j)).collect();
    let mut out = vec![0.0; f.grid.len()];
    for &i in &fc {
        let x = f.grid.center(i);
        for (y, &j) in gpts.iter().zip(&gc) {
            if m.is_cut_pair(&x, y) {
                return Err(Error::CutLocus(format!("cut-locus pair {x:?}, {y:?}")));
            }
            let d = m.dist_unchecked(&x, y);
            let a = f.values[i] / m.vol_distortion_at(1.0 - s, d)?;
            let b = g.values[j] / m.vol_distortion_at(s, d)?;
            let z = m.geodesic_unchecked(&x, y, s);
            let cell = f
                .grid
                .locate(&z)
                .ok_or_else(|| Error::Domain(format!("interpolant {z:?} leaves the grid")))?;
            let v = mean(s, pv, a, b);
            if v > out[cell] {
                out[cell] = v;
            }
        }
    }
    GridDensity::new(f.grid.clone(), out)
}

/// Checks that the plan's clouds are the supports of `f` and `g`.
fn check_plan(f: &GridDensity, g: &GridDensity, plan: &TransportPlan) -> Result<()> {
    for (d, c, name) in [(f, &plan.source, "source"), (g, &plan.target, "target")] {
        if c.space != d.space() {
            return Err(Error::Mismatch(format!("plan {name} lives on another space")));
        }
        for (k, &cell) in c.labels.iter().enumerate() {
            if cell >= d.grid.len() || d.grid.center(cell) != c.points[k] {
                return Err(Error::Mismatch(format!("plan {name} point {k} is not a cell of the density")));
            }
        }
    }
    Ok(())
}

/// Per-coupling quantities shared by the bound and the diagnostics.
pub(crate) struct PairTerm {
    pub mass: f64,
    pub fx: f64,
    pub gy: f64,
    pub d: f64,
    pub x: Point,
    pub y: Point,
}

pub(crate) fn pair_terms(f: &GridDensity, g: &GridDensity, plan: &TransportPlan) -> Result<Vec<PairTerm>> {
    check_plan(f, g, plan)?;
    let m = f.space();
    plan.couplings
        .iter()
        .map(|k| {
            let x = plan.source.points[k.i];
            let y = plan.target.points[k.j];
            if m.is_cut_pair(&x, &y) {
                return Err(Error::CutLocus(format!("coupled cut-locus pair {x:?}, {y:?}")));
            }
            Ok(PairTerm {
                mass: k.mass,
                fx: f.values[plan.source.labels[k.i]],
                gy: g.values[plan.target.labels[k.j]],
                d: m.dist_unchecked(&x, &y),
                x,
                y,
            })
        })
        .collect()
}

/// `Σ m_ij · G(f(x_i)/v_{1−s}, g(y_j)/v_s, 1/‖f‖, 1/‖g‖)` over couplings.
pub fn deficit_lower_bound(f: &GridDensity, g: &GridDensity, s: f64, p: Exponent, plan: &TransportPlan) -> Result<f64> {
    let (n, p) = setup(f, g, s, p)?;
    require_mass(f, "f")?;
    require_mass(g, "g")?;
    let m = f.space();
    let (c, d) = (1.0 / f.mass(), 1.0 / g.mass());
    let mut total = 0.0;
    for t in pair_terms(f, g, plan)? {
        let a = t.fx / m.vol_distortion_at(1.0 - s, t.d)?;
        let b = t.gy / m.vol_distortion_at(s, t.d)?;
        if !(a > 0.0 && b > 0.0) {
            continue;
        }
        total += t.mass * gap(&GapInput::new(s, p, n, a, b, c, d)?)?;
    }
    Ok(total)
}

/// `C·h·(TV(f)/‖f‖ + TV(g)/‖g‖ + TV(h)/‖h‖)`.
pub fn discretization_error(f: &GridDensity, g: &GridDensity, h: &GridDensity) -> f64 {
    let step = f.grid.h().max(g.grid.h()).max(h.grid.h());
    let rel = |d: &GridDensity| if d.mass() > 0.0 { d.total_variation() / d.mass() } else { 0.0 };
    ERROR_C * step * (rel(f) + rel(g) + rel(h))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficitReport {
    pub schema: &'static str,
    pub s: f64,
    pub p: String,
    pub n: u32,
    pub mass_f: f64,
    pub mass_g: f64,
    pub mass_h: f64,
    pub deficit: f64,
    pub lower_bound: f64,
    pub margin: f64,
    pub discretization_error: f64,
    /// `margin >= −discretization_error`.
    pub accepted: bool,
    pub diagnostics: EqualityDiagnostics,
    /// Every diagnostic residual within the discretization error.
    pub equality: bool,
}

/// Deficit, transport lower bound, error estimate and equality diagnostics.
pub fn analyze(
    f: &GridDensity,
    g: &GridDensity,
    h: &GridDensity,
    s: f64,
    p: Exponent,
    plan: &TransportPlan,
) -> Result<DeficitReport> {
    let n = f.space().n as u32;
    let deficit = deficit(f, g, h, s, p)?;
    let lower_bound = deficit_lower_bound(f, g, s, p, plan)?;
    let err = discretization_error(f, g, h);
    let diagnostics = equality_diagnostics(f, g, h, s, p, plan)?;
    Ok(DeficitReport {
        schema: crate::report::SCHEMA,
        s,
        p: p.to_string(),
        n,
        mass_f: f.mass(),
        mass_g: g.mass(),
        mass_h: h.mass(),
        deficit,
        lower_bound,
        margin: deficit - lower_bound,
        discretization_error: err,
        accepted: deficit - lower_bound >= -err,
        equality: diagnostics.within(err),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspace::ModelSpace;
    use crate::ot::solve_exact;
    use rand::{Rng, SeedableRng};

    fn line_grid(lo: f64, hi: f64, h: f64) -> Grid {
        Grid::covering(ModelSpace::euclidean(1).unwrap(), &[lo], &[hi], h).unwrap()
    }

    fn box_density(g: &Grid, lo: &[f64], hi: &[f64]) -> GridDensity {
        GridDensity::indicator(&DiscreteSet::boxed(g, lo, hi)).unwrap()
    }

    #[test]
    fn box_deficit() {
        let e = ModelSpace::euclidean(2).unwrap();
        let g = Grid::covering(e, &[0.0, 0.0], &[2.0, 2.0], 1.0 / 32.0).unwrap();
        let f = box_density(&g, &[0.0, 0.0], &[1.0, 1.0]);
        let gg = box_density(&g, &[0.0, 0.0], &[2.0, 2.0]);
        let h = box_density(&g, &[0.0, 0.0], &[1.5, 1.5]);
        let d = deficit(&f, &gg, &h, 0.5, Exponent::finite(0.0)).unwrap();
        assert!((d - 0.125).abs() < 1e-12, "{d}");
        for p in [Exponent::PosInf, Exponent::finite(1.0), Exponent::lower_endpoint(2)] {
            assert!(deficit(&f, &f, &f, 0.3, p).unwrap().abs() < 1e-12);
        }
        let zero = GridDensity::new(g.clone(), vec![0.0; g.len()]).unwrap();
        assert!(deficit(&zero, &f, &f, 0.5, Exponent::PosInf).is_err());
    }

    #[test]
    fn density_validation_and_tv() {
        let g = line_grid(0.0, 1.0, 0.25);
        assert!(GridDensity::new(g.clone(), vec![1.0; 3]).is_err());
        assert!(GridDensity::new(g.clone(), vec![1.0, -1.0, 0.0, 0.0]).is_err());
        let d = GridDensity::new(g.clone(), vec![0.0, 1.0, 3.0, 0.0]).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-15);
        // jumps 1, 2, 3
        assert!((d.total_variation() - 6.0).abs() < 1e-15);
        // the rim counts as a jump to zero
        let full = GridDensity::new(g, vec![1.0; 4]).unwrap();
        assert!((full.total_variation() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn admissible_h_of_indicators_is_interpolation_set() {
        let e = ModelSpace::euclidean(2).unwrap();
        let g = Grid::covering(e, &[0.0, 0.0], &[3.0, 3.0], 0.125).unwrap();
        let a = DiscreteSet::boxed(&g, &[0.0, 0.0], &[1.0, 1.0]);
        let b = DiscreteSet::boxed(&g, &[1.0, 1.0], &[3.0, 3.0]);
        let h = admissible_h(
            &GridDensity::indicator(&a).unwrap(),
            &GridDensity::indicator(&b).unwrap(),
            0.5,
            Exponent::PosInf,
        )
        .unwrap();
        assert!(h.values().iter().all(|&v| v == 0.0 || v == 1.0));
        // undilated interpolation set
        let z = crate::sets::interpolation_set(&a, &b, 0.5).unwrap().erode().unwrap();
        let cells = h.support_cells();
        for c in z.cells() {
            assert!(cells.contains(c));
        }
    }

    #[test]
    fn admissible_h_log_concave_pair_check() {
        let e = ModelSpace::euclidean(2).unwrap();
        let grid = Grid::covering(e, &[-1.5, -1.5], &[1.5, 1.5], 0.05).unwrap();
        let gauss = |c: [f64; 2], sig: f64| {
            move |x: &Point| {
                let v = x.coords();
                if v.iter().all(|t| t.abs() <= 1.0) {
                    (-((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)) / (2.0 * sig * sig)).exp()
                } else {
                    0.0
                }
            }
        };
        let f = GridDensity::from_fn(&grid, gauss([0.2, 0.0], 0.5)).unwrap();
        let g = GridDensity::from_fn(&grid, gauss([-0.3, 0.1], 0.7)).unwrap();
        let s = 0.4;
        let h = admissible_h(&f, &g, s, Exponent::finite(0.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (fc, gc) = (f.support_cells(), g.support_cells());
        for _ in 0..10_000 {
            let i = fc[rng.gen_range(0..fc.len())];
            let j = gc[rng.gen_range(0..gc.len())];
            let (x, y) = (grid.center(i), grid.center(j));
            let z = e.geodesic_point(&x, &y, s).unwrap();
            let want = f.value(i).powf(1.0 - s) * g.value(j).powf(s);
            assert!(h.at(&z) >= want * (1.0 - 1e-12));
        }
        let d = deficit(&f, &g, &h, s, Exponent::finite(0.0)).unwrap();
        assert!(d >= -discretization_error(&f, &g, &h), "{d}");
    }

    #[test]
    fn admissible_h_on_sphere_satisfies_weighted_condition() {
        let sp = ModelSpace::sphere(2, 1.0).unwrap();
        let grid = Grid::polar_with_spacing(sp, 1.2, 0.08).unwrap();
        let a = DiscreteSet::ball(&grid, &sp.from_normal_coords(&[0.5, 0.0]).unwrap(), 0.3);
        let b = DiscreteSet::ball(&grid, &sp.from_normal_coords(&[-0.4, 0.2]).unwrap(), 0.35);
        let f = GridDensity::indicator(&a).unwrap();
        let g = GridDensity::indicator(&b).unwrap().scaled(2.0).unwrap();
        let s = 0.5;
        let h = admissible_h(&f, &g, s, Exponent::finite(1.0)).unwrap();
        for &i in a.cells().iter().step_by(3) {
            for &j in b.cells().iter().step_by(3) {
                let (x, y) = (grid.center(i), grid.center(j));
                let d = sp.distance(&x, &y).unwrap();
                let want = mean(
                    s,
                    1.0,
                    1.0 / sp.vol_distortion_at(1.0 - s, d).unwrap(),
                    2.0 / sp.vol_distortion_at(s, d).unwrap(),
                );
                let z = sp.geodesic_point(&x, &y, s).unwrap();
                assert!(h.at(&z) >= want * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn lower_bound_zero_for_identical_densities() {
        let grid = line_grid(0.0, 1.0, 1.0 / 64.0);
        let f = GridDensity::from_fn(&grid, |x| 1.0 + x.coords()[0] * (1.0 - x.coords()[0])).unwrap();
        let plan = solve_exact(&f.cloud().unwrap(), &f.cloud().unwrap()).unwrap();
        for p in [Exponent::finite(0.5), Exponent::finite(0.0), Exponent::PosInf, Exponent::finite(-0.5)] {
            let lb = deficit_lower_bound(&f, &f, 0.3, p, &plan).unwrap();
            assert!(lb.abs() < 1e-12, "{p}: {lb}");
        }
    }

    #[test]
    fn lower_bound_translated_boxes_plus_infinity() {
        let grid = line_grid(0.0, 3.0, 1.0 / 64.0);
        let f = box_density(&grid, &[0.0], &[1.0]);
        let g = box_density(&grid, &[1.5], &[2.5]);
        let plan = solve_exact(&f.cloud().unwrap(), &g.cloud().unwrap()).unwrap();
        let lb = deficit_lower_bound(&f, &g, 0.5, Exponent::PosInf, &plan).unwrap();
        assert!(lb.abs() < 1e-12);
    }

    #[test]
    fn lower_bound_one_dimensional_oracle() {
        // f = 1_[0,1], g = 1_[0,2], p = 0, s = 1/2: the monotone map is
        // y = 2x, so every coupling sees a = b = 1, c = 1, d = 1/2 and the
        // integral is G(1,1,1,1/2).
        let grid = line_grid(0.0, 2.0, 1.0 / 128.0);
        let f = box_density(&grid, &[0.0], &[1.0]);
        let g = box_density(&grid, &[0.0], &[2.0]);
        let plan = solve_exact(&f.cloud().unwrap(), &g.cloud().unwrap()).unwrap();
        let p = Exponent::finite(0.0);
        let lb = deficit_lower_bound(&f, &g, 0.5, p, &plan).unwrap();
        // closed form of G^{0,1}_{1/2}(1,1,1,1/2): t = 2
        let oracle = 0.5 * (1.0 - 2f64.powf(0.5)).powi(2) / (0.5 + 0.5 * 2.0);
        assert!((lb - oracle).abs() < 1e-12, "{lb} vs {oracle}");
        let h = admissible_h(&f, &g, 0.5, p).unwrap();
        let d = deficit(&f, &g, &h, 0.5, p).unwrap();
        assert!(lb > 0.0 && lb <= d, "{lb} {d}");
    }

    #[test]
    fn plan_mismatch_is_rejected() {
        let grid = line_grid(0.0, 1.0, 0.1);
        let other = line_grid(0.05, 1.05, 0.1);
        let f = box_density(&grid, &[0.0], &[1.0]);
        let f2 = box_density(&other, &[0.0], &[1.0]);
        let plan = solve_exact(&f2.cloud().unwrap(), &f2.cloud().unwrap()).unwrap();
        assert!(matches!(
            deficit_lower_bound(&f, &f, 0.5, Exponent::PosInf, &plan),
            Err(Error::Mismatch(_))
        ));
    }
}
