//! Homothety normal form of the equality case on Euclidean space:
//! construction of equality triples from a profile `Φ`, and fitting of
//! `(c0, x0, t)` back from a triple.

use serde::{Deserialize, Serialize};

use super::{check_s, GridDensity};
use crate::error::{domain, Error, Result};
use crate::grid::Grid;
use crate::modelspace::{Kind, Point};
use crate::pmeans::{mean, Exponent};
use crate::sets::{convexity_residual, homothety_fit, DiscreteSet, HOMOTHETY_H_FACTOR};

/// Most cells sampled per axis of the concavity check.
const CONCAVITY_SAMPLES: usize = 160;

/// Value factors `(g, h)` of the normal form for scale `c0`.
fn factors(s: f64, p: Exponent, n: u32, c0: f64) -> (f64, f64) {
    let nf = n as f64;
    if p.is_pos_inf() || p.is_zero() {
        (1.0, 1.0)
    } else if p.is_lower_endpoint(n) {
        (c0.powf(-nf), mean(s, -1.0 / nf, 1.0, c0.powf(-nf)))
    } else {
        let pv = p.value();
        let pn1 = pv * nf + 1.0;
        (c0.powf(1.0 / pv), mean(s, pv / pn1, 1.0, c0.powf(pn1 / pv)).powf(1.0 / pn1))
    }
}

fn require_euclidean(grid: &Grid) -> Result<()> {
    if grid.space.kind != Kind::Euclidean {
        return Err(Error::Unsupported("normal form needs euclidean space".into()));
    }
    Ok(())
}

/// `f = Φ`, `g(c0 x + x0) = c0^{1/p} Φ(x)` and
/// `h((1−s+s c0) x + s x0) = [M_s^{p/(pn+1)}(1, c0^{(pn+1)/p})]^{1/(pn+1)} Φ(x)`,
/// resampled on `Φ`'s grid.
pub fn dubuc_construct(
    phi: &GridDensity,
    s: f64,
    p: Exponent,
    c0: f64,
    x0: &[f64],
) -> Result<(GridDensity, GridDensity, GridDensity)> {
    check_s(s)?;
    require_euclidean(&phi.grid)?;
    let n = phi.space().n;
    let p = p.for_dimension(n as u32)?;
    if !(c0 > 0.0) || !c0.is_finite() {
        return domain(format!("c0 = {c0} must be positive"));
    }
    if x0.len() != n {
        return Err(Error::Mismatch("x0 has the wrong dimension".into()));
    }
    if p.is_zero() && (c0 - 1.0).abs() > 1e-12 {
        return domain("p = 0 requires c0 = 1");
    }
    let supp = phi.support()?;
    if supp.is_empty() {
        return domain("profile has empty support");
    }
    let conv = convexity_residual(&supp)?;
    if conv > HOMOTHETY_H_FACTOR * phi.grid.h() {
        return domain(format!("profile support is not convex (residual {conv})"));
    }
    let (gf, hf) = factors(s, p, n as u32, c0);
    let lam = 1.0 - s + s * c0;
    let pull = |scale: f64, shift: f64, y: &Point| {
        let pre: Vec<f64> = y.coords().iter().zip(x0).map(|(yi, xi)| (yi - shift * xi) / scale).collect();
        phi.at(&Point::new(&pre))
    };
    let g = GridDensity::from_fn(&phi.grid, |y| gf * pull(c0, 1.0, y))?;
    let h = GridDensity::from_fn(&phi.grid, |z| hf * pull(lam, s, z))?;
    Ok((phi.clone(), g, h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DubucFit {
    pub c0: f64,
    pub x0: Vec<f64>,
    pub t: f64,
    pub convexity_residual: f64,
    /// `m(supp g Δ (c0 supp f + x0)) / m(supp g)`.
    pub support_residual_g: f64,
    /// Same for `supp h` against `(1−s+s c0) supp f + s x0`.
    pub support_residual_h: f64,
    /// Mass-weighted relative mismatch of the value relations (interior cells).
    pub function_residual: f64,
    /// `max (M_t^p(Φ(x),Φ(y)) − Φ((1−t)x+ty))₊ / max Φ` over sampled pairs.
    pub concavity_residual: f64,
    /// Residual threshold `8h` used for `ok` (convexity, supports, concavity).
    pub threshold: f64,
    pub ok: bool,
}

/// Relative symmetric difference between `b` and the image `c·a + x`.
fn image_residual(a: &DiscreteSet, b: &DiscreteSet, c: f64, x: &[f64]) -> Result<f64> {
    let (ga, gb) = (a.grid().unwrap(), b.grid().unwrap());
    let mb = b.raw_measure()?;
    let mut sym = 0.0;
    for i in 0..gb.len() {
        let z = gb.center(i);
        let pre: Vec<f64> = z.coords().iter().zip(x).map(|(zi, xi)| (zi - xi) / c).collect();
        let inside = ga.locate(&Point::new(&pre)).is_some_and(|j| a.contains_cell(j));
        if inside != b.contains_cell(i) {
            sym += gb.volume(i);
        }
    }
    Ok(if mb > 0.0 { sym / mb } else { 1.0 })
}

/// Mean relative mismatch of `target(c·x + x) = factor·f(x)` over cells
/// whose image lands in the interior of the target's support.
fn relation_residual(f: &GridDensity, inner_f: &DiscreteSet, target: &GridDensity, c: f64, x: &[f64], factor: f64) -> Result<f64> {
    let inner_t = target.support()?.erode()?;
    let (mut acc, mut w) = (0.0, 0.0);
    for &i in inner_f.cells() {
        let y: Vec<f64> = f.grid.center(i).coords().iter().zip(x).map(|(xi, x0)| c * xi + x0).collect();
        let Some(j) = target.grid.locate(&Point::new(&y)) else { continue };
        if !inner_t.contains_cell(j) {
            continue;
        }
        let want = factor * f.value(i);
        let wt = f.value(i) * f.grid.volume(i);
        acc += wt * (target.value(j) - want).abs() / want;
        w += wt;
    }
    Ok(if w > 0.0 { acc / w } else { 0.0 })
}

/// Recovers `(c0, x0, t)` and checks the normal-form relations.
pub fn dubuc_fit(f: &GridDensity, g: &GridDensity, h: &GridDensity, s: f64, p: Exponent) -> Result<DubucFit> {
    check_s(s)?;
    for d in [f, g, h] {
        require_euclidean(&d.grid)?;
    }
    let n = f.space().n as u32;
    let p = p.for_dimension(n)?;
    let (a, b, c) = (f.support()?, g.support()?, h.support()?);
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return domain("normal-form fit needs nonempty supports");
    }
    let step = f.grid.h().max(g.grid.h()).max(h.grid.h());
    let threshold = HOMOTHETY_H_FACTOR * step;
    let conv = convexity_residual(&a)?;
    let fit = homothety_fit(&a, &b)?;
    let (c0, x0) = (fit.c0, fit.x0);
    let t = s * c0 / (1.0 - s + s * c0);
    let lam = 1.0 - s + s * c0;
    let sx0: Vec<f64> = x0.iter().map(|v| s * v).collect();
    let support_residual_g = image_residual(&a, &b, c0, &x0)?;
    let support_residual_h = image_residual(&a, &c, lam, &sx0)?;

    let (gf, hf) = factors(s, p, n, c0);
    let inner = a.erode()?;
    let function_residual = relation_residual(f, &inner, g, c0, &x0, gf)?
        .max(relation_residual(f, &inner, h, lam, &sx0, hf)?);

    // (t,p)-concavity of Φ = f on a strided sample of support pairs
    let cells = a.cells();
    let stride = cells.len().div_ceil(CONCAVITY_SAMPLES).max(1);
    let sample: Vec<usize> = cells.iter().copied().step_by(stride).collect();
    let fmax = f.max();
    let mut conc: f64 = 0.0;
    if t > 0.0 && t < 1.0 {
        for &i in &sample {
            let x = f.grid.center(i);
            for &j in &sample {
                let y = f.grid.center(j);
                let z: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(u, v)| (1.0 - t) * u + t * v).collect();
                let want = mean(t, p.value(), f.value(i), f.value(j));
                conc = conc.max((want - f.at(&Point::new(&z))) / fmax);
            }
        }
    }
    let ok = [conv, support_residual_g, support_residual_h, conc].iter().all(|&r| r <= threshold);
    Ok(DubucFit {
        c0,
        x0,
        t,
        convexity_residual: conv,
        support_residual_g,
        support_residual_h,
        function_residual,
        concavity_residual: conc.max(0.0),
        threshold,
        ok,
    })
}
