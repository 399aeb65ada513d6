//! Residuals of the equality characterization and of the curvature
//! rigidity identities, evaluated on the couplings of a transport plan.
//!
//! The Jacobian condition is checked at the level of measures: a discrete
//! plan has no pointwise Jacobian, but `m(ψ_s(supp f))` and its integral
//! representation are both computable.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{pair_terms, setup, GridDensity, PairTerm};
use crate::error::{Error, Result};
use crate::modelspace::sk;
use crate::ot::TransportPlan;
use crate::pmeans::{mean, Exponent};
use crate::sets::DiscreteSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityDiagnostics {
    /// `m(supp h Δ ψ_s(supp f)) / m(supp h)`.
    pub support_residual: f64,
    /// Relative mismatch of the measure identity for `ψ_s(supp f)`.
    pub measure_residual: f64,
    /// Mass-weighted relative mismatch of the pointwise ratio identity.
    pub ratio_residual: f64,
    /// `|‖f‖ − ‖g‖| / max` (only at `p = −1/n`).
    pub mass_balance_residual: Option<f64>,
}

impl EqualityDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.support_residual
            .max(self.measure_residual)
            .max(self.ratio_residual)
            .max(self.mass_balance_residual.unwrap_or(0.0))
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// `ψ_s(supp f)` as the closed set of cells hit by coupled interpolants.
fn displaced_support(h: &GridDensity, terms: &[PairTerm], s: f64) -> Result<(DiscreteSet, Vec<Option<usize>>)> {
    let m = h.space();
    let mut hit = BTreeSet::new();
    let cells: Vec<Option<usize>> = terms
        .iter()
        .map(|t| {
            let c = h.grid.locate(&m.geodesic_unchecked(&t.x, &t.y, s));
            if let Some(c) = c {
                hit.insert(c);
            }
            c
        })
        .collect();
    // closing fills the holes a sparse plan leaves between interpolants;
    // the union keeps hit cells on the grid's rim, which erosion drops
    let raw = DiscreteSet::from_cells(&h.grid, hit.iter().copied())?;
    let closed = raw.dilate()?.erode()?;
    let set = DiscreteSet::from_cells(&h.grid, hit.into_iter().chain(closed.cells().iter().copied()))?;
    Ok((set, cells))
}

fn sym_diff_measure(a: &DiscreteSet, b: &DiscreteSet) -> Result<f64> {
    let g = a.grid().ok_or_else(|| Error::Unsupported("grid mask expected".into()))?;
    let mut total = 0.0;
    for &i in a.cells() {
        if !b.contains_cell(i) {
            total += g.volume(i);
        }
    }
    for &i in b.cells() {
        if !a.contains_cell(i) {
            total += g.volume(i);
        }
    }
    Ok(total)
}

/// Relative residual of `r1 = r2 = r3`, measured against `r2`.
fn three_way(r1: f64, r2: f64, r3: f64) -> f64 {
    (r1 - r2).abs().max((r3 - r2).abs()) / r2
}

/// Exponent `1/(pn+1)` of the normalized ratios (0 at `p = +∞`).
fn ratio_exponent(p: Exponent, n: u32) -> f64 {
    if p.is_pos_inf() {
        0.0
    } else {
        1.0 / (p.value() * n as f64 + 1.0)
    }
}

/// `[M_s^{p/(pn+1)}(F, G)]^{1/(pn+1)}` (1 at `p = +∞`).
fn ratio_norm(s: f64, p: Exponent, n: u32, mf: f64, mg: f64) -> f64 {
    if p.is_pos_inf() {
        return 1.0;
    }
    let pv = p.value();
    let q = pv / (pv * n as f64 + 1.0);
    mean(s, q, mf, mg).powf(ratio_exponent(p, n))
}

/// Residuals of the equality conditions: support match, measure identity,
/// ratio identity, and (at `p = −1/n`) mass balance.
pub fn equality_diagnostics(
    f: &GridDensity,
    g: &GridDensity,
    h: &GridDensity,
    s: f64,
    p: Exponent,
    plan: &TransportPlan,
) -> Result<EqualityDiagnostics> {
    let (n, p) = setup(f, g, s, p)?;
    if h.space() != f.space() {
        return Err(Error::Mismatch("densities live on different spaces".into()));
    }
    let m = f.space();
    let terms = pair_terms(f, g, plan)?;
    let (mf, mg) = (f.mass(), g.mass());
    let lower = p.is_lower_endpoint(n);

    let supp_h = h.support()?;
    let (displaced, cells) = displaced_support(h, &terms, s)?;
    let mh = supp_h.raw_measure()?;
    let support_residual = if mh > 0.0 {
        sym_diff_measure(&supp_h, &displaced)? / mh
    } else {
        1.0
    };

    let hval = |c: Option<usize>| c.map_or(0.0, |c| h.value(c));
    let lhs = displaced.raw_measure()?;
    let mut rhs = 0.0;
    let mut ratio = 0.0;
    let mut weight = 0.0;
    let e = ratio_exponent(p, n);
    let norm = ratio_norm(s, p, n, mf, mg);
    for (t, &c) in terms.iter().zip(&cells) {
        if !(t.fx > 0.0) {
            continue;
        }
        let v1 = m.vol_distortion_at(1.0 - s, t.d)?;
        let vs = m.vol_distortion_at(s, t.d)?;
        let hz = hval(c);
        // t.mass / f̃(x) is the cell volume carried by this coupling
        let dvol = t.mass * mf / t.fx;
        if lower {
            if hz > 0.0 {
                rhs += dvol * t.fx / hz;
            }
            let want = mean(s, p.value(), t.fx / v1, t.gy / vs);
            ratio += t.mass * if want > 0.0 { (hz - want).abs() / want } else { 1.0 };
        } else {
            rhs += dvol * v1;
            let r1 = hz / norm;
            let r2 = t.fx / (v1 * mf.powf(e));
            let r3 = t.gy / (vs * mg.powf(e));
            ratio += t.mass * three_way(r1, r2, r3);
        }
        weight += t.mass;
    }
    if !lower {
        let pv = p.value();
        let factor = if p.is_pos_inf() {
            mean(s, 1.0 / n as f64, 1.0, mg / mf)
        } else {
            let q = pv / (pv * n as f64 + 1.0);
            mean(s, q, 1.0, mg / mf).powf(pv * n as f64 / (pv * n as f64 + 1.0))
        };
        rhs *= factor;
    }
    let measure_residual = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { 1.0 };
    Ok(EqualityDiagnostics {
        support_residual,
        measure_residual,
        ratio_residual: if weight > 0.0 { ratio / weight } else { 1.0 },
        mass_balance_residual: lower.then(|| (mf - mg).abs() / mf.max(mg)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureResiduals {
    /// Mismatch of the ratio identities written with the comparison
    /// coefficients of curvature `k` in place of `v_s`.
    pub identity_residual: f64,
    /// Mass-weighted `|v_s / (s_k(s d)/s_k(d))^{n−1} − 1|` (plus the `1−s` term).
    pub distortion_residual: f64,
}

/// Rigidity identities along coupled geodesics for comparison curvature `k`.
pub fn curvature_equality_residuals(
    f: &GridDensity,
    g: &GridDensity,
    h: &GridDensity,
    s: f64,
    p: Exponent,
    plan: &TransportPlan,
    k: f64,
) -> Result<CurvatureResiduals> {
    let (n, p) = setup(f, g, s, p)?;
    let m = f.space();
    let terms = pair_terms(f, g, plan)?;
    let (mf, mg) = (f.mass(), g.mass());
    let e = ratio_exponent(p, n);
    let norm = ratio_norm(s, p, n, mf, mg);
    let nm1 = n as i32 - 1;
    let mut ident = 0.0;
    let mut dist = 0.0;
    let mut weight = 0.0;
    for t in &terms {
        if !(t.fx > 0.0) {
            continue;
        }
        let z = m.geodesic_unchecked(&t.x, &t.y, s);
        let hz = h.at(&z);
        // comparison coefficients (s_k(sd)/s_k(d))^{n-1}
        let (c1, cs) = if t.d == 0.0 {
            (1.0, 1.0)
        } else {
            let skd = sk(k, t.d)?;
            ((sk(k, (1.0 - s) * t.d)? / skd).powi(nm1), (sk(k, s * t.d)? / skd).powi(nm1))
        };
        let r = if p.is_lower_endpoint(n) {
            let want = mean(s, p.value(), t.fx / c1, t.gy / cs);
            if want > 0.0 {
                (hz - want).abs() / want
            } else {
                1.0
            }
        } else {
            three_way(hz / norm, t.fx / (c1 * mf.powf(e)), t.gy / (cs * mg.powf(e)))
        };
        let v1 = m.vol_distortion_at(1.0 - s, t.d)?;
        let vs = m.vol_distortion_at(s, t.d)?;
        ident += t.mass * r;
        dist += t.mass * ((v1 / c1 - 1.0).abs() + (vs / cs - 1.0).abs());
        weight += t.mass;
    }
    let w = if weight > 0.0 { weight } else { 1.0 };
    Ok(CurvatureResiduals {
        identity_residual: ident / w,
        distortion_residual: dist / w,
    })
}
