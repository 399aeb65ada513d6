//! The gap function `G_s^{p,n}` of the quantitative Hölder inequality
//!
//! ```text
//! M_s^p(a,b) · M_s^{-p̃}(c,d) >= M_s^{-1/n}(ac, bd) · (1 + G_s^{p,n}(a,b,c,d))
//! ```
//!
//! and the quantitative Young inequality.
//!
//! The formulas are homogeneous of degree zero in `(a,b)` and in `(c,d)`,
//! so every regime is evaluated from the ratios `a/b`, `c/d` in log space.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::pmeans::{ln_mean, mean, Check, Exponent};

/// Exponents with `|p| < P_ZERO` use the `p = 0` formula.
pub const P_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInput {
    pub s: f64,
    pub p: Exponent,
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Which of the four formulas applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Finite,
    Zero,
    PlusInfinity,
    LowerEndpoint,
}

impl GapInput {
    #[allow(clippy::too_many_arguments)]
    pub fn new(s: f64, p: Exponent, n: u32, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let g = GapInput { s, p, n, a, b, c, d };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<Regime> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return domain(format!("s = {} outside (0,1)", self.s));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} = {v} must be positive and finite"));
            }
        }
        let p = self.p.for_dimension(self.n)?;
        Ok(regime(p, self.n))
    }

    pub fn regime(&self) -> Result<Regime> {
        self.validate()
    }

    /// Same input with `(a,b)` and `(c,d)` swapped and a new exponent.
    fn reflected(&self, p: Exponent) -> GapInput {
        GapInput {
            p,
            a: self.c,
            b: self.d,
            c: self.a,
            d: self.b,
            ..*self
        }
    }
}

fn regime(p: Exponent, n: u32) -> Regime {
    if p.is_pos_inf() {
        Regime::PlusInfinity
    } else if p.is_lower_endpoint(n) {
        Regime::LowerEndpoint
    } else if p.is_zero() || p.value().abs() < P_ZERO {
        Regime::Zero
    } else {
        Regime::Finite
    }
}

/// `|e^x - e^y|` without cancellation, in log form.
fn ln_abs_diff_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == lo {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

/// `G_s^{p,n}(a,b,c,d)`.
pub fn gap(input: &GapInput) -> Result<f64> {
    let reg = input.validate()?;
    let GapInput { s, p, n, a, b, c, d } = *input;
    let nf = n as f64;
    let st = s.min(1.0 - s);
    Ok(match reg {
        Regime::LowerEndpoint => gap(&input.reflected(Exponent::PosInf))?,
        Regime::PlusInfinity => {
            let la = (a / b).ln();
            let lg = (c / d).ln();
            // n s̃ |α^{1/n} - 1| / (α^{1/n} max(γ,1)^{1/n} ((1-s)(αγ)^{-1/n} + s))
            let num = (la / nf).exp_m1().abs();
            let den = (la / nf).exp()
                * (lg.max(0.0) / nf).exp()
                * ((1.0 - s) * (-(la + lg) / nf).exp() + s);
            nf * st * num / den
        }
        Regime::Zero => {
            // t = ac/bd: n s̃ |1 - t^{s̃/n}|^{1/s̃} / ((1-s) + s t^{1/n})
            let lt = (a / b).ln() + (c / d).ln();
            let num = (st / nf * lt).exp_m1().abs().powf(1.0 / st);
            nf * st * num / ((1.0 - s) + s * (lt / nf).exp())
        }
        Regime::Finite => {
            let pv = p.value();
            if pv < 0.0 {
                let pt = pv / (pv * nf + 1.0);
                return gap(&input.reflected(Exponent::finite(-pt)));
            }
            let pt = pv / (pv * nf + 1.0);
            let m = (pv * nf).max(1.0);
            let e1 = pv * pt * nf / m;
            let e2 = pt / m;
            let outer = m / (pt * nf);
            let la = (a / b).ln();
            // β = bd/(ac)
            let lb = -(la + (c / d).ln());
            let x1 = e1 * ln_mean(s, -pv, 0.0, la);
            let y1 = e2 * ln_mean(s, -1.0 / nf, 0.0, lb);
            let x2 = e1 * ln_mean(s, -pv, -la, 0.0);
            let y2 = e2 * ln_mean(s, -1.0 / nf, -lb, 0.0);
            let t1 = (outer * ln_abs_diff_exp(x1, y1)).exp();
            let t2 = (outer * ln_abs_diff_exp(x2, y2)).exp();
            (nf / m) * ((1.0 - s) * t1 + s * t2)
        }
    })
}

/// `M_s^p(a,b)·M_s^{-p̃}(c,d) >= M_s^{-1/n}(ac,bd)·(1+G)`.
pub fn quantitative_holder_check(input: &GapInput) -> Result<Check> {
    let g = gap(input)?;
    let GapInput { s, p, n, a, b, c, d } = *input;
    let nf = n as f64;
    let p = p.for_dimension(n)?;
    let (pv, neg_pt) = match regime(p, n) {
        Regime::PlusInfinity => (f64::INFINITY, -1.0 / nf),
        Regime::LowerEndpoint => (-1.0 / nf, f64::INFINITY),
        Regime::Zero => (0.0, 0.0),
        Regime::Finite => {
            let v = p.value();
            (v, -v / (v * nf + 1.0))
        }
    };
    let lhs = mean(s, pv, a, b) * mean(s, neg_pt, c, d);
    let rhs = mean(s, -1.0 / nf, a * c, b * d) * (1.0 + g);
    Ok(Check::at_least(lhs, rhs))
}

/// Algebraic zero condition of the regime, compared in log scale
/// (`|ln lhs − ln rhs| <= tol`).
pub fn gap_zero_locus(input: &GapInput, tol: f64) -> Result<bool> {
    let reg = input.validate()?;
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let GapInput { p, n, a, b, c, d, .. } = *input;
    let dev = match reg {
        Regime::Finite => (a / b).ln() - (d / c).ln() / (p.value() * n as f64 + 1.0),
        Regime::Zero => (a * c / (b * d)).ln(),
        Regime::PlusInfinity => (a / b).ln(),
        Regime::LowerEndpoint => (c / d).ln(),
    };
    Ok(dev.abs() <= tol)
}

/// `uv <= u^r/r + v^{r'}/r' - |u - v^{1/(r-1)}|^r / r` for `r >= 2`.
pub fn quantitative_young_check(u: f64, v: f64, r: f64) -> Result<Check> {
    if !(r >= 2.0) || !r.is_finite() {
        return domain(format!("r = {r} must be at least 2"));
    }
    if !(u >= 0.0) || !(v >= 0.0) {
        return domain("u and v must be nonnegative");
    }
    let rp = r / (r - 1.0);
    let lhs = u * v;
    let rhs = u.powf(r) / r + v.powf(rp) / rp - (u - v.powf(1.0 / (r - 1.0))).abs().powf(r) / r;
    Ok(Check::at_most(lhs, rhs))
}
