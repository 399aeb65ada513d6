//! Weighted power means `M_s^p(a, b)` with the zero convention, and the
//! Hölder rule for multiplying two means.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Below this magnitude a finite exponent is evaluated with the
/// second-order log expansion instead of the power form.
pub const NEAR_ZERO_P: f64 = 1e-7;

/// Extended-real exponent.
///
/// `Ratio` keeps exponents built from integers exact (so `-1/2` compares
/// exactly with the lower endpoint for `n = 2`); `LowerEndpoint(n)` is the
/// symbolic `p = -1/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    NegInf,
    Finite(f64),
    Ratio(i64, i64),
    LowerEndpoint(u32),
    PosInf,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Exponent {
    pub fn finite(p: f64) -> Self {
        if p == f64::INFINITY {
            Exponent::PosInf
        } else if p == f64::NEG_INFINITY {
            Exponent::NegInf
        } else {
            Exponent::Finite(p)
        }
    }

    /// Exact rational `num/den`, reduced.
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return domain("zero denominator in exponent");
        }
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Exponent::Ratio(sign * num / g, sign * den / g))
    }

    pub fn lower_endpoint(n: u32) -> Self {
        Exponent::LowerEndpoint(n)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Exponent::NegInf => f64::NEG_INFINITY,
            Exponent::PosInf => f64::INFINITY,
            Exponent::Finite(p) => p,
            Exponent::Ratio(a, b) => a as f64 / b as f64,
            Exponent::LowerEndpoint(n) => -1.0 / n as f64,
        }
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, Exponent::PosInf)
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Exponent::NegInf)
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Exponent::Ratio(a, _) => a == 0,
            Exponent::Finite(p) => p == 0.0,
            _ => false,
        }
    }

    /// Whether this is exactly `-1/n`.
    pub fn is_lower_endpoint(&self, n: u32) -> bool {
        match *self {
            Exponent::LowerEndpoint(m) => m == n,
            Exponent::Ratio(a, b) => a == -1 && b == n as i64,
            Exponent::Finite(p) => (p * n as f64 + 1.0).abs() < 1e-15,
            _ => false,
        }
    }

    /// Checks `p >= -1/n` and normalizes an exact `-1/n` to the symbolic form.
    pub fn for_dimension(self, n: u32) -> Result<Self> {
        if n == 0 {
            return domain("dimension must be positive");
        }
        if let Exponent::LowerEndpoint(m) = self {
            if m != n {
                return domain(format!("exponent -1/{m} paired with dimension {n}"));
            }
        }
        if self.is_lower_endpoint(n) {
            return Ok(Exponent::LowerEndpoint(n));
        }
        let v = self.value();
        if v.is_nan() || v < -1.0 / n as f64 {
            return domain(format!("exponent {v} below -1/{n}"));
        }
        Ok(self)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exponent::NegInf => write!(f, "-inf"),
            Exponent::PosInf => write!(f, "inf"),
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Ratio(a, b) => write!(f, "{a}/{b}"),
            Exponent::LowerEndpoint(n) => write!(f, "-1/{n}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, `+inf`, `-inf`, `a/b` with integers, or a float.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "inf" | "+inf" | "infinity" | "+infinity" => return Ok(Exponent::PosInf),
            "-inf" | "-infinity" => return Ok(Exponent::NegInf),
            _ => {}
        }
        let bad = || Error::Parse {
            line: 1,
            column: 1,
            message: format!("invalid exponent {t:?}"),
        };
        if let Some((a, b)) = t.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            return Exponent::ratio(a, b);
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_nan() {
            return Err(bad());
        }
        Ok(Exponent::finite(v))
    }
}

/// `p̃ = p/(1+np)`, with `+∞ ↦ 1/n` and `-1/n ↦ -∞`.
pub fn bbl_target_exponent(p: Exponent, n: u32) -> Result<Exponent> {
    let p = p.for_dimension(n)?;
    Ok(match p {
        Exponent::PosInf => Exponent::Ratio(1, n as i64),
        Exponent::LowerEndpoint(_) => Exponent::NegInf,
        Exponent::Ratio(a, b) => Exponent::ratio(a, b + n as i64 * a)?,
        Exponent::Finite(v) => Exponent::Finite(v / (1.0 + n as f64 * v)),
        Exponent::NegInf => unreachable!("rejected by for_dimension"),
    })
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} outside (0,1)"));
    }
    Ok(())
}

/// `M_s^p(a, b)` with validated arguments.
pub fn pmean(s: f64, p: Exponent, a: f64, b: f64) -> Result<f64> {
    check_s(s)?;
    if !(a >= 0.0) || !(b >= 0.0) {
        return domain(format!("negative argument ({a}, {b})"));
    }
    if p.is_zero() {
        return Ok(mean(s, 0.0, a, b));
    }
    Ok(mean(s, p.value(), a, b))
}

/// Unchecked `M_s^p(a, b)` for `p` given as an extended real.
pub fn mean(s: f64, p: f64, a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if a == b {
        return a;
    }
    if p == f64::INFINITY {
        return a.max(b);
    }
    if p == f64::NEG_INFINITY {
        return a.min(b);
    }
    if p == 0.0 {
        return a.powf(1.0 - s) * b.powf(s);
    }
    if p.abs() < NEAR_ZERO_P {
        let la = a.ln();
        let lb = b.ln();
        let d = la - lb;
        return ((1.0 - s) * la + s * lb + 0.5 * p * s * (1.0 - s) * d * d).exp();
    }
    // anchor at the argument whose power dominates
    let m = if p > 0.0 { a.max(b) } else { a.min(b) };
    let inner = (1.0 - s) * (a / m).powf(p) + s * (b / m).powf(p);
    m * inner.powf(1.0 / p)
}

/// `ln M_s^q(e^lx, e^ly)` for positive arguments given by their logs.
///
/// Uses `expm1`/`ln_1p` so the value stays accurate for tiny `q` and
/// for arguments far outside the floating range.
pub fn ln_mean(s: f64, q: f64, lx: f64, ly: f64) -> f64 {
    if lx == ly {
        return lx;
    }
    if q == f64::INFINITY {
        return lx.max(ly);
    }
    if q == f64::NEG_INFINITY {
        return lx.min(ly);
    }
    let lin = (1.0 - s) * lx + s * ly;
    if q == 0.0 {
        return lin;
    }
    if q.abs() < NEAR_ZERO_P {
        let d = lx - ly;
        return lin + 0.5 * q * s * (1.0 - s) * d * d;
    }
    let lm = if q > 0.0 { lx.max(ly) } else { lx.min(ly) };
    let w = (1.0 - s) * (q * (lx - lm)).exp_m1() + s * (q * (ly - lm)).exp_m1();
    lm + w.ln_1p() / q
}

/// Result of checking an inequality `lhs >= rhs` (or `lhs <= rhs`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed margin in the direction of the inequality; negative means violated.
    pub slack: f64,
}

/// Mixed tolerance `1e-12 + 1e-10·max(|x|, |y|)` used by inequality checks.
pub fn mixed_tol(x: f64, y: f64) -> f64 {
    1e-12 + 1e-10 * x.abs().max(y.abs())
}

impl Check {
    /// Check for `big >= small` with the mixed tolerance.
    pub fn at_least(big: f64, small: f64) -> Self {
        let slack = big - small;
        Check {
            pass: slack >= -mixed_tol(big, small),
            lhs: big,
            rhs: small,
            slack,
        }
    }

    /// Check for `lhs <= rhs` with the mixed tolerance.
    pub fn at_most(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Check {
            pass: slack >= -mixed_tol(lhs, rhs),
            lhs,
            rhs,
            slack,
        }
    }
}

/// `η = pq/(p+q)` for `p + q >= 0`.
pub fn holder_exponent(p: Exponent, q: Exponent) -> Result<f64> {
    let (pv, qv) = (p.value(), q.value());
    if pv.is_nan() || qv.is_nan() {
        return domain("NaN exponent");
    }
    if (pv == f64::INFINITY && qv == f64::NEG_INFINITY)
        || (pv == f64::NEG_INFINITY && qv == f64::INFINITY)
    {
        return domain("p + q undefined for +inf and -inf");
    }
    if pv + qv < 0.0 {
        return domain(format!("p + q = {} < 0", pv + qv));
    }
    if pv == f64::INFINITY {
        return Ok(qv);
    }
    if qv == f64::INFINITY {
        return Ok(pv);
    }
    if pv == 0.0 && qv == 0.0 {
        return Ok(0.0);
    }
    if pv + qv == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if let (Exponent::Ratio(a, b), Exponent::Ratio(c, d)) = (p, q) {
        // (a/b)(c/d)/((ad+cb)/bd) = ac/(ad+cb)
        let e = Exponent::ratio(a * c, a * d + c * b)?;
        return Ok(e.value());
    }
    Ok(pv * qv / (pv + qv))
}

/// `M_s^p(a,b)·M_s^q(c,d) >= M_s^η(ac, bd)`.
#[allow(clippy::too_many_arguments)]
pub fn holder_combination_check(
    s: f64,
    p: Exponent,
    q: Exponent,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
) -> Result<Check> {
    let eta = holder_exponent(p, q)?;
    let lhs = pmean(s, p, a, b)? * pmean(s, q, c, d)?;
    let rhs = pmean(s, Exponent::finite(eta), a * c, b * d)?;
    Ok(Check::at_least(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_examples() {
        assert_eq!(pmean(0.5, Exponent::finite(1.0), 2.0, 4.0).unwrap(), 3.0);
        assert!((pmean(0.5, Exponent::finite(0.0), 1.0, 4.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(pmean(0.3, Exponent::PosInf, 5.0, 0.0).unwrap(), 0.0);
        assert_eq!(pmean(0.3, Exponent::NegInf, 2.0, 7.0).unwrap(), 2.0);
        assert_eq!(pmean(0.3, Exponent::PosInf, 2.0, 7.0).unwrap(), 7.0);
    }

    #[test]
    fn mean_domain() {
        assert!(pmean(0.0, Exponent::finite(1.0), 1.0, 1.0).is_err());
        assert!(pmean(1.0, Exponent::finite(1.0), 1.0, 1.0).is_err());
        assert!(pmean(0.5, Exponent::finite(1.0), -1.0, 1.0).is_err());
    }

    #[test]
    fn target_exponent() {
        assert_eq!(bbl_target_exponent(Exponent::PosInf, 3).unwrap(), Exponent::Ratio(1, 3));
        assert!(bbl_target_exponent(Exponent::finite(0.0), 5).unwrap().is_zero());
        assert_eq!(
            bbl_target_exponent(Exponent::ratio(-1, 2).unwrap(), 2).unwrap(),
            Exponent::NegInf
        );
        assert_eq!(bbl_target_exponent(Exponent::ratio(1, 1).unwrap(), 2).unwrap(), Exponent::Ratio(1, 3));
        assert!(bbl_target_exponent(Exponent::finite(-0.6), 2).is_err());
        assert!(bbl_target_exponent(Exponent::NegInf, 2).is_err());
        assert!(bbl_target_exponent(Exponent::LowerEndpoint(3), 2).is_err());
    }

    #[test]
    fn parse_exponent() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::PosInf);
        assert_eq!("-2/4".parse::<Exponent>().unwrap(), Exponent::Ratio(-1, 2));
        assert_eq!("0.5".parse::<Exponent>().unwrap(), Exponent::Finite(0.5));
        assert!("abc".parse::<Exponent>().is_err());
    }

    #[test]
    fn holder_examples() {
        let one = Exponent::finite(1.0);
        let c = holder_combination_check(0.5, one, one, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(c.pass && c.slack == 0.0);
        // direct: M^2(1,2)=sqrt(2.5), M^2(3,4)=sqrt(12.5), M^1(3,8)=5.5
        let two = Exponent::finite(2.0);
        let c = holder_combination_check(0.5, two, two, 1.0, 2.0, 3.0, 4.0).unwrap();
        assert!(c.pass);
        assert!((c.lhs - (2.5f64 * 12.5).sqrt()).abs() < 1e-12);
        assert!((c.rhs - 5.5).abs() < 1e-12);
        assert!(holder_combination_check(0.5, Exponent::finite(-2.0), one, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(holder_combination_check(0.5, Exponent::PosInf, Exponent::NegInf, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn holder_exponent_rules() {
        assert_eq!(holder_exponent(Exponent::PosInf, Exponent::finite(-0.5)).unwrap(), -0.5);
        assert_eq!(holder_exponent(Exponent::finite(0.5), Exponent::finite(-0.5)).unwrap(), f64::NEG_INFINITY);
        assert_eq!(holder_exponent(Exponent::finite(0.0), Exponent::finite(0.0)).unwrap(), 0.0);
        let r = holder_exponent(Exponent::Ratio(1, 3), Exponent::Ratio(1, 6)).unwrap();
        assert_eq!(r, 1.0 / 9.0);
    }

    #[test]
    fn ln_mean_matches_mean() {
        for &q in &[-3.0, -0.5, -1e-9, 0.0, 1e-9, 0.5, 2.0, f64::INFINITY, f64::NEG_INFINITY] {
            let (a, b) = (0.37f64, 5.1f64);
            let m = mean(0.3, q, a, b);
            let l = ln_mean(0.3, q, a.ln(), b.ln()).exp();
            assert!((m - l).abs() < 1e-13 * m, "q={q}");
        }
    }

    #[test]
    fn holder_endpoint_pairing_sweep() {
        // +∞ paired with -1/n gives η = -1/n
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n: u32 = rng.gen_range(1..=5);
            let v: Vec<f64> = (0..4).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
            let c = holder_combination_check(0.7, Exponent::PosInf, Exponent::LowerEndpoint(n), v[0], v[1], v[2], v[3]).unwrap();
            assert!(c.pass, "{c:?}");
        }
    }

    fn exps() -> impl Strategy<Value = f64> {
        prop_oneof![
            Just(f64::NEG_INFINITY),
            Just(f64::INFINITY),
            -20.0..20.0f64,
        ]
    }

    proptest! {
        #[test]
        fn homogeneous(s in 0.01..0.99f64, p in exps(), a in 1e-3..1e3f64, b in 1e-3..1e3f64, l in 1e-3..1e3f64) {
            let lhs = mean(s, p, l * a, l * b);
            let rhs = l * mean(s, p, a, b);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn monotone_in_p(s in 0.01..0.99f64, a in 1e-3..1e3f64, b in 1e-3..1e3f64) {
            let ps = [f64::NEG_INFINITY, -10.0, -1.0, -0.3, -1e-8, 0.0, 1e-8, 0.3, 1.0, 10.0, f64::INFINITY];
            let vals: Vec<f64> = ps.iter().map(|&p| mean(s, p, a, b)).collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] <= w[1] * (1.0 + 1e-14));
            }
        }

        #[test]
        fn near_zero_limit(s in 0.01..0.99f64, a in 1e-3..1e3f64, b in 1e-3..1e3f64) {
            let g = mean(s, 0.0, a, b);
            for p in [1e-8, -1e-8] {
                prop_assert!((mean(s, p, a, b) - g).abs() <= 1e-6 * g);
            }
        }

        #[test]
        fn zero_convention(s in 0.01..0.99f64, p in exps(), a in 0.0..1e3f64) {
            prop_assert_eq!(mean(s, p, a, 0.0), 0.0);
            prop_assert_eq!(mean(s, p, 0.0, a), 0.0);
        }

        #[test]
        fn holder_random(s in 0.01..0.99f64, p in -5.0..5.0f64, dq in 0.0..5.0f64,
                         a in 1e-3..1e3f64, b in 1e-3..1e3f64, c in 1e-3..1e3f64, d in 1e-3..1e3f64) {
            let q = -p + dq;
            let chk = holder_combination_check(s, Exponent::finite(p), Exponent::finite(q), a, b, c, d).unwrap();
            prop_assert!(chk.pass, "{:?}", chk);
        }
    }
}
