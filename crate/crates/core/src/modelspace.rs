//! Constant-curvature model spaces: Euclidean space, the round sphere of
//! curvature `k > 0` and hyperbolic space of curvature `k < 0`.
//!
//! Curved spaces use embedding coordinates in `R^{n+1}`: the sphere
//! `|x|² = 1/k`, and the upper hyperboloid sheet `-x₀² + |x̄|² = 1/k`.
//! Distances come from chord lengths (`2R·asin(chord/2R)` and
//! `2R·asinh(chord/2R)`), which stay accurate for nearby points where the
//! `acos`/`acosh` forms lose half the digits.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Two sphere points closer than this to antipodal are a cut-locus pair.
pub const ANTIPODAL_EPS: f64 = 1e-9;

/// Below `sqrt|k|·r < SK_TAYLOR` the Taylor series of `s_k` is used.
pub const SK_TAYLOR: f64 = 1e-4;

const MAX_COORDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Euclidean,
    Sphere,
    Hyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub kind: Kind,
    pub n: usize,
    pub k: f64,
}

/// A point in embedding coordinates (`n` of them for Euclidean space,
/// `n + 1` for the curved models, index 0 being the distinguished axis).
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    c: [f64; MAX_COORDS],
    len: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(coords.len() <= MAX_COORDS, "at most {MAX_COORDS} coordinates");
        let mut c = [0.0; MAX_COORDS];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            c,
            len: coords.len() as u8,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn zip(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Point {
        let mut out = *self;
        for i in 0..self.len() {
            out.c[i] = f(self.c[i], other.c[i]);
        }
        out
    }

    fn scale(&self, t: f64) -> Point {
        let mut out = *self;
        for v in &mut out.c[..self.len as usize] {
            *v *= t;
        }
        out
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_COORDS {
            return Err(serde::de::Error::custom("point must have 1 to 4 coordinates"));
        }
        Ok(Point::new(&v))
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Minkowski form `-x₀y₀ + Σ xᵢyᵢ`.
fn lorentz(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + dot(&x[1..], &y[1..])
}

/// `s_k(r)`: `sin(√k r)/(√k r)`, `1`, or `sinh(√-k r)/(√-k r)`.
pub fn sk(k: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("s_k needs r >= 0, got {r}"));
    }
    let x = k.abs().sqrt() * r;
    if k > 0.0 && x >= PI {
        return domain(format!("s_k changes sign at sqrt(k)·r = {x} >= π"));
    }
    if k == 0.0 {
        return Ok(1.0);
    }
    if x < SK_TAYLOR {
        let kr2 = k * r * r;
        return Ok(1.0 - kr2 / 6.0 + kr2 * kr2 / 120.0);
    }
    Ok(if k > 0.0 { x.sin() / x } else { x.sinh() / x })
}

/// Distortion coefficient `τ_s^{k,n}(θ)`; `+∞` once `kθ² >= π²`.
pub fn tau(s: f64, k: f64, n: usize, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return domain(format!("theta = {theta} must be nonnegative"));
    }
    if !(0.0..=1.0).contains(&s) || n == 0 {
        return domain("tau needs s in [0,1] and n >= 1");
    }
    let kt2 = k * theta * theta;
    if kt2 == 0.0 {
        return Ok(s);
    }
    if kt2 >= PI * PI {
        return Ok(f64::INFINITY);
    }
    let x = kt2.abs().sqrt();
    let ratio = if x < SK_TAYLOR {
        // sin(sx)/sin(x) ≈ s(1 + (1-s²)x²/6)
        let sgn = k.signum();
        s * (1.0 + sgn * (1.0 - s * s) * x * x / 6.0)
    } else if k > 0.0 {
        (s * x).sin() / x.sin()
    } else {
        (s * x).sinh() / x.sinh()
    };
    let nf = n as f64;
    Ok(s.powf(1.0 / nf) * ratio.powf(1.0 - 1.0 / nf))
}

impl ModelSpace {
    pub fn euclidean(n: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return domain(format!("euclidean dimension {n} unsupported (1..=3)"));
        }
        Ok(ModelSpace {
            kind: Kind::Euclidean,
            n,
            k: 0.0,
        })
    }

    pub fn sphere(n: usize, k: f64) -> Result<Self> {
        if !(2..=3).contains(&n) || !(k > 0.0) || !k.is_finite() {
            return domain(format!("sphere needs n in 2..=3 and k > 0 (n={n}, k={k})"));
        }
        Ok(ModelSpace {
            kind: Kind::Sphere,
            n,
            k,
        })
    }

    pub fn hyperbolic(n: usize, k: f64) -> Result<Self> {
        if !(2..=3).contains(&n) || !(k < 0.0) || !k.is_finite() {
            return domain(format!("hyperbolic space needs n in 2..=3 and k < 0 (n={n}, k={k})"));
        }
        Ok(ModelSpace {
            kind: Kind::Hyperbolic,
            n,
            k,
        })
    }

    /// Builds from `(kind, n, k)`, checking consistency.
    pub fn new(kind: Kind, n: usize, k: f64) -> Result<Self> {
        match kind {
            Kind::Euclidean if k != 0.0 => domain("euclidean space has k = 0"),
            Kind::Euclidean => Self::euclidean(n),
            Kind::Sphere => Self::sphere(n, k),
            Kind::Hyperbolic => Self::hyperbolic(n, k),
        }
    }

    /// Curvature radius `1/sqrt|k|` (infinite for Euclidean space).
    pub fn radius(&self) -> f64 {
        if self.k == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.k.abs().sqrt()
        }
    }

    /// Diameter bound `π/√k` on the sphere, `∞` otherwise.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            Kind::Sphere => PI * self.radius(),
            _ => f64::INFINITY,
        }
    }

    pub fn coord_len(&self) -> usize {
        match self.kind {
            Kind::Euclidean => self.n,
            _ => self.n + 1,
        }
    }

    /// Validates a point given in embedding coordinates (tolerance 1e-12
    /// relative to `1/|k|`), and projects it back onto the model.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        if coords.len() != self.coord_len() {
            return Err(Error::Mismatch(format!(
                "expected {} coordinates, got {}",
                self.coord_len(),
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return domain("non-finite coordinate");
        }
        let p = Point::new(coords);
        let q = 1.0 / self.k;
        let form = match self.kind {
            Kind::Euclidean => return Ok(p),
            Kind::Sphere => dot(coords, coords),
            Kind::Hyperbolic => {
                if coords[0] <= 0.0 {
                    return domain("hyperboloid point must lie on the upper sheet");
                }
                lorentz(coords, coords)
            }
        };
        if (form - q).abs() > 1e-12 * q.abs().max(1.0) * (1.0 + dot(coords, coords)) {
            return domain(format!("point off the model: form {form}, expected {q}"));
        }
        Ok(self.renormalize(p))
    }

    /// The distinguished origin: `0` in `R^n`, `(R, 0, …)` otherwise.
    pub fn origin(&self) -> Point {
        let mut c = [0.0; MAX_COORDS];
        if self.kind != Kind::Euclidean {
            c[0] = self.radius();
        }
        Point::new(&c[..self.coord_len()])
    }

    /// Image under `exp_origin` of a tangent vector `v ∈ R^n`
    /// (geodesic normal coordinates around the origin).
    pub fn from_normal_coords(&self, v: &[f64]) -> Result<Point> {
        if v.len() != self.n {
            return Err(Error::Mismatch(format!("expected {} normal coordinates", self.n)));
        }
        if self.kind == Kind::Euclidean {
            return Ok(Point::new(v));
        }
        let r = dot(v, v).sqrt();
        let big_r = self.radius();
        let mut c = [0.0; MAX_COORDS];
        let (c0, sc) = match self.kind {
            Kind::Sphere => ((r / big_r).cos(), (r / big_r).sin()),
            _ => ((r / big_r).cosh(), (r / big_r).sinh()),
        };
        c[0] = big_r * c0;
        for i in 0..self.n {
            c[i + 1] = if r > 0.0 { big_r * sc * v[i] / r } else { 0.0 };
        }
        Ok(self.renormalize(Point::new(&c[..self.coord_len()])))
    }

    /// Projection back onto the model after arithmetic.
    fn renormalize(&self, p: Point) -> Point {
        match self.kind {
            Kind::Euclidean => p,
            Kind::Sphere => {
                let nrm = dot(p.coords(), p.coords()).sqrt();
                p.scale(self.radius() / nrm)
            }
            Kind::Hyperbolic => {
                let mut q = p;
                let r = self.radius();
                let sp = dot(&p.coords()[1..], &p.coords()[1..]);
                q.c[0] = (r * r + sp).sqrt();
                q
            }
        }
    }

    fn check_pair(&self, x: &Point, y: &Point) -> Result<()> {
        let l = self.coord_len();
        if x.len() != l || y.len() != l {
            return Err(Error::Mismatch("point does not belong to this space".into()));
        }
        Ok(())
    }

    /// Geodesic distance.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.dist_unchecked(x, y))
    }

    pub(crate) fn dist_unchecked(&self, x: &Point, y: &Point) -> f64 {
        let diff = x.zip(y, |a, b| a - b);
        let dc = diff.coords();
        match self.kind {
            Kind::Euclidean => dot(dc, dc).sqrt(),
            Kind::Sphere => {
                let r = self.radius();
                let chord = dot(dc, dc).sqrt();
                2.0 * r * (chord / (2.0 * r)).min(1.0).asin()
            }
            Kind::Hyperbolic => {
                let r = self.radius();
                let chord = lorentz(dc, dc).max(0.0).sqrt();
                2.0 * r * (chord / (2.0 * r)).asinh()
            }
        }
    }

    /// True when `x, y` are (numerically) antipodal on the sphere.
    pub fn is_cut_pair(&self, x: &Point, y: &Point) -> bool {
        self.kind == Kind::Sphere && self.dist_unchecked(x, y) >= self.diameter() - ANTIPODAL_EPS
    }

    /// The point `z` on the minimizing geodesic with `d(x,z) = s·d(x,y)`.
    pub fn geodesic_point(&self, x: &Point, y: &Point, s: f64) -> Result<Point> {
        self.check_pair(x, y)?;
        if !(0.0..=1.0).contains(&s) {
            return domain(format!("s = {s} outside [0,1]"));
        }
        if self.is_cut_pair(x, y) {
            return Err(Error::CutLocus(format!("{x:?} and {y:?} are antipodal")));
        }
        Ok(self.geodesic_unchecked(x, y, s))
    }

    pub(crate) fn geodesic_unchecked(&self, x: &Point, y: &Point, s: f64) -> Point {
        if s == 0.0 {
            return *x;
        }
        if s == 1.0 {
            return *y;
        }
        let lin = |wx: f64, wy: f64| x.zip(y, |a, b| wx * a + wy * b);
        match self.kind {
            Kind::Euclidean => lin(1.0 - s, s),
            Kind::Sphere | Kind::Hyperbolic => {
                let th = self.dist_unchecked(x, y) / self.radius();
                if th < 1e-7 {
                    return self.renormalize(lin(1.0 - s, s));
                }
                let (wx, wy) = if self.kind == Kind::Sphere {
                    (((1.0 - s) * th).sin() / th.sin(), (s * th).sin() / th.sin())
                } else {
                    (((1.0 - s) * th).sinh() / th.sinh(), (s * th).sinh() / th.sinh())
                };
                self.renormalize(lin(wx, wy))
            }
        }
    }

    /// `exp_x(v)` for a tangent vector `v` at `x` (ambient coordinates).
    pub fn exp(&self, x: &Point, v: &[f64]) -> Result<Point> {
        if v.len() != self.coord_len() || x.len() != self.coord_len() {
            return Err(Error::Mismatch("exp: dimension mismatch".into()));
        }
        let vp = Point::new(v);
        match self.kind {
            Kind::Euclidean => Ok(x.zip(&vp, |a, b| a + b)),
            Kind::Sphere | Kind::Hyperbolic => {
                let r = self.radius();
                let nv = if self.kind == Kind::Sphere {
                    dot(v, v)
                } else {
                    lorentz(v, v)
                }
                .max(0.0)
                .sqrt();
                if nv == 0.0 {
                    return Ok(*x);
                }
                let t = nv / r;
                let (a, b) = if self.kind == Kind::Sphere {
                    (t.cos(), r * t.sin() / nv)
                } else {
                    (t.cosh(), r * t.sinh() / nv)
                };
                Ok(self.renormalize(x.zip(&vp, |p, q| a * p + b * q)))
            }
        }
    }

    /// `log_x(y)`: the tangent vector at `x` of length `d(x,y)` pointing to `y`.
    pub fn log(&self, x: &Point, y: &Point) -> Result<Vec<f64>> {
        self.check_pair(x, y)?;
        if self.is_cut_pair(x, y) {
            return Err(Error::CutLocus("log undefined at the antipode".into()));
        }
        let d = self.dist_unchecked(x, y);
        let r2 = self.radius().powi(2);
        let u = match self.kind {
            Kind::Euclidean => return Ok(y.zip(x, |a, b| a - b).coords().to_vec()),
            Kind::Sphere => {
                let c = dot(x.coords(), y.coords()) / r2;
                y.zip(x, |a, b| a - c * b)
            }
            Kind::Hyperbolic => {
                let c = lorentz(x.coords(), y.coords()) / r2;
                y.zip(x, |a, b| a + c * b)
            }
        };
        let nu = match self.kind {
            Kind::Sphere => dot(u.coords(), u.coords()),
            _ => lorentz(u.coords(), u.coords()),
        }
        .max(0.0)
        .sqrt();
        if nu == 0.0 {
            return Ok(vec![0.0; self.coord_len()]);
        }
        Ok(u.scale(d / nu).coords().to_vec())
    }

    /// Closed-form `v_s` for a pair at distance `d`.
    pub fn vol_distortion_at(&self, s: f64, d: f64) -> Result<f64> {
        if self.k == 0.0 || d == 0.0 {
            return Ok(1.0);
        }
        if self.kind == Kind::Sphere && d >= self.diameter() - ANTIPODAL_EPS {
            return Err(Error::CutLocus(format!("distance {d} reaches the antipode")));
        }
        Ok((sk(self.k, s * d)? / sk(self.k, d)?).powi(self.n as i32 - 1))
    }

    /// `v_s(x,y) = (s_k(s·d)/s_k(d))^{n-1}`, exact in constant curvature.
    pub fn vol_distortion(&self, s: f64, x: &Point, y: &Point) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return domain(format!("s = {s} outside (0,1)"));
        }
        let d = self.distance(x, y)?;
        self.vol_distortion_at(s, d)
    }

    /// Volume of a geodesic ball of radius `r`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain("radius must be positive");
        }
        if self.kind == Kind::Sphere && r >= self.diameter() {
            return domain("ball radius exceeds the sphere's diameter");
        }
        let big_r = self.radius();
        Ok(match (self.kind, self.n) {
            (Kind::Euclidean, 1) => 2.0 * r,
            (Kind::Euclidean, 2) => PI * r * r,
            (Kind::Euclidean, 3) => 4.0 / 3.0 * PI * r.powi(3),
            (Kind::Sphere, 2) => 2.0 * PI * big_r * big_r * (1.0 - (r / big_r).cos()),
            (Kind::Hyperbolic, 2) => 2.0 * PI * big_r * big_r * ((r / big_r).cosh() - 1.0),
            (Kind::Sphere, 3) => {
                4.0 * PI * big_r * big_r * (r / 2.0 - big_r * (2.0 * r / big_r).sin() / 4.0)
            }
            (Kind::Hyperbolic, 3) => {
                4.0 * PI * big_r * big_r * (big_r * (2.0 * r / big_r).sinh() / 4.0 - r / 2.0)
            }
            _ => return Err(Error::Unsupported(format!("dimension {}", self.n))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spaces() -> Vec<ModelSpace> {
        vec![
            ModelSpace::euclidean(2).unwrap(),
            ModelSpace::euclidean(3).unwrap(),
            ModelSpace::sphere(2, 1.0).unwrap(),
            ModelSpace::sphere(3, 4.0).unwrap(),
            ModelSpace::hyperbolic(2, -1.0).unwrap(),
            ModelSpace::hyperbolic(3, -0.25).unwrap(),
        ]
    }

    fn random_point(m: &ModelSpace, rng: &mut impl Rng) -> Point {
        let scale = if m.kind == Kind::Sphere { 0.45 * m.diameter() } else { 2.0 };
        let v: Vec<f64> = (0..m.n).map(|_| rng.gen_range(-1.0..1.0) * scale / (m.n as f64).sqrt()).collect();
        m.from_normal_coords(&v).unwrap()
    }

    #[test]
    fn sk_examples() {
        assert_eq!(sk(0.0, 7.3).unwrap(), 1.0);
        for k in [-1.0, 0.0, 1.0] {
            assert_eq!(sk(k, 0.0).unwrap(), 1.0);
        }
        assert!((sk(1.0, PI / 2.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!(sk(1.0, PI).is_err());
    }

    #[test]
    fn sk_second_order() {
        for k in [-1.0, 0.0, 1.0] {
            for r in [1e-5, 1e-3, 1e-2, 0.1] {
                let v = sk(k, r).unwrap();
                assert!((v - 1.0 + k * r * r / 6.0).abs() <= 0.01 * r.powi(4) + 1e-16);
            }
        }
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(0.4, -1.0, 2, 0.0).unwrap(), 0.4);
        assert_eq!(tau(0.4, 1.0, 2, PI).unwrap(), f64::INFINITY);
        let v = tau(0.5, 1.0, 2, PI / 2.0).unwrap();
        assert!((v - 2f64.powf(-0.75)).abs() < 1e-15);
        for th in [0.0, 1.0, 10.0] {
            assert_eq!(tau(0.3, 0.0, 3, th).unwrap(), 0.3);
        }
        assert!((tau(0.3, 1.0, 2, 1e-6).unwrap() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn tau_sk_identity() {
        for &k in &[1.0, -1.0, 0.5, -3.0] {
            for &th in &[0.1, 0.9, 1.7, 2.5] {
                if k * th * th >= PI * PI {
                    continue;
                }
                for &s in &[0.2, 0.5, 0.8] {
                    for n in [2, 3] {
                        let lhs = tau(s, k, n, th).unwrap();
                        let rhs = s * (sk(k, s * th).unwrap() / sk(k, th).unwrap()).powf(1.0 - 1.0 / n as f64);
                        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn distance_examples() {
        let e = ModelSpace::euclidean(2).unwrap();
        let d = e.distance(&Point::new(&[0.0, 0.0]), &Point::new(&[3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
        let s = ModelSpace::sphere(2, 1.0).unwrap();
        let n = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let south = s.point(&[-1.0, 0.0, 0.0]).unwrap();
        assert!((s.distance(&n, &south).unwrap() - PI).abs() < 1e-12);
        assert!(matches!(s.geodesic_point(&n, &south, 0.5), Err(Error::CutLocus(_))));
        // hyperbolic: compare to arccosh of the Minkowski product
        let h = ModelSpace::hyperbolic(2, -1.0).unwrap();
        let x = h.from_normal_coords(&[0.3, -0.2]).unwrap();
        let y = h.from_normal_coords(&[-1.1, 0.4]).unwrap();
        let want = (-lorentz(x.coords(), y.coords())).acosh();
        assert!((h.distance(&x, &y).unwrap() - want).abs() < 1e-12);
        // and to the small-separation series d ≈ c - c³/24 with c = |x - y|_L
        let y2 = h.from_normal_coords(&[0.3 + 1e-4, -0.2]).unwrap();
        let diff: Vec<f64> = x.coords().iter().zip(y2.coords()).map(|(a, b)| a - b).collect();
        let ch = lorentz(&diff, &diff).sqrt();
        assert!((h.distance(&x, &y2).unwrap() - ch * (1.0 - ch * ch / 24.0)).abs() < 1e-12 * ch);
        assert!(e.distance(&Point::new(&[0.0, 0.0]), &n).is_err());
    }

    #[test]
    fn point_validation() {
        let s = ModelSpace::sphere(2, 1.0).unwrap();
        assert!(s.point(&[1.0, 0.1, 0.0]).is_err());
        assert!(s.point(&[1.0, 0.0]).is_err());
        let h = ModelSpace::hyperbolic(2, -1.0).unwrap();
        assert!(h.point(&[-1.0, 0.0, 0.0]).is_err());
        assert!(h.point(&[1.0, 0.0, 0.0]).is_ok());
        assert!(ModelSpace::new(Kind::Sphere, 2, -1.0).is_err());
        assert!(ModelSpace::euclidean(4).is_err());
    }

    #[test]
    fn geodesic_conditions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for m in spaces() {
            for _ in 0..10_000 {
                let x = random_point(&m, &mut rng);
                let y = random_point(&m, &mut rng);
                let s = rng.gen_range(0.0..1.0);
                let z = m.geodesic_point(&x, &y, s).unwrap();
                let d = m.distance(&x, &y).unwrap();
                assert!((m.distance(&x, &z).unwrap() - s * d).abs() < 1e-10, "{m:?}");
                assert!((m.distance(&z, &y).unwrap() - (1.0 - s) * d).abs() < 1e-10);
            }
            let x = random_point(&m, &mut rng);
            let y = random_point(&m, &mut rng);
            assert_eq!(m.geodesic_point(&x, &y, 0.0).unwrap(), x);
            assert_eq!(m.geodesic_point(&x, &y, 1.0).unwrap(), y);
        }
    }

    #[test]
    fn sphere_midpoint_example() {
        let s = ModelSpace::sphere(2, 1.0).unwrap();
        let n = s.origin();
        let y = s.from_normal_coords(&[PI / 2.0, 0.0]).unwrap();
        let z = s.geodesic_point(&n, &y, 0.5).unwrap();
        assert!((s.distance(&n, &z).unwrap() - PI / 4.0).abs() < 1e-12);
        assert!((s.distance(&z, &y).unwrap() - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for m in spaces() {
            for _ in 0..2000 {
                let (x, y, z) = (random_point(&m, &mut rng), random_point(&m, &mut rng), random_point(&m, &mut rng));
                let dxy = m.distance(&x, &y).unwrap();
                assert!(dxy <= m.distance(&x, &z).unwrap() + m.distance(&z, &y).unwrap() + 1e-12);
                assert!((dxy - m.distance(&y, &x).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for m in spaces() {
            for _ in 0..500 {
                let x = random_point(&m, &mut rng);
                let y = random_point(&m, &mut rng);
                let v = m.log(&x, &y).unwrap();
                let y2 = m.exp(&x, &v).unwrap();
                assert!(m.distance(&y, &y2).unwrap() < 1e-9, "{m:?}");
            }
        }
    }

    #[test]
    fn distortion_examples() {
        let e = ModelSpace::euclidean(2).unwrap();
        assert_eq!(e.vol_distortion(0.3, &Point::new(&[0.0, 0.0]), &Point::new(&[5.0, 1.0])).unwrap(), 1.0);
        let s = ModelSpace::sphere(2, 1.0).unwrap();
        let x = s.origin();
        assert_eq!(s.vol_distortion(0.3, &x, &x).unwrap(), 1.0);
        let y = s.from_normal_coords(&[0.0, PI / 2.0]).unwrap();
        // (s_k(π/4)/s_k(π/2)) = (sin(π/4)/(π/4)) / (sin(π/2)/(π/2)) = √2
        let v = s.vol_distortion(0.5, &x, &y).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        // Bishop bound: in constant curvature the value is the bound itself
        let d = s.distance(&x, &y).unwrap();
        let bishop = (sk(1.0, 0.5 * d).unwrap() / sk(1.0, d).unwrap()).powi(1);
        assert_eq!(v, bishop);
    }

    #[test]
    fn ball_volumes() {
        assert!((ModelSpace::euclidean(2).unwrap().ball_volume(1.0).unwrap() - PI).abs() < 1e-15);
        assert!((ModelSpace::sphere(2, 1.0).unwrap().ball_volume(PI / 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let h = ModelSpace::hyperbolic(2, -1.0).unwrap().ball_volume(1.0).unwrap();
        assert!((h - 2.0 * PI * (1f64.cosh() - 1.0)).abs() < 1e-12);
        // 3-D sphere: the full S³ of radius 1 has volume 2π²
        let s3 = ModelSpace::sphere(3, 1.0).unwrap().ball_volume(PI - 1e-12).unwrap();
        assert!((s3 - 2.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn points_serialize_as_arrays() {
        let p = Point::new(&[1.0, 2.5]);
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(j, "[1.0,2.5]");
        let q: Point = serde_json::from_str(&j).unwrap();
        assert_eq!(p, q);
    }
}
