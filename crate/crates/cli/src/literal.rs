//! Command-line literals: sets (`box:`, `disk:`, `poly:`, `file:`), spaces,
//! angles and coordinate pairs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bbl_core::modelspace::ModelSpace;
use bbl_core::Error;

fn parse_err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column,
        message: message.into(),
    }
}

/// Comma-separated floats; `offset` is the column of the first character.
fn floats(text: &str, offset: usize) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    let mut col = offset;
    for field in text.split(',') {
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| parse_err(col, format!("expected a number, got {field:?}")))?;
        if !v.is_finite() {
            return Err(parse_err(col, "non-finite number"));
        }
        out.push(v);
        col += field.len() + 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Axis-parallel box; `lo.len()` is the dimension.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Ball; in curved spaces the center is in normal coordinates at the origin.
    Disk { center: Vec<f64>, r: f64 },
    /// Convex polygon, any vertex order.
    Poly(Vec<[f64; 2]>),
    /// CSV or JSON density file.
    File(PathBuf),
}

/// A set literal with an optional `*scale` suffix turning its indicator
/// into a density.
#[derive(Clone, Debug, PartialEq)]
pub struct SetLiteral {
    pub shape: Shape,
    pub scale: f64,
}

impl SetLiteral {
    /// Dimension implied by the literal (`None` for files).
    pub fn dim(&self) -> Option<usize> {
        match &self.shape {
            Shape::Box { lo, .. } => Some(lo.len()),
            Shape::Disk { center, .. } => Some(center.len()),
            Shape::Poly(_) => Some(2),
            Shape::File(_) => None,
        }
    }

    /// Euclidean bounding box.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.shape {
            Shape::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            Shape::Disk { center, r } => Some((
                center.iter().map(|c| c - r).collect(),
                center.iter().map(|c| c + r).collect(),
            )),
            Shape::Poly(v) => {
                let fold = |k: usize, f: fn(f64, f64) -> f64, init: f64| v.iter().map(|p| p[k]).fold(init, f);
                Some((
                    vec![fold(0, f64::min, f64::INFINITY), fold(1, f64::min, f64::INFINITY)],
                    vec![fold(0, f64::max, f64::NEG_INFINITY), fold(1, f64::max, f64::NEG_INFINITY)],
                ))
            }
            Shape::File(_) => None,
        }
    }
}

impl FromStr for SetLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| parse_err(1, "expected kind:args (box, disk, poly, file)"))?;
        let start = kind.len() + 2;
        if kind == "file" {
            if rest.is_empty() {
                return Err(parse_err(start, "empty file path"));
            }
            return Ok(SetLiteral {
                shape: Shape::File(PathBuf::from(rest)),
                scale: 1.0,
            });
        }
        let (args, scale) = match rest.rsplit_once('*') {
            Some((a, c)) => {
                let col = start + a.len() + 1;
                let c: f64 = c.trim().parse().map_err(|_| parse_err(col, format!("bad scale {c:?}")))?;
                if !(c > 0.0) || !c.is_finite() {
                    return Err(parse_err(col, "scale must be positive"));
                }
                (a, c)
            }
            None => (rest, 1.0),
        };
        let v = floats(args, start)?;
        let shape = match kind {
            "box" => {
                if v.is_empty() || v.len() % 2 != 0 || v.len() > 6 {
                    return Err(parse_err(start, "box needs lo then hi corners (2, 4 or 6 numbers)"));
                }
                let n = v.len() / 2;
                let (lo, hi) = (v[..n].to_vec(), v[n..].to_vec());
                if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                    return Err(parse_err(start, "box corners must satisfy lo < hi"));
                }
                Shape::Box { lo, hi }
            }
            "disk" | "ball" => {
                if v.len() < 2 || v.len() > 4 {
                    return Err(parse_err(start, "disk needs center coordinates then radius"));
                }
                let r = v[v.len() - 1];
                if !(r > 0.0) {
                    return Err(parse_err(start, "radius must be positive"));
                }
                Shape::Disk {
                    center: v[..v.len() - 1].to_vec(),
                    r,
                }
            }
            "poly" => {
                if v.len() < 6 || v.len() % 2 != 0 {
                    return Err(parse_err(start, "poly needs at least three x,y vertices"));
                }
                Shape::Poly(v.chunks(2).map(|c| [c[0], c[1]]).collect())
            }
            other => return Err(parse_err(1, format!("unknown set kind {other:?}"))),
        };
        Ok(SetLiteral { shape, scale })
    }
}

/// `euclidean[:n]`, `sphere:n[:k]`, `hyperbolic:n[:k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceSpec {
    pub kind: &'static str,
    pub n: Option<usize>,
    pub k: f64,
}

impl SpaceSpec {
    pub fn euclidean() -> Self {
        SpaceSpec {
            kind: "euclidean",
            n: None,
            k: 0.0,
        }
    }

    /// Resolves against a dimension inferred from the inputs.
    pub fn build(&self, inferred: usize) -> Result<ModelSpace, Error> {
        let n = self.n.unwrap_or(inferred);
        if self.n.is_some_and(|m| m != inferred) {
            return Err(Error::Mismatch(format!("space dimension {n} but inputs are {inferred}-dimensional")));
        }
        match self.kind {
            "euclidean" => ModelSpace::euclidean(n),
            "sphere" => ModelSpace::sphere(n, self.k),
            _ => ModelSpace::hyperbolic(n, self.k),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parts: Vec<&str> = s.split(':').collect();
        let (kind, default_k) = match parts[0] {
            "euclidean" | "flat" => ("euclidean", 0.0),
            "sphere" => ("sphere", 1.0),
            "hyperbolic" => ("hyperbolic", -1.0),
            other => return Err(parse_err(1, format!("unknown space {other:?}"))),
        };
        if parts.len() > 3 {
            return Err(parse_err(1, "expected kind[:n[:k]]"));
        }
        let mut col = parts[0].len() + 2;
        let n = match parts.get(1) {
            Some(t) => Some(t.parse::<usize>().map_err(|_| parse_err(col, format!("bad dimension {t:?}")))?),
            None => None,
        };
        col += parts.get(1).map_or(0, |t| t.len() + 1);
        let k = match parts.get(2) {
            Some(t) => t.parse::<f64>().map_err(|_| parse_err(col, format!("bad curvature {t:?}")))?,
            None => default_k,
        };
        Ok(SpaceSpec { kind, n, k })
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.n {
            Some(n) => write!(f, "{}:{n}:{}", self.kind, self.k),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Angle in radians; accepts `35deg`, `35°`, `0.61rad` or a bare radian value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let (num, deg) = if let Some(x) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
            (x, true)
        } else {
            (t.strip_suffix("rad").unwrap_or(t), false)
        };
        let v: f64 = num.trim().parse().map_err(|_| parse_err(1, format!("bad angle {t:?}")))?;
        Ok(Angle(if deg { v.to_radians() } else { v }))
    }
}

/// `x,y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pair(pub [f64; 2]);

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let v = floats(s, 1)?;
        if v.len() != 2 {
            return Err(parse_err(1, "expected x,y"));
        }
        Ok(Pair([v[0], v[1]]))
    }
}

/// Four numbers `q11,q12,q21,q22` of a 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl FromStr for Matrix2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let v = floats(s, 1)?;
        if v.len() != 4 {
            return Err(parse_err(1, "expected q11,q12,q21,q22"));
        }
        Ok(Matrix2([[v[0], v[1]], [v[2], v[3]]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_literals() {
        let b: SetLiteral = "box:0,0,1,2".parse().unwrap();
        assert_eq!(b.dim(), Some(2));
        assert_eq!(b.bounds().unwrap(), (vec![0.0, 0.0], vec![1.0, 2.0]));
        let d: SetLiteral = "disk:1,2,0.5*3".parse().unwrap();
        assert_eq!(d.scale, 3.0);
        assert_eq!(d.shape, Shape::Disk { center: vec![1.0, 2.0], r: 0.5 });
        let f: SetLiteral = "file:a/b.csv".parse().unwrap();
        assert_eq!(f.shape, Shape::File("a/b.csv".into()));
        let p: SetLiteral = "poly:0,0,1,0,0,1".parse().unwrap();
        assert_eq!(p.bounds().unwrap().1, vec![1.0, 1.0]);
    }

    #[test]
    fn bad_literals_report_columns() {
        match "box:0,x,1,1".parse::<SetLiteral>() {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 7),
            other => panic!("{other:?}"),
        }
        assert!("box:1,0".parse::<SetLiteral>().is_err());
        assert!("tri:1,0".parse::<SetLiteral>().is_err());
        assert!("disk:0,0,-1".parse::<SetLiteral>().is_err());
    }

    #[test]
    fn spaces_and_angles() {
        let s: SpaceSpec = "sphere:2".parse().unwrap();
        assert_eq!((s.n, s.k), (Some(2), 1.0));
        let h: SpaceSpec = "hyperbolic:2:-4".parse().unwrap();
        assert_eq!(h.k, -4.0);
        assert!(h.build(3).is_err());
        let a: Angle = "35deg".parse().unwrap();
        assert!((a.0 - 35f64.to_radians()).abs() < 1e-15);
        assert_eq!("0.5".parse::<Angle>().unwrap().0, 0.5);
    }
}
