//! Discrete optimal transport for the cost `d²/2`.

mod entropic;
mod exact;

pub use entropic::{solve_entropic, EntropicReport};
pub use exact::{solve_exact, EXACT_PAIR_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::modelspace::{Kind, ModelSpace, Point};
use crate::sets::{theta, DiscreteSet};

/// Masses below this are dropped before solving.
pub const PRUNE_MASS: f64 = 1e-14;

/// A probability measure on finitely many points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedCloud {
    pub space: ModelSpace,
    pub points: Vec<Point>,
    pub masses: Vec<f64>,
    /// Caller-side index of each point (e.g. its grid cell).
    pub labels: Vec<usize>,
}

impl WeightedCloud {
    /// Validates positive masses summing to 1 within 1e-12.
    pub fn new(space: ModelSpace, points: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() || points.is_empty() {
            return Err(Error::Mismatch("points and masses must be nonempty and of equal length".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return domain("cloud masses must be positive");
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("cloud masses sum to {total}, not 1"));
        }
        if points.iter().any(|p| p.len() != space.coord_len()) {
            return Err(Error::Mismatch("cloud point has wrong dimension".into()));
        }
        let labels = (0..points.len()).collect();
        Ok(WeightedCloud {
            space,
            points,
            masses,
            labels,
        })
    }

    /// Normalizes nonnegative weights to a probability measure, pruning
    /// entries below `PRUNE_MASS` of the total. Labels record the original
    /// positions.
    pub fn from_weights(space: ModelSpace, points: &[Point], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Mismatch("points and weights differ in length".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return domain("weights must be nonnegative and finite");
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return domain("total weight must be positive");
        }
        let keep: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] / total >= PRUNE_MASS).collect();
        let kept: f64 = keep.iter().map(|&i| weights[i]).sum();
        let mut masses: Vec<f64> = keep.iter().map(|&i| weights[i] / kept).collect();
        // absorb the rounding of the normalization into the largest mass
        let err = 1.0 - masses.iter().sum::<f64>();
        let big = (0..masses.len()).max_by(|&a, &b| masses[a].total_cmp(&masses[b])).unwrap();
        masses[big] += err;
        Ok(WeightedCloud {
            space,
            points: keep.iter().map(|&i| points[i]).collect(),
            masses,
            labels: keep,
        })
    }

    /// Normalized volume measure of a grid mask.
    pub fn uniform_on(set: &DiscreteSet) -> Result<Self> {
        let g = set
            .grid()
            .ok_or_else(|| Error::Unsupported("uniform measure needs a grid mask".into()))?;
        let w: Vec<f64> = set.cells().iter().map(|&i| g.volume(i)).collect();
        let mut c = Self::from_weights(set.space, set.points(), &w)?;
        c.labels = c.labels.iter().map(|&k| set.cells()[k]).collect();
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub source: WeightedCloud,
    pub target: WeightedCloud,
    pub couplings: Vec<Coupling>,
    pub cost: f64,
}

/// `d(x, y)²/2`.
pub fn cost(space: &ModelSpace, x: &Point, y: &Point) -> f64 {
    let d = space.dist_unchecked(x, y);
    0.5 * d * d
}

pub(crate) fn cost_matrix(mu: &WeightedCloud, nu: &WeightedCloud) -> Vec<f64> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for x in &mu.points {
        for y in &nu.points {
            c.push(cost(&mu.space, x, y));
        }
    }
    c
}

/// Row and column sums of the couplings.
pub fn marginals(plan: &TransportPlan) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![0.0; plan.source.len()];
    let mut c = vec![0.0; plan.target.len()];
    for k in &plan.couplings {
        r[k.i] += k.mass;
        c[k.j] += k.mass;
    }
    (r, c)
}

/// Largest deviation of the plan's marginals from the cloud masses.
pub fn marginal_violation(plan: &TransportPlan) -> f64 {
    let (r, c) = marginals(plan);
    let dr = r.iter().zip(&plan.source.masses).map(|(a, b)| (a - b).abs());
    let dc = c.iter().zip(&plan.target.masses).map(|(a, b)| (a - b).abs());
    dr.chain(dc).fold(0.0, f64::max)
}

impl TransportPlan {
    pub(crate) fn assemble(source: WeightedCloud, target: WeightedCloud, couplings: Vec<Coupling>) -> Self {
        let mut plan = TransportPlan {
            source,
            target,
            couplings,
            cost: 0.0,
        };
        plan.cost = plan.recompute_cost();
        plan
    }

    /// `Σ mass·d²/2` from the stored couplings.
    pub fn recompute_cost(&self) -> f64 {
        let m = &self.source.space;
        self.couplings
            .iter()
            .map(|k| k.mass * cost(m, &self.source.points[k.i], &self.target.points[k.j]))
            .sum()
    }

    /// Checks the plan invariants: positive couplings, marginals within
    /// 1e-9, cost consistent with the couplings.
    pub fn check(&self) -> Result<()> {
        if self.couplings.iter().any(|k| !(k.mass > 0.0)) {
            return domain("plan has a nonpositive coupling");
        }
        let v = marginal_violation(self);
        if v > 1e-9 {
            return domain(format!("plan marginals off by {v}"));
        }
        let c = self.recompute_cost();
        if (c - self.cost).abs() > 1e-12 * c.max(1.0) {
            return domain("stored cost differs from the couplings");
        }
        Ok(())
    }

    /// Fraction of source mass not carried by each row's largest coupling.
    pub fn split_mass_fraction(&self) -> f64 {
        let mut best = vec![0.0f64; self.source.len()];
        for k in &self.couplings {
            best[k.i] = best[k.i].max(k.mass);
        }
        (1.0 - best.iter().sum::<f64>()).max(0.0)
    }

    /// JSON form: header plus `{i, j, mass}` triples.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": crate::report::SCHEMA,
            "space": self.source.space,
            "source_len": self.source.len(),
            "target_len": self.target.len(),
            "cost": self.cost,
            "couplings": self.couplings,
        })
    }
}

/// Pushforward of the source under the `s`-interpolant of the plan.
pub fn displacement_interpolate(plan: &TransportPlan, s: f64) -> Result<WeightedCloud> {
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("s = {s} outside [0,1]"));
    }
    let m = plan.source.space;
    let mut points = Vec::with_capacity(plan.couplings.len());
    let mut masses = Vec::with_capacity(plan.couplings.len());
    for k in &plan.couplings {
        let x = &plan.source.points[k.i];
        let y = &plan.target.points[k.j];
        points.push(m.geodesic_point(x, y, s)?);
        masses.push(k.mass);
    }
    let labels = (0..points.len()).collect();
    Ok(WeightedCloud {
        space: m,
        points,
        masses,
        labels,
    })
}

/// Monge-map surrogate: barycentric projection (Euclidean), or the unique
/// coupled target (curved spaces, where barycenters are not available).
pub fn barycentric_map(plan: &TransportPlan) -> Result<Vec<Point>> {
    let m = plan.source.space;
    let ns = plan.source.len();
    if m.kind == Kind::Euclidean {
        let dim = m.n;
        let mut acc = vec![vec![0.0; dim]; ns];
        let mut w = vec![0.0; ns];
        for k in &plan.couplings {
            let y = plan.target.points[k.j].coords();
            for a in 0..dim {
                acc[k.i][a] += k.mass * y[a];
            }
            w[k.i] += k.mass;
        }
        return Ok(acc
            .iter()
            .zip(&w)
            .map(|(v, &wi)| Point::new(&v.iter().map(|x| x / wi).collect::<Vec<_>>()))
            .collect());
    }
    let mut target: Vec<Option<usize>> = vec![None; ns];
    for k in &plan.couplings {
        match target[k.i] {
            Some(j) if j != k.j => {
                return Err(Error::Unsupported(format!(
                    "source {} splits its mass; barycenters need euclidean space",
                    k.i
                )))
            }
            _ => target[k.i] = Some(k.j),
        }
    }
    target
        .iter()
        .map(|t| {
            t.map(|j| plan.target.points[j])
                .ok_or_else(|| Error::Mismatch("source point without coupling".into()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WassersteinCheck {
    pub pass: bool,
    pub theta_min: f64,
    pub theta_max: f64,
    /// `∫ d² dπ = 2·cost`.
    pub w2: f64,
    pub strict_lower: bool,
    pub strict_upper: bool,
}

/// `Θ_min² <= 2·cost <= Θ_max²` for a plan between the normalized
/// indicator measures of `A` and `B`.
pub fn wasserstein_bounds_check(plan: &TransportPlan, a: &DiscreteSet, b: &DiscreteSet, k: f64) -> Result<WassersteinCheck> {
    let _ = k;
    let tmin = theta(a, b, 1.0)?;
    let tmax = theta(a, b, -1.0)?;
    let w2 = 2.0 * plan.cost;
    let tol = 1e-12 * tmax.powi(2).max(1.0);
    let lo = tmin * tmin;
    let hi = tmax * tmax;
    Ok(WassersteinCheck {
        pass: lo <= w2 + tol && w2 <= hi + tol,
        theta_min: tmin,
        theta_max: tmax,
        w2,
        strict_lower: lo < w2 - tol,
        strict_upper: w2 < hi - tol,
    })
}
