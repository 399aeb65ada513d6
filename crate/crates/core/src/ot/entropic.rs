//! Entropic transport by log-domain Sinkhorn iterations with ε-scaling.
//!
//! The raw Sinkhorn plan only matches the marginals approximately; it is
//! rounded onto the transport polytope (row/column down-scaling plus a
//! rank-one correction) so the returned plan satisfies the marginal
//! invariant exactly. The pre-rounding violation is reported.

use serde::{Deserialize, Serialize};

use super::{cost_matrix, Coupling, TransportPlan, WeightedCloud};
use crate::error::{domain, Error, Result};

/// Entries of the rounded plan below this mass are dropped (their mass is
/// folded back into the row's largest entry).
const DROP: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropicReport {
    pub epsilon: f64,
    pub iterations: usize,
    /// Max absolute marginal error of the Sinkhorn plan before rounding.
    pub marginal_violation: f64,
    pub converged: bool,
}

fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Solves the `ε`-regularized problem; iterations stop once the row
/// marginal error drops below `tol` or `max_iter` is reached.
pub fn solve_entropic(
    mu: &WeightedCloud,
    nu: &WeightedCloud,
    epsilon: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(TransportPlan, EntropicReport)> {
    if mu.space != nu.space {
        return Err(Error::Mismatch("clouds live on different spaces".into()));
    }
    if !(epsilon > 0.0) || !(tol > 0.0) {
        return domain("epsilon and tol must be positive");
    }
    let (m, n) = (mu.len(), nu.len());
    let c = cost_matrix(mu, nu);
    let la: Vec<f64> = mu.masses.iter().map(|x| x.ln()).collect();
    let lb: Vec<f64> = nu.masses.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let cmax = c.iter().fold(0.0f64, |a, &b| a.max(b));

    // ε-scaling schedule: halve from the cost scale down to the target
    let mut schedule = Vec::new();
    let mut e = cmax.max(epsilon);
    while e > epsilon {
        schedule.push(e);
        e *= 0.5;
    }
    schedule.push(epsilon);

    let mut iterations = 0;
    let mut err = f64::INFINITY;
    let last = schedule.len() - 1;
    for (stage, &eps) in schedule.iter().enumerate() {
        let budget = if stage == last { max_iter } else { 50 };
        for _ in 0..budget {
            for i in 0..m {
                let row = &c[i * n..(i + 1) * n];
                f[i] = eps * la[i] - eps * log_sum_exp((0..n).map(|j| (g[j] - row[j]) / eps));
            }
            for j in 0..n {
                g[j] = eps * lb[j] - eps * log_sum_exp((0..m).map(|i| (f[i] - c[i * n + j]) / eps));
            }
            iterations += 1;
            if stage == last {
                // columns are exact after the g-update; measure the rows
                err = (0..m)
                    .map(|i| {
                        let row = &c[i * n..(i + 1) * n];
                        let s: f64 = (0..n).map(|j| ((f[i] + g[j] - row[j]) / eps).exp()).sum();
                        (s - mu.masses[i]).abs()
                    })
                    .fold(0.0, f64::max);
                if err <= tol {
                    break;
                }
            }
        }
    }

    let mut p = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            p[i * n + j] = ((f[i] + g[j] - c[i * n + j]) / epsilon).exp();
        }
    }
    round_to_marginals(&mut p, &mu.masses, &nu.masses);
    let mut couplings = Vec::new();
    for i in 0..m {
        let row = &mut p[i * n..(i + 1) * n];
        let mut dropped = 0.0;
        let mut big = 0;
        for j in 0..n {
            if row[j] > row[big] {
                big = j;
            }
            if row[j] < DROP {
                dropped += row[j];
                row[j] = 0.0;
            }
        }
        row[big] += dropped;
        for (j, &mass) in row.iter().enumerate() {
            if mass > 0.0 {
                couplings.push(Coupling { i, j, mass });
            }
        }
    }
    let plan = TransportPlan::assemble(mu.clone(), nu.clone(), couplings);
    let report = EntropicReport {
        epsilon,
        iterations,
        marginal_violation: err,
        converged: err <= tol,
    };
    Ok((plan, report))
}

/// Projects a nonnegative matrix onto the plans with marginals `a`, `b`.
fn round_to_marginals(p: &mut [f64], a: &[f64], b: &[f64]) {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let s: f64 = p[i * n..(i + 1) * n].iter().sum();
        if s > a[i] {
            let t = a[i] / s;
            p[i * n..(i + 1) * n].iter_mut().for_each(|x| *x *= t);
        }
    }
    for j in 0..n {
        let s: f64 = (0..m).map(|i| p[i * n + j]).sum();
        if s > b[j] {
            let t = b[j] / s;
            (0..m).for_each(|i| p[i * n + j] *= t);
        }
    }
    let ra: Vec<f64> = (0..m).map(|i| (a[i] - p[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0)).collect();
    let rb: Vec<f64> = (0..n).map(|j| (b[j] - (0..m).map(|i| p[i * n + j]).sum::<f64>()).max(0.0)).collect();
    let total: f64 = ra.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            if ra[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                p[i * n + j] += ra[i] * rb[j] / total;
            }
        }
    }
}
