//! Exact solver: the transportation simplex (network simplex on the
//! complete bipartite graph).
//!
//! The basis is a spanning tree of `m + n − 1` cells. Entering cells are
//! chosen by block pricing in row-major order; ties on the ratio test
//! leave at the first candidate along the cycle, so results depend only
//! on the input order.

use std::collections::VecDeque;

use super::{cost_matrix, Coupling, TransportPlan, WeightedCloud};
use crate::error::{Error, Result};

/// Upper bound on `|μ|·|ν|` for the exact solver.
pub const EXACT_PAIR_CAP: usize = 1_000_000;

struct Basis {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
}

impl Basis {
    /// Northwest-corner start; a tie exhausts the row and keeps a zero-flow
    /// cell in the column so the basis stays a tree.
    fn northwest(a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        let (mut ra, mut rb) = (a[0], b[0]);
        loop {
            if i == m - 1 && j == n - 1 {
                cells.push((i, j));
                flow.push(ra.max(0.0).min(rb.max(0.0)).max(0.0));
                break;
            }
            if (ra <= rb && i < m - 1) || j == n - 1 {
                cells.push((i, j));
                flow.push(ra.max(0.0));
                rb -= ra;
                i += 1;
                ra = a[i];
            } else {
                cells.push((i, j));
                flow.push(rb.max(0.0));
                ra -= rb;
                j += 1;
                rb = b[j];
            }
        }
        Basis { m, n, cells, flow }
    }

    /// Adjacency over nodes `0..m` (rows) and `m..m+n` (columns); entries are
    /// basis positions.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push(k);
            adj[self.m + j].push(k);
        }
        adj
    }

    fn other(&self, k: usize, node: usize) -> usize {
        let (i, j) = self.cells[k];
        if node == i {
            self.m + j
        } else {
            i
        }
    }

    /// BFS from row 0: potentials with `u_i + v_j = c_ij` on the basis,
    /// plus parent edges and depths for cycle search.
    fn potentials(&self, c: &[f64], adj: &[Vec<usize>]) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
        let nn = self.m + self.n;
        let mut pot = vec![0.0; nn];
        let mut parent = vec![usize::MAX; nn];
        let mut depth = vec![usize::MAX; nn];
        depth[0] = 0;
        let mut q = VecDeque::from([0usize]);
        while let Some(u) = q.pop_front() {
            for &k in &adj[u] {
                let w = self.other(k, u);
                if depth[w] != usize::MAX {
                    continue;
                }
                let (i, j) = self.cells[k];
                let cij = c[i * self.n + j];
                // rows hold u_i, columns v_j
                pot[w] = cij - pot[u];
                parent[w] = k;
                depth[w] = depth[u] + 1;
                q.push_back(w);
            }
        }
        (pot, parent, depth)
    }

    /// Basis positions on the tree path from `from` to `to`, in order.
    fn path(&self, from: usize, to: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
        let (mut x, mut y) = (from, to);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while x != y {
            if depth[x] >= depth[y] {
                let k = parent[x];
                head.push(k);
                x = self.other(k, x);
            } else {
                let k = parent[y];
                tail.push(k);
                y = self.other(k, y);
            }
        }
        tail.reverse();
        head.extend(tail);
        head
    }
}

/// Minimum-cost coupling for `d²/2`.
pub fn solve_exact(mu: &WeightedCloud, nu: &WeightedCloud) -> Result<TransportPlan> {
    if mu.space != nu.space {
        return Err(Error::Mismatch("clouds live on different spaces".into()));
    }
    let (m, n) = (mu.len(), nu.len());
    if m.saturating_mul(n) > EXACT_PAIR_CAP {
        return Err(Error::SizeCap(format!(
            "{m}×{n} exceeds the exact solver cap {EXACT_PAIR_CAP}; use the entropic solver"
        )));
    }
    let c = cost_matrix(mu, nu);
    let scale = c.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
    let eps = 1e-12 * scale;
    let mut basis = Basis::northwest(&mu.masses, &nu.masses);
    let block = ((m * n) as f64).sqrt().ceil().max(16.0) as usize;
    let mut start = 0usize;
    let max_pivots = 50 * (m * n).max(100);
    let mut in_basis = vec![false; m * n];
    for &(i, j) in &basis.cells {
        in_basis[i * n + j] = true;
    }

    for _ in 0..max_pivots {
        let adj = basis.adjacency();
        let (pot, parent, depth) = basis.potentials(&c, &adj);

        // block pricing: scan blocks from `start`, take the most negative
        // reduced cost of the first block that has one
        let total = m * n;
        let mut entering = None;
        let mut scanned = 0;
        while scanned < total && entering.is_none() {
            let mut best = -eps;
            let end = (scanned + block).min(total);
            for t in scanned..end {
                let idx = (start + t) % total;
                if in_basis[idx] {
                    continue;
                }
                let (i, j) = (idx / n, idx % n);
                let r = c[idx] - pot[i] - pot[m + j];
                if r < best {
                    best = r;
                    entering = Some(idx);
                }
            }
            scanned = end;
        }
        let Some(idx) = entering else {
            let couplings = basis
                .cells
                .iter()
                .zip(&basis.flow)
                .filter(|(_, &f)| f > 0.0)
                .map(|(&(i, j), &f)| Coupling { i, j, mass: f })
                .collect();
            let plan = TransportPlan::assemble(mu.clone(), nu.clone(), couplings);
            return Ok(plan);
        };
        start = idx;
        let (ei, ej) = (idx / n, idx % n);
        // cycle: entering (+), then the tree path from column ej to row ei
        // alternating −, +, −, …
        let path = basis.path(m + ej, ei, &parent, &depth);
        let mut leave_pos = usize::MAX;
        let mut theta = f64::INFINITY;
        for (t, &k) in path.iter().enumerate() {
            if t % 2 == 0 && basis.flow[k] < theta {
                theta = basis.flow[k];
                leave_pos = t;
            }
        }
        let theta = theta.max(0.0);
        for (t, &k) in path.iter().enumerate() {
            if t % 2 == 0 {
                basis.flow[k] = (basis.flow[k] - theta).max(0.0);
            } else {
                basis.flow[k] += theta;
            }
        }
        let k = path[leave_pos];
        let (li, lj) = basis.cells[k];
        in_basis[li * n + lj] = false;
        in_basis[idx] = true;
        basis.cells[k] = (ei, ej);
        basis.flow[k] = theta;
    }
    Err(Error::SizeCap("network simplex exceeded its pivot budget".into()))
}
