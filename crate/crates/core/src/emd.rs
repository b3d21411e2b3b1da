//! Exact earth mover's distance between color descriptors.
//!
//! The transportation problem is solved with the transportation simplex
//! (MODI method): a northwest-corner starting basis, node potentials on the
//! basis spanning tree, and pivots along the unique tree cycle closed by the
//! entering cell. Pricing is Dantzig's rule; after a run of degenerate pivots
//! it falls back to Bland's rule, which cannot cycle.
//!
//! Rows and columns with zero mass are dropped before solving and come back
//! as zero flow in the returned matrix.

use crate::naming::{ColorDescriptor, GroundDistanceMatrix};

/// Tolerance on the marginal constraints of a returned flow.
pub const FLOW_TOL: f64 = 1e-9;
/// Largest allowed difference between total source and target mass.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmdError {
    #[error("source mass {source_mass} and target mass {target_mass} differ by more than {MASS_TOL}")]
    InfeasibleMarginals { source_mass: f64, target_mass: f64 },
    #[error("dimension mismatch: {supply} sources, {demand} targets, {cost} costs")]
    DimensionMismatch {
        supply: usize,
        demand: usize,
        cost: usize,
    },
    #[error("invalid mass or cost value {0}")]
    InvalidValue(f64),
    #[error("transportation simplex did not terminate within {0} pivots")]
    NoConvergence(usize),
}

/// Transport plan between a source and a target distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FlowMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.data[i * self.cols..(i + 1) * self.cols].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }

    /// Checks nonnegativity and that row and column sums match the given
    /// marginals within `tol`.
    pub fn check_marginals(&self, supply: &[f64], demand: &[f64], tol: f64) -> Result<(), String> {
        if supply.len() != self.rows || demand.len() != self.cols {
            return Err("marginal lengths do not match the flow shape".into());
        }
        if let Some(f) = self.data.iter().find(|f| **f < 0.0) {
            return Err(format!("negative flow {f}"));
        }
        for (i, &s) in supply.iter().enumerate() {
            let r = self.row_sum(i);
            if (r - s).abs() > tol {
                return Err(format!("row {i} sums to {r}, expected {s}"));
            }
        }
        for (j, &d) in demand.iter().enumerate() {
            let c = self.col_sum(j);
            if (c - d).abs() > tol {
                return Err(format!("column {j} sums to {c}, expected {d}"));
            }
        }
        Ok(())
    }
}

/// Optimal transport cost together with an optimal flow.
#[derive(Clone, Debug, PartialEq)]
pub struct Emd {
    pub cost: f64,
    pub flow: FlowMatrix,
}

/// Earth mover's distance between two descriptors under `ground`.
pub fn emd(source: &ColorDescriptor, target: &ColorDescriptor, ground: &GroundDistanceMatrix) -> Result<Emd, EmdError> {
    let n = ground.size();
    if source.len() != n || target.len() != n {
        return Err(EmdError::DimensionMismatch {
            supply: source.len(),
            demand: target.len(),
            cost: n * n,
        });
    }
    if source == target {
        // Zero diagonal: keeping every unit of mass in place costs nothing.
        let mut data = vec![0.0; n * n];
        for (i, &p) in source.probs().iter().enumerate() {
            data[i * n + i] = p;
        }
        return Ok(Emd {
            cost: 0.0,
            flow: FlowMatrix {
                rows: n,
                cols: n,
                data,
            },
        });
    }
    transport(source.probs(), target.probs(), ground.as_slice())
}

/// Cost-only variant of [`emd`].
pub fn emd_cost(source: &ColorDescriptor, target: &ColorDescriptor, ground: &GroundDistanceMatrix) -> Result<f64, EmdError> {
    emd(source, target, ground).map(|e| e.cost)
}

/// Solves the balanced transportation problem with row-major `cost` of
/// shape `supply.len() × demand.len()`.
pub fn transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Emd, EmdError> {
    let (rows, cols) = (supply.len(), demand.len());
    if rows == 0 || cols == 0 || cost.len() != rows * cols {
        return Err(EmdError::DimensionMismatch {
            supply: rows,
            demand: cols,
            cost: cost.len(),
        });
    }
    if let Some(&bad) = supply
        .iter()
        .chain(demand)
        .find(|v| !(v.is_finite() && **v >= 0.0))
        .or_else(|| cost.iter().find(|c| !c.is_finite()))
    {
        return Err(EmdError::InvalidValue(bad));
    }
    let source_mass: f64 = supply.iter().sum();
    let target_mass: f64 = demand.iter().sum();
    if (source_mass - target_mass).abs() > MASS_TOL {
        return Err(EmdError::InfeasibleMarginals {
            source_mass,
            target_mass,
        });
    }

    let active_rows: Vec<usize> = (0..rows).filter(|&i| supply[i] > 0.0).collect();
    let active_cols: Vec<usize> = (0..cols).filter(|&j| demand[j] > 0.0).collect();
    let mut data = vec![0.0; rows * cols];
    if active_rows.is_empty() || active_cols.is_empty() {
        return Ok(Emd {
            cost: 0.0,
            flow: FlowMatrix { rows, cols, data },
        });
    }

    let mut solver = Simplex::new(
        active_rows.iter().map(|&i| supply[i]).collect(),
        active_cols.iter().map(|&j| demand[j]).collect(),
        active_rows
            .iter()
            .flat_map(|&i| active_cols.iter().map(move |&j| cost[i * cols + j]))
            .collect(),
    );
    solver.run()?;

    let mut total = 0.0;
    for cell in &solver.basis {
        let (i, j) = (active_rows[cell.row], active_cols[cell.col]);
        data[i * cols + j] = cell.flow;
        total += cell.flow * cost[i * cols + j];
    }
    Ok(Emd {
        cost: total,
        flow: FlowMatrix { rows, cols, data },
    })
}

#[derive(Clone, Copy, Debug)]
struct BasicCell {
    row: usize,
    col: usize,
    flow: f64,
}

struct Simplex {
    m: usize,
    n: usize,
    cost: Vec<f64>,
    basis: Vec<BasicCell>,
    in_basis: Vec<bool>,
    // Scratch space reused across pivots.
    u: Vec<f64>,
    v: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    queue: Vec<usize>,
}

impl Simplex {
    fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Vec<f64>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let basis = northwest_corner(&supply, &demand);
        let mut in_basis = vec![false; m * n];
        for c in &basis {
            in_basis[c.row * n + c.col] = true;
        }
        Self {
            m,
            n,
            cost,
            basis,
            in_basis,
            u: vec![0.0; m],
            v: vec![0.0; n],
            adjacency: vec![Vec::new(); m + n],
            parent: vec![None; m + n],
            queue: Vec::with_capacity(m + n),
        }
    }

    fn run(&mut self) -> Result<(), EmdError> {
        let (m, n) = (self.m, self.n);
        if m == 1 || n == 1 {
            // Every cell is basic; the northwest-corner flow is the only feasible one.
            return Ok(());
        }
        let scale = self.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let tol = 1e-12 * scale;
        let max_pivots = 100 * (m + n) * (m + n);
        let mut degenerate_run = 0;

        for _ in 0..max_pivots {
            self.build_tree();
            self.potentials();
            let bland = degenerate_run > m + n;
            let Some((ei, ej)) = self.entering(tol, bland) else {
                return Ok(());
            };
            let theta = self.pivot(ei, ej, bland);
            degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
        }
        Err(EmdError::NoConvergence(max_pivots))
    }

    fn build_tree(&mut self) {
        for adj in &mut self.adjacency {
            adj.clear();
        }
        for (k, c) in self.basis.iter().enumerate() {
            self.adjacency[c.row].push(k);
            self.adjacency[self.m + c.col].push(k);
        }
    }

    /// Solves `u_i + v_j = c_ij` over basic cells with `u_0 = 0`.
    fn potentials(&mut self) {
        let m = self.m;
        let mut seen = vec![false; m + self.n];
        self.u[0] = 0.0;
        seen[0] = true;
        self.queue.clear();
        self.queue.push(0);
        let mut head = 0;
        while head < self.queue.len() {
            let node = self.queue[head];
            head += 1;
            for &k in &self.adjacency[node] {
                let c = self.basis[k];
                let cost = self.cost[c.row * self.n + c.col];
                let (other, value) = if node < m {
                    (m + c.col, cost - self.u[c.row])
                } else {
                    (c.row, cost - self.v[c.col])
                };
                if !seen[other] {
                    seen[other] = true;
                    if other < m {
                        self.u[other] = value;
                    } else {
                        self.v[other - m] = value;
                    }
                    self.queue.push(other);
                }
            }
        }
    }

    fn entering(&self, tol: f64, bland: bool) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.m {
            for j in 0..self.n {
                if self.in_basis[i * self.n + j] {
                    continue;
                }
                let reduced = self.cost[i * self.n + j] - self.u[i] - self.v[j];
                if reduced < -tol {
                    if bland {
                        return Some((i, j));
                    }
                    if best.map_or(true, |b| reduced < b.2) {
                        best = Some((i, j, reduced));
                    }
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    /// Brings `(ei, ej)` into the basis and returns the amount of flow moved.
    fn pivot(&mut self, ei: usize, ej: usize, bland: bool) -> f64 {
        let m = self.m;
        let n = self.n;
        // Tree path from row node `ei` to column node `m + ej`.
        self.parent.iter_mut().for_each(|p| *p = None);
        let mut seen = vec![false; m + n];
        seen[ei] = true;
        self.queue.clear();
        self.queue.push(ei);
        let mut head = 0;
        let target = m + ej;
        while head < self.queue.len() && !seen[target] {
            let node = self.queue[head];
            head += 1;
            for &k in &self.adjacency[node] {
                let c = self.basis[k];
                let other = if node < m { m + c.col } else { c.row };
                if !seen[other] {
                    seen[other] = true;
                    self.parent[other] = Some(k);
                    self.queue.push(other);
                }
            }
        }

        // Walk back from the column node; edges alternate -, +, -, ...
        let mut path = Vec::new();
        let mut node = target;
        while node != ei {
            let k = self.parent[node].expect("basis is a spanning tree");
            path.push(k);
            let c = self.basis[k];
            node = if node < m { m + c.col } else { c.row };
        }

        let mut leaving = None::<usize>;
        let mut theta = f64::INFINITY;
        for &k in path.iter().step_by(2) {
            let c = self.basis[k];
            let better = match leaving {
                None => true,
                Some(l) => {
                    let lc = self.basis[l];
                    c.flow < theta || (bland && c.flow == theta && c.row * n + c.col < lc.row * n + lc.col)
                }
            };
            if better {
                theta = c.flow;
                leaving = Some(k);
            }
        }
        let leaving = leaving.expect("cycle has at least one decreasing cell");

        for (step, &k) in path.iter().enumerate() {
            if k == leaving {
                continue;
            }
            let cell = &mut self.basis[k];
            if step % 2 == 0 {
                cell.flow = (cell.flow - theta).max(0.0);
            } else {
                cell.flow += theta;
            }
        }
        let old = self.basis[leaving];
        self.in_basis[old.row * n + old.col] = false;
        self.in_basis[ei * n + ej] = true;
        self.basis[leaving] = BasicCell {
            row: ei,
            col: ej,
            flow: theta,
        };
        theta
    }
}

/// Northwest-corner starting basis with exactly `m + n - 1` cells.
fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<BasicCell> {
    let (m, n) = (supply.len(), demand.len());
    let mut rs = supply.to_vec();
    let mut rd = demand.to_vec();
    let mut basis = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = rs[i].min(rd[j]);
        basis.push(BasicCell { row: i, col: j, flow: x });
        rs[i] -= x;
        rd[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && rs[i] <= rd[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}
