//! Exact solution of the single-instance search problems.
//!
//! [`solve_exact`] runs a depth-first branch-and-bound over the time-expanded
//! path graph. A partial path of length `t` with per-scenario detection counts
//! `d_i` cannot do better than `sum_i q_i exp(-alpha (d_i + T - t))`, because
//! each remaining period adds at most one detection per scenario. The same
//! bound applied to target 2 proves SP2 infeasibility of a subtree when it
//! exceeds `tau`.
//!
//! [`brute_force`] enumerates every path and serves as the oracle. Both paths
//! evaluate leaves with the same floating-point expression, so an optimal
//! branch-and-bound value equals the enumerated optimum bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{de_delta, ser_delta};
use crate::search::{Grid, ProblemKind, SearchInstance, SearchPath, Weights};

/// Default cap on the number of paths [`brute_force`] will enumerate.
pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Search stopped early; `gap = value - lower_bound`.
    Feasible { gap: f64 },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub path: Option<SearchPath>,
    /// Objective of `path`; infinite when infeasible.
    #[serde(serialize_with = "ser_delta", deserialize_with = "de_delta")]
    pub value: f64,
    #[serde(serialize_with = "ser_delta", deserialize_with = "de_delta")]
    pub lower_bound: f64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
}

impl SolveResult {
    fn infeasible(nodes: u64) -> Self {
        Self {
            path: None,
            value: f64::INFINITY,
            lower_bound: f64::INFINITY,
            status: SolveStatus::Infeasible,
            nodes_explored: nodes,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.path.is_some()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Subtrees that cannot improve the incumbent by more than this are cut.
    pub abs_tol: f64,
    /// Stop after generating this many nodes.
    pub node_limit: Option<u64>,
    /// A known path whose value seeds the incumbent.
    pub warm_start: Option<SearchPath>,
}

pub fn solve_exact(inst: &SearchInstance, xi: &[f64], kind: ProblemKind, abs_tol: f64) -> Result<SolveResult> {
    solve_with(inst, xi, kind, &SolveOptions { abs_tol, ..Default::default() })
}

pub fn solve_with(inst: &SearchInstance, xi: &[f64], kind: ProblemKind, opts: &SolveOptions) -> Result<SolveResult> {
    inst.check_kind(kind)?;
    if !(opts.abs_tol >= 0.0) {
        return Err(Error::Domain(format!("tolerance {} must be nonnegative", opts.abs_tol)));
    }
    let weights = inst.weights(xi)?;
    let mut bb = BranchAndBound::new(inst, weights, kind, opts);

    if let Some((path, value)) = bb.greedy_dive() {
        bb.offer(path, value);
    }
    if let Some(seed) = &opts.warm_start {
        if inst.is_path(seed) {
            let d = inst.path_counts(seed, 0);
            let feasible = kind == ProblemKind::Sp1 || {
                let e = inst.path_counts(seed, 1);
                bb.exact(&bb.table2, &e) <= bb.tau
            };
            if feasible {
                let v = bb.exact(&bb.table1, &d);
                bb.offer(seed.cells().to_vec(), v);
            }
        }
    }

    bb.search();

    let nodes = bb.nodes;
    let Some(best) = bb.best.take() else {
        if bb.aborted {
            return Err(Error::Numerical(format!(
                "node limit reached after {nodes} nodes without a feasible path"
            )));
        }
        return Ok(SolveResult::infeasible(nodes));
    };
    let lower = bb.pruned_min.min(bb.incumbent);
    let status = if bb.aborted {
        SolveStatus::Feasible { gap: bb.incumbent - lower }
    } else {
        SolveStatus::Optimal
    };
    Ok(SolveResult {
        path: Some(SearchPath::new(best)),
        value: bb.incumbent,
        lower_bound: lower,
        status,
        nodes_explored: nodes,
    })
}

/// `hits[t][c]`: scenarios whose target sits in cell `c` at period `t`.
fn hit_lists(inst: &SearchInstance, k: usize) -> Vec<Vec<Vec<u32>>> {
    let cells = inst.grid().cell_count();
    let mut hits = vec![vec![Vec::new(); cells]; inst.horizon()];
    for (i, track) in inst.target_tracks(k).iter().enumerate() {
        for (t, &c) in track.iter().enumerate() {
            hits[t][c].push(i as u32);
        }
    }
    hits
}

/// `exp(-alpha * j)` for `j = 0..=T`, computed exactly as
/// [`Weights::nondetection`] does.
fn exp_table(alpha: f64, horizon: usize) -> Vec<f64> {
    (0..=horizon as u32).map(|j| (-alpha * f64::from(j)).exp()).collect()
}

struct BranchAndBound<'a> {
    horizon: usize,
    cells: usize,
    neighbors: Vec<Vec<usize>>,
    q: Vec<f64>,
    table1: Vec<f64>,
    table2: Vec<f64>,
    hits1: Vec<Vec<Vec<u32>>>,
    hits2: Vec<Vec<Vec<u32>>>,
    sp2: bool,
    tau: f64,
    abs_tol: f64,
    node_limit: u64,

    d: Vec<u32>,
    e: Vec<u32>,
    path: Vec<usize>,
    best: Option<Vec<usize>>,
    incumbent: f64,
    pruned_min: f64,
    nodes: u64,
    aborted: bool,
    _inst: &'a SearchInstance,
}

impl<'a> BranchAndBound<'a> {
    fn new(inst: &'a SearchInstance, w: Weights, kind: ProblemKind, opts: &SolveOptions) -> Self {
        let grid: Grid = inst.grid();
        let sp2 = kind == ProblemKind::Sp2;
        let scenarios = inst.scenario_count();
        let table = exp_table(w.alpha, inst.horizon());
        Self {
            horizon: inst.horizon(),
            cells: grid.cell_count(),
            neighbors: (0..grid.cell_count()).map(|c| grid.neighbors(c)).collect(),
            q: w.q,
            table1: table.clone(),
            table2: table,
            hits1: hit_lists(inst, 0),
            hits2: if sp2 { hit_lists(inst, 1) } else { Vec::new() },
            sp2,
            tau: inst.tau(),
            abs_tol: opts.abs_tol,
            node_limit: opts.node_limit.unwrap_or(u64::MAX),
            d: vec![0; scenarios],
            e: vec![0; scenarios],
            path: Vec::with_capacity(inst.horizon()),
            best: None,
            incumbent: f64::INFINITY,
            pruned_min: f64::INFINITY,
            nodes: 0,
            aborted: false,
            _inst: inst,
        }
    }

    fn exact(&self, table: &[f64], counts: &[u32]) -> f64 {
        let mut s = 0.0;
        for (q, &c) in self.q.iter().zip(counts) {
            s += q * table[c as usize];
        }
        s
    }

    /// Best possible value of any completion when `depth` periods are fixed.
    fn optimistic(&self, table: &[f64], counts: &[u32], depth: usize) -> f64 {
        let rem = (self.horizon - depth) as u32;
        let mut s = 0.0;
        for (q, &c) in self.q.iter().zip(counts) {
            s += q * table[(c + rem) as usize];
        }
        s
    }

    fn offer(&mut self, path: Vec<usize>, value: f64) {
        if value < self.incumbent {
            self.incumbent = value;
            self.best = Some(path);
        }
    }

    /// Walks forward always taking the neighbor with the largest expected
    /// immediate detection of target 1 (lowest cell on ties).
    fn greedy_dive(&self) -> Option<(Vec<usize>, f64)> {
        let score = |t: usize, c: usize| -> f64 { self.hits1[t][c].iter().map(|&i| self.q[i as usize]).sum() };
        let pick = |t: usize, options: &mut dyn Iterator<Item = usize>| -> usize {
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for c in options {
                let s = score(t, c);
                if s > best.1 {
                    best = (c, s);
                }
            }
            best.0
        };
        let mut path = Vec::with_capacity(self.horizon);
        path.push(pick(0, &mut (0..self.cells)));
        for t in 1..self.horizon {
            let prev = path[t - 1];
            path.push(pick(t, &mut self.neighbors[prev].iter().copied()));
        }
        let mut d = vec![0u32; self.q.len()];
        let mut e = vec![0u32; self.q.len()];
        for (t, &c) in path.iter().enumerate() {
            for &i in &self.hits1[t][c] {
                d[i as usize] += 1;
            }
            if self.sp2 {
                for &i in &self.hits2[t][c] {
                    e[i as usize] += 1;
                }
            }
        }
        if self.sp2 && self.exact(&self.table2, &e) > self.tau {
            return None;
        }
        let v = self.exact(&self.table1, &d);
        Some((path, v))
    }

    fn search(&mut self) {
        let root_bound = self.optimistic(&self.table1, &self.d, 0);
        self.expand(0, root_bound);
    }

    fn expand(&mut self, depth: usize, own_bound: f64) {
        if depth == self.horizon {
            return;
        }
        let options: Vec<usize> = if depth == 0 {
            (0..self.cells).collect()
        } else {
            self.neighbors[self.path[depth - 1]].clone()
        };
        for c in options {
            if self.nodes >= self.node_limit {
                self.aborted = true;
                // everything still below this node is unexplored
                self.pruned_min = self.pruned_min.min(own_bound);
                return;
            }
            self.nodes += 1;
            self.step(depth, c, true);
            self.visit(depth + 1);
            self.step(depth, c, false);
            if self.aborted {
                self.pruned_min = self.pruned_min.min(own_bound);
                return;
            }
        }
    }

    fn step(&mut self, depth: usize, c: usize, forward: bool) {
        if forward {
            for &i in &self.hits1[depth][c] {
                self.d[i as usize] += 1;
            }
            if self.sp2 {
                for &i in &self.hits2[depth][c] {
                    self.e[i as usize] += 1;
                }
            }
            self.path.push(c);
        } else {
            for &i in &self.hits1[depth][c] {
                self.d[i as usize] -= 1;
            }
            if self.sp2 {
                for &i in &self.hits2[depth][c] {
                    self.e[i as usize] -= 1;
                }
            }
            self.path.pop();
        }
    }

    fn visit(&mut self, depth: usize) {
        if self.sp2 && self.optimistic(&self.table2, &self.e, depth) > self.tau {
            return;
        }
        let bound = self.optimistic(&self.table1, &self.d, depth);
        if bound >= self.incumbent - self.abs_tol {
            self.pruned_min = self.pruned_min.min(bound);
            return;
        }
        if depth == self.horizon {
            // at a leaf the bound is the exact objective
            self.incumbent = bound;
            self.best = Some(self.path.clone());
            return;
        }
        self.expand(depth, bound);
    }
}

/// Number of searcher paths of length `horizon` on `grid`.
pub fn count_paths(grid: &Grid, horizon: usize) -> u128 {
    if horizon == 0 {
        return 0;
    }
    let cells = grid.cell_count();
    let mut ways = vec![1u128; cells];
    for _ in 1..horizon {
        let next: Vec<u128> = (0..cells)
            .map(|c| grid.neighbors(c).iter().map(|&p| ways[p]).fold(0u128, u128::saturating_add))
            .collect();
        ways = next;
    }
    ways.into_iter().fold(0u128, u128::saturating_add)
}

pub fn brute_force(inst: &SearchInstance, xi: &[f64], kind: ProblemKind) -> Result<SolveResult> {
    brute_force_capped(inst, xi, kind, DEFAULT_PATH_CAP)
}

/// Exhaustive enumeration of all paths; fails when there are more than `cap`.
pub fn brute_force_capped(inst: &SearchInstance, xi: &[f64], kind: ProblemKind, cap: u128) -> Result<SolveResult> {
    inst.check_kind(kind)?;
    let grid = inst.grid();
    let total = count_paths(&grid, inst.horizon());
    if total > cap {
        return Err(Error::Size(format!("{total} paths exceed the enumeration cap {cap}")));
    }
    let w = inst.weights(xi)?;
    let mut best: Option<(SearchPath, f64)> = None;
    let mut enumerated = 0u64;
    let mut cells = vec![0usize; inst.horizon()];
    enumerate(&grid, 0, &mut cells, &mut |p| {
        enumerated += 1;
        let path = SearchPath::new(p.to_vec());
        if kind == ProblemKind::Sp2 && w.nondetection(&inst.path_counts(&path, 1)) > inst.tau() {
            return;
        }
        let v = w.nondetection(&inst.path_counts(&path, 0));
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((path, v));
        }
    });
    Ok(match best {
        Some((path, value)) => SolveResult {
            path: Some(path),
            value,
            lower_bound: value,
            status: SolveStatus::Optimal,
            nodes_explored: enumerated,
        },
        None => SolveResult::infeasible(enumerated),
    })
}

fn enumerate(grid: &Grid, t: usize, cells: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if t == cells.len() {
        visit(cells);
        return;
    }
    let options = if t == 0 { (0..grid.cell_count()).collect() } else { grid.neighbors(cells[t - 1]) };
    for c in options {
        cells[t] = c;
        enumerate(grid, t + 1, cells, visit);
    }
}
