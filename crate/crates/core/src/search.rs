//! The moving-target search model.
//!
//! A searcher occupies one cell per period on a rectangular grid and may move
//! to the same cell or a 4-neighbor between periods. Each target follows one
//! of `I` scenarios; scenario `i` has probability `q_i(xi)`, and a look in the
//! target's cell detects it at rate `alpha(xi)`. The nondetection probability
//! for target `k` along a path is
//!
//! ```text
//! sum_i q_i(xi) * exp(-alpha(xi) * d_ik)
//! ```
//!
//! where `d_ik` counts the periods in which the path shares the target's cell
//! under scenario `i`.
//!
//! Cells are numbered row-major from the upper-left corner. Internally they are
//! 0-based; instance files and CLI flags use 1-based numbers.
//!
//! Binary decision vectors have one entry per (cell, period) pair at index
//! `t * C + c`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};

/// Mode-B parameter vectors must sum to zero within this tolerance.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    rows: usize,
    cols: usize,
}

impl Grid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(domain(format!("grid {rows}x{cols} has no cells")));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Cells above, below, left and right of `c` that exist, ascending.
    pub fn adjacent(&self, c: usize) -> Vec<usize> {
        let (r, k) = (c / self.cols, c % self.cols);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(c - self.cols);
        }
        if k > 0 {
            out.push(c - 1);
        }
        if k + 1 < self.cols {
            out.push(c + 1);
        }
        if r + 1 < self.rows {
            out.push(c + self.cols);
        }
        out
    }

    /// `N(c)`: `c` together with its adjacent cells, ascending.
    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        let mut out = self.adjacent(c);
        out.push(c);
        out.sort_unstable();
        out
    }

    pub fn can_move(&self, from: usize, to: usize) -> bool {
        let (r1, c1) = (from / self.cols, from % self.cols);
        let (r2, c2) = (to / self.cols, to % self.cols);
        r1.abs_diff(r2) + c1.abs_diff(c2) <= 1
    }

    /// Cells of row `row` (0-based).
    pub fn row_cells(&self, row: usize) -> Vec<usize> {
        (0..self.cols).map(|k| row * self.cols + k).collect()
    }
}

/// How the parameter vector perturbs the instance.
///
/// * `A`: `xi = (xi_0, xi_1, ..., xi_I)`; `alpha = alpha_bar + xi_0` and
///   `q_i = max(0, 1/I + xi_i) / sum_j max(0, 1/I + xi_j)`.
/// * `B`: `xi = (xi_1, ..., xi_I)`; `alpha = alpha_bar` and `q_i = 1/I + xi_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameterization {
    A,
    B,
}

/// SP1 minimizes nondetection of target 1 over feasible paths; SP2 adds the
/// constraint that nondetection of target 2 is at most `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Sp1,
    Sp2,
}

impl ProblemKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Sp1 => "sp1",
            Self::Sp2 => "sp2",
        }
    }
}

/// Scenario weights and detection rate at a particular parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub q: Vec<f64>,
    pub alpha: f64,
}

impl Weights {
    /// `sum_i q_i exp(-alpha * counts_i)`: the one expression every objective
    /// evaluation in the crate goes through.
    pub fn nondetection(&self, counts: &[u32]) -> f64 {
        let mut s = 0.0;
        for (q, &d) in self.q.iter().zip(counts) {
            s += q * (-self.alpha * f64::from(d)).exp();
        }
        s
    }
}

/// One searcher path: a cell per period.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchPath {
    cells: Vec<usize>,
}

impl SearchPath {
    pub fn new(cells: Vec<usize>) -> Self {
        Self { cells }
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The binary vector `y` with `y[t*C + c] = 1` iff the path is in `c` at `t`.
    pub fn to_binary(&self, cell_count: usize) -> Vec<bool> {
        let mut y = vec![false; cell_count * self.cells.len()];
        for (t, &c) in self.cells.iter().enumerate() {
            y[t * cell_count + c] = true;
        }
        y
    }

    /// Reads a path out of a binary vector; `None` unless every period has
    /// exactly one selected cell.
    pub fn from_binary(y: &[bool], cell_count: usize, horizon: usize) -> Option<Self> {
        if y.len() != cell_count * horizon {
            return None;
        }
        let mut cells = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let period = &y[t * cell_count..(t + 1) * cell_count];
            let mut on = period.iter().enumerate().filter(|(_, &b)| b);
            match (on.next(), on.next()) {
                (Some((c, _)), None) => cells.push(c),
                _ => return None,
            }
        }
        Some(Self { cells })
    }

    /// 1-based cell numbers joined by spaces.
    pub fn display_one_based(&self) -> String {
        self.cells.iter().map(|c| (c + 1).to_string()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchInstance {
    grid: Grid,
    horizon: usize,
    /// `targets[k][i][t]`: cell of target `k` at period `t` under scenario `i`.
    targets: Vec<Vec<Vec<usize>>>,
    alpha_bar: f64,
    mode: Parameterization,
    tau: f64,
}

impl SearchInstance {
    pub fn new(
        grid: Grid,
        horizon: usize,
        targets: Vec<Vec<Vec<usize>>>,
        alpha_bar: f64,
        mode: Parameterization,
        tau: f64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(domain("horizon must be at least one period"));
        }
        if !(alpha_bar > 0.0 && alpha_bar.is_finite()) {
            return Err(domain(format!("nominal detection rate {alpha_bar} must be positive")));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(domain(format!("threshold tau = {tau} outside [0, 1]")));
        }
        if targets.is_empty() || targets.len() > 2 {
            return Err(structural(format!("expected one or two targets, got {}", targets.len())));
        }
        let scenarios = targets[0].len();
        if scenarios == 0 {
            return Err(structural("targets need at least one scenario"));
        }
        let cells = grid.cell_count();
        for (k, target) in targets.iter().enumerate() {
            if target.len() != scenarios {
                return Err(structural(format!(
                    "target {} has {} scenarios, target 1 has {scenarios}",
                    k + 1,
                    target.len()
                )));
            }
            for (i, track) in target.iter().enumerate() {
                if track.len() != horizon {
                    return Err(structural(format!(
                        "target {} scenario {} has {} periods, horizon is {horizon}",
                        k + 1,
                        i + 1,
                        track.len()
                    )));
                }
                if let Some(&c) = track.iter().find(|&&c| c >= cells) {
                    return Err(structural(format!("cell {} outside the {cells}-cell grid", c + 1)));
                }
            }
        }
        Ok(Self { grid, horizon, targets, alpha_bar, mode, tau })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn scenario_count(&self) -> usize {
        self.targets[0].len()
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    pub fn mode(&self) -> Parameterization {
        self.mode
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        let mut out = self.clone();
        if !(0.0..=1.0).contains(&tau) {
            return Err(domain(format!("threshold tau = {tau} outside [0, 1]")));
        }
        out.tau = tau;
        Ok(out)
    }

    /// Length of the parameter vector.
    pub fn param_dim(&self) -> usize {
        match self.mode {
            Parameterization::A => self.scenario_count() + 1,
            Parameterization::B => self.scenario_count(),
        }
    }

    /// Number of binary decisions `C * T`.
    pub fn decision_dim(&self) -> usize {
        self.grid.cell_count() * self.horizon
    }

    /// Cell of target `k` (0-based) at period `t` under scenario `i`.
    pub fn target_cell(&self, k: usize, i: usize, t: usize) -> usize {
        self.targets[k][i][t]
    }

    pub fn target_tracks(&self, k: usize) -> &[Vec<usize>] {
        &self.targets[k]
    }

    pub fn check_kind(&self, kind: ProblemKind) -> Result<()> {
        if kind == ProblemKind::Sp2 && self.targets.len() < 2 {
            return Err(structural("SP2 needs a second target"));
        }
        Ok(())
    }

    pub fn validate_param(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.param_dim() {
            return Err(structural(format!(
                "parameter vector has length {}, instance expects {}",
                xi.len(),
                self.param_dim()
            )));
        }
        if let Some(v) = xi.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("parameter entry {v} is not finite")));
        }
        if self.mode == Parameterization::B {
            let base = 1.0 / self.scenario_count() as f64;
            if let Some((i, v)) = xi.iter().enumerate().find(|(_, v)| base + **v < -1e-12) {
                return Err(domain(format!("q_{} = {} is negative", i + 1, base + v)));
            }
            let total: f64 = xi.iter().sum();
            if total.abs() > SIMPLEX_TOL {
                return Err(domain(format!("mode-B parameter sums to {total}, expected 0")));
            }
        }
        Ok(())
    }

    pub fn qvec(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.validate_param(xi)?;
        let base = 1.0 / self.scenario_count() as f64;
        match self.mode {
            Parameterization::A => {
                let num: Vec<f64> = xi[1..].iter().map(|v| (base + v).max(0.0)).collect();
                let total: f64 = num.iter().sum();
                if total <= 0.0 {
                    return Err(Error::Degenerate("every scenario weight is clipped to zero".into()));
                }
                Ok(num.into_iter().map(|v| v / total).collect())
            }
            Parameterization::B => Ok(xi.iter().map(|v| (base + v).max(0.0)).collect()),
        }
    }

    pub fn detection_rate(&self, xi: &[f64]) -> Result<f64> {
        self.validate_param(xi)?;
        match self.mode {
            Parameterization::A => {
                let a = self.alpha_bar + xi[0];
                if a > 0.0 {
                    Ok(a)
                } else {
                    Err(domain(format!("detection rate {a} is not positive")))
                }
            }
            Parameterization::B => Ok(self.alpha_bar),
        }
    }

    pub fn weights(&self, xi: &[f64]) -> Result<Weights> {
        Ok(Weights { q: self.qvec(xi)?, alpha: self.detection_rate(xi)? })
    }

    /// Per-scenario detection counts of target `k` along a path.
    pub fn path_counts(&self, path: &SearchPath, k: usize) -> Vec<u32> {
        self.targets[k]
            .iter()
            .map(|track| {
                track
                    .iter()
                    .zip(path.cells())
                    .filter(|(a, b)| a == b)
                    .count() as u32
            })
            .collect()
    }

    /// Per-scenario counts `sum_{c,t} zeta_{c,t,i} y_{c,t}` for a raw binary
    /// vector, which need not describe a path.
    pub fn raw_counts(&self, y: &[bool], k: usize) -> Result<Vec<u32>> {
        self.check_decision_len(y)?;
        let cells = self.grid.cell_count();
        Ok(self.targets[k]
            .iter()
            .map(|track| {
                track
                    .iter()
                    .enumerate()
                    .filter(|&(t, &c)| y[t * cells + c])
                    .count() as u32
            })
            .collect())
    }

    fn check_decision_len(&self, y: &[bool]) -> Result<()> {
        if y.len() != self.decision_dim() {
            return Err(structural(format!(
                "decision vector has length {}, expected {}",
                y.len(),
                self.decision_dim()
            )));
        }
        Ok(())
    }

    /// Nondetection probability of target `k` (0-based) along `path`.
    pub fn nondetect_prob(&self, xi: &[f64], path: &SearchPath, k: usize) -> Result<f64> {
        let w = self.weights(xi)?;
        Ok(w.nondetection(&self.path_counts(path, k)))
    }

    /// Nondetection probability for a raw binary vector.
    pub fn nondetect_prob_raw(&self, xi: &[f64], y: &[bool], k: usize) -> Result<f64> {
        let w = self.weights(xi)?;
        Ok(w.nondetection(&self.raw_counts(y, k)?))
    }

    /// Path constraints: one cell per period and moves within `N(c)`.
    pub fn is_path(&self, path: &SearchPath) -> bool {
        path.len() == self.horizon
            && path.cells().iter().all(|&c| c < self.grid.cell_count())
            && path.cells().windows(2).all(|w| self.grid.can_move(w[0], w[1]))
    }

    /// Full feasibility of a raw binary decision for SP1 or SP2 at `xi`.
    pub fn feasible(&self, xi: &[f64], y: &[bool], kind: ProblemKind) -> Result<bool> {
        self.check_decision_len(y)?;
        let Some(path) = SearchPath::from_binary(y, self.grid.cell_count(), self.horizon) else {
            return Ok(false);
        };
        self.path_feasible(xi, &path, kind)
    }

    pub fn path_feasible(&self, xi: &[f64], path: &SearchPath, kind: ProblemKind) -> Result<bool> {
        if !self.is_path(path) {
            return Ok(false);
        }
        match kind {
            ProblemKind::Sp1 => Ok(true),
            ProblemKind::Sp2 => {
                self.check_kind(kind)?;
                Ok(self.nondetect_prob(xi, path, 1)? <= self.tau)
            }
        }
    }

    /// Objective of target 1 when `y` is feasible, `None` otherwise. This is
    /// the evaluator handed to the minimum decision rules.
    pub fn objective_if_feasible(&self, xi: &[f64], y: &[bool], kind: ProblemKind) -> Result<Option<f64>> {
        if !self.feasible(xi, y, kind)? {
            return Ok(None);
        }
        Ok(Some(self.nondetect_prob_raw(xi, y, 0)?))
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            rows: self.grid.rows,
            cols: self.grid.cols,
            horizon: self.horizon,
            scenarios: self.scenario_count(),
            mode: self.mode,
            tau: self.tau,
            alpha_bar: self.alpha_bar,
            targets: self
                .targets
                .iter()
                .map(|t| t.iter().map(|s| s.iter().map(|c| c + 1).collect()).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text)?;
        f.into_instance()
    }
}

/// On-disk instance layout. Cell numbers are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "I")]
    pub scenarios: usize,
    pub mode: Parameterization,
    pub tau: f64,
    pub alpha_bar: f64,
    pub targets: Vec<Vec<Vec<usize>>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<SearchInstance> {
        let grid = Grid::new(self.rows, self.cols)?;
        let mut targets = Vec::with_capacity(self.targets.len());
        for t in self.targets {
            let mut scen = Vec::with_capacity(t.len());
            for s in t {
                if s.contains(&0) {
                    return Err(structural("cell numbers in instance files start at 1"));
                }
                scen.push(s.into_iter().map(|c| c - 1).collect());
            }
            targets.push(scen);
        }
        let inst = SearchInstance::new(grid, self.horizon, targets, self.alpha_bar, self.mode, self.tau)?;
        if inst.scenario_count() != self.scenarios {
            return Err(structural(format!(
                "file declares I = {} but lists {} scenarios",
                self.scenarios,
                inst.scenario_count()
            )));
        }
        Ok(inst)
    }
}

/// Samples `count` scenario tracks of length `horizon` from the target Markov
/// chain: stay with probability `stay_prob`, otherwise move to a uniformly
/// chosen adjacent cell. Period 1 is drawn uniformly from `starts`.
pub fn gen_scenarios<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Grid,
    starts: &[usize],
    horizon: usize,
    count: usize,
    stay_prob: f64,
) -> Result<Vec<Vec<usize>>> {
    if starts.is_empty() {
        return Err(domain("empty start set"));
    }
    if let Some(&c) = starts.iter().find(|&&c| c >= grid.cell_count()) {
        return Err(domain(format!("start cell {} outside the grid", c + 1)));
    }
    if !(0.0..=1.0).contains(&stay_prob) {
        return Err(domain(format!("stay probability {stay_prob} outside [0, 1]")));
    }
    let adjacency: Vec<Vec<usize>> = (0..grid.cell_count()).map(|c| grid.adjacent(c)).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut cell = if starts.len() == 1 { starts[0] } else { starts[rng.gen_range(0..starts.len())] };
        let mut track = Vec::with_capacity(horizon);
        track.push(cell);
        for _ in 1..horizon {
            let adj = &adjacency[cell];
            let stay = rng.gen::<f64>() < stay_prob;
            if !stay && !adj.is_empty() {
                cell = adj[rng.gen_range(0..adj.len())];
            }
            track.push(cell);
        }
        out.push(track);
    }
    Ok(out)
}
