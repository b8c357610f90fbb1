//! Dense two-phase primal simplex with Bland's rule, and the L1-minimal
//! separation problem built on it.
//!
//! Sized for small problems: a few hundred rows and columns at most.

use crate::error::{domain, structural, Error, Result};
use crate::rules::{dot, MarginSpec};

const PIVOT_TOL: f64 = 1e-9;
const BREAKDOWN_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// `minimize cost . x` subject to `rows[k] . x (sense_k) rhs[k]` and
/// `lower <= x <= upper`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl StandardLp {
    /// Nonnegative variables, no rows.
    pub fn new(cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            cost,
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn add_row(&mut self, coef: Vec<f64>, sense: RowSense, rhs: f64) {
        self.rows.push(coef);
        self.senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.cost.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(structural("bound vectors do not match the cost vector"));
        }
        if self.senses.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(structural("row senses or right-hand sides do not match the rows"));
        }
        if let Some(k) = self.rows.iter().position(|r| r.len() != n) {
            return Err(structural(format!("row {k} has the wrong length")));
        }
        let finite = self.cost.iter().chain(self.rhs.iter()).chain(self.rows.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(domain("LP data must be finite"));
        }
        for j in 0..n {
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY || self.lower[j] > self.upper[j] {
                return Err(domain(format!("variable {j} has empty bounds")));
            }
        }
        Ok(())
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (k, row) in self.rows.iter().enumerate() {
            let lhs = dot(row, x);
            let v = match self.senses[k] {
                RowSense::Le => lhs - self.rhs[k],
                RowSense::Ge => self.rhs[k] - lhs,
                RowSense::Eq => (lhs - self.rhs[k]).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

// How an original variable is expressed in nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum Column {
    Shifted { col: usize, lower: f64 },
    Mirrored { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

pub fn solve_lp(lp: &StandardLp) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars();

    // Map every variable onto nonnegative columns.
    let mut map = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // column <= bound
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            map.push(Column::Shifted { col: ncols, lower: lo });
            if hi.is_finite() {
                extra_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            map.push(Column::Mirrored { col: ncols, upper: hi });
            ncols += 1;
        } else {
            map.push(Column::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // Rows over the structural columns with adjusted right-hand sides.
    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut senses = Vec::new();
    let mut b = Vec::new();
    for (k, row) in lp.rows.iter().enumerate() {
        let mut r = vec![0.0; ncols];
        let mut rhs = lp.rhs[k];
        for (j, &coef) in row.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            match map[j] {
                Column::Shifted { col, lower } => {
                    r[col] += coef;
                    rhs -= coef * lower;
                }
                Column::Mirrored { col, upper } => {
                    r[col] -= coef;
                    rhs -= coef * upper;
                }
                Column::Split { pos, neg } => {
                    r[pos] += coef;
                    r[neg] -= coef;
                }
            }
        }
        a.push(r);
        senses.push(lp.senses[k]);
        b.push(rhs);
    }
    for (col, ub) in extra_rows {
        let mut r = vec![0.0; ncols];
        r[col] = 1.0;
        a.push(r);
        senses.push(RowSense::Le);
        b.push(ub);
    }
    let mut cost = vec![0.0; ncols];
    let mut cost_shift = 0.0;
    for j in 0..n {
        let c = lp.cost[j];
        match map[j] {
            Column::Shifted { col, lower } => {
                cost[col] += c;
                cost_shift += c * lower;
            }
            Column::Mirrored { col, upper } => {
                cost[col] -= c;
                cost_shift += c * upper;
            }
            Column::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let z = match Tableau::build(&a, &senses, &b, ncols).solve(&cost)? {
        TableauOutcome::Infeasible => return Ok(LpOutcome::Infeasible),
        TableauOutcome::Unbounded => return Ok(LpOutcome::Unbounded),
        TableauOutcome::Optimal(z) => z,
    };

    let x: Vec<f64> = map
        .iter()
        .map(|m| match *m {
            Column::Shifted { col, lower } => lower + z[col],
            Column::Mirrored { col, upper } => upper - z[col],
            Column::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let _ = cost_shift;
    let scale = 1.0 + lp.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let viol = lp.max_violation(&x);
    if viol > 1e-7 * scale {
        return Err(Error::Numerical(format!("simplex solution violates constraints by {viol:e}")));
    }
    let objective = dot(&lp.cost, &x);
    Ok(LpOutcome::Optimal { x, objective })
}

enum TableauOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Equality-form tableau `[A | I_slack | I_art] z = b` with `b >= 0`.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Structural plus slack columns; artificials follow.
    real_cols: usize,
    total_cols: usize,
    structural: usize,
}

impl Tableau {
    fn build(a: &[Vec<f64>], senses: &[RowSense], b: &[f64], ncols: usize) -> Self {
        let m = a.len();
        let slacks = senses.iter().filter(|s| **s != RowSense::Eq).count();
        let real_cols = ncols + slacks;
        let total_cols = real_cols + m;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack_at = ncols;
        for k in 0..m {
            let mut row = vec![0.0; total_cols];
            row[..ncols].copy_from_slice(&a[k]);
            let mut r = b[k];
            let slack_col = match senses[k] {
                RowSense::Le => {
                    row[slack_at] = 1.0;
                    slack_at += 1;
                    Some(slack_at - 1)
                }
                RowSense::Ge => {
                    row[slack_at] = -1.0;
                    slack_at += 1;
                    Some(slack_at - 1)
                }
                RowSense::Eq => None,
            };
            if r < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                r = -r;
            }
            // A slack with +1 after normalization can start in the basis.
            match slack_col {
                Some(s) if row[s] > 0.0 => basis.push(s),
                _ => {
                    row[real_cols + k] = 1.0;
                    basis.push(real_cols + k);
                }
            }
            rows.push(row);
            rhs.push(r);
        }
        Self { rows, rhs, basis, real_cols, total_cols, structural: ncols }
    }

    fn solve(mut self, cost: &[f64]) -> Result<TableauOutcome> {
        let m = self.rows.len();
        let has_artificial = self.basis.iter().any(|&b| b >= self.real_cols);
        if has_artificial {
            let mut phase1 = vec![0.0; self.total_cols];
            for c in phase1.iter_mut().skip(self.real_cols) {
                *c = 1.0;
            }
            match self.optimize(&phase1, self.total_cols)? {
                true => {}
                false => unreachable!("phase one is bounded below by zero"),
            }
            let infeas: f64 = (0..m).filter(|&k| self.basis[k] >= self.real_cols).map(|k| self.rhs[k]).sum();
            if infeas > FEAS_TOL {
                return Ok(TableauOutcome::Infeasible);
            }
            self.drive_out_artificials();
        }
        let mut full = vec![0.0; self.total_cols];
        full[..self.structural].copy_from_slice(cost);
        if !self.optimize(&full, self.real_cols)? {
            return Ok(TableauOutcome::Unbounded);
        }
        let mut z = vec![0.0; self.structural];
        for (k, &bcol) in self.basis.iter().enumerate() {
            if bcol < self.structural {
                z[bcol] = self.rhs[k].max(0.0);
            }
        }
        Ok(TableauOutcome::Optimal(z))
    }

    /// Bland's rule over columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_ITER {
            // reduced costs: c_j - c_B^T column_j
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for (k, &bcol) in self.basis.iter().enumerate() {
                    let cb = cost[bcol];
                    if cb != 0.0 {
                        rc -= cb * self.rows[k][j];
                    }
                }
                if rc < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..self.rows.len() {
                let a = self.rows[k][j];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[k] / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[k] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((k, ratio));
                    }
                }
            }
            let Some((k, _)) = leave else {
                return Ok(false);
            };
            self.pivot(k, j)?;
        }
        Err(Error::Numerical(format!("simplex did not terminate within {MAX_ITER} pivots")))
    }

    fn pivot(&mut self, k: usize, j: usize) -> Result<()> {
        let p = self.rows[k][j];
        if p.abs() < BREAKDOWN_TOL {
            return Err(Error::Numerical(format!(
                "pivot element {p:e} at row {k}, column {j} is below {BREAKDOWN_TOL:e}"
            )));
        }
        let inv = 1.0 / p;
        self.rows[k].iter_mut().for_each(|v| *v *= inv);
        self.rhs[k] *= inv;
        self.rows[k][j] = 1.0;
        let pivot_row = self.rows[k].clone();
        let pivot_rhs = self.rhs[k];
        for r in 0..self.rows.len() {
            if r == k {
                continue;
            }
            let f = self.rows[r][j];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.rows[r].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.rows[r][j] = 0.0;
            self.rhs[r] -= f * pivot_rhs;
            if self.rhs[r] < 0.0 && self.rhs[r] > -1e-12 {
                self.rhs[r] = 0.0;
            }
        }
        self.basis[k] = j;
        Ok(())
    }

    /// After phase one, swap zero-level artificials for real columns or drop
    /// their rows when redundant.
    fn drive_out_artificials(&mut self) {
        let mut k = 0;
        while k < self.rows.len() {
            if self.basis[k] < self.real_cols {
                k += 1;
                continue;
            }
            let col = (0..self.real_cols)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.rows[k][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => {
                    // pivot on a tiny-but-eligible element is safe here: rhs is zero
                    let _ = self.pivot(k, j);
                    k += 1;
                }
                None => {
                    self.rows.remove(k);
                    self.rhs.remove(k);
                    self.basis.remove(k);
                }
            }
        }
    }
}

/// Outcome of one L1-minimal separation.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparationStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub row: Vec<f64>,
    pub offset: f64,
    pub status: SeparationStatus,
    pub l1_norm: f64,
}

/// Finds `(B_i, b_i)` minimizing `||B_i||_1` subject to
/// `eps <= <B_i, xi> + b_i <= delta` for points labelled 1 and
/// `-delta <= <B_i, xi> + b_i <= -eps` for points labelled 0.
///
/// Points that all carry the same label get `B_i = 0` and `b_i = +-eps`.
pub fn l1_separation(points: &[(&[f64], bool)], spec: &MarginSpec) -> Result<SeparationResult> {
    if !spec.is_finite() {
        return Err(domain("separation needs a finite delta"));
    }
    let Some(&(first, _)) = points.first() else {
        return Err(structural("separation needs at least one point"));
    };
    let r = first.len();
    if points.iter().any(|(p, _)| p.len() != r) {
        return Err(structural("separation points have different lengths"));
    }
    let (eps, delta) = (spec.epsilon(), spec.delta());
    if points.iter().all(|(_, y)| *y) {
        return Ok(SeparationResult { row: vec![0.0; r], offset: eps, status: SeparationStatus::Optimal, l1_norm: 0.0 });
    }
    if points.iter().all(|(_, y)| !*y) {
        return Ok(SeparationResult { row: vec![0.0; r], offset: -eps, status: SeparationStatus::Optimal, l1_norm: 0.0 });
    }

    // columns: B+ (r), B- (r), b (free)
    let mut cost = vec![1.0; 2 * r];
    cost.push(0.0);
    let mut lp = StandardLp::new(cost);
    lp.lower[2 * r] = f64::NEG_INFINITY;
    for (xi, label) in points {
        let mut coef = Vec::with_capacity(2 * r + 1);
        coef.extend_from_slice(xi);
        coef.extend(xi.iter().map(|v| -v));
        coef.push(1.0);
        if *label {
            lp.add_row(coef.clone(), RowSense::Ge, eps);
            lp.add_row(coef, RowSense::Le, delta);
        } else {
            lp.add_row(coef.clone(), RowSense::Le, -eps);
            lp.add_row(coef, RowSense::Ge, -delta);
        }
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal { x, .. } => {
            let row: Vec<f64> = (0..r).map(|j| x[j] - x[r + j]).collect();
            let l1_norm = row.iter().map(|v| v.abs()).sum();
            Ok(SeparationResult { row, offset: x[2 * r], status: SeparationStatus::Optimal, l1_norm })
        }
        LpOutcome::Infeasible => Ok(SeparationResult {
            row: vec![0.0; r],
            offset: 0.0,
            status: SeparationStatus::Infeasible,
            l1_norm: f64::NAN,
        }),
        LpOutcome::Unbounded => Err(Error::Numerical("separation LP reported unbounded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(out: LpOutcome) -> (Vec<f64>, f64) {
        match out {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn single_lower_bound() {
        let mut lp = StandardLp::new(vec![1.0]);
        lp.lower[0] = f64::NEG_INFINITY;
        lp.add_row(vec![1.0], RowSense::Ge, 3.0);
        let (x, v) = opt(solve_lp(&lp).unwrap());
        assert!((x[0] - 3.0).abs() < 1e-12 && (v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn covering_row() {
        let mut lp = StandardLp::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], RowSense::Ge, 1.0);
        let (_, v) = opt(solve_lp(&lp).unwrap());
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = StandardLp::new(vec![1.0]);
        lp.add_row(vec![1.0], RowSense::Le, -1.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
        let mut lp = StandardLp::new(vec![-1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], RowSense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_and_bounds() {
        // min -x - 2y  s.t. x + y = 4, 0 <= x <= 3, 1 <= y <= 2
        let mut lp = StandardLp::new(vec![-1.0, -2.0]);
        lp.lower = vec![0.0, 1.0];
        lp.upper = vec![3.0, 2.0];
        lp.add_row(vec![1.0, 1.0], RowSense::Eq, 4.0);
        let (x, v) = opt(solve_lp(&lp).unwrap());
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        assert!((v + 6.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = StandardLp::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], RowSense::Eq, 2.0);
        lp.add_row(vec![2.0, 2.0], RowSense::Eq, 4.0);
        lp.add_row(vec![1.0, 0.0], RowSense::Ge, 0.5);
        let (_, v) = opt(solve_lp(&lp).unwrap());
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn upper_bounded_only_variable() {
        let mut lp = StandardLp::new(vec![-1.0]);
        lp.lower[0] = f64::NEG_INFINITY;
        lp.upper[0] = 2.5;
        let (x, _) = opt(solve_lp(&lp).unwrap());
        assert!((x[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn pure_label_shortcut() {
        let spec = MarginSpec::new(0.001, 1.0).unwrap();
        let a = [0.3, 0.1];
        let b = [-0.2, 0.4];
        let r = l1_separation(&[(&a, true), (&b, true)], &spec).unwrap();
        assert_eq!((r.row.clone(), r.offset, r.l1_norm), (vec![0.0, 0.0], 0.001, 0.0));
        let r = l1_separation(&[(&a, false), (&b, false)], &spec).unwrap();
        assert_eq!(r.offset, -0.001);
    }

    #[test]
    fn one_dimensional_hand_example() {
        let spec = MarginSpec::new(0.5, 1.0).unwrap();
        let lo = [-1.0];
        let hi = [1.0];
        let r = l1_separation(&[(&lo, false), (&hi, true)], &spec).unwrap();
        assert_eq!(r.status, SeparationStatus::Optimal);
        assert!((r.l1_norm - 0.5).abs() < 1e-12);
        assert!((r.row[0] - 0.5).abs() < 1e-12);
        assert!(r.offset.abs() < 1e-12);
    }

    #[test]
    fn identical_points_with_different_labels_are_infeasible() {
        let spec = MarginSpec::new(0.1, 1.0).unwrap();
        let p = [0.2, 0.2];
        let r = l1_separation(&[(&p, false), (&p, true)], &spec).unwrap();
        assert_eq!(r.status, SeparationStatus::Infeasible);
        let inf = MarginSpec::unbounded(0.1).unwrap();
        assert!(l1_separation(&[(&p, true)], &inf).is_err());
    }
}
