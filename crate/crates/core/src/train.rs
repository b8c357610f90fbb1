//! Training-problem evaluation and the decomposition algorithm.
//!
//! The decomposition relaxes the coupling between training points:
//!
//! 1. solve every single-point problem exactly, giving per-point lower
//!    bounds whose risk `L` bounds the training problem from below;
//! 2. fit each coordinate `(B_i, b_i)` by an L1-minimal separation of the
//!    per-point decisions, so the rule reproduces them inside the margin set;
//! 3. evaluate the fitted rule, giving the upper bound `U`.
//!
//! Only the worst-case risk is supported for the second-target constraint,
//! which then reduces to one threshold check per training point.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};
use crate::probspace::{risk_of, FiniteProbSpace, RiskSpec};
use crate::rules::{heaviside, in_margin_set, AffineRule, MarginSpec, TabularRule, TrainedRule};
use crate::search::{ProblemKind, SearchInstance, SearchPath};
use crate::simplex::{l1_separation, SeparationStatus};
use crate::solver::{solve_with, SolveOptions, SolveResult, SolveStatus};

/// Singular values at or below this count as zero in the independence check.
pub const RANK_TOL: f64 = 1e-10;

// Separations are solved against a band this much narrower than the margin
// set so that simplex round-off cannot push a value across its edge.
const FIT_SLACK: f64 = 1e-12;

const HEURISTIC_PASSES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub risk0: RiskSpec,
    pub margin: MarginSpec,
    pub theta: f64,
    pub step1_tol: f64,
    pub heuristic: bool,
    /// Training-point probabilities; uniform when absent.
    pub probabilities: Option<Vec<f64>>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            risk0: RiskSpec::Expectation,
            margin: MarginSpec::default(),
            theta: 0.001,
            step1_tol: 0.0,
            heuristic: false,
            probabilities: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        self.risk0.validate()?;
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(domain(format!("regularization weight {} must be nonnegative", self.theta)));
        }
        if !(self.step1_tol >= 0.0) {
            return Err(domain(format!("step-1 tolerance {} must be nonnegative", self.step1_tol)));
        }
        Ok(())
    }

    pub fn space(&self, n: usize) -> Result<FiniteProbSpace> {
        match &self.probabilities {
            None => FiniteProbSpace::uniform(n),
            Some(p) if p.len() == n => FiniteProbSpace::new(p.clone()),
            Some(p) => Err(structural(format!("{} probabilities for {n} training points", p.len()))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A `G`-value lies outside the margin set.
    Margin,
    /// The decision is not a path.
    NotAPath,
    /// Target-2 nondetection exceeds the threshold.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub omega: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingEval {
    pub value: f64,
    pub feasible: bool,
    pub violations: Vec<Violation>,
    /// Target-1 nondetection at each training point.
    pub per_point: Vec<f64>,
}

/// Objective and constraint status of a rule on the training problem.
pub fn training_objective<R: TrainedRule + ?Sized>(
    rule: &R,
    training: &[Vec<f64>],
    inst: &SearchInstance,
    config: &TrainingConfig,
    kind: ProblemKind,
) -> Result<TrainingEval> {
    inst.check_kind(kind)?;
    let space = config.space(training.len())?;
    let mut per_point = Vec::with_capacity(training.len());
    let mut violations = Vec::new();
    for (w, xi) in training.iter().enumerate() {
        let y = rule.decision_at(w, xi)?;
        if !rule.in_margin_at(w, xi, &config.margin)? {
            violations.push(Violation { omega: w, kind: ViolationKind::Margin });
        }
        per_point.push(inst.nondetect_prob_raw(xi, &y, 0)?);
        match SearchPath::from_binary(&y, inst.grid().cell_count(), inst.horizon()) {
            Some(p) if inst.is_path(&p) => {
                if kind == ProblemKind::Sp2 && !inst.path_feasible(xi, &p, kind)? {
                    violations.push(Violation { omega: w, kind: ViolationKind::Threshold });
                }
            }
            _ => violations.push(Violation { omega: w, kind: ViolationKind::NotAPath }),
        }
    }
    let value = risk_of(config.risk0, &space, &per_point)? + config.theta * rule.regularizer();
    Ok(TrainingEval { value, feasible: violations.is_empty(), violations, per_point })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub step1_secs: f64,
    pub step2_secs: f64,
    pub step3_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompResult {
    pub kind: ProblemKind,
    pub risk0: RiskSpec,
    pub theta: f64,
    pub per_omega: Vec<SolveResult>,
    /// Decisions the rule reproduces; the per-point optima unless the
    /// heuristic swapped some of them.
    pub paths: Vec<SearchPath>,
    /// Target-1 nondetection of `paths` at each training point.
    pub values: Vec<f64>,
    #[serde(rename = "L")]
    pub lower: f64,
    #[serde(rename = "U")]
    pub upper: f64,
    pub gap: f64,
    pub regularizer: f64,
    pub rule: AffineRule,
    /// Coordinates whose separation failed; the rule does not reproduce the
    /// decisions there.
    pub partial: Vec<usize>,
    pub heuristic_swaps: usize,
    pub timings: Timings,
}

impl DecompResult {
    pub fn is_partial(&self) -> bool {
        !self.partial.is_empty()
    }

    pub fn abs_gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn decisions(&self, cells: usize) -> Vec<Vec<bool>> {
        self.paths.iter().map(|p| p.to_binary(cells)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per training point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["omega", "lower_bound", "optimum", "value", "status", "nodes", "path"])?;
        for (k, res) in self.per_omega.iter().enumerate() {
            let status = match res.status {
                SolveStatus::Optimal => "optimal".to_string(),
                SolveStatus::Feasible { .. } => "feasible".to_string(),
                SolveStatus::Infeasible => "infeasible".to_string(),
            };
            out.write_record([
                (k + 1).to_string(),
                format!("{:e}", res.lower_bound),
                format!("{:e}", res.value),
                format!("{:e}", self.values[k]),
                status,
                res.nodes_explored.to_string(),
                self.paths[k].display_one_based(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `(U - L) / L`, with 0 when both vanish.
pub fn relative_gap(lower: f64, upper: f64) -> f64 {
    if upper == lower {
        0.0
    } else {
        (upper - lower) / lower
    }
}

/// Rank of the training points augmented with a constant coordinate. The
/// affine separations need these vectors to be linearly independent.
pub fn augmented_rank(training: &[Vec<f64>]) -> usize {
    let n = training.len();
    if n == 0 {
        return 0;
    }
    let r = training[0].len();
    let m = DMatrix::from_fn(n, r + 1, |i, j| if j < r { training[i][j] } else { 1.0 });
    m.rank(RANK_TOL)
}

pub fn check_independence(training: &[Vec<f64>]) -> Result<()> {
    let rank = augmented_rank(training);
    if rank < training.len() {
        return Err(Error::RankDeficient { rank, needed: training.len() });
    }
    Ok(())
}

fn check_training(inst: &SearchInstance, training: &[Vec<f64>]) -> Result<()> {
    if training.is_empty() {
        return Err(structural("training set is empty"));
    }
    for xi in training {
        inst.validate_param(xi)?;
    }
    Ok(())
}

/// Step 1: exact solves at every training point. The first point is solved
/// alone; its path seeds the incumbent of the others.
pub fn solve_training_points(
    inst: &SearchInstance,
    training: &[Vec<f64>],
    kind: ProblemKind,
    abs_tol: f64,
) -> Result<Vec<SolveResult>> {
    let first = solve_with(inst, &training[0], kind, &SolveOptions { abs_tol, ..Default::default() })?;
    let opts = SolveOptions { abs_tol, node_limit: None, warm_start: first.path.clone() };
    let rest: Vec<Result<SolveResult>> =
        training[1..].par_iter().map(|xi| solve_with(inst, xi, kind, &opts)).collect();
    let mut out = Vec::with_capacity(training.len());
    out.push(first);
    for r in rest {
        out.push(r?);
    }
    if let Some(w) = out.iter().position(|r| !r.is_feasible()) {
        return Err(Error::Infeasible(format!("training point {} admits no feasible path", w + 1)));
    }
    Ok(out)
}

/// Outcome of fitting one coordinate of the rule.
#[derive(Debug, Clone)]
struct RowFit {
    row: Vec<f64>,
    offset: f64,
    ok: bool,
}

fn fit_row(training: &[Vec<f64>], labels: &[bool], margin: &MarginSpec, band: &MarginSpec) -> Result<RowFit> {
    let r = training[0].len();
    let points: Vec<(&[f64], bool)> = training.iter().map(Vec::as_slice).zip(labels.iter().copied()).collect();
    let pure = labels.iter().all(|&y| y) || labels.iter().all(|&y| !y);
    let sep = l1_separation(&points, if pure { margin } else { band })?;
    if sep.status == SeparationStatus::Infeasible {
        return Ok(RowFit { row: vec![0.0; r], offset: 0.0, ok: false });
    }
    let ok = points.iter().all(|(xi, y)| {
        let g = crate::rules::dot(&sep.row, xi) + sep.offset;
        heaviside(&[g])[0] == *y && margin.contains(g)
    });
    Ok(RowFit { row: sep.row, offset: sep.offset, ok })
}

fn labels_of(decisions: &[Vec<bool>], i: usize) -> Vec<bool> {
    decisions.iter().map(|y| y[i]).collect()
}

/// Step 2: one L1-minimal separation per coordinate, in parallel.
fn fit_rule(training: &[Vec<f64>], decisions: &[Vec<bool>], margin: &MarginSpec) -> Result<Vec<RowFit>> {
    let band = margin.tightened(FIT_SLACK)?;
    let m = decisions[0].len();
    (0..m)
        .into_par_iter()
        .map(|i| fit_row(training, &labels_of(decisions, i), margin, &band))
        .collect()
}

fn assemble(fits: &[RowFit], r: usize, margin: MarginSpec) -> Result<(AffineRule, Vec<usize>)> {
    let m = fits.len();
    let mut coef = Vec::with_capacity(m * r);
    let mut offset = Vec::with_capacity(m);
    let mut partial = Vec::new();
    for (i, f) in fits.iter().enumerate() {
        coef.extend_from_slice(&f.row);
        offset.push(f.offset);
        if !f.ok {
            partial.push(i);
        }
    }
    Ok((AffineRule::new(m, r, coef, offset, margin)?, partial))
}

fn l1(row: &[f64]) -> f64 {
    row.iter().map(|v| v.abs()).sum()
}

pub fn decompose(
    inst: &SearchInstance,
    training: &[Vec<f64>],
    config: &TrainingConfig,
    kind: ProblemKind,
) -> Result<DecompResult> {
    config.validate()?;
    inst.check_kind(kind)?;
    if !config.margin.is_finite() {
        return Err(domain("decomposition needs a finite delta"));
    }
    check_training(inst, training)?;
    check_independence(training)?;
    let space = config.space(training.len())?;
    let cells = inst.grid().cell_count();
    let r = inst.param_dim();

    let t0 = Instant::now();
    let per_omega = solve_training_points(inst, training, kind, config.step1_tol)?;
    let lower_bounds: Vec<f64> = per_omega.iter().map(|s| s.lower_bound).collect();
    let lower = risk_of(config.risk0, &space, &lower_bounds)?;
    let step1 = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut paths: Vec<SearchPath> = per_omega.iter().map(|s| s.path.clone().expect("feasible")).collect();
    let mut decisions: Vec<Vec<bool>> = paths.iter().map(|p| p.to_binary(cells)).collect();
    let mut fits = fit_rule(training, &decisions, &config.margin)?;
    let step2 = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let mut values: Vec<f64> = per_omega.iter().map(|s| s.value).collect();
    let mut swaps = 0;
    if config.heuristic {
        swaps = improve_by_swaps(inst, training, config, kind, &space, &mut paths, &mut decisions, &mut values, &mut fits)?;
    }
    let (rule, partial) = assemble(&fits, r, config.margin)?;
    let regularizer = rule.l1_regularizer();
    let upper = risk_of(config.risk0, &space, &values)? + config.theta * regularizer;
    let step3 = t2.elapsed().as_secs_f64();

    Ok(DecompResult {
        kind,
        risk0: config.risk0,
        theta: config.theta,
        per_omega,
        paths,
        values,
        lower,
        upper,
        gap: relative_gap(lower, upper),
        regularizer,
        rule,
        partial,
        heuristic_swaps: swaps,
        timings: Timings { step1_secs: step1, step2_secs: step2, step3_secs: step3 },
    })
}

/// Step-3 heuristic: give training point `w` the decision of another point
/// `v` when that decision is feasible at `w` and the refitted rule lowers
/// `U`. Swaps make labels more uniform, which can shrink the regularizer
/// more than the objective grows.
#[allow(clippy::too_many_arguments)]
fn improve_by_swaps(
    inst: &SearchInstance,
    training: &[Vec<f64>],
    config: &TrainingConfig,
    kind: ProblemKind,
    space: &FiniteProbSpace,
    paths: &mut [SearchPath],
    decisions: &mut [Vec<bool>],
    values: &mut [f64],
    fits: &mut [RowFit],
) -> Result<usize> {
    let band = config.margin.tightened(FIT_SLACK)?;
    let total = |fits: &[RowFit], values: &[f64]| -> Result<f64> {
        let reg: f64 = fits.iter().map(|f| l1(&f.row)).sum();
        Ok(risk_of(config.risk0, space, values)? + config.theta * reg)
    };
    let mut current = total(fits, values)?;
    let mut swaps = 0;
    for _ in 0..HEURISTIC_PASSES {
        let mut improved = false;
        for w in 0..training.len() {
            for v in 0..training.len() {
                if decisions[v] == decisions[w] {
                    continue;
                }
                let xi = &training[w];
                if !inst.path_feasible(xi, &paths[v], kind)? {
                    continue;
                }
                let mut trial = decisions.to_vec();
                trial[w] = decisions[v].clone();
                let changed: Vec<usize> = (0..trial[w].len()).filter(|&i| trial[w][i] != decisions[w][i]).collect();
                let refits: Vec<RowFit> = changed
                    .par_iter()
                    .map(|&i| fit_row(training, &labels_of(&trial, i), &config.margin, &band))
                    .collect::<Result<_>>()?;
                // a swap must not break a coordinate that was fitted
                if changed.iter().zip(&refits).any(|(&i, f)| fits[i].ok && !f.ok) {
                    continue;
                }
                let mut trial_fits = fits.to_vec();
                for (&i, f) in changed.iter().zip(refits) {
                    trial_fits[i] = f;
                }
                let mut trial_values = values.to_vec();
                trial_values[w] = inst.nondetect_prob(xi, &paths[v], 0)?;
                let u = total(&trial_fits, &trial_values)?;
                if u < current {
                    current = u;
                    decisions[w] = trial.swap_remove(w);
                    paths[w] = paths[v].clone();
                    values[w] = trial_values[w];
                    fits.clone_from_slice(&trial_fits);
                    swaps += 1;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(swaps)
}

/// Checks that the tabular rule of per-point minimizers attains the lower
/// bound `L` with `theta = 0`, and under expectation risk that every entry is
/// a per-point minimizer.
pub fn recovery_check(
    inst: &SearchInstance,
    training: &[Vec<f64>],
    risk0: RiskSpec,
    kind: ProblemKind,
) -> Result<bool> {
    check_training(inst, training)?;
    let solved = solve_training_points(inst, training, kind, 0.0)?;
    let cells = inst.grid().cell_count();
    let table = TabularRule::new(solved.iter().map(|s| s.path.as_ref().expect("feasible").to_binary(cells)).collect());
    let optima: Vec<f64> = solved.iter().map(|s| s.value).collect();
    tabular_attains_bound(inst, training, risk0, kind, &table, &optima)
}

/// The recovery test for an arbitrary tabular rule against known per-point
/// optima.
pub fn tabular_attains_bound(
    inst: &SearchInstance,
    training: &[Vec<f64>],
    risk0: RiskSpec,
    kind: ProblemKind,
    table: &TabularRule,
    optima: &[f64],
) -> Result<bool> {
    let config = TrainingConfig { risk0, theta: 0.0, ..Default::default() };
    let space = config.space(training.len())?;
    let lower = risk_of(risk0, &space, optima)?;
    let eval = training_objective(table, training, inst, &config, kind)?;
    if !eval.feasible || eval.value != lower {
        return Ok(false);
    }
    if risk0 == RiskSpec::Expectation {
        return Ok(eval.per_point.iter().zip(optima).all(|(v, o)| v == o));
    }
    Ok(true)
}

/// True when the rule reproduces `decisions` at every training point with
/// values inside the margin set.
pub fn reproduces(rule: &AffineRule, training: &[Vec<f64>], decisions: &[Vec<bool>]) -> Result<bool> {
    for (xi, y) in training.iter().zip(decisions) {
        let (g, h) = rule.apply(xi)?;
        if &h != y || !in_margin_set(&g, rule.margin()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::ConstantRule;
    use crate::search::{gen_scenarios, Grid, Parameterization};
    use crate::rng::seeded;

    fn instance(seed: u64) -> SearchInstance {
        let g = Grid::new(2, 3).unwrap();
        let mut rng = seeded(seed);
        let t1 = gen_scenarios(&mut rng, &g, &[0], 4, 5, 0.6).unwrap();
        let t2 = gen_scenarios(&mut rng, &g, &[5], 4, 5, 0.6).unwrap();
        SearchInstance::new(g, 4, vec![t1, t2], 0.510826, Parameterization::B, 0.9).unwrap()
    }

    fn points(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        crate::datagen::simplex_uniform(0.2, dim, n, seed).unwrap()
    }

    #[test]
    fn constant_rule_objective_is_mean_nondetection() {
        let inst = instance(1);
        let training = points(2, 3, 5);
        let path = SearchPath::new(vec![0, 1, 2, 5]);
        let rule = ConstantRule::encoding(&path.to_binary(6), 0.001);
        let cfg = TrainingConfig { theta: 0.0, ..Default::default() };
        let eval = training_objective(&rule, &training, &inst, &cfg, ProblemKind::Sp1).unwrap();
        let direct: f64 =
            training.iter().map(|xi| inst.nondetect_prob(xi, &path, 0).unwrap()).sum::<f64>() / 3.0;
        assert!((eval.value - direct).abs() < 1e-15);
        assert!(eval.feasible);

        let worst = TrainingConfig { risk0: RiskSpec::WorstCase, ..cfg };
        let eval = training_objective(&rule, &training, &inst, &worst, ProblemKind::Sp1).unwrap();
        let max = training.iter().map(|xi| inst.nondetect_prob(xi, &path, 0).unwrap()).fold(0.0, f64::max);
        assert_eq!(eval.value, max);
    }

    #[test]
    fn violations_are_listed() {
        let inst = instance(1);
        let training = points(2, 2, 5);
        let bad = ConstantRule::encoding(&SearchPath::new(vec![0, 5, 5, 5]).to_binary(6), 0.001);
        let eval = training_objective(&bad, &training, &inst, &TrainingConfig::default(), ProblemKind::Sp1).unwrap();
        assert!(!eval.feasible);
        assert_eq!(eval.violations.len(), 2);
        assert!(eval.violations.iter().all(|v| v.kind == ViolationKind::NotAPath));
    }

    #[test]
    fn theta_zero_closes_the_gap() {
        let inst = instance(3);
        let training = points(4, 4, 5);
        let cfg = TrainingConfig { theta: 0.0, ..Default::default() };
        let d = decompose(&inst, &training, &cfg, ProblemKind::Sp2).unwrap();
        assert_eq!(d.gap, 0.0);
        assert_eq!(d.upper, d.lower);
        assert!(reproduces(&d.rule, &training, &d.decisions(6)).unwrap());
    }

    #[test]
    fn gap_identity() {
        let inst = instance(5);
        let training = points(6, 4, 5);
        let cfg = TrainingConfig::default();
        let d = decompose(&inst, &training, &cfg, ProblemKind::Sp1).unwrap();
        assert!(((d.upper - d.lower) - cfg.theta * d.rule.l1_regularizer()).abs() <= 1e-12);
        assert!(!d.is_partial());
    }

    #[test]
    fn single_point_gives_a_constant_rule() {
        let inst = instance(7);
        let training = points(8, 1, 5);
        let d = decompose(&inst, &training, &TrainingConfig::default(), ProblemKind::Sp2).unwrap();
        assert!(d.rule.coefficients().iter().all(|&v| v == 0.0));
        assert_eq!(d.rule.apply(&[0.0; 5]).unwrap().1, d.paths[0].to_binary(6));
    }

    #[test]
    fn rank_deficiency_is_rejected() {
        let inst = instance(7);
        let p = points(8, 1, 5).remove(0);
        let err = decompose(&inst, &[p.clone(), p], &TrainingConfig::default(), ProblemKind::Sp1).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { rank: 1, needed: 2 }));
    }

    #[test]
    fn heuristic_never_raises_the_upper_bound() {
        let inst = instance(9);
        let training = points(10, 5, 5);
        let off = TrainingConfig { theta: 0.05, ..Default::default() };
        let on = TrainingConfig { heuristic: true, ..off.clone() };
        let a = decompose(&inst, &training, &off, ProblemKind::Sp1).unwrap();
        let b = decompose(&inst, &training, &on, ProblemKind::Sp1).unwrap();
        assert!(b.upper <= a.upper);
        assert_eq!(a.lower, b.lower);
        assert!(reproduces(&b.rule, &training, &b.decisions(6)).unwrap());
        let eval = training_objective(&b.rule, &training, &inst, &on, ProblemKind::Sp1).unwrap();
        assert!(eval.feasible);
        assert!((eval.value - b.upper).abs() < 1e-12);
    }

    #[test]
    fn recovery_holds() {
        let inst = instance(11);
        let training = points(12, 3, 5);
        for risk in [RiskSpec::Expectation, RiskSpec::WorstCase, RiskSpec::Superquantile { alpha: 0.5 }] {
            assert!(recovery_check(&inst, &training, risk, ProblemKind::Sp2).unwrap());
        }
    }

    #[test]
    fn json_and_csv() {
        let inst = instance(13);
        let training = points(14, 2, 5);
        let d = decompose(&inst, &training, &TrainingConfig::default(), ProblemKind::Sp1).unwrap();
        let back = DecompResult::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("omega,lower_bound,optimum,value,status,nodes,path\n"));
    }

    #[test]
    fn config_round_trip() {
        let cfg = TrainingConfig { risk0: RiskSpec::Superquantile { alpha: 0.9 }, ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: TrainingConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: TrainingConfig = serde_json::from_str(r#"{"theta": 0.0}"#).unwrap();
        assert_eq!(partial.theta, 0.0);
        assert_eq!(partial.margin, MarginSpec::default());
    }
}
