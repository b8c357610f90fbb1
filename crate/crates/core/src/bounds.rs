//! Lower-bound and suboptimality certificates for trained rules.
//!
//! With `psi_0` Lipschitz in `xi` with modulus `kappa0`, the training lower
//! bound `L` satisfies `L - sigma - kappa0 * diam <= min psi_0(xi, .)` for
//! every `xi` in the parameter set, and the minimum decision rules are
//! `(2 sigma + tau + 2 kappa0 diam)`-optimal.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};
use crate::rules::{amdr_from_candidates, candidate_decisions, mdr, AffineRule};
use crate::search::{Parameterization, ProblemKind, SearchInstance};
use crate::solver::{solve_exact, SolveResult};
use crate::train::DecompResult;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundInputs {
    pub sigma: f64,
    pub tau: f64,
    pub kappa0: f64,
    pub kappa0_prime: f64,
    pub lambda: f64,
    pub diam: f64,
}

impl BoundInputs {
    /// Inputs for an affine `G`-only rule: `lambda = max_i ||B_i||_2` and
    /// `kappa0' = kappa0`.
    pub fn for_rule(rule: &AffineRule, sigma: f64, tau: f64, kappa0: f64, diam: f64) -> Self {
        Self { sigma, tau, kappa0, kappa0_prime: kappa0, lambda: rule.max_row_norm2(), diam }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma, self.tau, self.kappa0, self.kappa0_prime, self.lambda, self.diam];
        if all.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(domain(format!("bound inputs must be finite and nonnegative: {self:?}")))
        }
    }
}

/// Lipschitz modulus of the nondetection probability in `xi` under the
/// additive-weight parameterization: `sqrt(I)`.
pub fn kappa0(inst: &SearchInstance) -> Result<f64> {
    match inst.mode() {
        Parameterization::B => Ok((inst.scenario_count() as f64).sqrt()),
        Parameterization::A => {
            Err(Error::Unsupported("no Lipschitz modulus is available for the clipped parameterization".into()))
        }
    }
}

/// Largest pairwise Euclidean distance.
pub fn diameter(points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() {
        return Err(structural("diameter of an empty set"));
    }
    let mut best = 0.0f64;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            if a.len() != b.len() {
                return Err(structural("points of different lengths"));
            }
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.max(d2);
        }
    }
    Ok(best.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiamConvention {
    /// The radius of the sampling ball, as stated for the data recipe.
    Nominal,
    /// The literal maximum pairwise distance.
    Scan,
}

impl DiamConvention {
    pub fn pick(self, radius: f64, scan: f64) -> f64 {
        match self {
            Self::Nominal => radius,
            Self::Scan => scan,
        }
    }
}

pub fn mdr_amdr_bound(b: &BoundInputs) -> f64 {
    2.0 * b.sigma + b.tau + 2.0 * b.kappa0 * b.diam
}

pub fn direct_rule_bound(b: &BoundInputs) -> f64 {
    2.0 * b.sigma + b.tau + (b.kappa0 + b.kappa0_prime * (1.0 + b.lambda * b.lambda).sqrt()) * b.diam
}

/// `max_i ||B_i||_2 * diam < 2 eps`: the rule's pattern cannot change over a
/// set of that diameter around margin-respecting training points.
pub fn constant_pattern_condition(rule: &AffineRule, diam: f64, epsilon: f64) -> bool {
    rule.max_row_norm2() * diam < 2.0 * epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub point_id: usize,
    pub optimum: f64,
    pub certificate: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub lower: f64,
    pub rows: Vec<LowerBoundRow>,
}

impl LowerBoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.slack >= 0.0)
    }

    pub fn violations(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.slack < 0.0).map(|r| r.point_id).collect()
    }
}

fn solve_all(inst: &SearchInstance, tests: &[Vec<f64>], kind: ProblemKind) -> Result<Vec<SolveResult>> {
    tests.par_iter().map(|xi| solve_exact(inst, xi, kind, 0.0)).collect()
}

/// Checks `L - sigma - kappa0 * diam <= min SP1(xi)` at every test point.
pub fn lower_bound_certificate(
    decomp: &DecompResult,
    inputs: &BoundInputs,
    inst: &SearchInstance,
    tests: &[Vec<f64>],
) -> Result<LowerBoundReport> {
    inputs.validate()?;
    if decomp.kind != ProblemKind::Sp1 {
        return Err(Error::Unsupported("the lower-bound certificate covers SP1 only".into()));
    }
    lower_bound_report(decomp.lower, inputs, inst, tests)
}

/// [`lower_bound_certificate`] for an explicit lower bound.
pub fn lower_bound_report(
    lower: f64,
    inputs: &BoundInputs,
    inst: &SearchInstance,
    tests: &[Vec<f64>],
) -> Result<LowerBoundReport> {
    let certificate = lower - inputs.sigma - inputs.kappa0 * inputs.diam;
    let rows = solve_all(inst, tests, ProblemKind::Sp1)?
        .into_iter()
        .enumerate()
        .map(|(k, s)| LowerBoundRow { point_id: k + 1, optimum: s.value, certificate, slack: s.value - certificate })
        .collect();
    Ok(LowerBoundReport { lower, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Mdr,
    Amdr,
    Direct,
}

impl RuleKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Mdr => "mdr",
            Self::Amdr => "amdr",
            Self::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRow {
    pub rule: RuleKind,
    pub point_id: usize,
    pub feasible: bool,
    /// Target-1 nondetection of the prescribed decision.
    pub value: f64,
    pub optimum: f64,
    /// `value - optimum`; infinite when the decision is infeasible.
    pub subopt: f64,
    /// `None` when no bound applies (the direct rule off its common pattern).
    pub bound: Option<f64>,
    /// Training point whose decision was chosen (MDR and AMDR).
    pub source: Option<usize>,
}

impl RuleRow {
    pub fn slack(&self) -> Option<f64> {
        self.bound.map(|b| b - self.subopt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub inputs: BoundInputs,
    pub mdr_amdr_bound: f64,
    pub direct_bound: f64,
    pub rows: Vec<RuleRow>,
}

impl RuleReport {
    /// Every row with a bound satisfies it.
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.slack().is_none_or(|s| s >= 0.0))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rule", "point_id", "optimum", "value", "subopt", "bound", "slack"])?;
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:e}"));
        for r in &self.rows {
            out.write_record([
                r.rule.label().to_string(),
                r.point_id.to_string(),
                format!("{:e}", r.optimum),
                format!("{:e}", r.value),
                format!("{:e}", r.subopt),
                opt(r.bound),
                opt(r.slack()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// MDR, AMDR and direct-rule suboptimality at each test point against the
/// exact optimum, with the bounds that apply.
pub fn rule_certificate(
    inst: &SearchInstance,
    rule: &AffineRule,
    training: &[Vec<f64>],
    tests: &[Vec<f64>],
    inputs: &BoundInputs,
    kind: ProblemKind,
) -> Result<RuleReport> {
    inputs.validate()?;
    let objective = |xi: &[f64], y: &[bool]| inst.objective_if_feasible(xi, y, kind).ok().flatten();
    let candidates = candidate_decisions(rule, training)?;
    let (mdr_src, mdr_y) = mdr(rule, training, objective)?;
    // all training points share one pattern: the direct rule bound may apply
    let common = candidates.windows(2).all(|w| w[0] == w[1]).then(|| candidates[0].clone());
    let bound = mdr_amdr_bound(inputs);
    let direct = direct_rule_bound(inputs);
    let optima = solve_all(inst, tests, kind)?;

    let mut rows = Vec::with_capacity(3 * tests.len());
    for (k, (xi, opt)) in tests.iter().zip(&optima).enumerate() {
        let optimum = opt.value;
        let row = |rule: RuleKind, y: &[bool], bound: Option<f64>, source: Option<usize>| -> Result<RuleRow> {
            let value = inst.nondetect_prob_raw(xi, y, 0)?;
            let feasible = inst.feasible(xi, y, kind)?;
            let subopt = if feasible { value - optimum } else { f64::INFINITY };
            Ok(RuleRow { rule, point_id: k + 1, feasible, value, optimum, subopt, bound, source })
        };
        rows.push(row(RuleKind::Mdr, &mdr_y, Some(bound), Some(mdr_src))?);
        let mut obj = objective;
        let (src, y) = amdr_from_candidates(&candidates, xi, &mut obj)?;
        rows.push(row(RuleKind::Amdr, &y, Some(bound), Some(src))?);
        let (_, h) = rule.apply(xi)?;
        let gate = common.as_ref().is_some_and(|c| *c == h);
        rows.push(row(RuleKind::Direct, &h, gate.then_some(direct), None)?);
    }
    Ok(RuleReport { inputs: *inputs, mdr_amdr_bound: bound, direct_bound: direct, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_of_fixed_constants() {
        let b = BoundInputs { tau: 0.02, kappa0: 10.0, diam: 0.05, ..Default::default() };
        assert_eq!(mdr_amdr_bound(&b), 1.02);
        assert_eq!(format!("{}", mdr_amdr_bound(&b)), "1.02");
        assert_eq!(mdr_amdr_bound(&BoundInputs::default()), 0.0);
    }

    #[test]
    fn bound_is_linear_in_diameter() {
        let b = BoundInputs { sigma: 0.1, tau: 0.3, kappa0: 2.0, diam: 0.25, ..Default::default() };
        let b2 = BoundInputs { diam: 0.5, ..b };
        assert_eq!(mdr_amdr_bound(&b2) - mdr_amdr_bound(&b), 2.0 * 2.0 * 0.25);
    }

    #[test]
    fn direct_rule_examples() {
        let b = BoundInputs { kappa0: 1.0, kappa0_prime: 1.0, diam: 1.0, ..Default::default() };
        assert_eq!(direct_rule_bound(&b), 2.0);
        let b = BoundInputs { sigma: 0.1, tau: 0.2, kappa0: 3.0, kappa0_prime: 3.0, lambda: 0.0, diam: 0.4 };
        assert!((direct_rule_bound(&b) - mdr_amdr_bound(&b)).abs() < 1e-15);
    }

    #[test]
    fn diameters() {
        assert_eq!(diameter(&[vec![1.0, 2.0]]).unwrap(), 0.0);
        assert_eq!(diameter(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap(), 5.0);
        assert!(diameter(&[]).is_err());
        assert_eq!(DiamConvention::Nominal.pick(0.05, 0.09), 0.05);
        assert_eq!(DiamConvention::Scan.pick(0.05, 0.09), 0.09);
    }

    #[test]
    fn pattern_condition() {
        use crate::rules::MarginSpec;
        let m = MarginSpec::default();
        let zero = AffineRule::zeros(3, 2, m);
        assert!(constant_pattern_condition(&zero, 1e6, 0.001));
        let unit = AffineRule::new(1, 2, vec![0.6, 0.8], vec![0.0], m).unwrap();
        assert!(constant_pattern_condition(&unit, 0.001, 0.001));
        let big = AffineRule::new(1, 2, vec![6.0, 8.0], vec![0.0], m).unwrap();
        assert!(!constant_pattern_condition(&big, 1.0, 0.001));
    }

    #[test]
    fn inputs_must_be_nonnegative() {
        assert!(BoundInputs { tau: -1.0, ..Default::default() }.validate().is_err());
    }
}
