//! Decision-rule representations and the Heaviside map.
//!
//! A rule assigns to a parameter vector `xi` the binary decision
//! `y = H(G(xi))`, where `H` sends nonpositive entries to 0 and positive
//! entries to 1. Training keeps every `G`-value at the training points inside
//! the margin set `([-delta, -eps] U [eps, delta])^m`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, structural, Error, Result};

/// Componentwise threshold at zero; zero itself maps to 0.
pub fn heaviside(values: &[f64]) -> Vec<bool> {
    values.iter().map(|&v| v > 0.0).collect()
}

/// The margin set parameters `0 < eps < delta <= inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarginFile", into = "MarginFile")]
pub struct MarginSpec {
    epsilon: f64,
    delta: f64,
}

impl MarginSpec {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(domain(format!("margin epsilon must be positive, got {epsilon}")));
        }
        if !(delta > epsilon) {
            return Err(domain(format!("margin delta {delta} must exceed epsilon {epsilon}")));
        }
        Ok(Self { epsilon, delta })
    }

    /// `delta = inf`: only the inner margin is enforced.
    pub fn unbounded(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, f64::INFINITY)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_finite(&self) -> bool {
        self.delta.is_finite()
    }

    /// Shrinks the admissible band by `slack` on both ends. Used when a fitted
    /// value must land inside the exact band despite solver round-off.
    pub fn tightened(&self, slack: f64) -> Result<Self> {
        Self::new(self.epsilon + slack, self.delta - slack)
    }

    pub fn contains(&self, g: f64) -> bool {
        let a = g.abs();
        a >= self.epsilon && a <= self.delta
    }
}

#[derive(Serialize, Deserialize)]
struct MarginFile {
    epsilon: f64,
    #[serde(serialize_with = "ser_delta", deserialize_with = "de_delta")]
    delta: f64,
}

impl TryFrom<MarginFile> for MarginSpec {
    type Error = Error;

    fn try_from(f: MarginFile) -> Result<Self> {
        Self::new(f.epsilon, f.delta)
    }
}

impl From<MarginSpec> for MarginFile {
    fn from(m: MarginSpec) -> Self {
        Self { epsilon: m.epsilon, delta: m.delta }
    }
}

impl Default for MarginSpec {
    fn default() -> Self {
        Self { epsilon: 1e-3, delta: 1.0 }
    }
}

/// True iff every component lies in `[-delta, -eps] U [eps, delta]`.
pub fn in_margin_set(g: &[f64], spec: &MarginSpec) -> bool {
    g.iter().all(|&v| spec.contains(v))
}

/// Big-M form of "H(g) = y and g in the margin set":
/// `-delta + (delta+eps) y_i <= g_i <= -eps + (delta+eps) y_i`.
pub fn big_m_equivalence_check(g: &[f64], y: &[bool], spec: &MarginSpec) -> Result<bool> {
    if !spec.is_finite() {
        return Err(domain("big-M form requires a finite delta"));
    }
    if g.len() != y.len() {
        return Err(structural(format!("{} values against {} decisions", g.len(), y.len())));
    }
    let (eps, delta) = (spec.epsilon, spec.delta);
    // y is binary, so each row reduces to one of two bands; substituting
    // directly avoids the round-off in -delta + (delta + eps).
    Ok(g.iter().zip(y).all(|(&gi, &yi)| {
        if yi {
            eps <= gi && gi <= delta
        } else {
            -delta <= gi && gi <= -eps
        }
    }))
}

/// `G(xi) = B xi + b` with `B` stored row-major (`m` rows, `r` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRule {
    m: usize,
    r: usize,
    coef: Vec<f64>,
    offset: Vec<f64>,
    margin: MarginSpec,
}

impl AffineRule {
    pub fn new(m: usize, r: usize, coef: Vec<f64>, offset: Vec<f64>, margin: MarginSpec) -> Result<Self> {
        if coef.len() != m * r {
            return Err(structural(format!("B has {} entries, expected {m}x{r}", coef.len())));
        }
        if offset.len() != m {
            return Err(structural(format!("b has {} entries, expected {m}", offset.len())));
        }
        Ok(Self { m, r, coef, offset, margin })
    }

    pub fn zeros(m: usize, r: usize, margin: MarginSpec) -> Self {
        Self { m, r, coef: vec![0.0; m * r], offset: vec![0.0; m], margin }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.r
    }

    pub fn margin(&self) -> &MarginSpec {
        &self.margin
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coef[i * self.r..(i + 1) * self.r]
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn set_row(&mut self, i: usize, row: &[f64], offset: f64) {
        self.coef[i * self.r..(i + 1) * self.r].copy_from_slice(row);
        self.offset[i] = offset;
    }

    /// `G(xi)`.
    pub fn values(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.r {
            return Err(structural(format!("parameter has length {}, rule expects {}", xi.len(), self.r)));
        }
        Ok((0..self.m)
            .map(|i| dot(self.row(i), xi) + self.offset[i])
            .collect())
    }

    /// Returns `(G(xi), H(G(xi)))`.
    pub fn apply(&self, xi: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
        let g = self.values(xi)?;
        let y = heaviside(&g);
        Ok((g, y))
    }

    /// Flag `i` is set when `|g_i(xi)| < eps`: the prescription at `xi` is
    /// close to the decision boundary.
    pub fn margin_flags(&self, xi: &[f64]) -> Result<Vec<bool>> {
        let eps = self.margin.epsilon;
        Ok(self.values(xi)?.into_iter().map(|g| g.abs() < eps).collect())
    }

    /// `sum_i ||B_i||_1`.
    pub fn l1_regularizer(&self) -> f64 {
        (0..self.m).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).sum()
    }

    /// `max_i ||B_i||_2`.
    pub fn max_row_norm2(&self) -> f64 {
        (0..self.m)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    m: usize,
    r: usize,
    #[serde(rename = "B")]
    coef: Vec<f64>,
    b: Vec<f64>,
    epsilon: f64,
    #[serde(serialize_with = "ser_delta", deserialize_with = "de_delta")]
    delta: f64,
}

// JSON has no infinity; `null` stands for an unbounded value.
pub(crate) fn ser_delta<S: Serializer>(d: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if d.is_finite() {
        s.serialize_f64(*d)
    } else {
        s.serialize_none()
    }
}

pub(crate) fn de_delta<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Serialize for AffineRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RuleFile {
            m: self.m,
            r: self.r,
            coef: self.coef.clone(),
            b: self.offset.clone(),
            epsilon: self.margin.epsilon,
            delta: self.margin.delta,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = RuleFile::deserialize(d)?;
        let margin = MarginSpec::new(f.epsilon, f.delta).map_err(serde::de::Error::custom)?;
        AffineRule::new(f.m, f.r, f.coef, f.b, margin).map_err(serde::de::Error::custom)
    }
}

/// A rule whose `G` does not depend on `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRule {
    g: Vec<f64>,
}

impl ConstantRule {
    pub fn new(g: Vec<f64>) -> Self {
        Self { g }
    }

    /// The constant rule `g_i = eps` where `y_i = 1` and `-eps` elsewhere.
    pub fn encoding(y: &[bool], epsilon: f64) -> Self {
        Self { g: y.iter().map(|&b| if b { epsilon } else { -epsilon }).collect() }
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn decision(&self) -> Vec<bool> {
        heaviside(&self.g)
    }

    pub fn to_affine(&self, r: usize, margin: MarginSpec) -> AffineRule {
        AffineRule {
            m: self.g.len(),
            r,
            coef: vec![0.0; self.g.len() * r],
            offset: self.g.clone(),
            margin,
        }
    }
}

/// One stored decision per training point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularRule {
    entries: Vec<Vec<bool>>,
}

impl TabularRule {
    pub fn new(entries: Vec<Vec<bool>>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[Vec<bool>] {
        &self.entries
    }

    pub fn entry(&self, omega: usize) -> Option<&[bool]> {
        self.entries.get(omega).map(Vec::as_slice)
    }

    pub fn replace(&mut self, omega: usize, y: Vec<bool>) {
        self.entries[omega] = y;
    }
}

/// A rule as seen by a training problem: a decision at each training point,
/// whether its `G`-value respects the margin there, and its regularizer.
pub trait TrainedRule {
    fn decision_at(&self, omega: usize, xi: &[f64]) -> Result<Vec<bool>>;

    fn in_margin_at(&self, omega: usize, xi: &[f64], spec: &MarginSpec) -> Result<bool>;

    fn regularizer(&self) -> f64;
}

impl TrainedRule for AffineRule {
    fn decision_at(&self, _omega: usize, xi: &[f64]) -> Result<Vec<bool>> {
        Ok(self.apply(xi)?.1)
    }

    fn in_margin_at(&self, _omega: usize, xi: &[f64], spec: &MarginSpec) -> Result<bool> {
        Ok(in_margin_set(&self.values(xi)?, spec))
    }

    fn regularizer(&self) -> f64 {
        self.l1_regularizer()
    }
}

impl TrainedRule for ConstantRule {
    fn decision_at(&self, _omega: usize, _xi: &[f64]) -> Result<Vec<bool>> {
        Ok(self.decision())
    }

    fn in_margin_at(&self, _omega: usize, _xi: &[f64], spec: &MarginSpec) -> Result<bool> {
        Ok(in_margin_set(&self.g, spec))
    }

    fn regularizer(&self) -> f64 {
        0.0
    }
}

// A tabular rule is realized by a margin-respecting G on the training set
// (constant per point), so its margin check always passes.
impl TrainedRule for TabularRule {
    fn decision_at(&self, omega: usize, _xi: &[f64]) -> Result<Vec<bool>> {
        self.entries
            .get(omega)
            .cloned()
            .ok_or_else(|| structural(format!("tabular rule has no entry for outcome {omega}")))
    }

    fn in_margin_at(&self, omega: usize, _xi: &[f64], _spec: &MarginSpec) -> Result<bool> {
        Ok(omega < self.entries.len())
    }

    fn regularizer(&self) -> f64 {
        0.0
    }
}

/// Candidate decisions `H(B xi(w) + b)` at each training point.
pub fn candidate_decisions(rule: &AffineRule, training: &[Vec<f64>]) -> Result<Vec<Vec<bool>>> {
    training.iter().map(|xi| Ok(rule.apply(xi)?.1)).collect()
}

fn argmin_candidate<F>(candidates: &[Vec<bool>], mut score: F) -> Result<(usize, f64)>
where
    F: FnMut(usize, &[bool]) -> Option<f64>,
{
    let mut best: Option<(usize, f64)> = None;
    for (w, y) in candidates.iter().enumerate() {
        if let Some(v) = score(w, y) {
            // strict: the lowest index wins ties
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((w, v));
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("no training-point decision is feasible".into()))
}

/// Minimum decision rule: the training-point decision with the lowest
/// training objective, used as a constant prescription.
///
/// `objective(xi, y)` returns `None` when `y` is infeasible at `xi`.
pub fn mdr<F>(rule: &AffineRule, training: &[Vec<f64>], mut objective: F) -> Result<(usize, Vec<bool>)>
where
    F: FnMut(&[f64], &[bool]) -> Option<f64>,
{
    let candidates = candidate_decisions(rule, training)?;
    let (w, _) = argmin_candidate(&candidates, |w, y| objective(&training[w], y))?;
    Ok((w, candidates[w].clone()))
}

/// Adaptive minimum decision rule: among the training-point decisions, the one
/// with the lowest true objective at the query `xi`.
pub fn amdr<F>(
    rule: &AffineRule,
    training: &[Vec<f64>],
    xi: &[f64],
    mut objective: F,
) -> Result<(usize, Vec<bool>)>
where
    F: FnMut(&[f64], &[bool]) -> Option<f64>,
{
    let candidates = candidate_decisions(rule, training)?;
    amdr_from_candidates(&candidates, xi, &mut objective)
}

/// [`amdr`] with the candidate set computed once by the caller.
pub fn amdr_from_candidates<F>(candidates: &[Vec<bool>], xi: &[f64], objective: &mut F) -> Result<(usize, Vec<bool>)>
where
    F: FnMut(&[f64], &[bool]) -> Option<f64>,
{
    let (w, _) = argmin_candidate(candidates, |_, y| objective(xi, y))?;
    Ok((w, candidates[w].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> MarginSpec {
        MarginSpec::new(0.001, 1.0).unwrap()
    }

    #[test]
    fn heaviside_examples() {
        assert_eq!(heaviside(&[-1.0, 0.0, 0.5]), vec![false, false, true]);
        assert_eq!(heaviside(&[-3.0, -1e-9]), vec![false, false]);
        assert_eq!(heaviside(&[1e-12]), vec![true]);
    }

    #[test]
    fn apply_examples() {
        let eps = 0.001;
        let m = MarginSpec::new(eps, 1.0).unwrap();
        let r = AffineRule::new(2, 3, vec![0.0; 6], vec![eps, -eps], m).unwrap();
        assert_eq!(r.apply(&[0.4, -2.0, 7.0]).unwrap().1, vec![true, false]);

        let r = AffineRule::new(1, 1, vec![1.0], vec![0.0], m).unwrap();
        let (g, y) = r.apply(&[0.3]).unwrap();
        assert_eq!((g, y), (vec![0.3], vec![true]));

        let r = AffineRule::new(1, 1, vec![2.0], vec![-1.0], m).unwrap();
        let (g, y) = r.apply(&[0.4]).unwrap();
        assert!((g[0] + 0.2).abs() < 1e-15);
        assert_eq!(y, vec![false]);

        assert!(matches!(r.apply(&[0.1, 0.2]), Err(Error::Structural(_))));
    }

    #[test]
    fn margin_set_examples() {
        assert!(in_margin_set(&[0.5, -0.5], &spec()));
        assert!(!in_margin_set(&[0.0], &spec()));
        assert!(!in_margin_set(&[0.0], &MarginSpec::unbounded(1e-9).unwrap()));
        assert!(!in_margin_set(&[1.5], &spec()));
    }

    #[test]
    fn margin_flag_examples() {
        let eps = 0.01;
        let m = MarginSpec::new(eps, 1.0).unwrap();
        let r = AffineRule::new(3, 1, vec![0.0; 3], vec![0.0, eps, 0.9 * eps], m).unwrap();
        assert_eq!(r.margin_flags(&[5.0]).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn big_m_examples() {
        let s = spec();
        for (g, ok) in [(0.001, true), (1.0, true), (0.0009, false), (1.01, false), (-0.5, false)] {
            assert_eq!(big_m_equivalence_check(&[g], &[true], &s).unwrap(), ok, "g={g} y=1");
        }
        for (g, ok) in [(-0.001, true), (-1.0, true), (-0.0009, false), (-1.01, false)] {
            assert_eq!(big_m_equivalence_check(&[g], &[false], &s).unwrap(), ok, "g={g} y=0");
        }
        assert!(!big_m_equivalence_check(&[0.5], &[false], &s).unwrap());
        let inf = MarginSpec::unbounded(0.001).unwrap();
        assert!(matches!(big_m_equivalence_check(&[0.5], &[true], &inf), Err(Error::Domain(_))));
    }

    #[test]
    fn margin_spec_validation() {
        assert!(MarginSpec::new(0.0, 1.0).is_err());
        assert!(MarginSpec::new(0.5, 0.5).is_err());
        assert!(MarginSpec::new(0.5, 0.4).is_err());
        assert!(MarginSpec::unbounded(0.1).is_ok());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = MarginSpec::new(0.001, 1.0).unwrap();
        let r = AffineRule::new(2, 2, vec![0.1, 1.0 / 3.0, -2.5e-17, 7.0], vec![0.3, -0.001], m).unwrap();
        let back = AffineRule::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let text = r.to_json().unwrap();
        assert!(text.contains("\"B\"") && text.contains("\"epsilon\""));

        let inf = AffineRule::zeros(1, 1, MarginSpec::unbounded(0.5).unwrap());
        let text = inf.to_json().unwrap();
        assert!(text.contains("null"));
        assert_eq!(AffineRule::from_json(&text).unwrap(), inf);
    }

    #[test]
    fn mdr_picks_lowest_training_objective() {
        let m = spec();
        // one rule coordinate: y = H(xi)
        let r = AffineRule::new(1, 1, vec![1.0], vec![0.0], m).unwrap();
        let training = vec![vec![0.5], vec![-0.5]];
        let (w, y) = mdr(&r, &training, |xi, _| Some(if xi[0] > 0.0 { 0.3 } else { 0.5 })).unwrap();
        assert_eq!((w, y), (0, vec![true]));

        let single = vec![vec![-0.2]];
        let (_, y) = mdr(&r, &single, |_, _| Some(1.0)).unwrap();
        assert_eq!(y, vec![false]);

        assert!(matches!(mdr(&r, &training, |_, _| None), Err(Error::Infeasible(_))));
    }

    #[test]
    fn amdr_ties_go_to_lowest_index() {
        let r = AffineRule::new(1, 1, vec![1.0], vec![0.0], spec()).unwrap();
        let training = vec![vec![0.5], vec![-0.5], vec![0.7]];
        let (w, _) = amdr(&r, &training, &[0.0], |_, _| Some(2.0)).unwrap();
        assert_eq!(w, 0);
        let (w, y) = amdr(&r, &training, &[0.0], |_, y| Some(if y[0] { 1.0 } else { 0.0 })).unwrap();
        assert_eq!((w, y), (1, vec![false]));
    }

    proptest! {
        #[test]
        fn big_m_matches_heaviside_and_margin(
            g in prop::collection::vec(-1.5f64..1.5, 1..6),
            ybits in prop::collection::vec(any::<bool>(), 6),
            eps in 0.001f64..0.3,
        ) {
            let s = MarginSpec::new(eps, 1.0).unwrap();
            let y: Vec<bool> = ybits[..g.len()].to_vec();
            let lhs = big_m_equivalence_check(&g, &y, &s).unwrap();
            let rhs = heaviside(&g) == y && in_margin_set(&g, &s);
            prop_assert_eq!(lhs, rhs);
            // the rule's own decision always satisfies the big-M form when in the margin set
            let own = heaviside(&g);
            prop_assert_eq!(big_m_equivalence_check(&g, &own, &s).unwrap(), in_margin_set(&g, &s));
        }
    }
}
