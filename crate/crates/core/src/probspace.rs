//! Finite probability spaces, discrete random variables and the risk-measure
//! catalogue used by training problems.
//!
//! The superquantile is evaluated with the Rockafellar-Uryasev expression
//! anchored at the left-continuous quantile:
//!
//! ```text
//! Q_a(X)  = min { z : P(X <= z) >= a }
//! SQ_a(X) = Q_a(X) + 1/(1-a) * sum_w P(w) * max(0, X(w) - Q_a(X))
//! ```
//!
//! For discrete distributions this is exactly the average of the worst
//! `(1-a)` probability mass.

use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Result};

/// Tolerance on the total mass of a probability space.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

// Cumulative weights are built by floating-point summation; a level that is
// hit exactly in real arithmetic must not be missed by one ulp.
const CDF_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteProbSpace {
    weights: Vec<f64>,
}

impl FiniteProbSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(structural("probability space needs at least one outcome"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(domain(format!("weight {i} is {w}; every outcome needs positive mass")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { weights })
    }

    /// Equal mass `1/n` on `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(structural("probability space needs at least one outcome"));
        }
        Ok(Self { weights: vec![1.0 / n as f64; n] })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Attaches realized values to the outcomes of this space.
    pub fn rv<'a>(&'a self, values: &'a [f64]) -> Result<DiscreteRv<'a>> {
        DiscreteRv::new(self, values)
    }
}

/// A real-valued random variable on a [`FiniteProbSpace`].
#[derive(Debug, Clone, Copy)]
pub struct DiscreteRv<'a> {
    space: &'a FiniteProbSpace,
    values: &'a [f64],
}

impl<'a> DiscreteRv<'a> {
    pub fn new(space: &'a FiniteProbSpace, values: &'a [f64]) -> Result<Self> {
        if values.len() != space.len() {
            return Err(structural(format!(
                "random variable has {} values but the space has {} outcomes",
                values.len(),
                space.len()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn values(&self) -> &[f64] {
        self.values
    }

    pub fn weights(&self) -> &[f64] {
        self.space.weights()
    }

    pub fn expectation(&self) -> f64 {
        self.weights()
            .iter()
            .zip(self.values)
            .map(|(p, v)| p * v)
            .sum()
    }

    pub fn worst_case(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        let weights = self.weights();
        let mut cdf = 0.0;
        for &w in &order {
            cdf += weights[w];
            if cdf >= alpha - CDF_SLACK {
                return Ok(self.values[w]);
            }
        }
        // Only reachable when the weights sum slightly below alpha.
        Ok(self.values[*order.last().expect("nonempty space")])
    }

    pub fn superquantile(&self, alpha: f64) -> Result<f64> {
        let q = self.quantile(alpha)?;
        let excess: f64 = self
            .weights()
            .iter()
            .zip(self.values)
            .map(|(p, v)| p * (v - q).max(0.0))
            .sum();
        Ok(q + excess / (1.0 - alpha))
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("risk level {alpha} outside the open interval (0, 1)")))
    }
}

/// Which risk measure to apply to a discrete random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskSpec {
    Expectation,
    WorstCase,
    Quantile { alpha: f64 },
    Superquantile { alpha: f64 },
}

impl RiskSpec {
    pub fn quantile(alpha: f64) -> Result<Self> {
        check_level(alpha)?;
        Ok(Self::Quantile { alpha })
    }

    pub fn superquantile(alpha: f64) -> Result<Self> {
        check_level(alpha)?;
        Ok(Self::Superquantile { alpha })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Quantile { alpha } | Self::Superquantile { alpha } => check_level(alpha),
            _ => Ok(()),
        }
    }

    /// Expectation, worst-case and superquantile are monotone and convex; the
    /// quantile is monotone only.
    pub fn is_convex(&self) -> bool {
        !matches!(self, Self::Quantile { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Expectation => "expectation".into(),
            Self::WorstCase => "worst_case".into(),
            Self::Quantile { alpha } => format!("quantile({alpha})"),
            Self::Superquantile { alpha } => format!("superquantile({alpha})"),
        }
    }
}

pub fn evaluate_risk(spec: RiskSpec, rv: &DiscreteRv<'_>) -> Result<f64> {
    match spec {
        RiskSpec::Expectation => Ok(rv.expectation()),
        RiskSpec::WorstCase => Ok(rv.worst_case()),
        RiskSpec::Quantile { alpha } => rv.quantile(alpha),
        RiskSpec::Superquantile { alpha } => rv.superquantile(alpha),
    }
}

/// Convenience wrapper: risk of `values` under `weights`.
pub fn risk_of(spec: RiskSpec, space: &FiniteProbSpace, values: &[f64]) -> Result<f64> {
    let rv = space.rv(values)?;
    evaluate_risk(spec, &rv)
}
