//! Capital allocation of a portfolio sum `S = X_1 + ... + X_n` by tail
//! quasi-linear means conditioned on the tail of `S`.
//!
//! The contribution of component `i` is `U^{-1}(E[U(X_i) | S >= VaR_alpha(S)])`.
//! For linear `U` the contributions add up to the measure of `S`; for
//! exponential `U` with `gamma > 0` they undershoot it on comonotone
//! components and overshoot it on countermonotone pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RiskError};
use crate::numeric::special::norm_quantile;
use crate::risk::tqlm_sorted;
use crate::sample::SampleSet;
use crate::utility::UtilityFunction;

/// Scenario matrix: row `i` holds the scenarios of component `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSample {
    rows: Vec<Vec<f64>>,
    total: SampleSet,
}

impl JointSample {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || m == 0 {
            return Err(RiskError::Input("joint sample needs at least one component and one scenario".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(RiskError::Input(format!(
                    "component {i} has {} scenarios, expected {m}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(RiskError::Input(format!("component {i} holds non-finite value {v}")));
            }
        }
        let total = (0..m).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            total: SampleSet::new(total)?,
            rows,
        })
    }

    /// Components `X_i = F_i^{-1}(V)` driven by one shared uniform stream.
    pub fn from_uniform_stream<F>(transforms: &[F], scenarios: usize, seed: u64) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let uniforms = uniform_stream(scenarios, seed);
        let rows = transforms
            .iter()
            .map(|t| uniforms.iter().map(|&v| t(v)).collect())
            .collect();
        Self::new(rows)
    }

    /// Comonotone normal components `mu_i + sigma_i Phi^{-1}(V)`.
    pub fn comonotone_normal(params: &[(f64, f64)], scenarios: usize, seed: u64) -> Result<Self> {
        let transforms: Vec<_> = params
            .iter()
            .map(|&(mu, sigma)| move |v: f64| mu + sigma * norm_quantile(v))
            .collect();
        Self::from_uniform_stream(&transforms, scenarios, seed)
    }

    /// Countermonotone normal pair built from `V` and `1 - V`.
    pub fn countermonotone_normal(
        first: (f64, f64),
        second: (f64, f64),
        scenarios: usize,
        seed: u64,
    ) -> Result<Self> {
        let uniforms = uniform_stream(scenarios, seed);
        let rows = vec![
            uniforms.iter().map(|&v| first.0 + first.1 * norm_quantile(v)).collect(),
            uniforms
                .iter()
                .map(|&v| second.0 + second.1 * norm_quantile(1.0 - v))
                .collect(),
        ];
        Self::new(rows)
    }

    pub fn components(&self) -> usize {
        self.rows.len()
    }

    pub fn scenarios(&self) -> usize {
        self.total.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn total(&self) -> &SampleSet {
        &self.total
    }

    fn restricted(&self, columns: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.rows.iter().map(|r| r[columns.clone()].to_vec()).collect())
    }
}

/// Uniforms on the open interval (0, 1), reproducible for a seed.
pub fn uniform_stream(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let v: f64 = rng.random();
            if v > 0.0 {
                break v;
            }
        })
        .collect()
}

/// `rho_U^alpha(X_i | S)`.
pub fn contribution(j: &JointSample, i: usize, alpha: f64, u: &UtilityFunction) -> Result<f64> {
    let row = j
        .rows
        .get(i)
        .ok_or_else(|| RiskError::Parameter(format!("component {i} out of range 0..{}", j.components())))?;
    let tail = j.total.tail_indices(alpha)?;
    let mut values: Vec<f64> = tail.iter().map(|&k| row[k]).collect();
    values.sort_by(f64::total_cmp);
    Ok(tqlm_sorted(&values, u)?.to_f64())
}

pub fn contributions(j: &JointSample, alpha: f64, u: &UtilityFunction) -> Result<Vec<f64>> {
    (0..j.components()).map(|i| contribution(j, i, alpha, u)).collect()
}

/// `rho_U^alpha(S) - sum_i rho_U^alpha(X_i | S)`.
pub fn allocation_gap(j: &JointSample, alpha: f64, u: &UtilityFunction) -> Result<f64> {
    let whole = crate::risk::tqlm_empirical(&j.total, alpha, u)?.to_f64();
    let parts = contributions(j, alpha, u)?;
    // fixed summation order keeps the gap reproducible
    Ok(whole - parts.iter().sum::<f64>())
}

/// Allocation gap with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub gap: f64,
    pub standard_error: f64,
    pub batches: usize,
}

/// Gap on the full sample and the spread of gaps over `batches` contiguous
/// scenario blocks.
pub fn allocation_gap_estimate(
    j: &JointSample,
    alpha: f64,
    u: &UtilityFunction,
    batches: usize,
) -> Result<GapEstimate> {
    let gap = allocation_gap(j, alpha, u)?;
    let m = j.scenarios();
    if batches < 2 || m / batches < 2 {
        return Err(RiskError::Parameter(format!(
            "{batches} batches are not possible with {m} scenarios"
        )));
    }
    let size = m / batches;
    let gaps = (0..batches)
        .map(|b| allocation_gap(&j.restricted(b * size..(b + 1) * size)?, alpha, u))
        .collect::<Result<Vec<_>>>()?;
    let mean = gaps.iter().sum::<f64>() / batches as f64;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (batches - 1) as f64;
    Ok(GapEstimate {
        gap,
        standard_error: (var / batches as f64).sqrt(),
        batches,
    })
}
