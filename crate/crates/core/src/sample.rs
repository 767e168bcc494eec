//! Scenario losses and their upper-tail slices.
//!
//! Positive values are losses. Empirical VaR at level `alpha` is the
//! `ceil(alpha * n)`-th order statistic, and the tail event is
//! `X >= VaR_alpha(X)`, so ties at the threshold are members. On discrete
//! data this event can carry more than `1 - alpha` of the mass, which is why
//! monotonicity of the empirical measures may fail on heavily tied samples.

use std::sync::OnceLock;

use crate::error::{check_level, Result, RiskError};

#[derive(Debug)]
pub struct SampleSet {
    values: Vec<f64>,
    sorted: OnceLock<Vec<f64>>,
}

impl Clone for SampleSet {
    fn clone(&self) -> Self {
        Self {
            values: self.values.clone(),
            sorted: self.sorted.clone(),
        }
    }
}

impl PartialEq for SampleSet {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

/// 1-based rank of the empirical `alpha`-quantile, guarded against
/// `alpha * n` landing an ulp above an integer.
pub(crate) fn order_statistic_rank(alpha: f64, n: usize) -> usize {
    let x = alpha * n as f64;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * (n as f64).max(1.0) {
        r
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, n)
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(RiskError::Input("sample set is empty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(RiskError::Input(format!("non-finite value {v} at position {i}")));
        }
        Ok(Self {
            values,
            sorted: OnceLock::new(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nondecreasing view, computed once on first use.
    pub fn sorted(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut v = self.values.clone();
            v.sort_by(f64::total_cmp);
            v
        })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<SampleSet> {
        SampleSet::new(self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn value_at_risk(&self, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        let k = order_statistic_rank(alpha, self.len());
        Ok(self.sorted()[k - 1])
    }

    pub fn tail_slice(&self, alpha: f64) -> Result<TailSlice<'_>> {
        let threshold = self.value_at_risk(alpha)?;
        let sorted = self.sorted();
        let start = sorted.partition_point(|&v| v < threshold);
        Ok(TailSlice {
            level: alpha,
            threshold,
            members: &sorted[start..],
        })
    }

    /// Scenario indices belonging to the tail event, in scenario order.
    pub fn tail_indices(&self, alpha: f64) -> Result<Vec<usize>> {
        let threshold = self.value_at_risk(alpha)?;
        Ok(self
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= threshold)
            .map(|(i, _)| i)
            .collect())
    }
}

/// Members of a sample at or above its VaR.
#[derive(Debug, Clone, Copy)]
pub struct TailSlice<'a> {
    pub level: f64,
    pub threshold: f64,
    /// Sorted ascending.
    pub members: &'a [f64],
}

impl TailSlice<'_> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.members[0]
    }

    pub fn max(&self) -> f64 {
        self.members[self.members.len() - 1]
    }

    pub fn is_degenerate(&self) -> bool {
        self.min() == self.max()
    }

    pub fn mean(&self) -> f64 {
        mean_clamped(self.members.iter().copied(), self.min(), self.max())
    }

    /// Population variance (denominator = member count).
    pub fn variance(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let m = self.mean();
        let k = self.len() as f64;
        self.members.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / k
    }
}

/// Arithmetic mean clamped to the closed hull of the values, which the exact
/// mean never leaves.
pub(crate) fn mean_clamped<I: Iterator<Item = f64>>(values: I, lo: f64, hi: f64) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (sum / count as f64).clamp(lo, hi)
}
