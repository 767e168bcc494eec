//! VaR, CTE, tail variance, tail quasi-linear means and the tail conditional
//! entropic risk measure, on samples and on symmetric models.
//!
//! The tail quasi-linear mean of `X` under `U` is
//! `U^{-1}(E[U(X) | X >= VaR_alpha(X)])`. With `U(x) = e^{gamma x} / gamma`
//! it becomes the tail conditional entropic measure
//! `(1/gamma) log E[e^{gamma X} | X >= VaR_alpha(X)]`.
//!
//! Two signs differ from the commonly printed closed forms and are pinned by
//! direct quadrature in the tests:
//! * the tilted-survival term of the symmetric closed form enters as
//!   `+ (1/gamma) log(Fbar_Y(VaR_alpha(Z)) / (1 - alpha))`;
//! * the second-order approximation of the entropic measure is
//!   `CTE + (gamma/2) TV`, i.e. `CTE - l_U(CTE) TV / 2` with `l_U = -gamma`.

use crate::error::{check_level, Result, RiskError};
use crate::numeric::special::{norm_quantile, norm_sf};
use crate::sample::{mean_clamped, SampleSet, TailSlice};
use crate::symmetric::{tail_integral, Generator, SymmetricModel};
use crate::utility::{ExtendedReal, UtilityFunction};

/// Below this `|gamma|` the entropic measures are evaluated as CTE.
pub const GAMMA_CTE_CUTOFF: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Empirical measures
// ---------------------------------------------------------------------------

pub fn var_empirical(s: &SampleSet, alpha: f64) -> Result<f64> {
    s.value_at_risk(alpha)
}

pub fn tail_slice(s: &SampleSet, alpha: f64) -> Result<TailSlice<'_>> {
    s.tail_slice(alpha)
}

pub fn cte_empirical(s: &SampleSet, alpha: f64) -> Result<f64> {
    Ok(s.tail_slice(alpha)?.mean())
}

pub fn tail_variance_empirical(s: &SampleSet, alpha: f64) -> Result<f64> {
    Ok(s.tail_slice(alpha)?.variance())
}

/// `(1/gamma) log mean(e^{gamma x})` over the members, shifted by the member
/// maximizing `gamma x` so no exponent is positive.
pub(crate) fn entropic_mean(members: &[f64], gamma: f64) -> Result<f64> {
    let lo = members.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = members.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(lo);
    }
    if gamma.abs() < GAMMA_CTE_CUTOFF {
        return Ok(mean_clamped(members.iter().copied(), lo, hi));
    }
    let pivot = if gamma > 0.0 { hi } else { lo };
    let acc: f64 = members.iter().map(|&x| (gamma * (x - pivot)).exp()).sum();
    let value = pivot + (acc / members.len() as f64).ln() / gamma;
    if value.is_nan() {
        return Err(RiskError::Range(format!(
            "exponential utility overflow at gamma*max = {}",
            gamma * pivot
        )));
    }
    Ok(value.clamp(lo, hi))
}

/// Tail quasi-linear mean of already sorted tail members.
pub fn tqlm_sorted(members: &[f64], u: &UtilityFunction) -> Result<ExtendedReal> {
    if members.is_empty() {
        return Err(RiskError::Input("empty tail".into()));
    }
    let lo = members[0];
    let hi = members[members.len() - 1];
    for &x in [lo, hi].iter() {
        if !u.in_domain(x) {
            return Err(RiskError::Domain(format!("{u} is undefined at tail member {x}")));
        }
    }
    if lo == hi {
        return Ok(ExtendedReal::Finite(match *u {
            UtilityFunction::Capped { cap } => lo.min(cap),
            _ => lo,
        }));
    }
    match *u {
        UtilityFunction::Exponential { gamma } => Ok(ExtendedReal::Finite(entropic_mean(members, gamma)?)),
        UtilityFunction::Linear => Ok(ExtendedReal::Finite(mean_clamped(members.iter().copied(), lo, hi))),
        _ => {
            let u_lo = u.evaluate(lo)?;
            let u_hi = u.evaluate(hi)?;
            let mut values = Vec::with_capacity(members.len());
            for &x in members {
                values.push(u.evaluate(x)?);
            }
            let m = mean_clamped(values.into_iter(), u_lo, u_hi);
            Ok(u.generalized_inverse(m))
        }
    }
}

/// Tail quasi-linear mean of a sample.
pub fn tqlm_empirical(s: &SampleSet, alpha: f64, u: &UtilityFunction) -> Result<ExtendedReal> {
    let slice = s.tail_slice(alpha)?;
    tqlm_sorted(slice.members, u)
}

/// Tail conditional entropic risk measure of a sample.
pub fn tcerm_empirical(s: &SampleSet, alpha: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(RiskError::Parameter(format!("gamma must be finite and nonzero, got {gamma}")));
    }
    entropic_mean(s.tail_slice(alpha)?.members, gamma)
}

/// Quasi-linear mean `U^{-1}(E U(X))` over the whole sample.
pub fn quasi_linear_mean_empirical(s: &SampleSet, u: &UtilityFunction) -> Result<ExtendedReal> {
    tqlm_sorted(s.sorted(), u)
}

/// Point estimate with an asymptotic standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: Option<f64>,
}

/// Standard error of a tail mean of `h(X)` with an estimated threshold:
/// `sqrt((Var(h | tail) + alpha (E[h | tail] - h(VaR))^2) / k)`.
fn tail_mean_se(hs: &[f64], h_threshold: f64, alpha: f64) -> f64 {
    let k = hs.len() as f64;
    let m = hs.iter().sum::<f64>() / k;
    let var = hs.iter().map(|h| (h - m) * (h - m)).sum::<f64>() / k;
    ((var + alpha * (m - h_threshold).powi(2)) / k).sqrt()
}

/// VaR with an order-statistic band as its standard error.
pub fn var_estimate(s: &SampleSet, alpha: f64) -> Result<Estimate> {
    let value = s.value_at_risk(alpha)?;
    let n = s.len();
    let k = crate::sample::order_statistic_rank(alpha, n);
    let j = ((n as f64 * alpha * (1.0 - alpha)).sqrt().ceil() as usize).max(1);
    let sorted = s.sorted();
    let lo = sorted[k.saturating_sub(1 + j)];
    let hi = sorted[(k - 1 + j).min(n - 1)];
    Ok(Estimate {
        value,
        standard_error: (n > 1).then_some(0.5 * (hi - lo)),
    })
}

pub fn cte_estimate(s: &SampleSet, alpha: f64) -> Result<Estimate> {
    let slice = s.tail_slice(alpha)?;
    Ok(Estimate {
        value: slice.mean(),
        standard_error: Some(tail_mean_se(slice.members, slice.threshold, alpha)),
    })
}

pub fn tail_variance_estimate(s: &SampleSet, alpha: f64) -> Result<Estimate> {
    let slice = s.tail_slice(alpha)?;
    let c = slice.mean();
    let hs: Vec<f64> = slice.members.iter().map(|&x| (x - c) * (x - c)).collect();
    Ok(Estimate {
        value: slice.variance(),
        standard_error: Some(tail_mean_se(&hs, (slice.threshold - c).powi(2), alpha)),
    })
}

/// TQLM with a delta-method standard error; `None` for the capped kind whose
/// inverse is not differentiable at the attained value.
pub fn tqlm_estimate(s: &SampleSet, alpha: f64, u: &UtilityFunction) -> Result<(ExtendedReal, Option<f64>)> {
    let slice = s.tail_slice(alpha)?;
    let value = tqlm_sorted(slice.members, u)?;
    let rho = match value.finite() {
        Some(v) => v,
        None => return Ok((value, None)),
    };
    if slice.is_degenerate() {
        return Ok((value, Some(0.0)));
    }
    let se = match *u {
        UtilityFunction::Capped { .. } => None,
        UtilityFunction::Exponential { gamma } if gamma.abs() >= GAMMA_CTE_CUTOFF => {
            let pivot = if gamma > 0.0 { slice.max() } else { slice.min() };
            let hs: Vec<f64> = slice.members.iter().map(|&x| (gamma * (x - pivot)).exp()).collect();
            let m = hs.iter().sum::<f64>() / hs.len() as f64;
            let se_m = tail_mean_se(&hs, (gamma * (slice.threshold - pivot)).exp(), alpha);
            Some(se_m / (gamma.abs() * m))
        }
        UtilityFunction::Exponential { .. } | UtilityFunction::Linear => {
            Some(tail_mean_se(slice.members, slice.threshold, alpha))
        }
        _ => {
            let hs = slice
                .members
                .iter()
                .map(|&x| u.evaluate(x))
                .collect::<Result<Vec<_>>>()?;
            let se_m = tail_mean_se(&hs, u.evaluate(slice.threshold)?, alpha);
            let slope = u.derivative(rho)?;
            (slope > 0.0).then(|| se_m / slope)
        }
    };
    Ok((value, se))
}

pub fn tcerm_estimate(s: &SampleSet, alpha: f64, gamma: f64) -> Result<Estimate> {
    let u = UtilityFunction::exponential(gamma)?;
    let (v, se) = tqlm_estimate(s, alpha, &u)?;
    Ok(Estimate {
        value: v.to_f64(),
        standard_error: se,
    })
}

// ---------------------------------------------------------------------------
// Analytic measures on symmetric models
// ---------------------------------------------------------------------------

pub fn var_analytic(model: &SymmetricModel, alpha: f64) -> Result<f64> {
    model.quantile(alpha)
}

/// `CTE = mu + sigma Gbar(VaR_alpha(Z)^2 / 2) / (1 - alpha)`.
pub fn cte_analytic(model: &SymmetricModel, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    let q = model.generator.std_quantile(alpha)?;
    let gbar = model.generator.cumulative_generator(0.5 * q * q)?;
    Ok(model.mu + model.sigma * gbar / (1.0 - alpha))
}

/// Variance of the loss conditional on the tail event.
pub fn tail_variance_analytic(model: &SymmetricModel, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    let g = model.generator;
    let q = g.std_quantile(alpha)?;
    let tail = 1.0 - alpha;
    let m1 = g.std_partial_moment(1, q)? / tail;
    let m2 = g.std_partial_moment(2, q)? / tail;
    Ok(model.sigma * model.sigma * (m2 - m1 * m1).max(0.0))
}

fn check_integrable(model: &SymmetricModel, u: &UtilityFunction) -> Result<()> {
    if let Generator::StudentT { dof } = model.generator {
        match *u {
            UtilityFunction::Exponential { gamma } if gamma > 0.0 => {
                return Err(RiskError::MgfNonexistent(
                    "Student-t has no moment generating function".into(),
                ))
            }
            UtilityFunction::Power { gamma } if gamma >= dof => {
                return Err(RiskError::Range(format!(
                    "E[X^{gamma}] diverges for Student-t with {dof} degrees of freedom"
                )))
            }
            UtilityFunction::Linear if dof <= 1.0 => {
                return Err(RiskError::UnsupportedGenerator(format!(
                    "Student-t with {dof} degrees of freedom has no mean"
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

/// `U^{-1}((1 - alpha)^{-1} int_{VaR_alpha(Z)}^inf U(sigma z + mu) g(z^2/2) dz)`.
pub fn tqlm_analytic(model: &SymmetricModel, alpha: f64, u: &UtilityFunction) -> Result<ExtendedReal> {
    check_level(alpha)?;
    check_integrable(model, u)?;
    let g = model.generator;
    let (mu, sigma) = (model.mu, model.sigma);
    let q = g.std_quantile(alpha)?;
    let x_q = mu + sigma * q;
    if !u.in_domain(x_q) {
        return Err(RiskError::Domain(format!(
            "{u} is undefined on the tail starting at VaR = {x_q}"
        )));
    }
    let tail = 1.0 - alpha;
    match *u {
        UtilityFunction::Linear => Ok(ExtendedReal::Finite(cte_analytic(model, alpha)?.max(x_q))),
        UtilityFunction::Exponential { gamma } => {
            if gamma.abs() < GAMMA_CTE_CUTOFF {
                return Ok(ExtendedReal::Finite(cte_analytic(model, alpha)?.max(x_q)));
            }
            // shift by VaR so the integrand starts at 1 (gamma > 0) or decays from 1 (gamma < 0)
            let s = gamma * sigma;
            let m = tail_integral(|z| (s * (z - q) + g.std_log_density(z)).exp(), q)? / tail;
            let v = x_q + m.ln() / gamma;
            if !v.is_finite() {
                return Err(RiskError::Range(format!("tail exponential moment overflow at gamma {gamma}")));
            }
            Ok(ExtendedReal::Finite(v.max(x_q)))
        }
        UtilityFunction::Capped { cap } => {
            if cap <= x_q {
                return Ok(ExtendedReal::Finite(cap));
            }
            let z_c = (cap - mu) / sigma;
            let below = crate::numeric::integrate(
                |z| (sigma * z + mu) * g.std_density(z),
                q,
                z_c,
                crate::symmetric::quad_opts(),
            )?
            .value;
            let m = ((below + cap * g.std_sf(z_c)) / tail).clamp(x_q, cap);
            Ok(u.generalized_inverse(m))
        }
        _ => {
            let integrand = |z: f64| {
                let x = sigma * z + mu;
                u.evaluate(x).map(|v| v * g.std_density(z)).unwrap_or(f64::NAN)
            };
            let m = tail_integral(integrand, q)? / tail;
            if m.is_nan() {
                return Err(RiskError::Domain(format!("{u} left its domain on the tail")));
            }
            let lower = u.evaluate(x_q)?;
            Ok(u.generalized_inverse(m.max(lower)))
        }
    }
}

/// Quasi-linear mean `U^{-1}(E U(X))` of a symmetric model (the `alpha -> 0` limit).
pub fn quasi_linear_mean_analytic(model: &SymmetricModel, u: &UtilityFunction) -> Result<ExtendedReal> {
    check_integrable(model, u)?;
    let (mu, sigma, g) = (model.mu, model.sigma, model.generator);
    match *u {
        UtilityFunction::Linear => Ok(ExtendedReal::Finite(mu)),
        UtilityFunction::Exponential { gamma } => {
            Ok(ExtendedReal::Finite(mu + g.cumulant(gamma * sigma)? / gamma))
        }
        UtilityFunction::Power { .. } | UtilityFunction::Logarithmic => Err(RiskError::Domain(format!(
            "{u} is undefined on the unbounded support of {model}"
        ))),
        UtilityFunction::Capped { cap } => {
            let z_c = (cap - mu) / sigma;
            let below = crate::numeric::integrate_upper(
                |t| (mu - sigma * t) * g.std_density(-t),
                -z_c,
                crate::symmetric::quad_opts(),
            )?
            .value;
            Ok(u.generalized_inverse((below + cap * g.std_sf(z_c)).min(cap)))
        }
    }
}

/// Closed form `mu + kappa(gamma sigma)/gamma + log(Fbar_Y(VaR_alpha(Z)) / (1 - alpha))/gamma`.
pub fn tcerm_analytic(model: &SymmetricModel, alpha: f64, gamma: f64) -> Result<f64> {
    check_level(alpha)?;
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(RiskError::Parameter(format!("gamma must be finite and nonzero, got {gamma}")));
    }
    if let Generator::StudentT { .. } = model.generator {
        return Err(RiskError::MgfNonexistent(
            "Student-t has no moment generating function".into(),
        ));
    }
    if gamma.abs() < GAMMA_CTE_CUTOFF {
        return cte_analytic(model, alpha);
    }
    let q = model.generator.std_quantile(alpha)?;
    let tilted = model.generator.tilted(gamma * model.sigma)?;
    let survival = tilted.survival(q)?;
    Ok(model.mu + (tilted.log_normalizer + (survival / (1.0 - alpha)).ln()) / gamma)
}

/// Normal closed form `mu + gamma sigma^2 / 2 + log(Phibar(Phi^{-1}(alpha) - gamma sigma) / (1 - alpha)) / gamma`.
pub fn tcerm_normal(mu: f64, sigma: f64, alpha: f64, gamma: f64) -> Result<f64> {
    check_level(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(RiskError::Parameter(format!("scale must be positive, got {sigma}")));
    }
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(RiskError::Parameter(format!("gamma must be finite and nonzero, got {gamma}")));
    }
    let q = norm_quantile(alpha);
    if gamma.abs() < GAMMA_CTE_CUTOFF {
        return Ok(mu + sigma * crate::numeric::special::norm_pdf(q) / (1.0 - alpha));
    }
    let t = gamma * sigma;
    Ok(mu + 0.5 * gamma * sigma * sigma + (norm_sf(q - t) / (1.0 - alpha)).ln() / gamma)
}

/// Second-order approximation `CTE - l_U(x) TV / 2` evaluated at `x`.
pub fn taylor_tqlm(cte: f64, tv: f64, u: &UtilityFunction, evaluation_point: f64) -> Result<f64> {
    if !(tv >= 0.0) {
        return Err(RiskError::Parameter(format!("tail variance must be nonnegative, got {tv}")));
    }
    if tv == 0.0 {
        return Ok(cte);
    }
    Ok(cte - 0.5 * u.risk_aversion(evaluation_point)? * tv)
}

// ---------------------------------------------------------------------------
// Dual representation
// ---------------------------------------------------------------------------

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(RiskError::Input("distribution has no atoms".into()));
        }
        let mut total = 0.0;
        for &(x, p) in &atoms {
            if !x.is_finite() || !(p > 0.0) || !p.is_finite() {
                return Err(RiskError::Input(format!("invalid atom ({x}, {p})")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(RiskError::Input(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    /// Uniform weights over the given points (the empirical tail law).
    pub fn uniform(points: &[f64]) -> Result<Self> {
        let p = 1.0 / points.len().max(1) as f64;
        let atoms: Vec<_> = points.iter().map(|&x| (x, p)).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        // rescale the last atom so the sum check is not defeated by rounding
        let mut atoms = atoms;
        if let Some(last) = atoms.last_mut() {
            last.1 += 1.0 - total;
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn expectation(&self) -> f64 {
        self.atoms.iter().map(|(x, p)| x * p).sum()
    }

    /// `KL(self || reference)`; both must share the same support points.
    pub fn relative_entropy(&self, reference: &DiscreteDistribution) -> Result<f64> {
        if self.atoms.len() != reference.atoms.len()
            || self.atoms.iter().zip(&reference.atoms).any(|(a, b)| a.0 != b.0)
        {
            return Err(RiskError::Input("measures must share support points".into()));
        }
        Ok(self
            .atoms
            .iter()
            .zip(&reference.atoms)
            .map(|((_, q), (_, p))| q * (q / p).ln())
            .sum())
    }

    /// Penalized expectation `E_Q[X] - KL(Q || reference) / gamma`.
    pub fn entropic_objective(&self, reference: &DiscreteDistribution, gamma: f64) -> Result<f64> {
        Ok(self.expectation() - self.relative_entropy(reference)? / gamma)
    }
}

/// Result of the variational form of the entropic measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub value: f64,
    /// Optimizing measure `Q*(z) ∝ e^{gamma z} P(z)`.
    pub measure: DiscreteDistribution,
    /// Penalized expectation evaluated at `measure`.
    pub objective: f64,
}

/// `(1/gamma) log sum e^{gamma z} P(z)` and its optimizing measure.
///
/// The value is the supremum over `Q << P` of `E_Q[X] - KL(Q || P) / gamma`,
/// attained at the exponentially tilted `Q*`.
pub fn dual_entropic(d: &DiscreteDistribution, gamma: f64) -> Result<DualSolution> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(RiskError::Parameter(format!(
            "the variational form is evaluated for gamma > 0, got {gamma}"
        )));
    }
    let pivot = d.atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = d.atoms.iter().map(|&(x, p)| p * (gamma * (x - pivot)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let value = pivot + total.ln() / gamma;
    let measure = DiscreteDistribution {
        atoms: d.atoms.iter().zip(&weights).map(|(&(x, _), w)| (x, w / total)).collect(),
    };
    let objective = measure.entropic_objective(d, gamma)?;
    Ok(DualSolution {
        value,
        measure,
        objective,
    })
}
