//! Budgeted reinsurance under tail quasi-linear means.
//!
//! The insurer cedes `f(X)` for the expected-value premium `(1 + theta) E[f(X)]`
//! and keeps `R_f(X) = X - f(X)`. Among treaties with `f` and `R_f` both
//! nondecreasing, the retained tail quasi-linear mean is minimized by the
//! stop-loss `f(x) = (x - a)_+` whose retention solves
//! `(1 + theta) E[(X - a)_+] = P`, whatever the strictly convex `U`.

use std::fmt;

use crate::error::{check_level, Result, RiskError};
use crate::numeric::{brent, integrate, integrate_upper, QuadratureOptions};
use crate::risk::tqlm_sorted;
use crate::sample::SampleSet;
use crate::symmetric::{Generator, SymmetricModel};
use crate::utility::{Curvature, ExtendedReal, UtilityFunction};

fn quad_opts() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// Loss distribution accepted by the reinsurance problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Loss {
    Symmetric(SymmetricModel),
    Empirical(SampleSet),
    /// Exponential law with the given rate; closed forms make it the
    /// reference fixture.
    Exponential { rate: f64 },
}

impl Loss {
    pub fn exponential(rate: f64) -> Result<Self> {
        if rate.is_finite() && rate > 0.0 {
            Ok(Loss::Exponential { rate })
        } else {
            Err(RiskError::Parameter(format!("exponential rate must be positive, got {rate}")))
        }
    }

    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        match self {
            Loss::Symmetric(m) => m.quantile(alpha),
            Loss::Empirical(s) => s.value_at_risk(alpha),
            Loss::Exponential { rate } => Ok(-(-alpha).ln_1p() / rate),
        }
    }

    /// `E[(X - a)_+]`.
    pub fn expected_excess(&self, a: f64) -> Result<f64> {
        if a.is_nan() {
            return Err(RiskError::Parameter("retention is NaN".into()));
        }
        match self {
            Loss::Symmetric(m) => {
                let z = m.standardize(a);
                let g = m.generator;
                // E[(Z - z)_+] = Gbar(z^2 / 2) - z P(Z > z)
                let v = g.cumulative_generator(0.5 * z * z)? - z * g.std_sf(z);
                Ok(m.sigma * v.max(0.0))
            }
            Loss::Empirical(s) => {
                Ok(s.values().iter().map(|&x| (x - a).max(0.0)).sum::<f64>() / s.len() as f64)
            }
            Loss::Exponential { rate } => {
                if a >= 0.0 {
                    Ok((-rate * a).exp() / rate)
                } else {
                    Ok(1.0 / rate - a)
                }
            }
        }
    }

    fn log_density(&self, x: f64) -> f64 {
        match self {
            Loss::Symmetric(m) => m.generator.std_log_density(m.standardize(x)) - m.sigma.ln(),
            Loss::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            Loss::Empirical(_) => f64::NAN,
        }
    }

    /// Whether `E[e^{t X}]` is finite.
    fn mgf_exists(&self, t: f64) -> bool {
        match self {
            Loss::Symmetric(m) => m.generator.mgf_exists(t * m.sigma),
            Loss::Empirical(_) => true,
            Loss::Exponential { rate } => t < *rate,
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loss::Symmetric(m) => write!(f, "{m}"),
            Loss::Empirical(s) => write!(f, "empirical({} scenarios)", s.len()),
            Loss::Exponential { rate } => write!(f, "exponential({rate})"),
        }
    }
}

/// Ceded-loss function. All variants are admissible: `0 <= f(x) <= x` for
/// losses, `f` and `x - f(x)` nondecreasing, and `f` 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Treaty {
    None,
    StopLoss { retention: f64 },
    Proportional { share: f64 },
    /// `share * x_+ + layer * (x - retention)_+` with `share + layer <= 1`.
    Combined { share: f64, layer: f64, retention: f64 },
}

impl Treaty {
    pub fn stop_loss(retention: f64) -> Result<Self> {
        Self::combined(0.0, 1.0, retention).map(|_| Treaty::StopLoss { retention })
    }

    pub fn proportional(share: f64) -> Result<Self> {
        Self::combined(share, 0.0, 0.0).map(|_| Treaty::Proportional { share })
    }

    pub fn combined(share: f64, layer: f64, retention: f64) -> Result<Self> {
        let ok = share >= 0.0
            && layer >= 0.0
            && share + layer <= 1.0 + 1e-15
            && retention >= 0.0
            && retention.is_finite();
        if !ok {
            return Err(RiskError::Parameter(format!(
                "inadmissible treaty: share {share}, layer {layer}, retention {retention}"
            )));
        }
        Ok(Treaty::Combined {
            share,
            layer,
            retention,
        })
    }

    fn parts(&self) -> (f64, f64, f64) {
        match *self {
            Treaty::None => (0.0, 0.0, 0.0),
            Treaty::StopLoss { retention } => (0.0, 1.0, retention),
            Treaty::Proportional { share } => (share, 0.0, 0.0),
            Treaty::Combined {
                share,
                layer,
                retention,
            } => (share, layer, retention),
        }
    }

    /// Ceded amount `f(x)`.
    pub fn ceded(&self, x: f64) -> f64 {
        let (share, layer, retention) = self.parts();
        share * x.max(0.0) + layer * (x - retention).max(0.0)
    }

    /// Retained amount `R_f(x) = x - f(x)`.
    pub fn retained(&self, x: f64) -> f64 {
        match *self {
            Treaty::None => x,
            Treaty::StopLoss { retention } => x.min(retention),
            _ => x - self.ceded(x),
        }
    }

    /// Slope of `R_f` beyond every kink.
    fn terminal_retained_slope(&self) -> f64 {
        let (share, layer, _) = self.parts();
        (1.0 - share - layer).max(0.0)
    }

    fn kinks(&self) -> Vec<f64> {
        let (share, layer, retention) = self.parts();
        let mut k = Vec::new();
        if share > 0.0 {
            k.push(0.0);
        }
        if layer > 0.0 {
            k.push(retention);
        }
        k
    }

    /// `E[f(X)]`.
    pub fn expected_ceded(&self, loss: &Loss) -> Result<f64> {
        let (share, layer, retention) = self.parts();
        let mut v = 0.0;
        if share > 0.0 {
            v += share * loss.expected_excess(0.0)?;
        }
        if layer > 0.0 {
            v += layer * loss.expected_excess(retention)?;
        }
        Ok(v)
    }

    pub fn premium(&self, loss: &Loss, theta: f64) -> Result<f64> {
        Ok((1.0 + theta) * self.expected_ceded(loss)?)
    }
}

impl fmt::Display for Treaty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Treaty::None => write!(f, "none"),
            Treaty::StopLoss { retention } => write!(f, "stop_loss(a={retention})"),
            Treaty::Proportional { share } => write!(f, "proportional(q={share})"),
            Treaty::Combined {
                share,
                layer,
                retention,
            } => write!(f, "combined(q={share},c={layer},b={retention})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReinsuranceProblem {
    pub loss: Loss,
    /// Safety loading of the expected-value premium.
    pub theta: f64,
    /// Premium budget.
    pub budget: f64,
    pub alpha: f64,
}

impl ReinsuranceProblem {
    pub fn new(loss: Loss, theta: f64, budget: f64, alpha: f64) -> Result<Self> {
        check_level(alpha)?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(RiskError::Parameter(format!("loading must be positive, got {theta}")));
        }
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(RiskError::Parameter(format!("budget must be positive, got {budget}")));
        }
        Ok(Self {
            loss,
            theta,
            budget,
            alpha,
        })
    }

    /// `(1 + theta) E[(X - VaR_alpha)_+]`; feasible budgets lie strictly below it.
    pub fn feasibility_bound(&self) -> Result<f64> {
        let var = self.loss.quantile(self.alpha)?;
        Ok((1.0 + self.theta) * self.loss.expected_excess(var)?)
    }

    pub fn check_feasible(&self) -> Result<()> {
        let bound = self.feasibility_bound()?;
        if self.budget < bound {
            Ok(())
        } else {
            Err(RiskError::Infeasible {
                budget: self.budget,
                bound,
            })
        }
    }
}

/// Retention `b` with `E[(X - b)_+] = target`, searched above `floor`.
fn retention_for_excess(loss: &Loss, target: f64, floor: f64) -> Result<f64> {
    let at_floor = loss.expected_excess(floor)?;
    if target > at_floor {
        return Err(RiskError::Parameter(format!(
            "excess {target} exceeds E[(X - {floor})_+] = {at_floor}"
        )));
    }
    if target == at_floor {
        return Ok(floor);
    }
    let mut step = floor.abs().max(1.0);
    let mut hi = floor + step;
    let mut scanned = vec![(floor, at_floor - target)];
    loop {
        let v = loss.expected_excess(hi)? - target;
        scanned.push((hi, v));
        if v < 0.0 {
            break;
        }
        step *= 2.0;
        hi = floor + step;
        if step > 1e12 {
            return Err(RiskError::NoRoot {
                message: "expected excess never fell below the target".into(),
                scanned,
            });
        }
    }
    let xtol = 1e-15 * hi.abs().max(1.0);
    brent(|a| loss.expected_excess(a).unwrap_or(f64::NAN) - target, floor, hi, xtol, 500)
}

/// Stop-loss retention `a*` solving `(1 + theta) E[(X - a)_+] = P`; always above VaR.
pub fn solve_retention(p: &ReinsuranceProblem) -> Result<f64> {
    p.check_feasible()?;
    let var = p.loss.quantile(p.alpha)?;
    let a = retention_for_excess(&p.loss, p.budget / (1.0 + p.theta), var)?;
    let residual = ((1.0 + p.theta) * p.loss.expected_excess(a)? - p.budget).abs();
    if residual > 1e-10 * p.budget {
        return Err(RiskError::Convergence(format!(
            "retention {a} leaves premium residual {residual:e}"
        )));
    }
    Ok(a)
}

/// `rho_U^alpha(R_f(X))`, conditioning on the loss tail `X >= VaR_alpha(X)`.
pub fn retained_risk(loss: &Loss, treaty: &Treaty, alpha: f64, u: &UtilityFunction) -> Result<ExtendedReal> {
    check_level(alpha)?;
    match loss {
        Loss::Empirical(s) => {
            let slice = s.tail_slice(alpha)?;
            // R_f is nondecreasing, so the mapped members stay sorted
            let retained: Vec<f64> = slice.members.iter().map(|&x| treaty.retained(x)).collect();
            tqlm_sorted(&retained, u)
        }
        _ => retained_risk_analytic(loss, treaty, alpha, u),
    }
}

fn retained_risk_analytic(loss: &Loss, treaty: &Treaty, alpha: f64, u: &UtilityFunction) -> Result<ExtendedReal> {
    let x_q = loss.quantile(alpha)?;
    let r_q = treaty.retained(x_q);
    if !u.in_domain(r_q) {
        return Err(RiskError::Domain(format!("{u} is undefined at retained loss {r_q}")));
    }
    let slope = treaty.terminal_retained_slope();
    if let Loss::Symmetric(SymmetricModel {
        generator: Generator::StudentT { dof },
        ..
    }) = loss
    {
        let diverges = match *u {
            UtilityFunction::Exponential { gamma } => gamma > 0.0 && slope > 0.0,
            UtilityFunction::Power { gamma } => slope > 0.0 && gamma >= *dof,
            _ => false,
        };
        if diverges {
            return Err(RiskError::MgfNonexistent(
                "Student-t has no moment generating function".into(),
            ));
        }
    }
    if let UtilityFunction::Exponential { gamma } = *u {
        if gamma > 0.0 && slope > 0.0 && !loss.mgf_exists(gamma * slope) {
            return Err(RiskError::MgfNonexistent(format!(
                "E[exp({} X)] is infinite for {loss}",
                gamma * slope
            )));
        }
    }

    let mut cuts: Vec<f64> = treaty.kinks().into_iter().filter(|&k| k > x_q).collect();
    cuts.sort_by(f64::total_cmp);
    let tail = 1.0 - alpha;

    let piecewise = |h: &dyn Fn(f64) -> f64| -> Result<f64> {
        let mut total = 0.0;
        let mut lo = x_q;
        for &c in &cuts {
            total += integrate(h, lo, c, quad_opts())?.value;
            lo = c;
        }
        total += integrate_upper(h, lo, quad_opts())?.value;
        Ok(total)
    };

    match *u {
        UtilityFunction::Exponential { gamma } => {
            let h = |x: f64| (loss.log_density(x) + gamma * (treaty.retained(x) - r_q)).exp();
            let m = piecewise(&h)? / tail;
            let v = r_q + m.ln() / gamma;
            if !v.is_finite() {
                return Err(RiskError::Range(format!("retained exponential moment overflow at gamma {gamma}")));
            }
            Ok(ExtendedReal::Finite(v.max(r_q)))
        }
        _ => {
            let h = |x: f64| {
                u.evaluate(treaty.retained(x))
                    .map(|v| v * loss.log_density(x).exp())
                    .unwrap_or(f64::NAN)
            };
            let m = piecewise(&h)? / tail;
            if m.is_nan() {
                return Err(RiskError::Domain(format!("{u} left its domain on the retained tail")));
            }
            Ok(u.generalized_inverse(m.max(u.evaluate(r_q)?)))
        }
    }
}

/// Admissible treaty families used to challenge the stop-loss optimum.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateFamily {
    /// `count` treaties `q x + (1 - q)(x - b_q)_+`, `q` evenly spaced up to
    /// the pure quota share that exhausts the budget.
    Proportional { count: usize },
    /// Stop-losses at other retentions, premium-matched by scaling the layer
    /// (retentions below `a*`) or by adding a quota share (above `a*`).
    StopLossMix { retentions: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMargin {
    pub treaty: Treaty,
    pub premium_residual: f64,
    /// `+inf` when the retained measure diverges.
    pub retained_risk: f64,
    /// `retained_risk(candidate) - retained_risk(stop-loss at a*)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub retention: f64,
    pub optimal_risk: f64,
    pub candidates: Vec<CandidateMargin>,
}

impl OptimalityReport {
    pub fn min_margin(&self) -> f64 {
        self.candidates.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Premium-matched members of a candidate family.
pub fn premium_matched_candidates(p: &ReinsuranceProblem, family: &CandidateFamily) -> Result<Vec<Treaty>> {
    let a_star = solve_retention(p)?;
    let budget_mean = p.budget / (1.0 + p.theta);
    let positive_mean = p.loss.expected_excess(0.0)?;
    let q_max = budget_mean / positive_mean;
    let floor = p.loss.quantile(p.alpha)?.max(0.0);
    let mut out = Vec::new();
    match family {
        CandidateFamily::Proportional { count } => {
            for k in 1..=*count {
                let q = q_max * k as f64 / *count as f64;
                if k == *count {
                    out.push(Treaty::proportional(q)?);
                    continue;
                }
                let target = (budget_mean - q * positive_mean) / (1.0 - q);
                let b = retention_for_excess(&p.loss, target, floor.min(a_star))?;
                out.push(Treaty::combined(q, 1.0 - q, b)?);
            }
        }
        CandidateFamily::StopLossMix { retentions } => {
            for &b in retentions {
                if b < 0.0 {
                    return Err(RiskError::Parameter(format!("retention {b} is negative")));
                }
                let excess = p.loss.expected_excess(b)?;
                if b <= a_star {
                    out.push(Treaty::combined(0.0, budget_mean / excess, b)?);
                } else {
                    let q = (budget_mean - excess) / (positive_mean - excess);
                    out.push(Treaty::combined(q, 1.0 - q, b)?);
                }
            }
        }
    }
    Ok(out)
}

/// Compare the stop-loss at `a*` with premium-matched admissible candidates.
pub fn verify_optimality(
    p: &ReinsuranceProblem,
    u: &UtilityFunction,
    family: &CandidateFamily,
) -> Result<OptimalityReport> {
    if u.curvature() != Curvature::Convex {
        return Err(RiskError::Parameter(format!(
            "stop-loss optimality is only claimed for strictly convex utilities, got {u}"
        )));
    }
    let a_star = solve_retention(p)?;
    let optimal = Treaty::StopLoss { retention: a_star };
    let optimal_risk = retained_risk(&p.loss, &optimal, p.alpha, u)?.to_f64();
    let mut candidates = Vec::new();
    for treaty in premium_matched_candidates(p, family)? {
        let premium_residual = treaty.premium(&p.loss, p.theta)? - p.budget;
        if premium_residual.abs() > 1e-8 {
            return Err(RiskError::Internal(format!(
                "candidate {treaty} misses the budget by {premium_residual:e}"
            )));
        }
        let risk = match retained_risk(&p.loss, &treaty, p.alpha, u) {
            Ok(v) => v.to_f64(),
            Err(RiskError::MgfNonexistent(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        candidates.push(CandidateMargin {
            treaty,
            premium_residual,
            retained_risk: risk,
            margin: risk - optimal_risk,
        });
    }
    Ok(OptimalityReport {
        retention: a_star,
        optimal_risk,
        candidates,
    })
}
