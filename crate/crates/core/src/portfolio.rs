//! Entropic tail risk of elliptical portfolios and minimal-risk weights.
//!
//! For `X ~ E_n(mu, Sigma, g)` and weights `pi`, `pi'X` is the symmetric model
//! with location `pi'mu` and scale `sqrt(pi' Sigma pi)`, so
//! `rho(pi'X) = pi'mu + sqrt(v) rho_{gamma sqrt(v)}(Z)` with `v = pi' Sigma pi`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_level, Result, RiskError};
use crate::numeric::{brent, nelder_mead, NelderMeadOptions};
use crate::risk::tcerm_analytic;
use crate::symmetric::{Generator, SymmetricModel};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalModel {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    generator: Generator,
}

impl EllipticalModel {
    pub fn new(mu: Vec<f64>, sigma: Vec<Vec<f64>>, generator: Generator) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(RiskError::Input("elliptical model needs at least one asset".into()));
        }
        if sigma.len() != n || sigma.iter().any(|r| r.len() != n) {
            return Err(RiskError::Input(format!("scale matrix must be {n}x{n}")));
        }
        if mu.iter().chain(sigma.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(RiskError::Input("location and scale entries must be finite".into()));
        }
        let sigma = DMatrix::from_fn(n, n, |i, j| sigma[i][j]);
        for i in 0..n {
            for j in 0..i {
                let scale = sigma[(i, j)].abs().max(sigma[(j, i)].abs()).max(1.0);
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(RiskError::Input(format!("scale matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        spd(&sigma, "scale matrix")?;
        Ok(Self {
            mu: DVector::from_vec(mu),
            sigma,
            generator,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    /// Same scale and generator with the locations shifted by `c`.
    pub fn shift_means(&self, c: f64) -> Self {
        Self {
            mu: self.mu.add_scalar(c),
            ..self.clone()
        }
    }
}

fn spd(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| RiskError::Input(format!("{what} is not positive definite")))
}

/// Weights summing to one; short positions are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights(Vec<f64>);

impl PortfolioWeights {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() || pi.iter().any(|v| !v.is_finite()) {
            return Err(RiskError::Input("weights must be finite and nonempty".into()));
        }
        let sum: f64 = pi.iter().sum();
        let scale = pi.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if (sum - 1.0).abs() > 1e-12 * scale {
            return Err(RiskError::Input(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(pi))
    }

    /// Weights from the first `n - 1` coordinates; the last one closes the budget.
    pub fn from_free(free: &[f64]) -> Self {
        let mut pi = free.to_vec();
        pi.push(1.0 - free.iter().sum::<f64>());
        Self(pi)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    fn vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

fn check_weights(m: &EllipticalModel, pi: &PortfolioWeights) -> Result<()> {
    if pi.0.len() != m.dim() {
        return Err(RiskError::Input(format!(
            "{} weights for {} assets",
            pi.0.len(),
            m.dim()
        )));
    }
    Ok(())
}

/// Distribution of `pi'X`.
pub fn marginalize(m: &EllipticalModel, pi: &PortfolioWeights) -> Result<SymmetricModel> {
    check_weights(m, pi)?;
    let p = pi.vector();
    let v = (p.transpose() * &m.sigma * &p)[(0, 0)];
    if !(v > 0.0) {
        return Err(RiskError::Internal(format!("portfolio variance {v} is not positive")));
    }
    SymmetricModel::new(m.generator, p.dot(&m.mu), v.sqrt())
}

pub fn portfolio_tcerm(m: &EllipticalModel, pi: &PortfolioWeights, alpha: f64, gamma: f64) -> Result<f64> {
    let r = marginalize(m, pi)?;
    Ok(r.mu + r.sigma * tcerm_analytic(&r.standard(), alpha, gamma * r.sigma)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub sigma11: DMatrix<f64>,
    pub sigma1: DVector<f64>,
    pub sigma_nn: f64,
    pub q: DMatrix<f64>,
    pub delta: DVector<f64>,
}

pub fn partition(m: &EllipticalModel) -> Result<Partition> {
    let n = m.dim();
    if n < 2 {
        return Err(RiskError::Input("partition needs at least two assets".into()));
    }
    let k = n - 1;
    let sigma11 = m.sigma.view((0, 0), (k, k)).into_owned();
    let sigma1 = m.sigma.view((0, k), (k, 1)).column(0).into_owned();
    let sigma_nn = m.sigma[(k, k)];
    let q = DMatrix::from_fn(k, k, |i, j| sigma11[(i, j)] - sigma1[j] - sigma1[i] + sigma_nn);
    spd(&q, "reduced scale matrix Q")?;
    let mu_n = m.mu[k];
    let delta = DVector::from_fn(k, |i, _| mu_n - m.mu[i]);
    Ok(Partition {
        sigma11,
        sigma1,
        sigma_nn,
        q,
        delta,
    })
}

/// `s(t) = t^2 rho_{t^2 gamma}(Z)`.
pub fn s_function(t: f64, generator: Generator, alpha: f64, gamma: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(RiskError::Parameter(format!("s(t) needs t > 0, got {t}")));
    }
    let z = SymmetricModel::new(generator, 0.0, 1.0)?;
    Ok(t * t * tcerm_analytic(&z, alpha, t * t * gamma)?)
}

/// Central difference of `s` at step `h = max(1e-5, 1e-5 t)` with one
/// Richardson step against `h / 2`.
pub fn s_prime(t: f64, generator: Generator, alpha: f64, gamma: f64) -> Result<f64> {
    let h = (1e-5 * t).max(1e-5);
    let central = |h: f64| -> Result<f64> {
        Ok((s_function(t + h, generator, alpha, gamma)? - s_function(t - h, generator, alpha, gamma)?) / (2.0 * h))
    };
    let (d1, d2) = (central(h)?, central(0.5 * h)?);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Minimizer of `portfolio_tcerm` over weights summing to one, by a coarse
/// grid in the free coordinates followed by restarted Nelder–Mead.
pub fn brute_force_min(m: &EllipticalModel, alpha: f64, gamma: f64) -> Result<PortfolioWeights> {
    check_level(alpha)?;
    let n = m.dim();
    if n < 2 {
        return Err(RiskError::Input("optimization needs at least two assets".into()));
    }
    let k = n - 1;
    let objective = |free: &[f64]| {
        portfolio_tcerm(m, &PortfolioWeights::from_free(free), alpha, gamma).unwrap_or(f64::INFINITY)
    };
    // probe the objective once so model errors surface as errors
    portfolio_tcerm(m, &PortfolioWeights::from_free(&vec![1.0 / n as f64; k]), alpha, gamma)?;

    let levels = [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
    let mut best = (vec![0.0; k], f64::INFINITY);
    let mut idx = vec![0usize; k];
    'grid: loop {
        let x: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
        let v = objective(&x);
        if v < best.1 {
            best = (x, v);
        }
        for d in 0..k {
            idx[d] += 1;
            if idx[d] < levels.len() {
                continue 'grid;
            }
            idx[d] = 0;
        }
        break;
    }

    let opts = NelderMeadOptions {
        f_tol: 1e-13,
        x_tol: 1e-9,
        max_evaluations: 50_000,
    };
    let mut current = nelder_mead(objective, &best.0, 0.25, opts);
    for step in [0.05, 0.01] {
        let next = nelder_mead(objective, &current.point, step, opts);
        let improved = current.value - next.value;
        current = next;
        if improved.abs() <= 1e-10 {
            break;
        }
    }
    Ok(PortfolioWeights::from_free(&current.point))
}

/// Agreement of the closed-form path with the brute-force minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub oracle: PortfolioWeights,
    pub oracle_objective: f64,
    pub max_coordinate_gap: f64,
    pub agrees: bool,
    /// More than one sign change of the root function was seen.
    pub multiple_roots: bool,
    /// `(r, 2 r H'(v(r)) - 1)` pairs visited by the bracket scan.
    pub scanned: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinRiskSolution {
    pub weights: PortfolioWeights,
    pub r_star: f64,
    pub objective: f64,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub diagnostic: Diagnostic,
}

pub const AGREEMENT_TOL: f64 = 1e-3;

/// Minimal-risk weights `phi1 + r* phi2`.
///
/// Along the line the variance is `v(r) = v0 + r^2 D` with `v0 = 1/(1'Sigma^{-1}1)`
/// and `D = Delta'Q^{-1}Delta`, and the mean drops by `r D`, so the first-order
/// condition is `2 r H'(v) = 1` for `H(v) = sqrt(v) rho_{gamma sqrt(v)}(Z)`.
/// Writing `H(v) = s(v^{1/4})` gives `H'(v) = s'(t) / (4 t^3)` at `t = v^{1/4}`.
pub fn min_risk_weights(m: &EllipticalModel, alpha: f64, gamma: f64) -> Result<MinRiskSolution> {
    check_level(alpha)?;
    m.generator.require_mgf()?;
    let n = m.dim();
    let part = partition(m)?;
    let ones = DVector::from_element(n, 1.0);
    let sigma_inv_ones = spd(&m.sigma, "scale matrix")?.solve(&ones);
    let total = ones.dot(&sigma_inv_ones);
    let phi1 = &sigma_inv_ones / total;
    let v0 = 1.0 / total;

    let q_inv_delta = spd(&part.q, "reduced scale matrix Q")?.solve(&part.delta);
    let d = part.delta.dot(&q_inv_delta);
    let mut phi2 = DVector::zeros(n);
    phi2.rows_mut(0, n - 1).copy_from(&q_inv_delta);
    phi2[n - 1] = -q_inv_delta.sum();

    let root_fn = |r: f64| -> Result<f64> {
        let t = (v0 + r * r * d).powf(0.25);
        let h_prime = s_prime(t, m.generator, alpha, gamma)? / (4.0 * t * t * t);
        Ok(2.0 * r * h_prime - 1.0)
    };

    let mut scanned = Vec::new();
    let mut multiple_roots = false;
    let r_star = if d <= 0.0 {
        0.0
    } else {
        let mut bracket = None;
        let mut r = 1e-3;
        let mut extra = 0;
        let mut prev: Option<(f64, f64)> = None;
        while r < 1e12 {
            let v = root_fn(r)?;
            scanned.push((r, v));
            if let Some((rp, vp)) = prev {
                if vp.signum() != v.signum() {
                    if bracket.is_none() {
                        bracket = Some((rp, r));
                    } else {
                        multiple_roots = true;
                    }
                }
            }
            prev = Some((r, v));
            if bracket.is_some() {
                extra += 1;
                if extra > 8 {
                    break;
                }
            }
            r *= 2.0;
        }
        let (lo, hi) = bracket.ok_or_else(|| RiskError::NoRoot {
            message: "2 r H'(v(r)) - 1 kept one sign on the scan".into(),
            scanned: scanned.clone(),
        })?;
        brent(|r| root_fn(r).unwrap_or(f64::NAN), lo, hi, 1e-13 * hi, 300)?
    };

    let pi_vec = &phi1 + &phi2 * r_star;
    let weights = PortfolioWeights::new(pi_vec.iter().copied().collect())?;
    let objective = portfolio_tcerm(m, &weights, alpha, gamma)?;

    let oracle = brute_force_min(m, alpha, gamma)?;
    let oracle_objective = portfolio_tcerm(m, &oracle, alpha, gamma)?;
    let max_coordinate_gap = weights
        .as_slice()
        .iter()
        .zip(oracle.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MinRiskSolution {
        weights,
        r_star,
        objective,
        phi1: phi1.iter().copied().collect(),
        phi2: phi2.iter().copied().collect(),
        diagnostic: Diagnostic {
            oracle,
            oracle_objective,
            max_coordinate_gap,
            agrees: max_coordinate_gap <= AGREEMENT_TOL && !multiple_roots,
            multiple_roots,
            scanned,
        },
    })
}
