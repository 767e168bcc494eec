//! Fast invariant suite behind `tailrisk selftest`.

use crate::allocation::{allocation_gap, JointSample};
use crate::error::Result;
use crate::numeric::integrate_upper;
use crate::portfolio::{min_risk_weights, EllipticalModel};
use crate::reinsurance::{solve_retention, Loss, ReinsuranceProblem};
use crate::risk::{
    cte_analytic, cte_estimate, dual_entropic, tail_variance_analytic, tcerm_analytic, tcerm_normal, tqlm_analytic,
    var_analytic, DiscreteDistribution,
};
use crate::symmetric::{Generator, SymmetricModel};
use crate::utility::UtilityFunction;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run(seed: u64) -> Vec<Check> {
    vec![
        check("utility_inverse_round_trip", || {
            let mut worst: f64 = 0.0;
            for spec in ["linear", "exp:0.5", "exp:-0.5", "pow:2", "pow:0.5", "log"] {
                let u: UtilityFunction = spec.parse()?;
                for x in [0.25, 1.0, 2.5, 7.0] {
                    let back = u.generalized_inverse(u.evaluate(x)?).to_f64();
                    worst = worst.max((back - x).abs() / x);
                }
            }
            Ok((worst <= 1e-12, format!("max relative error {worst:e}")))
        }),
        check("sandwich_normal", || {
            let m = SymmetricModel::normal(0.0, 1.0)?;
            let (var, cte) = (var_analytic(&m, 0.95)?, cte_analytic(&m, 0.95)?);
            let mut ok = true;
            for spec in ["exp:-0.5", "log", "pow:0.5"] {
                let t = tqlm_analytic(&m, 0.95, &spec.parse()?)?.to_f64();
                ok &= var - 1e-9 <= t && t <= cte + 1e-9;
            }
            for spec in ["exp:0.5", "pow:2"] {
                ok &= tqlm_analytic(&m, 0.95, &spec.parse()?)?.to_f64() >= cte - 1e-9;
            }
            Ok((ok, format!("var {var:.12}, cte {cte:.12}")))
        }),
        check("tcerm_closed_form_vs_quadrature", || {
            let (alpha, gamma) = (0.95, 0.5);
            let closed = tcerm_normal(0.0, 1.0, alpha, gamma)?;
            let q = SymmetricModel::normal(0.0, 1.0)?.quantile(alpha)?;
            let integral = integrate_upper(
                |x: f64| (gamma * (x - q) - 0.5 * x * x).exp() * crate::numeric::special::INV_SQRT_2PI,
                q,
                Default::default(),
            )?
            .value;
            let quad = q + (integral / (1.0 - alpha)).ln() / gamma;
            let diff = (closed - quad).abs();
            Ok((diff <= 1e-8, format!("closed {closed:.15}, quadrature {quad:.15}")))
        }),
        check("entropic_limit_gamma_to_zero", || {
            let m = SymmetricModel::logistic(1.0, 2.0)?;
            let diff = (tcerm_analytic(&m, 0.9, 1e-6)? - cte_analytic(&m, 0.9)?).abs();
            Ok((diff <= 1e-4, format!("difference {diff:e}")))
        }),
        check("taylor_second_order", || {
            let m = SymmetricModel::normal(0.0, 1.0)?;
            let (cte, tv) = (cte_analytic(&m, 0.95)?, tail_variance_analytic(&m, 0.95)?);
            let err = |g: f64| -> Result<f64> { Ok((tcerm_analytic(&m, 0.95, g)? - cte - 0.5 * g * tv).abs()) };
            let (r1, r2) = (err(0.4)? / err(0.2)?, err(0.2)? / err(0.1)?);
            let ok = (3.0..=5.0).contains(&r1) && (3.0..=5.0).contains(&r2);
            Ok((ok, format!("error ratios {r1:.4}, {r2:.4}")))
        }),
        check("dual_representation", || {
            let z: Vec<f64> = (0..50).map(|i| 1.645 + 0.05 * i as f64).collect();
            let d = DiscreteDistribution::uniform(&z)?;
            let s = dual_entropic(&d, 0.7)?;
            let diff = (s.objective - s.value).abs();
            Ok((diff <= 1e-12, format!("objective - value = {diff:e}")))
        }),
        check("linear_allocation_is_additive", || {
            let j = JointSample::comonotone_normal(&[(0.0, 1.0), (1.0, 2.0), (-0.5, 0.5)], 20_000, seed)?;
            let gap = allocation_gap(&j, 0.95, &UtilityFunction::Linear)?;
            Ok((gap.abs() <= 1e-12, format!("gap {gap:e}")))
        }),
        check("stop_loss_retention", || {
            let p = ReinsuranceProblem::new(Loss::exponential(1.0)?, 0.2, 0.03, 0.95)?;
            let a = solve_retention(&p)?;
            Ok(((a - 40f64.ln()).abs() <= 1e-8, format!("retention {a:.15}")))
        }),
        check("symmetric_portfolio", || {
            let m = EllipticalModel::new(vec![0.0, 0.0], vec![vec![1.0, 0.3], vec![0.3, 1.0]], Generator::Normal)?;
            let s = min_risk_weights(&m, 0.95, 0.3)?;
            let gap = s.weights.as_slice().iter().map(|w| (w - 0.5).abs()).fold(0.0, f64::max);
            Ok((gap <= 1e-6 && s.diagnostic.agrees, format!("max deviation from 1/2 {gap:e}")))
        }),
        check("monte_carlo_cte", || {
            let m = SymmetricModel::normal(0.0, 1.0)?;
            let est = cte_estimate(&m.sample(200_000, seed)?, 0.95)?;
            let se = est.standard_error.unwrap_or(f64::NAN);
            let z = (est.value - cte_analytic(&m, 0.95)?) / se;
            Ok((z.abs() <= 3.0, format!("z-score {z:.3}")))
        }),
    ]
}
