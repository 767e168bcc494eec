use serde_json::Value;

use super::config::{gamma_utility, RunConfig};
use super::input::{read_elliptical, read_joint, read_losses};
use super::output::{cell, nums, opt_cell, opt_num, Obj, Table};
use crate::allocation::{allocation_gap_estimate, contributions};
use crate::error::{Result, RiskError};
use crate::portfolio::{min_risk_weights, EllipticalModel};
use crate::reinsurance::{
    retained_risk, solve_retention, verify_optimality, CandidateFamily, Loss, ReinsuranceProblem, Treaty,
};
use crate::risk::{
    cte_analytic, cte_estimate, tail_variance_analytic, tail_variance_estimate, taylor_tqlm, tcerm_analytic,
    tqlm_analytic, tqlm_estimate, var_analytic, var_estimate,
};
use crate::sample::SampleSet;
use crate::symmetric::{Generator, SymmetricModel};
use crate::utility::{Curvature, UtilityFunction};

/// Command result before it is wrapped in the envelope.
pub struct Output {
    pub results: Value,
    pub table: Table,
    pub warnings: Vec<String>,
    /// Selftest found a failing property.
    pub failed: bool,
}

pub const TCERM_WARNING: &str = "closed-form tcerm evaluated as mu + (kappa(gamma*sigma) + ln(Fbar_Y(q)/(1-alpha)))/gamma; \
the log term enters with a plus sign";
pub const TAYLOR_WARNING: &str = "taylor approximation evaluated as CTE - l_U(CTE) TV/2, which is CTE + (gamma/2) TV for exp:gamma";

fn push_unique(warnings: &mut Vec<String>, w: &str) {
    if !warnings.iter().any(|x| x == w) {
        warnings.push(w.to_owned());
    }
}

enum Source {
    Analytic(SymmetricModel),
    Empirical(SampleSet),
}

impl Source {
    fn resolve(cfg: &RunConfig) -> Result<Self> {
        match (&cfg.input, &cfg.model) {
            (Some(_), Some(_)) => Err(RiskError::Parse("give either --input or --model, not both".into())),
            (Some(path), None) => Ok(Source::Empirical(read_losses(path)?)),
            (None, Some(spec)) => {
                let model: SymmetricModel = spec.parse()?;
                match cfg.paths {
                    Some(n) => Ok(Source::Empirical(model.sample(n, cfg.seed)?)),
                    None => Ok(Source::Analytic(model)),
                }
            }
            (None, None) => Err(RiskError::Parse(format!("{} needs --model or --input", cfg.command))),
        }
    }

    fn mode(&self) -> &'static str {
        match self {
            Source::Analytic(_) => "analytic",
            Source::Empirical(_) => "empirical",
        }
    }
}

struct Measures {
    var: f64,
    cte: f64,
    tv: f64,
    tqlm: f64,
    tcerm: Option<f64>,
    taylor: Option<f64>,
    se: Option<[Option<f64>; 4]>,
}

fn measures(src: &Source, alpha: f64, u: &UtilityFunction, warnings: &mut Vec<String>) -> Result<Measures> {
    let gamma = match *u {
        UtilityFunction::Exponential { gamma } => Some(gamma),
        _ => None,
    };
    let mut m = match src {
        Source::Analytic(model) => {
            let tcerm = match gamma {
                Some(g) => {
                    push_unique(warnings, TCERM_WARNING);
                    Some(tcerm_analytic(model, alpha, g)?)
                }
                None => None,
            };
            Measures {
                var: var_analytic(model, alpha)?,
                cte: cte_analytic(model, alpha)?,
                tv: tail_variance_analytic(model, alpha)?,
                tqlm: tqlm_analytic(model, alpha, u)?.to_f64(),
                tcerm,
                taylor: None,
                se: None,
            }
        }
        Source::Empirical(s) => {
            let var = var_estimate(s, alpha)?;
            let cte = cte_estimate(s, alpha)?;
            let tv = tail_variance_estimate(s, alpha)?;
            let (tqlm, tqlm_se) = tqlm_estimate(s, alpha, u)?;
            Measures {
                var: var.value,
                cte: cte.value,
                tv: tv.value,
                tqlm: tqlm.to_f64(),
                tcerm: gamma.map(|_| tqlm.to_f64()),
                taylor: None,
                se: Some([var.standard_error, cte.standard_error, tv.standard_error, tqlm_se]),
            }
        }
    };
    if gamma.is_some() {
        push_unique(warnings, TAYLOR_WARNING);
        m.taylor = Some(taylor_tqlm(m.cte, m.tv, u, m.cte)?);
    }
    Ok(m)
}

fn sandwich(m: &Measures, u: &UtilityFunction, analytic: bool) -> (&'static str, bool) {
    let tol = if analytic { 1e-9 } else { 1e-12 } * m.cte.abs().max(1.0);
    match u.curvature() {
        Curvature::Linear => ("tqlm = cte", (m.tqlm - m.cte).abs() <= tol),
        Curvature::Concave => ("var <= tqlm <= cte", m.var - tol <= m.tqlm && m.tqlm <= m.cte + tol),
        Curvature::Convex => ("tqlm >= cte", m.tqlm >= m.cte - tol),
    }
}

pub fn measure(cfg: &RunConfig) -> Result<Output> {
    let src = Source::resolve(cfg)?;
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    let mut table = Table::new(&[
        "alpha", "utility", "var", "cte", "tail_variance", "tqlm", "tcerm", "taylor", "sandwich", "tqlm_se",
    ]);
    for alpha in cfg.levels() {
        for u in cfg.utility_list()? {
            let m = measures(&src, alpha, &u, &mut warnings)?;
            let (rule, holds) = sandwich(&m, &u, matches!(src, Source::Analytic(_)));
            let se = m.se.map(|[var, cte, tv, tqlm]| {
                Value::from(
                    Obj::new()
                        .set("var", opt_num(var))
                        .set("cte", opt_num(cte))
                        .set("tail_variance", opt_num(tv))
                        .set("tqlm", opt_num(tqlm)),
                )
            });
            records.push(Value::from(
                Obj::new()
                    .num("alpha", alpha)
                    .set("utility", u.to_string())
                    .set("curvature", format!("{:?}", u.curvature()).to_lowercase())
                    .num("var", m.var)
                    .num("cte", m.cte)
                    .num("tail_variance", m.tv)
                    .num("tqlm", m.tqlm)
                    .set("tcerm", opt_num(m.tcerm))
                    .set("taylor", opt_num(m.taylor))
                    .set("sandwich", Obj::new().set("rule", rule).set("holds", holds))
                    .set("standard_errors", se.unwrap_or(Value::Null)),
            ));
            table.push(vec![
                cell(alpha),
                u.to_string(),
                cell(m.var),
                cell(m.cte),
                cell(m.tv),
                cell(m.tqlm),
                opt_cell(m.tcerm),
                opt_cell(m.taylor),
                holds.to_string(),
                opt_cell(m.se.and_then(|s| s[3])),
            ]);
        }
    }
    Ok(Output {
        results: Obj::new().set("mode", src.mode()).set("records", records).into(),
        table,
        warnings,
        failed: false,
    })
}

fn sorted_grid(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn sweep(cfg: &RunConfig) -> Result<Output> {
    let alphas = sorted_grid(&cfg.alphas);
    let gammas = sorted_grid(&cfg.gammas);
    if alphas.is_empty() || gammas.is_empty() {
        return Err(RiskError::Parse("sweep needs a nonempty grid: give --alpha and --gamma".into()));
    }
    let src = Source::resolve(cfg)?;
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    let mut table = Table::new(&["alpha", "gamma", "var", "cte", "tqlm", "taylor"]);
    for &alpha in &alphas {
        for &gamma in &gammas {
            let u = gamma_utility(gamma)?;
            let m = measures(&src, alpha, &u, &mut warnings)?;
            let taylor = m.taylor.unwrap_or(m.cte);
            records.push(Value::from(
                Obj::new()
                    .num("alpha", alpha)
                    .num("gamma", gamma)
                    .num("var", m.var)
                    .num("cte", m.cte)
                    .num("tqlm", m.tqlm)
                    .num("taylor", taylor),
            ));
            table.push(vec![cell(alpha), cell(gamma), cell(m.var), cell(m.cte), cell(m.tqlm), cell(taylor)]);
        }
    }
    Ok(Output {
        results: Obj::new().set("mode", src.mode()).set("rows", records).into(),
        table,
        warnings,
        failed: false,
    })
}

pub fn allocate(cfg: &RunConfig) -> Result<Output> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| RiskError::Parse("allocate needs --input with one column per component".into()))?;
    let (names, joint) = read_joint(path)?;
    let mut records = Vec::new();
    let mut table = Table::new(&["alpha", "utility", "component", "value"]);
    for alpha in cfg.levels() {
        for u in cfg.utility_list()? {
            let parts = contributions(&joint, alpha, &u)?;
            let whole = crate::risk::tqlm_empirical(joint.total(), alpha, &u)?.to_f64();
            let sum: f64 = parts.iter().sum();
            let gap = whole - sum;
            let se = if joint.scenarios() / cfg.batches.max(1) >= 2 && cfg.batches >= 2 {
                Some(allocation_gap_estimate(&joint, alpha, &u, cfg.batches)?.standard_error)
            } else {
                None
            };
            let comps: Vec<Value> = names
                .iter()
                .zip(&parts)
                .map(|(n, c)| Obj::new().set("name", n.as_str()).num("contribution", *c).into())
                .collect();
            records.push(Value::from(
                Obj::new()
                    .num("alpha", alpha)
                    .set("utility", u.to_string())
                    .set("components", comps)
                    .num("total", whole)
                    .num("sum_of_contributions", sum)
                    .num("gap", gap)
                    .set("gap_standard_error", opt_num(se)),
            ));
            for (n, c) in names.iter().zip(&parts) {
                table.push(vec![cell(alpha), u.to_string(), n.clone(), cell(*c)]);
            }
            table.push(vec![cell(alpha), u.to_string(), "total".into(), cell(whole)]);
            table.push(vec![cell(alpha), u.to_string(), "gap".into(), cell(gap)]);
        }
    }
    Ok(Output {
        results: Obj::new()
            .set("components", names.clone())
            .set("scenarios", joint.scenarios())
            .set("records", records)
            .into(),
        table,
        warnings: Vec::new(),
        failed: false,
    })
}

fn parse_loss(cfg: &RunConfig) -> Result<Loss> {
    match (&cfg.input, &cfg.model) {
        (Some(_), Some(_)) => Err(RiskError::Parse("give either --input or --model, not both".into())),
        (Some(path), None) => Ok(Loss::Empirical(read_losses(path)?)),
        (None, Some(spec)) => {
            let s = spec.trim();
            if let Some(rest) = s.strip_prefix("exponential") {
                let rate = rest
                    .trim()
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| RiskError::Parse(format!("invalid model specification '{s}'")))?;
                return Loss::exponential(rate).map_err(|e| RiskError::Parse(e.to_string()));
            }
            let model: SymmetricModel = s.parse()?;
            match cfg.paths {
                Some(n) => Ok(Loss::Empirical(model.sample(n, cfg.seed)?)),
                None => Ok(Loss::Symmetric(model)),
            }
        }
        (None, None) => Err(RiskError::Parse("reinsure needs --model or --input".into())),
    }
}

pub fn reinsure(cfg: &RunConfig) -> Result<Output> {
    let loss = parse_loss(cfg)?;
    let theta = cfg.theta.ok_or_else(|| RiskError::Parse("reinsure needs --theta".into()))?;
    let budget = cfg.budget.ok_or_else(|| RiskError::Parse("reinsure needs --budget".into()))?;
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    let mut table = Table::new(&["alpha", "utility", "treaty", "premium_residual", "retained_risk", "margin"]);
    for alpha in cfg.levels() {
        let p = ReinsuranceProblem::new(loss.clone(), theta, budget, alpha).map_err(|e| match e {
            RiskError::Parameter(m) => RiskError::Parse(m),
            e => e,
        })?;
        let a = solve_retention(&p)?;
        let var = loss.quantile(alpha)?;
        let optimal = Treaty::StopLoss { retention: a };
        let residual = optimal.premium(&loss, theta)? - budget;
        let d = a - var;
        let retentions: Vec<f64> = [a - 0.5 * d, a - 0.25 * d, a + 0.25 * d, a + d]
            .into_iter()
            .filter(|b| *b >= 0.0)
            .collect();
        let mut per_u = Vec::new();
        for u in cfg.utility_list()? {
            // the untreated loss may lack the exponential moment the treaty removes
            let raw = match retained_risk(&loss, &Treaty::None, alpha, &u) {
                Ok(v) => v.to_f64(),
                Err(RiskError::MgfNonexistent(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let at_optimum = retained_risk(&loss, &optimal, alpha, &u)?.to_f64();
            table.push(vec![
                cell(alpha),
                u.to_string(),
                optimal.to_string(),
                cell(residual),
                cell(at_optimum),
                cell(0.0),
            ]);
            let comparison = if u.curvature() == Curvature::Convex {
                let mut rows = Vec::new();
                for family in [
                    CandidateFamily::Proportional { count: cfg.candidates },
                    CandidateFamily::StopLossMix {
                        retentions: retentions.clone(),
                    },
                ] {
                    for c in verify_optimality(&p, &u, &family)?.candidates {
                        table.push(vec![
                            cell(alpha),
                            u.to_string(),
                            c.treaty.to_string(),
                            cell(c.premium_residual),
                            cell(c.retained_risk),
                            cell(c.margin),
                        ]);
                        rows.push(Value::from(
                            Obj::new()
                                .set("treaty", c.treaty.to_string())
                                .num("premium_residual", c.premium_residual)
                                .num("retained_risk", c.retained_risk)
                                .num("margin", c.margin),
                        ));
                    }
                }
                Value::Array(rows)
            } else {
                push_unique(
                    &mut warnings,
                    "candidate comparison is only run for strictly convex utilities",
                );
                Value::Null
            };
            per_u.push(Value::from(
                Obj::new()
                    .set("utility", u.to_string())
                    .num("risk_without_treaty", raw)
                    .num("retained_risk", at_optimum)
                    .set("candidates", comparison),
            ));
        }
        records.push(Value::from(
            Obj::new()
                .num("alpha", alpha)
                .num("var", var)
                .num("feasibility_bound", p.feasibility_bound()?)
                .num("retention", a)
                .num("premium_residual", residual)
                .set("utilities", per_u),
        ));
    }
    Ok(Output {
        results: Obj::new()
            .set("loss", loss.to_string())
            .num("theta", theta)
            .num("budget", budget)
            .set("records", records)
            .into(),
        table,
        warnings,
        failed: false,
    })
}

pub fn portfolio(cfg: &RunConfig) -> Result<Output> {
    let (names, mu, sigma) = match (&cfg.input, &cfg.mu, &cfg.sigma) {
        (Some(path), _, _) => read_elliptical(path)?,
        (None, Some(mu), Some(sigma)) => ((1..=mu.len()).map(|i| format!("x{i}")).collect(), mu.clone(), sigma.clone()),
        _ => {
            return Err(RiskError::Parse(
                "portfolio needs --input or mu and sigma in the config file".into(),
            ))
        }
    };
    let generator: Generator = cfg.generator.as_deref().unwrap_or("normal").parse()?;
    let model = EllipticalModel::new(mu, sigma, generator).map_err(|e| match e {
        RiskError::Input(m) => RiskError::Parse(m),
        e => e,
    })?;
    if cfg.gammas.is_empty() {
        return Err(RiskError::Parse("portfolio needs --gamma".into()));
    }
    let mut warnings = vec![TCERM_WARNING.to_owned()];
    let mut records = Vec::new();
    let mut table = Table::new(&["alpha", "gamma", "asset", "weight", "oracle_weight"]);
    for alpha in cfg.levels() {
        for &gamma in &cfg.gammas {
            let s = min_risk_weights(&model, alpha, gamma)?;
            let d = &s.diagnostic;
            if !d.agrees {
                warnings.push(format!(
                    "discrepancy at alpha {alpha}, gamma {gamma}: closed-form weights differ from the brute-force \
                     minimizer by {:e}{}",
                    d.max_coordinate_gap,
                    if d.multiple_roots { " (multiple roots)" } else { "" }
                ));
            }
            for (i, n) in names.iter().enumerate() {
                table.push(vec![
                    cell(alpha),
                    cell(gamma),
                    n.clone(),
                    cell(s.weights.as_slice()[i]),
                    cell(d.oracle.as_slice()[i]),
                ]);
            }
            records.push(Value::from(
                Obj::new()
                    .num("alpha", alpha)
                    .num("gamma", gamma)
                    .set("weights", nums(s.weights.as_slice()))
                    .num("r_star", s.r_star)
                    .num("objective", s.objective)
                    .set("phi1", nums(&s.phi1))
                    .set("phi2", nums(&s.phi2))
                    .set(
                        "oracle",
                        Obj::new()
                            .set("weights", nums(d.oracle.as_slice()))
                            .num("objective", d.oracle_objective)
                            .num("max_coordinate_gap", d.max_coordinate_gap)
                            .set("agrees", d.agrees)
                            .set("multiple_roots", d.multiple_roots),
                    ),
            ));
        }
    }
    Ok(Output {
        results: Obj::new()
            .set("assets", names)
            .set("generator", generator.to_string())
            .set("records", records)
            .into(),
        table,
        warnings,
        failed: false,
    })
}

pub fn sample_csv(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.model.as_ref().ok_or_else(|| RiskError::Parse("sample needs --model".into()))?;
    let n = cfg.paths.ok_or_else(|| RiskError::Parse("sample needs --paths".into()))?;
    let model: SymmetricModel = spec.parse()?;
    super::input::losses_csv(model.sample(n, cfg.seed)?.values())
}

