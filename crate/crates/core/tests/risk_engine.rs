mod common;

use std::sync::OnceLock;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tailrisk::allocation::uniform_stream;
use tailrisk::risk::*;
use tailrisk::{ExtendedReal, RiskError, SampleSet, SymmetricModel, UtilityFunction};

const Q95: f64 = 1.644_853_626_951_472_2;
const LEVELS: [f64; 4] = [0.8, 0.9, 0.95, 0.99];

fn u(s: &str) -> UtilityFunction {
    s.parse().unwrap()
}

fn model(s: &str) -> SymmetricModel {
    s.parse().unwrap()
}

fn std_normal_draws() -> &'static SampleSet {
    static S: OnceLock<SampleSet> = OnceLock::new();
    S.get_or_init(|| model("normal(0,1)").sample(1_000_000, 20_240_501).unwrap())
}

/// Direct tail quadrature of `(1/g) log(int_q^inf e^{g x} phi(x) dx / (1 - alpha))`.
fn entropic_oracle(q: f64, alpha: f64, gamma: f64) -> f64 {
    let m = tail(|x| (gamma * (x - q)).exp() * normal_pdf(x), q, 40.0);
    q + (m / (1.0 - alpha)).ln() / gamma
}

#[test]
fn order_statistic_convention() {
    let s = SampleSet::new((1..=100).map(f64::from).collect()).unwrap();
    assert_eq!(var_empirical(&s, 0.95).unwrap(), 95.0);
    let slice = tail_slice(&s, 0.95).unwrap();
    assert_eq!(slice.members, &[95.0, 96.0, 97.0, 98.0, 99.0, 100.0]);
    assert_eq!(cte_empirical(&s, 0.95).unwrap(), 97.5);

    let ties = SampleSet::new(vec![1.0, 1.0, 1.0, 2.0]).unwrap();
    let slice = tail_slice(&ties, 0.5).unwrap();
    assert_eq!(slice.threshold, 1.0);
    assert_eq!(slice.members.len(), 4);

    let d = std_normal_draws();
    let n = d.len();
    let k = (0.9 * n as f64).ceil() as usize;
    assert_eq!(tail_slice(d, 0.9).unwrap().members.len(), n - k + 1);

    let c = SampleSet::new(vec![-2.5; 17]).unwrap();
    for a in LEVELS {
        assert_eq!(var_empirical(&c, a).unwrap(), -2.5);
    }
    assert!(matches!(SampleSet::new(vec![]), Err(RiskError::Input(_))));
}

#[test]
fn monte_carlo_examples() {
    let d = std_normal_draws();
    assert!((var_empirical(d, 0.95).unwrap() - 1.645).abs() < 0.01);
    assert!((cte_empirical(d, 0.95).unwrap() - 2.0627).abs() < 0.01);
    let t = tqlm_empirical(d, 0.95, &u("exp:0.5")).unwrap().to_f64();
    assert!((t - 2.1006).abs() < 0.01, "{t}");
    let e = tcerm_empirical(d, 0.95, 0.5).unwrap();
    assert_close(e, t, 1e-12, "tcerm vs tqlm exp");
}

#[test]
fn linear_tqlm_is_cte() {
    let d = std_normal_draws();
    for a in LEVELS {
        assert_eq!(
            tqlm_empirical(d, a, &UtilityFunction::Linear).unwrap(),
            ExtendedReal::Finite(cte_empirical(d, a).unwrap())
        );
    }
}

#[test]
fn cap_at_var_attains_var() {
    let d = std_normal_draws();
    for a in LEVELS {
        let v = var_empirical(d, a).unwrap();
        let cap = UtilityFunction::capped(v).unwrap();
        assert_eq!(tqlm_empirical(d, a, &cap).unwrap(), ExtendedReal::Finite(v));
    }
}

#[test]
fn analytic_cte_matches_quadrature() {
    let n = model("normal(0,1)");
    let want = tail(|x| x * normal_pdf(x), Q95, 40.0) / 0.05;
    assert_close(cte_analytic(&n, 0.95).unwrap(), want, 1e-10, "normal cte");
    assert_close(cte_analytic(&n, 0.95).unwrap(), normal_pdf(Q95) / 0.05, 1e-12, "phi(q)/0.05");
    assert!((want - 2.0627).abs() < 1e-4);
    assert_close(
        tqlm_analytic(&n, 0.95, &UtilityFunction::Linear).unwrap().to_f64(),
        want,
        1e-10,
        "linear tqlm",
    );
    let shifted = model("normal(3,2)");
    assert_close(cte_analytic(&shifted, 0.95).unwrap(), 3.0 + 2.0 * want, 1e-10, "affine cte");

    let t5 = model("t(5,0,1)");
    let q = t5.quantile(0.99).unwrap();
    let want = tail_mapped(|x| x * t_pdf(5.0, x), q) / 0.01;
    assert_close(cte_analytic(&t5, 0.99).unwrap(), want, 1e-8, "t5 cte");
}

#[test]
fn analytic_tail_variance_matches_quadrature() {
    let n = model("normal(0,1)");
    let m1 = tail(|x| x * normal_pdf(x), Q95, 40.0) / 0.05;
    let m2 = tail(|x| x * x * normal_pdf(x), Q95, 40.0) / 0.05;
    assert_close(tail_variance_analytic(&n, 0.95).unwrap(), m2 - m1 * m1, 1e-9, "normal tv");
    let l = model("logistic(0,1)");
    let c = logistic_c();
    let q = l.quantile(0.9).unwrap();
    let m1 = c * tail(|x| x * logistic_kernel(x), q, 60.0) / 0.1;
    let m2 = c * tail(|x| x * x * logistic_kernel(x), q, 60.0) / 0.1;
    assert_close(tail_variance_analytic(&l, 0.9).unwrap(), m2 - m1 * m1, 1e-9, "logistic tv");
}

#[test]
fn entropic_closed_form_matches_quadrature() {
    let oracle = entropic_oracle(Q95, 0.95, 0.5);
    assert!((oracle - 2.1004).abs() < 5e-4, "oracle {oracle}");
    let n = model("normal(0,1)");
    assert_close(tcerm_normal(0.0, 1.0, 0.95, 0.5).unwrap(), oracle, 1e-8, "tcerm_normal");
    assert_close(tcerm_analytic(&n, 0.95, 0.5).unwrap(), oracle, 1e-8, "tcerm_analytic");
    assert_close(tqlm_analytic(&n, 0.95, &u("exp:0.5")).unwrap().to_f64(), oracle, 1e-8, "tqlm exp");
}

#[test]
fn entropic_grid_matches_quadrature() {
    let n = model("normal(0,1)");
    for a in [0.5, 0.8, 0.9, 0.95, 0.99] {
        let q = n.quantile(a).unwrap();
        for g in [-0.5, 0.1, 0.5, 1.0, 2.0] {
            let oracle = entropic_oracle(q, a, g);
            let closed = tcerm_normal(0.0, 1.0, a, g).unwrap();
            assert_close(closed, oracle, 1e-8, &format!("alpha {a} gamma {g}"));
            assert_close(tcerm_analytic(&n, a, g).unwrap(), closed, 1e-10, "analytic vs normal form");
        }
    }
}

#[test]
fn logistic_entropic_matches_quadrature() {
    let l = model("logistic(1,2)");
    let c = logistic_c();
    for (a, g) in [(0.9, 0.2), (0.95, 0.4), (0.99, -0.3)] {
        let q = l.standard().quantile(a).unwrap();
        let s = 2.0 * g;
        let m = c * tail(|z| (s * (z - q)).exp() * logistic_kernel(z), q, 80.0) / (1.0 - a);
        let want = 1.0 + 2.0 * q + m.ln() / g;
        assert_close(tcerm_analytic(&l, a, g).unwrap(), want, 1e-8, "logistic tcerm");
        assert_close(tqlm_analytic(&l, a, &UtilityFunction::exponential(g).unwrap()).unwrap().to_f64(), want, 1e-8, "logistic tqlm");
    }
}

#[test]
fn entropic_location_scale() {
    for spec in ["normal", "logistic"] {
        let std = model(&format!("{spec}(0,1)"));
        let m = model(&format!("{spec}(-1.5,2.5)"));
        for g in [0.2, -0.4, 1.1] {
            let want = -1.5 + 2.5 * tcerm_analytic(&std, 0.9, 2.5 * g).unwrap();
            assert_close(tcerm_analytic(&m, 0.9, g).unwrap(), want, 1e-10, spec);
        }
    }
}

#[test]
fn limits() {
    for m in [model("normal(1,2)"), model("logistic(0,1)")] {
        let cte = cte_analytic(&m, 0.95).unwrap();
        assert!((tcerm_analytic(&m, 0.95, 1e-6).unwrap() - cte).abs() < 1e-4);
    }
    assert!((tcerm_normal(2.0, 0.5, 0.9, 1e-6).unwrap() - cte_analytic(&model("normal(2,0.5)"), 0.9).unwrap()).abs() < 1e-4);
    // classical entropic measure by quadrature over the whole line
    let classical = (tail(|x| (0.5 * x).exp() * normal_pdf(x), -40.0, 80.0)).ln() / 0.5;
    assert_close(classical, 0.25, 1e-10, "classical oracle");
    assert!((tcerm_analytic(&model("normal(0,1)"), 1e-6, 0.5).unwrap() - classical).abs() < 1e-4);
    let n = model("normal(4,3)");
    let z = model("normal(0,1)");
    for a in [0.1, 0.5, 0.95] {
        assert_close(var_analytic(&n, a).unwrap(), 4.0 + 3.0 * z.quantile(a).unwrap(), 1e-10, "var");
    }
}

#[test]
fn negative_gamma_is_below_cte() {
    let v = tcerm_normal(0.0, 1.0, 0.95, -0.5).unwrap();
    let oracle = entropic_oracle(Q95, 0.95, -0.5);
    assert_close(v, oracle, 1e-8, "negative gamma");
    assert!(v <= cte_analytic(&model("normal(0,1)"), 0.95).unwrap());
}

#[test]
fn taylor_error_is_second_order() {
    let n = model("normal(0,1)");
    let cte = cte_analytic(&n, 0.95).unwrap();
    let tv = tail_variance_analytic(&n, 0.95).unwrap();
    let err = |g: f64| {
        let t = taylor_tqlm(cte, tv, &UtilityFunction::exponential(g).unwrap(), cte).unwrap();
        assert_close(t, cte + 0.5 * g * tv, 1e-14, "entropic taylor form");
        (tcerm_analytic(&n, 0.95, g).unwrap() - t).abs()
    };
    let e: Vec<f64> = [0.4, 0.2, 0.1, 0.05].iter().map(|&g| err(g)).collect();
    for w in e.windows(2) {
        let r = w[0] / w[1];
        assert!((r / 4.0 - 1.0).abs() <= 0.25, "ratio {r}");
    }
    assert_eq!(taylor_tqlm(2.0627, 0.3, &UtilityFunction::Linear, 2.0627).unwrap(), 2.0627);
    assert_eq!(taylor_tqlm(1.5, 0.0, &u("log"), 1.5).unwrap(), 1.5);
}

#[test]
fn dual_examples() {
    let point = DiscreteDistribution::new(vec![(3.25, 1.0)]).unwrap();
    let d = dual_entropic(&point, 0.8).unwrap();
    assert_eq!(d.value, 3.25);
    assert_eq!(d.measure, point);

    let two = DiscreteDistribution::uniform(&[0.0, 1.0]).unwrap();
    let d = dual_entropic(&two, 1.0).unwrap();
    let e = std::f64::consts::E;
    assert_close(d.value, ((1.0 + e) / 2.0).ln(), 1e-15, "two-atom value");
    assert_close(d.measure.atoms()[1].1, e / (1.0 + e), 1e-15, "Q*(1)");
    assert!(matches!(dual_entropic(&two, -1.0), Err(RiskError::Parameter(_))));
}

#[test]
fn dual_optimum_beats_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<f64> = (0..50).map(|_| rng.random_range(-2.0..4.0)).collect();
    let raw: Vec<f64> = (0..50).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let drift = 1.0 - probs.iter().sum::<f64>();
    probs[0] += drift;
    let p = DiscreteDistribution::new(points.iter().copied().zip(probs.iter().copied()).collect()).unwrap();
    let gamma = 0.7;
    let sol = dual_entropic(&p, gamma).unwrap();
    // log-sum-exp oracle written out directly
    let lse = points.iter().zip(&probs).map(|(z, q)| q * (gamma * z).exp()).sum::<f64>().ln() / gamma;
    assert_close(sol.value, lse, 1e-12, "value");
    assert_close(sol.objective, lse, 1e-12, "objective at Q*");
    for _ in 0..200 {
        let w: Vec<f64> = sol.measure.atoms().iter().map(|a| a.1 * (0.5 * rng.random_range(-1.0..1.0f64)).exp()).collect();
        let s: f64 = w.iter().sum();
        let mut w: Vec<f64> = w.iter().map(|x| x / s).collect();
        let drift = 1.0 - w.iter().sum::<f64>();
        w[0] += drift;
        let q = DiscreteDistribution::new(points.iter().copied().zip(w).collect()).unwrap();
        assert!(q.entropic_objective(&p, gamma).unwrap() <= sol.objective + 1e-12);
    }
}

#[test]
fn sandwich_analytic() {
    let models = [model("normal(0,1)"), model("t(5,0,1)"), model("logistic(0,1)")];
    for m in &models {
        let shifted = model(&m.to_string().replacen("0,1", "5,1", 1));
        for a in LEVELS {
            let var = var_analytic(m, a).unwrap();
            let cte = cte_analytic(m, a).unwrap();
            let concave = [u("exp:-0.5"), UtilityFunction::capped(var).unwrap()];
            for c in &concave {
                let t = tqlm_analytic(m, a, c).unwrap().to_f64();
                assert!(var - 1e-9 <= t && t <= cte + 1e-9, "{m} {a} {c}: {var} {t} {cte}");
            }
            let (sv, sc) = (var + 5.0, cte + 5.0);
            for c in [u("log"), u("pow:0.5")] {
                let t = tqlm_analytic(&shifted, a, &c).unwrap().to_f64();
                assert!(sv - 1e-9 <= t && t <= sc + 1e-9, "{shifted} {a} {c}: {sv} {t} {sc}");
            }
            let t = tqlm_analytic(&shifted, a, &u("pow:2")).unwrap().to_f64();
            assert!(t >= sc - 1e-9);
            match tqlm_analytic(m, a, &u("exp:0.5")) {
                Ok(t) => assert!(t.to_f64() >= cte - 1e-9),
                Err(RiskError::MgfNonexistent(_)) => assert!(m.to_string().starts_with('t')),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn sandwich_empirical() {
    let d = std_normal_draws();
    let shifted = d.map(|x| x + 5.0).unwrap();
    for a in LEVELS {
        let var = var_empirical(d, a).unwrap();
        let cte = cte_empirical(d, a).unwrap();
        for c in [u("exp:-0.5"), u("exp:-3")] {
            let t = tqlm_empirical(d, a, &c).unwrap().to_f64();
            assert!(var <= t && t <= cte, "{a} {c}");
        }
        for c in [u("log"), u("pow:0.5"), u("pow:-1")] {
            let t = tqlm_empirical(&shifted, a, &c).unwrap().to_f64();
            assert!(var + 5.0 - 1e-12 <= t && t <= cte + 5.0 + 1e-12, "{a} {c}");
        }
        assert!(tqlm_empirical(d, a, &u("exp:0.5")).unwrap().to_f64() >= cte);
        assert!(tqlm_empirical(&shifted, a, &u("pow:2")).unwrap().to_f64() >= cte + 5.0 - 1e-12);
    }
}

#[test]
fn quasi_linear_mean_is_a_lower_bound() {
    for m in [model("normal(0,1)"), model("logistic(2,1)")] {
        for g in [-1.0, 0.3, 1.0] {
            let uu = UtilityFunction::exponential(g).unwrap();
            let qlm = quasi_linear_mean_analytic(&m, &uu).unwrap().to_f64();
            for a in [0.01, 0.5, 0.9] {
                assert!(tqlm_analytic(&m, a, &uu).unwrap().to_f64() >= qlm - 1e-12);
            }
        }
    }
    let d = std_normal_draws();
    for c in [u("exp:0.5"), u("exp:-0.5"), u("cap:1"), UtilityFunction::Linear] {
        let qlm = quasi_linear_mean_empirical(d, &c).unwrap().to_f64();
        for a in [0.2, 0.9] {
            assert!(tqlm_empirical(d, a, &c).unwrap().to_f64() >= qlm);
        }
    }
}

#[test]
fn entropic_is_nondecreasing_in_level() {
    for m in [model("normal(0,1)"), model("logistic(0,2)")] {
        for g in [-1.0, 0.5, 2.0] {
            let mut prev = f64::NEG_INFINITY;
            for k in 1..100 {
                let v = tcerm_analytic(&m, k as f64 / 100.0, g).unwrap();
                assert!(v >= prev - 1e-12, "{m} gamma {g} level {k}");
                prev = v;
            }
        }
    }
}

/// `(model, level, shift)` for which `pow:2` fails translation invariance.
const POW2_TRANSLATION_WITNESS: (&str, f64, f64) = ("normal(5,1)", 0.95, 2.0);
/// `(model, level, factor, gamma)` for which the entropic kind fails positive homogeneity.
const EXP_HOMOGENEITY_WITNESS: (&str, f64, f64, f64) = ("normal(5,1)", 0.95, 2.0, 0.5);

fn shifted(m: &SymmetricModel, by: f64) -> SymmetricModel {
    SymmetricModel::new(m.generator, m.mu + by, m.sigma).unwrap()
}

fn scaled(m: &SymmetricModel, by: f64) -> SymmetricModel {
    SymmetricModel::new(m.generator, m.mu * by, m.sigma * by).unwrap()
}

#[test]
fn translation_invariance_only_for_exp_and_linear() {
    for m in [model("normal(0,1)"), model("logistic(1,2)")] {
        for c in [UtilityFunction::Linear, u("exp:0.7"), u("exp:-0.4")] {
            for shift in [-3.0, 0.5, 10.0] {
                let a = tqlm_analytic(&shifted(&m, shift), 0.9, &c).unwrap().to_f64();
                let b = tqlm_analytic(&m, 0.9, &c).unwrap().to_f64() + shift;
                assert_close(a, b, 1e-9, &format!("{m} {c} {shift}"));
            }
        }
    }
    let (spec, a, shift) = POW2_TRANSLATION_WITNESS;
    let m = model(spec);
    let gap = |s: f64| {
        let p = u("pow:2");
        (tqlm_analytic(&shifted(&m, s), a, &p).unwrap().to_f64() - tqlm_analytic(&m, a, &p).unwrap().to_f64() - s).abs()
    };
    assert!(gap(shift) > 1e-3, "stored witness gap {}", gap(shift));
    let best = [0.5, 1.0, 2.0].into_iter().map(gap).fold(0.0, f64::max);
    assert_eq!(best, gap(shift));
}

#[test]
fn homogeneity_only_for_power_log_linear() {
    let m = model("normal(5,1)");
    for c in [UtilityFunction::Linear, u("log"), u("pow:0.5"), u("pow:2"), u("pow:-1")] {
        for lambda in [0.5, 2.0, 3.0] {
            let a = tqlm_analytic(&scaled(&m, lambda), 0.9, &c).unwrap().to_f64();
            let b = lambda * tqlm_analytic(&m, 0.9, &c).unwrap().to_f64();
            assert_close(a, b, 1e-9 * b.abs(), &format!("{c} {lambda}"));
        }
    }
    let (spec, a, lambda, g) = EXP_HOMOGENEITY_WITNESS;
    let m = model(spec);
    let gap = |l: f64| (tcerm_analytic(&scaled(&m, l), a, g).unwrap() - l * tcerm_analytic(&m, a, g).unwrap()).abs();
    assert!(gap(lambda) > 1e-3, "stored witness gap {}", gap(lambda));
    assert!(gap(0.5) > 1e-3);
}

fn comonotone_pair(n: usize, seed: u64) -> (SampleSet, SampleSet) {
    let v = uniform_stream(n, seed);
    let z = model("normal(0,1)");
    let l = model("logistic(0,1)");
    let x: Vec<f64> = v.iter().map(|&p| z.quantile(p).unwrap()).collect();
    let y: Vec<f64> = v.iter().map(|&p| 0.5 + 2.0 * l.quantile(p).unwrap()).collect();
    (SampleSet::new(x).unwrap(), SampleSet::new(y).unwrap())
}

#[test]
fn comonotone_midpoint_convexity() {
    let (x, y) = comonotone_pair(200_000, 11);
    let mid = SampleSet::new(x.values().iter().zip(y.values()).map(|(a, b)| 0.5 * a + 0.5 * b).collect()).unwrap();
    for a in [0.8, 0.95] {
        for g in [0.25, 1.0, 3.0] {
            let rm = tcerm_estimate(&mid, a, g).unwrap();
            let rx = tcerm_estimate(&x, a, g).unwrap();
            let ry = tcerm_estimate(&y, a, g).unwrap();
            let se = rm.standard_error.unwrap() + 0.5 * (rx.standard_error.unwrap() + ry.standard_error.unwrap());
            assert!(rm.value <= 0.5 * rx.value + 0.5 * ry.value + 3.0 * se, "{a} {g}");
        }
    }
}

/// Countermonotone pair on ten scenarios `V = (k - 1/2)/10`: `X = 10 * 1{V > 0.9}`,
/// `Y = 10 * 1{1 - V > 0.9}`.
fn countermonotone_witness() -> (SampleSet, SampleSet) {
    let v: Vec<f64> = (1..=10).map(|k| (k as f64 - 0.5) / 10.0).collect();
    let x: Vec<f64> = v.iter().map(|&p| if p > 0.9 { 10.0 } else { 0.0 }).collect();
    let y: Vec<f64> = v.iter().map(|&p| if 1.0 - p > 0.9 { 10.0 } else { 0.0 }).collect();
    (SampleSet::new(x).unwrap(), SampleSet::new(y).unwrap())
}

#[test]
fn countermonotone_pair_breaks_subadditivity() {
    let (x, y) = countermonotone_witness();
    let s = SampleSet::new(x.values().iter().zip(y.values()).map(|(a, b)| a + b).collect()).unwrap();
    let (a, g) = (0.9, 0.1);
    let rs = tcerm_empirical(&s, a, g).unwrap();
    let rx = tcerm_empirical(&x, a, g).unwrap();
    let ry = tcerm_empirical(&y, a, g).unwrap();
    assert_eq!(rs, 10.0);
    assert_close(rx, 10.0 * (0.9 + 0.1 * 1f64.exp()).ln(), 1e-12, "rho(X)");
    assert!(rs > rx + ry + 1.0, "{rs} vs {rx} + {ry}");
    let mid = s.map(|v| 0.5 * v).unwrap();
    assert!(tcerm_empirical(&mid, a, g).unwrap() > 0.5 * rx + 0.5 * ry + 1.0);
    // CTE is not fooled in the same way on this pair
    assert!(cte_empirical(&s, a).unwrap() > cte_empirical(&x, a).unwrap() + cte_empirical(&y, a).unwrap());
}

#[test]
fn law_invariance() {
    let m = model("logistic(0,1)");
    let a = m.sample(1_000_000, 1).unwrap();
    let b = m.sample(1_000_000, 2).unwrap();
    let pairs = [
        (cte_estimate(&a, 0.95).unwrap(), cte_estimate(&b, 0.95).unwrap()),
        (var_estimate(&a, 0.95).unwrap(), var_estimate(&b, 0.95).unwrap()),
        (tail_variance_estimate(&a, 0.95).unwrap(), tail_variance_estimate(&b, 0.95).unwrap()),
        (tcerm_estimate(&a, 0.95, 0.5).unwrap(), tcerm_estimate(&b, 0.95, 0.5).unwrap()),
    ];
    for (x, y) in pairs {
        let se = x.standard_error.unwrap().hypot(y.standard_error.unwrap());
        assert!((x.value - y.value).abs() <= 3.0 * se, "{x:?} {y:?}");
    }
}

#[test]
fn constancy() {
    for c in [-4.25, 0.0, 1.5, 1e6] {
        let s = SampleSet::new(vec![c; 33]).unwrap();
        for a in LEVELS {
            assert_eq!(var_empirical(&s, a).unwrap(), c);
            assert_eq!(cte_empirical(&s, a).unwrap(), c);
            assert_eq!(tail_variance_empirical(&s, a).unwrap(), 0.0);
            assert_eq!(tcerm_empirical(&s, a, 0.5).unwrap(), c);
            assert_eq!(tcerm_empirical(&s, a, -2.0).unwrap(), c);
            let mut kinds = vec![UtilityFunction::Linear, u("exp:3"), u("cap:100")];
            if c > 0.0 {
                kinds.extend([u("log"), u("pow:0.5"), u("pow:3")]);
            }
            for k in kinds {
                let want = if let UtilityFunction::Capped { cap } = k { c.min(cap) } else { c };
                assert_eq!(tqlm_empirical(&s, a, &k).unwrap(), ExtendedReal::Finite(want), "{k}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn usual_stochastic_order(
        seed in 0u64..1000,
        shift in 0.0..2.0f64,
        slope in 0.0..1.5f64,
        a in 0.5..0.99f64,
        g in prop_oneof![Just(-1.0f64), Just(0.5), Just(2.0)],
    ) {
        let v = uniform_stream(400, seed);
        let z = SymmetricModel::normal(0.0, 1.0).unwrap();
        let x: Vec<f64> = v.iter().map(|&p| z.quantile(p).unwrap()).collect();
        // quantile function of Y dominates that of X pointwise
        let y: Vec<f64> = v.iter().zip(&x).map(|(&p, &q)| q + shift + slope * p).collect();
        let (x, y) = (SampleSet::new(x).unwrap(), SampleSet::new(y).unwrap());
        let c = UtilityFunction::exponential(g).unwrap();
        prop_assert!(tqlm_empirical(&x, a, &c).unwrap().to_f64() <= tqlm_empirical(&y, a, &c).unwrap().to_f64());
        prop_assert!(cte_empirical(&x, a).unwrap() <= cte_empirical(&y, a).unwrap());
        prop_assert!(var_empirical(&x, a).unwrap() <= var_empirical(&y, a).unwrap());
    }

    #[test]
    fn empirical_sandwich_on_random_samples(
        xs in prop::collection::vec(0.01..50.0f64, 1..200),
        a in 0.01..0.99f64,
        g in 0.05..3.0f64,
    ) {
        let s = SampleSet::new(xs).unwrap();
        let var = var_empirical(&s, a).unwrap();
        let cte = cte_empirical(&s, a).unwrap();
        for c in [UtilityFunction::exponential(-g).unwrap(), UtilityFunction::Logarithmic, UtilityFunction::power(0.5).unwrap()] {
            let t = tqlm_empirical(&s, a, &c).unwrap().to_f64();
            prop_assert!(var <= t && t <= cte, "{} {} {} {}", c, var, t, cte);
        }
        prop_assert!(tqlm_empirical(&s, a, &UtilityFunction::exponential(g).unwrap()).unwrap().to_f64() >= cte);
        prop_assert!(tail_variance_empirical(&s, a).unwrap() >= 0.0);
    }
}
