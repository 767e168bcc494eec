//! One-dimensional symmetric location–scale family `S1(mu, sigma^2, g)`.
//!
//! A member has density `f(x) = g(((x - mu) / sigma)^2 / 2) / sigma` where `g`
//! is the density generator. Everything is computed on the standard member
//! `Z ~ S1(0, 1, g)` and mapped back through the affine identities.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::beta::beta_reg;

use crate::error::{check_level, Result, RiskError};
use crate::numeric::special::{norm_cdf, norm_pdf, norm_quantile, norm_sf, INV_SQRT_2PI};
use crate::numeric::{brent, integrate, integrate_real_line, integrate_upper, QuadratureOptions};
use crate::sample::SampleSet;

/// Density generator of a symmetric family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `g(u) = e^{-u} / sqrt(2 pi)`
    Normal,
    /// `g(u) = C_m (1 + 2u/m)^{-(m+1)/2}`
    StudentT { dof: f64 },
    /// `g(u) = c e^{-u} / (1 + e^{-u})^2`
    Logistic,
}

pub(crate) fn quad_opts() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

/// Normalizing constant of the logistic generator, fixed so that
/// `int g(z^2/2) dz = 1`.
pub fn logistic_constant() -> f64 {
    static CONSTANT: OnceLock<f64> = OnceLock::new();
    *CONSTANT.get_or_init(|| {
        let mass = integrate_real_line(
            |z| {
                let w = (-0.5 * z * z).exp();
                w / ((1.0 + w) * (1.0 + w))
            },
            0.0,
            QuadratureOptions {
                abs_tol: 0.0,
                rel_tol: 1e-14,
                max_intervals: 4000,
            },
        )
        .expect("logistic generator mass is finite");
        1.0 / mass.value
    })
}

fn student_log_constant(dof: f64) -> f64 {
    libm::lgamma(0.5 * (dof + 1.0)) - libm::lgamma(0.5 * dof) - 0.5 * (dof * std::f64::consts::PI).ln()
}

impl Generator {
    pub fn student_t(dof: f64) -> Result<Self> {
        if dof.is_finite() && dof > 0.0 {
            Ok(Generator::StudentT { dof })
        } else {
            Err(RiskError::Parameter(format!(
                "degrees of freedom must be positive, got {dof}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Normal => "normal",
            Generator::StudentT { .. } => "t",
            Generator::Logistic => "logistic",
        }
    }

    /// The density generator `g(u)`, `u >= 0`.
    pub fn g(&self, u: f64) -> f64 {
        match *self {
            Generator::Normal => INV_SQRT_2PI * (-u).exp(),
            Generator::StudentT { dof } => {
                (student_log_constant(dof) - 0.5 * (dof + 1.0) * (2.0 * u / dof).ln_1p()).exp()
            }
            Generator::Logistic => {
                let w = (-u).exp();
                logistic_constant() * w / ((1.0 + w) * (1.0 + w))
            }
        }
    }

    /// Density of the standard member at `z`.
    pub fn std_density(&self, z: f64) -> f64 {
        match self {
            Generator::Normal => norm_pdf(z),
            _ => self.g(0.5 * z * z),
        }
    }

    /// Log density of the standard member; finite far into the tails.
    pub fn std_log_density(&self, z: f64) -> f64 {
        let u = 0.5 * z * z;
        match *self {
            Generator::Normal => INV_SQRT_2PI.ln() - u,
            Generator::StudentT { dof } => {
                student_log_constant(dof) - 0.5 * (dof + 1.0) * (2.0 * u / dof).ln_1p()
            }
            Generator::Logistic => {
                let w = (-u).exp();
                logistic_constant().ln() - u - 2.0 * w.ln_1p()
            }
        }
    }

    /// Whether the moment generating function of `Z` is finite at `t`.
    pub fn mgf_exists(&self, t: f64) -> bool {
        match self {
            Generator::StudentT { .. } => t == 0.0,
            // the logistic member of this family has Gaussian-type tails
            Generator::Normal | Generator::Logistic => t.is_finite(),
        }
    }

    pub fn require_mgf(&self) -> Result<()> {
        match self {
            Generator::StudentT { .. } => Err(RiskError::MgfNonexistent(
                "Student-t has no moment generating function".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Upper tail `P(Z > z)`.
    pub fn std_sf(&self, z: f64) -> f64 {
        match *self {
            Generator::Normal => norm_sf(z),
            Generator::StudentT { dof } => {
                let x = dof / (dof + z * z);
                let half_tail = 0.5 * beta_reg(0.5 * dof, 0.5, x);
                if z >= 0.0 {
                    half_tail
                } else {
                    1.0 - half_tail
                }
            }
            Generator::Logistic => {
                if z >= 0.0 {
                    logistic_upper_mass(z)
                } else {
                    1.0 - logistic_upper_mass(-z)
                }
            }
        }
    }

    pub fn std_cdf(&self, z: f64) -> f64 {
        match self {
            Generator::Normal => norm_cdf(z),
            _ => self.std_sf(-z),
        }
    }

    /// `VaR_p(Z)`.
    pub fn std_quantile(&self, p: f64) -> Result<f64> {
        check_level(p)?;
        match self {
            Generator::Normal => Ok(norm_quantile(p)),
            _ => {
                if p == 0.5 {
                    return Ok(0.0);
                }
                // solve on the upper half and reflect
                let upper = p.max(1.0 - p);
                let target = 1.0 - upper;
                let mut hi = 1.0;
                while self.std_sf(hi) > target {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(RiskError::Convergence(format!(
                            "quantile bracket for level {p} escaped"
                        )));
                    }
                }
                let z = brent(
                    |z| {
                        let s = self.std_sf(z);
                        // compare logs for deep tails so the root stays well scaled
                        if target < 1e-3 {
                            s.ln() - target.ln()
                        } else {
                            s - target
                        }
                    },
                    0.0,
                    hi,
                    1e-14,
                    300,
                )?;
                Ok(if p >= 0.5 { z } else { -z })
            }
        }
    }

    /// `Gbar(t) = int_t^inf g(v) dv`.
    pub fn cumulative_generator(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(RiskError::Parameter(format!(
                "cumulative generator needs t >= 0, got {t}"
            )));
        }
        match *self {
            Generator::Normal => Ok(INV_SQRT_2PI * (-t).exp()),
            Generator::Logistic => {
                let w = (-t).exp();
                Ok(logistic_constant() * w / (1.0 + w))
            }
            Generator::StudentT { dof } => {
                if dof <= 1.0 {
                    return Err(RiskError::UnsupportedGenerator(format!(
                        "Student-t with {dof} degrees of freedom has an infinite cumulative generator"
                    )));
                }
                let log_c = student_log_constant(dof);
                Ok((log_c + (dof / (dof - 1.0)).ln()
                    - 0.5 * (dof - 1.0) * (2.0 * t / dof).ln_1p())
                .exp())
            }
        }
    }

    /// `sigma_Z^2 = 2 int_0^inf t^2 g(t^2/2) dt`, infinite when the variance does not exist.
    pub fn variance_factor(&self) -> f64 {
        static LOGISTIC: OnceLock<f64> = OnceLock::new();
        match *self {
            Generator::Normal => 1.0,
            Generator::StudentT { dof } => {
                if dof > 2.0 {
                    dof / (dof - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            Generator::Logistic => *LOGISTIC.get_or_init(|| {
                2.0 * integrate_upper(|t| t * t * Generator::Logistic.g(0.5 * t * t), 0.0, quad_opts())
                    .expect("logistic second moment is finite")
                    .value
            }),
        }
    }

    /// `kappa(t) = log psi(-t^2/2) = log E[e^{tZ}]`.
    pub fn cumulant(&self, t: f64) -> Result<f64> {
        self.require_mgf()?;
        match self {
            Generator::Normal => Ok(0.5 * t * t),
            _ => {
                if t == 0.0 {
                    return Ok(0.0);
                }
                // E e^{tZ} = E cosh(tZ) by symmetry; integrate e^{t z - t^2/2} g
                // so the integrand stays O(1) near its mode.
                let shift = 0.5 * t * t;
                let r = integrate_real_line(
                    |z| (t * z - shift + self.std_log_density(z)).exp(),
                    t,
                    quad_opts(),
                )?;
                Ok(shift + r.value.ln())
            }
        }
    }

    /// Exponentially tilted law `Y` with density `e^{tilt y} g(y^2/2) / psi(-tilt^2/2)`.
    pub fn tilted(&self, tilt: f64) -> Result<TiltedTail> {
        self.require_mgf()?;
        let log_normalizer = self.cumulant(tilt)?;
        Ok(TiltedTail {
            generator: *self,
            tilt,
            log_normalizer,
        })
    }

    /// `E[Z^k 1{Z >= z}]` for `k` in {0, 1, 2}.
    pub fn std_partial_moment(&self, k: u32, z: f64) -> Result<f64> {
        match (k, self) {
            (0, _) => Ok(self.std_sf(z)),
            (1, _) => self.cumulative_generator(0.5 * z * z),
            (2, Generator::Normal) => Ok(z * norm_pdf(z) + norm_sf(z)),
            (2, Generator::StudentT { dof }) if *dof <= 2.0 => Err(RiskError::Range(format!(
                "Student-t with {dof} degrees of freedom has no second moment"
            ))),
            (2, _) => Ok(tail_integral(|x| x * x * self.std_density(x), z)?),
            _ => Err(RiskError::Parameter(format!("partial moment of order {k} unsupported"))),
        }
    }
}

/// `int_z^inf f` with a split at zero so a negative lower limit keeps the
/// mapped integrand well scaled.
pub(crate) fn tail_integral<F: Fn(f64) -> f64>(f: F, z: f64) -> Result<f64> {
    if z >= 0.0 {
        Ok(integrate_upper(&f, z, quad_opts())?.value)
    } else {
        let left = integrate(&f, z, 0.0, quad_opts())?.value;
        Ok(left + integrate_upper(&f, 0.0, quad_opts())?.value)
    }
}

fn logistic_upper_mass(z: f64) -> f64 {
    // z >= 0
    let g = |x: f64| Generator::Logistic.g(0.5 * x * x);
    if z < 1.0 {
        let inner = integrate(g, 0.0, z, quad_opts()).map(|r| r.value).unwrap_or(f64::NAN);
        0.5 - inner
    } else {
        integrate_upper(g, z, quad_opts()).map(|r| r.value).unwrap_or(f64::NAN)
    }
}

/// Exponential tilt of the standard member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedTail {
    pub generator: Generator,
    pub tilt: f64,
    /// `kappa(tilt) = log psi(-tilt^2 / 2)`
    pub log_normalizer: f64,
}

impl TiltedTail {
    pub fn density(&self, y: f64) -> f64 {
        match self.generator {
            Generator::Normal => norm_pdf(y - self.tilt),
            _ => (self.tilt * y - self.log_normalizer + self.generator.std_log_density(y)).exp(),
        }
    }

    /// `P(Y > z)`.
    pub fn survival(&self, z: f64) -> Result<f64> {
        match self.generator {
            Generator::Normal => Ok(norm_sf(z - self.tilt)),
            _ => {
                if z > self.tilt {
                    tail_integral(|y| self.density(y), z)
                } else {
                    let below = integrate(|y| self.density(y), z, self.tilt, quad_opts())?.value;
                    Ok(tail_integral(|y| self.density(y), self.tilt)? + below)
                }
            }
        }
    }
}

/// `F_Ybar(z)` for the tilt `tilt` of the standard member of `generator`.
pub fn tilted_tail_survival(tilt: f64, z: f64, generator: Generator) -> Result<f64> {
    generator.tilted(tilt)?.survival(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricModel {
    pub generator: Generator,
    pub mu: f64,
    pub sigma: f64,
}

impl SymmetricModel {
    pub fn new(generator: Generator, mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(RiskError::Parameter(format!("location must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(RiskError::Parameter(format!("scale must be positive, got {sigma}")));
        }
        if let Generator::StudentT { dof } = generator {
            Generator::student_t(dof)?;
        }
        Ok(Self {
            generator,
            mu,
            sigma,
        })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Generator::Normal, mu, sigma)
    }

    pub fn student_t(dof: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Generator::student_t(dof)?, mu, sigma)
    }

    pub fn logistic(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Generator::Logistic, mu, sigma)
    }

    pub fn standard(&self) -> Self {
        Self {
            generator: self.generator,
            mu: 0.0,
            sigma: 1.0,
        }
    }

    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }

    pub fn density(&self, x: f64) -> f64 {
        self.generator.std_density(self.standardize(x)) / self.sigma
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.generator.std_cdf(self.standardize(x))
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.generator.std_sf(self.standardize(x))
    }

    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        Ok(self.mu + self.sigma * self.generator.std_quantile(alpha)?)
    }

    pub fn cumulative_generator(&self, t: f64) -> Result<f64> {
        self.generator.cumulative_generator(t)
    }

    pub fn cumulant(&self, t: f64) -> Result<f64> {
        self.generator.cumulant(t)
    }

    /// Variance of the standard member; `Var(X) = sigma_z_sq * sigma^2`.
    pub fn sigma_z_sq(&self) -> f64 {
        self.generator.variance_factor()
    }

    pub fn variance(&self) -> f64 {
        self.sigma_z_sq() * self.sigma * self.sigma
    }

    /// `n` independent draws, reproducible for a fixed seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(RiskError::Input("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(n);
        match self.generator {
            Generator::Normal => {
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    values.push(self.mu + self.sigma * z);
                }
            }
            Generator::StudentT { dof } => {
                let chi = ChiSquared::new(dof)
                    .map_err(|e| RiskError::Parameter(format!("chi-squared: {e}")))?;
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    let w: f64 = chi.sample(&mut rng);
                    values.push(self.mu + self.sigma * z / (w / dof).sqrt());
                }
            }
            Generator::Logistic => {
                // rejection from the normal envelope: target / proposal is (1 + e^{-z^2/2})^{-2} <= 1
                while values.len() < n {
                    let z: f64 = rng.sample(StandardNormal);
                    let w = (-0.5 * z * z).exp();
                    let accept = 1.0 / ((1.0 + w) * (1.0 + w));
                    if rng.random::<f64>() < accept {
                        values.push(self.mu + self.sigma * z);
                    }
                }
            }
        }
        SampleSet::new(values)
    }
}

impl fmt::Display for SymmetricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.generator {
            Generator::Normal => write!(f, "normal({},{})", self.mu, self.sigma),
            Generator::StudentT { dof } => write!(f, "t({},{},{})", dof, self.mu, self.sigma),
            Generator::Logistic => write!(f, "logistic({},{})", self.mu, self.sigma),
        }
    }
}

fn parse_args(s: &str, name: &str) -> Option<Vec<f64>> {
    let inner = s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    inner
        .split(',')
        .map(|a| {
            let a = a.trim();
            if a.is_empty() || a.contains(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
                return None;
            }
            a.parse::<f64>().ok().filter(|v| v.is_finite())
        })
        .collect()
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::StudentT { dof } => write!(f, "t({dof})"),
            g => f.write_str(g.name()),
        }
    }
}

impl FromStr for Generator {
    type Err = RiskError;

    /// Grammar: `normal`, `logistic`, `t(m)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "normal" => Ok(Generator::Normal),
            "logistic" => Ok(Generator::Logistic),
            _ => match parse_args(s, "t").as_deref() {
                Some([m]) => Generator::student_t(*m).map_err(|e| RiskError::Parse(format!("{s}: {e}"))),
                _ => Err(RiskError::Parse(format!("invalid generator '{s}'"))),
            },
        }
    }
}

impl FromStr for SymmetricModel {
    type Err = RiskError;

    /// Grammar: `normal(mu,sigma)`, `t(m,mu,sigma)`, `logistic(mu,sigma)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || RiskError::Parse(format!("invalid model specification '{s}'"));
        let built = if s.starts_with("normal") {
            match parse_args(s, "normal").ok_or_else(bad)?.as_slice() {
                [mu, sigma] => SymmetricModel::normal(*mu, *sigma),
                _ => return Err(bad()),
            }
        } else if s.starts_with("logistic") {
            match parse_args(s, "logistic").ok_or_else(bad)?.as_slice() {
                [mu, sigma] => SymmetricModel::logistic(*mu, *sigma),
                _ => return Err(bad()),
            }
        } else if s.starts_with('t') {
            match parse_args(s, "t").ok_or_else(bad)?.as_slice() {
                [m, mu, sigma] => SymmetricModel::student_t(*m, *mu, *sigma),
                _ => return Err(bad()),
            }
        } else {
            return Err(bad());
        };
        built.map_err(|e| RiskError::Parse(format!("{s}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal() -> SymmetricModel {
        SymmetricModel::normal(0.0, 1.0).unwrap()
    }

    #[test]
    fn normal_density_examples() {
        assert!((std_normal().density(0.0) - 0.398_942_280_4).abs() < 1e-10);
        let m = SymmetricModel::normal(2.0, 3.0).unwrap();
        assert!((m.density(2.0) - 0.132_980_760_1).abs() < 1e-10);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(std_normal().quantile(0.5).unwrap(), 0.0);
        assert_eq!(SymmetricModel::normal(1.0, 2.0).unwrap().quantile(0.5).unwrap(), 1.0);
        let q = std_normal().quantile(0.95).unwrap();
        assert!((q - 1.644_853_6).abs() < 1e-7);
        assert!((norm_cdf(1.644_853_6) - 0.95).abs() < 1e-8);
    }

    #[test]
    fn quantile_rejects_bad_levels() {
        for a in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(std_normal().quantile(a), Err(RiskError::Parameter(_))));
        }
    }

    #[test]
    fn cdf_inverts_quantile_for_all_generators() {
        let models = [
            std_normal(),
            SymmetricModel::student_t(5.0, 0.3, 1.7).unwrap(),
            SymmetricModel::student_t(0.8, 0.0, 1.0).unwrap(),
            SymmetricModel::logistic(-1.0, 0.5).unwrap(),
        ];
        for m in models {
            for a in [0.001, 0.1, 0.37, 0.5, 0.8, 0.95, 0.999] {
                let q = m.quantile(a).unwrap();
                assert!((m.cdf(q) - a).abs() < 1e-10, "{m} {a}");
            }
        }
    }

    #[test]
    fn cumulative_generator_examples() {
        let g = Generator::Normal;
        assert!((g.cumulative_generator(0.0).unwrap() - 0.398_942_280_4).abs() < 1e-10);
        let t = 1.3528;
        assert!((g.cumulative_generator(t).unwrap() - (-t as f64).exp() * INV_SQRT_2PI).abs() < 1e-16);
        assert!(matches!(
            Generator::StudentT { dof: 1.0 }.cumulative_generator(0.0),
            Err(RiskError::UnsupportedGenerator(_))
        ));
    }

    #[test]
    fn cumulant_examples() {
        assert_eq!(Generator::Normal.cumulant(0.0).unwrap(), 0.0);
        assert_eq!(Generator::Normal.cumulant(1.0).unwrap(), 0.5);
        match (Generator::StudentT { dof: 5.0 }).cumulant(0.1) {
            Err(RiskError::MgfNonexistent(msg)) => {
                assert!(msg.contains("Student-t has no moment generating function"))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Generator::Logistic.cumulant(0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn student_t_variance_factor() {
        assert_eq!(Generator::StudentT { dof: 5.0 }.variance_factor(), 5.0 / 3.0);
        assert!(Generator::StudentT { dof: 2.0 }.variance_factor().is_infinite());
    }

    #[test]
    fn tilted_normal_survival_examples() {
        let q = norm_quantile(0.95);
        assert!((tilted_tail_survival(0.0, q, Generator::Normal).unwrap() - 0.05).abs() < 1e-14);
        let s = tilted_tail_survival(0.5, 1.644_853_6, Generator::Normal).unwrap();
        assert!((s - norm_sf(1.144_853_6)).abs() < 1e-15);
        assert!((s - 0.1261).abs() < 1e-4);
        assert!(matches!(
            tilted_tail_survival(0.5, 0.0, Generator::StudentT { dof: 5.0 }),
            Err(RiskError::MgfNonexistent(_))
        ));
    }

    #[test]
    fn parse_model_grammar() {
        let m: SymmetricModel = "normal(0,1)".parse().unwrap();
        assert_eq!(m, std_normal());
        let m: SymmetricModel = "t(5, 0.5, 2)".parse().unwrap();
        assert_eq!(m.generator, Generator::StudentT { dof: 5.0 });
        assert_eq!((m.mu, m.sigma), (0.5, 2.0));
        let m: SymmetricModel = "logistic(-1.5,0.25)".parse().unwrap();
        assert_eq!(m.generator, Generator::Logistic);
        for bad in ["normal(0)", "normal(0,-1)", "t(0,0,1)", "cauchy(0,1)", "normal 0,1", "logistic(a,1)"] {
            assert!(matches!(bad.parse::<SymmetricModel>(), Err(RiskError::Parse(_))), "{bad}");
        }
        for s in ["normal(0,1)", "t(5,0.5,2)", "logistic(-1.5,0.25)"] {
            assert_eq!(s.parse::<SymmetricModel>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for m in [
            std_normal(),
            SymmetricModel::student_t(5.0, 0.0, 1.0).unwrap(),
            SymmetricModel::logistic(0.0, 1.0).unwrap(),
        ] {
            let a = m.sample(5, 7).unwrap();
            let b = m.sample(5, 7).unwrap();
            assert_eq!(a.values(), b.values());
            assert_ne!(a.values(), m.sample(5, 8).unwrap().values());
        }
        assert!(std_normal().sample(0, 1).is_err());
    }
}
