//! Oracles shared by the integration tests. They avoid the crate's own
//! quadrature and special functions so agreement is a real cross-check.
#![allow(dead_code)]

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// `int_a^{a + width} f`, for integrands that are negligible beyond the window.
pub fn tail<F: Fn(f64) -> f64>(f: F, a: f64, width: f64) -> f64 {
    simpson(f, a, a + width, 400_000)
}

/// Semi-infinite integral for polynomially decaying integrands via
/// `x = a + t / (1 - t)`.
pub fn tail_mapped<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        f(a + t / s) / (s * s)
    };
    simpson(g, 0.0, 1.0 - 1e-9, 2_000_000)
}

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Normal survival by direct integration.
pub fn normal_sf(x: f64) -> f64 {
    tail(normal_pdf, x, 40.0)
}

/// Unnormalized logistic-generator density `e^{-z^2/2} / (1 + e^{-z^2/2})^2`.
pub fn logistic_kernel(z: f64) -> f64 {
    let e = (-0.5 * z * z).exp();
    e / ((1.0 + e) * (1.0 + e))
}

pub fn logistic_c() -> f64 {
    1.0 / (2.0 * tail(logistic_kernel, 0.0, 40.0))
}

/// Student-t density with `m` degrees of freedom.
pub fn t_pdf(m: f64, z: f64) -> f64 {
    let c = (libm::lgamma((m + 1.0) / 2.0) - libm::lgamma(m / 2.0)).exp() / (m * std::f64::consts::PI).sqrt();
    c * (1.0 + z * z / m).powf(-(m + 1.0) / 2.0)
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got:.17e}, want {want:.17e}, |diff| {:.3e} > {tol:e}",
        (got - want).abs()
    );
}

/// Bisection on a decreasing function for `f(x) = target`.
pub fn solve_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Deterministic SPD matrix `A A^T + n I` from a seed.
pub fn random_spd(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: f64 = (0..n).map(|k| a[i][k] * a[j][k]).sum();
                    0.1 * (dot + if i == j { n as f64 * 0.5 } else { 0.0 })
                })
                .collect()
        })
        .collect()
}

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// `(golden file, arguments)`; one or more per command.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("measure_model.json", &["measure", "--config", "measure.toml"]),
    (
        "measure_input.json",
        &["measure", "--input", "losses.csv", "--alpha", "0.95", "--utility", "linear,exp:0.25,cap:3"],
    ),
    (
        "sweep.csv",
        &["sweep", "--model", "normal(0,1)", "--alpha", "0.9,0.95,0.99", "--gamma", "-0.2,0,0.2,0.5"],
    ),
    (
        "allocate.json",
        &["allocate", "--input", "joint.csv", "--alpha", "0.9", "--utility", "linear,exp:0.5", "--batches", "10"],
    ),
    ("reinsure.json", &["reinsure", "--config", "reinsure.toml"]),
    ("portfolio.json", &["portfolio", "--config", "portfolio.toml"]),
    ("selftest.json", &["selftest", "--seed", "1"]),
    ("sample.csv", &["sample", "--model", "t(5,0,1)", "--paths", "500", "--seed", "7"]),
];
