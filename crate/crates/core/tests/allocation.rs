use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tailrisk::allocation::*;
use tailrisk::risk::{tcerm_estimate, tqlm_empirical};
use tailrisk::{SampleSet, SymmetricModel, UtilityFunction};

fn random_joint(components: usize, scenarios: usize, seed: u64) -> JointSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..components)
        .map(|i| {
            let scale = 1.0 + i as f64;
            (0..scenarios).map(|_| scale * rng.random_range(-1.0..3.0f64).powi(3)).collect()
        })
        .collect();
    JointSample::new(rows).unwrap()
}

#[test]
fn linear_allocation_is_full() {
    let j = random_joint(5, 500_000, 3);
    for a in [0.5, 0.9, 0.99] {
        let gap = allocation_gap(&j, a, &UtilityFunction::Linear).unwrap();
        assert!(gap.abs() <= 1e-12, "level {a}: gap {gap}");
    }
}

#[test]
fn single_component_is_tqlm() {
    let x = SymmetricModel::logistic(1.0, 2.0).unwrap().sample(5_000, 9).unwrap();
    let j = JointSample::new(vec![x.values().to_vec()]).unwrap();
    let u = UtilityFunction::exponential(0.3).unwrap();
    assert_eq!(
        contribution(&j, 0, 0.9, &u).unwrap(),
        tqlm_empirical(&x, 0.9, &u).unwrap().to_f64()
    );
}

#[test]
fn comonotone_superadditivity() {
    let j = JointSample::comonotone_normal(&[(0.0, 1.0), (1.0, 2.0), (-0.5, 0.5)], 500_000, 17).unwrap();
    for g in [0.5, 1.0] {
        let u = UtilityFunction::exponential(g).unwrap();
        let e = allocation_gap_estimate(&j, 0.95, &u, 20).unwrap();
        assert!(e.gap >= -3.0 * e.standard_error, "{e:?}");
    }
}

#[test]
fn countermonotone_gap_reverses() {
    let j = JointSample::countermonotone_normal((0.0, 1.0), (0.0, 2.0), 500_000, 23).unwrap();
    for g in [0.5, 1.0] {
        let u = UtilityFunction::exponential(g).unwrap();
        let e = allocation_gap_estimate(&j, 0.95, &u, 20).unwrap();
        assert!(e.gap <= 3.0 * e.standard_error, "{e:?}");
    }
}

#[test]
fn comonotone_contribution_below_marginal() {
    let j = JointSample::comonotone_normal(&[(0.0, 1.0), (2.0, 0.5)], 400_000, 5).unwrap();
    let g = 0.8;
    let u = UtilityFunction::exponential(g).unwrap();
    for i in 0..2 {
        let c = contribution(&j, i, 0.95, &u).unwrap();
        let marginal = tcerm_estimate(&SampleSet::new(j.row(i).to_vec()).unwrap(), 0.95, g).unwrap();
        assert!(c <= marginal.value + 3.0 * marginal.standard_error.unwrap(), "component {i}");
    }
}

#[test]
fn gap_estimate_rejects_too_many_batches() {
    let j = random_joint(2, 10, 1);
    assert!(allocation_gap_estimate(&j, 0.5, &UtilityFunction::Linear, 6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_gap_vanishes_on_random_samples(components in 1usize..6, scenarios in 1usize..400, seed in any::<u64>(), a in 0.01..0.99f64) {
        let j = random_joint(components, scenarios, seed);
        let gap = allocation_gap(&j, a, &UtilityFunction::Linear).unwrap();
        let scale = j.total().values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(gap.abs() <= 1e-12 * scale, "gap {}", gap);
    }

    #[test]
    fn contributions_ignore_scenario_order(seed in any::<u64>(), a in 0.5..0.95f64, g in -1.0..1.0f64) {
        // distinct totals keep the tail event unambiguous
        let j = random_joint(3, 300, seed);
        let mut order: Vec<usize> = (0..j.scenarios()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let permuted = JointSample::new(
            (0..j.components()).map(|i| order.iter().map(|&k| j.row(i)[k]).collect()).collect(),
        ).unwrap();
        let u = if g.abs() < 0.05 { UtilityFunction::Linear } else { UtilityFunction::exponential(g).unwrap() };
        let before = contributions(&j, a, &u).unwrap();
        let after = contributions(&permuted, a, &u).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{} {}", x, y);
        }
    }
}
