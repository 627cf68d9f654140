mod common;

use std::time::Instant;

use common::*;
use relbound_core::cluster::audits::{t_prime_factor, weight_bound};
use relbound_core::cluster::{
    completeness_sum, enumerate_polymers, t_prime_audit, weight_bound_audit, telescoping_defect, EnumerationOptions,
    Propagators,
};
use relbound_core::lattice::SiteSet;

#[test]
fn decomposition_sums_to_the_semigroup() {
    let start = Instant::now();
    for seed in 0..3 {
        let (model, h, phi_r, phi_b) = random_pair_model(4, 0.1, 0.05, seed);
        let total = ring_hamiltonian(&(&h + &phi_r + &phi_b), 2, 4);
        let oracle = hermitian_fn(&total, |e| (-model.t0 * e).exp());
        let props = Propagators::new(&model).unwrap();
        let mut sum = M::zeros(16, 16);
        for i in model.volume().all_sites().subsets() {
            sum += props.t(i);
        }
        let err = max_abs_diff(&sum, &oracle);
        assert!(err <= 1e-10, "seed {seed}: max entry error {err:.3e}");
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn t_vanishes_when_one_perturbation_is_removed() {
    let (model, ..) = random_pair_model(4, 0.1, 0.05, 7);
    let i = SiteSet::from_sites([0, 2, 3]);
    for x in i.iter() {
        assert!(telescoping_defect(&model, i, x).unwrap() < 1e-12);
    }
}

#[test]
fn empty_i_gives_the_unperturbed_semigroup() {
    let (model, h, ..) = random_pair_model(4, 0.1, 0.05, 3);
    let h0 = ring_hamiltonian(&h, 2, 4);
    let oracle = hermitian_fn(&h0, |e| (-model.t0 * e).exp());
    let props = Propagators::new(&model).unwrap();
    assert!(max_abs_diff(props.t(SiteSet::EMPTY), &oracle) < 1e-12);
}

#[test]
fn configuration_sum_reproduces_the_partition_function() {
    let model = two_level_model(2);
    let local = relbound_core::forms::diag(&[0.0, 1.0]) + relbound_core::forms::diag(&[0.0, -0.1]) + {
        let mut sx = M::zeros(2, 2);
        sx[(0, 1)] = c(0.05);
        sx[(1, 0)] = c(0.05);
        sx
    };
    let h = ring_sum(&local, 1, 2, 2);
    for n in 1..=3 {
        let z = ln_z(&h, model.t0, n).exp();
        let sum = completeness_sum(&model, n).unwrap();
        assert!((sum - z).abs() < 1e-10 * z.max(1.0), "N = {n}: {sum} vs {z}");
    }
}

#[test]
fn t_prime_norm_bound_holds_for_small_sets() {
    let (model, ..) = random_pair_model(4, 0.1, 0.05, 11);
    let mut checked = 0;
    for i in model.volume().all_sites().subsets().filter(|i| i.len() <= 2) {
        let audit = t_prime_audit(&model, i).unwrap();
        let bound = (2.0 * model.alpha * (model.t0 * model.beta / model.alpha).exp()).powi(i.len() as i32);
        assert!((audit.bound - bound).abs() <= 1e-14 * bound.max(1.0));
        assert!(audit.ok, "I = {:?}: ‖T'‖ = {} > {}", i, audit.norm, audit.bound);
        checked += 1;
    }
    assert_eq!(checked, 1 + 4 + 6);
}

#[test]
fn t_prime_factor_conventions() {
    assert_eq!(t_prime_factor(0.0, 0.0, 1.0, 2), 0.0);
    assert_eq!(t_prime_factor(0.0, 0.1, 1.0, 0), 1.0);
    assert!(t_prime_factor(0.0, 0.1, 1.0, 1).is_infinite());
    assert!((t_prime_factor(0.1, 0.05, 1.0, 2) - (0.2 * 0.5f64.exp()).powi(2)).abs() < 1e-15);
}

#[test]
fn weight_bound_holds_for_all_small_polymers() {
    let model = two_level_model(3);
    let set = enumerate_polymers(&model, 5, EnumerationOptions::new(6)).unwrap();
    assert!(!set.truncated);
    let rows = weight_bound_audit(&model, &set);
    assert!(set.active().count() >= 5, "{} active polymers", set.active().count());
    let violations: Vec<_> = rows.iter().filter(|r| !r.ok).collect();
    assert!(violations.is_empty(), "{} violations, first {:?}", violations.len(), violations.first());
    for p in set.polymers.iter().take(50) {
        let expected: f64 = p
            .config
            .slices
            .iter()
            .map(|&(i, j)| {
                t_prime_factor(model.alpha, model.beta, model.t0, i.len())
                    * (-model.t0 * (j.len() as f64 - i.len() as f64)).exp()
            })
            .product();
        assert!((weight_bound(&model, &p.config) - expected).abs() <= 1e-12 * expected);
    }
}
