mod common;

use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relbound_core::cluster::{enumerate_polymers, Atom, Configuration, EnumerationOptions, Propagators};

const N: usize = 3;

fn shifted(c: &Configuration, shift: usize) -> Option<Configuration> {
    let atoms: Vec<Atom> = c
        .atoms()
        .into_iter()
        .map(|a| Atom::new(a.slice + shift, a.kind, a.site))
        .collect();
    atoms.iter().all(|a| a.slice <= N).then(|| Configuration::from_atoms(N, &atoms))
}

fn shares_a_slice(a: &Configuration, b: &Configuration) -> bool {
    let (a0, a1) = a.time_span().unwrap();
    let (b0, b1) = b.time_span().unwrap();
    a0 <= b1 && b0 <= a1
}

#[test]
fn weights_of_disjoint_configurations_factorize() {
    let start = Instant::now();
    let model = random_site_model(6, 21);
    let props = Propagators::new(&model).unwrap();
    let set = enumerate_polymers(&model, N, EnumerationOptions::new(8)).unwrap();
    let active: Vec<_> = set.active().collect();
    assert!(active.len() > 10, "{} active polymers", active.len());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut pairs, mut attempts, mut nonzero, mut overlapping) = (0, 0, 0, 0);
    while pairs < 50 {
        attempts += 1;
        assert!(attempts < 100_000, "could not draw 50 disjoint pairs");
        let p = active[rng.gen_range(0..active.len())];
        let q = active[rng.gen_range(0..active.len())];
        let (Some(c1), Some(c2)) = (
            shifted(&p.config, rng.gen_range(0..N)),
            shifted(&q.config, rng.gen_range(0..N)),
        ) else {
            continue;
        };
        let Ok(both) = c1.union(&c2, &model.geometry) else {
            continue;
        };
        let w1 = props.weight(&c1).unwrap();
        let w2 = props.weight(&c2).unwrap();
        let w12 = props.weight(&both).unwrap();
        let prod = w1 * w2;
        let err = (w12 - prod).norm();
        assert!(
            err <= 1e-12 * prod.norm().max(1.0),
            "{c1:?} ∪ {c2:?}: |w(C1∪C2) - w(C1)w(C2)| = {err:.3e}"
        );
        if prod.norm() > 1e-12 {
            nonzero += 1;
        }
        if shares_a_slice(&c1, &c2) {
            overlapping += 1;
        }
        pairs += 1;
    }
    assert!(nonzero >= 10, "only {nonzero} pairs with a non-negligible product");
    assert!(overlapping >= 10, "only {overlapping} pairs overlap in time");
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn empty_configuration_has_unit_weight() {
    let (model, ..) = random_pair_model(4, 0.1, 0.05, 2);
    let props = Propagators::new(&model).unwrap();
    let w = props.weight(&Configuration::empty(3)).unwrap();
    assert!((w - c(1.0)).norm() < 1e-12);
}
