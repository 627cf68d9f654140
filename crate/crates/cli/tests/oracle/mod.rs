//! Test-side oracles built without the library's embedding, assembly and
//! exponential code paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relbound_core::forms::{diag, ModelSpec};
use relbound_core::lattice::make_torus;

pub type M = DMatrix<C>;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Dense embedding of `local` on the ordered `sites` (site 0 most significant).
pub fn embed(local: &M, sites: &[usize], n: usize, d: usize) -> M {
    let dim = d.pow(n as u32);
    let digit = |idx: usize, s: usize| idx / d.pow((n - 1 - s) as u32) % d;
    let local_index = |idx: usize| sites.iter().fold(0, |acc, &s| acc * d + digit(idx, s));
    let rest_equal = |i: usize, j: usize| (0..n).filter(|s| !sites.contains(s)).all(|s| digit(i, s) == digit(j, s));
    M::from_fn(dim, dim, |i, j| if rest_equal(i, j) { local[(local_index(i), local_index(j))] } else { c(0.0) })
}

/// `Σ_x` of `local` on `{x, …, x+k-1}` around a ring of `n` sites.
pub fn ring_sum(local: &M, k: usize, n: usize, d: usize) -> M {
    let dim = d.pow(n as u32);
    (0..n).fold(M::zeros(dim, dim), |acc, x| {
        let sites: Vec<usize> = (0..k).map(|o| (x + o) % n).collect();
        acc + embed(local, &sites, n, d)
    })
}

pub fn hermitian_fn(h: &M, f: impl Fn(f64) -> f64) -> M {
    let eig = h.clone().symmetric_eigen();
    let fd = M::from_diagonal(&eig.eigenvalues.map(|e| c(f(e))));
    &eig.eigenvectors * fd * eig.eigenvectors.adjoint()
}

pub fn eigenvalues(h: &M) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn op_norm(h: &M) -> f64 {
    eigenvalues(h).iter().map(|e| e.abs()).fold(0.0, f64::max)
}

pub fn random_hermitian(d: usize, norm: f64, rng: &mut ChaCha8Rng) -> M {
    let a = M::from_fn(d, d, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = (&a + a.adjoint()) * c(0.5);
    let s = norm / op_norm(&h);
    h * c(s)
}

/// Qubit ring with `h = n_x + n_{x+1}`, a random `φ^(r)` vanishing on `|00⟩`
/// of norm `alpha` (so `|φ^(r)| ≤ alpha h`) and a random `φ^(b)` of norm `beta`.
/// Returns the model and the full local term `h + φ^(r) + φ^(b)`.
pub fn random_pair_model(n: usize, alpha: f64, beta: f64, seed: u64) -> (ModelSpec, M) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = M::from_diagonal(&DVector::from_vec(vec![c(0.0), c(1.0), c(1.0), c(2.0)]));
    let mut q = M::identity(4, 4);
    q[(0, 0)] = c(0.0);
    let p = &q * random_hermitian(4, 1.0, &mut rng) * &q;
    let phi_r = &p * c(alpha / op_norm(&p));
    let phi_b = random_hermitian(4, beta, &mut rng);
    let local = &h + &phi_r + &phi_b;
    let model = ModelSpec::new(
        make_torus(&[n], 2).unwrap(),
        vec![vec![0], vec![1]],
        h,
        Some(phi_r),
        Some(phi_b),
        1.0,
        alpha + 1e-9,
        beta * (1.0 + 1e-12),
    )
    .unwrap();
    (model, local)
}

/// `h = diag(0, 1)`, `φ^(r) = diag(0, -0.1)`, `φ^(b) = 0.05 σ^x` on a ring.
pub fn two_level_model(sites: usize) -> (ModelSpec, M) {
    let sx = M::from_row_slice(2, 2, &[c(0.0), c(0.05), c(0.05), c(0.0)]);
    let local = diag(&[0.0, 0.9]) + &sx;
    let model = ModelSpec::new(
        make_torus(&[sites], 2).unwrap(),
        vec![vec![0]],
        diag(&[0.0, 1.0]),
        Some(diag(&[0.0, -0.1])),
        Some(sx),
        1.0,
        0.1,
        0.05,
    )
    .unwrap();
    (model, local)
}

/// `ln ⟨0…0| e^{-N t₀ H} |0…0⟩`.
pub fn ln_z(h: &M, t0: f64, n: usize) -> f64 {
    hermitian_fn(h, |x| (-t0 * n as f64 * x).exp())[(0, 0)].re.ln()
}

/// Spin-1 AKLT chain `Σ_bonds P^(2)` built from the spin matrices, with
/// `P^(2)` the eigenprojector of `(S_1 + S_2)²` for eigenvalue 6.
pub fn aklt_oracle(n: usize, periodic: bool) -> M {
    let s2 = 2f64.sqrt();
    let sz = M::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0), c(-1.0)]));
    let mut sx = M::zeros(3, 3);
    let mut sy = M::zeros(3, 3);
    for (a, b) in [(0, 1), (1, 2)] {
        sx[(a, b)] = c(1.0 / s2);
        sx[(b, a)] = c(1.0 / s2);
        sy[(a, b)] = C::new(0.0, -1.0 / s2);
        sy[(b, a)] = C::new(0.0, 1.0 / s2);
    }
    let one = M::identity(3, 3);
    let casimir = [sx, sy, sz]
        .iter()
        .map(|s| s.kronecker(&one) + one.kronecker(s))
        .fold(M::zeros(9, 9), |acc, s| acc + &s * &s);
    let eig = casimir.symmetric_eigen();
    let mut p2 = M::zeros(9, 9);
    for i in 0..9 {
        if (eig.eigenvalues[i] - 6.0).abs() < 1e-9 {
            let v = eig.eigenvectors.column(i);
            p2 += v * v.adjoint();
        }
    }
    let dim = 3usize.pow(n as u32);
    let bonds = if periodic { n } else { n - 1 };
    (0..bonds).fold(M::zeros(dim, dim), |acc, b| acc + embed(&p2, &[b, (b + 1) % n], n, 3))
}

/// `Σ (-1)^{|E(H)|}` over spanning connected subgraphs of the graph.
pub fn spanning_connected_sum(n: usize, edges: &[(usize, usize)]) -> i64 {
    (0u32..1 << edges.len())
        .map(|mask| {
            let chosen: Vec<(usize, usize)> =
                (0..edges.len()).filter(|&e| mask >> e & 1 == 1).map(|e| edges[e]).collect();
            match (connected(n, &chosen), chosen.len() % 2) {
                (false, _) => 0,
                (true, 0) => 1,
                (true, _) => -1,
            }
        })
        .sum()
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Single-site qubit model on a ring: `h = diag(0, 1)`, `φ^(r) = diag(0, r)`
/// with random `|r| ≤ 0.1`, and a random `φ^(b)` of norm 0.05.
pub fn random_site_model(n: usize, seed: u64) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: f64 = rng.gen_range(-0.1..0.1);
    let phi_b = random_hermitian(2, 0.05, &mut rng);
    ModelSpec::new(
        make_torus(&[n], 2).unwrap(),
        vec![vec![0]],
        diag(&[0.0, 1.0]),
        Some(diag(&[0.0, r])),
        Some(phi_b),
        1.0,
        r.abs() + 1e-9,
        0.05 * (1.0 + 1e-12),
    )
    .unwrap()
}
