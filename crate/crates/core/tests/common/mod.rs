//! Test-side oracles, written independently of the library's embedding,
//! assembly and exponential code paths.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relbound_core::forms::{diag, ModelSpec};
use relbound_core::lattice::make_torus;

pub type M = DMatrix<C>;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Dense embedding of `local` acting on the ordered `sites` (first listed
/// site is the most significant local digit) into `n` sites of dimension `d`,
/// site 0 being the most significant global digit.
pub fn embed(local: &M, sites: &[usize], n: usize, d: usize) -> M {
    let dim = d.pow(n as u32);
    let digit = |idx: usize, s: usize| idx / d.pow((n - 1 - s) as u32) % d;
    let local_index = |idx: usize| sites.iter().fold(0, |acc, &s| acc * d + digit(idx, s));
    let rest_equal = |i: usize, j: usize| (0..n).filter(|s| !sites.contains(s)).all(|s| digit(i, s) == digit(j, s));
    M::from_fn(dim, dim, |i, j| {
        if rest_equal(i, j) {
            local[(local_index(i), local_index(j))]
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// Sum of `local` over the translates `{x, x+1, …, x+k-1}` of a ring of `n` sites.
pub fn ring_sum(local: &M, k: usize, n: usize, d: usize) -> M {
    let dim = d.pow(n as u32);
    (0..n).fold(M::zeros(dim, dim), |acc, x| {
        let sites: Vec<usize> = (0..k).map(|o| (x + o) % n).collect();
        acc + embed(local, &sites, n, d)
    })
}

/// `f(H)` through the eigendecomposition of a Hermitian matrix.
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

/// `n_x + n_{x+1}` on a pair of qubits: unique kernel vector `|00⟩`, gap 1.
pub fn pair_number() -> M {
    M::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0), c(1.0), c(2.0)]))
}

/// Ring of `n` qubits with nearest-neighbour classical term `n_x + n_{x+1}`,
/// a random `φ^(r)` vanishing on `|00⟩` with `‖φ^(r)‖ = alpha` (hence
/// `|φ^(r)| ≤ alpha h`), and a random `φ^(b)` with `‖φ^(b)‖ = beta`.
pub fn random_pair_model(n: usize, alpha: f64, beta: f64, seed: u64) -> (ModelSpec, M, M, M) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = pair_number();
    let mut q = M::identity(4, 4);
    q[(0, 0)] = c(0.0);
    let a = random_hermitian(4, 1.0, &mut rng);
    let phi_r = {
        let p = &q * a * &q;
        let s = alpha / op_norm(&p);
        p * c(s)
    };
    let phi_b = random_hermitian(4, beta, &mut rng);
    let model = ModelSpec::new(
        make_torus(&[n], 2).unwrap(),
        vec![vec![0], vec![1]],
        h.clone(),
        Some(phi_r.clone()),
        Some(phi_b.clone()),
        1.0,
        alpha + 1e-9,
        beta * (1.0 + 1e-12),
    )
    .unwrap();
    (model, h, phi_r, phi_b)
}

/// Single-site model `h = diag(0, 1)`, `φ^(r) = diag(0, -0.1)`,
/// `φ^(b) = 0.05 σ^x`, `α = 0.1`, `β = 0.05`.
pub fn two_level_model(sites: usize) -> ModelSpec {
    let sx = M::from_row_slice(2, 2, &[c(0.0), c(0.05), c(0.05), c(0.0)]);
    ModelSpec::new(
        make_torus(&[sites], 2).unwrap(),
        vec![vec![0]],
        diag(&[0.0, 1.0]),
        Some(diag(&[0.0, -0.1])),
        Some(sx),
        1.0,
        0.1,
        0.05,
    )
    .unwrap()
}

/// `H = Σ_x (h + φ^(r) + φ^(b))_x` on a ring, assembled test-side.
pub fn ring_hamiltonian(local: &M, k: usize, n: usize) -> M {
    ring_sum(local, k, n, 2)
}

/// `⟨Ω₀| e^{-N t₀ H} |Ω₀⟩` with `Ω₀ = |0…0⟩`.
pub fn ln_z(h: &M, t0: f64, n: usize) -> f64 {
    let e = hermitian_fn(h, |x| (-t0 * n as f64 * x).exp());
    e[(0, 0)].re.ln()
}

/// Spin-1 AKLT chain built from scratch: `Σ_bonds P^(2)` with `P^(2)`
/// the projector onto the largest eigenvalue (6) of `(S_1 + S_2)²`.
pub fn aklt_oracle(n: usize, periodic: bool) -> M {
    let s2 = 2f64.sqrt();
    let sz = M::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0), c(-1.0)]));
    let mut sx = M::zeros(3, 3);
    let mut sy = M::zeros(3, 3);
    for (a, b) in [(0, 1), (1, 2)] {
        sx[(a, b)] = c(1.0 / s2);
        sx[(b, a)] = c(1.0 / s2);
        sy[(a, b)] = C::new(0.0, -1.0 / s2);
        sy[(b, a)] = C::new(0.0, 1.0 / s2);
    }
    let one = M::identity(3, 3);
    let total: Vec<M> = [sx, sy, sz].iter().map(|s| s.kronecker(&one) + one.kronecker(s)).collect();
    let casimir = total.iter().fold(M::zeros(9, 9), |acc, s| acc + s * s);
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
