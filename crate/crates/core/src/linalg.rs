//! Dense and sparse linear-algebra kernels shared by every module.
//!
//! Dense work goes through `nalgebra` with complex double precision. Volume
//! operators above the dense cap use the row-compressed [`SparseMatrix`] and
//! the restarted [`lanczos_lowest`] eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerance on the minimal eigenvalue for PSD decisions.
pub const PSD_TOL: f64 = 1e-10;
/// Hermiticity tolerance, relative to `max(1, max |entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_hermitian(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * re(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> CVec {
        self.vectors.column(i).into_owned()
    }

    /// Rebuilds `f(M)` from the spectral decomposition.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        matmul(&scaled, &self.vectors.adjoint())
    }
}

/// Connected components of the nonzero pattern of a square matrix.
fn components(m: &CMat) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigen-decomposition of a Hermitian block; `None` if the solver produced
/// non-finite output.
fn raw_eigh(h: &CMat, vectors: bool) -> Option<(Vec<f64>, Option<CMat>)> {
    let real = h.iter().all(|z| z.im == 0.0);
    let (vals, vecs): (Vec<f64>, Option<CMat>) = if real {
        let r = h.map(|z| z.re);
        if vectors {
            let e = SymmetricEigen::new(r);
            (e.eigenvalues.iter().copied().collect(), Some(e.eigenvectors.map(re)))
        } else {
            (r.symmetric_eigenvalues().iter().copied().collect(), None)
        }
    } else if vectors {
        let e = SymmetricEigen::new(h.clone());
        (e.eigenvalues.iter().copied().collect(), Some(e.eigenvectors))
    } else {
        (h.clone().symmetric_eigenvalues().iter().copied().collect(), None)
    };
    let finite = vals.iter().all(|v| v.is_finite())
        && vecs.as_ref().is_none_or(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    finite.then_some((vals, vecs))
}

/// As [`raw_eigh`], retrying after seeded random unitary similarities when the
/// solver breaks down (which happens on some highly degenerate sparse inputs).
fn robust_eigh(h: &CMat, vectors: bool) -> (Vec<f64>, Option<CMat>) {
    if let Some(r) = raw_eigh(h, vectors) {
        return r;
    }
    let n = h.nrows();
    let real = h.iter().all(|z| z.im == 0.0);
    for seed in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
        let g = CMat::from_fn(n, n, |_, _| {
            let im = if real { 0.0 } else { rng.gen::<f64>() - 0.5 };
            C64::new(rng.gen::<f64>() - 0.5, im)
        });
        let q = g.qr().q();
        let rotated = hermitian_part(&matmul(&matmul(&q.adjoint(), h), &q));
        if let Some((vals, vecs)) = raw_eigh(&rotated, vectors) {
            return (vals, vecs.map(|v| matmul(&q, &v)));
        }
    }
    (vec![f64::NAN; n], vectors.then(|| CMat::from_element(n, n, C64::new(f64::NAN, 0.0))))
}

pub fn eigh(m: &CMat) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        };
    }
    let h = hermitian_part(m);
    let mut values = Vec::with_capacity(n);
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    for comp in components(&h) {
        let k = comp.len();
        let block = CMat::from_fn(k, k, |i, j| h[(comp[i], comp[j])]);
        let (vals, vecs) = robust_eigh(&block, true);
        let vecs = vecs.expect("vectors requested");
        for (c, &v) in vals.iter().enumerate() {
            values.push(v);
            let mut col = CVec::zeros(n);
            for (i, &row) in comp.iter().enumerate() {
                col[row] = vecs[(i, c)];
            }
            cols.push(col);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &cols[src]);
    }
    HermitianEigen {
        values: sorted,
        vectors,
    }
}

/// Ascending eigenvalues of a Hermitian matrix (no eigenvectors).
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut values = Vec::with_capacity(h.nrows());
    for comp in components(&h) {
        let k = comp.len();
        let block = CMat::from_fn(k, k, |i, j| h[(comp[i], comp[j])]);
        values.extend(robust_eigh(&block, false).0);
    }
    values.sort_by(f64::total_cmp);
    values
}

/// Complex matrix product through real matrix products (much faster than the
/// generic complex kernel).
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let ar = a.map(|z| z.re);
    let br = b.map(|z| z.re);
    let a_real = a.iter().all(|z| z.im == 0.0);
    let b_real = b.iter().all(|z| z.im == 0.0);
    let mut out_re = &ar * &br;
    let mut out_im = nalgebra::DMatrix::<f64>::zeros(a.nrows(), b.ncols());
    if !a_real {
        let ai = a.map(|z| z.im);
        out_im += &ai * &br;
        if !b_real {
            out_re -= &ai * b.map(|z| z.im);
        }
    }
    if !b_real {
        out_im += &ar * b.map(|z| z.im);
    }
    CMat::from_fn(a.nrows(), b.ncols(), |i, j| C64::new(out_re[(i, j)], out_im[(i, j)]))
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMat) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMat) -> f64 {
    let v = eigvalsh(m);
    match (v.first(), v.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => 0.0,
    }
}

/// Operator norm of a general matrix (largest singular value).
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a: f64, &b| a.max(b))
}

/// PSD test `M + tol·1 ≻ 0` via Cholesky; equivalent to `λ_min(M) ≥ -tol`
/// up to rounding.
pub fn is_psd(m: &CMat, tol: f64) -> bool {
    let n = m.nrows();
    let mut shifted = hermitian_part(m);
    for i in 0..n {
        shifted[(i, i)] += re(tol);
    }
    cholesky_succeeds(shifted)
}

/// In-place Hermitian Cholesky factorization; `false` as soon as a pivot is
/// not strictly positive.
fn cholesky_succeeds(mut a: CMat) -> bool {
    let n = a.nrows();
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= a[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let piv = d.sqrt();
        a[(j, j)] = re(piv);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)].conj();
            }
            a[(i, j)] = s / piv;
        }
    }
    true
}

/// `exp(-t·H)` for Hermitian `H` through its spectral decomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    eigh(h).apply_fn(|lam| re((-t * lam).exp()))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// General matrix exponential, scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * re(0.5f64.powi(s));
    let b = &PADE13;
    let id = CMat::identity(n, n);
    let a2 = matmul(&a, &a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let u_inner = matmul(&a6, &(&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9])))
        + &a6 * re(b[7])
        + &a4 * re(b[5])
        + &a2 * re(b[3])
        + &id * re(b[1]);
    let u = matmul(&a, &u_inner);
    let v = matmul(&a6, &(&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8])))
        + &a6 * re(b[6])
        + &a4 * re(b[4])
        + &a2 * re(b[2])
        + &id * re(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    Ok(r)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Modified Gram–Schmidt with one re-orthogonalization pass; vectors whose
/// residual norm falls below `drop_tol` are discarded.
pub fn orthonormalize(vs: &[CVec], drop_tol: f64) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = u.dotc(&w);
                w.axpy(-c, u, ONE);
            }
        }
        let nrm = w.norm();
        if nrm > drop_tol {
            out.push(w / re(nrm));
        }
    }
    out
}

/// Orthogonal projector onto the span of `vs`.
pub fn projector_onto(vs: &[CVec]) -> CMat {
    let n = vs.first().map(|v| v.len()).unwrap_or(0);
    let mut p = CMat::zeros(n, n);
    for u in orthonormalize(vs, 1e-12) {
        p += &u * u.adjoint();
    }
    p
}

/// Deterministic seeded random complex vector, entries uniform in the unit
/// square centred at 0.
pub fn random_vector(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CVec::from_fn(n, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

/// Seeded random Hermitian matrix with entries of order `scale`.
pub fn random_hermitian(n: usize, scale: f64, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = re(scale * (rng.gen::<f64>() - 0.5));
        for j in (i + 1)..n {
            let z = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Row-compressed sparse complex matrix (square).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            indptr: vec![0; n + 1],
            indices: vec![],
            values: vec![],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![ONE; n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let rows = diag
            .iter()
            .enumerate()
            .map(|(i, &d)| if d == ZERO { vec![] } else { vec![(i, d)] })
            .collect();
        Self::from_rows(diag.len(), rows)
    }

    /// Builds from per-row entry lists; duplicate columns are summed and exact
    /// zeros dropped.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut acc = ZERO;
                while k < row.len() && row[k].0 == col {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != ZERO {
                    debug_assert!(col < n);
                    indices.push(col);
                    values.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &CMat) -> Self {
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| m[(i, j)] != ZERO)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or(ZERO)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let body = |(i, yi): (usize, &mut C64)| {
            let mut acc = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        };
        if self.n >= 1 << 14 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    pub fn mul_vec(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.n);
        self.apply(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Linear combination `Σ c_i A_i`.
    pub fn linear_combination(n: usize, terms: &[(C64, &SparseMatrix)]) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut row = Vec::new();
                for (c, m) in terms {
                    assert_eq!(m.n, n);
                    row.extend(m.row(i).map(|(j, v)| (j, v * c)));
                }
                row
            })
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn sum(n: usize, terms: &[&SparseMatrix]) -> Self {
        let weighted: Vec<(C64, &SparseMatrix)> = terms.iter().map(|m| (ONE, *m)).collect();
        Self::linear_combination(n, &weighted)
    }

    pub fn add(&self, other: &SparseMatrix) -> Self {
        Self::sum(self.n, &[self, other])
    }

    /// `B[i][j] = A[map[i]][map[j]]` for a permutation `map`.
    pub fn permuted(&self, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.n);
        let mut inverse = vec![0; self.n];
        for (i, &m) in map.iter().enumerate() {
            inverse[m] = i;
        }
        let rows = map
            .iter()
            .map(|&m| self.row(m).map(|(j, v)| (inverse[j], v)).collect())
            .collect();
        Self::from_rows(self.n, rows)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        let diff = Self::linear_combination(self.n, &[(ONE, self), (-ONE, other)]);
        diff.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Krylov dimension per restart cycle.
    pub krylov_dim: usize,
    pub restarts: usize,
    /// Residual tolerance `‖A x - θ x‖ ≤ tol · max(1, |θ|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 80,
            restarts: 30,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: CVec,
    pub residual: f64,
    pub matvecs: usize,
}

fn project_out(w: &mut CVec, basis: &[CVec]) {
    for u in basis {
        let c = u.dotc(w);
        w.axpy(-c, u, ONE);
    }
}

/// Lowest eigenpair of a Hermitian operator given by its action, restricted
/// to the orthogonal complement of `deflate` (which must be an orthonormal
/// set spanning an invariant subspace). Explicitly restarted Lanczos with
/// full re-orthogonalization.
pub fn lanczos_lowest<F>(
    apply: F,
    n: usize,
    deflate: &[CVec],
    opts: LanczosOptions,
) -> Result<LanczosResult>
where
    F: Fn(&[C64], &mut [C64]),
{
    if n == 0 || deflate.len() >= n {
        return Err(Error::Convergence("empty search space".into()));
    }
    let mut start = random_vector(n, opts.seed);
    project_out(&mut start, deflate);
    project_out(&mut start, deflate);
    let nrm = start.norm();
    if nrm == 0.0 {
        return Err(Error::Convergence("start vector lies in deflated space".into()));
    }
    start /= re(nrm);

    let kdim = opts.krylov_dim.min(n - deflate.len()).max(1);
    let mut matvecs = 0;
    let mut best: Option<LanczosResult> = None;
    for _cycle in 0..=opts.restarts {
        let mut basis: Vec<CVec> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = CVec::zeros(n);
        let mut ritz: Option<(f64, DVector<f64>, f64)>;
        loop {
            let j = basis.len() - 1;
            apply(basis[j].as_slice(), w.as_mut_slice());
            matvecs += 1;
            let a = basis[j].dotc(&w).re;
            alphas.push(a);
            let mut r = w.clone();
            for _ in 0..2 {
                project_out(&mut r, deflate);
                project_out(&mut r, &basis);
            }
            let b = r.norm();
            let m = alphas.len();
            // Ritz values of the current tridiagonal matrix.
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (imin, theta) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let s = eig.eigenvectors.column(imin).into_owned();
            let resid = (b * s[m - 1]).abs();
            ritz = Some((theta, s, resid));
            let done = resid <= opts.tol * theta.abs().max(1.0) || b < 1e-14 || m >= kdim;
            if done {
                break;
            }
            betas.push(b);
            basis.push(r / re(b));
        }
        let (theta, s, resid) = ritz.expect("at least one Lanczos step");
        let mut x = CVec::zeros(n);
        for (k, v) in basis.iter().enumerate().take(s.len()) {
            x.axpy(re(s[k]), v, ONE);
        }
        project_out(&mut x, deflate);
        let xn = x.norm();
        x /= re(xn);
        // True residual of the Ritz pair.
        apply(x.as_slice(), w.as_mut_slice());
        matvecs += 1;
        let true_resid = (&w - &x * re(theta)).norm();
        let result = LanczosResult {
            value: theta,
            vector: x.clone(),
            residual: true_resid.min(resid.max(true_resid)),
            matvecs,
        };
        let converged = true_resid <= opts.tol.max(1e-12) * theta.abs().max(1.0) * 10.0;
        best = Some(result);
        if converged {
            break;
        }
        start = x;
    }
    let res = best.expect("at least one cycle");
    if res.residual > 1e-6 * res.value.abs().max(1.0) {
        return Err(Error::Convergence(format!(
            "residual {:.3e} after {} matvecs",
            res.residual, res.matvecs
        )));
    }
    Ok(res)
}

/// Largest eigenpair, via `lanczos_lowest` on the negated operator.
pub fn lanczos_highest<F>(
    apply: F,
    n: usize,
    deflate: &[CVec],
    opts: LanczosOptions,
) -> Result<LanczosResult>
where
    F: Fn(&[C64], &mut [C64]),
{
    let neg = |x: &[C64], y: &mut [C64]| {
        apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    };
    let mut r = lanczos_lowest(neg, n, deflate, opts)?;
    r.value = -r.value;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pade_matches_spectral_exponential() {
        let h = random_hermitian(6, 2.0, 7);
        let a = &h * re(-0.7);
        let viap = expm(&a).unwrap();
        let vias = expm_hermitian(&h, 0.7);
        assert!(max_abs_diff(&viap, &vias) < 1e-12);
    }

    #[test]
    fn pade_scales_large_norm() {
        let h = random_hermitian(5, 40.0, 3);
        let a = &h * re(-0.3);
        let d = max_abs_diff(&expm(&a).unwrap(), &expm_hermitian(&h, 0.3));
        assert!(d < 1e-9 * max_abs(&expm_hermitian(&h, 0.3)).max(1.0), "{d}");
    }

    #[test]
    fn psd_check_tracks_min_eigenvalue() {
        let mut m = CMat::identity(3, 3);
        m[(2, 2)] = re(-1e-11);
        assert!(is_psd(&m, PSD_TOL));
        m[(2, 2)] = re(-1e-9);
        assert!(!is_psd(&m, PSD_TOL));
    }

    #[test]
    fn sparse_roundtrip_and_apply() {
        let h = random_hermitian(7, 1.0, 11);
        let s = SparseMatrix::from_dense(&h);
        assert_eq!(s.to_dense(), h);
        let x = random_vector(7, 5);
        let y = s.mul_vec(&x);
        assert!((y - &h * &x).norm() < 1e-14);
        assert!(s.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn lanczos_finds_lowest_and_respects_deflation() {
        let h = random_hermitian(60, 1.0, 2);
        let eig = eigh(&h);
        let s = SparseMatrix::from_dense(&h);
        let r = lanczos_lowest(|x, y| s.apply(x, y), 60, &[], LanczosOptions::default()).unwrap();
        assert!((r.value - eig.values[0]).abs() < 1e-9);
        let g = eig.vector(0);
        let r2 =
            lanczos_lowest(|x, y| s.apply(x, y), 60, &[g], LanczosOptions::default()).unwrap();
        assert!((r2.value - eig.values[1]).abs() < 1e-9);
        let top = lanczos_highest(|x, y| s.apply(x, y), 60, &[], LanczosOptions::default())
            .unwrap();
        assert!((top.value - eig.values[59]).abs() < 1e-9);
    }
}
