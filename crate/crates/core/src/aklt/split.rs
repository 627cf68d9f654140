//! Splitting the blocked AKLT chain into a classical projector model `H0` and
//! perturbations `φ^(r)`, `φ^(b)`.
//!
//! Each block is identified with `X ⊗ Y` through [`BlockDecomposition`], so the
//! chain becomes `2n` factors `X_0 Y_0 X_1 Y_1 …` of dimension `m`. Bond `k`
//! owns the pair `(Y_k, X_{k+1})`, rotated by a fixed unitary `R` with
//! `R v̂ = e_0`. In this frame every `h_{k,k+1}` is diagonal and the ground
//! state of `H0` is the basis vector with index 0.

use serde::Serialize;

use crate::aklt::blocks::{blocked_hbar, gpp_distance, BlockDecomposition, Completion};
use crate::aklt::spin::{aklt_hamiltonian, Boundary};
use crate::error::{Error, Result};
use crate::forms::{validate_classical, wcond_audit, BoundMode, ClassicalDiagnostics, ModelSpec, WcondAudit};
use crate::lattice::{apply_local, make_torus};
use crate::linalg::{
    eigvalsh, hermitian_norm, hermitian_part, lanczos_highest, lanczos_lowest, max_abs,
    matmul, max_eigenvalue, min_eigenvalue, orthonormalize, random_vector, re, CMat, CVec,
    LanczosOptions, SparseMatrix, C64, ONE, ZERO,
};

/// Largest chain assembled densely in the rotated frame.
pub const DENSE_FRAME_MAX: usize = 4096;

/// The rotated frame of an `n_blocks`-block periodic chain.
pub struct ChainFrame {
    pub l: usize,
    pub n_blocks: usize,
    pub dec: BlockDecomposition,
    rot: CMat,
    q1: CMat,
    q2: CMat,
    e00: CMat,
    hbar: Vec<SparseMatrix>,
    hp: SparseMatrix,
}

impl ChainFrame {
    pub fn new(l: usize, n_blocks: usize, completion: Completion) -> Result<Self> {
        let dec = BlockDecomposition::new(l, completion)?;
        let hbar = blocked_hbar(l, n_blocks)?;
        let hp = aklt_hamiltonian(l * n_blocks, Boundary::Periodic)?;
        let m = dec.m;
        let vhat = dec.bond_unit();
        let mut seeds = vec![vhat];
        seeds.extend((0..m * m).map(|i| {
            let mut e = CVec::zeros(m * m);
            e[i] = ONE;
            e
        }));
        let basis = orthonormalize(&seeds, 1e-8);
        if basis.len() != m * m {
            return Err(Error::Numerical("bond frame completion failed".into()));
        }
        let mut rot = CMat::zeros(m * m, m * m);
        for (i, b) in basis.iter().enumerate() {
            rot.row_mut(i).copy_from(&b.adjoint());
        }
        let id = CMat::identity(m, m);
        let pf = dec.f_projector();
        let q1 = &rot * id.kronecker(&pf) * rot.adjoint();
        let q2 = &rot * pf.kronecker(&id) * rot.adjoint();
        let mut e00 = CMat::zeros(m * m, m * m);
        e00[(0, 0)] = ONE;
        Ok(Self {
            l,
            n_blocks,
            dec,
            rot,
            q1,
            q2,
            e00,
            hbar,
            hp,
        })
    }

    pub fn dim(&self) -> usize {
        self.dec.block_dim.pow(self.n_blocks as u32)
    }

    fn factors(&self) -> usize {
        2 * self.n_blocks
    }

    fn pair_sites(&self, k: usize) -> [usize; 2] {
        let n = self.n_blocks;
        let k = k % n;
        [2 * k + 1, (2 * k + 2) % (2 * n)]
    }

    fn on_pair(&self, mat: &CMat, k: usize, x: &CVec) -> CVec {
        let mut y = CVec::zeros(x.len());
        apply_local(mat, &self.pair_sites(k), self.factors(), self.dec.m, ONE, x.as_slice(), y.as_mut_slice());
        y
    }

    fn on_block(&self, mat: &CMat, b: usize, x: &CVec) -> CVec {
        let mut y = CVec::zeros(x.len());
        apply_local(mat, &[b], self.n_blocks, self.dec.block_dim, ONE, x.as_slice(), y.as_mut_slice());
        y
    }

    /// Physical chain vector to the rotated frame.
    pub fn to_frame(&self, x: &CVec) -> CVec {
        let mut v = x.clone();
        for b in 0..self.n_blocks {
            v = self.on_block(&self.dec.iso, b, &v);
        }
        for k in 0..self.n_blocks {
            v = self.on_pair(&self.rot, k, &v);
        }
        v
    }

    /// Inverse of [`ChainFrame::to_frame`].
    pub fn from_frame(&self, x: &CVec) -> CVec {
        let rot_t = self.rot.adjoint();
        let iso_t = self.dec.iso.adjoint();
        let mut v = x.clone();
        for k in 0..self.n_blocks {
            v = self.on_pair(&rot_t, k, &v);
        }
        for b in 0..self.n_blocks {
            v = self.on_block(&iso_t, b, &v);
        }
        v
    }

    /// `h_{k,k+1} x`.
    pub fn apply_h(&self, k: usize, x: &CVec) -> CVec {
        x - self.on_pair(&self.e00, k, x)
    }

    /// `H0 x = 3l Σ_k h_{k,k+1} x` (diagonal in the frame).
    pub fn h0_diagonal(&self) -> Vec<f64> {
        let n = self.n_blocks;
        let m = self.dec.m;
        let f = self.factors();
        (0..self.dim())
            .map(|idx| {
                let digit = |s: usize| idx / m.pow((f - 1 - s) as u32) % m;
                let excited = (0..n)
                    .filter(|&k| {
                        let [a, b] = self.pair_sites(k);
                        digit(a) != 0 || digit(b) != 0
                    })
                    .count();
                (3 * self.l * excited) as f64
            })
            .collect()
    }

    /// `G″_{k,k+1} x`.
    pub fn apply_g(&self, k: usize, x: &CVec) -> CVec {
        let n = self.n_blocks;
        let v = self.on_pair(&self.q2, k + 1, x);
        let v = self.on_pair(&self.q1, k + n - 1, &v);
        self.on_pair(&self.e00, k, &v)
    }

    /// `H̄_{k,k+1} x` in the frame.
    pub fn apply_hbar(&self, k: usize, x: &CVec) -> CVec {
        self.to_frame(&self.hbar[k].mul_vec(&self.from_frame(x)))
    }

    /// `H^p x` in the frame.
    pub fn apply_hp(&self, x: &CVec) -> CVec {
        self.to_frame(&self.hp.mul_vec(&self.from_frame(x)))
    }

    /// `(1 − G″)H̄(1 − G″) x`.
    pub fn apply_compressed(&self, k: usize, x: &CVec) -> CVec {
        let px = x - self.apply_g(k, x);
        let y = self.apply_hbar(k, &px);
        &y - self.apply_g(k, &y)
    }

    /// `l(h_{k−1,k} + h_{k,k+1} + h_{k+1,k+2}) x`.
    pub fn apply_h_triple(&self, k: usize, x: &CVec) -> CVec {
        let n = self.n_blocks;
        let mut y = CVec::zeros(x.len());
        for j in [k + n - 1, k, k + 1] {
            y += self.apply_h(j, x);
        }
        y * re(self.l as f64)
    }

    pub fn apply_phi_r(&self, k: usize, x: &CVec) -> CVec {
        self.apply_compressed(k, x) - self.apply_h_triple(k, x)
    }

    pub fn apply_phi_b(&self, k: usize, x: &CVec) -> CVec {
        self.apply_hbar(k, x) - self.apply_compressed(k, x)
    }

    fn dense_of(&self, f: impl Fn(&CVec) -> CVec) -> CMat {
        let n = self.dim();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            let mut e = CVec::zeros(n);
            e[j] = ONE;
            out.set_column(j, &f(&e));
        }
        out
    }

    /// Dense frame operators; requires `dim ≤ DENSE_FRAME_MAX`.
    pub fn dense(&self) -> Result<DenseSplit> {
        let dim = self.dim();
        if dim > DENSE_FRAME_MAX {
            return Err(Error::CapExceeded {
                what: "dense frame dimension",
                size: dim,
                cap: DENSE_FRAME_MAX,
            });
        }
        let n = self.n_blocks;
        let w = self.dense_of(|x| self.to_frame(x));
        let conj = |s: &SparseMatrix| -> CMat {
            hermitian_part(&matmul(&matmul(&w, &s.to_dense()), &w.adjoint()))
        };
        let hp = conj(&self.hp);
        let hbar: Vec<CMat> = self.hbar.iter().map(conj).collect();
        let h: Vec<CMat> = (0..n).map(|k| self.dense_of(|x| self.apply_h(k, x))).collect();
        let g: Vec<CMat> = (0..n).map(|k| self.dense_of(|x| self.apply_g(k, x))).collect();
        let id = CMat::identity(dim, dim);
        let l = re(self.l as f64);
        let mut h0 = CMat::zeros(dim, dim);
        for hk in &h {
            h0 += hk * re(3.0 * self.l as f64);
        }
        let mut phi_r = vec![];
        let mut phi_b = vec![];
        for k in 0..n {
            let p = &id - &g[k];
            let compressed = hermitian_part(&matmul(&matmul(&p, &hbar[k]), &p));
            let triple = (&h[(k + n - 1) % n] + &h[k] + &h[(k + 1) % n]) * l;
            phi_r.push(&compressed - triple);
            phi_b.push(&hbar[k] - compressed);
        }
        Ok(DenseSplit {
            hp,
            h0,
            h,
            g,
            phi_r,
            phi_b,
        })
    }
}

/// Dense frame operators of the split.
pub struct DenseSplit {
    pub hp: CMat,
    pub h0: CMat,
    pub h: Vec<CMat>,
    pub g: Vec<CMat>,
    pub phi_r: Vec<CMat>,
    pub phi_b: Vec<CMat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub l: usize,
    pub n_blocks: usize,
    pub dim: usize,
    pub dense: bool,
    pub gamma_hat: f64,
    /// Smallest `α` with `−Σ_k φ^(r)_{k,k+1} ⪯ α H0`.
    pub alpha_est: f64,
    /// `1 − γ̂/(6l)`.
    pub alpha_reference: f64,
    /// `1 − γ̂(1 − δ²)/(6l)` with `δ = ‖G″ − G‖`; an upper bound on `alpha_est`.
    pub alpha_bound: f64,
    pub gpp_distance: f64,
    /// `max_k ‖φ^(b)_{k,k+1}‖`.
    pub beta_est: f64,
    pub reconstruction_residual: f64,
    pub phi_r_max_eig: Vec<f64>,
    /// `min eig((1 − G″_k) − h_k)`.
    pub hg_lower_min_eig: Vec<f64>,
    /// `min eig(h_{k−1} + h_k + h_{k+1} − (1 − G″_k))`.
    pub hg_upper_min_eig: Vec<f64>,
    /// Per bond, the smaller of the two.
    pub hg_min_eig: Vec<f64>,
    /// `‖[G″_{k−1,k}, G″_{k,k+1}]‖`.
    pub commutator_norms: Vec<f64>,
    /// `‖Σ_k φ^(r) Ω‖`, zero when the frame ground state is annihilated.
    pub ground_leak: f64,
    pub wcond: Option<WcondAudit>,
    /// Diagnostics of the unit bond term `h_{k,k+1}` as a classical term.
    pub bond_term: ClassicalDiagnostics,
}

/// Tolerance of every audit in the split report.
pub const SPLIT_TOL: f64 = 1e-10;

impl SplitReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = vec![];
        if self.reconstruction_residual > SPLIT_TOL {
            out.push(format!("reconstruction residual {:.3e}", self.reconstruction_residual));
        }
        for (k, &e) in self.phi_r_max_eig.iter().enumerate() {
            if e > SPLIT_TOL {
                out.push(format!("phi_r[{k}] max eigenvalue {e:.3e}"));
            }
        }
        for (k, &e) in self.hg_min_eig.iter().enumerate() {
            if e < -SPLIT_TOL {
                out.push(format!("hg[{k}] min eigenvalue {e:.3e}"));
            }
        }
        for (k, &c) in self.commutator_norms.iter().enumerate() {
            if c > SPLIT_TOL {
                out.push(format!("commutator[{k}] {c:.3e}"));
            }
        }
        if !(self.alpha_est < 1.0) {
            out.push(format!("alpha_est {} not below 1", self.alpha_est));
        }
        if self.alpha_est > self.alpha_bound + SPLIT_TOL {
            out.push(format!(
                "alpha_est {} above the gap bound {}",
                self.alpha_est, self.alpha_bound
            ));
        }
        if let Some(w) = &self.wcond {
            if !w.ok {
                out.push(format!("wcond min eigenvalue {:.3e}", w.worst_min_eig));
            }
        }
        if !self.bond_term.pass {
            out.push("bond term is not a classical projector term".into());
        }
        out
    }

    pub fn ok(&self) -> bool {
        self.failures().is_empty()
    }
}

fn bond_term_diagnostics(m: usize) -> ClassicalDiagnostics {
    let mut h = CMat::identity(m * m, m * m);
    h[(0, 0)] = ZERO;
    validate_classical(&h)
}

/// Dense split audit (`dim ≤ DENSE_FRAME_MAX`).
fn split_dense(frame: &ChainFrame, gamma_hat: f64) -> Result<SplitReport> {
    let l = frame.l;
    let n = frame.n_blocks;
    let ds = frame.dense()?;
    let dim = frame.dim();
    let id = CMat::identity(dim, dim);

    let mut recon = &ds.hp - &ds.h0;
    for k in 0..n {
        recon -= &ds.phi_r[k];
        recon -= &ds.phi_b[k];
    }
    let phi_r_max_eig: Vec<f64> = ds.phi_r.iter().map(max_eigenvalue).collect();
    let mut lower = vec![];
    let mut upper = vec![];
    let mut comms = vec![];
    for k in 0..n {
        let p = &id - &ds.g[k];
        lower.push(min_eigenvalue(&(&p - &ds.h[k])));
        let triple = &ds.h[(k + n - 1) % n] + &ds.h[k] + &ds.h[(k + 1) % n];
        upper.push(min_eigenvalue(&(triple - &p)));
        let a = &ds.g[(k + n - 1) % n];
        let b = &ds.g[k];
        comms.push(hermitian_norm(&((matmul(a, b) - matmul(b, a)) * C64::i())));
    }

    let mut sum_r = CMat::zeros(dim, dim);
    for p in &ds.phi_r {
        sum_r += p;
    }
    let ground_leak = sum_r.column(0).norm();
    // `D^{-1/2}(−Σφ^(r))D^{-1/2}` on the range of H0 (all indices but 0).
    let d: Vec<f64> = (0..dim).map(|i| ds.h0[(i, i)].re).collect();
    let r = dim - 1;
    let scaled = CMat::from_fn(r, r, |i, j| {
        -sum_r[(i + 1, j + 1)] / re((d[i + 1] * d[j + 1]).sqrt())
    });
    let alpha_est = eigvalsh(&scaled).last().copied().unwrap_or(0.0);

    let beta_est = ds
        .phi_b
        .iter()
        .map(hermitian_norm)
        .fold(0.0, f64::max);
    let wcond = (n <= 3).then(|| wcond_audit(&ds.phi_r, &ds.h0, alpha_est + SPLIT_TOL));
    let delta = gpp_distance(l)?;
    Ok(SplitReport {
        l,
        n_blocks: n,
        dim,
        dense: true,
        gamma_hat,
        alpha_est,
        alpha_reference: 1.0 - gamma_hat / (6.0 * l as f64),
        alpha_bound: 1.0 - gamma_hat * (1.0 - delta * delta) / (6.0 * l as f64),
        gpp_distance: delta,
        beta_est,
        reconstruction_residual: max_abs(&recon),
        phi_r_max_eig,
        hg_min_eig: lower.iter().zip(&upper).map(|(a, b)| a.min(*b)).collect(),
        hg_lower_min_eig: lower,
        hg_upper_min_eig: upper,
        commutator_norms: comms,
        ground_leak,
        wcond,
        bond_term: bond_term_diagnostics(frame.dec.m),
    })
}

fn lanczos_opts(seed: u64) -> LanczosOptions {
    LanczosOptions {
        seed,
        ..LanczosOptions::default()
    }
}

fn wrap<'a>(f: impl Fn(&CVec) -> CVec + 'a) -> impl Fn(&[C64], &mut [C64]) + 'a {
    move |x, y| {
        let v = f(&CVec::from_column_slice(x));
        y.copy_from_slice(v.as_slice());
    }
}

/// Matrix-free split audit.
fn split_sparse(frame: &ChainFrame, gamma_hat: f64, seed: u64) -> Result<SplitReport> {
    let l = frame.l;
    let n = frame.n_blocks;
    let dim = frame.dim();

    let mut recon = 0f64;
    for t in 0..3 {
        let x = random_vector(dim, seed.wrapping_add(t));
        let mut y = frame.apply_hp(&x);
        for k in 0..n {
            y -= frame.apply_phi_r(k, &x) + frame.apply_phi_b(k, &x);
        }
        let d0 = frame.h0_diagonal();
        for i in 0..dim {
            y[i] -= x[i] * re(d0[i]);
        }
        recon = recon.max(y.camax());
    }

    let mut phi_r_max_eig = vec![];
    let mut lower = vec![];
    let mut upper = vec![];
    let mut comms = vec![];
    for k in 0..n {
        let s = seed.wrapping_add(100 + k as u64);
        phi_r_max_eig.push(
            lanczos_highest(wrap(|x| frame.apply_phi_r(k, x)), dim, &[], lanczos_opts(s))?.value,
        );
        let low = |x: &CVec| x - frame.apply_g(k, x) - frame.apply_h(k, x);
        lower.push(lanczos_lowest(wrap(low), dim, &[], lanczos_opts(s))?.value);
        let up = |x: &CVec| {
            frame.apply_h_triple(k, x) * re(1.0 / l as f64) - (x - frame.apply_g(k, x))
        };
        upper.push(lanczos_lowest(wrap(up), dim, &[], lanczos_opts(s))?.value);
        let km = k + n - 1;
        // `−[A, B]²` is positive with top eigenvalue `‖[A, B]‖²`.
        let comm = |x: &CVec| {
            let c = |v: &CVec| frame.apply_g(km, &frame.apply_g(k, v)) - frame.apply_g(k, &frame.apply_g(km, v));
            -c(&c(x))
        };
        let top = lanczos_highest(wrap(comm), dim, &[], lanczos_opts(s))?.value;
        comms.push(top.max(0.0).sqrt());
    }

    let d = frame.h0_diagonal();
    let inv_sqrt: Vec<f64> = d.iter().map(|&v| if v > 0.0 { v.powf(-0.5) } else { 0.0 }).collect();
    let sum_k = |x: &CVec| {
        let mut y = CVec::zeros(dim);
        for k in 0..n {
            y += frame.apply_compressed(k, x);
        }
        y
    };
    let mut e0 = CVec::zeros(dim);
    e0[0] = ONE;
    let ground_leak = sum_k(&e0).norm();
    let scaled = |x: &CVec| {
        let mut v = x.clone();
        for i in 0..dim {
            v[i] *= re(inv_sqrt[i]);
        }
        let mut y = sum_k(&v);
        for i in 0..dim {
            y[i] *= re(inv_sqrt[i]);
        }
        y
    };
    let low = lanczos_lowest(wrap(scaled), dim, &[e0], lanczos_opts(seed.wrapping_add(7)))?;
    let alpha_est = 1.0 - low.value;

    let beta_est = crate::aklt::blocks::phi_b_norm(l)?;
    let delta = gpp_distance(l)?;
    Ok(SplitReport {
        l,
        n_blocks: n,
        dim,
        dense: false,
        gamma_hat,
        alpha_est,
        alpha_reference: 1.0 - gamma_hat / (6.0 * l as f64),
        alpha_bound: 1.0 - gamma_hat * (1.0 - delta * delta) / (6.0 * l as f64),
        gpp_distance: delta,
        beta_est,
        reconstruction_residual: recon,
        phi_r_max_eig,
        hg_min_eig: lower.iter().zip(&upper).map(|(a, b)| a.min(*b)).collect(),
        hg_lower_min_eig: lower,
        hg_upper_min_eig: upper,
        commutator_norms: comms,
        ground_leak,
        wcond: None,
        bond_term: bond_term_diagnostics(frame.dec.m),
    })
}

/// Full split audit of the `l`-blocked chain with `n_blocks` blocks.
pub fn aklt_blocked_split(
    l: usize,
    n_blocks: usize,
    gamma_hat: f64,
    completion: Completion,
    seed: u64,
) -> Result<SplitReport> {
    let frame = ChainFrame::new(l, n_blocks, completion)?;
    if frame.dim() <= DENSE_FRAME_MAX {
        split_dense(&frame, gamma_hat)
    } else {
        split_sparse(&frame, gamma_hat, seed)
    }
}

/// Index map from the chaining-model basis (site `j` = pair `(Y_j, X_{j+1})`)
/// to the frame basis.
fn chaining_map(frame: &ChainFrame) -> Vec<usize> {
    let n = frame.n_blocks;
    let m = frame.dec.m;
    let f = 2 * n;
    let d = m * m;
    (0..frame.dim())
        .map(|c| {
            let mut idx = 0;
            for j in 0..n {
                let p = c / d.pow((n - 1 - j) as u32) % d;
                let [a, b] = frame.pair_sites(j);
                idx += (p / m) * m.pow((f - 1 - a) as u32) + (p % m) * m.pow((f - 1 - b) as u32);
            }
            idx
        })
        .collect()
}

/// The blocked chain as a translation-invariant model on a ring of three
/// bond sites of dimension `m²`, with `Λ₀ = {−1, 0, 1}`, local classical term
/// `l(h ⊗ 1 ⊗ 1 + 1 ⊗ h ⊗ 1 + 1 ⊗ 1 ⊗ h)` and the bond-1 perturbations.
/// Certified in the collective mode at `α = alpha_est`.
pub struct ChainingModel {
    pub model: ModelSpec,
    /// `H^p` in the model basis.
    pub hp: CMat,
}

pub fn chaining_model(l: usize, t0: f64) -> Result<ChainingModel> {
    let n = 3;
    let frame = ChainFrame::new(l, n, Completion::Canonical)?;
    let ds = frame.dense()?;
    let map = chaining_map(&frame);
    let permute = |a: &CMat| -> CMat { CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(map[i], map[j])]) };
    let phi_r = permute(&ds.phi_r[1]);
    let phi_b = permute(&ds.phi_b[1]);
    let d = frame.dec.m * frame.dec.m;
    let mut hb = CMat::identity(d, d);
    hb[(0, 0)] = ZERO;
    let id = CMat::identity(d, d);
    let h = (hb.kronecker(&id).kronecker(&id)
        + id.kronecker(&hb).kronecker(&id)
        + id.kronecker(&id).kronecker(&hb))
        * re(l as f64);

    let mut sum_r = CMat::zeros(ds.h0.nrows(), ds.h0.ncols());
    for p in &ds.phi_r {
        sum_r += p;
    }
    let dim = ds.h0.nrows();
    let diag: Vec<f64> = (0..dim).map(|i| ds.h0[(i, i)].re).collect();
    let r = dim - 1;
    let scaled = CMat::from_fn(r, r, |i, j| {
        -sum_r[(i + 1, j + 1)] / re((diag[i + 1] * diag[j + 1]).sqrt())
    });
    let alpha = eigvalsh(&scaled).last().copied().unwrap_or(0.0) + SPLIT_TOL;
    let beta = hermitian_norm(&phi_b) * (1.0 + 1e-12);
    let volume = make_torus(&[n], d)?;
    let model = ModelSpec::unchecked(
        volume,
        vec![vec![-1], vec![0], vec![1]],
        h,
        Some(phi_r),
        Some(phi_b),
        t0,
        alpha,
        beta,
    )?
    .with_bound_mode(BoundMode::Collective)?;
    Ok(ChainingModel {
        model,
        hp: permute(&ds.hp),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainingAudit {
    /// `max |H_model − H^p|`.
    pub hamiltonian_defect: f64,
    /// `max |Σ_I T_{Λ,I} − e^{−t₀H}|`.
    pub decomposition_defect: f64,
    pub factorization_pairs: usize,
    /// `max |w(C₁∪C₂) − w(C₁)w(C₂)| / max(1, |w(C₁)w(C₂)|)`.
    pub factorization_defect: f64,
    /// `max |w(C₁∪C₂) − w(C₁)w(C₂)| / |w(C₁)w(C₂)|` over non-vanishing products.
    pub factorization_relative: f64,
    /// Smallest `|w(C₁)w(C₂)|` entering the relative defect.
    pub smallest_product: f64,
}

/// Runs the space-time expansion machinery on the chaining model: the
/// semigroup decomposition and factorization of weights over time-separated
/// configurations.
pub fn chaining_audit(chain: &ChainingModel, pairs: usize, seed: u64) -> Result<ChainingAudit> {
    use crate::cluster::{decomposition_defect, Configuration, Propagators};
    use crate::lattice::SiteSet;
    use rand::{Rng, SeedableRng};

    let model = &chain.model;
    let h = crate::forms::assemble(model)?.h.to_dense();
    let hamiltonian_defect = crate::linalg::max_abs_diff(&h, &chain.hp);
    let decomposition = decomposition_defect(model)?;

    let props = Propagators::new(model)?;
    let geometry = &model.geometry;
    let n_sites = model.n_sites();
    let n_slices = 8;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // Three-slice configurations: a quantum term, classical excitations
    // `S`, a second quantum term; all other slices empty.
    let mut make = |start: usize| -> Result<Configuration> {
        let mut slices = vec![(SiteSet::EMPTY, SiteSet::EMPTY); n_slices];
        let x = rng.gen_range(0..n_sites);
        let y = rng.gen_range(0..n_sites);
        let mask: u64 = rng.gen_range(0..(1u64 << n_sites));
        slices[start].0 = SiteSet::singleton(x);
        slices[start + 1].1 = SiteSet::from_sites((0..n_sites).filter(|s| mask >> s & 1 == 1));
        slices[start + 2].0 = SiteSet::singleton(y);
        Configuration::new(slices, geometry)
    };
    let mut worst = 0f64;
    let mut relative = 0f64;
    let mut smallest = f64::INFINITY;
    let mut done = 0;
    while done < pairs {
        let c1 = make(0)?;
        let c2 = make(4)?;
        let union = c1.union(&c2, geometry)?;
        let w1 = props.weight(&c1)?;
        let w2 = props.weight(&c2)?;
        let w = props.weight(&union)?;
        let prod = w1 * w2;
        worst = worst.max((w - prod).norm() / prod.norm().max(1.0));
        if prod.norm() > 1e-250 {
            relative = relative.max((w - prod).norm() / prod.norm());
            smallest = smallest.min(prod.norm());
        }
        done += 1;
    }
    Ok(ChainingAudit {
        hamiltonian_defect,
        decomposition_defect: decomposition,
        factorization_pairs: done,
        factorization_defect: worst,
        factorization_relative: relative,
        smallest_product: smallest,
    })
}
