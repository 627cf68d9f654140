//! Blocked AKLT chain: bond operators `H̄_{k,k+1}`, the factorization of the
//! block ground space and the double-block projectors `G″`.

use serde::Serialize;

use crate::aklt::spin::{bond_projector, Boundary, MAX_CHAIN};
use crate::aklt::vbs::{ab, vbs_basis};
use crate::cluster::spectral::{fit_log_decay, DecayFit};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, hermitian_norm, lanczos_lowest, LanczosOptions, kron_vec, max_abs_diff, min_eigenvalue, orthonormalize,
    matmul, projector_onto, random_hermitian, re, spectral_norm, CMat, CVec, SparseMatrix, C64, ONE,
    ZERO,
};

/// Largest two-block space assembled densely.
pub const DENSE_PAIR_MAX: usize = 4096;

/// How the block ground space is completed to a full identification
/// `(F¹⊕F³)⊗(F²⊕F⁴)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    /// Gram–Schmidt of the canonical basis in index order.
    Canonical,
    /// Canonical completion followed by seeded random bases of `F³` and `F⁴`.
    Randomized(u64),
}

fn check_block_length(l: usize) -> Result<()> {
    if l < 2 || !l.is_multiple_of(2) {
        return Err(Error::InvalidModel(format!(
            "block length must be even and at least 2, got {l}"
        )));
    }
    if 2 * l > MAX_CHAIN {
        return Err(Error::CapExceeded {
            what: "two-block chain length",
            size: 2 * l,
            cap: MAX_CHAIN,
        });
    }
    Ok(())
}

/// Unitary identification of a block with `X ⊗ Y`, `X = F¹⊕F³`, `Y = F²⊕F⁴`,
/// each of dimension `m = 3^{l/2}`, under which `Ω′_{ab} ↦ e_{a−1} ⊗ e_{b−1}`.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub l: usize,
    pub m: usize,
    pub block_dim: usize,
    /// Orthonormalized ground vectors `Ω′_{ab}` (physical basis).
    pub omega_prime: Vec<CVec>,
    /// Rows indexed by `x·m + y`; maps physical block vectors to `X ⊗ Y`.
    pub iso: CMat,
    /// `v¹_a` in `X` coordinates.
    pub v1: [CVec; 2],
    /// `v²_b` in `Y` coordinates.
    pub v2: [CVec; 2],
    /// `v = v²_1 ⊗ v¹_2 − v²_2 ⊗ v¹_1` on `Y_k ⊗ X_{k+1}` (unnormalized).
    pub bond_vector: CVec,
}

fn unit(m: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(m);
    v[i] = ONE;
    v
}

fn random_unitary(n: usize, seed: u64) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    eigh(&random_hermitian(n, 1.0, seed)).vectors
}

impl BlockDecomposition {
    pub fn new(l: usize, completion: Completion) -> Result<Self> {
        check_block_length(l)?;
        let basis = vbs_basis(l)?;
        let omega_prime = basis.orthonormal()?;
        let block_dim = 3usize.pow(l as u32);
        let m = 3usize.pow((l / 2) as u32);
        debug_assert_eq!(m * m, block_dim);

        let mut accepted = omega_prime.clone();
        for i in 0..block_dim {
            if accepted.len() == block_dim {
                break;
            }
            let mut w = unit(block_dim, i);
            for _ in 0..2 {
                for u in &accepted {
                    let c = u.dotc(&w);
                    w.axpy(-c, u, ONE);
                }
            }
            let nrm = w.norm();
            if nrm > 1e-6 {
                accepted.push(w / re(nrm));
            }
        }
        if accepted.len() != block_dim {
            return Err(Error::Numerical("orthonormal completion failed".into()));
        }

        let mut iso = CMat::zeros(block_dim, block_dim);
        let mut next = 4;
        for x in 0..m {
            for y in 0..m {
                let src = if x < 2 && y < 2 {
                    ab(x + 1, y + 1)
                } else {
                    let s = next;
                    next += 1;
                    s
                };
                let row = accepted[src].adjoint();
                iso.row_mut(x * m + y).copy_from(&row);
            }
        }

        if let Completion::Randomized(seed) = completion {
            let mut wx = CMat::identity(m, m);
            let mut wy = CMat::identity(m, m);
            let rx = random_unitary(m - 2, seed);
            let ry = random_unitary(m - 2, seed.wrapping_add(0x9e37_79b9));
            wx.view_mut((2, 2), (m - 2, m - 2)).copy_from(&rx);
            wy.view_mut((2, 2), (m - 2, m - 2)).copy_from(&ry);
            iso = wx.kronecker(&wy) * iso;
        }

        let v1 = [unit(m, 0), unit(m, 1)];
        let v2 = [unit(m, 0), unit(m, 1)];
        let bond_vector = kron_vec(&v2[0], &v1[1]) - kron_vec(&v2[1], &v1[0]);
        Ok(Self {
            l,
            m,
            block_dim,
            omega_prime,
            iso,
            v1,
            v2,
            bond_vector,
        })
    }

    /// `max |U U† − 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let uu = &self.iso * self.iso.adjoint();
        max_abs_diff(&uu, &CMat::identity(self.block_dim, self.block_dim))
    }

    /// `‖U†(P_{F¹} ⊗ P_{F²})U − G_Λ‖`.
    pub fn ground_image_distance(&self) -> f64 {
        let p = kron_dense(&self.f_projector(), &self.f_projector());
        let image = matmul(&matmul(&self.iso.adjoint(), &p), &self.iso);
        let g = projector_onto(&self.omega_prime);
        hermitian_norm(&(image - g))
    }

    /// `max |⟨Ω′_i, Ω′_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = CMat::from_fn(4, 4, |i, j| self.omega_prime[i].dotc(&self.omega_prime[j]));
        max_abs_diff(&g, &CMat::identity(4, 4))
    }

    /// Projector onto the two-dimensional `F¹` (or `F²`) inside `X` (or `Y`).
    pub fn f_projector(&self) -> CMat {
        let mut p = CMat::zeros(self.m, self.m);
        p[(0, 0)] = ONE;
        p[(1, 1)] = ONE;
        p
    }

    /// Normalized bond vector `v̂`.
    pub fn bond_unit(&self) -> CVec {
        let n = self.bond_vector.norm();
        &self.bond_vector / re(n)
    }

    /// `Ω″_{ab} = Ω′_{a1} ⊗ Ω′_{2b} − Ω′_{a2} ⊗ Ω′_{1b}` on two blocks.
    pub fn omega_pp(&self) -> Vec<CVec> {
        let o = &self.omega_prime;
        let mut out = Vec::with_capacity(4);
        for a in 1..=2 {
            for b in 1..=2 {
                out.push(
                    kron_vec(&o[ab(a, 1)], &o[ab(2, b)]) - kron_vec(&o[ab(a, 2)], &o[ab(1, b)]),
                );
            }
        }
        out
    }

    /// Orthonormal basis of the range of `G″`.
    pub fn omega_pp_orthonormal(&self) -> Vec<CVec> {
        orthonormalize(&self.omega_pp(), 1e-12)
    }
}

fn kron_dense(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `H̄_{0,1}` on two adjacent blocks (`2l` sites).
pub fn hbar_pair(l: usize) -> Result<SparseMatrix> {
    check_block_length(l)?;
    let n = 2 * l;
    let dim = 3usize.pow(n as u32);
    let mut terms: Vec<(C64, SparseMatrix)> = vec![];
    for s in 0..n - 1 {
        let w = if s == l - 1 { 1.0 } else { 0.5 };
        terms.push((re(w), bond_projector(n, s, s + 1)));
    }
    let refs: Vec<(C64, &SparseMatrix)> = terms.iter().map(|(c, m)| (*c, m)).collect();
    Ok(SparseMatrix::linear_combination(dim, &refs))
}

/// `H̄_{k,k+1}` for `k = 0..n_blocks` on the periodic chain of `l·n_blocks`
/// sites.
pub fn blocked_hbar(l: usize, n_blocks: usize) -> Result<Vec<SparseMatrix>> {
    check_block_length(l)?;
    if n_blocks < 2 {
        return Err(Error::InvalidModel("need at least two blocks".into()));
    }
    let n = l * n_blocks;
    if n > MAX_CHAIN {
        return Err(Error::CapExceeded {
            what: "chain length",
            size: n,
            cap: MAX_CHAIN,
        });
    }
    let dim = 3usize.pow(n as u32);
    let intra = |k: usize| -> Vec<(usize, usize)> {
        (0..l - 1).map(|j| (k * l + j, k * l + j + 1)).collect()
    };
    let mut out = vec![];
    for k in 0..n_blocks {
        let k1 = (k + 1) % n_blocks;
        let mut terms: Vec<(C64, SparseMatrix)> = vec![];
        for (a, b) in intra(k).into_iter().chain(intra(k1)) {
            terms.push((re(0.5), bond_projector(n, a, b)));
        }
        terms.push((ONE, bond_projector(n, k * l + l - 1, k1 * l)));
        let refs: Vec<(C64, &SparseMatrix)> = terms.iter().map(|(c, m)| (*c, m)).collect();
        out.push(SparseMatrix::linear_combination(dim, &refs));
    }
    Ok(out)
}

/// `max |Σ_k H̄_{k,k+1} − H^p|`.
pub fn hbar_sum_defect(l: usize, n_blocks: usize) -> Result<f64> {
    let parts = blocked_hbar(l, n_blocks)?;
    let n = l * n_blocks;
    let refs: Vec<&SparseMatrix> = parts.iter().collect();
    let sum = SparseMatrix::sum(3usize.pow(n as u32), &refs);
    let hp = crate::aklt::spin::aklt_hamiltonian(n, Boundary::Periodic)?;
    Ok(sum.max_abs_diff(&hp))
}

/// Dense `H̄_{0,1}` and `G″_{0,1}` on two blocks.
pub fn dense_pair(dec: &BlockDecomposition) -> Result<(CMat, CMat)> {
    let dim = dec.block_dim * dec.block_dim;
    if dim > DENSE_PAIR_MAX {
        return Err(Error::CapExceeded {
            what: "dense two-block dimension",
            size: dim,
            cap: DENSE_PAIR_MAX,
        });
    }
    let h = hbar_pair(dec.l)?.to_dense();
    let g = projector_onto(&dec.omega_pp());
    Ok((h, g))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSpectrum {
    pub l: usize,
    pub kernel_dim: usize,
    /// `min eig (H̄ − γ̂/2 (1 − G_{Λ_k∪Λ_{k+1}}))`.
    pub sg_min_eig: f64,
}

/// Kernel dimension of `H̄_{0,1}` and the lower bound by the gap.
pub fn pair_spectrum(l: usize, gamma_hat: f64) -> Result<PairSpectrum> {
    check_block_length(l)?;
    let dim = 3usize.pow(2 * l as u32);
    if dim > DENSE_PAIR_MAX {
        return Err(Error::CapExceeded {
            what: "dense two-block dimension",
            size: dim,
            cap: DENSE_PAIR_MAX,
        });
    }
    let h = hbar_pair(l)?.to_dense();
    let kernel_dim = crate::linalg::eigvalsh(&h)
        .into_iter()
        .filter(|e| e.abs() < crate::aklt::spin::KERNEL_TOL)
        .count();
    let g = projector_onto(&vbs_basis(2 * l)?.vectors);
    let shifted = h - (CMat::identity(dim, dim) - g) * re(gamma_hat / 2.0);
    Ok(PairSpectrum {
        l,
        kernel_dim,
        sg_min_eig: min_eigenvalue(&shifted),
    })
}

/// `min eig (H̄_{0,1} − γ̂/2 (1 − G_{Λ_0∪Λ_1}))`, densely when the two-block
/// space is small and by Lanczos otherwise.
pub fn sg_min_eig(l: usize, gamma_hat: f64) -> Result<f64> {
    let dim = 3usize.pow(2 * l as u32);
    if dim <= DENSE_PAIR_MAX {
        return Ok(pair_spectrum(l, gamma_hat)?.sg_min_eig);
    }
    let h = hbar_pair(l)?;
    let q = orthonormalize(&vbs_basis(2 * l)?.vectors, 1e-12);
    let c = re(gamma_hat / 2.0);
    let apply = |x: &[C64], y: &mut [C64]| {
        h.apply(x, y);
        let xv = CVec::from_column_slice(x);
        let mut gx = CVec::zeros(x.len());
        for u in &q {
            gx.axpy(u.dotc(&xv), u, ONE);
        }
        for i in 0..x.len() {
            y[i] -= c * (x[i] - gx[i]);
        }
    };
    Ok(lanczos_lowest(apply, dim, &[], LanczosOptions::default())?.value)
}

/// `‖G″_{0,1} − G_{Λ_0∪Λ_1}‖`, the sine of the largest principal angle
/// between the two four-dimensional ranges.
pub fn gpp_distance(l: usize) -> Result<f64> {
    let dec = BlockDecomposition::new(l, Completion::Canonical)?;
    let q1 = dec.omega_pp_orthonormal();
    let q2 = orthonormalize(&vbs_basis(2 * l)?.vectors, 1e-12);
    if q1.len() != 4 || q2.len() != 4 {
        return Err(Error::Numerical("ground space rank is not four".into()));
    }
    let resid: Vec<CVec> = q1
        .iter()
        .map(|x| {
            let mut r = x.clone();
            for u in &q2 {
                let c = u.dotc(&r);
                r.axpy(-c, u, ONE);
            }
            r
        })
        .collect();
    let gram = CMat::from_fn(4, 4, |i, j| resid[i].dotc(&resid[j]));
    Ok(crate::linalg::max_eigenvalue(&gram).max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct GppPoint {
    pub l: usize,
    pub distance: f64,
}

pub fn gpp_decay(ls: &[usize]) -> Result<(Vec<GppPoint>, Option<DecayFit>)> {
    let pts = ls
        .iter()
        .map(|&l| Ok(GppPoint { l, distance: gpp_distance(l)? }))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = pts.iter().map(|p| p.l as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.distance).collect();
    Ok((pts, fit_log_decay(&xs, &ys, 1e-300)))
}

/// Coordinates of a two-block vector `ψ` in the basis `Ω′_a ⊗ e_f`
/// (first block reduced) or `e_f ⊗ Ω′_c` (second block reduced).
fn reduce_first(psi: &CVec, op: &[CVec], n: usize) -> CVec {
    let mut out = CVec::zeros(4 * n);
    for (a, w) in op.iter().enumerate() {
        for f in 0..n {
            let mut s = ZERO;
            for x in 0..n {
                s += w[x].conj() * psi[x * n + f];
            }
            out[a * n + f] = s;
        }
    }
    out
}

fn reduce_second(psi: &CVec, op: &[CVec], n: usize) -> CVec {
    let mut out = CVec::zeros(n * 4);
    for f in 0..n {
        for (c, w) in op.iter().enumerate() {
            let mut s = ZERO;
            for x in 0..n {
                s += w[x].conj() * psi[f * n + x];
            }
            out[f * 4 + c] = s;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorAudit {
    pub l: usize,
    /// `‖[G″_{k−1,k}, G″_{k,k+1}]‖` on three consecutive blocks.
    pub norm: f64,
    /// Weight of `Ω″` lost by the reduction (zero when the reduction is exact).
    pub reduction_leak: f64,
}

/// `‖[G″_{0,1} ⊗ 1, 1 ⊗ G″_{1,2}]‖` on three blocks. Both projectors have range
/// inside `G_{Λ_0} ⊗ H_{Λ_1} ⊗ G_{Λ_2}` and vanish on its complement, so the
/// commutator is computed exactly on that subspace of dimension `16·3^l`.
pub fn gpp_commutator(l: usize) -> Result<CommutatorAudit> {
    let dec = BlockDecomposition::new(l, Completion::Canonical)?;
    let n = dec.block_dim;
    let opp = dec.omega_pp_orthonormal();
    let op = &dec.omega_prime;
    let mut leak = 0f64;
    let left: Vec<CVec> = opp
        .iter()
        .map(|psi| {
            let c = reduce_first(psi, op, n);
            leak = leak.max((1.0 - c.norm_squared()).abs());
            c
        })
        .collect();
    let right: Vec<CVec> = opp
        .iter()
        .map(|psi| {
            let c = reduce_second(psi, op, n);
            leak = leak.max((1.0 - c.norm_squared()).abs());
            c
        })
        .collect();
    let pr = left.iter().fold(CMat::zeros(4 * n, 4 * n), |acc, c| acc + c * c.adjoint());
    let qr = right.iter().fold(CMat::zeros(4 * n, 4 * n), |acc, c| acc + c * c.adjoint());
    let id4 = CMat::identity(4, 4);
    let p = pr.kronecker(&id4);
    let q = id4.kronecker(&qr);
    let comm = matmul(&p, &q) - matmul(&q, &p);
    Ok(CommutatorAudit {
        l,
        // `i[P, Q]` is Hermitian.
        norm: hermitian_norm(&(comm * C64::i())),
        reduction_leak: leak,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorAudit {
    pub l: usize,
    /// `max ‖[G″_{0,1}, T ⊗ 1]‖` over operators `T` acting as identity on
    /// `F²` inside `G_{Λ_0}` and arbitrarily on its complement.
    pub left_norm: f64,
    /// Same on the second block with the roles of `F¹`, `F²` exchanged.
    pub right_norm: f64,
    pub trials: usize,
}

impl FactorAudit {
    pub fn max_norm(&self) -> f64 {
        self.left_norm.max(self.right_norm)
    }
}

/// Checks that `G″_{0,1}` acts on the first block only through `F²` and on
/// the second only through `F¹`.
pub fn factor_audit(l: usize, trials: usize, seed: u64) -> Result<FactorAudit> {
    let dec = BlockDecomposition::new(l, Completion::Canonical)?;
    let (_, g) = dense_pair(&dec)?;
    let n = dec.block_dim;
    let op = &dec.omega_prime;
    let gproj = projector_onto(op);
    let gperp = CMat::identity(n, n) - &gproj;
    let id = CMat::identity(n, n);
    let mut left_norm = 0f64;
    let mut right_norm = 0f64;
    for t in 0..trials {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(t as u64);
        let a = random_hermitian(2, 1.0, s) + CMat::from_fn(2, 2, |i, j| C64::new(0.0, 0.3 * (i as f64 - j as f64)));
        let bulk = random_hermitian(n, 1.0, s ^ 0x5555);
        let comp = &gperp * &bulk * &gperp;
        let mut tl = comp.clone();
        let mut tr = comp.clone();
        for x in 1..=2 {
            for y in 1..=2 {
                for z in 1..=2 {
                    // T_left: A on the F¹ index; T_right: A on the F² index.
                    tl += &op[ab(x, z)] * op[ab(y, z)].adjoint() * a[(x - 1, y - 1)];
                    tr += &op[ab(z, x)] * op[ab(z, y)].adjoint() * a[(x - 1, y - 1)];
                }
            }
        }
        let tl = tl.kronecker(&id);
        let tr = id.kronecker(&tr);
        left_norm = left_norm.max(spectral_norm(&(&g * &tl - &tl * &g)));
        right_norm = right_norm.max(spectral_norm(&(&g * &tr - &tr * &g)));
    }
    Ok(FactorAudit {
        l,
        left_norm,
        right_norm,
        trials,
    })
}

/// `‖φ^(b)_{0,1}‖` with `φ^(b) = H̄ − (1−G″)H̄(1−G″)`. The operator has range
/// in `span{Ω″, H̄Ω″}` and vanishes on its complement, so the norm is
/// computed on that (at most eight-dimensional) subspace.
pub fn phi_b_norm(l: usize) -> Result<f64> {
    let dec = BlockDecomposition::new(l, Completion::Canonical)?;
    let h = hbar_pair(l)?;
    let opp = dec.omega_pp_orthonormal();
    let mut span = opp.clone();
    span.extend(opp.iter().map(|v| h.mul_vec(v)));
    let q = orthonormalize(&span, 1e-10);
    let k = q.len();
    let hq: Vec<CVec> = q.iter().map(|v| h.mul_vec(v)).collect();
    let hr = CMat::from_fn(k, k, |i, j| q[i].dotc(&hq[j]));
    let c = CMat::from_fn(k, opp.len(), |i, j| q[i].dotc(&opp[j]));
    let g = &c * c.adjoint();
    let p = CMat::identity(k, k) - g;
    let phi = &hr - &p * &hr * &p;
    Ok(hermitian_norm(&crate::linalg::hermitian_part(&phi)))
}
