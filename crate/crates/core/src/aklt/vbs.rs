//! Valence-bond-solid basis `Ω_{Λ;ab}`, Gram matrices and chain gaps.

use serde::Serialize;

use crate::aklt::spin::{
    aklt_hamiltonian, bond_projector, bonds, sector_operator, Boundary, KERNEL_TOL,
};
use crate::cluster::spectral::{fit_log_decay, DecayFit};
use crate::error::{Error, Result};
use crate::linalg::{
    eigvalsh, kron_vec, lanczos_lowest, orthonormalize, CMat, CVec, LanczosOptions, C64, ZERO,
};

/// Index of `(a, b)`, `a, b ∈ {1, 2}`, in the four-vector family.
pub fn ab(a: usize, b: usize) -> usize {
    2 * (a - 1) + (b - 1)
}

/// Four VBS vectors of an `n`-site open chain in the raw normalization fixed
/// by the gluing rule; `vectors[ab(a, b)]`.
#[derive(Clone, Debug)]
pub struct VbsBasis {
    pub n: usize,
    pub vectors: Vec<CVec>,
}

impl VbsBasis {
    /// Single site: the symmetric (spin-1) part of two boundary spins,
    /// scaled by `√(2/3)`.
    pub fn seed() -> Self {
        let c = (2.0f64 / 3.0).sqrt();
        let e = |i: usize, s: f64| {
            let mut v = CVec::zeros(3);
            v[i] = C64::new(s, 0.0);
            v
        };
        Self {
            n: 1,
            vectors: vec![
                e(0, c),
                e(1, c / 2f64.sqrt()),
                e(1, c / 2f64.sqrt()),
                e(2, c),
            ],
        }
    }

    /// `Ω_{Λ₁∪Λ₂;ab} = Ω_{Λ₁;a1} ⊗ Ω_{Λ₂;2b} − Ω_{Λ₁;a2} ⊗ Ω_{Λ₂;1b}`.
    pub fn glue(&self, right: &VbsBasis) -> Self {
        let mut vectors = Vec::with_capacity(4);
        for a in 1..=2 {
            for b in 1..=2 {
                let first = kron_vec(&self.vectors[ab(a, 1)], &right.vectors[ab(2, b)]);
                let second = kron_vec(&self.vectors[ab(a, 2)], &right.vectors[ab(1, b)]);
                vectors.push(first - second);
            }
        }
        Self {
            n: self.n + right.n,
            vectors,
        }
    }

    /// Raw Gram matrix `⟨Ω_{ab}, Ω_{cd}⟩`.
    pub fn raw_gram(&self) -> CMat {
        CMat::from_fn(4, 4, |i, j| self.vectors[i].dotc(&self.vectors[j]))
    }

    /// Gram matrix in the normalization whose diagonal tends to 1 (twice the
    /// raw Gram matrix).
    pub fn gram(&self) -> CMat {
        self.raw_gram() * C64::new(2.0, 0.0)
    }

    /// `Ω'_{ab} = Σ (g^{-1/2})_{ab,cd} Ω_{cd}`, an orthonormal basis of the
    /// ground space.
    pub fn orthonormal(&self) -> Result<Vec<CVec>> {
        let g = crate::linalg::eigh(&self.raw_gram());
        if g.values[0] <= 1e-12 * g.values[3] {
            return Err(Error::Numerical("VBS Gram matrix is singular".into()));
        }
        let inv_sqrt = g.apply_fn(|l| C64::new(l.powf(-0.5), 0.0));
        Ok((0..4)
            .map(|i| {
                let mut v = CVec::zeros(self.vectors[0].len());
                for j in 0..4 {
                    v.axpy(inv_sqrt[(i, j)], &self.vectors[j], C64::new(1.0, 0.0));
                }
                v
            })
            .collect())
    }

    /// `Ω_{12} − Ω_{21}`.
    pub fn periodic_ground(&self) -> CVec {
        &self.vectors[ab(1, 2)] - &self.vectors[ab(2, 1)]
    }
}

/// VBS basis of an `n`-site chain by repeated gluing of single sites.
pub fn vbs_basis(n: usize) -> Result<VbsBasis> {
    if n == 0 || n > crate::aklt::spin::MAX_CHAIN {
        return Err(Error::CapExceeded {
            what: "VBS chain length",
            size: n,
            cap: crate::aklt::spin::MAX_CHAIN,
        });
    }
    let seed = VbsBasis::seed();
    let mut basis = seed.clone();
    for _ in 1..n {
        basis = basis.glue(&seed);
    }
    Ok(basis)
}

/// `max_cut max_ab |Ω_{n;ab} − glue(Ω_m, Ω_{n−m})_{ab}|`.
pub fn property1_defect(n: usize) -> Result<f64> {
    let full = vbs_basis(n)?;
    let mut worst = 0f64;
    for m in 1..n {
        let glued = vbs_basis(m)?.glue(&vbs_basis(n - m)?);
        for (a, b) in full.vectors.iter().zip(&glued.vectors) {
            worst = worst.max((a - b).camax());
        }
    }
    Ok(worst)
}

/// `max_{bond, ab} ‖P^(2)_bond Ω_{ab}‖` on the open chain.
pub fn frustration_residual(n: usize) -> Result<f64> {
    let basis = vbs_basis(n)?;
    let mut worst = 0f64;
    for (a, b) in bonds(n, Boundary::Free) {
        let p = bond_projector(n, a, b);
        for v in &basis.vectors {
            worst = worst.max(p.mul_vec(v).norm());
        }
    }
    Ok(worst)
}

/// `‖H^p (Ω_{12} − Ω_{21})‖ / ‖Ω_{12} − Ω_{21}‖`.
pub fn periodic_ground_residual(n: usize) -> Result<f64> {
    let v = vbs_basis(n)?.periodic_ground();
    let h = aklt_hamiltonian(n, Boundary::Periodic)?;
    Ok(h.mul_vec(&v).norm() / v.norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct GramPoint {
    pub n: usize,
    pub defect: f64,
    pub min_eig: f64,
    pub hermiticity: f64,
}

/// `‖g_n − 1‖` (spectral) for each `n`, with a fitted decay rate.
pub fn gram_decay(ns: &[usize]) -> Result<(Vec<GramPoint>, Option<DecayFit>)> {
    let mut pts = vec![];
    for &n in ns {
        let g = vbs_basis(n)?.gram();
        let diff = &g - CMat::identity(4, 4);
        pts.push(GramPoint {
            n,
            defect: crate::linalg::hermitian_norm(&crate::linalg::hermitian_part(&diff)),
            min_eig: crate::linalg::min_eigenvalue(&g),
            hermiticity: crate::linalg::hermiticity_defect(&g),
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.defect).collect();
    let fit = fit_log_decay(&xs, &ys, 1e-300);
    Ok((pts, fit))
}

/// Largest chain diagonalized densely (sector by sector) for gaps.
const DENSE_GAP_MAX: usize = 8;

/// Smallest eigenvalue of `H` on the orthogonal complement of its kernel.
pub fn chain_gap(n: usize, bc: Boundary) -> Result<f64> {
    let h = aklt_hamiltonian(n, bc)?;
    // Every SU(2) multiplet of integer spin has an `S^z = 0` member, so the gap
    // is attained inside that sector.
    let (block, idx) = sector_operator(&h, n, 0);
    if n <= DENSE_GAP_MAX {
        return eigvalsh(&block.to_dense())
            .into_iter()
            .find(|&e| e >= KERNEL_TOL)
            .ok_or(Error::Numerical("no excited state".into()));
    }
    let basis = vbs_basis(n)?;
    let ground = match bc {
        Boundary::Free => vec![
            basis.vectors[ab(1, 2)].clone(),
            basis.vectors[ab(2, 1)].clone(),
        ],
        Boundary::Periodic => vec![basis.periodic_ground()],
    };
    let restricted: Vec<CVec> = ground
        .iter()
        .map(|v| CVec::from_iterator(idx.len(), idx.iter().map(|&i| v[i])))
        .collect();
    let kernel = orthonormalize(&restricted, 1e-12);
    let opts = LanczosOptions {
        krylov_dim: 150,
        ..LanczosOptions::default()
    };
    let res = lanczos_lowest(|x, y| block.apply(x, y), block.dim(), &kernel, opts)?;
    Ok(res.value)
}

/// Gap of `H^f_Λ` above its four-dimensional ground space.
pub fn free_gap(n: usize) -> Result<f64> {
    chain_gap(n, Boundary::Free)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapPoint {
    pub n: usize,
    pub gap: f64,
    pub running_min: f64,
}

/// Gap sequence with its running minimum `γ̂`.
pub fn gap_sequence(ns: &[usize], bc: Boundary) -> Result<Vec<GapPoint>> {
    let mut out = vec![];
    let mut run = f64::INFINITY;
    for &n in ns {
        let gap = chain_gap(n, bc)?;
        run = run.min(gap);
        out.push(GapPoint {
            n,
            gap,
            running_min: run,
        });
    }
    Ok(out)
}

/// `γ̂ = min_{2≤n≤n_max}` free-chain gap.
pub fn gamma_hat(n_max: usize) -> Result<f64> {
    let ns: Vec<usize> = (2..=n_max).collect();
    Ok(gap_sequence(&ns, Boundary::Free)?
        .last()
        .map(|p| p.running_min)
        .unwrap_or(f64::INFINITY))
}

/// `Ω_{ab}` with all entries below `tol` set to zero (for display).
pub fn chop(v: &CVec, tol: f64) -> CVec {
    v.map(|z| if z.norm() < tol { ZERO } else { z })
}
