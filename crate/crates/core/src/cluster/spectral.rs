//! Spectral oracles: low-lying spectrum, exact `ln Z_N`, truncated
//! correlations and the `F_z` norm audit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{assemble, ModelSpec};
use crate::lattice::{DEFAULT_DENSE_CAP, PREFERRED_INDEX};
use crate::linalg::{
    eigh, hermitian_norm, lanczos_lowest, spectral_norm, CMat, CVec, LanczosOptions, SparseMatrix,
    C64,
};

/// Eigenvalue separation below which the ground state counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub dense: bool,
    #[serde(skip)]
    pub ground: CVec,
}

/// Lowest two eigenvalues of a Hermitian operator (dense below the cap,
/// restarted Lanczos with deflation above it).
pub fn spectral_report(h: &SparseMatrix) -> Result<SpectralReport> {
    let n = h.dim();
    if n < 2 {
        return Err(Error::Numerical("spectral report needs dimension ≥ 2".into()));
    }
    let defect = h.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    if n <= DEFAULT_DENSE_CAP {
        let eig = eigh(&h.to_dense());
        return Ok(report(eig.values[0], eig.values[1], eig.vector(0), true));
    }
    let apply = |x: &[C64], y: &mut [C64]| h.apply(x, y);
    let opts = LanczosOptions::default();
    let first = lanczos_lowest(apply, n, &[], opts)?;
    let second = lanczos_lowest(apply, n, std::slice::from_ref(&first.vector), opts)?;
    Ok(report(first.value, second.value, first.vector, false))
}

fn report(e0: f64, e1: f64, ground: CVec, dense: bool) -> SpectralReport {
    SpectralReport {
        e0,
        e1,
        gap: e1 - e0,
        degenerate: (e1 - e0).abs() < DEGENERACY_TOL,
        dense,
        ground,
    }
}

/// `ln Z_N = ln⟨e^{-t₀ N H} Ω₀, Ω₀⟩` for any `N` from one diagonalization.
#[derive(Clone, Debug)]
pub struct LogPartitionOracle {
    pub t0: f64,
    pub energies: Vec<f64>,
    /// `|⟨ψ_i, Ω₀⟩|²`.
    pub overlaps: Vec<f64>,
}

impl LogPartitionOracle {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        let n = model.volume().space_dim();
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::CapExceeded {
                what: "dense space dimension",
                size: n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        let h = assemble(model)?.h.to_dense();
        Self::from_hamiltonian(&h, model.t0)
    }

    pub fn from_hamiltonian(h: &CMat, t0: f64) -> Result<Self> {
        let eig = eigh(h);
        let overlaps: Vec<f64> = (0..eig.values.len())
            .map(|i| eig.vectors[(PREFERRED_INDEX, i)].norm_sqr())
            .collect();
        if overlaps.iter().all(|&w| w < 1e-300) {
            return Err(Error::Numerical("Ω₀ is orthogonal to every eigenvector".into()));
        }
        Ok(Self {
            t0,
            energies: eig.values,
            overlaps,
        })
    }

    pub fn ln_z(&self, n: usize) -> Result<f64> {
        let tn = self.t0 * n as f64;
        // Shift by the lowest energy carrying weight for stability.
        let e_ref = self
            .energies
            .iter()
            .zip(&self.overlaps)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&e, _)| e)
            .fold(f64::INFINITY, f64::min);
        let s: f64 = self
            .energies
            .iter()
            .zip(&self.overlaps)
            .map(|(&e, &w)| w * (-tn * (e - e_ref)).exp())
            .sum();
        if s <= 0.0 {
            return Err(Error::Numerical(format!("Z_{n} is not positive")));
        }
        Ok(-tn * e_ref + s.ln())
    }

    /// Lowest excitation energy above `E₀` whose eigenvector overlaps `Ω₀`.
    pub fn visible_gap(&self, threshold: f64) -> Option<f64> {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .zip(&self.overlaps)
            .find(|(&e, &w)| e - e0 > DEGENERACY_TOL && w > threshold)
            .map(|(&e, _)| e - e0)
    }
}

pub fn exact_log_partition(model: &ModelSpec, n: usize) -> Result<f64> {
    LogPartitionOracle::new(model)?.ln_z(n)
}

/// `⟨A₁A₂⟩ − ⟨A₁⟩⟨A₂⟩` in the ground state `psi` (normalized).
pub fn truncated_correlation_in(psi: &CVec, a1: &SparseMatrix, a2: &SparseMatrix) -> C64 {
    let a2psi = a2.mul_vec(psi);
    let a1psi = a1.mul_vec(psi);
    let both = a1.mul_vec(&a2psi);
    psi.dotc(&both) - psi.dotc(&a1psi) * psi.dotc(&a2psi)
}

/// Truncated correlation in the ground state of `h`.
pub fn truncated_correlation(h: &SparseMatrix, a1: &SparseMatrix, a2: &SparseMatrix) -> Result<f64> {
    let rep = spectral_report(h)?;
    if rep.degenerate {
        return Err(Error::DegenerateGroundState(rep.gap));
    }
    let psi = &rep.ground / C64::new(rep.ground.norm(), 0.0);
    Ok(truncated_correlation_in(&psi, a1, a2).re)
}

/// Least-squares slope and residual norm of `ln|y|` against `x`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

/// Fits `|y| ≈ e^{b - rate·x}`; points with `|y|` below `floor` are skipped.
pub fn fit_log_decay(xs: &[f64], ys: &[f64], floor: f64) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| y.abs() > floor && y.is_finite())
        .map(|(&x, &y)| (x, y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        .sqrt();
    Some(DecayFit {
        rate: -slope,
        intercept,
        residual,
        points: pts.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FzAudit {
    pub norm: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `‖|M−z|^{-1/2} Φ_r |M−z|^{-1/2}‖` with `M = H₀ + Φ_b`, against
/// `sup_{λ∈σ(M)} α(λ + ‖Φ_b‖)/|λ − z|`.
pub fn fz_norm_audit(h0: &CMat, phi_r: &CMat, phi_b: &CMat, alpha: f64, z: C64) -> Result<FzAudit> {
    let m = h0 + phi_b;
    let eig = eigh(&m);
    let scale = eig.values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if eig.values.iter().any(|&l| (C64::new(l, 0.0) - z).norm() < 1e-12 * scale) {
        return Err(Error::InSpectrum(z));
    }
    let root = eig.apply_fn(|l| C64::new((C64::new(l, 0.0) - z).norm().powf(-0.5), 0.0));
    let f = &root * phi_r * &root;
    let norm = spectral_norm(&f);
    let nb = hermitian_norm(phi_b);
    let bound = eig
        .values
        .iter()
        .map(|&l| alpha * (l + nb) / (C64::new(l, 0.0) - z).norm())
        .fold(0.0, f64::max);
    Ok(FzAudit {
        norm,
        bound,
        ok: norm <= bound + 1e-10,
    })
}
