//! Model assembly, classical-term diagnostics, relative form bounds, the
//! gapped split and the block transform.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{embed_matrix, extend_to_sites, Geometry, SiteSet, Volume, PREFERRED_INDEX};
use crate::linalg::{
    check_hermitian, eigh, is_psd, max_abs, min_eigenvalue, re, CMat, CVec, SparseMatrix, C64,
    HERMITIAN_TOL, PSD_TOL,
};

/// Bisection resolution for relative bounds.
pub const ALPHA_RESOLUTION: f64 = 1e-8;

/// How the relative bound of `φ^(r)` is certified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Each local term satisfies `|φ_x^(r)| ≤ α h_x`.
    #[default]
    Local,
    /// Only the summed condition `|Σ_{x∈I} φ_x^(r)| ≤ α H_0` for every `I`.
    Collective,
}

/// A translation-invariant model: classical `h` and perturbation terms on
/// `Λ₀ + x` for every site `x`.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub geometry: Geometry,
    pub h: CMat,
    pub phi_r: Option<CMat>,
    pub phi_b: Option<CMat>,
    pub t0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bound_mode: BoundMode,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalDiagnostics {
    pub offdiag_max: f64,
    pub kernel_dim: usize,
    pub omega_in_kernel: bool,
    pub gap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelDiagnostics {
    pub classical: ClassicalDiagnostics,
    pub alpha_star: Option<f64>,
    pub phi_b_norm: Option<f64>,
    pub collective_min_eig: Option<f64>,
}

impl ModelSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        volume: Volume,
        lambda0: Vec<Vec<i64>>,
        h: CMat,
        phi_r: Option<CMat>,
        phi_b: Option<CMat>,
        t0: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let model = Self::unchecked(volume, lambda0, h, phi_r, phi_b, t0, alpha, beta)?;
        model.validate()?;
        Ok(model)
    }

    /// Builds the model, checking dimensions and Hermiticity only.
    #[allow(clippy::too_many_arguments)]
    pub fn unchecked(
        volume: Volume,
        lambda0: Vec<Vec<i64>>,
        h: CMat,
        phi_r: Option<CMat>,
        phi_b: Option<CMat>,
        t0: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let geometry = Geometry::new(volume, lambda0)?;
        let local_dim = geometry
            .volume
            .site_dim()
            .pow(geometry.lambda0_size() as u32);
        for m in std::iter::once(&h).chain(phi_r.iter()).chain(phi_b.iter()) {
            if m.nrows() != local_dim || m.ncols() != local_dim {
                return Err(Error::DimensionMismatch {
                    expected: local_dim,
                    found: m.nrows(),
                });
            }
            check_hermitian(m)?;
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidModel(format!("t0 = {t0} must be positive")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidModel(format!("alpha = {alpha} outside [0, 1)")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidModel(format!("beta = {beta} must be nonnegative")));
        }
        Ok(Self {
            geometry,
            h,
            phi_r,
            phi_b,
            t0,
            alpha,
            beta,
            bound_mode: BoundMode::Local,
        })
    }

    pub fn with_bound_mode(mut self, mode: BoundMode) -> Result<Self> {
        self.bound_mode = mode;
        self.validate()?;
        Ok(self)
    }

    pub fn volume(&self) -> &Volume {
        &self.geometry.volume
    }

    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    pub fn local_dim(&self) -> usize {
        self.h.nrows()
    }

    /// Total local perturbation `φ = φ^(r) + φ^(b)`.
    pub fn phi(&self) -> CMat {
        let n = self.local_dim();
        let mut p = CMat::zeros(n, n);
        if let Some(r) = &self.phi_r {
            p += r;
        }
        if let Some(b) = &self.phi_b {
            p += b;
        }
        p
    }

    pub fn has_perturbation(&self) -> bool {
        self.phi_r.is_some() || self.phi_b.is_some()
    }

    /// Checks the model invariants, returning diagnostics on success.
    pub fn validate(&self) -> Result<ModelDiagnostics> {
        let classical = validate_classical(&self.h);
        if !classical.pass {
            return Err(Error::InvalidModel(format!(
                "classical term fails: offdiag {:.3e}, kernel dim {}, gap {:.6}",
                classical.offdiag_max, classical.kernel_dim, classical.gap
            )));
        }
        let mut diag = ModelDiagnostics {
            classical,
            alpha_star: None,
            phi_b_norm: None,
            collective_min_eig: None,
        };
        if let Some(b) = &self.phi_b {
            let norm = crate::linalg::hermitian_norm(b);
            diag.phi_b_norm = Some(norm);
            if norm > self.beta + HERMITIAN_TOL * self.beta.max(1.0) {
                return Err(Error::InvalidModel(format!(
                    "‖φ^(b)‖ = {norm} exceeds beta = {}",
                    self.beta
                )));
            }
        }
        if let Some(r) = &self.phi_r {
            match self.bound_mode {
                BoundMode::Local => {
                    let cert = minimal_alpha(r, &self.h, 0.0)?;
                    diag.alpha_star = Some(cert.alpha_star);
                    if !cert.feasible || cert.alpha_star > self.alpha + ALPHA_RESOLUTION {
                        return Err(Error::InvalidModel(format!(
                            "certified alpha {} exceeds model alpha {}",
                            cert.alpha_star, self.alpha
                        )));
                    }
                }
                BoundMode::Collective => {
                    let a = assemble(self)?;
                    let h0 = a.h0.to_dense();
                    let terms: Vec<CMat> = (0..self.n_sites())
                        .map(|x| self.embedded_phi_r(x).unwrap().to_dense())
                        .collect();
                    let audit = wcond_audit(&terms, &h0, self.alpha);
                    diag.collective_min_eig = Some(audit.worst_min_eig);
                    if !audit.ok {
                        return Err(Error::InvalidModel(format!(
                            "collective bound fails for subset {:?} (min eig {:.3e})",
                            audit.worst_subset, audit.worst_min_eig
                        )));
                    }
                }
            }
        }
        Ok(diag)
    }

    fn embed_local(&self, m: &CMat, x: usize) -> SparseMatrix {
        embed_matrix(
            m,
            self.geometry.translate(x).sites(),
            self.n_sites(),
            self.volume().site_dim(),
        )
    }

    pub fn embedded_h(&self, x: usize) -> SparseMatrix {
        self.embed_local(&self.h, x)
    }

    pub fn embedded_phi(&self, x: usize) -> SparseMatrix {
        self.embed_local(&self.phi(), x)
    }

    pub fn embedded_phi_r(&self, x: usize) -> Option<SparseMatrix> {
        self.phi_r.as_ref().map(|m| self.embed_local(m, x))
    }

    pub fn embedded_phi_b(&self, x: usize) -> Option<SparseMatrix> {
        self.phi_b.as_ref().map(|m| self.embed_local(m, x))
    }

    /// `Σ_{x∈S} h_x`.
    pub fn classical_sum(&self, sites: SiteSet) -> SparseMatrix {
        let terms: Vec<SparseMatrix> = sites.iter().map(|x| self.embedded_h(x)).collect();
        let refs: Vec<&SparseMatrix> = terms.iter().collect();
        SparseMatrix::sum(self.volume().space_dim(), &refs)
    }
}

/// Diagnostics for the classical term (diagonal, simple kernel at `Ω`, gap ≥ 1).
pub fn validate_classical(h: &CMat) -> ClassicalDiagnostics {
    let n = h.nrows();
    let mut offdiag_max: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                offdiag_max = offdiag_max.max(h[(i, j)].norm());
            }
        }
    }
    let tol = HERMITIAN_TOL * max_abs(h).max(1.0);
    let values = eigh(h).values;
    let kernel_dim = values.iter().filter(|v| v.abs() <= tol.max(1e-10)).count();
    let omega_in_kernel = (0..n).all(|i| h[(i, PREFERRED_INDEX)].norm() <= tol);
    // Spectrum on Ω⊥: drop the row and column of Ω when Ω is an eigenvector.
    let gap = if n > 1 && omega_in_kernel {
        let sub = h.clone().remove_row(PREFERRED_INDEX).remove_column(PREFERRED_INDEX);
        min_eigenvalue(&sub)
    } else {
        f64::NAN
    };
    let pass = offdiag_max <= tol && kernel_dim == 1 && omega_in_kernel && gap >= 1.0 - tol;
    ClassicalDiagnostics {
        offdiag_max,
        kernel_dim,
        omega_in_kernel,
        gap,
        pass,
    }
}

#[derive(Clone, Debug)]
pub struct BoundCertificate {
    pub alpha_star: f64,
    pub beta_used: f64,
    pub witness: CVec,
    pub feasible: bool,
    /// Minimal eigenvalues of `α*h + β - φ` and `α*h + β + φ`.
    pub min_eig_upper: f64,
    pub min_eig_lower: f64,
}

fn bound_holds(phi: &CMat, h: &CMat, alpha: f64, beta: f64) -> bool {
    let base = h * re(alpha) + CMat::identity(h.nrows(), h.ncols()) * re(beta);
    is_psd(&(&base - phi), PSD_TOL) && is_psd(&(&base + phi), PSD_TOL)
}

/// Smallest `α ≥ 0` with `-αh - β ≤ φ ≤ αh + β`, by bisection.
pub fn minimal_alpha(phi: &CMat, h: &CMat, beta: f64) -> Result<BoundCertificate> {
    if phi.shape() != h.shape() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: phi.nrows(),
        });
    }
    check_hermitian(phi)?;
    check_hermitian(h)?;
    if min_eigenvalue(h) < -PSD_TOL {
        return Err(Error::InvalidModel("h is not positive semidefinite".into()));
    }
    let n = h.nrows();
    let id = CMat::identity(n, n);
    let finish = |alpha: f64, feasible: bool| {
        let base = h * re(alpha) + &id * re(beta);
        let up = eigh(&(&base - phi));
        let lo = eigh(&(&base + phi));
        let witness = if up.values[0] <= lo.values[0] {
            up.vector(0)
        } else {
            lo.vector(0)
        };
        BoundCertificate {
            alpha_star: alpha,
            beta_used: beta,
            witness,
            feasible,
            min_eig_upper: up.values[0],
            min_eig_lower: lo.values[0],
        }
    };
    if bound_holds(phi, h, 0.0, beta) {
        return Ok(finish(0.0, true));
    }
    let mut hi = 1.0;
    while !bound_holds(phi, h, hi, beta) {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(finish(f64::INFINITY, false).with_alpha(f64::INFINITY));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > ALPHA_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if bound_holds(phi, h, mid, beta) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(finish(hi, true))
}

impl BoundCertificate {
    fn with_alpha(mut self, a: f64) -> Self {
        self.alpha_star = a;
        self
    }
}

/// The `(α*, β)` feasibility frontier over the given β values.
pub fn alpha_frontier(phi: &CMat, h: &CMat, betas: &[f64]) -> Result<Vec<BoundCertificate>> {
    betas.iter().map(|&b| minimal_alpha(phi, h, b)).collect()
}

#[derive(Clone, Debug)]
pub struct GappedSplit {
    pub h: CMat,
    pub phi_r: CMat,
    /// `‖A‖`, the scale of the classical projector.
    pub scale: f64,
    /// `(‖A‖ - 1) / ‖A‖`.
    pub alpha: f64,
}

/// `A = ‖A‖ P_{Ω⊥} + (A - ‖A‖ P_{Ω⊥})` for `A ≥ 0`, `AΩ = 0`, `A|_{Ω⊥} ≥ 1`.
pub fn gapped_split(a: &CMat) -> Result<GappedSplit> {
    check_hermitian(a)?;
    let n = a.nrows();
    let tol = PSD_TOL * max_abs(a).max(1.0);
    if (0..n).any(|i| a[(i, PREFERRED_INDEX)].norm() > tol) {
        return Err(Error::InvalidModel("A does not annihilate Ω".into()));
    }
    let sub = a.clone().remove_row(PREFERRED_INDEX).remove_column(PREFERRED_INDEX);
    if min_eigenvalue(&sub) < 1.0 - tol {
        return Err(Error::InvalidModel("A restricted to Ω⊥ is not ≥ 1".into()));
    }
    let scale = crate::linalg::hermitian_norm(a);
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        if i != PREFERRED_INDEX {
            h[(i, i)] = re(scale);
        }
    }
    let phi_r = a - &h;
    Ok(GappedSplit {
        h,
        phi_r,
        scale,
        alpha: (scale - 1.0) / scale,
    })
}

/// Volume operators of a model.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub h0: SparseMatrix,
    pub phi: SparseMatrix,
    pub h: SparseMatrix,
}

/// `H0 = Σ_x h_x`, `Φ = Σ_x φ_x`, `H = H0 + Φ` over all torus translates.
pub fn assemble(model: &ModelSpec) -> Result<Assembled> {
    let n = model.volume().space_dim();
    let all = model.volume().all_sites();
    let h0 = model.classical_sum(all);
    let phis: Vec<SparseMatrix> = if model.has_perturbation() {
        (0..model.n_sites()).map(|x| model.embedded_phi(x)).collect()
    } else {
        vec![]
    };
    let refs: Vec<&SparseMatrix> = phis.iter().collect();
    let phi = SparseMatrix::sum(n, &refs);
    let h = h0.add(&phi);
    Ok(Assembled { h0, phi, h })
}

#[derive(Clone, Debug, Serialize)]
pub struct WcondAudit {
    pub worst_min_eig: f64,
    pub worst_subset: Vec<usize>,
    pub subsets_checked: usize,
    pub ok: bool,
}

/// Checks `α H0 ∓ Σ_{x∈I} φ_x ⪰ 0` for every subset `I` of the terms.
pub fn wcond_audit(terms: &[CMat], h0: &CMat, alpha: f64) -> WcondAudit {
    let k = terms.len();
    assert!(k < 20, "too many terms for the subset audit");
    let base = h0 * re(alpha);
    let results: Vec<(f64, u64)> = (0u64..(1 << k))
        .into_par_iter()
        .map(|mask| {
            let mut sum = CMat::zeros(h0.nrows(), h0.ncols());
            for (i, t) in terms.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum += t;
                }
            }
            let a = min_eigenvalue(&(&base - &sum));
            let b = min_eigenvalue(&(&base + &sum));
            (a.min(b), mask)
        })
        .collect();
    let (worst, mask) = results
        .iter()
        .copied()
        .fold((f64::INFINITY, 0), |acc, r| if r.0 < acc.0 { r } else { acc });
    WcondAudit {
        worst_min_eig: worst,
        worst_subset: (0..k).filter(|i| mask >> i & 1 == 1).collect(),
        subsets_checked: results.len(),
        ok: worst >= -PSD_TOL,
    }
}

/// Minimal eigenvalue of `α H0 + |Λ|β ∓ Φ` (the summed form bound).
pub fn additivity_audit(model: &ModelSpec, alpha: f64, beta: f64) -> Result<f64> {
    let a = assemble(model)?;
    let h0 = a.h0.to_dense();
    let phi = a.phi.to_dense();
    let n = h0.nrows();
    let base = &h0 * re(alpha) + CMat::identity(n, n) * re(beta * model.n_sites() as f64);
    Ok(min_eigenvalue(&(&base - &phi)).min(min_eigenvalue(&(&base + &phi))))
}

/// A model regrouped into cubic blocks of side `l`.
#[derive(Clone, Debug)]
pub struct BlockedModel {
    pub l: usize,
    pub original: ModelSpec,
    /// Blocked torus with `Λ̄₀ = {0,1}^ν`.
    pub geometry: Geometry,
    /// Original sites of each block, lexicographic inside the block.
    pub block_sites: Vec<Vec<usize>>,
    /// `c_y` for every translate `y` of the original interaction.
    pub multiplicities: Vec<usize>,
    pub h_bar: CMat,
    pub phi_r_bar: Option<CMat>,
    pub phi_b_bar: Option<CMat>,
    /// Blocked basis index → original basis index.
    pub basis_map: Vec<usize>,
}

impl BlockedModel {
    pub fn n_blocks(&self) -> usize {
        self.geometry.n_sites()
    }

    pub fn phi_bar(&self) -> CMat {
        let n = self.h_bar.nrows();
        let mut p = CMat::zeros(n, n);
        for m in self.phi_r_bar.iter().chain(self.phi_b_bar.iter()) {
            p += m;
        }
        p
    }

    fn embed_bar(&self, m: &CMat, x: usize) -> SparseMatrix {
        embed_matrix(
            m,
            self.geometry.translate(x).sites(),
            self.n_blocks(),
            self.geometry.volume.site_dim(),
        )
    }

    /// `Σ_{x∈I} φ̄^(r)_x` and `Σ_{x∈J} φ̄^(b)_x` in the blocked basis.
    pub fn phi_r_sum(&self, sites: SiteSet) -> SparseMatrix {
        self.sum_of(self.phi_r_bar.as_ref(), sites)
    }

    pub fn phi_b_sum(&self, sites: SiteSet) -> SparseMatrix {
        self.sum_of(self.phi_b_bar.as_ref(), sites)
    }

    fn sum_of(&self, m: Option<&CMat>, sites: SiteSet) -> SparseMatrix {
        let n = self.geometry.volume.space_dim();
        match m {
            None => SparseMatrix::zeros(n),
            Some(m) => {
                let terms: Vec<SparseMatrix> = sites.iter().map(|x| self.embed_bar(m, x)).collect();
                let refs: Vec<&SparseMatrix> = terms.iter().collect();
                SparseMatrix::sum(n, &refs)
            }
        }
    }

    /// The original `H_{Λ,0}` expressed in the blocked basis.
    pub fn h0(&self) -> SparseMatrix {
        self.original
            .classical_sum(self.original.volume().all_sites())
            .permuted(&self.basis_map)
    }

    /// Converts an operator of the original volume into the blocked basis.
    pub fn to_blocked(&self, op: &SparseMatrix) -> SparseMatrix {
        op.permuted(&self.basis_map)
    }
}

/// Exhaustive count `c_y = |{x : Λ₀+y ⊂ ∪_{z∈Λ̄₀+x} b_z}|`.
fn block_multiplicities(
    original: &Geometry,
    blocked: &Geometry,
    block_of_site: &[usize],
) -> Vec<usize> {
    (0..original.n_sites())
        .map(|y| {
            let term = original.translate(y);
            (0..blocked.n_sites())
                .filter(|&x| {
                    let cover = blocked.translate_set(x);
                    term.sites().iter().all(|&s| cover.contains(block_of_site[s]))
                })
                .count()
        })
        .collect()
}

/// Regroups the lattice into blocks of side `l` (the `φ̄_x` construction).
pub fn block_model(model: &ModelSpec, l: usize) -> Result<BlockedModel> {
    let vol = model.volume();
    let nu = vol.dimension();
    if l <= model.geometry.lambda0_diameter() {
        return Err(Error::Geometry(format!(
            "block side {l} must exceed diam(Λ₀) = {}",
            model.geometry.lambda0_diameter()
        )));
    }
    if vol.dims().iter().any(|&s| s % l != 0 || s / l < 2) {
        return Err(Error::Geometry(format!(
            "side lengths {:?} must be multiples of {l} with at least two blocks",
            vol.dims()
        )));
    }
    let block_dims: Vec<usize> = vol.dims().iter().map(|s| s / l).collect();
    let sites_per_block = l.pow(nu as u32);
    let block_dim = vol
        .site_dim()
        .checked_pow(sites_per_block as u32)
        .ok_or(Error::DimensionOverflow {
            site_dim: vol.site_dim(),
            sites: sites_per_block,
            max: usize::MAX,
        })?;
    let bvol = Volume::new(&block_dims, block_dim)?;
    let corner: Vec<Vec<i64>> = (0..(1usize << nu))
        .map(|m| (0..nu).rev().map(|a| (m >> a & 1) as i64).collect())
        .collect();
    let bgeom = Geometry::new(bvol.clone(), corner)?;

    // Original sites of each block in local lexicographic order.
    let local_offsets: Vec<Vec<i64>> = (0..sites_per_block)
        .map(|mut m| {
            let mut c = vec![0i64; nu];
            for a in (0..nu).rev() {
                c[a] = (m % l) as i64;
                m /= l;
            }
            c
        })
        .collect();
    let block_sites: Vec<Vec<usize>> = (0..bvol.n_sites())
        .map(|z| {
            let origin: Vec<i64> = bvol.coords(z).iter().map(|&c| (c * l) as i64).collect();
            local_offsets
                .iter()
                .map(|o| {
                    let c: Vec<i64> = origin.iter().zip(o).map(|(a, b)| a + b).collect();
                    vol.site_at(&c)
                })
                .collect()
        })
        .collect();
    let mut block_of_site = vec![0; vol.n_sites()];
    for (z, sites) in block_sites.iter().enumerate() {
        for &s in sites {
            block_of_site[s] = z;
        }
    }
    let multiplicities = block_multiplicities(&model.geometry, &bgeom, &block_of_site);
    if multiplicities.contains(&0) {
        return Err(Error::Geometry("some translate of Λ₀ is not covered by any block cube".into()));
    }

    // Target sites of Λ̄₀ + 0, concatenated block by block.
    let target: Vec<usize> = bgeom
        .translate(0)
        .sites()
        .iter()
        .flat_map(|&z| block_sites[z].iter().copied())
        .collect();
    let cover0 = bgeom.translate_set(0);
    let d = vol.site_dim();
    let block_term = |m: &CMat| -> Result<CMat> {
        let dim = d.pow(target.len() as u32);
        let mut acc = CMat::zeros(dim, dim);
        for y in 0..vol.n_sites() {
            let term = model.geometry.translate(y);
            if term.sites().iter().all(|&s| cover0.contains(block_of_site[s])) {
                let ext = extend_to_sites(m, term.sites(), &target, d)?;
                acc += ext * re(1.0 / multiplicities[y] as f64);
            }
        }
        Ok(acc)
    };
    let h_bar = block_term(&model.h)?;
    let phi_r_bar = model.phi_r.as_ref().map(&block_term).transpose()?;
    let phi_b_bar = model.phi_b.as_ref().map(&block_term).transpose()?;

    // Blocked basis index → original basis index.
    let nb = bvol.n_sites();
    let basis_map: Vec<usize> = (0..bvol.space_dim())
        .map(|bi| {
            let mut orig = 0;
            for z in 0..nb {
                let mut state = bvol.digit(bi, z);
                for &s in block_sites[z].iter().rev() {
                    orig += (state % d) * vol.stride(s);
                    state /= d;
                }
            }
            orig
        })
        .collect();

    Ok(BlockedModel {
        l,
        original: model.clone(),
        geometry: bgeom,
        block_sites,
        multiplicities,
        h_bar,
        phi_r_bar,
        phi_b_bar,
        basis_map,
    })
}

/// Hermitian matrix from real diagonal entries.
pub fn diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|&v| re(v))))
}

/// Projector `P_{Ω⊥}` on a `dim`-dimensional space.
pub fn omega_complement_projector(dim: usize) -> CMat {
    let mut p = CMat::identity(dim, dim);
    p[(PREFERRED_INDEX, PREFERRED_INDEX)] = C64::new(0.0, 0.0);
    p
}
