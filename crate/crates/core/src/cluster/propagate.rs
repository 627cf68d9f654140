//! The semigroup `e^{-tH}`, the inclusion–exclusion operators `T_{Λ,I}` and
//! configuration weights.

use std::sync::OnceLock;

use crate::cluster::config::{Configuration, Support};
use crate::error::{Error, Result};
use crate::forms::{BlockedModel, ModelSpec};
use crate::lattice::{excitation_diagonal, Geometry, SiteSet, DEFAULT_DENSE_CAP};
use crate::linalg::{check_hermitian, expm, expm_hermitian, re, CMat, CVec, C64, ONE, ZERO};

/// `e^{-tH}` for Hermitian `H`: spectral decomposition below the dense cap,
/// scaling and squaring above it.
pub fn semigroup(h: &CMat, t: f64) -> Result<CMat> {
    check_hermitian(h)?;
    let n = h.nrows();
    if t == 0.0 {
        return Ok(CMat::identity(n, n));
    }
    if n <= DEFAULT_DENSE_CAP {
        Ok(expm_hermitian(h, t))
    } else {
        expm(&(h * re(-t)))
    }
}

/// Cached dense propagators `e^{-t₀(H₀ + Σ_{x∈J} φ_x)}` and `T_{Λ,I}` of a model.
pub struct Propagators {
    pub geometry: Geometry,
    pub t0: f64,
    h0: CMat,
    phis: Vec<CMat>,
    excited: Vec<SiteSet>,
    exps: Vec<OnceLock<CMat>>,
    ts: Vec<OnceLock<CMat>>,
}

/// Largest volume (in sites) for which per-subset caches are allocated.
const MAX_CACHED_SITES: usize = 16;

impl Propagators {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        let vol = model.volume();
        if vol.space_dim() > DEFAULT_DENSE_CAP {
            return Err(Error::CapExceeded {
                what: "dense space dimension",
                size: vol.space_dim(),
                cap: DEFAULT_DENSE_CAP,
            });
        }
        let n = vol.n_sites();
        if n > MAX_CACHED_SITES {
            return Err(Error::CapExceeded {
                what: "sites for subset caches",
                size: n,
                cap: MAX_CACHED_SITES,
            });
        }
        let h0 = model.classical_sum(vol.all_sites()).to_dense();
        let phis = (0..n).map(|x| model.embedded_phi(x).to_dense()).collect();
        let excited = (0..vol.space_dim()).map(|i| vol.excited_sites(i)).collect();
        Ok(Self {
            geometry: model.geometry.clone(),
            t0: model.t0,
            h0,
            phis,
            excited,
            exps: (0..1usize << n).map(|_| OnceLock::new()).collect(),
            ts: (0..1usize << n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &CMat {
        &self.h0
    }

    /// `H₀ + Σ_{x∈J} φ_x`.
    pub fn hamiltonian(&self, j: SiteSet) -> CMat {
        let mut h = self.h0.clone();
        for x in j.iter() {
            h += &self.phis[x];
        }
        h
    }

    /// `e^{-t₀(H₀ + Σ_{x∈J} φ_x)}`, cached.
    pub fn exp(&self, j: SiteSet) -> &CMat {
        self.exps[j.0 as usize].get_or_init(|| expm_hermitian(&self.hamiltonian(j), self.t0))
    }

    /// `T_{Λ,I} = Σ_{J⊂I} (-1)^{|I|-|J|} e^{-t₀(H₀ + Σ_J φ)}`, cached.
    pub fn t(&self, i: SiteSet) -> &CMat {
        self.ts[i.0 as usize].get_or_init(|| {
            let mut acc = CMat::zeros(self.dim(), self.dim());
            for j in i.subsets() {
                let sign = if (i.len() - j.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
                acc += self.exp(j) * re(sign);
            }
            acc
        })
    }

    /// `T'_I`: `T_{Λ,I}` with `H₀` replaced by the `h_x` touching `Λ_I`.
    pub fn t_prime(&self, model: &ModelSpec, i: SiteSet) -> CMat {
        let near = self.geometry.touching(self.geometry.lambda_of(i));
        let h_near = model.classical_sum(near).to_dense();
        let mut acc = CMat::zeros(self.dim(), self.dim());
        for j in i.subsets() {
            let mut h = h_near.clone();
            for x in j.iter() {
                h += &self.phis[x];
            }
            let sign = if (i.len() - j.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += expm_hermitian(&h, self.t0) * re(sign);
        }
        acc
    }

    /// Applies `P_{H'_J} P_{Ω_{(Λ∖Λ_I)∖J}}` in place.
    fn project(&self, i: SiteSet, j: SiteSet, v: &mut CVec) {
        let ground = self
            .geometry
            .volume
            .all_sites()
            .difference(self.geometry.lambda_of(i))
            .difference(j);
        for (idx, e) in self.excited.iter().enumerate() {
            if !(j.is_subset(*e) && !ground.intersects(*e)) {
                v[idx] = ZERO;
            }
        }
    }

    /// `w(C) = ⟨Π_k T_{I_k} P_k Ω, Ω⟩` with the time-ordered product.
    pub fn weight(&self, c: &Configuration) -> Result<C64> {
        c.check(&self.geometry)?;
        let mut v = CVec::zeros(self.dim());
        v[0] = ONE;
        for &(i, j) in &c.slices {
            self.project(i, j, &mut v);
            if v.iter().all(|z| *z == ZERO) {
                return Ok(ZERO);
            }
            v = self.t(i) * &v;
        }
        Ok(v[0])
    }
}

/// `T_{Λ,I}` of a model, computed directly.
pub fn t_operator(model: &ModelSpec, i: SiteSet) -> Result<CMat> {
    let p = Propagators::new(model)?;
    Ok(p.t(i).clone())
}

/// `w(C)` of a model, computed directly.
pub fn config_weight(model: &ModelSpec, c: &Configuration) -> Result<C64> {
    Propagators::new(model)?.weight(c)
}

/// Propagators of the blocked scheme:
/// `T_{I,J,K} = Σ_{I₁⊂I} Σ_{J₁⊂J} (±) e^{-t₀(H₀ + Φ̄^(r)_{I₁} + Φ̄^(b)_{J₁})} P_K`.
pub struct BlockedPropagators {
    pub geometry: Geometry,
    t0: f64,
    h0: CMat,
    phi_r: Vec<CMat>,
    phi_b: Vec<CMat>,
}

impl BlockedPropagators {
    pub fn new(model: &BlockedModel) -> Result<Self> {
        let n = model.geometry.volume.space_dim();
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::CapExceeded {
                what: "dense space dimension",
                size: n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        let nb = model.n_blocks();
        Ok(Self {
            geometry: model.geometry.clone(),
            t0: model.original.t0,
            h0: model.h0().to_dense(),
            phi_r: (0..nb)
                .map(|x| model.phi_r_sum(SiteSet::singleton(x)).to_dense())
                .collect(),
            phi_b: (0..nb)
                .map(|x| model.phi_b_sum(SiteSet::singleton(x)).to_dense())
                .collect(),
        })
    }

    pub fn t(&self, i: SiteSet, j: SiteSet, k: SiteSet) -> CMat {
        let dim = self.h0.nrows();
        let mut acc = CMat::zeros(dim, dim);
        for i1 in i.subsets() {
            for j1 in j.subsets() {
                let mut h = self.h0.clone();
                for x in i1.iter() {
                    h += &self.phi_r[x];
                }
                for x in j1.iter() {
                    h += &self.phi_b[x];
                }
                let parity = (i.len() - i1.len() + j.len() - j1.len()) % 2;
                let sign = if parity == 0 { 1.0 } else { -1.0 };
                acc += expm_hermitian(&h, self.t0) * re(sign);
            }
        }
        let ground = self.geometry.volume.all_sites().difference(k);
        let mask = excitation_diagonal(&self.geometry.volume, k, ground);
        for (col, keep) in mask.into_iter().enumerate() {
            if !keep {
                acc.column_mut(col).fill(ZERO);
            }
        }
        acc
    }
}

/// Support of an empty slice sequence padded to `n_layers` (helper for tests).
pub fn empty_support(n_layers: usize) -> Support {
    Support::new(n_layers)
}
