//! Operator-norm audits of the semigroup decomposition.

use serde::Serialize;

use crate::cluster::config::Configuration;
use crate::cluster::polymer::PolymerSet;
use crate::cluster::propagate::Propagators;
use crate::error::{Error, Result};
use crate::forms::{assemble, ModelSpec};
use crate::lattice::SiteSet;
use crate::linalg::{expm_hermitian, max_abs, max_abs_diff, re, spectral_norm, CMat, ZERO};

/// Absolute slack for norm comparisons.
pub const AUDIT_TOL: f64 = 1e-10;

/// Cap on `|Λ|` for the exhaustive completeness sum.
pub const COMPLETENESS_MAX_SITES: usize = 3;

/// `(2α e^{t₀β/α})^{n}`, with the conventions `0^0 = 1` and the factor 0
/// when `α = β = 0`.
pub fn t_prime_factor(alpha: f64, beta: f64, t0: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let base = if alpha > 0.0 {
        2.0 * alpha * (t0 * beta / alpha).exp()
    } else if beta > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    base.powi(n as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormAudit {
    pub norm: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `‖T'_I‖ ≤ (2α e^{t₀β/α})^{|I|}`.
pub fn t_prime_audit(model: &ModelSpec, i: SiteSet) -> Result<NormAudit> {
    let props = Propagators::new(model)?;
    t_prime_audit_with(&props, model, i)
}

pub fn t_prime_audit_with(props: &Propagators, model: &ModelSpec, i: SiteSet) -> Result<NormAudit> {
    let t = props.t_prime(model, i);
    let norm = spectral_norm(&t);
    let bound = t_prime_factor(model.alpha, model.beta, model.t0, i.len());
    Ok(NormAudit {
        norm,
        bound,
        ok: norm <= bound + AUDIT_TOL,
    })
}

/// `Π_k (2α e^{t₀β/α})^{|I_k|} e^{-t₀(|J_k| − |Λ₀|³|I_k|)}`.
pub fn weight_bound(model: &ModelSpec, c: &Configuration) -> f64 {
    let l3 = (model.geometry.lambda0_size() as f64).powi(3);
    c.slices
        .iter()
        .map(|&(i, j)| {
            t_prime_factor(model.alpha, model.beta, model.t0, i.len())
                * (-model.t0 * (j.len() as f64 - l3 * i.len() as f64)).exp()
        })
        .product()
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightBoundRow {
    pub size: usize,
    pub weight: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Compares every enumerated polymer weight with its closed-form bound.
pub fn weight_bound_audit(model: &ModelSpec, set: &PolymerSet) -> Vec<WeightBoundRow> {
    set.polymers
        .iter()
        .map(|p| {
            let bound = weight_bound(model, &p.config);
            let weight = p.weight.norm();
            WeightBoundRow {
                size: p.size,
                weight,
                bound,
                ok: weight <= bound * (1.0 + 1e-12) + 1e-14,
            }
        })
        .collect()
}

/// `max |Σ_{I⊂Λ} T_{Λ,I} − e^{-t₀H_Λ}|` (entrywise).
pub fn decomposition_defect(model: &ModelSpec) -> Result<f64> {
    let props = Propagators::new(model)?;
    let all = model.volume().all_sites();
    let mut sum = CMat::zeros(props.dim(), props.dim());
    for i in all.subsets() {
        sum += props.t(i);
    }
    let h = assemble(model)?.h.to_dense();
    Ok(max_abs_diff(&sum, &expm_hermitian(&h, model.t0)))
}

/// `max |T_{Λ,I}|` after replacing `φ_x` by 0 for one `x ∈ I`; the exact
/// value is 0.
pub fn telescoping_defect(model: &ModelSpec, i: SiteSet, x: usize) -> Result<f64> {
    if !i.contains(x) {
        return Err(Error::InvalidConfiguration(format!("site {x} not in I")));
    }
    let props = Propagators::new(model)?;
    let h0 = props.h0().clone();
    let mut acc = CMat::zeros(props.dim(), props.dim());
    for j in i.subsets() {
        let mut h = h0.clone();
        for y in j.iter().filter(|&y| y != x) {
            h += model.embedded_phi(y).to_dense();
        }
        let sign = if (i.len() - j.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += expm_hermitian(&h, model.t0) * re(sign);
    }
    Ok(max_abs(&acc))
}

/// `Σ_C w(C)` over every configuration on `{1..N} × Λ`, to compare with `Z_N`.
pub fn completeness_sum(model: &ModelSpec, n: usize) -> Result<f64> {
    let sites = model.n_sites();
    if sites > COMPLETENESS_MAX_SITES || n > 3 {
        return Err(Error::CapExceeded {
            what: "completeness enumeration",
            size: sites.max(n),
            cap: COMPLETENESS_MAX_SITES,
        });
    }
    let props = Propagators::new(model)?;
    let all = model.volume().all_sites();
    let mut slice_choices = vec![];
    for i in all.subsets() {
        let free = all.difference(model.geometry.lambda_of(i));
        for j in free.subsets() {
            slice_choices.push((i, j));
        }
    }
    let m = slice_choices.len();
    let mut total = ZERO;
    for code in 0..m.pow(n as u32) {
        let mut rest = code;
        let slices = (0..n)
            .map(|_| {
                let c = slice_choices[rest % m];
                rest /= m;
                c
            })
            .collect();
        total += props.weight(&Configuration { slices })?;
    }
    Ok(total.re)
}
