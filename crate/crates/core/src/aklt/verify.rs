//! End-to-end AKLT audit: ground-space structure, Gram decay, gaps, blocked
//! operators and the split.

use serde::Serialize;

use crate::aklt::blocks::{
    factor_audit, gpp_commutator, gpp_decay, hbar_sum_defect, pair_spectrum, phi_b_norm,
    sg_min_eig, BlockDecomposition, CommutatorAudit, Completion, FactorAudit, GppPoint,
    DENSE_PAIR_MAX,
};
use crate::aklt::spin::{kernel_dimension, Boundary};
use crate::aklt::split::{aklt_blocked_split, SplitReport};
use crate::aklt::vbs::{
    frustration_residual, gap_sequence, gram_decay, periodic_ground_residual, property1_defect,
    GapPoint, GramPoint,
};
use crate::cluster::spectral::{fit_log_decay, DecayFit};
use crate::error::Result;

/// Tolerance for residuals and operator inequalities.
pub const AUDIT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub l: usize,
    pub n_blocks: usize,
    /// Free chains `2..=gap_n_max` enter `γ̂`.
    pub gap_n_max: usize,
    pub gram_ns: Vec<usize>,
    pub gpp_ls: Vec<usize>,
    pub commutator_ls: Vec<usize>,
    pub seed: u64,
}

impl VerifyOptions {
    pub fn new(l: usize, n_blocks: usize) -> Self {
        Self {
            l,
            n_blocks,
            gap_n_max: 10,
            gram_ns: (4..=9).collect(),
            gpp_ls: vec![2, 4, 6],
            commutator_ls: vec![2, 4],
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelRow {
    pub n: usize,
    pub free: Option<usize>,
    pub periodic: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionChecks {
    pub l: usize,
    pub m: usize,
    pub unitarity_defect: f64,
    pub ground_image_distance: f64,
    pub orthonormality_defect: f64,
    pub bond_norm_sq: f64,
}

impl DecompositionChecks {
    pub fn of(dec: &BlockDecomposition) -> Self {
        Self {
            l: dec.l,
            m: dec.m,
            unitarity_defect: dec.unitarity_defect(),
            ground_image_distance: dec.ground_image_distance(),
            orthonormality_defect: dec.orthonormality_defect(),
            bond_norm_sq: dec.bond_vector.norm_squared(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaPoint {
    pub l: usize,
    pub beta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AkltReport {
    pub l: usize,
    pub n_blocks: usize,
    pub gamma_hat: f64,
    pub alpha_est: f64,
    pub beta_est: f64,
    pub hg_min_eig: Vec<f64>,
    pub sg_min_eig: f64,
    pub commutator_norms: Vec<f64>,
    pub gram_decay_rate: Option<f64>,
    pub gpp_decay_rate: Option<f64>,
    pub kernels: Vec<KernelRow>,
    pub frustration_residual: f64,
    pub periodic_ground_residual: f64,
    pub property1_defect: f64,
    pub gram: Vec<GramPoint>,
    pub gram_fit: Option<DecayFit>,
    pub gaps_free: Vec<GapPoint>,
    pub hbar_sum_defect: f64,
    pub hbar_kernel_dim: Option<usize>,
    pub decomposition: DecompositionChecks,
    pub reduced_commutators: Vec<CommutatorAudit>,
    pub factor_audit: Option<FactorAudit>,
    pub gpp: Vec<GppPoint>,
    pub gpp_fit: Option<DecayFit>,
    pub split: SplitReport,
    /// `|alpha_est − alpha_est(randomized completion)|`.
    pub completion_alpha_shift: f64,
    pub failures: Vec<String>,
}

impl AkltReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `γ̂ = min_{2≤n≤n_max}` free-chain gap with the full sequence.
pub fn gamma_sequence(n_max: usize) -> Result<(f64, Vec<GapPoint>)> {
    let ns: Vec<usize> = (2..=n_max).collect();
    let seq = gap_sequence(&ns, Boundary::Free)?;
    let g = seq.last().map(|p| p.running_min).unwrap_or(f64::INFINITY);
    Ok((g, seq))
}

/// `‖φ^(b)‖` for each block length with a fitted decay rate in `l`.
pub fn beta_sweep(ls: &[usize]) -> Result<(Vec<BetaPoint>, Option<DecayFit>)> {
    let pts = ls
        .iter()
        .map(|&l| Ok(BetaPoint { l, beta: phi_b_norm(l)? }))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = pts.iter().map(|p| p.l as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.beta).collect();
    Ok((pts, fit_log_decay(&xs, &ys, 1e-300)))
}

pub fn aklt_verify(opts: &VerifyOptions) -> Result<AkltReport> {
    let mut failures = vec![];
    let mut kernels = vec![];
    for n in 2..=8 {
        let free = kernel_dimension(n, Boundary::Free)?;
        let periodic = if n >= 3 {
            Some(kernel_dimension(n, Boundary::Periodic)?)
        } else {
            None
        };
        if free != 4 {
            failures.push(format!("free kernel dimension {free} at n = {n}"));
        }
        if let Some(p) = periodic.filter(|&p| p != 1) {
            failures.push(format!("periodic kernel dimension {p} at n = {n}"));
        }
        kernels.push(KernelRow {
            n,
            free: Some(free),
            periodic,
        });
    }
    let frustration = (1..=8).map(frustration_residual).try_fold(0f64, |a, r| r.map(|r| a.max(r)))?;
    let periodic_res = (3..=8).map(periodic_ground_residual).try_fold(0f64, |a, r| r.map(|r| a.max(r)))?;
    let prop1 = [4, 6].into_iter().map(property1_defect).try_fold(0f64, |a, r| r.map(|r| a.max(r)))?;
    if frustration > AUDIT_TOL {
        failures.push(format!("frustration residual {frustration:.3e}"));
    }
    if periodic_res > AUDIT_TOL {
        failures.push(format!("periodic ground residual {periodic_res:.3e}"));
    }
    if prop1 > AUDIT_TOL {
        failures.push(format!("property-1 defect {prop1:.3e}"));
    }

    let (gram, gram_fit) = gram_decay(&opts.gram_ns)?;
    for p in &gram {
        if p.min_eig <= 0.0 {
            failures.push(format!("Gram matrix not positive at n = {}", p.n));
        }
    }
    let (gamma_hat, gaps_free) = gamma_sequence(opts.gap_n_max)?;
    if !(gamma_hat > 0.0) {
        failures.push(format!("gamma_hat = {gamma_hat}"));
    }

    let l = opts.l;
    let hsum = hbar_sum_defect(l, opts.n_blocks)?;
    if hsum > 1e-12 {
        failures.push(format!("sum of H̄ differs from H^p by {hsum:.3e}"));
    }
    let pair_dense = 3usize.pow(2 * l as u32) <= DENSE_PAIR_MAX;
    let hbar_kernel_dim = if pair_dense {
        Some(pair_spectrum(l, gamma_hat)?.kernel_dim)
    } else {
        None
    };
    if let Some(k) = hbar_kernel_dim.filter(|&k| k != 4) {
        failures.push(format!("H̄ kernel dimension {k}"));
    }
    let sg = sg_min_eig(l, gamma_hat)?;
    if sg < -AUDIT_TOL {
        failures.push(format!("sg min eigenvalue {sg:.3e}"));
    }

    let dec = BlockDecomposition::new(l, Completion::Canonical)?;
    let decomposition = DecompositionChecks::of(&dec);
    if decomposition.unitarity_defect > 1e-12 || decomposition.ground_image_distance > AUDIT_TOL {
        failures.push("block identification is not a unitary onto the ground space".into());
    }
    let reduced_commutators = opts
        .commutator_ls
        .iter()
        .map(|&l| gpp_commutator(l))
        .collect::<Result<Vec<_>>>()?;
    for c in &reduced_commutators {
        if c.norm > AUDIT_TOL {
            failures.push(format!("G″ commutator {:.3e} at l = {}", c.norm, c.l));
        }
    }
    let factor = if pair_dense {
        Some(factor_audit(l, 4, opts.seed)?)
    } else {
        None
    };
    if let Some(f) = factor.as_ref().filter(|f| f.max_norm() > AUDIT_TOL) {
        failures.push(format!("G″ factor audit {:.3e}", f.max_norm()));
    }
    let (gpp, gpp_fit) = gpp_decay(&opts.gpp_ls)?;
    for w in gpp.windows(2) {
        if w[1].distance >= w[0].distance {
            failures.push(format!("‖G″ − G‖ not decreasing at l = {}", w[1].l));
        }
    }

    let split = aklt_blocked_split(l, opts.n_blocks, gamma_hat, Completion::Canonical, opts.seed)?;
    failures.extend(split.failures().into_iter().map(|f| format!("split: {f}")));
    let shifted = aklt_blocked_split(
        l,
        opts.n_blocks,
        gamma_hat,
        Completion::Randomized(opts.seed.wrapping_add(1)),
        opts.seed,
    )?;
    let completion_alpha_shift = (split.alpha_est - shifted.alpha_est).abs();
    if completion_alpha_shift > 1e-8 {
        failures.push(format!("alpha_est depends on the completion ({completion_alpha_shift:.3e})"));
    }

    Ok(AkltReport {
        l,
        n_blocks: opts.n_blocks,
        gamma_hat,
        alpha_est: split.alpha_est,
        beta_est: split.beta_est,
        hg_min_eig: split.hg_min_eig.clone(),
        sg_min_eig: sg,
        commutator_norms: split.commutator_norms.clone(),
        gram_decay_rate: gram_fit.as_ref().map(|f| f.rate),
        gpp_decay_rate: gpp_fit.as_ref().map(|f| f.rate),
        kernels,
        frustration_residual: frustration,
        periodic_ground_residual: periodic_res,
        property1_defect: prop1,
        gram,
        gram_fit,
        gaps_free,
        hbar_sum_defect: hsum,
        hbar_kernel_dim,
        decomposition,
        reduced_commutators,
        factor_audit: factor,
        gpp,
        gpp_fit,
        split,
        completion_alpha_shift,
        failures,
    })
}
