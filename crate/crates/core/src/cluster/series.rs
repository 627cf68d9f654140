//! Clusters of polymers, the truncated series for `ln Z_N` and its tail bound.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::audits::weight_bound;
use crate::cluster::polymer::{enumerate_polymers, EnumerationOptions, PolymerSet};
use crate::cluster::spectral::{fit_log_decay, DecayFit, LogPartitionOracle};
use crate::cluster::ursell::{ursell_coefficient_with_cap, Graph};
use crate::error::{Error, Result};
use crate::forms::ModelSpec;
use crate::lattice::DEFAULT_DENSE_CAP;
use crate::linalg::{C64, ONE, ZERO};

#[derive(Clone, Copy, Debug)]
pub struct ClusterOptions {
    pub max_support: usize,
    pub max_multiplicity: usize,
    pub max_vertices: usize,
    pub cap: usize,
}

impl ClusterOptions {
    pub fn new(max_support: usize) -> Self {
        Self {
            max_support,
            max_multiplicity: 3,
            max_vertices: 8,
            cap: 5_000_000,
        }
    }
}

/// A cluster starting at slice 1: members `(polymer, shift)` with repetition.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub members: Vec<(u32, u32)>,
    /// Occupied slices.
    pub span: usize,
    /// `Σ |supp χ_i|` over members with multiplicity.
    pub size: usize,
    pub ursell: i64,
    pub weight: C64,
}

impl Cluster {
    /// Time length `l(X)`: the number of translates in `{1..N}` is `N − l(X)`.
    pub fn length(&self) -> usize {
        self.span - 1
    }
}

#[derive(Clone, Debug)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub truncated: bool,
    /// Smallest omitted `Σ|supp|` guaranteed by the caps.
    pub omitted_min_size: usize,
}

/// Shifts `δ` such that `q` placed `δ` layers after `p` meets `p`.
fn intersection_table(set: &PolymerSet, active: &[usize]) -> Vec<Vec<(u32, i32)>> {
    let n_sites = set
        .polymers
        .iter()
        .flat_map(|p| p.support.layers.iter().map(|l| 64 - l.0.leading_zeros() as usize))
        .max()
        .unwrap_or(0);
    let mut by_site: Vec<Vec<(u32, i32)>> = vec![vec![]; n_sites];
    for (qi, &q) in active.iter().enumerate() {
        for (k, x) in set.polymers[q].support.points() {
            by_site[x].push((qi as u32, k as i32));
        }
    }
    active
        .par_iter()
        .map(|&p| {
            let mut out = vec![];
            for (k, x) in set.polymers[p].support.points() {
                for &(q, kq) in &by_site[x] {
                    out.push((q, k as i32 - kq));
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}

/// Enumerates clusters with `n_i ≤ max_multiplicity`, at most `max_vertices`
/// members and `Σ|supp| ≤ max_support`, starting at slice 1.
pub fn enumerate_clusters(set: &PolymerSet, opts: ClusterOptions) -> Result<ClusterSet> {
    let active: Vec<usize> = (0..set.polymers.len())
        .filter(|&i| !set.polymers[i].is_negligible())
        .collect();
    let s_min = active
        .iter()
        .map(|&i| set.polymers[i].size)
        .min()
        .unwrap_or(opts.max_support + 1);
    let omitted_min_size = (opts.max_support + 1)
        .min((opts.max_multiplicity + 1) * s_min)
        .min((opts.max_vertices + 1) * s_min);
    let table = intersection_table(set, &active);
    let size_of = |m: u32| set.polymers[active[m as usize]].size;
    let span_of = |m: u32| set.polymers[active[m as usize]].span;

    let mut level: Vec<Vec<(u32, u32)>> = (0..active.len() as u32)
        .filter(|&p| size_of(p) <= opts.max_support)
        .map(|p| vec![(p, 0)])
        .collect();
    let mut all = vec![];
    let mut truncated = false;
    for v in 1..=opts.max_vertices {
        if level.is_empty() {
            break;
        }
        all.extend(level.iter().cloned());
        if all.len() > opts.cap {
            truncated = true;
            break;
        }
        if v == opts.max_vertices {
            break;
        }
        let mut next: Vec<Vec<(u32, u32)>> = level
            .par_iter()
            .flat_map_iter(|members| {
                let size: usize = members.iter().map(|&(p, _)| size_of(p)).sum();
                let mut out = vec![];
                let mut distinct = members.clone();
                distinct.dedup();
                for &(p, t) in &distinct {
                    for &(q, delta) in &table[p as usize] {
                        let s = t as i32 + delta;
                        if s < 0 || size + size_of(q) > opts.max_support {
                            continue;
                        }
                        let new = (q, s as u32);
                        let mult = members.iter().filter(|&&m| m == new).count();
                        if mult + 1 > opts.max_multiplicity {
                            continue;
                        }
                        let mut grown = members.clone();
                        let pos = grown.partition_point(|&m| m <= new);
                        grown.insert(pos, new);
                        out.push(grown);
                    }
                }
                out
            })
            .collect();
        next.par_sort_unstable();
        next.dedup();
        level = next;
    }

    let weights: Vec<C64> = active.iter().map(|&i| set.polymers[i].weight).collect();
    let clusters: Vec<Cluster> = all
        .par_iter()
        .map(|members| {
            let n = members.len();
            let mut g = Graph::new(n);
            for a in 0..n {
                for b in a + 1..n {
                    let (p, tp) = members[a];
                    let (q, tq) = members[b];
                    let delta = tq as i32 - tp as i32;
                    if table[p as usize].binary_search(&(q, delta)).is_ok() {
                        g.add_edge(a, b);
                    }
                }
            }
            let ursell = ursell_coefficient_with_cap(&g, opts.max_vertices)?;
            let mut weight = ONE;
            let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
            for &m in members {
                weight *= weights[m.0 as usize];
                *counts.entry(m).or_default() += 1;
            }
            let denom: f64 = counts.values().map(|&c| (1..=c).product::<usize>() as f64).product();
            weight *= C64::new(ursell as f64 / denom, 0.0);
            Ok(Cluster {
                members: members.clone(),
                span: members.iter().map(|&(p, t)| t as usize + span_of(p)).max().unwrap_or(0),
                size: members.iter().map(|&(p, _)| size_of(p)).sum(),
                ursell,
                weight,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ClusterSet {
        clusters,
        truncated,
        omitted_min_size,
    })
}

/// Cluster expansion of `ln Σ Π w` for a finite family of abstract polymers
/// with a symmetric incompatibility relation (every polymer is incompatible
/// with itself), with the same caps as [`enumerate_clusters`].
pub fn finite_cluster_log(
    weights: &[C64],
    incompatible: impl Fn(usize, usize) -> bool,
    max_multiplicity: usize,
    max_vertices: usize,
) -> Result<C64> {
    let k = weights.len();
    let mut total = ZERO;
    let mut stack: Vec<Vec<usize>> = (0..k).map(|p| vec![p]).collect();
    while let Some(members) = stack.pop() {
        let n = members.len();
        let mut g = Graph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if members[a] == members[b] || incompatible(members[a], members[b]) {
                    g.add_edge(a, b);
                }
            }
        }
        let ursell = ursell_coefficient_with_cap(&g, max_vertices)?;
        if ursell != 0 {
            let mut w = ONE;
            let mut denom = 1.0;
            let mut run = 0;
            for (i, &m) in members.iter().enumerate() {
                w *= weights[m];
                run = if i > 0 && members[i - 1] == m { run + 1 } else { 1 };
                denom *= run as f64;
            }
            total += w * ursell as f64 / denom;
        }
        if n < max_vertices {
            let last = *members.last().unwrap();
            for q in last..k {
                let mult = members.iter().filter(|&&m| m == q).count();
                if mult < max_multiplicity {
                    let mut grown = members.clone();
                    grown.push(q);
                    stack.push(grown);
                }
            }
        }
    }
    Ok(total)
}

/// Kotecký–Preiss certificate `Σ_{χ∋p} |w| e^{(a+δ)|χ|} ≤ a` per point.
#[derive(Clone, Debug, Serialize)]
pub struct KpCertificate {
    pub a: f64,
    pub delta: f64,
    pub m_star: usize,
    /// Bound `a e^{-δ m*}` on omitted clusters per space-time point.
    pub per_point_tail: f64,
}

/// `max_x Σ_{χ∋(0,x)} |w| e^{s|χ|}` over enumerated polymers plus the
/// geometric tail `r^{M+1}/(1-r)` with `r = c ε e^s`.
fn kp_lhs(point_sums: &[Vec<(usize, f64)>], s: f64, c: f64, eps: f64, m: usize) -> f64 {
    let r = c * eps * s.exp();
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let local = point_sums
        .iter()
        .map(|terms| terms.iter().map(|&(size, w)| w * (s * size as f64).exp()).sum::<f64>())
        .fold(0.0, f64::max);
    local + r.powi(m as i32 + 1) / (1.0 - r)
}

/// Minimizes `a e^{-δ m*}` over the admissible `(a, δ)`.
pub fn kp_certificate(set: &PolymerSet, n_sites: usize, c: f64, eps: f64, m_star: usize) -> Option<KpCertificate> {
    let mut point_sums: Vec<Vec<(usize, f64)>> = vec![vec![]; n_sites];
    for p in set.active() {
        for (x, terms) in point_sums.iter_mut().enumerate() {
            let layers = p.support.layers_containing(x);
            if layers > 0 {
                terms.push((p.size, p.weight.norm() * layers as f64));
            }
        }
    }
    if c * eps >= 1.0 {
        return None;
    }
    let s_max = -(c * eps).ln();
    let mut best: Option<KpCertificate> = None;
    let steps = 4000;
    for i in 1..steps {
        let s = s_max * i as f64 / steps as f64;
        let a = kp_lhs(&point_sums, s, c, eps, set.max_support);
        if !(a.is_finite() && a < s) {
            continue;
        }
        let delta = s - a;
        let tail = a * (-delta * m_star as f64).exp();
        if best.as_ref().is_none_or(|b| tail < b.per_point_tail) {
            best = Some(KpCertificate {
                a,
                delta,
                m_star,
                per_point_tail: tail,
            });
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    /// `a₁ + a₂ N`.
    pub linear: f64,
    /// Enumerated clusters fitting in `{1..N}`, `Σ (N − l) w`.
    pub windowed: f64,
    pub exact: Option<f64>,
    pub bound: f64,
    pub ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeRow {
    pub size: usize,
    pub count: usize,
    pub max_weight: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub a1: f64,
    pub a2: f64,
    /// `-ln ε`.
    pub a3: f64,
    /// Rate fitted to the exact `ln Z_N` after removing the linear part.
    pub a3_fit: Option<DecayFit>,
    pub epsilon: f64,
    pub epsilon_weight_bound: f64,
    pub counting_constant: f64,
    pub truncation_bound: f64,
    pub n_used: usize,
    pub max_support: usize,
    pub polymer_count: usize,
    pub cluster_count: usize,
    pub convergent: bool,
    pub kp: Option<KpCertificate>,
    pub imag_residual: f64,
    pub rows: Vec<SeriesRow>,
    pub sizes: Vec<SizeRow>,
    pub spectral_gap: Option<f64>,
    pub ground_energy: Option<f64>,
}

/// Rate of `ln Z_N − a₁ − a₂N → 0` from second differences of `ln Z_N`
/// (which cancel any linear part), over the largest three usable `N`.
pub fn fit_gap_rate(ln_z: &[(usize, f64)]) -> Option<DecayFit> {
    let scale = ln_z.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let floor = 1e-12 * scale;
    let mut pts = vec![];
    for w in ln_z.windows(3) {
        if w[1].0 == w[0].0 + 1 && w[2].0 == w[1].0 + 1 {
            let d = w[2].1 - 2.0 * w[1].1 + w[0].1;
            if d.abs() > floor {
                pts.push((w[1].0 as f64, d));
            }
        }
    }
    let start = pts.len().saturating_sub(3);
    let xs: Vec<f64> = pts[start..].iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts[start..].iter().map(|p| p.1).collect();
    fit_log_decay(&xs, &ys, 0.0)
}

/// Truncated cluster series for `ln Z_N` with tail bounds, rows for `N = 1..=n`.
pub fn log_partition_series(model: &ModelSpec, n: usize, max_support: usize) -> Result<ExpansionReport> {
    if n == 0 {
        return Err(Error::InvalidConfiguration("N must be positive".into()));
    }
    let horizon = max_support.saturating_sub(1).max(1);
    let set = enumerate_polymers(model, horizon, EnumerationOptions::new(max_support))?;
    let clusters = enumerate_clusters(&set, ClusterOptions::new(max_support))?;
    let geometry = &model.geometry;

    let epsilon = set.empirical_epsilon();
    let epsilon_weight_bound = set
        .active()
        .map(|p| weight_bound(model, &p.config).powf(1.0 / p.size as f64))
        .fold(0.0, f64::max);
    let c = set.counting_constant(geometry);

    // Deterministic sequential reductions in enumeration order.
    let mut a1 = ZERO;
    let mut a2 = ZERO;
    for x in &clusters.clusters {
        a2 += x.weight;
        a1 -= x.weight * x.length() as f64;
    }
    let imag_residual = a1.im.abs().max(a2.im.abs());

    let kp = if set.truncated || clusters.truncated || epsilon >= 1.0 {
        None
    } else {
        kp_certificate(&set, geometry.n_sites(), c, epsilon, clusters.omitted_min_size)
    };
    let convergent = kp.is_some();

    let oracle = if model.volume().space_dim() <= DEFAULT_DENSE_CAP {
        Some(LogPartitionOracle::new(model)?)
    } else {
        None
    };
    let mut rows = vec![];
    for nn in 1..=n {
        let mut windowed = ZERO;
        let mut overflow = ZERO;
        for x in &clusters.clusters {
            let coeff = nn as f64 - x.length() as f64;
            if x.span <= nn {
                windowed += x.weight * coeff;
            } else {
                overflow += x.weight * coeff;
            }
        }
        let bound = match &kp {
            Some(k) => ((nn + 1) * geometry.n_sites()) as f64 * k.per_point_tail + overflow.norm(),
            None => f64::INFINITY,
        };
        let linear = a1.re + a2.re * nn as f64;
        let exact = oracle.as_ref().map(|o| o.ln_z(nn)).transpose()?;
        rows.push(SeriesRow {
            n: nn,
            linear,
            windowed: windowed.re,
            exact,
            bound,
            ok: exact.map(|e| (linear - e).abs() <= bound),
        });
    }
    let a3_fit = {
        let exact: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.exact.map(|e| (r.n, e))).collect();
        fit_gap_rate(&exact)
    };
    let (spectral_gap, ground_energy) = match &oracle {
        Some(o) => (Some(o.energies[1] - o.energies[0]), Some(o.energies[0])),
        None => (None, None),
    };

    let mut sizes = vec![];
    for size in 1..=max_support {
        let members: Vec<f64> = set
            .polymers
            .iter()
            .filter(|p| p.size == size)
            .map(|p| p.weight.norm())
            .collect();
        if members.is_empty() {
            continue;
        }
        let max_weight = members.iter().copied().fold(0.0, f64::max);
        let bound = epsilon.powi(size as i32);
        sizes.push(SizeRow {
            size,
            count: members.len(),
            max_weight,
            bound,
            ok: max_weight <= bound * (1.0 + 1e-12),
        });
    }

    Ok(ExpansionReport {
        a1: a1.re,
        a2: a2.re,
        a3: if epsilon > 0.0 { -epsilon.ln() } else { f64::INFINITY },
        a3_fit,
        epsilon,
        epsilon_weight_bound,
        counting_constant: c,
        truncation_bound: rows.last().map(|r| r.bound).unwrap_or(f64::INFINITY),
        n_used: n,
        max_support,
        polymer_count: set.polymers.len(),
        cluster_count: clusters.clusters.len(),
        convergent,
        kp,
        imag_residual,
        rows,
        sizes,
        spectral_gap,
        ground_energy,
    })
}
