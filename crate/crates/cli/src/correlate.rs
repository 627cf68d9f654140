//! Ground-state truncated correlations `⟨A₁A₂⟩ − ⟨A₁⟩⟨A₂⟩` of single-site
//! observables, swept over the position of the second one.

use relbound_core::cluster::spectral::{fit_log_decay, spectral_report, truncated_correlation_in, DecayFit};
use relbound_core::forms::{assemble, ModelSpec};
use relbound_core::lattice::{embed_matrix, Volume};
use relbound_core::linalg::{CMat, C64};
use relbound_core::Error;
use serde::Serialize;

use crate::error::{CliError, Result};

/// `<op>@<site>` with `op` one of `X`, `Y`, `Z` (acting on levels 0 and 1),
/// `N` (level number) or `P<k>` (projector onto level `k`).
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub spec: String,
    pub op: String,
    pub site: usize,
    pub matrix: CMat,
}

fn invalid(spec: &str, message: impl Into<String>) -> CliError {
    CliError::InvalidOperator {
        spec: spec.to_string(),
        message: message.into(),
    }
}

pub fn local_matrix(op: &str, d: usize) -> std::result::Result<CMat, String> {
    let mut m = CMat::zeros(d, d);
    let c = |re: f64, im: f64| C64::new(re, im);
    match op {
        "X" | "Y" | "Z" if d < 2 => return Err("needs at least two levels".into()),
        "X" => {
            m[(0, 1)] = c(1.0, 0.0);
            m[(1, 0)] = c(1.0, 0.0);
        }
        "Y" => {
            m[(0, 1)] = c(0.0, -1.0);
            m[(1, 0)] = c(0.0, 1.0);
        }
        "Z" => {
            m[(0, 0)] = c(1.0, 0.0);
            m[(1, 1)] = c(-1.0, 0.0);
        }
        "N" => {
            for k in 0..d {
                m[(k, k)] = c(k as f64, 0.0);
            }
        }
        _ => {
            let k: usize = op
                .strip_prefix('P')
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| format!("unknown operator `{op}` (expected X, Y, Z, N or P<k>)"))?;
            if k >= d {
                return Err(format!("level {k} out of range for site dimension {d}"));
            }
            m[(k, k)] = c(1.0, 0.0);
        }
    }
    Ok(m)
}

pub fn parse_operator(spec: &str, volume: &Volume) -> Result<OperatorSpec> {
    let (op, site) = spec
        .split_once('@')
        .ok_or_else(|| invalid(spec, "expected <op>@<site>"))?;
    let site: usize = site
        .trim()
        .parse()
        .map_err(|_| invalid(spec, format!("site `{site}` is not an index")))?;
    if site >= volume.n_sites() {
        return Err(invalid(spec, format!("site {site} outside a volume of {} sites", volume.n_sites())));
    }
    let op = op.trim();
    let matrix = local_matrix(op, volume.site_dim()).map_err(|m| invalid(spec, m))?;
    Ok(OperatorSpec {
        spec: spec.to_string(),
        op: op.to_string(),
        site,
        matrix,
    })
}

/// ℓ¹ distance on the torus.
pub fn torus_distance(volume: &Volume, x: usize, y: usize) -> usize {
    volume
        .coords(x)
        .iter()
        .zip(volume.coords(y))
        .zip(volume.dims())
        .map(|((&a, &b), &l)| {
            let d = a.abs_diff(b);
            d.min(l - d)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationPoint {
    pub site: usize,
    pub distance: usize,
    pub correlation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistancePoint {
    pub distance: usize,
    pub max_abs_correlation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    #[serde(rename = "A1")]
    pub a1: String,
    #[serde(rename = "A2")]
    pub a2: String,
    pub correlation: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub sweep: Vec<CorrelationPoint>,
    pub by_distance: Vec<DistancePoint>,
    pub fit: Option<DecayFit>,
}

pub fn correlate(model: &ModelSpec, a1: &str, a2: &str) -> Result<CorrelationReport> {
    let ctx = |source| CliError::Core {
        task: "correlate".into(),
        source,
    };
    let volume = model.volume();
    let op1 = parse_operator(a1, volume)?;
    let op2 = parse_operator(a2, volume)?;
    let h = assemble(model).map_err(ctx)?.h;
    let spec = spectral_report(&h).map_err(ctx)?;
    if spec.degenerate {
        return Err(ctx(Error::DegenerateGroundState(spec.gap)));
    }
    let psi = &spec.ground / C64::new(spec.ground.norm(), 0.0);
    let (n, d) = (volume.n_sites(), volume.site_dim());
    let a1_full = embed_matrix(&op1.matrix, &[op1.site], n, d);
    let corr_at = |site: usize| {
        let a2_full = embed_matrix(&op2.matrix, &[site], n, d);
        truncated_correlation_in(&psi, &a1_full, &a2_full).re
    };
    let sweep: Vec<CorrelationPoint> = (0..n)
        .map(|site| CorrelationPoint {
            site,
            distance: torus_distance(volume, op1.site, site),
            correlation: corr_at(site),
        })
        .collect();
    let max_distance = sweep.iter().map(|p| p.distance).max().unwrap_or(0);
    let by_distance: Vec<DistancePoint> = (0..=max_distance)
        .filter_map(|r| {
            let vals: Vec<f64> = sweep.iter().filter(|p| p.distance == r).map(|p| p.correlation.abs()).collect();
            (!vals.is_empty()).then(|| DistancePoint {
                distance: r,
                max_abs_correlation: vals.into_iter().fold(0.0, f64::max),
            })
        })
        .collect();
    let tail: Vec<&DistancePoint> = by_distance.iter().filter(|p| p.distance > 0).collect();
    let xs: Vec<f64> = tail.iter().map(|p| p.distance as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.max_abs_correlation).collect();
    let fit = fit_log_decay(&xs, &ys, 1e-14);
    Ok(CorrelationReport {
        a1: op1.spec.clone(),
        a2: op2.spec.clone(),
        correlation: corr_at(op2.site),
        ground_energy: spec.e0,
        gap: spec.gap,
        sweep,
        by_distance,
        fit,
    })
}
