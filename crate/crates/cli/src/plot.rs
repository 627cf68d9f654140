//! Plot-ready CSV series extracted from task reports.

use std::fmt;
use std::str::FromStr;

use relbound_core::report::{Cell, Table};

use crate::error::{CliError, Result};
use crate::run::TaskReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlotKind {
    /// `n, ‖g_n − 1‖`.
    GramDecay,
    /// `n, gap, running minimum`.
    GapVsN,
    /// `size, max |w|, ε^size`.
    WeightVsSize,
    /// `N, ln Z, a₁ + a₂N, truncation bound`.
    LnZVsN,
    /// `l, ‖G″ − G‖`.
    GppVsL,
    /// `l, ‖φ^(b)‖`.
    BetaVsL,
    /// `distance, max |⟨A₁A₂⟩ − ⟨A₁⟩⟨A₂⟩|`.
    CorrelationVsDistance,
}

impl PlotKind {
    pub const ALL: [PlotKind; 7] = [
        PlotKind::GramDecay,
        PlotKind::GapVsN,
        PlotKind::WeightVsSize,
        PlotKind::LnZVsN,
        PlotKind::GppVsL,
        PlotKind::BetaVsL,
        PlotKind::CorrelationVsDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::GramDecay => "gram-decay",
            PlotKind::GapVsN => "gap-vs-n",
            PlotKind::WeightVsSize => "weight-vs-size",
            PlotKind::LnZVsN => "lnZ-vs-N",
            PlotKind::GppVsL => "gpp-vs-l",
            PlotKind::BetaVsL => "beta-vs-l",
            PlotKind::CorrelationVsDistance => "correlation-vs-distance",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::UnknownPlotKind(s.to_string()))
    }
}

/// Kinds whose series a report carries.
pub fn available_kinds(report: &TaskReport) -> Vec<PlotKind> {
    PlotKind::ALL
        .into_iter()
        .filter(|&k| emit_plot_data(report, k).is_ok())
        .collect()
}

pub fn emit_plot_data(report: &TaskReport, kind: PlotKind) -> Result<Table> {
    let missing = || CliError::MissingSeries {
        task: report.task().name().into(),
        kind: kind.name().into(),
    };
    let table = match (kind, report) {
        (PlotKind::GramDecay, TaskReport::AkltVerify(r)) => {
            let mut t = Table::new(&["n", "gram_defect"]);
            for p in &r.gram {
                t.push(vec![p.n.into(), p.defect.into()]);
            }
            t
        }
        (PlotKind::GapVsN, TaskReport::AkltVerify(_) | TaskReport::AkltSplit(_)) => {
            let gaps = match report {
                TaskReport::AkltVerify(r) => &r.gaps_free,
                TaskReport::AkltSplit(r) => &r.gaps_free,
                _ => unreachable!(),
            };
            let mut t = Table::new(&["n", "gap", "running_min"]);
            for p in gaps {
                t.push(vec![p.n.into(), p.gap.into(), p.running_min.into()]);
            }
            t
        }
        (PlotKind::WeightVsSize, TaskReport::Expand(r)) => {
            let mut t = Table::new(&["size", "max_weight", "bound"]);
            for s in &r.sizes {
                t.push(vec![s.size.into(), s.max_weight.into(), s.bound.into()]);
            }
            t
        }
        (PlotKind::LnZVsN, TaskReport::Expand(r)) => {
            let mut t = Table::new(&["N", "lnZ", "fit", "bound"]);
            for row in &r.rows {
                if let Some(e) = row.exact {
                    t.push(vec![row.n.into(), e.into(), row.linear.into(), row.bound.into()]);
                }
            }
            t
        }
        (PlotKind::GppVsL, TaskReport::AkltVerify(r)) => {
            let mut t = Table::new(&["l", "gpp_distance"]);
            for p in &r.gpp {
                t.push(vec![p.l.into(), p.distance.into()]);
            }
            t
        }
        (PlotKind::BetaVsL, TaskReport::AkltSplit(r)) => {
            let mut t = Table::new(&["l", "beta"]);
            for p in &r.beta_sweep {
                t.push(vec![p.l.into(), p.beta.into()]);
            }
            t
        }
        (PlotKind::CorrelationVsDistance, TaskReport::Correlate(r)) => {
            let mut t = Table::new(&["distance", "max_abs_correlation"]);
            for p in &r.by_distance {
                t.push(vec![p.distance.into(), Cell::Float(p.max_abs_correlation)]);
            }
            t
        }
        _ => return Err(missing()),
    };
    if table.rows.is_empty() {
        return Err(missing());
    }
    Ok(table)
}
