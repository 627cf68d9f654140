//! Semigroup decomposition, polymers, clusters and the series for `ln Z_N`.

pub mod audits;
pub mod config;
pub mod polymer;
pub mod propagate;
pub mod series;
pub mod spectral;
pub mod ursell;

pub use audits::{
    completeness_sum, decomposition_defect, t_prime_audit, weight_bound_audit, weight_bound,
    telescoping_defect, NormAudit,
};
pub use config::{config_support, polymer_decompose, Atom, AtomKind, Configuration, Support};
pub use polymer::{enumerate_polymers, EnumerationOptions, Polymer, PolymerSet};
pub use propagate::{config_weight, semigroup, t_operator, BlockedPropagators, Propagators};
pub use series::{
    enumerate_clusters, fit_gap_rate, log_partition_series, ClusterOptions, ExpansionReport,
};
pub use spectral::{
    exact_log_partition, fit_log_decay, fz_norm_audit, spectral_report, truncated_correlation,
    DecayFit, LogPartitionOracle, SpectralReport,
};
pub use ursell::{ursell_coefficient, Graph};
