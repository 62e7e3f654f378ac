//! Block-coding layer: types and typical sets, conditional typical
//! projectors, channel simulation with shared randomness, derandomization and
//! a fidelity audit of the resulting code.

pub mod audit;
pub mod derand;
pub mod overlap;
pub mod rst;
pub mod types;

pub use audit::{coded_fidelity_audit, coded_fidelity_audit_with, AuditEntry, AuditOptions, AuditReport};
pub use derand::{chernoff_tail, derandomize, required_samples, Derandomized};
pub use overlap::{projector_overlap, ConditionalSubspace};
pub use rst::{reverse_shannon_sim, reverse_shannon_sim_with, OutputLaw, PanelEntry, RstCode, RstOptions, RstReport};
pub use types::{
    cond_typical_mass_mc, is_cond_typical, is_typical, sample_sequence, sample_typical_sequence, typical_count_bounds,
    typical_mass_mc, typical_set_size, ChannelMatrix, CountBounds, Estimate, JointType, TypeVector,
};
