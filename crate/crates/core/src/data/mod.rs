//! Large initial data built from thin frequency sets.

mod reports;
mod seeds;
mod support;

pub use reports::{largeness_report, smallness_condition_lhs, LargenessReport, SmallnessConstants, SmallnessReport};
pub use seeds::{
    amplitudes, assemble_background_initial, build_perturbation, loglog, restrict_to_inner, support_sets,
    synthesize_seed_fields, Amplitudes, BackgroundInitial, DataCase, InitialTriple, Perturbation, PerturbationSpec,
    SeedFields,
};
pub use support::{all_pairs, cutoff_value, smooth_step, support_membership, CutoffSpec, Region, SupportSet};
