//! Worked examples and comparisons between the two designers.

mod compare;
mod divergence;
mod example1;
mod sweep;

pub use compare::{compare_designers, Comparison, CrossEvaluation, DesignerOutcome};
pub use divergence::{
    construct_divergent_population, divergence_delta, nontrivial_utility_suite, DivergenceReport, DEFAULT_MARGIN,
    DISAGREEMENT_TOLERANCE,
};
pub use example1::{
    binary_alphabets, build_example1, build_shared_majority, example1_welfare_closed_form, run_example1,
    Example1Report, Example1Scenario,
};
pub use sweep::{disagreement_sweep, sample_populations, SweepConfig, SweepReport, SweepRow, SweepSummary};
