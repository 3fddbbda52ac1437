//! Scenario files, report rendering and the command-line front end for
//! [`fairwelfare_core`].

pub mod cli;
pub mod policy_file;
pub mod report;
pub mod scenario;

pub use cli::{run, Outcome};
pub use fairwelfare_core as core;
pub use scenario::{parse_scenario, ScenarioError, ScenarioFile};
