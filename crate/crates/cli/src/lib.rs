//! Configuration, workflow orchestration and plot-data emission for `tcm`.

pub mod config;
pub mod plot;
pub mod workflows;

pub use config::{parse_config, RawConfig, RunManifest, Workflow};
pub use plot::emit_plot_data;
pub use workflows::{execute, Outcome};

use tcm_core::{Error, ErrorClass};

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Config => 2,
        ErrorClass::Resolution => 3,
        ErrorClass::Numerical => 4,
        ErrorClass::Io => 1,
    }
}
