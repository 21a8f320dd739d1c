//! Monte Carlo harness for `risalign`: figure presets, runtime tables and
//! the pieces behind the `risalign` command-line tool.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod output;
pub mod spec;
pub mod trials;
pub mod validate;

pub use experiment::{run_experiment, ExperimentResult};
pub use spec::{ExperimentSpec, Method, Preset, Task};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("malformed config: {0}")]
    Config(String),
    #[error("metric: {0}")]
    Metric(String),
    #[error(transparent)]
    Core(#[from] risalign::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Short stable identifier used in CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Spec(_) => "spec",
            HarnessError::Config(_) => "config",
            HarnessError::Metric(_) => "metric",
            HarnessError::Core(_) => "numeric",
            HarnessError::Io(_) => "io",
        }
    }
}
