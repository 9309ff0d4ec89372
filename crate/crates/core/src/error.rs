use thiserror::Error;

use crate::topology::TopologyKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("network size {n} is too small (need at least {min} hosts)")]
    InvalidSize { n: usize, min: usize },

    #[error("host index {index} out of range 1..={n}")]
    HostOutOfRange { index: usize, n: usize },

    #[error("a host cannot exchange with itself (host {0})")]
    SelfExchange(usize),

    #[error("host {host} takes part in more than one exchange of a single-exchanger step")]
    AmbiguousHostState { host: usize },

    #[error("could not build a star schedule for {n} hosts: reached {achieved} steps, target {target}")]
    ProtocolConstruction { n: usize, achieved: usize, target: usize },

    #[error("distance rule and step-count formula disagree for {n} hosts (raw {raw}, formula {formula})")]
    ModelInconsistency { n: usize, raw: usize, formula: usize },

    #[error(
        "exhaustive search for {kind} with {n} hosts exceeds the ceiling of {ceiling} hosts; use the bound instead"
    )]
    SearchTooLarge { kind: TopologyKind, n: usize, ceiling: usize },

    #[error("degenerate regression: {0}")]
    DegenerateFit(&'static str),

    #[error("invalid failure scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("export failed: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
