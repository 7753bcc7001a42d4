use thiserror::Error;

use crate::instance::Finding;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance: {0}")]
    Parse(#[source] serde_json::Error),
    #[error("invalid instance: {}", join_findings(.0))]
    Invalid(Vec<Finding>),
}

fn join_findings(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error, PartialEq)]
pub enum LorenzError {
    #[error("coverage vector is empty")]
    Empty,
    #[error("coverage value {value} at position {index} is negative or not finite")]
    Negative { index: usize, value: f64 },
    #[error("labels ({labels}) and values ({values}) differ in length")]
    LengthMismatch { labels: usize, values: usize },
    #[error("total coverage is zero; the Gini coefficient is undefined")]
    Degenerate,
    #[error("proportions sum to {0}, expected 1")]
    Proportions(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("cannot form {k} clusters from {points} points")]
    TooManyClusters { k: usize, points: usize },
    #[error("cluster count must be positive")]
    ZeroClusters,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("no clustering supplied for scenario {0}")]
    MissingClustering(String),
    #[error("clustering for scenario {scenario} does not partition its positive-demand areas")]
    BadClustering { scenario: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("first-stage plan does not match the instance: {0}")]
    FirstStageShape(String),
    #[error("malformed MPS input at line {line}: {message}")]
    Mps { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver executable {path} could not be run: {source}")]
    Spawn {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse solver output: {0}")]
    Output(String),
    #[error("cache entry unreadable: {0}")]
    Cache(#[from] serde_json::Error),
    #[error("invalid solve parameters: {0}")]
    Params(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{formulation}: no first-stage plan ({message})")]
    NoPlan { formulation: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("report I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("report CSV: {0}")]
    Csv(#[from] csv::Error),
}
