//! Suite registry and dispatch. One subcommand per verified claim, so a CI
//! run maps one-to-one onto the claim list; failed checks carry replayable
//! witnesses.

use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::report::{CheckResult, Report, Witness};

mod banach;
mod factor;
mod graph;
mod model;

pub use factor::roundtrip_instance;

/// Every available suite, in display order.
pub const SUITES: &[&str] = &[
    "clique-ext",
    "max-clique",
    "factorize-exhaustive",
    "factorize-roundtrip",
    "e-square",
    "interior",
    "bijective-factors",
    "sphere-extreme",
    "gamma-phi",
    "homogeneity",
    "tangent-balls",
    "isometry-certify",
    "bridge",
    "shift",
    "closure",
    "rat-scaling",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("graph error: {0}")]
    Graph(#[from] plab_core::ball_graph::BallGraphError),
    #[error("clique error: {0}")]
    Clique(#[from] plab_core::clique_engine::CliqueError),
    #[error("homomorphism error: {0}")]
    Hom(#[from] plab_core::factorizer::HomomorphismError),
    #[error("geometry error: {0}")]
    Banach(#[from] plab_core::banach_geometry::BanachError),
    #[error("construction error: {0}")]
    Construction(#[from] plab_core::constructions::ConstructionError),
    #[error("hom file error: {0}")]
    HomFile(#[from] crate::homfile::HomFileError),
    #[error("bad witness: {0}")]
    Witness(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Options orthogonal to the config: worker count and optional numeric
/// dumps.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub jobs: usize,
    pub dump_samples: Option<PathBuf>,
    pub dump_derivations: Option<PathBuf>,
}

/// Runs one suite; the report is byte-stable for equal `(config, seed)`.
pub fn run_suite(config: &RunConfig, opts: &RunOptions) -> Result<Report, SuiteError> {
    let started = Instant::now();
    let checks = match config.suite.as_str() {
        "clique-ext" => graph::clique_ext(config, opts)?,
        "max-clique" => graph::max_clique(config, opts)?,
        "factorize-exhaustive" => factor::factorize_exhaustive(config)?,
        "factorize-roundtrip" => factor::factorize_roundtrip(config, opts)?,
        "e-square" => factor::lemma_suite(config, opts, factor::LemmaKind::ESquare)?,
        "interior" => factor::lemma_suite(config, opts, factor::LemmaKind::Interior)?,
        "bijective-factors" => factor::bijective_factors(config)?,
        "sphere-extreme" => factor::sphere_extreme(config)?,
        "gamma-phi" => banach::gamma_phi(config, opts)?,
        "homogeneity" => banach::homogeneity(config)?,
        "tangent-balls" => banach::tangent_balls(config, opts)?,
        "isometry-certify" => banach::isometry_certify(config, opts)?,
        "bridge" => banach::bridge(config)?,
        "shift" => model::shift(config, opts)?,
        "closure" => model::closure(config, opts)?,
        "rat-scaling" => model::rat_scaling(config)?,
        other => return Err(SuiteError::UnknownSuite(other.to_string())),
    };
    let mut report = Report::new(config.clone(), checks);
    report.elapsed = Some(started.elapsed());
    Ok(report)
}

/// Re-executes the single check described by a witness.
pub fn replay_witness(witness: &Witness) -> Result<CheckResult, SuiteError> {
    match witness.suite.as_str() {
        "clique-ext" | "max-clique" => graph::replay(witness),
        "factorize-exhaustive" | "factorize-roundtrip" | "e-square" | "interior"
        | "bijective-factors" | "sphere-extreme" => factor::replay(witness),
        "gamma-phi" | "homogeneity" | "tangent-balls" | "isometry-certify" | "bridge" => {
            banach::replay(witness)
        }
        "shift" | "closure" | "rat-scaling" => model::replay(witness),
        other => Err(SuiteError::UnknownSuite(other.to_string())),
    }
}

/// Order-preserving, optionally parallel map over an instance list. The
/// single-threaded path and the pooled path produce the same vector, so
/// reports do not depend on the worker count.
pub(crate) fn map_indexed<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    if jobs <= 1 {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("worker pool");
        pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
    }
}

pub(crate) fn payload_field<'a>(
    witness: &'a Witness,
    key: &str,
) -> Result<&'a serde_json::Value, SuiteError> {
    witness
        .payload
        .get(key)
        .ok_or_else(|| SuiteError::Witness(format!("missing payload field {key:?}")))
}

pub(crate) fn payload_u64(witness: &Witness, key: &str) -> Result<u64, SuiteError> {
    payload_field(witness, key)?
        .as_u64()
        .ok_or_else(|| SuiteError::Witness(format!("payload field {key:?} is not an integer")))
}
