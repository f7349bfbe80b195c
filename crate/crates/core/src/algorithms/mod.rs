//! Online learners over a gossip network.
//!
//! All learners share one driver contract: a run consumes a [`RunSpec`],
//! emits one [`RunRecord`] per (round, learner) to an optional sink, and
//! returns a [`RunOutcome`] with final regrets and the communication totals.

mod baselines;
mod hyper;
mod two_level;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{d_ogd_run, dc_dogd_run};
pub use hyper::{
    derive_hyperparams, derive_per_round, exploration_for, gamma_formula, l1_formula, l2_formula, EtaSchedule, Exploration,
    HyperMode, HyperOverrides, HyperParams, ProblemConstants,
};
pub use two_level::{
    block_commit, compensation_subblock, gossip_subblock, top_dobd1_run, top_dobd2_run, top_dogd_run,
    TwoLevelState,
};

use crate::adversary::{best_fixed_comparator, LossStream, QuadForm};
use crate::compress::{ByteMode, CompressorKind};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::gossip::GossipEngine;
use crate::topology::GossipMatrix;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    TopDogd,
    TopDobd1,
    TopDobd2,
    DcDogd,
    DOgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::TopDogd,
        Algorithm::TopDobd1,
        Algorithm::TopDobd2,
        Algorithm::DcDogd,
        Algorithm::DOgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TopDogd => "top_dogd",
            Algorithm::TopDobd1 => "top_dobd1",
            Algorithm::TopDobd2 => "top_dobd2",
            Algorithm::DcDogd => "dc_dogd",
            Algorithm::DOgd => "d_ogd",
        }
    }

    pub fn is_bandit(self) -> bool {
        matches!(self, Algorithm::TopDobd1 | Algorithm::TopDobd2)
    }

    pub fn is_blocked(self) -> bool {
        matches!(self, Algorithm::TopDogd | Algorithm::TopDobd1 | Algorithm::TopDobd2)
    }

    /// Hyperparameter mode for this algorithm against a loss class.
    pub fn hyper_mode(self, strongly_convex: Option<f64>) -> HyperMode {
        match (self, strongly_convex) {
            (Algorithm::TopDobd1, None) => HyperMode::Bandit1Convex,
            (Algorithm::TopDobd1, Some(mu)) => HyperMode::Bandit1Sc { mu },
            (Algorithm::TopDobd2, None) => HyperMode::Bandit2Convex,
            (Algorithm::TopDobd2, Some(mu)) => HyperMode::Bandit2Sc { mu },
            (_, None) => HyperMode::Convex,
            (_, Some(mu)) => HyperMode::StronglyConvex { mu },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// Everything a run needs. The horizon is the stream's.
#[derive(Clone, Copy)]
pub struct RunSpec<'a> {
    pub stream: &'a dyn LossStream,
    pub p: &'a GossipMatrix,
    pub domain: Domain,
    pub hp: HyperParams,
    pub compressor: CompressorKind,
    pub engine: GossipEngine,
    pub seed: u64,
    pub bytes: ByteMode,
    /// Keep every played point in the outcome (memory `T·n·d`).
    pub keep_plays: bool,
}

/// One learner in one round. `t` and `b` are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub t: usize,
    pub b: usize,
    pub learner: usize,
    /// Global loss `f_t` at the learner's play (mean over the two plays of
    /// a two-point learner).
    pub loss: f64,
    pub comparator_loss: f64,
    pub cum_regret: f64,
    /// Network-wide bytes charged through the end of this round.
    pub cum_bytes: f64,
    pub e_consensus: f64,
    pub e_compression: f64,
    pub proj_residual_norm: f64,
    /// Messages this learner sent this round.
    pub round_messages: usize,
    /// Bytes charged for this learner's message this round.
    pub round_bytes: f64,
}

/// `plays[t][i]` lists the points learner `i` played in round `t`.
pub type Plays = Vec<Vec<Vec<Vector>>>;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub algorithm: Algorithm,
    pub final_regret: Vec<f64>,
    pub total_bytes: f64,
    pub total_messages: u64,
    pub comparator: Vector,
    /// Last decisions (committed block decisions for blocked learners).
    pub final_decisions: Vec<Vector>,
    pub plays: Option<Plays>,
}

impl RunOutcome {
    pub fn mean_regret(&self) -> f64 {
        self.final_regret.iter().sum::<f64>() / self.final_regret.len() as f64
    }

    pub fn max_regret(&self) -> f64 {
        self.final_regret.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub type Sink<'s> = Option<&'s mut dyn FnMut(&RunRecord)>;

/// Per-round diagnostics shared by every learner's record.
pub(crate) struct RoundDiag {
    pub e_consensus: f64,
    pub e_compression: f64,
}

/// Regret and byte bookkeeping shared by all drivers.
pub(crate) struct Accountant {
    comparator: Vector,
    cum_regret: Vec<f64>,
    cum_bytes: f64,
    messages: u64,
    plays: Option<Plays>,
}

impl Accountant {
    pub fn new(spec: &RunSpec<'_>) -> Result<Self> {
        let n = spec.p.n();
        if spec.stream.n() != n {
            return Err(Error::InvalidPairing(format!(
                "stream has {} learners, matrix has {}",
                spec.stream.n(),
                n
            )));
        }
        spec.domain.validate()?;
        spec.compressor.validate(spec.stream.d())?;
        let comparator = best_fixed_comparator(spec.stream, &spec.domain)?;
        Ok(Self {
            comparator,
            cum_regret: vec![0.0; n],
            cum_bytes: 0.0,
            messages: 0,
            plays: spec.keep_plays.then(Vec::new),
        })
    }

    /// Charges one message per learner, updates regrets and emits records.
    #[allow(clippy::too_many_arguments)]
    pub fn close_round(
        &mut self,
        t: usize,
        b: usize,
        form: &QuadForm,
        plays: Vec<Vec<Vector>>,
        charges: &[f64],
        diag: &RoundDiag,
        residual_norms: &[f64],
        sink: &mut Sink<'_>,
    ) {
        let n = self.cum_regret.len();
        debug_assert_eq!(charges.len(), n);
        self.cum_bytes += charges.iter().sum::<f64>();
        self.messages += n as u64;
        let comparator_loss = form.value(&self.comparator);
        let mut losses = Vec::with_capacity(n);
        for (i, pts) in plays.iter().enumerate() {
            let loss = pts.iter().map(|x| form.value(x)).sum::<f64>() / pts.len() as f64;
            self.cum_regret[i] += loss - comparator_loss;
            losses.push(loss);
        }
        if let Some(sink) = sink.as_mut() {
            for i in 0..n {
                sink(&RunRecord {
                    t: t + 1,
                    b,
                    learner: i,
                    loss: losses[i],
                    comparator_loss,
                    cum_regret: self.cum_regret[i],
                    cum_bytes: self.cum_bytes,
                    e_consensus: diag.e_consensus,
                    e_compression: diag.e_compression,
                    proj_residual_norm: residual_norms[i],
                    round_messages: 1,
                    round_bytes: charges[i],
                });
            }
        }
        if let Some(store) = self.plays.as_mut() {
            store.push(plays);
        }
    }

    pub fn finish(self, algorithm: Algorithm, final_decisions: Vec<Vector>) -> RunOutcome {
        RunOutcome {
            algorithm,
            final_regret: self.cum_regret,
            total_bytes: self.cum_bytes,
            total_messages: self.messages,
            comparator: self.comparator,
            final_decisions,
            plays: self.plays,
        }
    }
}

/// Dispatches to the learner named by `algorithm`.
pub fn run_algorithm(algorithm: Algorithm, spec: &RunSpec<'_>, sink: Sink<'_>) -> Result<RunOutcome> {
    match algorithm {
        Algorithm::TopDogd => top_dogd_run(spec, sink),
        Algorithm::TopDobd1 => top_dobd1_run(spec, sink),
        Algorithm::TopDobd2 => top_dobd2_run(spec, sink),
        Algorithm::DcDogd => dc_dogd_run(spec, sink),
        Algorithm::DOgd => d_ogd_run(spec, sink),
    }
}
