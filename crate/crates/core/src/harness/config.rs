//! Experiment configuration files.
//!
//! A config is a TOML file with one table per concern. Every field has a
//! default, so an empty file describes a valid (small) experiment:
//!
//! ```toml
//! [topology]
//! kind = "cycle"        # cycle | complete | path | grid2d
//! n = 8
//! lazify = true         # use (I + P)/2
//!
//! [compress]
//! compressor = { variant = "identity" }
//! bytes = "expected"    # expected | realized
//!
//! [geometry]
//! domain = { variant = "ball", R = 1.0 }
//!
//! [adversary]
//! loss = { kind = "linear", G = 1.0 }
//! d = 10
//! T = 4096
//!
//! [gossip]
//! engine = "efficient"  # naive | efficient
//!
//! [algorithm]
//! name = "top_dogd"     # top_dogd | top_dobd1 | top_dobd2 | dc_dogd | d_ogd
//! overrides = {}        # any of L1, L2, gamma, eta, eps, ablate_compensation
//!
//! [harness]
//! seeds = [0]
//! stride = 1            # record every k-th round (the last round is always kept)
//! # learners = [0, 3]   # default: all learners
//! # output = "run.csv"
//! # run_id = "..."      # default derived from the config
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversary::{LossSpec, LossStream};
use crate::algorithms::{derive_hyperparams, derive_per_round, Algorithm, HyperOverrides, HyperParams, ProblemConstants};
use crate::compress::{omega_of, ByteMode, CompressorKind};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::gossip::GossipEngine;
use crate::topology::{gossip_matrix_for, GossipMatrix, TopologyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub kind: TopologyKind,
    pub n: usize,
    pub lazify: bool,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            kind: TopologyKind::Cycle,
            n: 8,
            lazify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompressSection {
    pub compressor: CompressorKind,
    pub bytes: ByteMode,
}

impl Default for CompressSection {
    fn default() -> Self {
        Self {
            compressor: CompressorKind::Identity,
            bytes: ByteMode::Expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub domain: Domain,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            domain: Domain::Ball { radius: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversarySection {
    pub loss: LossSpec,
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
}

impl Default for AdversarySection {
    fn default() -> Self {
        Self {
            loss: LossSpec::default(),
            d: 10,
            horizon: 4096,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GossipSection {
    pub engine: GossipEngine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmSection {
    pub name: Algorithm,
    pub overrides: HyperOverrides,
}

impl Default for AlgorithmSection {
    fn default() -> Self {
        Self {
            name: Algorithm::TopDogd,
            overrides: HyperOverrides::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessSection {
    pub seeds: Vec<u64>,
    pub stride: usize,
    pub learners: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub run_id: Option<String>,
}

impl Default for HarnessSection {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            stride: 1,
            learners: None,
            output: None,
            run_id: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologySection,
    pub compress: CompressSection,
    pub geometry: GeometrySection,
    pub adversary: AdversarySection,
    pub gossip: GossipSection,
    pub algorithm: AlgorithmSection,
    pub harness: HarnessSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn run_id(&self) -> String {
        self.harness.run_id.clone().unwrap_or_else(|| {
            format!(
                "{}-{}{}-{}-{}-T{}",
                self.algorithm.name,
                self.topology.kind,
                self.topology.n,
                self.compress.compressor.name(),
                self.adversary.loss.name(),
                self.adversary.horizon
            )
        })
    }

    pub fn omega(&self) -> f64 {
        omega_of(&self.compress.compressor, self.adversary.d)
    }

    /// Checks every field and cross-field constraint, and resolves the
    /// network and hyperparameters.
    pub fn resolve(&self) -> Result<Resolved> {
        let (n, d, horizon) = (self.topology.n, self.adversary.d, self.adversary.horizon);
        if d == 0 || horizon == 0 {
            return Err(Error::Config("d and T must be positive".into()));
        }
        if self.harness.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.harness.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if let Some(ls) = &self.harness.learners {
            if let Some(&bad) = ls.iter().find(|&&i| i >= n) {
                return Err(Error::Config(format!("learner {bad} out of range for n={n}")));
            }
        }
        self.compress.compressor.validate(d)?;
        self.geometry.domain.validate()?;
        let algorithm = self.algorithm.name;
        if algorithm.is_bandit() && !(self.geometry.domain.inner_radius() > 0.0) {
            return Err(Error::InvalidDomain(
                "bandit learners need a domain containing a ball around the origin".into(),
            ));
        }
        let loss = self.adversary.loss;
        if loss.is_lower_bound() {
            if self.topology.kind != TopologyKind::Cycle {
                return Err(Error::Config("lower-bound streams require the cycle topology".into()));
            }
            if !matches!(self.compress.compressor, CompressorKind::RandomizedGossip { .. }) {
                return Err(Error::Config(
                    "lower-bound streams require the randomized_gossip compressor".into(),
                ));
            }
            if n % 2 != 0 {
                return Err(Error::InvalidConstruction(format!("lower-bound streams need even n, got {n}")));
            }
        }

        let (_, p) = gossip_matrix_for(self.topology.kind, n, self.topology.lazify)?;
        let omega = self.omega();
        // a probe stream gives the loss class and gradient bound
        let probe = self.stream(0)?;
        let g = probe.gradient_bound();
        let mu = match probe.class() {
            crate::adversary::LossClass::StronglyConvex { mu } => Some(mu),
            crate::adversary::LossClass::Convex => None,
        };
        let k = ProblemConstants {
            n,
            d,
            omega,
            rho: p.rho(),
            beta: p.beta(),
            // a zero stream still needs a finite step size
            g: if g > 0.0 { g } else { 1.0 },
            diameter: self.geometry.domain.diameter(d),
            horizon,
            inner_radius: self.geometry.domain.inner_radius(),
            outer_radius: self.geometry.domain.outer_radius(d),
        };
        let mode = algorithm.hyper_mode(mu);
        let hp = if algorithm.is_blocked() {
            derive_hyperparams(&k, mode, &self.algorithm.overrides)?
        } else {
            derive_per_round(&k, mode, &self.algorithm.overrides)?
        };
        Ok(Resolved { p, hp, constants: k })
    }

    /// Loss stream of the run with master seed `seed`.
    pub fn stream(&self, seed: u64) -> Result<Box<dyn LossStream>> {
        self.adversary.loss.build(
            self.topology.n,
            self.adversary.d,
            self.adversary.horizon,
            self.geometry.domain.diameter(self.adversary.d),
            self.omega(),
            crate::rng::child_seed(seed, crate::rng::Purpose::Loss, 0),
        )
    }

    /// Same experiment at another horizon.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        let mut c = self.clone();
        c.adversary.horizon = horizon;
        c
    }
}

/// Validated network and hyperparameters of a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub p: GossipMatrix,
    pub hp: HyperParams,
    pub constants: ProblemConstants,
}
