//! Choco-gossip compressed averaging.
//!
//! The replica bookkeeping is split out behind [`ReplicaStore`] so the same
//! step logic runs over either the naive form (every learner holds a copy of
//! each neighbor's public replica `x̂_j`) or the efficient form (each learner
//! holds only `x̂_i` and the weighted sum `s_i = Σ_j P_ij x̂_j`). The online
//! learners in [`crate::algorithms`] reuse the same stores.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compress::{compress, CompressedPayload, CompressorKind};
use crate::error::{Error, Result};
use crate::rng::{sub_stream, Purpose, SimRng};
use crate::topology::GossipMatrix;
use crate::vector::{self, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GossipEngine {
    Naive,
    #[default]
    Efficient,
}

impl FromStr for GossipEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(GossipEngine::Naive),
            "efficient" => Ok(GossipEngine::Efficient),
            other => Err(Error::Config(format!("unknown gossip engine '{other}'"))),
        }
    }
}

/// Compression randomness of `learner` at global step `step`. Both engines
/// draw from here, so their trajectories coincide.
pub fn message_rng(seed: u64, learner: usize, step: u64) -> SimRng {
    sub_stream(seed, Purpose::Compress, learner as u64, step)
}

pub trait ReplicaStore {
    fn n(&self) -> usize;

    /// `x̂_i` as held by learner `i`.
    fn own(&self, i: usize) -> &[f64];

    /// `Σ_j P_ij (x̂_j − x̂_i)` from learner `i`'s point of view.
    fn mix_term(&self, p: &GossipMatrix, i: usize) -> Vector;

    /// Every holder adds the broadcast `q_j` to its copy of `x̂_j`.
    fn apply(&mut self, p: &GossipMatrix, q: &[Vector]);

    /// True when all holders of each `x̂_j` agree (trivially true when only
    /// one copy exists).
    fn is_consistent(&self) -> bool;

    fn hats(&self) -> Vec<Vector> {
        (0..self.n()).map(|i| self.own(i).to_vec()).collect()
    }
}

/// Per-neighbor replicas: `copies[i][j]` is learner `i`'s copy of `x̂_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveReplicas {
    copies: Vec<BTreeMap<usize, Vector>>,
}

impl NaiveReplicas {
    pub fn new(p: &GossipMatrix, hats: &[Vector]) -> Self {
        let copies = (0..p.n())
            .map(|i| {
                let mut held: BTreeMap<usize, Vector> = p.neighbors(i).iter().map(|&j| (j, hats[j].clone())).collect();
                held.entry(i).or_insert_with(|| hats[i].clone());
                held
            })
            .collect();
        Self { copies }
    }

    /// Learner `holder`'s copy of `x̂_j`, if it holds one.
    pub fn copy(&self, holder: usize, j: usize) -> Option<&[f64]> {
        self.copies[holder].get(&j).map(|v| v.as_slice())
    }
}

impl ReplicaStore for NaiveReplicas {
    fn n(&self) -> usize {
        self.copies.len()
    }

    fn own(&self, i: usize) -> &[f64] {
        &self.copies[i][&i]
    }

    fn mix_term(&self, p: &GossipMatrix, i: usize) -> Vector {
        let held = &self.copies[i];
        let own = &held[&i];
        let mut out = vector::zeros(own.len());
        for &j in p.neighbors(i) {
            if j != i {
                let diff = vector::sub(&held[&j], own);
                vector::axpy(&mut out, p.get(i, j), &diff);
            }
        }
        out
    }

    fn apply(&mut self, _p: &GossipMatrix, q: &[Vector]) {
        for held in &mut self.copies {
            for (j, copy) in held.iter_mut() {
                vector::add_assign(copy, &q[*j]);
            }
        }
    }

    fn is_consistent(&self) -> bool {
        (0..self.n()).all(|j| {
            let own = self.own(j);
            self.copies.iter().all(|held| held.get(&j).is_none_or(|c| c.as_slice() == own))
        })
    }
}

/// `x̂_i` plus the running weighted sum `s_i = Σ_j P_ij x̂_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientReplicas {
    pub x_hat: Vec<Vector>,
    pub s: Vec<Vector>,
}

impl EfficientReplicas {
    pub fn new(p: &GossipMatrix, hats: &[Vector]) -> Self {
        let s = (0..p.n()).map(|i| p.mix(i, hats)).collect();
        Self {
            x_hat: hats.to_vec(),
            s,
        }
    }
}

impl ReplicaStore for EfficientReplicas {
    fn n(&self) -> usize {
        self.x_hat.len()
    }

    fn own(&self, i: usize) -> &[f64] {
        &self.x_hat[i]
    }

    fn mix_term(&self, _p: &GossipMatrix, i: usize) -> Vector {
        vector::sub(&self.s[i], &self.x_hat[i])
    }

    fn apply(&mut self, p: &GossipMatrix, q: &[Vector]) {
        for (i, s) in self.s.iter_mut().enumerate() {
            vector::add_assign(&mut self.x_hat[i], &q[i]);
            vector::add_assign(s, &p.mix(i, q));
        }
    }

    fn is_consistent(&self) -> bool {
        true
    }
}

/// Runtime choice between the two stores.
#[derive(Debug, Clone, PartialEq)]
pub enum Replicas {
    Naive(NaiveReplicas),
    Efficient(EfficientReplicas),
}

impl Replicas {
    pub fn new(engine: GossipEngine, p: &GossipMatrix, hats: &[Vector]) -> Self {
        match engine {
            GossipEngine::Naive => Replicas::Naive(NaiveReplicas::new(p, hats)),
            GossipEngine::Efficient => Replicas::Efficient(EfficientReplicas::new(p, hats)),
        }
    }
}

impl ReplicaStore for Replicas {
    fn n(&self) -> usize {
        match self {
            Replicas::Naive(r) => r.n(),
            Replicas::Efficient(r) => r.n(),
        }
    }
    fn own(&self, i: usize) -> &[f64] {
        match self {
            Replicas::Naive(r) => r.own(i),
            Replicas::Efficient(r) => r.own(i),
        }
    }
    fn mix_term(&self, p: &GossipMatrix, i: usize) -> Vector {
        match self {
            Replicas::Naive(r) => r.mix_term(p, i),
            Replicas::Efficient(r) => r.mix_term(p, i),
        }
    }
    fn apply(&mut self, p: &GossipMatrix, q: &[Vector]) {
        match self {
            Replicas::Naive(r) => r.apply(p, q),
            Replicas::Efficient(r) => r.apply(p, q),
        }
    }
    fn is_consistent(&self) -> bool {
        match self {
            Replicas::Naive(r) => r.is_consistent(),
            Replicas::Efficient(r) => r.is_consistent(),
        }
    }
}

/// Decisions `x_i` plus their public replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipState<S> {
    pub x: Vec<Vector>,
    pub replicas: S,
}

pub type NaiveGossipState = GossipState<NaiveReplicas>;
pub type EfficientGossipState = GossipState<EfficientReplicas>;

impl NaiveGossipState {
    /// `x̂ = 0`.
    pub fn naive(p: &GossipMatrix, x: Vec<Vector>) -> Self {
        let hats = vec![vector::zeros(x[0].len()); x.len()];
        Self::naive_with_hats(p, x, &hats)
    }

    pub fn naive_with_hats(p: &GossipMatrix, x: Vec<Vector>, hats: &[Vector]) -> Self {
        Self {
            replicas: NaiveReplicas::new(p, hats),
            x,
        }
    }
}

impl EfficientGossipState {
    /// `x̂ = 0`.
    pub fn efficient(p: &GossipMatrix, x: Vec<Vector>) -> Self {
        let hats = vec![vector::zeros(x[0].len()); x.len()];
        Self::efficient_with_hats(p, x, &hats)
    }

    pub fn efficient_with_hats(p: &GossipMatrix, x: Vec<Vector>, hats: &[Vector]) -> Self {
        Self {
            replicas: EfficientReplicas::new(p, hats),
            x,
        }
    }
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidStepSize(gamma))
    }
}

/// One synchronous Choco step: `x_i += γ Σ_j P_ij (x̂_j − x̂_i)`, then each
/// learner broadcasts `q_i = C(x_i − x̂_i)` and every holder adds it to `x̂_i`.
/// Randomness for learner `i` comes from [`message_rng`]`(seed, i, step)`.
pub fn choco_step<S: ReplicaStore>(
    state: &mut GossipState<S>,
    p: &GossipMatrix,
    gamma: f64,
    kind: &CompressorKind,
    seed: u64,
    step: u64,
) -> Result<Vec<CompressedPayload>> {
    check_gamma(gamma)?;
    let n = state.x.len();
    let mixes: Vec<Vector> = (0..n).map(|i| state.replicas.mix_term(p, i)).collect();
    for (x, m) in state.x.iter_mut().zip(&mixes) {
        vector::axpy(x, gamma, m);
    }
    let mut payloads = Vec::with_capacity(n);
    for i in 0..n {
        let delta = vector::sub(&state.x[i], state.replicas.own(i));
        payloads.push(compress(kind, &delta, &mut message_rng(seed, i, step))?);
    }
    let q: Vec<Vector> = payloads.iter().map(|pl| pl.dense.clone()).collect();
    state.replicas.apply(p, &q);
    Ok(payloads)
}

/// [`choco_step`] specialised to the three-variable form.
pub fn choco_step_efficient(
    state: &mut EfficientGossipState,
    p: &GossipMatrix,
    gamma: f64,
    kind: &CompressorKind,
    seed: u64,
    step: u64,
) -> Result<Vec<CompressedPayload>> {
    choco_step(state, p, gamma, kind, seed, step)
}

/// `(Σ_i ‖x_i − x̄‖², Σ_i ‖x_i − x̂_i‖²)`.
pub fn consensus_error<S: ReplicaStore>(state: &GossipState<S>) -> (f64, f64) {
    let e_cons = vector::spread(&state.x);
    let e_comp = state
        .x
        .iter()
        .enumerate()
        .map(|(i, x)| vector::dist_sq(x, state.replicas.own(i)))
        .sum();
    (e_cons, e_comp)
}
