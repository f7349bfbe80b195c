//! Two-level blocking: Top-DOGD and its bandit variants.
//!
//! Rounds are grouped into blocks of `L = L1 + L2`. Within block `b` every
//! learner keeps playing its committed decision `x_i(b)`, spends the first
//! `L1` rounds on compressed gossip of the surrogate `y_i`, and the last `L2`
//! rounds on transmitting the projection residual `r_i = Π(y_i) − y_i`
//! through the repeated compressor. Block 1 plays 0 and only accumulates
//! gradients, so every committed decision lags its gradients by one block.

use crate::adversary::{one_point_estimate, two_point_estimate};
use crate::compress::{charged_bytes, compress, CompressedPayload, CompressorKind};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::gossip::{check_gamma, message_rng, GossipEngine, ReplicaStore, Replicas};
use crate::rng::{sub_stream, Purpose};
use crate::topology::GossipMatrix;
use crate::vector::{self, Vector};

use super::{Accountant, Algorithm, RoundDiag, RunOutcome, RunSpec, Sink};

/// Tolerance for the feasibility check on committed decisions.
const FEASIBILITY_TOL: f64 = 1e-12;

/// Per-learner state of a two-level learner. The replica store holds `ŷ_j`
/// during gossip and `x̂_j` at block boundaries.
#[derive(Debug, Clone)]
pub struct TwoLevelState {
    /// Committed decisions `x_i(b)`.
    pub x: Vec<Vector>,
    /// Gossip surrogates `y_i`.
    pub y: Vec<Vector>,
    pub hat: Replicas,
    /// Gradient sums of the previous block, `z_i(b − 1)`.
    pub z_prev: Vec<Vector>,
    /// Gradient sums of the current block.
    pub z_cur: Vec<Vector>,
    /// Projected surrogates `Π(y_i)`, set once gossip ends.
    pub next_x: Vec<Vector>,
    /// Projection residuals `r_i = Π(y_i) − y_i`.
    pub r: Vec<Vector>,
    /// Compressed running sums of the residuals.
    pub r_hat: Vec<Vector>,
    gossip_finished: bool,
}

impl TwoLevelState {
    /// All decisions and replicas start at 0.
    pub fn new(p: &GossipMatrix, d: usize, engine: GossipEngine) -> Self {
        let zeros = vec![vector::zeros(d); p.n()];
        Self {
            x: zeros.clone(),
            y: zeros.clone(),
            hat: Replicas::new(engine, p, &zeros),
            z_prev: zeros.clone(),
            z_cur: zeros.clone(),
            next_x: zeros.clone(),
            r: zeros.clone(),
            r_hat: zeros,
            gossip_finished: false,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `y_i = x_i(b) − η z_i(b − 1)`; `ŷ` starts from the current `x̂`.
    pub fn begin_block(&mut self, eta: f64) {
        for i in 0..self.n() {
            let mut y = self.x[i].clone();
            vector::axpy(&mut y, -eta, &self.z_prev[i]);
            self.y[i] = y;
        }
        self.gossip_finished = false;
    }

    /// One round of online compressed gossip: broadcast `q_i = C(y_i − ŷ_i)`,
    /// update every replica, then `y_i += γ Σ_j P_ij (ŷ_j − ŷ_i)` on the new
    /// replicas.
    pub fn gossip_round(
        &mut self,
        p: &GossipMatrix,
        gamma: f64,
        kind: &CompressorKind,
        seed: u64,
        step: u64,
    ) -> Result<Vec<CompressedPayload>> {
        check_gamma(gamma)?;
        let n = self.n();
        let mut payloads = Vec::with_capacity(n);
        for i in 0..n {
            let delta = vector::sub(&self.y[i], self.hat.own(i));
            payloads.push(compress(kind, &delta, &mut message_rng(seed, i, step))?);
        }
        let q: Vec<Vector> = payloads.iter().map(|pl| pl.dense.clone()).collect();
        self.hat.apply(p, &q);
        for i in 0..n {
            let m = self.hat.mix_term(p, i);
            vector::axpy(&mut self.y[i], gamma, &m);
        }
        Ok(payloads)
    }

    /// Fixes `Π(y_i)` and the residual to be transmitted; resets `r̂` to 0.
    pub fn finish_gossip(&mut self, dom: &Domain) {
        for i in 0..self.n() {
            let proj = dom.project(&self.y[i]);
            self.r[i] = vector::sub(&proj, &self.y[i]);
            self.next_x[i] = proj;
            self.r_hat[i] = vector::zeros(self.y[i].len());
        }
        self.gossip_finished = true;
    }

    /// One round of the residual's repeated compression: `Δ_i = C(r_i − r̂_i)`,
    /// `r̂_i += Δ_i`.
    pub fn compensation_round(&mut self, kind: &CompressorKind, seed: u64, step: u64) -> Result<Vec<CompressedPayload>> {
        let n = self.n();
        let mut payloads = Vec::with_capacity(n);
        for i in 0..n {
            let delta = vector::sub(&self.r[i], &self.r_hat[i]);
            let pl = compress(kind, &delta, &mut message_rng(seed, i, step))?;
            vector::add_assign(&mut self.r_hat[i], &pl.dense);
            payloads.push(pl);
        }
        Ok(payloads)
    }

    /// `x_i(b+1) = Π(y_i)`, `x̂_i(b+1) = ŷ_i + r̂_i`, and the block's gradient
    /// sum becomes `z_i(b)`.
    pub fn commit(&mut self, p: &GossipMatrix, dom: &Domain) -> Result<()> {
        if !self.gossip_finished {
            self.finish_gossip(dom);
        }
        for (i, x) in self.next_x.iter().enumerate() {
            if !dom.contains(x, FEASIBILITY_TOL) {
                return Err(Error::InternalInvariant(format!("learner {i} committed a point outside the domain")));
            }
        }
        self.x.clone_from(&self.next_x);
        // every holder of ŷ_j adds the received residual sum r̂_j
        self.hat.apply(p, &self.r_hat);
        self.rotate_gradients();
        self.gossip_finished = false;
        Ok(())
    }

    /// End of the first block: decisions and replicas stay at 0.
    pub fn commit_idle(&mut self) {
        self.rotate_gradients();
    }

    fn rotate_gradients(&mut self) {
        let fresh = vec![vector::zeros(self.x[0].len()); self.n()];
        self.z_prev = std::mem::replace(&mut self.z_cur, fresh);
    }

    pub fn add_gradient(&mut self, i: usize, g: &[f64]) {
        vector::add_assign(&mut self.z_cur[i], g);
    }

    pub fn mean_y(&self) -> Vector {
        vector::mean(&self.y)
    }

    fn residual_norms(&self) -> Vec<f64> {
        self.r.iter().map(|r| vector::norm(r)).collect()
    }

    fn gossip_diag(&self) -> RoundDiag {
        RoundDiag {
            e_consensus: vector::spread(&self.y),
            e_compression: (0..self.n()).map(|i| vector::dist_sq(&self.y[i], self.hat.own(i))).sum(),
        }
    }

    /// Gap between the upcoming decisions and the replicas they will get.
    fn compensation_diag(&self) -> RoundDiag {
        RoundDiag {
            e_consensus: vector::spread(&self.next_x),
            e_compression: (0..self.n())
                .map(|i| {
                    let mut hat = self.hat.own(i).to_vec();
                    vector::add_assign(&mut hat, &self.r_hat[i]);
                    vector::dist_sq(&self.next_x[i], &hat)
                })
                .sum(),
        }
    }

    fn idle_diag(&self) -> RoundDiag {
        RoundDiag {
            e_consensus: vector::spread(&self.x),
            e_compression: (0..self.n()).map(|i| vector::dist_sq(&self.x[i], self.hat.own(i))).sum(),
        }
    }
}

/// `l1` consecutive gossip rounds with steps `first_step..first_step + l1`.
#[allow(clippy::too_many_arguments)]
pub fn gossip_subblock(
    state: &mut TwoLevelState,
    p: &GossipMatrix,
    gamma: f64,
    kind: &CompressorKind,
    l1: usize,
    seed: u64,
    first_step: u64,
) -> Result<Vec<Vec<CompressedPayload>>> {
    (0..l1 as u64)
        .map(|k| state.gossip_round(p, gamma, kind, seed, first_step + k))
        .collect()
}

/// Computes the residual on `dom` and runs `l2` compensation rounds.
pub fn compensation_subblock(
    state: &mut TwoLevelState,
    dom: &Domain,
    kind: &CompressorKind,
    l2: usize,
    seed: u64,
    first_step: u64,
) -> Result<Vec<Vec<CompressedPayload>>> {
    state.finish_gossip(dom);
    (0..l2 as u64)
        .map(|k| state.compensation_round(kind, seed, first_step + k))
        .collect()
}

pub fn block_commit(state: &mut TwoLevelState, p: &GossipMatrix, dom: &Domain) -> Result<()> {
    state.commit(p, dom)
}

#[derive(Debug, Clone, Copy)]
enum Feedback {
    Full,
    OnePoint { eps: f64 },
    TwoPoint { eps: f64 },
}

pub fn top_dogd_run(spec: &RunSpec<'_>, sink: Sink<'_>) -> Result<RunOutcome> {
    run_two_level(spec, sink, Feedback::Full, Algorithm::TopDogd)
}

/// One-point bandit feedback.
pub fn top_dobd1_run(spec: &RunSpec<'_>, sink: Sink<'_>) -> Result<RunOutcome> {
    let eps = bandit_eps(spec)?;
    run_two_level(spec, sink, Feedback::OnePoint { eps }, Algorithm::TopDobd1)
}

/// Two-point bandit feedback.
pub fn top_dobd2_run(spec: &RunSpec<'_>, sink: Sink<'_>) -> Result<RunOutcome> {
    let eps = bandit_eps(spec)?;
    run_two_level(spec, sink, Feedback::TwoPoint { eps }, Algorithm::TopDobd2)
}

fn bandit_eps(spec: &RunSpec<'_>) -> Result<f64> {
    let e = spec
        .hp
        .exploration
        .ok_or_else(|| Error::Config("bandit learners need an exploration radius".into()))?;
    let r = spec.domain.inner_radius();
    if !(r > 0.0) {
        return Err(Error::InvalidDomain(format!("inner radius {r} is not positive")));
    }
    if !(e.eps > 0.0 && e.eps <= r) {
        return Err(Error::InvalidExploration {
            eps: e.eps,
            inner_radius: r,
        });
    }
    Ok(e.eps)
}

fn run_two_level(spec: &RunSpec<'_>, mut sink: Sink<'_>, feedback: Feedback, algorithm: Algorithm) -> Result<RunOutcome> {
    let hp = spec.hp;
    hp.validate(true)?;
    let stream = spec.stream;
    let horizon = stream.horizon();
    let l = hp.block_len();
    if horizon < l {
        return Err(Error::HorizonTooShort { horizon, block: l });
    }
    let d = stream.d();
    let n = spec.p.n();
    let kind = spec.compressor;
    let dom = match feedback {
        Feedback::Full => spec.domain,
        Feedback::OnePoint { .. } | Feedback::TwoPoint { .. } => spec.domain.shrink(hp.exploration.map(|e| e.zeta).unwrap_or(0.0))?,
    };
    let mut acct = Accountant::new(spec)?;
    let mut state = TwoLevelState::new(spec.p, d, spec.engine);
    let zero = vector::zeros(d);

    for t in 0..horizon {
        let b = t / l + 1;
        let k = t % l;
        if k == 0 && b >= 2 {
            state.begin_block(hp.eta.at(b, l));
        }
        let round = stream.round(t);
        let form = round.aggregate();

        let mut plays = Vec::with_capacity(n);
        for i in 0..n {
            let center = state.x[i].clone();
            match feedback {
                Feedback::Full => {
                    let g = round.grad(i, &center);
                    state.add_gradient(i, &g);
                    plays.push(vec![center]);
                }
                Feedback::OnePoint { eps } | Feedback::TwoPoint { eps } => {
                    let mut rng = sub_stream(spec.seed, Purpose::Explore, i as u64, t as u64);
                    let est = if matches!(feedback, Feedback::OnePoint { .. }) {
                        one_point_estimate(&round, i, &center, eps, &spec.domain, &mut rng)?
                    } else {
                        two_point_estimate(&round, i, &center, eps, &spec.domain, &mut rng)?
                    };
                    state.add_gradient(i, &est.ghat);
                    plays.push(est.queries);
                }
            }
        }

        let step = t as u64;
        let (payloads, diag) = if b == 1 {
            // nothing to say yet: an empty compressed message keeps the
            // one-message-per-round cadence
            let payloads = (0..n)
                .map(|i| compress(&kind, &zero, &mut message_rng(spec.seed, i, step)))
                .collect::<Result<Vec<_>>>()?;
            (payloads, state.idle_diag())
        } else if k < hp.l1 {
            let payloads = state.gossip_round(spec.p, hp.gamma, &kind, spec.seed, step)?;
            (payloads, state.gossip_diag())
        } else {
            if k == hp.l1 {
                state.finish_gossip(&dom);
            }
            let payloads = state.compensation_round(&kind, spec.seed, step)?;
            (payloads, state.compensation_diag())
        };
        let charges: Vec<f64> = payloads.iter().map(|pl| charged_bytes(&kind, d, pl, spec.bytes)).collect();
        acct.close_round(t, b, &form, plays, &charges, &diag, &state.residual_norms(), &mut sink);

        if k == l - 1 {
            if b == 1 {
                state.commit_idle();
            } else {
                state.commit(spec.p, &dom)?;
            }
        }
    }
    Ok(acct.finish(algorithm, state.x))
}
