//! Per-round baselines: compressed DC-DOGD and uncompressed D-OGD.

use crate::compress::{charged_bytes, compress, CompressorKind};
use crate::error::Result;
use crate::gossip::{check_gamma, message_rng, ReplicaStore, Replicas};
use crate::vector::{self, Vector};

use super::{Accountant, Algorithm, RoundDiag, RunOutcome, RunSpec, Sink};

/// `x_i ← Π(x_i − η_t ∇f_{t,i}(x_i) + γ Σ_j P_ij (x̂_j − x̂_i))`, then every
/// learner broadcasts `C(x_i − x̂_i)`.
pub fn dc_dogd_run(spec: &RunSpec<'_>, mut sink: Sink<'_>) -> Result<RunOutcome> {
    let hp = spec.hp;
    check_gamma(hp.gamma)?;
    let stream = spec.stream;
    let (n, d) = (spec.p.n(), stream.d());
    let kind = spec.compressor;
    let mut acct = Accountant::new(spec)?;
    let mut x = vec![vector::zeros(d); n];
    let mut hat = Replicas::new(spec.engine, spec.p, &x);

    for t in 0..stream.horizon() {
        let round = stream.round(t);
        let form = round.aggregate();
        let eta = hp.eta.at(t + 1, 1);
        let plays: Vec<Vec<Vector>> = x.iter().map(|xi| vec![xi.clone()]).collect();
        let mut residuals = Vec::with_capacity(n);
        let next: Vec<Vector> = (0..n)
            .map(|i| {
                let mut v = x[i].clone();
                vector::axpy(&mut v, -eta, &round.grad(i, &x[i]));
                vector::axpy(&mut v, hp.gamma, &hat.mix_term(spec.p, i));
                let proj = spec.domain.project(&v);
                residuals.push(vector::norm(&vector::sub(&proj, &v)));
                proj
            })
            .collect();
        x = next;
        let payloads = (0..n)
            .map(|i| {
                let delta = vector::sub(&x[i], hat.own(i));
                compress(&kind, &delta, &mut message_rng(spec.seed, i, t as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        let q: Vec<Vector> = payloads.iter().map(|pl| pl.dense.clone()).collect();
        hat.apply(spec.p, &q);
        let charges: Vec<f64> = payloads.iter().map(|pl| charged_bytes(&kind, d, pl, spec.bytes)).collect();
        let diag = RoundDiag {
            e_consensus: vector::spread(&x),
            e_compression: (0..n).map(|i| vector::dist_sq(&x[i], hat.own(i))).sum(),
        };
        acct.close_round(t, t + 1, &form, plays, &charges, &diag, &residuals, &mut sink);
    }
    Ok(acct.finish(Algorithm::DcDogd, x))
}

/// `x_i ← Π(Σ_j P_ij x_j − η_t ∇f_{t,i}(x_i))` with full-precision messages.
/// The configured compressor is ignored.
pub fn d_ogd_run(spec: &RunSpec<'_>, mut sink: Sink<'_>) -> Result<RunOutcome> {
    let hp = spec.hp;
    let stream = spec.stream;
    let (n, d) = (spec.p.n(), stream.d());
    let full = CompressorKind::Identity;
    let mut acct = Accountant::new(spec)?;
    let mut x = vec![vector::zeros(d); n];

    for t in 0..stream.horizon() {
        let round = stream.round(t);
        let form = round.aggregate();
        let eta = hp.eta.at(t + 1, 1);
        let plays: Vec<Vec<Vector>> = x.iter().map(|xi| vec![xi.clone()]).collect();
        let mut residuals = Vec::with_capacity(n);
        let next: Vec<Vector> = (0..n)
            .map(|i| {
                let mut v = spec.p.mix(i, &x);
                vector::axpy(&mut v, -eta, &round.grad(i, &x[i]));
                let proj = spec.domain.project(&v);
                residuals.push(vector::norm(&vector::sub(&proj, &v)));
                proj
            })
            .collect();
        let charges: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let pl = compress(&full, xi, &mut message_rng(spec.seed, i, t as u64))?;
                Ok(charged_bytes(&full, d, &pl, spec.bytes))
            })
            .collect::<Result<Vec<_>>>()?;
        x = next;
        let diag = RoundDiag {
            e_consensus: vector::spread(&x),
            e_compression: 0.0,
        };
        acct.close_round(t, t + 1, &form, plays, &charges, &diag, &residuals, &mut sink);
    }
    Ok(acct.finish(Algorithm::DOgd, x))
}
