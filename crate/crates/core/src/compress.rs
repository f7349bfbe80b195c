//! ω-contractive compression operators, the repeated compressor, and the
//! byte-cost model used by the communication ledger.
//!
//! Every operator satisfies `E‖C(x) − x‖² ≤ (1 − ω)‖x‖²` with `ω` given by
//! [`omega_of`]. The byte model counts 8-byte values and 4-byte coordinate
//! indices and ignores framing.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{self, Vector};

const VALUE_BYTES: u64 = 8;
const INDEX_BYTES: u64 = 4;
/// Cost of the "nothing sent" signal of the randomized gossip compressor.
const MISS_SIGNAL_BYTES: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompressorKind {
    Identity,
    RandK { k: usize },
    TopK { k: usize },
    RandomizedGossip { p: f64 },
    /// Stochastic sign quantization scaled by `1/tau`; `tau` defaults to `√d`.
    RescaledUnbiased {
        #[serde(default)]
        tau: Option<f64>,
    },
}

impl CompressorKind {
    pub fn name(&self) -> &'static str {
        match self {
            CompressorKind::Identity => "identity",
            CompressorKind::RandK { .. } => "rand_k",
            CompressorKind::TopK { .. } => "top_k",
            CompressorKind::RandomizedGossip { .. } => "randomized_gossip",
            CompressorKind::RescaledUnbiased { .. } => "rescaled_unbiased",
        }
    }

    /// Resolved rescaling factor of `rescaled_unbiased` for dimension `d`.
    pub fn tau(&self, d: usize) -> Option<f64> {
        match self {
            CompressorKind::RescaledUnbiased { tau } => Some(tau.unwrap_or((d as f64).sqrt())),
            _ => None,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidCompressor("dimension must be positive".into()));
        }
        match *self {
            CompressorKind::Identity => Ok(()),
            CompressorKind::RandK { k } | CompressorKind::TopK { k } => {
                if k == 0 || k > d {
                    Err(Error::InvalidCompressor(format!("k={k} must lie in [1, {d}]")))
                } else {
                    Ok(())
                }
            }
            CompressorKind::RandomizedGossip { p } => {
                if p > 0.0 && p <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidCompressor(format!("p={p} outside (0, 1]")))
                }
            }
            CompressorKind::RescaledUnbiased { .. } => {
                let tau = self.tau(d).unwrap();
                // The sign quantizer has second moment ‖x‖·‖x‖₁ ≤ √d‖x‖², so
                // contraction needs tau ≥ √d.
                if tau.is_finite() && tau >= (d as f64).sqrt() - 1e-12 {
                    Ok(())
                } else {
                    Err(Error::InvalidCompressor(format!(
                        "tau={tau} must be at least sqrt(d)={}",
                        (d as f64).sqrt()
                    )))
                }
            }
        }
    }
}

impl fmt::Display for CompressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompressorKind::Identity => write!(f, "identity"),
            CompressorKind::RandK { k } => write!(f, "rand_k(k={k})"),
            CompressorKind::TopK { k } => write!(f, "top_k(k={k})"),
            CompressorKind::RandomizedGossip { p } => write!(f, "randomized_gossip(p={p})"),
            CompressorKind::RescaledUnbiased { tau: Some(t) } => write!(f, "rescaled_unbiased(tau={t})"),
            CompressorKind::RescaledUnbiased { tau: None } => write!(f, "rescaled_unbiased(tau=sqrt(d))"),
        }
    }
}

/// How the ledger charges randomized messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByteMode {
    #[default]
    Expected,
    Realized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedPayload {
    /// The value `C(x)` the receiving side adds to its replica.
    pub dense: Vector,
    /// Realized size of this message on the wire.
    pub wire_bytes: u64,
}

pub fn omega_of(kind: &CompressorKind, d: usize) -> f64 {
    match *kind {
        CompressorKind::Identity => 1.0,
        CompressorKind::RandK { k } | CompressorKind::TopK { k } => k as f64 / d as f64,
        CompressorKind::RandomizedGossip { p } => p,
        CompressorKind::RescaledUnbiased { .. } => 1.0 / kind.tau(d).unwrap(),
    }
}

/// Size of a transmitted message; for randomized gossip this is the size when
/// the vector is actually sent.
pub fn payload_bytes(kind: &CompressorKind, d: usize) -> u64 {
    let d = d as u64;
    match *kind {
        CompressorKind::Identity => VALUE_BYTES * d,
        CompressorKind::RandK { k } | CompressorKind::TopK { k } => k as u64 * (VALUE_BYTES + INDEX_BYTES),
        CompressorKind::RandomizedGossip { .. } => VALUE_BYTES * d + MISS_SIGNAL_BYTES,
        CompressorKind::RescaledUnbiased { .. } => {
            let tau = kind.tau(d as usize).unwrap();
            ((VALUE_BYTES * d) as f64 / tau).ceil() as u64
        }
    }
}

/// Expected size of one message: `p·8d + 1` for randomized gossip, otherwise
/// [`payload_bytes`].
pub fn expected_payload_bytes(kind: &CompressorKind, d: usize) -> f64 {
    match *kind {
        CompressorKind::RandomizedGossip { p } => p * (VALUE_BYTES * d as u64) as f64 + MISS_SIGNAL_BYTES as f64,
        _ => payload_bytes(kind, d) as f64,
    }
}

/// Bytes the ledger charges for `payload` under `mode`.
pub fn charged_bytes(kind: &CompressorKind, d: usize, payload: &CompressedPayload, mode: ByteMode) -> f64 {
    match mode {
        ByteMode::Expected => expected_payload_bytes(kind, d),
        ByteMode::Realized => payload.wire_bytes as f64,
    }
}

pub fn compress<R: Rng + ?Sized>(kind: &CompressorKind, x: &[f64], rng: &mut R) -> Result<CompressedPayload> {
    let d = x.len();
    kind.validate(d)?;
    let wire = payload_bytes(kind, d);
    let payload = match *kind {
        CompressorKind::Identity => CompressedPayload {
            dense: x.to_vec(),
            wire_bytes: wire,
        },
        CompressorKind::RandK { k } => {
            let mut idx: Vec<usize> = (0..d).collect();
            let (chosen, _) = idx.partial_shuffle(rng, k);
            let mut dense = vector::zeros(d);
            for &c in chosen.iter() {
                dense[c] = x[c];
            }
            CompressedPayload { dense, wire_bytes: wire }
        }
        CompressorKind::TopK { k } => {
            let mut idx: Vec<usize> = (0..d).collect();
            // stable sort: equal magnitudes keep ascending index order
            idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
            let mut dense = vector::zeros(d);
            for &c in &idx[..k] {
                dense[c] = x[c];
            }
            CompressedPayload { dense, wire_bytes: wire }
        }
        CompressorKind::RandomizedGossip { p } => {
            if rng.random::<f64>() < p {
                CompressedPayload {
                    dense: x.to_vec(),
                    wire_bytes: wire,
                }
            } else {
                CompressedPayload {
                    dense: vector::zeros(d),
                    wire_bytes: MISS_SIGNAL_BYTES,
                }
            }
        }
        CompressorKind::RescaledUnbiased { .. } => {
            let tau = kind.tau(d).unwrap();
            let nrm = vector::norm(x);
            let mut dense = vector::zeros(d);
            if nrm > 0.0 {
                for (out, &v) in dense.iter_mut().zip(x) {
                    if rng.random::<f64>() < v.abs() / nrm {
                        *out = nrm * v.signum() / tau;
                    }
                }
            }
            CompressedPayload { dense, wire_bytes: wire }
        }
    };
    Ok(payload)
}

#[derive(Debug, Clone)]
pub struct RepeatedCompression {
    pub total: Vector,
    pub deltas: Vec<CompressedPayload>,
}

/// `c₀ = 0; Δᵢ = C(x − cᵢ₋₁); cᵢ = cᵢ₋₁ + Δᵢ`, for `rounds` rounds.
pub fn repeated_compress<R: Rng + ?Sized>(
    kind: &CompressorKind,
    x: &[f64],
    rounds: usize,
    rng: &mut R,
) -> Result<RepeatedCompression> {
    if rounds == 0 {
        return Err(Error::InvalidRounds(rounds));
    }
    let mut total = vector::zeros(x.len());
    let mut deltas = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let delta = compress(kind, &vector::sub(x, &total), rng)?;
        vector::add_assign(&mut total, &delta.dense);
        deltas.push(delta);
    }
    Ok(RepeatedCompression { total, deltas })
}
