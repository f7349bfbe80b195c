//! Block lengths, step sizes and exploration radii.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step size schedule, evaluated per block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum EtaSchedule {
    Constant { eta: f64 },
    /// `η_b = 1/(μ(bL + 8))`
    StronglyConvex { mu: f64 },
}

impl EtaSchedule {
    /// Step size of block `b` (1-based) with blocks of length `l`. Per-round
    /// methods call this with `l = 1` and `b = t`.
    pub fn at(&self, b: usize, l: usize) -> f64 {
        match *self {
            EtaSchedule::Constant { eta } => eta,
            EtaSchedule::StronglyConvex { mu } => 1.0 / (mu * ((b * l) as f64 + 8.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub eps: f64,
    /// Shrinkage `ζ = ε/r`.
    pub zeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub l1: usize,
    pub l2: usize,
    pub gamma: f64,
    pub eta: EtaSchedule,
    pub exploration: Option<Exploration>,
}

impl HyperParams {
    pub fn block_len(&self) -> usize {
        self.l1 + self.l2
    }

    pub fn validate(&self, allow_zero_l2: bool) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidStepSize(self.gamma));
        }
        if self.l1 == 0 {
            return Err(Error::Config("L1 must be at least 1".into()));
        }
        if self.l2 == 0 && !allow_zero_l2 {
            return Err(Error::Config("L2 = 0 requires the ablation flag".into()));
        }
        let eta_ok = match self.eta {
            EtaSchedule::Constant { eta } => eta > 0.0 && eta.is_finite(),
            EtaSchedule::StronglyConvex { mu } => mu > 0.0 && mu.is_finite(),
        };
        if !eta_ok {
            return Err(Error::Config(format!("invalid step size schedule {:?}", self.eta)));
        }
        if let Some(e) = self.exploration {
            if !(e.eps > 0.0) || !(e.zeta > 0.0 && e.zeta < 1.0) {
                return Err(Error::InvalidExploration {
                    eps: e.eps,
                    inner_radius: e.eps / e.zeta,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HyperMode {
    Convex,
    StronglyConvex { mu: f64 },
    Bandit1Convex,
    Bandit1Sc { mu: f64 },
    Bandit2Convex,
    Bandit2Sc { mu: f64 },
}

impl HyperMode {
    pub fn is_bandit(&self) -> bool {
        !matches!(self, HyperMode::Convex | HyperMode::StronglyConvex { .. })
    }
}

/// Problem constants the derivation depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    pub n: usize,
    pub d: usize,
    pub omega: f64,
    pub rho: f64,
    pub beta: f64,
    /// Gradient bound `G`.
    pub g: f64,
    /// Domain diameter `D`.
    pub diameter: f64,
    pub horizon: usize,
    /// `r` with `r𝓑 ⊆ 𝒳`.
    pub inner_radius: f64,
    /// `R` with `𝒳 ⊆ R𝓑`.
    pub outer_radius: f64,
}

/// Field-by-field replacements applied after derivation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperOverrides {
    #[serde(rename = "L1")]
    pub l1: Option<usize>,
    #[serde(rename = "L2")]
    pub l2: Option<usize>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    /// Permits `L2 = 0`.
    #[serde(default)]
    pub ablate_compensation: bool,
}

impl HyperOverrides {
    pub fn is_empty(&self) -> bool {
        *self == HyperOverrides::default()
    }
}

pub fn gamma_formula(omega: f64, rho: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    omega * rho / (2.0 * rho * b2 + 4.0 * b2 + (2.0 - omega) * (b2 + 2.0 * beta) * rho + rho * rho)
}

/// `⌈2 ln(14n)/(γρ)⌉`
pub fn l1_formula(n: usize, gamma: f64, rho: f64) -> usize {
    (2.0 * (14.0 * n as f64).ln() / (gamma * rho)).ceil() as usize
}

/// `⌈ln(8n)/ω⌉`
pub fn l2_formula(n: usize, omega: f64) -> usize {
    ((8.0 * n as f64).ln() / omega).ceil() as usize
}

fn unscaled_eps(mode: HyperMode, d: f64, l: f64, t: f64) -> Option<f64> {
    match mode {
        HyperMode::Bandit1Convex => Some(d.sqrt() * l.powf(0.25) * t.powf(-0.25)),
        HyperMode::Bandit1Sc { .. } => Some(d.powf(2.0 / 3.0) * l.powf(1.0 / 3.0) * ((t + 8.0).ln() / t).powf(1.0 / 3.0)),
        HyperMode::Bandit2Convex => Some(t.powf(-0.5)),
        HyperMode::Bandit2Sc { .. } => Some(t.ln().max(1.0) / t),
        _ => None,
    }
}

/// Exploration radius `ε = c·ε₁` with `c = min(1, r/(2ε₁))`, so `ε ≤ r/2` and
/// the shrinkage `ζ = ε/r` stays inside `(0, 1)`.
pub fn exploration_for(mode: HyperMode, d: usize, l: usize, horizon: usize, inner_radius: f64) -> Option<Exploration> {
    let e1 = unscaled_eps(mode, d as f64, l as f64, horizon as f64)?;
    let c = (inner_radius / (2.0 * e1)).min(1.0);
    let eps = c * e1;
    Some(Exploration {
        eps,
        zeta: eps / inner_radius,
    })
}

pub fn derive_hyperparams(k: &ProblemConstants, mode: HyperMode, overrides: &HyperOverrides) -> Result<HyperParams> {
    if !(k.omega > 0.0 && k.omega <= 1.0) {
        return Err(Error::InvalidCompressor(format!("omega={} outside (0, 1]", k.omega)));
    }
    if !(k.rho > 0.0 && k.rho <= 1.0) || !(0.0..=2.0).contains(&k.beta) {
        return Err(Error::InvalidMatrix(format!("rho={} beta={} out of range", k.rho, k.beta)));
    }
    if mode.is_bandit() && !(k.inner_radius > 0.0) {
        return Err(Error::InvalidDomain(format!(
            "bandit feedback needs a positive inner radius, got {}",
            k.inner_radius
        )));
    }
    let gamma = overrides.gamma.unwrap_or_else(|| gamma_formula(k.omega, k.rho, k.beta));
    let l1 = overrides.l1.unwrap_or_else(|| l1_formula(k.n, gamma, k.rho));
    let l2 = overrides.l2.unwrap_or_else(|| l2_formula(k.n, k.omega));
    let l = l1 + l2;
    if k.horizon < l {
        return Err(Error::HorizonTooShort {
            horizon: k.horizon,
            block: l,
        });
    }

    let lt = ((l * k.horizon) as f64).sqrt();
    let mut exploration = exploration_for(mode, k.d, l, k.horizon, k.inner_radius);
    if let (Some(eps), Some(e)) = (overrides.eps, exploration.as_mut()) {
        e.eps = eps;
        e.zeta = eps / k.inner_radius;
    }
    let eta = match mode {
        HyperMode::Convex => EtaSchedule::Constant {
            eta: k.diameter / (k.g * lt),
        },
        HyperMode::Bandit1Convex => EtaSchedule::Constant {
            eta: k.outer_radius * exploration.map(|e| e.eps).unwrap_or(0.0) / (k.d as f64 * lt),
        },
        HyperMode::Bandit2Convex => EtaSchedule::Constant {
            eta: k.outer_radius / (k.d as f64 * k.g * lt),
        },
        HyperMode::StronglyConvex { mu } | HyperMode::Bandit1Sc { mu } | HyperMode::Bandit2Sc { mu } => {
            EtaSchedule::StronglyConvex { mu }
        }
    };
    let eta = match overrides.eta {
        Some(eta) => EtaSchedule::Constant { eta },
        None => eta,
    };
    let hp = HyperParams {
        l1,
        l2,
        gamma,
        eta,
        exploration,
    };
    hp.validate(overrides.ablate_compensation)?;
    if let Some(e) = hp.exploration {
        if e.eps > k.inner_radius {
            return Err(Error::InvalidExploration {
                eps: e.eps,
                inner_radius: k.inner_radius,
            });
        }
    }
    Ok(hp)
}

/// Parameters of the per-round baselines: `γ` from the same formula,
/// `η = D/(G√T)` for convex losses and `η_t = 1/(μ(t + 8))` otherwise.
/// Block lengths are reported as `L1 = 1, L2 = 0` and unused.
pub fn derive_per_round(k: &ProblemConstants, mode: HyperMode, overrides: &HyperOverrides) -> Result<HyperParams> {
    if !(k.omega > 0.0 && k.omega <= 1.0) {
        return Err(Error::InvalidCompressor(format!("omega={} outside (0, 1]", k.omega)));
    }
    let gamma = overrides.gamma.unwrap_or_else(|| gamma_formula(k.omega, k.rho, k.beta));
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidStepSize(gamma));
    }
    let eta = match (overrides.eta, mode) {
        (Some(eta), _) => EtaSchedule::Constant { eta },
        (None, HyperMode::StronglyConvex { mu } | HyperMode::Bandit1Sc { mu } | HyperMode::Bandit2Sc { mu }) => {
            EtaSchedule::StronglyConvex { mu }
        }
        (None, _) => EtaSchedule::Constant {
            eta: k.diameter / (k.g * (k.horizon as f64).sqrt()),
        },
    };
    Ok(HyperParams {
        l1: 1,
        l2: 0,
        gamma,
        eta,
        exploration: None,
    })
}
