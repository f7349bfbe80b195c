//! Feasible domains and Euclidean projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{self, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Euclidean ball of radius `R` centered at the origin.
    Ball {
        #[serde(rename = "R")]
        radius: f64,
    },
    /// `[-half_width, half_width]^d`.
    Box { half_width: f64 },
    /// `[lo, hi]^d`; may leave the origin on the boundary.
    ShiftedBox { lo: f64, hi: f64 },
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Ball { radius } => radius > 0.0 && radius.is_finite(),
            Domain::Box { half_width } => half_width > 0.0 && half_width.is_finite(),
            Domain::ShiftedBox { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}")))
        }
    }

    /// Radius `r` of the largest origin-centered ball inside the domain.
    pub fn inner_radius(&self) -> f64 {
        match *self {
            Domain::Ball { radius } => radius,
            Domain::Box { half_width } => half_width,
            Domain::ShiftedBox { lo, hi } => (-lo).min(hi).max(0.0),
        }
    }

    /// Radius `R` of the smallest origin-centered ball containing the domain.
    pub fn outer_radius(&self, d: usize) -> f64 {
        let sd = (d as f64).sqrt();
        match *self {
            Domain::Ball { radius } => radius,
            Domain::Box { half_width } => half_width * sd,
            Domain::ShiftedBox { lo, hi } => lo.abs().max(hi.abs()) * sd,
        }
    }

    pub fn diameter(&self, d: usize) -> f64 {
        let sd = (d as f64).sqrt();
        match *self {
            Domain::Ball { radius } => 2.0 * radius,
            Domain::Box { half_width } => 2.0 * half_width * sd,
            Domain::ShiftedBox { lo, hi } => (hi - lo) * sd,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match *self {
            Domain::Ball { radius } => vector::norm(x) <= radius + tol,
            Domain::Box { half_width } => x.iter().all(|v| v.abs() <= half_width + tol),
            Domain::ShiftedBox { lo, hi } => x.iter().all(|&v| v >= lo - tol && v <= hi + tol),
        }
    }

    pub fn project(&self, x: &[f64]) -> Vector {
        match *self {
            Domain::Ball { radius } => {
                let nrm = vector::norm(x);
                if nrm > radius {
                    vector::scaled(x, radius / nrm)
                } else {
                    x.to_vec()
                }
            }
            Domain::Box { half_width } => x.iter().map(|v| v.clamp(-half_width, half_width)).collect(),
            Domain::ShiftedBox { lo, hi } => x.iter().map(|v| v.clamp(lo, hi)).collect(),
        }
    }

    /// `(1 − ζ)·X`.
    pub fn shrink(&self, zeta: f64) -> Result<Domain> {
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::InvalidShrinkage(zeta));
        }
        let s = 1.0 - zeta;
        Ok(match *self {
            Domain::Ball { radius } => Domain::Ball { radius: radius * s },
            Domain::Box { half_width } => Domain::Box { half_width: half_width * s },
            Domain::ShiftedBox { lo, hi } => Domain::ShiftedBox { lo: lo * s, hi: hi * s },
        })
    }
}

/// `Π_X(x)`; free-function form of [`Domain::project`].
pub fn project(dom: &Domain, x: &[f64]) -> Vector {
    dom.project(x)
}

pub fn shrink(dom: &Domain, zeta: f64) -> Result<Domain> {
    dom.shrink(zeta)
}
