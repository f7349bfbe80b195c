//! Regret from recorded plays, and regret-versus-horizon fits.

use crate::adversary::LossStream;
use crate::algorithms::Plays;
use crate::error::{Error, Result};

use super::{run_experiment_with, ExperimentConfig};

fn check_plays(stream: &dyn LossStream, plays: &Plays) -> Result<()> {
    if plays.len() != stream.horizon() {
        return Err(Error::InvalidPairing(format!(
            "{} recorded rounds for a stream of horizon {}",
            plays.len(),
            stream.horizon()
        )));
    }
    if let Some(t) = plays.iter().position(|r| r.len() != stream.n() || r.iter().any(|p| p.is_empty())) {
        return Err(Error::InvalidPairing(format!("round {t} does not hold a play per learner")));
    }
    if plays.iter().flatten().flatten().any(|x| x.len() != stream.d()) {
        return Err(Error::InvalidPairing("play dimension differs from the stream's".into()));
    }
    Ok(())
}

/// `R(T, i) = Σ_t f_t(x_i(t)) − Σ_t f_t(x*)` using each learner's first play.
pub fn regret(stream: &dyn LossStream, plays: &Plays, comparator: &[f64]) -> Result<Vec<f64>> {
    check_plays(stream, plays)?;
    regret_with(stream, plays, comparator, |pts, f| f(&pts[0]))
}

/// Bandit regret: each round's loss is the average over the learner's plays.
pub fn bandit_regret(stream: &dyn LossStream, plays: &Plays, comparator: &[f64]) -> Result<Vec<f64>> {
    check_plays(stream, plays)?;
    regret_with(stream, plays, comparator, |pts, f| {
        pts.iter().map(|x| f(x)).sum::<f64>() / pts.len() as f64
    })
}

fn regret_with<F>(stream: &dyn LossStream, plays: &Plays, comparator: &[f64], loss_of: F) -> Result<Vec<f64>>
where
    F: Fn(&[Vec<f64>], &dyn Fn(&[f64]) -> f64) -> f64,
{
    if comparator.len() != stream.d() {
        return Err(Error::InvalidPairing("comparator dimension differs from the stream's".into()));
    }
    let mut out = vec![0.0; stream.n()];
    for (t, round_plays) in plays.iter().enumerate() {
        let round = stream.round(t);
        let global = |x: &[f64]| round.global_value(x);
        let best = global(comparator);
        for (i, pts) in round_plays.iter().enumerate() {
            out[i] += loss_of(pts, &global) - best;
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidSweep(format!("need at least 2 paired points, got {}", xs.len().min(ys.len()))));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidSweep("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSweep("horizons must not all be equal".into()));
    }
    Ok(sxy / sxx)
}

/// `R(2T)/R(T)` for `R = c·ln T`.
pub fn log_ratio_prediction(horizon: f64) -> f64 {
    1.0 + std::f64::consts::LN_2 / horizon.ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub horizon: usize,
    /// Final regret averaged over learners and seeds.
    pub mean_regret: f64,
    pub per_seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    /// `(T, R(2T)/R(T))` for every horizon whose double is also swept.
    pub doubling_ratios: Vec<(usize, f64)>,
}

impl SweepResult {
    pub fn to_text(&self) -> String {
        let mut s = String::from("T,mean_final_regret\n");
        for p in &self.points {
            s.push_str(&format!("{},{:.16e}\n", p.horizon, p.mean_regret));
        }
        s.push_str(&format!("slope,{:.6}\n", self.slope));
        for (t, r) in &self.doubling_ratios {
            s.push_str(&format!("ratio_2T_over_T@{t},{r:.6}\n"));
        }
        s
    }
}

/// Runs `template` at each horizon (hyperparameters re-derived per horizon)
/// and fits the regret exponent.
pub fn scaling_sweep(template: &ExperimentConfig, horizons: &[usize]) -> Result<SweepResult> {
    if horizons.len() < 2 {
        return Err(Error::InvalidSweep(format!("need at least 2 horizons, got {}", horizons.len())));
    }
    let points = horizons
        .iter()
        .map(|&h| {
            let res = run_experiment_with(&template.with_horizon(h), false)?;
            let per_seed: Vec<f64> = res.runs.iter().map(|r| r.outcome.mean_regret()).collect();
            Ok(SweepPoint {
                horizon: h,
                mean_regret: res.mean_final_regret(),
                per_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.horizon as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_regret).collect();
    let slope = fit_loglog_slope(&xs, &ys)?;
    let doubling_ratios = points
        .iter()
        .filter_map(|p| {
            points
                .iter()
                .find(|q| q.horizon == 2 * p.horizon)
                .map(|q| (p.horizon, q.mean_regret / p.mean_regret))
        })
        .collect();
    Ok(SweepResult {
        points,
        slope,
        doubling_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_sqrt() {
        let xs: Vec<f64> = [1024.0, 4096.0, 16384.0, 65536.0].to_vec();
        let ys: Vec<f64> = xs.iter().map(|t| 3.7 * t.sqrt()).collect();
        assert!((fit_loglog_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn log_ratio() {
        let t = 32768.0f64;
        let r = (2.0 * t).ln() / t.ln();
        assert!((log_ratio_prediction(t) - r).abs() < 1e-15);
    }

    #[test]
    fn fit_rejects_short_input() {
        assert!(matches!(fit_loglog_slope(&[1.0], &[1.0]), Err(Error::InvalidSweep(_))));
    }
}
