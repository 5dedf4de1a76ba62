//! Exponential envelope fit `|y(t)| <= M exp(-mu (t - t0))`.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::simulate::Trajectory;

/// Windows whose maximum is below this fraction of the global maximum are dropped.
pub const FLOOR_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    #[error("signal vanished or horizon too short: {usable} usable envelope points, need 3")]
    TooFewPoints { usable: usize },
    #[error("window must be positive and finite, got {0}")]
    BadWindow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    X,
    U,
    /// Pointwise `max(|x|, |u|)`.
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub channel: Channel,
    /// Envelope constant shifted up so the fitted line dominates every envelope point.
    #[serde(rename = "M")]
    pub m: f64,
    /// `exp(intercept)` of the least-squares fit.
    pub m_fit: f64,
    pub mu: f64,
    pub r_squared: f64,
    /// `(window midpoint, ln(window max))` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

impl DecayEstimate {
    /// Two-column plot data: window midpoint and log envelope.
    pub fn write_plot_data<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# t_mid ln_envelope")?;
        for (t, l) in &self.points {
            writeln!(out, "{t:.16e} {l:.16e}")?;
        }
        Ok(())
    }
}

/// Fits the envelope of one channel of a trajectory.
pub fn estimate_decay(traj: &Trajectory, channel: Channel, window: f64) -> Result<DecayEstimate, DecayError> {
    let samples: Vec<f64> = match channel {
        Channel::X => traj.x.iter().map(|v| v.abs()).collect(),
        Channel::U => traj.u.iter().map(|v| v.abs()).collect(),
        Channel::Max => traj.x.iter().zip(&traj.u).map(|(x, u)| x.abs().max(u.abs())).collect(),
    };
    estimate_decay_samples(traj.t0, traj.step, &samples, window, channel)
}

/// Same fit on raw samples taken at `t0 + i*step`.
pub fn estimate_decay_samples(
    t0: f64,
    step: f64,
    samples: &[f64],
    window: f64,
    channel: Channel,
) -> Result<DecayEstimate, DecayError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(DecayError::BadWindow(window));
    }
    let per_window = ((window / step).round() as usize).max(1);
    let global = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = FLOOR_FRACTION * global;

    let mut points = Vec::new();
    for (k, chunk) in samples.chunks_exact(per_window).enumerate() {
        let peak = chunk.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 && peak >= floor {
            let mid = (k as f64 + 0.5) * per_window as f64 * step;
            points.push((mid, peak.ln()));
        }
    }
    if points.len() < 3 {
        return Err(DecayError::TooFewPoints { usable: points.len() });
    }

    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &points {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    let lift = points.iter().map(|&(t, y)| y - (intercept + slope * t)).fold(0.0, f64::max);

    Ok(DecayEstimate {
        channel,
        m: (intercept + lift).exp(),
        m_fit: intercept.exp(),
        mu: -slope,
        r_squared,
        points: points.into_iter().map(|(t, y)| (t + t0, y)).collect(),
    })
}
