//! Power-law decay exponents from amplitude envelopes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::AmplitudeSeries;
use crate::spectral::{ModelSpec, Rate, Requirement, RuleTag, SpectralState};

pub const DEFAULT_WINDOW: (f64, f64) = (1e2, 1e4);
const MIN_POINTS: usize = 8;
/// Tolerated growth exponent of t^s|ψ| before a bound counts as violated.
pub const TREND_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
    pub envelope_points: usize,
}

/// Upper envelope: each sample is replaced by the largest |ψ| over the log
/// window [t/√2, t·√2]. Only samples whose full window lies inside the data
/// are kept, so edge truncation cannot bias the slope.
fn envelope(series: &AmplitudeSeries, window: (f64, f64)) -> Vec<(f64, f64)> {
    let abs = series.abs();
    let pos: Vec<(f64, f64)> = series.t_grid.iter().copied().zip(abs).filter(|(t, _)| *t > 0.0).collect();
    let Some(&(t_first, _)) = pos.first() else { return vec![] };
    let t_last = pos.last().unwrap().0;
    let r = std::f64::consts::SQRT_2;
    let mut out = Vec::new();
    let (mut lo, mut hi) = (0usize, 0usize);
    for &(t, _) in &pos {
        if t < window.0 || t > window.1 || t / r < t_first * (1.0 - 1e-12) || t * r > t_last * (1.0 + 1e-12) {
            continue;
        }
        while pos[lo].0 < t / r {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi + 1 < pos.len() && pos[hi + 1].0 <= t * r {
            hi += 1;
        }
        let m = pos[lo..=hi].iter().map(|p| p.1).fold(0.0, f64::max);
        out.push((t, m));
    }
    out
}

pub fn fit_decay_exponent(series: &AmplitudeSeries, window: (f64, f64)) -> Result<DecayFit> {
    let env = envelope(series, window);
    if env.len() < MIN_POINTS {
        return Err(Error::TooFewPoints(env.len()));
    }
    if env.iter().any(|(_, v)| *v == 0.0 || !v.is_finite()) {
        return Err(Error::ZeroSeries);
    }
    let n = env.len() as f64;
    let xs: Vec<f64> = env.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = env.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit {
        exponent: -slope,
        prefactor: intercept.exp(),
        fit_window: (env[0].0, env[env.len() - 1].0),
        residual,
        envelope_points: env.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    /// sup over the grid of t^s|ψ(t)|.
    pub sup_stat: f64,
    /// Fitted growth exponent of t^s|ψ| over the last two decades.
    pub monotone_trend: f64,
    pub pass: bool,
}

pub fn verify_decay_bound(series: &AmplitudeSeries, s: f64) -> BoundCheck {
    let sup_stat = series
        .t_grid
        .iter()
        .zip(series.abs())
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, a)| t.powf(s) * a)
        .fold(0.0, f64::max);
    let t_max = series.t_grid.iter().copied().fold(0.0, f64::max);
    let trend = match fit_decay_exponent(series, (t_max / 100.0, t_max)) {
        Ok(fit) => s - fit.exponent,
        Err(Error::TooFewPoints(_)) => match fit_decay_exponent(series, (0.0, f64::INFINITY)) {
            Ok(fit) => s - fit.exponent,
            Err(_) => 0.0,
        },
        Err(_) => 0.0,
    };
    BoundCheck { sup_stat, monotone_trend: trend, pass: sup_stat.is_finite() && trend <= TREND_SLACK }
}

fn requirement_holds(state: &SpectralState, req: Requirement) -> bool {
    match req {
        Requirement::Domain(k) => state.flags.in_domain(k),
        Requirement::SelfEvanescentWithA => state.flags.in_domain(1) && state.flags.ce_through(1),
        Requirement::Kzero => state.kzero.is_some_and(|(k, f)| f.in_domain(k) && f.ce_through(k)),
    }
}

/// Best guaranteed exponent among the model's rules whose hypotheses the
/// state's declared flags satisfy. Ties keep the first rule listed.
pub fn expected_exponent(model: &ModelSpec, state: &SpectralState) -> Option<(f64, RuleTag)> {
    let mut best: Option<(f64, RuleTag)> = None;
    for rule in &model.exponent_rules {
        if !requirement_holds(state, rule.requirement) {
            continue;
        }
        let s = match rule.rate {
            Rate::Fixed(s) => s,
            Rate::DomainOrder => state.flags.domain as f64,
            Rate::HalfKzero => match state.kzero {
                Some((k, _)) => k as f64 / 2.0,
                None => continue,
            },
        };
        if best.map_or(true, |(b, _)| s > b) {
            best = Some((s, rule.tag));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{log_grid, SeriesKind};
    use num_complex::Complex64;

    fn series(f: impl Fn(f64) -> f64) -> AmplitudeSeries {
        AmplitudeSeries::from_fn(&log_grid(1.0, 1e4, 400), |t| Complex64::new(f(t), 0.0), SeriesKind::Schrodinger)
    }

    #[test]
    fn inverse_sqrt_one_plus_t_squared() {
        let fit = fit_decay_exponent(&series(|t| (1.0 + t * t).powf(-0.5)), DEFAULT_WINDOW).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.02, "{fit:?}");
        assert!(fit.envelope_points >= 25);
    }

    #[test]
    fn constant_series_is_flat() {
        let fit = fit_decay_exponent(&series(|_| 3.0), DEFAULT_WINDOW).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-9);
    }

    #[test]
    fn oscillating_series_uses_envelope() {
        let fit = fit_decay_exponent(&series(|t| t.powf(-0.7) * (3.0 * t).cos()), DEFAULT_WINDOW).unwrap();
        assert!((fit.exponent - 0.7).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn errors() {
        let short = AmplitudeSeries::from_fn(&[100.0, 200.0], |_| Complex64::new(1.0, 0.0), SeriesKind::Schrodinger);
        assert!(matches!(fit_decay_exponent(&short, DEFAULT_WINDOW), Err(Error::TooFewPoints(_))));
        assert_eq!(fit_decay_exponent(&series(|_| 0.0), DEFAULT_WINDOW).unwrap_err(), Error::ZeroSeries);
    }

    #[test]
    fn bound_verdicts() {
        assert!(verify_decay_bound(&series(|t| 1.0 / (1.0 + t)), 0.5).pass);
        assert!(!verify_decay_bound(&series(|t| (1.0 + t).powf(-0.2)), 0.5).pass);
        assert!(verify_decay_bound(&series(|_| 0.0), 0.5).pass);
    }
}
