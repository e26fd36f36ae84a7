//! Sampling ψ(t) = ∫ e^{itλ} e(λ) dλ and its derivative on a time grid.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Expansion, Integrand};
use crate::error::{Error, Result};
use crate::propagator::{AmplitudeSeries, SeriesKind};
use crate::spectral::SpectralDensity;

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::ParamOutOfRange("time grid contains a non-finite point".into()));
    }
    if t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::ParamOutOfRange("time grid must be sorted".into()));
    }
    Ok(())
}

/// Evaluates the expansion at |t| and reflects by conjugation, which is exact
/// for a real integrand.
pub(crate) fn sample_real(exp: &Expansion, t_grid: &[f64], kind: SeriesKind) -> AmplitudeSeries {
    let samples: Vec<_> = t_grid
        .par_iter()
        .map(|&t| {
            let r = exp.eval(t.abs());
            let v = if t < 0.0 { r.value.conj() } else { r.value };
            (v, r.error_estimate + r.truncation_bound, r.converged)
        })
        .collect();
    AmplitudeSeries::from_samples(t_grid.to_vec(), samples, kind)
}

pub fn amplitude_series(density: &SpectralDensity, t_grid: &[f64], tol: f64) -> Result<AmplitudeSeries> {
    check_grid(t_grid)?;
    let exp = density.integrand().expand(tol)?;
    Ok(sample_real(&exp, t_grid, SeriesKind::Schrodinger))
}

/// ψ′(t) = ∫ iλ e^{itλ} e(λ) dλ.
pub fn derivative_series(density: &SpectralDensity, t_grid: &[f64], tol: f64) -> Result<AmplitudeSeries> {
    check_grid(t_grid)?;
    if !density.tail.has_moment(1.0) {
        return Err(Error::MomentDiverges);
    }
    let moment: Integrand = density.times_power(1);
    let exp = moment.expand(tol)?;
    let mut s = sample_real(&exp, t_grid, SeriesKind::Derivative);
    for v in &mut s.values {
        *v *= Complex64::i();
    }
    Ok(s)
}
