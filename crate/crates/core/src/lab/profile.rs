//! A_θ applied to spectral profiles by finite differences.
//!
//! A_θ = i(θ∂ + ½θ′) acts on w = v√h ∈ L²(dλ). Differences never straddle a
//! support end or a declared breakpoint: the step shrinks near them.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{ComplexFn, Integrand, SingularityInfo};
use crate::spectral::{density_of, ModelSpec, RealFn, SpectralDensity, SpectralState, Symbol};

/// Step used for the profile image; the error estimate compares with half of it.
pub const PROFILE_STEP: f64 = 1e-3;

fn local_step(l: f64, h: f64, walls: &[f64]) -> f64 {
    walls.iter().fold(h, |d, &x| {
        let gap = (l - x).abs();
        if gap > 0.0 {
            d.min(gap / 2.5)
        } else {
            d
        }
    })
}

/// (A_θ w)(λ) with a fourth-order centred difference.
pub fn apply_conjugate(symbol: &Symbol, w: &dyn Fn(f64) -> Complex64, l: f64, h: f64, walls: &[f64]) -> Complex64 {
    let d = local_step(l, h, walls);
    let dw = (8.0 * (w(l + d) - w(l - d)) - (w(l + 2.0 * d) - w(l - 2.0 * d))) / (12.0 * d);
    let th = symbol.eval(l);
    let dth = if th == 0.0 && symbol.derivative(l).is_infinite() { 0.0 } else { symbol.derivative(l) };
    Complex64::i() * (th * dw + 0.5 * dth * w(l))
}

/// ‖A_θ u‖ and the spectral density of A_θ u.
#[derive(Debug, Clone)]
pub struct ConjugateImage {
    pub norm: f64,
    /// Relative change of the norm when the step is halved.
    pub margin: f64,
    pub density: SpectralDensity,
}

pub fn conjugate_image(model: &ModelSpec, state: &SpectralState, tol: f64) -> Result<ConjugateImage> {
    let d = density_of(state, model);
    if d.total_mass == 0.0 {
        return Ok(ConjugateImage { norm: 0.0, margin: 0.0, density: d });
    }
    let sup = state.support;
    let exps = d.endpoint_exponents;
    let shift = |x: f64, a: f64| -> Result<f64> {
        if !x.is_finite() {
            return Ok(a);
        }
        let on_wall = x == model.support.lo || x == model.support.hi;
        let g = if on_wall { model.symbol.vanishing_order(x) } else { 1.0 };
        let b = a + 2.0 * (g - 1.0);
        if on_wall && b <= -1.0 {
            return Err(Error::ANormDiverges);
        }
        // Interior ends are infinitely flat; the image stays regular.
        Ok(if on_wall { b } else { a.max(0.0) })
    };
    let left = shift(sup.lo, exps.0)?;
    let right = shift(sup.hi, exps.1)?;
    let mut walls: Vec<f64> = state.breakpoints.clone();
    walls.extend([sup.lo, sup.hi].into_iter().filter(|x| x.is_finite()));
    let tail = d.tail.times_power(2.0);

    let image = |h: f64| -> RealFn {
        let p = state.profile.clone();
        let wgt = model.weight.clone();
        let sym = model.symbol.clone();
        let walls = walls.clone();
        let (lo, hi) = (sup.lo, sup.hi);
        let w = move |l: f64| {
            if l <= lo || l >= hi {
                Complex64::new(0.0, 0.0)
            } else {
                p(l) * wgt.eval(l).sqrt()
            }
        };
        Arc::new(move |l: f64| apply_conjugate(&sym, &w, l, h, &walls).norm_sqr())
    };
    let norm_sq = |e: &RealFn| -> Result<f64> {
        let e = e.clone();
        let f: ComplexFn = Arc::new(move |l| Complex64::new(e(l), 0.0));
        let ig = Integrand::new(f, sup, SingularityInfo { left, right, tail }).with_breakpoints(state.breakpoints.clone());
        Ok(ig.expand(tol.max(1e-12))?.eval(0.0).value.re)
    };
    let coarse = image(PROFILE_STEP);
    let fine = image(PROFILE_STEP / 2.0);
    let (n1, n2) = (norm_sq(&coarse)?.sqrt(), norm_sq(&fine)?.sqrt());
    if !n2.is_finite() {
        return Err(Error::ANormDiverges);
    }
    let margin = if n2 > 0.0 { (n1 - n2).abs() / n2 } else { 0.0 };
    // The mass is n2², already known; skip the constructor's quadrature.
    let density = SpectralDensity {
        e: fine,
        support: sup,
        endpoint_exponents: (left, right),
        tail,
        breakpoints: state.breakpoints.clone(),
        total_mass: n2 * n2,
    };
    Ok(ConjugateImage { norm: n2, margin, density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::catalog_state;
    use std::collections::BTreeMap;

    #[test]
    fn laplacian_exponential_image_has_unit_norm() {
        // w = e^{−λ/2}: A w = i(1 − λ)e^{−λ/2}, ‖Aw‖² = ∫(1−λ)²e^{−λ} = 1.
        let m = ModelSpec::laplacian(3);
        let s = catalog_state(&m, "exponential", &BTreeMap::new()).unwrap();
        let img = conjugate_image(&m, &s, 1e-10).unwrap();
        assert!((img.norm - 1.0).abs() < 1e-8, "{}", img.norm);
        assert!(img.margin < 1e-8);
    }

    #[test]
    fn electric_field_two_sided_exponential() {
        // w = e^{−|λ|/2}/√2: A = i∂, ‖w′‖² = ¼.
        let m = ModelSpec::electric_field();
        let s = catalog_state(&m, "exponential", &BTreeMap::new()).unwrap();
        let img = conjugate_image(&m, &s, 1e-10).unwrap();
        assert!((img.norm - 0.5).abs() < 1e-8, "{}", img.norm);
    }

    #[test]
    fn counterexample_outside_domain_on_dirac() {
        let m = ModelSpec::dirac(1.0).unwrap();
        let p = [("theta".to_string(), 0.2)].into_iter().collect();
        let s = catalog_state(&m, "power_counterexample", &p).unwrap();
        assert_eq!(conjugate_image(&m, &s, 1e-8).unwrap_err(), Error::ANormDiverges);
    }

    #[test]
    fn pointwise_image_matches_closed_form() {
        let sym = Symbol::Linear(2.0);
        let w = |l: f64| Complex64::new((-l * l).exp(), 0.0);
        for l in [0.3, 1.1] {
            let a = apply_conjugate(&sym, &w, l, 1e-3, &[]);
            let exact = Complex64::i() * (2.0 * l * (-2.0 * l) + 1.0) * (-l * l).exp();
            assert!((a - exact).norm() < 1e-10);
        }
    }
}
