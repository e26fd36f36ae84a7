use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::model::{ModelSpec, RealFn};
use super::state::SpectralState;
use crate::quad::{Integrand, Interval, SingularityInfo, TailClass};

const NORM_TOL: f64 = 1e-12;

/// e(λ) = |v(λ)|² h(λ), the density of the spectral measure of u.
#[derive(Clone)]
pub struct SpectralDensity {
    pub e: RealFn,
    pub support: Interval,
    /// Exponents of e at the finite ends of `support`.
    pub endpoint_exponents: (f64, f64),
    pub tail: TailClass,
    pub breakpoints: Vec<f64>,
    pub total_mass: f64,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("support", &self.support)
            .field("endpoint_exponents", &self.endpoint_exponents)
            .field("tail", &self.tail)
            .field("total_mass", &self.total_mass)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EvanescentClass {
    InCe,
    InCeInfinity,
    Neither,
}

impl EvanescentClass {
    pub fn in_ce(self) -> bool {
        self != EvanescentClass::Neither
    }
}

pub fn density_of(state: &SpectralState, model: &ModelSpec) -> SpectralDensity {
    let prof = state.profile.clone();
    let w = model.weight.clone();
    let e: RealFn = Arc::new(move |l| prof(l).norm_sqr() * w.eval(l));
    let h_at = |x: f64| if x.is_finite() { model.weight.exponent_at(x) } else { 0.0 };
    let exps = (
        state.endpoint_exponents.0 + h_at(state.support.lo),
        state.endpoint_exponents.1 + h_at(state.support.hi),
    );
    SpectralDensity::new(e, state.support, exps, state.tail, state.breakpoints.clone())
}

impl SpectralDensity {
    /// Builds a density and computes its mass by quadrature.
    pub fn new(e: RealFn, support: Interval, endpoint_exponents: (f64, f64), tail: TailClass, breakpoints: Vec<f64>) -> Self {
        let mut d = Self { e, support, endpoint_exponents, tail, breakpoints, total_mass: 0.0 };
        d.total_mass = d
            .integrand()
            .expand(NORM_TOL)
            .map(|x| x.eval(0.0).value.re)
            .unwrap_or(f64::NAN);
        d
    }

    pub fn integrand(&self) -> Integrand {
        let e = self.e.clone();
        Integrand::new(
            Arc::new(move |l| Complex64::new(e(l), 0.0)),
            self.support,
            SingularityInfo { left: self.endpoint_exponents.0, right: self.endpoint_exponents.1, tail: self.tail },
        )
        .with_breakpoints(self.breakpoints.clone())
    }

    /// The density of λ^k e (used for moments).
    pub fn times_power(&self, k: i32) -> Integrand {
        let e = self.e.clone();
        let shift = |x: f64| if x == 0.0 { k as f64 } else { 0.0 };
        Integrand::new(
            Arc::new(move |l| Complex64::new(l.powi(k) * e(l), 0.0)),
            self.support,
            SingularityInfo {
                left: self.endpoint_exponents.0 + shift(self.support.lo),
                right: self.endpoint_exponents.1 + shift(self.support.hi),
                tail: self.tail.times_power(k as f64),
            },
        )
        .with_breakpoints(self.breakpoints.clone())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let e = self.e.clone();
        Self {
            e: Arc::new(move |l| c * e(l)),
            total_mass: c * self.total_mass,
            support: self.support,
            endpoint_exponents: self.endpoint_exponents,
            tail: self.tail,
            breakpoints: self.breakpoints.clone(),
        }
    }

    /// ∫e², or +∞ when an endpoint or the tail makes it diverge.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq_to(NORM_TOL)
    }

    /// As `l2_norm_sq`, for densities known only to a coarser tolerance.
    pub fn l2_norm_sq_to(&self, tol: f64) -> f64 {
        let finite_end_diverges = |x: f64, a: f64| x.is_finite() && 2.0 * a <= -1.0;
        if finite_end_diverges(self.support.lo, self.endpoint_exponents.0)
            || finite_end_diverges(self.support.hi, self.endpoint_exponents.1)
            || !self.tail.product(self.tail).has_moment(0.0)
        {
            return f64::INFINITY;
        }
        let e = self.e.clone();
        let ig = Integrand::new(
            Arc::new(move |l| Complex64::new(e(l) * e(l), 0.0)),
            self.support,
            SingularityInfo {
                left: 2.0 * self.endpoint_exponents.0,
                right: 2.0 * self.endpoint_exponents.1,
                tail: self.tail.product(self.tail),
            },
        )
        .with_breakpoints(self.breakpoints.clone());
        match ig.expand(tol) {
            Ok(x) => x.eval(0.0).value.re,
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest sampled value of e away from singular ends.
    pub fn sampled_sup(&self) -> f64 {
        let lo = if self.support.lo.is_finite() { self.support.lo } else { -40.0 };
        let hi = if self.support.hi.is_finite() { self.support.hi } else { lo.max(0.0) + 40.0 };
        (1..2000)
            .map(|i| (self.e)(lo + (hi - lo) * i as f64 / 2000.0))
            .fold(0.0, f64::max)
    }
}

/// [u] = (2π∫e²)^{1/4}; +∞ when the integral diverges.
pub fn lifetime_norm_frequency(density: &SpectralDensity) -> f64 {
    (2.0 * PI * density.l2_norm_sq()).powf(0.25)
}

pub fn evanescent_class(density: &SpectralDensity) -> EvanescentClass {
    if !lifetime_norm_frequency(density).is_finite() {
        return EvanescentClass::Neither;
    }
    let finite_end_singular = |x: f64, a: f64| x.is_finite() && a < 0.0;
    let bounded = !finite_end_singular(density.support.lo, density.endpoint_exponents.0)
        && !finite_end_singular(density.support.hi, density.endpoint_exponents.1)
        && density.sampled_sup().is_finite();
    if bounded {
        EvanescentClass::InCeInfinity
    } else {
        EvanescentClass::InCe
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{catalog_state, ModelSpec};
    use std::collections::BTreeMap;

    fn counter(theta: f64) -> SpectralDensity {
        let m = ModelSpec::fractional(1.0).unwrap();
        let p = [("theta".to_string(), theta)].into_iter().collect();
        density_of(&catalog_state(&m, "power_counterexample", &p).unwrap(), &m)
    }

    #[test]
    fn exponential_lifetime_norm() {
        let m = ModelSpec::fractional(1.0).unwrap();
        let d = density_of(&catalog_state(&m, "exponential", &BTreeMap::new()).unwrap(), &m);
        assert!((lifetime_norm_frequency(&d) - PI.powf(0.25)).abs() < 1e-10);
        assert_eq!(evanescent_class(&d), EvanescentClass::InCeInfinity);
    }

    #[test]
    fn counterexample_classes() {
        assert_eq!(evanescent_class(&counter(0.2)), EvanescentClass::InCe);
        assert_eq!(evanescent_class(&counter(0.3)), EvanescentClass::Neither);
        assert_eq!(lifetime_norm_frequency(&counter(0.3)), f64::INFINITY);
    }

    #[test]
    fn weighted_multiplication_density() {
        let m = ModelSpec::weighted_multiplication(2);
        let st = crate::spectral::SpectralState::custom(
            &m,
            "λe^{−λ}",
            Arc::new(|l: f64| Complex64::new(l * (-l).exp(), 0.0)),
            m.support,
            (2.0, 0.0),
            TailClass::Exponential { rate: 2.0, power: 4.0 },
            crate::spectral::RegularityFlags { domain: 1, ce: Some(1) },
        )
        .unwrap();
        let d = density_of(&st, &m);
        for l in [0.3f64, 1.0, 4.0] {
            let expect = l.powi(4) * (-2.0 * l).exp();
            assert!(((d.e)(l) - expect).abs() < 1e-15 * expect.max(1.0));
        }
        // ∫λ⁴e^{−2λ} = 4!/2⁵
        assert!((d.total_mass - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_density() {
        let m = ModelSpec::laplacian(3);
        let d = density_of(&crate::spectral::SpectralState::zero(&m), &m);
        assert_eq!(d.total_mass, 0.0);
        assert_eq!(lifetime_norm_frequency(&d), 0.0);
    }
}
