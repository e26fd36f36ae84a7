//! Numerical verification of the explicit decay inequalities.

pub mod appendix;
pub mod sweep;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use appendix::{check_appendix_lemma, lemma_constant, AppendixFunction, AppendixReport, BoundPoint};

use crate::decay::fit_decay_exponent;
use crate::error::{Error, Result};
use crate::lab::{conjugate_image, ConjugateImage};
use crate::propagator::{check_membership, cross_integrand, truncated_l2, AmplitudeSeries};
use crate::quad::{derivative_series, Integrand, SingularityInfo};
use crate::spectral::{density_of, evanescent_class, lifetime_norm_frequency, ModelSpec, SpectralDensity, SpectralState, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// PASS and NOT_APPLICABLE both count as success.
    pub fn ok(self) -> bool {
        self != Verdict::Fail
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "NOT_APPLICABLE",
        })
    }
}

/// Constant in c²‖tψ′‖² ≤ K‖ψ_u‖‖ψ_{Au}‖ that the integration-by-parts
/// argument actually delivers.
pub const ESTIM_CONSTANT: f64 = 4.0;
/// The constant as usually stated, kept as a diagnostic.
pub const ESTIM_PRINTED_CONSTANT: f64 = 2.0;
/// Smallest fitted decay exponent of a series still treated as square integrable.
pub const L2_EXPONENT_FLOOR: f64 = 0.45;

/// t ψ′(t) on a grid.
pub fn t_derivative_series(density: &SpectralDensity, t_grid: &[f64], tol: f64) -> Result<AmplitudeSeries> {
    let mut s = derivative_series(density, t_grid, tol)?;
    for (v, t) in s.values.iter_mut().zip(&s.t_grid) {
        *v *= *t;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceReport {
    pub v_bracket: f64,
    pub u_bracket: f64,
    pub rhs: f64,
    /// (T, (∫_{−T}^{T}|⟨v, e^{itH}u⟩|²)^{1/2}) per horizon.
    pub points: Vec<BoundPoint>,
    pub verdict: Verdict,
}

/// (∫_{−T}^{T} |⟨v, e^{itH}u⟩|² dt)^{1/2} ≤ [v][u].
pub fn check_interference_inequality(
    model: &ModelSpec,
    v: &SpectralState,
    u: &SpectralState,
    horizons: &[f64],
    tol: f64,
) -> Result<InterferenceReport> {
    check_membership(model, v)?;
    check_membership(model, u)?;
    let (dv, du) = (density_of(v, model), density_of(u, model));
    let (bv, bu) = (lifetime_norm_frequency(&dv), lifetime_norm_frequency(&du));
    let rhs = bv * bu;
    let applicable = evanescent_class(&dv).in_ce() && evanescent_class(&du).in_ce();
    if !applicable {
        return Ok(InterferenceReport { v_bracket: bv, u_bracket: bu, rhs, points: vec![], verdict: Verdict::NotApplicable });
    }
    let lhs = match cross_integrand(model, v, u) {
        None => vec![0.0; horizons.len()],
        Some(ig) => {
            let exp = ig.expand(tol)?;
            // Even part of |c(t)|², so that 2∫₀ᵀ equals ∫_{−T}^{T}.
            truncated_l2(
                |ts: &[f64]| {
                    Ok(ts
                        .par_iter()
                        .map(|&t| 0.5 * (exp.eval(t).value.norm_sqr() + exp.eval(-t).value.norm_sqr()))
                        .collect())
                },
                horizons,
            )?
        }
    };
    let points: Vec<BoundPoint> =
        horizons.iter().zip(lhs).map(|(&t, l)| BoundPoint { t, lhs: l, rhs, margin: rhs - l }).collect();
    let ok = points.iter().all(|b| b.lhs <= b.rhs * (1.0 + 1e-3));
    Ok(InterferenceReport { v_bracket: bv, u_bracket: bu, rhs, points, verdict: Verdict::from_bool(ok) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decay1Report {
    pub a_norm: f64,
    pub u_norm: f64,
    /// Relative step-halving change of ‖Au‖.
    pub grid_margin: f64,
    pub points: Vec<BoundPoint>,
    pub verdict: Verdict,
}

fn symbol_is_bounded(s: &Symbol) -> bool {
    matches!(s, Symbol::Constant(_) | Symbol::Dirac { .. } | Symbol::Saturating)
}

/// θ(λ)e(λ) as an integrand.
fn weighted_by_symbol(model: &ModelSpec, d: &SpectralDensity) -> Integrand {
    let sym = model.symbol.clone();
    let e = d.e.clone();
    let order = |x: f64| if x.is_finite() { model.symbol.vanishing_order(x) } else { 0.0 };
    let tail = if symbol_is_bounded(&model.symbol) { d.tail } else { d.tail.times_power(1.0) };
    Integrand::new(
        Arc::new(move |l| Complex64::new(sym.eval(l) * e(l), 0.0)),
        d.support,
        SingularityInfo {
            left: d.endpoint_exponents.0 + order(d.support.lo),
            right: d.endpoint_exponents.1 + order(d.support.hi),
            tail,
        },
    )
    .with_breakpoints(d.breakpoints.clone())
}

/// |⟨u, θ(H)e^{itH}u⟩| ≤ 2|t|^{−1}‖Au‖‖u‖.
pub fn check_prop_decay1(model: &ModelSpec, state: &SpectralState, t_grid: &[f64], tol: f64) -> Result<Decay1Report> {
    check_membership(model, state)?;
    prop_decay1_with(model, state, &conjugate_image(model, state, tol)?, t_grid, tol)
}

pub(crate) fn prop_decay1_with(
    model: &ModelSpec,
    state: &SpectralState,
    img: &ConjugateImage,
    t_grid: &[f64],
    tol: f64,
) -> Result<Decay1Report> {
    let d = density_of(state, model);
    let u_norm = d.total_mass.max(0.0).sqrt();
    let points: Vec<BoundPoint> = if d.total_mass == 0.0 {
        t_grid.iter().map(|&t| BoundPoint { t, lhs: 0.0, rhs: 0.0, margin: 0.0 }).collect()
    } else {
        let exp = weighted_by_symbol(model, &d).expand(tol)?;
        t_grid
            .par_iter()
            .map(|&t| {
                let lhs = exp.eval(t).value.norm();
                let rhs = 2.0 * img.norm * u_norm / t.abs();
                BoundPoint { t, lhs, rhs, margin: rhs - lhs }
            })
            .collect()
    };
    let ok = points.iter().all(|b| b.lhs <= b.rhs * (1.0 + img.margin) + 10.0 * tol);
    Ok(Decay1Report { a_norm: img.norm, u_norm, grid_margin: img.margin, points, verdict: Verdict::from_bool(ok) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimReport {
    pub c: f64,
    /// c² ∫_ℝ |tψ′|².
    pub lhs: f64,
    pub psi_norm: f64,
    pub psi_a_norm: f64,
    /// ESTIM_CONSTANT · ‖ψ_u‖ ‖ψ_{Au}‖.
    pub rhs: f64,
    /// lhs over the same product with ESTIM_PRINTED_CONSTANT.
    pub printed_ratio: f64,
    pub verdict: Verdict,
}

/// c²‖tψ_u′‖² ≤ 4‖ψ_u‖‖ψ_{Au}‖ for θ = cλ, all norms in L²(ℝ_t).
pub fn check_estim_inequality(model: &ModelSpec, state: &SpectralState, tol: f64) -> Result<EstimReport> {
    check_membership(model, state)?;
    linear_coefficient(model)?;
    estim_with(model, state, &conjugate_image(model, state, tol)?)
}

pub(crate) fn linear_coefficient(model: &ModelSpec) -> Result<f64> {
    match model.symbol {
        Symbol::Linear(c) => Ok(c),
        _ => Err(Error::ParamOutOfRange(format!("needs θ = cλ, model has {}", model.symbol.label()))),
    }
}

pub(crate) fn estim_with(model: &ModelSpec, state: &SpectralState, img: &ConjugateImage) -> Result<EstimReport> {
    let c = linear_coefficient(model)?;
    let d = density_of(state, model);
    let empty = |verdict| EstimReport {
        c,
        lhs: 0.0,
        psi_norm: 0.0,
        psi_a_norm: 0.0,
        rhs: 0.0,
        printed_ratio: 0.0,
        verdict,
    };
    if d.total_mass == 0.0 {
        return Ok(empty(Verdict::Pass));
    }
    // ‖ψ‖_{L²(ℝ)} = [u]² by Plancherel; an infinite value means not in ce.
    // The image is a difference quotient, so its norm is taken to 1e-9.
    let psi_norm = lifetime_norm_frequency(&d).powi(2);
    let psi_a_norm = (2.0 * PI * img.density.l2_norm_sq_to(1e-9)).sqrt();
    if !psi_norm.is_finite() || !psi_a_norm.is_finite() {
        return Ok(empty(Verdict::NotApplicable));
    }
    let lhs = c * c * 2.0 * PI * dilation_derivative_sq(&d)?;
    let product = psi_norm * psi_a_norm;
    let rhs = ESTIM_CONSTANT * product;
    Ok(EstimReport {
        c,
        lhs,
        psi_norm,
        psi_a_norm,
        rhs,
        printed_ratio: lhs / (ESTIM_PRINTED_CONSTANT * product),
        verdict: Verdict::from_bool(lhs <= rhs * (1.0 + 1e-2)),
    })
}

/// Five-point derivative with a step kept well inside the smooth piece.
fn smooth_derivative(f: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64, walls: &[f64]) -> f64 {
    let gap = walls.iter().map(|w| (x - w).abs()).filter(|&g| g > 0.0).fold(f64::INFINITY, f64::min);
    let h = (1e-4 * x.abs().max(1.0)).min(1e-2 * gap);
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// ∫|(λe)′|², which equals ‖tψ_u′‖²/(2π) once λe vanishes at the finite ends.
fn dilation_derivative_sq(d: &SpectralDensity) -> Result<f64> {
    let at_end = |x: f64, a: f64| if x == 0.0 { a + 1.0 } else { a };
    let exps = (at_end(d.support.lo, d.endpoint_exponents.0), at_end(d.support.hi, d.endpoint_exponents.1));
    // Exponent 0 marks a regular end, so a jump only shows in the value.
    // A nonzero boundary value puts u outside the domain of A.
    let width = (d.support.hi - d.support.lo).min(1.0);
    let scale = d.sampled_sup().max(f64::MIN_POSITIVE);
    let end = |x: f64, a: f64, inward: f64| -> Result<f64> {
        if !x.is_finite() {
            return Ok(0.0);
        }
        let p = x + inward * 1e-9 * width;
        if a > 0.5 {
            Ok(2.0 * (a - 1.0))
        } else if a <= 0.0 && (p * (d.e)(p)).abs() <= 1e-8 * scale {
            Ok(0.0)
        } else {
            Err(Error::MomentDiverges)
        }
    };
    let (left, right) = (end(d.support.lo, exps.0, 1.0)?, end(d.support.hi, exps.1, -1.0)?);
    let tail = d.tail.product(d.tail);
    if !tail.has_moment(0.0) {
        return Err(Error::MomentDiverges);
    }
    let mut walls = d.breakpoints.clone();
    walls.extend([d.support.lo, d.support.hi].into_iter().filter(|x| x.is_finite()));
    let e = d.e.clone();
    let g = Arc::new(move |l: f64| {
        let e = e.clone();
        let de = smooth_derivative(&move |x| x * e(x), l, &walls);
        Complex64::new(de * de, 0.0)
    });
    let info = SingularityInfo { left, right, tail };
    let ig = Integrand::new(g, d.support, info).with_breakpoints(d.breakpoints.clone());
    Ok(ig.expand(1e-10)?.eval(0.0).value.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub k: u32,
    pub applicable: bool,
    /// 4(2π)^{−1/2}(‖χ‖‖χ + tχ′‖)^{1/2} with χ = t^{(k−1)/2}ψ.
    pub c_est: f64,
    /// sup_t t^{k/2}|ψ(t)| on the grid.
    pub sup_stat: f64,
    pub verdict: Verdict,
}

fn tail_exponent(series: &AmplitudeSeries) -> Option<f64> {
    let t_max = series.t_grid.iter().copied().fold(0.0, f64::max);
    match fit_decay_exponent(series, (t_max / 100.0, t_max)) {
        Ok(f) => Some(f.exponent),
        Err(Error::ZeroSeries) => Some(f64::INFINITY),
        Err(_) => match fit_decay_exponent(series, (0.0, f64::INFINITY)) {
            Ok(f) => Some(f.exponent),
            Err(Error::ZeroSeries) => Some(f64::INFINITY),
            Err(_) => None,
        },
    }
}

/// ‖f‖_{L²(ℝ)} of an even-modulus series by the trapezoid rule over the
/// positive grid, extended as a constant down to 0.
fn discrete_l2(t: &[f64], v: &[Complex64]) -> f64 {
    let pts: Vec<(f64, f64)> = t.iter().zip(v).filter(|(t, _)| **t > 0.0).map(|(t, v)| (*t, v.norm_sqr())).collect();
    let Some(&(t0, g0)) = pts.first() else { return 0.0 };
    let body: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    (2.0 * (t0 * g0 + body)).sqrt()
}

/// t^{k/2}|ψ(t)| ≤ C on the grid, given ψ and tψ′ sampled on it.
pub fn check_corollary_psidecay(psi: &AmplitudeSeries, t_dpsi: &AmplitudeSeries, k: u32) -> Result<CorollaryReport> {
    if k == 0 {
        return Err(Error::ParamOutOfRange("k must be at least 1".into()));
    }
    if psi.t_grid != t_dpsi.t_grid {
        return Err(Error::ParamOutOfRange("ψ and tψ′ must share a grid".into()));
    }
    let w = (k as f64 - 1.0) / 2.0;
    let chi: Vec<Complex64> = psi.t_grid.iter().zip(&psi.values).map(|(t, v)| v * t.abs().powf(w)).collect();
    let lifted: Vec<Complex64> = psi
        .t_grid
        .iter()
        .zip(psi.values.iter().zip(&t_dpsi.values))
        .map(|(t, (p, tp))| (p * ((k as f64 + 1.0) / 2.0) + tp) * t.abs().powf(w))
        .collect();
    let as_series = |values: Vec<Complex64>| AmplitudeSeries { values, ..psi.clone() };
    let chi_s = as_series(chi);
    let lifted_s = as_series(lifted);
    let sup_stat = psi
        .t_grid
        .iter()
        .zip(chi_s.abs())
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, a)| t.sqrt() * a)
        .fold(0.0, f64::max);
    let applicable = [&chi_s, &lifted_s]
        .iter()
        .all(|s| tail_exponent(s).is_some_and(|e| e >= L2_EXPONENT_FLOOR));
    if !applicable {
        return Ok(CorollaryReport { k, applicable, c_est: f64::NAN, sup_stat, verdict: Verdict::NotApplicable });
    }
    let c_est = 4.0 / (2.0 * PI).sqrt()
        * (discrete_l2(&psi.t_grid, &chi_s.values) * discrete_l2(&psi.t_grid, &lifted_s.values)).sqrt();
    Ok(CorollaryReport { k, applicable, c_est, sup_stat, verdict: Verdict::from_bool(sup_stat <= c_est) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{log_grid, SeriesKind};
    use crate::spectral::catalog_state;
    use std::collections::BTreeMap;

    fn none() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn prop_decay1_laplacian_exponential() {
        // θe = 2λe^{−λ}: lhs = 2/(1+t²); ‖Aw‖ = ‖u‖ = 1 so rhs = 2/t.
        let m = ModelSpec::laplacian(3);
        let s = catalog_state(&m, "exponential", &none()).unwrap();
        let ts = log_grid(0.1, 100.0, 40);
        let rep = check_prop_decay1(&m, &s, &ts, 1e-10).unwrap();
        for b in &rep.points {
            assert!((b.lhs - 2.0 / (1.0 + b.t * b.t)).abs() < 1e-8, "{b:?}");
            assert!((b.rhs - 2.0 / b.t).abs() < 1e-6 * b.rhs);
        }
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn estim_fractional_exponential_needs_constant_four() {
        // lhs = π/2, ‖ψ‖ = √π, ‖ψ_{Au}‖ = √(π/32).
        let m = ModelSpec::fractional(1.0).unwrap();
        let s = catalog_state(&m, "exponential", &none()).unwrap();
        let rep = check_estim_inequality(&m, &s, 1e-10).unwrap();
        assert!((rep.lhs - PI / 2.0).abs() < 1e-6, "{rep:?}");
        assert!((rep.psi_norm - PI.sqrt()).abs() < 1e-4);
        assert!((rep.psi_a_norm - (PI / 32.0).sqrt()).abs() < 1e-4);
        assert!((rep.printed_ratio - 2f64.sqrt()).abs() < 1e-3);
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn dilation_norm_matches_time_side() {
        let m = ModelSpec::fractional(1.0).unwrap();
        let s = catalog_state(&m, "gamma", &[("a".to_string(), 2.0)].into()).unwrap();
        let d = density_of(&s, &m);
        let moment = d.times_power(1).expand(1e-10).unwrap();
        let half = crate::propagator::time_l2(|ts: &[f64]| {
            Ok(ts.iter().map(|&t| (t * moment.eval(t).value).norm_sqr()).collect())
        })
        .unwrap();
        let freq = 2.0 * PI * dilation_derivative_sq(&d).unwrap();
        assert!((2.0 * half.half_line - freq).abs() < 1e-3 * freq, "{} {freq}", 2.0 * half.half_line);
    }

    #[test]
    fn estim_rejects_non_linear_symbol() {
        let m = ModelSpec::electric_field();
        let s = catalog_state(&m, "exponential", &none()).unwrap();
        assert!(matches!(check_estim_inequality(&m, &s, 1e-8), Err(Error::ParamOutOfRange(_))));
    }

    #[test]
    fn interference_self_pair_saturates() {
        let m = ModelSpec::laplacian(3);
        let u = catalog_state(&m, "exponential", &none()).unwrap();
        let horizons = [1.0, 10.0, 100.0, 1e4];
        let rep = check_interference_inequality(&m, &u, &u, &horizons, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        // [u]² = ‖ψ_u‖ = √π for e = e^{−λ}.
        assert!((rep.rhs - PI.sqrt()).abs() < 1e-8);
        let last = rep.points.last().unwrap();
        assert!(last.margin / rep.rhs < 1e-2, "{last:?}");
        assert!(rep.points.windows(2).all(|w| w[1].lhs >= w[0].lhs));
    }

    #[test]
    fn interference_mixed_and_disjoint() {
        let m = ModelSpec::laplacian(3);
        let u = catalog_state(&m, "exponential", &none()).unwrap();
        let v = catalog_state(&m, "gaussian_laplacian", &none()).unwrap();
        let rep = check_interference_inequality(&m, &v, &u, &[1.0, 100.0], 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let a: BTreeMap<String, f64> = [("center".into(), 1.0), ("width".into(), 0.5)].into();
        let b: BTreeMap<String, f64> = [("center".into(), 4.0), ("width".into(), 0.5)].into();
        let (x, y) = (catalog_state(&m, "bump", &a).unwrap(), catalog_state(&m, "bump", &b).unwrap());
        let rep = check_interference_inequality(&m, &x, &y, &[10.0], 1e-10).unwrap();
        assert_eq!(rep.points[0].lhs, 0.0);
    }

    #[test]
    fn corollary_closed_form() {
        let ts = log_grid(1e-3, 1e4, 2000);
        let psi = AmplitudeSeries::from_fn(&ts, |t| Complex64::new(1.0, -t).inv(), SeriesKind::Schrodinger);
        let tdpsi = AmplitudeSeries::from_fn(
            &ts,
            |t| Complex64::i() * t * Complex64::new(1.0, -t).powi(-2),
            SeriesKind::Derivative,
        );
        let rep = check_corollary_psidecay(&psi, &tdpsi, 1).unwrap();
        assert!(rep.applicable);
        assert!((rep.sup_stat - 0.5f64.sqrt()).abs() < 1e-3);
        // ‖ψ‖² = π, ‖ψ + tψ′‖² = π/2.
        let exact = 4.0 / (2.0 * PI).sqrt() * (PI * PI / 2.0).powf(0.25);
        assert!((rep.c_est - exact).abs() < 1e-2 * exact, "{} vs {exact}", rep.c_est);
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn corollary_constant_is_not_applicable() {
        let ts = log_grid(0.1, 1e4, 400);
        let psi = AmplitudeSeries::from_fn(&ts, |_| Complex64::new(1.0, 0.0), SeriesKind::Schrodinger);
        let zero = AmplitudeSeries::from_fn(&ts, |_| Complex64::new(0.0, 0.0), SeriesKind::Derivative);
        let rep = check_corollary_psidecay(&psi, &zero, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::NotApplicable);
    }
}
