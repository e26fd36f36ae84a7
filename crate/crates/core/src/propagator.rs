//! Survival and cross amplitudes, the wave pairings and the time-side
//! lifetime norm.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::decay::fit_decay_exponent;
use crate::error::{Error, Result};
use crate::quad::legendre::GaussLegendre;
use crate::quad::{amplitude_series, Expansion, Integrand, Interval, SingularityInfo, TailClass};
use crate::spectral::{density_of, evanescent_class, ModelSpec, SpectralDensity, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Schrodinger,
    WaveU1,
    WaveU2,
    Derivative,
    Cross,
}

/// Samples of an amplitude on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeSeries {
    pub t_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub error_estimates: Vec<f64>,
    /// False where the quadrature budget ran out.
    pub converged: Vec<bool>,
    pub kind: SeriesKind,
    pub model: String,
    pub state: String,
}

impl AmplitudeSeries {
    pub(crate) fn from_samples(t_grid: Vec<f64>, samples: Vec<(Complex64, f64, bool)>, kind: SeriesKind) -> Self {
        let mut values = Vec::with_capacity(samples.len());
        let mut error_estimates = Vec::with_capacity(samples.len());
        let mut converged = Vec::with_capacity(samples.len());
        for (v, e, c) in samples {
            values.push(v);
            error_estimates.push(e);
            converged.push(c);
        }
        Self { t_grid, values, error_estimates, converged, kind, model: String::new(), state: String::new() }
    }

    /// Builds a series from closed-form values (no quadrature error).
    pub fn from_fn(t_grid: &[f64], f: impl Fn(f64) -> Complex64, kind: SeriesKind) -> Self {
        let samples = t_grid.iter().map(|&t| (f(t), 0.0, true)).collect();
        Self::from_samples(t_grid.to_vec(), samples, kind)
    }

    pub fn with_provenance(mut self, model: impl Into<String>, state: impl Into<String>) -> Self {
        self.model = model.into();
        self.state = state.into();
        self
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }
}

/// `points` log-spaced times in [start, stop].
pub fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    assert!(start > 0.0 && stop > start && points >= 2);
    let (a, b) = (start.ln(), stop.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                start
            } else if i == points - 1 {
                stop
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

pub(crate) fn check_membership(model: &ModelSpec, state: &SpectralState) -> Result<()> {
    if state.model != model.id {
        return Err(Error::ParamOutOfRange(format!(
            "state belongs to {} but model is {}",
            state.model, model.id
        )));
    }
    Ok(())
}

pub fn survival_amplitude(model: &ModelSpec, state: &SpectralState, t: f64, tol: f64) -> Result<Complex64> {
    Ok(survival_series(model, state, &[t], tol)?.values[0])
}

pub fn survival_series(model: &ModelSpec, state: &SpectralState, t_grid: &[f64], tol: f64) -> Result<AmplitudeSeries> {
    check_membership(model, state)?;
    let d = density_of(state, model);
    Ok(amplitude_series(&d, t_grid, tol)?.with_provenance(model.id.to_string(), state.id.to_string()))
}

/// conj(v)·u·h as an integrand, or `None` when the supports are disjoint.
pub(crate) fn cross_integrand(model: &ModelSpec, v: &SpectralState, u: &SpectralState) -> Option<Integrand> {
    let support = v.support.intersect(&u.support)?;
    let exponent_at = |s: &SpectralState, x: f64, which: usize| -> f64 {
        if !x.is_finite() {
            return 0.0;
        }
        match which {
            0 if s.support.lo == x => s.endpoint_exponents.0,
            1 if s.support.hi == x => s.endpoint_exponents.1,
            _ => 0.0,
        }
    };
    let h_at = |x: f64| if x.is_finite() { model.weight.exponent_at(x) } else { 0.0 };
    let left = 0.5 * (exponent_at(v, support.lo, 0) + exponent_at(u, support.lo, 0)) + h_at(support.lo);
    let right = 0.5 * (exponent_at(v, support.hi, 1) + exponent_at(u, support.hi, 1)) + h_at(support.hi);
    let tail = v.tail.product(u.tail).sqrt();
    let (pv, pu, w) = (v.profile.clone(), u.profile.clone(), model.weight.clone());
    let mut bps = v.breakpoints.clone();
    bps.extend(&u.breakpoints);
    bps.extend([v.support.lo, v.support.hi, u.support.lo, u.support.hi].into_iter().filter(|x| x.is_finite()));
    Some(
        Integrand::new(
            Arc::new(move |l| pv(l).conj() * pu(l) * w.eval(l)),
            support,
            SingularityInfo { left, right, tail },
        )
        .with_breakpoints(bps),
    )
}

/// ⟨v, e^{itH}u⟩ on a grid.
pub fn cross_series(
    model: &ModelSpec,
    v: &SpectralState,
    u: &SpectralState,
    t_grid: &[f64],
    tol: f64,
) -> Result<AmplitudeSeries> {
    check_membership(model, v)?;
    check_membership(model, u)?;
    let series = match cross_integrand(model, v, u) {
        None => AmplitudeSeries::from_fn(t_grid, |_| Complex64::new(0.0, 0.0), SeriesKind::Cross),
        Some(ig) => {
            let exp = ig.expand(tol)?;
            let samples = t_grid
                .par_iter()
                .map(|&t| {
                    let r = exp.eval(t);
                    (r.value, r.error_estimate + r.truncation_bound, r.converged)
                })
                .collect();
            AmplitudeSeries::from_samples(t_grid.to_vec(), samples, SeriesKind::Cross)
        }
    };
    Ok(series.with_provenance(model.id.to_string(), format!("<{}|{}>", v.id, u.id)))
}

pub fn cross_amplitude(model: &ModelSpec, v: &SpectralState, u: &SpectralState, t: f64, tol: f64) -> Result<Complex64> {
    Ok(cross_series(model, v, u, &[t], tol)?.values[0])
}

/// Evaluator of ψ²(t) = ∫ sin(tλ)/λ F(λ) dλ with F = conj(f)·g·h.
enum SineEngine {
    Zero,
    /// F/λ is integrable: ψ² = (I(t) − I(−t))/(2i).
    Direct(Expansion),
    /// Support ℝ: fold onto (0, ∞) and remove G(0)e^{−λ}, whose transform is
    /// G(0)·arctan t.
    Folded { rest: Expansion, g0: Complex64 },
}

impl SineEngine {
    fn new(model: &ModelSpec, f: &SpectralState, g: &SpectralState, tol: f64) -> Result<Self> {
        let Some(ig) = cross_integrand(model, f, g) else {
            return Ok(SineEngine::Zero);
        };
        let sup = ig.interval;
        let info = ig.info;
        let fun = ig.f.clone();
        if sup.lo > 0.0 || sup.hi < 0.0 {
            let over = Integrand::new(
                Arc::new(move |l| fun(l) / l),
                sup,
                SingularityInfo { tail: info.tail.times_power(-1.0), ..info },
            )
            .with_breakpoints(ig.breakpoints.clone());
            return Ok(SineEngine::Direct(over.expand(tol)?));
        }
        if sup.lo == 0.0 || sup.hi == 0.0 {
            let a = if sup.lo == 0.0 { info.left } else { info.right };
            if a - 1.0 <= -1.0 {
                return Err(Error::DivisionNearThreshold);
            }
            let mut info2 = info;
            if sup.lo == 0.0 {
                info2.left -= 1.0;
            } else {
                info2.right -= 1.0;
            }
            info2.tail = info.tail.times_power(-1.0);
            let over = Integrand::new(Arc::new(move |l| fun(l) / l), sup, info2).with_breakpoints(ig.breakpoints.clone());
            return Ok(SineEngine::Direct(over.expand(tol)?));
        }
        if sup.lo.is_finite() || sup.hi.is_finite() {
            return Err(Error::ParamOutOfRange(
                "sine pairing supports 0 only at an endpoint or on the whole line".into(),
            ));
        }
        let g = move |l: f64| fun(l) + fun(-l);
        let g0 = g(0.0);
        // Gauss nodes never touch λ = 0, where the quotient has a removable singularity.
        let rest = move |l: f64| (g(l) - g0 * (-l).exp()) / l;
        let tail = match info.tail {
            TailClass::Exponential { rate, power } => TailClass::Exponential { rate: rate.min(1.0), power: power.max(0.0) },
            other => other,
        };
        let bps: Vec<f64> = ig.breakpoints.iter().map(|b| b.abs()).collect();
        let rest = Integrand::new(Arc::new(rest), Interval::half_line(0.0), SingularityInfo::regular(tail)).with_breakpoints(bps);
        Ok(SineEngine::Folded { rest: rest.expand(tol)?, g0 })
    }

    fn eval(&self, t: f64) -> (Complex64, f64, bool) {
        if t == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0, true);
        }
        let two_i = Complex64::new(0.0, 2.0);
        match self {
            SineEngine::Zero => (Complex64::new(0.0, 0.0), 0.0, true),
            SineEngine::Direct(exp) => {
                let (p, m) = (exp.eval(t), exp.eval(-t));
                ((p.value - m.value) / two_i, p.error_estimate + p.truncation_bound, p.converged)
            }
            SineEngine::Folded { rest, g0 } => {
                let (p, m) = (rest.eval(t), rest.eval(-t));
                let v = (p.value - m.value) / two_i + g0 * t.atan();
                (v, p.error_estimate + p.truncation_bound, p.converged)
            }
        }
    }
}

/// (ψ¹, ψ²) with ψ¹(t) = ⟨f, cos(tH) f⟩ and ψ²(t) = ⟨f, sin(tH)H^{−1} g⟩.
pub fn wave_amplitudes(
    model: &ModelSpec,
    f: &SpectralState,
    g: &SpectralState,
    t_grid: &[f64],
    tol: f64,
) -> Result<(AmplitudeSeries, AmplitudeSeries)> {
    check_membership(model, f)?;
    check_membership(model, g)?;
    let df = density_of(f, model);
    let cos_exp = df.integrand().expand(tol)?;
    let sine = SineEngine::new(model, f, g, tol)?;
    let psi1 = t_grid
        .par_iter()
        .map(|&t| {
            let (p, m) = (cos_exp.eval(t), cos_exp.eval(-t));
            (0.5 * (p.value + m.value), p.error_estimate + p.truncation_bound, p.converged)
        })
        .collect();
    let psi2 = t_grid.par_iter().map(|&t| sine.eval(t)).collect();
    let m = model.id.to_string();
    Ok((
        AmplitudeSeries::from_samples(t_grid.to_vec(), psi1, SeriesKind::WaveU1).with_provenance(&m, f.id.to_string()),
        AmplitudeSeries::from_samples(t_grid.to_vec(), psi2, SeriesKind::WaveU2)
            .with_provenance(&m, format!("<{}|{}>", f.id, g.id)),
    ))
}

/// Result of ∫_0^∞ |ψ(t)|² dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeL2 {
    /// ∫_0^{T*} |ψ|² plus the fitted tail.
    pub half_line: f64,
    pub tail: f64,
    pub tail_exponent: f64,
    pub horizon: f64,
}

const HORIZON_DOUBLINGS: i32 = 14;
const TIME_PANEL_DEPTH: usize = 10;
/// Panel error accepted relative to the size of g near t = 0, so that
/// panels where |ψ|² has decayed to roundoff are not refined.
const TIME_PANEL_ABS: f64 = 1e-11;
/// Tail amplitudes below this fraction of |ψ| near 0 are quadrature noise.
const TAIL_NOISE: f64 = 1e-8;

#[derive(Clone, Copy)]
struct PanelTol {
    rel: f64,
    abs: f64,
}

fn adaptive_time_panel<F>(f: &F, gl: &GaussLegendre, a: f64, b: f64, whole: f64, depth: usize, tol: PanelTol) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let m = 0.5 * (a + b);
    let mut ts = panel_nodes(gl, a, m);
    ts.extend(panel_nodes(gl, m, b));
    let vals = f(&ts)?;
    let n = gl.len();
    let sum = |vs: &[f64], lo: f64, hi: f64| 0.5 * (hi - lo) * vs.iter().zip(&gl.weights).map(|(v, w)| v * w).sum::<f64>();
    let left = sum(&vals[..n], a, m);
    let right = sum(&vals[n..], m, b);
    if (left + right - whole).abs() <= (tol.rel * (left + right).abs()).max(tol.abs) || depth >= TIME_PANEL_DEPTH {
        return Ok(left + right);
    }
    Ok(adaptive_time_panel(f, gl, a, m, left, depth + 1, tol)? + adaptive_time_panel(f, gl, m, b, right, depth + 1, tol)?)
}

fn panel_nodes(gl: &GaussLegendre, a: f64, b: f64) -> Vec<f64> {
    gl.nodes.iter().map(|x| 0.5 * (a + b) + 0.5 * (b - a) * x).collect()
}

/// Scale of g from its samples on [0, 1/2].
fn near_zero_scale<F>(g: &F, gl: &GaussLegendre) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    Ok(g(&panel_nodes(gl, 0.0, 0.5))?.into_iter().fold(0.0, f64::max))
}

/// ∫_0^∞ g(t) dt for g = |ψ|², with g sampled in batches. Dyadic panels up
/// to T* = 2^14, then a tail ∫_{T*}^∞ C²t^{−2s} from an envelope fit of √g.
pub fn time_l2<F>(g: F) -> Result<TimeL2>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let gl = GaussLegendre::new(16);
    let scale = near_zero_scale(&g, &gl)?;
    let tol = PanelTol { rel: 1e-7, abs: TIME_PANEL_ABS * scale };
    let mut edges = vec![0.0, 0.5];
    edges.extend((0..=HORIZON_DOUBLINGS).map(|j| 2f64.powi(j)));
    let horizon = *edges.last().unwrap();
    let mut body = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let vals = g(&panel_nodes(&gl, a, b))?;
        let whole = 0.5 * (b - a) * vals.iter().zip(&gl.weights).map(|(v, w)| v * w).sum::<f64>();
        body += adaptive_time_panel(&g, &gl, a, b, whole, 0, tol)?;
    }
    let ts = log_grid(horizon / 100.0, horizon, 400);
    let vals = g(&ts)?;
    if vals.iter().all(|v| v.max(0.0).sqrt() <= TAIL_NOISE * scale.sqrt()) {
        return Ok(TimeL2 { half_line: body, tail: 0.0, tail_exponent: f64::INFINITY, horizon });
    }
    let series = AmplitudeSeries::from_fn(&ts, |_| Complex64::new(0.0, 0.0), SeriesKind::Schrodinger);
    let series = AmplitudeSeries {
        values: vals.iter().map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)).collect(),
        ..series
    };
    let fit = fit_decay_exponent(&series, (horizon / 100.0, horizon))?;
    let s = fit.exponent;
    if s <= 0.5 {
        return Err(Error::TailUnbounded(s));
    }
    let tail = fit.prefactor.powi(2) * horizon.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0);
    Ok(TimeL2 { half_line: body + tail, tail, tail_exponent: s, horizon })
}

/// ‖ψ_u‖²_{L²(ℝ)} computed on the time side.
pub fn survival_l2_sq(model: &ModelSpec, state: &SpectralState, tol: f64) -> Result<TimeL2> {
    check_membership(model, state)?;
    let d = density_of(state, model);
    density_time_l2(&d, tol)
}

pub fn density_time_l2(d: &SpectralDensity, tol: f64) -> Result<TimeL2> {
    let exp = d.integrand().expand(tol)?;
    let r = time_l2(|ts: &[f64]| Ok(ts.par_iter().map(|&t| exp.eval(t).value.norm_sqr()).collect()))?;
    Ok(TimeL2 { half_line: 2.0 * r.half_line, tail: 2.0 * r.tail, ..r })
}

/// [u] = (∫_ℝ |ψ_u|²)^{1/4}; +∞ when u is not self-evanescent.
pub fn lifetime_norm_time(model: &ModelSpec, state: &SpectralState, tol: f64) -> Result<f64> {
    check_membership(model, state)?;
    let d = density_of(state, model);
    if d.total_mass == 0.0 {
        return Ok(0.0);
    }
    if !evanescent_class(&d).in_ce() {
        return Ok(f64::INFINITY);
    }
    Ok(density_time_l2(&d, tol)?.half_line.powf(0.25))
}

/// ‖ψ¹‖^{1/2} + ‖ψ²‖^{1/2} in L²(ℝ_t), the two-term lifetime norm of a
/// wave-type pair with f = g = u.
pub fn wave_lifetime_norm(model: &ModelSpec, state: &SpectralState, tol: f64) -> Result<f64> {
    check_membership(model, state)?;
    let d = density_of(state, model);
    if d.total_mass == 0.0 {
        return Ok(0.0);
    }
    let cos_exp = d.integrand().expand(tol)?;
    let sine = SineEngine::new(model, state, state, tol)?;
    let n1 = time_l2(|ts: &[f64]| {
        Ok(ts
            .par_iter()
            .map(|&t| (0.5 * (cos_exp.eval(t).value + cos_exp.eval(-t).value)).norm_sqr())
            .collect())
    })?;
    let n2 = time_l2(|ts: &[f64]| Ok(ts.par_iter().map(|&t| sine.eval(t).0.norm_sqr()).collect()))?;
    Ok((2.0 * n1.half_line).powf(0.25) + (2.0 * n2.half_line).powf(0.25))
}

/// (∫_{−T}^{T} |f|²)^{1/2} for each T on a sorted positive grid, from an
/// even |f|² sampled by `g`; used by the interference check.
pub fn truncated_l2<F>(g: F, t_grid: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let gl = GaussLegendre::new(16);
    let tol = PanelTol { rel: 1e-7, abs: TIME_PANEL_ABS * near_zero_scale(&g, &gl)? };
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        // Split each step into dyadic-ish chunks so oscillation is resolved.
        let mut a = prev;
        while a < t {
            let b = (if a < 0.5 { 0.5 } else { 2.0 * a }).min(t);
            let vals = g(&panel_nodes(&gl, a, b))?;
            let whole = 0.5 * (b - a) * vals.iter().zip(&gl.weights).map(|(v, w)| v * w).sum::<f64>();
            acc += adaptive_time_panel(&g, &gl, a, b, whole, 0, tol)?;
            a = b;
        }
        prev = t.max(prev);
        out.push((2.0 * acc).sqrt());
    }
    Ok(out)
}

/// Constant appearing in ψ(0) for a density: ∫e = ‖u‖².
pub fn total_mass(model: &ModelSpec, state: &SpectralState) -> f64 {
    density_of(state, model).total_mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::catalog_state;
    use std::f64::consts::PI;
    use std::collections::BTreeMap;

    fn none() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn exponential_survival() {
        let m = ModelSpec::fractional(1.0).unwrap();
        let s = catalog_state(&m, "exponential", &none()).unwrap();
        let z = survival_amplitude(&m, &s, 3.0, 1e-10).unwrap();
        assert!((z - Complex64::new(1.0, -3.0).inv()).norm() < 1e-10);
        let z0 = survival_amplitude(&m, &s, 0.0, 1e-10).unwrap();
        assert!((z0 - 1.0).norm() < 1e-10);
        let zm = survival_amplitude(&m, &s, -3.0, 1e-10).unwrap();
        assert!((zm - Complex64::new(1.0, 3.0).inv()).norm() < 1e-10);
    }

    #[test]
    fn gaussian_laplacian_modulus() {
        let m = ModelSpec::laplacian(3);
        let s = catalog_state(&m, "gaussian_laplacian", &none()).unwrap();
        let z = survival_amplitude(&m, &s, 10.0, 1e-10).unwrap();
        assert!((z.norm() - 101f64.powf(-0.75)).abs() < 1e-10);
    }

    #[test]
    fn cross_gamma_five_quarters() {
        // v = e^{−λ/2}, u = λ^{1/4}e^{−λ/2}: ⟨v,u⟩ = Γ(5/4).
        let m = ModelSpec::fractional(1.0).unwrap();
        let v = catalog_state(&m, "exponential", &none()).unwrap();
        let u = SpectralState::custom(
            &m,
            "λ^{1/4}e^{−λ/2}",
            Arc::new(|l: f64| Complex64::new(l.powf(0.25) * (-0.5 * l).exp(), 0.0)),
            m.support,
            (0.5, 0.0),
            TailClass::Exponential { rate: 1.0, power: 0.5 },
            crate::spectral::RegularityFlags { domain: 1, ce: Some(1) },
        )
        .unwrap();
        let z = cross_amplitude(&m, &v, &u, 0.0, 1e-11).unwrap();
        // Γ(5/4) by an independent rule: ∫_0^∞ λ^{1/4}e^{−λ} with λ = x⁴ substitution.
        let gl = GaussLegendre::new(400);
        let oracle = gl.integrate(0.0, 12.0, |x: f64| 4.0 * x.powi(4) * (-x.powi(4)).exp());
        assert!((z.re - oracle).abs() < 1e-9, "{z} vs {oracle}");
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let m = ModelSpec::electric_field();
        let mut p = none();
        p.insert("center".into(), -3.0);
        let a = catalog_state(&m, "bump", &p).unwrap();
        p.insert("center".into(), 3.0);
        let b = catalog_state(&m, "bump", &p).unwrap();
        let s = cross_series(&m, &a, &b, &[0.0, 1.0, 10.0], 1e-10).unwrap();
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn klein_gordon_cosine_pairing() {
        let m = ModelSpec::klein_gordon(1.0).unwrap();
        let f = catalog_state(&m, "exponential", &none()).unwrap();
        let ts = [0.0, 0.7, 5.0, 40.0];
        let (p1, p2) = wave_amplitudes(&m, &f, &f, &ts, 1e-10).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            let exact = (Complex64::cis(t) / Complex64::new(1.0, -t)).re;
            assert!((p1.values[i].re - exact).abs() < 1e-9, "t={t}");
        }
        assert_eq!(p2.values[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn electric_field_sine_pairing_is_odd() {
        let m = ModelSpec::electric_field();
        let f = catalog_state(&m, "exponential", &none()).unwrap();
        let ts = [-4.0, -1.0, 1.0, 4.0];
        let (_, p2) = wave_amplitudes(&m, &f, &f, &ts, 1e-10).unwrap();
        assert!((p2.values[0] + p2.values[3]).norm() < 1e-9);
        assert!((p2.values[1] + p2.values[2]).norm() < 1e-9);
        // e = ½e^{−|λ|}: ψ² = ∫_0^∞ sin(tλ)/λ e^{−λ} dλ = arctan t.
        assert!((p2.values[3].re - 4f64.atan()).abs() < 1e-9);
    }

    #[test]
    fn division_near_threshold() {
        let m = ModelSpec::fractional(1.0).unwrap();
        let f = catalog_state(&m, "exponential", &none()).unwrap();
        assert_eq!(wave_amplitudes(&m, &f, &f, &[1.0], 1e-8).unwrap_err(), Error::DivisionNearThreshold);
    }

    #[test]
    fn exponential_lifetime_norm_time() {
        let m = ModelSpec::fractional(1.0).unwrap();
        let s = catalog_state(&m, "exponential", &none()).unwrap();
        let n = lifetime_norm_time(&m, &s, 1e-10).unwrap();
        assert!((n - PI.powf(0.25)).abs() / PI.powf(0.25) < 1e-4, "{n}");
        assert_eq!(lifetime_norm_time(&m, &SpectralState::zero(&m), 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.1, 1e4, 1000);
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[999], 1e4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
