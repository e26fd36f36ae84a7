//! Oscillatory quadrature: ∫ e^{itλ} f(λ) dλ over a (possibly unbounded)
//! interval with algebraic endpoint singularities.
//!
//! The integrand is sampled once into a panel expansion that does not depend
//! on `t`; every panel stores the values of `f` at Gauss–Legendre nodes and the
//! Legendre coefficients of the interpolant. Evaluation at a given `t` then
//! uses plain Gauss–Legendre on panels where `|t|·len <= 4` and the exact
//! Legendre moments 2 i^k j_k(ω) (a Filon-type rule) elsewhere, so the cost per
//! `t` is independent of the oscillation frequency.
//!
//! Singular endpoints are resolved with a geometric mesh (ratio 1/2) down to a
//! stub whose contribution is taken from the local model `C·x^α`. Unbounded
//! ends are truncated where the declared tail class bounds the remainder.

pub mod bessel;
pub mod legendre;
mod series;

pub use series::{amplitude_series, derivative_series};

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use bessel::spherical_bessel_j;
use legendre::{panel_rule, PANEL_ORDER};

pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

const FILON_SWITCH: f64 = 4.0;
const MAX_BISECTIONS: usize = 48;
const MAX_PANELS: usize = 40_000;
const MAX_GRADING_DEPTH: usize = 1000;

/// A closed or open interval of the real line; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn half_line(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY)
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

/// Decay class of the integrand at an unbounded end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailClass {
    /// No unbounded end is allowed.
    Compact,
    /// `|f(λ)| <= C |λ|^power e^{-rate |λ|}`.
    Exponential { rate: f64, power: f64 },
    /// Faster than any power, no explicit rate.
    SuperPolynomial,
    /// `|f(λ)| <= C |λ|^power`, requires `power < -1`.
    Algebraic { power: f64 },
}

impl TailClass {
    /// The tail class of `λ^k · f`.
    pub fn times_power(self, k: f64) -> Self {
        match self {
            TailClass::Exponential { rate, power } => TailClass::Exponential { rate, power: power + k },
            TailClass::Algebraic { power } => TailClass::Algebraic { power: power + k },
            other => other,
        }
    }

    /// Tail class of the product of two functions with these classes.
    pub fn product(self, other: Self) -> Self {
        use TailClass::*;
        match (self, other) {
            (Compact, _) | (_, Compact) => Compact,
            (Exponential { rate: r1, power: p1 }, Exponential { rate: r2, power: p2 }) => {
                Exponential { rate: r1 + r2, power: p1 + p2 }
            }
            (Exponential { rate, power }, Algebraic { power: q }) | (Algebraic { power: q }, Exponential { rate, power }) => {
                Exponential { rate, power: power + q.max(0.0) }
            }
            (Algebraic { power: p }, Algebraic { power: q }) => Algebraic { power: p + q },
            _ => SuperPolynomial,
        }
    }

    /// Tail class of `sqrt(f)`.
    pub fn sqrt(self) -> Self {
        match self {
            TailClass::Exponential { rate, power } => TailClass::Exponential { rate: 0.5 * rate, power: 0.5 * power },
            TailClass::Algebraic { power } => TailClass::Algebraic { power: 0.5 * power },
            other => other,
        }
    }

    /// Whether ∫ |λ|^k |f| converges at infinity.
    pub fn has_moment(self, k: f64) -> bool {
        match self {
            TailClass::Algebraic { power } => power + k < -1.0,
            _ => true,
        }
    }
}

/// Endpoint behaviour of an integrand: `f ~ (λ - a)^left` at the finite left
/// end and `(b - λ)^right` at the finite right end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityInfo {
    pub left: f64,
    pub right: f64,
    pub tail: TailClass,
}

impl SingularityInfo {
    pub fn regular(tail: TailClass) -> Self {
        Self { left: 0.0, right: 0.0, tail }
    }

    pub fn validate(&self) -> Result<()> {
        for a in [self.left, self.right] {
            if !(a > -1.0) {
                return Err(Error::InvalidSingularity(a));
            }
        }
        match self.tail {
            TailClass::Exponential { rate, .. } if !(rate > 0.0) => Err(Error::ParamOutOfRange(format!(
                "exponential tail rate must be positive, got {rate}"
            ))),
            TailClass::Algebraic { power } if !(power < -1.0) => Err(Error::InvalidSingularity(power)),
            _ => Ok(()),
        }
    }
}

/// A complex integrand with its singularity metadata.
#[derive(Clone)]
pub struct Integrand {
    pub f: ComplexFn,
    pub interval: Interval,
    pub info: SingularityInfo,
    /// Interior points where `f` is not analytic (kinks, cutoff joins).
    pub breakpoints: Vec<f64>,
}

impl std::fmt::Debug for Integrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrand")
            .field("interval", &self.interval)
            .field("info", &self.info)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Integrand {
    pub fn new(f: ComplexFn, interval: Interval, info: SingularityInfo) -> Self {
        Self { f, interval, info, breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| *p > self.interval.lo && *p < self.interval.hi);
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn expand(&self, tol: f64) -> Result<Expansion> {
        Expansion::build(self, tol)
    }
}

/// Result of one oscillatory integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels_used: usize,
    pub truncation_bound: f64,
    /// False when the panel budget ran out before the tolerance was met
    /// (the estimate is still honest).
    pub converged: bool,
}

/// `∫_a^b e^{itλ} f(λ) dλ`.
pub fn oscillatory_integral(integrand: &Integrand, t: f64, tol: f64) -> Result<QuadratureResult> {
    Ok(integrand.expand(tol)?.eval(t))
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 1e-14 && tol < 1e-2 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

#[derive(Debug, Clone)]
struct Panel {
    center: f64,
    half: f64,
    values: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    est: f64,
}

impl Panel {
    fn sample(f: &ComplexFn, a: f64, b: f64) -> Self {
        let pr = panel_rule();
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let values: Vec<Complex64> = pr.rule.nodes.iter().map(|x| f(center + half * x)).collect();
        let coeffs: Vec<Complex64> = pr
            .transform
            .iter()
            .map(|row| row.iter().zip(&values).map(|(w, v)| v * *w).sum())
            .collect();
        let n = coeffs.len();
        let tail = coeffs[n - 3..].iter().map(|c| c.norm()).sum::<f64>();
        Self { center, half, values, coeffs, est: 2.0 * half * tail }
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn tail(&self) -> f64 {
        self.est / (2.0 * self.half)
    }

    fn integrate(&self, t: f64) -> Complex64 {
        let pr = panel_rule();
        if t.abs() * 2.0 * self.half <= FILON_SWITCH {
            let s: Complex64 = pr
                .rule
                .nodes
                .iter()
                .zip(&pr.rule.weights)
                .zip(&self.values)
                .map(|((x, w), v)| v * Complex64::cis(t * (self.center + self.half * x)) * *w)
                .sum();
            return s * self.half;
        }
        let omega = t * self.half;
        let j = spherical_bessel_j(omega.abs(), PANEL_ORDER);
        // (±i)^k with the sign of ω, since j_k(-x) = (-1)^k j_k(x).
        let step = Complex64::new(0.0, omega.signum());
        let mut phase = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for (c, jk) in self.coeffs.iter().zip(&j) {
            s += c * phase * (2.0 * jk);
            phase *= step;
        }
        s * Complex64::cis(t * self.center) * self.half
    }
}

/// Innermost piece of a graded mesh, integrated with the local model.
#[derive(Debug, Clone)]
struct Stub {
    mid: f64,
    value: Complex64,
    mass: f64,
}

/// A `t`-independent panel decomposition of an integrand.
#[derive(Debug, Clone)]
pub struct Expansion {
    panels: Vec<Panel>,
    stubs: Vec<Stub>,
    truncation_bound: f64,
    converged: bool,
    error_sum: f64,
}

impl Expansion {
    fn build(integrand: &Integrand, tol: f64) -> Result<Self> {
        check_tolerance(tol)?;
        let info = integrand.info;
        info.validate()?;
        let f = &integrand.f;
        let iv = integrand.interval;
        let share = tol / 10.0;
        let mut converged = true;
        let mut truncation_bound = 0.0;

        let reference = if iv.lo.is_finite() {
            iv.lo
        } else if iv.hi.is_finite() {
            iv.hi
        } else {
            0.0
        };
        let hi = if iv.hi.is_finite() {
            iv.hi
        } else {
            let (l, b, ok) = truncation_point(&|x| f(x).norm(), reference.max(0.0), info.tail, share)?;
            truncation_bound += b;
            converged &= ok;
            l
        };
        let lo = if iv.lo.is_finite() {
            iv.lo
        } else {
            let (l, b, ok) = truncation_point(&|x| f(-x).norm(), (-reference).max(0.0), info.tail, share)?;
            truncation_bound += b;
            converged &= ok;
            -l
        };

        let mut cuts = vec![lo];
        cuts.extend(integrand.breakpoints.iter().copied().filter(|p| *p > lo && *p < hi));
        cuts.push(hi);
        let total_len = hi - lo;
        let allow_per_len = 0.5 * tol / total_len;

        let mut pieces: Vec<(f64, f64)> = Vec::new();
        let mut stubs = Vec::new();
        let nseg = cuts.len() - 1;
        for (i, w) in cuts.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let grade_left = i == 0 && iv.lo.is_finite() && needs_grading(info.left);
            let grade_right = i == nseg - 1 && iv.hi.is_finite() && needs_grading(info.right);
            let frac = if grade_left && grade_right { 0.25 } else { 0.5 };
            let delta = frac * (b - a);
            let mut mid_lo = a;
            let mut mid_hi = b;
            if grade_left {
                let (stub, graded, ok) = graded_pieces(f, a, delta, info.left, tol, share, 1.0);
                converged &= ok;
                stubs.push(stub);
                pieces.extend(graded);
                mid_lo = a + delta;
            }
            let mut right_graded = Vec::new();
            if grade_right {
                let (stub, graded, ok) = graded_pieces(f, b, delta, info.right, tol, share, -1.0);
                converged &= ok;
                stubs.push(stub);
                right_graded = graded;
                mid_hi = b - delta;
            }
            let m = 0.5 * (mid_lo + mid_hi);
            pieces.push((mid_lo, m));
            pieces.push((m, mid_hi));
            pieces.extend(right_graded);
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut panels = Vec::new();
        for (a, b) in pieces {
            converged &= refine(f, a, b, allow_per_len, 0, &mut panels);
        }
        if panels.len() > MAX_PANELS {
            converged = false;
        }
        let error_sum = panels.iter().map(|p| p.est).sum::<f64>() + stubs.iter().map(|s| s.mass).sum::<f64>();
        Ok(Self { panels, stubs, truncation_bound, converged, error_sum })
    }

    pub fn eval(&self, t: f64) -> QuadratureResult {
        let mut value: Complex64 = self.panels.iter().map(|p| p.integrate(t)).sum();
        for s in &self.stubs {
            value += s.value * Complex64::cis(t * s.mid);
        }
        QuadratureResult {
            value,
            error_estimate: self.error_sum,
            panels_used: self.panels.len().max(1),
            truncation_bound: self.truncation_bound,
            converged: self.converged,
        }
    }

    pub fn panels_used(&self) -> usize {
        self.panels.len()
    }

    /// ∫ |f| over the resolved range (Gauss–Legendre on the stored samples).
    pub fn abs_integral(&self) -> f64 {
        let pr = panel_rule();
        self.panels
            .iter()
            .map(|p| p.half * p.values.iter().zip(&pr.rule.weights).map(|(v, w)| v.norm() * w).sum::<f64>())
            .sum::<f64>()
            + self.stubs.iter().map(|s| s.value.norm()).sum::<f64>()
    }

    /// Largest |f| seen on the sampling nodes.
    pub fn sup_abs(&self) -> f64 {
        self.panels.iter().map(Panel::max_abs).fold(0.0, f64::max)
    }
}

fn needs_grading(alpha: f64) -> bool {
    !(alpha >= 0.0 && alpha.fract() == 0.0)
}

fn refine(f: &ComplexFn, a: f64, b: f64, allow_per_len: f64, depth: usize, out: &mut Vec<Panel>) -> bool {
    let p = Panel::sample(f, a, b);
    let roundoff = 64.0 * f64::EPSILON * p.max_abs();
    if p.est <= allow_per_len * (b - a) || p.tail() <= roundoff {
        out.push(p);
        return true;
    }
    if depth >= MAX_BISECTIONS || out.len() >= MAX_PANELS {
        out.push(p);
        return false;
    }
    let m = 0.5 * (a + b);
    let left = refine(f, a, m, allow_per_len, depth + 1, out);
    let right = refine(f, m, b, allow_per_len, depth + 1, out);
    left && right
}

/// Geometric mesh toward `end` (direction +1: mesh on the right of a left end).
fn graded_pieces(
    f: &ComplexFn,
    end: f64,
    delta: f64,
    alpha: f64,
    tol: f64,
    share: f64,
    dir: f64,
) -> (Stub, Vec<(f64, f64)>, bool) {
    let min_depth = ((1.0 / tol).log2() / (1.0 + alpha)).ceil() as usize;
    // Below this width the offset from `end` is lost to rounding.
    let floor = 64.0 * f64::EPSILON * end.abs().max(f64::MIN_POSITIVE);
    let mut pieces = Vec::new();
    let mut outer = delta;
    let mut depth = 0;
    let mut ok = true;
    loop {
        let inner = 0.5 * outer;
        let mass = f(end + dir * inner).norm() * inner / (1.0 + alpha);
        let (x0, x1) = if dir > 0.0 { (end + inner, end + outer) } else { (end - outer, end - inner) };
        pieces.push((x0, x1));
        outer = inner;
        depth += 1;
        if depth >= min_depth && mass <= share {
            break;
        }
        if depth >= MAX_GRADING_DEPTH || 0.5 * outer < floor {
            ok = mass <= share;
            break;
        }
    }
    let eps = outer;
    let f_eps = f(end + dir * eps);
    let stub = Stub {
        mid: end + dir * 0.5 * eps,
        value: f_eps * (eps / (1.0 + alpha)),
        mass: f_eps.norm() * eps / (1.0 + alpha),
    };
    (stub, pieces, ok)
}

/// Truncation point `L >= start` for the right tail of `|f|`, with the bound on
/// the discarded remainder.
fn truncation_point(absf: &dyn Fn(f64) -> f64, start: f64, tail: TailClass, share: f64) -> Result<(f64, f64, bool)> {
    let mut l = start + 1.0;
    match tail {
        TailClass::Compact => Err(Error::ParamOutOfRange(
            "compact tail declared on an unbounded interval".into(),
        )),
        TailClass::Exponential { rate, power } => {
            for _ in 0..400 {
                let denom = rate - power.max(0.0) / l;
                if denom > 0.0 {
                    let c = [1.0, 1.25, 1.5, 2.0, 3.0]
                        .iter()
                        .map(|k| {
                            let x = k * l;
                            absf(x) * (rate * x).exp() / x.powf(power)
                        })
                        .filter(|v| v.is_finite())
                        .fold(0.0, f64::max);
                    let bound = c * l.powf(power) * (-rate * l).exp() / denom;
                    if bound <= share {
                        return Ok((l, bound, true));
                    }
                }
                l *= 1.1;
            }
            Ok((l, f64::INFINITY, false))
        }
        TailClass::SuperPolynomial => {
            for _ in 0..400 {
                let sup = (0..=16).map(|k| absf(l * (1.0 + 3.0 * k as f64 / 16.0))).fold(0.0, f64::max);
                let bound = sup * l;
                if bound <= share {
                    return Ok((l, bound, true));
                }
                l *= 1.1;
            }
            Ok((l, f64::INFINITY, false))
        }
        TailClass::Algebraic { power } => {
            let decay = -power - 1.0;
            loop {
                let c = absf(l) * l.powf(-power);
                let bound = c * l.powf(-decay) / decay;
                if bound <= share {
                    return Ok((l, bound, true));
                }
                if l > 1e12 {
                    return Ok((l, bound, false));
                }
                l *= 1.5;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ComplexFn {
        Arc::new(move |x| Complex64::new(f(x), 0.0))
    }

    #[test]
    fn exponential_closed_form() {
        let ig = Integrand::new(
            real(|x| (-x).exp()),
            Interval::half_line(0.0),
            SingularityInfo::regular(TailClass::Exponential { rate: 1.0, power: 0.0 }),
        );
        let exp = ig.expand(1e-10).unwrap();
        for &t in &[0.0, 1.0, 3.0, 47.0, 1e3, 1e4] {
            let r = exp.eval(t);
            let exact = Complex64::new(1.0, -t).inv();
            assert!((r.value - exact).norm() < 1e-10, "t={t} err={}", (r.value - exact).norm());
            assert!(r.error_estimate <= 1e-10);
        }
    }

    #[test]
    fn unit_interval_at_zero() {
        let ig = Integrand::new(real(|_| 1.0), Interval::new(0.0, 1.0), SingularityInfo::regular(TailClass::Compact));
        let r = oscillatory_integral(&ig, 0.0, 1e-12).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-14 && r.value.im.abs() < 1e-15);
        assert!(r.panels_used >= 1);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        let ig = Integrand::new(
            real(|x| x.powf(-0.5) * (-x).exp()),
            Interval::half_line(0.0),
            SingularityInfo { left: -0.5, right: 0.0, tail: TailClass::Exponential { rate: 1.0, power: -0.5 } },
        );
        let r = oscillatory_integral(&ig, 0.0, 1e-11).unwrap();
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn rejects_non_integrable_exponent() {
        let ig = Integrand::new(
            real(|x| 1.0 / x),
            Interval::new(0.0, 1.0),
            SingularityInfo { left: -1.0, right: 0.0, tail: TailClass::Compact },
        );
        assert_eq!(oscillatory_integral(&ig, 1.0, 1e-8).unwrap_err(), Error::InvalidSingularity(-1.0));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let ig = Integrand::new(real(|_| 1.0), Interval::new(0.0, 1.0), SingularityInfo::regular(TailClass::Compact));
        assert!(matches!(oscillatory_integral(&ig, 1.0, 0.1), Err(Error::InvalidTolerance(_))));
        assert!(matches!(oscillatory_integral(&ig, 1.0, 1e-15), Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn budget_exhaustion_is_flagged_not_fatal() {
        // Wildly oscillating amplitude; the panel budget cannot reach 1e-13.
        let ig = Integrand::new(
            real(|x| (1.0 / (x + 1e-9)).sin()),
            Interval::new(0.0, 1.0),
            SingularityInfo::regular(TailClass::Compact),
        );
        let r = oscillatory_integral(&ig, 5.0, 1e-13).unwrap();
        assert!(!r.converged);
        assert!(r.error_estimate > 0.0);
    }
}
