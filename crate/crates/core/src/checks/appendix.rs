//! |g̃(t)| ≤ 2^{3/2}(p−1)^{−1/(2p)} ‖g‖_p^{1/2} ‖δg‖_q^{1/2} |t|^{−1/2}
//! for g on (0, ∞), δg = x g′ and q = p/(p−1).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::Verdict;
use crate::error::{Error, Result};
use crate::quad::{Integrand, Interval, SingularityInfo, TailClass};
use crate::spectral::RealFn;

/// A test function g with its closed-form derivative.
#[derive(Clone)]
pub struct AppendixFunction {
    pub name: String,
    pub g: RealFn,
    pub dg: RealFn,
    pub support: Interval,
    /// g ~ x^left at 0.
    pub left: f64,
    pub tail: TailClass,
    /// Sign changes of g or g′, where |·|^p has kinks.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for AppendixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn exp_tail(rate: f64, power: f64) -> TailClass {
    TailClass::Exponential { rate, power }
}

fn arc(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
    Arc::new(f)
}

impl AppendixFunction {
    fn new(name: &str, g: RealFn, dg: RealFn, left: f64, tail: TailClass) -> Self {
        Self { name: name.into(), g, dg, support: Interval::half_line(0.0), left, tail, breakpoints: vec![] }
    }

    fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn zero() -> Self {
        Self::new("0", arc(|_| 0.0), arc(|_| 0.0), 0.0, TailClass::Compact).on(Interval::new(0.0, 1.0))
    }

    fn on(mut self, support: Interval) -> Self {
        self.support = support;
        self
    }

    /// The ten reference functions.
    pub fn catalog() -> Vec<Self> {
        // Zeros of cos 3x and of cos 3x + 3 sin 3x out to where e^{−x} is negligible.
        let mut osc: Vec<f64> = (0..40).map(|k| PI / 6.0 + k as f64 * PI / 3.0).collect();
        osc.extend((1..40).map(|k| (k as f64 * PI - (1.0f64 / 3.0).atan()) / 3.0));
        osc.sort_by(f64::total_cmp);
        let bump = |x: f64| if x <= 0.0 || x >= 2.0 { 0.0 } else { (-1.0 / (x * (2.0 - x))).exp() };
        vec![
            Self::new("e^{-x}", arc(|x| (-x).exp()), arc(|x| -(-x).exp()), 0.0, exp_tail(1.0, 0.0)),
            Self::new("xe^{-x}", arc(|x| x * (-x).exp()), arc(|x| (1.0 - x) * (-x).exp()), 1.0, exp_tail(1.0, 1.0))
                .with_breakpoints(vec![1.0]),
            Self::new(
                "e^{-x^2}",
                arc(|x| (-x * x).exp()),
                arc(|x| -2.0 * x * (-x * x).exp()),
                0.0,
                TailClass::SuperPolynomial,
            ),
            Self::new(
                "e^{-2x}(1+x)",
                arc(|x| (-2.0 * x).exp() * (1.0 + x)),
                arc(|x| -(-2.0 * x).exp() * (1.0 + 2.0 * x)),
                0.0,
                exp_tail(2.0, 1.0),
            ),
            Self::new(
                "x^{-1/4}e^{-x}",
                arc(|x| x.powf(-0.25) * (-x).exp()),
                arc(|x| -(-x).exp() * x.powf(-1.25) * (0.25 + x)),
                -0.25,
                exp_tail(1.0, -0.25),
            ),
            Self::new(
                "x^2e^{-x}",
                arc(|x| x * x * (-x).exp()),
                arc(|x| (2.0 * x - x * x) * (-x).exp()),
                2.0,
                exp_tail(1.0, 2.0),
            )
            .with_breakpoints(vec![2.0]),
            Self::new(
                "e^{-x}/(1+x)",
                arc(|x| (-x).exp() / (1.0 + x)),
                arc(|x| -(-x).exp() * (2.0 + x) / ((1.0 + x) * (1.0 + x))),
                0.0,
                exp_tail(1.0, -1.0),
            ),
            Self::new(
                "e^{-x}cos3x",
                arc(|x| (-x).exp() * (3.0 * x).cos()),
                arc(|x| -(-x).exp() * ((3.0 * x).cos() + 3.0 * (3.0 * x).sin())),
                0.0,
                exp_tail(1.0, 0.0),
            )
            .with_breakpoints(osc),
            Self::new(
                "bump(0,2)",
                arc(bump),
                arc(move |x| {
                    if x <= 0.0 || x >= 2.0 {
                        0.0
                    } else {
                        let q = x * (2.0 - x);
                        bump(x) * (2.0 - 2.0 * x) / (q * q)
                    }
                }),
                0.0,
                TailClass::Compact,
            )
            .on(Interval::new(0.0, 2.0))
            .with_breakpoints(vec![1.0]),
            Self::new(
                "x^{1/2}e^{-x^2}",
                arc(|x| x.sqrt() * (-x * x).exp()),
                arc(|x| (-x * x).exp() * (0.5 / x.sqrt() - 2.0 * x.powf(1.5))),
                0.5,
                TailClass::SuperPolynomial,
            )
            .with_breakpoints(vec![0.5]),
        ]
    }

    fn integrand(&self, f: RealFn, left: f64, tail: TailClass) -> Integrand {
        let sing = SingularityInfo { left, right: 0.0, tail };
        Integrand::new(Arc::new(move |x| Complex64::new(f(x), 0.0)), self.support, sing)
            .with_breakpoints(self.breakpoints.clone())
    }

    fn lp_norm(&self, f: RealFn, left: f64, tail: TailClass, p: f64, tol: f64) -> Result<f64> {
        if p * left <= -1.0 {
            return Err(Error::NormDiverges(format!("{} near 0 in L^{p}", self.name)));
        }
        let tail = match tail {
            TailClass::Exponential { rate, power } => TailClass::Exponential { rate: rate * p, power: power * p },
            TailClass::Algebraic { power } if power * p >= -1.0 => {
                return Err(Error::NormDiverges(format!("{} at infinity in L^{p}", self.name)))
            }
            TailClass::Algebraic { power } => TailClass::Algebraic { power: power * p },
            other => other,
        };
        let fp: RealFn = Arc::new(move |x| f(x).abs().powf(p));
        let v = self.integrand(fp, p * left, tail).expand(tol)?.eval(0.0).value.re;
        Ok(v.max(0.0).powf(1.0 / p))
    }

    pub fn norm_p(&self, p: f64, tol: f64) -> Result<f64> {
        self.lp_norm(self.g.clone(), self.left, self.tail, p, tol)
    }

    /// ‖x g′‖_q.
    pub fn delta_norm(&self, q: f64, tol: f64) -> Result<f64> {
        let dg = self.dg.clone();
        let d: RealFn = Arc::new(move |x| x * dg(x));
        // x g′ is no more singular at 0 than g.
        self.lp_norm(d, self.left, self.tail.times_power(1.0), q, tol)
    }

    /// g̃(t) = ∫ e^{itx} g(x) dx on a grid.
    pub fn transform(&self, t_grid: &[f64], tol: f64) -> Result<Vec<Complex64>> {
        let exp = self.integrand(self.g.clone(), self.left, self.tail).expand(tol)?;
        Ok(t_grid.iter().map(|&t| exp.eval(t).value).collect())
    }
}

pub fn lemma_constant(p: f64) -> f64 {
    2f64.powf(1.5) * (p - 1.0).powf(-1.0 / (2.0 * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPoint {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixReport {
    pub function: String,
    pub p: f64,
    pub q: f64,
    pub norm_g: f64,
    pub norm_delta_g: f64,
    pub constant: f64,
    pub points: Vec<BoundPoint>,
    pub verdict: Verdict,
}

pub fn check_appendix_lemma(af: &AppendixFunction, p: f64, t_grid: &[f64], tol: f64) -> Result<AppendixReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("p = {p} must lie in (1, ∞)")));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::ParamOutOfRange("time grid must be positive".into()));
    }
    let q = p / (p - 1.0);
    let norm_g = af.norm_p(p, tol)?;
    let norm_delta_g = af.delta_norm(q, tol)?;
    let constant = lemma_constant(p);
    let scale = constant * (norm_g * norm_delta_g).sqrt();
    let points: Vec<BoundPoint> = af
        .transform(t_grid, tol)?
        .into_iter()
        .zip(t_grid)
        .map(|(v, &t)| {
            let (lhs, rhs) = (v.norm(), scale / t.sqrt());
            BoundPoint { t, lhs, rhs, margin: rhs - lhs }
        })
        .collect();
    let ok = points.iter().all(|b| b.lhs <= b.rhs + 10.0 * tol);
    Ok(AppendixReport {
        function: af.name.clone(),
        p,
        q,
        norm_g,
        norm_delta_g,
        constant,
        points,
        verdict: Verdict::from_bool(ok),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::log_grid;

    #[test]
    fn exponential_at_p2() {
        let g = &AppendixFunction::catalog()[0];
        assert!((g.norm_p(2.0, 1e-12).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        assert!((g.delta_norm(2.0, 1e-12).unwrap() - 0.5).abs() < 1e-10);
        let rep = check_appendix_lemma(g, 2.0, &[1.0], 1e-10).unwrap();
        assert!((rep.points[0].rhs - 2f64.powf(0.75)).abs() < 1e-9);
        assert!((rep.points[0].lhs - 0.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn constant_closed_form() {
        assert!((lemma_constant(2.0) - 2f64.powf(1.5)).abs() < 1e-15);
        assert!((lemma_constant(3.0) - 2f64.powf(1.5) * 2f64.powf(-1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        for af in AppendixFunction::catalog() {
            for x in [0.37, 1.3, 1.7] {
                let h = 1e-5;
                let fd = ((af.g)(x + h) - (af.g)(x - h)) / (2.0 * h);
                assert!((fd - (af.dg)(x)).abs() < 1e-7 * (1.0 + fd.abs()), "{} at {x}", af.name);
            }
        }
    }

    #[test]
    fn norms_against_brute_force() {
        // Composite midpoint on a fine grid as an independent oracle.
        for af in AppendixFunction::catalog() {
            if af.left < 0.0 {
                continue;
            }
            let hi = if af.support.hi.is_finite() { af.support.hi } else { 40.0 };
            let n = 400_000;
            let dx = hi / n as f64;
            let p = 1.5;
            let brute: f64 = (0..n).map(|i| (af.g)((i as f64 + 0.5) * dx).abs().powf(p)).sum::<f64>() * dx;
            let got = af.norm_p(p, 1e-12).unwrap().powf(p);
            assert!((got - brute).abs() < 1e-6 * brute.max(1e-3), "{}: {got} vs {brute}", af.name);
        }
    }

    #[test]
    fn zero_function_passes_trivially() {
        let rep = check_appendix_lemma(&AppendixFunction::zero(), 2.0, &[1.0, 10.0], 1e-10).unwrap();
        assert!(rep.points.iter().all(|b| b.lhs == 0.0 && b.rhs == 0.0));
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn full_suite_has_no_violations() {
        let ts = log_grid(0.1, 100.0, 50);
        for af in AppendixFunction::catalog() {
            for p in [1.5, 2.0, 3.0] {
                let rep = check_appendix_lemma(&af, p, &ts, 1e-10).unwrap();
                assert_eq!(rep.verdict, Verdict::Pass, "{} p={p}", af.name);
            }
        }
    }

    #[test]
    fn divergent_norm_is_reported() {
        let mut af = AppendixFunction::catalog()[4].clone();
        af.left = -0.6;
        assert!(matches!(af.norm_p(2.0, 1e-10), Err(Error::NormDiverges(_))));
    }
}
