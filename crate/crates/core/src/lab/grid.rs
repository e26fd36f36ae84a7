//! The conjugate generator A_θ on a uniform λ-grid and its refinement checks.
//!
//! With D the centred difference, A_θ = (i/2)(ΘD + DΘ) is Hermitian and
//! [Λ, iA_θ] = Θ + O(h²) on smooth data. Every check compares a grid with
//! its halving and expects the residual to drop by four.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::flow::{flow_map, FlowField};
use super::matrix::{hermitian_eigen, is_hermitian, unitary_exp, CMatrix};
use crate::error::{Error, Result};
use crate::quad::Interval;
use crate::spectral::{RealFn, Symbol};

pub const MIN_POINTS: usize = 8;
pub const MIN_GENERATOR_INTERVALS: usize = 32;
/// Observed order window for a second-order scheme.
pub const RATIO_WINDOW: (f64, f64) = (3.5, 4.5);
/// Residuals below this count as exact.
const EXACT_FLOOR: f64 = 1e-12;
/// e^{−iτA} M_φ e^{iτA} = M_{φ∘ξ_{s·τ}} with s = FLOW_SIGN, fixed against the
/// first-order symbol check.
pub const FLOW_SIGN: f64 = 1.0;
/// Step of the auxiliary differences that build δ_θ^k φ.
const AUX_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub intervals: usize,
    pub spacing: f64,
    pub points: Vec<f64>,
}

impl Grid {
    pub fn uniform(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::ParamOutOfRange(format!("grid span [{lo}, {hi}]")));
        }
        if intervals + 1 < MIN_POINTS {
            return Err(Error::GridTooCoarse(format!("{} points, need {MIN_POINTS}", intervals + 1)));
        }
        let spacing = (hi - lo) / intervals as f64;
        let points = (0..=intervals).map(|j| if j == intervals { hi } else { lo + j as f64 * spacing }).collect();
        Ok(Self { lo, hi, intervals, spacing, points })
    }

    /// Halves the spacing; every old node stays a node.
    pub fn refine(&self) -> Self {
        Self::uniform(self.lo, self.hi, 2 * self.intervals).expect("refining a valid grid")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nodes in the middle 60% of the span and at least 5h from either end.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        let span = self.hi - self.lo;
        let (a, b) = (self.lo + 0.2 * span, self.hi - 0.2 * span);
        let gap = 5.0 * self.spacing;
        (0..self.len()).filter(move |&j| {
            let x = self.points[j];
            x >= a && x <= b && x - self.lo >= gap && self.hi - x >= gap
        })
    }

    fn sample(&self, f: &dyn Fn(f64) -> f64) -> DVector<Complex64> {
        DVector::from_iterator(self.len(), self.points.iter().map(|&x| Complex64::new(f(x), 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryScheme {
    /// Symmetrised product with the centred difference; exactly Hermitian.
    #[default]
    Symmetric,
    /// i(ΘD + ½Θ′) with second-order one-sided end rows; not Hermitian.
    OneSided,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridOperator {
    pub dim: usize,
    #[serde(skip)]
    pub matrix: CMatrix,
    pub grid: Grid,
    pub scheme: BoundaryScheme,
    pub hermitian: bool,
}

impl GridOperator {
    pub fn apply(&self, f: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * f
    }
}

fn symbol_on(symbol: &Symbol, grid: &Grid) -> Result<Vec<f64>> {
    let th: Vec<f64> = grid.points.iter().map(|&x| symbol.eval(x)).collect();
    if th.iter().any(|v| !v.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("θ = {} is not finite on the grid", symbol.label())));
    }
    Ok(th)
}

pub fn build_conjugate_generator(symbol: &Symbol, grid: &Grid, scheme: BoundaryScheme) -> Result<GridOperator> {
    if grid.intervals < MIN_GENERATOR_INTERVALS {
        return Err(Error::GridTooCoarse(format!(
            "{} intervals, need {MIN_GENERATOR_INTERVALS}",
            grid.intervals
        )));
    }
    let n = grid.len();
    let h = grid.spacing;
    let th = symbol_on(symbol, grid)?;
    let i = Complex64::i();
    let mut m = CMatrix::zeros(n, n);
    match scheme {
        BoundaryScheme::Symmetric => {
            for j in 0..n - 1 {
                let c = i * (th[j] + th[j + 1]) / (4.0 * h);
                m[(j, j + 1)] = c;
                m[(j + 1, j)] = -c;
            }
        }
        BoundaryScheme::OneSided => {
            for j in 0..n {
                m[(j, j)] = i * 0.5 * symbol.derivative(grid.points[j]);
            }
            for j in 1..n - 1 {
                m[(j, j + 1)] += i * th[j] / (2.0 * h);
                m[(j, j - 1)] -= i * th[j] / (2.0 * h);
            }
            let ends = [(0usize, [0usize, 1, 2], 1.0), (n - 1, [n - 1, n - 2, n - 3], -1.0)];
            for (row, cols, sgn) in ends {
                for (c, w) in cols.into_iter().zip([-3.0, 4.0, -1.0]) {
                    m[(row, c)] += i * th[row] * sgn * w / (2.0 * h);
                }
            }
        }
    }
    let hermitian = is_hermitian(&m);
    Ok(GridOperator { dim: n, matrix: m, grid: grid.clone(), scheme, hermitian })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementReport {
    /// Residual on the given grid.
    pub coarse: f64,
    /// Residual after halving the spacing.
    pub fine: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl RefinementReport {
    pub fn new(coarse: f64, fine: f64) -> Self {
        let exact = coarse <= EXACT_FLOOR && fine <= EXACT_FLOOR;
        let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
        let pass = exact || (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&ratio);
        Self { coarse, fine, ratio, pass }
    }
}

/// Gaussians well inside the grid: one centred, one off-centre and modulated.
pub fn default_profiles(grid: &Grid) -> Vec<RealFn> {
    let span = grid.hi - grid.lo;
    let c = 0.5 * (grid.lo + grid.hi);
    let w = span / 20.0;
    vec![
        Arc::new(move |x: f64| (-((x - c) / w).powi(2)).exp()),
        Arc::new(move |x: f64| {
            let y = (x - c - 0.05 * span) / w;
            (-y * y).exp() * (2.0 * y).cos()
        }),
    ]
}

fn max_interior(grid: &Grid, r: &DVector<Complex64>) -> f64 {
    grid.interior().map(|j| r[j].norm()).fold(0.0, f64::max)
}

/// ‖([Λ, iA_θ] − Θ)f‖_∞ over interior nodes, on `grid` and its refinement.
pub fn commutator_residual(symbol: &Symbol, grid: &Grid, profiles: &[RealFn]) -> Result<RefinementReport> {
    let residual = |g: &Grid| -> Result<f64> {
        let ia = build_conjugate_generator(symbol, g, BoundaryScheme::Symmetric)?.matrix * Complex64::i();
        let th = symbol_on(symbol, g)?;
        let lam = g.sample(&|x| x);
        let mut worst = 0.0f64;
        for p in profiles {
            let f = g.sample(p.as_ref());
            let lf = f.component_mul(&lam);
            let comm = (&ia * &f).component_mul(&lam) - &ia * lf;
            let target = DVector::from_iterator(f.len(), f.iter().zip(&th).map(|(v, t)| v * *t));
            worst = worst.max(max_interior(g, &(comm - target)));
        }
        Ok(worst)
    };
    Ok(RefinementReport::new(residual(grid)?, residual(&grid.refine())?))
}

fn d4(f: &dyn Fn(f64) -> f64, x: f64, eta: f64) -> f64 {
    (8.0 * (f(x + eta) - f(x - eta)) - (f(x + 2.0 * eta) - f(x - 2.0 * eta))) / (12.0 * eta)
}

/// δ_θ^k φ(x) by nested fourth-order differences.
pub fn delta_power(symbol: &Symbol, phi: &dyn Fn(f64) -> f64, k: usize, x: f64) -> f64 {
    if k == 0 {
        return phi(x);
    }
    let inner = |y: f64| delta_power(symbol, phi, k - 1, y);
    symbol.eval(x) * d4(&inner, x, AUX_STEP)
}

/// ad^k(M_φ) f with ad(B) = [B, iA].
fn ad_apply(ia: &CMatrix, phi: &DVector<Complex64>, k: usize, f: &DVector<Complex64>) -> DVector<Complex64> {
    if k == 0 {
        return phi.component_mul(f);
    }
    ad_apply(ia, phi, k - 1, &(ia * f)) - ia * ad_apply(ia, phi, k - 1, f)
}

/// Nested grid commutators ad^k_{iA}(M_φ) against M_{δ_θ^k φ}.
pub fn symbol_calculus_check(symbol: &Symbol, phi: &RealFn, k: usize, grid: &Grid) -> Result<RefinementReport> {
    if k > 3 {
        return Err(Error::ParamOutOfRange(format!("commutator order {k} (supported: 0..=3)")));
    }
    let profiles = default_profiles(grid);
    let residual = |g: &Grid| -> Result<f64> {
        let ia = build_conjugate_generator(symbol, g, BoundaryScheme::Symmetric)?.matrix * Complex64::i();
        let ph = g.sample(phi.as_ref());
        let reference = g.sample(&|x| delta_power(symbol, phi.as_ref(), k, x));
        let mut worst = 0.0f64;
        for p in &profiles {
            let f = g.sample(p.as_ref());
            let r = ad_apply(&ia, &ph, k, &f) - reference.component_mul(&f);
            worst = worst.max(max_interior(g, &r));
        }
        Ok(worst)
    };
    Ok(RefinementReport::new(residual(grid)?, residual(&grid.refine())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugationReport {
    /// ‖(e^{−iτA} M_φ e^{iτA} − M_{φ∘ξ_τ}) f‖_∞ on interior nodes.
    pub operator: RefinementReport,
    /// |⟨f, e^{−iτA} M_φ e^{iτA} f⟩ − ∫ φ∘ξ_τ |f|²|.
    pub moment: RefinementReport,
    pub pass: bool,
}

/// Relative mass of the transported profile allowed near the grid ends.
const CONTAMINATION: f64 = 1e-6;

pub fn conjugation_flow_check(symbol: &Symbol, phi: &RealFn, tau: f64, grid: &Grid) -> Result<ConjugationReport> {
    let profiles = default_profiles(grid);
    let field = FlowField::new(symbol.clone(), Interval::real_line());
    let errors = |g: &Grid| -> Result<(f64, f64)> {
        let a = build_conjugate_generator(symbol, g, BoundaryScheme::Symmetric)?;
        let (values, vectors) = hermitian_eigen(&a.matrix);
        let fwd = unitary_exp(&values, &vectors, tau);
        let back = fwd.adjoint();
        let ph = g.sample(phi.as_ref());
        let flowed: Vec<f64> = g
            .points
            .iter()
            .map(|&x| flow_map(&field, FLOW_SIGN * tau, x).map(|y| phi(y)))
            .collect::<Result<_>>()
            .unwrap_or_else(|_| vec![f64::NAN; g.len()]);
        let span = g.hi - g.lo;
        let mut op_err = 0.0f64;
        let mut mom_err = 0.0f64;
        for p in &profiles {
            let f = g.sample(p.as_ref());
            let moved = &fwd * &f;
            let total = moved.norm();
            let edge = g
                .points
                .iter()
                .zip(moved.iter())
                .filter(|(x, _)| **x < g.lo + 0.1 * span || **x > g.hi - 0.1 * span)
                .map(|(_, v)| v.norm_sqr())
                .sum::<f64>()
                .sqrt();
            if total > 0.0 && edge > CONTAMINATION * total {
                return Err(Error::BoundaryContamination);
            }
            let conj = &back * moved.component_mul(&ph);
            let exact = DVector::from_iterator(f.len(), f.iter().zip(&flowed).map(|(v, y)| v * *y));
            for j in g.interior() {
                if !flowed[j].is_finite() {
                    return Err(Error::BoundaryContamination);
                }
                op_err = op_err.max((conj[j] - exact[j]).norm());
            }
            let lhs: Complex64 = f.iter().zip(conj.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * g.spacing;
            let rhs: f64 = f.iter().zip(&flowed).map(|(a, y)| a.norm_sqr() * y).sum::<f64>() * g.spacing;
            mom_err = mom_err.max((lhs - rhs).norm());
        }
        Ok((op_err, mom_err))
    };
    let (c_op, c_mom) = errors(grid)?;
    let (f_op, f_mom) = errors(&grid.refine())?;
    let operator = RefinementReport::new(c_op, f_op);
    let moment = RefinementReport::new(c_mom, f_mom);
    let moment_ok = moment.pass || moment.ratio >= RATIO_WINDOW.0;
    Ok(ConjugationReport { operator, moment, pass: operator.pass && moment_ok })
}
