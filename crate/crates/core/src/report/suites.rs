//! Fixed batteries of operator-lab checks shared by scenarios and acceptance.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lab::{
    conjugation_flow_check, duhamel_identity_check, flow_map, random_hermitian, random_matrix, required_nodes,
    resolvent_commutator_check, symbol_calculus_check, FlowField, Grid,
};
use crate::quad::Interval;
use crate::spectral::{RealFn, Symbol};

pub const MATRIX_DIMS: [usize; 2] = [6, 12];
pub const MATRIX_TIMES: [f64; 3] = [0.5, 2.5, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRow {
    pub seed: u64,
    pub dim: usize,
    /// None for the resolvent identity.
    pub t: Option<f64>,
    pub error_norm: f64,
    pub pass: bool,
}

/// Duhamel at every (dim, t) and the resolvent identity at z = i, per seed.
pub fn matrix_suite(seeds: &[u64]) -> Result<Vec<MatrixRow>> {
    let cases: Vec<(u64, usize)> = seeds.iter().flat_map(|&s| MATRIX_DIMS.map(|n| (s, n))).collect();
    let rows: Result<Vec<Vec<MatrixRow>>> = cases
        .par_iter()
        .map(|&(seed, dim)| {
            let h = random_hermitian(dim, seed);
            let a = random_matrix(dim, seed);
            let mut out = Vec::new();
            for t in MATRIX_TIMES {
                let c = duhamel_identity_check(&h, &a, t, required_nodes(&h, t))?;
                out.push(MatrixRow { seed, dim, t: Some(t), error_norm: c.error_norm, pass: c.pass });
            }
            let r = resolvent_commutator_check(&h, &a, Complex64::i())?;
            out.push(MatrixRow { seed, dim, t: None, error_norm: r.error_norm, pass: r.pass });
            Ok(out)
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub symbol: String,
    /// Commutator order, or None for the conjugation flow.
    pub k: Option<usize>,
    pub tau: Option<f64>,
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub struct SymbolCase {
    pub symbol: Symbol,
    pub phi: RealFn,
    pub grid: Grid,
    pub tau: f64,
}

fn gaussian(center: f64) -> RealFn {
    Arc::new(move |x: f64| (-(x - center).powi(2)).exp())
}

/// Translation, dilation and a saturating field, each with a Gaussian φ.
pub fn default_symbol_cases() -> Result<Vec<SymbolCase>> {
    Ok(vec![
        SymbolCase { symbol: Symbol::Constant(1.0), phi: gaussian(0.3), grid: Grid::uniform(-4.0, 4.0, 256)?, tau: 0.5 },
        SymbolCase { symbol: Symbol::Linear(2.0), phi: gaussian(0.0), grid: Grid::uniform(-4.0, 4.0, 256)?, tau: 0.1 },
        SymbolCase { symbol: Symbol::Saturating, phi: gaussian(4.0), grid: Grid::uniform(0.0, 8.0, 256)?, tau: 0.3 },
    ])
}

/// Symbol calculus for k = 1..=3 and the conjugation flow, per case.
pub fn symbol_suite(cases: &[SymbolCase]) -> Result<Vec<RefinementRow>> {
    let jobs: Vec<(usize, Option<usize>)> =
        (0..cases.len()).flat_map(|i| [Some(1), Some(2), Some(3), None].map(|k| (i, k))).collect();
    jobs.par_iter()
        .map(|&(i, k)| {
            let c = &cases[i];
            let label = c.symbol.label();
            Ok(match k {
                Some(k) => {
                    let r = symbol_calculus_check(&c.symbol, &c.phi, k, &c.grid)?;
                    RefinementRow { symbol: label, k: Some(k), tau: None, coarse: r.coarse, fine: r.fine, ratio: r.ratio, pass: r.pass }
                }
                None => {
                    let r = conjugation_flow_check(&c.symbol, &c.phi, c.tau, &c.grid)?;
                    let o = r.operator;
                    RefinementRow { symbol: label, k: None, tau: Some(c.tau), coarse: o.coarse, fine: o.fine, ratio: o.ratio, pass: r.pass }
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowOracle {
    /// Largest |ξ_t(λ) − λe^{ct}| / |λe^{ct}| over the sample.
    pub linear_rel_error: f64,
    /// Largest |ξ_t(ξ_s(λ)) − ξ_{t+s}(λ)| relative to the integrator tolerance.
    pub group_defect_over_rtol: f64,
    pub pass: bool,
}

pub fn flow_oracle() -> Result<FlowOracle> {
    let c = 0.7;
    let linear = FlowField::new(Symbol::Linear(c), Interval::real_line());
    let mut rel = 0.0f64;
    for &l in &[-3.0, -0.5, 0.25, 1.0, 4.0] {
        for &t in &[-1.5, 0.3, 2.0] {
            let exact = l * (c * t).exp();
            rel = rel.max((flow_map(&linear, t, l)? - exact).abs() / exact.abs());
        }
    }
    let sat = FlowField::new(Symbol::Saturating, Interval::half_line(0.0));
    let mut defect = 0.0f64;
    for &l in &[0.5, 1.0, 3.0] {
        for &(t, s) in &[(0.4, 0.9), (1.2, -0.3), (-0.5, 0.2)] {
            let two_step = flow_map(&sat, t, flow_map(&sat, s, l)?)?;
            let one_step = flow_map(&sat, t + s, l)?;
            defect = defect.max((two_step - one_step).abs() / one_step.abs().max(1.0));
        }
    }
    let defect = defect / sat.rtol;
    Ok(FlowOracle { linear_rel_error: rel, group_defect_over_rtol: defect, pass: rel <= 1e-10 && defect <= 10.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_oracle_passes() {
        let f = flow_oracle().unwrap();
        assert!(f.pass, "{f:?}");
    }

    #[test]
    fn one_seed_of_matrix_suite() {
        let rows = matrix_suite(&[11]).unwrap();
        assert_eq!(rows.len(), MATRIX_DIMS.len() * (MATRIX_TIMES.len() + 1));
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }
}
