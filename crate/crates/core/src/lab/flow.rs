//! The flow ξ_t of the vector field θ(λ)∂_λ.

use crate::error::{Error, Result};
use crate::quad::Interval;
use crate::spectral::Symbol;

#[derive(Debug, Clone)]
pub struct FlowField {
    pub theta: Symbol,
    pub domain: Interval,
    pub rtol: f64,
    pub atol: f64,
}

impl FlowField {
    pub fn new(theta: Symbol, domain: Interval) -> Self {
        Self { theta, domain, rtol: 1e-12, atol: 1e-13 }
    }

    pub fn with_tolerance(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    /// Sampled difference quotients of θ over `window`; `None` when some
    /// quotient is not finite.
    pub fn lipschitz_estimate(&self, window: Interval, samples: usize) -> Option<f64> {
        let n = samples.max(2);
        let pts: Vec<f64> = (0..=n).map(|i| window.lo + (window.hi - window.lo) * i as f64 / n as f64).collect();
        let mut best = 0.0f64;
        for w in pts.windows(2) {
            let q = (self.theta.eval(w[1]) - self.theta.eval(w[0])).abs() / (w[1] - w[0]);
            if !q.is_finite() {
                return None;
            }
            best = best.max(q);
        }
        Some(best)
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// ξ_t(λ₀), integrated backwards for negative t.
pub fn flow_map(field: &FlowField, t: f64, lambda0: f64) -> Result<f64> {
    if !field.domain.contains(lambda0) {
        return Err(Error::DomainEscape { t: 0.0, position: lambda0 });
    }
    if t == 0.0 {
        return Ok(lambda0);
    }
    let dir = t.signum();
    let f = |x: f64| dir * field.theta.eval(x);
    let total = t.abs();
    let mut s = 0.0;
    let mut x = lambda0;
    let mut h = (total / 16.0).min(0.1 / (1.0 + field.theta.eval(x).abs()));
    let mut steps = 0usize;
    while s < total {
        if steps > 1_000_000 {
            return Err(Error::DomainEscape { t: dir * s, position: x });
        }
        steps += 1;
        h = h.min(total - s);
        let mut k = [0.0; 7];
        for i in 0..7 {
            let xi = x + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
            k[i] = f(xi);
        }
        let x5 = x + h * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
        let x4 = x + h * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
        let scale = field.atol + field.rtol * x.abs().max(x5.abs());
        let err = (x5 - x4).abs() / scale;
        if !x5.is_finite() {
            h *= 0.25;
            if h < 1e-300 {
                return Err(Error::DomainEscape { t: dir * s, position: x });
            }
            continue;
        }
        if err <= 1.0 {
            s += h;
            x = x5;
            if !field.domain.contains(x) {
                return Err(Error::DomainEscape { t: dir * s, position: x });
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_and_rest() {
        let f = FlowField::new(Symbol::Constant(1.0), Interval::real_line());
        assert!((flow_map(&f, 2.5, 1.0).unwrap() - 3.5).abs() < 1e-12);
        let z = FlowField::new(Symbol::Constant(0.0), Interval::real_line());
        assert_eq!(flow_map(&z, 7.0, 0.3).unwrap(), 0.3);
    }

    #[test]
    fn linear_field_is_exponential() {
        let f = FlowField::new(Symbol::Linear(1.5), Interval::half_line(0.0));
        for (t, l) in [(1.0, 2.0), (-2.0, 0.5), (3.0, 1e-3)] {
            let x = flow_map(&f, t, l).unwrap();
            let exact = l * (1.5 * t as f64).exp();
            assert!((x - exact).abs() / exact < 1e-10, "t={t} l={l}");
        }
    }

    #[test]
    fn escape_is_reported() {
        // ξ' = ξ² blows up at t = 1/λ₀.
        let f = FlowField::new(
            Symbol::Custom { label: "λ²".into(), f: std::sync::Arc::new(|l| l * l), zeros: vec![0.0] },
            Interval::new(-1e6, 1e6),
        );
        assert!(matches!(flow_map(&f, 2.0, 1.0), Err(Error::DomainEscape { .. })));
    }

    #[test]
    fn group_law() {
        let f = FlowField::new(Symbol::Saturating, Interval::half_line(0.0));
        let (t, s, l) = (0.7, 1.9, 0.8);
        let a = flow_map(&f, t + s, l).unwrap();
        let b = flow_map(&f, t, flow_map(&f, s, l).unwrap()).unwrap();
        assert!((a - b).abs() <= 10.0 * f.rtol * a.abs().max(1.0));
    }
}
