//! Gauss–Legendre rules and the discrete Legendre transform on [-1, 1].

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        h * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// P_0(x), ..., P_{n-1}(x).
pub fn legendre_values(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(1.0);
    if n == 1 {
        return out;
    }
    out.push(x);
    for k in 2..n {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p);
    }
    out
}

/// A Gauss rule together with the matrix mapping node values to Legendre
/// coefficients of the interpolating polynomial.
#[derive(Debug)]
pub struct PanelRule {
    pub rule: GaussLegendre,
    /// `transform[k][j] = (2k+1)/2 · w_j · P_k(x_j)`.
    pub transform: Vec<Vec<f64>>,
}

impl PanelRule {
    fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(n);
        let table: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| legendre_values(x, n)).collect();
        let transform = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| (2.0 * k as f64 + 1.0) / 2.0 * rule.weights[j] * table[j][k])
                    .collect()
            })
            .collect();
        Self { rule, transform }
    }
}

pub const PANEL_ORDER: usize = 24;

pub fn panel_rule() -> &'static PanelRule {
    static RULE: OnceLock<PanelRule> = OnceLock::new();
    RULE.get_or_init(|| PanelRule::new(PANEL_ORDER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(10);
        // degree 19 is the exactness limit
        let v = gl.integrate(-1.0, 1.0, |x| x.powi(18));
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(3));
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 24, 64] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn transform_recovers_legendre_coefficients() {
        let pr = panel_rule();
        // f = P_3 + 0.5 P_7
        let vals: Vec<f64> = pr
            .rule
            .nodes
            .iter()
            .map(|&x| {
                let p = legendre_values(x, 8);
                p[3] + 0.5 * p[7]
            })
            .collect();
        for (k, row) in pr.transform.iter().enumerate() {
            let c: f64 = row.iter().zip(&vals).map(|(a, b)| a * b).sum();
            let expect = match k {
                3 => 1.0,
                7 => 0.5,
                _ => 0.0,
            };
            assert!((c - expect).abs() < 1e-13, "k={k} c={c}");
        }
    }
}
