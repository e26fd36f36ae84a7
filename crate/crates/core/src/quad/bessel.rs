//! Spherical Bessel functions j_0 … j_{n-1} for the Legendre moments
//! ∫_{-1}^{1} P_k(x) e^{iωx} dx = 2 i^k j_k(ω).

/// Returns `[j_0(x), …, j_{n-1}(x)]` for `x >= 0`.
///
/// Upward recurrence is used when it is stable (`n <= x`); otherwise Miller's
/// backward recurrence normalised with Σ (2k+1) j_k² = 1.
pub fn spherical_bessel_j(x: f64, n: usize) -> Vec<f64> {
    assert!(x >= 0.0, "spherical_bessel_j expects x >= 0");
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![0.0; n];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-3 {
        // Leading two terms of the power series; relative error O(x^4).
        let mut dfact = 1.0; // (2k+1)!!
        let mut xp = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            dfact *= 2.0 * k as f64 + 1.0;
            *o = xp / dfact * (1.0 - x * x / (2.0 * (2.0 * k as f64 + 3.0)));
            xp *= x;
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if (n as f64) <= x {
        out[0] = j0;
        if n > 1 {
            out[1] = s / (x * x) - c / x;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2.0 * k as f64 + 1.0) / x * out[k] - out[k - 1];
        }
        return out;
    }
    let start = n + 20 + (x.ceil() as usize) + (10.0 * (n as f64).sqrt()) as usize;
    let mut buf = vec![0.0; start + 2];
    buf[start + 1] = 0.0;
    buf[start] = 1e-300;
    for k in (1..=start).rev() {
        buf[k - 1] = (2.0 * k as f64 + 1.0) / x * buf[k] - buf[k + 1];
        if buf[k - 1].abs() > 1e250 {
            for v in buf[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let peak = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in buf.iter_mut() {
        *v /= peak;
    }
    let norm: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, v)| (2.0 * k as f64 + 1.0) * v * v)
        .sum::<f64>()
        .sqrt();
    let j1 = s / (x * x) - c / x;
    let sign = if j0.abs() >= j1.abs() {
        j0.signum() * buf[0].signum()
    } else {
        j1.signum() * buf[1].signum()
    };
    for k in 0..n {
        out[k] = sign * buf[k] / norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_forms(x: f64) -> [f64; 3] {
        let (s, c) = x.sin_cos();
        [
            s / x,
            s / (x * x) - c / x,
            (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
        ]
    }

    #[test]
    fn matches_closed_forms_across_regimes() {
        for &x in &[0.5, 2.0, 3.7, 11.0, 25.0, 100.0, 1234.5] {
            for n in [3usize, 24] {
                let j = spherical_bessel_j(x, n);
                let cf = closed_forms(x);
                for k in 0..3 {
                    assert!((j[k] - cf[k]).abs() < 1e-13, "x={x} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn agrees_with_quadrature_of_moment_integral() {
        // j_k(ω) = (1/2) i^{-k} ∫ P_k(x) e^{iωx} dx; for even k the integral is real.
        use crate::quad::legendre::{legendre_values, GaussLegendre};
        let gl = GaussLegendre::new(200);
        for &w in &[2.5, 9.0, 30.0] {
            let j = spherical_bessel_j(w, 24);
            for k in (0..24).step_by(2) {
                let integral = gl.integrate(-1.0, 1.0, |x| legendre_values(x, k + 1)[k] * (w * x).cos());
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((0.5 * sign * integral - j[k]).abs() < 1e-12, "w={w} k={k}");
            }
        }
    }

    #[test]
    fn small_argument_series() {
        let j = spherical_bessel_j(1e-4, 4);
        assert!((j[0] - 1.0).abs() < 1e-8);
        assert!((j[1] - 1e-4 / 3.0 * (1.0 - 1e-8 / 10.0)).abs() < 1e-18);
    }
}
