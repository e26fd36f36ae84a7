//! Exact commutator identities for finite matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::legendre::GaussLegendre;

pub type CMatrix = DMatrix<Complex64>;

pub const DUHAMEL_TOL: f64 = 1e-8;
pub const RESOLVENT_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
/// Gauss–Legendre nodes per panel in the Duhamel integral.
pub const DUHAMEL_PANEL_NODES: usize = 20;
/// Largest phase excursion (spectral spread × panel length) per panel.
const PANEL_PHASE: f64 = 2.0;

fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * s
    })
}

/// Hermitian part of a complex Gaussian matrix with entries of variance 1/N.
pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(n, &mut rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    gaussian_matrix(n, &mut rng)
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    (m - m.adjoint()).iter().all(|z| z.norm() <= HERMITIAN_TOL * scale)
}

/// Eigenvalues (real) and unitary eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &CMatrix) -> (DVector<f64>, CMatrix) {
    let e = SymmetricEigen::new(h.clone());
    (e.eigenvalues, e.eigenvectors)
}

/// V diag(e^{itλ}) V*.
pub fn unitary_exp(values: &DVector<f64>, vectors: &CMatrix, t: f64) -> CMatrix {
    if t == 0.0 {
        return CMatrix::identity(vectors.nrows(), vectors.ncols());
    }
    let phases = DVector::from_iterator(values.len(), values.iter().map(|&l| Complex64::from_polar(1.0, t * l)));
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * vectors.adjoint()
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixCheck {
    pub error_norm: f64,
    pub pass: bool,
}

fn require_hermitian(h: &CMatrix, a: &CMatrix) -> Result<()> {
    if !is_hermitian(h) {
        return Err(Error::ParamOutOfRange("H must be hermitian".into()));
    }
    if a.shape() != h.shape() {
        return Err(Error::ParamOutOfRange("A and H differ in dimension".into()));
    }
    Ok(())
}

/// Quadrature nodes needed to resolve the phase of e^{i(t−s)H}H′e^{isH}.
pub fn required_nodes(h: &CMatrix, t: f64) -> usize {
    let (values, _) = hermitian_eigen(h);
    let spread = values.max() - values.min();
    panels_for(spread * t.abs()) * DUHAMEL_PANEL_NODES
}

fn panels_for(phase: f64) -> usize {
    ((phase / PANEL_PHASE).ceil() as usize).max(1)
}

/// [e^{itH}, A] against ∫₀ᵗ e^{i(t−s)H} H′ e^{isH} ds with H′ = i[H, A].
pub fn duhamel_identity_check(h: &CMatrix, a: &CMatrix, t: f64, quad_nodes: usize) -> Result<MatrixCheck> {
    require_hermitian(h, a)?;
    let (values, vectors) = hermitian_eigen(h);
    let spread = values.max() - values.min();
    let needed = panels_for(spread * t.abs()) * DUHAMEL_PANEL_NODES;
    if quad_nodes < needed {
        return Err(Error::QuadratureUnderresolved(format!(
            "{quad_nodes} nodes for phase ‖H‖t ≈ {:.3}; need {needed}",
            spread * t.abs()
        )));
    }
    let lhs = commutator(&unitary_exp(&values, &vectors, t), a);

    // In the eigenbasis the integrand is entrywise e^{i(t−s)λ_j} H′_jk e^{isλ_k}.
    let hp = commutator(h, a) * Complex64::i();
    let hp_eig = vectors.adjoint() * &hp * &vectors;
    let n = values.len();
    let panels = quad_nodes / DUHAMEL_PANEL_NODES;
    let gl = GaussLegendre::new(DUHAMEL_PANEL_NODES);
    let len = t / panels as f64;
    let mut acc = CMatrix::zeros(n, n);
    for p in 0..panels {
        let (a0, a1) = (p as f64 * len, (p + 1) as f64 * len);
        let (mid, half) = (0.5 * (a0 + a1), 0.5 * (a1 - a0));
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = mid + half * x;
            for k in 0..n {
                let right = Complex64::from_polar(1.0, s * values[k]);
                for j in 0..n {
                    acc[(j, k)] += Complex64::from_polar(w * half, (t - s) * values[j]) * hp_eig[(j, k)] * right;
                }
            }
        }
    }
    let rhs = &vectors * acc * vectors.adjoint();
    let error_norm = spectral_norm(&(lhs - rhs));
    Ok(MatrixCheck { error_norm, pass: error_norm <= DUHAMEL_TOL })
}

/// [A, R(z)] against −R(z)[A, H]R(z) with R(z) = (H − z)^{-1}.
pub fn resolvent_commutator_check(h: &CMatrix, a: &CMatrix, z: Complex64) -> Result<MatrixCheck> {
    require_hermitian(h, a)?;
    let (values, _) = hermitian_eigen(h);
    let h_norm = values.amax();
    let dist = values.iter().map(|&l| (z - l).norm()).fold(f64::INFINITY, f64::min);
    if dist < 0.1 * h_norm {
        return Err(Error::ZNearSpectrum(format!("distance {dist:.3e} below 0.1‖H‖ = {:.3e}", 0.1 * h_norm)));
    }
    let n = h.nrows();
    let shifted = h - CMatrix::identity(n, n) * z;
    let r = shifted
        .try_inverse()
        .ok_or_else(|| Error::ZNearSpectrum("H − z is singular".into()))?;
    let lhs = commutator(a, &r);
    let rhs = -(&r * commutator(a, h) * &r);
    let error_norm = spectral_norm(&(lhs - rhs));
    Ok(MatrixCheck { error_norm, pass: error_norm <= RESOLVENT_TOL })
}

/// Best least-squares attempt at [H, iA] = θ(H) in dimension N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Obstruction {
    /// min over A of ‖[H, iA] − θ(H)‖_F.
    pub residual: f64,
    /// |tr θ(H)|/√N: commutators are traceless, so no A does better.
    pub trace_bound: f64,
}

pub fn commutator_obstruction(h: &CMatrix, theta: impl Fn(f64) -> f64) -> Result<Obstruction> {
    if !is_hermitian(h) {
        return Err(Error::ParamOutOfRange("H must be hermitian".into()));
    }
    let n = h.nrows();
    let (values, vectors) = hermitian_eigen(h);
    let th = DVector::from_iterator(n, values.iter().map(|&l| Complex64::new(theta(l), 0.0)));
    let target = &vectors * CMatrix::from_diagonal(&th) * vectors.adjoint();

    // vec(HX − XH) = (I ⊗ H − Hᵀ ⊗ I) vec(X), column-major vec.
    let eye = CMatrix::identity(n, n);
    let k = (eye.kronecker(h) - h.transpose().kronecker(&eye)) * Complex64::i();
    let b = DVector::from_column_slice(target.as_slice());
    let svd = k.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-12 * svd.singular_values.max())
        .map_err(|e| Error::ParamOutOfRange(e.to_string()))?;
    let residual = (k * x - b).norm();
    let trace_bound = th.iter().sum::<Complex64>().norm() / (n as f64).sqrt();
    Ok(Obstruction { residual, trace_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_hermitian_is_hermitian_and_seeded() {
        let h = random_hermitian(6, 3);
        assert!(is_hermitian(&h));
        assert_eq!(h, random_hermitian(6, 3));
        assert_ne!(h, random_hermitian(6, 4));
    }

    #[test]
    fn unitary_exp_matches_series_for_diagonal() {
        let h = CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)]));
        let (v, q) = hermitian_eigen(&h);
        let u = unitary_exp(&v, &q, 0.3);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, -0.6)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn duhamel_trivial_cases() {
        let h = random_hermitian(6, 1);
        let a = random_matrix(6, 1);
        let at_zero = duhamel_identity_check(&h, &a, 0.0, 20).unwrap();
        assert_eq!(at_zero.error_norm, 0.0);
        // A = H² commutes with H.
        let commuting = duhamel_identity_check(&h, &(&h * &h), 2.5, 400).unwrap();
        assert!(commuting.error_norm < 1e-12);
    }

    #[test]
    fn duhamel_random_pairs() {
        for seed in 0..5 {
            for n in [6, 12] {
                let h = random_hermitian(n, seed);
                let a = random_matrix(n, seed);
                for t in [0.5, 2.5, 10.0] {
                    let nodes = required_nodes(&h, t);
                    let c = duhamel_identity_check(&h, &a, t, nodes).unwrap();
                    assert!(c.pass, "seed {seed} n {n} t {t}: {}", c.error_norm);
                }
            }
        }
    }

    #[test]
    fn duhamel_budget_is_enforced() {
        let h = random_hermitian(6, 2) * Complex64::new(50.0, 0.0);
        let a = random_matrix(6, 2);
        assert!(matches!(duhamel_identity_check(&h, &a, 10.0, 40), Err(Error::QuadratureUnderresolved(_))));
    }

    #[test]
    fn resolvent_identity() {
        let h = random_hermitian(6, 7);
        let a = random_matrix(6, 7);
        assert!(resolvent_commutator_check(&h, &a, Complex64::i()).unwrap().pass);
        let far = 1e3 * spectral_norm(&h);
        assert!(resolvent_commutator_check(&h, &a, Complex64::new(far, 0.0)).unwrap().pass);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]));
        let c = resolvent_commutator_check(&d, &(&d * Complex64::new(3.0, 0.0)), Complex64::i()).unwrap();
        assert_eq!(c.error_norm, 0.0);
    }

    #[test]
    fn resolvent_rejects_z_on_spectrum() {
        let h = random_hermitian(6, 8);
        let (v, _) = hermitian_eigen(&h);
        let z = Complex64::new(v[2], 1e-6);
        assert!(matches!(resolvent_commutator_check(&h, &random_matrix(6, 8), z), Err(Error::ZNearSpectrum(_))));
    }

    #[test]
    fn no_finite_pair_realises_a_nonvanishing_symbol() {
        for seed in 0..3 {
            let h = random_hermitian(5, seed);
            let ob = commutator_obstruction(&h, |l| 1.0 + l * l).unwrap();
            assert!(ob.trace_bound > 0.0);
            assert!(ob.residual >= ob.trace_bound * (1.0 - 1e-10), "{ob:?}");
        }
    }

    #[test]
    fn vanishing_symbol_is_realised_by_zero() {
        let h = random_hermitian(4, 9);
        let ob = commutator_obstruction(&h, |_| 0.0).unwrap();
        assert!(ob.residual < 1e-12 && ob.trace_bound == 0.0);
    }
}
