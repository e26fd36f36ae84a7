//! Catalog of states u, given by their spectral profile v(λ).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use super::model::{ModelId, ModelSpec, RealFn, Symbol};
use crate::error::{Error, Result};
use crate::quad::{ComplexFn, Integrand, Interval, SingularityInfo, TailClass};

/// Highest commutator order tracked by the regularity flags.
pub const MAX_ORDER: u32 = 4;

/// Declared regularity: u ∈ D(A^domain), and A^j u ∈ ce for j ≤ ce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegularityFlags {
    pub domain: u32,
    /// `None` when u itself is not self-evanescent.
    pub ce: Option<u32>,
}

impl RegularityFlags {
    pub fn in_domain(&self, k: u32) -> bool {
        self.domain >= k
    }

    /// A^j u ∈ ce for every j ≤ k.
    pub fn ce_through(&self, k: u32) -> bool {
        self.ce.is_some_and(|c| c >= k)
    }

    fn cap(self, k: u32) -> Self {
        Self { domain: self.domain.min(k), ce: self.ce.map(|c| c.min(k)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StateId {
    Exponential,
    Gamma { a: f64 },
    GaussianLaplacian { n: u32 },
    PowerCounterexample { theta: f64 },
    Kzero { k: u32, base: Box<StateId> },
    Bump { center: f64, width: f64 },
    Zero,
    Custom { name: String },
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateId::Exponential => f.write_str("exponential"),
            StateId::Gamma { a } => write!(f, "gamma({a})"),
            StateId::GaussianLaplacian { n } => write!(f, "gaussian_laplacian({n})"),
            StateId::PowerCounterexample { theta } => write!(f, "power_counterexample({theta})"),
            StateId::Kzero { k, base } => write!(f, "kzero_family({k}, {base})"),
            StateId::Bump { center, width } => write!(f, "bump({center}, {width})"),
            StateId::Zero => f.write_str("zero"),
            StateId::Custom { name } => write!(f, "custom({name})"),
        }
    }
}

/// A state in spectral representation: u ↦ v(λ) ∈ L²(support, h dλ).
#[derive(Clone)]
pub struct SpectralState {
    pub id: StateId,
    pub model: ModelId,
    pub profile: ComplexFn,
    /// Effective support of v (inside the model support).
    pub support: Interval,
    /// Exponents α of |v|² at the finite ends of `support`.
    pub endpoint_exponents: (f64, f64),
    /// Tail class of e = |v|²h at the unbounded ends.
    pub tail: TailClass,
    pub breakpoints: Vec<f64>,
    pub flags: RegularityFlags,
    /// For the `kzero_family`: k and the flags of the base profile.
    pub kzero: Option<(u32, RegularityFlags)>,
    pub norm_sq: f64,
}

impl fmt::Debug for SpectralState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralState")
            .field("id", &self.id)
            .field("model", &self.model)
            .field("support", &self.support)
            .field("endpoint_exponents", &self.endpoint_exponents)
            .field("flags", &self.flags)
            .field("norm_sq", &self.norm_sq)
            .finish()
    }
}

/// Closed form of e(λ) for a catalog state, before division by h.
struct Shape {
    e: RealFn,
    support: Interval,
    /// Exponents of e at the ends of `support`.
    e_exponents: (f64, f64),
    tail: TailClass,
    breakpoints: Vec<f64>,
    /// Exact mass when known in closed form.
    mass: Option<f64>,
    /// Extra cap on the derived flags (kinks).
    cap: Option<u32>,
}

fn smooth_step(y: f64) -> f64 {
    // 0 for y <= 0, 1 for y >= 1, C^∞ in between.
    let phi = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let a = phi(y);
    let b = phi(1.0 - y);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

fn left_end(model: &ModelSpec, what: &str) -> Result<f64> {
    if model.support.lo.is_finite() {
        Ok(model.support.lo)
    } else {
        Err(Error::ParamOutOfRange(format!("{what} needs a model support with a finite left end")))
    }
}

fn gamma_shape(a0: f64, a: f64) -> Shape {
    let c = 1.0 / gamma(a + 1.0);
    Shape {
        e: Arc::new(move |l: f64| {
            let x = l - a0;
            if x <= 0.0 {
                0.0
            } else if a == 0.0 {
                c * (-x).exp()
            } else {
                c * x.powf(a) * (-x).exp()
            }
        }),
        support: Interval::half_line(a0),
        e_exponents: (a, 0.0),
        tail: TailClass::Exponential { rate: 1.0, power: a },
        breakpoints: vec![],
        mass: Some(1.0),
        cap: None,
    }
}

fn shape_of(model: &ModelSpec, id: &StateId) -> Result<Shape> {
    let sup = model.support;
    match id {
        StateId::Exponential => {
            if sup.lo.is_finite() {
                let a0 = sup.lo;
                let hi = sup.hi;
                let mass = if hi.is_finite() { 1.0 - (-(hi - a0)).exp() } else { 1.0 };
                Ok(Shape {
                    e: Arc::new(move |l: f64| if l < a0 || l > hi { 0.0 } else { (-(l - a0)).exp() }),
                    support: sup,
                    e_exponents: (0.0, 0.0),
                    tail: if hi.is_finite() { TailClass::Compact } else { TailClass::Exponential { rate: 1.0, power: 0.0 } },
                    breakpoints: vec![],
                    mass: Some(mass),
                    cap: None,
                })
            } else if sup.hi.is_finite() {
                let b = sup.hi;
                Ok(Shape {
                    e: Arc::new(move |l: f64| if l > b { 0.0 } else { (l - b).exp() }),
                    support: sup,
                    e_exponents: (0.0, 0.0),
                    tail: TailClass::Exponential { rate: 1.0, power: 0.0 },
                    breakpoints: vec![],
                    mass: Some(1.0),
                    cap: None,
                })
            } else {
                // Two-sided: e = ½e^{−|λ|}, a kink at 0.
                let kink = model.theta(0.0) != 0.0;
                Ok(Shape {
                    e: Arc::new(|l: f64| 0.5 * (-l.abs()).exp()),
                    support: sup,
                    e_exponents: (0.0, 0.0),
                    tail: TailClass::Exponential { rate: 1.0, power: 0.0 },
                    breakpoints: vec![0.0],
                    mass: Some(1.0),
                    cap: kink.then_some(1),
                })
            }
        }
        StateId::Gamma { a } => {
            if !(*a > -1.0) {
                return Err(Error::ParamOutOfRange(format!("gamma: need a > -1, got {a}")));
            }
            Ok(gamma_shape(left_end(model, "gamma")?, *a))
        }
        StateId::GaussianLaplacian { n } => {
            if sup.lo != 0.0 || sup.hi.is_finite() {
                return Err(Error::ParamOutOfRange("gaussian_laplacian lives on (0, ∞)".into()));
            }
            if *n == 0 {
                return Err(Error::ParamOutOfRange("gaussian_laplacian: n must be at least 1".into()));
            }
            Ok(gamma_shape(0.0, *n as f64 / 2.0 - 1.0))
        }
        StateId::PowerCounterexample { theta } => {
            if !(*theta > 0.0 && *theta < 0.5) {
                return Err(Error::ParamOutOfRange(format!(
                    "power_counterexample: need θ in (0, 1/2), got {theta}"
                )));
            }
            let a0 = left_end(model, "power_counterexample")?;
            let support = Interval::new(a0, a0 + 2.0)
                .intersect(&sup)
                .ok_or_else(|| Error::ParamOutOfRange("model support too short".into()))?;
            let th = *theta;
            let h = model.weight.clone();
            let e: RealFn = Arc::new(move |l: f64| {
                let x = l - a0;
                if x <= 0.0 || x >= 2.0 {
                    return 0.0;
                }
                x.powf(-2.0 * th) * smooth_step(2.0 - x) * h.eval(l)
            });
            Ok(Shape {
                e,
                support,
                e_exponents: (-2.0 * th + model.weight.exponent_at(a0), 0.0),
                tail: TailClass::Compact,
                breakpoints: vec![a0 + 1.0],
                mass: None,
                cap: None,
            })
        }
        StateId::Kzero { k, base } => {
            if k % 2 == 0 || *k == 0 {
                return Err(Error::ParamOutOfRange(format!("kzero_family: k must be odd, got {k}")));
            }
            if matches!(**base, StateId::Kzero { .. }) {
                return Err(Error::ParamOutOfRange("kzero_family: nested base".into()));
            }
            let b = shape_of(model, base)?;
            let p = (*k as f64 - 1.0) / 2.0;
            let be = b.e.clone();
            let lo = b.support.lo;
            let at_zero = lo == 0.0;
            let mass = match (&**base, at_zero) {
                (StateId::Exponential, true) => Some(gamma(p + 1.0)),
                (StateId::Gamma { a }, true) => Some(gamma(a + p + 1.0) / gamma(a + 1.0)),
                (StateId::GaussianLaplacian { n }, true) => {
                    let a = *n as f64 / 2.0 - 1.0;
                    Some(gamma(a + p + 1.0) / gamma(a + 1.0))
                }
                _ => None,
            };
            Ok(Shape {
                e: Arc::new(move |l: f64| l.abs().powf(p) * be(l)),
                support: b.support,
                e_exponents: (b.e_exponents.0 + if at_zero { p } else { 0.0 }, b.e_exponents.1),
                tail: b.tail.times_power(p),
                breakpoints: b.breakpoints,
                mass,
                cap: b.cap,
            })
        }
        StateId::Bump { center, width } => {
            if !(*width > 0.0) {
                return Err(Error::ParamOutOfRange(format!("bump: width must be positive, got {width}")));
            }
            let support = Interval::new(center - width, center + width);
            if support.lo < sup.lo || support.hi > sup.hi {
                return Err(Error::ParamOutOfRange("bump must lie inside the model support".into()));
            }
            let (c, w) = (*center, *width);
            let raw = move |l: f64| {
                let x = (l - c) / w;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    (-2.0 / (1.0 - x * x)).exp()
                }
            };
            let z = crate::quad::legendre::GaussLegendre::new(200).integrate(-1.0, 1.0, |x| raw(c + w * x)) * w;
            Ok(Shape {
                e: Arc::new(move |l| raw(l) / z),
                support,
                e_exponents: (0.0, 0.0),
                tail: TailClass::Compact,
                breakpoints: vec![],
                mass: Some(1.0),
                cap: None,
            })
        }
        StateId::Zero => Ok(Shape {
            e: Arc::new(|_| 0.0),
            support: sup,
            e_exponents: (0.0, 0.0),
            tail: if sup.is_bounded() { TailClass::Compact } else { TailClass::SuperPolynomial },
            breakpoints: vec![],
            mass: Some(0.0),
            cap: None,
        }),
        StateId::Custom { .. } => Err(Error::ParamOutOfRange(
            "custom states carry closures; construct them with SpectralState::custom".into(),
        )),
    }
}

/// Regularity flags from endpoint arithmetic.
///
/// Near a support end `a` where θ vanishes to order γ, A^j v behaves like
/// (λ−a)^{β + j(γ−1)} when |v|² ~ (λ−a)^{2β}; membership in L²(h dλ) and in ce
/// then reduce to exponent inequalities on A^j u's density.
pub fn derive_flags(model: &ModelSpec, v_exponent: f64, end: f64) -> RegularityFlags {
    let gamma_ord = model.symbol.vanishing_order(end);
    let hexp = model.weight.exponent_at(end);
    let beta = v_exponent / 2.0;
    let density_exp = |j: u32| 2.0 * (beta + j as f64 * (gamma_ord - 1.0)) + hexp;
    let mut domain = 0;
    while domain < MAX_ORDER && density_exp(domain + 1) > -1.0 {
        domain += 1;
    }
    let ce = if density_exp(0) > -0.5 {
        let mut c = 0;
        while c < domain && density_exp(c + 1) > -0.5 {
            c += 1;
        }
        Some(c)
    } else {
        None
    };
    RegularityFlags { domain, ce }
}

fn flags_for(model: &ModelSpec, support: Interval, v_exponents: (f64, f64)) -> RegularityFlags {
    let mut flags = RegularityFlags { domain: MAX_ORDER, ce: Some(MAX_ORDER) };
    for (end, exp) in [(support.lo, v_exponents.0), (support.hi, v_exponents.1)] {
        let on_boundary = end.is_finite() && (end == model.support.lo || end == model.support.hi);
        if on_boundary {
            let f = derive_flags(model, exp, end);
            flags = RegularityFlags {
                domain: flags.domain.min(f.domain),
                ce: match (flags.ce, f.ce) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    _ => None,
                },
            };
        }
    }
    // θ nonvanishing at a hard wall: A is not symmetric there without the
    // profile vanishing, so only the trivial order is certain.
    if let Symbol::Constant(_) = model.symbol {
        if model.support.lo.is_finite() || model.support.hi.is_finite() {
            flags = flags.cap(0);
        }
    }
    flags
}

fn mass_by_quadrature(e: &RealFn, support: Interval, exps: (f64, f64), tail: TailClass, bps: &[f64]) -> Result<f64> {
    let e = e.clone();
    let ig = Integrand::new(
        Arc::new(move |l| Complex64::new(e(l), 0.0)),
        support,
        SingularityInfo { left: exps.0, right: exps.1, tail },
    )
    .with_breakpoints(bps.to_vec());
    Ok(ig.expand(1e-13)?.eval(0.0).value.re)
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| Error::ParamOutOfRange(format!("missing parameter `{key}`")))
}

fn as_count(x: f64, key: &str) -> Result<u32> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e6 {
        Ok(x as u32)
    } else {
        Err(Error::ParamOutOfRange(format!("{key} must be a non-negative integer, got {x}")))
    }
}

/// Builds a catalog state by string id.
///
/// `kzero_family` takes `k` and an optional `base_gamma = a` selecting the
/// base profile gamma(a) instead of the exponential.
pub fn catalog_state(model: &ModelSpec, state_id: &str, params: &BTreeMap<String, f64>) -> Result<SpectralState> {
    let id = match state_id {
        "exponential" => StateId::Exponential,
        "gamma" => StateId::Gamma { a: param(params, "a", None)? },
        "gaussian_laplacian" => {
            let default = match model.id {
                ModelId::Laplacian { n } => Some(n as f64),
                _ => None,
            };
            StateId::GaussianLaplacian { n: as_count(param(params, "n", default)?, "n")? }
        }
        "power_counterexample" => StateId::PowerCounterexample { theta: param(params, "theta", None)? },
        "kzero_family" => {
            let k = as_count(param(params, "k", None)?, "k")?;
            let base = match params.get("base_gamma") {
                Some(a) => StateId::Gamma { a: *a },
                None => StateId::Exponential,
            };
            StateId::Kzero { k, base: Box::new(base) }
        }
        "bump" => {
            let default_center = if model.support.lo.is_finite() { model.support.lo + 1.5 } else { 0.0 };
            StateId::Bump {
                center: param(params, "center", Some(default_center))?,
                width: param(params, "width", Some(1.0))?,
            }
        }
        "zero" => StateId::Zero,
        "custom" => {
            return Err(Error::ParamOutOfRange(
                "custom states carry closures; construct them with SpectralState::custom".into(),
            ))
        }
        other => return Err(Error::UnknownId(other.to_string())),
    };
    SpectralState::from_id(model, id)
}

impl SpectralState {
    pub fn from_id(model: &ModelSpec, id: StateId) -> Result<Self> {
        let shape = shape_of(model, &id)?;
        let w = model.weight.clone();
        let h_exps = (
            if shape.support.lo.is_finite() { w.exponent_at(shape.support.lo) } else { 0.0 },
            if shape.support.hi.is_finite() { w.exponent_at(shape.support.hi) } else { 0.0 },
        );
        let v_exps = (shape.e_exponents.0 - h_exps.0, shape.e_exponents.1 - h_exps.1);
        let e = shape.e.clone();
        let profile: ComplexFn = Arc::new(move |l| {
            let h = w.eval(l);
            Complex64::new((e(l) / h).max(0.0).sqrt(), 0.0)
        });
        let mut flags = flags_for(model, shape.support, v_exps);
        if let Some(c) = shape.cap {
            flags = flags.cap(c);
        }
        let kzero = match &id {
            StateId::Kzero { k, base } => {
                let b = shape_of(model, base)?;
                let bv = (b.e_exponents.0 - h_exps.0, b.e_exponents.1 - h_exps.1);
                let mut bf = flags_for(model, b.support, bv);
                if let Some(c) = b.cap {
                    bf = bf.cap(c);
                }
                Some((*k, bf))
            }
            _ => None,
        };
        let norm_sq = match shape.mass {
            Some(m) => m,
            None => mass_by_quadrature(&shape.e, shape.support, shape.e_exponents, shape.tail, &shape.breakpoints)?,
        };
        Ok(Self {
            id,
            model: model.id.clone(),
            profile,
            support: shape.support,
            endpoint_exponents: v_exps,
            tail: shape.tail,
            breakpoints: shape.breakpoints,
            flags,
            kzero,
            norm_sq,
        })
    }

    /// A tabulated or closed-form profile supplied by the caller, with its
    /// declared singularity metadata and regularity flags.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        model: &ModelSpec,
        name: &str,
        profile: ComplexFn,
        support: Interval,
        endpoint_exponents: (f64, f64),
        tail: TailClass,
        flags: RegularityFlags,
    ) -> Result<Self> {
        let support = support
            .intersect(&model.support)
            .ok_or_else(|| Error::ParamOutOfRange("custom state support misses the model support".into()))?;
        let w = model.weight.clone();
        let p = profile.clone();
        let e: RealFn = Arc::new(move |l| p(l).norm_sqr() * w.eval(l));
        let h_exps = (
            if support.lo.is_finite() { model.weight.exponent_at(support.lo) } else { 0.0 },
            if support.hi.is_finite() { model.weight.exponent_at(support.hi) } else { 0.0 },
        );
        let e_exps = (endpoint_exponents.0 + h_exps.0, endpoint_exponents.1 + h_exps.1);
        let norm_sq = mass_by_quadrature(&e, support, e_exps, tail, &[])?;
        let state = Self {
            id: StateId::Custom { name: name.to_string() },
            model: model.id.clone(),
            profile,
            support,
            endpoint_exponents,
            tail,
            breakpoints: vec![],
            flags,
            kzero: None,
            norm_sq,
        };
        state.check_endpoint_exponents()?;
        Ok(state)
    }

    pub fn zero(model: &ModelSpec) -> Self {
        Self::from_id(model, StateId::Zero).expect("zero state is total")
    }

    /// Compares the declared exponents of |v|² with the local log-log slope
    /// at every finite end shared with the model support.
    pub fn check_endpoint_exponents(&self) -> Result<()> {
        let width = (self.support.hi - self.support.lo).min(1.0);
        let eps = 1e-6 * width;
        let v2 = |l: f64| self.profile.as_ref()(l).norm_sqr();
        let ends = [(self.support.lo, self.endpoint_exponents.0, 1.0), (self.support.hi, self.endpoint_exponents.1, -1.0)];
        for (end, declared, dir) in ends {
            if !end.is_finite() {
                continue;
            }
            let (a, b) = (v2(end + dir * eps), v2(end + dir * 2.0 * eps));
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let slope = (b / a).ln() / std::f64::consts::LN_2;
            if (slope - declared).abs() > 0.1 {
                return Err(Error::ParamOutOfRange(format!(
                    "declared endpoint exponent {declared} at λ={end} but local slope is {slope:.3}"
                )));
            }
        }
        Ok(())
    }
}
