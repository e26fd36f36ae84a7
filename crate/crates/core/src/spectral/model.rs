//! Hamiltonians in spectral representation: H acts as multiplication by λ on
//! L²(support, h(λ)dλ) and the conjugate operator A satisfies [H, iA] = θ(H).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::Interval;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Commutator symbol θ with [H, iA] = θ(H).
#[derive(Clone)]
pub enum Symbol {
    Constant(f64),
    /// θ(λ) = cλ.
    Linear(f64),
    /// θ(λ) = √(λ² − m²)/λ on [m, ∞).
    Dirac { m: f64 },
    /// θ(λ) = λ − m²/λ on [m, ∞).
    KleinGordon { m: f64 },
    /// θ(λ) = λ/(1 + λ).
    Saturating,
    Custom { label: String, f: RealFn, zeros: Vec<f64> },
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Symbol {
    pub fn eval(&self, l: f64) -> f64 {
        match self {
            Symbol::Constant(c) => *c,
            Symbol::Linear(c) => c * l,
            Symbol::Dirac { m } => {
                if l <= *m {
                    0.0
                } else {
                    (l * l - m * m).sqrt() / l
                }
            }
            Symbol::KleinGordon { m } => l - m * m / l,
            Symbol::Saturating => l / (1.0 + l),
            Symbol::Custom { f, .. } => f(l),
        }
    }

    pub fn derivative(&self, l: f64) -> f64 {
        match self {
            Symbol::Constant(_) => 0.0,
            Symbol::Linear(c) => *c,
            Symbol::Dirac { m } => {
                if l <= *m {
                    f64::INFINITY
                } else {
                    m * m / (l * l * (l * l - m * m).sqrt())
                }
            }
            Symbol::KleinGordon { m } => 1.0 + m * m / (l * l),
            Symbol::Saturating => 1.0 / ((1.0 + l) * (1.0 + l)),
            Symbol::Custom { f, .. } => {
                let h = 1e-5 * l.abs().max(1.0);
                (8.0 * (f(l + h) - f(l - h)) - (f(l + 2.0 * h) - f(l - 2.0 * h))) / (12.0 * h)
            }
        }
    }

    /// Order of vanishing of θ at `at` (0 when θ(at) ≠ 0).
    pub fn vanishing_order(&self, at: f64) -> f64 {
        match self {
            Symbol::Constant(_) => 0.0,
            Symbol::Linear(_) | Symbol::Saturating if at == 0.0 => 1.0,
            Symbol::Dirac { m } if at == *m => 0.5,
            Symbol::KleinGordon { m } if at == *m => 1.0,
            Symbol::Custom { f, zeros, .. } if zeros.contains(&at) => {
                let e = 1e-6;
                let slope = (f(at + 2.0 * e).abs() / f(at + e).abs()).ln() / std::f64::consts::LN_2;
                (2.0 * slope).round() / 2.0
            }
            _ => 0.0,
        }
    }

    pub fn zeros(&self) -> Vec<f64> {
        match self {
            Symbol::Constant(_) => vec![],
            Symbol::Linear(_) | Symbol::Saturating => vec![0.0],
            Symbol::Dirac { m } | Symbol::KleinGordon { m } => vec![*m],
            Symbol::Custom { zeros, .. } => zeros.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Symbol::Constant(c) => format!("θ(λ)={}", fmt_num(*c)),
            Symbol::Linear(c) if *c == 1.0 => "θ(λ)=λ".into(),
            Symbol::Linear(c) => format!("θ(λ)={}λ", fmt_num(*c)),
            Symbol::Dirac { .. } => "θ(λ)=√(λ²−m²)/λ".into(),
            Symbol::KleinGordon { .. } => "θ(λ)=λ−m²/λ".into(),
            Symbol::Saturating => "θ(λ)=λ/(1+λ)".into(),
            Symbol::Custom { label, .. } => label.clone(),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Reference spectral weight h(λ) > 0.
#[derive(Clone)]
pub enum Weight {
    One,
    /// h(λ) = λ^p on a half-line starting at 0.
    Power(f64),
    Custom { f: RealFn, exponent_at_zero: f64 },
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => f.write_str("h=1"),
            Weight::Power(p) => write!(f, "h=λ^{p}"),
            Weight::Custom { .. } => f.write_str("h=custom"),
        }
    }
}

impl Weight {
    pub fn eval(&self, l: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Power(p) => {
                if *p == 0.0 {
                    1.0
                } else {
                    l.abs().powf(*p)
                }
            }
            Weight::Custom { f, .. } => f(l),
        }
    }

    /// Algebraic exponent of h at the finite point `at`.
    pub fn exponent_at(&self, at: f64) -> f64 {
        match self {
            Weight::Power(p) if at == 0.0 => *p,
            Weight::Custom { exponent_at_zero, .. } if at == 0.0 => *exponent_at_zero,
            _ => 0.0,
        }
    }

    /// Growth power at infinity (h ~ |λ|^p).
    pub fn tail_power(&self) -> f64 {
        match self {
            Weight::Power(p) => *p,
            _ => 0.0,
        }
    }
}

/// Decay-rule identifiers, printed with their catalog codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleTag {
    /// Commutator commuting with H, explicit constant 2‖Au‖‖u‖.
    #[serde(rename = "P4.1")]
    CommutingBound,
    /// Boundedly invertible commutator, u ∈ D(A).
    #[serde(rename = "P4.2")]
    InvertibleCommutator,
    /// H′ = cH with u, Au self-evanescent.
    #[serde(rename = "P4.3")]
    Homogeneous,
    /// Threshold at zero with λ/θ(λ) of class C¹.
    #[serde(rename = "T4.6")]
    ZeroThreshold,
    /// Invertible commutator, u ∈ D(|A|^s).
    #[serde(rename = "T6.1")]
    HigherOrderInvertible,
    /// Elliptic symbol, u = |H|^{(k−1)/4} v.
    #[serde(rename = "T6.3")]
    HigherOrderThreshold,
    #[serde(rename = "Prop 7.7")]
    Dirac,
    #[serde(rename = "Prop 7.8")]
    Wave,
    #[serde(rename = "Prop 7.9")]
    KleinGordon,
}

impl RuleTag {
    pub const ALL: [RuleTag; 9] = [
        RuleTag::CommutingBound,
        RuleTag::InvertibleCommutator,
        RuleTag::Homogeneous,
        RuleTag::ZeroThreshold,
        RuleTag::HigherOrderInvertible,
        RuleTag::HigherOrderThreshold,
        RuleTag::Dirac,
        RuleTag::Wave,
        RuleTag::KleinGordon,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RuleTag::CommutingBound => "P4.1",
            RuleTag::InvertibleCommutator => "P4.2",
            RuleTag::Homogeneous => "P4.3",
            RuleTag::ZeroThreshold => "T4.6",
            RuleTag::HigherOrderInvertible => "T6.1",
            RuleTag::HigherOrderThreshold => "T6.3",
            RuleTag::Dirac => "Prop 7.7",
            RuleTag::Wave => "Prop 7.8",
            RuleTag::KleinGordon => "Prop 7.9",
        }
    }

    pub fn guarantee(self) -> &'static str {
        match self {
            RuleTag::CommutingBound | RuleTag::InvertibleCommutator => "guaranteed t^{−1}",
            RuleTag::HigherOrderInvertible => "guaranteed t^{−s} for u ∈ D(|A|^s)",
            RuleTag::HigherOrderThreshold => "guaranteed t^{−k/2} for u = |H|^{(k−1)/4}v",
            _ => "guaranteed t^{−1/2}",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.code() == code)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Hypotheses a state must carry for a rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Requirement {
    /// u ∈ D(A^k).
    Domain(u32),
    /// u ∈ D(A) and u, Au ∈ ce.
    SelfEvanescentWithA,
    /// u = |H|^{(k−1)/4} v with v ∈ D(A^k), A^j v ∈ ce for j ≤ k.
    Kzero,
}

/// Guaranteed decay exponent of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rate {
    Fixed(f64),
    /// s = largest k with u ∈ D(A^k).
    DomainOrder,
    /// s = k/2 for the k of the state family.
    HalfKzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentRule {
    pub tag: RuleTag,
    pub requirement: Requirement,
    pub rate: Rate,
}

impl ExponentRule {
    const fn new(tag: RuleTag, requirement: Requirement, rate: Rate) -> Self {
        Self { tag, requirement, rate }
    }
}

const HOMOGENEOUS_RULES: [ExponentRule; 2] = [
    ExponentRule::new(RuleTag::Homogeneous, Requirement::SelfEvanescentWithA, Rate::Fixed(0.5)),
    ExponentRule::new(RuleTag::HigherOrderThreshold, Requirement::Kzero, Rate::HalfKzero),
];

/// Catalog identifier of a model, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ModelId {
    Laplacian { n: u32 },
    Ultrahyperbolic,
    ElectricField,
    Homogeneous { theta: f64 },
    Fractional { s: f64 },
    WeightedMultiplication { n: u32 },
    Dirac { m: f64 },
    Wave { n: u32 },
    KleinGordon { m: f64 },
    Saturating,
    Custom { name: String },
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Laplacian { n } => write!(f, "laplacian({n})"),
            ModelId::Ultrahyperbolic => f.write_str("ultrahyperbolic"),
            ModelId::ElectricField => f.write_str("electric_field"),
            ModelId::Homogeneous { theta } => write!(f, "homogeneous({theta})"),
            ModelId::Fractional { s } => write!(f, "fractional({s})"),
            ModelId::WeightedMultiplication { n } => write!(f, "weighted_multiplication({n})"),
            ModelId::Dirac { m } => write!(f, "dirac({m})"),
            ModelId::Wave { n } => write!(f, "wave({n})"),
            ModelId::KleinGordon { m } => write!(f, "klein_gordon({m})"),
            ModelId::Saturating => f.write_str("saturating"),
            ModelId::Custom { name } => write!(f, "custom({name})"),
        }
    }
}

/// A Hamiltonian in spectral representation.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub id: ModelId,
    pub support: Interval,
    pub weight: Weight,
    pub symbol: Symbol,
    pub thresholds: Vec<f64>,
    pub exponent_rules: Vec<ExponentRule>,
}

fn get(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| Error::ParamOutOfRange(format!("missing parameter `{key}`")))
}

fn positive_int(x: f64, key: &str) -> Result<u32> {
    if x >= 1.0 && x.fract() == 0.0 && x < 1e6 {
        Ok(x as u32)
    } else {
        Err(Error::ParamOutOfRange(format!("{key} must be a positive integer, got {x}")))
    }
}

/// Builds a catalog model from its string id and numeric parameters.
pub fn build_model(example_id: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let model = match example_id {
        "laplacian" => ModelSpec::laplacian(positive_int(get(params, "n", Some(3.0))?, "n")?),
        "ultrahyperbolic" => ModelSpec::ultrahyperbolic(),
        "electric_field" => ModelSpec::electric_field(),
        "homogeneous" => ModelSpec::homogeneous(get(params, "theta", None)?)?,
        "fractional" => ModelSpec::fractional(get(params, "s", None)?)?,
        "weighted_multiplication" => {
            let n = get(params, "n", Some(0.0))?;
            if n < 0.0 || n.fract() != 0.0 {
                return Err(Error::ParamOutOfRange(format!("n must be a non-negative integer, got {n}")));
            }
            ModelSpec::weighted_multiplication(n as u32)
        }
        "dirac" => ModelSpec::dirac(get(params, "m", Some(1.0))?)?,
        "wave" => ModelSpec::wave(positive_int(get(params, "n", Some(3.0))?, "n")?),
        "klein_gordon" => ModelSpec::klein_gordon(get(params, "m", Some(1.0))?)?,
        "saturating" | "decay4" => ModelSpec::saturating(),
        "custom" => {
            return Err(Error::ParamOutOfRange(
                "custom models carry closures; construct them with ModelSpec::custom".into(),
            ))
        }
        other => return Err(Error::UnknownId(other.to_string())),
    };
    Ok(model)
}

impl ModelSpec {
    /// −Δ on ℝⁿ; the angular multiplicity is absorbed into h(λ) = λ^{n/2−1}.
    pub fn laplacian(n: u32) -> Self {
        Self {
            id: ModelId::Laplacian { n },
            support: Interval::half_line(0.0),
            weight: Weight::Power(n as f64 / 2.0 - 1.0),
            symbol: Symbol::Linear(2.0),
            thresholds: vec![0.0],
            exponent_rules: HOMOGENEOUS_RULES.to_vec(),
        }
    }

    /// −∂xx + ∂yy on ℝ², spectrum ℝ.
    pub fn ultrahyperbolic() -> Self {
        Self {
            id: ModelId::Ultrahyperbolic,
            support: Interval::real_line(),
            weight: Weight::One,
            symbol: Symbol::Linear(2.0),
            thresholds: vec![0.0],
            exponent_rules: HOMOGENEOUS_RULES.to_vec(),
        }
    }

    /// −Δ + h·x with a unit field vector.
    pub fn electric_field() -> Self {
        Self {
            id: ModelId::ElectricField,
            support: Interval::real_line(),
            weight: Weight::One,
            symbol: Symbol::Constant(1.0),
            thresholds: vec![],
            exponent_rules: vec![
                ExponentRule::new(RuleTag::CommutingBound, Requirement::Domain(1), Rate::Fixed(1.0)),
                ExponentRule::new(RuleTag::InvertibleCommutator, Requirement::Domain(1), Rate::Fixed(1.0)),
                ExponentRule::new(RuleTag::HigherOrderInvertible, Requirement::Domain(1), Rate::DomainOrder),
            ],
        }
    }

    /// −x^{2−θ}Δ − Δx^{2−θ} on ℝ₊ with [H, iA] = θH, 0 < θ < 2.
    pub fn homogeneous(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 2.0) {
            return Err(Error::ParamOutOfRange(format!("homogeneous: need 0 < θ < 2, got {theta}")));
        }
        Ok(Self {
            id: ModelId::Homogeneous { theta },
            support: Interval::half_line(0.0),
            weight: Weight::One,
            symbol: Symbol::Linear(theta),
            thresholds: vec![0.0],
            exponent_rules: HOMOGENEOUS_RULES.to_vec(),
        })
    }

    /// (−Δ)^{s/2} with [H, iA] = sH, 0 < s < 2.
    pub fn fractional(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 2.0) {
            return Err(Error::ParamOutOfRange(format!("fractional: need 0 < s < 2, got {s}")));
        }
        Ok(Self {
            id: ModelId::Fractional { s },
            support: Interval::half_line(0.0),
            weight: Weight::One,
            symbol: Symbol::Linear(s),
            thresholds: vec![0.0],
            exponent_rules: HOMOGENEOUS_RULES.to_vec(),
        })
    }

    /// Multiplication by λ in L²(ℝ₊, λ^N dλ).
    pub fn weighted_multiplication(n: u32) -> Self {
        Self {
            id: ModelId::WeightedMultiplication { n },
            support: Interval::half_line(0.0),
            weight: Weight::Power(n as f64),
            symbol: Symbol::Linear(2.0),
            thresholds: vec![0.0],
            exponent_rules: HOMOGENEOUS_RULES.to_vec(),
        }
    }

    /// Positive-energy component of the free Dirac operator with mass m.
    pub fn dirac(m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::ParamOutOfRange(format!("dirac: need m > 0, got {m}")));
        }
        Ok(Self {
            id: ModelId::Dirac { m },
            support: Interval::half_line(m),
            weight: Weight::One,
            symbol: Symbol::Dirac { m },
            thresholds: vec![m],
            exponent_rules: vec![ExponentRule::new(
                RuleTag::Dirac,
                Requirement::SelfEvanescentWithA,
                Rate::Fixed(0.5),
            )],
        })
    }

    /// H = √(−Δ) on ℝⁿ, the generator of the wave propagators.
    pub fn wave(n: u32) -> Self {
        Self {
            id: ModelId::Wave { n },
            support: Interval::half_line(0.0),
            weight: Weight::Power(n as f64 - 1.0),
            symbol: Symbol::Linear(1.0),
            thresholds: vec![0.0],
            exponent_rules: vec![
                ExponentRule::new(RuleTag::Wave, Requirement::SelfEvanescentWithA, Rate::Fixed(0.5)),
                HOMOGENEOUS_RULES[0],
            ],
        }
    }

    /// H = √(−Δ + m²).
    pub fn klein_gordon(m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::ParamOutOfRange(format!("klein_gordon: need m > 0, got {m}")));
        }
        Ok(Self {
            id: ModelId::KleinGordon { m },
            support: Interval::half_line(m),
            weight: Weight::One,
            symbol: Symbol::KleinGordon { m },
            thresholds: vec![m],
            exponent_rules: vec![ExponentRule::new(
                RuleTag::KleinGordon,
                Requirement::SelfEvanescentWithA,
                Rate::Fixed(0.5),
            )],
        })
    }

    /// H ≥ 0 with H′ = H(1 + H)^{−1}.
    pub fn saturating() -> Self {
        Self {
            id: ModelId::Saturating,
            support: Interval::half_line(0.0),
            weight: Weight::One,
            symbol: Symbol::Saturating,
            thresholds: vec![0.0],
            exponent_rules: vec![
                ExponentRule::new(RuleTag::ZeroThreshold, Requirement::SelfEvanescentWithA, Rate::Fixed(0.5)),
                ExponentRule::new(RuleTag::HigherOrderThreshold, Requirement::Kzero, Rate::HalfKzero),
            ],
        }
    }

    /// A user-supplied model. Thresholds are the declared zeros of θ plus the
    /// finite support endpoints; rules are inferred from the symbol shape.
    pub fn custom(name: &str, symbol: Symbol, support: Interval, weight: Weight, lambda_over_theta_c1: bool) -> Result<Self> {
        let mut thresholds = symbol.zeros();
        thresholds.extend([support.lo, support.hi].into_iter().filter(|x| x.is_finite()));
        thresholds.retain(|z| support.contains(*z));
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let zeros = symbol.zeros();
        let mut rules = Vec::new();
        if zeros.is_empty() {
            if let Symbol::Constant(c) = symbol {
                if c == 0.0 {
                    return Err(Error::ParamOutOfRange("θ ≡ 0 has no conjugate structure".into()));
                }
                rules.push(ExponentRule::new(RuleTag::CommutingBound, Requirement::Domain(1), Rate::Fixed(1.0)));
            }
            rules.push(ExponentRule::new(
                RuleTag::HigherOrderInvertible,
                Requirement::Domain(1),
                Rate::DomainOrder,
            ));
        } else if zeros == [0.0] && lambda_over_theta_c1 {
            rules.push(ExponentRule::new(RuleTag::ZeroThreshold, Requirement::SelfEvanescentWithA, Rate::Fixed(0.5)));
        }
        let model = Self {
            id: ModelId::Custom { name: name.to_string() },
            support,
            weight,
            symbol,
            thresholds,
            exponent_rules: rules,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn theta(&self, l: f64) -> f64 {
        self.symbol.eval(l)
    }

    pub fn weight(&self, l: f64) -> f64 {
        self.weight.eval(l)
    }

    /// Sample-based invariant check: h > 0 inside the support and every zero
    /// of θ inside the support is a declared threshold.
    pub fn validate(&self) -> Result<()> {
        let lo = if self.support.lo.is_finite() { self.support.lo } else { -50.0 };
        let hi = if self.support.hi.is_finite() { self.support.hi } else { lo.max(0.0) + 50.0 };
        let n = 4000;
        let pts: Vec<f64> = (1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        for &l in &pts {
            let h = self.weight(l);
            if !(h > 0.0) {
                return Err(Error::ParamOutOfRange(format!("weight not positive at λ={l}")));
            }
        }
        let near_threshold = |l: f64| self.thresholds.iter().any(|z| (l - z).abs() <= 2.0 * (hi - lo) / n as f64);
        for w in pts.windows(2) {
            let (a, b) = (self.theta(w[0]), self.theta(w[1]));
            let sign_change = a == 0.0 || a.signum() != b.signum();
            if sign_change && !near_threshold(w[0]) && !near_threshold(w[1]) {
                return Err(Error::ParamOutOfRange(format!(
                    "θ vanishes near λ={} which is not a declared threshold",
                    w[0]
                )));
            }
        }
        Ok(())
    }
}
