use std::fmt::Write;

use crate::checks::sweep::{sweep_models, sweep_states};
use crate::spectral::{ModelSpec, RuleTag};

const CHECKS: [(&str, &str, &str); 7] = [
    ("prop_decay1", "|ψ_u(t)| ≤ 2|t|^{−1}‖Au‖‖u‖", "P4.1"),
    ("estim", "c²‖tψ′‖² ≤ 4‖ψ_u‖‖ψ_{Au}‖ for θ = cλ", "energy"),
    ("interference", "(∫_{−T}^{T}|⟨v, e^{itH}u⟩|²)^{1/2} ≤ [v][u]", "ce pairing"),
    ("corollary", "sup t^{k/2}|ψ| ≤ C(χ)", "T6.3"),
    ("appendix", "|∫g e^{itλ}dλ| ≤ 2^{3/2}(p−1)^{−1/(2p)}(‖g‖_p‖λg′‖_q)^{1/2}t^{−1/2}", "lemma"),
    ("duhamel", "[e^{itH}, A] = ∫₀ᵗ e^{i(t−s)H} i[H,A] e^{isH} ds", "identity"),
    ("resolvent", "[A, (H−z)^{−1}] = −(H−z)^{−1}[A, H](H−z)^{−1}", "identity"),
];

fn family(model: &ModelSpec) -> String {
    let id = model.id.to_string();
    id.split('(').next().unwrap_or(&id).to_string()
}

/// Deterministic plain-text listing of models, states, rules and checks.
pub fn list_catalog() -> String {
    let mut out = String::new();
    let models = sweep_models();
    out.push_str("# models\n");
    let mut seen = Vec::new();
    for m in &models {
        let name = family(m);
        if seen.contains(&name) {
            continue;
        }
        let rules: Vec<&str> = m.exponent_rules.iter().map(|r| r.tag.code()).collect();
        writeln!(out, "{name} | {} | {}", m.symbol.label(), rules.join(", ")).unwrap();
        seen.push(name);
    }
    out.push_str("\n# states (model: states)\n");
    for m in &models {
        let states: Vec<String> = sweep_states(m).iter().map(|s| s.id.to_string()).collect();
        writeln!(out, "{} | {}", m.id, states.join(", ")).unwrap();
    }
    out.push_str("\n# decay rules\n");
    for tag in RuleTag::ALL {
        writeln!(out, "{} | {}", tag.code(), tag.guarantee()).unwrap();
    }
    out.push_str("\n# checks\n");
    for (name, statement, tag) in CHECKS {
        writeln!(out, "{name} | {statement} | {tag}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_the_anchor_rows() {
        let text = list_catalog();
        assert!(text.lines().any(|l| l == "dirac | θ(λ)=√(λ²−m²)/λ | Prop 7.7"), "{text}");
        assert!(text.lines().any(|l| l == "P4.1 | guaranteed t^{−1}"));
        assert_eq!(text, list_catalog());
    }
}
