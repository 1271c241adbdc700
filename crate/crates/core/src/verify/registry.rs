use serde::Serialize;

/// Where a check is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Once per sample point.
    Point,
    /// Once per sample point and fiber covector.
    Fiber,
}

/// Which specs a check applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Applies {
    All,
    Prepotential,
    Conic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckDescriptor {
    pub id: &'static str,
    pub description: &'static str,
    pub scope: Scope,
    pub applies: Applies,
    pub default_tolerance: f64,
    /// Residual comes from finite differences and carries a convergence ratio.
    pub finite_difference: bool,
}

const fn check(
    id: &'static str,
    description: &'static str,
    scope: Scope,
    applies: Applies,
    default_tolerance: f64,
    finite_difference: bool,
) -> CheckDescriptor {
    CheckDescriptor { id, description, scope, applies, default_tolerance, finite_difference }
}

use Applies::{All, Conic, Prepotential};
use Scope::{Fiber, Point};

static REGISTRY: &[CheckDescriptor] = &[
    check(
        "chart.jacobian-inverse",
        "Jac · Jac⁻¹ = I for the real special coordinates (x, y) = (Re z, Re F)",
        Point,
        All,
        1e-10,
        false,
    ),
    check(
        "chart.lagrangian-iff-closed",
        "|φ*Ω| equals |dF − dFᵀ|: the immersion is Lagrangian iff the 1-form is closed",
        Point,
        All,
        1e-12,
        false,
    ),
    check("structure.j-squared", "J² = −1 in the affine frame", Point, All, 1e-10, false),
    check("structure.d-nabla-j", "d^∇J = 0", Point, All, 5e-6, true),
    check(
        "connection.theta-torsion",
        "the connections ∇ + A^θ, A^θ = −sin θ e^{θJ} ∇J, are torsionfree for every sampled θ",
        Point,
        All,
        5e-6,
        true,
    ),
    check("connection.theta-torsion-two-paths", "alt(A^θ) = −sin θ e^{θJ} d^∇J componentwise", Point, All, 1e-8, false),
    check("connection.torsionfree-iff-d-nabla-j", "all ∇^θ torsionfree exactly when d^∇J = 0", Point, All, 0.0, false),
    check("connection.conjugate-torsionfree", "∇ − J∇J is torsionfree", Point, All, 5e-6, true),
    check("connection.theta-d-j", "d^{∇^θ}J = 0 for every sampled θ", Point, All, 5e-6, true),
    check("connection.d-preserves-j", "DJ = 0 for D = ∇ − ½J∇J", Point, All, 5e-6, true),
    check("connection.condition-aj", "A_X ∘ J = A_{JX} for A = ½J∇J on random covectors", Point, All, 1e-8, true),
    check("forms.hodge-types", "ω¹¹ is J-invariant and ω' is J-anti-invariant", Point, All, 1e-10, false),
    check("forms.d-omega11", "dω¹¹ = 0", Point, All, 5e-6, true),
    check("forms.d-omegaprime", "dω' = 0", Point, All, 5e-6, true),
    check("forms.omegaprime-vanishes", "ω' = 0 for a prepotential", Point, Prepotential, 1e-10, false),
    check("metric.hermitian", "g = ω¹¹(J·, ·) is symmetric and g(J·, J·) = g", Point, All, 1e-9, false),
    check("metric.nabla-g-symmetric", "∇g is totally symmetric", Point, Prepotential, 5e-6, true),
    check("metric.levi-civita", "the Levi-Civita connection of g equals D", Point, Prepotential, 1e-5, true),
    check("metric.g-duality", "∇ and ∇ − J∇J are g-dual", Point, Prepotential, 1e-5, true),
    check(
        "metric.gamma-identity",
        "2g(·, J·) = ω + ω(J·, J·) and ω = g(·, J·) with g = Re φ*γ",
        Point,
        Prepotential,
        1e-8,
        false,
    ),
    check(
        "conic.homogeneity",
        "F(λz) = λ²F(z) and Σ z^i F_i = 2F (1-forms: F_i(λz) = λF_i(z))",
        Point,
        Conic,
        1e-6,
        false,
    ),
    check("bundle.j1-squared", "J₁ = diag(J, J*) squares to −1", Fiber, All, 1e-10, false),
    check("bundle.j2-omega11-squared", "J₂ built from ω¹¹ squares to −1", Fiber, All, 1e-10, false),
    check("bundle.gn-orthogonal", "J₁ and J₂(ω¹¹) are orthogonal for g_N = diag(g, g⁻¹)", Fiber, All, 1e-9, false),
    check(
        "bundle.quaternion",
        "J₁, J₂(ω¹¹), J₃ = J₁J₂ = −J₂J₁ satisfy the quaternion relations",
        Fiber,
        All,
        1e-8,
        false,
    ),
    check(
        "bundle.commutator-blocks",
        "[J₁, J₂(ω)] and {J₁, J₂(ω)} match their block formulas",
        Fiber,
        All,
        1e-8,
        false,
    ),
    check("bundle.para-relations", "J₁ and J₂(ω') commute and J₃ = J₁J₂ is an involution", Fiber, All, 1e-9, false),
    check("bundle.j2-omega-integrable", "J₂ from the parallel form ω is integrable", Fiber, All, 1e-8, true),
    check("bundle.j1-integrable", "J₁ is integrable", Fiber, All, 5e-6, true),
    check("bundle.j2-omegaprime-integrable", "J₂ from ω' is integrable", Fiber, All, 1e-6, true),
    check(
        "bundle.nijenhuis-closed-form-omega11",
        "Nijenhuis tensor of J₂(ω¹¹) matches Σ_k (ρ_{jk,i} − ρ_{ik,j}) ∂_{p_k}",
        Fiber,
        All,
        1e-5,
        true,
    ),
    check(
        "bundle.nijenhuis-closed-form-omegaprime",
        "Nijenhuis tensor of J₂(ω') matches Σ_k (ρ_{jk,i} − ρ_{ik,j}) ∂_{p_k}",
        Fiber,
        All,
        1e-5,
        true,
    ),
    check(
        "bundle.integrable-iff-parallel",
        "J₂(ρ) is integrable exactly when ∇ρ = 0, for ρ = ω¹¹ and ρ = ω'",
        Fiber,
        All,
        0.0,
        false,
    ),
    check("bundle.omega-alpha-skew", "ω_α = g_N J_α are skew", Fiber, All, 1e-9, false),
    check("bundle.d-omega2", "dω₂ = 0", Fiber, All, 5e-6, true),
    check("bundle.d-omega3", "dω₃ = 0", Fiber, All, 5e-6, true),
    check("bundle.d-omega1-iff-parallel", "dω₁ = 0 exactly when ∇ω¹¹ = 0", Fiber, All, 0.0, false),
    check(
        "bundle.induced-structure",
        "the structure induced by the horizontal spaces of D and of ∇ − J∇J is J₁",
        Fiber,
        All,
        1e-8,
        false,
    ),
];

/// All checks, in a fixed order with unique IDs.
pub fn registry() -> &'static [CheckDescriptor] {
    REGISTRY
}

pub fn descriptor(id: &str) -> Option<&'static CheckDescriptor> {
    REGISTRY.iter().find(|d| d.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_unique_and_enough() {
        let ids: HashSet<_> = registry().iter().map(|d| d.id).collect();
        assert_eq!(ids.len(), registry().len());
        assert!(registry().len() >= 18);
        assert!(descriptor("metric.levi-civita").is_some());
        assert!(descriptor("nope").is_none());
    }
}
