//! Closed-form and quadrature-based tests for stick-slip cycles.
//!
//! The central quantity is the grazing integral
//!
//! ```text
//! I = \int_0^{2pi} dF/deps (V cos t - V, 0) cos t dt
//! ```
//!
//! A positive margin `I - c*V*pi` predicts a stick-slip limit cycle for all
//! sufficiently small `eps`, with the first return to the manifold at
//! `2pi + sqrt(eps)*a_minus`, where the blow-up roots are
//! `a = +-sqrt(2*(I - c*V*pi)/V)`.
//!
//! Quadrature is composite Gauss-Legendre with 5 nodes per panel: the
//! integrands are smooth and periodic, and fixed panels give reproducible
//! bit-stable reports.

use crate::model::{FrictionLaw, Params, StribeckConstants};
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Second time derivative of `X2` along the unperturbed grazing orbit at
/// `t = 2pi`, a closed-form constant equal to `-V`. The acceptance suite
/// re-derives it numerically from the integrator.
pub fn grazing_second_derivative(p: &Params) -> f64 {
    -p.v()
}

/// 5-node Gauss-Legendre abscissas and weights on `[-1, 1]`.
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Composite 5-node Gauss-Legendre quadrature of `f` over `[a, b]`.
fn composite_gl5(f: impl Fn(f64) -> f64, a: f64, b: f64, n_panels: usize) -> f64 {
    let h = (b - a) / n_panels as f64;
    let mut total = 0.0;
    for panel in 0..n_panels {
        let mid = a + (panel as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            acc += weight * f(mid + half * node);
        }
        total += half * acc;
    }
    total
}

fn check_panels(n_panels: usize) -> Result<()> {
    if n_panels < 16 || n_panels % 2 != 0 {
        return Err(Error::invalid(
            "n_panels",
            format!("must be even and >= 16, got {n_panels}"),
        ));
    }
    Ok(())
}

/// Default panel count for the built-in reports.
pub const DEFAULT_PANELS: usize = 256;

/// The grazing integral `\int_0^{2pi} dF/deps(V cos t - V, 0) cos t dt`.
pub fn grazing_integral(f: &dyn FrictionLaw, p: &Params, n_panels: usize) -> Result<f64> {
    check_panels(n_panels)?;
    let v = p.v();
    Ok(composite_gl5(
        |tau| f.deps_at_zero(v * tau.cos() - v) * tau.cos(),
        0.0,
        2.0 * PI,
        n_panels,
    ))
}

/// Report of the perturbation test: margin, variational value and blow-up
/// roots. The roots are present only for a strictly positive margin; the
/// report never claims cycle existence on its own.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    /// The grazing integral `I`.
    pub integral_i: f64,
    /// `c*V*pi`, the left-hand side of the criterion.
    pub lhs: f64,
    /// `I - c*V*pi`.
    pub margin: f64,
    /// `y2(2pi) = -c*V*pi + I`; coincides with the margin.
    pub y2_2pi: f64,
    pub a_minus: Option<f64>,
    pub a_plus: Option<f64>,
    /// Set when the margin vanishes to within 1e-12 (criterion boundary).
    pub boundary: bool,
}

impl CriterionReport {
    /// First-order return time prediction `2pi + sqrt(eps)*a_minus`.
    pub fn predicted_return_time(&self, epsilon: f64) -> Option<f64> {
        self.a_minus.map(|a| 2.0 * PI + epsilon.sqrt() * a)
    }
}

/// Evaluate the perturbation test for a friction law.
pub fn perturbation_margin(f: &dyn FrictionLaw, p: &Params) -> Result<CriterionReport> {
    let integral_i = grazing_integral(f, p, DEFAULT_PANELS)?;
    let lhs = p.c() * p.v() * PI;
    let margin = integral_i - lhs;
    let y2_2pi = margin;
    let (a_minus, a_plus) = if margin > 0.0 {
        // a = +-sqrt(-2 * y2(2pi) / X2_tt) with X2_tt = -V
        let a = (-2.0 * y2_2pi / grazing_second_derivative(p)).sqrt();
        (Some(-a), Some(a))
    } else {
        (None, None)
    };
    Ok(CriterionReport {
        integral_i,
        lhs,
        margin,
        y2_2pi,
        a_minus,
        a_plus,
        boundary: margin.abs() <= 1e-12,
    })
}

/// Second component of the variational solution
/// `y(t) = Z(t) \int_0^t Z(-s) (0, -c V cos s + dF/deps(V cos s - V, 0)) ds`
/// with `Z` the rotation matrix. At `t = 2pi` this equals
/// `-c*V*pi + I`, providing an independent path to the margin.
pub fn variational_y2(t: f64, f: &dyn FrictionLaw, p: &Params, n_panels: usize) -> Result<f64> {
    check_panels(n_panels)?;
    if !(0.0..=2.0 * PI + 1e-12).contains(&t) {
        return Err(Error::Precondition(format!(
            "variational_y2: t must lie in [0, 2pi], got {t}"
        )));
    }
    let v = p.v();
    let c = p.c();
    let forcing = |s: f64| -c * v * s.cos() + f.deps_at_zero(v * s.cos() - v);
    // Z(-s) (0, q)^T = (-q sin s, q cos s)
    let i1 = composite_gl5(|s| -forcing(s) * s.sin(), 0.0, t, n_panels);
    let i2 = composite_gl5(|s| forcing(s) * s.cos(), 0.0, t, n_panels);
    Ok(-t.sin() * i1 + t.cos() * i2)
}

/// Closed forms of the Stribeck specialization and the divergence-based
/// instability test.
#[derive(Debug, Clone, Serialize)]
pub struct StribeckReport {
    /// `-c + gamma*(1 - alpha) - 2*beta*V`; positive iff the grazing
    /// criterion holds (the integral-based margin equals this times `pi*V`).
    pub closed_form_margin: f64,
    /// The slip equilibrium abscissa
    /// `(1 - alpha)/(1 + eps*gamma*V) + alpha + eps*beta*V^2`.
    pub equilibrium_xi: f64,
    /// `-c + gamma*(1 - alpha)/(1 + eps*gamma*V)^2 - 2*beta*V`; positive iff
    /// the equilibrium is unstable.
    pub instability_margin: f64,
}

/// Closed-form criterion margin without constructing a report.
pub fn closed_form_margin(k: &StribeckConstants, p: &Params) -> f64 {
    -p.c() + k.gamma() * (1.0 - k.alpha()) - 2.0 * k.beta() * p.v()
}

pub fn stribeck_report(k: &StribeckConstants, p: &Params) -> StribeckReport {
    let (alpha, beta, gamma) = (k.alpha(), k.beta(), k.gamma());
    let (c, v, eps) = (p.c(), p.v(), p.epsilon());
    let denom = 1.0 + eps * gamma * v;
    StribeckReport {
        closed_form_margin: closed_form_margin(k, p),
        equilibrium_xi: (1.0 - alpha) / denom + alpha + eps * beta * v * v,
        instability_margin: -c + gamma * (1.0 - alpha) / (denom * denom) - 2.0 * beta * v,
    }
}

/// Divergence of the below-branch Stribeck field at velocity `x2`:
/// `-eps*c + eps*gamma*(1-alpha)/(1 - eps*gamma*(x2-V))^2 + 2*eps*beta*(x2-V)`.
///
/// The denominator follows the below-branch form of the field, where
/// `|x2 - V| = -(x2 - V)`; the formula is therefore valid only for
/// `x2 <= V`, and it has a pole where the denominator vanishes.
pub fn divergence(x2: f64, k: &StribeckConstants, p: &Params) -> Result<f64> {
    let eps = p.epsilon();
    let v_rel = x2 - p.v();
    let denom = 1.0 - eps * k.gamma() * v_rel;
    if denom.abs() < 1e-12 {
        return Err(Error::DivergencePole { x2 });
    }
    Ok(-eps * p.c() + eps * k.gamma() * (1.0 - k.alpha()) / (denom * denom)
        + 2.0 * eps * k.beta() * v_rel)
}
