//! Oscillator parameters, the friction-law contract and the piecewise slip
//! vector fields.
//!
//! The friction characteristics is `sign(x2 - V) * (1 + F(x2 - V, eps))`
//! where `F` is a Lipschitz addition vanishing identically at `v = 0` and at
//! `eps = 0`. Built-in laws: pure Coulomb (`F = 0`) and the Stribeck law
//!
//! ```text
//! F(v, eps) = (1 - alpha) / (1 + eps*gamma*|v|) + alpha + eps*beta*v^2 - 1
//! ```
//!
//! whose eps-derivative at zero is `-gamma*(1 - alpha)*|v| + beta*v^2`.
//! (The source formula for this derivative is written with an undefined
//! constant `lambda` and without the absolute value; the reading used here is
//! `lambda = alpha`, and `|v|` keeps the law valid on both sides of the
//! manifold. On the grazing orbit only `v <= 0` occurs, where `|v| = -v`.)

use crate::{Error, Result};

/// Physical parameters of the oscillator: viscous coefficient `c`, belt
/// speed `V` and the smallness parameter `eps`, all dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    c: f64,
    v: f64,
    epsilon: f64,
}

impl Params {
    /// Requires `c > 0`, `V > 0`, `eps >= 0`. A stationary belt (`V <= 0`)
    /// is rejected rather than given a meaning.
    pub fn new(c: f64, v: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid("c", format!("must be > 0, got {c}")));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid("V", format!("must be > 0, got {v}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(
                "epsilon",
                format!("must be >= 0, got {epsilon}"),
            ));
        }
        Ok(Params { c, v, epsilon })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Belt speed `V`.
    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same parameters with a different `eps`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Params::new(self.c, self.v, epsilon)
    }

    /// The grazing point `(1 - eps*c*V, V)`, right endpoint of the sliding
    /// segment, where the lower slip field is tangent to the manifold.
    pub fn grazing_point(&self) -> (f64, f64) {
        (1.0 - self.epsilon * self.c * self.v, self.v)
    }
}

/// Friction addition contract: the pair `(F, dF/deps at eps=0)` supplied in
/// closed form. Evaluators must be pure; `eval(0, eps) = eval(v, 0) = 0`.
pub trait FrictionLaw: Sync {
    /// `F(v_rel, eps)` where `v_rel = x2 - V`.
    fn eval(&self, v_rel: f64, epsilon: f64) -> f64;

    /// `dF/deps (v_rel, 0)`, the integrand ingredient of the grazing
    /// integral.
    fn deps_at_zero(&self, v_rel: f64) -> f64;

    fn name(&self) -> &str;
}

/// Pure Coulomb friction: no nonlinear addition at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct Coulomb;

impl FrictionLaw for Coulomb {
    fn eval(&self, _v_rel: f64, _epsilon: f64) -> f64 {
        0.0
    }

    fn deps_at_zero(&self, _v_rel: f64) -> f64 {
        0.0
    }

    fn name(&self) -> &str {
        "coulomb"
    }
}

pub fn coulomb_law() -> Coulomb {
    Coulomb
}

/// Constants of the Stribeck law: asymptotic ratio `alpha`, quadratic
/// coefficient `beta`, decay rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StribeckConstants {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl StribeckConstants {
    /// Requires `alpha` in `(0, 1)`, `beta > 0`, `gamma > 0`. `alpha < 1`
    /// is what produces the Stribeck dip.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be in (0, 1), got {alpha}"),
            ));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
        }
        Ok(StribeckConstants { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The Stribeck friction addition with fixed constants.
#[derive(Debug, Clone, Copy)]
pub struct Stribeck {
    constants: StribeckConstants,
}

impl Stribeck {
    pub fn constants(&self) -> StribeckConstants {
        self.constants
    }
}

impl FrictionLaw for Stribeck {
    fn eval(&self, v_rel: f64, epsilon: f64) -> f64 {
        let k = self.constants;
        (1.0 - k.alpha) / (1.0 + epsilon * k.gamma * v_rel.abs()) + k.alpha
            + epsilon * k.beta * v_rel * v_rel
            - 1.0
    }

    fn deps_at_zero(&self, v_rel: f64) -> f64 {
        let k = self.constants;
        -k.gamma * (1.0 - k.alpha) * v_rel.abs() + k.beta * v_rel * v_rel
    }

    fn name(&self) -> &str {
        "stribeck"
    }
}

pub fn stribeck_law(constants: StribeckConstants) -> Stribeck {
    Stribeck { constants }
}

/// Which side of the manifold a state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SlipBelow,
    SlipAbove,
    Stick,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::SlipBelow => "slip_below",
            Mode::SlipAbove => "slip_above",
            Mode::Stick => "stick",
        }
    }
}

/// Phase state with its mode tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
    pub mode: Mode,
}

impl State {
    pub fn new(x1: f64, x2: f64, mode: Mode) -> Self {
        State { x1, x2, mode }
    }
}

/// The slip vector field of the oscillator on the branch selected by
/// `s.mode`. Below the manifold the sign term contributes `+(1 + F)`, above
/// it `-(1 + F)`.
///
/// The branch is taken from the mode tag, so the field may be evaluated in
/// the one-sided limit exactly on the manifold (grazing launch). A `Stick`
/// state is rejected: on the manifold the branch is ambiguous without the
/// tag and the caller must use [`crate::integrator::classify_manifold_point`].
pub fn slip_field(s: &State, p: &Params, f: &dyn FrictionLaw) -> Result<(f64, f64)> {
    let sign = match s.mode {
        Mode::SlipBelow => -1.0,
        Mode::SlipAbove => 1.0,
        Mode::Stick => {
            return Err(Error::Precondition(
                "slip_field: state is in Stick mode; the slip branch is ambiguous".into(),
            ))
        }
    };
    let v_rel = s.x2 - p.v();
    let friction = 1.0 + f.eval(v_rel, p.epsilon());
    let dx2 = -s.x1 - p.epsilon() * p.c() * s.x2 - sign * friction;
    Ok((s.x2, dx2))
}

/// Endpoints of the sliding segment on `x2 = V`:
/// `(-1 - eps*c*V, 1 - eps*c*V)`.
pub fn sliding_interval(p: &Params) -> (f64, f64) {
    let shift = p.epsilon() * p.c() * p.v();
    (-1.0 - shift, 1.0 - shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p_star() -> Params {
        Params::new(0.5, 0.5, 0.01).unwrap()
    }

    fn strib_star() -> Stribeck {
        stribeck_law(StribeckConstants::new(0.3, 0.1, 2.0).unwrap())
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(Params::new(0.0, 1.0, 0.1).is_err());
        assert!(Params::new(1.0, 0.0, 0.1).is_err());
        assert!(Params::new(1.0, -1.0, 0.1).is_err());
        assert!(Params::new(1.0, 1.0, -0.1).is_err());
        assert!(Params::new(f64::NAN, 1.0, 0.1).is_err());
        assert!(Params::new(1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn stribeck_constants_reject_bad_values() {
        assert!(StribeckConstants::new(0.0, 0.1, 2.0).is_err());
        assert!(StribeckConstants::new(1.0, 0.1, 2.0).is_err());
        assert!(StribeckConstants::new(0.3, 0.0, 2.0).is_err());
        assert!(StribeckConstants::new(0.3, 0.1, 0.0).is_err());
        assert!(StribeckConstants::new(0.3, 0.1, 2.0).is_ok());
    }

    #[test]
    fn slip_field_tangent_at_grazing_point() {
        // dx2 = 0 exactly at (1 - eps*c*V, V) on the lower branch, for any
        // law, because F(0, eps) = 0.
        for (c, v, eps) in [(0.5, 0.5, 0.01), (1.0, 1.0, 0.1), (2.0, 0.25, 0.0)] {
            let p = Params::new(c, v, eps).unwrap();
            let (x1, x2) = p.grazing_point();
            let s = State::new(x1, x2, Mode::SlipBelow);
            let (d1, d2) = slip_field(&s, &p, &strib_star()).unwrap();
            assert_eq!(d1, v);
            assert_eq!(d2, 0.0);
        }
    }

    #[test]
    fn slip_field_harmonic_center() {
        // eps = 0, F = 0: the below branch is a harmonic oscillator about
        // (1, 0).
        let p = Params::new(1.0, 1.0, 0.0).unwrap();
        let s = State::new(0.0, 0.0, Mode::SlipBelow);
        let (d1, d2) = slip_field(&s, &p, &coulomb_law()).unwrap();
        assert_eq!((d1, d2), (0.0, 1.0));
    }

    #[test]
    fn slip_field_stribeck_reference() {
        // Hand-computed: F(-0.5, 0.01) = 0.7/1.01 + 0.3 + 0.00025 - 1
        let p = p_star();
        let s = State::new(0.5, 0.0, Mode::SlipBelow);
        let f_hand = 0.7 / 1.01 + 0.3 + 0.00025 - 1.0;
        let (_, d2) = slip_field(&s, &p, &strib_star()).unwrap();
        assert!((d2 - (-0.5 + 1.0 + f_hand)).abs() < 1e-15);
    }

    #[test]
    fn slip_field_rejects_stick_mode() {
        let p = p_star();
        let s = State::new(0.0, p.v(), Mode::Stick);
        assert!(slip_field(&s, &p, &coulomb_law()).is_err());
    }

    #[test]
    fn sliding_interval_values() {
        let p0 = Params::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(sliding_interval(&p0), (-1.0, 1.0));

        let p1 = p_star();
        let (lo, hi) = sliding_interval(&p1);
        assert!((lo - (-1.0025)).abs() < 1e-15);
        assert!((hi - 0.9975).abs() < 1e-15);

        let p2 = Params::new(1.0, 1.0, 0.1).unwrap();
        let (lo, hi) = sliding_interval(&p2);
        assert!((lo - (-1.1)).abs() < 1e-15);
        assert!((hi - 0.9).abs() < 1e-15);
    }

    #[test]
    fn stribeck_deps_reference() {
        // alpha=0.3, gamma=2, beta=0.1 at v=-0.5:
        // -2*0.7*0.5 + 0.1*0.25 = -0.675
        let f = strib_star();
        assert!((f.deps_at_zero(-0.5) - (-0.675)).abs() < 1e-15);
    }

    #[test]
    fn coulomb_is_identically_zero() {
        let f = coulomb_law();
        assert_eq!(f.eval(1.0, 0.5), 0.0);
        assert_eq!(f.deps_at_zero(-2.0), 0.0);
    }

    proptest! {
        #[test]
        fn friction_identities(v in -3.0f64..3.0, eps in 0.0f64..0.7) {
            let f = strib_star();
            // F(0, eps) = 0 and F(v, 0) = 0 exactly for the closed forms.
            prop_assert_eq!(f.eval(0.0, eps), 0.0);
            prop_assert_eq!(f.eval(v, 0.0), 0.0);
        }

        #[test]
        fn stribeck_deps_matches_finite_difference(
            v in -2.0f64..-1e-3,
            alpha in 0.05f64..0.95,
            beta in 0.05f64..1.0,
            gamma in 0.5f64..4.0,
        ) {
            let f = stribeck_law(StribeckConstants::new(alpha, beta, gamma).unwrap());
            let h = 1e-6;
            let fd = (f.eval(v, h) - f.eval(v, -h)) / (2.0 * h);
            prop_assert!((fd - f.deps_at_zero(v)).abs() < 1e-6);
        }

        #[test]
        fn stribeck_lipschitz_spot_check(
            v in -2.0f64..2.0,
            dv in 1e-6f64..1e-3,
            eps in 0.0f64..0.5,
        ) {
            // crude finite-difference Lipschitz bound on a bounded set
            let f = strib_star();
            let slope = (f.eval(v + dv, eps) - f.eval(v, eps)).abs() / dv;
            prop_assert!(slope < 10.0);
        }
    }

    #[test]
    fn stribeck_deps_fd_on_grazing_range() {
        // v in [-2V, 0], V = 0.5, absolute tolerance 1e-6
        let f = strib_star();
        let h = 1e-6;
        for i in 0..=40 {
            let v = -1.0 + i as f64 * 0.025;
            let fd = (f.eval(v, h) - f.eval(v, -h)) / (2.0 * h);
            assert!(
                (fd - f.deps_at_zero(v)).abs() < 1e-6,
                "mismatch at v={v}"
            );
        }
    }
}
