//! Event-driven integration of slip arcs.
//!
//! Within one branch the field is smooth, so a classical embedded
//! Dormand-Prince 5(4) pair with PI step-size control is used. Manifold
//! contact is localized on the accepted step by cubic Hermite interpolation
//! followed by bisection to `event_tol` in `|x2 - V|`.
//!
//! The stick-slip launch point `(1 - eps*c*V, V)` lies on the manifold with
//! a tangent field, so the `x2 = V` root at `t = 0` must be ignored: events
//! are armed only for `t >= t_arm`. The orbit leaves the manifold
//! quadratically, which makes a fixed arming delay unambiguous.

use crate::model::{sliding_interval, FrictionLaw, Mode, Params, State};
use crate::{Error, Result};
use serde::Serialize;

/// Tolerances and safeguards of the adaptive slip-phase stepper.
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Localization tolerance on `|x2 - V|` at reported manifold events.
    pub event_tol: f64,
    /// Minimum time before manifold events are armed.
    pub t_arm: f64,
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            event_tol: 1e-12,
            t_arm: 1e-3,
            max_step: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("event_tol", self.event_tol),
            ("t_arm", self.t_arm),
            ("max_step", self.max_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Slip branch relative to the manifold `x2 = V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Below,
    Above,
}

impl Branch {
    fn mode(self) -> Mode {
        match self {
            Branch::Below => Mode::SlipBelow,
            Branch::Above => Mode::SlipAbove,
        }
    }

    /// Sign making `u = sign * (x2 - V)` negative strictly inside the branch.
    fn inside_sign(self) -> f64 {
        match self {
            Branch::Below => 1.0,
            Branch::Above => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    ManifoldContact,
    SlidingEntry,
    SlidingExit,
    CrossingUp,
    CrossingDown,
    HorizonExpired,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    #[serde(flatten, serialize_with = "serialize_state")]
    pub state: State,
}

fn serialize_state<S: serde::Serializer>(s: &State, ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = ser.serialize_map(Some(2))?;
    m.serialize_entry("x1", &s.x1)?;
    m.serialize_entry("x2", &s.x2)?;
    m.end()
}

/// One accepted sample of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub mode: Mode,
}

/// Largest armed excursion of `x2` toward the manifold (per branch it is the
/// extremum of `x2` over `t >= t_arm`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Peak {
    pub t: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    /// Extremal approach to the manifold after arming, when no contact fired.
    pub armed_peak: Option<Peak>,
    /// Set when the trajectory re-approached the manifold within
    /// `10 * event_tol` without a sign change; the detector decides how to
    /// interpret it.
    pub near_miss: Option<Peak>,
}

const DIM: usize = 2;
type Vec2 = [f64; DIM];

/// Dormand-Prince 5(4) coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights (identical to the last A row; FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Error weights b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One accepted step with the data needed for dense output.
#[derive(Debug, Clone, Copy)]
struct Step {
    t0: f64,
    h: f64,
    y0: Vec2,
    f0: Vec2,
    y1: Vec2,
    f1: Vec2,
}

impl Step {
    /// Cubic Hermite interpolant at local coordinate `theta` in `[0, 1]`.
    fn eval(&self, theta: f64) -> Vec2 {
        let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
        let h10 = theta * (1.0 - theta) * (1.0 - theta);
        let h01 = theta * theta * (3.0 - 2.0 * theta);
        let h11 = theta * theta * (theta - 1.0);
        let mut y = [0.0; DIM];
        for i in 0..DIM {
            y[i] = h00 * self.y0[i]
                + self.h * (h10 * self.f0[i] + h11 * self.f1[i])
                + h01 * self.y1[i];
        }
        y
    }

    /// Coefficients of the cubic `x2(theta) = a t^3 + b t^2 + c t + d`.
    fn x2_cubic(&self) -> (f64, f64, f64, f64) {
        let y0 = self.y0[1];
        let y1 = self.y1[1];
        let hf0 = self.h * self.f0[1];
        let hf1 = self.h * self.f1[1];
        let a = 2.0 * y0 + hf0 - 2.0 * y1 + hf1;
        let b = -3.0 * y0 - 2.0 * hf0 + 3.0 * y1 - hf1;
        (a, b, hf0, y0)
    }

    /// Interior stationary points of `x2(theta)` within `(lo, 1)`.
    fn x2_stationary(&self, lo: f64) -> Vec<f64> {
        let (a, b, c, _) = self.x2_cubic();
        let mut out = Vec::new();
        let (qa, qb, qc) = (3.0 * a, 2.0 * b, c);
        if qa.abs() < 1e-300 {
            if qb.abs() > 1e-300 {
                let r = -qc / qb;
                if r > lo && r < 1.0 {
                    out.push(r);
                }
            }
            return out;
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return out;
        }
        let sq = disc.sqrt();
        // numerically stable quadratic roots
        let q = -0.5 * (qb + qb.signum() * sq);
        let mut roots = [q / qa, if q.abs() > 0.0 { qc / q } else { f64::NAN }];
        if qb == 0.0 {
            roots = [sq / (2.0 * qa), -sq / (2.0 * qa)];
        }
        for r in roots {
            if r.is_finite() && r > lo && r < 1.0 {
                out.push(r);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

struct Stepper<'a, F: Fn(f64, Vec2) -> Vec2> {
    rhs: F,
    cfg: &'a IntegratorConfig,
    t: f64,
    y: Vec2,
    f: Vec2,
    h: f64,
    err_prev: f64,
}

impl<'a, F: Fn(f64, Vec2) -> Vec2> Stepper<'a, F> {
    fn new(rhs: F, t0: f64, y0: Vec2, cfg: &'a IntegratorConfig, t_end: f64) -> Self {
        let f0 = rhs(t0, y0);
        // simple first-step heuristic, capped by max_step and the horizon
        let ynorm = y0[0].abs().max(y0[1].abs()).max(1.0);
        let fnorm = f0[0].abs().max(f0[1].abs()).max(1e-8);
        let h = (0.01 * ynorm / fnorm)
            .min(cfg.max_step)
            .min((t_end - t0).abs())
            .max(1e-12);
        Stepper {
            rhs,
            cfg,
            t: t0,
            y: y0,
            f: f0,
            h,
            err_prev: 1.0,
        }
    }

    /// Advance by one accepted step, not beyond `t_end`.
    fn step(&mut self, t_end: f64) -> Result<Step> {
        let mut rejected = false;
        loop {
            let mut h = self.h.min(self.cfg.max_step);
            if self.t + h > t_end {
                h = t_end - self.t;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow {
                    t: self.t,
                    x1: self.y[0],
                    x2: self.y[1],
                });
            }

            let mut k = [[0.0; DIM]; 7];
            k[0] = self.f;
            for s in 1..7 {
                let mut ys = self.y;
                for i in 0..DIM {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    ys[i] += h * acc;
                }
                k[s] = (self.rhs)(self.t + C[s] * h, ys);
            }

            let mut y1 = self.y;
            let mut err_sq = 0.0;
            for i in 0..DIM {
                let mut acc = 0.0;
                let mut eacc = 0.0;
                for s in 0..7 {
                    acc += B5[s] * k[s][i];
                    eacc += E[s] * k[s][i];
                }
                y1[i] += h * acc;
                let scale = self.cfg.abs_tol + self.cfg.rel_tol * self.y[i].abs().max(y1[i].abs());
                let e = h * eacc / scale;
                err_sq += e * e;
            }
            let err = (err_sq / DIM as f64).sqrt().max(1e-30);

            if err <= 1.0 {
                let step = Step {
                    t0: self.t,
                    h,
                    y0: self.y,
                    f0: self.f,
                    y1,
                    f1: k[6], // FSAL: f(t+h, y1)
                };
                self.t += h;
                self.y = y1;
                self.f = k[6];
                // PI controller
                let fac = 0.9 * err.powf(-0.7 / 5.0) * self.err_prev.powf(0.4 / 5.0);
                let fac = fac.clamp(0.2, if rejected { 1.0 } else { 5.0 });
                self.h = h * fac;
                self.err_prev = err;
                return Ok(step);
            }
            rejected = true;
            self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
}

fn rhs_for<'a>(
    p: &'a Params,
    f: &'a dyn FrictionLaw,
    branch: Branch,
) -> impl Fn(f64, Vec2) -> Vec2 + 'a {
    let sign = match branch {
        Branch::Below => -1.0,
        Branch::Above => 1.0,
    };
    move |_t, y| {
        let v_rel = y[1] - p.v();
        let dx2 = -y[0] - p.epsilon() * p.c() * y[1] - sign * (1.0 + f.eval(v_rel, p.epsilon()));
        [y[1], dx2]
    }
}

/// Integrate one slip arc from `s0` on the given branch until the first
/// armed manifold contact or until `horizon`.
///
/// A sign change of `x2 - V` after `t >= t_arm` is localized on the cubic
/// Hermite interpolant by bisection; a tangential touch whose extremum lies
/// within `event_tol` of the manifold also counts as contact (the reported
/// state then satisfies the `|x2 - V| <= event_tol` event invariant either
/// way). A closest approach within `10 * event_tol` without sign change is
/// recorded as a near miss and the arc ends with `HorizonExpired`.
pub fn integrate_slip(
    s0: &State,
    p: &Params,
    f: &dyn FrictionLaw,
    branch: Branch,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, Event)> {
    cfg.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::Precondition(format!(
            "integrate_slip: horizon must be > 0, got {horizon}"
        )));
    }
    let u0 = branch.inside_sign() * (s0.x2 - p.v());
    if u0 > cfg.event_tol {
        return Err(Error::Precondition(format!(
            "integrate_slip: initial state x2={} is on the wrong side of the manifold x2={} \
             for the requested branch",
            s0.x2,
            p.v()
        )));
    }

    let rhs = rhs_for(p, f, branch);
    let mode = branch.mode();
    let y0 = [s0.x1, s0.x2];
    let mut stepper = Stepper::new(&rhs, 0.0, y0, cfg, horizon);

    let mut traj = Trajectory::default();
    traj.samples.push(Sample {
        t: 0.0,
        x1: s0.x1,
        x2: s0.x2,
        mode,
    });

    // extremal armed approach to the manifold, in u = inside_sign*(x2 - V)
    let mut peak: Option<(f64, f64)> = None; // (u, t)
    let sgn = branch.inside_sign();

    while stepper.t < horizon {
        let step = stepper.step(horizon)?;
        let t1 = step.t0 + step.h;

        if t1 > cfg.t_arm {
            // restrict the search to the armed part of the step
            let theta_lo = if step.t0 >= cfg.t_arm {
                0.0
            } else {
                (cfg.t_arm - step.t0) / step.h
            };
            if let Some(contact) =
                locate_contact(&step, p, branch, theta_lo, cfg, &mut peak)?
            {
                traj.samples.push(Sample {
                    t: contact.t,
                    x1: contact.state.x1,
                    x2: contact.state.x2,
                    mode,
                });
                traj.events.push(contact);
                if let Some((u, t)) = peak {
                    traj.armed_peak = Some(Peak { t, x2: p.v() + sgn * u });
                }
                return Ok((traj, contact));
            }
        }

        traj.samples.push(Sample {
            t: t1,
            x1: step.y1[0],
            x2: step.y1[1],
            mode,
        });
    }

    let last = *traj.samples.last().unwrap();
    let event = Event {
        kind: EventKind::HorizonExpired,
        t: last.t,
        state: State::new(last.x1, last.x2, mode),
    };
    traj.events.push(event);
    if let Some((u, t)) = peak {
        let x2 = p.v() + sgn * u;
        traj.armed_peak = Some(Peak { t, x2 });
        if u > -10.0 * cfg.event_tol {
            traj.near_miss = Some(Peak { t, x2 });
        }
    }
    Ok((traj, event))
}

/// Search one accepted step for a manifold contact. Updates the armed peak.
fn locate_contact(
    step: &Step,
    p: &Params,
    branch: Branch,
    theta_lo: f64,
    cfg: &IntegratorConfig,
    peak: &mut Option<(f64, f64)>,
) -> Result<Option<Event>> {
    let sgn = branch.inside_sign();
    let u_at = |theta: f64| sgn * (step.eval(theta)[1] - p.v());
    let u_lo = u_at(theta_lo);
    let u_hi = u_at(1.0);

    let mut update_peak = |u: f64, theta: f64| {
        let t = step.t0 + theta * step.h;
        if peak.map_or(true, |(pu, _)| u > pu) {
            *peak = Some((u, t));
        }
    };

    // candidate bracket: endpoint crossing first
    if u_lo < 0.0 && u_hi >= 0.0 {
        let ev = bisect_contact(step, p, branch, theta_lo, 1.0, cfg);
        return Ok(Some(ev));
    }

    // interior extrema of x2 (stationary points of the cubic)
    let mut tangential: Option<(f64, f64)> = None;
    for theta in step.x2_stationary(theta_lo) {
        let u = u_at(theta);
        update_peak(u, theta);
        if u_lo < 0.0 && u > 0.0 {
            // crossing hidden inside the step
            let ev = bisect_contact(step, p, branch, theta_lo, theta, cfg);
            return Ok(Some(ev));
        }
        if u >= -cfg.event_tol && tangential.map_or(true, |(tu, _)| u > tu) {
            tangential = Some((u, theta));
        }
    }
    update_peak(u_lo, theta_lo);
    update_peak(u_hi, 1.0);

    if let Some((_, theta)) = tangential {
        let y = step.eval(theta);
        let t = step.t0 + theta * step.h;
        return Ok(Some(Event {
            kind: EventKind::ManifoldContact,
            t,
            state: State::new(y[0], y[1], branch.mode()),
        }));
    }
    Ok(None)
}

fn bisect_contact(
    step: &Step,
    p: &Params,
    branch: Branch,
    mut lo: f64,
    mut hi: f64,
    cfg: &IntegratorConfig,
) -> Event {
    let sgn = branch.inside_sign();
    let u_at = |theta: f64| sgn * (step.eval(theta)[1] - p.v());
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let u = u_at(mid);
        if u.abs() <= cfg.event_tol {
            break;
        }
        if u < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // land on the inside of the bracket so the preceding samples stay
    // strictly on the launch side
    let theta = if u_at(mid).abs() <= cfg.event_tol { mid } else { hi };
    let y = step.eval(theta);
    Event {
        kind: EventKind::ManifoldContact,
        t: step.t0 + theta * step.h,
        state: State::new(y[0], y[1], branch.mode()),
    }
}

/// Integrate a slip arc to a fixed time with event detection disabled.
/// Used by oracle-style checks that need the state at an exact time even
/// when the orbit touches the manifold on the way.
pub fn slip_endpoint(
    s0: &State,
    p: &Params,
    f: &dyn FrictionLaw,
    branch: Branch,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<State> {
    cfg.validate()?;
    if !(t_end > 0.0) {
        return Err(Error::Precondition(format!(
            "slip_endpoint: t_end must be > 0, got {t_end}"
        )));
    }
    let rhs = rhs_for(p, f, branch);
    let mut stepper = Stepper::new(&rhs, 0.0, [s0.x1, s0.x2], cfg, t_end);
    while stepper.t < t_end {
        stepper.step(t_end)?;
    }
    Ok(State::new(stepper.y[0], stepper.y[1], branch.mode()))
}

/// Filippov classification of a point `(x1, V)` on the switching manifold,
/// from the signs of the one-sided accelerations
/// `f2m = -x1 - eps*c*V + 1 + F(0, eps)` and `f2p = -x1 - eps*c*V - 1 - F(0, eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ManifoldClass {
    Sliding,
    CrossingUp,
    CrossingDown,
    /// The lower field is tangent (right endpoint of the sliding segment).
    TangentLower,
    /// The upper field is tangent (left endpoint of the sliding segment).
    TangentUpper,
}

pub fn classify_manifold_point(
    x1: f64,
    p: &Params,
    f: &dyn FrictionLaw,
    event_tol: f64,
) -> ManifoldClass {
    let friction = 1.0 + f.eval(0.0, p.epsilon());
    let base = -x1 - p.epsilon() * p.c() * p.v();
    let f2m = base + friction;
    let f2p = base - friction;
    if f2m.abs() <= event_tol {
        ManifoldClass::TangentLower
    } else if f2p.abs() <= event_tol {
        ManifoldClass::TangentUpper
    } else if f2m > 0.0 && f2p < 0.0 {
        ManifoldClass::Sliding
    } else if f2m > 0.0 && f2p > 0.0 {
        ManifoldClass::CrossingUp
    } else {
        ManifoldClass::CrossingDown
    }
}

/// Exact sliding step: from a stick state inside the sliding segment, move
/// with `x1' = V, x2' = 0` to the right endpoint `(1 - eps*c*V, V)` where
/// the lower field vanishes. Closed form, no numerical integration.
pub fn slide_step(s0: &State, p: &Params) -> Result<(Event, f64)> {
    if s0.mode != Mode::Stick {
        return Err(Error::Precondition(
            "slide_step: state must be in Stick mode".into(),
        ));
    }
    let (lo, hi) = sliding_interval(p);
    if !(s0.x1 >= lo && s0.x1 <= hi) {
        return Err(Error::Precondition(format!(
            "slide_step: x1={} outside the sliding segment [{lo}, {hi}]",
            s0.x1
        )));
    }
    let duration = (hi - s0.x1) / p.v();
    let exit = Event {
        kind: EventKind::SlidingExit,
        t: duration,
        state: State::new(hi, p.v(), Mode::Stick),
    };
    Ok((exit, duration))
}
