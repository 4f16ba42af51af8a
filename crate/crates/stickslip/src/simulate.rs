//! Event-driven composition of slip arcs and exact sliding segments into a
//! single hybrid trajectory, for the `simulate` front end.

use crate::integrator::{
    classify_manifold_point, integrate_slip, slide_step, Branch, Event, EventKind,
    IntegratorConfig, ManifoldClass, Sample, Trajectory,
};
use crate::model::{FrictionLaw, Mode, Params, State};
use crate::{Error, Result};

enum Phase {
    Slip(Branch),
    Stick,
    Done,
}

fn initial_phase(s0: &State, p: &Params, f: &dyn FrictionLaw, cfg: &IntegratorConfig) -> Phase {
    if s0.x2 < p.v() - cfg.event_tol {
        Phase::Slip(Branch::Below)
    } else if s0.x2 > p.v() + cfg.event_tol {
        Phase::Slip(Branch::Above)
    } else {
        match classify_manifold_point(s0.x1, p, f, cfg.event_tol) {
            ManifoldClass::Sliding | ManifoldClass::TangentUpper => Phase::Stick,
            ManifoldClass::TangentLower | ManifoldClass::CrossingDown => {
                Phase::Slip(Branch::Below)
            }
            ManifoldClass::CrossingUp => Phase::Slip(Branch::Above),
        }
    }
}

/// Integrate the full Filippov dynamics from `s0` until `t_end`,
/// alternating slip arcs with exact sliding segments as manifold events
/// dictate.
pub fn simulate(
    s0: &State,
    p: &Params,
    f: &dyn FrictionLaw,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_end > 0.0) {
        return Err(Error::Precondition(format!(
            "simulate: t_end must be > 0, got {t_end}"
        )));
    }

    let mut traj = Trajectory::default();
    let mut t = 0.0;
    let mut state = *s0;
    let mut phase = initial_phase(s0, p, f, cfg);

    // far more events than any sane run produces; guards against a
    // degenerate zero-progress loop
    for _ in 0..100_000 {
        match phase {
            Phase::Done => break,
            Phase::Stick => {
                traj.events.push(Event {
                    kind: EventKind::SlidingEntry,
                    t,
                    state: State::new(state.x1, p.v(), Mode::Stick),
                });
                traj.samples.push(Sample {
                    t,
                    x1: state.x1,
                    x2: p.v(),
                    mode: Mode::Stick,
                });
                let stick = State::new(state.x1, p.v(), Mode::Stick);
                let (exit, duration) = slide_step(&stick, p)?;
                if t + duration >= t_end {
                    // horizon expires mid-slide
                    let x1 = state.x1 + p.v() * (t_end - t);
                    traj.samples.push(Sample {
                        t: t_end,
                        x1,
                        x2: p.v(),
                        mode: Mode::Stick,
                    });
                    traj.events.push(Event {
                        kind: EventKind::HorizonExpired,
                        t: t_end,
                        state: State::new(x1, p.v(), Mode::Stick),
                    });
                    phase = Phase::Done;
                } else {
                    t += duration;
                    state = exit.state;
                    traj.samples.push(Sample {
                        t,
                        x1: state.x1,
                        x2: p.v(),
                        mode: Mode::Stick,
                    });
                    traj.events.push(Event {
                        kind: EventKind::SlidingExit,
                        t,
                        state,
                    });
                    state.mode = Mode::SlipBelow;
                    phase = Phase::Slip(Branch::Below);
                }
            }
            Phase::Slip(branch) => {
                let remaining = t_end - t;
                if remaining <= 0.0 {
                    phase = Phase::Done;
                    continue;
                }
                let (arc, ev) = integrate_slip(&state, p, f, branch, remaining, cfg)?;
                // splice the arc in, shifting its local clock
                let skip = usize::from(!traj.samples.is_empty());
                for s in arc.samples.iter().skip(skip) {
                    traj.samples.push(Sample { t: t + s.t, ..*s });
                }
                match ev.kind {
                    EventKind::HorizonExpired => {
                        traj.events.push(Event {
                            kind: EventKind::HorizonExpired,
                            t: t + ev.t,
                            state: ev.state,
                        });
                        traj.near_miss = arc.near_miss;
                        phase = Phase::Done;
                    }
                    EventKind::ManifoldContact => {
                        t += ev.t;
                        state = ev.state;
                        let class = classify_manifold_point(state.x1, p, f, cfg.event_tol);
                        match class {
                            ManifoldClass::Sliding | ManifoldClass::TangentUpper => {
                                phase = Phase::Stick;
                            }
                            ManifoldClass::TangentLower => {
                                // grazing touch at the segment endpoint:
                                // stay on the same branch
                                traj.events.push(Event {
                                    kind: EventKind::ManifoldContact,
                                    t,
                                    state,
                                });
                                phase = Phase::Slip(branch);
                            }
                            ManifoldClass::CrossingDown => {
                                traj.events.push(Event {
                                    kind: EventKind::CrossingDown,
                                    t,
                                    state,
                                });
                                state.mode = Mode::SlipBelow;
                                phase = Phase::Slip(Branch::Below);
                            }
                            ManifoldClass::CrossingUp => {
                                traj.events.push(Event {
                                    kind: EventKind::CrossingUp,
                                    t,
                                    state,
                                });
                                state.mode = Mode::SlipAbove;
                                phase = Phase::Slip(Branch::Above);
                            }
                        }
                    }
                    _ => unreachable!("integrate_slip only ends in contact or horizon"),
                }
            }
        }
    }
    Ok(traj)
}
