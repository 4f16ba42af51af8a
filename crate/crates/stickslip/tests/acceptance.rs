//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantity next to its pinned tolerance.

mod common;

use common::{linspace, rk4_coulomb_max_x2};
use std::f64::consts::PI;
use stickslip::criterion::{
    grazing_integral, perturbation_margin, stribeck_report, variational_y2, DEFAULT_PANELS,
};
use stickslip::detector::{convergence_table, default_horizon, detect_stick_slip, Case};
use stickslip::integrator::{slip_endpoint, Branch, IntegratorConfig};
use stickslip::model::{
    coulomb_law, sliding_interval, stribeck_law, Mode, Params, State, StribeckConstants,
};
use stickslip::sweep::{locate_boundary, PointValues, SweepParam};

fn report(n: u32, desc: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} - {desc} ({detail})");
    assert!(pass, "criterion {n} failed: {desc} ({detail})");
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

/// The shared Stribeck parameter grid: 5x5x5x3x3 over (alpha, beta, gamma,
/// V, c).
fn stribeck_grid() -> Vec<(f64, f64, f64, f64, f64)> {
    let mut grid = Vec::new();
    for &alpha in &linspace(0.1, 0.9, 5) {
        for &beta in &linspace(0.05, 1.0, 5) {
            for &gamma in &linspace(0.5, 4.0, 5) {
                for &v in &linspace(0.25, 2.0, 3) {
                    for &c in &linspace(0.1, 2.0, 3) {
                        grid.push((alpha, beta, gamma, v, c));
                    }
                }
            }
        }
    }
    grid
}

fn k_star() -> StribeckConstants {
    StribeckConstants::new(0.3, 0.1, 2.0).unwrap()
}

#[test]
fn criterion_01_grazing_orbit_oracle() {
    // eps = 0, F = 0: the orbit through (1, V) is the circle
    // x1 = 1 + V sin t, x2 = V cos t, back at (1, V) at t = 2pi.
    let mut worst = 0.0f64;
    for v in [0.25, 0.5, 1.0] {
        let p = Params::new(1.0, v, 0.0).unwrap();
        let s0 = State::new(1.0, v, Mode::SlipBelow);
        let end =
            slip_endpoint(&s0, &p, &coulomb_law(), Branch::Below, 2.0 * PI, &cfg()).unwrap();
        let err = ((end.x1 - 1.0).powi(2) + (end.x2 - v).powi(2)).sqrt();
        worst = worst.max(err);
    }
    report(
        1,
        "grazing orbit returns to (1, V) at t = 2pi",
        worst <= 1e-8,
        &format!("worst position error {worst:.3e}, tolerance 1e-8"),
    );
}

#[test]
fn criterion_02_quadrature_vs_closed_form() {
    let mut worst = 0.0f64;
    for (alpha, beta, gamma, v, c) in stribeck_grid() {
        let p = Params::new(c, v, 0.01).unwrap();
        let k = StribeckConstants::new(alpha, beta, gamma).unwrap();
        let i = grazing_integral(&stribeck_law(k), &p, DEFAULT_PANELS).unwrap();
        let closed = PI * v * (gamma * (1.0 - alpha) - 2.0 * beta * v);
        worst = worst.max((i - closed).abs());
    }
    report(
        2,
        "grazing integral matches pi*V*(gamma*(1-alpha) - 2*beta*V) on the 5x5x5x3x3 grid",
        worst <= 1e-10,
        &format!("worst |I - closed| = {worst:.3e}, tolerance 1e-10"),
    );
}

#[test]
fn criterion_03_coulomb_negative_result() {
    let mut pass = true;
    let mut detail = String::new();
    for eps in [0.01, 0.05] {
        let p = Params::new(1.0, 0.5, eps).unwrap();
        let rep = detect_stick_slip(&p, &coulomb_law(), default_horizon(), &cfg()).unwrap();
        let gap = rep.max_x2.map(|m| p.v() - m);
        let ok = !rep.exists && gap.is_some_and(|g| g > 0.0);
        pass &= ok;
        detail.push_str(&format!("eps={eps}: V - max_x2 = {:?}; ", gap));
    }
    // independent fixed-step RK4 oracle at step 1e-5
    let p = Params::new(1.0, 0.5, 0.01).unwrap();
    let oracle = rk4_coulomb_max_x2(&p, default_horizon(), 1e-5, 1e-3);
    pass &= oracle < p.v();
    detail.push_str(&format!("RK4 oracle max x2 = {oracle:.12}"));
    report(3, "Coulomb friction produces no return", pass, &detail);
}

#[test]
fn criterion_04_stribeck_positive_result() {
    let f = stribeck_law(k_star());
    let mut pass = true;
    let mut detail = String::new();
    for eps in [0.005, 0.01, 0.02] {
        let p = Params::new(0.5, 0.5, eps).unwrap();
        let rep = detect_stick_slip(&p, &f, default_horizon(), &cfg()).unwrap();
        let (lo, hi) = sliding_interval(&p);
        let interior = rep
            .x1_landing
            .is_some_and(|x1| x1 > lo && x1 < hi);
        let ok = rep.exists && rep.case == Some(Case::Case3) && interior;
        pass &= ok;
        detail.push_str(&format!(
            "eps={eps}: exists={} case={:?} landing={:?}; ",
            rep.exists, rep.case, rep.x1_landing
        ));
    }
    report(4, "Stribeck reference point admits a stick-slip cycle", pass, &detail);
}

#[test]
fn criterion_05_return_time_asymptotics() {
    let p = Params::new(0.5, 0.5, 0.01).unwrap();
    let f = stribeck_law(k_star());
    // a_minus = -sqrt(1.6*pi), frozen from the blow-up root formula
    let rep = perturbation_margin(&f, &p).unwrap();
    let a_minus = rep.a_minus.unwrap();
    assert!((a_minus + (1.6 * PI).sqrt()).abs() < 1e-12);
    assert!((a_minus + 2.24199).abs() < 1e-4);

    let rows = convergence_table(&p, &f, &[1e-2, 1e-3, 1e-4], &cfg()).unwrap();
    let residuals: Vec<f64> = rows
        .iter()
        .map(|r| r.residual_over_sqrt_eps.unwrap())
        .collect();
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    let last_ok = residuals[2] <= 0.2;
    report(
        5,
        "residual/sqrt(eps) strictly decreasing and <= 0.2 at eps = 1e-4",
        decreasing && last_ok,
        &format!("residuals {residuals:?}"),
    );
}

#[test]
fn criterion_06_sharpness() {
    // closed-form margin -0.5 + 1.4 - 2.0 = -1.1 < 0
    let f = stribeck_law(StribeckConstants::new(0.3, 2.0, 2.0).unwrap());
    let mut pass = true;
    let mut detail = String::new();
    for eps in [0.005, 0.01, 0.02] {
        let p = Params::new(0.5, 0.5, eps).unwrap();
        let rep = detect_stick_slip(&p, &f, default_horizon(), &cfg()).unwrap();
        pass &= !rep.exists;
        detail.push_str(&format!("eps={eps}: exists={}; ", rep.exists));
    }
    report(6, "reversed inequality yields no cycle", pass, &detail);
}

#[test]
fn criterion_07_instability_implication() {
    // On every grid point with closed-form margin >= 0.05 the equilibrium
    // instability margin must be positive for eps in {0.01, 0.05}.
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for (alpha, beta, gamma, v, c) in stribeck_grid() {
        let k = StribeckConstants::new(alpha, beta, gamma).unwrap();
        let cf = -c + gamma * (1.0 - alpha) - 2.0 * beta * v;
        if cf < 0.05 {
            continue;
        }
        checked += 1;
        for eps in [0.01, 0.05] {
            let p = Params::new(c, v, eps).unwrap();
            let instab = stribeck_report(&k, &p).instability_margin;
            if instab <= 0.0 {
                violations.push((alpha, beta, gamma, v, c, eps, cf, instab));
            }
        }
    }
    let detail = if violations.is_empty() {
        format!("{checked} grid points checked, no violations")
    } else {
        let (alpha, beta, gamma, v, c, eps, cf, instab) = violations[0];
        format!(
            "{} violations over {checked} points; first: alpha={alpha} beta={beta} \
             gamma={gamma} V={v} c={c} eps={eps}: cf_margin={cf:.4} but \
             instability_margin={instab:.4}",
            violations.len()
        )
    };
    report(
        7,
        "closed-form margin >= 0.05 implies positive instability margin",
        violations.is_empty(),
        &detail,
    );
}

#[test]
fn criterion_08_boundary_localization() {
    let fixed = PointValues {
        alpha: 0.3,
        beta: 0.1,
        gamma: 2.0,
        c: 0.5,
        v: 0.5,
    };
    let analytic = 0.6 / 0.7;
    let b1 = locate_boundary(
        SweepParam::Gamma,
        0.5,
        1.2,
        &fixed,
        0.01,
        1e-5,
        default_horizon(),
        &cfg(),
    )
    .unwrap();
    let b2 = locate_boundary(
        SweepParam::Gamma,
        0.5,
        1.2,
        &fixed,
        0.001,
        1e-5,
        default_horizon(),
        &cfg(),
    )
    .unwrap();
    let gap1 = (b1.detected - analytic).abs();
    let gap2 = (b2.detected - analytic).abs();
    let pass = (b1.analytic - analytic).abs() < 1e-12 && gap1 <= 0.1 && gap2 < gap1;
    report(
        8,
        "detected criterion boundary near gamma* = 0.6/0.7 and shrinking with eps",
        pass,
        &format!("gap(eps=0.01) = {gap1:.3e}, gap(eps=0.001) = {gap2:.3e}"),
    );
}

#[test]
fn criterion_09_independent_path_consistency() {
    let mut worst = 0.0f64;
    for (alpha, beta, gamma, v, c) in stribeck_grid() {
        let p = Params::new(c, v, 0.01).unwrap();
        let k = StribeckConstants::new(alpha, beta, gamma).unwrap();
        let f = stribeck_law(k);
        let y2 = variational_y2(2.0 * PI, &f, &p, DEFAULT_PANELS).unwrap();
        let i = grazing_integral(&f, &p, DEFAULT_PANELS).unwrap();
        worst = worst.max((y2 - (i - c * v * PI)).abs());
    }
    // Coulomb as the second built-in law
    for (v, c) in [(0.25, 0.1), (0.5, 1.0), (2.0, 2.0)] {
        let p = Params::new(c, v, 0.01).unwrap();
        let y2 = variational_y2(2.0 * PI, &coulomb_law(), &p, DEFAULT_PANELS).unwrap();
        worst = worst.max((y2 - (-c * v * PI)).abs());
    }
    report(
        9,
        "variational y2(2pi) equals grazing integral minus c*V*pi",
        worst <= 1e-10,
        &format!("worst deviation {worst:.3e}, tolerance 1e-10"),
    );
}

#[test]
fn criterion_10_second_derivative_rederivation() {
    // Second finite differences of the eps = 0 integrator's X2 at t = 2pi
    // must reproduce the closed-form constant -V.
    let tight = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-12,
        ..cfg()
    };
    let h = 5e-3;
    let mut worst = 0.0f64;
    for v in [0.25, 0.5, 1.0, 2.0] {
        let p = Params::new(1.0, v, 0.0).unwrap();
        let s0 = State::new(1.0, v, Mode::SlipBelow);
        let x2_at = |t: f64| {
            slip_endpoint(&s0, &p, &coulomb_law(), Branch::Below, t, &tight)
                .unwrap()
                .x2
        };
        let fd = (x2_at(2.0 * PI + h) - 2.0 * x2_at(2.0 * PI) + x2_at(2.0 * PI - h)) / (h * h);
        worst = worst.max((fd + v).abs());
    }
    report(
        10,
        "numeric second derivative of X2 at 2pi equals -V",
        worst <= 1e-5,
        &format!("worst |fd + V| = {worst:.3e}, tolerance 1e-5"),
    );
}
