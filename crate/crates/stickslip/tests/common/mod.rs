//! Shared helpers for the integration and acceptance suites.

use stickslip::model::Params;

/// Fixed-step classic RK4 on the below slip branch with Coulomb friction,
/// launched from the grazing point. Independent of the adaptive integrator;
/// returns the maximum of `x2` over `t >= t_arm`.
pub fn rk4_coulomb_max_x2(p: &Params, horizon: f64, h: f64, t_arm: f64) -> f64 {
    let rhs = |y: [f64; 2]| -> [f64; 2] {
        [y[1], -y[0] - p.epsilon() * p.c() * y[1] + 1.0]
    };
    let (gx1, gx2) = p.grazing_point();
    let mut y = [gx1, gx2];
    let mut t = 0.0;
    let mut max_x2 = f64::NEG_INFINITY;
    while t < horizon {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        if t >= t_arm && y[1] > max_x2 {
            max_x2 = y[1];
        }
    }
    max_x2
}

/// Evenly spaced grid points including both endpoints.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
