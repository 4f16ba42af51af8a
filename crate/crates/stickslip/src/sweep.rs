//! Grid sweeps over the Stribeck parameters that cross-validate the
//! closed-form criterion against detector verdicts, and bisection of the
//! detected existence boundary along one parameter axis.
//!
//! Sweeps parallelize over grid points with a deterministic row-major
//! reduction, so parallel and serial runs emit identical files.

use crate::criterion::{closed_form_margin, stribeck_report};
use crate::detector::{default_horizon, detect_stick_slip};
use crate::integrator::IntegratorConfig;
use crate::model::{stribeck_law, Params, StribeckConstants};
use crate::{export, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A sweepable Stribeck-oscillator parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "V")]
    V,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Base values of the five sweepable parameters; axis values override them
/// per grid point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointValues {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

impl PointValues {
    fn with(&self, name: SweepParam, value: f64) -> PointValues {
        let mut p = *self;
        match name {
            SweepParam::Alpha => p.alpha = value,
            SweepParam::Beta => p.beta = value,
            SweepParam::Gamma => p.gamma = value,
            SweepParam::C => p.c = value,
            SweepParam::V => p.v = value,
        }
        p
    }

    fn params(&self, epsilon: f64) -> Result<(Params, StribeckConstants)> {
        let p = Params::new(self.c, self.v, epsilon)?;
        let k = StribeckConstants::new(self.alpha, self.beta, self.gamma)?;
        Ok((p, k))
    }
}

fn default_agreement_band() -> f64 {
    0.2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub fixed: PointValues,
    pub epsilon_list: Vec<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    /// Half-width of the criterion-boundary band inside which disagreement
    /// between prediction and detection is expected at finite eps. An
    /// artifact-level calibration constant, not a quantity from theory.
    #[serde(default = "default_agreement_band")]
    pub agreement_band: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::invalid("axes", "at least one axis is required"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.count < 2 {
                return Err(Error::invalid("axes", format!("axis {i}: count must be >= 2")));
            }
            if !(a.min < a.max) {
                return Err(Error::invalid("axes", format!("axis {i}: min must be < max")));
            }
            if self.axes.iter().skip(i + 1).any(|b| b.name == a.name) {
                return Err(Error::invalid("axes", "axes must name distinct parameters"));
            }
        }
        if self.epsilon_list.is_empty() {
            return Err(Error::invalid("epsilon_list", "must be non-empty"));
        }
        for &e in &self.epsilon_list {
            if !(e > 0.0) {
                return Err(Error::invalid("epsilon_list", format!("epsilon must be > 0, got {e}")));
            }
        }
        if let Some(cfg) = &self.integrator {
            cfg.validate()?;
        }
        // every grid point must satisfy the type invariants
        for values in self.grid_points() {
            values.params(self.epsilon_list[0])?;
        }
        Ok(())
    }

    fn axis_value(axis: &Axis, index: usize) -> f64 {
        axis.min + (axis.max - axis.min) * index as f64 / (axis.count - 1) as f64
    }

    /// Row-major enumeration of the grid (last axis fastest).
    pub fn grid_points(&self) -> Vec<PointValues> {
        let total: usize = self.axes.iter().map(|a| a.count).product();
        (0..total)
            .map(|mut flat| {
                let mut values = self.fixed;
                for axis in self.axes.iter().rev() {
                    let idx = flat % axis.count;
                    flat /= axis.count;
                    values = values.with(axis.name, Self::axis_value(axis, idx));
                }
                values
            })
            .collect()
    }
}

/// Per-epsilon verdict at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub instability_margin: f64,
    pub detected: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub point: PointValues,
    pub closed_form_margin: f64,
    pub entries: Vec<SweepEntry>,
    /// Sign of the closed-form margin matches detection for every eps in
    /// the list (derived, never stored independently).
    pub agreement: bool,
    /// The point sits inside the configured boundary band, where
    /// disagreement is expected at finite eps.
    pub in_boundary_band: bool,
}

fn evaluate_point(spec: &SweepSpec, values: PointValues) -> SweepRecord {
    let horizon = spec.horizon.unwrap_or_else(default_horizon);
    let cfg = spec.integrator.unwrap_or_default();
    let mut cf_margin = f64::NAN;
    let mut entries = Vec::with_capacity(spec.epsilon_list.len());
    for &eps in &spec.epsilon_list {
        match values.params(eps) {
            Ok((p, k)) => {
                cf_margin = closed_form_margin(&k, &p);
                let instab = stribeck_report(&k, &p).instability_margin;
                match detect_stick_slip(&p, &stribeck_law(k), horizon, &cfg) {
                    Ok(rep) => entries.push(SweepEntry {
                        epsilon: eps,
                        instability_margin: instab,
                        detected: rep.exists,
                        error: None,
                    }),
                    Err(e) => entries.push(SweepEntry {
                        epsilon: eps,
                        instability_margin: instab,
                        detected: false,
                        error: Some(e.to_string()),
                    }),
                }
            }
            Err(e) => entries.push(SweepEntry {
                epsilon: eps,
                instability_margin: f64::NAN,
                detected: false,
                error: Some(e.to_string()),
            }),
        }
    }
    let agreement = entries
        .iter()
        .filter(|e| e.error.is_none())
        .all(|e| e.detected == (cf_margin > 0.0));
    SweepRecord {
        point: values,
        closed_form_margin: cf_margin,
        entries,
        agreement,
        in_boundary_band: cf_margin.abs() < spec.agreement_band,
    }
}

/// One record per grid point, in deterministic row-major order. Individual
/// point failures are recorded in-place without aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let points = spec.grid_points();
    Ok(points
        .into_par_iter()
        .map(|values| evaluate_point(spec, values))
        .collect())
}

/// Flatten sweep records to CSV, one row per (grid point, epsilon).
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s =
        String::from("alpha,beta,gamma,c,V,epsilon,cf_margin,instab_margin,detected,agreement\n");
    for rec in records {
        for e in &rec.entries {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                export::fmt17(rec.point.alpha),
                export::fmt17(rec.point.beta),
                export::fmt17(rec.point.gamma),
                export::fmt17(rec.point.c),
                export::fmt17(rec.point.v),
                export::fmt17(e.epsilon),
                export::fmt17(rec.closed_form_margin),
                export::fmt17(e.instability_margin),
                e.detected,
                rec.agreement,
            ));
        }
    }
    s
}

/// Convergence-table CSV (`epsilon,T,T_pred,residual_over_sqrt_eps`).
pub fn convergence_csv(rows: &[crate::detector::ConvergenceRow]) -> String {
    let mut s = String::from("epsilon,T,T_pred,residual_over_sqrt_eps\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            export::fmt17(r.epsilon),
            r.t_return.map(export::fmt17).unwrap_or_else(|| "no_return".into()),
            export::fmt17(r.t_pred),
            r.residual_over_sqrt_eps
                .map(export::fmt17)
                .unwrap_or_else(|| "no_return".into()),
        ));
    }
    s
}

/// Result of the criterion-boundary localization along one axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryResult {
    /// Exact zero of the closed-form margin along the axis.
    pub analytic: f64,
    /// Midpoint of the final bisection bracket on the detector verdict.
    pub detected: f64,
}

/// Zero of `-c + gamma*(1 - alpha) - 2*beta*V` along one axis, all other
/// parameters fixed.
pub fn analytic_boundary(axis: SweepParam, fixed: &PointValues) -> f64 {
    let PointValues { alpha, beta, gamma, c, v } = *fixed;
    match axis {
        SweepParam::Gamma => (c + 2.0 * beta * v) / (1.0 - alpha),
        SweepParam::Alpha => 1.0 - (c + 2.0 * beta * v) / gamma,
        SweepParam::Beta => (gamma * (1.0 - alpha) - c) / (2.0 * v),
        SweepParam::C => gamma * (1.0 - alpha) - 2.0 * beta * v,
        SweepParam::V => (gamma * (1.0 - alpha) - c) / (2.0 * beta),
    }
}

/// Bisect the detector verdict along `axis` between `lo` and `hi` until the
/// bracket is narrower than `tol`. The verdicts at the endpoints must
/// differ and the closed-form margin must change sign on the interval.
#[allow(clippy::too_many_arguments)]
pub fn locate_boundary(
    axis: SweepParam,
    lo: f64,
    hi: f64,
    fixed: &PointValues,
    epsilon: f64,
    tol: f64,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<BoundaryResult> {
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "locate_boundary: need lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition("locate_boundary: tol must be > 0".into()));
    }
    let margin_at = |x: f64| -> Result<f64> {
        let (p, k) = fixed.with(axis, x).params(epsilon)?;
        Ok(closed_form_margin(&k, &p))
    };
    let detect_at = |x: f64| -> Result<bool> {
        let (p, k) = fixed.with(axis, x).params(epsilon)?;
        Ok(detect_stick_slip(&p, &stribeck_law(k), horizon, cfg)?.exists)
    };

    if margin_at(lo)? * margin_at(hi)? >= 0.0 {
        return Err(Error::Precondition(
            "locate_boundary: closed-form margin does not change sign on [lo, hi]".into(),
        ));
    }
    let d_lo = detect_at(lo)?;
    let d_hi = detect_at(hi)?;
    if d_lo == d_hi {
        return Err(Error::Precondition(
            "locate_boundary: detector verdicts agree at both endpoints".into(),
        ));
    }

    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if detect_at(mid)? == d_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(BoundaryResult {
        analytic: analytic_boundary(axis, fixed),
        detected: 0.5 * (a + b),
    })
}
