//! Deterministic file emission: CSV trajectories/tables and JSON reports
//! with all floating-point fields at 17 significant digits, so every value
//! round-trips exactly.

use crate::integrator::{Event, Trajectory};
use serde::Serialize;
use std::io::{self, Write};

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON formatter writing every f64 with 17 significant digits.
struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any report to a JSON string with 17-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> crate::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17Formatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serializer emits utf-8"))
}

/// Trajectory CSV: header `t,x1,x2,mode`, one row per accepted step plus
/// event rows.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,x1,x2,mode\n");
    for sample in &traj.samples {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(sample.t),
            fmt17(sample.x1),
            fmt17(sample.x2),
            sample.mode.as_str()
        ));
    }
    s
}

/// Event list as a JSON array of `{kind, t, x1, x2}`.
pub fn events_json(events: &[Event]) -> crate::Result<String> {
    to_json_string(&events)
}
