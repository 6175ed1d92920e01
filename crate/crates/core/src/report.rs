//! Machine-readable sweep reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::root_system::Point;
use crate::sampling::polar;

/// Maximum number of violations stored verbatim in a report.
pub const VIOLATION_LIST_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub index: u64,
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl SamplePoint {
    pub fn new(index: u64, x: &Point, y: &Point) -> Self {
        SamplePoint {
            index,
            x: [x.x, x.y],
            y: [y.x, y.y],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub argmin_point: SamplePoint,
    pub argmax_point: SamplePoint,
    /// `max / min`, for positive quantities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical_window: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: u64,
    pub w: String,
    pub value: f64,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub config: serde_json::Value,
    pub samples: usize,
    pub per_w: BTreeMap<String, WStats>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub summary: BTreeMap<String, f64>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub version: String,
}

impl SweepReport {
    pub fn new(name: &str, config: serde_json::Value) -> Self {
        SweepReport {
            name: name.to_string(),
            config,
            samples: 0,
            per_w: BTreeMap::new(),
            violation_count: 0,
            violations: Vec::new(),
            summary: BTreeMap::new(),
            passed: true,
            wall_clock_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Adds one observation; on ties the earlier sample keeps the arg-point.
    pub fn observe(&mut self, label: &str, value: f64, at: SamplePoint) {
        match self.per_w.get_mut(label) {
            Some(s) => {
                s.count += 1;
                if value < s.min {
                    s.min = value;
                    s.argmin_point = at;
                }
                if value > s.max {
                    s.max = value;
                    s.argmax_point = at;
                }
            }
            None => {
                self.per_w.insert(
                    label.to_string(),
                    WStats {
                        count: 1,
                        min: value,
                        max: value,
                        argmin_point: at,
                        argmax_point: at,
                        window: None,
                        theoretical_window: None,
                    },
                );
            }
        }
    }

    pub fn violate(&mut self, v: Violation) {
        self.violation_count += 1;
        self.passed = false;
        if self.violations.len() < VIOLATION_LIST_CAP {
            self.violations.push(v);
        }
    }

    /// Fills `window = max/min` for every entry with a positive minimum.
    pub fn fill_windows(&mut self) {
        for s in self.per_w.values_mut() {
            if s.min > 0.0 {
                s.window = Some(s.max / s.min);
            }
        }
    }

    pub fn max_over_w(&self) -> Option<f64> {
        self.per_w.values().map(|s| s.max).reduce(f64::max)
    }

    pub fn min_over_w(&self) -> Option<f64> {
        self.per_w.values().map(|s| s.min).reduce(f64::min)
    }

    /// The same report with the timing field zeroed.
    pub fn without_timing(mut self) -> Self {
        self.wall_clock_seconds = 0.0;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| DunklError::Precondition(e.to_string()))
    }
}

/// Several reports produced by one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub reports: Vec<SweepReport>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub version: String,
}

impl AggregateReport {
    pub fn new(reports: Vec<SweepReport>, wall_clock_seconds: f64) -> Self {
        AggregateReport {
            passed: reports.iter().all(|r| r.passed),
            reports,
            wall_clock_seconds,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn without_timing(mut self) -> Self {
        self.wall_clock_seconds = 0.0;
        self.reports = self.reports.into_iter().map(SweepReport::without_timing).collect();
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| DunklError::Precondition(e.to_string()))
    }
}

/// One CSV row per (sample, group element).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub n: usize,
    pub kappa0: f64,
    pub kappa1: f64,
    pub c: Option<f64>,
    pub xr: f64,
    #[serde(rename = "xθ")]
    pub xtheta: f64,
    pub yr: f64,
    #[serde(rename = "yθ")]
    pub ytheta: f64,
    pub w: String,
    pub value: f64,
    pub envelope: Option<f64>,
    pub ratio: Option<f64>,
}

impl CsvRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: usize, kappas: (f64, f64), c: Option<f64>, x: &Point, y: &Point, w: String, value: f64) -> Self {
        let (xr, xtheta) = polar(x);
        let (yr, ytheta) = polar(y);
        CsvRow {
            n,
            kappa0: kappas.0,
            kappa1: kappas.1,
            c,
            xr,
            xtheta,
            yr,
            ytheta,
            w,
            value,
            envelope: None,
            ratio: None,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rows {
        wtr.serialize(r).map_err(|e| DunklError::Precondition(e.to_string()))?;
    }
    wtr.flush().map_err(|e| DunklError::Precondition(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::point;

    #[test]
    fn observe_tracks_extremes_and_first_tie() {
        let mut r = SweepReport::new("t", serde_json::json!({}));
        let p = |i| SamplePoint::new(i, &point(1.0, 0.0), &point(0.0, 1.0));
        r.observe("r1", 2.0, p(0));
        r.observe("r1", 1.0, p(1));
        r.observe("r1", 1.0, p(2));
        r.observe("r1", 3.0, p(3));
        let s = &r.per_w["r1"];
        assert_eq!((s.min, s.max, s.count), (1.0, 3.0, 4));
        assert_eq!(s.argmin_point.index, 1);
        r.fill_windows();
        assert_eq!(r.per_w["r1"].window, Some(3.0));
    }

    #[test]
    fn json_round_trip() {
        let mut r = SweepReport::new("t", serde_json::json!({"n": 3}));
        r.observe("s0", 0.1 + 0.2, SamplePoint::new(9, &point(0.3, 0.7), &point(1e-17, 2.0)));
        r.violate(Violation {
            index: 9,
            w: "s0".into(),
            value: -1e-3,
            x: [0.3, 0.7],
            y: [1e-17, 2.0],
            detail: "negative".into(),
        });
        r.summary.insert("c".into(), 1.0 / 3.0);
        let back: SweepReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_has_the_documented_columns() {
        let row = CsvRow::new(3, (1.0, 1.0), Some(0.1), &point(1.0, 1.0), &point(0.0, 2.0), "r1".into(), 2.5);
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "n,kappa0,kappa1,c,xr,xθ,yr,yθ,w,value,envelope,ratio"
        );
    }
}
