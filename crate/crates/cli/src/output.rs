use std::fmt::Write as _;
use std::io;
use std::path::Path;

use dressing_core::verify::CheckReport;
use serde::Serialize;

use crate::claims::Reports;
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    ConfigError,
    RangeError,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass | Status::NotApplicable => 0,
            Status::Fail => 1,
            Status::ConfigError => 2,
            Status::RangeError => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotApplicable => "N/A",
            Status::ConfigError => "CONFIG-ERROR",
            Status::RangeError => "RANGE-ERROR",
        }
    }

    pub fn of_reports(reports: &Reports) -> Status {
        let verdicts: Vec<bool> = reports.iter().filter_map(|(_, r)| r.pass).collect();
        if verdicts.is_empty() {
            Status::NotApplicable
        } else if verdicts.iter().all(|b| *b) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn of_error(e: &dressing_core::Error) -> Status {
        use dressing_core::Error::*;
        match e {
            Invalid(_) | EmptyRegion(_) | NonReducedWord(_) | UnsupportedRank(_) | Dimension(_) | TooFewPoints { .. } | ZeroScale => {
                Status::ConfigError
            }
            _ => Status::RangeError,
        }
    }
}

/// Worst exit code, ordered pass < failed check < numerical range < configuration.
pub fn worst(codes: impl IntoIterator<Item = u8>) -> u8 {
    let rank = |c: u8| match c {
        0 => 0,
        1 => 1,
        3 => 2,
        _ => 3,
    };
    codes.into_iter().max_by_key(|c| rank(*c)).unwrap_or(0)
}

#[derive(Serialize)]
pub struct InputReport<'a> {
    pub input: &'a str,
    pub report: &'a CheckReport,
}

#[derive(Serialize)]
pub struct ClaimSummary<'a> {
    pub claim: &'a str,
    pub status: Status,
    pub message: Option<String>,
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub reports: Vec<InputReport<'a>>,
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub config: &'a ExperimentConfig,
    pub exit_code: u8,
    pub claims: Vec<ClaimSummary<'a>>,
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv(claim: &str, reports: &Reports) -> String {
    let mut out = String::from("claim,input,s,value,slope,pass\n");
    for (id, rep) in reports {
        for ser in &rep.series {
            let slope = ser.fit.map(|f| num(f.slope)).unwrap_or_default();
            let pass = match ser.pass {
                Some(true) => "true",
                Some(false) => "false",
                None => "n/a",
            };
            for &(s, v) in &ser.points {
                let _ = writeln!(out, "{claim},{id}/{},{},{},{slope},{pass}", ser.name, num(s), num(v));
            }
        }
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of log10(value) against s, one polyline per (input, series). None when nothing is
/// positive.
pub fn svg(claim: &str, reports: &Reports) -> Option<String> {
    let mut lines: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (id, rep) in reports {
        for ser in &rep.series {
            let pts: Vec<(f64, f64)> = ser.points.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|p| (p.0, p.1.log10())).collect();
            if !pts.is_empty() {
                lines.push((format!("{id}/{}", ser.name), pts));
            }
        }
    }
    if lines.is_empty() {
        return None;
    }
    let all = lines.iter().flat_map(|l| l.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (w, h, left, right, top, bottom) = (640.0, 400.0, 70.0, 20.0, 30.0, 50.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{left}" y="18" font-size="13">{claim}: log10(value) vs s</text>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        h - bottom,
        w - right
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{fx:.3}</text>"#, px(fx), h - bottom + 16.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{fy:.2}</text>"#, left - 6.0, py(fy) + 4.0);
    }
    for (i, (name, pts)) in lines.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, path.join(" "));
        if i < 12 {
            let ly = top + 12.0 + 14.0 * i as f64;
            let _ = writeln!(out, r#"<text x="{}" y="{ly}" fill="{colour}" text-anchor="end">{name}</text>"#, w - right - 4.0);
        }
    }
    out.push_str("</svg>\n");
    Some(out)
}

pub fn write(dir: &Path, name: &str, body: &str) -> io::Result<()> {
    std::fs::write(dir.join(name), body)
}
