//! CSV, weights and plot writers. Every float is printed with 17
//! significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::mlp::fmt_f64;
use crate::oracle::{Region, StressField};
use crate::optim::OptimTrace;
use crate::train::GradHistogram;

use super::CliError;

/// Files written so far, in order, for the manifest.
#[derive(Debug, Default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

pub fn stress_field_csv(pred: &StressField, exact: &StressField, regions: &[Region]) -> String {
    let mut s = String::from(
        "r,sigma_r_pred,sigma_theta_pred,sigma_r_exact,sigma_theta_exact,err_r,err_theta,region\n",
    );
    for i in 0..pred.len() {
        let row = [
            pred.r[i],
            pred.sigma_r[i],
            pred.sigma_t[i],
            exact.sigma_r[i],
            exact.sigma_t[i],
            pred.sigma_r[i] - exact.sigma_r[i],
            pred.sigma_t[i] - exact.sigma_t[i],
        ];
        for v in row {
            s.push_str(&fmt_f64(v));
            s.push(',');
        }
        s.push_str(regions[i].as_str());
        s.push('\n');
    }
    s
}

pub fn loss_history_csv(trace: &OptimTrace, term_names: &[&str]) -> String {
    let mut s = String::from("iter,total");
    for name in term_names {
        s.push(',');
        s.push_str(name);
    }
    s.push_str(",grad_norm,step\n");
    for rec in &trace.records {
        let _ = write!(s, "{},{}", rec.iter, fmt_f64(rec.loss));
        for k in 0..term_names.len() {
            let v = rec.terms.get(k).copied().unwrap_or(f64::NAN);
            let _ = write!(s, ",{}", fmt_f64(v));
        }
        let _ = writeln!(s, ",{},{}", fmt_f64(rec.grad_norm), fmt_f64(rec.step));
    }
    s
}

pub fn gradhist_csv(hists: &[GradHistogram]) -> String {
    let mut s = String::from("layer,bin_low,bin_high,count\n");
    for h in hists {
        for (k, count) in h.counts.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                h.layer,
                fmt_f64(h.edges[k]),
                fmt_f64(h.edges[k + 1]),
                count
            );
        }
    }
    s
}

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dashed: bool,
    x: &'a [f64],
    y: &'a [f64],
}

fn polyline_svg(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let finite = |v: &&f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.x.iter()).filter(finite);
    let ys = series.iter().flat_map(|s| s.y.iter()).filter(finite);
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if y1 <= y0 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = |v: f64| m + (v - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (w - 2.0 * m);
    let sy = |v: f64| h - m - (v - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (v, anchor, x, y) in [
        (x0, "start", m, h - m + 16.0),
        (x1, "end", w - m, h - m + 16.0),
        (y0, "end", m - 4.0, h - m),
        (y1, "end", m - 4.0, m + 10.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (k, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .x
            .iter()
            .zip(ser.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            ser.color,
            pts.join(" ")
        );
        let ly = m + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}"{dash}/><text x="{}" y="{}">{}</text>"#,
            w - m - 150.0,
            w - m - 120.0,
            ser.color,
            w - m - 115.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn stress_svg(pred: &StressField, exact: &StressField) -> String {
    polyline_svg(
        "Stress distribution",
        "r (m)",
        "stress (kPa)",
        &[
            Series { label: "sigma_r exact", color: "#1f77b4", dashed: false, x: &exact.r, y: &exact.sigma_r },
            Series { label: "sigma_r net", color: "#d62728", dashed: true, x: &pred.r, y: &pred.sigma_r },
            Series { label: "sigma_theta exact", color: "#2ca02c", dashed: false, x: &exact.r, y: &exact.sigma_t },
            Series { label: "sigma_theta net", color: "#ff7f0e", dashed: true, x: &pred.r, y: &pred.sigma_t },
        ],
    )
}

pub fn loss_svg(traces: &[(&str, &OptimTrace)]) -> String {
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    let data: Vec<(Vec<f64>, Vec<f64>)> = traces
        .iter()
        .map(|(_, t)| {
            t.records
                .iter()
                .map(|r| (r.iter as f64, r.loss.max(f64::MIN_POSITIVE).log10()))
                .unzip()
        })
        .collect();
    let series: Vec<Series<'_>> = traces
        .iter()
        .zip(&data)
        .enumerate()
        .map(|(k, ((label, _), (x, y)))| Series {
            label,
            color: colors[k % colors.len()],
            dashed: false,
            x,
            y,
        })
        .collect();
    polyline_svg("Training loss", "iteration", "log10 loss", &series)
}
