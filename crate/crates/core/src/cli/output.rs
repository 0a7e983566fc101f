//! File writers for analysis and synthesis artifacts.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::estimate::HurstTrajectory;
use crate::fairvol::{self, FitResult};

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header)
        .map_err(|e| CliError::output(path, e))?;
    for row in rows {
        w.write_record(&row)
            .map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

/// Columns `t,h_hat,sigma_hat,flag`.
pub fn write_hurst_csv(path: &Path, traj: &HurstTrajectory) -> Result<(), CliError> {
    write_rows(
        path,
        &["t", "h_hat", "sigma_hat", "flag"],
        traj.records.iter().map(|r| {
            vec![
                r.t.to_string(),
                num(r.h_hat),
                num(r.sigma_hat),
                r.flag.as_str().to_string(),
            ]
        }),
    )
}

/// Columns `h,sigma,model,lo99,hi99,residual`, one row per fitted pair.
pub fn write_fit_csv(path: &Path, fit: &FitResult) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(fit.h.len());
    for ((&h, &s), &r) in fit.h.iter().zip(&fit.sigma).zip(&fit.residuals) {
        let (lo, hi) = fairvol::prediction_bounds(fit, h, 0.99)?;
        rows.push(vec![num(h), num(s), num(s - r), num(lo), num(hi), num(r)]);
    }
    write_rows(
        path,
        &["h", "sigma", "model", "lo99", "hi99", "residual"],
        rows,
    )
}

/// Columns `index,value`.
pub fn write_path_csv(path: &Path, values: &[f64]) -> Result<(), CliError> {
    write_rows(
        path,
        &["index", "value"],
        values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), num(*v)]),
    )
}

/// Columns `lag,acf`.
pub fn write_acf_csv(path: &Path, acf: &[f64]) -> Result<(), CliError> {
    write_rows(
        path,
        &["lag", "acf"],
        acf.iter()
            .enumerate()
            .map(|(k, v)| vec![k.to_string(), num(*v)]),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::output(path, e))
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit<'a>(
        xs: impl Iterator<Item = &'a f64> + Clone,
        ys: impl Iterator<Item = &'a f64> + Clone,
    ) -> Self {
        let range = |it: &mut dyn Iterator<Item = &'a f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                    (l.min(*v), h.max(*v))
                });
            if lo < hi {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        Self {
            x: range(&mut xs.clone()),
            y: range(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn polyline(&self, out: &mut String, pts: impl Iterator<Item = (f64, f64)>, style: &str) {
        out.push_str("<polyline fill=\"none\" ");
        out.push_str(style);
        out.push_str(" points=\"");
        for (x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(out, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        out.push_str("\"/>\n");
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{title}</text>",
            WIDTH / 2.0
        );
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s,
            "<path d=\"M{l},{t} L{l},{b} L{r},{b}\" stroke=\"black\" fill=\"none\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>",
            WIDTH / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(s, "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{ylabel}</text>", HEIGHT / 2.0, HEIGHT / 2.0);
        for (v, anchor, x, y) in [
            (self.x.0, "start", l, b + 14.0),
            (self.x.1, "end", r, b + 14.0),
        ] {
            let _ = writeln!(
                s,
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\">{v:.4}</text>"
            );
        }
        for (v, y) in [(self.y.0, b), (self.y.1, t + 8.0)] {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{v:.4}</text>",
                l - 4.0
            );
        }
        s
    }
}

/// Scatter of the fitted pairs with the curve and its 99% prediction band.
pub fn scatter_svg(fit: &FitResult) -> Result<String, CliError> {
    let frame = Frame::fit(fit.h.iter(), fit.sigma.iter());
    let mut s = frame.open("sigma vs H", "H", "sigma");
    for (&h, &sig) in fit.h.iter().zip(&fit.sigma) {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.2\" fill=\"black\"/>",
            frame.px(h),
            frame.py(sig)
        );
    }
    let steps = 200;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / steps as f64)
        .collect();
    let mut curve = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for &h in &grid {
        if let (Ok(m), Ok((l, u))) = (fit.model(h), fairvol::prediction_bounds(fit, h, 0.99)) {
            curve.push((h, m));
            lo.push((h, l));
            hi.push((h, u));
        }
    }
    frame.polyline(
        &mut s,
        curve.into_iter(),
        "stroke=\"blue\" stroke-width=\"1.5\"",
    );
    frame.polyline(
        &mut s,
        lo.into_iter(),
        "stroke=\"red\" stroke-dasharray=\"3,3\"",
    );
    frame.polyline(
        &mut s,
        hi.into_iter(),
        "stroke=\"red\" stroke-dasharray=\"3,3\"",
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Line plot of `Ĥ_t` with horizontal reference lines.
pub fn trajectory_svg(traj: &HurstTrajectory, references: &[f64]) -> String {
    let ts: Vec<f64> = traj.records.iter().map(|r| r.t as f64).collect();
    let hs: Vec<f64> = traj.records.iter().map(|r| r.h_hat).collect();
    let frame = Frame::fit(ts.iter(), hs.iter().chain(references));
    let mut s = frame.open("estimated H", "t", "H");
    frame.polyline(
        &mut s,
        ts.iter().copied().zip(hs.iter().copied()),
        "stroke=\"black\" stroke-width=\"0.6\"",
    );
    for &r in references {
        frame.polyline(
            &mut s,
            [(frame.x.0, r), (frame.x.1, r)].into_iter(),
            "stroke=\"red\" stroke-dasharray=\"4,3\"",
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::output(path, e))
}
