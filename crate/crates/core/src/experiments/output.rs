//! File outputs: one CSV per study (plus a summary), an SVG plot per fitted
//! curve, and a run manifest. Everything written here is a pure function of
//! the study outcome, so reruns with the same config and seed are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::studies::{
    DeviationOutcome, GapOutcome, LipOutcome, SpacingOutcome, SweepOutcome,
};
use crate::metrics::LogLogFit;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status(v: Option<f64>) -> &'static str {
    if v.is_some() {
        "ok"
    } else {
        "unstable"
    }
}

fn fit_comment(fit: Option<&LogLogFit>, extra: &str) -> String {
    match fit {
        Some(f) => format!(
            "# fit: slope={} intercept={} r2={}{extra}\n",
            f.slope, f.intercept, f.r2
        ),
        None => format!("# fit: none{extra}\n"),
    }
}

/// Run manifest: artifact version, seed, and the full config echo.
pub fn write_manifest(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let path = dir.join("manifest.toml");
    let mut text = String::new();
    let _ = writeln!(text, "artifact = \"nplap {}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "seed = {}", cfg.run.seed);
    text.push('\n');
    text.push_str("[config]\n");
    for line in cfg.to_toml_string()?.lines() {
        // nest the config sections one level down
        if let Some(section) = line.strip_prefix('[') {
            text.push_str(&format!("[config.{section}\n"));
        } else {
            text.push_str(line);
            text.push('\n');
        }
    }
    write_file(&path, &text)?;
    Ok(path)
}

pub fn emit_sweep(dir: &Path, cfg: &ExperimentConfig, out: &SweepOutcome) -> Result<Vec<PathBuf>> {
    let mut csv = String::from("n,trial,delta,error,error_l2,seed,status\n");
    for r in &out.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.n,
            r.trial,
            r.delta,
            opt(r.error),
            opt(r.error_l2),
            r.seed,
            status(r.error)
        );
    }
    let mut summary = String::from("n,median_error,bound_overlay\n");
    for (i, &(n, m)) in out.medians.iter().enumerate() {
        let overlay = out.overlay.get(i).map(|&(_, v)| v);
        let _ = writeln!(summary, "{n},{m},{}", opt(overlay));
    }
    summary.push_str(&fit_comment(
        out.fit.as_ref(),
        &format!(
            " fitted_c={} aborted={}",
            opt(out.fitted_c),
            out.aborted
        ),
    ));

    let data: Vec<(f64, f64)> = out.medians.iter().map(|&(n, m)| (n as f64, m)).collect();
    let overlay: Vec<(f64, f64)> = out.overlay.iter().map(|&(n, v)| (n as f64, v)).collect();
    let svg = svg_loglog(
        "convergence sweep",
        "n",
        "sup-time Lp error",
        &data,
        out.fit.as_ref(),
        &overlay,
    );

    let paths = vec![
        dir.join("converge.csv"),
        dir.join("converge_summary.csv"),
        dir.join("converge.svg"),
    ];
    write_file(&paths[0], &csv)?;
    write_file(&paths[1], &summary)?;
    write_file(&paths[2], &svg)?;
    let mut written = paths;
    written.push(write_manifest(dir, cfg)?);
    Ok(written)
}

pub fn emit_gap(dir: &Path, cfg: &ExperimentConfig, out: &GapOutcome) -> Result<Vec<PathBuf>> {
    let mut csv = String::from("n,trial,delta,gap,seed,status\n");
    for r in &out.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.n,
            r.trial,
            r.delta,
            opt(r.gap),
            r.seed,
            status(r.gap)
        );
    }
    let mut summary = String::from("n,q25,median,q75\n");
    for &(n, q25, med, q75) in &out.quantiles {
        let _ = writeln!(summary, "{n},{q25},{med},{q75}");
    }
    summary.push_str(&fit_comment(
        out.fit.as_ref(),
        &format!(" aborted={}", out.aborted),
    ));
    let data: Vec<(f64, f64)> = out
        .quantiles
        .iter()
        .map(|&(n, _, m, _)| (n as f64, m))
        .collect();
    let svg = svg_loglog(
        "scheme gap",
        "n",
        "median sup-time Lp gap",
        &data,
        out.fit.as_ref(),
        &[],
    );
    let paths = vec![
        dir.join("gap.csv"),
        dir.join("gap_summary.csv"),
        dir.join("gap.svg"),
    ];
    write_file(&paths[0], &csv)?;
    write_file(&paths[1], &summary)?;
    write_file(&paths[2], &svg)?;
    let mut written = paths;
    written.push(write_manifest(dir, cfg)?);
    Ok(written)
}

pub fn emit_deviation(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &DeviationOutcome,
) -> Result<Vec<PathBuf>> {
    let mut csv = String::from("n,trial,z_norm_p\n");
    for r in &out.rows {
        let _ = writeln!(csv, "{},{},{}", r.n, r.trial, r.z_norm_p);
    }
    let mut summary = String::from("n,mean_z_norm_p\n");
    for &(n, m) in &out.means {
        let _ = writeln!(summary, "{n},{m}");
    }
    summary.push_str(&fit_comment(out.fit.as_ref(), ""));
    let data: Vec<(f64, f64)> = out.means.iter().map(|&(n, m)| (n as f64, m)).collect();
    let svg = svg_loglog(
        "deviation scaling",
        "n",
        "mean ||Z||_{p,n}^p",
        &data,
        out.fit.as_ref(),
        &[],
    );
    let paths = vec![
        dir.join("deviation.csv"),
        dir.join("deviation_summary.csv"),
        dir.join("deviation.svg"),
    ];
    write_file(&paths[0], &csv)?;
    write_file(&paths[1], &summary)?;
    write_file(&paths[2], &svg)?;
    let mut written = paths;
    written.push(write_manifest(dir, cfg)?);
    Ok(written)
}

pub fn emit_spacings(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &SpacingOutcome,
) -> Result<Vec<PathBuf>> {
    let mut csv = String::from("n,eps,exact,empirical,sigma\n");
    for r in &out.tails {
        let _ = writeln!(csv, "{},{},{},{},{}", r.n, r.eps, r.exact, r.empirical, r.sigma);
    }
    let mut summary = String::from("n,t,threshold,empirical,union_bound\n");
    for r in &out.max_rows {
        let _ = writeln!(
            summary,
            "{},{},{},{},{}",
            r.n, r.t, r.threshold, r.empirical, r.union_bound
        );
    }
    let _ = writeln!(summary, "# trials={}", out.trials);
    // empirical vs exact tail, identity overlay
    let data: Vec<(f64, f64)> = out
        .tails
        .iter()
        .filter(|r| r.exact > 0.0 && r.empirical > 0.0)
        .map(|r| (r.exact, r.empirical))
        .collect();
    let overlay: Vec<(f64, f64)> = data.iter().map(|&(x, _)| (x, x)).collect();
    let svg = svg_loglog(
        "spacing tails",
        "exact (1-eps)^n",
        "empirical frequency",
        &data,
        None,
        &overlay,
    );
    let paths = vec![
        dir.join("spacings.csv"),
        dir.join("spacings_summary.csv"),
        dir.join("spacings.svg"),
    ];
    write_file(&paths[0], &csv)?;
    write_file(&paths[1], &summary)?;
    write_file(&paths[2], &svg)?;
    let mut written = paths;
    written.push(write_manifest(dir, cfg)?);
    Ok(written)
}

pub fn emit_lipapprox(dir: &Path, cfg: &ExperimentConfig, out: &LipOutcome) -> Result<Vec<PathBuf>> {
    let mut csv = String::from("member,delta,error\n");
    for r in &out.rows {
        let _ = writeln!(csv, "{},{},{}", r.member, r.delta, r.error);
    }
    let mut summary = String::from("member,s,q,predicted_theta,slope_vs_n,r2\n");
    for f in &out.fits {
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            f.member, f.s, f.q, f.predicted, f.slope, f.r2
        );
    }
    let data: Vec<(f64, f64)> = out
        .rows
        .iter()
        .filter(|r| r.member == "step_third" && r.error > 0.0)
        .map(|r| (1.0 / r.delta, r.error))
        .collect();
    let fit = out
        .fits
        .iter()
        .find(|f| f.member == "step_third")
        .map(|f| LogLogFit {
            slope: f.slope,
            intercept: {
                // re-derive the intercept for the plot line
                let (x0, y0) = data.first().copied().unwrap_or((1.0, 1.0));
                y0.ln() - f.slope * x0.ln()
            },
            r2: f.r2,
        });
    let svg = svg_loglog(
        "projection rate (step at 1/3)",
        "cells (1/delta)",
        "||F - F_n||_p",
        &data,
        fit.as_ref(),
        &[],
    );
    let paths = vec![
        dir.join("lipapprox.csv"),
        dir.join("lipapprox_summary.csv"),
        dir.join("lipapprox.svg"),
    ];
    write_file(&paths[0], &csv)?;
    write_file(&paths[1], &summary)?;
    write_file(&paths[2], &svg)?;
    let mut written = paths;
    written.push(write_manifest(dir, cfg)?);
    Ok(written)
}

// ---------------------------------------------------------------------------
// Minimal deterministic SVG plotting
// ---------------------------------------------------------------------------

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 60.0;

/// Log-log scatter with an optional fitted line and overlay curve. One
/// `<circle class="data">` per point, one `<polyline class="overlay">` when an
/// overlay is given.
pub fn svg_loglog(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    data: &[(f64, f64)],
    fit: Option<&LogLogFit>,
    overlay: &[(f64, f64)],
) -> String {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    pts.extend(data.iter().copied());
    pts.extend(overlay.iter().copied());
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>",
        W / 2.0
    );
    if pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) || pts.is_empty() {
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no positive data</text>",
            W / 2.0,
            H / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        xmin = xmin.min(x.ln());
        xmax = xmax.max(x.ln());
        ymin = ymin.min(y.ln());
        ymax = ymax.max(y.ln());
    }
    if xmax - xmin < 1e-12 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| MARGIN + (x.ln() - xmin) / (xmax - xmin) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y.ln() - ymin) / (ymax - ymin) * (H - 2.0 * MARGIN);

    // axes
    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>",
        H - MARGIN
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{xlabel} (log)</text>",
        W / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 {})\">{ylabel} (log)</text>",
        H / 2.0,
        H / 2.0
    );

    if let Some(f) = fit {
        let y0 = (f.intercept + f.slope * xmin).exp();
        let y1 = (f.intercept + f.slope * xmax).exp();
        let _ = writeln!(
            svg,
            "  <polyline class=\"fit\" fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"4 3\" points=\"{:.3},{:.3} {:.3},{:.3}\"/>",
            sx(xmin.exp()),
            sy(y0),
            sx(xmax.exp()),
            sy(y1)
        );
    }
    if !overlay.is_empty() {
        let mut points = String::new();
        for &(x, y) in overlay {
            let _ = write!(points, "{:.3},{:.3} ", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            "  <polyline class=\"overlay\" fill=\"none\" stroke=\"#cc3333\" points=\"{}\"/>",
            points.trim_end()
        );
    }
    for &(x, y) in data {
        let _ = writeln!(
            svg,
            "  <circle class=\"data\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"#336699\"/>",
            sx(x),
            sy(y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
