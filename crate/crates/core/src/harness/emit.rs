use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiments::ExperimentResult;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: String,
    seed: u64,
    config_sha256: String,
    wall_time_s: Option<f64>,
    skipped_windows: usize,
    config: &'a ExperimentConfig,
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn sweep(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        num(x)
    }
}

pub fn results_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "experiment",
        "sequence",
        "sweep_value",
        "median",
        "lower",
        "upper",
        "theta_over_pi",
        "phi_over_pi",
        "lambda_over_pi",
    ])?;
    for row in &result.rows {
        let angles: [String; 3] = match &row.params {
            Some(p) if p.len() == 3 => std::array::from_fn(|k| num(p[k] / PI)),
            _ => Default::default(),
        };
        let [t, p, l] = angles;
        w.write_record([
            result.experiment.name().to_string(),
            row.sequence.clone(),
            sweep(row.sweep_value),
            num(row.median),
            num(row.lower),
            num(row.upper),
            t,
            p,
            l,
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
}

pub fn params_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sweep_value",
        "theta_over_pi",
        "phi_over_pi",
        "lambda_over_pi",
        "qubit",
        "final_cost",
    ])?;
    for p in &result.learned {
        w.write_record([
            sweep(p.sweep_value),
            num(p.angles.theta / PI),
            num(p.angles.phi / PI),
            num(p.angles.lambda / PI),
            p.qubit.map(|q| q.to_string()).unwrap_or_else(|| "all".into()),
            num(p.final_cost),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
}

pub fn ranking_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "label", "fidelity_mcm", "fidelity_delay", "gap", "flagged"])?;
    for r in &result.ranking {
        w.write_record([
            r.rank.to_string(),
            r.label.clone(),
            num(r.fidelity_mcm),
            num(r.fidelity_delay),
            num(r.gap),
            r.flagged.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
}

const PALETTE: [(&str, &str); 10] = [
    ("none", "#d62728"),
    ("delay", "#9467bd"),
    ("cpmg", "#2ca02c"),
    ("xy4", "#ff7f0e"),
    ("ur6", "#e377c2"),
    ("ldd", "#1f77b4"),
    ("t1_reference", "#000000"),
    ("t2_reference", "#7f7f7f"),
    ("spam_reference", "#bcbcbc"),
    ("ldd_optimum", "#7f7f7f"),
];

fn colour(series: &str, k: usize) -> &'static str {
    const EXTRA: [&str; 4] = ["#8c564b", "#17becf", "#bcbd22", "#393b79"];
    PALETTE
        .iter()
        .find(|(n, _)| *n == series)
        .map(|(_, c)| *c)
        .unwrap_or(EXTRA[k % EXTRA.len()])
}

/// Fidelity against the sweep value, one polyline per series with quartile bars.
pub fn plot_svg(result: &ExperimentResult) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const L: f64 = 70.0;
    const R: f64 = 170.0;
    const T: f64 = 30.0;
    const B: f64 = 60.0;

    let mut series: Vec<&str> = Vec::new();
    for row in &result.rows {
        if !series.contains(&row.sequence.as_str()) {
            series.push(&row.sequence);
        }
    }
    let xs = result.rows.iter().map(|r| r.sweep_value);
    let (mut x0, mut x1) = xs
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let lows = result.rows.iter().map(|r| r.lower);
    let mut y0 = lows.fold(f64::INFINITY, f64::min).min(1.0);
    let mut y1 = result
        .rows
        .iter()
        .map(|r| r.upper)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0);
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    y0 = (y0 - 0.02).max(-0.5);
    y1 += 0.02;
    let px = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{L} {T} V{} H{}" fill="none" stroke="black"/>"#,
        H - B,
        W - R
    );
    for k in 0..=5 {
        let y = y0 + (y1 - y0) * k as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{L}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#eeeeee"/><text x="{}" y="{:.2}" text-anchor="end">{y:.3}</text>"##,
            W - R,
            py(y),
            py(y),
            L - 6.0,
            py(y) + 4.0
        );
        let x = x0 + (x1 - x0) * k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            H - B + 18.0,
            sweep((x * 1000.0).round() / 1000.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        L + (W - L - R) / 2.0,
        H - 15.0,
        result.sweep_label
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">fidelity</text>"#,
        T + (H - T - B) / 2.0
    );
    for (k, name) in series.iter().enumerate() {
        let c = colour(name, k);
        let mut rows: Vec<_> = result.rows.iter().filter(|r| r.sequence == *name).collect();
        rows.sort_by(|a, b| a.sweep_value.total_cmp(&b.sweep_value));
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.sweep_value), py(r.median)))
            .collect();
        let dash = if name.ends_with("reference") || name.ends_with("optimum") {
            r#" stroke-dasharray="5 4""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>"#,
            points.join(" ")
        );
        for r in &rows {
            if r.upper > r.lower {
                let _ = writeln!(
                    s,
                    r#"<line x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="{c}"/>"#,
                    px(r.sweep_value),
                    py(r.lower),
                    py(r.upper)
                );
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{c}"/>"#,
                px(r.sweep_value),
                py(r.median)
            );
        }
        let ly = T + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" x2="{1}" y1="{ly}" y2="{ly}" stroke="{c}" stroke-width="2"{dash}/><text x="{2}" y="{3}">{name}</text>"#,
            W - R + 15.0,
            W - R + 40.0,
            W - R + 46.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes results.csv, params.csv, meta.json, plot.svg, plus traces.json when
/// LDD was learned and ranking.csv for scans. `wall_time_s` only goes to meta.json.
pub fn emit_results(
    result: &ExperimentResult,
    cfg: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
    wall_time_s: Option<f64>,
) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(result)?)?;
    fs::write(dir.join("params.csv"), params_csv(result)?)?;
    fs::write(dir.join("plot.svg"), plot_svg(result))?;
    let meta = Meta {
        tool: "ddlab",
        version: VERSION,
        experiment: result.experiment.to_string(),
        seed: cfg.seed,
        config_sha256: cfg.hash()?,
        wall_time_s,
        skipped_windows: result.skipped_windows,
        config: cfg,
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    if !result.traces.is_empty() {
        fs::write(dir.join("traces.json"), serde_json::to_string_pretty(&result.traces)?)?;
    }
    if !result.ranking.is_empty() {
        fs::write(dir.join("ranking.csv"), ranking_csv(result)?)?;
    }
    Ok(())
}
