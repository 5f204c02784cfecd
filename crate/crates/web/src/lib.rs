//! WebAssembly bindings behind `www/index.html`.
//!
//! Every entry point is synchronous and returns a string (SVG or JSON) so the
//! page needs no bundler and no JS glue beyond what wasm-bindgen generates.

use std::fmt::Write as _;

use ddlab::harness::{plot_svg, run_mcm_experiment, ExperimentConfig, ExperimentKind, Scenario};
use ddlab::noise::{NoiseModel, QubitNoiseParams};
use ddlab::optimizer::spsa_minimize;
use ddlab::sequences::{build_sequence, DDKind, DDSequenceSpec, EulerAngles, GateDurations, LayoutItem};
use ddlab::RngStream;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn spec_for(kind: &str, angles: EulerAngles) -> Result<DDSequenceSpec, JsError> {
    let kind: DDKind = kind.parse().map_err(js)?;
    Ok(match kind {
        DDKind::Ldd => DDSequenceSpec::ldd(angles, 1, 4),
        k => DDSequenceSpec::new(k, 1),
    })
}

/// One idle window filled with a sequence, drawn as a single-qubit lane.
#[wasm_bindgen]
pub fn timeline_svg(kind: &str, window_dt: u32, theta: f64, phi: f64, lambda: f64) -> Result<String, JsError> {
    let spec = spec_for(kind, EulerAngles::new(theta, phi, lambda))?;
    let dur = GateDurations::default();
    let layout = build_sequence(&spec, window_dt as u64, &dur).map_err(js)?;

    const W: f64 = 760.0;
    const X0: f64 = 20.0;
    let scale = (W - 2.0 * X0) / window_dt.max(1) as f64;
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="130" font-family="sans-serif" font-size="11">"#
    );
    let _ = write!(
        s,
        r##"<line x1="{X0}" y1="60" x2="{}" y2="60" stroke="#999"/>"##,
        W - X0
    );
    let mut t = 0u64;
    let mut flip = false;
    for item in &layout.items {
        match item {
            LayoutItem::Delay(d) => {
                if *d > 0 {
                    let mid = X0 + (t as f64 + *d as f64 / 2.0) * scale;
                    let _ = write!(
                        s,
                        r##"<text x="{mid:.1}" y="100" text-anchor="middle" fill="#666">{d}</text>"##
                    );
                }
            }
            LayoutItem::Gate { gate, duration_dt } => {
                let x = X0 + t as f64 * scale;
                let label = gate.to_string();
                if gate.is_virtual() {
                    let y = if flip { 25.0 } else { 38.0 };
                    flip = !flip;
                    let _ = write!(
                        s,
                        r##"<line x1="{x:.1}" y1="45" x2="{x:.1}" y2="75" stroke="#9467bd" stroke-dasharray="3,2"/><text x="{x:.1}" y="{y}" text-anchor="middle" fill="#9467bd">{label}</text>"##
                    );
                } else {
                    let w = (*duration_dt as f64 * scale).max(2.0);
                    let _ = write!(
                        s,
                        r##"<rect x="{x:.1}" y="48" width="{w:.1}" height="24" fill="#1f77b4"/><text x="{:.1}" y="88" text-anchor="middle">{label}</text>"##,
                        x + w / 2.0
                    );
                }
            }
        }
        t += item.duration_dt();
    }
    let _ = write!(
        s,
        r##"<text x="{X0}" y="122" fill="#333">{} pulses, {} virtual Z, {} dt total</text></svg>"##,
        layout.pulse_count(),
        layout.virtual_count(),
        layout.total_dt()
    );
    Ok(s)
}

fn device(t1_us: f64, t2_us: f64, kick: f64, dephasing: f64) -> NoiseModel {
    let mut noise = NoiseModel::uniform(
        3,
        QubitNoiseParams {
            t1: t1_us * 1e3,
            t2: t2_us * 1e3,
            static_z_rate: 0.0,
            static_x_rate: 0.0,
        },
    );
    noise.mcm.neighbor_z_kick = kick;
    noise.mcm.neighbor_extra_dephasing = dephasing;
    noise
}

/// Exact Bell fidelity against the number of MCMs for the fixed sequences, as SVG.
#[wasm_bindgen]
pub fn mcm_sweep_svg(r_max: u32, t1_us: f64, t2_us: f64, kick: f64, dephasing: f64) -> Result<String, JsError> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Mcm, device(t1_us, t2_us, kick, dephasing));
    cfg.exact = true;
    cfg.replicas = 1;
    cfg.r_values = (1..=r_max.clamp(1, 30) as usize).collect();
    cfg.sequences = vec![DDKind::None, DDKind::Delay, DDKind::Cpmg, DDKind::Xy4, DDKind::Ur6];
    let mut result = run_mcm_experiment(&cfg).map_err(js)?;
    result.rows.retain(|r| r.sequence != "spam_reference");
    Ok(plot_svg(&result))
}

#[derive(Serialize)]
struct Learning {
    /// Mean sampled cost of each iteration's two evaluations.
    costs: Vec<f64>,
    angles_over_pi: [f64; 3],
    fidelity: f64,
    references: Vec<(String, f64)>,
}

/// SPSA on the LDD angles for `r` MCMs; returns the trace and exact reference fidelities as JSON.
#[wasm_bindgen]
pub fn learn_ldd_json(
    r: u32,
    iterations: u32,
    shots: u32,
    seed: u64,
    kick: f64,
    dephasing: f64,
) -> Result<String, JsError> {
    let noise = device(245.0, 175.0, kick, dephasing);
    let mut cfg = ExperimentConfig::new(ExperimentKind::Mcm, noise.clone());
    cfg.spsa.max_iterations = iterations.clamp(1, 500) as usize;
    let dur = cfg.durations;
    let scn = Scenario::mcm(r.max(1) as usize, noise.mcm.duration_dt, true, &dur).map_err(js)?;
    let shots = Some(shots.max(1));
    let trace = spsa_minimize(
        |x: &[f64], rng: &mut RngStream| {
            let (s, _) = scn.filled(DDKind::Ldd, x, &cfg.dd, &dur)?;
            scn.cost(&s, &noise, shots, rng)
        },
        &[0.0; 3],
        &cfg.spsa,
        &mut RngStream::new(seed),
    )
    .map_err(js)?;

    let mut rng = RngStream::new(0);
    let exact = |kind: DDKind, x: &[f64], rng: &mut RngStream| -> Result<f64, JsError> {
        let (s, _) = scn.filled(kind, x, &cfg.dd, &dur).map_err(js)?;
        Ok(scn.cost(&s, &noise, None, rng).map_err(js)?.fidelity())
    };
    let x = &trace.final_params;
    let mut references = Vec::new();
    for kind in [DDKind::None, DDKind::Cpmg, DDKind::Xy4, DDKind::Ur6] {
        references.push((kind.name().to_string(), exact(kind, &[], &mut rng)?));
    }
    let out = Learning {
        costs: trace
            .records
            .iter()
            .map(|r| 0.5 * (r.cost_plus + r.cost_minus))
            .collect(),
        angles_over_pi: std::array::from_fn(|k| x[k] / std::f64::consts::PI),
        fidelity: exact(DDKind::Ldd, x, &mut rng)?,
        references,
    };
    serde_json::to_string(&out).map_err(js)
}
