//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns JSON strings. The `*_json` functions hold the logic
//! and are plain Rust so they can be tested natively.

use pnrq_core::{
    quality, quality_sweep, DetectorConfig, DistributionSet, Parameter, SweepGrid, TruncationPolicy,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page may request, to keep the tab responsive.
const MAX_POINTS: usize = 400;

#[derive(Serialize)]
struct Series {
    n: usize,
    q: Vec<f64>,
}

#[derive(Serialize)]
struct Curve {
    parameter: &'static str,
    x: Vec<f64>,
    series: Vec<Series>,
}

#[derive(Serialize)]
struct Matrix {
    n_out: usize,
    m_max: usize,
    rows: Vec<Vec<f64>>,
    quality_full: f64,
    quality_poisson: f64,
}

fn parse_detector(json: &str) -> Result<DetectorConfig, String> {
    serde_json::from_str(json).map_err(|e| format!("detector: {e}"))
}

fn parse_set(name: &str) -> Result<DistributionSet, String> {
    match name {
        "full" => Ok(DistributionSet::All),
        "poisson" => Ok(DistributionSet::poisson_up_to_n()),
        other => Err(format!("unknown distribution set `{other}`")),
    }
}

fn grid(parameter: Parameter, lo: f64, hi: f64, points: usize) -> Result<SweepGrid, String> {
    if !(2..=MAX_POINTS).contains(&points) || !(hi > lo) {
        return Err(format!("need lo < hi and 2..={MAX_POINTS} points"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let values = (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect();
    SweepGrid::new(parameter.name(), values).map_err(|e| e.to_string())
}

fn curve(detector: &str, set: &str, n_max: usize, parameter: Parameter, grid: SweepGrid) -> Result<String, String> {
    let config = parse_detector(detector)?;
    let set = parse_set(set)?;
    let n_max = n_max.min(config.max_output());
    let ns: Vec<usize> = (1..=n_max).collect();
    let points = quality_sweep(&config, parameter, &grid, &ns, &set, &TruncationPolicy::default())
        .map_err(|e| e.to_string())?;
    let series = ns
        .iter()
        .map(|&n| Series { n, q: points.iter().filter(|p| p.n == n).map(|p| p.result.value).collect() })
        .collect();
    let out = Curve { parameter: parameter.name(), x: grid.values().to_vec(), series };
    Ok(serde_json::to_string(&out).expect("curve serializes"))
}

/// Q_1..Q_{n_max} over `points` efficiencies in `[eta_lo, eta_hi]`.
pub fn quality_vs_eta_json(
    detector: &str,
    set: &str,
    n_max: usize,
    eta_lo: f64,
    eta_hi: f64,
    points: usize,
) -> Result<String, String> {
    curve(detector, set, n_max, Parameter::Eta, grid(Parameter::Eta, eta_lo, eta_hi, points)?)
}

/// Q_1..Q_{n_max} over `points` dark-count probabilities in `[0, dark_hi]`.
pub fn dark_sweep_json(detector: &str, set: &str, n_max: usize, dark_hi: f64, points: usize) -> Result<String, String> {
    curve(detector, set, n_max, Parameter::DarkProb, grid(Parameter::DarkProb, 0.0, dark_hi, points)?)
}

/// The n-detector response `P[k][m]` for `m <= m_show`, with its two qualities.
pub fn response_matrix_json(detector: &str, n: usize, m_show: usize) -> Result<String, String> {
    let config = parse_detector(detector)?;
    let policy = TruncationPolicy::default();
    let matrix = config.response(n, &policy, Some(n as f64)).map_err(|e| e.to_string())?;
    let quality_full = quality(&matrix, n, &DistributionSet::All).map_err(|e| e.to_string())?.value;
    let quality_poisson =
        quality(&matrix, n, &DistributionSet::poisson_up_to_n()).map_err(|e| e.to_string())?.value;
    let m_show = m_show.min(matrix.m_max());
    let rows = (0..=n).map(|k| matrix.row(k)[..=m_show].to_vec()).collect();
    let out = Matrix { n_out: n, m_max: m_show, rows, quality_full, quality_poisson };
    Ok(serde_json::to_string(&out).expect("matrix serializes"))
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn quality_vs_eta(
    detector: &str,
    set: &str,
    n_max: usize,
    eta_lo: f64,
    eta_hi: f64,
    points: usize,
) -> Result<String, JsValue> {
    js(quality_vs_eta_json(detector, set, n_max, eta_lo, eta_hi, points))
}

#[wasm_bindgen]
pub fn dark_sweep(detector: &str, set: &str, n_max: usize, dark_hi: f64, points: usize) -> Result<String, JsValue> {
    js(dark_sweep_json(detector, set, n_max, dark_hi, points))
}

#[wasm_bindgen]
pub fn response_matrix(detector: &str, n: usize, m_show: usize) -> Result<String, JsValue> {
    js(response_matrix_json(detector, n, m_show))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const SPATIAL8: &str = r#"{"detector":"spatial","elements":8,"click":{"eta":1.0,"dark_prob":0.0}}"#;

    #[test]
    fn eta_curve_ends_at_ideal_values() {
        let v: Value = serde_json::from_str(&quality_vs_eta_json(SPATIAL8, "full", 3, 0.5, 1.0, 11).unwrap()).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), 11);
        let q3 = v["series"][2]["q"].as_array().unwrap();
        assert!((q3.last().unwrap().as_f64().unwrap() - 0.65625).abs() < 1e-12);
    }

    #[test]
    fn dark_curve_starts_dark_free() {
        let det = r#"{"detector":"spatial","elements":16,"click":{"eta":0.95,"dark_prob":0.0}}"#;
        let v: Value = serde_json::from_str(&dark_sweep_json(det, "full", 6, 0.1, 21).unwrap()).unwrap();
        assert_eq!(v["series"].as_array().unwrap().len(), 6);
        assert!((v["series"][0]["q"][0].as_f64().unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn matrix_columns_are_stochastic() {
        let v: Value = serde_json::from_str(&response_matrix_json(SPATIAL8, 3, 10).unwrap()).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 4);
        for m in 0..=10 {
            let s: f64 = rows.iter().map(|r| r[m].as_f64().unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!((v["quality_full"].as_f64().unwrap() - 0.65625).abs() < 1e-12);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(quality_vs_eta_json("{}", "full", 3, 0.5, 1.0, 11).is_err());
        assert!(quality_vs_eta_json(SPATIAL8, "uniform", 3, 0.5, 1.0, 11).is_err());
        assert!(quality_vs_eta_json(SPATIAL8, "full", 3, 1.0, 0.5, 11).is_err());
        assert!(dark_sweep_json(SPATIAL8, "full", 3, 0.1, 1).is_err());
    }
}
