//! Wire formats: state specs, measurement records (JSON and CSV+sidecar),
//! coefficient exports, estimate tables, study outputs, and run manifests.
//!
//! Data artifacts are deterministic byte-for-byte for identical inputs; the
//! run manifest is the only place a timestamp appears.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Result, TomoError};
use crate::estimator::{EstimateResult, EstimateSet};
use crate::experiments::{StudyCell, StudyResult};
use crate::padua::{ChebCoeffs, FunctionTag, GridKind, MeasurementRecord, PhaseGrid};
use crate::polar::PolarPoly;
use crate::states::{test_state, DensityMatrix, FockState, PhasePoint};

/// State specification: a pure amplitude list, a general density matrix, or
/// the built-in test state.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StateSpec {
    Pure { amplitudes: Vec<[f64; 2]> },
    Mixed { matrix: Vec<Vec<[f64; 2]>> },
    Test,
}

impl StateSpec {
    pub fn from_fock(state: &FockState) -> Self {
        StateSpec::Pure {
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        match self {
            StateSpec::Pure { amplitudes } => {
                let amps: Vec<C64> = amplitudes.iter().map(|[r, i]| C64::new(*r, *i)).collect();
                Ok(DensityMatrix::from_pure(&FockState::new(amps)?))
            }
            StateSpec::Mixed { matrix } => {
                let rows: Vec<Vec<C64>> = matrix
                    .iter()
                    .map(|row| row.iter().map(|[r, i]| C64::new(*r, *i)).collect())
                    .collect();
                DensityMatrix::new(rows)
            }
            StateSpec::Test => Ok(DensityMatrix::from_pure(&test_state())),
        }
    }
}

pub fn read_state_spec(path: &Path) -> Result<StateSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_state_spec(path: &Path, spec: &StateSpec) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(spec)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    #[serde(rename = "L")]
    half_width: f64,
}

/// Measurement-record wire form:
/// {"grid":{"kind":"padua","n":20,"L":3.0},"function":"husimi_q",
///  "noise_sigma":0.0,"points":[[x,y],...],"values":[...]}
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordJson {
    grid: GridJson,
    function: FunctionTag,
    noise_sigma: f64,
    points: Vec<[f64; 2]>,
    values: Vec<f64>,
}

fn grid_to_json(grid: &PhaseGrid) -> GridJson {
    match grid.kind {
        GridKind::Padua { n } => GridJson {
            kind: "padua".into(),
            n: Some(n),
            rows: None,
            cols: None,
            half_width: grid.half_width,
        },
        GridKind::Equidistant { rows, cols } => GridJson {
            kind: "equidistant".into(),
            n: None,
            rows: Some(rows),
            cols: Some(cols),
            half_width: grid.half_width,
        },
        GridKind::Custom => GridJson {
            kind: "custom".into(),
            n: None,
            rows: None,
            cols: None,
            half_width: grid.half_width,
        },
    }
}

fn grid_from_json(g: &GridJson, points: Vec<PhasePoint>) -> Result<PhaseGrid> {
    let kind = match g.kind.as_str() {
        "padua" => GridKind::Padua {
            n: g.n.ok_or_else(|| TomoError::InvalidInput("padua grid needs \"n\"".into()))?,
        },
        "equidistant" => GridKind::Equidistant {
            rows: g.rows.ok_or_else(|| TomoError::InvalidInput("equidistant grid needs \"rows\"".into()))?,
            cols: g.cols.ok_or_else(|| TomoError::InvalidInput("equidistant grid needs \"cols\"".into()))?,
        },
        "custom" => GridKind::Custom,
        other => return Err(TomoError::InvalidInput(format!("unknown grid kind {other:?}"))),
    };
    Ok(PhaseGrid { kind, half_width: g.half_width, points })
}

pub fn record_to_json_string(record: &MeasurementRecord) -> Result<String> {
    let json = RecordJson {
        grid: grid_to_json(&record.grid),
        function: record.function,
        noise_sigma: record.noise_sigma,
        points: record.grid.points.iter().map(|p| [p.re, p.im]).collect(),
        values: record.values.clone(),
    };
    Ok(serde_json::to_string(&json)?)
}

pub fn write_record(path: &Path, record: &MeasurementRecord) -> Result<()> {
    std::fs::write(path, record_to_json_string(record)? + "\n")?;
    Ok(())
}

pub fn read_record(path: &Path) -> Result<MeasurementRecord> {
    let text = std::fs::read_to_string(path)?;
    let json: RecordJson = serde_json::from_str(&text)?;
    let points = json.points.iter().map(|[x, y]| PhasePoint::new(*x, *y)).collect();
    let grid = grid_from_json(&json.grid, points)?;
    MeasurementRecord::new(grid, json.values, json.noise_sigma, json.function)
}

/// CSV alternative: `x,y,value` rows plus a JSON sidecar holding the grid
/// metadata (written to `<path>.meta.json`).
pub fn write_record_csv(path: &Path, record: &MeasurementRecord) -> Result<()> {
    let mut out = String::from("x,y,value\n");
    for (p, v) in record.grid.points.iter().zip(&record.values) {
        out.push_str(&format!("{},{},{}\n", p.re, p.im, v));
    }
    std::fs::write(path, out)?;
    #[derive(Serialize)]
    struct Meta {
        grid: GridJson,
        function: FunctionTag,
        noise_sigma: f64,
    }
    let meta = Meta {
        grid: grid_to_json(&record.grid),
        function: record.function,
        noise_sigma: record.noise_sigma,
    };
    std::fs::write(sidecar_path(path, "meta"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

/// Reads the CSV record form back, taking grid metadata from the sidecar.
pub fn read_record_csv(path: &Path) -> Result<MeasurementRecord> {
    #[derive(Deserialize)]
    struct Meta {
        grid: GridJson,
        function: FunctionTag,
        noise_sigma: f64,
    }
    let meta: Meta = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path, "meta"))?)?;
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let mut cols = line.split(',');
        let (x, y, v) = (cols.next(), cols.next(), cols.next());
        match (x, y, v) {
            (Some(x), Some(y), Some(v)) => {
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| TomoError::InvalidInput(format!("line {}: {e}", i + 1)))
                };
                points.push(PhasePoint::new(parse(x)?, parse(y)?));
                values.push(parse(v)?);
            }
            _ => return Err(TomoError::InvalidInput(format!("line {}: need x,y,value", i + 1))),
        }
    }
    let grid = grid_from_json(&meta.grid, points)?;
    MeasurementRecord::new(grid, values, meta.noise_sigma, meta.function)
}

pub fn sidecar_path(path: &Path, tag: &str) -> std::path::PathBuf {
    let mut name = path.file_name().map(|s| s.to_owned()).unwrap_or_default();
    name.push(format!(".{tag}.json"));
    path.with_file_name(name)
}

/// Chebyshev-coefficient export: {"n":…,"L":…,"coeffs":[[row a=0],[a=1],…]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChebJson {
    n: usize,
    #[serde(rename = "L")]
    half_width: f64,
    coeffs: Vec<Vec<f64>>,
}

pub fn cheb_to_json_string(c: &ChebCoeffs) -> Result<String> {
    let n = c.order();
    let rows: Vec<Vec<f64>> =
        (0..=n).map(|a| (0..=n).map(|b| c.coeff(a, b)).collect()).collect();
    Ok(serde_json::to_string(&ChebJson { n, half_width: c.half_width(), coeffs: rows })?)
}

pub fn write_cheb(path: &Path, c: &ChebCoeffs) -> Result<()> {
    std::fs::write(path, cheb_to_json_string(c)? + "\n")?;
    Ok(())
}

pub fn read_cheb(path: &Path) -> Result<ChebCoeffs> {
    let text = std::fs::read_to_string(path)?;
    let json: ChebJson = serde_json::from_str(&text)?;
    let mut out = ChebCoeffs::zero(json.n, json.half_width);
    for (a, row) in json.coeffs.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if a + b <= json.n && v != 0.0 {
                out.set_coeff(a, b, v);
            }
        }
    }
    Ok(out)
}

/// Dense-grid CSV `x,y,value`.
pub fn write_grid_csv(path: &Path, grid: &[(PhasePoint, f64)]) -> Result<()> {
    let mut out = String::from("x,y,value\n");
    for (p, v) in grid {
        out.push_str(&format!("{},{},{}\n", p.re, p.im, v));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Polar-coefficient export listing entries with |c| > 1e-14.
pub fn polar_to_json_string(poly: &PolarPoly) -> Result<String> {
    #[derive(Serialize)]
    struct Entry {
        m: usize,
        p: i64,
        re: f64,
        im: f64,
    }
    #[derive(Serialize)]
    struct PolarJson {
        n: usize,
        q_max: usize,
        #[serde(rename = "L")]
        half_width: f64,
        c: Vec<Entry>,
    }
    let entries = poly
        .entries(1e-14)
        .into_iter()
        .map(|(m, p, c)| Entry { m, p, re: c.re, im: c.im })
        .collect();
    Ok(serde_json::to_string(&PolarJson {
        n: poly.order(),
        q_max: poly.q_max(),
        half_width: poly.half_width(),
        c: entries,
    })?)
}

/// Estimate export: array of
/// {"j","k","re","im","sigma_bound","recon_bound":…|null,"n","N","epsilon","K"}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateJson {
    pub j: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
    pub sigma_bound: f64,
    pub recon_bound: Option<f64>,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k_used: f64,
}

impl From<&EstimateResult> for EstimateJson {
    fn from(r: &EstimateResult) -> Self {
        EstimateJson {
            j: r.j,
            k: r.k,
            re: r.value.re,
            im: r.value.im,
            sigma_bound: r.sigma_bound,
            recon_bound: r.recon_bound,
            n: r.n_used,
            n_points: r.n_points,
            epsilon: r.epsilon,
            k_used: r.k_used,
        }
    }
}

pub fn estimates_to_json_string(set: &EstimateSet) -> Result<String> {
    let rows: Vec<EstimateJson> = set.results.iter().map(EstimateJson::from).collect();
    Ok(serde_json::to_string(&rows)?)
}

pub fn write_estimates(path: &Path, set: &EstimateSet) -> Result<()> {
    std::fs::write(path, estimates_to_json_string(set)? + "\n")?;
    Ok(())
}

/// Flat study CSV: n,N,epsilon,j,k,mean_re,mean_im,sigma,delta_rel with empty
/// fields for unavailable columns.
pub fn study_cells_to_csv(cells: &[StudyCell]) -> String {
    let mut out = String::from("n,N,epsilon,j,k,mean_re,mean_im,sigma,delta_rel\n");
    for c in cells {
        let sigma = c.sigma.map(|s| s.to_string()).unwrap_or_default();
        let delta = c.delta.map(|d| d.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.n, c.n_points, c.epsilon, c.j, c.k, c.mean_re, c.mean_im, sigma, delta
        ));
    }
    out
}

pub fn write_study(dir: &Path, result: &StudyResult) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join("study.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(result)? + "\n")?;
    written.push(json_path);
    if !result.cells.is_empty() {
        let p = dir.join("cells.csv");
        std::fs::write(&p, study_cells_to_csv(&result.cells))?;
        written.push(p);
    }
    if !result.equidistant_cells.is_empty() {
        let p = dir.join("equidistant_cells.csv");
        std::fs::write(&p, study_cells_to_csv(&result.equidistant_cells))?;
        written.push(p);
    }
    Ok(written)
}

/// Sidecar describing how an output was produced. The timestamp lives here
/// and only here, so data artifacts stay byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub timestamp_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RunManifest {
    pub fn new(version: &str, subcommand: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: "padua-tomo".into(),
            version: version.into(),
            subcommand: subcommand.into(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            note: None,
        }
    }

    pub fn write_sidecar(&self, data_path: &Path) -> Result<()> {
        let path = sidecar_path(data_path, "manifest");
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
