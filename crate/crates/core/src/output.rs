//! Plot-ready CSV/JSON artifacts, atomic writes and metadata sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ctqw::CtqwState;
use crate::distribution::{Distribution, LOAD_NORM_TOL};
use crate::dtqw::WalkerState;
use crate::error::{Error, Result};

/// One site of a distribution file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRow {
    pub n: i64,
    #[serde(rename = "re_L")]
    pub re_l: f64,
    #[serde(rename = "im_L")]
    pub im_l: f64,
    #[serde(rename = "re_R")]
    pub re_r: f64,
    #[serde(rename = "im_R")]
    pub im_r: f64,
    pub prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

impl SiteRow {
    fn new(n: i64, l: Complex64, r: Complex64, prob: f64, method: Option<&str>) -> Self {
        SiteRow {
            n,
            re_l: l.re,
            im_l: l.im,
            re_r: r.re,
            im_r: r.im,
            prob,
            method: method.map(str::to_owned),
        }
    }
}

pub fn walker_rows(state: &WalkerState, method: Option<&str>) -> Vec<SiteRow> {
    state
        .iter()
        .map(|(n, l, r)| SiteRow::new(n, l, r, l.norm_sqr() + r.norm_sqr(), method))
        .collect()
}

/// The scalar amplitude goes in the `L` columns; the `R` columns are zero.
pub fn ctqw_rows(state: &CtqwState, method: Option<&str>) -> Vec<SiteRow> {
    state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| SiteRow::new(state.lo + i as i64, *a, Complex64::new(0.0, 0.0), a.norm_sqr(), method))
        .collect()
}

/// Probabilities only; amplitude columns are zero.
pub fn distribution_rows(d: &Distribution, method: Option<&str>) -> Vec<SiteRow> {
    let z = Complex64::new(0.0, 0.0);
    d.iter().map(|(n, p)| SiteRow::new(n, z, z, p, method)).collect()
}

pub fn rows_to_csv(rows: &[SiteRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// `{"t": .., "rows": [..]}`.
pub fn rows_to_json(t: f64, rows: &[SiteRow]) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Doc<'a> {
        t: f64,
        rows: &'a [SiteRow],
    }
    let mut out = serde_json::to_vec_pretty(&Doc { t, rows })?;
    out.push(b'\n');
    Ok(out)
}

/// Generic serializable record list as CSV.
pub fn records_to_csv<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Configuration(format!("csv: {other:?}")),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Provenance stored next to a data file. Data files themselves carry no
/// timestamps so that reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub created_unix: u64,
    pub data_file: String,
    pub config: &'a C,
}

pub fn write_with_sidecar<C: Serialize>(path: &Path, bytes: &[u8], config: &C) -> Result<()> {
    write_atomic(path, bytes)?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        data_file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        config,
    };
    write_atomic(&sidecar_path(path), &to_json_bytes(&meta)?)
}

/// Reads a distribution CSV back, filling missing sites with zero, and checks
/// that the probabilities sum to one within [`LOAD_NORM_TOL`].
pub fn load_distribution_csv(path: &Path) -> Result<Distribution> {
    let bytes = fs::read(path)?;
    parse_distribution_csv(&bytes)
}

pub fn parse_distribution_csv(bytes: &[u8]) -> Result<Distribution> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let mut rows: Vec<(i64, f64)> = Vec::new();
    for rec in rdr.deserialize::<SiteRow>() {
        let row = rec.map_err(csv_err)?;
        rows.push((row.n, row.prob));
    }
    if rows.is_empty() {
        return Err(Error::Configuration("distribution file has no rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    if rows.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Configuration("distribution file repeats a site".into()));
    }
    let start = rows[0].0;
    let end = rows[rows.len() - 1].0;
    let mut probs = vec![0.0; (end - start + 1) as usize];
    for (n, p) in rows {
        probs[(n - start) as usize] = p;
    }
    let d = Distribution::new(start, probs)?;
    d.check_normalized(LOAD_NORM_TOL)?;
    Ok(d)
}
