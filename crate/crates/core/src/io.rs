//! Dataset files, synthetic generators and the JSON result record.
//!
//! Two on-disk dataset formats are supported:
//!
//! * `csv`: one sample per line, comma separated. A single leading header
//!   line is skipped when its first token is not a number.
//! * `raw`: the 5 magic bytes `HPRJ1`, then `n` and `d` as little-endian
//!   `u64`, then `n·d` little-endian `f64` values in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::model::{Dataset, HullSolution, QueryPoint, SolveStats, SolverConfig};

pub const RAW_MAGIC: &[u8; 5] = b"HPRJ1";
const RAW_HEADER: usize = 5 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Raw,
}

impl DatasetFormat {
    /// `raw` for `.raw`/`.bin`/`.hprj` files, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("raw" | "bin" | "hprj") => DatasetFormat::Raw,
            _ => DatasetFormat::Csv,
        }
    }
}

impl std::str::FromStr for DatasetFormat {
    type Err = HullError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "raw" => Ok(DatasetFormat::Raw),
            other => Err(HullError::InvalidConfig(format!(
                "unknown dataset format {other:?}"
            ))),
        }
    }
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> HullError {
    HullError::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn parse_cell(cell: &str, line: usize, col: usize) -> Result<f64> {
    let cell = cell.trim();
    let v: f64 = cell.parse().map_err(|_| {
        parse_err(
            format!("line {line}, column {col}"),
            format!("not a number: {cell:?}"),
        )
    })?;
    if !v.is_finite() {
        return Err(parse_err(
            format!("line {line}, column {col}"),
            format!("non-finite value {cell:?}"),
        ));
    }
    Ok(v)
}

/// Parses CSV text into a dataset. Blank lines are ignored.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut data = Vec::new();
    let mut dims = None;
    let mut rows = 0;
    let mut first = true;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if std::mem::take(&mut first) {
            let head = line.split(',').next().unwrap_or("").trim();
            if head.parse::<f64>().is_err() {
                continue;
            }
        }
        let start = data.len();
        for (col, cell) in line.split(',').enumerate() {
            data.push(parse_cell(cell, line_no, col + 1)?);
        }
        let width = data.len() - start;
        match dims {
            None => dims = Some(width),
            Some(d) if d != width => {
                return Err(parse_err(
                    format!("line {line_no}"),
                    format!("ragged row: expected {d} values, found {width}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let dims = dims.ok_or(HullError::Empty("csv contains no data rows"))?;
    Dataset::new(rows, dims, data)
}

/// Parses the binary `HPRJ1` format.
pub fn parse_raw(bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < RAW_MAGIC.len() || &bytes[..RAW_MAGIC.len()] != RAW_MAGIC {
        return Err(parse_err("byte 0", "bad magic, expected HPRJ1"));
    }
    if bytes.len() < RAW_HEADER {
        return Err(parse_err(
            format!("byte {}", bytes.len()),
            "truncated header",
        ));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let n = read_u64(5);
    let d = read_u64(13);
    let count = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| parse_err("byte 5", format!("size overflow: n = {n}, d = {d}")))?;
    let payload = &bytes[RAW_HEADER..];
    if payload.len() < count {
        return Err(parse_err(
            format!("byte {}", bytes.len()),
            format!(
                "truncated payload: expected {count} bytes of values, found {}",
                payload.len()
            ),
        ));
    }
    if payload.len() > count {
        return Err(parse_err(
            format!("byte {}", RAW_HEADER + count),
            "trailing bytes after payload",
        ));
    }
    let mut data = Vec::with_capacity(count / 8);
    for (k, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(parse_err(
                format!("byte {}", RAW_HEADER + 8 * k),
                "non-finite value",
            ));
        }
        data.push(v);
    }
    Dataset::new(n as usize, d as usize, data)
}

pub fn parse_dataset(bytes: &[u8], format: DatasetFormat) -> Result<Dataset> {
    match format {
        DatasetFormat::Raw => parse_raw(bytes),
        DatasetFormat::Csv => {
            let text = std::str::from_utf8(bytes).map_err(|e| {
                parse_err(format!("byte {}", e.valid_up_to()), "invalid utf-8")
            })?;
            parse_csv(text)
        }
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    parse_dataset(&bytes, format)
}

/// CSV with 17 significant digits per value, so parsing it back is exact.
pub fn to_csv(data: &Dataset) -> String {
    let mut out = String::with_capacity(data.rows() * data.dims() * 24);
    for i in 0..data.rows() {
        for (j, v) in data.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn to_raw(data: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER + 8 * data.as_slice().len());
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&(data.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(data.dims() as u64).to_le_bytes());
    for v in data.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn save_dataset(data: &Dataset, path: &Path, format: DatasetFormat) -> Result<()> {
    match format {
        DatasetFormat::Csv => std::fs::write(path, to_csv(data))?,
        DatasetFormat::Raw => std::fs::write(path, to_raw(data))?,
    }
    Ok(())
}

/// Parses a query given inline (`0.5,1`) or as file contents: one row of
/// comma- or whitespace-separated numbers, optionally after a header line.
pub fn parse_query(text: &str) -> Result<QueryPoint> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut line = lines
        .next()
        .ok_or(HullError::Empty("query has no coordinates"))?;
    let first = line.split([',', ' ', '\t']).next().unwrap_or("");
    if first.parse::<f64>().is_err() {
        if let Some(next) = lines.next() {
            line = next;
        }
    }
    if lines.next().is_some() {
        return Err(parse_err("line 2", "query must be a single row"));
    }
    let coords = line
        .split([',', ' ', '\t'])
        .filter(|c| !c.trim().is_empty())
        .enumerate()
        .map(|(col, c)| parse_cell(c, 1, col + 1))
        .collect::<Result<Vec<_>>>()?;
    QueryPoint::new(coords)
}

/// Synthetic dataset families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// Points on the boundary of the unit square in the first two
    /// coordinates, zeros elsewhere. The four corners come first.
    Square,
    /// i.i.d. standard normal rows.
    Gaussian,
    /// `⌈√n⌉` unit-variance blobs around random centers.
    Clustered,
}

impl std::str::FromStr for GeneratorKind {
    type Err = HullError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(GeneratorKind::Square),
            "gaussian" => Ok(GeneratorKind::Gaussian),
            "clustered" => Ok(GeneratorKind::Clustered),
            other => Err(HullError::InvalidConfig(format!(
                "unknown generator {other:?}"
            ))),
        }
    }
}

pub fn generate(kind: GeneratorKind, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; n * d];
    match kind {
        GeneratorKind::Square => {
            if n < 4 || d < 2 {
                return Err(HullError::InvalidConfig(
                    "square needs n >= 4 and d >= 2".into(),
                ));
            }
            let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            for (i, c) in corners.iter().enumerate() {
                data[i * d] = c[0];
                data[i * d + 1] = c[1];
            }
            // remaining points cycle through bottom, right, top, left edges
            for i in 4..n {
                let s: f64 = rng.random();
                let (x, y) = match (i - 4) % 4 {
                    0 => (s, 0.0),
                    1 => (1.0, s),
                    2 => (s, 1.0),
                    _ => (0.0, s),
                };
                data[i * d] = x;
                data[i * d + 1] = y;
            }
        }
        GeneratorKind::Gaussian => {
            if n == 0 || d == 0 {
                return Err(HullError::InvalidConfig("gaussian needs n, d >= 1".into()));
            }
            for v in data.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
        }
        GeneratorKind::Clustered => {
            if n == 0 || d == 0 {
                return Err(HullError::InvalidConfig("clustered needs n, d >= 1".into()));
            }
            let k = (n as f64).sqrt().ceil() as usize;
            let centers: Vec<f64> = (0..k * d)
                .map(|_| 4.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect();
            for i in 0..n {
                let c = rng.random_range(0..k);
                for j in 0..d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    data[i * d + j] = centers[c * d + j] + z;
                }
            }
        }
    }
    Dataset::new(n, d, data)
}

/// A query strictly outside the hull: the centroid plus twice the hull
/// radius along a random unit direction.
pub fn outside_query(data: &Dataset, seed: u64) -> QueryPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let d = data.dims();
    let mut centroid = vec![0.0; d];
    for i in 0..data.rows() {
        for (c, v) in centroid.iter_mut().zip(data.row(i)) {
            *c += v / data.rows() as f64;
        }
    }
    let radius = (0..data.rows())
        .map(|i| crate::model::sq_dist(data.row(i), &centroid))
        .fold(0.0, f64::max)
        .sqrt()
        .max(1.0);
    let mut u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let len = crate::model::norm(&u).max(f64::MIN_POSITIVE);
    for v in u.iter_mut() {
        *v /= len;
    }
    let coords = centroid
        .iter()
        .zip(&u)
        .map(|(c, ui)| c + 2.0 * radius * ui)
        .collect();
    QueryPoint::new(coords).expect("finite by construction")
}

/// Serializes an instance so a failing comparison can be replayed from one
/// file: a CSV dataset whose header line carries the seed and the query.
pub fn replay_to_string(data: &Dataset, q: &QueryPoint, seed: u64) -> String {
    let coords: Vec<String> = q.coords().iter().map(|v| format!("{v:.16e}")).collect();
    format!("replay seed={seed} query={}\n{}", coords.join(";"), to_csv(data))
}

pub fn parse_replay(text: &str) -> Result<(Dataset, QueryPoint, u64)> {
    let header = text
        .lines()
        .next()
        .ok_or(HullError::Empty("replay file"))?;
    let mut seed = None;
    let mut query = None;
    for field in header.split_whitespace() {
        if let Some(s) = field.strip_prefix("seed=") {
            seed = s.parse::<u64>().ok();
        } else if let Some(s) = field.strip_prefix("query=") {
            query = Some(
                s.split(';')
                    .enumerate()
                    .map(|(i, c)| parse_cell(c, 1, i + 1))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    let seed = seed.ok_or_else(|| parse_err("line 1", "missing seed= in replay header"))?;
    let query = query.ok_or_else(|| parse_err("line 1", "missing query= in replay header"))?;
    let data = parse_csv(text)?;
    let q = QueryPoint::new(query)?;
    data.check_query(&q)?;
    Ok((data, q, seed))
}

/// Machine-readable output of one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub query: Vec<f64>,
    pub distance: f64,
    pub objective: f64,
    pub x_star: Vec<f64>,
    /// Every row with positive weight as `(row, weight)`, heaviest first.
    pub support: Vec<(usize, f64)>,
    pub interior_flag: bool,
    pub converged: bool,
    pub stats: SolveStats,
    pub config: SolverConfig,
    pub wall_time_secs: f64,
}

impl ResultRecord {
    pub fn new(q: &QueryPoint, sol: &HullSolution, cfg: &SolverConfig, wall_time_secs: f64) -> Self {
        let mut support: Vec<(usize, f64)> = sol
            .alpha
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (i, w))
            .collect();
        support.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self {
            query: q.coords().to_vec(),
            distance: sol.distance,
            objective: sol.objective,
            x_star: sol.x_star.clone(),
            support,
            interior_flag: sol.interior_flag,
            converged: sol.converged,
            stats: sol.stats.clone(),
            config: cfg.clone(),
            wall_time_secs,
        }
    }

    /// Fixed-width human-readable summary.
    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<14}{:.12e}", "distance", self.distance).unwrap();
        writeln!(out, "{:<14}{:.12e}", "objective", self.objective).unwrap();
        writeln!(out, "{:<14}{}", "converged", self.converged).unwrap();
        writeln!(out, "{:<14}{}", "interior", self.interior_flag).unwrap();
        writeln!(out, "{:<14}{}", "support size", self.support.len()).unwrap();
        for (row, w) in self.support.iter().take(10) {
            writeln!(out, "  row {row:>8}  weight {w:.6e}").unwrap();
        }
        if self.support.len() > 10 {
            writeln!(out, "  ... {} more", self.support.len() - 10).unwrap();
        }
        out
    }
}
