//! The per-trial CSV table.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use rdw_core::sim::TrialStats;

use crate::{CliError, CliResult};

pub const COLUMNS: [&str; 8] = [
    "trial_id",
    "method",
    "seed",
    "n_users",
    "common_resets",
    "virtual_distances",
    "wall_time_ms",
    "status",
];

pub const STATUS_OK: &str = "ok";

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    /// `<config>#<trial index>`.
    pub trial_id: String,
    pub method: String,
    pub seed: u64,
    pub n_users: usize,
    /// Missing for failed trials.
    pub common_resets: Option<u64>,
    pub virtual_distances: Vec<f64>,
    pub wall_time_ms: u64,
    pub status: String,
}

impl TrialRow {
    pub fn from_stats(trial_id: String, n_users: usize, stats: &TrialStats) -> Self {
        Self {
            trial_id,
            method: stats.method.name().to_string(),
            seed: stats.seed,
            n_users,
            common_resets: Some(stats.common_resets as u64),
            virtual_distances: stats.virtual_distances.clone(),
            wall_time_ms: stats.wall_time_ms,
            status: STATUS_OK.to_string(),
        }
    }

    pub fn failed(trial_id: String, method: &str, seed: u64, n_users: usize, err: &rdw_core::Error) -> Self {
        Self {
            trial_id,
            method: method.to_string(),
            seed,
            n_users,
            common_resets: None,
            virtual_distances: Vec::new(),
            wall_time_ms: 0,
            status: format!("failed: {err}"),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == STATUS_OK
    }

    /// Part of the trial id before `#`.
    pub fn config(&self) -> &str {
        self.trial_id.split('#').next().unwrap_or("")
    }

    fn record(&self) -> [String; 8] {
        [
            self.trial_id.clone(),
            self.method.clone(),
            self.seed.to_string(),
            self.n_users.to_string(),
            self.common_resets.map(|c| c.to_string()).unwrap_or_default(),
            self.virtual_distances
                .iter()
                .map(|d| format!("{d:.6}"))
                .collect::<Vec<_>>()
                .join(";"),
            self.wall_time_ms.to_string(),
            self.status.clone(),
        ]
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::runtime(e.to_string())
}

/// Serializes rows, with a header line when `header` is set.
pub fn to_csv(rows: &[TrialRow], header: bool) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if header {
        w.write_record(COLUMNS).map_err(csv_err)?;
    }
    for r in rows {
        w.write_record(r.record()).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::runtime(e.to_string()))
}

/// Writes rows to a fresh file.
pub fn write_csv(path: &Path, rows: &[TrialRow]) -> CliResult<()> {
    std::fs::write(path, to_csv(rows, true)?)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

/// Appends rows, writing the header first if the file is new or empty.
pub fn append_csv(path: &Path, rows: &[TrialRow]) -> CliResult<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    f.write_all(&to_csv(rows, fresh)?)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

/// Reads a trial table, naming any missing column and the line of any bad value.
pub fn read_csv(path: &Path) -> CliResult<Vec<TrialRow>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        .clone();
    let mut idx = [0usize; 8];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::usage(format!("{}: missing column '{name}'", path.display()))
        })?;
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::usage(format!("{}: row {line}: {e}", path.display())))?;
        let field = |c: usize| rec.get(idx[c]).unwrap_or("");
        let bad = |c: usize| {
            CliError::usage(format!(
                "{}: row {line}: invalid {} '{}'",
                path.display(),
                COLUMNS[c],
                field(c)
            ))
        };
        let status = field(7).to_string();
        let common_resets = match field(4) {
            "" if status != STATUS_OK => None,
            s => Some(s.parse().map_err(|_| bad(4))?),
        };
        let virtual_distances = if field(5).is_empty() {
            Vec::new()
        } else {
            field(5)
                .split(';')
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(5))?
        };
        rows.push(TrialRow {
            trial_id: field(0).to_string(),
            method: field(1).to_string(),
            seed: field(2).parse().map_err(|_| bad(2))?,
            n_users: field(3).parse().map_err(|_| bad(3))?,
            common_resets,
            virtual_distances,
            wall_time_ms: field(6).parse().map_err(|_| bad(6))?,
            status,
        });
    }
    Ok(rows)
}
