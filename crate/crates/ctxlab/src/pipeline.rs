//! Orchestration of the three numerical experiments: the C-distribution
//! scan, the contextual-subensemble B_max scan, and the C-vs-B_max scatter,
//! plus the on-disk record format.
//!
//! Everything is keyed by (master_seed, index) substreams, so results are
//! independent of worker count and execution order; record files are byte
//! identical across reruns.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chsh::{optimize_chsh, ChshError};
use crate::functionals::{build_c, eval, FunctionalError, MeasurementSettings};
use crate::haar::{random_pure_state, SeedSpec};
use crate::quantum::{BlochDirection, QuantumError, StateVector, C64};
use crate::stats::{summarize_values, Histogram, SummaryStats};

pub const RECORD_HEADER_PREFIX: &str = "# ctxlab-records v1, master_seed=";
pub const RECORD_COLUMNS: &str = "index,re0,im0,re1,im1,re2,im2,re3,im3,c_value,b_max,\
thetaA1,phiA1,thetaA2,phiA2,thetaB1,phiB1,thetaB2,phiB2";

/// Fixed offset separating the B_max optimizer substreams from the state
/// sampling substreams of the same master seed.
pub const BMAX_STREAM_OFFSET: u64 = 1 << 32;

pub const C_RANGE: (f64, f64) = (2.0, 6.0);
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;
pub const B_RANGE: (f64, f64) = (2.0, TSIRELSON);

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("record file header mismatch: found {found:?}, expected `{RECORD_HEADER_PREFIX}<u64>`")]
    VersionMismatch { found: String },
    #[error("record file, line {line}: {msg}")]
    MalformedRow { line: usize, msg: String },
    #[error("no records")]
    EmptyRecords,
    #[error("field {0} missing on record index {1}")]
    MissingField(&'static str, u64),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Chsh(#[from] ChshError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Configuration of one pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_states: u64,
    pub master_seed: u64,
    pub c_threshold: f64,
    pub restarts: u32,
    pub histogram_bins: usize,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_states: 100_000,
            master_seed: 0,
            c_threshold: 4.0,
            restarts: 8,
            histogram_bins: 100,
            workers: 0,
        }
    }
}

/// Per-state row: the state, its C value, and (after the B_max scan) the
/// optimal CHSH violation and angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub index: u64,
    pub amplitudes: [C64; 4],
    pub c_value: f64,
    pub b_max: Option<f64>,
    pub angles: Option<MeasurementSettings>,
    /// Not serialized: set when the optimizer missed the closed-form value.
    pub oracle_disagreement: bool,
}

impl EnsembleRecord {
    pub fn state(&self) -> StateVector {
        StateVector::new_renormalized(self.amplitudes, 1e-6).expect("stored state is normalized")
    }
}

/// Which scalar field of a record a summary runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordField {
    CValue,
    BMax,
}

/// Samples n_states Haar-random states and evaluates the C functional on
/// each; returns the records with summary statistics and histogram.
pub fn run_c_scan(
    cfg: &RunConfig,
) -> Result<(Vec<EnsembleRecord>, SummaryStats, Histogram), PipelineError> {
    let records = compute_c_records(cfg, 0, cfg.n_states)?;
    let (stats, hist) = c_stats(&records, cfg);
    Ok((records, stats, hist))
}

fn c_stats(records: &[EnsembleRecord], cfg: &RunConfig) -> (SummaryStats, Histogram) {
    let values: Vec<f64> = records.iter().map(|r| r.c_value).collect();
    let stats = summarize_values(&values, cfg.c_threshold);
    let hist = Histogram::from_values(&values, C_RANGE.0, C_RANGE.1, cfg.histogram_bins);
    (stats, hist)
}

/// The per-index map of the C scan, restricted to [start, end) so a resumed
/// run can fill in only the missing tail.
pub fn compute_c_records(
    cfg: &RunConfig,
    start: u64,
    end: u64,
) -> Result<Vec<EnsembleRecord>, PipelineError> {
    let (f, r) = build_c();
    r.validate(&f)?;
    let records: Result<Vec<EnsembleRecord>, PipelineError> = (start..end)
        .into_par_iter()
        .map(|k| {
            let psi = random_pure_state(SeedSpec::new(cfg.master_seed, k));
            let c_value = eval(&f, &r, &psi)?;
            Ok(EnsembleRecord {
                index: k,
                amplitudes: *psi.amplitudes(),
                c_value,
                b_max: None,
                angles: None,
                oracle_disagreement: false,
            })
        })
        .collect();
    records
}

/// Subsequence with c_value strictly above the threshold, order preserved.
pub fn filter_contextual(records: &[EnsembleRecord], threshold: f64) -> Vec<EnsembleRecord> {
    records
        .iter()
        .filter(|r| r.c_value > threshold)
        .cloned()
        .collect()
}

/// Fills b_max and angles on every record via the alternating-ascent
/// optimizer; the substream for record k is k + BMAX_STREAM_OFFSET. Returns
/// the number of records whose optimizer value missed the closed form.
pub fn run_bmax_scan(
    records: &mut [EnsembleRecord],
    cfg: &RunConfig,
) -> Result<u64, PipelineError> {
    let results: Result<Vec<_>, PipelineError> = records
        .par_iter()
        .map(|rec| {
            let psi = rec.state();
            let seed = SeedSpec::new(cfg.master_seed, rec.index + BMAX_STREAM_OFFSET);
            Ok(optimize_chsh(&psi, cfg.restarts, seed)?)
        })
        .collect();
    let results = results?;
    let mut disagreements = 0;
    for (rec, opt) in records.iter_mut().zip(results) {
        rec.b_max = Some(opt.b_max);
        rec.angles = Some(opt.settings);
        rec.oracle_disagreement = opt.oracle_disagreement;
        if opt.oracle_disagreement {
            disagreements += 1;
        }
    }
    Ok(disagreements)
}

/// Summary statistics over one field of the records.
pub fn summarize(
    records: &[EnsembleRecord],
    field: RecordField,
    threshold: f64,
) -> Result<SummaryStats, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyRecords);
    }
    let values: Result<Vec<f64>, PipelineError> = records
        .iter()
        .map(|r| match field {
            RecordField::CValue => Ok(r.c_value),
            RecordField::BMax => r.b_max.ok_or(PipelineError::MissingField("b_max", r.index)),
        })
        .collect();
    Ok(summarize_values(&values?, threshold))
}

/// Scatter table plus the largest B_max spread among record pairs whose C
/// values differ by at most `c_window`.
pub struct ScatterData {
    pub points: Vec<(f64, f64)>,
    pub max_b_spread_within_c_window: f64,
    pub c_window: f64,
}

pub fn scatter_data(records: &[EnsembleRecord]) -> Result<ScatterData, PipelineError> {
    const C_WINDOW: f64 = 0.01;
    let mut points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            r.b_max
                .map(|b| (r.c_value, b))
                .ok_or(PipelineError::MissingField("b_max", r.index))
        })
        .collect::<Result<_, _>>()?;
    let unsorted = points.clone();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // sliding window over the C-sorted points
    let mut spread: f64 = 0.0;
    let mut lo = 0usize;
    for hi in 0..points.len() {
        while points[hi].0 - points[lo].0 > C_WINDOW {
            lo += 1;
        }
        for k in lo..hi {
            spread = spread.max((points[hi].1 - points[k].1).abs());
        }
    }
    Ok(ScatterData {
        points: unsorted,
        max_b_spread_within_c_window: spread,
        c_window: C_WINDOW,
    })
}

// --- record file format ------------------------------------------------------

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record_row(r: &EnsembleRecord) -> String {
    let a = &r.amplitudes;
    let angles = match &r.angles {
        Some(s) => format!(
            "{},{},{},{},{},{},{},{}",
            s.a1.theta, s.a1.phi, s.a2.theta, s.a2.phi, s.b1.theta, s.b1.phi, s.b2.theta, s.b2.phi
        ),
        None => ",,,,,,,".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.index,
        a[0].re,
        a[0].im,
        a[1].re,
        a[1].im,
        a[2].re,
        a[2].im,
        a[3].re,
        a[3].im,
        r.c_value,
        fmt_opt(r.b_max),
        angles
    )
}

/// Writes records (index order) with the version header carrying the master
/// seed. Floats use shortest round-trip formatting, so read-back is
/// bit-exact.
pub fn write_records(
    records: &[EnsembleRecord],
    master_seed: u64,
    path: &Path,
) -> Result<(), PipelineError> {
    let mut out = String::new();
    out.push_str(&format!("{RECORD_HEADER_PREFIX}{master_seed}\n"));
    out.push_str(RECORD_COLUMNS);
    out.push('\n');
    for r in records {
        out.push_str(&record_row(r));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

fn parse_row(line: &str, lineno: usize) -> Result<EnsembleRecord, PipelineError> {
    let bad = |msg: String| PipelineError::MalformedRow { line: lineno, msg };
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 19 {
        return Err(bad(format!("expected 19 fields, got {}", fields.len())));
    }
    let index: u64 = fields[0]
        .parse()
        .map_err(|e| bad(format!("bad index: {e}")))?;
    let mut floats = [0.0f64; 9];
    for (k, slot) in floats.iter_mut().enumerate() {
        *slot = fields[1 + k]
            .parse()
            .map_err(|e| bad(format!("bad float in column {}: {e}", k + 2)))?;
    }
    let amplitudes = [
        C64::new(floats[0], floats[1]),
        C64::new(floats[2], floats[3]),
        C64::new(floats[4], floats[5]),
        C64::new(floats[6], floats[7]),
    ];
    let c_value = floats[8];
    let optional = &fields[10..19];
    let all_empty = optional.iter().all(|f| f.is_empty());
    let (b_max, angles) = if all_empty {
        (None, None)
    } else {
        let mut vals = [0.0f64; 9];
        for (k, slot) in vals.iter_mut().enumerate() {
            *slot = optional[k]
                .parse()
                .map_err(|e| bad(format!("bad float in column {}: {e}", k + 11)))?;
        }
        let dir = |t: f64, p: f64| {
            BlochDirection::new(t, p).map_err(|e| PipelineError::MalformedRow {
                line: lineno,
                msg: e.to_string(),
            })
        };
        let settings = MeasurementSettings {
            a1: dir(vals[1], vals[2])?,
            a2: dir(vals[3], vals[4])?,
            b1: dir(vals[5], vals[6])?,
            b2: dir(vals[7], vals[8])?,
        };
        (Some(vals[0]), Some(settings))
    };
    Ok(EnsembleRecord {
        index,
        amplitudes,
        c_value,
        b_max,
        angles,
        oracle_disagreement: false,
    })
}

/// Reads a record file, validating the version header; a malformed row is an
/// error naming its line number. Returns the records and the master seed.
pub fn read_records(path: &Path) -> Result<(Vec<EnsembleRecord>, u64), PipelineError> {
    let text = std::fs::read_to_string(path)?;
    parse_records(&text, false)
}

/// Like [`read_records`], but silently drops a trailing partial row so an
/// interrupted run's checkpoint can be resumed.
pub fn read_records_lenient(path: &Path) -> Result<(Vec<EnsembleRecord>, u64), PipelineError> {
    let text = std::fs::read_to_string(path)?;
    parse_records(&text, true)
}

fn parse_records(text: &str, lenient: bool) -> Result<(Vec<EnsembleRecord>, u64), PipelineError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(PipelineError::VersionMismatch {
        found: String::new(),
    })?;
    let master_seed: u64 = header
        .strip_prefix(RECORD_HEADER_PREFIX)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| PipelineError::VersionMismatch {
            found: header.to_string(),
        })?;
    let mut records = Vec::new();
    let mut saw_columns = false;
    let mut pending: Vec<(usize, &str)> = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if !saw_columns {
            if line != RECORD_COLUMNS {
                return Err(PipelineError::VersionMismatch {
                    found: line.to_string(),
                });
            }
            saw_columns = true;
            continue;
        }
        pending.push((k + 1, line));
    }
    if !saw_columns {
        return Err(PipelineError::VersionMismatch {
            found: "<missing column header>".to_string(),
        });
    }
    // when the file did not end in a newline its final row may be truncated
    let truncated_tail = !text.ends_with('\n');
    let last = pending.len();
    for (slot, (lineno, line)) in pending.into_iter().enumerate() {
        match parse_row(line, lineno) {
            Ok(r) => records.push(r),
            Err(e) => {
                if lenient && slot + 1 == last && truncated_tail {
                    break;
                }
                return Err(e);
            }
        }
    }
    Ok((records, master_seed))
}

/// Runs the C scan writing (or resuming) the record file at `path`:
/// an existing readable prefix with a matching seed is kept and only the
/// missing tail is computed, yielding the same bytes as an uninterrupted
/// run.
pub fn run_c_scan_resumable(
    cfg: &RunConfig,
    path: &Path,
    resume: bool,
) -> Result<(Vec<EnsembleRecord>, SummaryStats, Histogram), PipelineError> {
    let mut records = Vec::new();
    if resume && path.exists() {
        if let Ok((prefix, seed)) = read_records_lenient(path) {
            if seed == cfg.master_seed {
                // keep only a contiguous prefix 0..k
                for (k, r) in prefix.into_iter().enumerate() {
                    if r.index == k as u64 && r.index < cfg.n_states {
                        records.push(r);
                    } else {
                        break;
                    }
                }
            }
        }
    }
    let start = records.len() as u64;
    let tail = compute_c_records(cfg, start, cfg.n_states)?;
    records.extend(tail);
    write_records(&records, cfg.master_seed, path)?;
    let (stats, hist) = c_stats(&records, cfg);
    Ok((records, stats, hist))
}
