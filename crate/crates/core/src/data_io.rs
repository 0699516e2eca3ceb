//! Quote ingestion, duration construction, deseasonalization and CSV files.
//!
//! Durations are measured between one-tick moves of the mid-price: a
//! reference mid is set at the first quote, an event fires as soon as the
//! mid sits at least one tick away from the reference, and the reference is
//! then reset to the current mid. A single multi-tick jump therefore counts
//! once.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastRecord;
use crate::simulate::EventSeries;

/// Replacement for a zero duration caused by duplicated timestamps.
pub const MIN_DURATION: f64 = 1e-9;

/// Relative slack on the one-tick threshold, absorbing decimal price noise.
const TICK_SLACK: f64 = 1e-9;

/// One top-of-book quote update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LobEvent {
    pub timestamp: f64,
    pub best_bid: f64,
    pub best_ask: f64,
}

impl LobEvent {
    pub fn mid(&self) -> f64 {
        0.5 * (self.best_bid + self.best_ask)
    }

    fn check(&self, row: usize) -> Result<()> {
        if !(self.timestamp >= 0.0 && self.timestamp.is_finite()) {
            return Err(Error::Format {
                row,
                message: format!("timestamp must be non-negative, got {}", self.timestamp),
            });
        }
        if !(self.best_bid > 0.0 && self.best_ask.is_finite()) {
            return Err(Error::Format {
                row,
                message: "prices must be positive and finite".into(),
            });
        }
        if self.best_ask < self.best_bid {
            return Err(Error::Format {
                row,
                message: format!("best_ask {} is below best_bid {}", self.best_ask, self.best_bid),
            });
        }
        Ok(())
    }
}

/// Durations built from a quote stream, with construction metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationSeries {
    /// Arrival times are relative to `origin_time`.
    pub series: EventSeries,
    pub tick_size: f64,
    /// Timestamp of the first quote, which anchors the first duration.
    pub origin_time: f64,
    /// Input positions of the anchor and of every emitted event.
    pub event_indices: Vec<usize>,
    pub zero_durations_replaced: usize,
    pub source: Option<String>,
}

impl DurationSeries {
    /// Absolute event times, starting with the anchor.
    pub fn event_times(&self) -> Vec<f64> {
        std::iter::once(self.origin_time)
            .chain(self.series.arrival_times.iter().map(|t| self.origin_time + t))
            .collect()
    }
}

/// One-tick mid-price durations from time-ordered quotes.
///
/// Row numbers in errors are 1-based positions in `events`.
pub fn build_durations(events: &[LobEvent], tick_size: f64) -> Result<DurationSeries> {
    if !(tick_size > 0.0 && tick_size.is_finite()) {
        return Err(Error::domain(format!("tick_size must be positive, got {tick_size}")));
    }
    let Some(first) = events.first() else {
        return Err(Error::InsufficientData("no quote events".into()));
    };
    first.check(1)?;
    let mut reference = first.mid();
    let mut last_time = first.timestamp;
    let mut times = vec![first.timestamp];
    let mut event_indices = vec![0];
    for (i, ev) in events.iter().enumerate().skip(1) {
        ev.check(i + 1)?;
        if ev.timestamp < last_time {
            return Err(Error::Format {
                row: i + 1,
                message: format!("timestamp {} precedes the previous {}", ev.timestamp, last_time),
            });
        }
        last_time = ev.timestamp;
        let mid = ev.mid();
        if (mid - reference).abs() / tick_size >= 1.0 - TICK_SLACK {
            times.push(ev.timestamp);
            event_indices.push(i);
            reference = mid;
        }
    }
    if times.len() < 2 {
        return Err(Error::InsufficientData(
            "the mid-price never moved by a full tick".into(),
        ));
    }
    let mut replaced = 0;
    let durations: Vec<f64> = times
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > 0.0 {
                d
            } else {
                replaced += 1;
                MIN_DURATION
            }
        })
        .collect();
    Ok(DurationSeries {
        series: EventSeries::from_durations(durations)?,
        tick_size,
        origin_time: first.timestamp,
        event_indices,
        zero_durations_replaced: replaced,
        source: None,
    })
}

/// Divides each duration by the step-interpolated factor at its event time.
///
/// `factors` are `(absolute time, factor)` knots; a factor applies from its
/// time until the next knot.
pub fn deseasonalize(series: &DurationSeries, factors: &[(f64, f64)]) -> Result<DurationSeries> {
    if factors.is_empty() {
        return Err(Error::domain("factor table is empty"));
    }
    if let Some((t, f)) = factors.iter().find(|(t, f)| !(*f > 0.0 && f.is_finite() && t.is_finite())) {
        return Err(Error::domain(format!("invalid seasonal factor {f} at time {t}")));
    }
    let mut knots = factors.to_vec();
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s = &series.series;
    let scaled = s
        .durations
        .iter()
        .zip(&s.arrival_times)
        .map(|(&tau, &rel)| {
            let t = series.origin_time + rel;
            let k = knots.partition_point(|(kt, _)| *kt <= t);
            if k == 0 {
                return Err(Error::domain(format!(
                    "event time {t} precedes the first seasonal factor at {}",
                    knots[0].0
                )));
            }
            Ok(tau / knots[k - 1].1)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DurationSeries {
        series: EventSeries::from_durations(scaled)?,
        ..series.clone()
    })
}

fn csv_error(row: usize, err: impl std::fmt::Display) -> Error {
    Error::Format {
        row,
        message: err.to_string(),
    }
}

/// Opens a CSV file and checks that its header starts with `required`.
/// Returns the reader and the column positions of `required` and `optional`.
fn open_csv(path: &Path, required: &[&str], optional: &[&str]) -> Result<(csv::Reader<File>, Vec<Option<usize>>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers().map_err(|e| csv_error(1, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut columns = Vec::new();
    for name in required {
        match find(name) {
            Some(i) => columns.push(Some(i)),
            None => {
                return Err(Error::Format {
                    row: 1,
                    message: format!("missing header column '{name}' (expected {})", required.join(",")),
                })
            }
        }
    }
    columns.extend(optional.iter().map(|n| find(n)));
    Ok((reader, columns))
}

fn field(record: &csv::StringRecord, col: usize, row: usize, name: &str) -> Result<f64> {
    let raw = record.get(col).ok_or_else(|| csv_error(row, format!("missing field '{name}'")))?;
    raw.parse::<f64>()
        .map_err(|_| csv_error(row, format!("field '{name}' is not a number: '{raw}'")))
}

/// Reads `timestamp,best_bid,best_ask` rows; errors name the file line.
pub fn read_events(path: impl AsRef<Path>) -> Result<Vec<LobEvent>> {
    let (mut reader, cols) = open_csv(path.as_ref(), &["timestamp", "best_bid", "best_ask"], &[])?;
    let mut out: Vec<LobEvent> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(row, e))?;
        let ev = LobEvent {
            timestamp: field(&record, cols[0].unwrap(), row, "timestamp")?,
            best_bid: field(&record, cols[1].unwrap(), row, "best_bid")?,
            best_ask: field(&record, cols[2].unwrap(), row, "best_ask")?,
        };
        ev.check(row)?;
        if let Some(prev) = out.last() {
            if ev.timestamp < prev.timestamp {
                return Err(csv_error(row, "timestamps are not in order"));
            }
        }
        out.push(ev);
    }
    Ok(out)
}

/// Writes to a temporary file next to `path` and renames it into place.
pub fn atomic_write<F>(path: impl AsRef<Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_events(path: impl AsRef<Path>, events: &[LobEvent]) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "timestamp,best_bid,best_ask")?;
        for e in events {
            writeln!(w, "{},{},{}", e.timestamp, e.best_bid, e.best_ask)?;
        }
        Ok(())
    })
}

/// Writes `arrival_time,duration[,latent_state]` with round-trip precision.
pub fn write_series(path: impl AsRef<Path>, series: &EventSeries) -> Result<()> {
    atomic_write(path, |w| {
        match &series.latent_path {
            Some(path) => {
                writeln!(w, "arrival_time,duration,latent_state")?;
                for ((t, d), x) in series.arrival_times.iter().zip(&series.durations).zip(path) {
                    writeln!(w, "{t},{d},{x}")?;
                }
            }
            None => {
                writeln!(w, "arrival_time,duration")?;
                for (t, d) in series.arrival_times.iter().zip(&series.durations) {
                    writeln!(w, "{t},{d}")?;
                }
            }
        }
        Ok(())
    })
}

pub fn read_series(path: impl AsRef<Path>) -> Result<EventSeries> {
    let (mut reader, cols) = open_csv(path.as_ref(), &["arrival_time", "duration"], &["latent_state"])?;
    let mut arrival_times = Vec::new();
    let mut durations = Vec::new();
    let mut latent = cols[2].map(|_| Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(row, e))?;
        let t = field(&record, cols[0].unwrap(), row, "arrival_time")?;
        let d = field(&record, cols[1].unwrap(), row, "duration")?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(csv_error(row, format!("duration must be positive, got {d}")));
        }
        if let (Some(path), Some(c)) = (latent.as_mut(), cols[2]) {
            path.push(field(&record, c, row, "latent_state")?);
        }
        arrival_times.push(t);
        durations.push(d);
    }
    if durations.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} holds no durations",
            path.as_ref().display()
        )));
    }
    Ok(EventSeries {
        durations,
        arrival_times,
        latent_path: latent,
    })
}

/// Reads a `time,factor` table.
pub fn read_factors(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let (mut reader, cols) = open_csv(path.as_ref(), &["time", "factor"], &[])?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(row, e))?;
        out.push((
            field(&record, cols[0].unwrap(), row, "time")?,
            field(&record, cols[1].unwrap(), row, "factor")?,
        ));
    }
    Ok(out)
}

/// Writes forecast records as `event_index,window_id,predicted,realized,latent_state`.
pub fn write_forecasts(path: impl AsRef<Path>, records: &[ForecastRecord]) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "event_index,window_id,predicted,realized,latent_state")?;
        for r in records {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.event_index, r.window_id, r.predicted, r.realized, r.latent_state
            )?;
        }
        Ok(())
    })
}

pub fn read_forecasts(path: impl AsRef<Path>) -> Result<Vec<ForecastRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| csv_error(i + 2, e)))
        .collect()
}

/// Two-column numeric CSV for plot data.
pub fn write_pairs(path: impl AsRef<Path>, header: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "{},{}", header.0, header.1)?;
        for (a, b) in rows {
            writeln!(w, "{a},{b}")?;
        }
        Ok(())
    })
}
