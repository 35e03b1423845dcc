//! CSV readers and writers for every file format the toolkit exchanges.
//!
//! All formats are headered CSV with fixed column sets:
//!
//! * SINR trace: `user,block,subcarrier,sinr_db`
//! * Empirical CDF: `sinr_db,prob`
//! * Beta table: `mcs_index,modulation,code_rate,code_family,beta`
//! * AWGN reference curve: `snr_db,per`
//! * Calibration set: `profile,subcarrier,sinr_db,per_sim` (long format,
//!   rows grouped by profile id, `per_sim` repeated within a group)
//! * Channel dump: `block,subcarrier,m,k,re,im`
//!
//! Values are written with `{:?}` round-trip float formatting so reading a
//! file back reproduces the numbers bit-exactly. The zero-error flag on
//! reference-curve points is an in-memory annotation only; it does not
//! survive a round trip through CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::abstraction::{BetaEntry, BetaTable, CalSample, RefCurve};
use crate::sinr::{SinrTrace, TraceRow};
use crate::{db_to_linear, dbl, fl, linear_to_db, Error, Real, Result};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn schema_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::CsvSchema {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

/// Headered CSV reader with byte-for-byte field access.
fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                if let csv::ErrorKind::Io(io) = e.into_kind() {
                    io_err(path, io)
                } else {
                    unreachable!()
                }
            }
            _ => schema_err(path, e.to_string()),
        })
}

fn check_header(path: &Path, reader: &mut csv::Reader<File>, want: &[&str]) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| schema_err(path, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != want {
        return Err(schema_err(
            path,
            format!("expected header {:?}, got {:?}", want.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn parse_field<F: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<F> {
    let raw = record
        .get(idx)
        .ok_or_else(|| schema_err(path, format!("missing column '{name}'")))?;
    raw.parse().map_err(|_| {
        schema_err(
            path,
            format!(
                "cannot parse '{raw}' as {name} on line {}",
                record.position().map_or(0, |p| p.line())
            ),
        )
    })
}

/// Writes a SINR trace as `user,block,subcarrier,sinr_db`.
pub fn write_trace<T: Real>(path: impl AsRef<Path>, trace: &SinrTrace<T>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "user,block,subcarrier,sinr_db").map_err(|e| io_err(path, e))?;
    for r in &trace.rows {
        writeln!(
            w,
            "{},{},{},{:?}",
            r.user,
            r.block,
            r.subcarrier,
            dbl(r.sinr_db)
        )
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a SINR trace written by [`write_trace`].
pub fn read_trace<T: Real>(path: impl AsRef<Path>) -> Result<SinrTrace<T>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["user", "block", "subcarrier", "sinr_db"])?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        rows.push(TraceRow {
            user: parse_field(path, &record, 0, "user")?,
            block: parse_field(path, &record, 1, "block")?,
            subcarrier: parse_field(path, &record, 2, "subcarrier")?,
            sinr_db: fl(parse_field::<f64>(path, &record, 3, "sinr_db")?),
        });
    }
    if rows.is_empty() {
        return Err(schema_err(path, "trace has no rows"));
    }
    Ok(SinrTrace { rows })
}

/// Writes an empirical CDF as `sinr_db,prob`.
pub fn write_cdf<T: Real>(path: impl AsRef<Path>, points: &[(T, T)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "sinr_db,prob").map_err(|e| io_err(path, e))?;
    for (x, p) in points {
        writeln!(w, "{:?},{:?}", dbl(*x), dbl(*p)).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads an empirical CDF written by [`write_cdf`].
pub fn read_cdf<T: Real>(path: impl AsRef<Path>) -> Result<Vec<(T, T)>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["sinr_db", "prob"])?;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        points.push((
            fl(parse_field::<f64>(path, &record, 0, "sinr_db")?),
            fl(parse_field::<f64>(path, &record, 1, "prob")?),
        ));
    }
    Ok(points)
}

/// Writes a beta table as `mcs_index,modulation,code_rate,code_family,beta`.
pub fn write_beta_table(path: impl AsRef<Path>, table: &BetaTable) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "mcs_index,modulation,code_rate,code_family,beta").map_err(|e| io_err(path, e))?;
    for e in &table.entries {
        writeln!(
            w,
            "{},{},{:?},{},{:?}",
            e.mcs_index, e.modulation, e.code_rate, e.code_family, e.beta
        )
        .map_err(|err| io_err(path, err))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a beta table written by [`write_beta_table`].
pub fn read_beta_table(path: impl AsRef<Path>) -> Result<BetaTable> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(
        path,
        &mut reader,
        &["mcs_index", "modulation", "code_rate", "code_family", "beta"],
    )?;
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        entries.push(BetaEntry {
            mcs_index: parse_field(path, &record, 0, "mcs_index")?,
            modulation: record.get(1).unwrap_or_default().to_string(),
            code_rate: parse_field(path, &record, 2, "code_rate")?,
            code_family: record.get(3).unwrap_or_default().to_string(),
            beta: parse_field(path, &record, 4, "beta")?,
        });
    }
    if entries.is_empty() {
        return Err(schema_err(path, "beta table has no rows"));
    }
    Ok(BetaTable { entries })
}

/// Writes a reference curve as `snr_db,per`. The floored flags are not
/// persisted.
pub fn write_ref_curve<T: Real>(path: impl AsRef<Path>, curve: &RefCurve<T>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "snr_db,per").map_err(|e| io_err(path, e))?;
    for p in curve.points() {
        writeln!(w, "{:?},{:?}", dbl(p.snr_db), dbl(p.per)).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a reference curve written by [`write_ref_curve`], re-applying the
/// construction checks (and isotonic cleanup, which is a no-op for files the
/// toolkit wrote itself).
pub fn read_ref_curve<T: Real>(path: impl AsRef<Path>) -> Result<RefCurve<T>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["snr_db", "per"])?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        samples.push((
            fl(parse_field::<f64>(path, &record, 0, "snr_db")?),
            fl(parse_field::<f64>(path, &record, 1, "per")?),
        ));
    }
    RefCurve::new(samples)
}

/// Writes a calibration set as `profile,subcarrier,sinr_db,per_sim` rows in
/// long format. Profile SINRs are stored in dB for consistency with traces.
pub fn write_calset<T: Real>(path: impl AsRef<Path>, samples: &[CalSample<T>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "profile,subcarrier,sinr_db,per_sim").map_err(|e| io_err(path, e))?;
    for (i, s) in samples.iter().enumerate() {
        for (n, &g) in s.gammas.iter().enumerate() {
            writeln!(
                w,
                "{},{},{:?},{:?}",
                i,
                n,
                dbl(linear_to_db(g)),
                dbl(s.per_sim)
            )
            .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a calibration set written by [`write_calset`]. Rows of one profile
/// must be contiguous and share the same `per_sim`.
pub fn read_calset<T: Real>(path: impl AsRef<Path>) -> Result<Vec<CalSample<T>>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["profile", "subcarrier", "sinr_db", "per_sim"])?;
    let mut samples: Vec<CalSample<T>> = Vec::new();
    let mut current_id: Option<u64> = None;
    let mut seen = std::collections::HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        let id: u64 = parse_field(path, &record, 0, "profile")?;
        let gamma: T = db_to_linear(fl::<T>(parse_field::<f64>(path, &record, 2, "sinr_db")?));
        let per_sim: T = fl(parse_field::<f64>(path, &record, 3, "per_sim")?);
        if current_id == Some(id) {
            let s = samples.last_mut().expect("current_id implies a sample");
            if s.per_sim != per_sim {
                return Err(schema_err(
                    path,
                    format!("profile {id} has inconsistent per_sim values"),
                ));
            }
            s.gammas.push(gamma);
        } else {
            if !seen.insert(id) {
                return Err(schema_err(
                    path,
                    format!("profile {id} appears in non-contiguous row groups"),
                ));
            }
            current_id = Some(id);
            samples.push(CalSample {
                gammas: vec![gamma],
                per_sim,
            });
        }
    }
    if samples.is_empty() {
        return Err(schema_err(path, "calibration set has no rows"));
    }
    Ok(samples)
}

/// Writes a single SINR profile as `subcarrier,sinr_db` (dB values).
pub fn write_profile<T: Real>(path: impl AsRef<Path>, sinr_db: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "subcarrier,sinr_db").map_err(|e| io_err(path, e))?;
    for (n, v) in sinr_db.iter().enumerate() {
        writeln!(w, "{},{:?}", n, dbl(*v)).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a single SINR profile written by [`write_profile`]. Rows are taken
/// in file order; the subcarrier column is informative only.
pub fn read_profile<T: Real>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["subcarrier", "sinr_db"])?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        let _: usize = parse_field(path, &record, 0, "subcarrier")?;
        let v: f64 = parse_field(path, &record, 1, "sinr_db")?;
        out.push(fl::<T>(v));
    }
    if out.is_empty() {
        return Err(schema_err(path, "profile has no rows"));
    }
    Ok(out)
}

/// Writes a set of SINR profiles as `profile,subcarrier,sinr_db`.
pub fn write_profile_set<T: Real>(path: impl AsRef<Path>, profiles: &[Vec<T>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "profile,subcarrier,sinr_db").map_err(|e| io_err(path, e))?;
    for (p, prof) in profiles.iter().enumerate() {
        for (n, v) in prof.iter().enumerate() {
            writeln!(w, "{},{},{:?}", p, n, dbl(*v)).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// One complex channel entry of a dumped realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDumpRow {
    pub block: usize,
    pub subcarrier: usize,
    pub m: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

/// Writes channel realizations as `block,subcarrier,m,k,re,im`.
pub fn write_channel_dump(path: impl AsRef<Path>, rows: &[ChannelDumpRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "block,subcarrier,m,k,re,im").map_err(|e| io_err(path, e))?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:?},{:?}",
            r.block, r.subcarrier, r.m, r.k, r.re, r.im
        )
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a channel dump written by [`write_channel_dump`].
pub fn read_channel_dump(path: impl AsRef<Path>) -> Result<Vec<ChannelDumpRow>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    check_header(path, &mut reader, &["block", "subcarrier", "m", "k", "re", "im"])?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        rows.push(ChannelDumpRow {
            block: parse_field(path, &record, 0, "block")?,
            subcarrier: parse_field(path, &record, 1, "subcarrier")?,
            m: parse_field(path, &record, 2, "m")?,
            k: parse_field(path, &record, 3, "k")?,
            re: parse_field(path, &record, 4, "re")?,
            im: parse_field(path, &record, 5, "im")?,
        });
    }
    Ok(rows)
}
