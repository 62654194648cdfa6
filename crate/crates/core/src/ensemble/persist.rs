//! `report.json` + `timeseries.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{EnsembleReport, EnsembleRun, SCHEMA_VERSION};
use crate::diagnostics::{Snapshot, TrajectoryRecord};
use crate::error::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CSV_HEADER: [&str; 11] = [
    "traj_id",
    "t",
    "delta",
    "energy",
    "g_mass_s0",
    "g_mass_s0p1",
    "l2",
    "h1",
    "h2_proxy",
    "sup_u",
    "holder_alpha",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn report_json(report: &EnsembleReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidParameter(format!("report serialisation: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn timeseries_csv(records: &[TrajectoryRecord], path: &Path) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| Error::format(path, e);
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in records {
        for s in &r.snapshots {
            let row = [
                r.trajectory_id.to_string(),
                num(s.t),
                num(s.delta),
                num(s.energy),
                num(s.g_mass_s0),
                num(s.g_mass_s0p1),
                num(s.l2),
                num(s.h1),
                num(s.h2_proxy),
                num(s.sup_u),
                num(s.holder_alpha),
            ];
            w.write_record(&row).map_err(err)?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Writes `report.json` and `timeseries.csv` into `dir`; returns both paths.
pub fn persist(run: &EnsembleRun, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join(REPORT_FILE);
    let csv_path = dir.join(TIMESERIES_FILE);
    fs::write(&json_path, report_json(&run.report)?).map_err(|e| Error::io(&json_path, e))?;
    let csv = timeseries_csv(&run.records, &csv_path)?;
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    Ok((json_path, csv_path))
}

/// Reads a report, checking its schema version first.
pub fn load(path: &Path) -> Result<EnsembleReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    let found = value
        .get("schema_version")
        .and_then(Value::as_str)
        .unwrap_or("<missing>");
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION.to_string(),
            found: found.to_string(),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::format(path, e))
}

/// Reads `report.json` and `timeseries.csv` from `dir` and rebuilds the records.
pub fn load_run(dir: &Path) -> Result<EnsembleRun> {
    let report = load(&dir.join(REPORT_FILE))?;
    let csv_path = dir.join(TIMESERIES_FILE);
    let mut rdr = csv::ReaderBuilder::new()
        .from_path(&csv_path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(
                &csv_path,
                std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            ),
            _ => Error::format(&csv_path, e),
        })?;
    let header = rdr.headers().map_err(|e| Error::format(&csv_path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::format(&csv_path, format!("unexpected header {header:?}")));
    }
    let mut series: BTreeMap<u64, Vec<Snapshot>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::format(&csv_path, e))?;
        let f = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .map_err(|e| Error::format(&csv_path, format!("column {}: {e}", CSV_HEADER[i])))
        };
        let id: u64 = row[0]
            .parse()
            .map_err(|e| Error::format(&csv_path, format!("traj_id: {e}")))?;
        series.entry(id).or_default().push(Snapshot {
            t: f(1)?,
            delta: f(2)?,
            energy: f(3)?,
            g_mass_s0: f(4)?,
            g_mass_s0p1: f(5)?,
            l2: f(6)?,
            h1: f(7)?,
            h2_proxy: f(8)?,
            sup_u: f(9)?,
            holder_alpha: f(10)?,
        });
    }
    let cfg = &report.config;
    let mut records = Vec::with_capacity(report.per_trajectory.len());
    for s in &report.per_trajectory {
        let snapshots = series.remove(&s.trajectory_id).ok_or_else(|| {
            Error::format(&csv_path, format!("no rows for trajectory {}", s.trajectory_id))
        })?;
        if snapshots.len() != s.snapshots {
            return Err(Error::format(
                &csv_path,
                format!(
                    "trajectory {} has {} rows, report says {}",
                    s.trajectory_id,
                    snapshots.len(),
                    s.snapshots
                ),
            ));
        }
        records.push(TrajectoryRecord {
            trajectory_id: s.trajectory_id,
            seed: s.seed,
            config_fingerprint: report.config_fingerprint.clone(),
            scheme: cfg.scheme.kind,
            dim: cfg.domain.d,
            n: cfg.domain.n,
            length: cfg.domain.length,
            s0: cfg.noise.s0,
            alpha: cfg.alpha(),
            snapshots,
            delta_min: s.delta_min,
            g_mass_s0p1_time_integral: s.g_mass_s0p1_time_integral,
            clamp_events: s.clamp_events,
        });
    }
    if let Some(id) = series.keys().next() {
        return Err(Error::format(&csv_path, format!("rows for unknown trajectory {id}")));
    }
    Ok(EnsembleRun { report, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{tests::EXAMPLE, RunConfig};
    use crate::ensemble::{run_ensemble, EnsembleOptions};

    fn run() -> EnsembleRun {
        let v: serde_json::Value = serde_json::from_str(EXAMPLE).unwrap();
        let cfg = RunConfig::from_value(
            v,
            &[
                "domain.n=15".into(),
                "time.T=0.05".into(),
                "time.dt=0.01".into(),
                "time.stride=1".into(),
                "ensemble.n_traj=3".into(),
            ],
        )
        .unwrap();
        run_ensemble(&cfg, EnsembleOptions::default()).unwrap()
    }

    #[test]
    fn round_trip() {
        let r = run();
        let dir = tempfile::tempdir().unwrap();
        let (json, csv) = persist(&r, dir.path()).unwrap();
        assert_eq!(load(&json).unwrap(), r.report);
        assert_eq!(load_run(dir.path()).unwrap(), r);

        let text = fs::read_to_string(csv).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 1 + 3 * 6);
    }

    #[test]
    fn schema_mismatch() {
        let r = run();
        let dir = tempfile::tempdir().unwrap();
        let (json, _) = persist(&r, dir.path()).unwrap();
        let text = fs::read_to_string(&json).unwrap().replace("\"schema_version\": \"1\"", "\"schema_version\": \"2\"");
        fs::write(&json, text).unwrap();
        assert!(matches!(load(&json), Err(Error::SchemaVersion { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let e = load(&dir.path().join("nope.json")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn non_finite_values_survive() {
        assert_eq!(num(f64::INFINITY).parse::<f64>().unwrap(), f64::INFINITY);
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}
