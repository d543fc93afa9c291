//! CSV time series and radial profiles.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elasticity::nodal_openings;
use crate::error::{Error, Result};
use crate::model::{MaterialParams, State};
use crate::quadrature::QuadratureEngine;
use crate::solver::StepReport;

pub const TIMESERIES_HEADER: [&str; 10] = [
    "t", "a", "ell", "lag", "K_I", "p0", "w0", "inner_iters", "outer_iters", "mass_residual",
];

pub const PROFILE_HEADER: [&str; 3] = ["r", "p", "w"];

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub a: f64,
    pub ell: f64,
    pub lag: f64,
    pub k_i: f64,
    pub p0: f64,
    pub w0: f64,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub mass_residual: f64,
}

impl TimeSeriesRecord {
    pub fn from_report(rep: &StepReport, w0: f64) -> Self {
        let s = &rep.state;
        Self {
            t: s.time,
            a: s.crack_radius,
            ell: s.fluid_radius(),
            lag: s.lag(),
            k_i: rep.sif,
            p0: s.pressures[0],
            w0,
            inner_iters: rep.inner_iters,
            outer_iters: rep.outer_iters,
            mass_residual: rep.mass_residual,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn line(w: &mut impl Write, fields: &[String], path: &Path) -> Result<()> {
    writeln!(w, "{}", fields.join(",")).map_err(io_err(path))
}

/// Incremental writer so a run can stream records as steps are accepted.
pub struct TimeSeriesWriter {
    out: BufWriter<File>,
    path: std::path::PathBuf,
}

impl TimeSeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = create(path)?;
        let head: Vec<String> = TIMESERIES_HEADER.iter().map(|s| s.to_string()).collect();
        line(&mut out, &head, path)?;
        Ok(Self {
            out,
            path: path.to_path_buf(),
        })
    }

    pub fn push(&mut self, r: &TimeSeriesRecord) -> Result<()> {
        let fields = vec![
            num(r.t),
            num(r.a),
            num(r.ell),
            num(r.lag),
            num(r.k_i),
            num(r.p0),
            num(r.w0),
            r.inner_iters.to_string(),
            r.outer_iters.to_string(),
            num(r.mass_residual),
        ];
        line(&mut self.out, &fields, &self.path)
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(io_err(&self.path))
    }
}

pub fn write_timeseries(records: &[TimeSeriesRecord], path: &Path) -> Result<()> {
    let mut w = TimeSeriesWriter::create(path)?;
    for r in records {
        w.push(r)?;
    }
    w.finish()
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TIMESERIES_HEADER) {
        return Err(Error::config(format!("unexpected header {header:?}"), Some(path.display().to_string())));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let f = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| Error::config(format!("bad number `{}`", &row[i]), Some(path.display().to_string())))
        };
        let u = |i: usize| -> Result<usize> {
            row[i]
                .parse()
                .map_err(|_| Error::config(format!("bad count `{}`", &row[i]), Some(path.display().to_string())))
        };
        out.push(TimeSeriesRecord {
            t: f(0)?,
            a: f(1)?,
            ell: f(2)?,
            lag: f(3)?,
            k_i: f(4)?,
            p0: f(5)?,
            w0: f(6)?,
            inner_iters: u(7)?,
            outer_iters: u(8)?,
            mass_residual: f(9)?,
        });
    }
    Ok(out)
}

/// Writes r, p and w at the nodes of the fluid mesh.
pub fn write_profiles(state: &State, mat: &MaterialParams, q: &QuadratureEngine, path: &Path) -> Result<()> {
    let w = nodal_openings(state, mat, q)?;
    let mut out = create(path)?;
    let head: Vec<String> = PROFILE_HEADER.iter().map(|s| s.to_string()).collect();
    line(&mut out, &head, path)?;
    for ((r, p), w) in state.mesh.node_positions().into_iter().zip(&state.pressures).zip(w) {
        line(&mut out, &[num(r), num(*p), num(w)], path)?;
    }
    out.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize) -> TimeSeriesRecord {
        let x = i as f64;
        TimeSeriesRecord {
            t: 5e-7 * x,
            a: 0.02 + 1e-9 * x / 3.0,
            ell: 0.01 + std::f64::consts::PI * 1e-7 * x,
            lag: 0.01,
            k_i: 1.234_567_890_123_456_7e4,
            p0: -1.0 / 3.0,
            w0: 1e-300,
            inner_iters: i,
            outer_iters: 1,
            mass_residual: f64::MIN_POSITIVE,
        }
    }

    #[test]
    fn empty_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ts.csv");
        write_timeseries(&[], &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), TIMESERIES_HEADER.join(",") + "\n");
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/ts.csv");
        let recs: Vec<_> = (0..7).map(record).collect();
        write_timeseries(&recs, &p).unwrap();
        assert_eq!(read_timeseries(&p).unwrap(), recs);
        let text = fs::read_to_string(&p).unwrap();
        assert!(!text.contains('\r'));
    }

    #[test]
    fn profile_spans_the_fluid_mesh() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("profile.csv");
        let s = State::initial(0.02, 0.01, 5, 1e6).unwrap();
        let m = MaterialParams::new(4e10, 0.0, 5e5, 0.1, 0.0).unwrap();
        write_profiles(&s, &m, &QuadratureEngine::default(), &p).unwrap();
        let mut rdr = csv::Reader::from_path(&p).unwrap();
        let rows: Vec<Vec<f64>> = rdr
            .records()
            .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0][0], 0.0);
        assert_eq!(rows[5][0], 0.01);
        assert!(rows.iter().all(|r| r[2] > 0.0));
    }
}
