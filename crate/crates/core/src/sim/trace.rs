//! Per-step simulation record and its CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 13] = [
    "t",
    "v_true",
    "v_hat",
    "omega_r",
    "omega_r_hat",
    "omega_g",
    "omega_g_hat",
    "theta_s",
    "theta_s_hat",
    "beta",
    "beta_d",
    "t_g",
    "h1",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub v_true: f64,
    pub v_hat: f64,
    pub omega_r: f64,
    pub omega_r_hat: f64,
    pub omega_g: f64,
    pub omega_g_hat: f64,
    pub theta_s: f64,
    pub theta_s_hat: f64,
    pub beta: f64,
    pub beta_d: f64,
    pub t_g: f64,
    pub h1: f64,
}

impl TraceRow {
    pub fn to_array(&self) -> [f64; 13] {
        [
            self.t,
            self.v_true,
            self.v_hat,
            self.omega_r,
            self.omega_r_hat,
            self.omega_g,
            self.omega_g_hat,
            self.theta_s,
            self.theta_s_hat,
            self.beta,
            self.beta_d,
            self.t_g,
            self.h1,
        ]
    }

    pub fn from_array(a: [f64; 13]) -> Self {
        Self {
            t: a[0],
            v_true: a[1],
            v_hat: a[2],
            omega_r: a[3],
            omega_r_hat: a[4],
            omega_g: a[5],
            omega_g_hat: a[6],
            theta_s: a[7],
            theta_s_hat: a[8],
            beta: a[9],
            beta_d: a[10],
            t_g: a[11],
            h1: a[12],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub dt: f64,
    pub rows: Vec<TraceRow>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::InvalidParameter("cannot write an empty trace".into()));
        }
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Numerical(format!("csv write failed: {e}"));
        w.write_record(TRACE_HEADER).map_err(err)?;
        // `{}` on f64 is the shortest representation that round-trips
        for row in &self.rows {
            w.write_record(row.to_array().iter().map(|v| v.to_string())).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }

    /// The file is only created once the trace is known to be non-empty.
    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.to_csv_string()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::parse(origin, e.to_string()))?;
        if header.iter().ne(TRACE_HEADER) {
            return Err(Error::parse(origin, "unexpected trace header"));
        }
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
            let mut a = [0.0; 13];
            for (slot, field) in a.iter_mut().zip(rec.iter()) {
                *slot = field
                    .parse()
                    .map_err(|e| Error::parse(origin, format!("row {}: {e}", k + 1)))?;
            }
            rows.push(TraceRow::from_array(a));
        }
        let dt = if rows.len() > 1 { rows[1].t - rows[0].t } else { 0.0 };
        Ok(Self { dt, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> SimTrace {
        SimTrace {
            dt: 0.1,
            rows: (0..n)
                .map(|k| {
                    let mut a = [0.0; 13];
                    for (j, v) in a.iter_mut().enumerate() {
                        *v = (k as f64 + 0.1) / 3.0 * (j as f64 + 1.0).sqrt();
                    }
                    a[0] = k as f64 * 0.1;
                    TraceRow::from_array(a)
                })
                .collect(),
        }
    }

    #[test]
    fn csv_line_count_and_header() {
        let text = sample(3).to_csv_string().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], TRACE_HEADER.join(","));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample(50);
        let text = t.to_csv_string().unwrap();
        let back = SimTrace::read_csv(text.as_bytes(), "mem").unwrap();
        assert_eq!(back.rows, t.rows);
    }

    #[test]
    fn empty_trace_creates_no_file() {
        let dir = std::env::temp_dir().join(format!("trace-empty-{}", std::process::id()));
        let _ = std::fs::remove_file(&dir);
        assert!(SimTrace::default().emit_csv(&dir).is_err());
        assert!(!dir.exists());
    }
}
