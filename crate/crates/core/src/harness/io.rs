//! Trace and spectrum CSV files, JSON sidecars and atomic writes.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::QubitColour;
use crate::trace::EvolutionTrace;

pub const TRACE_COLUMNS: [&str; 14] = [
    "instance_id",
    "ansatz",
    "step",
    "gate",
    "qubits",
    "rel_depth",
    "hc_expect",
    "sre",
    "d_sre",
    "s0_T_literal",
    "s0_Tperm_literal",
    "s0_T_fs",
    "s0_Tperm_fs",
    "d_s0_perm_literal",
];

pub const SPECTRUM_COLUMNS: [&str; 5] = ["step", "rank", "p0", "pplus", "pplusi"];

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back to the rounded value.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    if rounded == 0.0 {
        return "0".into();
    }
    let abs = rounded.abs();
    if (1e-5..1e15).contains(&abs) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// One row of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub instance_id: String,
    pub ansatz: String,
    pub step: usize,
    pub gate: String,
    pub qubits: String,
    pub rel_depth: f64,
    pub hc_expect: f64,
    pub sre: Option<f64>,
    pub d_sre: Option<f64>,
    #[serde(rename = "s0_T_literal")]
    pub s0_t_literal: f64,
    #[serde(rename = "s0_Tperm_literal")]
    pub s0_tperm_literal: Option<f64>,
    #[serde(rename = "s0_T_fs")]
    pub s0_t_fs: f64,
    #[serde(rename = "s0_Tperm_fs")]
    pub s0_tperm_fs: Option<f64>,
    pub d_s0_perm_literal: Option<f64>,
}

impl TraceRow {
    fn fields(&self) -> [String; 14] {
        [
            self.instance_id.clone(),
            self.ansatz.clone(),
            self.step.to_string(),
            self.gate.clone(),
            self.qubits.clone(),
            format_float(self.rel_depth),
            format_float(self.hc_expect),
            format_opt(self.sre),
            format_opt(self.d_sre),
            format_float(self.s0_t_literal),
            format_opt(self.s0_tperm_literal),
            format_float(self.s0_t_fs),
            format_opt(self.s0_tperm_fs),
            format_opt(self.d_s0_perm_literal),
        ]
    }
}

/// Flattens a trace into CSV rows. Step 0 has an empty gate and no deltas.
pub fn trace_rows(trace: &EvolutionTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            instance_id: trace.header.instance_id.clone(),
            ansatz: trace.header.ansatz.clone(),
            step: r.step,
            gate: r.gate.as_ref().map(|g| g.kind().name().to_string()).unwrap_or_default(),
            qubits: r
                .gate
                .as_ref()
                .map(|g| g.qubits().iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" "))
                .unwrap_or_default(),
            rel_depth: r.rel_depth,
            hc_expect: r.hc,
            sre: r.sre,
            d_sre: r.d_sre,
            s0_t_literal: r.s0_t_literal,
            s0_tperm_literal: r.s0_tperm_literal,
            s0_t_fs: r.s0_t_fs,
            s0_tperm_fs: r.s0_tperm_fs,
            d_s0_perm_literal: r.d_s0_perm_literal,
        })
        .collect()
}

pub fn trace_csv_string(rows: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    finish(w)
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_atomic(path, trace_csv_string(rows)?.as_bytes())
}

/// Parses a trace file, insisting on the exact column order.
pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(Error::parse(
            1,
            format!("trace header must be `{}`", TRACE_COLUMNS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<TraceRow>().enumerate() {
        let row = rec.map_err(|e| Error::parse(i + 2, e.to_string()))?;
        let finite = [row.rel_depth, row.hc_expect, row.s0_t_literal, row.s0_t_fs]
            .into_iter()
            .chain(row.sre)
            .chain(row.d_sre)
            .chain(row.s0_tperm_literal)
            .chain(row.s0_tperm_fs)
            .chain(row.d_s0_perm_literal)
            .all(f64::is_finite);
        if !finite {
            return Err(Error::parse(i + 2, "non-finite metric"));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Sorted per-qubit colours for every step, one row per (step, rank).
pub fn spectrum_csv_string(slices: &[Vec<QubitColour>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SPECTRUM_COLUMNS)?;
    for (step, slice) in slices.iter().enumerate() {
        for (rank, c) in slice.iter().enumerate() {
            w.write_record([
                step.to_string(),
                rank.to_string(),
                format_float(c.p0),
                format_float(c.pplus),
                format_float(c.pplusi),
            ])?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::input(format!("csv buffer: {}", e.error())))?;
    String::from_utf8(bytes).map_err(|e| Error::input(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes to a temporary sibling then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_qft;
    use crate::geometry::TargetSpace;
    use crate::state::StateVector;
    use crate::trace::{run_trace, TraceOptions};

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1 + 0.2), "0.3");
        assert_eq!(format_float(-2.5), "-2.5");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(1.234e-7), "1.234e-7");
        assert_eq!(format_float(std::f64::consts::PI), "3.14159265359");
        for v in [1e-300, 12345.678, -7.5e-3, 6.02e23] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11, "{v} -> {s}");
        }
    }

    #[test]
    fn trace_csv_round_trip() {
        let n = 3;
        let x = StateVector::basis_index(n, 3).unwrap();
        let c = build_qft(n, true).unwrap();
        let t = TargetSpace::single(c.run(&x).unwrap());
        let mut tr = run_trace(&c, &x, &t, &TraceOptions::default()).unwrap();
        tr.header.instance_id = "qft_x011".into();
        let rows = trace_rows(&tr);
        let text = trace_csv_string(&rows).unwrap();
        assert!(text.starts_with(&TRACE_COLUMNS.join(",")));
        let first_data = text.lines().nth(1).unwrap();
        assert_eq!(first_data.matches(',').count(), 13);
        assert!(first_data.contains(",,"));
        let back = read_trace_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), rows.len());
        assert_eq!(back[1].gate, "H");
        assert_eq!(back[3].qubits, "3 1");
        for (a, b) in back.iter().zip(&rows) {
            assert_eq!(a.d_sre.is_some(), b.d_sre.is_some());
            assert!((a.hc_expect - b.hc_expect).abs() < 1e-11);
        }
        assert_eq!(trace_csv_string(&back).unwrap(), text);
    }

    #[test]
    fn reader_rejects_bad_input() {
        assert!(read_trace_csv("a,b\n1,2\n".as_bytes()).is_err());
        let header = TRACE_COLUMNS.join(",");
        let bad = format!("{header}\nx,y,notanint,,,0,0,0,,0,0,0,0,\n");
        assert!(read_trace_csv(bad.as_bytes()).is_err());
        let nan = format!("{header}\nx,y,0,,,0,NaN,0,,0,0,0,0,\n");
        assert!(read_trace_csv(nan.as_bytes()).is_err());
        let ok = format!("{header}\nx,y,0,,,0,1,0,,0,0,0,0,\n");
        assert_eq!(read_trace_csv(ok.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
