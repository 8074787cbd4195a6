//! Trace CSV: one row per record, unnormalised columns followed by their
//! area-normalised counterparts. Reals are written with 17 significant digits
//! so a read after a write reproduces every value exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::IoError;
use crate::normalization::{NormalizedRecord, NormalizedTrace, Observables};
use crate::scenarios::MinLocation;
use crate::solver::{FlowTrace, TraceRecord};

pub const CSV_HEADER: &str = "step,t_tilde,dt,area,total_R,R_max,R_min,total_R2,len_minus,len_plus,len_mid,k_minus,k_plus,gb_residual,meridian,argmax_node,rmin_loc,r_boundary,phi,t_norm,R_max_norm,R_min_norm,r_norm,len_minus_norm,len_plus_norm,len_mid_norm,k_minus_norm,k_plus_norm";

const COLUMNS: usize = 28;

pub fn write_trace_csv(trace: &FlowTrace, nt: &NormalizedTrace, mut sink: impl Write) -> Result<(), IoError> {
    if trace.len() != nt.len() {
        return Err(IoError::Misaligned(trace.len(), nt.len()));
    }
    writeln!(sink, "{CSV_HEADER}")?;
    let mut line = String::with_capacity(640);
    for (r, q) in trace.records.iter().zip(&nt.records) {
        line.clear();
        line.push_str(&r.step.to_string());
        let mut real = |v: f64| {
            line.push(',');
            line.push_str(&format!("{v:.16e}"));
        };
        for v in [
            r.t_tilde, r.dt, r.area, r.total_r, r.r_max, r.r_min, r.total_r2, r.len_minus, r.len_plus, r.len_mid,
            r.k_minus, r.k_plus, r.gb_residual, r.meridian,
        ] {
            real(v);
        }
        line.push(',');
        line.push_str(&r.argmax_node.to_string());
        line.push(',');
        line.push_str(r.rmin_loc.as_str());
        let mut real = |v: f64| {
            line.push(',');
            line.push_str(&format!("{v:.16e}"));
        };
        let o = &q.obs;
        for v in [
            r.r_boundary, q.phi, q.t, o.r_max, o.r_min, q.r, o.len_minus, o.len_plus, o.len_mid, o.k_minus, o.k_plus,
        ] {
            real(v);
        }
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn write_trace_file(trace: &FlowTrace, nt: &NormalizedTrace, path: &Path) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("csv.partial");
    write_trace_csv(trace, nt, BufWriter::new(File::create(&tmp)?))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a trace written by [`write_trace_csv`].
///
/// The target area is not a column; it is recovered as `φ·Ã` of the first row
/// rounded to 12 significant digits.
pub fn read_trace_csv(source: impl BufRead) -> Result<(FlowTrace, NormalizedTrace), IoError> {
    let mut lines = source.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(IoError::Header("empty input".into())),
    };
    if header.trim_end() != CSV_HEADER {
        return Err(IoError::Header(format!("got {:?}", header)));
    }
    let mut trace = FlowTrace::default();
    let mut recs = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 1;
        let err = |reason: String| IoError::Row { row, reason };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != COLUMNS {
            return Err(err(format!("expected {COLUMNS} fields, got {}", f.len())));
        }
        let real = |k: usize| f[k].parse::<f64>().map_err(|e| err(format!("column {}: {e}", k + 1)));
        let int = |k: usize| f[k].parse::<u64>().map_err(|e| err(format!("column {}: {e}", k + 1)));
        let rec = TraceRecord {
            step: int(0)?,
            t_tilde: real(1)?,
            dt: real(2)?,
            area: real(3)?,
            total_r: real(4)?,
            r_max: real(5)?,
            r_min: real(6)?,
            total_r2: real(7)?,
            len_minus: real(8)?,
            len_plus: real(9)?,
            len_mid: real(10)?,
            k_minus: real(11)?,
            k_plus: real(12)?,
            gb_residual: real(13)?,
            meridian: real(14)?,
            argmax_node: int(15)? as usize,
            rmin_loc: f[16].parse::<MinLocation>().map_err(err)?,
            r_boundary: real(17)?,
        };
        let phi = real(18)?;
        let obs = Observables {
            area: rec.area * phi,
            total_r: rec.total_r,
            r_max: real(20)?,
            r_min: real(21)?,
            total_r2: rec.total_r2 / phi,
            len_minus: real(23)?,
            len_plus: real(24)?,
            len_mid: real(25)?,
            k_minus: real(26)?,
            k_plus: real(27)?,
        };
        recs.push(NormalizedRecord { t: real(19)?, phi, r: real(22)?, obs });
        trace.records.push(rec);
    }
    let a_target = match recs.first() {
        Some(r) => format!("{:.11e}", r.obs.area).parse().unwrap_or(1.0),
        None => 1.0,
    };
    Ok((trace, NormalizedTrace { a_target, records: recs }))
}

pub fn read_trace_file(path: &Path) -> Result<(FlowTrace, NormalizedTrace), IoError> {
    read_trace_csv(BufReader::new(File::open(path)?))
}
