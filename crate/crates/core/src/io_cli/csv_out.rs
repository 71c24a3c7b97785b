//! CSV tables written by the CLI. Floats carry 17 significant digits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::{ExperimentOutcome, MonitorSeries};
use crate::functionals::RegionCell;
use crate::groundstate::GroundStateResult;
use crate::stability::DCurve;

/// `{:.16e}`, which round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{:.16e}", x)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn summary_table(n: usize, results: &[GroundStateResult<f64>]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = names(&["n", "p"]);
    header.extend((1..=n).map(|k| format!("c{k}")));
    header.extend(names(&[
        "residual", "iters", "J", "K", "d", "pohozaev_r1", "pohozaev_r2", "pohozaev_r3", "min_val", "kappa_par", "kappa_perp", "verdict",
    ]));
    let rows = results
        .iter()
        .map(|r| {
            let decay = r.diagnostics.decay.as_ref();
            let mut row = vec![n.to_string(), num(r.params.p())];
            row.extend(r.params.c().iter().map(|&c| num(c)));
            row.extend([num(r.residual), r.iters.to_string(), num(r.report.j), num(r.report.k), num(r.d_value)]);
            row.extend(r.pohozaev.iter().map(|&x| num(x)));
            row.push(num(r.diagnostics.sign.min_val));
            row.push(opt(decay.map(|d| d.kappa_parallel)));
            row.push(opt(decay.map(|d| d.kappa_perp)));
            row.push(decay.map_or("unavailable", |d| d.verdict.as_str()).to_string());
            row
        })
        .collect();
    (header, rows)
}

pub fn dcurve_table(curve: &DCurve<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = names(&["zeta", "d", "Lhalf_norm2", "d1_fd", "d1_formula", "d2_fd", "classification"]);
    let formula = curve.d1_formula();
    let rows = curve
        .points
        .iter()
        .enumerate()
        .map(|(k, q)| {
            vec![
                num(q.zeta),
                num(q.d),
                num(q.lhalf_norm2),
                opt(curve.d1_fd[k]),
                num(formula[k]),
                opt(curve.d2_fd[k]),
                curve.classification[k].as_str().to_string(),
            ]
        })
        .collect();
    (header, rows)
}

pub fn monitor_table(n: usize, s: &MonitorSeries<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = names(&["t", "E"]);
    header.extend((1..=n).map(|k| format!("F{k}")));
    header.extend(names(&["h1", "I", "I1", "I2", "orbdist", "gap", "membership"]));
    let rows = (0..s.len())
        .map(|k| {
            let mut row = vec![num(s.times[k]), num(s.energy[k])];
            row.extend(s.momentum[k].iter().map(|&f| num(f)));
            row.extend([num(s.h1[k]), num(s.i[k]), num(s.i1[k]), num(s.i2[k]), opt(s.orbital_distance[k]), num(s.gap[k])]);
            row.push(s.membership[k].map_or("", |v| v.as_str()).to_string());
            row
        })
        .collect();
    (header, rows)
}

pub fn outcome_table(o: &ExperimentOutcome<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = names(&["kind", "t_event", "membership_breaks", "bound_breaks", "details"]);
    let row = vec![o.kind.as_str().to_string(), opt(o.t_event), o.membership_breaks.to_string(), o.bound_breaks.to_string(), o.details.clone()];
    (header, vec![row])
}

pub fn region_table(cells: &[RegionCell]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = names(&["n", "p", "c", "orbital_unstable", "strong_unstable"]);
    let rows = cells
        .iter()
        .map(|c| vec![c.n.to_string(), num(c.p), num(c.c), c.orbital_unstable.to_string(), c.strong_unstable.to_string()])
        .collect();
    (header, rows)
}
