use std::path::Path;

use super::{CurvePoint, SpectrumSlice};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "sweep_coord_m,true_range_m,rmse_m,reb_los_m,reb_all_m,reb_waa_m,waa_bias_m,n_paths,n_cell_paths,los_present";

/// Nine significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub(crate) fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let s = format!("{:.*}", (8 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

const COLUMNS: usize = 10;

fn render(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
        w.write_record(rec)
            .expect("in-memory CSV write cannot fail");
    };
    write(&mut w, header.split(',').map(String::from).collect());
    for row in rows {
        write(&mut w, row);
    }
    let bytes = w.into_inner().expect("in-memory CSV flush cannot fail");
    String::from_utf8(bytes).expect("CSV fields are ASCII")
}

/// Renders curve points under [`CSV_HEADER`].
pub fn write_csv(points: &[CurvePoint]) -> String {
    render(
        CSV_HEADER,
        points.iter().map(|p| {
            vec![
                fmt_sig(p.sweep_coord),
                fmt_sig(p.true_range),
                fmt_sig(p.rmse),
                fmt_sig(p.reb_los),
                fmt_sig(p.reb_all),
                fmt_sig(p.reb_waa),
                fmt_sig(p.waa_bias),
                p.n_paths.to_string(),
                p.n_cell_paths.to_string(),
                p.los_present.to_string(),
            ]
        }),
    )
}

pub fn export_csv(points: &[CurvePoint], path: &Path) -> Result<()> {
    std::fs::write(path, write_csv(points)).map_err(|e| Error::io(path, e))
}

/// Parses text produced by [`write_csv`]. `low_confidence_trials` is not stored and
/// comes back as zero.
pub fn parse_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_ok = reader
        .headers()
        .map(|h| h.iter().collect::<Vec<_>>().join(",") == CSV_HEADER)
        .unwrap_or(false);
    if !header_ok {
        return Err(Error::Parse {
            line: 1,
            msg: "missing or unexpected header".into(),
        });
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let bad = |msg: String| Error::Parse { line, msg };
            if rec.len() != COLUMNS {
                return Err(bad(format!(
                    "expected {COLUMNS} columns, got {}",
                    rec.len()
                )));
            }
            fn field<T: std::str::FromStr>(
                rec: &csv::StringRecord,
                k: usize,
                bad: impl Fn(String) -> Error,
            ) -> Result<T>
            where
                T::Err: std::fmt::Display,
            {
                rec[k]
                    .parse::<T>()
                    .map_err(|e| bad(format!("column {}: {e}", k + 1)))
            }
            Ok(CurvePoint {
                sweep_coord: field(&rec, 0, bad)?,
                true_range: field(&rec, 1, bad)?,
                rmse: field(&rec, 2, bad)?,
                reb_los: field(&rec, 3, bad)?,
                reb_all: field(&rec, 4, bad)?,
                reb_waa: field(&rec, 5, bad)?,
                waa_bias: field(&rec, 6, bad)?,
                n_paths: field(&rec, 7, bad)?,
                n_cell_paths: field(&rec, 8, bad)?,
                los_present: field(&rec, 9, bad)?,
                low_confidence_trials: 0,
            })
        })
        .collect()
}

/// Writes delay spectra in long format: `sweep_coord_m,delay_s,power`.
pub fn export_spectra_csv(spectra: &[SpectrumSlice], path: &Path) -> Result<()> {
    let rows = spectra.iter().flat_map(|s| {
        s.delays
            .iter()
            .zip(&s.power)
            .map(|(d, p)| vec![fmt_sig(s.sweep_coord), fmt_sig(*d), fmt_sig(*p)])
    });
    let text = render("sweep_coord_m,delay_s,power", rows);
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
