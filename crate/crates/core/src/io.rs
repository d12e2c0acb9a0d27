//! CSV readers and writers for signals, benchmark reports and erf tables.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::bench::{BenchReport, Param, ReportRow};
use crate::erf::ErfTable;
use crate::error::{FitError, Result};
use crate::fit::MethodId;
use crate::signal::SampledSignal;

pub const SIGNAL_HEADER: [&str; 2] = ["x", "y"];
pub const REPORT_HEADER: [&str; 8] = [
    "method",
    "sweep",
    "param",
    "mse",
    "trials",
    "degenerate",
    "mean_time_us",
    "seed",
];
pub const ERF_TABLE_HEADER: [&str; 2] = ["k", "erf_k_over_sqrt2"];

const SPACING_RTOL: f64 = 1e-9;

/// `%.17g`: 17 significant digits, fixed notation for exponents in `-5..17`,
/// trailing zeros removed. Parsing the output recovers the exact `f64`.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn parse_f64(field: &str, line: u64, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| FitError::Parse {
        line,
        message: format!("{column}: cannot parse `{field}` as a number"),
    })
}

fn parse_usize(field: &str, line: u64, column: &str) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|_| FitError::Parse {
        line,
        message: format!("{column}: cannot parse `{field}` as a count"),
    })
}

fn csv_err(e: csv::Error) -> FitError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FitError::Io(io.to_string()),
        kind => FitError::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(FitError::Parse {
            line: 1,
            message: format!("expected header `{}`, got `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads `x,y` rows. The spacing is the gap between the first two rows and
/// every later gap must match it to a relative tolerance of 1e-9.
pub fn read_signal<R: Read>(source: R) -> Result<SampledSignal> {
    let mut rdr = reader(source);
    check_header(&mut rdr, &SIGNAL_HEADER)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(FitError::Parse {
                line,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let x = parse_f64(&record[0], line, "x")?;
        let y = parse_f64(&record[1], line, "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(FitError::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        xs.push(x);
        ys.push(y);
        lines.push(line);
    }
    if xs.len() < 3 {
        return Err(FitError::InvalidGrid(format!(
            "need at least 3 samples, got {}",
            xs.len()
        )));
    }
    let delta_x = xs[1] - xs[0];
    if delta_x.is_nan() || delta_x <= 0.0 {
        return Err(FitError::Parse {
            line: lines[1],
            message: "x must be strictly increasing".into(),
        });
    }
    for n in 1..xs.len() {
        let step = xs[n] - xs[n - 1];
        let tol = SPACING_RTOL * delta_x + 4.0 * f64::EPSILON * xs[n].abs();
        if (step - delta_x).abs() > tol {
            return Err(FitError::Parse {
                line: lines[n],
                message: format!("non-uniform spacing: step {step} against {delta_x}"),
            });
        }
    }
    SampledSignal::new(xs[0], delta_x, ys)
}

pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<SampledSignal> {
    read_signal(File::open(path)?)
}

pub fn write_signal<W: Write>(signal: &SampledSignal, sink: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(SIGNAL_HEADER).map_err(csv_err)?;
    for (n, y) in signal.samples().iter().enumerate() {
        wtr.write_record([format_g17(signal.x(n)), format_g17(*y)])
            .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_signal_csv(signal: &SampledSignal, path: impl AsRef<Path>) -> Result<()> {
    write_signal(signal, File::create(path)?)
}

pub fn write_report<W: Write>(report: &BenchReport, sink: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(REPORT_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        wtr.write_record([
            row.method.as_str().to_string(),
            format_g17(row.sweep),
            row.param.as_str().to_string(),
            format_g17(row.mse),
            row.trials.to_string(),
            row.degenerate.to_string(),
            format_g17(row.mean_time_us),
            row.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_report_csv(report: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    write_report(report, File::create(path)?)
}

pub fn read_report<R: Read>(source: R) -> Result<Vec<ReportRow>> {
    let mut rdr = reader(source);
    check_header(&mut rdr, &REPORT_HEADER)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record_line(&record);
        if record.len() != REPORT_HEADER.len() {
            return Err(FitError::Parse {
                line,
                message: format!("expected {} fields, got {}", REPORT_HEADER.len(), record.len()),
            });
        }
        let method: MethodId = record[0].parse().map_err(|e: FitError| FitError::Parse {
            line,
            message: e.to_string(),
        })?;
        let param = Param::parse(&record[2]).ok_or_else(|| FitError::Parse {
            line,
            message: format!("unknown parameter `{}`", &record[2]),
        })?;
        let seed = record[7].parse::<u64>().map_err(|_| FitError::Parse {
            line,
            message: format!("seed: cannot parse `{}`", &record[7]),
        })?;
        rows.push(ReportRow {
            method,
            sweep: parse_f64(&record[1], line, "sweep")?,
            param,
            mse: parse_f64(&record[3], line, "mse")?,
            trials: parse_usize(&record[4], line, "trials")?,
            degenerate: parse_usize(&record[5], line, "degenerate")?,
            mean_time_us: parse_f64(&record[6], line, "mean_time_us")?,
            seed,
        });
    }
    Ok(rows)
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    read_report(File::open(path)?)
}

pub fn write_erf_table<W: Write>(table: &ErfTable, sink: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(ERF_TABLE_HEADER).map_err(csv_err)?;
    for (k, v) in table.iter() {
        wtr.write_record([format_g17(k), format_g17(v)]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_erf_table_csv(table: &ErfTable, path: impl AsRef<Path>) -> Result<()> {
    write_erf_table(table, File::create(path)?)
}

pub fn read_erf_table<R: Read>(source: R) -> Result<ErfTable> {
    let mut rdr = reader(source);
    check_header(&mut rdr, &ERF_TABLE_HEADER)?;
    let mut ks = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(FitError::Parse {
                line,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        ks.push(parse_f64(&record[0], line, "k")?);
        values.push(parse_f64(&record[1], line, "erf_k_over_sqrt2")?);
    }
    ErfTable::from_columns(ks, values)
}

pub fn read_erf_table_csv(path: impl AsRef<Path>) -> Result<ErfTable> {
    read_erf_table(File::open(path)?)
}
