use std::io::{Read, Write};

use super::sweep::SweepRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "axis_name,axis_value,t,J,K,gamma_diag,gamma_offdiag,gamma_tilde,me_prediction";

/// `printf("%.{digits}g")`: shortest of fixed or exponent notation, trailing zeros dropped.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], axis_name: &str, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let o = &r.obs;
        let fields = [
            r.axis_value,
            o.t,
            o.j,
            o.k,
            o.gamma_diag,
            o.gamma_offdiag,
            o.gamma_tilde.unwrap_or(f64::NAN),
            r.me_prediction,
        ];
        let body: Vec<String> = fields.iter().map(|&v| format_sig(v, 12)).collect();
        writeln!(w, "{axis_name},{}", body.join(","))?;
    }
    Ok(())
}

/// `(t, gamma_tilde)` pairs of the series whose `axis_value` matches `series`.
///
/// With `series = None` the file must hold exactly one series.
pub fn read_series<R: Read>(reader: R, series: Option<f64>) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("csv has no {name:?} column")))
    };
    let (c_axis, c_t, c_g) = (col("axis_value")?, col("t")?, col("gamma_tilde")?);
    let parse = |rec: &csv::StringRecord, c: usize| -> Result<f64> {
        rec[c]
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad number {:?} in csv", &rec[c])))
    };
    let mut seen: Vec<f64> = Vec::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v = parse(&rec, c_axis)?;
        if !seen.contains(&v) {
            seen.push(v);
        }
        let wanted = match series {
            Some(s) => (v - s).abs() <= 1e-10 * s.abs().max(1.0),
            None => true,
        };
        if wanted {
            out.push((parse(&rec, c_t)?, parse(&rec, c_g)?));
        }
    }
    if series.is_none() && seen.len() > 1 {
        return Err(Error::Config(format!(
            "csv holds {} series; choose one with --series",
            seen.len()
        )));
    }
    if out.is_empty() {
        return Err(Error::Config("no rows for the requested series".into()));
    }
    if out.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Config(
            "series has no finite gamma_tilde (gamma = 0?)".into(),
        ));
    }
    Ok(out)
}
