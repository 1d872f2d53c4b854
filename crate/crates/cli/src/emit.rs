//! CSV, JSON and text rendering of result rows.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::{Format, OutputSpec};
use crate::suite::ResultRow;
use crate::CliError;

pub const CSV_HEADER: &str = "suite,alpha_or_betaE,t_or_hf,quantity,exact,mc_mean,mc_rms,flags";
const SIGNIFICANT: usize = 12;

/// Formats `v` with 12 significant digits in the style of `%.12g`.
///
/// Rounding is done on the exact binary value with ties to even, so the
/// output is identical on every platform.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT as i32 {
        return format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (SIGNIFICANT as i32 - 1 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            csv_field(&r.suite),
            format_number(r.alpha_or_beta_e),
            csv_field(&r.t_or_hf),
            csv_field(&r.quantity),
            cell(r.exact),
            cell(r.mc_mean),
            cell(r.mc_rms),
            csv_field(&r.flags),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// The same 12-digit value as the CSV, as a JSON number.
fn json_number(v: Option<f64>) -> Value {
    match v.map(format_number) {
        Some(s) => s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map_or(Value::Null, Value::from),
        None => Value::Null,
    }
}

pub fn to_json(rows: &[ResultRow]) -> String {
    let items: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "suite": r.suite,
                "alpha_or_betaE": json_number(Some(r.alpha_or_beta_e)),
                "t_or_hf": r.t_or_hf,
                "quantity": r.quantity,
                "exact": json_number(r.exact),
                "mc_mean": json_number(r.mc_mean),
                "mc_rms": json_number(r.mc_rms),
                "flags": r.flags,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(items)).expect("rows serialize");
    s.push('\n');
    s
}

/// Column-aligned table, one line per row.
pub fn to_text(rows: &[ResultRow]) -> String {
    let header: Vec<String> = CSV_HEADER.split(',').map(String::from).collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.suite.clone(),
                format_number(r.alpha_or_beta_e),
                r.t_or_hf.clone(),
                r.quantity.clone(),
                cell(r.exact),
                cell(r.mc_mean),
                cell(r.mc_rms),
                r.flags.clone(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for line in &body {
        for (w, f) in widths.iter_mut().zip(line) {
            *w = (*w).max(f.chars().count());
        }
    }
    let render = |fields: &[String]| {
        let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:<w$}")).collect();
        let mut line = padded.join("  ").trim_end().to_string();
        line.push('\n');
        line
    };
    let mut out = render(&header);
    for line in &body {
        out.push_str(&render(line));
    }
    out
}

pub fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
        Format::Text => to_text(rows),
    }
}

/// Writes the rendered rows to the output path, or stdout when unset.
pub fn emit(rows: &[ResultRow], output: &OutputSpec) -> Result<(), CliError> {
    let text = render(rows, output.format);
    match &output.path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}
