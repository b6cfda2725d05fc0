use std::path::{Path, PathBuf};

use pt_spectra::sweep::{format_float, quantize, SweepRow};
use pt_spectra::Classification;

pub const OUT_DIR_ENV: &str = "PT_SPECTRA_OUT";

/// `$PT_SPECTRA_OUT/name`, or `name` in the working directory.
pub fn default_path(name: &str) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Path::new(&dir).join(name),
        _ => PathBuf::from(name),
    }
}

/// JSON array of rows rounded exactly as in the CSV output.
pub fn rows_json(rows: &[SweepRow]) -> serde_json::Result<String> {
    let quantized: Vec<SweepRow> = rows.iter().map(quantize).collect();
    let mut s = serde_json::to_string_pretty(&quantized)?;
    s.push('\n');
    Ok(s)
}

/// One line per level with one column per method.
pub fn rows_table(rows: &[SweepRow]) -> String {
    let methods: Vec<&str> = ["shoot", "matrix", "wkb", "asymptotic"]
        .into_iter()
        .filter(|m| rows.iter().any(|r| r.method.as_str() == *m))
        .collect();
    let levels = rows.iter().filter_map(|r| r.n).max().map_or(0, |n| n + 1);
    let mut out = format!("{:>4}", "n");
    for m in &methods {
        out += &format!("  {:>36}", m);
    }
    out.push('\n');
    for n in 0..levels {
        out += &format!("{n:>4}");
        for m in &methods {
            let cell = rows
                .iter()
                .find(|r| r.n == Some(n) && r.method.as_str() == *m)
                .map(|r| {
                    let im = r.im_e.unwrap_or(0.0);
                    if r.classification == Some(Classification::Real) || im == 0.0 {
                        format!("{:.10}", r.re_e.unwrap_or(f64::NAN))
                    } else {
                        format!("{:.10} {:+.10}i", r.re_e.unwrap_or(f64::NAN), im)
                    }
                })
                .unwrap_or_else(|| "-".into());
            out += &format!("  {cell:>36}");
        }
        out.push('\n');
    }
    for r in rows.iter().filter(|r| r.n.is_none()) {
        out += &format!("{}: {}\n", r.method.as_str(), r.status.as_str());
    }
    out
}

pub fn num(x: f64) -> String {
    format_float(Some(x))
}
