//! Parameter sweeps over `N` with a fixed-format CSV emitter.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::matrix_spectrum;
use crate::error::{Error, Result};
use crate::model::HamiltonianSpec;
use crate::semiclassics::wkb_estimate;
use crate::shooting::{spectrum, Classification, EigenvalueRecord, Method};

pub const CSV_HEADER: &str = "N,m2,n,re_e,im_e,method,residual,classification,status";

/// Basis size used for `matrix` rows.
pub const SWEEP_BASIS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Shoot,
    Matrix,
    Wkb,
    All,
}

impl SweepMethod {
    pub fn methods(self) -> &'static [Method] {
        match self {
            SweepMethod::Shoot => &[Method::Shoot],
            SweepMethod::Matrix => &[Method::Matrix],
            SweepMethod::Wkb => &[Method::Wkb],
            SweepMethod::All => &[Method::Shoot, Method::Matrix, Method::Wkb],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: f64,
    pub n_max: f64,
    pub dn: f64,
    pub m2: f64,
    pub levels: usize,
    pub method: SweepMethod,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_min.is_finite() && self.n_max.is_finite()) || self.n_min > self.n_max {
            return Err(Error::domain(format!(
                "empty N grid: n_min = {}, n_max = {}",
                self.n_min, self.n_max
            )));
        }
        if !(self.dn > 0.0) && self.n_max > self.n_min {
            return Err(Error::domain(format!("dn must be > 0, got {}", self.dn)));
        }
        if self.levels < 1 {
            return Err(Error::domain("levels must be >= 1"));
        }
        if self.method == SweepMethod::Shoot && self.m2 == 0.0 && !(self.n_min > 1.0) {
            return Err(Error::domain(format!(
                "shooting at m2 = 0 requires n_min > 1, got {}",
                self.n_min
            )));
        }
        if !(self.m2 >= 0.0) {
            return Err(Error::domain(format!("m2 must be >= 0, got {}", self.m2)));
        }
        Ok(())
    }

    /// Grid points `n_min + i·dn`, rounded to 12 decimals, up to `n_max`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.n_max == self.n_min {
            return Ok(vec![self.n_min]);
        }
        let steps = ((self.n_max - self.n_min) / self.dn + 1e-9).floor() as usize;
        Ok((0..=steps)
            .map(|i| ((self.n_min + i as f64 * self.dn) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    DomainError,
    NumericalError,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::DomainError => "domain-error",
            RowStatus::NumericalError => "numerical-error",
        }
    }

    fn of(err: &Error) -> Self {
        if err.is_domain() {
            RowStatus::DomainError
        } else {
            RowStatus::NumericalError
        }
    }
}

/// One CSV row; failed computations leave the numeric fields empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub exponent: f64,
    pub m2: f64,
    pub n: Option<usize>,
    pub re_e: Option<f64>,
    pub im_e: Option<f64>,
    pub method: Method,
    pub residual: Option<f64>,
    pub classification: Option<Classification>,
    pub status: RowStatus,
}

impl SweepRow {
    fn from_record(exponent: f64, m2: f64, r: &EigenvalueRecord) -> Self {
        Self {
            exponent,
            m2,
            n: Some(r.n),
            re_e: Some(r.energy.re),
            im_e: Some(r.energy.im),
            method: r.method,
            residual: Some(r.residual),
            classification: r.classification,
            status: RowStatus::Ok,
        }
    }

    fn failed(exponent: f64, m2: f64, method: Method, err: &Error) -> Self {
        Self {
            exponent,
            m2,
            n: None,
            re_e: None,
            im_e: None,
            method,
            residual: None,
            classification: None,
            status: RowStatus::of(err),
        }
    }
}

/// Records for one `(N, m2)` point and one method.
pub fn records_for(spec: &HamiltonianSpec, levels: usize, method: Method) -> Result<Vec<EigenvalueRecord>> {
    match method {
        Method::Shoot => spectrum(spec, levels),
        Method::Matrix => matrix_spectrum(spec, SWEEP_BASIS, levels),
        Method::Wkb => {
            if spec.m2 != 0.0 {
                return Err(Error::domain("WKB closed form is for m2 = 0 only"));
            }
            (0..levels as u32)
                .map(|n| {
                    let w = wkb_estimate(n, spec.n)?;
                    Ok(EigenvalueRecord {
                        n: n as usize,
                        energy: w.e.into(),
                        method: Method::Wkb,
                        residual: 0.0,
                        classification: Some(Classification::Real),
                        convergence: None,
                    })
                })
                .collect()
        }
        Method::Asymptotic => Err(Error::domain("asymptotic method is not available in sweeps")),
    }
}

/// A grid point and method whose computation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub exponent: f64,
    pub method: Method,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Ordered by `(N, method)`.
    pub failures: Vec<SweepFailure>,
}

fn rows_at(exponent: f64, cfg: &SweepConfig) -> (Vec<SweepRow>, Vec<SweepFailure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &method in cfg.method.methods() {
        let result = HamiltonianSpec::new(exponent, cfg.m2).and_then(|spec| records_for(&spec, cfg.levels, method));
        match result {
            Ok(records) => rows.extend(records.iter().map(|r| SweepRow::from_record(exponent, cfg.m2, r))),
            Err(error) => {
                rows.push(SweepRow::failed(exponent, cfg.m2, method, &error));
                failures.push(SweepFailure { exponent, method, error });
            }
        }
    }
    (rows, failures)
}

fn method_rank(m: Method) -> u8 {
    match m {
        Method::Shoot => 0,
        Method::Matrix => 1,
        Method::Wkb => 2,
        Method::Asymptotic => 3,
    }
}

/// Orders rows by `(N, re_e)`, failed rows last within each `N`.
pub fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        let key = |r: &SweepRow| r.re_e.unwrap_or(f64::INFINITY);
        a.exponent
            .total_cmp(&b.exponent)
            .then(key(a).total_cmp(&key(b)))
            .then(method_rank(a.method).cmp(&method_rank(b.method)))
            .then(a.im_e.unwrap_or(0.0).total_cmp(&b.im_e.unwrap_or(0.0)))
            .then(a.n.cmp(&b.n))
    });
}

/// Runs the sweep with `jobs` workers (`None` for one per processor);
/// the output does not depend on `jobs`.
pub fn run_sweep(cfg: &SweepConfig, jobs: Option<usize>) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    let compute = || -> Vec<_> { grid.par_iter().map(|&n| rows_at(n, cfg)).collect() };
    let per_point = match jobs {
        Some(1) => grid.iter().map(|&n| rows_at(n, cfg)).collect(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::domain(format!("cannot start {j} workers: {e}")))?
            .install(compute),
        None => compute(),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_point {
        rows.extend(r);
        failures.extend(f);
    }
    sort_rows(&mut rows);
    Ok(SweepReport { rows, failures })
}

/// `x` with 10 significant digits in scientific notation; empty when absent.
pub fn format_float(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => {
            // avoid a "-0" for values that print as zero
            let v = if v == 0.0 { 0.0 } else { v };
            format!("{v:.9e}")
        }
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

pub fn csv_line(r: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        format_float(Some(r.exponent)),
        format_float(Some(r.m2)),
        r.n.map(|n| n.to_string()).unwrap_or_default(),
        format_float(r.re_e),
        format_float(r.im_e),
        r.method.as_str(),
        format_float(r.residual),
        r.classification.map(|c| c.as_str()).unwrap_or(""),
        r.status.as_str()
    )
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", csv_line(r));
    }
    out
}

/// Parses a line written by [`csv_line`].
pub fn parse_csv_line(line: &str) -> Result<SweepRow> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != 9 {
        return Err(Error::domain(format!("expected 9 fields, got {}", f.len())));
    }
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::domain(format!("bad number {s:?}")))
        }
    };
    let method = match f[5] {
        "shoot" => Method::Shoot,
        "matrix" => Method::Matrix,
        "wkb" => Method::Wkb,
        "asymptotic" => Method::Asymptotic,
        other => return Err(Error::domain(format!("unknown method {other:?}"))),
    };
    let classification = match f[7] {
        "" => None,
        "real" => Some(Classification::Real),
        "complex-pair" => Some(Classification::ComplexPair),
        other => return Err(Error::domain(format!("unknown classification {other:?}"))),
    };
    let status = match f[8] {
        "ok" => RowStatus::Ok,
        "domain-error" => RowStatus::DomainError,
        "numerical-error" => RowStatus::NumericalError,
        other => return Err(Error::domain(format!("unknown status {other:?}"))),
    };
    Ok(SweepRow {
        exponent: num(f[0])?.unwrap_or(f64::NAN),
        m2: num(f[1])?.unwrap_or(f64::NAN),
        n: if f[2].is_empty() {
            None
        } else {
            Some(f[2].parse().map_err(|_| Error::domain(format!("bad level {:?}", f[2])))?)
        },
        re_e: num(f[3])?,
        im_e: num(f[4])?,
        method,
        residual: num(f[6])?,
        classification,
        status,
    })
}

/// Rounds every float through the CSV representation.
pub fn quantize(r: &SweepRow) -> SweepRow {
    parse_csv_line(&csv_line(r)).expect("csv_line output always parses")
}

/// Gnuplot script plotting `Re E` (real levels) and `Re E ± Im E` against `N`.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        "# gnuplot script for {csv_name}\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'N'\n\
         set ylabel 'E'\n\
         set terminal pngcairo size 900,700\n\
         set output '{csv_name}.png'\n\
         plot '{csv_name}' using 1:(strcol(8) eq 'real' ? $4 : 1/0) with points pt 7 ps 0.5 title 'real', \\\n\
         \x20    '' using 1:(strcol(8) eq 'complex-pair' ? $4 : 1/0) with points pt 6 ps 0.5 title 'Re E (complex pair)'\n"
    )
}
