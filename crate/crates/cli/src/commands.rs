use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use pt_spectra::asymptotics::ground_energy_near_one;
use pt_spectra::basis::matrix_spectrum;
use pt_spectra::classical::{
    closest_approaches, integrate_trajectory, spiral_escape_angle, Outcome, TrajectoryOptions, TrajectoryResult,
};
use pt_spectra::semiclassics::wkb_energy;
use pt_spectra::shooting::{find_merge_n, spectrum as shoot_spectrum};
use pt_spectra::sweep::{plot_script, run_sweep, to_csv, SweepConfig, SweepFailure, SweepMethod, SweepReport};
use pt_spectra::{turning_angle, turning_points, BranchedPoint, Complex64, HamiltonianSpec};

use crate::output::{default_path, num, rows_json, rows_table};
use crate::{Format, MethodArg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pt_spectra::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{count} of the requested computations failed; first: N = {exponent}, {method}: {first}")]
    Partial {
        count: usize,
        exponent: f64,
        method: &'static str,
        first: pt_spectra::Error,
        numerical: bool,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
            CliError::Usage(_) => 2,
            CliError::Partial { numerical, .. } => {
                if *numerical {
                    3
                } else {
                    2
                }
            }
            CliError::Io { .. } | CliError::Json(_) => 4,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn sweep_method(m: MethodArg) -> SweepMethod {
    match m {
        MethodArg::Shoot => SweepMethod::Shoot,
        MethodArg::Matrix => SweepMethod::Matrix,
        MethodArg::Wkb => SweepMethod::Wkb,
        MethodArg::All => SweepMethod::All,
    }
}

fn check_failures(failures: &[SweepFailure]) -> Result<(), CliError> {
    let Some(first) = failures.first() else {
        return Ok(());
    };
    for f in failures {
        eprintln!("N = {}, {}: {}", f.exponent, f.method.as_str(), f.error);
    }
    Err(CliError::Partial {
        count: failures.len(),
        exponent: first.exponent,
        method: first.method.as_str(),
        first: first.error.clone(),
        numerical: failures.iter().any(|f| !f.error.is_domain()),
    })
}

fn render(report: &SweepReport, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => to_csv(&report.rows),
        Format::Json => rows_json(&report.rows)?,
        Format::Table => rows_table(&report.rows),
    })
}

pub fn spectrum(exponent: f64, m2: f64, levels: usize, method: MethodArg, format: Format) -> Result<(), CliError> {
    let cfg = SweepConfig {
        n_min: exponent,
        n_max: exponent,
        dn: 0.0,
        m2,
        levels,
        method: sweep_method(method),
    };
    let report = run_sweep(&cfg, Some(1))?;
    print(&render(&report, format)?)?;
    check_failures(&report.failures)
}

pub struct SweepArgs {
    pub n_min: f64,
    pub n_max: f64,
    pub dn: f64,
    pub m2: f64,
    pub levels: usize,
    pub method: MethodArg,
}

pub fn sweep(args: SweepArgs, out: Option<PathBuf>, format: Format, jobs: Option<usize>) -> Result<(), CliError> {
    if format == Format::Table {
        return Err(CliError::Usage("sweep writes csv or json".into()));
    }
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be >= 1".into()));
    }
    let cfg = SweepConfig {
        n_min: args.n_min,
        n_max: args.n_max,
        dn: args.dn,
        m2: args.m2,
        levels: args.levels,
        method: sweep_method(args.method),
    };
    let report = run_sweep(&cfg, jobs)?;
    let ext = if format == Format::Json { "json" } else { "csv" };
    let path = out.unwrap_or_else(|| default_path(&format!("sweep.{ext}")));
    write_file(&path, &render(&report, format)?)?;
    if format == Format::Csv {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut script = path.clone().into_os_string();
        script.push(".gp");
        write_file(Path::new(&script), &plot_script(&name))?;
    }
    eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
    check_failures(&report.failures)
}

const LEVEL_TABLE: [(f64, &[(f64, f64)]); 2] = [
    (
        3.0,
        &[(1.1562, 1.0942), (4.1092, 4.0894), (7.5621, 7.5489), (11.3143, 11.3042), (15.2916, 15.2832)],
    ),
    (4.0, &[(1.4771, 1.3765), (6.0033, 5.9558), (11.8023, 11.7689), (18.4590, 18.4321)]),
];

/// `(eps, exact, asymptotic)` reference values for `N = 1 + eps`.
const GROUND_TABLE: [(f64, f64, f64); 7] = [
    (1e-1, 1.6837, 2.0955),
    (1e-2, 2.6797, 2.9624),
    (1e-3, 3.4947, 3.6723),
    (1e-4, 4.1753, 4.3013),
    (1e-5, 4.7798, 4.8776),
    (1e-6, 5.3383, 5.4158),
    (1e-7, 5.8943, 5.9244),
];

/// Smallest `eps` at which the ground state is recomputed by shooting.
const SHOOT_EPS_MIN: f64 = 1e-3;

pub fn tables() -> Result<(), CliError> {
    let mut out = String::from("Levels of H = p^2 - (ix)^N: numerical and WKB\n");
    out += &format!(
        "{:>3} {:>2} {:>10} {:>13} {:>9}   {:>10} {:>13} {:>9}\n",
        "N", "n", "ref exact", "shooting", "dev", "ref WKB", "WKB", "dev"
    );
    for (n, rows) in LEVEL_TABLE {
        let shot = shoot_spectrum(&HamiltonianSpec::massless(n)?, rows.len())?;
        for (level, (&(exact, wkb), rec)) in rows.iter().zip(&shot).enumerate() {
            let w = wkb_energy(level as u32, n)?;
            out += &format!(
                "{:>3} {:>2} {:>10.4} {:>13.8} {:>9.2e}   {:>10.4} {:>13.8} {:>9.2e}\n",
                n,
                level,
                exact,
                rec.energy.re,
                (rec.energy.re - exact).abs(),
                wkb,
                w,
                (w - wkb).abs()
            );
        }
    }
    out += "\nGround state near N = 1, N = 1 + eps\n";
    out += &format!(
        "{:>7} {:>10} {:>13} {:>9}   {:>10} {:>13} {:>9}\n",
        "eps", "ref exact", "shooting", "dev", "ref asym", "asymptotic", "dev"
    );
    for (eps, exact, asym) in GROUND_TABLE {
        let shot = if eps >= SHOOT_EPS_MIN {
            let e = shoot_spectrum(&HamiltonianSpec::massless(1.0 + eps)?, 1)?[0].energy.re;
            (format!("{e:.8}"), format!("{:.2e}", (e - exact).abs()))
        } else {
            ("-".into(), "-".into())
        };
        let a = ground_energy_near_one(eps)?;
        out += &format!(
            "{:>7.0e} {:>10.4} {:>13} {:>9}   {:>10.4} {:>13.8} {:>9.2e}\n",
            eps,
            exact,
            shot.0,
            shot.1,
            asym,
            a,
            (a - asym).abs()
        );
    }
    print(&out)
}

#[derive(Serialize)]
struct ClassicalSummary {
    #[serde(rename = "N")]
    exponent: f64,
    energy: f64,
    x0: [f64; 2],
    outcome: &'static str,
    period: Option<f64>,
    return_distance: Option<f64>,
    escape_angle: Option<f64>,
    asymptotic_escape_angle: Option<f64>,
    energy_defect: f64,
    steps: usize,
    t_final: f64,
    /// Turning points `n ≥ 1` whose angle lies below the final unwound angle.
    turning_points_passed: Option<usize>,
    /// Complex-conjugate pairs among the lowest [`PAIR_COUNT_LEVELS`] levels.
    complex_pairs: Option<usize>,
    trajectory_file: String,
}

const PAIR_COUNT_LEVELS: usize = 20;

fn parse_point(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("--x0 expects \"re,im\", got {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn trajectory_csv(result: &TrajectoryResult) -> String {
    let mut s = String::from("t,re_x,im_x,theta\n");
    for p in &result.path {
        s += &format!("{},{},{},{}\n", num(p.t), num(p.x.re), num(p.x.im), num(p.theta));
    }
    s
}

pub fn classical(
    exponent: f64,
    energy: f64,
    x0: Option<&str>,
    t_max: Option<f64>,
    dt: Option<f64>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), CliError> {
    let spec = HamiltonianSpec::massless(exponent)?;
    let start = match x0 {
        Some(s) => BranchedPoint::from_complex(parse_point(s)?),
        None => {
            let x = turning_points(energy, exponent)?.x_plus;
            BranchedPoint::new(x.norm(), x.arg())
        }
    };
    let mut opts = TrajectoryOptions::for_energy(exponent, energy);
    if let Some(t) = t_max {
        opts.t_max = t;
    }
    if let Some(h) = dt {
        opts.dt = h;
    }
    let result = integrate_trajectory(&spec, energy, start, &opts)?;

    let path = out.unwrap_or_else(|| default_path(&format!("classical_N{exponent}_E{energy}.csv")));
    write_file(&path, &trajectory_csv(&result))?;

    let below_two = exponent > 1.0 && exponent < 2.0;
    let passed = below_two.then(|| {
        let final_theta = result.final_state.x.theta;
        (1u32..).take_while(|&n| turning_angle(n, exponent) < final_theta).count()
    });
    let pairs = if below_two {
        let recs = matrix_spectrum(&spec, 96, PAIR_COUNT_LEVELS)?;
        Some(recs.iter().filter(|r| !r.is_real() && r.energy.im > 0.0).count())
    } else {
        None
    };
    let summary = ClassicalSummary {
        exponent,
        energy,
        x0: [start.to_complex().re, start.to_complex().im],
        outcome: result.outcome.as_str(),
        period: result.period,
        return_distance: result.return_distance,
        escape_angle: result.escape_angle,
        asymptotic_escape_angle: spiral_escape_angle(exponent).ok(),
        energy_defect: result.energy_defect,
        steps: result.path.len() - 1,
        t_final: result.final_state.t,
        turning_points_passed: passed,
        complex_pairs: pairs,
        trajectory_file: path.display().to_string(),
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
        Format::Csv | Format::Table => {
            let mut s = format!(
                "N = {exponent}, E = {energy}, x0 = {}\noutcome: {}\n",
                start.to_complex(),
                summary.outcome
            );
            match result.outcome {
                Outcome::ClosedOrbit => {
                    s += &format!(
                        "period: {:.10}\nreturn distance: {:.3e}\n",
                        result.period.unwrap_or(f64::NAN),
                        result.return_distance.unwrap_or(f64::NAN)
                    );
                }
                Outcome::Escaped => {
                    s += &format!("escape angle (unwound): {:.6}\n", result.escape_angle.unwrap_or(f64::NAN));
                    if let Some(a) = summary.asymptotic_escape_angle {
                        s += &format!("reference angle N*pi/(2-N): {a:.6}\n");
                    }
                }
                Outcome::StepLimit => s += &format!("stopped at t = {}\n", result.final_state.t),
            }
            s += &format!("energy defect: {:.3e}\n", result.energy_defect);
            if let (Some(p), Some(c)) = (passed, pairs) {
                s += &format!(
                    "turning points passed: {p}; complex pairs among lowest {PAIR_COUNT_LEVELS} levels: {c}\n"
                );
            }
            s += &format!("approaches to turning points: {}\n", closest_approaches(&result.path).len());
            s += &format!("trajectory: {}\n", path.display());
            s
        }
    };
    print(&text)
}

pub fn merge(pair: usize, lo: f64, hi: f64, m2: f64, tol: f64) -> Result<(), CliError> {
    if pair < 1 {
        return Err(CliError::Usage("--pair counts from 1 (levels pair and pair+1)".into()));
    }
    if !(tol > 0.0) {
        return Err(CliError::Usage("--tol must be > 0".into()));
    }
    let n = find_merge_n(m2, pair, lo, hi, tol)?;
    print(&format!(
        "N* = {n:.6}\npair = ({pair}, {}), m2 = {m2}, bracket = [{lo}, {hi}], tol = {tol:e}\n",
        pair + 1
    ))
}
