use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use recoflow_core::dynamics::{coefficient_a, coefficient_b, LinkRates, Trajectory};
use recoflow_core::verify::{run_suite, Report};
use recoflow_core::{Error as CoreError, LinkSet};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::{output_grid, Scenario};

pub const TOLERANCE_ENV: &str = "RECO_TOLERANCE_SCALE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    fn render(self, t: &Trajectory) -> String {
        match self {
            Format::Csv => t.to_csv(),
            Format::Json => t.to_json() + "\n",
        }
    }
}

/// Reads the tolerance scale from the environment (default 1).
pub fn tolerance_scale() -> Result<f64, CliError> {
    match std::env::var(TOLERANCE_ENV) {
        Err(_) => Ok(1.0),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(s) if s.is_finite() && s >= 0.0 => Ok(s),
            _ => Err(CliError::Parse(format!(
                "{TOLERANCE_ENV}={v} is not a nonnegative number"
            ))),
        },
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `dir/stem.suffix` for an output path `dir/stem.ext`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn run_one(config: &Path, out: Option<&Path>, format: Format, seed: Option<u64>, scale: f64) -> Result<(), CliError> {
    let text = fs::read_to_string(config).map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
    let result = Scenario::from_json(&text)?.prepare(seed)?.run(scale)?;
    match out {
        Some(path) => {
            write(path, &format.render(result.primary()))?;
            if let (Some(rk4), Some(cmp)) = (&result.rk4, &result.comparison) {
                write(&sibling(path, &format!("rk4.{}", format.ext())), &format.render(rk4))?;
                let report = serde_json::to_string_pretty(cmp).expect("comparison serializes");
                write(&sibling(path, "compare.json"), &(report + "\n"))?;
            }
        }
        None => {
            print!("{}", format.render(result.primary()));
            if let Some(cmp) = &result.comparison {
                eprintln!(
                    "max gap closed form vs rk4: {:e} (tolerance {:e})",
                    cmp.max_gap, cmp.tolerance
                );
            }
        }
    }
    match result.comparison {
        Some(cmp) if !cmp.passed => Err(CliError::Numerical(format!(
            "max gap {:e} exceeds {:e}",
            cmp.max_gap, cmp.tolerance
        ))),
        _ => Ok(()),
    }
}

/// Runs every config. With more than one config `out` names a directory
/// that receives `<config stem>.<ext>` per scenario. Returns the failures.
pub fn run(
    configs: &[PathBuf],
    out: Option<&Path>,
    format: Format,
    seed: Option<u64>,
    jobs: usize,
) -> Vec<(PathBuf, CliError)> {
    let scale = match tolerance_scale() {
        Ok(s) => s,
        Err(e) => return vec![(PathBuf::new(), e)],
    };
    let targets: Vec<Option<PathBuf>> = if configs.len() == 1 {
        vec![out.map(Path::to_path_buf)]
    } else {
        let Some(dir) = out else {
            return vec![(
                PathBuf::new(),
                CliError::Parse("--out DIR is required with several --config".into()),
            )];
        };
        if let Err(e) = fs::create_dir_all(dir) {
            return vec![(dir.to_path_buf(), CliError::Io(e.to_string()))];
        }
        configs
            .iter()
            .map(|c| {
                let stem = c
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Some(dir.join(format!("{stem}.{}", format.ext())))
            })
            .collect()
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return vec![(PathBuf::new(), CliError::Io(e.to_string()))],
    };
    pool.install(|| {
        configs
            .par_iter()
            .zip(targets.par_iter())
            .filter_map(|(c, o)| {
                run_one(c, o.as_deref(), format, seed, scale)
                    .err()
                    .map(|e| (c.clone(), e))
            })
            .collect()
    })
}

/// Runs a property suite and writes its JSON report. A report with failed
/// checks maps to [`CliError::Property`].
pub fn verify(suite: &str, seed: u64, out: Option<&Path>) -> Result<Report, CliError> {
    let scale = tolerance_scale()?;
    let report = run_suite(suite, seed, scale).map_err(|e| match e {
        CoreError::UnknownSuite(_) => CliError::Parse(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if report.passed {
        Ok(report)
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Property(names.join(", ")))
    }
}

#[derive(Serialize)]
struct CoefficientTable<'a> {
    link_rates: &'a [f64],
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// The `a_G(t)` and `b_G(t)` table over `0, stride, .., t_end`. Columns are
/// `t`, then `a_<mask>` and `b_<mask>` for every `G` in ascending bitmask
/// order, the mask written in binary with link 0 as the last digit.
pub fn coefficients(
    rates: &[f64],
    t_end: f64,
    stride: f64,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let link_rates = LinkRates::new(rates.to_vec()).map_err(CliError::invalid)?;
    let n = link_rates.n_links();
    let grid = output_grid(t_end, stride)?;
    let sets: Vec<LinkSet> = LinkSet::all_subsets(n).map_err(CliError::invalid)?.collect();
    let label = |g: &LinkSet| format!("{:0width$b}", g.bits(), width = n.max(1));
    let mut columns = vec!["t".to_string()];
    columns.extend(sets.iter().map(|g| format!("a_{}", label(g))));
    columns.extend(sets.iter().map(|g| format!("b_{}", label(g))));

    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        let a = sets
            .iter()
            .map(|&g| coefficient_a(g, &link_rates, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::invalid)?;
        let sum: f64 = a.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(CliError::Numerical(format!("coefficients at t = {t} sum to {sum}")));
        }
        let mut row = vec![t];
        row.extend(a);
        for &g in &sets {
            row.push(coefficient_b(g, &link_rates, t).map_err(CliError::invalid)?);
        }
        rows.push(row);
    }

    let text = match format {
        Format::Json => {
            let table = CoefficientTable {
                link_rates: rates,
                columns,
                rows,
            };
            serde_json::to_string(&table).expect("finite table serializes") + "\n"
        }
        Format::Csv => {
            let mut s = columns.join(",");
            s.push('\n');
            for row in &rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                writeln!(s, "{}", cells.join(",")).unwrap();
            }
            s
        }
    };
    match out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        let p = Path::new("/tmp/out/traj.csv");
        assert_eq!(sibling(p, "rk4.csv"), Path::new("/tmp/out/traj.rk4.csv"));
        assert_eq!(sibling(p, "compare.json"), Path::new("/tmp/out/traj.compare.json"));
    }
}
