use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::{CliError, StudyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    coefficient: &'a str,
    solution: &'a str,
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    h: f64,
    err_u: f64,
    order_u: Option<f64>,
    err_ustar: f64,
    order_ustar: Option<f64>,
    iters: usize,
}

/// One line per level. Timings are left out so that identical runs give
/// identical files.
pub fn to_csv(report: &StudyReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.rows.is_empty() {
        w.write_record([
            "coefficient",
            "solution",
            "k",
            "N",
            "h",
            "err_u",
            "order_u",
            "err_ustar",
            "order_ustar",
            "iters",
        ])?;
    }
    for r in &report.rows {
        w.serialize(CsvRow {
            coefficient: &report.coefficient,
            solution: &report.solution,
            k: report.degree,
            n: r.n,
            h: r.h,
            err_u: r.err_u,
            order_u: r.order_u,
            err_ustar: r.err_ustar,
            order_ustar: r.order_ustar,
            iters: r.iterations,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json(report: &StudyReport) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

fn order_cell(o: Option<f64>) -> String {
    o.map_or_else(|| "-".to_string(), |o| format!("{o:.2}"))
}

/// Table in the layout of a convergence table: mesh size, both errors with
/// their orders, and the iteration count.
pub fn to_markdown(report: &StudyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "L2 errors for {} with {}, k = {}\n",
        report.solution, report.coefficient, report.degree
    );
    s.push_str(
        "| Mesh size | ||u - u_h|| | order | ||u - u*_h|| | order | Number of iterations |\n",
    );
    s.push_str("|---|---|---|---|---|---|\n");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "| 1/{} | {:.2e} | {} | {:.2e} | {} | {} |",
            r.n,
            r.err_u,
            order_cell(r.order_u),
            r.err_ustar,
            order_cell(r.order_ustar),
            r.iterations
        );
    }
    if let Some(f) = &report.failure {
        let _ = writeln!(s, "\nN = {}: {}", f.n, f.message);
    }
    s
}

/// Whitespace-separated `h err_u err_ustar` columns for plotting.
pub fn plot_data(report: &StudyReport) -> String {
    let mut s = String::from("# h err_u err_ustar\n");
    for r in &report.rows {
        let _ = writeln!(s, "{:e} {:e} {:e}", r.h, r.err_u, r.err_ustar);
    }
    s
}

/// Renders `report` and writes it to `out` (stdout when `None`).
pub fn emit(report: &StudyReport, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Md => to_markdown(report),
        Format::Csv => to_csv(report)?,
        Format::Json => to_json(report)?,
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
