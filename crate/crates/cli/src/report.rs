//! Output records and renderers.
//!
//! Each command produces one serializable report. JSON is the machine
//! format of record and round-trips exactly; CSV carries 17 significant
//! digits with `.` decimals, `,` separators and a header row; tables print
//! 6 significant decimals for reading.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_machine(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_table(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_complex_machine(re: f64, im: f64) -> String {
    let sign = if im.is_sign_negative() { "" } else { "+" };
    format!("{}{sign}{}i", fmt_machine(re), fmt_machine(im))
}

fn fmt_complex_table(re: f64, im: f64) -> String {
    if im == 0.0 {
        fmt_table(re)
    } else {
        let sign = if im.is_sign_negative() { "" } else { "+" };
        format!("{}{sign}{}i", fmt_table(re), fmt_table(im))
    }
}

fn fmt_roots_machine(roots: &[[f64; 2]]) -> String {
    roots
        .iter()
        .map(|r| fmt_complex_machine(r[0], r[1]))
        .collect::<Vec<_>>()
        .join(";")
}

fn fmt_roots_table(roots: &[[f64; 2]]) -> String {
    roots
        .iter()
        .map(|r| fmt_complex_table(r[0], r[1]))
        .collect::<Vec<_>>()
        .join("; ")
}

/// CSV cells must not introduce extra separators.
fn csv_safe(s: &str) -> String {
    s.replace(',', ";")
}

pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i < widths.len() {
                widths[i] = widths[i].max(cell.len());
            }
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: &[String], widths: &[usize]| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:<w$}", c, w = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let head: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    out.push_str(&fmt_row(&head, &widths));
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  "),
    );
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_row(row, &widths));
        out.push('\n');
    }
    out
}

fn render_csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|c| csv_safe(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub f: f64,
    pub b: f64,
    pub v: f64,
}

impl ParamsEcho {
    fn line(&self) -> String {
        format!(
            "f = {}, b = {}, v = {}\n",
            fmt_table(self.f),
            fmt_table(self.b),
            fmt_table(self.v)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalRow {
    pub n: usize,
    pub epsilon: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalReport {
    pub schema: u32,
    pub command: String,
    pub params: ParamsEcho,
    /// Unit system of the `energy` column: physical inputs as given, or the
    /// canonical `m = hbar = omega = 1` realization.
    pub units: String,
    pub rows: Vec<ExceptionalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub n: usize,
    pub v_squared_re: f64,
    pub v_squared_im: f64,
    pub physical: bool,
    pub degree_deficient: bool,
    pub multiplicity: usize,
    pub kernel_residual: f64,
    pub roots: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingsReport {
    pub schema: u32,
    pub command: String,
    pub params: ParamsEcho,
    pub rows: Vec<CouplingRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRow {
    pub n: usize,
    pub v_model: f64,
    pub admissible_v_squared_re: f64,
    pub admissible_v_squared_im: f64,
    pub constraint_residual: f64,
    pub max_residue: f64,
    pub converged: bool,
    pub physical: bool,
    pub roots: Vec<[f64; 2]>,
    /// Ascending coefficients of the monic root polynomial.
    pub y1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheReport {
    pub schema: u32,
    pub command: String,
    pub params: ParamsEcho,
    pub rows: Vec<BetheRow>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub n: usize,
    pub target: f64,
    pub nearest: f64,
    pub gap: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema: u32,
    pub command: String,
    pub params: ParamsEcho,
    pub basis: usize,
    pub trusted: usize,
    pub matches: Vec<MatchRow>,
    /// Trusted (lowest) eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: String,
    pub params: ParamsEcho,
    pub checks: Vec<CheckRow>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub f: f64,
    pub b: f64,
    pub n: usize,
    pub v_squared: f64,
    pub lambda_gap: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: u32,
    pub command: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Exceptional(ExceptionalReport),
    Couplings(CouplingsReport),
    Bethe(BetheReport),
    Oracle(OracleReport),
    Verify(VerifyReport),
    Sweep(SweepReport),
}

impl Report {
    pub fn to_json(&self) -> String {
        let json = match self {
            Report::Exceptional(r) => serde_json::to_string_pretty(r),
            Report::Couplings(r) => serde_json::to_string_pretty(r),
            Report::Bethe(r) => serde_json::to_string_pretty(r),
            Report::Oracle(r) => serde_json::to_string_pretty(r),
            Report::Verify(r) => serde_json::to_string_pretty(r),
            Report::Sweep(r) => serde_json::to_string_pretty(r),
        };
        let mut s = json.expect("reports contain only finite numbers");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        match self {
            Report::Exceptional(r) => render_csv(
                &["n", "epsilon", "energy"],
                &r.rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.n.to_string(),
                            fmt_machine(row.epsilon),
                            fmt_machine(row.energy),
                        ]
                    })
                    .collect::<Vec<_>>(),
            ),
            Report::Couplings(r) => render_csv(
                &[
                    "n",
                    "v_squared_re",
                    "v_squared_im",
                    "physical",
                    "degree_deficient",
                    "multiplicity",
                    "kernel_residual",
                    "roots",
                ],
                &r.rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.n.to_string(),
                            fmt_machine(row.v_squared_re),
                            fmt_machine(row.v_squared_im),
                            row.physical.to_string(),
                            row.degree_deficient.to_string(),
                            row.multiplicity.to_string(),
                            fmt_machine(row.kernel_residual),
                            fmt_roots_machine(&row.roots),
                        ]
                    })
                    .collect::<Vec<_>>(),
            ),
            Report::Bethe(r) => render_csv(
                &[
                    "n",
                    "v_model",
                    "admissible_v_squared_re",
                    "admissible_v_squared_im",
                    "constraint_residual",
                    "max_residue",
                    "converged",
                    "physical",
                    "roots",
                ],
                &r.rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.n.to_string(),
                            fmt_machine(row.v_model),
                            fmt_machine(row.admissible_v_squared_re),
                            fmt_machine(row.admissible_v_squared_im),
                            fmt_machine(row.constraint_residual),
                            fmt_machine(row.max_residue),
                            row.converged.to_string(),
                            row.physical.to_string(),
                            fmt_roots_machine(&row.roots),
                        ]
                    })
                    .collect::<Vec<_>>(),
            ),
            Report::Oracle(r) => render_csv(
                &["n", "target", "nearest", "gap", "matched"],
                &r.matches
                    .iter()
                    .map(|m| {
                        vec![
                            m.n.to_string(),
                            fmt_machine(m.target),
                            fmt_machine(m.nearest),
                            fmt_machine(m.gap),
                            m.matched.to_string(),
                        ]
                    })
                    .collect::<Vec<_>>(),
            ),
            Report::Verify(r) => render_csv(
                &["check", "passed", "detail"],
                &r.checks
                    .iter()
                    .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()])
                    .collect::<Vec<_>>(),
            ),
            Report::Sweep(r) => render_csv(
                &["f", "b", "n", "v_squared", "lambda_gap", "status"],
                &r.rows
                    .iter()
                    .map(|row| {
                        vec![
                            fmt_machine(row.f),
                            fmt_machine(row.b),
                            row.n.to_string(),
                            fmt_machine(row.v_squared),
                            row.lambda_gap.map(fmt_machine).unwrap_or_default(),
                            row.status.clone(),
                        ]
                    })
                    .collect::<Vec<_>>(),
            ),
        }
    }

    pub fn to_table(&self) -> String {
        match self {
            Report::Exceptional(r) => {
                let rows: Vec<Vec<String>> = r
                    .rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.n.to_string(),
                            fmt_table(row.epsilon),
                            fmt_table(row.energy),
                        ]
                    })
                    .collect();
                format!(
                    "{}energy units: {}\n{}",
                    r.params.line(),
                    r.units,
                    render_table(&["n", "epsilon", "energy"], &rows)
                )
            }
            Report::Couplings(r) => {
                let rows: Vec<Vec<String>> = r
                    .rows
                    .iter()
                    .map(|row| {
                        let mut flags = Vec::new();
                        if row.degree_deficient {
                            flags.push("degree-deficient");
                        }
                        if row.multiplicity > 1 {
                            flags.push("multiple");
                        }
                        vec![
                            row.n.to_string(),
                            fmt_complex_table(row.v_squared_re, row.v_squared_im),
                            row.physical.to_string(),
                            fmt_roots_table(&row.roots),
                            flags.join(" "),
                        ]
                    })
                    .collect();
                format!(
                    "{}{}",
                    r.params.line(),
                    render_table(&["n", "v^2", "physical", "kernel roots", "flags"], &rows)
                )
            }
            Report::Bethe(r) => {
                let rows: Vec<Vec<String>> = r
                    .rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.n.to_string(),
                            fmt_complex_table(
                                row.admissible_v_squared_re,
                                row.admissible_v_squared_im,
                            ),
                            format!("{:.2e}", row.constraint_residual),
                            format!("{:.2e}", row.max_residue),
                            row.converged.to_string(),
                            row.physical.to_string(),
                            fmt_roots_table(&row.roots),
                        ]
                    })
                    .collect();
                let mut s = format!(
                    "{}{}",
                    r.params.line(),
                    render_table(
                        &[
                            "n",
                            "admissible v^2",
                            "restriction",
                            "residue",
                            "converged",
                            "physical",
                            "roots"
                        ],
                        &rows
                    )
                );
                for note in &r.notes {
                    s.push_str(&format!("note: {note}\n"));
                }
                s
            }
            Report::Oracle(r) => {
                let rows: Vec<Vec<String>> = r
                    .matches
                    .iter()
                    .map(|m| {
                        vec![
                            m.n.to_string(),
                            fmt_table(m.target),
                            fmt_table(m.nearest),
                            format!("{:.2e}", m.gap),
                            m.matched.to_string(),
                        ]
                    })
                    .collect();
                let mut s = format!(
                    "{}basis = {}, trusted eigenvalues = {}\n{}",
                    r.params.line(),
                    r.basis,
                    r.trusted,
                    render_table(&["n", "target", "nearest", "gap", "matched"], &rows)
                );
                let show = r.eigenvalues.len().min(12);
                if show > 0 {
                    s.push_str(&format!(
                        "lowest eigenvalues: {}\n",
                        r.eigenvalues[..show]
                            .iter()
                            .map(|e| fmt_table(*e))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ));
                }
                s
            }
            Report::Verify(r) => {
                let rows: Vec<Vec<String>> = r
                    .checks
                    .iter()
                    .map(|c| {
                        vec![
                            c.name.clone(),
                            if c.passed { "PASS" } else { "FAIL" }.to_string(),
                            c.detail.clone(),
                        ]
                    })
                    .collect();
                format!(
                    "{}{}overall: {}\n",
                    r.params.line(),
                    render_table(&["check", "result", "detail"], &rows),
                    if r.all_passed { "PASS" } else { "FAIL" }
                )
            }
            Report::Sweep(r) => {
                let rows: Vec<Vec<String>> = r
                    .rows
                    .iter()
                    .map(|row| {
                        vec![
                            fmt_table(row.f),
                            fmt_table(row.b),
                            row.n.to_string(),
                            fmt_table(row.v_squared),
                            row.lambda_gap
                                .map(|g| format!("{g:.2e}"))
                                .unwrap_or_default(),
                            row.status.clone(),
                        ]
                    })
                    .collect();
                render_table(&["f", "b", "n", "v^2", "lambda gap", "status"], &rows)
            }
        }
    }
}
