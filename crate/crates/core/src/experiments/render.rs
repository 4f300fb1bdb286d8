//! Deterministic table rendering: markdown for reading, long-format CSV for
//! machines. Significant cells are bold in markdown and flagged in CSV; rho
//! is rounded to 2 decimals and p-values to 4.

use super::{LabelTable, Table};
use alloc::format;
use alloc::string::String;
use core::fmt::Write;

fn fmt_rho(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        String::from("0.00")
    } else {
        s
    }
}

fn fmt_p(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        String::from("0.0000")
    } else {
        s
    }
}

pub fn render_table_markdown(table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", table.title);
    let _ = writeln!(out);
    let mut header = format!("| {} |", table.row_header);
    let mut rule = String::from("| --- |");
    for target in &table.targets {
        let _ = write!(header, " {target} |");
        rule.push_str(" --- |");
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{rule}");
    for row in &table.rows {
        let mut line = format!("| {} |", row.label);
        for cell in &row.cells {
            match (&cell.report, &cell.degenerate) {
                (Some(report), _) => {
                    let rho = fmt_rho(report.rho);
                    if report.significant {
                        let _ = write!(line, " **{rho}** |");
                    } else {
                        let _ = write!(line, " {rho} |");
                    }
                }
                (None, _) => {
                    let _ = write!(line, " n/a |");
                }
            }
        }
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Bold marks significant correlations in the no-correlation test."
    );
    out
}

pub fn render_table_csv(table: &Table) -> String {
    let mut out = String::from(
        "row,target,rho,p_value,n_sessions,n_participants,significant,degenerate_reason\n",
    );
    for row in &table.rows {
        for (cell, target) in row.cells.iter().zip(&table.targets) {
            match &cell.report {
                Some(report) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},",
                        row.label,
                        target,
                        fmt_rho(report.rho),
                        fmt_p(report.p_value),
                        cell.n_sessions,
                        cell.n_participants,
                        report.significant
                    );
                }
                None => {
                    let reason = cell.degenerate.as_deref().unwrap_or("unknown");
                    let _ = writeln!(
                        out,
                        "{},{},n/a,n/a,{},{},false,{}",
                        row.label,
                        target,
                        cell.n_sessions,
                        cell.n_participants,
                        reason.replace(',', ";")
                    );
                }
            }
        }
    }
    out
}

pub fn render_label_table_markdown(table: &LabelTable) -> String {
    let mut out =
        String::from("# Spearman correlation between schizotypal and autistic measures\n\n");
    let mut header = String::from("| |");
    let mut rule = String::from("| --- |");
    for col in &table.columns {
        let _ = write!(header, " {col} |");
        rule.push_str(" --- |");
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{rule}");
    for (row_axis, cells) in &table.rows {
        let mut line = format!("| {row_axis} |");
        for cell in cells {
            match &cell.report {
                Ok(report) => {
                    let rho = fmt_rho(report.rho);
                    if report.significant {
                        let _ = write!(line, " **{rho}** |");
                    } else {
                        let _ = write!(line, " {rho} |");
                    }
                }
                Err(_) => {
                    let _ = write!(line, " n/a |");
                }
            }
        }
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Bold marks significant correlations in the no-correlation test."
    );
    out
}

pub fn render_label_table_csv(table: &LabelTable) -> String {
    let mut out = String::from("row,column,rho,p_value,n,significant,degenerate_reason\n");
    for (row_axis, cells) in &table.rows {
        for cell in cells {
            match &cell.report {
                Ok(report) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},",
                        row_axis,
                        cell.b,
                        fmt_rho(report.rho),
                        fmt_p(report.p_value),
                        report.n,
                        report.significant
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        out,
                        "{},{},n/a,n/a,0,false,{}",
                        row_axis,
                        cell.b,
                        format!("{e}").replace(',', ";")
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{CellOutcome, TableRow};
    use crate::labels::LabelAxis;
    use crate::stats::CorrelationReport;
    use alloc::string::ToString;
    use alloc::vec;

    fn sample_table() -> Table {
        Table {
            id: "table3_tasks",
            title: "Task comparison".to_string(),
            row_header: "task",
            targets: vec![LabelAxis::SpqTotal, LabelAxis::OddSpeech],
            rows: vec![TableRow {
                label: "negative".to_string(),
                cells: vec![
                    CellOutcome {
                        n_sessions: 10,
                        n_participants: 5,
                        report: Some(CorrelationReport {
                            rho: 0.264,
                            n: 10,
                            p_value: 0.0123,
                            significant: true,
                        }),
                        predictions: None,
                        degenerate: None,
                    },
                    CellOutcome {
                        n_sessions: 0,
                        n_participants: 0,
                        report: None,
                        predictions: None,
                        degenerate: Some("2 participants (need 3)".to_string()),
                    },
                ],
            }],
        }
    }

    #[test]
    fn markdown_bolds_significant_and_marks_degenerate() {
        let md = render_table_markdown(&sample_table());
        assert!(md.contains("**0.26**"));
        assert!(md.contains("n/a"));
        assert!(md.contains("| task | spq_total | odd_speech |"));
    }

    #[test]
    fn csv_flags_and_rounds() {
        let csv = render_table_csv(&sample_table());
        assert!(csv.contains("negative,spq_total,0.26,0.0123,10,5,true,"));
        assert!(csv.contains("negative,odd_speech,n/a,n/a,0,0,false,"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = sample_table();
        assert_eq!(render_table_markdown(&t), render_table_markdown(&t));
        assert_eq!(render_table_csv(&t), render_table_csv(&t));
    }

    #[test]
    fn negative_zero_normalized() {
        assert_eq!(fmt_rho(-0.0001), "0.00");
        assert_eq!(fmt_rho(-0.005), "-0.01");
    }
}
