//! Text (LaTeX-style rows) and CSV output for result tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::tables::{TableResult, TopWords, TopicRow};
use crate::error::Result;
use crate::eval::{round1, significance_vs, Direction, EvalReport};
use crate::model::Family;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMarks {
    /// Highest printed F1 in its group.
    pub bold: bool,
    /// Significantly above All-1s.
    pub underline: bool,
    /// The significance call differs between printed and unrounded values.
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedTable {
    pub text: String,
    pub warnings: Vec<String>,
}

/// One decimal; an exact 100 prints as `100`.
pub fn fmt_pct(x: f64) -> String {
    let r = round1(x);
    if r == 100.0 {
        "100".to_string()
    } else {
        format!("{r:.1}")
    }
}

fn fmt_f1(r: &EvalReport, m: CellMarks) -> String {
    let mut s = format!("{}±{}", fmt_pct(r.f1), fmt_pct(r.ci_half_width));
    if m.bold {
        s = format!("\\textbf{{{s}}}");
    }
    if m.underline {
        s = format!("\\underline{{{s}}}");
    }
    s
}

/// Marks for one group of comparable reports (a table column or a topic
/// row). `label` names the group in warnings.
pub fn group_marks(reports: &[(Family, &EvalReport)], label: &str, warnings: &mut Vec<String>) -> Result<Vec<CellMarks>> {
    let best = reports
        .iter()
        .map(|(_, r)| round1(r.f1))
        .fold(f64::NEG_INFINITY, f64::max);
    let n_best = reports.iter().filter(|(_, r)| round1(r.f1) == best).count();
    if n_best > 1 {
        warnings.push(format!("{label}: {n_best} models tie for the best F1 {}", fmt_pct(best)));
    }
    let baseline = reports.iter().find(|(f, _)| *f == Family::AllOnes).map(|(_, r)| *r);
    let mut marks = Vec::with_capacity(reports.len());
    for (family, r) in reports {
        let mut m = CellMarks {
            bold: round1(r.f1) == best,
            ..CellMarks::default()
        };
        if let (Some(base), false) = (baseline, *family == Family::AllOnes) {
            let s = significance_vs(base, r)?;
            m.underline = s.significant && s.direction == Direction::Higher;
            m.marginal = s.marginal;
            if s.marginal {
                warnings.push(format!(
                    "{label}: {} significance against All-1s flips without rounding",
                    family.display_name()
                ));
            }
        }
        if r.degenerate {
            warnings.push(format!("{label}: {} has an undefined ratio reported as 0", family.display_name()));
        }
        marks.push(m);
    }
    Ok(marks)
}

fn column_marks(table: &TableResult, warnings: &mut Vec<String>) -> Result<Vec<Vec<CellMarks>>> {
    table
        .columns
        .iter()
        .zip(&table.def.columns)
        .map(|(res, spec)| {
            let reports: Vec<(Family, &EvalReport)> = res.results.iter().map(|r| (r.family, &r.report)).collect();
            group_marks(&reports, &format!("table {} {}", table.def.id, spec.header()), warnings)
        })
        .collect()
}

/// `Model & P & R & F1±CI & ...` rows, one block of three cells per column.
pub fn render_text(table: &TableResult) -> Result<RenderedTable> {
    let mut warnings = Vec::new();
    let marks = column_marks(table, &mut warnings)?;
    let mut out = String::new();
    let _ = writeln!(out, "Table {}: {}", table.def.id, table.def.caption);
    let headers: Vec<String> = table
        .def
        .columns
        .iter()
        .zip(&table.columns)
        .map(|(spec, res)| format!("{} (n={})", spec.header(), res.test_ids.len()))
        .collect();
    let _ = writeln!(out, "Model & {} \\\\", headers.join(" & "));
    let sub = vec!["P & R & F1"; headers.len()];
    let _ = writeln!(out, " & {} \\\\", sub.join(" & "));
    let families: Vec<Family> = table
        .columns
        .first()
        .map(|c| c.results.iter().map(|r| r.family).collect())
        .unwrap_or_default();
    for (i, family) in families.iter().enumerate() {
        let mut cells = vec![family.display_name().to_string()];
        for (col, m) in table.columns.iter().zip(&marks) {
            let r = &col.results[i].report;
            cells.push(fmt_pct(r.precision));
            cells.push(fmt_pct(r.recall));
            cells.push(fmt_f1(r, m[i]));
        }
        let _ = writeln!(out, "{} \\\\", cells.join(" & "));
    }
    Ok(RenderedTable { text: out, warnings })
}

const CSV_HEADER: &str = "table,column,train,test,scope,model,precision,recall,f1,ci,n,tp,fp,fn,tn,bold,underline,marginal,degenerate";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(out: &mut String, prefix: &[String], family: Family, r: &EvalReport, m: CellMarks) {
    let c = &r.confusion;
    let mut fields: Vec<String> = prefix.iter().map(|s| csv_field(s)).collect();
    fields.push(family.as_str().to_string());
    for v in [r.precision, r.recall, r.f1, r.ci_half_width] {
        fields.push(format!("{v:.6}"));
    }
    for v in [r.n, c.tp, c.fp, c.fn_, c.tn] {
        fields.push(v.to_string());
    }
    for b in [m.bold, m.underline, m.marginal, r.degenerate] {
        fields.push(b.to_string());
    }
    let _ = writeln!(out, "{}", fields.join(","));
}

/// One row per (column, model) with unrounded metrics and confusion counts.
pub fn render_csv(table: &TableResult) -> Result<String> {
    let mut warnings = Vec::new();
    let marks = column_marks(table, &mut warnings)?;
    let mut out = format!("{CSV_HEADER}\n");
    for (j, ((res, spec), m)) in table.columns.iter().zip(&table.def.columns).zip(&marks).enumerate() {
        let prefix = [
            table.def.id.to_string(),
            (j + 1).to_string(),
            spec.train.to_string(),
            spec.test.to_string(),
            spec.scope.as_str().to_string(),
        ];
        for (fr, mk) in res.results.iter().zip(m) {
            csv_row(&mut out, &prefix, fr.family, &fr.report, *mk);
        }
    }
    Ok(out)
}

fn topic_marks(rows: &[TopicRow], warnings: &mut Vec<String>) -> Result<Vec<Vec<CellMarks>>> {
    rows.iter()
        .map(|row| {
            let reports: Vec<(Family, &EvalReport)> = row.reports.iter().map(|(f, r)| (*f, r)).collect();
            group_marks(&reports, &format!("topic {}", row.topic), warnings)
        })
        .collect()
}

/// `Topic & Paragraphs & F1±CI per model` rows.
pub fn render_topics_text(rows: &[TopicRow]) -> Result<RenderedTable> {
    let mut warnings = Vec::new();
    let marks = topic_marks(rows, &mut warnings)?;
    let mut out = String::from("Table 11: Leave one topic out (D1 vs {D0, T0})\n");
    let families: Vec<Family> = rows
        .first()
        .map(|r| r.reports.iter().map(|(f, _)| *f).collect())
        .unwrap_or_default();
    let names: Vec<&str> = families.iter().map(|f| f.display_name()).collect();
    let _ = writeln!(out, "Topic & Paragraphs & {} \\\\", names.join(" & "));
    for (row, m) in rows.iter().zip(&marks) {
        let mut cells = vec![row.topic.name().to_string(), row.paragraphs.to_string()];
        for ((_, r), mk) in row.reports.iter().zip(m) {
            cells.push(fmt_f1(r, *mk));
        }
        let _ = writeln!(out, "{} \\\\", cells.join(" & "));
    }
    let total: usize = rows.iter().map(|r| r.paragraphs).sum();
    let _ = writeln!(out, "Total & {total} \\\\");
    Ok(RenderedTable { text: out, warnings })
}

pub fn render_topics_csv(rows: &[TopicRow]) -> Result<String> {
    let mut warnings = Vec::new();
    let marks = topic_marks(rows, &mut warnings)?;
    let mut out = format!("{CSV_HEADER}\n");
    for (row, m) in rows.iter().zip(&marks) {
        let prefix = [
            "11".to_string(),
            row.topic.name().to_string(),
            format!("A: all topics but {}", row.topic.name()),
            format!("A: {}", row.topic.name()),
            "d0t0".to_string(),
        ];
        for ((f, r), mk) in row.reports.iter().zip(m) {
            csv_row(&mut out, &prefix, *f, r, *mk);
        }
    }
    Ok(out)
}

/// Two ranked columns of terms.
pub fn render_top_words_text(words: &TopWords) -> String {
    let mut out = String::from("Table 12: Largest positive and negative LR weights\nRank & Positive & Negative \\\\\n");
    let n = words.positive.len().max(words.negative.len());
    for i in 0..n {
        let p = words.positive.get(i).map_or("", |(t, _)| t.as_str());
        let q = words.negative.get(i).map_or("", |(t, _)| t.as_str());
        let _ = writeln!(out, "{} & {p} & {q} \\\\", i + 1);
    }
    out
}

pub fn render_top_words_csv(words: &TopWords) -> String {
    let mut out = String::from("rank,sign,term,weight\n");
    for (sign, list) in [("positive", &words.positive), ("negative", &words.negative)] {
        for (i, (t, w)) in list.iter().enumerate() {
            let _ = writeln!(out, "{},{sign},{},{w:.9}", i + 1, csv_field(t));
        }
    }
    out
}
