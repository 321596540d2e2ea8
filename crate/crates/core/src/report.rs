//! CSV and Markdown renderings of the analysis results.
//!
//! Floats are written with Rust's shortest round-trip formatting so that
//! output is byte-stable across runs.

use std::fmt::Write as _;

use crate::analysis::{AucTable, CategoryDiff, ConfusionMatrix, CrossTab, FrequencyTable, SweepOutcome};

/// One statistic rendered both ways; `name` doubles as the file stem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportSection {
    pub name: String,
    pub csv: String,
    pub markdown: String,
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

fn md_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let escape = |s: &str| s.replace('|', "\\|");
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out.push('\n');
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

pub fn histograms(tables: &[FrequencyTable]) -> ReportSection {
    let mut rows = Vec::new();
    let mut md = String::from("## Attribute frequencies\n\n");
    for t in tables {
        let _ = writeln!(md, "### {} ({}, {} images)\n", t.category_name, t.kind, t.total_images);
        let mut md_rows = Vec::new();
        for (attr, count) in &t.counts {
            let p = t.proportions[attr];
            rows.push(vec![
                t.category_name.clone(),
                t.kind.to_string(),
                attr.clone(),
                count.to_string(),
                t.total_images.to_string(),
                p.to_string(),
            ]);
            md_rows.push(vec![attr.clone(), count.to_string(), pct(p)]);
        }
        md_table(&mut md, &["attribute", "count", "share"], &md_rows);
    }
    ReportSection {
        name: "histograms".into(),
        csv: csv_string(
            &["category", "kind", "attribute", "count", "total_images", "proportion"],
            rows,
        ),
        markdown: md,
    }
}

fn crosstab_rows(t: &CrossTab, rows: &mut Vec<Vec<String>>, md: &mut String, row_title: &str) {
    for (r, label) in t.row_labels.iter().enumerate() {
        for (c, col) in t.col_labels.iter().enumerate() {
            rows.push(vec![
                t.category_name.clone(),
                label.clone(),
                col.clone(),
                t.counts[r][c].to_string(),
                t.row_totals[r].to_string(),
                t.row_normalized[r][c].to_string(),
            ]);
        }
    }
    let mut header = vec![row_title, "n"];
    header.extend(t.col_labels.iter().map(String::as_str));
    let md_rows: Vec<Vec<String>> = t
        .row_labels
        .iter()
        .enumerate()
        .map(|(r, label)| {
            let mut row = vec![label.clone(), t.row_totals[r].to_string()];
            row.extend(t.row_normalized[r].iter().map(|&v| pct(v)));
            row
        })
        .collect();
    md_table(md, &header, &md_rows);
    if !t.omitted_rows.is_empty() {
        let _ = writeln!(md, "Rows without images: {}\n", t.omitted_rows.join(", "));
    }
}

pub fn crosstabs(tables: &[CrossTab]) -> ReportSection {
    let mut rows = Vec::new();
    let mut md = String::from("## Class by attribute\n\nShares are normalized over each class.\n\n");
    for t in tables {
        let _ = writeln!(md, "### {}\n", t.category_name);
        crosstab_rows(t, &mut rows, &mut md, "class");
    }
    ReportSection {
        name: "crosstab".into(),
        csv: csv_string(
            &["category", "class", "attribute", "count", "row_total", "proportion"],
            rows,
        ),
        markdown: md,
    }
}

pub fn diffs(diffs: &[CategoryDiff]) -> ReportSection {
    let mut rows = Vec::new();
    let mut md = String::from(
        "## Distribution difference\n\nDifference is reference minus comparison; negative values are more frequent in the comparison set.\n\n",
    );
    for d in diffs {
        let _ = writeln!(md, "### {} ({})\n", d.category_name, d.kind);
        let mut md_rows = Vec::new();
        for e in &d.entries {
            rows.push(vec![
                d.category_name.clone(),
                d.kind.to_string(),
                e.attribute.clone(),
                e.proportion_ref.to_string(),
                e.proportion_cmp.to_string(),
                e.diff.to_string(),
            ]);
            md_rows.push(vec![
                e.attribute.clone(),
                pct(e.proportion_ref),
                pct(e.proportion_cmp),
                format!("{:+.1}", e.diff * 100.0),
            ]);
        }
        md_table(&mut md, &["attribute", "reference", "comparison", "diff (pp)"], &md_rows);
    }
    ReportSection {
        name: "diff".into(),
        csv: csv_string(
            &["category", "kind", "attribute", "proportion_ref", "proportion_cmp", "diff"],
            rows,
        ),
        markdown: md,
    }
}

pub fn auc_table(table: &AucTable) -> ReportSection {
    let fmt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let mut rows = Vec::new();
    let mut md_rows = Vec::new();
    for a in &table.per_attribute {
        rows.push(vec![
            a.category_name.clone(),
            a.kind.to_string(),
            a.attribute.clone(),
            a.positives.to_string(),
            a.negatives.to_string(),
            fmt(a.auc),
        ]);
        md_rows.push(vec![
            a.category_name.clone(),
            a.attribute.clone(),
            a.positives.to_string(),
            a.negatives.to_string(),
            a.auc.map_or_else(|| "n/a".into(), |x| format!("{x:.3}")),
        ]);
    }
    rows.push(vec![String::new(), String::new(), "mean".into(), String::new(), String::new(), fmt(table.mean)]);
    let mut md = String::from("## Annotation AUC\n\n");
    md_table(&mut md, &["category", "attribute", "positives", "negatives", "AUC"], &md_rows);
    let _ = writeln!(
        md,
        "Mean AUC over defined attributes: {}\n",
        table.mean.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"))
    );
    ReportSection {
        name: "auc".into(),
        csv: csv_string(&["category", "kind", "attribute", "positives", "negatives", "auc"], rows),
        markdown: md,
    }
}

pub fn confusion(matrices: &[(String, ConfusionMatrix)]) -> ReportSection {
    let mut rows = Vec::new();
    let mut md = String::from(
        "## Human versus machine labels\n\nRows are human consensus labels, normalized over each row.\n\n",
    );
    for (category, m) in matrices {
        let mut table = m.table.clone();
        table.category_name = category.clone();
        let _ = writeln!(md, "### {category}\n");
        crosstab_rows(&table, &mut rows, &mut md, "human");
        let _ = writeln!(md, "Excluded images: {}\n", m.excluded);
    }
    ReportSection {
        name: "confusion".into(),
        csv: csv_string(&["category", "human", "machine", "count", "row_total", "proportion"], rows),
        markdown: md,
    }
}

pub fn sweep(outcomes: &[SweepOutcome]) -> ReportSection {
    let mut rows = Vec::new();
    let mut md_rows = Vec::new();
    for o in outcomes {
        match &o.result {
            Ok(p) => {
                rows.push(vec![
                    o.n.to_string(),
                    o.m.to_string(),
                    p.recall.to_string(),
                    p.effective_fraction.to_string(),
                    String::new(),
                ]);
                md_rows.push(vec![
                    o.n.to_string(),
                    o.m.to_string(),
                    format!("{:.3}", p.recall),
                    format!("{:.3}", p.effective_fraction),
                ]);
            }
            Err(e) => {
                rows.push(vec![o.n.to_string(), o.m.to_string(), String::new(), String::new(), e.clone()]);
                md_rows.push(vec![o.n.to_string(), o.m.to_string(), "failed".into(), e.clone()]);
            }
        }
    }
    let mut md = String::from("## Schema size sweep\n\n");
    md_table(&mut md, &["N", "M", "recall", "effective dimension"], &md_rows);
    ReportSection {
        name: "sweep".into(),
        csv: csv_string(&["n", "m", "recall", "effective_fraction", "error"], rows),
        markdown: md,
    }
}
