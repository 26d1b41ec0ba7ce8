//! Tabular reports: VIF probes and stepwise traces.

use std::io::Write;

use polyreg_core::{TermSet, TraceStep, VifReport};

use crate::error::{Error, Result};

fn out_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

fn summary_cells(r: &VifReport) -> (String, String) {
    match r.summary {
        Some(s) => (format!("{}", s.proportion_over), format!("{}", s.mean)),
        None => ("undefined".into(), "undefined".into()),
    }
}

/// Aligned table with one row per layer. The middle column is the share
/// of units over the threshold, as a proportion.
pub fn vif_table(reports: &[VifReport]) -> String {
    let threshold = reports.first().map_or(polyreg_core::DEFAULT_THRESHOLD, |r| r.threshold);
    let head = [
        "Layer".to_string(),
        format!("Percentage of VIFs > {threshold}"),
        "Average VIF".to_string(),
    ];
    let rows: Vec<[String; 3]> = reports
        .iter()
        .map(|r| {
            let (p, m) = summary_cells(r);
            [r.layer_label.clone(), p, m]
        })
        .collect();
    let mut widths = head.clone().map(|h| h.len());
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String; 3]| {
        format!(
            "{:<w0$} | {:<w1$} | {}\n",
            cells[0],
            cells[1],
            cells[2],
            w0 = widths[0],
            w1 = widths[1]
        )
    };
    let mut out = line(&head);
    out.push_str(&format!(
        "{}-+-{}-+-{}\n",
        "-".repeat(widths[0]),
        "-".repeat(widths[1]),
        "-".repeat(widths[2])
    ));
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

/// `layer,proportion_over,mean_vif,threshold`; undefined layers leave the
/// numbers empty.
pub fn write_vif_csv(out: impl Write, reports: &[VifReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |source| Error::Csv {
        path: "<output>".into(),
        source,
    };
    w.write_record(["layer", "proportion_over", "mean_vif", "threshold"])
        .map_err(csv_err)?;
    for r in reports {
        let (p, m) = match r.summary {
            Some(s) => (s.proportion_over.to_string(), s.mean.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([r.layer_label.clone(), p, m, r.threshold.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(out_err)
}

/// Human-readable monomial of a term, e.g. `u^2*v`.
pub fn term_label(terms: &TermSet, names: &[String], index: usize) -> String {
    terms.monomials()[index]
        .factors()
        .iter()
        .map(|&(c, e)| {
            let name = names.get(c).cloned().unwrap_or_else(|| format!("x{c}"));
            if e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// `step,term,label,score,models_evaluated,improved`
pub fn write_trace_csv(out: impl Write, trace: &[TraceStep], terms: &TermSet, names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |source| Error::Csv {
        path: "<output>".into(),
        source,
    };
    w.write_record(["step", "term", "label", "score", "models_evaluated", "improved"])
        .map_err(csv_err)?;
    for t in trace {
        w.write_record([
            t.step.to_string(),
            t.term.to_string(),
            term_label(terms, names, t.term),
            t.score.to_string(),
            t.models_evaluated.to_string(),
            t.improved.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(out_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyreg_core::{DummyGroups, Matrix, PolySpec};

    #[test]
    fn table_marks_narrow_layers_undefined() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.5]]).unwrap();
        let wide = VifReport::from_matrix("dense_1", &x, 10.0).unwrap();
        let narrow = VifReport::from_matrix("dense_2", &x.select_columns(&[0]), 10.0).unwrap();
        let t = vif_table(&[wide, narrow.clone()]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(
            lines[0].starts_with("Layer   | Percentage of VIFs > 10 | Average VIF"),
            "{t}"
        );
        assert!(lines[3].contains("undefined"));
        let mut buf = Vec::new();
        write_vif_csv(&mut buf, &[narrow]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "layer,proportion_over,mean_vif,threshold\ndense_2,,,10\n"
        );
    }

    #[test]
    fn term_labels_use_names() {
        let t = polyreg_core::enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::new(2, 2).unwrap()).unwrap();
        let names = vec!["u".to_string(), "v".to_string()];
        let labels: Vec<String> = (0..t.len()).map(|i| term_label(&t, &names, i)).collect();
        assert_eq!(labels, ["u", "v", "u^2", "u*v", "v^2"]);
    }
}
