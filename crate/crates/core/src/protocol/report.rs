//! Accuracy tables in the layout of per-modality result matrices: one row per
//! model, one column per (dimension, window, tau). In every column the best
//! mean is bold and cells whose per-fold accuracies are statistically
//! indistinguishable from the best (two-sided Wilcoxon, p >= 0.05) are italic.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::experiment::{mean_accuracy, ExperimentModality, ExperimentOutcome};
use super::wilcoxon::wilcoxon_signed_rank;
use crate::preference::AffectDimension;

pub const ON_PAR_ALPHA: f64 = 0.05;

/// A finished cell: its config and fold results.
pub type CellResult = ExperimentOutcome;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub markdown: String,
    pub csv: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    Best,
    OnPar,
    None,
}

/// Column of a table: (dimension, window length, tau).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Column {
    dimension: AffectDimension,
    window: f64,
    tau: f64,
}

impl Column {
    fn cmp_key(&self, other: &Self) -> std::cmp::Ordering {
        self.dimension
            .cmp(&other.dimension)
            .then(self.window.total_cmp(&other.window))
            .then(self.tau.total_cmp(&other.tau))
    }

    fn title(&self) -> String {
        let dim = match self.dimension {
            AffectDimension::Arousal => "Arousal",
            AffectDimension::Valence => "Valence",
        };
        format!("{dim} {}s {}%", self.window, (self.tau * 100.0).round())
    }
}

struct Scored<'a> {
    cell: &'a CellResult,
    model: String,
    mean: Option<f64>,
    marker: Marker,
    p_vs_best: Option<f64>,
}

fn column_of(c: &CellResult) -> Column {
    Column { dimension: c.config.dimension, window: c.config.window_len, tau: c.config.tau }
}

/// Per-fold accuracies of `a` and `b` paired by fold index.
fn paired(a: &CellResult, b: &CellResult) -> (Vec<f64>, Vec<f64>) {
    let by_fold: BTreeMap<usize, f64> = b.folds.iter().filter_map(|f| f.accuracy.map(|x| (f.fold, x))).collect();
    a.folds
        .iter()
        .filter_map(|f| Some((f.accuracy?, *by_fold.get(&f.fold)?)))
        .unzip()
}

/// Two-sided p between two cells over shared completed folds.
pub fn compare_cells(a: &CellResult, b: &CellResult) -> Option<f64> {
    let (x, y) = paired(a, b);
    wilcoxon_signed_rank(&x, &y).ok().map(|r| r.p_value)
}

fn score_group<'a>(cells: Vec<&'a CellResult>) -> Vec<Scored<'a>> {
    let mut scored: Vec<Scored> = cells
        .into_iter()
        .map(|cell| Scored {
            cell,
            model: cell.config.model_name(),
            mean: mean_accuracy(&cell.folds),
            marker: Marker::None,
            p_vs_best: None,
        })
        .collect();
    let best = scored
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.mean.map(|m| (i, m)))
        .fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
            Some((_, bm)) if bm >= m => acc,
            _ => Some((i, m)),
        });
    if let Some((bi, _)) = best {
        let best_cell = scored[bi].cell;
        for (i, s) in scored.iter_mut().enumerate() {
            if i == bi {
                s.marker = Marker::Best;
                continue;
            }
            if s.mean.is_none() {
                continue;
            }
            s.p_vs_best = compare_cells(s.cell, best_cell);
            if s.p_vs_best.is_some_and(|p| p >= ON_PAR_ALPHA) {
                s.marker = Marker::OnPar;
            }
        }
    }
    scored
}

fn cell_text(s: &Scored) -> String {
    match s.mean {
        None => "n/a".into(),
        Some(m) => match s.marker {
            Marker::Best => format!("**{m:.3}**"),
            Marker::OnPar => format!("_{m:.3}_"),
            Marker::None => format!("{m:.3}"),
        },
    }
}

fn modality_title(m: ExperimentModality) -> &'static str {
    match m {
        ExperimentModality::Visual => "Visual",
        ExperimentModality::Audio => "Audio",
        ExperimentModality::Multimodal => "Multimodal",
    }
}

/// Render all cells. Output depends only on the cells, not their order.
pub fn render_report(cells: &[CellResult]) -> Report {
    let mut sorted: Vec<&CellResult> = cells.iter().collect();
    sorted.sort_by(|a, b| {
        let (ca, cb) = (&a.config, &b.config);
        ca.modality
            .cmp(&cb.modality)
            .then(column_of(a).cmp_key(&column_of(b)))
            .then(ca.representation.cmp(&cb.representation))
            .then(ca.encoder.name.cmp(&cb.encoder.name))
            .then(ca.lexicon_mode.cmp(&cb.lexicon_mode))
    });

    // modality -> columns in order -> scored cells
    let mut tables: BTreeMap<ExperimentModality, Vec<(Column, Vec<Scored>)>> = BTreeMap::new();
    let mut i = 0;
    while i < sorted.len() {
        let m = sorted[i].config.modality;
        let col = column_of(sorted[i]);
        let j = i + sorted[i..]
            .iter()
            .take_while(|c| c.config.modality == m && column_of(c).cmp_key(&col).is_eq())
            .count();
        tables.entry(m).or_default().push((col, score_group(sorted[i..j].to_vec())));
        i = j;
    }

    let mut md = String::from("# Affect-change prediction accuracy\n");
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record([
        "modality",
        "model",
        "representation",
        "encoder",
        "lexicon_mode",
        "dimension",
        "window_len",
        "tau",
        "mean_accuracy",
        "completed_folds",
        "skipped_folds",
        "marker",
        "p_vs_best",
    ])
    .expect("in-memory csv");
    let mut skipped_lines = Vec::new();

    for (modality, columns) in &tables {
        let mut rows: Vec<(String, (u8, String, String))> = Vec::new();
        for (_, group) in columns {
            for s in group {
                let c = &s.cell.config;
                let key = (c.representation as u8, c.encoder.name.clone(), c.lexicon_mode.as_str().to_string());
                if !rows.iter().any(|(m, _)| *m == s.model) {
                    rows.push((s.model.clone(), key));
                }
            }
        }
        rows.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));

        let _ = write!(md, "\n## {}\n\n| Model |", modality_title(*modality));
        for (col, _) in columns {
            let _ = write!(md, " {} |", col.title());
        }
        md.push_str("\n|---|");
        md.push_str(&"---:|".repeat(columns.len()));
        md.push('\n');
        for (model, _) in &rows {
            let _ = write!(md, "| {model} |");
            for (_, group) in columns {
                let text = group.iter().find(|s| &s.model == model).map(cell_text).unwrap_or_else(|| "–".into());
                let _ = write!(md, " {text} |");
            }
            md.push('\n');
        }

        for (col, group) in columns {
            for s in group {
                let c = &s.cell.config;
                let completed = s.cell.folds.iter().filter(|f| f.accuracy.is_some()).count();
                let skipped = s.cell.folds.len() - completed;
                csv.write_record([
                    modality.as_str().to_string(),
                    s.model.clone(),
                    c.representation.as_str().to_string(),
                    c.encoder.name.clone(),
                    c.lexicon_mode.as_str().to_string(),
                    c.dimension.as_str().to_string(),
                    format!("{}", col.window),
                    format!("{}", col.tau),
                    s.mean.map(|m| format!("{m:.6}")).unwrap_or_default(),
                    completed.to_string(),
                    skipped.to_string(),
                    match s.marker {
                        Marker::Best => "best",
                        Marker::OnPar => "on_par",
                        Marker::None => "",
                    }
                    .to_string(),
                    s.p_vs_best.map(|p| format!("{p:.6}")).unwrap_or_default(),
                ])
                .expect("in-memory csv");
                for f in s.cell.folds.iter().filter(|f| f.accuracy.is_none()) {
                    skipped_lines.push(format!(
                        "- {} / {} / {}: fold {} skipped ({})",
                        modality_title(*modality),
                        s.model,
                        col.title(),
                        f.fold,
                        f.skipped.as_deref().unwrap_or("unknown reason")
                    ));
                }
            }
        }
    }

    md.push_str(
        "\nMean accuracy over completed folds. **Bold**: best in column. _Italic_: on par with the best \
         (two-sided Wilcoxon signed-rank over per-fold accuracies, p >= 0.05).\n",
    );
    if !skipped_lines.is_empty() {
        md.push_str("\n### Skipped folds\n\n");
        for l in skipped_lines {
            md.push_str(&l);
            md.push('\n');
        }
    }
    let csv = String::from_utf8(csv.into_inner().expect("in-memory csv")).expect("utf-8 csv");
    Report { markdown: md, csv }
}
