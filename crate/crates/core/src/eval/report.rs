use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::ShapeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: AverageMetrics,
    pub weighted_avg: AverageMetrics,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Text,
    Json,
}

/// `2PR / (P + R)`, or 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Two decimals, halves rounded away from zero.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_names(k: usize) -> Vec<String> {
    if k == ShapeLabel::ALL.len() {
        ShapeLabel::names()
    } else {
        (0..k).map(|c| c.to_string()).collect()
    }
}

/// Per-class precision, recall and f1 with 0 for empty denominators.
pub fn report(cm: &ConfusionMatrix) -> Result<ClassificationReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid("classification report of an empty confusion matrix"));
    }
    let per_class = (0..cm.k())
        .map(|c| {
            let tp = cm.get(c, c);
            let precision = ratio(tp, cm.col_sum(c));
            let recall = ratio(tp, cm.row_sum(c));
            ClassMetrics {
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: cm.row_sum(c),
            }
        })
        .collect();
    ClassificationReport::from_per_class(class_names(cm.k()), per_class, ratio(cm.trace(), total))
}

impl ClassificationReport {
    /// Builds the averages from given per-class metrics; the total is the
    /// sum of supports.
    pub fn from_per_class(classes: Vec<String>, per_class: Vec<ClassMetrics>, accuracy: f64) -> Result<Self> {
        if classes.len() != per_class.len() || per_class.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} class names for {} metric rows",
                classes.len(),
                per_class.len()
            )));
        }
        let total: u64 = per_class.iter().map(|m| m.support).sum();
        if total == 0 {
            return Err(Error::invalid("classification report with zero total support"));
        }
        let k = per_class.len() as f64;
        let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k;
        let weighted =
            |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| m.support as f64 * f(m)).sum::<f64>() / total as f64;
        Ok(Self {
            macro_avg: AverageMetrics {
                precision: mean(|m| m.precision),
                recall: mean(|m| m.recall),
                f1: mean(|m| m.f1),
                support: total,
            },
            weighted_avg: AverageMetrics {
                precision: weighted(|m| m.precision),
                recall: weighted(|m| m.recall),
                f1: weighted(|m| m.f1),
                support: total,
            },
            classes,
            per_class,
            accuracy,
            total,
        })
    }

    fn rounded(&self) -> Self {
        let avg = |a: &AverageMetrics| AverageMetrics {
            precision: round2(a.precision),
            recall: round2(a.recall),
            f1: round2(a.f1),
            support: a.support,
        };
        Self {
            classes: self.classes.clone(),
            per_class: self
                .per_class
                .iter()
                .map(|m| ClassMetrics {
                    precision: round2(m.precision),
                    recall: round2(m.recall),
                    f1: round2(m.f1),
                    support: m.support,
                })
                .collect(),
            accuracy: round2(self.accuracy),
            macro_avg: avg(&self.macro_avg),
            weighted_avg: avg(&self.weighted_avg),
            total: self.total,
        }
    }

    fn to_text(&self) -> String {
        let r = self.rounded();
        let width = r
            .classes
            .iter()
            .map(String::len)
            .chain(["weighted avg".len()])
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{:>width$} {:>9} {:>9} {:>9} {:>9}", "", "precision", "recall", "f1-score", "support");
        out.push('\n');
        for (name, m) in r.classes.iter().zip(&r.per_class) {
            let _ = writeln!(
                out,
                "{name:>width$} {:>9.2} {:>9.2} {:>9.2} {:>9}",
                m.precision, m.recall, m.f1, m.support
            );
        }
        out.push('\n');
        let _ = writeln!(out, "{:>width$} {:>9} {:>9} {:>9.2} {:>9}", "accuracy", "", "", r.accuracy, r.total);
        for (name, a) in [("macro avg", &r.macro_avg), ("weighted avg", &r.weighted_avg)] {
            let _ = writeln!(
                out,
                "{name:>width$} {:>9.2} {:>9.2} {:>9.2} {:>9}",
                a.precision, a.recall, a.f1, a.support
            );
        }
        out
    }
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    #[serde(flatten)]
    report: &'a ClassificationReport,
    display: ClassificationReport,
}

/// Text mimics the familiar precision/recall/f1/support table. JSON carries
/// full precision plus a `display` copy rounded to two decimals.
pub fn render_report(rep: &ClassificationReport, style: ReportStyle) -> String {
    match style {
        ReportStyle::Text => rep.to_text(),
        ReportStyle::Json => serde_json::to_string_pretty(&ReportDocument {
            report: rep,
            display: rep.rounded(),
        })
        .expect("report serializes"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collapse(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn recall_from_confusion_row() {
        let mut counts = vec![vec![0u64; 5]; 5];
        counts[3] = vec![2, 23, 5, 63, 19];
        counts[0][0] = 1;
        let rep = report(&ConfusionMatrix::from_counts(counts).unwrap()).unwrap();
        assert_eq!(rep.per_class[3].recall, 63.0 / 112.0);
        assert_eq!(rep.per_class[3].support, 112);
        assert_eq!(round2(rep.per_class[3].recall), 0.56);
    }

    #[test]
    fn zero_denominators_give_zero() {
        let cm = ConfusionMatrix::from_counts(vec![vec![3, 0], vec![2, 0]]).unwrap();
        let rep = report(&cm).unwrap();
        assert_eq!(rep.per_class[1].precision, 0.0);
        assert_eq!(rep.per_class[1].f1, 0.0);
        assert!(report(&ConfusionMatrix::zeros(3)).is_err());
    }

    #[test]
    fn f1_harmonic_mean() {
        assert!((f1_score(0.19, 0.76) - 0.304).abs() < 1e-12);
        assert_eq!(f1_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn round_half_away() {
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(-0.125), -0.13);
        assert_eq!(round2(0.5625), 0.56);
    }

    #[test]
    fn perfect_report_text() {
        let cm = ConfusionMatrix::from_counts((0..5).map(|i| (0..5).map(|j| u64::from(i == j) * 3).collect()).collect())
            .unwrap();
        let text = render_report(&report(&cm).unwrap(), ReportStyle::Text);
        let numbers: Vec<&str> = text.split_whitespace().filter(|t| t.contains('.')).collect();
        assert_eq!(numbers.len(), 5 * 3 + 1 + 6);
        assert!(numbers.iter().all(|&t| t == "1.00"));
        assert!(collapse(&text).contains("accuracy 1.00 15"));
        assert!(collapse(&text).contains("Hourglass 1.00 1.00 1.00 3"));
    }

    #[test]
    fn printed_inception_matrix_renders_accuracy_line() {
        let cm = ConfusionMatrix::from_counts(vec![
            vec![12, 4, 1, 0, 0],
            vec![15, 75, 35, 14, 2],
            vec![4, 31, 13, 9, 2],
            vec![1, 17, 8, 80, 6],
            vec![0, 3, 4, 7, 7],
        ])
        .unwrap();
        let text = render_report(&report(&cm).unwrap(), ReportStyle::Text);
        assert!(collapse(&text).contains("accuracy 0.53 350"), "{text}");
    }

    #[test]
    fn json_text_consistency() {
        let cm = ConfusionMatrix::from_counts(vec![
            vec![8, 5, 1, 2, 1],
            vec![25, 79, 18, 14, 5],
            vec![5, 32, 6, 14, 2],
            vec![2, 23, 5, 63, 19],
            vec![0, 2, 1, 9, 5],
        ])
        .unwrap();
        let rep = report(&cm).unwrap();
        let json: serde_json::Value = serde_json::from_str(&render_report(&rep, ReportStyle::Json)).unwrap();
        let back: ClassificationReport = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(back, rep);
        assert_eq!(json["display"]["per_class"][3]["recall"], 0.56);

        let text = render_report(&rep, ReportStyle::Text);
        for (line, class) in text.lines().skip(2).zip(&back.per_class) {
            let vals: Vec<f64> = line.split_whitespace().skip(1).take(3).map(|t| t.parse().unwrap()).collect();
            assert_eq!(vals, vec![round2(class.precision), round2(class.recall), round2(class.f1)]);
        }
    }
}
