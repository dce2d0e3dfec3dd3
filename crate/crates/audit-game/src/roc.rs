//! Detection curves over the defender's per-round signal probability.
//!
//! A round is predicted positive when its signal probability reaches the
//! threshold. The default labeling counts an attack under a signal as a true
//! positive and — deliberately — an attack without a signal as a true
//! negative; [`LabelScheme::Standard`] restores the conventional negatives.

use serde::Serialize;

use crate::sim::TournamentResult;

/// How rounds are mapped to the four confusion cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    /// TP = signal & attack, FP = signal & quit, TN = no-signal & attack,
    /// FN = no-signal & quit.
    Inverted,
    /// TP = signal & attack, FP = signal & quit, TN = no-signal & quit,
    /// FN = no-signal & attack.
    Standard,
}

/// One detection point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Threshold sweep with trapezoidal area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    /// Points in threshold order; thresholds with an empty rate denominator
    /// are skipped and listed separately.
    pub points: Vec<RocPoint>,
    pub skipped_thresholds: Vec<f64>,
    pub auc: f64,
    pub labels: LabelScheme,
}

/// Evenly spaced thresholds spanning `[0, 1]`.
pub fn default_thresholds(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Build the detection curve from pooled `(signal probability, attacked)`
/// samples.
pub fn roc_from_samples(
    samples: &[(f64, bool)],
    thresholds: &[f64],
    labels: LabelScheme,
) -> RocCurve {
    let mut points = Vec::new();
    let mut skipped_thresholds = Vec::new();
    for &theta in thresholds {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut tn = 0usize;
        let mut fal_n = 0usize;
        for &(prob, attacked) in samples {
            let predicted = prob >= theta;
            match labels {
                LabelScheme::Inverted => match (predicted, attacked) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => tn += 1,
                    (false, false) => fal_n += 1,
                },
                LabelScheme::Standard => match (predicted, attacked) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, false) => tn += 1,
                    (false, true) => fal_n += 1,
                },
            }
        }
        if tp + fal_n == 0 || fp + tn == 0 {
            skipped_thresholds.push(theta);
            continue;
        }
        points.push(RocPoint {
            threshold: theta,
            fpr: fp as f64 / (fp + tn) as f64,
            tpr: tp as f64 / (tp + fal_n) as f64,
        });
    }
    let auc = trapezoid_auc(&points);
    RocCurve {
        points,
        skipped_thresholds,
        auc,
        labels,
    }
}

/// Detection curve of a tournament under the default labeling.
pub fn roc_curve(result: &TournamentResult, thresholds: &[f64]) -> RocCurve {
    roc_curve_with(result, thresholds, LabelScheme::Inverted)
}

/// Detection curve of a tournament under an explicit labeling.
pub fn roc_curve_with(
    result: &TournamentResult,
    thresholds: &[f64],
    labels: LabelScheme,
) -> RocCurve {
    roc_from_samples(&result.detection_samples(), thresholds, labels)
}

/// Trapezoid over the attained points, completed through the corners so that
/// degenerate single-point curves still integrate.
fn trapezoid_auc(points: &[RocPoint]) -> f64 {
    let mut xy: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    xy.push((0.0, 0.0));
    xy.push((1.0, 1.0));
    xy.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    xy.dedup();
    let mut auc = 0.0;
    for w in xy.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        auc += (x2 - x1) * (y1 + y2) / 2.0;
    }
    auc
}
