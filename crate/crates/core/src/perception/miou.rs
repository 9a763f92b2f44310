use std::collections::{BTreeMap, HashMap};

use super::segment::SegmentLabeling;
use crate::error::{Error, Result};

/// Mean intersection-over-union of a predicted labeling against per-cell
/// ground truth.
///
/// Predicted and truth segments are matched one-to-one, greedily by
/// descending intersection size (ties go to the smaller `(pred, truth)` label
/// pair). The mean is taken over truth segments; an unmatched truth segment
/// scores zero.
pub fn compute_miou(predicted: &SegmentLabeling, truth: &[u32]) -> Result<f64> {
    if predicted.labels.len() != truth.len() {
        return Err(Error::validation(
            "truth",
            format!(
                "{} cells, prediction has {}",
                truth.len(),
                predicted.labels.len()
            ),
        ));
    }

    let mut pred_size: HashMap<u32, usize> = HashMap::new();
    let mut truth_size: BTreeMap<u32, usize> = BTreeMap::new();
    let mut inter: HashMap<(u32, u32), usize> = HashMap::new();
    for (&p, &t) in predicted.labels.iter().zip(truth) {
        if p > 0 {
            *pred_size.entry(p).or_default() += 1;
        }
        if t > 0 {
            *truth_size.entry(t).or_default() += 1;
        }
        if p > 0 && t > 0 {
            *inter.entry((p, t)).or_default() += 1;
        }
    }
    if truth_size.is_empty() {
        return Err(Error::Undefined(
            "mIoU over a truth labeling without segments",
        ));
    }

    let mut pairs: Vec<((u32, u32), usize)> = inter.into_iter().collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut pred_used = std::collections::HashSet::new();
    let mut iou: BTreeMap<u32, f64> = truth_size.keys().map(|&t| (t, 0.0)).collect();
    let mut truth_used = std::collections::HashSet::new();
    for ((p, t), n) in pairs {
        if pred_used.contains(&p) || truth_used.contains(&t) {
            continue;
        }
        pred_used.insert(p);
        truth_used.insert(t);
        let union = pred_size[&p] + truth_size[&t] - n;
        iou.insert(t, n as f64 / union as f64);
    }
    Ok(iou.values().sum::<f64>() / iou.len() as f64)
}
