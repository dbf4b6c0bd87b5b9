use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Dataset, EvalError};
use crate::inference::PredictionFile;

/// Mean of precision at each positive's rank, ranking by descending score
/// with ties in input order. `None` without positives.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0u32;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] {
            hits += 1;
            sum += f64::from(hits) / (rank + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / f64::from(hits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Per-class AP in [0, 1].
    pub per_class: BTreeMap<String, f64>,
    /// Unweighted mean over classes with a positive, in [0, 1].
    pub map: f64,
    /// Classes without positives, left out of the mean.
    pub excluded: Vec<String>,
    pub samples: usize,
    pub top1: Option<f64>,
}

impl MetricReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.per_class.keys().map(String::len).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "{:<width$}  {:>7}", "class", "AP");
        for (class, ap) in &self.per_class {
            let _ = writeln!(out, "{class:<width$}  {:>7.2}", ap * 100.0);
        }
        let _ = writeln!(out, "{:<width$}  {:>7.2}", "mAP", self.map * 100.0);
        if let Some(top1) = self.top1 {
            let _ = writeln!(out, "{:<width$}  {:>7.2}", "top-1", top1 * 100.0);
        }
        if !self.excluded.is_empty() {
            let _ = writeln!(out, "no positives: {}", self.excluded.join(", "));
        }
        out
    }
}

/// Per-class AP and their mean. Each class maps to (scores, labels).
pub fn mean_average_precision(classes: &BTreeMap<String, (Vec<f64>, Vec<bool>)>) -> Result<MetricReport, EvalError> {
    let mut per_class = BTreeMap::new();
    let mut excluded = Vec::new();
    let mut samples = 0;
    for (class, (scores, labels)) in classes {
        if scores.len() != labels.len() {
            return Err(EvalError::LengthMismatch { class: class.clone(), scores: scores.len(), labels: labels.len() });
        }
        samples = samples.max(scores.len());
        match average_precision(scores, labels) {
            Some(ap) => {
                per_class.insert(class.clone(), ap);
            }
            None => excluded.push(class.clone()),
        }
    }
    let map = if per_class.is_empty() { 0.0 } else { per_class.values().sum::<f64>() / per_class.len() as f64 };
    Ok(MetricReport { per_class, map, excluded, samples, top1: None })
}

/// mAP of a prediction file against dataset labels, over every predicted
/// class. Each dataset image must be predicted with the same class set.
pub fn map_of_predictions(predictions: &PredictionFile, dataset: &Dataset) -> Result<MetricReport, EvalError> {
    let classes: Vec<String> = predictions
        .images
        .values()
        .flat_map(|row| row.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut table: BTreeMap<String, (Vec<f64>, Vec<bool>)> =
        classes.iter().map(|c| (c.clone(), (Vec::new(), Vec::new()))).collect();
    for record in &dataset.records {
        let row = predictions
            .images
            .get(&record.image_id)
            .ok_or_else(|| EvalError::KeyMismatch(format!("image {:?} has no prediction", record.image_id)))?;
        for class in &classes {
            let score = row.get(class).ok_or_else(|| {
                EvalError::KeyMismatch(format!("image {:?} has no score for {class:?}", record.image_id))
            })?;
            let entry = table.get_mut(class).expect("class listed");
            entry.0.push(*score);
            entry.1.push(record.gt_activities.contains(class));
        }
    }
    mean_average_precision(&table)
}

/// Fraction of questions whose chosen option is the correct one.
pub fn top1_accuracy(
    predictions: &BTreeMap<String, String>,
    truth: &BTreeMap<String, String>,
) -> Result<f64, EvalError> {
    if predictions.len() != truth.len() || predictions.keys().any(|k| !truth.contains_key(k)) {
        return Err(EvalError::KeyMismatch("predictions and truth cover different questions".into()));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let correct = predictions.iter().filter(|(q, choice)| truth[*q] == **choice).count();
    Ok(correct as f64 / truth.len() as f64)
}

/// Top-1 accuracy of the highest-scoring activity per image (ties to the
/// first in key order) against single-label records.
pub fn top1_of_predictions(predictions: &PredictionFile, dataset: &Dataset) -> Result<f64, EvalError> {
    let mut chosen = BTreeMap::new();
    let mut truth = BTreeMap::new();
    for record in &dataset.records {
        let mut labels = record.gt_activities.iter();
        let (Some(label), None) = (labels.next(), labels.next()) else {
            return Err(EvalError::InvalidDataset(format!(
                "image {:?} needs exactly one activity for top-1",
                record.image_id
            )));
        };
        truth.insert(record.image_id.clone(), label.clone());
    }
    for (image, row) in &predictions.images {
        let best = row
            .iter()
            .fold(None::<(&String, f64)>, |best, (k, v)| match best {
                Some((_, b)) if *v <= b => best,
                _ => Some((k, *v)),
            })
            .map(|(k, _)| k.clone())
            .unwrap_or_default();
        chosen.insert(image.clone(), best);
    }
    top1_accuracy(&chosen, &truth)
}
