use serde::{Deserialize, Serialize};

use super::{InferenceError, PredictionFile, ScoreVector};

/// How the two systems' scores are weighted before summing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum FusionPolicy {
    /// `α_k = 1 / max(S_k)` per image, or 0 when that maximum is not positive.
    #[default]
    MaxNorm,
    Fixed {
        alpha1: f64,
        alpha2: f64,
    },
}

impl FusionPolicy {
    pub fn fixed(alpha1: f64, alpha2: f64) -> Result<Self, InferenceError> {
        let policy = FusionPolicy::Fixed { alpha1, alpha2 };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        if let FusionPolicy::Fixed { alpha1, alpha2 } = *self {
            if !(alpha1.is_finite() && alpha2.is_finite()) || alpha1 < 0.0 || alpha2 < 0.0 {
                return Err(InferenceError::InvalidWeights(format!(
                    "weights must be finite and non-negative, got {alpha1} and {alpha2}"
                )));
            }
            if alpha1 == 0.0 && alpha2 == 0.0 {
                return Err(InferenceError::InvalidWeights("weights are both zero".into()));
            }
        }
        Ok(())
    }
}

fn max_norm(scores: &ScoreVector) -> f64 {
    let max = scores.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        1.0 / max
    } else {
        0.0
    }
}

/// `α1·S1 + α2·S2` over identical key sets.
pub fn fuse_predictions(
    sys1: &ScoreVector,
    sys2: &ScoreVector,
    policy: &FusionPolicy,
) -> Result<ScoreVector, InferenceError> {
    policy.validate()?;
    if let Some(key) =
        sys1.keys().find(|k| !sys2.contains_key(*k)).or_else(|| sys2.keys().find(|k| !sys1.contains_key(*k)))
    {
        return Err(InferenceError::KeyMismatch(format!("{key:?} is in only one vector")));
    }
    if let Some((key, _)) = sys1.iter().chain(sys2).find(|(_, v)| !v.is_finite()) {
        return Err(InferenceError::KeyMismatch(format!("score for {key:?} is not finite")));
    }
    let (a1, a2) = match *policy {
        FusionPolicy::MaxNorm => (max_norm(sys1), max_norm(sys2)),
        FusionPolicy::Fixed { alpha1, alpha2 } => (alpha1, alpha2),
    };
    Ok(sys1.iter().map(|(k, s1)| (k.clone(), a1 * s1 + a2 * sys2[k])).collect())
}

/// Image-by-image fusion of two prediction files with the same images.
pub fn fuse_files(
    sys1: &PredictionFile,
    sys2: &PredictionFile,
    policy: &FusionPolicy,
) -> Result<PredictionFile, InferenceError> {
    if sys1.images.len() != sys2.images.len() || sys1.images.keys().any(|k| !sys2.images.contains_key(k)) {
        return Err(InferenceError::KeyMismatch("prediction files cover different images".into()));
    }
    let mut out = PredictionFile::default();
    for (image, s1) in &sys1.images {
        let fused = fuse_predictions(s1, &sys2.images[image], policy)
            .map_err(|e| InferenceError::KeyMismatch(format!("image {image:?}: {e}")))?;
        out.images.insert(image.clone(), fused);
    }
    Ok(out)
}
