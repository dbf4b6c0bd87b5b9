use serde::{Deserialize, Serialize};

use super::LoopConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Extending,
    Accepted,
    AbandonedDrop,
    AbandonedCap,
    /// Unparseable or degenerate oracle output.
    AbandonedInvalid,
}

/// A rule under construction. After every scoring step the score list is
/// as long as the premise list.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRule {
    /// Canonical premise texts in the order they were generated.
    pub premises: Vec<String>,
    pub scores: Vec<f64>,
    pub status: CandidateStatus,
    pub flagged_unknown: bool,
}

impl CandidateRule {
    pub fn new(seed: impl Into<String>) -> Self {
        Self {
            premises: vec![seed.into()],
            scores: Vec::new(),
            status: CandidateStatus::Extending,
            flagged_unknown: false,
        }
    }

    pub fn push_premise(&mut self, premise: impl Into<String>) {
        debug_assert_eq!(self.status, CandidateStatus::Extending);
        self.premises.push(premise.into());
    }

    pub fn contains(&self, canonical: &str) -> bool {
        self.premises.iter().any(|p| p == canonical)
    }

    /// Records the score of the current premise set and moves the state
    /// machine: accept at `>= e_h`, abandon after `drop_patience` strict
    /// decreases in a row, abandon at the premise cap, else keep extending.
    pub fn record_score(&mut self, score: f64, config: &LoopConfig) -> CandidateStatus {
        self.scores.push(score);
        let patience = config.drop_patience as usize;
        let dropping = self.scores.len() > patience
            && self.scores[self.scores.len() - patience - 1..].windows(2).all(|w| w[1] < w[0]);
        self.status = if score >= config.e_h {
            CandidateStatus::Accepted
        } else if dropping {
            CandidateStatus::AbandonedDrop
        } else if self.premises.len() >= config.max_premises as usize {
            CandidateStatus::AbandonedCap
        } else {
            CandidateStatus::Extending
        };
        self.status
    }

    pub fn abandon_invalid(&mut self) {
        self.status = CandidateStatus::AbandonedInvalid;
    }

    pub fn final_score(&self) -> Option<f64> {
        self.scores.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn run(trajectory: &[f64], config: &LoopConfig) -> CandidateRule {
        let mut candidate = CandidateRule::new("m1");
        for (i, score) in trajectory.iter().enumerate() {
            if i > 0 {
                candidate.push_premise(format!("m{}", i + 1));
            }
            if candidate.record_score(*score, config) != CandidateStatus::Extending {
                break;
            }
        }
        candidate
    }

    #[test]
    fn rising_trajectory_accepted_at_four_premises() {
        let candidate = run(&[0.28, 0.86, 0.87, 0.93], &LoopConfig::default());
        assert_eq!(candidate.status, CandidateStatus::Accepted);
        assert_eq!(candidate.premises.len(), 4);
    }

    #[test]
    fn threshold_is_inclusive() {
        let candidate = run(&[0.9], &LoopConfig::default());
        assert_eq!(candidate.status, CandidateStatus::Accepted);
        let below = run(&[0.899_999_999], &LoopConfig::default());
        assert_eq!(below.status, CandidateStatus::Extending);
    }

    #[test]
    fn two_drops_abandon() {
        let candidate = run(&[0.7, 0.6, 0.5, 0.95], &LoopConfig::default());
        assert_eq!(candidate.status, CandidateStatus::AbandonedDrop);
        assert_eq!(candidate.scores.len(), 3);
        let plateau = run(&[0.7, 0.6, 0.6, 0.5], &LoopConfig::default());
        assert_eq!(plateau.status, CandidateStatus::Extending);
    }

    #[test]
    fn cap_abandons() {
        let candidate = run(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7], &LoopConfig::default());
        assert_eq!(candidate.status, CandidateStatus::AbandonedCap);
        assert_eq!(candidate.premises.len(), 6);
    }

    proptest! {
        #[test]
        fn gate_soundness(trajectory in prop::collection::vec(0.0f64..1.0, 1..10), patience in 1u32..4) {
            let config = LoopConfig { drop_patience: patience, ..LoopConfig::default() };
            let candidate = run(&trajectory, &config);
            prop_assert_eq!(candidate.scores.len(), candidate.premises.len());
            match candidate.status {
                CandidateStatus::Accepted => prop_assert!(candidate.final_score().unwrap() >= config.e_h),
                CandidateStatus::AbandonedDrop => {
                    let tail = &candidate.scores[candidate.scores.len() - patience as usize - 1..];
                    prop_assert!(tail.windows(2).all(|w| w[1] < w[0]));
                }
                CandidateStatus::AbandonedCap => prop_assert_eq!(candidate.premises.len(), 6),
                _ => prop_assert!(candidate.scores.len() == trajectory.len()),
            }
        }
    }
}
