use serde::{Deserialize, Serialize};

/// Smallest distance kept between a probability and 0 or 1.
pub const PROBABILITY_MARGIN: f64 = f64::EPSILON;

/// Raw yes/no scores for a statement (log domain, unbounded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    #[serde(rename = "yes")]
    pub p_yes: f64,
    #[serde(rename = "no")]
    pub p_no: f64,
}

impl ScorePair {
    pub fn new(p_yes: f64, p_no: f64) -> Self {
        Self { p_yes, p_no }
    }

    pub fn is_finite(&self) -> bool {
        self.p_yes.is_finite() && self.p_no.is_finite()
    }
}

/// Keeps a probability strictly inside (0, 1).
pub fn clamp_open(p: f64) -> f64 {
    p.clamp(PROBABILITY_MARGIN, 1.0 - PROBABILITY_MARGIN)
}

/// Two-way softmax `e^yes / (e^yes + e^no)`, evaluated without overflow and
/// kept strictly inside (0, 1).
pub fn normalize_yes_no(pair: ScorePair) -> f64 {
    let d = pair.p_no - pair.p_yes;
    let p = if d >= 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    };
    clamp_open(p)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(normalize_yes_no(ScorePair::new(2.0, 2.0)), 0.5);
        assert!((normalize_yes_no(ScorePair::new(1.0, 0.0)) - 0.731_058_578_6).abs() < 1e-9);
        let extreme = normalize_yes_no(ScorePair::new(1e6, -1e6));
        assert!(extreme < 1.0 && extreme > 0.5);
        assert!(normalize_yes_no(ScorePair::new(-1e6, 1e6)) > 0.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            let p = normalize_yes_no(ScorePair::new(a, b));
            let q = normalize_yes_no(ScorePair::new(b, a));
            prop_assert!(p > 0.0 && p < 1.0);
            prop_assert!((p + q - 1.0).abs() < 1e-12);
        }

        #[test]
        fn shift_invariant(a in -10.0f64..10.0, b in -10.0f64..10.0, s in -100.0f64..100.0) {
            let p = normalize_yes_no(ScorePair::new(a, b));
            let q = normalize_yes_no(ScorePair::new(a + s, b + s));
            prop_assert!((p - q).abs() < 1e-9);
        }
    }
}
