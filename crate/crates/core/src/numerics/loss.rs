use crate::error::{Error, Result};

/// Scores are clamped to `[SCORE_CLAMP, 1 - SCORE_CLAMP]` before the log.
pub const SCORE_CLAMP: f64 = 1e-12;

/// Mean binary cross-entropy.
pub fn bce_loss(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::invalid("binary cross-entropy of an empty batch"));
    }
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            context: "scores vs labels",
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    let mut total = 0.0;
    for (i, (&s, &y)) in scores.iter().zip(labels).enumerate() {
        if s.is_nan() {
            return Err(Error::invalid(format!("NaN score at position {i}")));
        }
        let s = s.clamp(SCORE_CLAMP, 1.0 - SCORE_CLAMP);
        total -= y * s.ln() + (1.0 - y) * (1.0 - s).ln();
    }
    Ok(total / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_scores_give_ln2() {
        let l = bce_loss(&[0.5, 0.5, 0.5], &[0.0, 1.0, 1.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn near_perfect_prediction_is_near_zero() {
        let l = bce_loss(&[1.0 - 1e-12], &[1.0]).unwrap();
        assert!(l < 1e-11);
        // clamping keeps an exact 0/1 score finite
        assert!(bce_loss(&[1.0], &[0.0]).unwrap().is_finite());
    }

    #[test]
    fn two_sample_value() {
        // scalar brute force: -(y ln s + (1-y) ln(1-s)) per sample
        let brute = {
            let a = -(1.0 * 0.9f64.ln());
            let b = -((1.0 - 0.0) * (1.0f64 - 0.2).ln());
            (a + b) / 2.0
        };
        let l = bce_loss(&[0.9, 0.2], &[1.0, 0.0]).unwrap();
        assert!((l - brute).abs() < 1e-15);
        assert!((l - 0.164252).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        assert!(bce_loss(&[], &[]).is_err());
        assert!(bce_loss(&[f64::NAN], &[1.0]).is_err());
        assert!(bce_loss(&[0.3], &[1.0, 0.0]).is_err());
    }
}
