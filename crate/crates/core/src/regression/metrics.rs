use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    pub r2: f64,
}

pub fn evaluate(pred: &[f64], truth: &[f64]) -> Result<Metrics> {
    if pred.len() != truth.len() {
        return Err(Error::Evaluation(format!("{} predictions for {} targets", pred.len(), truth.len())));
    }
    if truth.len() < 2 {
        return Err(Error::Evaluation("need at least two targets".into()));
    }
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Evaluation("targets are all identical, R² undefined".into()));
    }
    let (mut abs, mut sq) = (0.0, 0.0);
    for (p, t) in pred.iter().zip(truth) {
        abs += (p - t).abs();
        sq += (p - t) * (p - t);
    }
    Ok(Metrics { mae: abs / n, rmse: (sq / n).sqrt(), r2: 1.0 - sq / ss_tot })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let m = evaluate(&[12.0, 18.0], &[10.0, 20.0]).unwrap();
        assert_eq!((m.mae, m.rmse), (2.0, 2.0));
        assert!((m.r2 - 0.84).abs() < 1e-12);
        let m = evaluate(&[15.0, 15.0], &[10.0, 20.0]).unwrap();
        assert_eq!(m.r2, 0.0);
        assert!(evaluate(&[1.0], &[1.0]).is_err());
        assert!(evaluate(&[1.0, 2.0], &[3.0, 3.0]).is_err());
        assert!(evaluate(&[1.0, 2.0, 3.0], &[3.0, 3.0]).is_err());
    }
}
