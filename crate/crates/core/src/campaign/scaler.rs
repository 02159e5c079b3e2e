use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-channel standardization with population statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Fits one (mean, std) pair per channel from that channel's samples.
    pub fn fit(channels: &[Vec<f64>]) -> Result<Self> {
        let mut mean = Vec::with_capacity(channels.len());
        let mut std = Vec::with_capacity(channels.len());
        for (c, values) in channels.iter().enumerate() {
            if values.len() < 2 {
                return Err(Error::invalid(format!(
                    "scaler channel {c} needs >= 2 samples, got {}",
                    values.len()
                )));
            }
            let n = values.len() as f64;
            let m = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            if !(s > 1e-12 * m.abs().max(1e-300)) || !s.is_finite() {
                return Err(Error::ZeroVariance(format!("scaler channel {c}")));
            }
            mean.push(m);
            std.push(s);
        }
        Ok(Self { mean, std })
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, channel: usize, value: f64) -> f64 {
        (value - self.mean[channel]) / self.std[channel]
    }

    pub fn inverse(&self, channel: usize, value: f64) -> f64 {
        value * self.std[channel] + self.mean[channel]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle, then floor the train and validation shares; the test split
/// takes the remainder.
pub fn split_indices(n: usize, ratios: [f64; 3], seed: u64) -> Result<Split> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split ratios must be non-negative and sum to 1, got {ratios:?}")));
    }
    let n_train = (n as f64 * ratios[0] + 1e-9).floor() as usize;
    let n_val = (n as f64 * ratios[1] + 1e-9).floor() as usize;
    let n_test = n.saturating_sub(n_train + n_val);
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::invalid(format!(
            "{n} records with ratios {ratios:?} leave an empty split ({n_train}/{n_val}/{n_test})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..n_train].to_vec();
    let mut val = order[n_train..n_train + n_val].to_vec();
    let mut test = order[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_toy_set() {
        let s = Scaler::fit(&[vec![1.0, 3.0]]).unwrap();
        assert_eq!((s.mean[0], s.std[0]), (2.0, 1.0));
        assert_eq!(s.transform(0, 1.0), -1.0);
        assert_eq!(s.transform(0, 3.0), 1.0);
    }

    #[test]
    fn constant_channel_is_rejected() {
        assert!(matches!(
            Scaler::fit(&[vec![1.0, 2.0], vec![5.0; 4]]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn paper_sized_split() {
        let s = split_indices(482, [0.8, 0.1, 0.1], 9).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (385, 48, 49));
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..482).collect::<Vec<_>>());
        assert_eq!(s, split_indices(482, [0.8, 0.1, 0.1], 9).unwrap());
    }

    #[test]
    fn degenerate_ratios_rejected() {
        assert!(split_indices(100, [1.0, 0.0, 0.0], 0).is_err());
        assert!(split_indices(100, [0.5, 0.3, 0.3], 0).is_err());
        assert!(split_indices(5, [0.8, 0.1, 0.1], 0).is_err());
    }
}
