use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat_source::{ParamBounds, ProcessParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhsDesign {
    pub n_samples: usize,
    pub bounds: ParamBounds,
    pub seed: u64,
}

/// `n` points in `[0,1)^d`, one per stratum in every column.
///
/// Each column gets its own permutation of strata and a uniform jitter inside
/// each stratum. Returned row-major, `n` rows of `d` values.
pub fn lhs_unit(n: usize, d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(rng);
        for (row, &s) in rows.iter_mut().zip(&strata) {
            row[j] = (s as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    rows
}

pub fn lhs_sample(design: &LhsDesign) -> Result<Vec<ProcessParams>> {
    design.bounds.validate()?;
    if design.n_samples == 0 {
        return Err(Error::invalid("n_samples must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    Ok(lhs_unit(design.n_samples, 5, &mut rng)
        .into_iter()
        .map(|row| design.bounds.from_unit(&[row[0], row[1], row[2], row[3], row[4]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_points_land_in_quartiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = lhs_unit(4, 3, &mut rng);
        for j in 0..3 {
            let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            col.sort_by(f64::total_cmp);
            for (k, v) in col.iter().enumerate() {
                assert!(*v >= k as f64 * 0.25 && *v < (k + 1) as f64 * 0.25, "{col:?}");
            }
        }
    }

    #[test]
    fn rejects_empty_and_inverted_bounds() {
        let mut design = LhsDesign {
            n_samples: 0,
            bounds: ParamBounds::TABLE,
            seed: 1,
        };
        assert!(lhs_sample(&design).is_err());
        design.n_samples = 5;
        design.bounds.0[2] = (0.4, 0.25);
        assert!(lhs_sample(&design).is_err());
    }
}
