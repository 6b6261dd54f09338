use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OscError;
use crate::graph::LatticeShape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    pub bin_width: f64,
    /// Node count above which pairs are subsampled.
    pub exhaustive_limit: usize,
    /// Number of sampled pairs when subsampling.
    pub pair_budget: usize,
    pub seed: u64,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self {
            bin_width: 1.0,
            exhaustive_limit: 2000,
            pair_budget: 4_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBin {
    /// Lower edge of the distance bin.
    pub r_lo: f64,
    /// Mean pair distance inside the bin.
    pub r_mean: f64,
    pub correlation: f64,
    pub pairs: usize,
}

/// `C(r) = <cos(θ_i − θ_j)>` over node pairs binned by periodic lattice
/// distance. Empty bins are omitted.
pub fn pair_correlation(
    theta: &[f64],
    shape: &LatticeShape,
    opts: &CorrelationOptions,
) -> Result<Vec<CorrelationBin>, OscError> {
    let n = theta.len();
    if n != shape.len() {
        return Err(OscError::Length {
            expected: shape.len(),
            got: n,
        });
    }
    if !(opts.bin_width > 0.0) {
        return Err(OscError::Invalid("bin_width must be positive".into()));
    }
    let side = shape.side as isize;
    let coords: Vec<[isize; 3]> = (0..n)
        .map(|i| {
            let c = shape.coord(i);
            let mut out = [0isize; 3];
            for (o, v) in out.iter_mut().zip(c) {
                *o = v as isize;
            }
            out
        })
        .collect();
    let dist = |i: usize, j: usize| {
        let mut s = 0isize;
        for a in 0..3 {
            let mut d = (coords[j][a] - coords[i][a]).rem_euclid(side);
            if d > side / 2 {
                d -= side;
            }
            s += d * d;
        }
        (s as f64).sqrt()
    };
    let max_r = (shape.dims as f64).sqrt() * (shape.side / 2) as f64;
    let n_bins = (max_r / opts.bin_width).floor() as usize + 1;
    let mut sum = vec![0.0; n_bins];
    let mut rsum = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    let mut add = |i: usize, j: usize| {
        let r = dist(i, j);
        let b = ((r / opts.bin_width) as usize).min(n_bins - 1);
        sum[b] += (theta[i] - theta[j]).cos();
        rsum[b] += r;
        count[b] += 1;
    };
    if n <= opts.exhaustive_limit {
        for i in 0..n {
            for j in i + 1..n {
                add(i, j);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut drawn = 0;
        while drawn < opts.pair_budget {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                add(i, j);
                drawn += 1;
            }
        }
    }
    Ok((0..n_bins)
        .filter(|&b| count[b] > 0)
        .map(|b| CorrelationBin {
            r_lo: b as f64 * opts.bin_width,
            r_mean: rsum[b] / count[b] as f64,
            correlation: sum[b] / count[b] as f64,
            pairs: count[b],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn equal_phases_give_unit_correlation() {
        let shape = LatticeShape::new(8, 2).unwrap();
        let bins = pair_correlation(&[0.3; 64], &shape, &CorrelationOptions::default()).unwrap();
        assert!(!bins.is_empty());
        assert!(bins.iter().all(|b| (b.correlation - 1.0).abs() < 1e-12));
        assert_eq!(bins.iter().map(|b| b.pairs).sum::<usize>(), 64 * 63 / 2);
    }

    #[test]
    fn random_phases_are_uncorrelated() {
        let shape = LatticeShape::new(64, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let theta: Vec<f64> = (0..4096).map(|_| rng.random::<f64>() * TAU).collect();
        let bins = pair_correlation(&theta, &shape, &CorrelationOptions::default()).unwrap();
        for b in &bins {
            assert!(b.correlation.abs() <= 0.1, "{b:?}");
        }
    }

    #[test]
    fn antiphase_halves_anticorrelate_across_the_ring() {
        let shape = LatticeShape::new(64, 1).unwrap();
        let theta: Vec<f64> = (0..64).map(|i| if i < 32 { 0.0 } else { PI }).collect();
        let bins = pair_correlation(&theta, &shape, &CorrelationOptions::default()).unwrap();
        let far = bins.last().unwrap();
        assert_eq!(far.r_lo, 32.0);
        assert!((far.correlation + 1.0).abs() < 1e-12);
        // nearest neighbours: 62 same-cluster bonds, 2 across the interfaces
        assert!((bins[0].correlation - 60.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        let shape = LatticeShape::new(4, 2).unwrap();
        assert!(pair_correlation(&[0.0; 3], &shape, &CorrelationOptions::default()).is_err());
    }
}
