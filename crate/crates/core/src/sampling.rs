//! Deterministic low-discrepancy sample points in coordinate boxes.

use crate::error::{Error, Result};
use crate::manifold::ChartPoint;

/// Fraction of each box side kept clear at both ends.
pub const MARGIN: f64 = 0.05;
/// Starting index into the Halton sequence.
pub const SEED: u64 = 17;

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Axis-aligned box `[lo_k, hi_k]` per coordinate.
pub type Region = Vec<(f64, f64)>;

/// `count` points spread over `regions` round-robin (point `i` lies in
/// region `i % regions.len()`), each inset by [`MARGIN`].
pub fn sample_points(regions: &[Region], count: usize) -> Result<Vec<ChartPoint>> {
    if regions.is_empty() {
        return Err(Error::Sampling("no sample region".into()));
    }
    let dim = regions[0].len();
    if dim > PRIMES.len() {
        return Err(Error::Sampling(format!("at most {} dimensions are supported", PRIMES.len())));
    }
    for r in regions {
        if r.len() != dim {
            return Err(Error::Dimension { expected: dim, got: r.len() });
        }
        if let Some((lo, hi)) = r.iter().find(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Sampling(format!("empty sample interval [{lo}, {hi}]")));
        }
    }
    let nr = regions.len();
    Ok((0..count)
        .map(|i| {
            let region = &regions[i % nr];
            let index = SEED + (i / nr) as u64;
            let c: Vec<f64> = region
                .iter()
                .enumerate()
                .map(|(k, &(lo, hi))| {
                    let w = hi - lo;
                    lo + MARGIN * w + (1.0 - 2.0 * MARGIN) * w * halton(index, PRIMES[k])
                })
                .collect();
            ChartPoint::new(&c)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-16);
        assert!((halton(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn points_stay_inside_inset_regions() {
        let regions = vec![vec![(0.2, 0.8), (0.0, 6.0)], vec![(1.2, 5.0), (0.0, 6.0)]];
        let pts = sample_points(&regions, 40).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let r = &regions[i % 2];
            for (k, &(lo, hi)) in r.iter().enumerate() {
                let m = MARGIN * (hi - lo);
                assert!(p.x[k] >= lo + m && p.x[k] <= hi - m);
            }
        }
        assert_eq!(pts, sample_points(&regions, 40).unwrap());
        assert!(sample_points(&[vec![(1.0, 1.0)]], 3).is_err());
        assert!(sample_points(&[], 3).is_err());
    }
}
