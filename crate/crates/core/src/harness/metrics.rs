use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Median and interquartile bounds of a rank sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankQuartiles {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// One step of a recall@k curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub recall: f64,
}

/// Quantile by linear interpolation between order statistics of `sorted`.
fn quantile(sorted: &[usize], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let (a, b) = (sorted[lo] as f64, sorted[hi] as f64);
    a + (h - lo as f64) * (b - a)
}

pub fn median_and_iqr(ranks: &[usize]) -> Result<RankQuartiles> {
    if ranks.is_empty() {
        return Err(Error::contract("quartiles of an empty rank list"));
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    Ok(RankQuartiles {
        median: quantile(&sorted, 0.5),
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
    })
}

/// Fraction of ranks at or below `k`.
pub fn recall_at_k(ranks: &[usize], k: usize) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::contract("recall of an empty rank list"));
    }
    if k == 0 {
        return Err(Error::contract("recall@k needs k >= 1"));
    }
    Ok(ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64)
}

/// recall@k as a step curve: a point at k = 1, at every distinct rank and at
/// k = pool_size. Between points the recall is that of the point to the left.
pub fn recall_curve(ranks: &[usize], pool_size: usize) -> Result<Vec<CurvePoint>> {
    if ranks.is_empty() {
        return Err(Error::contract("recall curve of an empty rank list"));
    }
    if let Some(r) = ranks.iter().find(|&&r| r == 0 || r > pool_size) {
        return Err(Error::contract(format!("rank {r} outside 1..={pool_size}")));
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let mut ks = Vec::with_capacity(sorted.len() + 2);
    ks.push(1);
    ks.extend_from_slice(&sorted);
    ks.push(pool_size);
    ks.dedup();

    let n = sorted.len() as f64;
    let mut covered = 0;
    Ok(ks
        .into_iter()
        .map(|k| {
            while covered < sorted.len() && sorted[covered] <= k {
                covered += 1;
            }
            CurvePoint {
                k,
                recall: covered as f64 / n,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quartile_examples() {
        assert_eq!(median_and_iqr(&[1, 41, 799]).unwrap().median, 41.0);
        assert_eq!(median_and_iqr(&[2, 4]).unwrap().median, 3.0);
        let hundred: Vec<usize> = (1..=100).collect();
        let q = median_and_iqr(&hundred).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (25.75, 50.5, 75.25));
        assert!(median_and_iqr(&[]).is_err());
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall_at_k(&[1, 51, 2], 1).unwrap(), 1.0 / 3.0);
        assert_eq!(recall_at_k(&[1, 51, 2], 50).unwrap(), 2.0 / 3.0);
        assert_eq!(recall_at_k(&[1, 51, 2], 51).unwrap(), 1.0);
        assert!(recall_at_k(&[], 1).is_err());
        assert!(recall_at_k(&[1], 0).is_err());
    }

    #[test]
    fn curve_examples() {
        let pts = |v: Vec<CurvePoint>| v.into_iter().map(|p| (p.k, p.recall)).collect::<Vec<_>>();
        assert_eq!(pts(recall_curve(&[1, 1, 3], 5).unwrap()), [(1, 2.0 / 3.0), (3, 1.0), (5, 1.0)]);
        assert_eq!(pts(recall_curve(&[4], 4).unwrap()), [(1, 0.0), (4, 1.0)]);
        assert!(recall_curve(&[6], 5).is_err());
        assert!(recall_curve(&[0], 5).is_err());
    }

    proptest! {
        #[test]
        fn curve_matches_per_k_recall(ranks in prop::collection::vec(1usize..60, 1..40), extra in 0usize..10) {
            let pool = ranks.iter().copied().max().unwrap() + extra;
            let curve = recall_curve(&ranks, pool).unwrap();
            prop_assert_eq!(curve.last().unwrap().k, pool);
            prop_assert_eq!(curve.last().unwrap().recall, 1.0);
            for k in 1..=pool {
                let step = curve.iter().rev().find(|p| p.k <= k).unwrap();
                prop_assert_eq!(step.recall, recall_at_k(&ranks, k).unwrap());
            }
            let q = median_and_iqr(&ranks).unwrap();
            prop_assert!(q.q1 <= q.median && q.median <= q.q3);
        }
    }
}
