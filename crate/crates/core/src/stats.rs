//! Rank statistics and summaries for comparing reset counts.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest pooled sample size handled by exact enumeration.
pub const EXACT_MAX_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    pub u_a: f64,
    pub u_b: f64,
    pub p_two_sided: f64,
    /// Probability of a `u_a` at least this large when `a` is not shifted up.
    pub p_greater: f64,
    /// Probability of a `u_a` at least this small when `a` is not shifted down.
    pub p_less: f64,
    pub exact: bool,
}

/// Midranks (1-based) of the pooled sample, plus the tie-group sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let r = 0.5 * ((start + 1) + end) as f64;
        for &k in &order[start..end] {
            ranks[k] = r;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Two-sample Mann-Whitney U test with midranks for ties.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Mann-Whitney needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("Mann-Whitney samples contain NaN".into()));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let offset = (na * (na + 1)) as f64 / 2.0;
    let u_a = ranks[..na].iter().sum::<f64>() - offset;
    let u_b = (na * nb) as f64 - u_a;

    let (p_greater, p_less, exact) = if n <= EXACT_MAX_N {
        let (mut ge, mut le, mut total) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            let u: f64 = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum::<f64>()
                - offset;
            total += 1;
            if u >= u_a - 1e-9 {
                ge += 1;
            }
            if u <= u_a + 1e-9 {
                le += 1;
            }
        }
        (ge as f64 / total as f64, le as f64 / total as f64, true)
    } else {
        let mu = (na * nb) as f64 / 2.0;
        let nf = n as f64;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (nf * (nf - 1.0));
        let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - tie_term);
        if var <= 0.0 {
            (1.0, 1.0, false)
        } else {
            let sd = var.sqrt();
            let z = Normal::new(0.0, 1.0).expect("standard normal");
            let hi = 1.0 - z.cdf((u_a - mu - 0.5) / sd);
            let lo = z.cdf((u_a - mu + 0.5) / sd);
            (hi.min(1.0), lo.min(1.0), false)
        }
    };
    Ok(MannWhitney {
        u_a,
        u_b,
        p_two_sided: (2.0 * p_greater.min(p_less)).min(1.0),
        p_greater,
        p_less,
        exact,
    })
}

/// Bonferroni adjustment for `m` comparisons.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summary(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
        min: v[0],
        max: v[v.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerated_example() {
        let r = mann_whitney_u(&[5.0, 6.0, 7.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u_a, 9.0);
        assert_eq!(r.u_b, 0.0);
        assert!(r.exact);
        assert!((r.p_greater - 0.05).abs() < 1e-12);
        assert!((r.p_two_sided - 0.1).abs() < 1e-12);
        assert_eq!(r.p_less, 1.0);
    }

    #[test]
    fn symmetric_and_trivial() {
        let a = [1.0, 2.0, 2.0, 5.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u_a, 8.0);
        assert_eq!(r.u_b, 8.0);
        assert_eq!(r.p_two_sided, 1.0);
        let r = mann_whitney_u(&[1.0], &[2.0]).unwrap();
        assert_eq!(r.u_a, 0.0);
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn normal_branch() {
        let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..20).map(|i| i as f64 + 10.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(!r.exact);
        assert_eq!(r.u_a + r.u_b, 400.0);
        assert!(r.p_less < 0.01 && r.p_greater > 0.99);
        let same = mann_whitney_u(&[3.0; 10], &[3.0; 10]).unwrap();
        assert_eq!(same.p_two_sided, 1.0);
    }

    #[test]
    fn summaries() {
        let s = summary(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.n, s.min, s.max), (4, 1.0, 4.0));
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        assert!(summary(&[]).is_none());
        assert_eq!(bonferroni(0.02, 3), 0.06);
        assert_eq!(bonferroni(0.5, 3), 1.0);
    }
}
