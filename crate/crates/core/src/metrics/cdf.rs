use serde::{Deserialize, Serialize};

/// One step of an empirical CDF: the fraction of samples `<= value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub value: f64,
    pub fraction: f64,
}

/// Empirical CDF with ties collapsed: one point per distinct value.
/// Non-finite samples are dropped.
pub fn ecdf(samples: &[f64]) -> Vec<CdfPoint> {
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let fraction = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.value == x => last.fraction = fraction,
            _ => out.push(CdfPoint { value: x, fraction }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImprovementCdf {
    pub points: Vec<CdfPoint>,
    /// Records skipped because the baseline was zero.
    pub excluded: usize,
}

/// CDF of percentage improvement `(method - baseline) / baseline * 100` over
/// `(baseline, method)` records.
pub fn improvement_cdf(records: &[(f64, f64)]) -> ImprovementCdf {
    let mut excluded = 0;
    let mut improvements = Vec::with_capacity(records.len());
    for &(base, method) in records {
        if base > 0.0 {
            improvements.push((method - base) / base * 100.0);
        } else {
            excluded += 1;
        }
    }
    ImprovementCdf {
        points: ecdf(&improvements),
        excluded,
    }
}

pub fn range_cdf(ranges: &[f64]) -> Vec<CdfPoint> {
    ecdf(ranges)
}

/// Nearest-rank quantile: the smallest sample with at least `q` of the data
/// at or below it. `None` for an empty sample.
pub fn quantile(samples: &[f64], q: f64) -> Option<f64> {
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).max(1);
    Some(v[rank - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_record() {
        let c = improvement_cdf(&[(0.5, 0.75)]);
        assert_eq!(c.points, vec![CdfPoint { value: 50.0, fraction: 1.0 }]);
    }

    #[test]
    fn unchanged_method_steps_at_zero() {
        let c = improvement_cdf(&[(0.4, 0.4), (0.8, 0.8), (0.1, 0.1)]);
        assert_eq!(c.points, vec![CdfPoint { value: 0.0, fraction: 1.0 }]);
    }

    #[test]
    fn zero_baseline_is_excluded() {
        let c = improvement_cdf(&[(0.0, 0.5), (0.5, 0.5)]);
        assert_eq!(c.excluded, 1);
        assert_eq!(c.points.len(), 1);
    }

    /// Sort-and-count oracle: F(v) = #{x <= v} / n at each distinct value.
    fn oracle(samples: &[f64]) -> Vec<(f64, f64)> {
        let mut distinct: Vec<f64> = samples.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        distinct
            .iter()
            .map(|&v| (v, samples.iter().filter(|&&x| x <= v).count() as f64 / samples.len() as f64))
            .collect()
    }

    #[test]
    fn ten_record_fixture() {
        let recs = [
            (0.5, 0.6),
            (0.4, 0.4),
            (0.2, 0.5),
            (0.8, 0.7),
            (0.5, 0.75),
            (0.25, 0.5),
            (0.6, 0.6),
            (0.3, 0.45),
            (0.9, 0.99),
            (0.5, 0.5),
        ];
        let imp: Vec<f64> = recs.iter().map(|&(b, m)| (m - b) / b * 100.0).collect();
        let got: Vec<(f64, f64)> = improvement_cdf(&recs).points.iter().map(|p| (p.value, p.fraction)).collect();
        assert_eq!(got, oracle(&imp));
        assert_eq!(got.last().unwrap().1, 1.0);
    }

    #[test]
    fn range_cdf_cases() {
        assert!(range_cdf(&[]).is_empty());
        assert_eq!(range_cdf(&[45.0]), vec![CdfPoint { value: 45.0, fraction: 1.0 }]);
        let r = [12.0, 45.0, 8.5, 45.0, 30.0, 8.5, 60.0];
        let got: Vec<(f64, f64)> = range_cdf(&r).iter().map(|p| (p.value, p.fraction)).collect();
        assert_eq!(got, oracle(&r));
    }

    #[test]
    fn nearest_rank_quantile() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(quantile(&v, 0.9), Some(9.0));
        assert_eq!(quantile(&v, 1.0), Some(10.0));
        assert_eq!(quantile(&v, 0.0), Some(1.0));
        assert_eq!(quantile(&[], 0.5), None);
    }
}
