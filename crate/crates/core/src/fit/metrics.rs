use crate::error::{Error, Result};

fn check(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(alloc::format!("lengths differ: {a} vs {b}")));
    }
    if a == 0 {
        return Err(Error::InvalidArgument("empty input".into()));
    }
    Ok(())
}

/// Mean absolute prediction error, in response units (not a percentage).
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check(pred.len(), actual.len())?;
    Ok(pred.iter().zip(actual).map(|(p, a)| libm::fabs(p - a)).sum::<f64>() / pred.len() as f64)
}

/// Proportion of correctly classified cases.
pub fn pcc(pred: &[u32], actual: &[u32]) -> Result<f64> {
    check(pred.len(), actual.len())?;
    let hits = pred.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Pearson correlation; an error when either input is constant.
pub fn corr(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check(pred.len(), actual.len())?;
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let ma = actual.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, a) in pred.iter().zip(actual) {
        let dp = p - mp;
        let da = a - ma;
        sxy += dp * da;
        sxx += dp * dp;
        syy += da * da;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation of a constant vector".into()));
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}

/// `1 - SSR/SST` of predictions against actual values.
pub fn r_squared(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check(pred.len(), actual.len())?;
    let ssr: f64 = pred.iter().zip(actual).map(|(p, a)| (a - p) * (a - p)).sum();
    Ok(r_squared_from(actual, ssr))
}

pub(crate) fn r_squared_from(actual: &[f64], ssr: f64) -> f64 {
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if sst == 0.0 {
        if ssr == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ssr / sst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_predictions() {
        let a = [1.0, 2.0, 4.0];
        assert_eq!(mape(&a, &a).unwrap(), 0.0);
        assert!((corr(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(corr(&[1.0, 1.0], &[1.0, 1.0]).is_err());
        assert_eq!(pcc(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
    }

    #[test]
    fn shifted_predictions() {
        let a = [1.0, -2.0, 4.0, 0.5];
        let p: alloc::vec::Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        assert!((mape(&p, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pcc_counts_matches() {
        assert!((pcc(&[1, 2, 3], &[1, 2, 2]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(pcc(&[1], &[1, 2]).is_err());
        assert!(mape(&[], &[]).is_err());
    }
}
