use isac_core::Error;

/// For each probability `p`, the smallest observed value `t` with
/// fraction(values > t) ≤ p (empirical, right-continuous).
pub fn ccdf(values: &[f64], levels: &[f64]) -> Result<Vec<f64>, Error> {
    if values.is_empty() {
        return Err(Error::InvalidInput("CCDF of no values".into()));
    }
    if let Some(p) = levels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!(
            "CCDF level {p} outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(levels
        .iter()
        .map(|&p| {
            // at most `allowed` values may exceed the threshold
            let allowed = ((p * n as f64) + 1e-9).floor() as usize;
            let k = n.saturating_sub(allowed).max(1);
            sorted[k - 1]
        })
        .collect())
}

/// Fraction of `sorted` (ascending) strictly above `t`.
pub fn exceedance(sorted: &[f64], t: f64) -> f64 {
    let at_or_below = sorted.partition_point(|v| *v <= t);
    (sorted.len() - at_or_below) as f64 / sorted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values() {
        let v = vec![3.5; 40];
        assert_eq!(ccdf(&v, &[0.5, 0.1, 1e-3]).unwrap(), vec![3.5; 3]);
    }

    #[test]
    fn order_statistics() {
        let v: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        assert_eq!(ccdf(&v, &[0.1]).unwrap(), vec![90.0]);
        assert_eq!(ccdf(&v, &[0.0]).unwrap(), vec![100.0]);
        assert_eq!(ccdf(&v, &[0.015]).unwrap(), vec![99.0]);
    }

    #[test]
    fn definition_holds_against_brute_force() {
        let v: Vec<f64> = (0..257).map(|i| ((i * 7919) % 101) as f64 * 0.5).collect();
        for p in [0.0, 0.01, 0.05, 0.2, 0.5, 0.9] {
            let t = ccdf(&v, &[p]).unwrap()[0];
            let frac = |t: f64| v.iter().filter(|x| **x > t).count() as f64 / v.len() as f64;
            assert!(frac(t) <= p + 1e-12);
            // no smaller observed value satisfies the bound
            assert!(v.iter().filter(|x| **x < t).all(|x| frac(*x) > p));
        }
    }

    #[test]
    fn empty_is_rejected() {
        assert!(ccdf(&[], &[0.1]).is_err());
    }

    #[test]
    fn exceedance_counts_strictly_greater() {
        let s = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(exceedance(&s, 2.0), 0.25);
        assert_eq!(exceedance(&s, 0.0), 1.0);
    }
}
