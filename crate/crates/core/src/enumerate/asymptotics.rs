use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::CountSeries;
use crate::error::{Error, Result};

/// Natural logarithm of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(a / b)` without forming the quotient.
pub fn log_ratio(a: &BigUint, b: &BigUint) -> f64 {
    ln_biguint(a) - ln_biguint(b)
}

/// `q_N / q_(N-1)` at the largest available `N`, which needs at least ten
/// nonzero trailing terms.
pub fn estimate_growth(series: &CountSeries) -> Result<f64> {
    let v = &series.values;
    if v.len() < 10 {
        return Err(Error::Argument(format!(
            "growth estimate needs at least 10 terms, series has {}",
            v.len()
        )));
    }
    if let Some(k) = v[v.len() - 10..].iter().position(|x| x.is_zero()) {
        return Err(Error::Trivial(format!(
            "count at n = {} is zero",
            v.len() - 10 + k
        )));
    }
    Ok(log_ratio(&v[v.len() - 1], &v[v.len() - 2]).exp())
}

/// Least-squares slope of `ln q_n - n ln(rho_inv)` against `ln n` over
/// `window = (lo, hi)`, negated.
pub fn fit_subexp_exponent(series: &CountSeries, rho_inv: f64, window: (usize, usize)) -> Result<f64> {
    let (lo, hi) = window;
    let lo = lo.max(1);
    if hi >= series.values.len() {
        return Err(Error::Fit(format!(
            "window end {hi} beyond series length {}",
            series.values.len()
        )));
    }
    if hi < lo || hi - lo + 1 < 5 {
        return Err(Error::Fit(format!("window ({lo}, {hi}) has fewer than 5 points")));
    }
    if !(rho_inv > 0.0 && rho_inv.is_finite()) {
        return Err(Error::Fit(format!("growth factor {rho_inv} is not positive")));
    }
    let ln_rho = rho_inv.ln();
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let q = &series.values[n];
        if q.is_zero() {
            return Err(Error::Fit(format!("zero count at n = {n}")));
        }
        xs.push((n as f64).ln());
        ys.push(ln_biguint(q) - n as f64 * ln_rho);
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-(sxy / sxx) + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::Endpoint;
    use num_integer::binomial;

    fn series(values: Vec<BigUint>) -> CountSeries {
        CountSeries::new(Endpoint::Any, values)
    }

    #[test]
    fn ln_of_huge_numbers() {
        let x = BigUint::from(3u32).pow(5000);
        assert!((ln_biguint(&x) - 5000.0 * 3f64.ln()).abs() < 1e-9 * 5000.0);
        assert_eq!(ln_biguint(&BigUint::from(1u32)), 0.0);
        assert_eq!(ln_biguint(&BigUint::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn constant_series() {
        let s = series(vec![BigUint::from(1u32); 50]);
        assert_eq!(estimate_growth(&s).unwrap(), 1.0);
        assert_eq!(fit_subexp_exponent(&s, 1.0, (10, 40)).unwrap(), 0.0);
    }

    #[test]
    fn ballot_numbers_fit_one_half() {
        let v: Vec<BigUint> = (0..=400u64)
            .map(|n| binomial(BigUint::from(n), BigUint::from(n.div_ceil(2))))
            .collect();
        let r = fit_subexp_exponent(&series(v), 2.0, (200, 400)).unwrap();
        assert!((r - 0.5).abs() < 0.05, "{r}");
    }

    #[test]
    fn errors() {
        let s = series(vec![BigUint::from(1u32); 5]);
        assert!(estimate_growth(&s).is_err());
        let mut v = vec![BigUint::from(1u32); 20];
        v[15] = BigUint::zero();
        assert!(matches!(estimate_growth(&series(v)), Err(Error::Trivial(_))));
        let s = series(vec![BigUint::from(1u32); 20]);
        assert!(matches!(fit_subexp_exponent(&s, 1.0, (10, 13)), Err(Error::Fit(_))));
        assert!(matches!(fit_subexp_exponent(&s, 1.0, (10, 30)), Err(Error::Fit(_))));
    }
}
