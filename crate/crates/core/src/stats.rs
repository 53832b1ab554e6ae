//! Correlation with a two-sided significance level.

use crate::error::{invalid, Result};
use crate::memory::pearson;

/// Pearson `r` over `n` paired values with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson correlation tested with `t = r sqrt((n - 2) / (1 - r^2))` against
/// Student's t with `n - 2` degrees of freedom.
pub fn correlation_test(a: &[f64], b: &[f64]) -> Result<Correlation> {
    if a.len() < 3 {
        return Err(invalid("correlation test needs at least three pairs"));
    }
    let r = pearson(a, b)?;
    let n = a.len();
    Ok(Correlation { r, p: pearson_p_value(r, n), n })
}

pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let rr = r * r;
    if rr >= 1.0 {
        return 0.0;
    }
    let t = r * libm::sqrt(df / (1.0 - rr));
    student_t_two_sided(t, df)
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    // the continued fraction converges fast on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let clamp = |v: f64| if libm::fabs(v) < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - (a + b) * x / (a + 1.0));
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let step = d * c;
        h *= step;
        if libm::fabs(step - 1.0) < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, StudentsT};
    use statrs::function::beta::beta_reg;

    #[test]
    fn incomplete_beta_matches_reference() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 3.0), (9.0, 0.5), (40.0, 0.5), (2.5, 7.5)] {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                assert_relative_eq!(incomplete_beta(a, b, x), beta_reg(a, b, x), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn t_tail_matches_reference() {
        for df in [1.0, 3.0, 7.0, 18.0, 43.0] {
            let dist = StudentsT::new(0.0, 1.0, df).unwrap();
            for t in [0.0, 0.3, 1.0, 2.1, 4.5, 9.0] {
                let want = 2.0 * (1.0 - dist.cdf(t));
                assert_relative_eq!(student_t_two_sided(t, df), want, max_relative = 1e-9, epsilon = 1e-14);
                assert_eq!(student_t_two_sided(-t, df), student_t_two_sided(t, df));
            }
        }
    }

    #[test]
    fn twenty_cells_at_the_five_percent_boundary() {
        let p = pearson_p_value(0.444, 20);
        assert!((p - 0.05).abs() < 0.002, "{p}");
    }

    #[test]
    fn exact_relations() {
        let a = [1.0, 4.0, 2.0, 8.0, 5.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 3.0).collect();
        let c = correlation_test(&a, &b).unwrap();
        assert_relative_eq!(c.r, 1.0, epsilon = 1e-12);
        assert!(c.p < 1e-6);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_relative_eq!(correlation_test(&a, &neg).unwrap().r, -1.0, epsilon = 1e-12);
        assert!(correlation_test(&a, &[1.0; 5]).is_err());
        assert!(correlation_test(&a[..2], &b[..2]).is_err());
    }
}
