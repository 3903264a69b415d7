//! Significance tests on run samples.

use cmas_core::analysis::{welch_statistic, AnalysisError};
use serde::Serialize;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub mean_difference: f64,
    pub p_two_sided: f64,
    /// One-sided p for "first mean is larger".
    pub p_greater: f64,
    /// One-sided p for "first mean is smaller".
    pub p_less: f64,
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom. Two constant samples give p = 1 when their means agree and
/// p = 0 otherwise.
pub fn welch_test(a: &[f64], b: &[f64]) -> Result<WelchTest, AnalysisError> {
    let w = welch_statistic(a, b)?;
    let (p_greater, p_less) = if w.t.is_infinite() {
        if w.t > 0.0 {
            (0.0, 1.0)
        } else {
            (1.0, 0.0)
        }
    } else if w.t == 0.0 && w.mean_difference == 0.0 && !(w.df > 0.0 && w.df.is_finite()) {
        (0.5, 0.5)
    } else {
        let dist = StudentsT::new(0.0, 1.0, w.df).expect("positive degrees of freedom");
        (dist.sf(w.t), dist.cdf(w.t))
    };
    let p_two_sided = if w.mean_difference == 0.0 && w.t == 0.0 { 1.0 } else { (2.0 * p_greater.min(p_less)).min(1.0) };
    Ok(WelchTest { t: w.t, df: w.df, mean_difference: w.mean_difference, p_two_sided, p_greater, p_less })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignTest {
    pub positive: u64,
    pub negative: u64,
    /// One-sided p for "first values tend to be larger"; ties are dropped.
    pub p_greater: f64,
}

pub fn sign_test(first: &[f64], second: &[f64]) -> SignTest {
    let positive = first.iter().zip(second).filter(|(a, b)| a > b).count() as u64;
    let negative = first.iter().zip(second).filter(|(a, b)| a < b).count() as u64;
    let trials = positive + negative;
    let p_greater = if trials == 0 || positive == 0 {
        1.0
    } else {
        Binomial::new(0.5, trials).expect("valid binomial").sf(positive - 1)
    };
    SignTest { positive, negative, p_greater }
}
