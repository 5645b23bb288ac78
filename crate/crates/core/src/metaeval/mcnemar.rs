//! McNemar's test for paired binary outcomes.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Exact-test threshold on the number of discordant pairs.
const EXACT_LIMIT: u64 = 25;

/// Two-sided McNemar's test on paired correctness flags.
///
/// Only discordant pairs matter: `n10` where A is correct and B is not,
/// `n01` for the reverse. With fewer than 25 discordant pairs the exact
/// binomial p-value `2 * P(X <= min(n10, n01))`, `X ~ Bin(n, 1/2)`,
/// capped at 1, is returned; otherwise the chi-square approximation
/// with continuity correction `(|n10 - n01| - 1)^2 / (n10 + n01)` on
/// one degree of freedom.
///
/// Errors if the flag slices differ in length or are empty.
pub fn mcnemar_test(a_correct: &[bool], b_correct: &[bool]) -> Result<f64> {
    if a_correct.len() != b_correct.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            a_correct.len(),
            b_correct.len()
        )));
    }
    if a_correct.is_empty() {
        return Err(Error::InvalidInput("no paired outcomes".to_string()));
    }
    let mut n10 = 0u64;
    let mut n01 = 0u64;
    for (&a, &b) in a_correct.iter().zip(b_correct) {
        match (a, b) {
            (true, false) => n10 += 1,
            (false, true) => n01 += 1,
            _ => {}
        }
    }
    let n = n10 + n01;
    if n == 0 {
        return Ok(1.0);
    }
    if n < EXACT_LIMIT {
        let k = n10.min(n01);
        // 2 * P(X <= k) with X ~ Binomial(n, 1/2); C(n, i) is exact in
        // f64 for n < 25.
        let mut tail = 0.0f64;
        let mut binom = 1.0f64;
        for i in 0..=k {
            if i > 0 {
                binom = binom * (n - i + 1) as f64 / i as f64;
            }
            tail += binom;
        }
        let p = 2.0 * tail * 0.5f64.powi(n as i32);
        Ok(p.min(1.0))
    } else {
        let statistic = (n10.abs_diff(n01) as f64 - 1.0).powi(2) / n as f64;
        let chi = ChiSquared::new(1.0).expect("1 degree of freedom");
        Ok(1.0 - chi.cdf(statistic))
    }
}
