//! P-value container with empirical distribution and quantile functions.

use crate::error::{Error, Result};

/// A validated vector of P values with a sorted view.
///
/// Values are kept in input order (`values`) alongside a sorted copy used by
/// the EDF/EQF. Ties are permitted; NaN or out-of-range entries are rejected
/// at construction. All evaluation methods are pure reads, so a sample can be
/// shared freely across threads.
#[derive(Debug, Clone)]
pub struct PValueSample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl PValueSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData {
                op: "PValueSample::new",
                need: 1,
                got: 0,
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "P value at index {i} is {v}; every value must lie in [0,1]"
                )));
            }
        }
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(PValueSample { values, sorted })
    }

    /// Number of tests m.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// P values in input order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Order statistics P_{1:m} <= ... <= P_{m:m}.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Empirical distribution function F~(t) = m^-1 #{i : P_i <= t}.
    pub fn edf_eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(
                "edf_eval",
                format!("t must lie in [0,1], got {t}"),
            ));
        }
        let count = self.sorted.partition_point(|&p| p <= t);
        Ok(count as f64 / self.len() as f64)
    }

    /// Empirical quantile function Q~(u) = inf{x : F~(x) >= u} = P_{ceil(um):m}.
    pub fn eqf_eval(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || u <= 0.0 || u > 1.0 {
            return Err(Error::domain(
                "eqf_eval",
                format!("u must lie in (0,1], got {u}"),
            ));
        }
        let m = self.len();
        let mf = m as f64;
        // Smallest k with k/m >= u; ceil(u*m) may land one off at exact grid
        // points, so adjust by direct comparison.
        let mut k = ((u * mf).ceil() as usize).clamp(1, m);
        while k > 1 && (k - 1) as f64 / mf >= u {
            k -= 1;
        }
        while k < m && (k as f64 / mf) < u {
            k += 1;
        }
        Ok(self.sorted[k - 1])
    }

    /// Modified EQF: min{Q~(t), t}, with the boundary convention 0 at t = 0.
    ///
    /// Always lies on or below the diagonal.
    pub fn modified_eqf_eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(
                "modified_eqf_eval",
                format!("t must lie in [0,1], got {t}"),
            ));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.eqf_eval(t)?.min(t))
    }
}
