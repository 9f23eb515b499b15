//! B-spline basis machinery and the variation-diminishing (Schoenberg)
//! spline operator used to smooth the empirical quantile function.

use crate::ecdf::PValueSample;
use crate::error::{Error, Result};

/// Spline order used throughout the smoothing pipeline (quartic pieces,
/// cubic derivative).
pub const SPLINE_ORDER: usize = 5;

/// EDF evaluation points contributing interior knots, concentrated near zero
/// so the quantile function's behavior at small P values is captured while
/// the right tail is heavily smoothed.
const KNOT_EDF_POINTS: [f64; 9] = [0.001, 0.003, 0.00625, 0.01, 0.0125, 0.025, 0.05, 0.1, 0.25];

/// Clamped knot sequence on [0, 1].
///
/// The extended sequence repeats 0 and 1 `order` times around the strictly
/// increasing interior knots, giving `interior.len() + order` basis
/// functions.
#[derive(Debug, Clone)]
pub struct KnotVector {
    interior: Vec<f64>,
    order: usize,
    extended: Vec<f64>,
}

impl KnotVector {
    /// Order-5 clamped knot vector; the smoothing pipeline uses this
    /// constructor exclusively.
    pub fn clamped(interior: Vec<f64>) -> Result<Self> {
        Self::with_order(interior, SPLINE_ORDER)
    }

    /// Clamped knot vector of a caller-chosen order (>= 2). Low orders are
    /// occasionally useful to cross-check basis values by hand.
    pub fn with_order(interior: Vec<f64>, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::domain("KnotVector", "order must be at least 2"));
        }
        if interior
            .iter()
            .any(|&x| !x.is_finite() || x <= 0.0 || x >= 1.0)
        {
            return Err(Error::domain(
                "KnotVector",
                "interior knots must lie strictly inside (0,1)",
            ));
        }
        for w in interior.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::domain(
                    "KnotVector",
                    format!("interior knots must be strictly increasing, got {w:?}"),
                ));
            }
        }
        let mut extended = Vec::with_capacity(interior.len() + 2 * order);
        extended.extend(std::iter::repeat_n(0.0, order));
        extended.extend_from_slice(&interior);
        extended.extend(std::iter::repeat_n(1.0, order));
        Ok(KnotVector {
            interior,
            order,
            extended,
        })
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Full clamped sequence t_1..t_{n+k}.
    pub fn extended(&self) -> &[f64] {
        &self.extended
    }

    /// Number of basis functions n.
    pub fn basis_count(&self) -> usize {
        self.interior.len() + self.order
    }

    /// Greville abscissae t*_j = (t_{j+1} + ... + t_{j+k-1}) / (k-1),
    /// 0-based; the first is 0 and the last is 1.
    pub fn greville(&self) -> Vec<f64> {
        let k = self.order;
        (0..self.basis_count())
            .map(|j| self.extended[j + 1..j + k].iter().sum::<f64>() / (k - 1) as f64)
            .collect()
    }

    /// Index of the knot span containing u, clamped to the nonempty spans of
    /// the clamped sequence; u = 1 falls in the last span (left-limit
    /// convention).
    fn find_span(&self, u: f64) -> usize {
        let n = self.basis_count();
        let idx = self.extended.partition_point(|&t| t <= u);
        idx.saturating_sub(1).clamp(self.order - 1, n - 1)
    }

    /// All `ord` basis values of order `ord` that are nonzero on the span of
    /// u, i.e. B_{span-ord+1..=span, ord}(u). Cox-de Boor triangular scheme.
    fn nonzero_basis(&self, u: f64, ord: usize) -> (usize, Vec<f64>) {
        let span = self.find_span(u);
        let t = &self.extended;
        let p = ord - 1;
        let mut vals = vec![0.0; ord];
        let mut left = vec![0.0; ord];
        let mut right = vec![0.0; ord];
        vals[0] = 1.0;
        for j in 1..=p {
            left[j] = u - t[span + 1 - j];
            right[j] = t[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom != 0.0 { vals[r] / denom } else { 0.0 };
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        (span, vals)
    }
}

/// Interior knots for a P-value sample: the ordered unique values of
/// {1/m, 2/m, 3/m, 4/m} and the EDF evaluated at nine fixed points near
/// zero, with any 0 or 1 entries removed. Falls back to {1/m, ..., 4/m}
/// when deduplication leaves fewer than two knots.
pub fn build_knots(sample: &PValueSample) -> Result<KnotVector> {
    let m = sample.len();
    if m < 5 {
        return Err(Error::InsufficientData {
            op: "build_knots",
            need: 5,
            got: m,
        });
    }
    let mf = m as f64;
    let fractions = || (1..=4u32).map(|i| f64::from(i) / mf);

    let mut candidates: Vec<f64> = fractions().collect();
    for t in KNOT_EDF_POINTS {
        candidates.push(sample.edf_eval(t)?);
    }
    candidates.retain(|&x| x > 0.0 && x < 1.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    if candidates.len() < 2 {
        candidates = fractions().collect();
    }
    KnotVector::clamped(candidates)
}

/// Value of the j-th (0-based) order-k B-spline at u via the de Boor-Cox
/// recurrence; u = 1 uses the left-limit convention of the clamped basis.
pub fn bspline_basis(knots: &KnotVector, j: usize, u: f64) -> Result<f64> {
    let n = knots.basis_count();
    if j >= n {
        return Err(Error::InvalidInput(format!(
            "basis index {j} out of range for {n} basis functions"
        )));
    }
    if !u.is_finite() || !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(
            "bspline_basis",
            format!("u must lie in [0,1], got {u}"),
        ));
    }
    let (span, vals) = knots.nonzero_basis(u, knots.order());
    let first = span + 1 - knots.order();
    if j < first || j > span {
        return Ok(0.0);
    }
    Ok(vals[j - first])
}

/// Spline in B-form on a clamped knot vector; the smoothed EQF
/// representation.
///
/// Coefficients are one per basis function; evaluation at 0 returns the
/// first coefficient and evaluation at 1 the last (endpoint interpolation
/// of the clamped basis).
#[derive(Debug, Clone)]
pub struct SmoothedEQF {
    knots: KnotVector,
    coefficients: Vec<f64>,
    greville: Vec<f64>,
}

impl SmoothedEQF {
    pub fn from_coefficients(knots: KnotVector, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != knots.basis_count() {
            return Err(Error::InvalidInput(format!(
                "coefficient count {} does not match basis dimension {}",
                coefficients.len(),
                knots.basis_count()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::numerical("SmoothedEQF", "non-finite coefficient"));
        }
        let greville = knots.greville();
        Ok(SmoothedEQF {
            knots,
            coefficients,
            greville,
        })
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn greville(&self) -> &[f64] {
        &self.greville
    }

    /// Spline value at u; arguments outside the unit interval are clamped.
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.knots.order();
        let (span, vals) = self.knots.nonzero_basis(u, k);
        let first = span + 1 - k;
        vals.iter()
            .enumerate()
            .map(|(r, v)| self.coefficients[first + r] * v)
            .sum()
    }

    /// First derivative at u (the estimated quantile density when the spline
    /// represents a smoothed EQF), via the B-spline coefficient-difference
    /// formula on the order-(k-1) basis.
    pub fn derivative(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.knots.order();
        let t = self.knots.extended();
        let n = self.knots.basis_count();
        let (span, vals) = self.knots.nonzero_basis(u, k - 1);
        let first = span + 1 - (k - 1);
        let mut acc = 0.0;
        for (r, v) in vals.iter().enumerate() {
            let j = first + r;
            if j == 0 || j >= n {
                continue; // zero-width end basis carries no derivative mass
            }
            let denom = t[j + k - 1] - t[j];
            if denom > 0.0 {
                let d = (k - 1) as f64 * (self.coefficients[j] - self.coefficients[j - 1]) / denom;
                acc += d * v;
            }
        }
        acc
    }
}

/// Schoenberg variation-diminishing spline of h: coefficients are h at the
/// Greville abscissae. Reproduces constants and linear functions exactly and
/// preserves monotonicity and convexity of the coefficient sequence.
pub fn vd_spline<F: Fn(f64) -> f64>(h: F, knots: &KnotVector) -> Result<SmoothedEQF> {
    let greville = knots.greville();
    let mut coefficients = Vec::with_capacity(greville.len());
    for &g in &greville {
        let v = h(g);
        if !v.is_finite() {
            return Err(Error::numerical(
                "vd_spline",
                format!("h({g}) = {v} is not finite"),
            ));
        }
        coefficients.push(v);
    }
    SmoothedEQF::from_coefficients(knots.clone(), coefficients)
}

/// Derivative of a smoothed EQF at u; see [`SmoothedEQF::derivative`].
pub fn spline_derivative(s: &SmoothedEQF, u: f64) -> f64 {
    s.derivative(u)
}
