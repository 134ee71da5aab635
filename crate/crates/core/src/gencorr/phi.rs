//! Trimmed-Spearman coordinate functions `phi_k(u) = c_k (u - m_k) sigma_k(u)`
//! with trapezoidal trimming functions `sigma_k`, and exact integrals of
//! their products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise polynomial, zero outside `[breaks[0], breaks[last]]`. Piece `i`
/// lives on `[breaks[i], breaks[i+1]]` and is stored in the local variable
/// `s = u - breaks[i]` (coefficients in increasing degree).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

fn poly_eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
}

/// Re-expands `p(s)` as a polynomial in `s' = s - shift`.
fn poly_shift(c: &[f64], shift: f64) -> Vec<f64> {
    // Horner-style synthetic expansion of p(s' + shift)
    let mut out = vec![0.0; c.len()];
    for &coef in c.iter().rev() {
        // out <- out * (s' + shift) + coef
        let mut next = vec![0.0; c.len()];
        for (j, &o) in out.iter().enumerate() {
            if j + 1 < next.len() {
                next[j + 1] += o;
            }
            next[j] += o * shift;
        }
        next[0] += coef;
        out = next;
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `int_0^h p(s) ds`
fn poly_integral(c: &[f64], h: f64) -> f64 {
    let mut pow = h;
    let mut total = 0.0;
    for (j, &v) in c.iter().enumerate() {
        total += v * pow / (j + 1) as f64;
        pow *= h;
    }
    total
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Vec<f64>>) -> Self {
        assert_eq!(breaks.len(), pieces.len() + 1);
        assert!(breaks.windows(2).all(|w| w[0] <= w[1]));
        Self { breaks, pieces }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    /// Coefficients of the piece containing `u`, re-centred at `origin`.
    fn local_at(&self, u: f64, origin: f64) -> Option<Vec<f64>> {
        let (lo, hi) = self.support();
        if u < lo || u > hi {
            return None;
        }
        let idx = self.breaks[1..]
            .partition_point(|&b| b < u)
            .min(self.pieces.len() - 1);
        Some(poly_shift(&self.pieces[idx], origin - self.breaks[idx]))
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u < lo || u > hi {
            return 0.0;
        }
        let idx = self.breaks[1..]
            .partition_point(|&b| b < u)
            .min(self.pieces.len() - 1);
        poly_eval(&self.pieces[idx], u - self.breaks[idx])
    }

    /// Pointwise product on the merged breakpoints.
    pub fn mul(&self, other: &PiecewisePoly) -> PiecewisePoly {
        let (a0, a1) = self.support();
        let (b0, b1) = other.support();
        let lo = a0.max(b0);
        let hi = a1.min(b1);
        if lo >= hi {
            return PiecewisePoly::new(vec![lo, lo], vec![vec![0.0]]);
        }
        let mut breaks: Vec<f64> = self
            .breaks
            .iter()
            .chain(&other.breaks)
            .copied()
            .filter(|&b| b >= lo && b <= hi)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let p = self.local_at(mid, w[0]).unwrap_or_else(|| vec![0.0]);
            let q = other.local_at(mid, w[0]).unwrap_or_else(|| vec![0.0]);
            pieces.push(poly_mul(&p, &q));
        }
        PiecewisePoly::new(breaks, pieces)
    }

    /// Multiplies by the linear function `u - center` times `scale`.
    fn times_linear(&self, center: f64, scale: f64) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .zip(&self.breaks)
            .map(|(c, &a)| {
                let lin = [scale * (a - center), scale];
                poly_mul(c, &lin)
            })
            .collect();
        PiecewisePoly::new(self.breaks.clone(), pieces)
    }

    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(c, w)| poly_integral(c, w[1] - w[0]))
            .sum()
    }
}

/// Trapezoidal trimming function on `[lower, upper]` with ramps of width
/// `delta`, normalized to integrate to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trimming {
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
    /// Plateau height `1 / (upper - lower - delta)`.
    pub plateau: f64,
}

impl Trimming {
    pub fn new(lower: f64, upper: f64, delta: f64) -> Result<Self> {
        if !(lower > 0.0 && lower < upper && upper < 1.0) {
            return Err(Error::Domain(format!(
                "trimming interval [{lower}, {upper}] must satisfy 0 < lower < upper < 1"
            )));
        }
        if !(delta > 0.0 && delta < 0.5 * (upper - lower)) {
            return Err(Error::Domain(format!(
                "ramp width {delta} must lie in (0, {})",
                0.5 * (upper - lower)
            )));
        }
        Ok(Self {
            lower,
            upper,
            delta,
            plateau: 1.0 / (upper - lower - delta),
        })
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= self.lower || u >= self.upper {
            0.0
        } else if u < self.lower + self.delta {
            self.plateau * (u - self.lower) / self.delta
        } else if u > self.upper - self.delta {
            self.plateau * (self.upper - u) / self.delta
        } else {
            self.plateau
        }
    }

    fn as_poly(&self) -> PiecewisePoly {
        let k = self.plateau;
        let d = self.delta;
        PiecewisePoly::new(
            vec![self.lower, self.lower + d, self.upper - d, self.upper],
            vec![vec![0.0, k / d], vec![k], vec![k, -k / d]],
        )
    }
}

/// One coordinate function `phi(u) = scale * (u - center) * sigma(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimmedSpearman {
    pub trimming: Trimming,
    pub center: f64,
    pub scale: f64,
    #[serde(skip)]
    poly: Option<PiecewisePoly>,
}

impl TrimmedSpearman {
    pub fn new(trimming: Trimming) -> Self {
        let sigma = trimming.as_poly();
        let center = sigma.times_linear(0.0, 1.0).integral();
        let centered = sigma.times_linear(center, 1.0);
        let scale = 1.0 / centered.mul(&centered).integral().sqrt();
        let poly = sigma.times_linear(center, scale);
        Self {
            trimming,
            center,
            scale,
            poly: Some(poly),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let s = self.trimming.eval(u);
        if s == 0.0 {
            0.0
        } else {
            self.scale * (u - self.center) * s
        }
    }

    pub fn poly(&self) -> PiecewisePoly {
        match &self.poly {
            Some(p) => p.clone(),
            None => self.trimming.as_poly().times_linear(self.center, self.scale),
        }
    }
}

/// The vector `phi = (phi_1, ..., phi_q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiFamily {
    pub functions: Vec<TrimmedSpearman>,
}

impl PhiFamily {
    pub fn from_trimmings(trimmings: Vec<Trimming>) -> Result<Self> {
        if trimmings.is_empty() {
            return Err(Error::Domain("phi family needs q >= 1 functions".into()));
        }
        Ok(Self {
            functions: trimmings.into_iter().map(TrimmedSpearman::new).collect(),
        })
    }

    pub fn q(&self) -> usize {
        self.functions.len()
    }

    /// `(min lower, max upper)` over all supports.
    pub fn span(&self) -> (f64, f64) {
        let lo = self.functions.iter().map(|f| f.trimming.lower).fold(1.0, f64::min);
        let hi = self.functions.iter().map(|f| f.trimming.upper).fold(0.0, f64::max);
        (lo, hi)
    }

    /// `phi_k(u)` with 0-based `k`.
    pub fn eval(&self, k: usize, u: f64) -> Result<f64> {
        self.functions
            .get(k)
            .map(|f| f.eval(u))
            .ok_or_else(|| Error::Domain(format!("phi index {k} out of range 0..{}", self.q())))
    }

    pub fn eval_all(&self, u: f64, out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.functions) {
            *o = f.eval(u);
        }
    }
}

/// Equidistant partition `tau_min = l_0 < ... < l_q = tau_max` with one
/// trimming function per cell and ramp width `delta_fraction * cell length`.
pub fn build_trimmed_spearman(
    q: usize,
    tau_min: f64,
    tau_max: f64,
    delta_fraction: f64,
) -> Result<PhiFamily> {
    if q == 0 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    if !(tau_min > 0.0 && tau_min < tau_max && tau_max < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < tau_min < tau_max < 1, got [{tau_min}, {tau_max}]"
        )));
    }
    if !(delta_fraction > 0.0 && delta_fraction < 0.5) {
        return Err(Error::Domain(format!(
            "delta fraction {delta_fraction} must lie in (0, 0.5)"
        )));
    }
    let width = (tau_max - tau_min) / q as f64;
    let edges: Vec<f64> = (0..=q)
        .map(|k| if k == q { tau_max } else { tau_min + k as f64 * width })
        .collect();
    let trimmings = edges
        .windows(2)
        .map(|w| Trimming::new(w[0], w[1], delta_fraction * (w[1] - w[0])))
        .collect::<Result<Vec<_>>>()?;
    PhiFamily::from_trimmings(trimmings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_and_integrate() {
        // p(s) = 1 + 2s + 3s^2 around 0, shifted by 1: p(s'+1) = 6 + 8s' + 3s'^2
        assert_eq!(poly_shift(&[1.0, 2.0, 3.0], 1.0), vec![6.0, 8.0, 3.0]);
        assert!((poly_integral(&[1.0, 2.0, 3.0], 2.0) - (2.0 + 4.0 + 8.0)).abs() < 1e-15);
    }

    #[test]
    fn trimming_integrates_to_one() {
        let t = Trimming::new(0.2, 0.7, 0.05).unwrap();
        assert!((t.as_poly().integral() - 1.0).abs() < 1e-14);
        for u in [0.1, 0.21, 0.3, 0.68, 0.8] {
            assert!((t.as_poly().eval(u) - t.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn default_single_function() {
        let f = build_trimmed_spearman(1, 0.01, 0.99, 0.01).unwrap();
        let t = f.functions[0].trimming;
        assert!((t.delta - 0.0098).abs() < 1e-15);
        assert!((t.plateau - 1.0 / (0.98 - 0.0098)).abs() < 1e-12);
        assert!((f.functions[0].center - 0.5).abs() < 1e-14);
        assert_eq!(f.eval(0, f.functions[0].center).unwrap(), 0.0);
        assert_eq!(f.eval(0, 0.005).unwrap(), 0.0);
        assert_eq!(f.eval(0, 0.995).unwrap(), 0.0);
        let phi = &f.functions[0];
        let u = 0.8;
        assert_eq!(f.eval(0, u).unwrap(), phi.scale * (u - phi.center) * t.plateau);
        assert!(f.eval(1, 0.5).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(build_trimmed_spearman(0, 0.01, 0.99, 0.01).is_err());
        assert!(build_trimmed_spearman(2, 0.01, 0.99, 0.5).is_err());
        assert!(build_trimmed_spearman(2, 0.0, 0.99, 0.1).is_err());
        assert!(Trimming::new(0.2, 0.4, 0.1).is_err());
    }

    #[test]
    fn closed_form_matches_pointwise_evaluation() {
        let f = build_trimmed_spearman(3, 0.01, 0.99, 0.2).unwrap();
        for phi in &f.functions {
            let poly = phi.poly();
            for k in 0..=200 {
                let u = k as f64 / 200.0;
                assert!((poly.eval(u) - phi.eval(u)).abs() < 1e-10, "u={u}");
            }
        }
    }
}
