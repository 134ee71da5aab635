//! Additive feature expansions `h(z)` for the linear quantile model
//! `Q(tau | z) = h(z)^T beta`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expansion of a single coordinate of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// Monomials `z, z^2, ..., z^degree`. Degree 0 contributes no columns.
    Polynomial { degree: usize },
    /// Clamped B-spline basis with `df` functions of the given `order`
    /// (order 4 is cubic). The knot vector has `df + order` entries.
    Bspline {
        df: usize,
        order: usize,
        knots: Vec<f64>,
    },
}

impl Term {
    pub fn polynomial(degree: usize) -> Self {
        Term::Polynomial { degree }
    }

    /// B-spline with equally spaced interior knots on `[0, 1]`.
    pub fn bspline(df: usize, order: usize) -> Result<Self> {
        if order == 0 || df < order {
            return Err(Error::Domain(format!(
                "B-spline needs df >= order >= 1, got df={df}, order={order}"
            )));
        }
        let interior = df - order;
        let mut knots = vec![0.0; order];
        knots.extend((1..=interior).map(|i| i as f64 / (interior + 1) as f64));
        knots.extend(std::iter::repeat_n(1.0, order));
        Ok(Term::Bspline { df, order, knots })
    }

    pub fn dim(&self) -> usize {
        match self {
            Term::Polynomial { degree } => *degree,
            Term::Bspline { df, .. } => *df,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Term::Bspline { df, order, knots } = self {
            if *order == 0 || df < order {
                return Err(Error::Domain(format!(
                    "B-spline needs df >= order >= 1, got df={df}, order={order}"
                )));
            }
            if knots.len() != df + order {
                return Err(Error::Domain(format!(
                    "B-spline with df={df}, order={order} needs {} knots, got {}",
                    df + order,
                    knots.len()
                )));
            }
            if knots.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Domain("B-spline knots must be nondecreasing".into()));
            }
            let clamped = knots[..*order].iter().all(|&k| k == 0.0)
                && knots[knots.len() - order..].iter().all(|&k| k == 1.0);
            if !clamped {
                return Err(Error::Domain(
                    "B-spline boundary knots must be 0 and 1 with full multiplicity".into(),
                ));
            }
        }
        Ok(())
    }

    fn write(&self, v: f64, out: &mut [f64]) {
        match self {
            Term::Polynomial { degree } => {
                let mut pow = 1.0;
                for slot in out.iter_mut().take(*degree) {
                    pow *= v;
                    *slot = pow;
                }
            }
            Term::Bspline { order, knots, .. } => bspline_eval(knots, *order, v, out),
        }
    }
}

/// Cox-de Boor evaluation of all basis functions at `x` into `out`
/// (`out.len()` = number of basis functions). Right-continuous except at the
/// right boundary, where the last function takes value 1.
fn bspline_eval(knots: &[f64], order: usize, x: f64, out: &mut [f64]) {
    let nbasis = knots.len() - order;
    let degree = order - 1;
    out.iter_mut().for_each(|o| *o = 0.0);

    // span s with knots[s] <= x < knots[s+1], restricted to degree..nbasis-1
    let mut span = degree;
    while span + 1 < nbasis && x >= knots[span + 1] {
        span += 1;
    }

    let mut left = vec![0.0; order];
    let mut right = vec![0.0; order];
    let mut values = vec![0.0; order];
    values[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom > 0.0 { values[r] / denom } else { 0.0 };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    for (r, v) in values.into_iter().enumerate() {
        out[span - degree + r] = v;
    }
}

/// Additive basis: optional leading intercept followed by one block per
/// coordinate of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub intercept: bool,
    pub terms: Vec<Term>,
}

impl BasisSpec {
    pub fn new(intercept: bool, terms: Vec<Term>) -> Result<Self> {
        let spec = Self { intercept, terms };
        spec.validate()?;
        Ok(spec)
    }

    /// Intercept plus monomials up to `degree` in each of `d` coordinates.
    pub fn polynomial(d: usize, degree: usize) -> Self {
        Self {
            intercept: true,
            terms: vec![Term::polynomial(degree); d],
        }
    }

    /// Intercept plus an equally spaced B-spline block per coordinate.
    pub fn bspline(d: usize, df: usize, order: usize) -> Result<Self> {
        Ok(Self {
            intercept: true,
            terms: vec![Term::bspline(df, order)?; d],
        })
    }

    /// Intercept plus cubic B-splines with 5 functions per coordinate.
    pub fn default_for(d: usize) -> Self {
        Self::bspline(d, 5, 4).expect("valid default basis")
    }

    /// A constant-only model for `d`-dimensional covariates.
    pub fn intercept_only(d: usize) -> Self {
        Self::polynomial(d, 0)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            t.validate()?;
        }
        if self.p() == 0 {
            return Err(Error::Domain("basis has no columns".into()));
        }
        Ok(())
    }

    /// Number of covariates the basis expects.
    pub fn d(&self) -> usize {
        self.terms.len()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        usize::from(self.intercept) + self.terms.iter().map(Term::dim).sum::<usize>()
    }

    pub fn expand(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.p()];
        self.expand_into(z, &mut out)?;
        Ok(out)
    }

    pub fn expand_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        if z.len() != self.d() {
            return Err(Error::Shape(format!(
                "basis expects {} covariates, got {}",
                self.d(),
                z.len()
            )));
        }
        if out.len() != self.p() {
            return Err(Error::Shape(format!(
                "output buffer has length {}, basis dimension is {}",
                out.len(),
                self.p()
            )));
        }
        if let Some(v) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("covariate {v} outside [0,1]")));
        }
        let mut offset = 0;
        if self.intercept {
            out[0] = 1.0;
            offset = 1;
        }
        for (term, &v) in self.terms.iter().zip(z) {
            let k = term.dim();
            term.write(v, &mut out[offset..offset + k]);
            offset += k;
        }
        Ok(())
    }

    /// Design matrix with row `i` equal to `h(z_i)`; `z` is column-wise.
    pub fn design(&self, z: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        if z.len() != self.d() {
            return Err(Error::Shape(format!(
                "basis expects {} covariates, got {}",
                self.d(),
                z.len()
            )));
        }
        let n = z.first().map_or(0, Vec::len);
        let p = self.p();
        let mut w = DMatrix::zeros(n, p);
        let mut row = vec![0.0; p];
        let mut zi = vec![0.0; self.d()];
        for i in 0..n {
            for (slot, col) in zi.iter_mut().zip(z) {
                *slot = col[i];
            }
            self.expand_into(&zi, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                w[(i, j)] = *v;
            }
        }
        Ok(w)
    }

    /// Design for `n` rows when `d = 0` (intercept column only).
    pub fn design_rows(&self, z: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
        if z.is_empty() {
            if !self.terms.is_empty() {
                return Err(Error::Shape("basis expects covariates, none given".into()));
            }
            return Ok(DMatrix::from_element(n, self.p(), 1.0));
        }
        self.design(z)
    }
}
