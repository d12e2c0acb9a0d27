//! Error function by adaptive quadrature, tabulated over `k` as `erf(k/√2)`.
//!
//! The table makes the split-area width solvers independent of the signal's
//! parameters: with the substitution `half_width = k·σ` the erf argument is a
//! function of `k` alone.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{FitError, Result};

const QUAD_TOL: f64 = 1e-14;
const MAX_DEPTH: u32 = 48;
/// Beyond `z + TAIL_SPAN` the integrand is below 1e-60 for z ≥ 1.
const TAIL_SPAN: f64 = 12.0;

fn integrand(t: f64) -> f64 {
    (-t * t).exp()
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = integrand(lm);
    let frm = integrand(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_a^b exp(−t²) dt` by adaptive Simpson.
pub fn gauss_integral(a: f64, b: f64) -> f64 {
    integral_to(a, b, QUAD_TOL)
}

fn integral_to(a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = integrand(a);
    let fb = integrand(b);
    let fm = integrand(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    adaptive(a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// `erf(z) = (2/√π)·∫_0^z exp(−t²) dt`. For `|z| > 1` the complement over the
/// tail is integrated instead, so large arguments approach 1 monotonically.
pub fn erf_quadrature(z: f64) -> f64 {
    let scale = 2.0 / PI.sqrt();
    let mag = z.abs();
    let value = if mag <= 1.0 {
        scale * gauss_integral(0.0, mag)
    } else {
        // tolerance relative to the tail mass, roughly exp(−z²)/(2z)
        let tol = QUAD_TOL * integrand(mag) / (2.0 * mag);
        1.0 - scale * integral_to(mag, mag + TAIL_SPAN, tol)
    };
    value.copysign(z)
}

/// Grid `k_j = start + j·step`, `j = 0 … count−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Default for KGrid {
    /// `0.1:0.01:10`.
    fn default() -> Self {
        Self {
            start: 0.1,
            step: 0.01,
            count: 991,
        }
    }
}

impl KGrid {
    /// Grid from inclusive `min:step:max` bounds.
    pub fn from_range(min: f64, step: f64, max: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0 && min.is_finite() && max.is_finite() && max >= min) {
            return Err(FitError::InvalidGrid(format!("k range {min}:{step}:{max}")));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        let grid = Self {
            start: min,
            step,
            count,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.start > 0.0) {
            return Err(FitError::InvalidGrid(format!("k start {} must be positive", self.start)));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(FitError::InvalidGrid(format!("k step {} must be positive", self.step)));
        }
        if self.count == 0 {
            return Err(FitError::InvalidGrid("empty k grid".into()));
        }
        Ok(())
    }

    pub fn k(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }
}

/// `erf(k/√2)` over a positive, increasing `k` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErfTable {
    ks: Vec<f64>,
    values: Vec<f64>,
}

impl ErfTable {
    /// Table from explicit columns, e.g. read back from disk.
    pub fn from_columns(ks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ks.is_empty() || ks.len() != values.len() {
            return Err(FitError::InvalidGrid(format!(
                "{} k values for {} erf values",
                ks.len(),
                values.len()
            )));
        }
        if !(ks[0].is_finite() && ks[0] > 0.0) {
            return Err(FitError::InvalidGrid(format!("k start {} must be positive", ks[0])));
        }
        if let Some(j) = ks.windows(2).position(|w| !(w[1].is_finite() && w[1] > w[0])) {
            return Err(FitError::InvalidGrid(format!("k grid not increasing at entry {}", j + 1)));
        }
        if let Some(j) = values.iter().position(|v| !(v.is_finite() && *v > 0.0 && *v <= 1.0)) {
            return Err(FitError::InvalidGrid(format!("erf value {j} outside (0, 1]")));
        }
        Ok(Self { ks, values })
    }

    pub fn ks(&self) -> &[f64] {
        &self.ks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ks.iter().copied().zip(self.values.iter().copied())
    }
}

pub fn build_erf_table(grid: &KGrid) -> Result<ErfTable> {
    grid.validate()?;
    let ks: Vec<f64> = (0..grid.count).map(|j| grid.k(j)).collect();
    let values = ks.iter().map(|k| erf_quadrature(k * FRAC_1_SQRT_2)).collect();
    ErfTable::from_columns(ks, values)
}
