//! Least squares and iterative weighted least squares in the log domain.
//!
//! The weighted problem multiplies every row of the design matrix
//! `[1, x, x²]` and of the log-sample vector by `w[n]`, so the solve minimises
//! `Σ w[n]²·(ln y[n] − a − b·x[n] − c·x[n]²)²`. The abscissa is centred on the
//! middle of the grid and scaled to `[−1, 1]` before the 3×3 normal equations
//! are formed; coefficients are mapped back to the caller's frame afterwards.

use crate::error::{FitError, Result};
use crate::fit::FitResult;
use crate::signal::{log_transform, params_from_coeffs, GaussianParams, LogPolyCoeffs, SampledSignal};

/// Non-negative per-row multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(n) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(FitError::InvalidWeights(format!(
                "weight {n} = {} is not a finite non-negative number",
                weights[n]
            )));
        }
        Ok(Self(weights))
    }

    /// Weights rebuilt from an estimate; anything non-finite becomes 0.
    pub fn from_rebuilt(weights: impl IntoIterator<Item = f64>) -> Self {
        Self(
            weights
                .into_iter()
                .map(|w| if w.is_finite() && w > 0.0 { w } else { 0.0 })
                .collect(),
        )
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One iteration of the WLS loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsStep {
    pub coeffs: LogPolyCoeffs,
    /// `None` when the iterate is not a Gaussian (`c ≥ 0`).
    pub params: Option<GaussianParams>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WlsTrace {
    pub steps: Vec<WlsStep>,
}

impl WlsTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Centred and scaled abscissa: `v[n] = (x[n] − center) / half_range`.
#[derive(Debug, Clone)]
struct Frame {
    center: f64,
    half_range: f64,
    v: Vec<f64>,
}

impl Frame {
    fn of(signal: &SampledSignal) -> Self {
        let len = signal.len();
        let mid = (len - 1) as f64 / 2.0;
        let half_range = mid * signal.delta_x();
        let v = (0..len).map(|n| (n as f64 - mid) / mid).collect();
        Self {
            center: signal.x0() + half_range,
            half_range,
            v,
        }
    }

    /// Coefficients in `v` to coefficients in `x − center`.
    fn unscale(&self, k: &LogPolyCoeffs) -> LogPolyCoeffs {
        let h = self.half_range;
        LogPolyCoeffs {
            a: k.a,
            b: k.b / h,
            c: k.c / (h * h),
        }
    }

    fn to_absolute(&self, k: &LogPolyCoeffs) -> LogPolyCoeffs {
        self.unscale(k).unshift(self.center)
    }

    fn to_params(&self, k: &LogPolyCoeffs) -> Result<GaussianParams> {
        let local = params_from_coeffs(&self.unscale(k))?;
        GaussianParams::new(local.amplitude, local.mu + self.center, local.sigma)
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Result<[f64; 3]> {
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(scale.is_finite() && scale > 0.0) {
        return Err(FitError::SingularSystem);
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() <= 1e-13 * scale {
            return Err(FitError::SingularSystem);
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (v, p) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *v -= factor * p;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * out[k]).sum();
        out[row] = (rhs[row] - tail) / m[row][row];
    }
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(FitError::SingularSystem)
    }
}

/// Weighted solve in the scaled frame.
fn solve_scaled(frame: &Frame, log_y: &[f64], weights: &WeightVector) -> Result<LogPolyCoeffs> {
    if weights.len() != log_y.len() {
        return Err(FitError::ShapeError(format!(
            "{} weights for {} samples",
            weights.len(),
            log_y.len()
        )));
    }
    if weights.as_slice().iter().filter(|&&w| w > 0.0).count() < 3 {
        return Err(FitError::SingularSystem);
    }
    let w_max = weights.as_slice().iter().copied().fold(0.0f64, f64::max);
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for ((&w, &v), &ly) in weights.as_slice().iter().zip(&frame.v).zip(log_y) {
        let wn = w / w_max;
        let omega = wn * wn;
        if omega == 0.0 {
            continue;
        }
        let v2 = v * v;
        s[0] += omega;
        s[1] += omega * v;
        s[2] += omega * v2;
        s[3] += omega * v2 * v;
        s[4] += omega * v2 * v2;
        t[0] += omega * ly;
        t[1] += omega * v * ly;
        t[2] += omega * v2 * ly;
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let [a, b, c] = solve3(m, t)?;
    Ok(LogPolyCoeffs { a, b, c })
}

/// Minimiser of `Σ w[n]²·(ln y[n] − a − b·x[n] − c·x[n]²)²`, with the samples
/// clamped at `clamp_floor` before the logarithm.
pub fn weighted_ls_solve(
    signal: &SampledSignal,
    weights: &WeightVector,
    clamp_floor: f64,
) -> Result<LogPolyCoeffs> {
    let log_y = log_transform(signal, clamp_floor)?;
    let frame = Frame::of(signal);
    let k = solve_scaled(&frame, &log_y, weights)?;
    Ok(frame.to_absolute(&k))
}

/// Plain least squares (all weights 1).
pub fn ls_fit(signal: &SampledSignal, clamp_floor: f64) -> Result<FitResult> {
    let log_y = log_transform(signal, clamp_floor)?;
    let frame = Frame::of(signal);
    let k = solve_scaled(&frame, &log_y, &WeightVector::ones(signal.len()))?;
    let mut fit = FitResult::converged(frame.to_params(&k)?);
    fit.coeffs = Some(frame.to_absolute(&k));
    fit.iterations_run = 1;
    Ok(fit)
}

/// `w[n] = exp(a + b·x[n] + c·x[n]²)` on the signal's grid.
pub fn weights_from_params(coeffs: &LogPolyCoeffs, signal: &SampledSignal) -> WeightVector {
    WeightVector::from_rebuilt((0..signal.len()).map(|n| coeffs.eval(signal.x(n)).exp()))
}

/// Runs up to `num_iters` weighted solves and keeps every successful step.
/// An intermediate iterate with `c ≥ 0` has no Gaussian parameters but still
/// supplies the next weights; only the final iterate must be a Gaussian.
/// Returns the first error, tagged with its iteration index, alongside the
/// partial trace.
pub fn wls_partial(
    signal: &SampledSignal,
    initial_weights: &WeightVector,
    num_iters: usize,
    clamp_floor: f64,
) -> (WlsTrace, Option<FitError>) {
    let mut trace = WlsTrace::default();
    if num_iters == 0 {
        return (trace, Some(FitError::InvalidIterations));
    }
    let log_y = match log_transform(signal, clamp_floor) {
        Ok(v) => v,
        Err(e) => return (trace, Some(e)),
    };
    let frame = Frame::of(signal);
    let mut weights = initial_weights.clone();
    for iteration in 0..num_iters {
        let k = match solve_scaled(&frame, &log_y, &weights) {
            Ok(k) => k,
            Err(e) => return (trace, Some(e.at_iteration(iteration))),
        };
        let params = frame.to_params(&k);
        let last = iteration + 1 == num_iters;
        if last {
            if let Err(e) = &params {
                return (trace, Some(e.clone().at_iteration(iteration)));
            }
        }
        trace.steps.push(WlsStep {
            coeffs: frame.to_absolute(&k),
            params: params.ok(),
        });
        if !last {
            let log_w: Vec<f64> = frame.v.iter().map(|&v| k.eval(v)).collect();
            let peak = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            weights = WeightVector::from_rebuilt(log_w.iter().map(|lw| (lw - peak).exp()));
        }
    }
    (trace, None)
}

/// Iterative WLS: iteration 0 uses `initial_weights`, every later iteration
/// rebuilds the weights from the previous estimate.
pub fn wls_iterate(
    signal: &SampledSignal,
    initial_weights: &WeightVector,
    num_iters: usize,
    clamp_floor: f64,
) -> Result<(FitResult, WlsTrace)> {
    let (trace, err) = wls_partial(signal, initial_weights, num_iters, clamp_floor);
    if let Some(e) = err {
        return Err(e);
    }
    let last = *trace.steps.last().ok_or(FitError::InvalidIterations)?;
    let mut fit = FitResult::converged(last.params.ok_or(FitError::InvalidIterations)?);
    fit.coeffs = Some(last.coeffs);
    fit.iterations_run = trace.len();
    Ok((fit, trace))
}
