//! Initial estimators: the whole-area width estimate (M1) and the split-area
//! estimator with erf look-up (M3).

use std::f64::consts::PI;

use crate::erf::{ErfTable, KGrid};
use crate::error::{FitError, Result};
use crate::fit::{FitResult, FitStatus};
use crate::signal::{GaussianParams, SampledSignal};

/// Location of the detected peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate {
    /// Start of the winning window (equals `peak_index` for the naive search).
    pub window_start: usize,
    /// Sample index taken as the peak, `window_start + ⌊L/2⌋`.
    pub peak_index: usize,
    pub mu_hat: f64,
    pub amplitude_hat: f64,
}

/// Sample sums left (`β`, `n < n̂`) and right (`α`, `n ≥ n̂`) of the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialAreas {
    pub s_beta: f64,
    pub s_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    pub window_len: usize,
    pub k_grid: KGrid,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            window_len: 3,
            k_grid: KGrid::default(),
        }
    }
}

/// Width obtained from one side's area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSolve {
    pub sigma: f64,
    pub k_star: f64,
    pub k_index: usize,
    /// The minimiser sits on the first or last grid point.
    pub boundary: bool,
}

/// Largest sample and its index; ties go to the smallest index.
pub fn naive_peak(signal: &SampledSignal) -> Result<PeakEstimate> {
    let (index, amplitude) = signal
        .samples()
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (n, y)| if y > best.1 { (n, y) } else { best });
    if amplitude <= 0.0 {
        return Err(FitError::NoPeak);
    }
    Ok(PeakEstimate {
        window_start: index,
        peak_index: index,
        mu_hat: signal.x(index),
        amplitude_hat: amplitude,
    })
}

/// Peak of the length-`L` moving average. The location is the window centre
/// `n̂ + ⌊L/2⌋` and the amplitude is the sample there.
pub fn windowed_peak(signal: &SampledSignal, window_len: usize) -> Result<PeakEstimate> {
    let n = signal.len();
    if window_len == 0 || window_len >= n {
        return Err(FitError::InvalidWindow {
            len: window_len,
            samples: n,
        });
    }
    let y = signal.samples();
    let inv = 1.0 / window_len as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for start in 0..=n - window_len {
        let mean: f64 = y[start..start + window_len].iter().map(|v| v * inv).sum();
        if mean > best.1 {
            best = (start, mean);
        }
    }
    if best.1 <= 0.0 {
        return Err(FitError::NoPeak);
    }
    let peak_index = best.0 + window_len / 2;
    Ok(PeakEstimate {
        window_start: best.0,
        peak_index,
        mu_hat: signal.x(peak_index),
        amplitude_hat: y[peak_index],
    })
}

/// `σ̂ = δx·Σ y[n] / (Â·√(2π))`, the whole-area width estimate.
pub fn sigma_area_m1(signal: &SampledSignal, amplitude_hat: f64) -> Result<f64> {
    if !(amplitude_hat.is_finite() && amplitude_hat > 0.0) {
        return Err(FitError::InvalidAmplitude(format!("A_hat = {amplitude_hat}")));
    }
    let area = signal.delta_x() * signal.samples().iter().sum::<f64>();
    Ok(area / (amplitude_hat * (2.0 * PI).sqrt()))
}

pub fn partial_areas(signal: &SampledSignal, peak_index: usize) -> PartialAreas {
    let split = peak_index.min(signal.len());
    let (left, right) = signal.samples().split_at(split);
    let dx = signal.delta_x();
    PartialAreas {
        s_beta: dx * left.iter().sum::<f64>(),
        s_alpha: dx * right.iter().sum::<f64>(),
    }
}

/// Grid search for `k*` minimising `(S − √(2π)·Â·h/(2k)·erf(k/√2))²`, then
/// `σ̂ = h / k*`. Ties go to the smaller `k`.
pub fn sigma_from_area(
    area: f64,
    half_width: f64,
    amplitude_hat: f64,
    table: &ErfTable,
) -> Result<SigmaSolve> {
    if !(area.is_finite() && area > 0.0) {
        return Err(FitError::DegenerateArea(area));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(FitError::InvalidWidth(format!("half width {half_width}")));
    }
    if !(amplitude_hat.is_finite() && amplitude_hat > 0.0) {
        return Err(FitError::InvalidAmplitude(format!("A_hat = {amplitude_hat}")));
    }
    let scale = (2.0 * PI).sqrt() * amplitude_hat * half_width / 2.0;
    let mut best = (0usize, f64::INFINITY);
    for (j, (k, erf)) in table.iter().enumerate() {
        let r = area - scale / k * erf;
        let cost = r * r;
        if cost < best.1 {
            best = (j, cost);
        }
    }
    let k_star = table.ks()[best.0];
    Ok(SigmaSolve {
        sigma: half_width / k_star,
        k_star,
        k_index: best.0,
        boundary: best.0 == 0 || best.0 + 1 == table.len(),
    })
}

/// Combination coefficient from the noisy samples:
/// `Σ_{n≥n̂} y²(μ̂−x)⁴ / Σ_n y²(μ̂−x)⁴`, clipped into `[0, 1]`.
pub fn rho_from_samples(signal: &SampledSignal, mu_hat: f64) -> Result<f64> {
    let last = signal.len() - 1;
    let pos = ((mu_hat - signal.x0()) / signal.delta_x()).round();
    let split = if pos.is_nan() || pos <= 0.0 {
        0
    } else if pos >= last as f64 {
        last
    } else {
        pos as usize
    };
    let mut alpha = 0.0;
    let mut total = 0.0;
    for (n, &y) in signal.samples().iter().enumerate() {
        let d = mu_hat - signal.x(n);
        let d2 = d * d;
        let term = y * y * d2 * d2;
        total += term;
        if n >= split {
            alpha += term;
        }
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(FitError::DegenerateRho);
    }
    Ok((alpha / total).clamp(0.0, 1.0))
}

pub fn combine_sigma(sigma_alpha: f64, sigma_beta: f64, rho: f64) -> f64 {
    rho * sigma_alpha + (1.0 - rho) * sigma_beta
}

/// Least-squares amplitude for the template `exp(−(x−μ̂)²/(2σ̂²))`.
pub fn refine_amplitude(signal: &SampledSignal, mu_hat: f64, sigma_hat: f64) -> Result<f64> {
    if !(sigma_hat.is_finite() && sigma_hat > 0.0) {
        return Err(FitError::InvalidWidth(format!("sigma_hat = {sigma_hat}")));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (n, &y) in signal.samples().iter().enumerate() {
        let t = (signal.x(n) - mu_hat) / sigma_hat;
        let g = (-0.5 * t * t).exp();
        num += g * y;
        den += g * g;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(FitError::InvalidWidth(format!(
            "template with sigma {sigma_hat} vanishes on the grid"
        )))
    }
}

/// M1: naive peak, whole-area width.
pub fn m1_initial_fit(signal: &SampledSignal) -> Result<FitResult> {
    let peak = naive_peak(signal).map_err(|e| e.at_stage("naive_peak"))?;
    let sigma = sigma_area_m1(signal, peak.amplitude_hat).map_err(|e| e.at_stage("area_sigma"))?;
    if sigma.is_nan() || sigma <= 0.0 {
        let area = sigma * peak.amplitude_hat * (2.0 * PI).sqrt();
        return Err(FitError::DegenerateArea(area).at_stage("area_sigma"));
    }
    let params = GaussianParams::new(peak.amplitude_hat, peak.mu_hat, sigma)?;
    let mut fit = FitResult::converged(params);
    fit.diagnostics.peak_index = Some(peak.peak_index);
    Ok(fit)
}

/// M3: windowed peak, split-area widths combined with the sample-based
/// coefficient, then the amplitude refit.
pub fn m3_initial_fit(
    signal: &SampledSignal,
    config: &InitConfig,
    table: &ErfTable,
) -> Result<FitResult> {
    let peak = windowed_peak(signal, config.window_len).map_err(|e| e.at_stage("windowed_peak"))?;
    let mut status = FitStatus::Converged;
    let mut amplitude = peak.amplitude_hat;
    if amplitude <= 0.0 {
        // centre sample pushed below zero by noise; the window mean is positive
        let start = peak.window_start;
        amplitude = signal.samples()[start..start + config.window_len].iter().sum::<f64>()
            / config.window_len as f64;
        status = FitStatus::DegenerateFallback;
    }

    let n_hat = peak.peak_index;
    let dx = signal.delta_x();
    let areas = partial_areas(signal, n_hat);
    let beta = sigma_from_area(areas.s_beta, n_hat as f64 * dx, amplitude, table);
    let alpha = sigma_from_area(
        areas.s_alpha,
        (signal.len() - n_hat) as f64 * dx,
        amplitude,
        table,
    );

    let mut diag = crate::fit::Diagnostics {
        s_beta: Some(areas.s_beta),
        s_alpha: Some(areas.s_alpha),
        peak_index: Some(n_hat),
        ..Default::default()
    };
    if let Ok(b) = &beta {
        diag.sigma_beta = Some(b.sigma);
        diag.k_star_beta = Some(b.k_star);
        diag.boundary_beta = Some(b.boundary);
    }
    if let Ok(a) = &alpha {
        diag.sigma_alpha = Some(a.sigma);
        diag.k_star_alpha = Some(a.k_star);
        diag.boundary_alpha = Some(a.boundary);
    }

    let (sigma, rho) = match (&alpha, &beta) {
        (Ok(a), Ok(b)) => {
            let rho = rho_from_samples(signal, peak.mu_hat).map_err(|e| e.at_stage("rho"))?;
            (combine_sigma(a.sigma, b.sigma, rho), rho)
        }
        (Err(_), Ok(b)) => {
            status = FitStatus::DegenerateFallback;
            (b.sigma, 0.0)
        }
        (Ok(a), Err(_)) => {
            status = FitStatus::DegenerateFallback;
            (a.sigma, 1.0)
        }
        (Err(_), Err(e)) => return Err(e.clone().at_stage("split_area")),
    };
    diag.rho = Some(rho);

    let amplitude = refine_amplitude(signal, peak.mu_hat, sigma).map_err(|e| e.at_stage("refine_amplitude"))?;
    let params = GaussianParams::new(amplitude, peak.mu_hat, sigma).map_err(|e| e.at_stage("refine_amplitude"))?;
    let mut fit = FitResult::converged(params);
    fit.diagnostics = diag;
    fit.status = status;
    Ok(fit)
}
