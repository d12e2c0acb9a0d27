//! Gaussian model, log-polynomial coefficients and sampled signals.

use crate::error::{FitError, Result};
use crate::noise::NormalStream;

/// Height, location and width of `A·exp(−(x−μ)²/(2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub amplitude: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianParams {
    /// Builds a parameter triple, rejecting non-positive or non-finite values.
    pub fn new(amplitude: f64, mu: f64, sigma: f64) -> Result<Self> {
        let params = Self {
            amplitude,
            mu,
            sigma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.mu.is_finite() || !self.sigma.is_finite() {
            return Err(FitError::NonFinite(format!("{self:?}")));
        }
        if self.amplitude <= 0.0 {
            return Err(FitError::InvalidAmplitude(format!("A = {}", self.amplitude)));
        }
        if self.sigma <= 0.0 {
            return Err(FitError::InvalidWidth(format!("sigma = {}", self.sigma)));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_gaussian(self, x)
    }
}

/// Coefficients of `ln f(x) = a + b·x + c·x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolyCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LogPolyCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        self.a + x * (self.b + x * self.c)
    }

    /// Re-expresses coefficients fitted on `x − shift` in terms of `x`.
    pub fn unshift(&self, shift: f64) -> Self {
        Self {
            a: self.a - self.b * shift + self.c * shift * shift,
            b: self.b - 2.0 * self.c * shift,
            c: self.c,
        }
    }
}

pub fn eval_gaussian(params: &GaussianParams, x: f64) -> f64 {
    let t = (x - params.mu) / params.sigma;
    params.amplitude * (-0.5 * t * t).exp()
}

pub fn coeffs_from_params(params: &GaussianParams) -> LogPolyCoeffs {
    let inv_var = 1.0 / (params.sigma * params.sigma);
    LogPolyCoeffs {
        a: params.amplitude.ln() - 0.5 * params.mu * params.mu * inv_var,
        b: params.mu * inv_var,
        c: -0.5 * inv_var,
    }
}

/// Inverse of [`coeffs_from_params`]. Fails with `InvalidWidth` when `c ≥ 0`,
/// and with `NonFinite` when the resulting parameters overflow.
pub fn params_from_coeffs(coeffs: &LogPolyCoeffs) -> Result<GaussianParams> {
    let LogPolyCoeffs { a, b, c } = *coeffs;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(FitError::NonFinite(format!("{coeffs:?}")));
    }
    if c >= 0.0 {
        return Err(FitError::InvalidWidth(format!("c = {c} is not negative")));
    }
    let mu = -b / (2.0 * c);
    let sigma = (-0.5 / c).sqrt();
    let amplitude = (a - b * b / (4.0 * c)).exp();
    GaussianParams::new(amplitude, mu, sigma)
}

/// Noise level and seed for synthetic signals. `snr_db` is `10·log10(A²/σ_ξ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noise_power(&self, amplitude: f64) -> f64 {
        amplitude * amplitude / 10f64.powf(self.snr_db / 10.0)
    }
}

/// Uniformly spaced samples `y[n]` at `x[n] = x0 + n·δx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    x0: f64,
    delta_x: f64,
    samples: Vec<f64>,
    noise_power: Option<f64>,
}

impl SampledSignal {
    pub fn new(x0: f64, delta_x: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(FitError::InvalidGrid(format!(
                "need at least 3 samples, got {}",
                samples.len()
            )));
        }
        if !(delta_x.is_finite() && delta_x > 0.0) {
            return Err(FitError::InvalidGrid(format!("delta_x = {delta_x}")));
        }
        if !x0.is_finite() {
            return Err(FitError::InvalidGrid(format!("x0 = {x0}")));
        }
        if let Some(n) = samples.iter().position(|y| !y.is_finite()) {
            return Err(FitError::NonFinite(format!("sample {n}")));
        }
        Ok(Self {
            x0,
            delta_x,
            samples,
            noise_power: None,
        })
    }

    pub fn with_noise_power(mut self, noise_power: f64) -> Self {
        self.noise_power = Some(noise_power);
        self
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn noise_power(&self) -> Option<f64> {
        self.noise_power
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self, n: usize) -> f64 {
        self.x0 + n as f64 * self.delta_x
    }

    /// Abscissae relative to the grid origin, `n·δx`.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |n| n as f64 * self.delta_x)
    }

    pub fn max_sample(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = Self::new(
            self.x0,
            self.delta_x,
            self.samples.iter().map(|y| y * factor).collect(),
        )?;
        out.noise_power = self.noise_power.map(|p| p * factor * factor);
        Ok(out)
    }
}

/// Samples `f(n·δx) + ξ[n]` for `n = 0 … n_samples−1`.
pub fn sample_gaussian(
    params: &GaussianParams,
    delta_x: f64,
    n_samples: usize,
    noise: Option<NoiseSpec>,
) -> Result<SampledSignal> {
    if !(delta_x.is_finite() && delta_x > 0.0) || n_samples < 3 {
        return Err(FitError::InvalidGrid(format!(
            "delta_x = {delta_x}, n_samples = {n_samples}"
        )));
    }
    let clean = (0..n_samples).map(|n| eval_gaussian(params, n as f64 * delta_x));
    match noise {
        None => SampledSignal::new(0.0, delta_x, clean.collect()),
        Some(spec) => {
            let power = spec.noise_power(params.amplitude);
            let std_dev = power.sqrt();
            let mut stream = NormalStream::new(spec.seed);
            let samples = clean.map(|f| f + stream.next_scaled(std_dev)).collect();
            Ok(SampledSignal::new(0.0, delta_x, samples)?.with_noise_power(power))
        }
    }
}

/// How the floor under the logarithm is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClampPolicy {
    /// `floor = max_n y[n] · ratio`.
    RelativeToMax(f64),
    Absolute(f64),
}

impl Default for ClampPolicy {
    fn default() -> Self {
        ClampPolicy::RelativeToMax(1e-6)
    }
}

impl ClampPolicy {
    pub fn resolve(&self, signal: &SampledSignal) -> Result<f64> {
        let floor = match *self {
            ClampPolicy::RelativeToMax(ratio) => {
                let max = signal.max_sample();
                if max <= 0.0 {
                    return Err(FitError::NoPeak);
                }
                max * ratio
            }
            ClampPolicy::Absolute(floor) => floor,
        };
        if floor.is_finite() && floor > 0.0 {
            Ok(floor)
        } else {
            Err(FitError::InvalidClamp(floor))
        }
    }
}

pub(crate) fn check_clamp(clamp_floor: f64) -> Result<()> {
    if clamp_floor.is_finite() && clamp_floor > 0.0 {
        Ok(())
    } else {
        Err(FitError::InvalidClamp(clamp_floor))
    }
}

/// Samples clamped from below at `clamp_floor`.
pub fn clamped_samples(signal: &SampledSignal, clamp_floor: f64) -> Result<Vec<f64>> {
    check_clamp(clamp_floor)?;
    Ok(signal.samples().iter().map(|&y| y.max(clamp_floor)).collect())
}

/// `ln(max(y[n], clamp_floor))` for every sample.
pub fn log_transform(signal: &SampledSignal, clamp_floor: f64) -> Result<Vec<f64>> {
    Ok(clamped_samples(signal, clamp_floor)?
        .into_iter()
        .map(f64::ln)
        .collect())
}
