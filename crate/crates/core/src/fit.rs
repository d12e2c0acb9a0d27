//! Fit outcome shared by every pipeline.

use std::fmt;
use std::str::FromStr;

use crate::error::FitError;
use crate::signal::{GaussianParams, LogPolyCoeffs};

/// The five pipelines compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    /// Naive peak plus whole-area width.
    M1,
    /// M1 followed by iterative WLS.
    M2,
    /// Windowed peak plus split-area widths.
    M3,
    /// M3 followed by iterative WLS.
    M4,
    /// Iterative WLS started from the raw samples.
    M5,
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::M1,
        MethodId::M2,
        MethodId::M3,
        MethodId::M4,
        MethodId::M5,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::M1 => "M1",
            MethodId::M2 => "M2",
            MethodId::M3 => "M3",
            MethodId::M4 => "M4",
            MethodId::M5 => "M5",
        }
    }

    /// Whether the method ends with an iterative WLS stage.
    pub fn is_iterative(&self) -> bool {
        matches!(self, MethodId::M2 | MethodId::M4 | MethodId::M5)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "M1" | "m1" => Ok(MethodId::M1),
            "M2" | "m2" => Ok(MethodId::M2),
            "M3" | "m3" => Ok(MethodId::M3),
            "M4" | "m4" => Ok(MethodId::M4),
            "M5" | "m5" => Ok(MethodId::M5),
            other => Err(FitError::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitStatus {
    Converged,
    /// A stage failed and a fallback path produced the estimate.
    DegenerateFallback,
    Failed,
}

impl FitStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitStatus::Converged => "converged",
            FitStatus::DegenerateFallback => "degenerate-fallback",
            FitStatus::Failed => "failed",
        }
    }
}

/// Intermediate values recorded by the initializers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    pub s_beta: Option<f64>,
    pub s_alpha: Option<f64>,
    pub sigma_beta: Option<f64>,
    pub sigma_alpha: Option<f64>,
    pub k_star_beta: Option<f64>,
    pub k_star_alpha: Option<f64>,
    pub boundary_beta: Option<bool>,
    pub boundary_alpha: Option<bool>,
    pub rho: Option<f64>,
    pub peak_index: Option<usize>,
    pub stage1_amplitude: Option<f64>,
    pub stage1_mu: Option<f64>,
    pub stage1_sigma: Option<f64>,
}

impl Diagnostics {
    /// Present entries as `(name, value)`; flags map to 0/1.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        [
            ("s_beta", self.s_beta),
            ("s_alpha", self.s_alpha),
            ("sigma_beta", self.sigma_beta),
            ("sigma_alpha", self.sigma_alpha),
            ("k_star_beta", self.k_star_beta),
            ("k_star_alpha", self.k_star_alpha),
            ("boundary_beta", self.boundary_beta.map(flag)),
            ("boundary_alpha", self.boundary_alpha.map(flag)),
            ("rho", self.rho),
            ("peak_index", self.peak_index.map(|n| n as f64)),
            ("stage1_A", self.stage1_amplitude),
            ("stage1_mu", self.stage1_mu),
            ("stage1_sigma", self.stage1_sigma),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GaussianParams,
    pub coeffs: Option<LogPolyCoeffs>,
    /// `None` for the bare LS / WLS solvers that are not one of M1–M5.
    pub method: Option<MethodId>,
    pub iterations_run: usize,
    pub diagnostics: Diagnostics,
    pub status: FitStatus,
}

impl FitResult {
    pub(crate) fn converged(params: GaussianParams) -> Self {
        Self {
            params,
            coeffs: None,
            method: None,
            iterations_run: 0,
            diagnostics: Diagnostics::default(),
            status: FitStatus::Converged,
        }
    }
}
