//! The five fitting pipelines behind one dispatch.

use crate::erf::ErfTable;
use crate::error::{FitError, Result};
use crate::fit::{FitResult, FitStatus, MethodId};
use crate::initfit::{m1_initial_fit, m3_initial_fit, InitConfig};
use crate::linfit::{wls_iterate, wls_partial, WeightVector, WlsTrace};
use crate::signal::{clamped_samples, eval_gaussian, ClampPolicy, GaussianParams, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub id: MethodId,
    /// WLS iterations after the M1/M3 initialisation (M2, M4).
    pub stage2_iters: usize,
    /// WLS iterations for M5.
    pub m5_iters: usize,
    pub init: InitConfig,
    pub clamp: ClampPolicy,
}

impl MethodSpec {
    pub fn new(id: MethodId) -> Self {
        Self {
            id,
            stage2_iters: 2,
            m5_iters: 12,
            init: InitConfig::default(),
            clamp: ClampPolicy::default(),
        }
    }

    /// Number of WLS iterations this method runs.
    pub fn wls_iters(&self) -> usize {
        match self.id {
            MethodId::M1 | MethodId::M3 => 0,
            MethodId::M2 | MethodId::M4 => self.stage2_iters,
            MethodId::M5 => self.m5_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_iterative() && self.wls_iters() == 0 {
            return Err(FitError::InvalidIterations);
        }
        if self.init.window_len == 0 {
            return Err(FitError::InvalidWindow {
                len: 0,
                samples: 0,
            });
        }
        Ok(())
    }
}

/// `w_0[n] = Â·exp(−(x[n] − μ̂)²/(2σ̂²))` from a stage-1 estimate.
pub fn initial_weights(init: &GaussianParams, signal: &SampledSignal) -> WeightVector {
    WeightVector::from_rebuilt((0..signal.len()).map(|n| eval_gaussian(init, signal.x(n))))
}

/// Iterative WLS seeded with weights built from `init`.
pub fn two_stage(
    init: &GaussianParams,
    signal: &SampledSignal,
    iters: usize,
    clamp_floor: f64,
) -> Result<(FitResult, WlsTrace)> {
    if iters == 0 {
        return Err(FitError::InvalidIterations);
    }
    wls_iterate(signal, &initial_weights(init, signal), iters, clamp_floor)
}

/// Where the first WLS iteration gets its weights.
#[derive(Debug, Clone)]
pub(crate) struct WlsPlan {
    pub weights: WeightVector,
    pub clamp_floor: f64,
    pub stage1: Option<FitResult>,
    pub fallback: bool,
}

/// Stage 1 of M2/M4/M5: the initial weights, falling back to the clamped raw
/// samples when the initializer fails.
pub(crate) fn plan_wls(spec: &MethodSpec, signal: &SampledSignal, table: &ErfTable) -> Result<WlsPlan> {
    let clamp_floor = spec.clamp.resolve(signal).map_err(|e| e.at_stage("clamp"))?;
    let raw = || -> Result<WeightVector> { WeightVector::new(clamped_samples(signal, clamp_floor)?) };
    let stage1 = match spec.id {
        MethodId::M2 => Some(m1_initial_fit(signal)),
        MethodId::M4 => Some(m3_initial_fit(signal, &spec.init, table)),
        MethodId::M5 => None,
        MethodId::M1 | MethodId::M3 => {
            return Err(FitError::InvalidConfig(format!("{} has no WLS stage", spec.id)))
        }
    };
    Ok(match stage1 {
        None => WlsPlan {
            weights: raw()?,
            clamp_floor,
            stage1: None,
            fallback: false,
        },
        Some(Ok(init)) => WlsPlan {
            weights: initial_weights(&init.params, signal),
            clamp_floor,
            fallback: false,
            stage1: Some(init),
        },
        Some(Err(_)) => WlsPlan {
            weights: raw()?,
            clamp_floor,
            stage1: None,
            fallback: true,
        },
    })
}

fn finish_wls(spec: &MethodSpec, plan: WlsPlan, mut fit: FitResult) -> FitResult {
    if let Some(init) = &plan.stage1 {
        fit.diagnostics = init.diagnostics;
        fit.diagnostics.stage1_amplitude = Some(init.params.amplitude);
        fit.diagnostics.stage1_mu = Some(init.params.mu);
        fit.diagnostics.stage1_sigma = Some(init.params.sigma);
    }
    if plan.fallback {
        fit.status = FitStatus::DegenerateFallback;
    }
    fit.method = Some(spec.id);
    fit
}

/// Runs one pipeline on `signal`.
pub fn run_method(spec: &MethodSpec, signal: &SampledSignal, table: &ErfTable) -> Result<FitResult> {
    spec.validate()?;
    match spec.id {
        MethodId::M1 => {
            let mut fit = m1_initial_fit(signal)?;
            fit.method = Some(MethodId::M1);
            Ok(fit)
        }
        MethodId::M3 => {
            let mut fit = m3_initial_fit(signal, &spec.init, table)?;
            fit.method = Some(MethodId::M3);
            Ok(fit)
        }
        MethodId::M2 | MethodId::M4 | MethodId::M5 => {
            let plan = plan_wls(spec, signal, table)?;
            let (fit, _) = wls_iterate(signal, &plan.weights, spec.wls_iters(), plan.clamp_floor)
                .map_err(|e| e.at_stage("wls"))?;
            Ok(finish_wls(spec, plan, fit))
        }
    }
}

/// Outcome of a run that keeps the WLS iterates.
#[derive(Debug, Clone)]
pub struct TracedRun {
    pub fit: Option<FitResult>,
    /// Every WLS iterate that succeeded; empty for M1 and M3.
    pub trace: WlsTrace,
    /// The error that ended the run, if any.
    pub error: Option<FitError>,
    /// Stage 1 failed and the raw samples seeded the WLS stage.
    pub fallback: bool,
}

impl TracedRun {
    fn failed(error: FitError) -> Self {
        Self {
            fit: None,
            trace: WlsTrace::default(),
            error: Some(error),
            fallback: false,
        }
    }
}

/// Like [`run_method`] but also returns every WLS iterate that succeeded,
/// for iteration sweeps.
pub fn run_method_traced(spec: &MethodSpec, signal: &SampledSignal, table: &ErfTable) -> TracedRun {
    if let Err(e) = spec.validate() {
        return TracedRun::failed(e);
    }
    if !spec.id.is_iterative() {
        return match run_method(spec, signal, table) {
            Ok(fit) => TracedRun {
                fit: Some(fit),
                trace: WlsTrace::default(),
                error: None,
                fallback: false,
            },
            Err(e) => TracedRun::failed(e),
        };
    }
    let plan = match plan_wls(spec, signal, table) {
        Ok(p) => p,
        Err(e) => return TracedRun::failed(e),
    };
    let fallback = plan.fallback;
    let (trace, err) = wls_partial(signal, &plan.weights, spec.wls_iters(), plan.clamp_floor);
    if let Some(e) = err {
        return TracedRun {
            fit: None,
            trace,
            error: Some(e.at_stage("wls")),
            fallback,
        };
    }
    let last = trace.steps[trace.len() - 1];
    // wls_partial reports an error whenever the final iterate has no params
    let Some(params) = last.params else {
        return TracedRun {
            fit: None,
            trace,
            error: Some(FitError::InvalidIterations.at_stage("wls")),
            fallback,
        };
    };
    let mut fit = FitResult::converged(params);
    fit.coeffs = Some(last.coeffs);
    fit.iterations_run = trace.len();
    TracedRun {
        fit: Some(finish_wls(spec, plan, fit)),
        trace,
        error: None,
        fallback,
    }
}
