//! Seeded Monte Carlo harness: MSE against SNR and against WLS iteration count.
//!
//! Every trial draws `(μ, σ)` and its noise from a seed derived from the master
//! seed and the trial coordinates, so results do not depend on scheduling.
//! All methods of a trial see the same noisy signal. Per-trial outcomes are
//! collected in trial order and reduced sequentially, which makes the MSE
//! values identical between sequential and parallel execution.

use std::time::Instant;

use crate::erf::{build_erf_table, ErfTable};
use crate::error::{FitError, Result};
use crate::fit::{FitStatus, MethodId};
use crate::methods::{run_method, run_method_traced, MethodSpec};
use crate::noise::{trial_seed, UniformStream};
use crate::signal::{sample_gaussian, GaussianParams, NoiseSpec, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Amplitude,
    Mu,
    Sigma,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Amplitude, Param::Mu, Param::Sigma];

    pub fn as_str(&self) -> &'static str {
        match self {
            Param::Amplitude => "A",
            Param::Mu => "mu",
            Param::Sigma => "sigma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "A" => Some(Param::Amplitude),
            "mu" => Some(Param::Mu),
            "sigma" => Some(Param::Sigma),
            _ => None,
        }
    }

    fn of(&self, p: &GaussianParams) -> f64 {
        match self {
            Param::Amplitude => p.amplitude,
            Param::Mu => p.mu,
            Param::Sigma => p.sigma,
        }
    }
}

/// Per-parameter mean squared error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamMse {
    pub amplitude: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl ParamMse {
    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::Amplitude => self.amplitude,
            Param::Mu => self.mu,
            Param::Sigma => self.sigma,
        }
    }
}

pub fn mse_aggregate(estimates: &[GaussianParams], truths: &[GaussianParams]) -> Result<ParamMse> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(FitError::ShapeError(format!(
            "{} estimates against {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    let mut acc = SquaredErrors::default();
    for (e, t) in estimates.iter().zip(truths) {
        acc.add(e, t);
    }
    Ok(acc.mean())
}

#[derive(Debug, Clone, Copy, Default)]
struct SquaredErrors {
    sums: [f64; 3],
    count: usize,
}

impl SquaredErrors {
    fn add(&mut self, estimate: &GaussianParams, truth: &GaussianParams) {
        for (slot, param) in self.sums.iter_mut().zip(Param::ALL) {
            let d = param.of(estimate) - param.of(truth);
            *slot += d * d;
        }
        self.count += 1;
    }

    fn mean(&self) -> ParamMse {
        let n = self.count as f64;
        ParamMse {
            amplitude: self.sums[0] / n,
            mu: self.sums[1] / n,
            sigma: self.sums[2] / n,
        }
    }
}

/// Inclusive `start:step:stop` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl Default for SnrGrid {
    fn default() -> Self {
        Self {
            start: -10.0,
            step: 0.5,
            stop: 20.0,
        }
    }
}

impl SnrGrid {
    pub fn single(snr_db: f64) -> Self {
        Self {
            start: snr_db,
            step: 1.0,
            stop: snr_db,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.stop >= self.start;
        if ok {
            Ok(())
        } else {
            Err(FitError::InvalidConfig(format!(
                "SNR grid {}:{}:{}",
                self.start, self.step, self.stop
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, sequential otherwise.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub amplitude: f64,
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub x_range: (f64, f64),
    pub delta_x: f64,
    pub snr_grid: SnrGrid,
    pub trials: usize,
    pub master_seed: u64,
    pub methods: Vec<MethodId>,
    /// Iteration counts reported by the iteration sweep.
    pub iter_sweep: Vec<usize>,
    pub fixed_snr_db: f64,
    /// Iterations, window, k-grid and clamp shared by all methods.
    pub method_template: MethodSpec,
    pub execution: Execution,
    /// Record wall-clock time per method call. Off keeps reports byte-stable.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            mu_range: (8.0, 9.0),
            sigma_range: (1.0, 1.3),
            x_range: (0.0, 10.0),
            delta_x: 0.01,
            snr_grid: SnrGrid::default(),
            trials: 1000,
            master_seed: 7,
            methods: MethodId::ALL.to_vec(),
            iter_sweep: (1..=12).collect(),
            fixed_snr_db: 12.0,
            method_template: MethodSpec::new(MethodId::M1),
            execution: Execution::Parallel,
            timing: false,
        }
    }
}

impl BenchConfig {
    pub fn n_samples(&self) -> usize {
        ((self.x_range.1 - self.x_range.0) / self.delta_x).round() as usize + 1
    }

    pub fn spec_for(&self, id: MethodId) -> MethodSpec {
        MethodSpec {
            id,
            ..self.method_template
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FitError::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return bad(format!("amplitude {}", self.amplitude));
        }
        for (name, (lo, hi)) in [("mu", self.mu_range), ("sigma", self.sigma_range), ("x", self.x_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} range [{lo}, {hi}]"));
            }
        }
        if self.sigma_range.0 <= 0.0 {
            return bad("sigma range must be positive".into());
        }
        if !(self.delta_x.is_finite() && self.delta_x > 0.0) || self.n_samples() < 3 {
            return bad(format!("grid with delta_x {}", self.delta_x));
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        self.snr_grid.validate()?;
        for id in &self.methods {
            self.spec_for(*id).validate()?;
        }
        Ok(())
    }

    fn table(&self) -> Result<ErfTable> {
        build_erf_table(&self.method_template.init.k_grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Snr,
    Iterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: MethodId,
    /// SNR in dB or iteration count.
    pub sweep: f64,
    pub param: Param,
    /// NaN when no trial produced an estimate.
    pub mse: f64,
    pub trials: usize,
    pub degenerate: usize,
    pub mean_time_us: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub kind: SweepKind,
    pub rows: Vec<ReportRow>,
}

impl BenchReport {
    pub fn find(&self, method: MethodId, sweep: f64, param: Param) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.param == param && (r.sweep - sweep).abs() < 1e-9)
    }

    pub fn mse(&self, method: MethodId, sweep: f64, param: Param) -> Option<f64> {
        self.find(method, sweep, param).map(|r| r.mse)
    }
}

/// One synthetic trial: the truth and its noisy samples.
pub fn synth_trial(config: &BenchConfig, snr_db: f64, seed: u64) -> Result<(GaussianParams, SampledSignal)> {
    let mut uniform = UniformStream::new(seed);
    let mu = uniform.between(config.mu_range.0, config.mu_range.1);
    let sigma = uniform.between(config.sigma_range.0, config.sigma_range.1);
    let truth = GaussianParams::new(config.amplitude, mu, sigma)?;
    let local = GaussianParams {
        mu: mu - config.x_range.0,
        ..truth
    };
    let sampled = sample_gaussian(
        &local,
        config.delta_x,
        config.n_samples(),
        Some(NoiseSpec { snr_db, seed }),
    )?;
    let power = sampled.noise_power().unwrap_or(0.0);
    let signal = SampledSignal::new(config.x_range.0, config.delta_x, sampled.samples().to_vec())?
        .with_noise_power(power);
    Ok((truth, signal))
}

fn map_trials<T, F>(execution: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution == Execution::Parallel {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = execution;
    (0..count).map(f).collect()
}

#[derive(Debug, Clone, Copy)]
struct MethodOutcome {
    estimate: Option<GaussianParams>,
    degenerate: bool,
    nanos: u128,
}

struct TrialOutcome {
    truth: GaussianParams,
    /// `[method][sweep point]`.
    per_method: Vec<Vec<MethodOutcome>>,
}

fn timed<T>(timing: bool, f: impl FnOnce() -> T) -> (T, u128) {
    if timing {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_nanos())
    } else {
        (f(), 0)
    }
}

/// Folds per-trial outcomes for one sweep point into report rows.
fn reduce_point(
    config: &BenchConfig,
    outcomes: &[&TrialOutcome],
    point: usize,
    sweep: f64,
    rows: &mut Vec<ReportRow>,
) {
    for (m, &method) in config.methods.iter().enumerate() {
        let mut acc = SquaredErrors::default();
        let mut degenerate = 0;
        let mut nanos = 0u128;
        for trial in outcomes {
            let o = trial.per_method[m][point];
            if let Some(est) = o.estimate {
                acc.add(&est, &trial.truth);
            }
            if o.degenerate || o.estimate.is_none() {
                degenerate += 1;
            }
            nanos += o.nanos;
        }
        let mse = if acc.count > 0 {
            acc.mean()
        } else {
            ParamMse {
                amplitude: f64::NAN,
                mu: f64::NAN,
                sigma: f64::NAN,
            }
        };
        let mean_time_us = nanos as f64 / 1e3 / outcomes.len() as f64;
        for param in Param::ALL {
            rows.push(ReportRow {
                method,
                sweep,
                param,
                mse: mse.get(param),
                trials: outcomes.len(),
                degenerate,
                mean_time_us,
                seed: config.master_seed,
            });
        }
    }
}

/// MSE against SNR for every configured method.
pub fn run_bench_snr(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let table = config.table()?;
    let points = config.snr_grid.points();
    let specs: Vec<MethodSpec> = config.methods.iter().map(|&id| config.spec_for(id)).collect();
    let trials = config.trials;

    let outcomes = map_trials(config.execution, points.len() * trials, |job| {
        let (point, trial) = (job / trials, job % trials);
        let seed = trial_seed(config.master_seed, point as u64, trial as u64);
        let (truth, signal) = synth_trial(config, points[point], seed)?;
        let per_method = specs
            .iter()
            .map(|spec| {
                let (result, nanos) = timed(config.timing, || run_method(spec, &signal, &table));
                let outcome = match result {
                    Ok(fit) => MethodOutcome {
                        estimate: Some(fit.params),
                        degenerate: fit.status != FitStatus::Converged,
                        nanos,
                    },
                    Err(_) => MethodOutcome {
                        estimate: None,
                        degenerate: true,
                        nanos,
                    },
                };
                vec![outcome]
            })
            .collect();
        Ok(TrialOutcome { truth, per_method })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(points.len() * config.methods.len() * 3);
    for (point, &snr) in points.iter().enumerate() {
        let slice: Vec<&TrialOutcome> = outcomes[point * trials..(point + 1) * trials].iter().collect();
        reduce_point(config, &slice, 0, snr, &mut rows);
    }
    Ok(BenchReport {
        kind: SweepKind::Snr,
        rows,
    })
}

/// MSE against WLS iteration count at `fixed_snr_db`. One traced run per
/// method and trial supplies every iteration point; M1 and M3 have no WLS
/// stage and repeat their single estimate.
pub fn run_bench_iters(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    if config.iter_sweep.is_empty() || config.iter_sweep.contains(&0) {
        return Err(FitError::InvalidConfig(
            "iteration sweep must be non-empty and positive".into(),
        ));
    }
    let table = config.table()?;
    let max_iter = *config.iter_sweep.iter().max().unwrap_or(&1);
    let specs: Vec<MethodSpec> = config
        .methods
        .iter()
        .map(|&id| MethodSpec {
            stage2_iters: max_iter,
            m5_iters: max_iter,
            ..config.spec_for(id)
        })
        .collect();
    let sweep = &config.iter_sweep;

    let outcomes = map_trials(config.execution, config.trials, |trial| {
        let seed = trial_seed(config.master_seed, 0, trial as u64);
        let (truth, signal) = synth_trial(config, config.fixed_snr_db, seed)?;
        let per_method = specs
            .iter()
            .map(|spec| {
                let (run, nanos) = timed(config.timing, || run_method_traced(spec, &signal, &table));
                sweep
                    .iter()
                    .map(|&k| {
                        if spec.id.is_iterative() {
                            let estimate = run.trace.steps.get(k - 1).and_then(|s| s.params);
                            MethodOutcome {
                                estimate,
                                degenerate: run.fallback || estimate.is_none(),
                                nanos,
                            }
                        } else {
                            MethodOutcome {
                                estimate: run.fit.as_ref().map(|f| f.params),
                                degenerate: run.fit.as_ref().is_none_or(|f| f.status != FitStatus::Converged),
                                nanos,
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(TrialOutcome { truth, per_method })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let refs: Vec<&TrialOutcome> = outcomes.iter().collect();

    let mut rows = Vec::with_capacity(sweep.len() * config.methods.len() * 3);
    for (point, &k) in sweep.iter().enumerate() {
        reduce_point(config, &refs, point, k as f64, &mut rows);
    }
    Ok(BenchReport {
        kind: SweepKind::Iterations,
        rows,
    })
}
