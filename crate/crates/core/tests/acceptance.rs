//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints one line whether it passes or not.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gaussfit::bench::{run_bench_iters, run_bench_snr, synth_trial, BenchConfig, BenchReport, Execution, Param, SnrGrid};
use gaussfit::crlb::{combined_bound, crlb_ratio, crlb_sigma, optimal_rho_oracle, CrlbQuery};
use gaussfit::erf::{build_erf_table, KGrid};
use gaussfit::initfit::{m3_initial_fit, naive_peak, rho_from_samples, sigma_area_m1, InitConfig};
use gaussfit::io::write_report;
use gaussfit::linfit::ls_fit;
use gaussfit::noise::{trial_seed, NormalStream, UniformStream};
use gaussfit::signal::{sample_gaussian, GaussianParams, SampledSignal};
use gaussfit::{run_method, ClampPolicy, FitStatus, MethodId, MethodSpec};

const SEEDS: [u64; 3] = [7, 11, 13];

enum Outcome {
    Pass(String),
    Warn(String),
    Fail(String),
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check(ok: bool, failures: &mut Vec<String>, msg: String) {
    if !ok {
        failures.push(msg);
    }
}

fn verdict(failures: Vec<String>, summary: String, elapsed: Duration, budget: Duration) -> Outcome {
    let mut failures = failures;
    if elapsed > budget {
        failures.push(format!("took {elapsed:?}, budget {budget:?}"));
    }
    if failures.is_empty() {
        Outcome::Pass(format!("{summary} in {elapsed:.2?}"))
    } else {
        Outcome::Fail(failures.join("; "))
    }
}

fn long_tail() -> (GaussianParams, SampledSignal) {
    let p = GaussianParams::new(1.0, 9.0, 1.3).unwrap();
    (p, sample_gaussian(&p, 0.01, 1001, None).unwrap())
}

fn noiseless_exactness() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (truth, s) = long_tail();
    let table = build_erf_table(&KGrid::default()).unwrap();
    let exact_clamp = ClampPolicy::Absolute(1e-300);

    let ls = ls_fit(&s, 1e-300).unwrap().params;
    let m5 = run_method(
        &MethodSpec {
            m5_iters: 1,
            clamp: exact_clamp,
            ..MethodSpec::new(MethodId::M5)
        },
        &s,
        &table,
    )
    .unwrap()
    .params;
    for (name, p) in [("LS", ls), ("M5", m5)] {
        let errs = [
            rel(p.amplitude, truth.amplitude),
            rel(p.mu, truth.mu),
            rel(p.sigma, truth.sigma),
        ];
        check(errs.iter().all(|e| *e < 1e-6), &mut failures, format!("{name} relative errors {errs:?}"));
    }
    let m3 = m3_initial_fit(&s, &InitConfig::default(), &table).unwrap().params;
    check((m3.mu - 9.0).abs() <= 0.01, &mut failures, format!("M3 mu {}", m3.mu));
    check(rel(m3.sigma, 1.3) < 0.005, &mut failures, format!("M3 sigma {}", m3.sigma));
    check(rel(m3.amplitude, 1.0) < 0.001, &mut failures, format!("M3 A {}", m3.amplitude));
    verdict(
        failures,
        format!("LS sigma {:.9}, M5 sigma {:.9}, M3 {:?}", ls.sigma, m5.sigma, m3),
        start.elapsed(),
        Duration::from_secs(1),
    )
}

/// `∫_0^z exp(−t²) dt` by composite Simpson with a fixed panel count.
fn simpson_erf(z: f64) -> f64 {
    let panels = 20_000;
    let h = z / panels as f64;
    let f = |t: f64| (-t * t).exp();
    let mut sum = f(0.0) + f(z);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    2.0 / std::f64::consts::PI.sqrt() * sum * h / 3.0
}

fn erf_table_oracle() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let table = build_erf_table(&KGrid::default()).unwrap();
    let mut worst = 0.0f64;
    for (k, v) in table.iter() {
        let z = k / std::f64::consts::SQRT_2;
        let oracle = simpson_erf(z);
        worst = worst.max((v - oracle).abs());
        check(
            (v - statrs::function::erf::erf(z)).abs() < 1e-6,
            &mut failures,
            format!("k = {k}: {v} against statrs"),
        );
    }
    check(worst < 1e-6, &mut failures, format!("max deviation from Simpson oracle {worst:e}"));
    let sqrt2 = build_erf_table(&KGrid {
        start: std::f64::consts::SQRT_2,
        step: 0.01,
        count: 1,
    })
    .unwrap();
    check(
        (sqrt2.values()[0] - 0.8427008).abs() < 1e-6,
        &mut failures,
        format!("erf(1) entry {}", sqrt2.values()[0]),
    );
    failures.truncate(5);
    verdict(
        failures,
        format!("{} entries, max deviation {worst:.1e}", table.len()),
        start.elapsed(),
        Duration::from_secs(5),
    )
}

fn m1_bias() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (_, s) = long_tail();
    let peak = naive_peak(&s).unwrap();
    let m1 = sigma_area_m1(&s, peak.amplitude_hat).unwrap();
    check((m1 - 1.013).abs() <= 0.005, &mut failures, format!("M1 sigma {m1}"));
    let table = build_erf_table(&KGrid::default()).unwrap();
    let m3 = m3_initial_fit(&s, &InitConfig::default(), &table).unwrap().params.sigma;
    check(rel(m3, 1.3) < 0.005, &mut failures, format!("M3 sigma {m3}"));
    verdict(
        failures,
        format!("M1 sigma {m1:.4}, M3 sigma {m3:.5}"),
        start.elapsed(),
        Duration::from_secs(10),
    )
}

fn crlb_identities() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut u = UniformStream::new(2024);
    let (mut worst_ratio, mut worst_bound) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = GaussianParams::new(u.between(0.2, 5.0), u.between(2.0, 9.5), u.between(0.5, 2.5)).unwrap();
        let n_total = 1001;
        let n_hat = u.between(50.0, 950.0) as usize;
        let noise_power = u.between(0.01, 2.0);
        let q = |range: std::ops::Range<usize>| CrlbQuery {
            params: p,
            delta_x: 0.01,
            index_range: range,
            noise_power,
        };
        let beta = crlb_sigma(&q(0..n_hat)).unwrap();
        let alpha = crlb_sigma(&q(n_hat..n_total)).unwrap();
        let full = crlb_sigma(&q(0..n_total)).unwrap();
        let ratio = crlb_ratio(&p, 0.01, n_hat, n_total).unwrap();
        worst_ratio = worst_ratio.max(rel(ratio, beta / alpha));
        let rho = optimal_rho_oracle(&p, 0.01, n_hat, n_total).unwrap();
        worst_bound = worst_bound.max(rel(combined_bound(alpha, beta, rho), full));
    }
    check(worst_ratio <= 1e-12, &mut failures, format!("ratio deviation {worst_ratio:e}"));
    check(worst_bound <= 1e-10, &mut failures, format!("bound deviation {worst_bound:e}"));
    let sym = GaussianParams::new(1.0, 5.0, 1.0).unwrap();
    let rho = optimal_rho_oracle(&sym, 0.01, 500, 1001).unwrap();
    check((rho - 0.5).abs() < 1e-3, &mut failures, format!("symmetric rho {rho}"));
    verdict(
        failures,
        format!("ratio {worst_ratio:.1e}, bound {worst_bound:.1e}, symmetric rho {rho:.6}"),
        start.elapsed(),
        Duration::from_secs(10),
    )
}

/// Mean `|ρ* − ρ̂|` at 40 dB with the true location for both, so the gap is
/// the effect of using `y` in place of `f`. Also returns the gap predicted by
/// replacing `y²` with its expectation `f² + σ_ξ²`.
fn rho_gap(master: u64, trials: u64) -> (f64, f64) {
    let config = BenchConfig::default();
    let n_total = config.n_samples();
    let (mut gap, mut predicted) = (0.0, 0.0);
    for trial in 0..trials {
        let (truth, s) = synth_trial(&config, 40.0, trial_seed(master, 0, trial)).unwrap();
        let n_hat = (truth.mu / config.delta_x).round() as usize;
        let oracle = optimal_rho_oracle(&truth, config.delta_x, n_hat, n_total).unwrap();
        let sampled = rho_from_samples(&s, truth.mu).unwrap();
        gap += (oracle - sampled).abs();

        let power = s.noise_power().unwrap();
        let (mut alpha, mut total) = (0.0, 0.0);
        for n in 0..n_total {
            let x = n as f64 * config.delta_x;
            let d4 = (truth.mu - x).powi(4);
            let term = (truth.eval(x).powi(2) + power) * d4;
            total += term;
            if n >= n_hat {
                alpha += term;
            }
        }
        predicted += (oracle - alpha / total).abs();
    }
    (gap / trials as f64, predicted / trials as f64)
}

fn rho_agreement() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let gaps: Vec<(f64, f64)> = SEEDS.iter().map(|&seed| rho_gap(seed, 200)).collect();
    for (seed, (gap, predicted)) in SEEDS.iter().zip(&gaps) {
        check(
            *gap < 0.01,
            &mut failures,
            format!("seed {seed}: mean gap {gap:.4}, noise-floor prediction {predicted:.4}"),
        );
    }
    let observed: Vec<f64> = gaps.iter().map(|g| g.0).collect();
    verdict(failures, format!("mean gaps {observed:.4?}"), start.elapsed(), Duration::from_secs(30))
}

fn desk_config(seed: u64) -> BenchConfig {
    BenchConfig {
        trials: 2000,
        master_seed: seed,
        snr_grid: SnrGrid::single(12.0),
        ..Default::default()
    }
}

fn mse(r: &BenchReport, m: MethodId, sweep: f64, p: Param) -> f64 {
    r.mse(m, sweep, p).unwrap()
}

fn snr_ordering() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in SEEDS {
        let config = BenchConfig {
            execution: Execution::Sequential,
            ..desk_config(seed)
        };
        let t = Instant::now();
        let r = run_bench_snr(&config).unwrap();
        slowest = slowest.max(t.elapsed());
        let m = |id, p| mse(&r, id, 12.0, p);
        use MethodId::*;
        use Param::*;
        for p in [Sigma, Amplitude] {
            check(m(M3, p) < m(M1, p), &mut failures, format!("seed {seed}: M3 {} {} vs M1 {}", p.as_str(), m(M3, p), m(M1, p)));
        }
        check(m(M3, Mu) <= m(M1, Mu), &mut failures, format!("seed {seed}: M3 mu {} vs M1 {}", m(M3, Mu), m(M1, Mu)));
        for p in Param::ALL {
            check(m(M4, p) <= m(M2, p), &mut failures, format!("seed {seed}: M4 {} {} vs M2 {}", p.as_str(), m(M4, p), m(M2, p)));
            check(
                m(M4, p) <= 1.1 * m(M5, p),
                &mut failures,
                format!("seed {seed}: M4 {} {} vs 1.1 x M5 {}", p.as_str(), m(M4, p), m(M5, p)),
            );
        }
        summary.push(format!("seed {seed}: sigma M1 {:.3e} M3 {:.3e} M4 {:.3e} M5 {:.3e}", m(M1, Sigma), m(M3, Sigma), m(M4, Sigma), m(M5, Sigma)));
    }
    verdict(failures, summary.join(", "), slowest, Duration::from_secs(120))
}

fn iteration_convergence() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for seed in SEEDS {
        let config = BenchConfig {
            iter_sweep: (1..=12).collect(),
            ..desk_config(seed)
        };
        let r = run_bench_iters(&config).unwrap();
        for p in Param::ALL {
            let (at2, at12) = (mse(&r, MethodId::M4, 2.0, p), mse(&r, MethodId::M4, 12.0, p));
            check(at2 <= 1.05 * at12, &mut failures, format!("seed {seed}: M4 {} it2 {at2} vs it12 {at12}", p.as_str()));
        }
        let m5 = mse(&r, MethodId::M5, 12.0, Param::Sigma);
        let m4 = mse(&r, MethodId::M4, 2.0, Param::Sigma);
        check(m5 >= m4, &mut failures, format!("seed {seed}: sigma M5 it12 {m5} vs M4 it2 {m4}"));
        summary.push(format!("seed {seed}: sigma M4@2 {m4:.3e} M5@12 {m5:.3e}"));
    }
    verdict(failures, summary.join(", "), start.elapsed(), Duration::from_secs(180))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let config = BenchConfig {
        trials: 50,
        snr_grid: SnrGrid {
            start: -10.0,
            step: 2.5,
            stop: 20.0,
        },
        ..Default::default()
    };
    let csv = |c: &BenchConfig| {
        let mut buf = Vec::new();
        write_report(&run_bench_snr(c).unwrap(), &mut buf).unwrap();
        buf
    };
    let first = csv(&config);
    check(first == csv(&config), &mut failures, "repeated runs differ".into());
    let sequential = csv(&BenchConfig {
        execution: Execution::Sequential,
        ..config.clone()
    });
    check(first == sequential, &mut failures, "sequential and parallel runs differ".into());
    verdict(
        failures,
        format!("{} byte report reproduced", first.len()),
        start.elapsed(),
        Duration::from_secs(60),
    )
}

fn relative_timing() -> Outcome {
    let config = BenchConfig {
        trials: 400,
        timing: true,
        execution: Execution::Sequential,
        ..desk_config(7)
    };
    let r = run_bench_snr(&config).unwrap();
    let time = |m| r.find(m, 12.0, Param::Sigma).unwrap().mean_time_us;
    let order = [MethodId::M1, MethodId::M3, MethodId::M4, MethodId::M5];
    let times: Vec<f64> = order.iter().map(|&m| time(m)).collect();
    let summary = order
        .iter()
        .zip(&times)
        .map(|(m, t)| format!("{m} {t:.1}us"))
        .collect::<Vec<_>>()
        .join(" < ");
    let mut warned = Vec::new();
    let mut failed = Vec::new();
    for i in 0..3 {
        let (a, b) = (times[i], times[i + 1]);
        if a >= b {
            let msg = format!("{} not faster than {}", order[i], order[i + 1]);
            if a < 1.1 * b {
                warned.push(msg);
            } else {
                failed.push(msg);
            }
        }
    }
    if !failed.is_empty() {
        Outcome::Fail(format!("{summary}: {}", failed.join("; ")))
    } else if !warned.is_empty() {
        Outcome::Warn(format!("{summary}: {}", warned.join("; ")))
    } else {
        Outcome::Pass(summary)
    }
}

fn fuzz_signal(kind: usize, rng: &mut UniformStream, normal: &mut NormalStream) -> SampledSignal {
    let len = 3 + (rng.between(0.0, 1.0) * 300.0) as usize;
    let dx = 10f64.powf(rng.between(-3.0, 1.0));
    let x0 = rng.between(-50.0, 50.0);
    let scale = 10f64.powf(rng.between(-200.0, 200.0));
    let y: Vec<f64> = match kind {
        0 => vec![0.0; len],
        1 => (0..len).map(|_| -rng.between(1e-3, 5.0)).collect(),
        2 => (0..len).map(|_| normal.next_standard() * scale).collect(),
        3 => vec![rng.between(0.1, 3.0); len],
        4 => {
            let mut y = vec![0.0; len];
            y[(rng.between(0.0, 1.0) * len as f64) as usize % len] = scale;
            y
        }
        5 => {
            let mu = rng.between(-0.5, 1.5) * len as f64;
            let sigma = rng.between(0.2, 0.5 * len as f64);
            (0..len)
                .map(|n| (-(n as f64 - mu).powi(2) / (2.0 * sigma * sigma)).exp() + 0.3 * normal.next_standard())
                .collect()
        }
        _ => (0..len).map(|_| rng.between(-1.0, 1.0) * scale).collect(),
    };
    SampledSignal::new(x0, dx, y).unwrap()
}

fn fuzz() -> Outcome {
    let start = Instant::now();
    let table = build_erf_table(&KGrid::default()).unwrap();
    let mut rng = UniformStream::new(99);
    let mut normal = NormalStream::new(99);
    let mut failures = Vec::new();
    let (mut ok, mut errors, mut flagged) = (0usize, 0usize, 0usize);
    for case in 0..10_000 {
        let s = fuzz_signal(case % 7, &mut rng, &mut normal);
        for id in MethodId::ALL {
            let spec = MethodSpec::new(id);
            match catch_unwind(AssertUnwindSafe(|| run_method(&spec, &s, &table))) {
                Err(_) => failures.push(format!("case {case} {id}: panic")),
                Ok(Err(_)) => errors += 1,
                Ok(Ok(fit)) => {
                    let p = fit.params;
                    let finite = p.amplitude.is_finite() && p.mu.is_finite() && p.sigma.is_finite();
                    match fit.status {
                        FitStatus::Converged if !finite => {
                            failures.push(format!("case {case} {id}: non-finite {p:?}"))
                        }
                        FitStatus::Converged => ok += 1,
                        _ => flagged += 1,
                    }
                }
            }
        }
    }
    failures.truncate(5);
    verdict(
        failures,
        format!("{ok} converged, {flagged} flagged, {errors} typed errors"),
        start.elapsed(),
        Duration::from_secs(300),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("noiseless exactness", noiseless_exactness),
        ("erf table oracle", erf_table_oracle),
        ("M1 truncation bias", m1_bias),
        ("CRLB identities", crlb_identities),
        ("high-SNR rho agreement", rho_agreement),
        ("MSE ordering at 12 dB", snr_ordering),
        ("iteration convergence at 12 dB", iteration_convergence),
        ("determinism", determinism),
        ("relative timing", relative_timing),
        ("robustness fuzz", fuzz),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("{} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(run).unwrap_or_else(|_| Outcome::Fail("panicked".into()));
        match outcome {
            Outcome::Pass(msg) => println!("criterion {label}: PASS ({msg})"),
            Outcome::Warn(msg) => println!("criterion {label}: PASS with warning ({msg})"),
            Outcome::Fail(msg) => {
                failed += 1;
                println!("criterion {label}: FAIL ({msg})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
