//! Cramér–Rao bounds for the width on index sub-ranges, assuming the height
//! and location are known. Analysis only: the fitting pipelines use
//! [`crate::initfit::rho_from_samples`] instead of the oracle coefficient.

use std::ops::Range;

use crate::error::{FitError, Result};
use crate::signal::{eval_gaussian, GaussianParams};

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbQuery {
    pub params: GaussianParams,
    pub delta_x: f64,
    pub index_range: Range<usize>,
    pub noise_power: f64,
}

/// `Σ_{n∈range} f[n]²·(μ − n·δx)⁴`, the width information up to `σ⁶/σ_ξ²`.
pub fn fisher_sum(params: &GaussianParams, delta_x: f64, range: Range<usize>) -> f64 {
    range
        .map(|n| {
            let x = n as f64 * delta_x;
            let f = eval_gaussian(params, x);
            let d2 = (params.mu - x).powi(2);
            f * f * d2 * d2
        })
        .sum()
}

fn nonzero(sum: f64) -> Result<f64> {
    if sum.is_finite() && sum > 0.0 {
        Ok(sum)
    } else {
        Err(FitError::DegenerateFisher)
    }
}

pub fn crlb_sigma(query: &CrlbQuery) -> Result<f64> {
    if query.index_range.is_empty() {
        return Err(FitError::DegenerateFisher);
    }
    if !(query.noise_power.is_finite() && query.noise_power > 0.0) {
        return Err(FitError::InvalidConfig(format!(
            "noise power {} must be positive",
            query.noise_power
        )));
    }
    let info = nonzero(fisher_sum(&query.params, query.delta_x, query.index_range.clone()))?;
    Ok(query.noise_power * query.params.sigma.powi(6) / info)
}

fn split_sums(params: &GaussianParams, delta_x: f64, n_hat: usize, n_total: usize) -> Result<(f64, f64)> {
    if n_hat == 0 || n_hat >= n_total {
        return Err(FitError::InvalidConfig(format!(
            "split {n_hat} must lie strictly inside 0..{n_total}"
        )));
    }
    let beta = nonzero(fisher_sum(params, delta_x, 0..n_hat))?;
    let alpha = nonzero(fisher_sum(params, delta_x, n_hat..n_total))?;
    Ok((beta, alpha))
}

/// `CRLB_β / CRLB_α`, i.e. the α-side sum over the β-side sum.
pub fn crlb_ratio(params: &GaussianParams, delta_x: f64, n_hat: usize, n_total: usize) -> Result<f64> {
    let (beta, alpha) = split_sums(params, delta_x, n_hat, n_total)?;
    Ok(alpha / beta)
}

/// `ρ* = CRLB_β / (CRLB_β + CRLB_α)`, the α-side share of the full sum.
pub fn optimal_rho_oracle(
    params: &GaussianParams,
    delta_x: f64,
    n_hat: usize,
    n_total: usize,
) -> Result<f64> {
    let (beta, alpha) = split_sums(params, delta_x, n_hat, n_total)?;
    Ok(alpha / (alpha + beta))
}

/// `ρ²·CRLB_α + (1−ρ)²·CRLB_β`, the asymptotic MSE of the combined width.
pub fn combined_bound(crlb_alpha: f64, crlb_beta: f64, rho: f64) -> f64 {
    rho * rho * crlb_alpha + (1.0 - rho) * (1.0 - rho) * crlb_beta
}
