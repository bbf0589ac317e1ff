//! Effective capacity of i.i.d. block-fading channels.
//!
//! With frame duration `T`, bandwidth `B` and QoS exponent `θ`, the
//! normalized exponent is `β = θTB/ln 2` and the spectral efficiency is
//!
//! ```text
//! C(SNR) = -ln E{exp(-θT·R)} / (θTB),    R = B·log2(1 + SNR_eff·z)
//! ```
//!
//! where `SNR_eff = SNR` with receiver-only CSI and `SNR_eff = μ(z)` with the
//! threshold power policy when the transmitter also knows `z`.
//!
//! Expectations of the form `E{e^{-x(z)}}` are evaluated through
//! [`ln_expect_neg_exp`], which keeps full relative precision both when the
//! expectation is close to one (small SNR, small θ) and when it is tiny.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fading::{FadingError, FadingModel, LOG_SPACE_EDGE};
use crate::roots::{self, RootError};
use std::f64::consts::LN_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EffcapError {
    #[error("θ = 0 has no effective-capacity form; use the Shannon limit")]
    ThetaZero,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no threshold bracket found in [{lower:e}, {upper:e}]")]
    BracketFailure { lower: f64, upper: f64 },
    #[error("E{{e^-x}} underflowed (β = {beta:e}); the spectral efficiency is out of range")]
    Underflow { beta: f64 },
    #[error(transparent)]
    Fading(#[from] FadingError),
}

impl From<RootError<EffcapError>> for EffcapError {
    fn from(e: RootError<EffcapError>) -> Self {
        match e {
            RootError::BracketFailure { lower, upper } => {
                EffcapError::BracketFailure { lower, upper }
            }
            RootError::Eval(e) => e,
        }
    }
}

fn invalid(msg: impl Into<String>) -> EffcapError {
    EffcapError::InvalidInput(msg.into())
}

/// Which side of the link knows the channel gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    /// Receiver only; constant transmit power.
    Csir,
    /// Transmitter and receiver; threshold power and rate adaptation.
    Csit,
}

impl std::fmt::Display for CsiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CsiMode::Csir => "csir",
            CsiMode::Csit => "csit",
        })
    }
}

/// QoS exponent together with the frame and bandwidth it applies to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosConfig {
    /// QoS exponent in 1/bit.
    pub theta: f64,
    /// Frame duration in seconds.
    pub frame_duration: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
}

impl QosConfig {
    pub fn new(theta: f64, frame_duration: f64, bandwidth: f64) -> Result<Self, EffcapError> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(invalid(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        if !(frame_duration.is_finite() && frame_duration > 0.0) {
            return Err(invalid(format!(
                "frame duration must be > 0, got {frame_duration}"
            )));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(invalid(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        Ok(Self {
            theta,
            frame_duration,
            bandwidth,
        })
    }

    /// Configuration at inverse bandwidth `ζ = 1/B`.
    pub fn with_zeta(theta: f64, frame_duration: f64, zeta: f64) -> Result<Self, EffcapError> {
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(invalid(format!("zeta must be > 0, got {zeta}")));
        }
        Self::new(theta, frame_duration, 1.0 / zeta)
    }

    /// `β = θTB / ln 2`.
    pub fn beta(&self) -> f64 {
        self.theta * self.frame_duration * self.bandwidth / LN_2
    }

    pub fn zeta(&self) -> f64 {
        1.0 / self.bandwidth
    }
}

/// Threshold policy `μ(z) = (z/α)^{1/(β+1)}/z − 1/z` for `z ≥ α`, zero below.
///
/// With `β = 0` this is classical water-filling, `1/α − 1/z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPolicy {
    pub alpha: f64,
    /// `ln α`; stays exact when `α` itself underflows.
    pub ln_alpha: f64,
    pub beta: f64,
}

impl PowerPolicy {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            ln_alpha: alpha.ln(),
            beta,
        }
    }

    pub fn from_ln_alpha(ln_alpha: f64, beta: f64) -> Self {
        Self {
            alpha: ln_alpha.exp(),
            ln_alpha,
            beta,
        }
    }

    /// `ln(z/α)`, or `None` below the threshold.
    fn log_ratio(&self, z: f64) -> Option<f64> {
        let l = z.ln() - self.ln_alpha;
        (z > 0.0 && l >= 0.0).then_some(l)
    }

    /// Transmit SNR allotted to gain `z`.
    pub fn power(&self, z: f64) -> f64 {
        self.log_ratio(z)
            .map_or(0.0, |l| (l / (self.beta + 1.0)).exp_m1() / z)
    }

    /// `ln(1 + μ(z)·z)`, the nats carried per channel use at gain `z`.
    pub fn log_gain(&self, z: f64) -> f64 {
        self.log_ratio(z).map_or(0.0, |l| l / (self.beta + 1.0))
    }
}

/// Per-frame service in bits, `T·B·log2(1 + SNR_eff·z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceRate {
    pub bits_per_second: f64,
}

impl ServiceRate {
    pub fn csir(snr: f64, bandwidth: f64, z: f64) -> Self {
        Self {
            bits_per_second: bandwidth * (snr * z).ln_1p() / LN_2,
        }
    }

    pub fn csit(policy: &PowerPolicy, bandwidth: f64, z: f64) -> Self {
        Self {
            bits_per_second: bandwidth * policy.log_gain(z) / LN_2,
        }
    }
}

/// `ln E{exp(-x(z)·1{z ≥ lower})}` for a nonnegative exponent `x`.
///
/// Discrete models use a max-shifted log-sum-exp. Continuous models
/// integrate `1 − e^{-x}` when the expectation is near one and `e^{-x}`
/// otherwise.
pub fn ln_expect_neg_exp<X: Fn(f64) -> f64>(
    model: &FadingModel,
    lower: f64,
    x: X,
) -> Result<f64, FadingError> {
    if let Some(atoms) = model.atoms() {
        let xs: Vec<(f64, f64)> = atoms
            .iter()
            .map(|&(z, p)| (p, if z >= lower { x(z) } else { 0.0 }))
            .collect();
        let deficit: f64 = xs.iter().map(|&(p, x)| -p * (-x).exp_m1()).sum();
        if deficit <= 0.5 {
            return Ok((-deficit).ln_1p());
        }
        let terms: Vec<f64> = xs.iter().map(|&(p, x)| p.ln() - x).collect();
        return Ok(log_sum_exp(&terms));
    }
    let deficit = model.expect_above(lower, |z| -(-x(z)).exp_m1())?;
    if deficit <= 0.5 {
        Ok((-deficit).ln_1p())
    } else {
        let below = model.cdf(lower);
        Ok((below + model.expect_above(lower, |z| (-x(z)).exp())?).ln())
    }
}

/// `ln Σ exp(v_i)` with the maximum factored out.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_snr(snr: f64) -> Result<(), EffcapError> {
    if snr.is_finite() && snr >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("snr must be finite and >= 0, got {snr}")))
    }
}

/// Receiver-CSI spectral efficiency in bit/s/Hz,
/// `-ln E{(1+SNR·z)^{-β}} / (β ln 2)`.
pub fn spectral_efficiency_csir(
    snr: f64,
    qos: &QosConfig,
    model: &FadingModel,
) -> Result<f64, EffcapError> {
    check_snr(snr)?;
    if qos.theta == 0.0 {
        return Err(EffcapError::ThetaZero);
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    let beta = qos.beta();
    let ln_e = ln_expect_neg_exp(model, 0.0, |z| beta * (snr * z).ln_1p())?;
    from_ln_expectation(ln_e, beta)
}

fn from_ln_expectation(ln_e: f64, beta: f64) -> Result<f64, EffcapError> {
    if !ln_e.is_finite() {
        return Err(EffcapError::Underflow { beta });
    }
    Ok((-ln_e / (beta * LN_2)).max(0.0))
}

/// Average transmit SNR spent by the threshold policy `(α, β)`.
fn policy_power(model: &FadingModel, ln_alpha: f64, beta: f64) -> Result<f64, FadingError> {
    let s = 1.0 / (beta + 1.0);
    if model.is_discrete() || ln_alpha > LOG_SPACE_EDGE {
        model.expect_above(ln_alpha.exp(), |z| (s * (z.ln() - ln_alpha)).exp_m1() / z)
    } else {
        model.expect_above_ln(ln_alpha, |t, lw| {
            (s * (t - ln_alpha)).exp_m1() * (lw - t).exp()
        })
    }
}

/// Threshold for the policy with normalized exponent `beta` meeting the
/// average power constraint `E{μ(z)} = snr`.
pub fn solve_threshold(
    snr: f64,
    beta: f64,
    model: &FadingModel,
) -> Result<PowerPolicy, EffcapError> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(invalid(format!("snr must be finite and > 0, got {snr}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    let upper = if model.z_max().is_finite() {
        model.z_max()
    } else {
        let mut q = model.moments().mean;
        while model.survival(q) > 1e-9 {
            q *= 2.0;
        }
        q
    };
    // Strict QoS at high SNR pushes the threshold far below the smallest
    // positive double, so it is searched in ln α.
    let ln_alpha = roots::bisect_decreasing_expanding(
        |u| Ok::<_, EffcapError>(policy_power(model, u, beta)? - snr),
        (1e-12 * upper.min(1.0)).ln(),
        upper.ln(),
        4.0 * std::f64::consts::LN_10,
        (-1e6, 1e300f64.ln()),
        1e-14,
    )?;
    Ok(PowerPolicy::from_ln_alpha(ln_alpha, beta))
}

/// Threshold `α` of the optimal power policy at the given average SNR.
///
/// `θ = 0` yields the water-filling threshold.
pub fn solve_alpha(
    snr: f64,
    qos: &QosConfig,
    model: &FadingModel,
) -> Result<PowerPolicy, EffcapError> {
    solve_threshold(snr, qos.beta(), model)
}

/// `μ_opt(z)` for a solved policy.
pub fn power_policy_value(policy: &PowerPolicy, z: f64) -> f64 {
    policy.power(z)
}

/// Average power actually spent by `policy`, `E{μ(z)}`.
pub fn average_power(policy: &PowerPolicy, model: &FadingModel) -> Result<f64, EffcapError> {
    Ok(policy_power(model, policy.ln_alpha, policy.beta)?)
}

/// Spectral efficiency under a given threshold policy,
/// `-ln(F(α) + E{(z/α)^{-β/(β+1)}·1{z≥α}}) / (β ln 2)`.
pub fn spectral_efficiency_with_policy(
    policy: &PowerPolicy,
    model: &FadingModel,
) -> Result<f64, EffcapError> {
    let beta = policy.beta;
    if beta == 0.0 {
        return Err(EffcapError::ThetaZero);
    }
    let b = beta / (beta + 1.0);
    let ln_a = policy.ln_alpha;
    let ln_e = if model.is_discrete() || ln_a > LOG_SPACE_EDGE {
        ln_expect_neg_exp(model, policy.alpha, |z| b * (z.ln() - ln_a))?
    } else {
        let scaled = model.expect_above_ln(ln_a, |t, lw| (lw - b * t).exp())?;
        log_sum_exp(&[model.ln_cdf_at_ln(ln_a), b * ln_a + scaled.ln()])
    };
    from_ln_expectation(ln_e, beta)
}

/// Transmitter-CSI spectral efficiency with the optimal threshold policy.
pub fn spectral_efficiency_csit(
    snr: f64,
    qos: &QosConfig,
    model: &FadingModel,
) -> Result<f64, EffcapError> {
    check_snr(snr)?;
    if qos.theta == 0.0 {
        return Err(EffcapError::ThetaZero);
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    let policy = solve_alpha(snr, qos, model)?;
    spectral_efficiency_with_policy(&policy, model)
}

/// Ergodic (θ → 0) capacity in bit/s/Hz.
///
/// CSIR: `E{log2(1+SNR·z)}`. CSIT: `E{log2(z/α)·1{z≥α}}` with the
/// water-filling threshold.
pub fn shannon_limit(snr: f64, mode: CsiMode, model: &FadingModel) -> Result<f64, EffcapError> {
    check_snr(snr)?;
    if snr == 0.0 {
        return Ok(0.0);
    }
    match mode {
        CsiMode::Csir => Ok(model.expect(|z| (snr * z).ln_1p())? / LN_2),
        CsiMode::Csit => {
            let policy = solve_threshold(snr, 0.0, model)?;
            let ln_a = policy.ln_alpha;
            Ok(model.expect_above(policy.alpha, |z| z.ln() - ln_a)? / LN_2)
        }
    }
}

/// Spectral efficiency for either CSI mode; `θ = 0` is routed to
/// [`shannon_limit`].
pub fn spectral_efficiency(
    mode: CsiMode,
    snr: f64,
    qos: &QosConfig,
    model: &FadingModel,
) -> Result<f64, EffcapError> {
    if qos.theta == 0.0 {
        return shannon_limit(snr, mode, model);
    }
    match mode {
        CsiMode::Csir => spectral_efficiency_csir(snr, qos, model),
        CsiMode::Csit => spectral_efficiency_csit(snr, qos, model),
    }
}

/// Effective capacity in bit/s.
pub fn effective_capacity(
    mode: CsiMode,
    snr: f64,
    qos: &QosConfig,
    model: &FadingModel,
) -> Result<f64, EffcapError> {
    Ok(spectral_efficiency(mode, snr, qos, model)? * qos.bandwidth)
}

/// θ → ∞ limit of the spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayLimited {
    pub spectral_efficiency: f64,
    /// Set when `E{1/z}` diverges, forcing the CSIT limit to zero.
    pub divergent_inverse_moment: bool,
}

/// Delay-limited capacity: `log2(1+SNR·z_min)` (CSIR) or
/// `log2(1 + SNR/E{1/z})` (CSIT).
pub fn delay_limited_limit(
    snr: f64,
    mode: CsiMode,
    model: &FadingModel,
) -> Result<DelayLimited, EffcapError> {
    check_snr(snr)?;
    Ok(match mode {
        CsiMode::Csir => DelayLimited {
            spectral_efficiency: (snr * model.z_min()).ln_1p() / LN_2,
            divergent_inverse_moment: false,
        },
        CsiMode::Csit => {
            let inv = model.inverse_moment();
            if inv.is_finite() {
                DelayLimited {
                    spectral_efficiency: (snr / inv).ln_1p() / LN_2,
                    divergent_inverse_moment: false,
                }
            } else {
                DelayLimited {
                    spectral_efficiency: 0.0,
                    divergent_inverse_moment: true,
                }
            }
        }
    })
}

/// Energy per bit relative to `N0`, `SNR / C` (linear).
pub fn bit_energy(snr: f64, spectral_efficiency: f64) -> f64 {
    snr / spectral_efficiency
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
