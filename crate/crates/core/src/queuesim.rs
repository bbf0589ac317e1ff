//! Monte-Carlo block-fading queue fed at a constant rate.
//!
//! Each frame draws an i.i.d. gain, serves `T·R` bits and the backlog follows
//! `Q ← max(Q + a·T − T·R, 0)`. The buffer is unbounded. The decay rate of
//! `P(Q ≥ q)` is estimated by least squares on `(q, ln P(Q ≥ q))`.

use std::f64::consts::LN_2;

use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effcap::{self, CsiMode, EffcapError, PowerPolicy, QosConfig};
use crate::fading::{FadingError, FadingModel};

/// Exceedance count a threshold needs before it enters the tail fit.
pub const MIN_EXCEEDANCES: u64 = 100;
pub const DEFAULT_THRESHOLD_COUNT: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueueError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("arrival rate {arrival:e} bit/s is not below the mean service rate {service:e} bit/s")]
    Unstable { arrival: f64, service: f64 },
    #[error("only {usable} thresholds have at least {MIN_EXCEEDANCES} exceedances; need 2")]
    InsufficientSamples { usable: usize },
    #[error(transparent)]
    Effcap(#[from] EffcapError),
}

impl From<FadingError> for QueueError {
    fn from(e: FadingError) -> Self {
        Self::Effcap(e.into())
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> QueueError {
    QueueError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: FadingModel,
    pub snr: f64,
    pub qos: QosConfig,
    pub mode: CsiMode,
    /// Constant arrival rate in bit/s.
    pub arrival_rate: f64,
    pub frames: u64,
    pub warmup_frames: u64,
    pub seed: u64,
    /// Backlog thresholds in bits, strictly increasing.
    pub q_thresholds: Vec<f64>,
}

/// `k·0.5/θ` bits for `k = 1..=count`.
pub fn default_thresholds(theta: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| k as f64 * 0.5 / theta).collect()
}

impl SimConfig {
    /// Config with 1% warmup and the default thresholds for `qos.theta`.
    pub fn new(
        model: FadingModel,
        snr: f64,
        qos: QosConfig,
        mode: CsiMode,
        arrival_rate: f64,
        frames: u64,
        seed: u64,
    ) -> Self {
        Self {
            model,
            snr,
            qos,
            mode,
            arrival_rate,
            frames,
            warmup_frames: frames / 100,
            seed,
            q_thresholds: default_thresholds(qos.theta, DEFAULT_THRESHOLD_COUNT),
        }
    }

    pub fn validate(&self) -> Result<(), QueueError> {
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(invalid("snr", format!("must be > 0, got {}", self.snr)));
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return Err(invalid(
                "arrival_rate",
                format!("must be > 0, got {}", self.arrival_rate),
            ));
        }
        if self.frames == 0 || self.frames <= self.warmup_frames {
            return Err(invalid(
                "frames",
                format!(
                    "{} frames do not exceed {} warmup frames",
                    self.frames, self.warmup_frames
                ),
            ));
        }
        if self.q_thresholds.is_empty() {
            return Err(invalid("q_thresholds", "empty"));
        }
        if self
            .q_thresholds
            .iter()
            .any(|q| !(q.is_finite() && *q > 0.0))
        {
            return Err(invalid("q_thresholds", "must be finite and > 0"));
        }
        if !self.q_thresholds.windows(2).all(|w| w[1] > w[0]) {
            return Err(invalid("q_thresholds", "not strictly increasing"));
        }
        Ok(())
    }
}

/// Maps a gain to a service rate in bit/s.
#[derive(Debug, Clone, Copy)]
enum Service {
    Csir { snr: f64, bandwidth: f64 },
    Csit { policy: PowerPolicy, bandwidth: f64 },
}

impl Service {
    fn new(
        mode: CsiMode,
        snr: f64,
        qos: &QosConfig,
        model: &FadingModel,
    ) -> Result<Self, EffcapError> {
        Ok(match mode {
            CsiMode::Csir => Service::Csir {
                snr,
                bandwidth: qos.bandwidth,
            },
            CsiMode::Csit => Service::Csit {
                policy: effcap::solve_alpha(snr, qos, model)?,
                bandwidth: qos.bandwidth,
            },
        })
    }

    fn rate(&self, z: f64) -> f64 {
        match self {
            Service::Csir { snr, bandwidth } => effcap::ServiceRate::csir(*snr, *bandwidth, z),
            Service::Csit { policy, bandwidth } => effcap::ServiceRate::csit(policy, *bandwidth, z),
        }
        .bits_per_second
    }

    fn mean_rate(&self, model: &FadingModel) -> Result<f64, FadingError> {
        match self {
            Service::Csir { snr, bandwidth } => {
                Ok(bandwidth * model.expect(|z| (snr * z).ln_1p())? / LN_2)
            }
            Service::Csit { policy, bandwidth } => {
                Ok(bandwidth * model.expect_above(policy.alpha, |z| policy.log_gain(z))? / LN_2)
            }
        }
    }
}

/// Raw output of one queue run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueRun {
    pub thresholds: Vec<f64>,
    /// Post-warmup frames with `Q ≥ thresholds[i]`.
    pub exceedances: Vec<u64>,
    pub frames_counted: u64,
    pub mean_queue: f64,
    pub max_queue: f64,
}

impl QueueRun {
    pub fn tail_probabilities(&self) -> Vec<f64> {
        self.exceedances
            .iter()
            .map(|&c| c as f64 / self.frames_counted as f64)
            .collect()
    }
}

/// Mean service rate in bit/s of the configured link.
pub fn mean_service_rate(config: &SimConfig) -> Result<f64, QueueError> {
    let service = Service::new(config.mode, config.snr, &config.qos, &config.model)?;
    Ok(service.mean_rate(&config.model)?)
}

/// Runs the queue recursion and counts threshold exceedances after warmup.
pub fn run_queue(config: &SimConfig) -> Result<QueueRun, QueueError> {
    config.validate()?;
    let service = Service::new(config.mode, config.snr, &config.qos, &config.model)?;
    let mean = service.mean_rate(&config.model)?;
    if config.arrival_rate >= mean {
        return Err(QueueError::Unstable {
            arrival: config.arrival_rate,
            service: mean,
        });
    }

    let t = config.qos.frame_duration;
    let arrival_bits = config.arrival_rate * t;
    let sampler = config.model.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let thresholds = &config.q_thresholds;
    // hist[k] counts frames whose backlog cleared exactly k thresholds.
    let mut hist = vec![0u64; thresholds.len() + 1];
    let mut q = 0.0f64;
    let mut sum_q = 0.0f64;
    let mut max_q = 0.0f64;
    for frame in 0..config.frames {
        let z = sampler.sample(&mut rng);
        q = (q + arrival_bits - service.rate(z) * t).max(0.0);
        if frame >= config.warmup_frames {
            hist[thresholds.partition_point(|&x| x <= q)] += 1;
            sum_q += q;
            max_q = max_q.max(q);
        }
    }
    let counted = config.frames - config.warmup_frames;
    let mut exceedances = vec![0u64; thresholds.len()];
    let mut acc = 0u64;
    for k in (0..thresholds.len()).rev() {
        acc += hist[k + 1];
        exceedances[k] = acc;
    }
    Ok(QueueRun {
        thresholds: thresholds.clone(),
        exceedances,
        frames_counted: counted,
        mean_queue: sum_q / counted as f64,
        max_queue: max_q,
    })
}

/// Least-squares tail fit over thresholds with enough exceedances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub thresholds: Vec<f64>,
    pub log_tail_probs: Vec<f64>,
    /// Negated slope of `ln P(Q ≥ q)` against `q`.
    pub fitted_decay: f64,
    pub fit_rsquared: f64,
    /// Exceedances of the largest threshold used in the fit.
    pub samples_at_largest_threshold: u64,
}

pub fn fit_tail(run: &QueueRun) -> Result<TailEstimate, QueueError> {
    let n = run.frames_counted as f64;
    let used: Vec<(f64, u64)> = run
        .thresholds
        .iter()
        .zip(&run.exceedances)
        .filter(|(_, c)| **c >= MIN_EXCEEDANCES)
        .map(|(q, c)| (*q, *c))
        .collect();
    if used.len() < 2 {
        return Err(QueueError::InsufficientSamples { usable: used.len() });
    }
    let xs: Vec<f64> = used.iter().map(|u| u.0).collect();
    let ys: Vec<f64> = used.iter().map(|u| (u.1 as f64 / n).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let rsq = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(TailEstimate {
        samples_at_largest_threshold: used[used.len() - 1].1,
        thresholds: xs,
        log_tail_probs: ys,
        fitted_decay: -slope,
        fit_rsquared: rsq,
    })
}

/// Runs the queue and fits its tail decay.
pub fn simulate_queue(config: &SimConfig) -> Result<TailEstimate, QueueError> {
    fit_tail(&run_queue(config)?)
}

/// Sample-average effective capacity with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalCapacity {
    /// bit/s
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Streaming `-(1/θT)·ln mean(e^{-θT·R_i})`, max-shifted.
#[derive(Debug, Clone, Copy)]
struct LogMeanExp {
    shift: f64,
    s1: f64,
    s2: f64,
    n: u64,
}

impl LogMeanExp {
    fn new() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            s1: 0.0,
            s2: 0.0,
            n: 0,
        }
    }

    fn push(&mut self, x: f64) {
        if x > self.shift {
            let r = (self.shift - x).exp();
            self.s1 *= r;
            self.s2 *= r * r;
            self.shift = x;
        }
        let w = (x - self.shift).exp();
        self.s1 += w;
        self.s2 += w * w;
        self.n += 1;
    }

    /// `(ln mean e^x, standard error of that log)`.
    fn finish(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.s1 / n;
        let var = (self.s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        (self.shift + mean.ln(), var.sqrt() / (mean * n.sqrt()))
    }
}

/// Effective capacity of a given rate sequence in bit/s.
///
/// `θ = 0` returns the sample mean.
pub fn effective_capacity_from_rates(
    rates: &[f64],
    theta: f64,
    frame_duration: f64,
) -> EmpiricalCapacity {
    let n = rates.len() as u64;
    if theta == 0.0 {
        let k = rates.len() as f64;
        let mean = rates.iter().sum::<f64>() / k;
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        return EmpiricalCapacity {
            value: mean,
            std_error: (var / k).sqrt(),
            samples: n,
        };
    }
    let tt = theta * frame_duration;
    let mut acc = LogMeanExp::new();
    for &r in rates {
        acc.push(-tt * r);
    }
    let (lme, se) = acc.finish();
    EmpiricalCapacity {
        value: -lme / tt,
        std_error: se / tt,
        samples: n,
    }
}

/// Monte-Carlo estimate of the effective capacity in bit/s.
pub fn effective_capacity_empirical(
    model: &FadingModel,
    snr: f64,
    qos: &QosConfig,
    mode: CsiMode,
    frames: u64,
    seed: u64,
) -> Result<EmpiricalCapacity, QueueError> {
    if frames == 0 {
        return Err(invalid("frames", "must be >= 1"));
    }
    let service = Service::new(mode, snr, qos, model)?;
    let sampler = model.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates: Vec<f64> = (0..frames)
        .map(|_| service.rate(sampler.sample(&mut rng)))
        .collect();
    Ok(effective_capacity_from_rates(
        &rates,
        qos.theta,
        qos.frame_duration,
    ))
}
