//! Channel power-gain distributions.
//!
//! A [`FadingModel`] describes the law of `z = |h|²`. Continuous models
//! (Rayleigh, Nakagami-m) are integrated with adaptive Gauss–Kronrod
//! quadrature; discrete models (a point mass, or a finite table of atoms) are
//! summed exactly.
//!
//! Indicator conventions follow the power-adaptation formulas: [`FadingModel::cdf`]
//! is the strict `P(Z < z)` and [`FadingModel::expect_above`] integrates over
//! `z ≥ lower`, so `cdf(a) + P(Z ≥ a) = 1` holds exactly for every model.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};
use thiserror::Error;

use crate::quad::{self, QuadError};

/// Conditional tail mass left out beyond the integration cutoff.
const TAIL_MASS: f64 = 1e-16;

/// Thresholds with `ln α` below this are integrated in `ln z` by callers,
/// since `α` itself is no longer a normal double.
pub const LOG_SPACE_EDGE: f64 = -600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FadingError {
    #[error("invalid fading model: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    NonIntegrable(#[from] QuadError),
}

fn unit_mean() -> f64 {
    1.0
}

/// Parameterization of a fading law, as written in JSON configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FadingKind {
    /// Exponentially distributed power gain.
    Rayleigh {
        #[serde(default = "unit_mean")]
        mean: f64,
    },
    /// Gamma-distributed power gain with shape `m`.
    #[serde(rename = "nakagami")]
    NakagamiM {
        m: f64,
        #[serde(default = "unit_mean")]
        mean: f64,
    },
    /// Non-fading channel with constant gain `z0`.
    Deterministic { z0: f64 },
    /// Finite list of `(z, probability)` atoms.
    #[serde(rename = "table")]
    BoundedTable { points: Vec<(f64, f64)> },
}

/// Validated fading distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FadingKind", into = "FadingKind")]
pub struct FadingModel {
    kind: FadingKind,
}

impl TryFrom<FadingKind> for FadingModel {
    type Error = FadingError;

    fn try_from(kind: FadingKind) -> Result<Self, Self::Error> {
        FadingModel::new(kind)
    }
}

impl From<FadingModel> for FadingKind {
    fn from(model: FadingModel) -> Self {
        model.kind
    }
}

/// First and second moments of `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
}

fn invalid(msg: impl Into<String>) -> FadingError {
    FadingError::InvalidParameter(msg.into())
}

fn positive_finite(name: &str, v: f64) -> Result<(), FadingError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl FadingModel {
    pub fn new(kind: FadingKind) -> Result<Self, FadingError> {
        match &kind {
            FadingKind::Rayleigh { mean } => positive_finite("mean", *mean)?,
            FadingKind::NakagamiM { m, mean } => {
                positive_finite("mean", *mean)?;
                if !(m.is_finite() && *m >= 0.5) {
                    return Err(invalid(format!("nakagami m must be >= 0.5, got {m}")));
                }
            }
            FadingKind::Deterministic { z0 } => positive_finite("z0", *z0)?,
            FadingKind::BoundedTable { points } => {
                if points.is_empty() {
                    return Err(invalid("table must contain at least one point"));
                }
                let mut total = 0.0;
                let mut prev = f64::NEG_INFINITY;
                for &(z, p) in points {
                    if !(z.is_finite() && z >= 0.0) {
                        return Err(invalid(format!(
                            "table gain must be finite and >= 0, got {z}"
                        )));
                    }
                    if z <= prev {
                        return Err(invalid("table gains must be strictly increasing"));
                    }
                    if !(p.is_finite() && p > 0.0) {
                        return Err(invalid(format!("table probability must be > 0, got {p}")));
                    }
                    prev = z;
                    total += p;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!(
                        "table probabilities sum to {total}, not 1"
                    )));
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn rayleigh(mean: f64) -> Result<Self, FadingError> {
        Self::new(FadingKind::Rayleigh { mean })
    }

    pub fn nakagami(m: f64, mean: f64) -> Result<Self, FadingError> {
        Self::new(FadingKind::NakagamiM { m, mean })
    }

    pub fn deterministic(z0: f64) -> Result<Self, FadingError> {
        Self::new(FadingKind::Deterministic { z0 })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self, FadingError> {
        Self::new(FadingKind::BoundedTable { points })
    }

    pub fn kind(&self) -> &FadingKind {
        &self.kind
    }

    /// Atoms of a discrete model, `None` for continuous ones.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            FadingKind::Deterministic { z0 } => Some(vec![(*z0, 1.0)]),
            FadingKind::BoundedTable { points } => Some(points.clone()),
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.atoms().is_some()
    }

    /// Essential infimum of `z`.
    pub fn z_min(&self) -> f64 {
        match &self.kind {
            FadingKind::Rayleigh { .. } | FadingKind::NakagamiM { .. } => 0.0,
            FadingKind::Deterministic { z0 } => *z0,
            FadingKind::BoundedTable { points } => points[0].0,
        }
    }

    /// Essential supremum of `z`; `f64::INFINITY` for unbounded support.
    pub fn z_max(&self) -> f64 {
        match &self.kind {
            FadingKind::Rayleigh { .. } | FadingKind::NakagamiM { .. } => f64::INFINITY,
            FadingKind::Deterministic { z0 } => *z0,
            FadingKind::BoundedTable { points } => points[points.len() - 1].0,
        }
    }

    /// Probability mass sitting exactly at `z_max` (zero for continuous laws).
    pub fn mass_at_max(&self) -> f64 {
        match &self.kind {
            FadingKind::Deterministic { .. } => 1.0,
            FadingKind::BoundedTable { points } => points[points.len() - 1].1,
            _ => 0.0,
        }
    }

    /// Density `p_z(z)` for continuous models; probability mass at an atom
    /// for discrete ones. Zero outside the support.
    pub fn density(&self, z: f64) -> f64 {
        if z.is_nan() || z < 0.0 {
            return 0.0;
        }
        match &self.kind {
            FadingKind::Rayleigh { mean } => (-z / mean).exp() / mean,
            FadingKind::NakagamiM { m, mean } => {
                if z == 0.0 {
                    return match m.total_cmp(&1.0) {
                        std::cmp::Ordering::Less => f64::INFINITY,
                        std::cmp::Ordering::Equal => 1.0 / mean,
                        std::cmp::Ordering::Greater => 0.0,
                    };
                }
                let rate = m / mean;
                (m * rate.ln() + (m - 1.0) * z.ln() - rate * z - ln_gamma(*m)).exp()
            }
            FadingKind::Deterministic { z0 } => {
                if z == *z0 {
                    1.0
                } else {
                    0.0
                }
            }
            FadingKind::BoundedTable { points } => points
                .iter()
                .find(|(zi, _)| *zi == z)
                .map_or(0.0, |(_, p)| *p),
        }
    }

    /// `P(Z < z)`, strict inequality.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z == f64::INFINITY {
            return 1.0;
        }
        match &self.kind {
            FadingKind::Rayleigh { mean } => -(-z / mean).exp_m1(),
            FadingKind::NakagamiM { m, mean } => gamma_lr(*m, m * z / mean),
            FadingKind::Deterministic { z0 } => {
                if *z0 < z {
                    1.0
                } else {
                    0.0
                }
            }
            FadingKind::BoundedTable { points } => points
                .iter()
                .take_while(|(zi, _)| *zi < z)
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// `P(Z ≥ z)`, computed directly rather than as `1 - cdf` so the upper
    /// tail keeps full relative precision.
    pub fn survival(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 1.0;
        }
        match &self.kind {
            FadingKind::Rayleigh { mean } => (-z / mean).exp(),
            FadingKind::NakagamiM { m, mean } => gamma_ur(*m, m * z / mean),
            _ => 1.0 - self.cdf(z),
        }
    }

    fn scale(&self) -> f64 {
        match &self.kind {
            FadingKind::Rayleigh { mean } | FadingKind::NakagamiM { mean, .. } => *mean,
            _ => self.z_max(),
        }
    }

    /// Point beyond which the conditional tail mass above `lower` is below
    /// [`TAIL_MASS`].
    fn tail_cutoff(&self, lower: f64) -> f64 {
        match &self.kind {
            FadingKind::Rayleigh { mean } => lower + mean * (-TAIL_MASS.ln()),
            FadingKind::NakagamiM { m, mean } => {
                let target = TAIL_MASS * self.survival(lower);
                let step = mean / m * (-TAIL_MASS.ln());
                let mut lo = lower;
                let mut hi = lower + step;
                while self.survival(hi) > target {
                    lo = hi;
                    hi += step;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.survival(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
            _ => self.z_max(),
        }
    }

    /// `E{g(z)·1{z ≥ lower}}`.
    ///
    /// Discrete models are summed exactly. Continuous models are integrated
    /// from `max(lower, 0)` to a cutoff leaving at most `1e-16` of the
    /// conditional tail mass, with breakpoints clustered near the lower edge.
    pub fn expect_above<G: Fn(f64) -> f64>(&self, lower: f64, g: G) -> Result<f64, FadingError> {
        if let Some(atoms) = self.atoms() {
            return Ok(atoms
                .iter()
                .filter(|(z, _)| *z >= lower)
                .map(|(z, p)| p * g(*z))
                .sum());
        }
        let lo = lower.max(0.0);
        if !lo.is_finite() || self.survival(lo) == 0.0 {
            return Ok(0.0);
        }
        let hi = self.tail_cutoff(lo);
        let breaks = quad::geometric_breaks(lo, hi, self.scale());
        Ok(quad::integrate_with_breaks(
            |z| {
                let p = self.density(z);
                if p == 0.0 {
                    0.0
                } else {
                    g(z) * p
                }
            },
            &breaks,
            quad::default_rel_tol(),
        )?)
    }

    /// `ln P(Z < e^u)`, valid far below the smallest positive double.
    ///
    /// Continuous laws switch to the leading term of the small-argument
    /// series once `z·m/mean < 1e-17`, where the next term is below double
    /// precision.
    pub fn ln_cdf_at_ln(&self, u: f64) -> f64 {
        let ln_rate = match &self.kind {
            FadingKind::Rayleigh { mean } => -mean.ln(),
            FadingKind::NakagamiM { m, mean } => (m / mean).ln(),
            _ => return self.cdf(u.exp()).ln(),
        };
        let ln_x = u + ln_rate;
        if ln_x > 1e-17f64.ln() {
            return self.cdf(u.exp()).ln();
        }
        match &self.kind {
            FadingKind::NakagamiM { m, .. } => m * ln_x - ln_gamma(m + 1.0),
            _ => ln_x,
        }
    }

    /// `ln(p(e^t)·e^t)`, the log-density of `ln z`, for continuous models.
    fn ln_log_density(&self, t: f64) -> f64 {
        match &self.kind {
            FadingKind::Rayleigh { mean } => t - mean.ln() - t.exp() / mean,
            FadingKind::NakagamiM { m, mean } => {
                let rate = m / mean;
                m * rate.ln() + m * t - rate * t.exp() - ln_gamma(*m)
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Sum or integral of `h(ln z, ln w)` over `z ≥ e^{ln_lower}`, where `w`
    /// is the atom mass (discrete) or the density of `ln z` (continuous).
    ///
    /// Integrands get `ln w` unexponentiated so they can fold in their own
    /// exponents first; the lower edge may sit far below the smallest
    /// positive double.
    pub fn expect_above_ln<H: Fn(f64, f64) -> f64>(
        &self,
        ln_lower: f64,
        h: H,
    ) -> Result<f64, FadingError> {
        if let Some(atoms) = self.atoms() {
            let lower = ln_lower.exp();
            return Ok(atoms
                .iter()
                .filter(|(z, _)| *z >= lower)
                .map(|&(z, p)| h(z.ln(), p.ln()))
                .sum());
        }
        let top = self.tail_cutoff(0.0).ln();
        let anchor = self.scale().ln();
        if ln_lower >= top {
            return Ok(0.0);
        }
        let mut breaks = vec![top];
        let mut step = 1.0;
        let mut t = anchor;
        while t > ln_lower {
            if t < top {
                breaks.push(t);
            }
            t = anchor - step;
            step *= 2.0;
        }
        breaks.push(ln_lower);
        breaks.reverse();
        Ok(quad::integrate_with_breaks(
            |t| {
                let lw = self.ln_log_density(t);
                if lw == f64::NEG_INFINITY {
                    0.0
                } else {
                    h(t, lw)
                }
            },
            &breaks,
            quad::default_rel_tol(),
        )?)
    }

    /// `E{g(z)}` over the whole support.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64, FadingError> {
        self.expect_above(0.0, g)
    }

    /// Closed-form `(E{z}, E{z²})`.
    pub fn moments(&self) -> Moments {
        match &self.kind {
            FadingKind::Rayleigh { mean } => Moments {
                mean: *mean,
                second_moment: 2.0 * mean * mean,
            },
            FadingKind::NakagamiM { m, mean } => Moments {
                mean: *mean,
                second_moment: (m + 1.0) / m * mean * mean,
            },
            FadingKind::Deterministic { z0 } => Moments {
                mean: *z0,
                second_moment: z0 * z0,
            },
            FadingKind::BoundedTable { points } => Moments {
                mean: points.iter().map(|(z, p)| z * p).sum(),
                second_moment: points.iter().map(|(z, p)| z * z * p).sum(),
            },
        }
    }

    /// `E{1/z}`; `f64::INFINITY` when the inverse moment diverges.
    pub fn inverse_moment(&self) -> f64 {
        match &self.kind {
            FadingKind::Rayleigh { .. } => f64::INFINITY,
            FadingKind::NakagamiM { m, mean } => {
                if *m > 1.0 {
                    m / (mean * (m - 1.0))
                } else {
                    f64::INFINITY
                }
            }
            FadingKind::Deterministic { z0 } => 1.0 / z0,
            FadingKind::BoundedTable { points } => points
                .iter()
                .map(|(z, p)| if *z == 0.0 { f64::INFINITY } else { p / z })
                .sum(),
        }
    }

    /// Builds a reusable sampler for this law.
    pub fn sampler(&self) -> Sampler {
        match &self.kind {
            FadingKind::Rayleigh { mean } => {
                Sampler::Exp(Exp::new(1.0 / mean).expect("validated mean"))
            }
            FadingKind::NakagamiM { m, mean } => {
                Sampler::Gamma(Gamma::new(*m, mean / m).expect("validated shape"))
            }
            FadingKind::Deterministic { z0 } => Sampler::Constant(*z0),
            FadingKind::BoundedTable { points } => {
                let mut acc = 0.0;
                let cumulative = points
                    .iter()
                    .map(|&(z, p)| {
                        acc += p;
                        (acc, z)
                    })
                    .collect();
                Sampler::Table(cumulative)
            }
        }
    }

    /// Draws one gain from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

/// Pre-built sampler returned by [`FadingModel::sampler`].
#[derive(Debug, Clone)]
pub enum Sampler {
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Constant(f64),
    /// `(cumulative probability, z)` pairs.
    Table(Vec<(f64, f64)>),
}

impl Distribution<f64> for Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Constant(z) => *z,
            Sampler::Table(cum) => {
                let u: f64 = rng.random::<f64>() * cum[cum.len() - 1].0;
                cum.iter()
                    .find(|(c, _)| u < *c)
                    .unwrap_or(&cum[cum.len() - 1])
                    .1
            }
        }
    }
}
