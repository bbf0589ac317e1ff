//! Minimum bit energy and wideband slope in the low-power (fixed bandwidth,
//! SNR → 0) and wideband (fixed power, B → ∞) regimes.
//!
//! The wideband regime is parameterized by the inverse bandwidth `ζ = 1/B`
//! at fixed `P̄/N0`, so `SNR = P̄ζ/N0` and `β = θT/(ζ ln 2)`. Throughout,
//! `c = θTP̄/(N0 ln 2)`.

use std::f64::consts::LN_2;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::effcap::{self, CsiMode, EffcapError, QosConfig};
use crate::fading::{FadingError, FadingModel, LOG_SPACE_EDGE};
use crate::roots::{self, RootError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no bracket for the limiting threshold in [{lower:e}, {upper:e}]")]
    BracketFailure { lower: f64, upper: f64 },
    #[error(transparent)]
    Fading(#[from] FadingError),
    #[error(transparent)]
    Effcap(#[from] EffcapError),
}

impl From<RootError<AsymptoticError>> for AsymptoticError {
    fn from(e: RootError<AsymptoticError>) -> Self {
        match e {
            RootError::BracketFailure { lower, upper } => Self::BracketFailure { lower, upper },
            RootError::Eval(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Fixed bandwidth, vanishing SNR.
    #[serde(rename = "lowpower")]
    LowPower,
    /// Fixed average power, growing bandwidth.
    Wideband,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::LowPower => "lowpower",
            Regime::Wideband => "wideband",
        })
    }
}

fn finite_or_tag<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("inf")
    }
}

/// Minimum bit energy and wideband slope for one (regime, CSI mode) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticSummary {
    pub regime: Regime,
    pub mode: CsiMode,
    /// `Eb/N0` floor, linear. Zero means the floor is `-∞` dB.
    pub ebn0_min_linear: f64,
    /// `10·log10(ebn0_min_linear)`; `f64::NEG_INFINITY` when the linear value
    /// is zero. Serialized as the string `"-inf"` in that case.
    #[serde(serialize_with = "finite_or_tag")]
    pub ebn0_min_db: f64,
    #[serde(rename = "s0")]
    pub slope_s0: f64,
    /// Set when the floor is zero because the gain has unbounded support.
    pub unbounded_support: bool,
}

impl AsymptoticSummary {
    fn new(regime: Regime, mode: CsiMode, ebn0_min_linear: f64, slope_s0: f64) -> Self {
        let unbounded = ebn0_min_linear == 0.0;
        Self {
            regime,
            mode,
            ebn0_min_linear,
            ebn0_min_db: if unbounded {
                f64::NEG_INFINITY
            } else {
                effcap::to_db(ebn0_min_linear)
            },
            slope_s0,
            unbounded_support: unbounded,
        }
    }

    /// First-order spectral efficiency at `ebn0_db` predicted by the
    /// floor and slope.
    pub fn linear_approx(&self, ebn0_db: f64) -> f64 {
        linear_approx(ebn0_db, self)
    }
}

/// Fixed-power wideband operating parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct WidebandParams {
    pub theta: f64,
    pub frame_duration: f64,
    pub pbar_over_n0: f64,
}

impl WidebandParams {
    pub fn new(
        theta: f64,
        frame_duration: f64,
        pbar_over_n0: f64,
    ) -> Result<Self, AsymptoticError> {
        let bad = |name: &str, v: f64| {
            AsymptoticError::InvalidInput(format!("{name} must be positive and finite, got {v}"))
        };
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(bad("theta", theta));
        }
        if !(frame_duration.is_finite() && frame_duration > 0.0) {
            return Err(bad("frame duration", frame_duration));
        }
        if !(pbar_over_n0.is_finite() && pbar_over_n0 > 0.0) {
            return Err(bad("P/N0", pbar_over_n0));
        }
        Ok(Self {
            theta,
            frame_duration,
            pbar_over_n0,
        })
    }

    /// `c = θTP̄/(N0 ln 2)`.
    pub fn c(&self) -> f64 {
        self.theta * self.frame_duration * self.pbar_over_n0 / LN_2
    }

    pub fn snr_at(&self, zeta: f64) -> f64 {
        self.pbar_over_n0 * zeta
    }

    pub fn qos_at(&self, zeta: f64) -> Result<QosConfig, EffcapError> {
        QosConfig::with_zeta(self.theta, self.frame_duration, zeta)
    }

    /// `ζ` at which `β = 1`; the natural length scale of the wideband expansion.
    pub fn zeta_scale(&self) -> f64 {
        self.theta * self.frame_duration / LN_2
    }
}

/// Low-power floor and slope with receiver CSI:
/// `ln2/E{z}` and `2 / ((β+1)E{z²}/E{z}² − β)`.
pub fn lowpower_csir(model: &FadingModel, beta: f64) -> AsymptoticSummary {
    let m = model.moments();
    let kurt = m.second_moment / (m.mean * m.mean);
    AsymptoticSummary::new(
        Regime::LowPower,
        CsiMode::Csir,
        LN_2 / m.mean,
        2.0 / ((beta + 1.0) * kurt - beta),
    )
}

/// Low-power floor with transmitter CSI, `ln2 / z_max`.
///
/// As SNR vanishes only gains at `z_max` are used, so the slope is set by
/// the mass `p` sitting there: `S0 = 2p / ((β+1) − βp)`. Continuous laws
/// (and unbounded support) have `p = 0` and hence `S0 = 0`.
pub fn lowpower_csit(model: &FadingModel, beta: f64) -> AsymptoticSummary {
    let zmax = model.z_max();
    let p = model.mass_at_max();
    let floor = if zmax.is_finite() { LN_2 / zmax } else { 0.0 };
    AsymptoticSummary::new(
        Regime::LowPower,
        CsiMode::Csit,
        floor,
        2.0 * p / ((beta + 1.0) - beta * p),
    )
}

/// Wideband floor and slope with receiver CSI, from the Laplace transform
/// `L = E{e^{-cz}}`: `Eb/N0 = -c·ln2/ln L`,
/// `S0 = 2·L·(ln L)² / (c²·E{z²e^{-cz}})`.
pub fn wideband_csir(
    model: &FadingModel,
    params: &WidebandParams,
) -> Result<AsymptoticSummary, AsymptoticError> {
    let c = params.c();
    if c == 0.0 {
        return Ok(AsymptoticSummary {
            regime: Regime::Wideband,
            ..lowpower_csir(model, 0.0)
        });
    }
    let ln_l = effcap::ln_expect_neg_exp(model, 0.0, |z| c * z)?;
    let z2 = model.expect(|z| z * z * (-c * z).exp())?;
    let floor = -c * LN_2 / ln_l;
    let slope = 2.0 * ln_l.exp() * ln_l * ln_l / (c * c * z2);
    Ok(AsymptoticSummary::new(
        Regime::Wideband,
        CsiMode::Csir,
        floor,
        slope,
    ))
}

/// Closed form of [`wideband_csir`] for unit-mean Rayleigh fading.
pub fn wideband_csir_rayleigh_closed_form(params: &WidebandParams) -> AsymptoticSummary {
    let c = params.c();
    if c == 0.0 {
        return AsymptoticSummary::new(Regime::Wideband, CsiMode::Csir, LN_2, 1.0);
    }
    let l = c.ln_1p();
    AsymptoticSummary::new(
        Regime::Wideband,
        CsiMode::Csir,
        c * LN_2 / l,
        (l / c + l).powi(2),
    )
}

/// Limit of the CSIT threshold as bandwidth grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaStarSolution {
    #[serde(serialize_with = "finite_or_tag")]
    pub alpha_star: f64,
    /// Kept separately because `α*` underflows for bounded gains at large `c`.
    #[serde(serialize_with = "finite_or_tag")]
    pub ln_alpha_star: f64,
    /// `F(α*) + E{(α*/z)·1{z≥α*}}`.
    pub xi: f64,
    pub ln_xi: f64,
    /// `dα/dζ` at `ζ = 0`, from Richardson-extrapolated finite differences.
    pub alpha_dot_zero: f64,
    /// `α̇(0)/α*`.
    pub alpha_dot_relative: f64,
    /// `|E{ln(z/α*)/z·1{z≥α*}} − c| / c`.
    pub relative_residual: f64,
}

/// `E{ln(z/α)/z · 1{z≥α}}`, the left side of the fixed-point equation.
pub fn alpha_star_lhs(model: &FadingModel, alpha: f64) -> Result<f64, FadingError> {
    alpha_star_lhs_ln(model, alpha.ln())
}

fn alpha_star_lhs_ln(model: &FadingModel, u: f64) -> Result<f64, FadingError> {
    if model.is_discrete() || u > LOG_SPACE_EDGE {
        model.expect_above(u.exp(), |z| (z.ln() - u) / z)
    } else {
        model.expect_above_ln(u, |t, lw| (t - u) * (lw - t).exp())
    }
}

/// `E{1{z≥e^u}/z}`.
fn inverse_above(model: &FadingModel, u: f64) -> Result<f64, FadingError> {
    if model.is_discrete() || u > LOG_SPACE_EDGE {
        model.expect_above(u.exp(), |z| 1.0 / z)
    } else {
        model.expect_above_ln(u, |t, lw| (lw - t).exp())
    }
}

/// Threshold `α(ζ)` at finite inverse bandwidth `ζ`.
pub fn alpha_at_zeta(
    model: &FadingModel,
    params: &WidebandParams,
    zeta: f64,
) -> Result<f64, EffcapError> {
    Ok(ln_alpha_at_zeta(model, params, zeta)?.exp())
}

fn ln_alpha_at_zeta(
    model: &FadingModel,
    params: &WidebandParams,
    zeta: f64,
) -> Result<f64, EffcapError> {
    let qos = params.qos_at(zeta)?;
    Ok(effcap::solve_alpha(params.snr_at(zeta), &qos, model)?.ln_alpha)
}

const RICHARDSON_LEVELS: usize = 7;

/// `α̇(0)/α*` from one-sided differences at `ζ_k = ζ0·2^{-k}`, `k = 0..6`,
/// with `ζ0 = 10^{-3}·θT/ln2`, extrapolated by Richardson's scheme.
fn alpha_dot_relative(
    model: &FadingModel,
    params: &WidebandParams,
    ln_alpha_star: f64,
) -> Result<f64, EffcapError> {
    let zeta0 = 1e-3 * params.zeta_scale();
    let mut table = [[0.0f64; RICHARDSON_LEVELS]; RICHARDSON_LEVELS];
    for k in 0..RICHARDSON_LEVELS {
        let zeta = zeta0 / f64::from(1u32 << k);
        table[k][0] = (ln_alpha_at_zeta(model, params, zeta)? - ln_alpha_star).exp_m1() / zeta;
        for j in 1..=k {
            let factor = f64::from(1u32 << j) - 1.0;
            table[k][j] = table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / factor;
        }
    }
    // Pick the diagonal entry that moved least from its predecessor.
    let mut best = table[0][0];
    let mut best_change = f64::INFINITY;
    for k in 1..RICHARDSON_LEVELS {
        let change = (table[k][k] - table[k - 1][k - 1]).abs();
        if change < best_change {
            best_change = change;
            best = table[k][k];
        }
    }
    Ok(best)
}

/// Solves `E{ln(z/α*)/z · 1{z≥α*}} = c` for the limiting threshold.
///
/// `θ = 0` returns `α* = z_max` (possibly infinite) with `ξ = 1`.
pub fn solve_alpha_star(
    model: &FadingModel,
    params: &WidebandParams,
) -> Result<AlphaStarSolution, AsymptoticError> {
    let c = params.c();
    if c == 0.0 {
        return Ok(AlphaStarSolution {
            alpha_star: model.z_max(),
            ln_alpha_star: model.z_max().ln(),
            xi: 1.0,
            ln_xi: 0.0,
            alpha_dot_zero: 0.0,
            alpha_dot_relative: 0.0,
            relative_residual: 0.0,
        });
    }
    let mean = model.moments().mean;
    let upper = if model.z_max().is_finite() {
        model.z_max()
    } else {
        let mut q = mean;
        while model.survival(q) > 1e-12 {
            q *= 2.0;
        }
        q
    };
    let u = roots::bisect_decreasing_expanding(
        |u| Ok::<_, AsymptoticError>(alpha_star_lhs_ln(model, u)? - c),
        (1e-10 * mean).ln(),
        upper.ln(),
        4.0 * std::f64::consts::LN_10,
        (-1e6, upper.ln()),
        1e-14,
    )?;
    let alpha = u.exp();
    let residual = ((alpha_star_lhs_ln(model, u)? - c) / c).abs();
    let ln_scaled = u + inverse_above(model, u)?.ln();
    let ln_xi = effcap::log_sum_exp(&[model.ln_cdf_at_ln(u), ln_scaled]);
    let rel = alpha_dot_relative(model, params, u)?;
    Ok(AlphaStarSolution {
        alpha_star: alpha,
        ln_alpha_star: u,
        xi: ln_xi.exp(),
        ln_xi,
        alpha_dot_zero: rel * alpha,
        alpha_dot_relative: rel,
        relative_residual: residual,
    })
}

/// Wideband floor and slope with transmitter CSI:
/// `Eb/N0 = -θTP̄/(N0 ln ξ)` and
/// `S0 = ξ(ln ξ)² ln2 / (θT·(P̄α*/N0 + α̇(0)·E{1{z≥α*}/z}))`.
pub fn wideband_csit(
    model: &FadingModel,
    params: &WidebandParams,
) -> Result<AsymptoticSummary, AsymptoticError> {
    if params.theta == 0.0 {
        return Ok(AsymptoticSummary {
            regime: Regime::Wideband,
            ..lowpower_csit(model, 0.0)
        });
    }
    let sol = solve_alpha_star(model, params)?;
    Ok(wideband_csit_from(model, params, &sol)?)
}

/// Evaluates the wideband CSIT floor and slope for an already solved `α*`.
pub fn wideband_csit_from(
    model: &FadingModel,
    params: &WidebandParams,
    sol: &AlphaStarSolution,
) -> Result<AsymptoticSummary, FadingError> {
    let ln_xi = sol.ln_xi;
    let u = sol.ln_alpha_star;
    let theta_t = params.theta * params.frame_duration;
    let floor = -theta_t * params.pbar_over_n0 / ln_xi;
    // Numerator and denominator are divided through by ξ.
    let above_share = (u + inverse_above(model, u)?.ln() - ln_xi).exp();
    let denom =
        theta_t * (params.pbar_over_n0 * (u - ln_xi).exp() + sol.alpha_dot_relative * above_share);
    let slope = ln_xi * ln_xi * LN_2 / denom;
    Ok(AsymptoticSummary::new(
        Regime::Wideband,
        CsiMode::Csit,
        floor,
        slope,
    ))
}

/// Floor and slope for any (regime, mode). Low-power results depend on `θ`
/// only through `β = θTB/ln2`.
pub fn summary(
    regime: Regime,
    mode: CsiMode,
    model: &FadingModel,
    qos_or_params: RegimeParams,
) -> Result<AsymptoticSummary, AsymptoticError> {
    match (regime, qos_or_params) {
        (Regime::LowPower, RegimeParams::LowPower(qos)) => Ok(match mode {
            CsiMode::Csir => lowpower_csir(model, qos.beta()),
            CsiMode::Csit => lowpower_csit(model, qos.beta()),
        }),
        (Regime::Wideband, RegimeParams::Wideband(p)) => match mode {
            CsiMode::Csir => wideband_csir(model, &p),
            CsiMode::Csit => wideband_csit(model, &p),
        },
        _ => Err(AsymptoticError::InvalidInput(
            "regime does not match the supplied parameters".into(),
        )),
    }
}

/// Parameters of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeParams {
    LowPower(QosConfig),
    Wideband(WidebandParams),
}

/// `S0/(10 log10 2) · (Eb/N0|dB − Eb/N0_min|dB)`.
pub fn linear_approx(ebn0_db: f64, summary: &AsymptoticSummary) -> f64 {
    summary.slope_s0 / (10.0 * 2f64.log10()) * (ebn0_db - summary.ebn0_min_db)
}

/// Extra bit energy in dB needed at spectral efficiency `se` when the
/// slope drops from `s0_theta1` to `s0_theta2`.
pub fn delta_bit_energy(se: f64, s0_theta1: f64, s0_theta2: f64) -> f64 {
    (1.0 / s0_theta2 - 1.0 / s0_theta1) * se * 10.0 * 2f64.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn params(theta: f64) -> WidebandParams {
        WidebandParams::new(theta, 2e-3, 1e4).unwrap()
    }

    #[test]
    fn lowpower_csir_examples() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        let s = lowpower_csir(&r, 5.0);
        assert!((s.ebn0_min_db - (-1.59)).abs() < 0.005);
        assert_eq!(lowpower_csir(&r, 0.0).slope_s0, 1.0);
        let d = FadingModel::deterministic(1.0).unwrap();
        for beta in [0.0, 1.0, 288.5] {
            assert!((lowpower_csir(&d, beta).slope_s0 - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lowpower_csit_examples() {
        let r = lowpower_csit(&FadingModel::rayleigh(1.0).unwrap(), 2.0);
        assert_eq!(r.ebn0_min_linear, 0.0);
        assert_eq!(r.ebn0_min_db, f64::NEG_INFINITY);
        assert!(r.unbounded_support);
        assert_eq!(r.slope_s0, 0.0);
        let d = lowpower_csit(&FadingModel::deterministic(2.0).unwrap(), 1.0);
        assert!(rel(d.ebn0_min_linear, LN_2 / 2.0) < 1e-15);
        assert!((d.ebn0_min_db - (-4.60)).abs() < 0.005);
        let t = FadingModel::table(vec![(1.0, 0.5), (4.0, 0.5)]).unwrap();
        assert_eq!(lowpower_csit(&t, 1.0).ebn0_min_linear, LN_2 / 4.0);
    }

    #[test]
    fn summary_serializes_neg_infinity_as_tag() {
        let r = lowpower_csit(&FadingModel::rayleigh(1.0).unwrap(), 0.0);
        let js = serde_json::to_value(r).unwrap();
        assert_eq!(js["ebn0_min_db"], "-inf");
        assert_eq!(js["s0"], 0.0);
    }

    #[test]
    fn wideband_csir_matches_closed_form() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        for theta in [1e-3, 1e-2, 0.1, 1.0] {
            let p = params(theta);
            let g = wideband_csir(&r, &p).unwrap();
            let c = wideband_csir_rayleigh_closed_form(&p);
            assert!(rel(g.ebn0_min_linear, c.ebn0_min_linear) < 1e-10);
            assert!(rel(g.slope_s0, c.slope_s0) < 1e-10);
        }
    }

    #[test]
    fn wideband_csir_closed_form_point() {
        // θTP̄/N0 = 2
        let s = wideband_csir_rayleigh_closed_form(&params(0.1));
        let expect = 2.0 / (1.0 + 2.0 / LN_2).ln();
        assert!(rel(s.ebn0_min_linear, expect) < 1e-14);
        assert!((s.ebn0_min_db - 1.684).abs() < 1e-3);
        let tiny = wideband_csir_rayleigh_closed_form(&params(1e-9));
        assert!(rel(tiny.ebn0_min_linear, LN_2) < 1e-6);
    }

    #[test]
    fn wideband_csir_deterministic_is_ln2() {
        let d = FadingModel::deterministic(1.0).unwrap();
        for theta in [1e-3, 0.3, 1.0] {
            let s = wideband_csir(&d, &params(theta)).unwrap();
            assert!(rel(s.ebn0_min_linear, LN_2) < 1e-12);
        }
    }

    #[test]
    fn alpha_star_deterministic() {
        let d = FadingModel::deterministic(1.0).unwrap();
        // θTP̄/N0 = ln 2, i.e. c = 1
        let p = WidebandParams::new(LN_2 / (2e-3 * 1e4), 2e-3, 1e4).unwrap();
        let sol = solve_alpha_star(&d, &p).unwrap();
        let e1 = (-1f64).exp();
        assert!(rel(sol.alpha_star, e1) < 1e-12);
        assert!(rel(sol.xi, e1) < 1e-12);
        let s = wideband_csit(&d, &p).unwrap();
        assert!(rel(s.ebn0_min_linear, LN_2) < 1e-10);
    }

    // Independent α̇(0) from implicit differentiation of the power constraint
    // to first order in ζ: α̇ = α*·(ln2/θT)·E{(L²/2 − L)/z·τ}/E{τ/z},
    // L = ln(z/α*).
    fn alpha_dot_analytic(model: &FadingModel, p: &WidebandParams, a: f64) -> f64 {
        let num = model
            .expect_above(a, |z| {
                let l = (z / a).ln();
                (0.5 * l * l - l) / z
            })
            .unwrap();
        let den = model.expect_above(a, |z| 1.0 / z).unwrap();
        a * LN_2 / (p.theta * p.frame_duration) * num / den
    }

    #[test]
    fn rayleigh_alpha_star_reference_values() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        let cases = [
            (1e-3, 1.604095265, 0.93654922, 0.307828, -5.1556),
            (1e-2, 0.5717538303, 0.71060729, 1.060528, -2.3253),
            (0.1, 0.07115710339, 0.22064473, 2.495147, 1.2171),
            (1.0, 3.14422867e-4, 0.00266873, 3.936588, 5.2826),
        ];
        for (theta, a, xi, s0, db) in cases {
            let p = params(theta);
            let sol = solve_alpha_star(&r, &p).unwrap();
            assert!(rel(sol.alpha_star, a) < 1e-8, "{theta}: {}", sol.alpha_star);
            assert!(sol.relative_residual < 1e-10);
            assert!(rel(sol.xi, xi) < 1e-6, "{theta}: xi {}", sol.xi);
            let oracle = alpha_dot_analytic(&r, &p, sol.alpha_star);
            assert!(
                rel(sol.alpha_dot_zero, oracle) < 1e-5,
                "{theta}: {} vs {oracle}",
                sol.alpha_dot_zero
            );
            let s = wideband_csit_from(&r, &p, &sol).unwrap();
            assert!(rel(s.slope_s0, s0) < 2e-6, "{theta}: s0 {}", s.slope_s0);
            assert!((s.ebn0_min_db - db).abs() < 1e-4);
        }
    }

    #[test]
    fn alpha_dot_matches_oracle_for_bounded_and_gamma_laws() {
        let models = [
            FadingModel::nakagami(2.0, 1.0).unwrap(),
            FadingModel::nakagami(0.7, 1.5).unwrap(),
            FadingModel::table(vec![(0.2, 0.3), (1.0, 0.4), (2.5, 0.3)]).unwrap(),
        ];
        for m in &models {
            for theta in [3e-3, 0.05, 0.4] {
                let p = params(theta);
                let sol = solve_alpha_star(m, &p).unwrap();
                let oracle = alpha_dot_analytic(m, &p, sol.alpha_star);
                assert!(
                    (sol.alpha_dot_zero - oracle).abs() <= 1e-5 * oracle.abs().max(1e-8),
                    "{:?} θ={theta}: {} vs {oracle}",
                    m.kind(),
                    sol.alpha_dot_zero
                );
            }
        }
    }

    #[test]
    fn alpha_star_theta_zero_is_zmax() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        let sol = solve_alpha_star(&r, &params(0.0)).unwrap();
        assert!(sol.alpha_star.is_infinite());
        let t = FadingModel::table(vec![(1.0, 0.5), (4.0, 0.5)]).unwrap();
        assert_eq!(solve_alpha_star(&t, &params(0.0)).unwrap().alpha_star, 4.0);
    }

    #[test]
    fn linear_approx_and_delta() {
        let s = AsymptoticSummary::new(Regime::LowPower, CsiMode::Csir, LN_2, 2.0);
        assert_eq!(linear_approx(s.ebn0_min_db, &s), 0.0);
        let three_db = 10.0 * 2f64.log10();
        assert!((linear_approx(s.ebn0_min_db + three_db, &s) - 2.0).abs() < 1e-12);
        assert_eq!(delta_bit_energy(0.3, 1.7, 1.7), 0.0);
        assert!((delta_bit_energy(0.1, 2.0, 1.0) - 0.1505).abs() < 1e-4);
    }

    #[test]
    fn summary_dispatch_rejects_mismatch() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        let q = QosConfig::new(0.1, 2e-3, 1e5).unwrap();
        assert!(summary(
            Regime::Wideband,
            CsiMode::Csir,
            &r,
            RegimeParams::LowPower(q)
        )
        .is_err());
        assert!(summary(
            Regime::LowPower,
            CsiMode::Csir,
            &r,
            RegimeParams::LowPower(q)
        )
        .is_ok());
    }
}
