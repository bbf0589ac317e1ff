//! Spectral-efficiency vs. bit-energy curves, minimum-bit-energy surfaces and
//! threshold-vs-inverse-bandwidth curves on configurable grids.
//!
//! Per-point solver failures never abort a sweep; they become gap markers and
//! the rest of the curve is still produced. Grid points are evaluated in
//! parallel and always returned in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{self, AsymptoticError, AsymptoticSummary, Regime, WidebandParams};
use crate::effcap::{self, CsiMode, EffcapError, QosConfig};
use crate::fading::FadingModel;

pub const DEFAULT_GRID_POINTS: usize = 60;
pub const LOWPOWER_SNR_RANGE: (f64, f64) = (1e-5, 1e1);
pub const WIDEBAND_ZETA_RANGE: (f64, f64) = (1e-9, 1e-3);
pub const DEFAULT_FRAME_DURATION: f64 = 2e-3;
pub const DEFAULT_BANDWIDTH: f64 = 1e5;
pub const DEFAULT_PBAR_OVER_N0: f64 = 1e4;
pub const DEFAULT_THETAS: [f64; 5] = [0.0, 1e-3, 1e-2, 0.1, 1.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("asymptote for theta = {theta}: {source}")]
    Asymptote {
        theta: f64,
        #[source]
        source: AsymptoticError,
    },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> SweepError {
    SweepError::InvalidSpec {
        field,
        reason: reason.into(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + step * i as f64)
                    }
                })
                .collect()
        }
    }
}

/// Default control grid: SNR for low power, `ζ = 1/B` for wideband.
pub fn default_grid(regime: Regime, points: usize) -> Vec<f64> {
    let (lo, hi) = match regime {
        Regime::LowPower => LOWPOWER_SNR_RANGE,
        Regime::Wideband => WIDEBAND_ZETA_RANGE,
    };
    log_grid(lo, hi, points)
}

/// One family of tradeoff curves, one per QoS exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: CsiMode,
    pub regime: Regime,
    pub model: FadingModel,
    pub theta_list: Vec<f64>,
    /// Frame duration `T` in seconds.
    pub frame_duration: f64,
    /// Fixed bandwidth in Hz; used in the low-power regime.
    pub bandwidth: f64,
    /// Fixed `P̄/N0` in Hz; used in the wideband regime.
    pub pbar_over_n0: f64,
    /// SNR values (low power) or `ζ` values (wideband), strictly monotone.
    pub grid: Vec<f64>,
}

impl SweepSpec {
    /// Spec with the default frame, bandwidth, power, θ list and grid.
    pub fn with_defaults(mode: CsiMode, regime: Regime, model: FadingModel) -> Self {
        Self {
            mode,
            regime,
            model,
            theta_list: DEFAULT_THETAS.to_vec(),
            frame_duration: DEFAULT_FRAME_DURATION,
            bandwidth: DEFAULT_BANDWIDTH,
            pbar_over_n0: DEFAULT_PBAR_OVER_N0,
            grid: default_grid(regime, DEFAULT_GRID_POINTS),
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.theta_list.is_empty() {
            return Err(invalid("theta", "list is empty"));
        }
        if let Some(t) = self
            .theta_list
            .iter()
            .find(|t| !(t.is_finite() && **t >= 0.0))
        {
            return Err(invalid(
                "theta",
                format!("must be finite and >= 0, got {t}"),
            ));
        }
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("T", self.frame_duration)?;
        positive("B", self.bandwidth)?;
        positive("pn0", self.pbar_over_n0)?;
        if self.grid.is_empty() {
            return Err(invalid("grid", "no points"));
        }
        for &g in &self.grid {
            positive("grid", g)?;
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(invalid("grid", "not strictly monotone"));
        }
        Ok(())
    }

    /// SNR and QoS configuration at one grid value.
    fn operating_point(&self, theta: f64, control: f64) -> Result<(f64, QosConfig), EffcapError> {
        match self.regime {
            Regime::LowPower => Ok((
                control,
                QosConfig::new(theta, self.frame_duration, self.bandwidth)?,
            )),
            Regime::Wideband => Ok((
                self.pbar_over_n0 * control,
                QosConfig::with_zeta(theta, self.frame_duration, control)?,
            )),
        }
    }

    fn asymptote(&self, theta: f64) -> Result<AsymptoticSummary, SweepError> {
        let wrap = |source| SweepError::Asymptote { theta, source };
        match self.regime {
            Regime::LowPower => {
                let beta = QosConfig::new(theta, self.frame_duration, self.bandwidth)
                    .map_err(|e| wrap(e.into()))?
                    .beta();
                Ok(match self.mode {
                    CsiMode::Csir => asymptotics::lowpower_csir(&self.model, beta),
                    CsiMode::Csit => asymptotics::lowpower_csit(&self.model, beta),
                })
            }
            Regime::Wideband => {
                let p = WidebandParams::new(theta, self.frame_duration, self.pbar_over_n0)
                    .map_err(wrap)?;
                match self.mode {
                    CsiMode::Csir => asymptotics::wideband_csir(&self.model, &p),
                    CsiMode::Csit => asymptotics::wideband_csit(&self.model, &p),
                }
                .map_err(wrap)
            }
        }
    }
}

/// One curve sample. Both values are `None` at a gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    /// Grid value this point was computed at (SNR or `ζ`).
    pub control: f64,
    pub snr: f64,
    pub ebn0_db: Option<f64>,
    pub spectral_efficiency: Option<f64>,
}

impl TradeoffPoint {
    pub fn is_gap(&self) -> bool {
        self.ebn0_db.is_none()
    }
}

/// Why a point is missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapMarker {
    pub index: usize,
    pub control: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub theta: f64,
    pub points: Vec<TradeoffPoint>,
    pub gaps: Vec<GapMarker>,
    pub asymptote: Option<AsymptoticSummary>,
}

impl Curve {
    /// Points that are not gaps.
    pub fn valid_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .filter_map(|p| Some((p.ebn0_db?, p.spectral_efficiency?)))
    }
}

pub fn theta_label(theta: f64) -> String {
    format!("theta={theta}")
}

/// Evaluates one tradeoff curve per θ on `spec.grid`.
pub fn tradeoff_curve(spec: &SweepSpec) -> Result<Vec<Curve>, SweepError> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.theta_list.len())
        .flat_map(|t| (0..spec.grid.len()).map(move |g| (t, g)))
        .collect();
    let results: Vec<Result<TradeoffPoint, GapMarker>> = jobs
        .par_iter()
        .map(|&(t, g)| {
            let theta = spec.theta_list[t];
            let control = spec.grid[g];
            let gap = |reason: String| GapMarker {
                index: g,
                control,
                reason,
            };
            let (snr, qos) = spec
                .operating_point(theta, control)
                .map_err(|e| gap(e.to_string()))?;
            let se = effcap::spectral_efficiency(spec.mode, snr, &qos, &spec.model)
                .map_err(|e| gap(e.to_string()))?;
            if !(se.is_finite() && se > 0.0) {
                return Err(gap(format!("spectral efficiency {se} at snr {snr:e}")));
            }
            Ok(TradeoffPoint {
                control,
                snr,
                ebn0_db: Some(effcap::to_db(effcap::bit_energy(snr, se))),
                spectral_efficiency: Some(se),
            })
        })
        .collect();

    let asymptotes: Vec<Result<AsymptoticSummary, SweepError>> = spec
        .theta_list
        .par_iter()
        .map(|&theta| spec.asymptote(theta))
        .collect();

    let mut results = results.into_iter();
    let mut curves = Vec::with_capacity(spec.theta_list.len());
    for (&theta, asymptote) in spec.theta_list.iter().zip(asymptotes) {
        let mut points = Vec::with_capacity(spec.grid.len());
        let mut gaps = Vec::new();
        for _ in 0..spec.grid.len() {
            match results.next().expect("one result per job") {
                Ok(p) => points.push(p),
                Err(m) => {
                    let (control, snr) = match spec.operating_point(theta, m.control) {
                        Ok((snr, _)) => (m.control, snr),
                        Err(_) => (m.control, f64::NAN),
                    };
                    points.push(TradeoffPoint {
                        control,
                        snr,
                        ebn0_db: None,
                        spectral_efficiency: None,
                    });
                    gaps.push(m);
                }
            }
        }
        curves.push(Curve {
            label: theta_label(theta),
            theta,
            points,
            gaps,
            asymptote: Some(asymptote?),
        });
    }
    Ok(curves)
}

/// `Eb/N0_min` in dB over a (θ, `P̄/N0`) grid in the wideband regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub mode: CsiMode,
    pub thetas: Vec<f64>,
    pub pbar_over_n0: Vec<f64>,
    /// `cells[i][j]` belongs to `thetas[i]` and `pbar_over_n0[j]`.
    pub cells: Vec<Vec<Result<f64, String>>>,
}

impl Surface {
    pub fn failures(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_err()).count()
    }

    /// Cells in long format, θ-major: `(θ, P̄/N0, value)`.
    pub fn long_format(&self) -> impl Iterator<Item = (f64, f64, &Result<f64, String>)> + '_ {
        self.thetas.iter().enumerate().flat_map(move |(i, &t)| {
            self.pbar_over_n0
                .iter()
                .enumerate()
                .map(move |(j, &p)| (t, p, &self.cells[i][j]))
        })
    }
}

pub fn ebn0_min_surface(
    mode: CsiMode,
    model: &FadingModel,
    theta_grid: &[f64],
    pbar_grid: &[f64],
    frame_duration: f64,
) -> Surface {
    let cells = theta_grid
        .par_iter()
        .map(|&theta| {
            pbar_grid
                .par_iter()
                .map(|&pn0| {
                    let p = WidebandParams::new(theta, frame_duration, pn0)
                        .map_err(|e| e.to_string())?;
                    let s = match mode {
                        CsiMode::Csir => asymptotics::wideband_csir(model, &p),
                        CsiMode::Csit => asymptotics::wideband_csit(model, &p),
                    };
                    s.map(|s| s.ebn0_min_db).map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    Surface {
        mode,
        thetas: theta_grid.to_vec(),
        pbar_over_n0: pbar_grid.to_vec(),
        cells,
    }
}

/// CSIT threshold `α(ζ)` for one θ at fixed `P̄/N0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCurve {
    pub label: String,
    pub theta: f64,
    /// `(ζ, α)`; `α` is `None` where the solve failed.
    pub points: Vec<(f64, Option<f64>)>,
    pub gaps: Vec<GapMarker>,
    /// `ζ → 0` limit; infinite for θ = 0 with unbounded gains.
    pub alpha_star: Option<f64>,
}

pub fn alpha_vs_zeta(
    model: &FadingModel,
    theta_list: &[f64],
    frame_duration: f64,
    pbar_over_n0: f64,
    zeta_grid: &[f64],
) -> Result<Vec<AlphaCurve>, SweepError> {
    theta_list
        .iter()
        .map(|&theta| {
            let p = WidebandParams::new(theta, frame_duration, pbar_over_n0)
                .map_err(|source| SweepError::Asymptote { theta, source })?;
            let solved: Vec<Result<f64, EffcapError>> = zeta_grid
                .par_iter()
                .map(|&zeta| asymptotics::alpha_at_zeta(model, &p, zeta))
                .collect();
            let mut points = Vec::with_capacity(zeta_grid.len());
            let mut gaps = Vec::new();
            for (index, (&zeta, r)) in zeta_grid.iter().zip(solved).enumerate() {
                match r {
                    Ok(a) => points.push((zeta, Some(a))),
                    Err(e) => {
                        points.push((zeta, None));
                        gaps.push(GapMarker {
                            index,
                            control: zeta,
                            reason: e.to_string(),
                        });
                    }
                }
            }
            let alpha_star = asymptotics::solve_alpha_star(model, &p)
                .map(|s| s.alpha_star)
                .map_err(|source| SweepError::Asymptote { theta, source })?;
            Ok(AlphaCurve {
                label: theta_label(theta),
                theta,
                points,
                gaps,
                alpha_star: Some(alpha_star),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-9, 1e-3, 60);
        assert_eq!(g.len(), 60);
        assert_eq!(g[0], 1e-9);
        assert_eq!(g[59], 1e-3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(((g[1] / g[0]).log10() - 6.0 / 59.0).abs() < 1e-12);
    }

    #[test]
    fn validation_names_field() {
        let mut s = SweepSpec::with_defaults(
            CsiMode::Csir,
            Regime::LowPower,
            FadingModel::rayleigh(1.0).unwrap(),
        );
        s.theta_list = vec![0.1, -1.0];
        match s.validate() {
            Err(SweepError::InvalidSpec { field, .. }) => assert_eq!(field, "theta"),
            other => panic!("{other:?}"),
        }
        s.theta_list = vec![0.1];
        s.grid = vec![1e-3, 1e-2, 1e-2];
        assert!(matches!(
            s.validate(),
            Err(SweepError::InvalidSpec { field: "grid", .. })
        ));
    }

    #[test]
    fn deterministic_curves_stay_above_ln2() {
        let d = FadingModel::deterministic(1.0).unwrap();
        for (mode, regime) in [
            (CsiMode::Csir, Regime::LowPower),
            (CsiMode::Csit, Regime::LowPower),
            (CsiMode::Csir, Regime::Wideband),
            (CsiMode::Csit, Regime::Wideband),
        ] {
            let mut spec = SweepSpec::with_defaults(mode, regime, d.clone());
            spec.grid = default_grid(regime, 12);
            let floor = effcap::to_db(LN_2);
            for c in tradeoff_curve(&spec).unwrap() {
                assert!(c.gaps.is_empty(), "{:?}", c.gaps);
                let pts: Vec<_> = c.valid_points().collect();
                for &(db, _) in &pts {
                    assert!(db >= floor - 1e-9, "{mode} {regime} {db}");
                }
                let a = c.asymptote.unwrap();
                assert!((a.ebn0_min_linear - LN_2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gaps_are_recorded_not_fatal() {
        let mut spec = SweepSpec::with_defaults(
            CsiMode::Csir,
            Regime::LowPower,
            FadingModel::nakagami(5.0, 1.0).unwrap(),
        );
        spec.theta_list = vec![1.0];
        // E{(1+SNR·z)^{-β}} underflows at the second point
        spec.grid = vec![1e-2, 1e30];
        let c = &tradeoff_curve(&spec).unwrap()[0];
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.gaps.len(), 1);
        assert_eq!(c.gaps[0].index, 1);
        assert!(c.points[1].is_gap());
        assert!(!c.points[0].is_gap());
    }

    #[test]
    fn surface_matches_closed_form_row() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        let thetas = [1e-3, 1e-2, 0.1, 1.0];
        let s = ebn0_min_surface(CsiMode::Csir, &r, &thetas, &[1e4], 2e-3);
        for (i, &t) in thetas.iter().enumerate() {
            let p = WidebandParams::new(t, 2e-3, 1e4).unwrap();
            let c = asymptotics::wideband_csir_rayleigh_closed_form(&p);
            let v = *s.cells[i][0].as_ref().unwrap();
            assert!(((v - c.ebn0_min_db) / c.ebn0_min_db).abs() < 1e-10);
        }
        assert_eq!(s.long_format().count(), 4);
    }

    #[test]
    fn alpha_curve_matches_deterministic_closed_form() {
        let d = FadingModel::deterministic(1.0).unwrap();
        let grid = log_grid(1e-9, 1e-3, 9);
        let curves = alpha_vs_zeta(&d, &[0.01, 0.5], 2e-3, 1e4, &grid).unwrap();
        for c in &curves {
            for &(zeta, a) in &c.points {
                let beta = c.theta * 2e-3 / (zeta * LN_2);
                let exact = (-(beta + 1.0) * (1e4 * zeta).ln_1p()).exp();
                let a = a.unwrap();
                assert!(
                    ((a - exact) / exact).abs() < 1e-10,
                    "{zeta}: {a} vs {exact}"
                );
            }
        }
    }
}
