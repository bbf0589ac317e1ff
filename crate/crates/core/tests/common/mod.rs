#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use std::f64::consts::LN_2;

use qos_energy::asymptotics::{self, WidebandParams};
use qos_energy::effcap::{self, CsiMode, QosConfig};
use qos_energy::fading::FadingModel;

pub const SLACK: f64 = 1e-9;
pub const FRAME: f64 = 2e-3;

pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn table_model() -> impl Strategy<Value = FadingModel> {
    prop::collection::vec((0.05f64..4.0, 0.05f64..1.0), 1..6).prop_map(|mut pts| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        let n = pts.len();
        let points = pts
            .iter()
            .enumerate()
            .map(|(i, &(z, w))| {
                let p = if i + 1 == n { 1.0 - acc } else { w / total };
                acc += p;
                (z, p)
            })
            .collect();
        FadingModel::table(points).unwrap()
    })
}

/// Rayleigh, Nakagami-m, deterministic and table models with random parameters.
pub fn any_model() -> impl Strategy<Value = FadingModel> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|m| FadingModel::rayleigh(m).unwrap()),
        (0.5f64..6.0, 0.3f64..3.0).prop_map(|(m, mean)| FadingModel::nakagami(m, mean).unwrap()),
        (0.2f64..3.0).prop_map(|z| FadingModel::deterministic(z).unwrap()),
        table_model(),
    ]
}

pub fn mode() -> impl Strategy<Value = CsiMode> {
    prop_oneof![Just(CsiMode::Csir), Just(CsiMode::Csit)]
}

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

fn qos(theta: f64, bandwidth: f64) -> QosConfig {
    QosConfig::new(theta, FRAME, bandwidth).unwrap()
}

pub type Concavity = (FadingModel, f64, f64, f64, f64);

pub fn concavity_input() -> impl Strategy<Value = Concavity> {
    (
        any_model(),
        log_uniform(1e-4, 1.0),
        log_uniform(1e3, 1e6),
        log_uniform(1e-4, 1e2),
        1.2f64..4.0,
    )
}

/// The CSIR spectral efficiency is concave in SNR: divided differences over
/// `s < s·r < s·r²` do not increase.
pub fn check_concavity((model, theta, b, s, r): Concavity) -> Result<(), TestCaseError> {
    let q = qos(theta, b);
    let x = [s, s * r, s * r * r];
    let c: Vec<f64> = x
        .iter()
        .map(|&snr| effcap::spectral_efficiency_csir(snr, &q, &model).unwrap())
        .collect();
    let d1 = (c[1] - c[0]) / (x[1] - x[0]);
    let d2 = (c[2] - c[1]) / (x[2] - x[1]);
    if d2 > d1 + SLACK * d1.abs().max(1e-300) {
        return fail(format!(
            "{model:?} θ={theta} B={b} s={s} r={r}: {d2} > {d1}"
        ));
    }
    Ok(())
}

pub type ZetaPair = (FadingModel, f64, f64, f64, f64);

pub fn zeta_pair_input() -> impl Strategy<Value = ZetaPair> {
    (
        any_model(),
        log_uniform(1e-4, 1.0),
        log_uniform(1e2, 1e5),
        log_uniform(1e-9, 1e-3),
        1.1f64..10.0,
    )
}

/// With fixed average power, the CSIR rate `C_E(ζ)/ζ` in bit/s does not
/// decrease as `ζ = 1/B` shrinks.
pub fn check_rate_grows_with_bandwidth(
    (model, theta, pn0, zeta, r): ZetaPair,
) -> Result<(), TestCaseError> {
    let rate = |z: f64| {
        let q = QosConfig::with_zeta(theta, FRAME, z).unwrap();
        effcap::spectral_efficiency_csir(pn0 * z, &q, &model).unwrap() / z
    };
    let (small, large) = (rate(zeta), rate(zeta * r));
    if small < large * (1.0 - SLACK) {
        return fail(format!(
            "{model:?} θ={theta} pn0={pn0} ζ={zeta} r={r}: {small} < {large}"
        ));
    }
    Ok(())
}

pub type LinkPoint = (FadingModel, CsiMode, f64, f64, f64);

pub fn link_point_input() -> impl Strategy<Value = LinkPoint> {
    (
        any_model(),
        mode(),
        log_uniform(1e-4, 1.0),
        log_uniform(1e3, 1e6),
        log_uniform(1e-3, 1e2),
    )
}

/// Delay-limited capacity ≤ effective capacity ≤ ergodic capacity.
pub fn check_sandwich((model, mode, theta, b, snr): LinkPoint) -> Result<(), TestCaseError> {
    let q = qos(theta, b);
    let se = effcap::spectral_efficiency(mode, snr, &q, &model).unwrap();
    let hi = effcap::shannon_limit(snr, mode, &model).unwrap();
    let lo = effcap::delay_limited_limit(snr, mode, &model)
        .unwrap()
        .spectral_efficiency;
    if se > hi * (1.0 + SLACK) || se < lo * (1.0 - SLACK) {
        return fail(format!(
            "{model:?} {mode} θ={theta} B={b} snr={snr}: {lo} ≤ {se} ≤ {hi} violated"
        ));
    }
    Ok(())
}

/// Transmitter CSI never lowers the effective capacity.
pub fn check_csit_dominates((model, _, theta, b, snr): LinkPoint) -> Result<(), TestCaseError> {
    let q = qos(theta, b);
    let csir = effcap::spectral_efficiency_csir(snr, &q, &model).unwrap();
    let csit = effcap::spectral_efficiency_csit(snr, &q, &model).unwrap();
    if csit < csir * (1.0 - SLACK) {
        return fail(format!(
            "{model:?} θ={theta} B={b} snr={snr}: {csit} < {csir}"
        ));
    }
    Ok(())
}

pub type WidebandPoint = (FadingModel, f64, f64);

pub fn wideband_input() -> impl Strategy<Value = WidebandPoint> {
    (any_model(), log_uniform(1e-5, 10.0), log_uniform(1e1, 1e6))
}

/// Wideband CSIR minimum bit energy is at least `ln2/E{z}`.
pub fn check_jensen((model, theta, pn0): WidebandPoint) -> Result<(), TestCaseError> {
    let p = WidebandParams::new(theta, FRAME, pn0).unwrap();
    let s = asymptotics::wideband_csir(&model, &p).unwrap();
    let bound = LN_2 / model.moments().mean;
    if s.ebn0_min_linear < bound * (1.0 - SLACK) {
        return fail(format!(
            "{model:?} θ={theta} pn0={pn0}: {} < {bound}",
            s.ebn0_min_linear
        ));
    }
    Ok(())
}

/// Deterministic runner: `cases` draws from a fixed ChaCha stream.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}
