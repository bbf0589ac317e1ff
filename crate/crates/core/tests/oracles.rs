use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};

use qos_energy::asymptotics::{self, WidebandParams};
use qos_energy::effcap::{self, CsiMode, QosConfig};
use qos_energy::fading::FadingModel;
use qos_energy::queuesim::{self, SimConfig};
use qos_energy::sweep;

const T: f64 = 2e-3;
const B: f64 = 1e5;

fn qos(theta: f64) -> QosConfig {
    QosConfig::new(theta, T, B).unwrap()
}

/// CSIR spectral efficiency; θ = 0 gives the ergodic capacity.
fn csir(snr: f64, q: &QosConfig, model: &FadingModel) -> f64 {
    effcap::spectral_efficiency(CsiMode::Csir, snr, q, model).unwrap()
}

/// Composite Simpson of `f(z)` over `[lo, hi]` after `z = e^u`.
fn simpson_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / panels as f64;
    let g = |u: f64| {
        let z = u.exp();
        f(z) * z
    };
    let mut s = g(a) + g(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + i as f64 * h);
    }
    s * h / 3.0
}

fn gamma_draws(m: f64, n: usize, seed: u64) -> Vec<f64> {
    let g = Gamma::new(m, 1.0 / m).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| g.sample(&mut rng)).collect()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn csir_matches_monte_carlo() {
    for (m, seed) in [(1.0, 11), (2.0, 12), (0.7, 13)] {
        let model = if m == 1.0 {
            FadingModel::rayleigh(1.0).unwrap()
        } else {
            FadingModel::nakagami(m, 1.0).unwrap()
        };
        let zs = gamma_draws(m, 1_000_000, seed);
        for (theta, snr) in [(1e-3, 1.0), (0.01, 0.1), (0.1, 3.0)] {
            let q = qos(theta);
            let beta = q.beta();
            let terms: Vec<f64> = zs
                .iter()
                .map(|z| (-beta * (snr * z).ln_1p()).exp())
                .collect();
            let (mean, se) = mean_and_se(&terms);
            let mc = -mean.ln() / (beta * LN_2);
            // Delta method: d(-ln x/(β ln2)) = dx/(x β ln2).
            let mc_se = se / (mean * beta * LN_2);
            let exact = effcap::spectral_efficiency_csir(snr, &q, &model).unwrap();
            assert!(
                (exact - mc).abs() < 5.0 * mc_se,
                "m={m} θ={theta} snr={snr}: {exact} vs {mc} ± {mc_se}"
            );
        }
    }
}

#[test]
fn csit_policy_matches_monte_carlo() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    let zs = gamma_draws(1.0, 1_000_000, 21);
    for (theta, snr) in [(1e-3, 1.0), (0.01, 0.5), (0.1, 5.0)] {
        let q = qos(theta);
        let beta = q.beta();
        let policy = effcap::solve_alpha(snr, &q, &r).unwrap();
        let alpha = policy.alpha;
        let power: Vec<f64> = zs
            .iter()
            .map(|&z| {
                if z >= alpha {
                    ((z / alpha).ln() / (beta + 1.0)).exp_m1() / z
                } else {
                    0.0
                }
            })
            .collect();
        let (p_mean, p_se) = mean_and_se(&power);
        assert!(
            (p_mean - snr).abs() < 5.0 * p_se,
            "θ={theta}: power {p_mean} vs {snr}"
        );

        let terms: Vec<f64> = zs
            .iter()
            .map(|&z| {
                if z >= alpha {
                    (alpha / z).powf(beta / (beta + 1.0))
                } else {
                    1.0
                }
            })
            .collect();
        let (mean, se) = mean_and_se(&terms);
        let mc = -mean.ln() / (beta * LN_2);
        let mc_se = se / (mean * beta * LN_2);
        let exact = effcap::spectral_efficiency_csit(snr, &q, &r).unwrap();
        assert!(
            (exact - mc).abs() < 5.0 * mc_se,
            "θ={theta}: {exact} vs {mc} ± {mc_se}"
        );
    }
}

#[test]
fn csit_threshold_matches_simpson_scan() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    for (theta, snr) in [(1e-3, 1.0), (0.01, 2.0), (0.1, 0.2)] {
        let q = qos(theta);
        let beta = q.beta();
        let avg_power = |alpha: f64| {
            simpson_log(
                |z| ((z / alpha).ln() / (beta + 1.0)).exp_m1() / z * (-z).exp(),
                alpha,
                alpha.max(1.0) * 80.0,
                20_000,
            )
        };
        // Scan α on a log grid for the sign change, then refine linearly.
        let grid = sweep::log_grid(1e-8, 10.0, 2000);
        let k = grid.iter().position(|&a| avg_power(a) < snr).unwrap();
        assert!(k > 0, "θ={theta}: scan starts above the root");
        let (a0, a1) = (grid[k - 1], grid[k]);
        let (p0, p1) = (avg_power(a0) - snr, avg_power(a1) - snr);
        let oracle = a0 + (a1 - a0) * p0 / (p0 - p1);
        let alpha = effcap::solve_alpha(snr, &q, &r).unwrap().alpha;
        assert!(
            ((alpha - oracle) / oracle).abs() < 1e-4,
            "θ={theta} snr={snr}: {alpha} vs {oracle}"
        );
    }
}

#[test]
fn alpha_star_matches_simpson_scan() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    for theta in [1e-3, 1e-2, 0.1, 1.0] {
        let p = WidebandParams::new(theta, T, 1e4).unwrap();
        let lhs = |alpha: f64| {
            simpson_log(
                |z| (z / alpha).ln() / z * (-z).exp(),
                alpha,
                alpha + 80.0,
                20_000,
            )
        };
        let grid = sweep::log_grid(1e-30, 20.0, 4000);
        let k = grid.iter().position(|&a| lhs(a) < p.c()).unwrap();
        let (a0, a1) = (grid[k - 1], grid[k]);
        let (l0, l1) = (lhs(a0) - p.c(), lhs(a1) - p.c());
        let oracle = (a0.ln() + (a1.ln() - a0.ln()) * l0 / (l0 - l1)).exp();
        let sol = asymptotics::solve_alpha_star(&r, &p).unwrap();
        assert!(
            ((sol.alpha_star - oracle) / oracle).abs() < 1e-4,
            "θ={theta}: {} vs {oracle}",
            sol.alpha_star
        );
    }
}

#[test]
fn lowpower_floor_is_approached() {
    for model in [
        FadingModel::rayleigh(1.0).unwrap(),
        FadingModel::nakagami(2.0, 1.0).unwrap(),
        FadingModel::table(vec![(0.5, 0.5), (1.5, 0.5)]).unwrap(),
    ] {
        for theta in [0.0, 1e-3, 0.01] {
            let q = qos(theta);
            let snr = 1e-4;
            let se = csir(snr, &q, &model);
            let eb = effcap::bit_energy(snr, se);
            let floor = asymptotics::lowpower_csir(&model, q.beta()).ebn0_min_linear;
            assert!(
                ((eb - floor) / floor).abs() < 0.01,
                "{model:?} θ={theta}: {eb} vs {floor}"
            );
        }
    }
}

#[test]
fn wideband_floor_is_approached() {
    let zeta = 1e-7;
    for model in [
        FadingModel::rayleigh(1.0).unwrap(),
        FadingModel::nakagami(2.0, 1.0).unwrap(),
    ] {
        for theta in [1e-3, 0.01, 0.1, 1.0] {
            let p = WidebandParams::new(theta, T, 1e4).unwrap();
            let q = p.qos_at(zeta).unwrap();
            let snr = p.snr_at(zeta);
            for mode in [CsiMode::Csir, CsiMode::Csit] {
                let se = effcap::spectral_efficiency(mode, snr, &q, &model).unwrap();
                let eb = effcap::bit_energy(snr, se);
                let floor = match mode {
                    CsiMode::Csir => asymptotics::wideband_csir(&model, &p),
                    CsiMode::Csit => asymptotics::wideband_csit(&model, &p),
                }
                .unwrap()
                .ebn0_min_linear;
                assert!(
                    ((eb - floor) / floor).abs() < 0.01,
                    "{model:?} {mode} θ={theta}: {eb} vs {floor}"
                );
            }
        }
    }
}

/// Finds `x` on `[lo, hi]` (log scale) with `f(x) = target` for increasing `f`.
fn invert_log(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid.exp()) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    (0.5 * (a + b)).exp()
}

#[test]
fn linear_approximation_near_floor() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    let target = 0.05;
    for theta in [0.0, 1e-3, 0.01, 0.1] {
        let q = qos(theta);
        let se = |snr: f64| csir(snr, &q, &r);
        let snr = invert_log(se, target, 1e-6, 10.0);
        let eb_db = effcap::to_db(effcap::bit_energy(snr, target));
        let s = asymptotics::lowpower_csir(&r, q.beta());
        let approx = asymptotics::linear_approx(eb_db, &s);
        assert!(
            ((approx - target) / target).abs() < 0.1,
            "lowpower θ={theta}: {approx}"
        );
    }
    for theta in [1e-3, 0.01, 0.1] {
        let p = WidebandParams::new(theta, T, 1e4).unwrap();
        let se = |zeta: f64| {
            effcap::spectral_efficiency_csir(p.snr_at(zeta), &p.qos_at(zeta).unwrap(), &r).unwrap()
        };
        let zeta = invert_log(se, target, 1e-10, 1e-2);
        let eb_db = effcap::to_db(effcap::bit_energy(p.snr_at(zeta), target));
        let s = asymptotics::wideband_csir(&r, &p).unwrap();
        let approx = asymptotics::linear_approx(eb_db, &s);
        assert!(
            ((approx - target) / target).abs() < 0.1,
            "wideband θ={theta}: {approx}"
        );
    }
}

#[test]
fn bit_energy_penalty_from_slopes() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    let target = 0.02;
    let eb_at = |theta: f64| {
        let q = qos(theta);
        let snr = invert_log(|s| csir(s, &q, &r), target, 1e-7, 10.0);
        (
            effcap::to_db(effcap::bit_energy(snr, target)),
            asymptotics::lowpower_csir(&r, q.beta()).slope_s0,
        )
    };
    let (eb0, s0) = eb_at(0.0);
    for theta in [1e-3, 5e-3, 0.01] {
        let (eb1, s1) = eb_at(theta);
        let predicted = asymptotics::delta_bit_energy(target, s0, s1);
        let actual = eb1 - eb0;
        assert!(
            ((predicted - actual) / actual).abs() < 0.15,
            "θ={theta}: predicted {predicted} dB, actual {actual} dB"
        );
    }
}

#[test]
fn nakagami_csit_delay_limited() {
    let n2 = FadingModel::nakagami(2.0, 1.0).unwrap();
    let d = effcap::delay_limited_limit(1.0, CsiMode::Csit, &n2).unwrap();
    assert!((d.spectral_efficiency - 1.5f64.log2()).abs() < 1e-12);
    assert!(!d.divergent_inverse_moment);
    let r = FadingModel::rayleigh(1.0).unwrap();
    let d = effcap::delay_limited_limit(1.0, CsiMode::Csit, &r).unwrap();
    assert!(d.divergent_inverse_moment && d.spectral_efficiency == 0.0);
}

#[test]
fn empirical_capacity_converges() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    for mode in [CsiMode::Csir, CsiMode::Csit] {
        let q = qos(0.01);
        let exact = effcap::effective_capacity(mode, 1.0, &q, &r).unwrap();
        let small = queuesim::effective_capacity_empirical(&r, 1.0, &q, mode, 10_000, 3).unwrap();
        let large =
            queuesim::effective_capacity_empirical(&r, 1.0, &q, mode, 1_000_000, 3).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio / 10.0 - 1.0).abs() < 0.2, "{mode}: SE ratio {ratio}");
        assert!(
            (large.value - exact).abs() < 4.0 * large.std_error,
            "{mode}: {large:?} vs {exact}"
        );
    }
}

#[test]
fn lighter_load_decays_faster() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    let q = qos(0.05);
    let ce = effcap::effective_capacity(CsiMode::Csir, 1.0, &q, &r).unwrap();
    let decay = |arrival: f64| {
        let mut cfg = SimConfig::new(r.clone(), 1.0, q, CsiMode::Csir, arrival, 2_000_000, 7);
        // Lighter loads empty out quickly; use finer thresholds.
        cfg.q_thresholds = queuesim::default_thresholds(0.5, 40);
        queuesim::simulate_queue(&cfg).unwrap().fitted_decay
    };
    let (full, half) = (decay(ce), decay(0.5 * ce));
    assert!(half > full, "{half} <= {full}");
}

#[test]
fn csit_floor_below_csir_at_strict_qos() {
    let r = FadingModel::rayleigh(1.0).unwrap();
    let pbars = sweep::log_grid(1e2, 1e5, 7);
    let csir = sweep::ebn0_min_surface(CsiMode::Csir, &r, &[1.0], &pbars, T);
    let csit = sweep::ebn0_min_surface(CsiMode::Csit, &r, &[1.0], &pbars, T);
    assert_eq!(csir.failures() + csit.failures(), 0);
    for (a, b) in csir.cells[0].iter().zip(&csit.cells[0]) {
        let (a, b) = (*a.as_ref().unwrap(), *b.as_ref().unwrap());
        assert!(b <= a, "CSIT {b} dB above CSIR {a} dB");
    }
}
