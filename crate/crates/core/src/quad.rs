//! Globally adaptive Gauss–Kronrod (G10/K21) integration on finite intervals.
//!
//! The integrator bisects the panel with the largest error estimate until the
//! summed error meets the relative tolerance. Callers seed it with a set of
//! breakpoints so integrands concentrated near an edge are resolved even when
//! the first 21-point sweep would miss them.

use std::sync::OnceLock;

use thiserror::Error;

/// Environment variable overriding the default relative tolerance.
pub const TOL_ENV_VAR: &str = "QOS_ENERGY_QUAD_TOL";

const DEFAULT_REL_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 4000;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, error {error:e}"
    )]
    NonIntegrable {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
    },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

/// Relative tolerance used by [`integrate`] unless overridden.
///
/// Reads [`TOL_ENV_VAR`] once per process; unparsable or non-positive values
/// fall back to the built-in default.
pub fn default_rel_tol() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var(TOL_ENV_VAR)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_REL_TOL)
    })
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    Ok(Panel {
        a,
        b,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h),
    })
}

/// Integrates `f` over `[a, b]` to the default relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64, QuadError> {
    integrate_with_breaks(f, &[a, b], default_rel_tol())
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from one panel
/// per consecutive pair of breakpoints.
///
/// Breakpoints must be nondecreasing; zero-width panels are skipped.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<f64, QuadError> {
    let mut panels = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            panels.push(kronrod21(&f, w[0], w[1])?);
        }
    }
    if panels.is_empty() {
        return Ok(0.0);
    }

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= rel_tol * total.abs() || err == 0.0 {
            return Ok(total);
        }

        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        // Panel cannot be split further in floating point.
        let exhausted = mid <= p.a || mid >= p.b;
        if exhausted || panels.len() >= MAX_PANELS {
            // Accept results limited only by roundoff.
            if err <= 1e3 * rel_tol * total.abs() + f64::MIN_POSITIVE {
                return Ok(total);
            }
            return Err(QuadError::NonIntegrable {
                lower: breaks[0],
                upper: *breaks.last().unwrap(),
                estimate: total,
                error: err,
            });
        }
        let left = kronrod21(&f, p.a, mid)?;
        let right = kronrod21(&f, mid, p.b)?;
        panels[worst] = left;
        panels.push(right);
    }
}

/// Breakpoints `lower + scale·10^k` for `k = -12..=0`, clipped to `upper`.
///
/// Used to seed integrals whose mass may sit in a thin layer above `lower`.
/// A positive `lower` far below `scale·1e-12` also gets the decades
/// `lower·10^j` in between, for integrands that behave like `1/z` there.
pub fn geometric_breaks(lower: f64, upper: f64, scale: f64) -> Vec<f64> {
    let mut out = vec![lower];
    if upper > lower && scale > 0.0 {
        let first = lower + scale * 1e-12;
        if lower > 0.0 {
            let mut x = lower * 10.0;
            while x < first && x < upper {
                out.push(x);
                x *= 10.0;
            }
        }
        for k in -12..=0 {
            let x = lower + scale * 10f64.powi(k);
            if x < upper && x > *out.last().unwrap() {
                out.push(x);
            }
        }
    }
    out.push(upper);
    out
}
