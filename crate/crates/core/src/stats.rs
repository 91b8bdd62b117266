//! Scalar statistical primitives: windowed Pearson correlation, the Fisher
//! transformation, the standard normal CDF and quantile, and the first-order
//! Hotelling moments of a Fisher-transformed sample correlation.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Correlations are clamped to `[-(1 - eps), 1 - eps]` before `artanh`.
pub const CORRELATION_CLAMP_EPS: f64 = 1e-12;

/// Largest `f64` strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// One decision window: a decoded response and one encoded speech signal of
/// equal length.
#[derive(Debug, Clone, Copy)]
pub struct WindowedSignalPair<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl<'a> WindowedSignalPair<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
        }
        if x.len() < 2 {
            return Err(Error::InvalidWindow(format!(
                "a window needs at least 2 samples, got {}",
                x.len()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Pearson correlation of the mean-centered signals, clamped to `[-1, 1]`.
///
/// All sums are compensated so long windows at high sampling rates keep full
/// precision.
pub fn pearson(pair: &WindowedSignalPair<'_>) -> Result<f64> {
    let n = pair.len() as f64;
    let mean_x = compensated_sum(pair.x.iter().copied()) / n;
    let mean_y = compensated_sum(pair.y.iter().copied()) / n;

    let mut sxy = CompensatedSum::default();
    let mut sxx = CompensatedSum::default();
    let mut syy = CompensatedSum::default();
    for (&x, &y) in pair.x.iter().zip(pair.y) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    let (sxx, syy) = (sxx.total(), syy.total());
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::DegenerateWindow("a centered signal has zero energy".into()));
    }
    let r = sxy.total() / (sxx.sqrt() * syy.sqrt());
    if !r.is_finite() {
        return Err(Error::DegenerateWindow("non-finite correlation".into()));
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Correlations of one response against two signals in a single pass over
/// the samples; same arithmetic as [`pearson`] applied twice. Callers
/// guarantee equal lengths of at least 2.
pub(crate) fn pearson_two(x: &[f64], ya: &[f64], yu: &[f64]) -> Result<(f64, f64)> {
    debug_assert!(x.len() == ya.len() && x.len() == yu.len() && x.len() >= 2);
    let n = x.len() as f64;
    let mx = compensated_sum(x.iter().copied()) / n;
    let ma = compensated_sum(ya.iter().copied()) / n;
    let mu = compensated_sum(yu.iter().copied()) / n;

    let mut sxa = CompensatedSum::default();
    let mut sxu = CompensatedSum::default();
    let mut sxx = CompensatedSum::default();
    let mut saa = CompensatedSum::default();
    let mut suu = CompensatedSum::default();
    for ((&x, &a), &u) in x.iter().zip(ya).zip(yu) {
        let dx = x - mx;
        let da = a - ma;
        let du = u - mu;
        sxa.add(dx * da);
        sxu.add(dx * du);
        sxx.add(dx * dx);
        saa.add(da * da);
        suu.add(du * du);
    }
    let (sxx, saa, suu) = (sxx.total(), saa.total(), suu.total());
    if !(sxx > 0.0 && saa > 0.0 && suu > 0.0) {
        return Err(Error::DegenerateWindow("a centered signal has zero energy".into()));
    }
    let ra = sxa.total() / (sxx.sqrt() * saa.sqrt());
    let ru = sxu.total() / (sxx.sqrt() * suu.sqrt());
    Ok((ra.clamp(-1.0, 1.0), ru.clamp(-1.0, 1.0)))
}

/// Fisher transformation `artanh(r)` with the default clamp.
pub fn fisher(r: f64) -> Result<f64> {
    fisher_with_clamp(r, Some(CORRELATION_CLAMP_EPS))
}

/// Fisher transformation with an explicit clamp. With `clamp = None`,
/// `|r| >= 1` is rejected; otherwise `r` is clamped to `[-(1-eps), 1-eps]`
/// first. Values outside `[-1, 1]` are never correlations and always rejected.
pub fn fisher_with_clamp(r: f64, clamp: Option<f64>) -> Result<f64> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::OutOfDomain {
            what: "fisher",
            value: r,
        });
    }
    let r = match clamp {
        Some(eps) => r.clamp(-(1.0 - eps), 1.0 - eps),
        None => r,
    };
    if r.abs() >= 1.0 {
        return Err(Error::OutOfDomain {
            what: "fisher",
            value: r,
        });
    }
    Ok(artanh(r))
}

/// `artanh` evaluated on `|r|` so it is exactly odd; `f64::atanh` loses
/// digits for `r` near -1.
fn artanh(r: f64) -> f64 {
    let a = r.abs();
    (0.5 * (2.0 * a / (1.0 - a)).ln_1p()).copysign(r)
}

/// Inverse Fisher transformation `tanh(z)`, kept strictly inside `(-1, 1)`.
pub fn fisher_inv(z: f64) -> f64 {
    z.tanh().clamp(-BELOW_ONE, BELOW_ONE)
}

/// Complementary error function.
///
/// Below 2.5 uses the all-positive series
/// `erf(x) = 2/sqrt(pi) e^{-x^2} sum_n (2x^2)^n x / (2n+1)!!`; above it the
/// continued fraction `erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`
/// evaluated with the modified Lentz method.
pub fn erfc(x: f64) -> f64 {
    const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        let two_x2 = 2.0 * x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        while term > sum * 1e-17 {
            k += 1.0;
            term *= two_x2 / (2.0 * k + 1.0);
            sum += term;
        }
        return 1.0 - 2.0 * FRAC_1_SQRT_PI * (-x * x).exp() * sum;
    }
    if x > 27.0 {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        d = if d.abs() < TINY { 1.0 / TINY } else { 1.0 / d };
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI * (-x * x).exp() / f
}

/// Standard normal CDF.
pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
///
/// Acklam's rational approximation followed by one Halley step against
/// [`std_normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfDomain {
            what: "normal_quantile",
            value: p,
        });
    }

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };

    // exp(x^2/2) overflows past |x| ~ 37; the raw approximation is already
    // far inside tolerance there.
    if x.abs() < 37.0 {
        let e = std_normal_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

/// First-order Hotelling approximation of the mean and variance of
/// `artanh(r)` for a sample correlation over `n` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotellingMoments {
    pub mu: f64,
    pub sigma_sq: f64,
}

pub fn hotelling_moments(rho: f64, n: usize) -> Result<HotellingMoments> {
    if !(rho.abs() < 1.0) {
        return Err(Error::OutOfDomain {
            what: "hotelling_moments",
            value: rho,
        });
    }
    if n < 2 {
        return Err(Error::InvalidWindow(format!("need at least 2 samples, got {n}")));
    }
    let dof = (n - 1) as f64;
    Ok(HotellingMoments {
        mu: fisher(rho)? + rho / (2.0 * dof),
        sigma_sq: 1.0 / dof,
    })
}
