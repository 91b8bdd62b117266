//! Monte Carlo oracle with known attended/unattended correlations.
//!
//! In [`GeneratorMode::SignalLevel`] each window holds white unit-variance
//! speech representations `y_att`, `y_unatt` and noise `n`, mixed into the
//! decoded response
//!
//! ```text
//! x = rho_att * y_att + rho_unatt * y_unatt + sqrt(1 - rho_att^2 - rho_unatt^2) * n
//! ```
//!
//! so the population correlations are exactly `(rho_att, rho_unatt)`.
//! [`GeneratorMode::CorrelationLevel`] skips the signals and draws the Fisher
//! values straight from the Hotelling normal approximation.
//!
//! Window `i` of length `N` samples draws from the stream
//! `(seed, [family, N, i])`. The signal family backs [`generate_windows`],
//! [`window_correlations`] and [`empirical_accuracy`], which therefore agree
//! window for window; [`labeled_set`] uses a separate family so estimation
//! data never reuse ground-truth windows.

use crate::error::{Error, Result};
use crate::model::{samples_for_window, CorrelationPair, LabeledCorrelationSet};
use crate::rng;
use crate::stats::{fisher_inv, hotelling_moments, pearson_two, WindowedSignalPair};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMode {
    SignalLevel,
    CorrelationLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub rho_att: f64,
    pub rho_unatt: f64,
    pub fs_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub mode: GeneratorMode,
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<()> {
        let norm = self.rho_att * self.rho_att + self.rho_unatt * self.rho_unatt;
        if !(norm < 1.0) {
            return Err(Error::NormConstraint(norm));
        }
        if !(self.fs_hz > 0.0 && self.fs_hz.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sampling rate must be positive, got {}",
                self.fs_hz
            )));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        Ok(())
    }

    /// Same scenario under another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// One simulated decision window.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalWindow {
    pub x: Vec<f64>,
    pub y_att: Vec<f64>,
    pub y_unatt: Vec<f64>,
}

impl SignalWindow {
    fn with_len(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y_att: vec![0.0; n],
            y_unatt: vec![0.0; n],
        }
    }

    /// Attended and unattended correlations of the window.
    pub fn correlations(&self) -> Result<CorrelationPair> {
        WindowedSignalPair::new(&self.x, &self.y_att)?;
        WindowedSignalPair::new(&self.x, &self.y_unatt)?;
        let (r_att, r_unatt) = pearson_two(&self.x, &self.y_att, &self.y_unatt)?;
        Ok(CorrelationPair { r_att, r_unatt })
    }
}

fn fill_window(scn: &SyntheticScenario, rng: &mut ChaCha8Rng, w: &mut SignalWindow) {
    let noise_gain = (1.0 - scn.rho_att * scn.rho_att - scn.rho_unatt * scn.rho_unatt).sqrt();
    for ((x, ya), yu) in w.x.iter_mut().zip(w.y_att.iter_mut()).zip(w.y_unatt.iter_mut()) {
        let a: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.sample(StandardNormal);
        let n: f64 = rng.sample(StandardNormal);
        *ya = a;
        *yu = u;
        *x = scn.rho_att * a + scn.rho_unatt * u + noise_gain * n;
    }
}

/// Non-overlapping signal windows covering `duration_s`.
pub fn generate_windows(scn: &SyntheticScenario, window_s: f64) -> Result<Vec<SignalWindow>> {
    scn.validate()?;
    if scn.mode != GeneratorMode::SignalLevel {
        return Err(Error::InvalidConfig(
            "correlation-level scenarios emit correlation pairs, not signals".into(),
        ));
    }
    let n = samples_for_window(window_s, scn.fs_hz)?;
    if window_s > scn.duration_s {
        return Err(Error::InvalidWindow(format!(
            "window of {window_s} s exceeds the {} s duration",
            scn.duration_s
        )));
    }
    let count = (scn.duration_s / window_s).floor() as usize;
    Ok((0..count)
        .map(|i| {
            let mut w = SignalWindow::with_len(n);
            let mut rng = rng::stream(scn.seed, &[rng::tag::SIGNAL_WINDOW, n as u64, i as u64]);
            fill_window(scn, &mut rng, &mut w);
            w
        })
        .collect())
}

fn pairs_from_family(scn: &SyntheticScenario, family: u64, n: usize, count: usize) -> Result<Vec<CorrelationPair>> {
    scn.validate()?;
    let path = |i: usize| [family, n as u64, i as u64];
    match scn.mode {
        GeneratorMode::SignalLevel => {
            let mut w = SignalWindow::with_len(n);
            (0..count)
                .map(|i| {
                    let mut rng = rng::stream(scn.seed, &path(i));
                    fill_window(scn, &mut rng, &mut w);
                    w.correlations()
                })
                .collect()
        }
        GeneratorMode::CorrelationLevel => {
            let att = hotelling_moments(scn.rho_att, n)?;
            let unatt = hotelling_moments(scn.rho_unatt, n)?;
            let (sd_att, sd_unatt) = (att.sigma_sq.sqrt(), unatt.sigma_sq.sqrt());
            Ok((0..count)
                .map(|i| {
                    let mut rng = rng::stream(scn.seed, &path(i));
                    let za: f64 = rng.sample(StandardNormal);
                    let zu: f64 = rng.sample(StandardNormal);
                    CorrelationPair {
                        r_att: fisher_inv(att.mu + sd_att * za),
                        r_unatt: fisher_inv(unatt.mu + sd_unatt * zu),
                    }
                })
                .collect())
        }
    }
}

/// Correlation pairs of the first `n_windows` oracle windows. Not bounded by
/// `duration_s`.
pub fn window_correlations(scn: &SyntheticScenario, window_s: f64, n_windows: usize) -> Result<Vec<CorrelationPair>> {
    let n = samples_for_window(window_s, scn.fs_hz)?;
    pairs_from_family(scn, rng::tag::SIGNAL_WINDOW, n, n_windows)
}

/// [`window_correlations`] wrapped as a labeled set, for ground-truth curves.
pub fn truth_set(scn: &SyntheticScenario, window_s: f64, n_windows: usize) -> Result<LabeledCorrelationSet> {
    LabeledCorrelationSet::new(window_correlations(scn, window_s, n_windows)?, window_s, scn.fs_hz)
}

/// Brute-force accuracy in percent over `n_windows` oracle windows; ties
/// count as incorrect.
pub fn empirical_accuracy(scn: &SyntheticScenario, window_s: f64, n_windows: usize) -> Result<f64> {
    if n_windows == 0 {
        return Err(Error::InvalidConfig("n_windows must be at least 1".into()));
    }
    let pairs = window_correlations(scn, window_s, n_windows)?;
    let correct = pairs.iter().filter(|p| p.is_correct()).count();
    Ok(100.0 * correct as f64 / n_windows as f64)
}

/// Number of whole windows in `minutes` of data.
pub fn windows_in_minutes(minutes: f64, window_s: f64) -> usize {
    // Guard against 60 * 0.1 / 0.2 landing just below an integer.
    (60.0 * minutes / window_s + 1e-9).floor().max(0.0) as usize
}

/// Estimation data: `floor(60 * minutes / window_s)` fresh labeled windows.
pub fn labeled_set(scn: &SyntheticScenario, window_s: f64, minutes: f64) -> Result<LabeledCorrelationSet> {
    let n = samples_for_window(window_s, scn.fs_hz)?;
    if !(minutes > 0.0 && minutes.is_finite()) {
        return Err(Error::InvalidConfig(format!("minutes must be positive, got {minutes}")));
    }
    let m = windows_in_minutes(minutes, window_s);
    if m < 2 {
        return Err(Error::TooFewSamples { got: m, need: 2 });
    }
    let pairs = pairs_from_family(scn, rng::tag::ESTIMATION_WINDOW, n, m)?;
    LabeledCorrelationSet::new(pairs, window_s, scn.fs_hz)
}
