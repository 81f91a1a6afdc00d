//! Receiver IQ imbalance.
//!
//! The imbalanced front end maps a baseband sample `y` to `mu*y + nu*conj(y)`
//! with
//!
//! ```text
//! mu = cos(theta/2) + j*alpha*sin(theta/2)
//! nu = alpha*cos(theta/2) - j*sin(theta/2)
//! ```
//!
//! where `theta` is the phase mismatch and `alpha` the amplitude mismatch
//! between the I and Q branches. `alpha = 0`, `theta = 0` is a perfect
//! receiver. Amplitude mismatch quoted in dB is the I/Q gain ratio
//! `g = (1 + alpha) / (1 - alpha)`, so `alpha = (g - 1) / (g + 1)`.

use crate::spectral::{mirror, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqParams {
    theta: f64,
    alpha: f64,
    mu: C64,
    nu: C64,
}

impl IqParams {
    /// From the raw mismatch parameters: `theta` in radians and the
    /// amplitude mismatch `alpha` (zero for a balanced receiver).
    pub fn new(theta: f64, alpha: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            theta,
            alpha,
            mu: C64::new(c, alpha * s),
            nu: C64::new(alpha * c, -s),
        }
    }

    /// From a phase mismatch in degrees and an I/Q gain ratio in dB.
    pub fn from_degrees_db(theta_deg: f64, gain_ratio_db: f64) -> Self {
        Self::from_gain_ratio(theta_deg.to_radians(), 10f64.powf(gain_ratio_db / 20.0))
    }

    /// From a phase mismatch in radians and a linear I/Q gain ratio.
    pub fn from_gain_ratio(theta: f64, ratio: f64) -> Self {
        Self::new(theta, (ratio - 1.0) / (ratio + 1.0))
    }

    pub fn ideal() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gain_ratio(&self) -> f64 {
        (1.0 + self.alpha) / (1.0 - self.alpha)
    }

    pub fn gain_ratio_db(&self) -> f64 {
        20.0 * self.gain_ratio().log10()
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    /// `nu / conj(mu)`, the image-cancellation weight.
    pub fn kappa(&self) -> C64 {
        self.nu / self.mu.conj()
    }

    pub fn is_ideal(&self) -> bool {
        self.nu == C64::new(0.0, 0.0) && self.mu == C64::new(1.0, 0.0)
    }
}

impl Default for IqParams {
    fn default() -> Self {
        Self::ideal()
    }
}

pub fn distort_time_in_place(y: &mut [C64], p: &IqParams) {
    for v in y.iter_mut() {
        *v = p.mu * *v + p.nu * v.conj();
    }
}

/// `mu*y + nu*conj(y)` sample by sample.
pub fn distort_time(y: &[C64], p: &IqParams) -> Vec<C64> {
    let mut out = y.to_vec();
    distort_time_in_place(&mut out, p);
    out
}

/// Frequency-domain equivalent of [`distort_time`]: `mu*Y + nu*mirror(Y)`.
pub fn distort_freq(y: &[C64], p: &IqParams) -> Vec<C64> {
    y.iter()
        .zip(mirror(y))
        .map(|(v, m)| p.mu * v + p.nu * m)
        .collect()
}
