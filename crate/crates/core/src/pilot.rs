//! The two-symbol training pattern.
//!
//! With `s_p` an `N/2 - 1` pilot vector and `eta` a real tone amplitude
//! (bins indexed from 0):
//!
//! ```text
//! s1 = [ eta,   s_p,        eta,   0 (N/2-1) ]
//! s2 = [ j*eta, 0 (N/2-1),  j*eta, s_p       ]
//! ```
//!
//! Symbol 1 leaves the upper half empty and symbol 2 the lower half, so the
//! image that IQ imbalance folds onto the mirror bins never overlaps a pilot.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ofdm::qpsk_map;
use crate::spectral::{mirror, C64};

/// How the DC/Nyquist tone amplitude relates to the average symbol power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaRule {
    /// `eta = sqrt(2 P)`: tone power `2P`.
    #[default]
    TonePower,
    /// `eta = 2P` taken literally as an amplitude.
    Literal,
}

/// Total power budget for the inner pilot vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotBudget {
    /// `sum |s_p|^2 = (N - 1) P`: each active pilot boosted by about 3 dB.
    #[default]
    FullBand,
    /// `sum |s_p|^2 = (N/2 - 1) P`: pilots at the data power.
    HalfBand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotConfig {
    /// Average constellation power `P`.
    pub avg_power: f64,
    pub eta: EtaRule,
    pub budget: PilotBudget,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            avg_power: 1.0,
            eta: EtaRule::TonePower,
            budget: PilotBudget::FullBand,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotPair {
    s1: Vec<C64>,
    s2: Vec<C64>,
    inner: Vec<C64>,
    eta: f64,
}

impl PilotPair {
    /// Assembles the pair from an explicit inner vector of length `N/2 - 1`.
    pub fn from_inner(inner: Vec<C64>, eta: f64) -> Result<Self> {
        let half = inner.len() + 1;
        let n = 2 * half;
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidSize(n));
        }
        if let Some(i) = inner.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::ZeroPilot(i + 1));
        }
        if !(eta > 0.0) {
            return Err(Error::ZeroPilot(0));
        }
        let zero = C64::new(0.0, 0.0);
        let tone = C64::new(eta, 0.0);
        let jtone = C64::new(0.0, eta);

        let mut s1 = vec![zero; n];
        s1[0] = tone;
        s1[1..half].copy_from_slice(&inner);
        s1[half] = tone;

        let mut s2 = vec![zero; n];
        s2[0] = jtone;
        s2[half] = jtone;
        s2[half + 1..].copy_from_slice(&inner);

        Ok(Self { s1, s2, inner, eta })
    }

    pub fn n(&self) -> usize {
        self.s1.len()
    }

    pub fn s1(&self) -> &[C64] {
        &self.s1
    }

    pub fn s2(&self) -> &[C64] {
        &self.s2
    }

    /// The inner pilot vector `s_p`.
    pub fn inner(&self) -> &[C64] {
        &self.inner
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `mirror(s1)` over bins `N/2 + 1 .. N`: the pilots as they appear in
    /// the image half of the spectrum (a conjugated, reversed `s_p`).
    pub fn mirrored_pilots(&self) -> Vec<C64> {
        let half = self.n() / 2;
        mirror(&self.s1)[half + 1..].to_vec()
    }

    /// The per-bin pilot weights multiplying `mu H` in the stacked direct
    /// observation: `[eta, s_p, eta, s_p]`.
    pub fn direct_template(&self) -> Vec<C64> {
        let eta = C64::new(self.eta, 0.0);
        let mut t = Vec::with_capacity(self.n());
        t.push(eta);
        t.extend_from_slice(&self.inner);
        t.push(eta);
        t.extend_from_slice(&self.inner);
        t
    }

    /// The per-bin pilot weights multiplying `conj(nu) H` once the stacked
    /// image observation has been mirrored back: `mirror([eta, m, eta, m])`
    /// with `m` the mirrored pilots.
    pub fn image_template(&self) -> Vec<C64> {
        let eta = C64::new(self.eta, 0.0);
        let m = self.mirrored_pilots();
        let mut t = Vec::with_capacity(self.n());
        t.push(eta);
        t.extend_from_slice(&m);
        t.push(eta);
        t.extend_from_slice(&m);
        mirror(&t)
    }

    /// Mean of `|t(k)|^2` over the direct template.
    pub fn mean_template_power(&self) -> f64 {
        let t = self.direct_template();
        t.iter().map(|v| v.norm_sqr()).sum::<f64>() / t.len() as f64
    }
}

/// Builds a pilot pair for `n` subcarriers with QPSK inner pilots drawn from
/// `rng` and scaled to the configured budget.
pub fn build_pilot_pair<R: Rng + ?Sized>(n: usize, cfg: &PilotConfig, rng: &mut R) -> Result<PilotPair> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(n));
    }
    if !(cfg.avg_power > 0.0) {
        return Err(Error::Config("average symbol power must be positive".into()));
    }
    let len = n / 2 - 1;
    let bits: Vec<u8> = (0..2 * len).map(|_| rng.random_range(0..2u8)).collect();
    let budget = match cfg.budget {
        PilotBudget::FullBand => (n - 1) as f64,
        PilotBudget::HalfBand => len as f64,
    } * cfg.avg_power;
    let scale = (budget / len as f64).sqrt();
    let inner = qpsk_map(&bits)?.into_iter().map(|v| v * scale).collect();
    let eta = match cfg.eta {
        EtaRule::TonePower => (2.0 * cfg.avg_power).sqrt(),
        EtaRule::Literal => 2.0 * cfg.avg_power,
    };
    PilotPair::from_inner(inner, eta)
}
