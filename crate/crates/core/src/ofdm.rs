//! QPSK mapping and CP-OFDM modulation.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::spectral::{check_len, Dft, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modulation {
    #[default]
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
        }
    }

    /// The constellation points, at unit average power.
    pub fn points(self) -> Vec<C64> {
        match self {
            Modulation::Qpsk => (0..4u8)
                .map(|b| qpsk_point(b >> 1, b & 1))
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
        }
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            other => Err(Error::Config(format!("unsupported modulation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    /// Number of subcarriers.
    pub n: usize,
    pub cp_len: usize,
    pub bandwidth_hz: f64,
    pub modulation: Modulation,
    /// Data symbols per frame, after the training symbols.
    pub data_symbols: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n: 128,
            cp_len: 16,
            bandwidth_hz: 2e6,
            modulation: Modulation::Qpsk,
            data_symbols: 18,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "subcarrier count {} must be a power of two no smaller than 8",
                self.n
            )));
        }
        if self.cp_len == 0 || self.cp_len > self.n {
            return Err(Error::Config(format!(
                "cyclic prefix {} must lie in 1..={}",
                self.cp_len, self.n
            )));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        if self.data_symbols == 0 {
            return Err(Error::Config("a frame needs at least one data symbol".into()));
        }
        Ok(())
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.n * self.modulation.bits_per_symbol()
    }
}

#[inline]
fn qpsk_point(b1: u8, b0: u8) -> C64 {
    let re = 1.0 - 2.0 * f64::from(b1 & 1);
    let im = 1.0 - 2.0 * f64::from(b0 & 1);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Gray-mapped QPSK at unit average power: bit pair `(b1, b0)` maps to
/// `((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2)`.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<C64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::LengthMismatch {
            expected: bits.len() + 1,
            actual: bits.len(),
        });
    }
    Ok(bits.chunks_exact(2).map(|p| qpsk_point(p[0], p[1])).collect())
}

/// Hard sign decisions, the inverse of [`qpsk_map`].
pub fn qpsk_demap(symbols: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        out.push(u8::from(s.re < 0.0));
        out.push(u8::from(s.im < 0.0));
    }
    out
}

/// Counts bit errors between a hard-decided symbol and the bits sent.
pub fn qpsk_bit_errors(symbol: C64, bits: &[u8]) -> u64 {
    u64::from(u8::from(symbol.re < 0.0) != bits[0]) + u64::from(u8::from(symbol.im < 0.0) != bits[1])
}

/// CP-OFDM modulator/demodulator bound to one configuration.
#[derive(Debug, Clone)]
pub struct OfdmModem {
    n: usize,
    cp_len: usize,
    dft: Dft,
}

impl OfdmModem {
    pub fn new(cfg: &OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            n: cfg.n,
            cp_len: cfg.cp_len,
            dft: Dft::new(cfg.n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    /// Inverse DFT of `spectrum`, prefixed with its last `cp_len` samples.
    pub fn to_time_with_cp(&self, spectrum: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n, spectrum.len())?;
        let core = self.dft.inverse(spectrum)?;
        let mut out = Vec::with_capacity(self.n + self.cp_len);
        out.extend_from_slice(&core[self.n - self.cp_len..]);
        out.extend_from_slice(&core);
        Ok(out)
    }

    /// Drops the prefix and returns the DFT of the remaining `n` samples.
    pub fn strip_cp_and_fft(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n + self.cp_len, x.len())?;
        self.dft.forward(&x[self.cp_len..])
    }
}
