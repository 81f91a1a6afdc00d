//! Block-fading multipath channel and additive noise.
//!
//! A [`Cir`] is a sample-spaced impulse response. Its [`Cir::frequency_response`]
//! is the unitary DFT of the zero-padded taps, while the gain a subcarrier
//! actually sees after CP removal and a unitary FFT is `sqrt(N)` times that
//! ([`Cir::link_response`]). Receivers work with the link response throughout.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{Dft, C64};

/// Tapped-delay-line power profile, normalized to unit total power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    delays_s: Vec<f64>,
    powers: Vec<f64>,
}

impl PowerDelayProfile {
    /// Builds a profile from delays in seconds and linear powers. Powers are
    /// rescaled to sum to one.
    pub fn new(delays_s: Vec<f64>, powers: Vec<f64>) -> Result<Self> {
        if delays_s.is_empty() || delays_s.len() != powers.len() {
            return Err(Error::Config(format!(
                "profile needs matching nonempty delay and power lists ({} vs {})",
                delays_s.len(),
                powers.len()
            )));
        }
        if delays_s.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Config("path delays must be finite and nonnegative".into()));
        }
        if delays_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("path delays must be strictly increasing".into()));
        }
        if powers.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::Config("path powers must be positive".into()));
        }
        let total: f64 = powers.iter().sum();
        let powers = powers.into_iter().map(|p| p / total).collect();
        Ok(Self { delays_s, powers })
    }

    /// Delays in microseconds, powers in dB.
    pub fn from_us_db(delays_us: &[f64], powers_db: &[f64]) -> Result<Self> {
        Self::new(
            delays_us.iter().map(|d| d * 1e-6).collect(),
            powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect(),
        )
    }

    /// Six-path typical-urban profile.
    pub fn typical_urban() -> Self {
        Self::from_us_db(
            &[0.0, 0.2, 0.5, 1.6, 2.3, 5.0],
            &[-3.0, 0.0, -2.0, -6.0, -8.0, -10.0],
        )
        .expect("built-in profile is valid")
    }

    /// A single unit-power path at zero delay (flat Rayleigh fading).
    pub fn flat() -> Self {
        Self::new(vec![0.0], vec![1.0]).expect("built-in profile is valid")
    }

    pub fn delays_s(&self) -> &[f64] {
        &self.delays_s
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// Tap index of each path when sampled every `sample_period` seconds.
    pub fn tap_indices(&self, sample_period: f64) -> Vec<usize> {
        self.delays_s
            .iter()
            .map(|d| (d / sample_period).round() as usize)
            .collect()
    }

    /// Checks that every path lands inside a channel of `taps` taps.
    pub fn check_fits(&self, sample_period: f64, taps: usize) -> Result<()> {
        match self.tap_indices(sample_period).into_iter().max() {
            Some(tap) if tap >= taps => Err(Error::ProfileTooLong { tap, taps }),
            _ => Ok(()),
        }
    }
}

/// Channel impulse response, one tap per sample period.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    taps: Vec<C64>,
}

impl Cir {
    pub fn new(taps: Vec<C64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Config("impulse response needs at least one tap".into()));
        }
        Ok(Self { taps })
    }

    pub fn impulse(len: usize) -> Self {
        let mut taps = vec![C64::new(0.0, 0.0); len.max(1)];
        taps[0] = C64::new(1.0, 0.0);
        Self { taps }
    }

    pub fn taps(&self) -> &[C64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Largest tap delay with a nonzero coefficient, in samples.
    pub fn memory(&self) -> usize {
        self.taps
            .iter()
            .rposition(|t| t.norm_sqr() > 0.0)
            .unwrap_or(0)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            taps: self.taps.iter().map(|t| t * factor).collect(),
        }
    }

    /// Unitary DFT of the zero-padded taps.
    pub fn frequency_response(&self, dft: &Dft) -> Result<Vec<C64>> {
        dft.forward_padded(&self.taps)
    }

    /// Per-subcarrier gain seen by a CP-OFDM link using unitary transforms.
    pub fn link_response(&self, dft: &Dft) -> Result<Vec<C64>> {
        let root_n = (dft.len() as f64).sqrt();
        let mut h = self.frequency_response(dft)?;
        h.iter_mut().for_each(|v| *v *= root_n);
        Ok(h)
    }
}

/// Zero-mean circular complex Gaussian with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * scale, im * scale)
}

/// Assembles a channel from one unit-variance complex gain per profile path.
///
/// Each gain is scaled by the square root of its path power and added to the
/// tap nearest its delay.
pub fn cir_from_gains(
    profile: &PowerDelayProfile,
    sample_period: f64,
    len: usize,
    gains: impl IntoIterator<Item = C64>,
) -> Result<Cir> {
    profile.check_fits(sample_period, len)?;
    let mut taps = vec![C64::new(0.0, 0.0); len];
    for ((tap, power), g) in profile
        .tap_indices(sample_period)
        .into_iter()
        .zip(&profile.powers)
        .zip(gains)
    {
        taps[tap] += g * power.sqrt();
    }
    Cir::new(taps)
}

/// Draws one block-fading channel realization with `len` taps.
pub fn draw_cir<R: Rng + ?Sized>(
    profile: &PowerDelayProfile,
    sample_period: f64,
    len: usize,
    rng: &mut R,
) -> Result<Cir> {
    let gains: Vec<C64> = (0..profile.powers.len())
        .map(|_| complex_gaussian(rng, 1.0))
        .collect();
    cir_from_gains(profile, sample_period, len, gains)
}

/// Passes a CP-extended symbol through the channel.
///
/// Returns the linear convolution truncated to the input window, so the tail
/// spills into nothing (the next symbol's prefix absorbs it). After removing
/// `cp_len` samples the remainder is the circular convolution of the core
/// symbol with `h`.
pub fn apply_channel(x: &[C64], h: &Cir, cp_len: usize) -> Result<Vec<C64>> {
    let memory = h.memory();
    if memory > cp_len {
        return Err(Error::CyclicPrefixTooShort { memory, cp_len });
    }
    let taps = &h.taps[..=memory];
    let out = (0..x.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(d, t)| t * x[n - d])
                .sum()
        })
        .collect();
    Ok(out)
}

/// Complex AWGN power per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    variance: f64,
}

impl NoiseSpec {
    pub fn new(variance: f64) -> Result<Self> {
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::Domain(format!("noise variance {variance} is negative")));
        }
        Ok(Self { variance })
    }

    /// Noise variance giving `snr_db` against a signal of `signal_power`.
    pub fn from_snr_db(snr_db: f64, signal_power: f64) -> Result<Self> {
        Self::new(signal_power / 10f64.powf(snr_db / 10.0))
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

pub fn add_awgn<R: Rng + ?Sized>(x: &mut [C64], spec: NoiseSpec, rng: &mut R) {
    if spec.variance == 0.0 {
        return;
    }
    for v in x.iter_mut() {
        *v += complex_gaussian(rng, spec.variance);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::oracle::dft_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
    }

    #[test]
    fn typical_urban_is_normalized_and_fits() {
        let tu = PowerDelayProfile::typical_urban();
        assert!((tu.powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let taps = tu.tap_indices(0.5e-6);
        assert_eq!(taps, vec![0, 0, 1, 3, 5, 10]);
        assert!(tu.check_fits(0.5e-6, 16).is_ok());
        assert!(matches!(
            tu.check_fits(0.5e-6, 8),
            Err(Error::ProfileTooLong { tap: 10, taps: 8 })
        ));
    }

    #[test]
    fn profile_validation() {
        assert!(PowerDelayProfile::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PowerDelayProfile::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(PowerDelayProfile::new(vec![-1.0], vec![1.0]).is_err());
        assert!(PowerDelayProfile::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn single_path_unit_mean_power() {
        let profile = PowerDelayProfile::flat();
        let mut r = rng(1);
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let h = draw_cir(&profile, 0.5e-6, 16, &mut r).unwrap();
            assert!(h.taps()[1..].iter().all(|t| t.norm() == 0.0));
            acc += h.taps()[0].norm_sqr();
        }
        let mean = acc / draws as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean tap power {mean}");
    }

    #[test]
    fn typical_urban_unit_mean_energy() {
        let profile = PowerDelayProfile::typical_urban();
        let mut r = rng(2);
        let draws = 10_000;
        let total: f64 = (0..draws)
            .map(|_| {
                let h = draw_cir(&profile, 0.5e-6, 16, &mut r).unwrap();
                h.taps().iter().map(|t| t.norm_sqr()).sum::<f64>()
            })
            .sum();
        assert!((total / draws as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn zero_gains_give_zero_channel() {
        let profile = PowerDelayProfile::typical_urban();
        let h = cir_from_gains(&profile, 0.5e-6, 16, std::iter::repeat(C64::new(0.0, 0.0)))
            .unwrap();
        assert!(h.taps().iter().all(|t| t.norm() == 0.0));
    }

    #[test]
    fn frequency_response_cases() {
        let dft = Dft::new(16).unwrap();
        let flat = Cir::impulse(1).frequency_response(&dft).unwrap();
        assert!(flat.iter().all(|v| (v - C64::new(0.25, 0.0)).norm() < 1e-15));

        let zero = Cir::new(vec![C64::new(0.0, 0.0); 4]).unwrap();
        assert!(zero.frequency_response(&dft).unwrap().iter().all(|v| v.norm() == 0.0));

        let mut r = rng(5);
        let h = Cir::new(random_vec(&mut r, 4)).unwrap();
        let mut padded = h.taps().to_vec();
        padded.resize(16, C64::new(0.0, 0.0));
        let oracle = dft_matrix(&padded, false);
        let got = h.frequency_response(&dft).unwrap();
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn impulse_channel_is_identity() {
        let mut r = rng(6);
        let x = random_vec(&mut r, 20);
        let y = apply_channel(&x, &Cir::impulse(4), 4).unwrap();
        assert_eq!(x, y);
        let zeros = vec![C64::new(0.0, 0.0); 20];
        let h = Cir::new(random_vec(&mut r, 4)).unwrap();
        assert!(apply_channel(&zeros, &h, 4).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn circular_convolution_theorem() {
        let (n, cp) = (16, 4);
        let dft = Dft::new(n).unwrap();
        let mut r = rng(7);
        let core = random_vec(&mut r, n);
        let h = Cir::new(random_vec(&mut r, 4)).unwrap();
        let mut x = core[n - cp..].to_vec();
        x.extend_from_slice(&core);
        let y = apply_channel(&x, &h, cp).unwrap();
        let got = dft.forward(&y[cp..]).unwrap();
        let s = dft_matrix(&core, false);
        let mut padded = h.taps().to_vec();
        padded.resize(n, C64::new(0.0, 0.0));
        let hf = dft_matrix(&padded, false);
        let root_n = (n as f64).sqrt();
        for k in 0..n {
            assert!((got[k] - root_n * hf[k] * s[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn short_prefix_is_rejected() {
        let mut taps = vec![C64::new(0.0, 0.0); 8];
        taps[6] = C64::new(1.0, 0.0);
        let h = Cir::new(taps).unwrap();
        assert!(matches!(
            apply_channel(&[C64::new(0.0, 0.0); 10], &h, 4),
            Err(Error::CyclicPrefixTooShort { memory: 6, cp_len: 4 })
        ));
    }

    #[test]
    fn awgn_moments() {
        let mut r = rng(8);
        let mut x = vec![C64::new(1.0, -1.0); 4];
        add_awgn(&mut x, NoiseSpec::new(0.0).unwrap(), &mut r);
        assert_eq!(x, vec![C64::new(1.0, -1.0); 4]);

        let mut w = vec![C64::new(0.0, 0.0); 100_000];
        add_awgn(&mut w, NoiseSpec::new(1.0).unwrap(), &mut r);
        let var = w.iter().map(|v| v.norm_sqr()).sum::<f64>() / w.len() as f64;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
        assert!(NoiseSpec::new(-1.0).is_err());
    }

    #[test]
    fn awgn_per_bin_variance_survives_fft() {
        let n = 64;
        let dft = Dft::new(n).unwrap();
        let mut r = rng(9);
        let spec = NoiseSpec::new(0.5).unwrap();
        let symbols = 10_000;
        let mut per_bin = vec![0.0; n];
        for _ in 0..symbols {
            let mut w = vec![C64::new(0.0, 0.0); n];
            add_awgn(&mut w, spec, &mut r);
            dft.forward_in_place(&mut w).unwrap();
            per_bin.iter_mut().zip(&w).for_each(|(a, v)| *a += v.norm_sqr());
        }
        let mean = per_bin.iter().sum::<f64>() / (n * symbols) as f64;
        assert!((mean / 0.5 - 1.0).abs() < 0.03);
    }
}
