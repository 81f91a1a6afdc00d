//! Per-subcarrier detectors.
//!
//! The Gaussian-elimination equalizer cancels the image term by forming
//! `z(k) - kappa z#(k)`, which leaves `(mu H(k) - kappa conj(nu) H(k)) s(k)`
//! plus noise, then divides by that gain. With the reciprocal gains
//! precomputed once per frame this costs two complex multiplies per bin.

use crate::error::{Error, Result};
use crate::estimation::{ChannelEstimate, FdEstimate};
use crate::iq::IqParams;
use crate::spectral::{check_len, mirror_index, C64};

/// Gains below this magnitude mark a bin as erased.
pub const ERASURE_EPS: f64 = 1e-12;

/// Receives counts of complex multiplications.
pub trait MulCounter {
    fn count(&mut self, muls: u64);
}

impl MulCounter for () {
    #[inline(always)]
    fn count(&mut self, _: u64) {}
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCount {
    pub complex_muls: u64,
}

impl MulCounter for OpCount {
    #[inline]
    fn count(&mut self, muls: u64) {
        self.complex_muls += muls;
    }
}

/// Detected symbols plus the bins that could not be equalized. Erased bins
/// hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub symbols: Vec<C64>,
    pub erased: Vec<bool>,
}

impl Equalized {
    pub fn erasures(&self) -> usize {
        self.erased.iter().filter(|e| **e).count()
    }
}

fn reciprocal(v: C64) -> Option<C64> {
    (v.norm() >= ERASURE_EPS).then(|| v.inv())
}

/// Per-frame coefficients of the Gaussian-elimination equalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GeCoefficients {
    kappa: C64,
    denominator: Vec<C64>,
    inv_denominator: Vec<Option<C64>>,
}

impl GeCoefficients {
    pub fn new(kappa: C64, mu_freq: &[C64], nu_star_freq: &[C64]) -> Result<Self> {
        check_len(mu_freq.len(), nu_star_freq.len())?;
        let denominator: Vec<C64> = mu_freq
            .iter()
            .zip(nu_star_freq)
            .map(|(a, b)| a - kappa * b)
            .collect();
        let inv_denominator = denominator.iter().copied().map(reciprocal).collect();
        Ok(Self {
            kappa,
            denominator,
            inv_denominator,
        })
    }

    pub fn from_estimate(est: &ChannelEstimate) -> Result<Self> {
        Self::new(est.kappa(), est.mu_freq(), est.nu_star_freq())
    }

    pub fn kappa(&self) -> C64 {
        self.kappa
    }

    /// `mu H(k) - kappa conj(nu) H(k)` per bin.
    pub fn denominator(&self) -> &[C64] {
        &self.denominator
    }

    pub fn equalize(&self, z: &[C64]) -> Result<Equalized> {
        self.equalize_counted(z, &mut ())
    }

    pub fn equalize_counted<M: MulCounter>(&self, z: &[C64], ops: &mut M) -> Result<Equalized> {
        let n = self.denominator.len();
        check_len(n, z.len())?;
        let mut symbols = Vec::with_capacity(n);
        let mut erased = Vec::with_capacity(n);
        for (k, inv) in self.inv_denominator.iter().enumerate() {
            match inv {
                Some(inv) => {
                    let image = z[mirror_index(k, n)].conj();
                    let cleaned = z[k] - self.kappa * image;
                    symbols.push(cleaned * inv);
                    ops.count(2);
                    erased.push(false);
                }
                None => {
                    symbols.push(C64::new(0.0, 0.0));
                    erased.push(true);
                }
            }
        }
        Ok(Equalized { symbols, erased })
    }
}

pub fn ge_equalize(z: &[C64], est: &ChannelEstimate) -> Result<Equalized> {
    GeCoefficients::from_estimate(est)?.equalize(z)
}

/// Per-frame inverse of the mirror-pair model behind the post-FFT LS
/// equalizer.
///
/// Bin `k` and its mirror `m` satisfy
/// `[z(k); conj(z(m))] = [[a(k), b(k)]; [conj(b(m)), conj(a(m))]] [s(k); conj(s(m))]`,
/// so each bin is recovered by a 2x2 solve. DC and Nyquist are their own
/// mirrors and fall out of the same formula.
#[derive(Debug, Clone, PartialEq)]
pub struct PostFftLs {
    // s(k) = w0 z(k) + w1 conj(z(m))
    weights: Vec<Option<(C64, C64)>>,
}

impl PostFftLs {
    pub fn new(fd: &FdEstimate) -> Result<Self> {
        let n = fd.a.len();
        check_len(n, fd.b.len())?;
        let weights = (0..n)
            .map(|k| {
                let m = mirror_index(k, n);
                let (a, b) = (fd.a[k], fd.b[k]);
                let (a_img, b_img) = (fd.a[m].conj(), fd.b[m].conj());
                let det = a * a_img - b * b_img;
                (det.norm() >= ERASURE_EPS).then(|| {
                    let inv = det.inv();
                    (a_img * inv, -b * inv)
                })
            })
            .collect();
        Ok(Self { weights })
    }

    pub fn equalize(&self, z: &[C64]) -> Result<Equalized> {
        let n = self.weights.len();
        check_len(n, z.len())?;
        let mut symbols = Vec::with_capacity(n);
        let mut erased = Vec::with_capacity(n);
        for (k, w) in self.weights.iter().enumerate() {
            match w {
                Some((w0, w1)) => {
                    symbols.push(w0 * z[k] + w1 * z[mirror_index(k, n)].conj());
                    erased.push(false);
                }
                None => {
                    symbols.push(C64::new(0.0, 0.0));
                    erased.push(true);
                }
            }
        }
        Ok(Equalized { symbols, erased })
    }
}

pub fn postfft_ls_equalize(z: &[C64], fd: &FdEstimate) -> Result<Equalized> {
    PostFftLs::new(fd)?.equalize(z)
}

/// Plain zero-forcing against the link response, ignoring any image.
pub fn ideal_zf_equalize(z: &[C64], link_response: &[C64]) -> Result<Equalized> {
    check_len(link_response.len(), z.len())?;
    let mut symbols = Vec::with_capacity(z.len());
    let mut erased = Vec::with_capacity(z.len());
    for (v, h) in z.iter().zip(link_response) {
        match reciprocal(*h) {
            Some(inv) => {
                symbols.push(v * inv);
                erased.push(false);
            }
            None => {
                symbols.push(C64::new(0.0, 0.0));
                erased.push(true);
            }
        }
    }
    Ok(Equalized { symbols, erased })
}

/// SNR loss of the GE detector relative to a balanced receiver, in dB:
///
/// ```text
/// 10 log10( (1 + |kappa|^2) / (|mu|^2 - 2 Re(kappa conj(nu) mu) + |kappa|^2 |nu|^2) )
/// ```
pub fn snr_loss_ge(p: &IqParams, kappa: C64) -> Result<f64> {
    let (mu, nu) = (p.mu(), p.nu());
    let num = 1.0 + kappa.norm_sqr();
    let den = mu.norm_sqr() - 2.0 * (kappa * nu.conj() * mu).re + kappa.norm_sqr() * nu.norm_sqr();
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "SNR-loss denominator {den} is not positive (theta = {:.3} deg, alpha = {:.4})",
            p.theta_deg(),
            p.alpha()
        )));
    }
    Ok(10.0 * (num / den).log10())
}
