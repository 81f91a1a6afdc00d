//! Channel and IQ-parameter estimation from training symbols.
//!
//! [`TdLsEstimator`] fits the `L + 1` time-domain taps of `mu h` and
//! `conj(nu) h` from the two-symbol pilot pattern of [`crate::pilot`]. Fitting
//! taps rather than bins averages the noise of all `N` bins into `L + 1`
//! coefficients. [`fd_ls_estimate`] is the per-bin baseline: it fits
//! `z(k) = a(k) s(k) + b(k) s#(k)` independently on every bin from full-band
//! training symbols.

use rand::Rng;

use crate::channel::Cir;
use crate::error::{Error, Result};
use crate::iq::IqParams;
use crate::ofdm::qpsk_map;
use crate::pilot::PilotPair;
use crate::spectral::{check_len, mirror, mirror_index, Dft, C64};

const KAPPA_EPS: f64 = 1e-12;

/// Estimated `mu h`, `conj(nu) h`, their link responses and `kappa`.
///
/// Tap vectors and responses are on the link scale: the responses are the
/// per-subcarrier gains a unitary-FFT receiver observes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    mu_h: Vec<C64>,
    nu_star_h: Vec<C64>,
    mu_freq: Vec<C64>,
    nu_star_freq: Vec<C64>,
    kappa: C64,
}

impl ChannelEstimate {
    /// Builds an estimate from tap vectors; `kappa` is taken as given.
    pub fn from_taps(mu_h: Vec<C64>, nu_star_h: Vec<C64>, kappa: C64, dft: &Dft) -> Result<Self> {
        let mu_freq = dft.forward_padded(&mu_h)?;
        let nu_star_freq = dft.forward_padded(&nu_star_h)?;
        Ok(Self {
            mu_h,
            nu_star_h,
            mu_freq,
            nu_star_freq,
            kappa,
        })
    }

    /// The exact quantities for a known channel and front end.
    pub fn genie(p: &IqParams, h: &Cir, dft: &Dft) -> Result<Self> {
        let root_n = (dft.len() as f64).sqrt();
        let mu_h = h.taps().iter().map(|t| p.mu() * t * root_n).collect();
        let nu_star_h = h.taps().iter().map(|t| p.nu().conj() * t * root_n).collect();
        Self::from_taps(mu_h, nu_star_h, p.kappa(), dft)
    }

    pub fn mu_h(&self) -> &[C64] {
        &self.mu_h
    }

    pub fn nu_star_h(&self) -> &[C64] {
        &self.nu_star_h
    }

    /// Per-bin `mu H(k)`.
    pub fn mu_freq(&self) -> &[C64] {
        &self.mu_freq
    }

    /// Per-bin `conj(nu) H(k)`.
    pub fn nu_star_freq(&self) -> &[C64] {
        &self.nu_star_freq
    }

    pub fn kappa(&self) -> C64 {
        self.kappa
    }

    pub fn with_kappa(mut self, kappa: C64) -> Self {
        self.kappa = kappa;
        self
    }
}

/// Stacks the observations of `mu H` from the two received pilot spectra:
/// bins `1..N/2` of symbol 1, bins `N/2+1..N` of symbol 2, and the DC and
/// Nyquist tone combinations `(z1 - j z2) / 2`.
pub fn assemble_za(z1: &[C64], z2: &[C64]) -> Result<Vec<C64>> {
    check_len(z1.len(), z2.len())?;
    let n = z1.len();
    let half = n / 2;
    let mj = C64::new(0.0, -0.5);
    let mut out = Vec::with_capacity(n);
    out.push(mj * z2[0] + 0.5 * z1[0]);
    out.extend_from_slice(&z1[1..half]);
    out.push(mj * z2[half] + 0.5 * z1[half]);
    out.extend_from_slice(&z2[half + 1..]);
    Ok(out)
}

/// Stacks the image observations (bins `1..N/2` of symbol 2, bins
/// `N/2+1..N` of symbol 1, tones combined as `(z1 + j z2) / 2`) and mirrors
/// the result, giving observations of `conj(nu) H`.
pub fn assemble_zb(z1: &[C64], z2: &[C64]) -> Result<Vec<C64>> {
    check_len(z1.len(), z2.len())?;
    let n = z1.len();
    let half = n / 2;
    let pj = C64::new(0.0, 0.5);
    let mut stacked = Vec::with_capacity(n);
    stacked.push(pj * z2[0] + 0.5 * z1[0]);
    stacked.extend_from_slice(&z2[1..half]);
    stacked.push(pj * z2[half] + 0.5 * z1[half]);
    stacked.extend_from_slice(&z1[half + 1..]);
    Ok(mirror(&stacked))
}

/// `kappa = nu / conj(mu)` from the tap estimates.
///
/// `sum(conj(nu) h) / sum(mu h)` equals `conj(nu) / mu`, the conjugate of
/// `kappa`, so the ratio is conjugated before returning.
pub fn kappa_from_taps(mu_h: &[C64], nu_star_h: &[C64]) -> Result<C64> {
    let den: C64 = mu_h.iter().sum();
    if den.norm() < KAPPA_EPS {
        return Err(Error::DegenerateKappa(den.norm()));
    }
    let num: C64 = nu_star_h.iter().sum();
    Ok((num / den).conj())
}

/// The same ratio formed from sums over frequency bins. Equal to
/// [`kappa_from_taps`] only without noise: a bin sum weights the first tap,
/// a tap sum weights the DC bin.
pub fn kappa_from_spectrum(mu_freq: &[C64], nu_star_freq: &[C64]) -> Result<C64> {
    kappa_from_taps(mu_freq, nu_star_freq)
}

/// Time-domain least-squares estimator bound to one pilot pair.
#[derive(Debug, Clone)]
pub struct TdLsEstimator {
    taps: usize,
    dft: Dft,
    inv_direct: Vec<C64>,
    inv_image: Vec<C64>,
}

impl TdLsEstimator {
    /// `taps` is the channel length `L + 1`.
    pub fn new(pair: &PilotPair, taps: usize) -> Result<Self> {
        let n = pair.n();
        if taps == 0 || taps > n {
            return Err(Error::Config(format!("channel length {taps} must lie in 1..={n}")));
        }
        let invert = |t: Vec<C64>| -> Result<Vec<C64>> {
            t.into_iter()
                .enumerate()
                .map(|(k, v)| {
                    if v.norm_sqr() == 0.0 {
                        Err(Error::ZeroPilot(k))
                    } else {
                        Ok(v.inv())
                    }
                })
                .collect()
        };
        Ok(Self {
            taps,
            dft: Dft::new(n)?,
            inv_direct: invert(pair.direct_template())?,
            inv_image: invert(pair.image_template())?,
        })
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    fn fit_taps(&self, mut stacked: Vec<C64>, inv: &[C64]) -> Result<Vec<C64>> {
        stacked.iter_mut().zip(inv).for_each(|(v, w)| *v *= w);
        self.dft.inverse_in_place(&mut stacked)?;
        stacked.truncate(self.taps);
        Ok(stacked)
    }

    /// Estimates from the received spectra of pilot symbols 1 and 2.
    pub fn estimate(&self, z1: &[C64], z2: &[C64]) -> Result<ChannelEstimate> {
        check_len(self.dft.len(), z1.len())?;
        let mu_h = self.fit_taps(assemble_za(z1, z2)?, &self.inv_direct)?;
        let nu_star_h = self.fit_taps(assemble_zb(z1, z2)?, &self.inv_image)?;
        let kappa = kappa_from_taps(&mu_h, &nu_star_h)?;
        ChannelEstimate::from_taps(mu_h, nu_star_h, kappa, &self.dft)
    }
}

/// One-shot form of [`TdLsEstimator::estimate`].
pub fn td_ls_estimate(z1: &[C64], z2: &[C64], pair: &PilotPair, taps: usize) -> Result<ChannelEstimate> {
    TdLsEstimator::new(pair, taps)?.estimate(z1, z2)
}

/// `E|s|^2 * E|1/s|^2` over the constellation; 1 for any constant-modulus
/// alphabet.
pub fn beta(constellation: &[C64]) -> f64 {
    let m = constellation.len() as f64;
    let power = constellation.iter().map(|s| s.norm_sqr()).sum::<f64>() / m;
    let inv_power = constellation.iter().map(|s| s.norm_sqr().recip()).sum::<f64>() / m;
    power * inv_power
}

/// Predicted per-bin MSE of the TD-LS response estimates,
/// `(L + 1) beta / (N gamma)`, with `gamma` the linear SNR referred to the
/// pilot power.
pub fn predict_mse(n: usize, taps: usize, gamma: f64, constellation: &[C64]) -> f64 {
    taps as f64 * beta(constellation) / (n as f64 * gamma)
}

/// Per-bin fit of `z(k) = a(k) s(k) + b(k) s#(k)`: `a` estimates `mu H`
/// and `b` estimates `nu H#`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl FdEstimate {
    /// The exact coefficients for a known link response and front end.
    pub fn genie(p: &IqParams, link_response: &[C64]) -> Self {
        Self {
            a: link_response.iter().map(|h| p.mu() * h).collect(),
            b: mirror(link_response).iter().map(|h| p.nu() * h).collect(),
        }
    }
}

/// A received training spectrum together with the symbol that was sent.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub received: &'a [C64],
    pub sent: &'a [C64],
}

/// Least-squares fit of the two-coefficient per-bin model over all
/// training observations.
pub fn fd_ls_estimate(training: &[Observation<'_>]) -> Result<FdEstimate> {
    let n = training.first().map(|o| o.sent.len()).unwrap_or(0);
    if training.len() < 2 {
        return Err(Error::SingularFit(0));
    }
    for o in training {
        check_len(n, o.sent.len())?;
        check_len(n, o.received.len())?;
    }
    let images: Vec<Vec<C64>> = training.iter().map(|o| mirror(o.sent)).collect();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        // Normal equations G [a b]^T = c with rows r_i = [s_i(k), s_i#(k)].
        let (mut g00, mut g11, mut g01) = (0.0, 0.0, C64::new(0.0, 0.0));
        let (mut c0, mut c1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (o, img) in training.iter().zip(&images) {
            let (s, si, z) = (o.sent[k], img[k], o.received[k]);
            g00 += s.norm_sqr();
            g11 += si.norm_sqr();
            g01 += s.conj() * si;
            c0 += s.conj() * z;
            c1 += si.conj() * z;
        }
        let det = g00 * g11 - g01.norm_sqr();
        if !(det > 1e-10 * g00 * g11) {
            return Err(Error::SingularFit(k));
        }
        a.push((g11 * c0 - g01 * c1) / det);
        b.push((g00 * c1 - g01.conj() * c0) / det);
    }
    Ok(FdEstimate { a, b })
}

/// Full-band QPSK training symbols at per-bin power `power`, arranged so
/// every bin's design is well conditioned.
///
/// Symbols come in pairs sharing a random base vector `c`; the second of
/// each pair negates the upper half of the band and rotates DC and Nyquist
/// by `j`, which makes the two columns of every per-bin design orthogonal.
/// An odd count ends with an unpaired base vector.
pub fn fd_training_symbols<R: Rng + ?Sized>(n: usize, count: usize, power: f64, rng: &mut R) -> Result<Vec<Vec<C64>>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(n));
    }
    let scale = power.sqrt();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
        let base: Vec<C64> = qpsk_map(&bits)?.into_iter().map(|v| v * scale).collect();
        let mut partner = base.clone();
        for (k, v) in partner.iter_mut().enumerate() {
            if mirror_index(k, n) == k {
                *v *= C64::new(0.0, 1.0);
            } else if k > n / 2 {
                *v = -*v;
            }
        }
        out.push(base);
        if out.len() < count {
            out.push(partner);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, draw_cir, PowerDelayProfile};
    use crate::iq::distort_freq;
    use crate::ofdm::Modulation;
    use crate::pilot::{build_pilot_pair, PilotConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const N: usize = 64;
    const TAPS: usize = 8;

    struct Scene {
        p: IqParams,
        h: Cir,
        hl: Vec<C64>,
        dft: Dft,
    }

    fn scene(theta: f64, db: f64, seed: u64) -> Scene {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = PowerDelayProfile::new(
            (0..TAPS).map(|i| i as f64 * 1e-6).collect(),
            (0..TAPS).map(|i| (-(i as f64) / 3.0).exp()).collect(),
        )
        .unwrap();
        let h = draw_cir(&profile, 1e-6, TAPS, &mut rng).unwrap();
        let dft = Dft::new(N).unwrap();
        let hl = h.link_response(&dft).unwrap();
        Scene { p: IqParams::from_degrees_db(theta, db), h, hl, dft }
    }

    /// Noiseless received spectrum straight from the frequency-domain model
    /// `z = mu H s + nu H# s#`.
    fn receive(sc: &Scene, s: &[C64]) -> Vec<C64> {
        let y: Vec<C64> = sc.hl.iter().zip(s).map(|(h, v)| h * v).collect();
        distort_freq(&y, &sc.p)
    }

    fn pair(seed: u64) -> PilotPair {
        build_pilot_pair(N, &PilotConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn max_err(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn stacked_observations_match_forward_model() {
        let sc = scene(20.0, 4.0, 1);
        let pp = pair(2);
        let z1 = receive(&sc, pp.s1());
        let z2 = receive(&sc, pp.s2());
        let za = assemble_za(&z1, &z2).unwrap();
        let expected_a: Vec<C64> = pp.direct_template().iter().zip(&sc.hl).map(|(t, h)| t * sc.p.mu() * h).collect();
        assert!(max_err(&za, &expected_a) < 1e-10);
        let zb = assemble_zb(&z1, &z2).unwrap();
        let expected_b: Vec<C64> =
            pp.image_template().iter().zip(&sc.hl).map(|(t, h)| t * sc.p.nu().conj() * h).collect();
        assert!(max_err(&zb, &expected_b) < 1e-10);
        assert_eq!(mirror(&mirror(&zb)), zb);
    }

    #[test]
    fn zero_inputs_and_no_image() {
        let z = vec![C64::new(0.0, 0.0); N];
        assert!(assemble_za(&z, &z).unwrap().iter().all(|v| v.norm() == 0.0));
        let sc = scene(0.0, 0.0, 3);
        let pp = pair(4);
        let zb = assemble_zb(&receive(&sc, pp.s1()), &receive(&sc, pp.s2())).unwrap();
        assert!(zb.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn flat_channel_reproduces_template() {
        let mut sc = scene(0.0, 0.0, 5);
        sc.h = Cir::impulse(1);
        sc.hl = sc.h.link_response(&sc.dft).unwrap();
        let pp = pair(6);
        let za = assemble_za(&receive(&sc, pp.s1()), &receive(&sc, pp.s2())).unwrap();
        assert!(max_err(&za, &pp.direct_template()) < 1e-12);
    }

    #[test]
    fn noiseless_recovery() {
        for (theta, db) in [(2.0, 1.0), (20.0, 4.0), (30.0, 6.0)] {
            let sc = scene(theta, db, 7);
            let pp = pair(8);
            let est = td_ls_estimate(&receive(&sc, pp.s1()), &receive(&sc, pp.s2()), &pp, TAPS).unwrap();
            let genie = ChannelEstimate::genie(&sc.p, &sc.h, &sc.dft).unwrap();
            assert!(max_err(est.mu_h(), genie.mu_h()) < 1e-9);
            assert!(max_err(est.nu_star_h(), genie.nu_star_h()) < 1e-9);
            assert!(max_err(est.mu_freq(), genie.mu_freq()) < 1e-9);
            assert!((est.kappa() - sc.p.kappa()).norm() < 1e-9);
            let from_bins = kappa_from_spectrum(est.mu_freq(), est.nu_star_freq()).unwrap();
            assert!((from_bins - est.kappa()).norm() < 1e-12);
        }
    }

    #[test]
    fn balanced_receiver_estimates_no_image() {
        let sc = scene(0.0, 0.0, 9);
        let pp = pair(10);
        let est = td_ls_estimate(&receive(&sc, pp.s1()), &receive(&sc, pp.s2()), &pp, TAPS).unwrap();
        assert!(est.nu_star_h().iter().all(|v| v.norm() < 1e-12));
        assert!(est.kappa().norm() < 1e-12);
    }

    #[test]
    fn degenerate_kappa_is_an_error() {
        let mu = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        assert!(matches!(kappa_from_taps(&mu, &mu), Err(Error::DegenerateKappa(_))));
    }

    #[test]
    fn estimator_is_unbiased() {
        let sc = scene(20.0, 4.0, 11);
        let pp = pair(12);
        let est = TdLsEstimator::new(&pp, TAPS).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sigma2 = 0.5;
        let trials = 10_000;
        let clean1 = receive(&sc, pp.s1());
        let clean2 = receive(&sc, pp.s2());
        let mut sum = vec![C64::new(0.0, 0.0); TAPS];
        let mut sq = vec![0.0; TAPS];
        let genie = ChannelEstimate::genie(&sc.p, &sc.h, &sc.dft).unwrap();
        for _ in 0..trials {
            let z1: Vec<C64> = clean1.iter().map(|v| v + complex_gaussian(&mut rng, sigma2)).collect();
            let z2: Vec<C64> = clean2.iter().map(|v| v + complex_gaussian(&mut rng, sigma2)).collect();
            let e = est.estimate(&z1, &z2).unwrap();
            for (i, v) in e.mu_h().iter().enumerate() {
                sum[i] += v;
                sq[i] += (v - genie.mu_h()[i]).norm_sqr();
            }
        }
        for i in 0..TAPS {
            let mean = sum[i] / trials as f64;
            let stderr = (sq[i] / trials as f64 / trials as f64).sqrt();
            assert!((mean - genie.mu_h()[i]).norm() < 3.0 * stderr);
        }
    }

    #[test]
    fn mse_prediction_arithmetic() {
        let qpsk = Modulation::Qpsk.points();
        assert!((beta(&qpsk) - 1.0).abs() < 1e-15);
        assert!((predict_mse(128, 16, 10.0, &qpsk) - 0.0125).abs() < 1e-15);
        assert!((predict_mse(256, 16, 10.0, &qpsk) - 0.00625).abs() < 1e-15);
        let two_level = [C64::new(1.0, 0.0), C64::new(3.0, 0.0)];
        assert!((beta(&two_level) - 5.0 * (1.0 + 1.0 / 9.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn fd_ls_noiseless_recovery() {
        let sc = scene(20.0, 4.0, 14);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let train = fd_training_symbols(N, 2, 1.0, &mut rng).unwrap();
        let rx: Vec<Vec<C64>> = train.iter().map(|s| receive(&sc, s)).collect();
        let obs: Vec<Observation> = rx.iter().zip(&train).map(|(r, s)| Observation { received: r, sent: s }).collect();
        let fd = fd_ls_estimate(&obs).unwrap();
        let exact = FdEstimate::genie(&sc.p, &sc.hl);
        assert!(max_err(&fd.a, &exact.a) < 1e-10);
        assert!(max_err(&fd.b, &exact.b) < 1e-10);

        let flat = scene(0.0, 0.0, 16);
        let rx: Vec<Vec<C64>> = train.iter().map(|s| receive(&flat, s)).collect();
        let obs: Vec<Observation> = rx.iter().zip(&train).map(|(r, s)| Observation { received: r, sent: s }).collect();
        assert!(fd_ls_estimate(&obs).unwrap().b.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn fd_ls_rank_deficiency() {
        let s = vec![C64::new(1.0, 0.0); N];
        let z = vec![C64::new(0.5, 0.0); N];
        let one = [Observation { received: &z, sent: &s }];
        assert!(matches!(fd_ls_estimate(&one), Err(Error::SingularFit(_))));
        let repeated = [one[0], one[0]];
        assert!(matches!(fd_ls_estimate(&repeated), Err(Error::SingularFit(_))));
    }

    #[test]
    fn fd_ls_variance_scales_inversely_with_training() {
        let sc = scene(20.0, 4.0, 17);
        let exact = FdEstimate::genie(&sc.p, &sc.hl);
        let sigma2 = 0.1;
        let trials = 2_000;
        let mut mse = Vec::new();
        for count in [2usize, 4, 8] {
            let mut rng = ChaCha8Rng::seed_from_u64(18 + count as u64);
            let mut acc = 0.0;
            for _ in 0..trials {
                let train = fd_training_symbols(N, count, 1.0, &mut rng).unwrap();
                let rx: Vec<Vec<C64>> = train
                    .iter()
                    .map(|s| receive(&sc, s).into_iter().map(|v| v + complex_gaussian(&mut rng, sigma2)).collect())
                    .collect();
                let obs: Vec<Observation> =
                    rx.iter().zip(&train).map(|(r, s)| Observation { received: r, sent: s }).collect();
                let fd = fd_ls_estimate(&obs).unwrap();
                acc += fd.a.iter().zip(&exact.a).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() / N as f64;
            }
            mse.push(acc / trials as f64);
        }
        // Orthogonal unit-power pairs: var(a) = sigma^2 / N_T.
        for (m, count) in mse.iter().zip([2.0, 4.0, 8.0]) {
            let expected = sigma2 / count;
            assert!((m / expected - 1.0).abs() < 0.05, "N_T={count}: {m} vs {expected}");
        }
    }
}
