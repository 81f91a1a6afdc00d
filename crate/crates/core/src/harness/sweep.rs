//! BER-versus-SNR Monte Carlo.

use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;

use super::config::{Scheme, SimConfig};
use super::exec::Executor;
use super::link::{frame_rng, random_bits, Link, Stream};
use crate::channel::{draw_cir, Cir, NoiseSpec};
use crate::equalization::{ideal_zf_equalize, Equalized, GeCoefficients, PostFftLs};
use crate::error::{Error, Result};
use crate::estimation::{fd_ls_estimate, fd_training_symbols, ChannelEstimate, FdEstimate, Observation, TdLsEstimator};
use crate::iq::IqParams;
use crate::ofdm::{qpsk_bit_errors, qpsk_map, OfdmModem};
use crate::pilot::{build_pilot_pair, PilotPair};
use crate::spectral::C64;

/// Frames simulated between early-stop checks.
pub const BATCH_FRAMES: u64 = 32;

/// One point of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub theta_deg: f64,
    pub alpha_db: f64,
    pub n: usize,
    pub cp: usize,
    pub frames: u64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Data bins that could not be equalized; each counts one bit error.
    pub erasures: u64,
    pub seed: u64,
    pub early_stopped: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub bits: u64,
    pub errors: u64,
    pub erasures: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        self.bits += o.bits;
        self.errors += o.errors;
        self.erasures += o.erasures;
    }
}

enum Detector {
    Ge(GeCoefficients),
    PostFft(PostFftLs),
    ZeroForcing(Vec<C64>),
    /// Estimation failed; every data bin of the frame is erased.
    Lost,
}

impl Detector {
    fn detect(&self, z: &[C64]) -> Result<Option<Equalized>> {
        Ok(match self {
            Detector::Ge(c) => Some(c.equalize(z)?),
            Detector::PostFft(p) => Some(p.equalize(z)?),
            Detector::ZeroForcing(h) => Some(ideal_zf_equalize(z, h)?),
            Detector::Lost => None,
        })
    }
}

/// Everything a frame needs that does not change across frames.
#[derive(Debug)]
pub struct SweepContext {
    cfg: SimConfig,
    modem: OfdmModem,
    pilots: PilotPair,
    td_ls: TdLsEstimator,
    iq: IqParams,
    data_bins: Vec<usize>,
}

impl SweepContext {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let modem = OfdmModem::new(&cfg.ofdm)?;
        let mut pilot_rng = frame_rng(cfg.pilot_seed, u64::MAX >> 3, Stream::Training);
        let pilots = build_pilot_pair(cfg.ofdm.n, &cfg.pilot, &mut pilot_rng)?;
        let td_ls = TdLsEstimator::new(&pilots, cfg.taps)?;
        let n = cfg.ofdm.n;
        let data_bins = (0..n)
            .filter(|&k| !(cfg.null_edges && (k == 0 || k == n / 2)))
            .collect();
        Ok(Self {
            cfg: cfg.clone(),
            modem,
            pilots,
            td_ls,
            iq: cfg.iq_params(),
            data_bins,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn pilots(&self) -> &PilotPair {
        &self.pilots
    }

    pub fn modem(&self) -> &OfdmModem {
        &self.modem
    }

    pub fn data_bins(&self) -> &[usize] {
        &self.data_bins
    }

    /// Bits carried by one frame's data symbols.
    pub fn bits_per_frame(&self) -> u64 {
        (2 * self.data_bins.len() * self.cfg.ofdm.data_symbols) as u64
    }

    pub fn draw_channel(&self, frame: u64) -> Result<Cir> {
        draw_cir(
            &self.cfg.profile,
            self.cfg.ofdm.sample_period(),
            self.cfg.taps,
            &mut frame_rng(self.cfg.seed, frame, Stream::Channel),
        )
    }

    fn train(&self, scheme: Scheme, link: &Link<'_>, frame: u64) -> Result<Detector> {
        let dft = self.modem.dft();
        let mut noise = frame_rng(self.cfg.seed, frame, Stream::TrainingNoise);
        match scheme {
            Scheme::Ideal | Scheme::None => Ok(Detector::ZeroForcing(link.cir.link_response(dft)?)),
            Scheme::TdLsFdGe => {
                let est = if self.cfg.genie_channel {
                    ChannelEstimate::genie(&self.iq, link.cir, dft)?
                } else {
                    let z1 = link.receive(self.pilots.s1(), &self.iq, &mut noise)?;
                    let z2 = link.receive(self.pilots.s2(), &self.iq, &mut noise)?;
                    match self.td_ls.estimate(&z1, &z2) {
                        Ok(est) => est,
                        Err(Error::DegenerateKappa(_)) => return Ok(Detector::Lost),
                        Err(e) => return Err(e),
                    }
                };
                let est = if self.cfg.genie_kappa {
                    est.with_kappa(self.iq.kappa())
                } else {
                    est
                };
                Ok(Detector::Ge(GeCoefficients::from_estimate(&est)?))
            }
            Scheme::FdLsPostFft => {
                let fd = if self.cfg.genie_channel {
                    FdEstimate::genie(&self.iq, &link.cir.link_response(dft)?)
                } else {
                    let mut sym_rng = frame_rng(self.cfg.seed, frame, Stream::Training);
                    let training = fd_training_symbols(self.cfg.ofdm.n, self.cfg.nt(), 1.0, &mut sym_rng)?;
                    let received = training
                        .iter()
                        .map(|s| link.receive(s, &self.iq, &mut noise))
                        .collect::<Result<Vec<_>>>()?;
                    let obs: Vec<Observation<'_>> = received
                        .iter()
                        .zip(&training)
                        .map(|(r, s)| Observation { received: r, sent: s })
                        .collect();
                    match fd_ls_estimate(&obs) {
                        Ok(fd) => fd,
                        Err(Error::SingularFit(_)) => return Ok(Detector::Lost),
                        Err(e) => return Err(e),
                    }
                };
                Ok(Detector::PostFft(PostFftLs::new(&fd)?))
            }
        }
    }

    /// Simulates one frame of `scheme` at the given noise level.
    pub fn run_frame(&self, scheme: Scheme, noise: NoiseSpec, frame: u64) -> Result<Tally> {
        let cir = self.draw_channel(frame)?;
        let link = Link {
            modem: &self.modem,
            cir: &cir,
            noise,
        };
        let iq = match scheme {
            Scheme::Ideal => IqParams::ideal(),
            _ => self.iq,
        };
        let detector = self.train(scheme, &link, frame)?;

        let mut data_rng: ChaCha8Rng = frame_rng(self.cfg.seed, frame, Stream::Data);
        let mut noise_rng = frame_rng(self.cfg.seed, frame, Stream::DataNoise);
        let mut tally = Tally::default();
        let n = self.cfg.ofdm.n;
        for _ in 0..self.cfg.ofdm.data_symbols {
            let bits = random_bits(&mut data_rng, 2 * self.data_bins.len());
            let mut spectrum = vec![C64::new(0.0, 0.0); n];
            for (&k, s) in self.data_bins.iter().zip(qpsk_map(&bits)?) {
                spectrum[k] = s;
            }
            let z = link.receive(&spectrum, &iq, &mut noise_rng)?;
            let eq = detector.detect(&z)?;
            for (i, &k) in self.data_bins.iter().enumerate() {
                let sent = &bits[2 * i..2 * i + 2];
                tally.bits += 2;
                match &eq {
                    Some(eq) if !eq.erased[k] => tally.errors += qpsk_bit_errors(eq.symbols[k], sent),
                    _ => {
                        tally.erasures += 1;
                        tally.errors += 1;
                    }
                }
            }
        }
        Ok(tally)
    }

    /// Runs one SNR point of one scheme.
    pub fn run_point(&self, scheme: Scheme, snr_db: f64, exec: &Executor) -> Result<BerRecord> {
        let start = Instant::now();
        let noise = NoiseSpec::from_snr_db(snr_db, 1.0)?;
        let total = self.cfg.frames as u64;
        let mut tally = Tally::default();
        let mut done = 0;
        let mut early_stopped = false;
        while done < total {
            let end = (done + BATCH_FRAMES).min(total);
            for t in exec.map(done..end, |f| self.run_frame(scheme, noise, f))? {
                tally += t;
            }
            done = end;
            if let Some(es) = self.cfg.early_stop {
                if done < total && tally.errors >= es.min_errors && tally.bits >= es.min_bits {
                    early_stopped = true;
                    break;
                }
            }
        }
        Ok(BerRecord {
            scheme,
            snr_db,
            theta_deg: if scheme == Scheme::Ideal { 0.0 } else { self.cfg.theta_deg },
            alpha_db: if scheme == Scheme::Ideal { 0.0 } else { self.cfg.alpha_db },
            n: self.cfg.ofdm.n,
            cp: self.cfg.ofdm.cp_len,
            frames: done,
            bits: tally.bits,
            errors: tally.errors,
            ber: tally.errors as f64 / tally.bits as f64,
            erasures: tally.erasures,
            seed: self.cfg.seed,
            early_stopped,
            wall_time: start.elapsed(),
        })
    }
}

/// Runs every configured scheme over the SNR grid using `cfg.jobs` workers.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    run_ber_sweep_with(cfg, &Executor::new(cfg.workers())?)
}

pub fn run_ber_sweep_with(cfg: &SimConfig, exec: &Executor) -> Result<Vec<BerRecord>> {
    let ctx = SweepContext::new(cfg)?;
    let mut out = Vec::with_capacity(cfg.schemes.len() * cfg.snr_db.len());
    for &scheme in &cfg.schemes {
        for &snr in &cfg.snr_db {
            out.push(ctx.run_point(scheme, snr, exec)?);
        }
    }
    Ok(out)
}
