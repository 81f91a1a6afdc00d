//! Monte-Carlo check of the estimator error against its closed form.

use super::config::SimConfig;
use super::exec::Executor;
use super::link::{frame_rng, Link, Stream};
use crate::channel::{draw_cir, NoiseSpec};
use crate::error::Result;
use crate::estimation::{fd_ls_estimate, fd_training_symbols, predict_mse, Observation, TdLsEstimator};
use crate::ofdm::OfdmModem;
use crate::pilot::build_pilot_pair;
use crate::spectral::{energy, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct MseRecord {
    /// Pilot SNR: mean pilot-template power over the noise variance.
    pub snr_db: f64,
    pub trials: usize,
    pub n: usize,
    pub taps: usize,
    pub training_symbols: usize,
    pub noise_var: f64,
    /// Per-bin MSE of the TD-LS `mu H` estimate.
    pub mse_mu: f64,
    /// Per-bin MSE of the TD-LS `conj(nu) H` estimate.
    pub mse_nu: f64,
    /// Per-bin MSE of the FD-LS `mu H` estimate at the same noise level.
    pub mse_fd: f64,
    pub predicted: f64,
}

impl MseRecord {
    pub fn ratio_mu(&self) -> f64 {
        self.mse_mu / self.predicted
    }

    pub fn ratio_nu(&self) -> f64 {
        self.mse_nu / self.predicted
    }

    /// How much less noisy TD-LS is than the per-bin baseline.
    pub fn suppression(&self) -> f64 {
        self.mse_fd / self.mse_mu
    }
}

fn per_bin_error(est: &[C64], truth: &[C64]) -> f64 {
    est.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / est.len() as f64
}

pub fn run_mse_check(cfg: &SimConfig, trials: usize) -> Result<Vec<MseRecord>> {
    run_mse_check_with(cfg, trials, &Executor::new(cfg.workers())?)
}

/// For every SNR in `cfg.snr_db`, estimates the channel `trials` times from
/// fresh channel and noise draws and averages the per-bin squared errors.
///
/// The FD-LS baseline uses `cfg.nt()` unit-power training symbols, so its
/// per-symbol energy matches the pilot symbols.
pub fn run_mse_check_with(cfg: &SimConfig, trials: usize, exec: &Executor) -> Result<Vec<MseRecord>> {
    cfg.validate()?;
    let n = cfg.ofdm.n;
    let modem = OfdmModem::new(&cfg.ofdm)?;
    let pilots = build_pilot_pair(
        n,
        &cfg.pilot,
        &mut frame_rng(cfg.pilot_seed, u64::MAX >> 3, Stream::Training),
    )?;
    let td = TdLsEstimator::new(&pilots, cfg.taps)?;
    let iq = cfg.iq_params();
    let pilot_power = pilots.mean_template_power();
    let constellation = cfg.ofdm.modulation.points();
    let nt = cfg.nt();

    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for &snr_db in &cfg.snr_db {
        let noise = NoiseSpec::from_snr_db(snr_db, pilot_power)?;
        let errors = exec.map(0..trials as u64, |t| {
            let cir = draw_cir(
                &cfg.profile,
                cfg.ofdm.sample_period(),
                cfg.taps,
                &mut frame_rng(cfg.seed, t, Stream::Channel),
            )?;
            let link = Link { modem: &modem, cir: &cir, noise };
            let hl = cir.link_response(modem.dft())?;
            let mu_h: Vec<C64> = hl.iter().map(|h| iq.mu() * h).collect();
            let nu_h: Vec<C64> = hl.iter().map(|h| iq.nu().conj() * h).collect();

            let mut rng = frame_rng(cfg.seed, t, Stream::TrainingNoise);
            let z1 = link.receive(pilots.s1(), &iq, &mut rng)?;
            let z2 = link.receive(pilots.s2(), &iq, &mut rng)?;
            let est = td.estimate(&z1, &z2)?;

            let training = fd_training_symbols(n, nt, 1.0, &mut frame_rng(cfg.seed, t, Stream::Training))?;
            let received = training
                .iter()
                .map(|s| link.receive(s, &iq, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let obs: Vec<Observation<'_>> = received
                .iter()
                .zip(&training)
                .map(|(r, s)| Observation { received: r, sent: s })
                .collect();
            let fd = fd_ls_estimate(&obs)?;
            Ok([
                per_bin_error(est.mu_freq(), &mu_h),
                per_bin_error(est.nu_star_freq(), &nu_h),
                per_bin_error(&fd.a, &mu_h),
            ])
        })?;
        let mut sums = [0.0; 3];
        for e in &errors {
            for (s, v) in sums.iter_mut().zip(e) {
                *s += v;
            }
        }
        let m = trials.max(1) as f64;
        out.push(MseRecord {
            snr_db,
            trials,
            n,
            taps: cfg.taps,
            training_symbols: nt,
            noise_var: noise.variance(),
            mse_mu: sums[0] / m,
            mse_nu: sums[1] / m,
            mse_fd: sums[2] / m,
            predicted: predict_mse(n, cfg.taps, 10f64.powf(snr_db / 10.0), &constellation),
        });
    }
    Ok(out)
}

/// Per-symbol energy of the pilot pair and of one FD-LS training symbol.
pub fn training_energies(cfg: &SimConfig) -> Result<(f64, f64)> {
    let pilots = build_pilot_pair(
        cfg.ofdm.n,
        &cfg.pilot,
        &mut frame_rng(cfg.pilot_seed, u64::MAX >> 3, Stream::Training),
    )?;
    let fd = fd_training_symbols(cfg.ofdm.n, 1, 1.0, &mut frame_rng(cfg.seed, 0, Stream::Training))?;
    Ok((energy(pilots.s1()), energy(&fd[0])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_estimates_are_exact() {
        let cfg = SimConfig {
            snr_db: vec![300.0],
            ..SimConfig::default()
        };
        let r = &run_mse_check_with(&cfg, 5, &Executor::sequential()).unwrap()[0];
        assert!(r.mse_mu < 1e-20 && r.mse_nu < 1e-20 && r.mse_fd < 1e-20, "{r:?}");
    }

    #[test]
    fn pilot_and_training_energy_are_comparable() {
        let (p, t) = training_energies(&SimConfig::default()).unwrap();
        assert!((p / t - 1.0).abs() < 0.05, "{p} {t}");
    }
}
