//! SNR loss of the GE detector under perfect knowledge.

use super::config::SimConfig;
use super::link::{frame_rng, random_bits, Link, Stream};
use crate::channel::{complex_gaussian, draw_cir, Cir, NoiseSpec};
use crate::equalization::{ideal_zf_equalize, snr_loss_ge, GeCoefficients};
use crate::error::Result;
use crate::estimation::ChannelEstimate;
use crate::iq::IqParams;
use crate::ofdm::{qpsk_map, OfdmModem};
use crate::spectral::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub theta_deg: f64,
    pub alpha_db: f64,
    /// `None` where the closed form is undefined.
    pub loss_db: Option<f64>,
}

/// Evaluates the closed-form loss with the true `kappa` on a grid, theta
/// varying slowest.
pub fn run_snr_loss_surface(thetas: &[f64], alphas: &[f64]) -> Vec<SurfaceCell> {
    let mut out = Vec::with_capacity(thetas.len() * alphas.len());
    for &theta_deg in thetas {
        for &alpha_db in alphas {
            let p = IqParams::from_degrees_db(theta_deg, alpha_db);
            out.push(SurfaceCell {
                theta_deg,
                alpha_db,
                loss_db: snr_loss_ge(&p, p.kappa()).ok(),
            });
        }
    }
    out
}

/// Loss of GE with exact parameters, measured against a balanced receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LossCheck {
    pub theta_deg: f64,
    pub alpha_db: f64,
    pub snr_db: f64,
    pub symbols: u64,
    /// Channel-normalized error power of the balanced ZF receiver.
    pub ideal_var: f64,
    pub ge_var: f64,
    pub measured_db: f64,
    pub predicted_db: f64,
    /// `10 log10((1 + |kappa|^2) / |mu - kappa conj(nu)|^2)`.
    pub exact_db: f64,
}

/// Measures the GE error variance over at least `symbols` subcarrier
/// symbols.
///
/// Noise enters after the front end, `z = mu H s + nu H# s# + w`, which is
/// the model the closed form is written for. Both receivers see the same
/// `w`, and errors are scaled by the link response so the ratio is the
/// per-bin SNR loss.
pub fn run_snr_loss_check(cfg: &SimConfig, snr_db: f64, symbols: u64) -> Result<LossCheck> {
    cfg.validate()?;
    let n = cfg.ofdm.n;
    let modem = OfdmModem::new(&cfg.ofdm)?;
    let iq = cfg.iq_params();
    let noise = NoiseSpec::from_snr_db(snr_db, 1.0)?;
    let silent = NoiseSpec::new(0.0)?;
    let per_frame = (n * cfg.ofdm.data_symbols) as u64;
    let frames = symbols.div_ceil(per_frame);

    let (mut ideal_var, mut ge_var, mut count) = (0.0, 0.0, 0u64);
    for frame in 0..frames {
        let cir = cfg_channel(cfg, frame)?;
        let hl = cir.link_response(modem.dft())?;
        let link = Link { modem: &modem, cir: &cir, noise: silent };
        let ge = GeCoefficients::from_estimate(&ChannelEstimate::genie(&iq, &cir, modem.dft())?)?;
        let mut data = frame_rng(cfg.seed, frame, Stream::Data);
        let mut wrng = frame_rng(cfg.seed, frame, Stream::DataNoise);
        for _ in 0..cfg.ofdm.data_symbols {
            let s = qpsk_map(&random_bits(&mut data, 2 * n))?;
            let w: Vec<C64> = (0..n).map(|_| complex_gaussian(&mut wrng, noise.variance())).collect();
            let clean = link.receive(&s, &IqParams::ideal(), &mut wrng)?;
            let distorted = link.receive(&s, &iq, &mut wrng)?;
            let add = |y: Vec<C64>| -> Vec<C64> { y.iter().zip(&w).map(|(a, b)| a + b).collect() };
            let ideal = ideal_zf_equalize(&add(clean), &hl)?;
            let eq = ge.equalize(&add(distorted))?;
            for k in 0..n {
                if ideal.erased[k] || eq.erased[k] {
                    continue;
                }
                ideal_var += ((ideal.symbols[k] - s[k]) * hl[k]).norm_sqr();
                ge_var += ((eq.symbols[k] - s[k]) * hl[k]).norm_sqr();
                count += 1;
            }
        }
    }
    let kappa = iq.kappa();
    let exact = (1.0 + kappa.norm_sqr()) / (iq.mu() - kappa * iq.nu().conj()).norm_sqr();
    Ok(LossCheck {
        theta_deg: cfg.theta_deg,
        alpha_db: cfg.alpha_db,
        snr_db,
        symbols: count,
        ideal_var: ideal_var / count as f64,
        ge_var: ge_var / count as f64,
        measured_db: 10.0 * (ge_var / ideal_var).log10(),
        predicted_db: snr_loss_ge(&iq, kappa)?,
        exact_db: 10.0 * exact.log10(),
    })
}

fn cfg_channel(cfg: &SimConfig, frame: u64) -> Result<Cir> {
    draw_cir(
        &cfg.profile,
        cfg.ofdm.sample_period(),
        cfg.taps,
        &mut frame_rng(cfg.seed, frame, Stream::Channel),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_shape_and_ordering() {
        let cells = run_snr_loss_surface(&[0.0, 10.0], &[-1.0, 0.0, 1.0]);
        assert_eq!(cells.len(), 6);
        assert_eq!((cells[1].theta_deg, cells[1].alpha_db), (0.0, 0.0));
        assert_eq!(cells[1].loss_db, Some(0.0));
        assert_eq!(cells[3].theta_deg, 10.0);
    }

    #[test]
    fn balanced_front_end_has_no_loss() {
        let cfg = SimConfig {
            theta_deg: 0.0,
            alpha_db: 0.0,
            ..SimConfig::default()
        };
        let r = run_snr_loss_check(&cfg, 10.0, 5000).unwrap();
        assert!(r.measured_db.abs() < 1e-12, "{r:?}");
    }
}
