use approx::assert_relative_eq;
use iqofdm::channel::{draw_cir, NoiseSpec, PowerDelayProfile};
use iqofdm::equalization::{ge_equalize, postfft_ls_equalize, snr_loss_ge};
use iqofdm::estimation::{fd_ls_estimate, fd_training_symbols, td_ls_estimate, Observation};
use iqofdm::harness::{
    create_output, run_ber_sweep_with, run_snr_loss_surface, write_ber_csv, Executor, Link, Scheme, SimConfig,
    BER_HEADER,
};
use iqofdm::iq::IqParams;
use iqofdm::ofdm::{qpsk_map, OfdmConfig, OfdmModem};
use iqofdm::pilot::{build_pilot_pair, PilotConfig};
use iqofdm::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn both_receivers_invert_a_noiseless_link() {
    let ofdm = OfdmConfig::default();
    let modem = OfdmModem::new(&ofdm).unwrap();
    let iq = IqParams::from_degrees_db(15.0, -3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cir = draw_cir(&PowerDelayProfile::typical_urban(), ofdm.sample_period(), 16, &mut rng).unwrap();
    let link = Link { modem: &modem, cir: &cir, noise: NoiseSpec::new(0.0).unwrap() };

    let pilots = build_pilot_pair(ofdm.n, &PilotConfig::default(), &mut rng).unwrap();
    let z1 = link.receive(pilots.s1(), &iq, &mut rng).unwrap();
    let z2 = link.receive(pilots.s2(), &iq, &mut rng).unwrap();
    let td = td_ls_estimate(&z1, &z2, &pilots, 16).unwrap();

    let training = fd_training_symbols(ofdm.n, 2, 1.0, &mut rng).unwrap();
    let rx: Vec<Vec<C64>> = training.iter().map(|s| link.receive(s, &iq, &mut rng).unwrap()).collect();
    let obs: Vec<Observation<'_>> = rx.iter().zip(&training).map(|(r, s)| Observation { received: r, sent: s }).collect();
    let fd = fd_ls_estimate(&obs).unwrap();

    let bits: Vec<u8> = (0..2 * ofdm.n).map(|_| rng.random_range(0..2)).collect();
    let s = qpsk_map(&bits).unwrap();
    let z = link.receive(&s, &iq, &mut rng).unwrap();
    let a = ge_equalize(&z, &td).unwrap();
    let b = postfft_ls_equalize(&z, &fd).unwrap();
    for k in 0..ofdm.n {
        assert!((a.symbols[k] - s[k]).norm() < 1e-9);
        assert!((b.symbols[k] - a.symbols[k]).norm() < 1e-8);
    }
}

#[test]
fn compensation_beats_no_compensation() {
    let cfg = SimConfig {
        schemes: vec![Scheme::None, Scheme::TdLsFdGe, Scheme::FdLsPostFft],
        snr_db: vec![25.0],
        frames: 60,
        early_stop: None,
        ..SimConfig::default()
    };
    let r = run_ber_sweep_with(&cfg, &Executor::sequential()).unwrap();
    assert!(r[1].ber < r[0].ber / 3.0, "{:?} vs {:?}", r[1], r[0]);
    assert!(r[2].ber < r[0].ber, "{:?} vs {:?}", r[2], r[0]);
}

#[test]
fn more_training_helps_the_baseline() {
    let base = SimConfig {
        schemes: vec![Scheme::FdLsPostFft],
        snr_db: vec![8.0],
        frames: 150,
        early_stop: None,
        ..SimConfig::default()
    };
    let two = run_ber_sweep_with(&base, &Executor::sequential()).unwrap()[0].ber;
    let eight = run_ber_sweep_with(
        &SimConfig { training_symbols: Some(8), ..base.clone() },
        &Executor::sequential(),
    )
    .unwrap()[0]
        .ber;
    assert!(eight < two, "{eight} !< {two}");
}

#[test]
fn config_text_roundtrips_through_csv_preamble() {
    let cfg = SimConfig::from_text("snr_db = 0:5:10\nframes = 2\nscheme = ideal, td_ls_fd_ge\nseed = 9\n").unwrap();
    let recs = run_ber_sweep_with(&cfg, &Executor::sequential()).unwrap();
    assert_eq!(recs.len(), 6);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/ber.csv");
    write_ber_csv(create_output(&path).unwrap(), &cfg, &recs).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let preamble: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains(" = "))
        .collect::<Vec<_>>()
        .join("\n");
    assert_eq!(SimConfig::from_text(&preamble).unwrap().to_pairs(), cfg.to_pairs());
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, BER_HEADER.join(","));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
}

#[test]
fn invalid_configs_are_rejected() {
    let short_cp = SimConfig::from_text("cp = 4").unwrap();
    assert!(matches!(
        run_ber_sweep_with(&short_cp, &Executor::sequential()),
        Err(Error::ProfileTooLong { .. })
    ));
    let too_many_taps = SimConfig::from_text("taps = 20").unwrap();
    assert!(matches!(
        run_ber_sweep_with(&too_many_taps, &Executor::sequential()),
        Err(Error::CyclicPrefixTooShort { .. })
    ));
    assert!(SimConfig::from_text("n = 100").unwrap().validate().is_err());
    assert!(SimConfig::from_text("bogus = 1").is_err());
}

#[test]
fn loss_surface_matches_pointwise_formula() {
    let cells = run_snr_loss_surface(&[0.0, 20.0, 30.0], &[-6.0, 0.0, 4.0]);
    assert_eq!(cells.len(), 9);
    for c in &cells {
        let p = IqParams::from_degrees_db(c.theta_deg, c.alpha_db);
        assert_relative_eq!(c.loss_db.unwrap(), snr_loss_ge(&p, p.kappa()).unwrap());
        assert!(c.loss_db.unwrap() >= -1e-12);
    }
    // Loss grows with the phase error.
    assert!(cells[7].loss_db > cells[4].loss_db);
}
