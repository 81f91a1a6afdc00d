//! CSV output. Every file starts with the effective configuration as
//! `# key = value` lines, followed by a header row.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::SimConfig;
use super::mse::MseRecord;
use super::surface::SurfaceCell;
use super::sweep::BerRecord;
use crate::error::Result;

pub const BER_HEADER: [&str; 12] = [
    "scheme", "snr_db", "theta_deg", "alpha_db", "n", "cp", "frames", "bits", "errors", "ber", "erasures", "seed",
];

pub const MSE_HEADER: [&str; 11] = [
    "snr_db",
    "trials",
    "n",
    "taps",
    "training_symbols",
    "noise_var",
    "mse_mu",
    "mse_nu",
    "mse_fd",
    "predicted",
    "suppression",
];

pub const SURFACE_HEADER: [&str; 3] = ["theta_deg", "alpha_db", "loss_db"];

/// Opens `path` for writing, creating missing parent directories.
pub fn create_output(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_preamble<W: Write>(w: &mut W, kind: &str, cfg: &SimConfig) -> Result<()> {
    writeln!(w, "# iqofdm {} {}", kind, env!("CARGO_PKG_VERSION"))?;
    for (k, v) in cfg.to_pairs() {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

pub fn write_ber_csv<W: Write>(mut w: W, cfg: &SimConfig, records: &[BerRecord]) -> Result<()> {
    write_preamble(&mut w, "ber-sweep", cfg)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(BER_HEADER)?;
    for r in records {
        csv.write_record([
            r.scheme.id().to_string(),
            r.snr_db.to_string(),
            r.theta_deg.to_string(),
            r.alpha_db.to_string(),
            r.n.to_string(),
            r.cp.to_string(),
            r.frames.to_string(),
            r.bits.to_string(),
            r.errors.to_string(),
            r.ber.to_string(),
            r.erasures.to_string(),
            r.seed.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_mse_csv<W: Write>(mut w: W, cfg: &SimConfig, records: &[MseRecord]) -> Result<()> {
    write_preamble(&mut w, "mse-check", cfg)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(MSE_HEADER)?;
    for r in records {
        csv.write_record([
            r.snr_db.to_string(),
            r.trials.to_string(),
            r.n.to_string(),
            r.taps.to_string(),
            r.training_symbols.to_string(),
            r.noise_var.to_string(),
            r.mse_mu.to_string(),
            r.mse_nu.to_string(),
            r.mse_fd.to_string(),
            r.predicted.to_string(),
            r.suppression().to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Undefined cells are written with an empty `loss_db`.
pub fn write_surface_csv<W: Write>(mut w: W, cfg: &SimConfig, cells: &[SurfaceCell]) -> Result<()> {
    write_preamble(&mut w, "snr-loss-surface", cfg)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(SURFACE_HEADER)?;
    for c in cells {
        csv.write_record([
            c.theta_deg.to_string(),
            c.alpha_db.to_string(),
            c.loss_db.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
