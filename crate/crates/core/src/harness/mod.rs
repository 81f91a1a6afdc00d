//! Monte-Carlo drivers and their CSV output.

mod config;
mod exec;
mod link;
mod mse;
mod output;
mod surface;
mod sweep;

pub use config::{default_output_dir, parse_grid, range, EarlyStop, Scheme, SimConfig, OUTPUT_DIR_ENV};
pub use exec::Executor;
pub use link::{frame_rng, random_bits, Link, Stream};
pub use mse::{run_mse_check, run_mse_check_with, training_energies, MseRecord};
pub use output::{create_output, write_ber_csv, write_mse_csv, write_surface_csv, BER_HEADER, MSE_HEADER, SURFACE_HEADER};
pub use surface::{run_snr_loss_check, run_snr_loss_surface, LossCheck, SurfaceCell};
pub use sweep::{run_ber_sweep, run_ber_sweep_with, BerRecord, SweepContext, Tally, BATCH_FRAMES};
