//! The simulated transmit/receive chain and per-frame random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn, apply_channel, Cir, NoiseSpec};
use crate::error::Result;
use crate::iq::{distort_time_in_place, IqParams};
use crate::ofdm::OfdmModem;
use crate::spectral::C64;

/// Independent random streams of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Channel = 0,
    Data = 1,
    DataNoise = 2,
    Training = 3,
    TrainingNoise = 4,
}

/// A generator determined only by the master seed, the frame index and the
/// stream, so a frame draws the same numbers whichever worker runs it and
/// whichever scheme is being simulated.
pub fn frame_rng(seed: u64, frame: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((frame << 3) | stream as u64);
    rng
}

/// One frame's physical channel: multipath, then AWGN, then the receiver's
/// IQ mismatch, then CP removal and FFT.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub modem: &'a OfdmModem,
    pub cir: &'a Cir,
    pub noise: NoiseSpec,
}

impl Link<'_> {
    pub fn receive<R: Rng + ?Sized>(&self, spectrum: &[C64], iq: &IqParams, rng: &mut R) -> Result<Vec<C64>> {
        let tx = self.modem.to_time_with_cp(spectrum)?;
        let mut rx = apply_channel(&tx, self.cir, self.modem.cp_len())?;
        add_awgn(&mut rx, self.noise, rng);
        if !iq.is_ideal() {
            distort_time_in_place(&mut rx, iq);
        }
        self.modem.strip_cp_and_fft(&rx)
    }
}

/// Uniform random bits, one per byte.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let word: u64 = rng.random();
        let take = (count - out.len()).min(64);
        out.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: u64 = frame_rng(1, 5, Stream::Data).random();
        let b: u64 = frame_rng(1, 5, Stream::Data).random();
        let c: u64 = frame_rng(1, 5, Stream::Channel).random();
        let d: u64 = frame_rng(1, 6, Stream::Data).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn bits_are_balanced() {
        let bits = random_bits(&mut frame_rng(0, 0, Stream::Data), 100_000);
        let ones = bits.iter().filter(|b| **b == 1).count() as f64;
        assert!((ones / 100_000.0 - 0.5).abs() < 0.01);
    }
}
