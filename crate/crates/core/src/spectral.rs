//! Complex-vector primitives: the unitary DFT and the mirror-conjugation
//! operator.
//!
//! Bins are indexed from 0 here. Bin 0 is DC and bin `n / 2` is Nyquist;
//! the mirror of bin `k` is bin `(n - k) % n`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(n));
    }
    Ok(())
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// A planned unitary DFT of fixed size.
///
/// `forward` computes `F x` with `F(m, n) = exp(-j 2 pi m n / N) / sqrt(N)`
/// and `inverse` its adjoint. Plans are shared behind `Arc`, so a `Dft` is
/// cheap to clone and safe to use from many threads at once.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Dft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        check_power_of_two(n)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward_in_place(&self, buf: &mut [C64]) -> Result<()> {
        check_len(self.n, buf.len())?;
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn inverse_in_place(&self, buf: &mut [C64]) -> Result<()> {
        check_len(self.n, buf.len())?;
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn forward(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut out = x.to_vec();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    pub fn inverse(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut out = x.to_vec();
        self.inverse_in_place(&mut out)?;
        Ok(out)
    }

    /// Forward transform of `x` zero-padded to the transform size.
    pub fn forward_padded(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() > self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        out[..x.len()].copy_from_slice(x);
        self.forward_in_place(&mut out)?;
        Ok(out)
    }
}

/// Unitary DFT of `x`. Plans a transform on every call; hold a [`Dft`] in
/// loops.
pub fn dft(x: &[C64]) -> Result<Vec<C64>> {
    Dft::new(x.len())?.forward(x)
}

/// Inverse unitary DFT, the exact adjoint of [`dft`].
pub fn inverse_dft(x: &[C64]) -> Result<Vec<C64>> {
    Dft::new(x.len())?.inverse(x)
}

/// Index of the mirror partner of bin `k` in an `n`-point spectrum.
#[inline]
pub fn mirror_index(k: usize, n: usize) -> usize {
    if k == 0 {
        0
    } else {
        n - k
    }
}

/// Mirror-conjugation: `out[0] = conj(x[0])`, `out[k] = conj(x[n - k])`.
///
/// This is the unique bin map with `mirror(dft(x)) == dft(conj(x))`, and it
/// is an involution.
pub fn mirror(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n).map(|k| x[mirror_index(k, n)].conj()).collect()
}

pub fn mirror_into(x: &[C64], out: &mut [C64]) {
    let n = x.len();
    debug_assert_eq!(out.len(), n);
    for (k, o) in out.iter_mut().enumerate() {
        *o = x[mirror_index(k, n)].conj();
    }
}

pub fn conjugate(x: &[C64]) -> Vec<C64> {
    x.iter().map(|v| v.conj()).collect()
}

pub fn energy(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}
