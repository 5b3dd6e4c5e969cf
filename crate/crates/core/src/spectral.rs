use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An `r × r` complex matrix of spectra and cross-spectra at one frequency,
/// stored row-major with entry `(a1, a2)` holding φ_{a1 a2}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    channels: usize,
    entries: Vec<Complex64>,
}

impl SpectralMatrix {
    pub fn zeros(channels: usize) -> Self {
        Self {
            channels,
            entries: vec![Complex64::new(0.0, 0.0); channels * channels],
        }
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be `r²`.
    pub fn from_row_major(channels: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != channels * channels {
            return Err(crate::error::invalid("spectral matrix needs r*r entries"));
        }
        Ok(Self { channels, entries })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn get(&self, a1: usize, a2: usize) -> Result<Complex64> {
        self.check(a1)?;
        self.check(a2)?;
        Ok(self.entries[a1 * self.channels + a2])
    }

    pub fn set(&mut self, a1: usize, a2: usize, value: Complex64) -> Result<()> {
        self.check(a1)?;
        self.check(a2)?;
        self.entries[a1 * self.channels + a2] = value;
        Ok(())
    }

    pub(crate) fn set_unchecked(&mut self, a1: usize, a2: usize, value: Complex64) {
        self.entries[a1 * self.channels + a2] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    fn check(&self, index: usize) -> Result<()> {
        if index < self.channels {
            Ok(())
        } else {
            Err(Error::ChannelOutOfRange {
                index,
                channels: self.channels,
            })
        }
    }
}
