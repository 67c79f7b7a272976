//! Physical quantities shared by the exponent and simulation code.
//!
//! Rates are carried in bits per channel use and exponents in nats. Every
//! conversion between the two bases goes through the helpers in this module.

use std::fmt;

use crate::error::{domain, Result};

/// ln(2), the nats-per-bit conversion factor.
pub const NATS_PER_BIT: f64 = std::f64::consts::LN_2;

/// `2^(2·rate)` for a rate in bits, i.e. `e^(2·rate·ln 2)`.
#[inline]
pub fn two_pow_two_rate(rate_bits: f64) -> f64 {
    (2.0 * rate_bits * NATS_PER_BIT).exp()
}

/// `½·log2(x)` in bits.
#[inline]
pub fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

#[inline]
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * NATS_PER_BIT
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// A signal-to-noise power ratio (linear, dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SnrValue(f64);

impl SnrValue {
    pub fn new(linear: f64) -> Result<Self> {
        if !linear.is_finite() || linear <= 0.0 {
            return Err(domain(
                "SnrValue::new",
                format!("snr must be finite and > 0, got {linear}"),
            ));
        }
        Ok(SnrValue(linear))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(domain(
                "SnrValue::from_db",
                format!("snr_db must be finite, got {db}"),
            ));
        }
        Self::new(db_to_linear(db))
    }

    #[inline]
    pub fn linear(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn db(self) -> f64 {
        linear_to_db(self.0)
    }
}

impl fmt::Display for SnrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.3} dB)", self.0, self.db())
    }
}

/// A transmission rate in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn new(bits_per_use: f64) -> Result<Self> {
        if !bits_per_use.is_finite() || bits_per_use < 0.0 {
            return Err(domain(
                "Rate::new",
                format!("rate must be finite and >= 0, got {bits_per_use}"),
            ));
        }
        Ok(Rate(bits_per_use))
    }

    #[inline]
    pub fn bits(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn nats(self) -> f64 {
        bits_to_nats(self.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits/use", self.0)
    }
}
