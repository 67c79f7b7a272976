//! Error exponents of the AWGN channel without feedback, and the Poltyrev
//! exponent of unconstrained lattice decoding.
//!
//! Rates are in bits per channel use, exponents in nats per channel use
//! (error probability `≐ e^{-n·E}`).
//!
//! The Gallager exponent `E_r(snr, R)` is assembled from three regions:
//!
//! | region           | rates                 | function                 |
//! |------------------|-----------------------|--------------------------|
//! | expurgation      | `0 ≤ R ≤ R_ex`        | [`expurgation_exp`]      |
//! | random coding    | `R_ex < R ≤ R_cr`     | [`random_coding_exp`]    |
//! | sphere packing   | `R_cr < R ≤ C`        | [`sphere_packing_exp`]   |
//!
//! The random-coding branch is written in nats throughout:
//! `E_rc = 1 − β + snr/2 + ½ln(β − snr/2) + ½ln β − R·ln 2` with
//! `β = 2^{2R_cr}`. This is the form that joins the neighbouring branches
//! continuously at `R_ex` and `R_cr`.

use std::fmt;

use crate::error::{domain, Result};
use crate::units::{half_log2, two_pow_two_rate, Rate, SnrValue, NATS_PER_BIT};

/// Which branch of the Gallager exponent is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentRegion {
    SpherePacking,
    RandomCoding,
    Expurgation,
}

impl ExponentRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            ExponentRegion::SpherePacking => "sphere_packing",
            ExponentRegion::RandomCoding => "random_coding",
            ExponentRegion::Expurgation => "expurgation",
        }
    }
}

impl fmt::Display for ExponentRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Region boundaries of the Gallager exponent at a given snr, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBoundaries {
    pub capacity: Rate,
    pub critical_rate: Rate,
    pub expurgation_rate: Rate,
}

impl RegionBoundaries {
    pub fn at(snr: SnrValue) -> Self {
        RegionBoundaries {
            capacity: capacity(snr),
            critical_rate: critical_rate(snr),
            expurgation_rate: expurgation_rate(snr),
        }
    }

    /// Region containing `rate`; boundary rates belong to the lower-rate region.
    pub fn classify(&self, rate: Rate) -> ExponentRegion {
        if rate <= self.expurgation_rate {
            ExponentRegion::Expurgation
        } else if rate <= self.critical_rate {
            ExponentRegion::RandomCoding
        } else {
            ExponentRegion::SpherePacking
        }
    }
}

/// How the expurgation branch `snr/4·(1 − √(1 − 2^{-2R}))` is evaluated.
///
/// `Direct` evaluates the expression as written in double precision. Once
/// `2^{-2R}` falls below machine epsilon the difference `1 − √(1 − x)`
/// collapses to a handful of representable values, which flattens the
/// feedback exponent into plateaus at high rates. The published reference
/// curves were produced this way, so it is the default.
///
/// `Compensated` uses `x / (1 + √(1 − x))`, which keeps full relative
/// precision for arbitrarily small `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum ExpurgationEval {
    #[default]
    Direct,
    Compensated,
}

/// Shannon capacity `½·log2(1 + snr)`.
pub fn capacity(snr: SnrValue) -> Rate {
    Rate::new(capacity_bits(snr.linear())).expect("capacity of a positive snr is a valid rate")
}

/// Critical rate `½·log2(½ + snr/4 + ½√(1 + snr²/4))`.
pub fn critical_rate(snr: SnrValue) -> Rate {
    Rate::new(critical_rate_bits(snr.linear())).expect("critical rate is a valid rate")
}

/// Expurgation rate `½·log2(½ + ½√(1 + snr²/4))`.
pub fn expurgation_rate(snr: SnrValue) -> Rate {
    Rate::new(expurgation_rate_bits(snr.linear())).expect("expurgation rate is a valid rate")
}

pub(crate) fn capacity_bits(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / NATS_PER_BIT
}

// √(1 + snr²/4) computed without overflow for huge snr.
fn root_term(snr: f64) -> f64 {
    (0.5 * snr).hypot(1.0)
}

pub(crate) fn critical_rate_bits(snr: f64) -> f64 {
    half_log2(0.5 + 0.25 * snr + 0.5 * root_term(snr))
}

pub(crate) fn expurgation_rate_bits(snr: f64) -> f64 {
    half_log2(0.5 + 0.5 * root_term(snr))
}

/// Poltyrev exponent of ML decoding of an unconstrained lattice, as a
/// function of the normalized volume-to-noise ratio `x = μ/(2πe)`.
///
/// Returns 0 for `0 < x ≤ 1` (no reliable decoding below threshold).
pub fn poltyrev_exponent(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(domain(
            "poltyrev_exponent",
            format!("argument must be > 0, got {x}"),
        ));
    }
    Ok(poltyrev_unchecked(x))
}

pub(crate) fn poltyrev_unchecked(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else if x <= 2.0 {
        0.5 * (x - 1.0 - x.ln())
    } else if x <= 4.0 {
        0.5 * (x.ln() + (std::f64::consts::E / 4.0).ln())
    } else {
        x / 8.0
    }
}

/// Sphere-packing exponent `E_sp(snr, R)` with `β = 2^{2R}`.
///
/// `R = 0` returns the limit `snr/2`; the evaluation stays accurate for
/// arbitrarily small positive rates. Rates above capacity are rejected.
pub fn sphere_packing_exp(snr: SnrValue, rate: Rate) -> Result<f64> {
    let c = capacity_bits(snr.linear());
    if rate.bits() > c {
        return Err(domain(
            "sphere_packing_exp",
            format!("rate {} exceeds capacity {c}", rate.bits()),
        ));
    }
    Ok(sphere_packing_unchecked(snr.linear(), rate.bits()))
}

// With t = 4β/(snr(β−1)) and r = √(1+t):
//   snr/(4β)·(β+1−(β−1)r) = snr/(2β) − 1/(r+1)
//   β − snr(β−1)/2·(r−1)   = β·t/(r+1)²
// which avoids the cancellation of the textbook form at large snr.
pub(crate) fn sphere_packing_unchecked(snr: f64, rate_bits: f64) -> f64 {
    // With t = 4β/(snr(β−1)) and r = √(1+t): t/(r+1)² = 1/(1 + 2(r+1)/t).
    let beta = two_pow_two_rate(rate_bits);
    let t = 4.0 * beta / (snr * (2.0 * rate_bits * NATS_PER_BIT).exp_m1());
    if rate_bits <= 0.0 || !t.is_finite() {
        return 0.5 * snr;
    }
    let r = (1.0 + t).sqrt();
    let e = snr / (2.0 * beta) - 1.0 / (r + 1.0) + rate_bits * NATS_PER_BIT
        - 0.5 * (2.0 * (r + 1.0) / t).ln_1p();
    e.max(0.0)
}

/// Random-coding exponent `E_rc(snr, R)`, linear in `R` with slope `−ln 2`
/// per bit.
pub fn random_coding_exp(snr: SnrValue, rate: Rate) -> Result<f64> {
    Ok(random_coding_unchecked(snr.linear(), rate.bits()))
}

pub(crate) fn random_coding_unchecked(snr: f64, rate_bits: f64) -> f64 {
    // β − snr/2 rewritten to avoid cancellation; ½ln β = R_cr·ln 2.
    let rt = root_term(snr);
    let d = 0.5 + 0.5 / (rt + 0.5 * snr);
    1.0 - d + 0.5 * d.ln() + (critical_rate_bits(snr) - rate_bits) * NATS_PER_BIT
}

/// Expurgated exponent `snr/4·(1 − √(1 − 2^{-2R}))`, evaluated directly.
pub fn expurgation_exp(snr: SnrValue, rate: Rate) -> Result<f64> {
    Ok(expurgation_unchecked(
        snr.linear(),
        rate.bits(),
        ExpurgationEval::Direct,
    ))
}

/// Expurgated exponent with the cancellation-free evaluation.
pub fn expurgation_exp_compensated(snr: SnrValue, rate: Rate) -> Result<f64> {
    Ok(expurgation_unchecked(
        snr.linear(),
        rate.bits(),
        ExpurgationEval::Compensated,
    ))
}

pub(crate) fn expurgation_unchecked(snr: f64, rate_bits: f64, eval: ExpurgationEval) -> f64 {
    match eval {
        ExpurgationEval::Direct => 0.25 * snr * (1.0 - (1.0 - 2f64.powf(-2.0 * rate_bits)).sqrt()),
        ExpurgationEval::Compensated => {
            let x = 2f64.powf(-2.0 * rate_bits);
            0.25 * snr * x / (1.0 + (1.0 - x).sqrt())
        }
    }
}

/// Gallager exponent `E_r(snr, R)` for `0 ≤ R ≤ C`, with the active region.
pub fn gallager_exp(snr: SnrValue, rate: Rate) -> Result<(f64, ExponentRegion)> {
    gallager_exp_with(snr, rate, ExpurgationEval::Direct)
}

/// [`gallager_exp`] with an explicit evaluation mode for the expurgation branch.
pub fn gallager_exp_with(
    snr: SnrValue,
    rate: Rate,
    eval: ExpurgationEval,
) -> Result<(f64, ExponentRegion)> {
    let bounds = RegionBoundaries::at(snr);
    if rate > bounds.capacity {
        return Err(domain(
            "gallager_exp",
            format!(
                "rate {} exceeds capacity {}",
                rate.bits(),
                bounds.capacity.bits()
            ),
        ));
    }
    let region = bounds.classify(rate);
    Ok((eval_region(snr.linear(), rate.bits(), region, eval), region))
}

fn eval_region(snr: f64, rate_bits: f64, region: ExponentRegion, eval: ExpurgationEval) -> f64 {
    match region {
        ExponentRegion::Expurgation => expurgation_unchecked(snr, rate_bits, eval),
        ExponentRegion::RandomCoding => random_coding_unchecked(snr, rate_bits),
        ExponentRegion::SpherePacking => sphere_packing_unchecked(snr, rate_bits),
    }
}

/// Total version of `E_r` used by the optimizers: zero at or above capacity,
/// unbounded for an infinite snr.
pub(crate) fn gallager_total(snr: f64, rate_bits: f64, eval: ExpurgationEval) -> f64 {
    if snr.is_infinite() {
        return f64::INFINITY;
    }
    if !(snr > 0.0) || rate_bits >= capacity_bits(snr) {
        return 0.0;
    }
    let region = if rate_bits <= expurgation_rate_bits(snr) {
        ExponentRegion::Expurgation
    } else if rate_bits <= critical_rate_bits(snr) {
        ExponentRegion::RandomCoding
    } else {
        ExponentRegion::SpherePacking
    };
    eval_region(snr, rate_bits, region, eval)
}
