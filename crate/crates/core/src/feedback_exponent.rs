//! Achievable error exponent of the interactive noisy-feedback scheme.
//!
//! After `K` rounds at looseness `L` the receiver sees `n` parallel AWGN
//! channels with
//!
//! ```text
//! snr_K(L) = snr · (1 + snr·(1 − L/bsnr)/(1 + L/dsnr))^{K−1}
//! ```
//!
//! and the scheme's exponent is
//!
//! ```text
//! E_FB(R) = max_{K, L} min{ E_r(snr_K(L), K·R), E_p(L) } / (2K).
//! ```
//!
//! For fixed `K` the decoding term falls and the aliasing term rises with
//! `L`, so the inner maximum sits at their crossing, located by bisection.
//! The high-SNR closed forms (`η`, `L*`, `K*` and the resulting lower bound)
//! are provided alongside.

use std::fmt;

use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::error::{domain, Error, Result};
use crate::exponents::{
    capacity_bits, critical_rate_bits, gallager_total, poltyrev_unchecked, ExpurgationEval,
};
use crate::units::{Rate, SnrValue};

pub const DEFAULT_K_MAX: usize = 64;

/// Relative bisection tolerance on the looseness.
const L_TOL: f64 = 1e-10;
/// Relative margin keeping the search strictly inside `(1, bsnr)`.
const L_MARGIN: f64 = 1e-9;

/// Which of the two error mechanisms limits the exponent at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Binding {
    /// Modulo-aliasing on the feedback link (`E_p` is the smaller term).
    Modulo,
    /// Final decoding (`E_r` is the smaller term).
    Decode,
    /// Both terms agree.
    Balanced,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::Modulo => "modulo",
            Binding::Decode => "decode",
            Binding::Balanced => "balanced",
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optimum of the feedback exponent at one rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackExponentResult {
    /// `E_FB(R)` in nats per channel use.
    pub e_fb: f64,
    pub k_star: usize,
    pub l_star: f64,
    pub binding: Binding,
    /// `L* > 4` and `K*·R < R_cr(snr_K(L*))`.
    pub region_valid: bool,
    /// The maximizing `K` equals the search limit; a larger limit might do better.
    pub k_at_limit: bool,
}

/// Search settings for [`FeedbackOptimizer::optimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackOptimizer {
    pub k_max: usize,
    pub eval: ExpurgationEval,
}

impl Default for FeedbackOptimizer {
    fn default() -> Self {
        FeedbackOptimizer {
            k_max: DEFAULT_K_MAX,
            eval: ExpurgationEval::Direct,
        }
    }
}

/// `snr_K(L)` without validation; `L < bsnr` is the caller's job.
pub(crate) fn effective_snr_raw(
    snr: f64,
    bsnr: f64,
    dsnr: f64,
    looseness: f64,
    rounds: usize,
) -> f64 {
    let gain = 1.0 + snr * (1.0 - looseness / bsnr) / (1.0 + looseness / dsnr);
    snr * gain.powi(rounds as i32 - 1)
}

/// Per-round variance reduction factor `g = 1 + snr(1 − L/bsnr)/(1 + L/dsnr)`.
pub fn round_gain(params: &ChannelParams, looseness: f64) -> Result<f64> {
    let (snr, bsnr, dsnr) = params.analysis_snrs("round_gain")?;
    check_looseness("round_gain", looseness, bsnr)?;
    Ok(1.0 + snr * (1.0 - looseness / bsnr) / (1.0 + looseness / dsnr))
}

fn check_looseness(func: &'static str, looseness: f64, bsnr: f64) -> Result<()> {
    if !(looseness >= 1.0) || looseness >= bsnr {
        return Err(domain(
            func,
            format!("looseness must satisfy 1 <= L < bsnr = {bsnr}, got {looseness}"),
        ));
    }
    Ok(())
}

fn check_rounds(func: &'static str, rounds: usize) -> Result<()> {
    if rounds == 0 {
        return Err(domain(func, "number of rounds must be >= 1"));
    }
    Ok(())
}

/// Effective snr `snr_K(L)` seen by the final decoder.
pub fn effective_snr(params: &ChannelParams, looseness: f64, rounds: usize) -> Result<SnrValue> {
    let (snr, bsnr, dsnr) = params.analysis_snrs("effective_snr")?;
    check_looseness("effective_snr", looseness, bsnr)?;
    check_rounds("effective_snr", rounds)?;
    let v = effective_snr_raw(snr, bsnr, dsnr, looseness, rounds);
    if !v.is_finite() {
        return Err(domain(
            "effective_snr",
            format!("snr_{rounds}({looseness}) overflows"),
        ));
    }
    SnrValue::new(v)
}

struct Inner {
    value: f64,
    looseness: f64,
    decode: f64,
    modulo: f64,
}

fn terms(
    snr: f64,
    bsnr: f64,
    dsnr: f64,
    rate_bits: f64,
    rounds: usize,
    l: f64,
    eval: ExpurgationEval,
) -> (f64, f64) {
    let s = effective_snr_raw(snr, bsnr, dsnr, l, rounds);
    (
        gallager_total(s, rounds as f64 * rate_bits, eval),
        poltyrev_unchecked(l),
    )
}

// Inner maximization over L for a fixed number of rounds.
fn best_looseness(
    snr: f64,
    bsnr: f64,
    dsnr: f64,
    rate_bits: f64,
    rounds: usize,
    eval: ExpurgationEval,
) -> Inner {
    let at = |l: f64| {
        let (d, m) = terms(snr, bsnr, dsnr, rate_bits, rounds, l, eval);
        Inner {
            value: d.min(m),
            looseness: l,
            decode: d,
            modulo: m,
        }
    };
    let mut lo = 1.0 + L_MARGIN;
    let mut hi = bsnr * (1.0 - L_MARGIN);
    let a = at(lo);
    let b = at(hi);
    // No sign change of E_r − E_p: the better endpoint is optimal.
    if a.decode <= a.modulo || b.decode >= b.modulo {
        return if b.value > a.value { b } else { a };
    }
    while hi - lo > L_TOL * lo {
        let mid = 0.5 * (lo + hi);
        let (d, m) = terms(snr, bsnr, dsnr, rate_bits, rounds, mid, eval);
        if d > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = at(lo);
    let b = at(hi);
    if b.value > a.value {
        b
    } else {
        a
    }
}

fn classify(decode: f64, modulo: f64) -> Binding {
    if (decode - modulo).abs() <= 1e-6 * decode.max(modulo) {
        Binding::Balanced
    } else if modulo < decode {
        Binding::Modulo
    } else {
        Binding::Decode
    }
}

impl FeedbackOptimizer {
    pub fn new(k_max: usize) -> Self {
        FeedbackOptimizer {
            k_max,
            ..Default::default()
        }
    }

    pub fn with_eval(mut self, eval: ExpurgationEval) -> Self {
        self.eval = eval;
        self
    }

    /// Maximize over `K ∈ [1, k_max]` and `L ∈ [1, bsnr)`.
    pub fn optimize(&self, params: &ChannelParams, rate: Rate) -> Result<FeedbackExponentResult> {
        let (snr, bsnr, dsnr) = params.analysis_snrs("e_fb")?;
        if self.k_max == 0 {
            return Err(domain("e_fb", "k_max must be >= 1"));
        }
        let c = capacity_bits(snr);
        if rate.bits() >= c {
            return Err(domain(
                "e_fb",
                format!("rate {} must be below capacity {c}", rate.bits()),
            ));
        }
        let mut best: Option<(usize, Inner)> = None;
        for k in 1..=self.k_max {
            let inner = best_looseness(snr, bsnr, dsnr, rate.bits(), k, self.eval);
            let norm = inner.value / (2 * k) as f64;
            let better = match &best {
                None => true,
                Some((bk, b)) => norm > b.value / (2 * *bk) as f64,
            };
            if better {
                best = Some((k, inner));
            }
        }
        let (k, inner) = best.expect("k_max >= 1");
        if k == self.k_max && self.k_max > 1 {
            log::info!("e_fb: optimum at the search limit K = {k}; consider raising k_max");
        }
        Ok(FeedbackExponentResult {
            e_fb: inner.value / (2 * k) as f64,
            k_star: k,
            l_star: inner.looseness,
            binding: classify(inner.decode, inner.modulo),
            region_valid: region_assumptions_hold(params, rate, k, inner.looseness),
            k_at_limit: k == self.k_max,
        })
    }

    /// [`optimize`](Self::optimize) over many rates in parallel; the output
    /// order matches `rates`.
    pub fn sweep(
        &self,
        params: &ChannelParams,
        rates: &[Rate],
    ) -> Vec<Result<FeedbackExponentResult>> {
        rates
            .par_iter()
            .map(|&r| self.optimize(params, r))
            .collect()
    }
}

/// `E_FB(R)` with the default evaluation and a given `K` search limit.
pub fn e_fb(params: &ChannelParams, rate: Rate, k_max: usize) -> Result<FeedbackExponentResult> {
    FeedbackOptimizer::new(k_max).optimize(params, rate)
}

/// `min{E_r(snr_K(L), K·R), E_p(L)} / (2K)` at a given operating point.
pub fn exponent_at(
    params: &ChannelParams,
    rate: Rate,
    rounds: usize,
    looseness: f64,
    eval: ExpurgationEval,
) -> Result<f64> {
    let (snr, bsnr, dsnr) = params.analysis_snrs("exponent_at")?;
    check_looseness("exponent_at", looseness, bsnr)?;
    check_rounds("exponent_at", rounds)?;
    let (d, m) = terms(snr, bsnr, dsnr, rate.bits(), rounds, looseness, eval);
    Ok(d.min(m) / (2 * rounds) as f64)
}

/// `η(x) = 1 − √(1 − 2^{−x})` for `x = R·K` in bits.
pub fn eta(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(domain(
            "eta",
            format!("argument must be finite and >= 0, got {x}"),
        ));
    }
    Ok(1.0 - (1.0 - 2f64.powf(-x)).sqrt())
}

/// High-SNR looseness `L* = bsnr / (1 + (½·η(RK)·dsnr)^{1/K})`.
pub fn balance_looseness(params: &ChannelParams, rate: Rate, rounds: usize) -> Result<f64> {
    let (_, bsnr, dsnr) = params.analysis_snrs("balance_looseness")?;
    check_rounds("balance_looseness", rounds)?;
    let h = eta(rate.bits() * rounds as f64)?;
    Ok(bsnr / (1.0 + (0.5 * h * dsnr).powf(1.0 / rounds as f64)))
}

/// High-SNR lower bound
/// `snr·dsnr·η(RK) / (16K·(1 + (½·η(RK)·dsnr)^{1/K}))`, valid for `K > 1`
/// when [`region_assumptions_hold`] at `(K, L*)`.
pub fn high_snr_bound(params: &ChannelParams, rate: Rate, rounds: usize) -> Result<f64> {
    let (snr, _, dsnr) = params.analysis_snrs("high_snr_bound")?;
    if rounds <= 1 {
        return Err(domain("high_snr_bound", "the bound requires K > 1"));
    }
    let k = rounds as f64;
    let h = eta(rate.bits() * k)?;
    Ok(snr * dsnr * h / (16.0 * k * (1.0 + (0.5 * h * dsnr).powf(1.0 / k))))
}

/// The high-SNR approximation `(bsnr − L)^K / (dsnr·L^{K−1})` of `snr_K(L)`.
pub fn effective_snr_high_snr(
    params: &ChannelParams,
    looseness: f64,
    rounds: usize,
) -> Result<f64> {
    let (_, bsnr, dsnr) = params.analysis_snrs("effective_snr_high_snr")?;
    check_looseness("effective_snr_high_snr", looseness, bsnr)?;
    check_rounds("effective_snr_high_snr", rounds)?;
    let k = rounds as i32;
    Ok((bsnr - looseness).powi(k) / (dsnr * looseness.powi(k - 1)))
}

/// Zero-rate optimal number of rounds `K* = 0.78·ln(dsnr/2)` (real valued).
pub fn kstar_zero_rate(dsnr: f64) -> Result<f64> {
    if !dsnr.is_finite() || dsnr < 2.0 {
        return Err(domain(
            "kstar_zero_rate",
            format!("dsnr must be >= 2, got {dsnr}"),
        ));
    }
    Ok(0.78 * (0.5 * dsnr).ln())
}

/// `L > 4` and `K·R < R_cr(snr_K(L))`.
pub fn region_assumptions_hold(
    params: &ChannelParams,
    rate: Rate,
    rounds: usize,
    looseness: f64,
) -> bool {
    let Ok((snr, bsnr, dsnr)) = params.analysis_snrs("region_assumptions_hold") else {
        return false;
    };
    if rounds == 0 || !(looseness > 4.0) || looseness >= bsnr {
        return false;
    }
    let s = effective_snr_raw(snr, bsnr, dsnr, looseness, rounds);
    rounds as f64 * rate.bits() < critical_rate_bits(s)
}

/// Rounds chosen by the high-SNR recipe: the better of `⌊K*⌋` and `⌈K*⌉`
/// (restricted to `K > 1`) under [`high_snr_bound`] at zero rate.
pub fn zero_rate_rounds(params: &ChannelParams) -> Result<usize> {
    let (_, _, dsnr) = params.analysis_snrs("zero_rate_rounds")?;
    let ks = kstar_zero_rate(dsnr).map_err(|e| Error::Inapplicable(e.to_string()))?;
    let mut best: Option<(usize, f64)> = None;
    for k in [ks.floor() as usize, ks.ceil() as usize] {
        if k < 2 {
            continue;
        }
        let b = high_snr_bound(params, Rate::ZERO, k)?;
        if best.is_none_or(|(_, v)| b > v) {
            best = Some((k, b));
        }
    }
    best.map(|(k, _)| k)
        .ok_or_else(|| Error::Inapplicable(format!("K* = {ks} leaves no K > 1")))
}

/// Exponent beyond the expurgation-validity region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutOfRegionExponent {
    /// `E_r(snr_K(L), K·R) / (2K)` in nats.
    pub exponent: f64,
    pub rounds: usize,
    pub looseness: f64,
    /// Highest rate (bits) at which the high-SNR assumptions hold.
    pub boundary_rate: f64,
}

/// Evaluate `E_r(snr_K(L), K·R)/(2K)` with `(K, L)` frozen at the highest
/// rate not above `rate` where [`region_assumptions_hold`] at `(K, L*)`.
///
/// `K` comes from [`zero_rate_rounds`]. The boundary is located by scanning
/// downward on a grid of `C/1000`.
pub fn out_of_region_exponent(params: &ChannelParams, rate: Rate) -> Result<OutOfRegionExponent> {
    let (snr, bsnr, dsnr) = params.analysis_snrs("out_of_region_exponent")?;
    let rounds = zero_rate_rounds(params)?;
    let step = 1e-3 * capacity_bits(snr);
    let holds = |r: f64| -> Result<Option<f64>> {
        let r = Rate::new(r)?;
        let l = balance_looseness(params, r, rounds)?;
        Ok(region_assumptions_hold(params, r, rounds, l).then_some(l))
    };
    let mut found = holds(rate.bits())?.map(|l| (rate.bits(), l));
    if found.is_none() {
        let mut j = (rate.bits() / step).floor() as i64;
        while j >= 0 {
            let r = j as f64 * step;
            if let Some(l) = holds(r)? {
                found = Some((r, l));
                break;
            }
            j -= 1;
        }
    }
    let (boundary_rate, looseness) = found.ok_or_else(|| {
        Error::Inapplicable(format!(
            "no rate up to {} satisfies the expurgation assumptions",
            rate.bits()
        ))
    })?;
    let s = effective_snr_raw(snr, bsnr, dsnr, looseness, rounds);
    let exponent = gallager_total(s, rounds as f64 * rate.bits(), ExpurgationEval::Direct)
        / (2 * rounds) as f64;
    Ok(OutOfRegionExponent {
        exponent,
        rounds,
        looseness,
        boundary_rate,
    })
}
