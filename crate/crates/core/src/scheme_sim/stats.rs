//! Monte-Carlo aggregation over independent trials.
//!
//! Trials are processed in fixed-size chunks; each chunk is folded in trial
//! order and chunks are merged in index order, so floating-point sums are
//! identical for any worker count.

use rayon::prelude::*;

use super::{run_trial, run_trial_pair, SchemeConfig, TrialRecord};
use crate::error::{Error, Result};

/// Trials per parallel work unit.
pub const TRIAL_CHUNK: u64 = 4096;

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// An empirical frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proportion {
    pub count: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.count as f64 / self.trials as f64
        }
    }

    /// Binomial standard error `√(p(1−p)/N)` of the estimate.
    pub fn std_error(&self) -> f64 {
        let p = self.estimate();
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }

    /// Wilson 95% interval.
    pub fn wilson95(&self) -> (f64, f64) {
        wilson_interval(self.count, self.trials, Z95)
    }
}

/// Event counts and energies for one of the two coupled systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemStats {
    pub trials: u64,
    /// Aliasing counts per scheme, rounds `1..K−1`.
    pub aliasing: [Vec<u64>; 2],
    pub any_aliasing: [u64; 2],
    pub decode_errors: [u64; 2],
    /// Union of `E_1..E_K` per scheme.
    pub any_event: [u64; 2],
    /// Decoding error in either scheme.
    pub block_errors: u64,
    pub ff_energy: f64,
    pub ff_uses: u64,
    pub fb_energy: f64,
    pub fb_uses: u64,
}

impl SystemStats {
    fn empty(rounds: usize) -> Self {
        let k = rounds.saturating_sub(1);
        SystemStats {
            trials: 0,
            aliasing: [vec![0; k], vec![0; k]],
            any_aliasing: [0; 2],
            decode_errors: [0; 2],
            any_event: [0; 2],
            block_errors: 0,
            ff_energy: 0.0,
            ff_uses: 0,
            fb_energy: 0.0,
            fb_uses: 0,
        }
    }

    fn push(&mut self, rec: &TrialRecord) {
        self.trials += 1;
        for (i, s) in rec.schemes.iter().enumerate() {
            for (c, &a) in self.aliasing[i].iter_mut().zip(&s.aliasing) {
                *c += a as u64;
            }
            self.any_aliasing[i] += s.any_aliasing() as u64;
            self.decode_errors[i] += s.decode_error as u64;
            self.any_event[i] += s.any_event() as u64;
        }
        self.block_errors += rec.block_error() as u64;
        self.ff_energy += rec.ff_energy;
        self.ff_uses += rec.ff_uses as u64;
        self.fb_energy += rec.fb_energy;
        self.fb_uses += rec.fb_uses as u64;
    }

    fn merge(&mut self, other: &SystemStats) {
        self.trials += other.trials;
        for i in 0..2 {
            for (a, b) in self.aliasing[i].iter_mut().zip(&other.aliasing[i]) {
                *a += b;
            }
            self.any_aliasing[i] += other.any_aliasing[i];
            self.decode_errors[i] += other.decode_errors[i];
            self.any_event[i] += other.any_event[i];
        }
        self.block_errors += other.block_errors;
        self.ff_energy += other.ff_energy;
        self.ff_uses += other.ff_uses;
        self.fb_energy += other.fb_energy;
        self.fb_uses += other.fb_uses;
    }

    fn prop(&self, count: u64) -> Proportion {
        Proportion {
            count,
            trials: self.trials,
        }
    }

    /// `p̂(E_k^i)` for feedback round `round ∈ 1..K−1` of scheme `scheme ∈ {0, 1}`.
    pub fn p_mod(&self, scheme: usize, round: usize) -> Proportion {
        self.prop(self.aliasing[scheme][round - 1])
    }

    /// Frequency of any aliasing in a scheme.
    pub fn p_mod_any(&self, scheme: usize) -> Proportion {
        self.prop(self.any_aliasing[scheme])
    }

    /// Final decoding error frequency `p̂(E_K^i)`.
    pub fn p_dec(&self, scheme: usize) -> Proportion {
        self.prop(self.decode_errors[scheme])
    }

    /// Frequency of `∪_k E_k^i`.
    pub fn p_union(&self, scheme: usize) -> Proportion {
        self.prop(self.any_event[scheme])
    }

    /// Block error frequency (either message wrong).
    pub fn p_e(&self) -> Proportion {
        self.prop(self.block_errors)
    }

    /// `Σ_i Σ_{k=1..K} p̂(E_k^i)`.
    pub fn union_sum(&self) -> f64 {
        let n = self.trials.max(1) as f64;
        let total: u64 = (0..2)
            .map(|i| self.aliasing[i].iter().sum::<u64>() + self.decode_errors[i])
            .sum();
        total as f64 / n
    }

    /// Average power per feedforward channel use.
    pub fn ff_power(&self) -> f64 {
        if self.ff_uses == 0 {
            0.0
        } else {
            self.ff_energy / self.ff_uses as f64
        }
    }

    /// Average power per feedback channel use.
    pub fn fb_power(&self) -> f64 {
        if self.fb_uses == 0 {
            0.0
        } else {
            self.fb_energy / self.fb_uses as f64
        }
    }
}

/// Aggregate statistics of a Monte-Carlo campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub rounds: usize,
    pub real: SystemStats,
    pub coupled: SystemStats,
    /// Trials on which real and coupled systems agree (Lemma 1).
    pub lemma1_agreement: u64,
    /// `Σ ε_K²` over the components of schemes without aliasing (real system).
    pub final_sq_sum: f64,
    /// Number of components in `final_sq_sum`.
    pub final_count: u64,
}

impl ErrorEstimate {
    fn empty(rounds: usize) -> Self {
        ErrorEstimate {
            trials: 0,
            rounds,
            real: SystemStats::empty(rounds),
            coupled: SystemStats::empty(rounds),
            lemma1_agreement: 0,
            final_sq_sum: 0.0,
            final_count: 0,
        }
    }

    fn push(&mut self, real: &TrialRecord, coupled: &TrialRecord, dim: usize) {
        self.trials += 1;
        self.real.push(real);
        self.coupled.push(coupled);
        self.lemma1_agreement += real.coupled_agreement as u64;
        for s in &real.schemes {
            if !s.any_aliasing() {
                self.final_sq_sum += s.final_error(dim).iter().map(|e| e * e).sum::<f64>();
                self.final_count += dim as u64;
            }
        }
    }

    fn merge(&mut self, other: &ErrorEstimate) {
        self.trials += other.trials;
        self.real.merge(&other.real);
        self.coupled.merge(&other.coupled);
        self.lemma1_agreement += other.lemma1_agreement;
        self.final_sq_sum += other.final_sq_sum;
        self.final_count += other.final_count;
    }

    /// Empirical `p_e ≤ Σ p̂(E_k^i)` (coupled system) up to three Wilson
    /// half-widths of `p̂_e`.
    pub fn union_bound_holds(&self) -> bool {
        let pe = self.real.p_e();
        let (lo, hi) = pe.wilson95();
        pe.estimate() <= self.coupled.union_sum() + 3.0 * (hi - lo)
    }

    /// Estimate of `σ_K²` conditioned on no aliasing, with its standard
    /// error `σ̂²·√(2/N)` (zero-mean Gaussian errors assumed).
    pub fn final_variance(&self) -> Option<(f64, f64)> {
        if self.final_count == 0 {
            return None;
        }
        let n = self.final_count as f64;
        let v = self.final_sq_sum / n;
        Some((v, v * (2.0 / n).sqrt()))
    }
}

/// Run `trials` paired real/coupled trials (indices `0..trials`) and
/// aggregate event frequencies, powers and conditional error moments.
pub fn estimate_error_prob(config: &SchemeConfig, trials: u64) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    let dim = config.dimension();
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let partials: Vec<ErrorEstimate> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = ErrorEstimate::empty(config.rounds());
            for t in c * TRIAL_CHUNK..((c + 1) * TRIAL_CHUNK).min(trials) {
                let (real, coupled) = run_trial_pair(config, t);
                acc.push(&real, &coupled, dim);
            }
            acc
        })
        .collect();
    let mut total = ErrorEstimate::empty(config.rounds());
    for p in &partials {
        total.merge(p);
    }
    Ok(total)
}

/// Final estimation-error components `ε_K` (real system) of every scheme
/// that saw no aliasing, in trial order.
pub fn final_errors_without_aliasing(config: &SchemeConfig, trials: u64) -> Vec<f64> {
    let dim = config.dimension();
    (0..trials)
        .into_par_iter()
        .flat_map_iter(|t| {
            let rec = run_trial(config, t);
            let mut out = Vec::with_capacity(2 * dim);
            for s in &rec.schemes {
                if !s.any_aliasing() {
                    out.extend_from_slice(s.final_error(dim));
                }
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403832).abs() < 1e-5);
        assert!((hi - 0.596168).abs() < 1e-5);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn proportion_basics() {
        let p = Proportion {
            count: 25,
            trials: 100,
        };
        assert_eq!(p.estimate(), 0.25);
        assert!((p.std_error() - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let (lo, hi) = p.wilson95();
        assert!(lo < 0.25 && 0.25 < hi);
    }
}
